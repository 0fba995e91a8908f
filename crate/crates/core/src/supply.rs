//! Random supply functions and the downshift operator.
//!
//! Four formulations of `s(q, z)` are supported:
//!
//! 1. proportional yield `q * z`
//! 2. random capacity `min(q, z)`
//! 3. concave saturation `q z / (q + alpha z^rho)`, `rho <= 1`, `alpha > 0`
//! 4. proportional allocation `q k / (q + z)`, `k > 0`
//!
//! All are nondecreasing in `q` for fixed `z`, vanish at `q = 0`, and are
//! never negative.
//!
//! The key observable property: once `s(q, z)` has been seen, `s(q', z)` is
//! computable for every `q' <= q` without seeing `z` itself. Under capacity
//! this follows from the min structure even though `z` stays censored when
//! `z >= q`; under the other three `z` inverts from `(q, s)`.
//! [`SupplyFunction::downshift`] implements exactly that computation, so code
//! holding only a [`SupplyFunction`] (no shock distribution) can replay
//! smaller orders against observed data.

use alloc::format;

use crate::dist::Distribution;
use crate::math;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Relative slack when validating that an observed supply lies in the
/// feasible image of `realize(q, .)`; absorbs float noise from round trips.
const IMAGE_TOLERANCE: f64 = 1e-9;

/// The functional form of the supply response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation {
    /// `s(q, z) = q * z`
    Yield,
    /// `s(q, z) = min(q, z)`
    Capacity,
    /// `s(q, z) = q z / (q + alpha z^rho)`
    Saturating { alpha: f64, rho: f64 },
    /// `s(q, z) = q k / (q + z)`
    Allocation { k: f64 },
}

/// A supply function together with the shock support `[z_lo, z_hi]`.
///
/// Carries no distribution: this is the interface handed to learning code,
/// which may realize and downshift but cannot sample or take expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyFunction {
    form: Formulation,
    z_lo: f64,
    z_hi: f64,
}

impl SupplyFunction {
    pub fn new(form: Formulation, z_lo: f64, z_hi: f64) -> Result<Self> {
        match form {
            Formulation::Saturating { alpha, rho } => {
                if !(alpha > 0.0) || !alpha.is_finite() || !(rho <= 1.0) || !rho.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "saturating supply requires alpha > 0 and rho <= 1, got alpha={alpha}, rho={rho}"
                    )));
                }
            }
            Formulation::Allocation { k } => {
                if !(k > 0.0) || !k.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "allocation supply requires k > 0, got {k}"
                    )));
                }
            }
            Formulation::Yield | Formulation::Capacity => {}
        }
        if !z_lo.is_finite() || !z_hi.is_finite() || z_lo < 0.0 || z_lo > z_hi {
            return Err(Error::InvalidModel(format!(
                "shock support requires 0 <= z_lo <= z_hi, got [{z_lo}, {z_hi}]"
            )));
        }
        Ok(Self { form, z_lo, z_hi })
    }

    pub fn form(&self) -> Formulation {
        self.form
    }

    /// Shock support bounds `[z_lo, z_hi]`.
    pub fn z_bounds(&self) -> (f64, f64) {
        (self.z_lo, self.z_hi)
    }

    /// The supplied quantity for order `q` under shock `z`.
    pub fn realize(&self, q: f64, z: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(Error::NegativeQuantity(q));
        }
        Ok(self.realize_raw(q, z))
    }

    #[inline]
    fn realize_raw(&self, q: f64, z: f64) -> f64 {
        if q == 0.0 {
            return 0.0;
        }
        match self.form {
            Formulation::Yield => q * z,
            Formulation::Capacity => q.min(z),
            Formulation::Saturating { alpha, rho } => {
                let denom = q + alpha * math::powf(z, rho);
                if denom.is_infinite() {
                    0.0
                } else {
                    q * z / denom
                }
            }
            Formulation::Allocation { k } => q * k / (q + z),
        }
    }

    /// Feasible image `{realize(q, z) : z in [z_lo, z_hi]}` as an interval.
    fn image(&self, q: f64) -> (f64, f64) {
        let a = self.realize_raw(q, self.z_lo);
        let b = self.realize_raw(q, self.z_hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Computes `realize(q_prime, z)` from an observed `realize(q, z)`,
    /// without access to `z`. Requires `q_prime <= q`.
    pub fn downshift(&self, q: f64, observed: f64, q_prime: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(Error::NegativeQuantity(q));
        }
        if !(q_prime >= 0.0) {
            return Err(Error::NegativeQuantity(q_prime));
        }
        if q_prime > q {
            return Err(Error::DownshiftAboveObserved { q, q_prime });
        }
        if let Formulation::Capacity = self.form {
            // observed = q means z >= q, so any q' <= q is fully supplied;
            // observed < q reveals z exactly.
            self.check_image(q, observed)?;
            return Ok(if observed >= q {
                q_prime
            } else {
                q_prime.min(observed)
            });
        }
        if q == 0.0 {
            // q_prime <= q forces q_prime = 0 here.
            return Ok(0.0);
        }
        if q_prime == 0.0 {
            self.check_image(q, observed)?;
            return Ok(0.0);
        }
        let z = self.invert_shock(q, observed)?;
        Ok(self.realize_raw(q_prime, z))
    }

    fn check_image(&self, q: f64, observed: f64) -> Result<()> {
        let (lo, hi) = self.image(q);
        let slack = IMAGE_TOLERANCE * hi.abs().max(1.0);
        if observed < lo - slack || observed > hi + slack {
            return Err(Error::ObservedOutOfRange { q, observed });
        }
        Ok(())
    }

    /// Recovers `z` from `(q, observed)` for the invertible formulations.
    /// Yield and allocation invert in closed form; the saturating form is
    /// strictly increasing in `z` for `q > 0` and is bracketed by bisection
    /// down to the f64 grid (well inside the 1e-10 requirement).
    pub fn invert_shock(&self, q: f64, observed: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Err(Error::ShockUnrecoverable);
        }
        self.check_image(q, observed)?;
        let clamp = |z: f64| z.max(self.z_lo).min(self.z_hi);
        match self.form {
            Formulation::Yield => Ok(clamp(observed / q)),
            Formulation::Capacity => {
                if observed < q {
                    Ok(clamp(observed))
                } else {
                    // z is censored at q; not uniquely recoverable.
                    Err(Error::ShockUnrecoverable)
                }
            }
            Formulation::Allocation { k } => Ok(clamp(q * k / observed - q)),
            Formulation::Saturating { .. } => {
                let (mut lo, mut hi) = (self.z_lo, self.z_hi);
                if observed <= self.realize_raw(q, lo) {
                    return Ok(lo);
                }
                if observed >= self.realize_raw(q, hi) {
                    return Ok(hi);
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.realize_raw(q, mid) < observed {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let (flo, fhi) = (self.realize_raw(q, lo), self.realize_raw(q, hi));
                Ok(if math::abs(flo - observed) <= math::abs(fhi - observed) {
                    lo
                } else {
                    hi
                })
            }
        }
    }
}

/// A supply function paired with the shock distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyModel {
    function: SupplyFunction,
    z: Distribution,
}

impl SupplyModel {
    pub fn new(form: Formulation, z: Distribution) -> Result<Self> {
        z.validate()?;
        let (z_lo, z_hi) = z.support();
        Ok(Self {
            function: SupplyFunction::new(form, z_lo, z_hi)?,
            z,
        })
    }

    /// The distribution-free part, safe to hand to learning code.
    pub fn function(&self) -> &SupplyFunction {
        &self.function
    }

    pub fn z_distribution(&self) -> &Distribution {
        &self.z
    }

    pub fn sample_z(&self, rng: &mut SeededRng) -> f64 {
        self.z.sample(rng)
    }

    pub fn realize(&self, q: f64, z: f64) -> Result<f64> {
        self.function.realize(q, z)
    }

    pub fn downshift(&self, q: f64, observed: f64, q_prime: f64) -> Result<f64> {
        self.function.downshift(q, observed, q_prime)
    }

    /// E[s(q, Z)]: exact finite sum for discrete shocks, Monte Carlo over
    /// `n_draws` otherwise.
    pub fn mean_supply(&self, q: f64, n_draws: u64, rng: &mut SeededRng) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(Error::NegativeQuantity(q));
        }
        if let Distribution::Discrete { atoms } = &self.z {
            return Ok(atoms
                .iter()
                .map(|&(v, p)| p * self.function.realize_raw(q, v))
                .sum());
        }
        let n = n_draws.max(1);
        let mut sum = 0.0;
        for _ in 0..n {
            let z = self.z.sample(rng);
            sum += self.function.realize_raw(q, z);
        }
        Ok(sum / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn capacity(z_lo: f64, z_hi: f64) -> SupplyFunction {
        SupplyFunction::new(Formulation::Capacity, z_lo, z_hi).unwrap()
    }

    #[test]
    fn realize_matches_the_formulations() {
        let cap = capacity(0.0, 10.0);
        assert_eq!(cap.realize(5.0, 3.0).unwrap(), 3.0);

        let yld = SupplyFunction::new(Formulation::Yield, 0.0, 1.0).unwrap();
        assert_eq!(yld.realize(10.0, 0.0).unwrap(), 0.0);

        let alloc = SupplyFunction::new(Formulation::Allocation { k: 12.0 }, 0.0, 10.0).unwrap();
        assert_eq!(alloc.realize(4.0, 2.0).unwrap(), 8.0);

        let sat =
            SupplyFunction::new(Formulation::Saturating { alpha: 1.0, rho: 0.5 }, 0.0, 4.0)
                .unwrap();
        // q z / (q + alpha sqrt(z)) = 2*4 / (2 + 2) = 2
        assert!((sat.realize(2.0, 4.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_order_supplies_nothing() {
        for f in all_forms() {
            assert_eq!(f.realize(0.0, 3.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_order_is_rejected() {
        let cap = capacity(0.0, 10.0);
        assert!(matches!(
            cap.realize(-1.0, 3.0),
            Err(Error::NegativeQuantity(_))
        ));
        assert!(cap.downshift(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn capacity_downshift_follows_the_censoring_cases() {
        let cap = capacity(0.0, 10.0);
        // Full delivery: z >= q, so any smaller order is fully supplied.
        assert_eq!(cap.downshift(5.0, 5.0, 3.0).unwrap(), 3.0);
        // Partial delivery reveals z = 2.
        assert_eq!(cap.downshift(5.0, 2.0, 3.0).unwrap(), 2.0);
    }

    #[test]
    fn yield_downshift_recovers_the_proportion() {
        let yld = SupplyFunction::new(Formulation::Yield, 0.0, 1.0).unwrap();
        assert_eq!(yld.downshift(10.0, 5.0, 4.0).unwrap(), 2.0);
    }

    #[test]
    fn downshift_rejects_bad_inputs() {
        let cap = capacity(0.0, 10.0);
        assert!(matches!(
            cap.downshift(3.0, 2.0, 4.0),
            Err(Error::DownshiftAboveObserved { .. })
        ));
        // observed > q is outside the capacity image
        assert!(matches!(
            cap.downshift(5.0, 7.0, 3.0),
            Err(Error::ObservedOutOfRange { .. })
        ));
        let yld = SupplyFunction::new(Formulation::Yield, 0.0, 1.0).unwrap();
        assert!(yld.downshift(10.0, 12.0, 4.0).is_err());
    }

    #[test]
    fn downshift_from_zero_order_is_zero() {
        for f in all_forms() {
            assert_eq!(f.downshift(0.0, 0.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn mean_supply_is_exact_for_discrete_shocks() {
        let m = SupplyModel::new(
            Formulation::Capacity,
            Distribution::Discrete {
                atoms: vec![(3.0, 0.5), (7.0, 0.5)],
            },
        )
        .unwrap();
        let mut rng = SeededRng::new(0);
        assert_eq!(m.mean_supply(20.0, 1, &mut rng).unwrap(), 5.0);
        assert_eq!(m.mean_supply(0.0, 1, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn mean_supply_monte_carlo_matches_closed_form() {
        // yield with z ~ U(0,1): E[s(10, Z)] = 10 * 1/2 = 5
        let m = SupplyModel::new(
            Formulation::Yield,
            Distribution::Uniform { lo: 0.0, hi: 1.0 },
        )
        .unwrap();
        let mut rng = SeededRng::new(77);
        let est = m.mean_supply(10.0, 1_000_000, &mut rng).unwrap();
        assert!((est - 5.0).abs() < 0.02, "estimate {est}");
    }

    fn all_forms() -> Vec<SupplyFunction> {
        vec![
            SupplyFunction::new(Formulation::Yield, 0.0, 1.0).unwrap(),
            SupplyFunction::new(Formulation::Capacity, 5.0, 15.0).unwrap(),
            SupplyFunction::new(Formulation::Saturating { alpha: 2.0, rho: 0.7 }, 0.5, 4.0)
                .unwrap(),
            SupplyFunction::new(Formulation::Allocation { k: 12.0 }, 5.0, 15.0).unwrap(),
        ]
    }

    fn rel_err(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs().max(1.0)
    }

    proptest! {
        #[test]
        fn downshift_agrees_with_direct_realization(
            form_idx in 0usize..4,
            u_z in 0.0f64..1.0,
            q in 0.0f64..20.0,
            frac in 0.0f64..1.0,
        ) {
            let f = &all_forms()[form_idx];
            let (z_lo, z_hi) = f.z_bounds();
            let z = z_lo + u_z * (z_hi - z_lo);
            let q_prime = q * frac;
            let observed = f.realize(q, z).unwrap();
            let shifted = f.downshift(q, observed, q_prime).unwrap();
            let direct = f.realize(q_prime, z).unwrap();
            prop_assert!(
                rel_err(shifted, direct) <= 1e-12,
                "form {form_idx}: downshift {shifted} vs direct {direct}"
            );
        }

        #[test]
        fn realization_is_nondecreasing_in_order(
            form_idx in 0usize..4,
            u_z in 0.0f64..1.0,
            q1 in 0.0f64..20.0,
            q2 in 0.0f64..20.0,
        ) {
            let f = &all_forms()[form_idx];
            let (z_lo, z_hi) = f.z_bounds();
            let z = z_lo + u_z * (z_hi - z_lo);
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            prop_assert!(f.realize(lo, z).unwrap() <= f.realize(hi, z).unwrap() + 1e-12);
        }

        #[test]
        fn capacity_observations_are_censored_at_the_order(
            z in 5.0f64..15.0,
            q in 0.0f64..20.0,
        ) {
            let f = capacity(5.0, 15.0);
            let s = f.realize(q, z).unwrap();
            prop_assert!(s <= q);
            if s < q {
                prop_assert_eq!(s, z);
            }
        }
    }
}
