//! Lost-sales system dynamics with lead time, per-period costs, and the
//! censored observation channel.
//!
//! Event order within a period `t`:
//!
//! 1. the controller observes on-hand `I_t` and the pipeline;
//! 2. the shipment ordered `L` periods ago arrives: `s(x_{1,t}, Z_t)` units;
//! 3. the controller places the order `q_t`;
//! 4. demand `D_t` realizes, is served as far as possible, and the shortfall
//!    is lost.
//!
//! State update: `I_{t+1} = (I_t + s(x_{1,t}, Z_t) - D_t)^+`, pipeline shifts
//! left with `q_t` entering at slot `L`.
//!
//! Policies never see `D_t` or `Z_t`. The [`Policy`] trait receives only an
//! [`OrderContext`] (own state, current arrival, last period's
//! [`CensoredObservation`]); ground truth is stored in [`PeriodRecord`]
//! behind [`Hidden`], whose reads are counted so tests can assert that a
//! learning run never touched it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use crate::dist::DemandModel;
use crate::math::pos;
use crate::rng::SeededRng;
use crate::supply::{SupplyFunction, SupplyModel};
use crate::{Error, Result};

/// Cost and horizon parameters: `h` per unit held per period, `b` per unit
/// of lost sales, lead time `L >= 1`, horizon `T >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    pub horizon: u64,
}

impl CostParams {
    pub fn new(holding: f64, penalty: f64, lead_time: usize, horizon: u64) -> Result<Self> {
        if !(holding > 0.0) || !(penalty > 0.0) || !holding.is_finite() || !penalty.is_finite() {
            return Err(Error::InvalidModel(format!(
                "costs must be strictly positive, got h={holding}, b={penalty}"
            )));
        }
        Self::allowing_zero_costs(holding, penalty, lead_time, horizon)
    }

    /// Variant admitting `h = 0` or `b = 0`, for diagnostic instances where
    /// one cost component is deliberately switched off.
    pub fn allowing_zero_costs(
        holding: f64,
        penalty: f64,
        lead_time: usize,
        horizon: u64,
    ) -> Result<Self> {
        if !(holding >= 0.0) || !(penalty >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "costs must be non-negative, got h={holding}, b={penalty}"
            )));
        }
        if lead_time < 1 {
            return Err(Error::InvalidModel("lead time must be >= 1".into()));
        }
        if horizon < 1 {
            return Err(Error::InvalidModel("horizon must be >= 1".into()));
        }
        Ok(Self {
            holding,
            penalty,
            lead_time,
            horizon,
        })
    }
}

/// On-hand inventory plus the pipeline `(x_1, ..., x_L)`, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    on_hand: f64,
    pipeline: Vec<f64>,
}

impl SystemState {
    /// The all-zero initial state.
    pub fn zeros(lead_time: usize) -> Self {
        Self {
            on_hand: 0.0,
            pipeline: vec![0.0; lead_time.max(1)],
        }
    }

    pub fn new(on_hand: f64, pipeline: Vec<f64>) -> Result<Self> {
        if !(on_hand >= 0.0) || pipeline.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidModel(
                "state quantities must be non-negative".into(),
            ));
        }
        if pipeline.is_empty() {
            return Err(Error::InvalidModel("pipeline must have length L >= 1".into()));
        }
        Ok(Self { on_hand, pipeline })
    }

    pub fn on_hand(&self) -> f64 {
        self.on_hand
    }

    pub fn pipeline(&self) -> &[f64] {
        &self.pipeline
    }
}

/// What the controller legally sees about a completed period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredObservation {
    /// `s(x_{1,t}, Z_t)` — observable even when it is zero.
    pub realized_supply: f64,
    /// `min(I_t + s, D_t)`.
    pub sales: f64,
    /// `I_{t+1}`.
    pub end_on_hand: f64,
    /// `I_{t+1} == 0`; the lost volume itself stays hidden.
    pub stockout: bool,
}

/// Oracle-only ground truth. Reading the value goes through [`Hidden::reveal`]
/// and is counted, so a censorship-compliance test can assert zero reads
/// after a learning run.
#[derive(Debug, Clone)]
pub struct Hidden<T: Copy> {
    value: T,
    reads: Cell<u64>,
}

impl<T: Copy> Hidden<T> {
    fn new(value: T) -> Self {
        Self {
            value,
            reads: Cell::new(0),
        }
    }

    /// Oracle access; increments the read counter.
    pub fn reveal(&self) -> T {
        self.reads.set(self.reads.get() + 1);
        self.value
    }

    pub fn reveal_count(&self) -> u64 {
        self.reads.get()
    }
}

/// One period of a run: the censored view plus hidden ground truth retained
/// for oracle tests and cost accounting.
#[derive(Debug, Clone)]
pub struct PeriodRecord {
    pub t: u64,
    pub order: f64,
    pub observation: CensoredObservation,
    pub demand: Hidden<f64>,
    pub shock: Hidden<f64>,
    /// `C_t = h (I_t + s - D_t)^+ + b (D_t - I_t - s)^+`.
    pub cost: Hidden<f64>,
}

impl PeriodRecord {
    /// Total oracle reads against this record.
    pub fn hidden_reads(&self) -> u64 {
        self.demand.reveal_count() + self.shock.reveal_count() + self.cost.reveal_count()
    }
}

/// What a policy sees when deciding the order for period `t`. The arrival has
/// already landed (event 2 precedes event 3); demand has not realized yet.
///
/// The interface enforces non-anticipativity by construction: there is no
/// demand or shock field to read.
///
/// ```compile_fail
/// use lostsales_core::inventory::{OrderContext, Policy};
///
/// struct Cheater;
/// impl Policy for Cheater {
///     fn place_order(&mut self, ctx: &OrderContext) -> f64 {
///         ctx.demand // no such field: the observation channel is censored
///     }
/// }
/// ```
#[derive(Debug)]
pub struct OrderContext<'a> {
    /// Period index, 1-based.
    pub t: u64,
    /// `I_t`, before this period's arrival.
    pub on_hand: f64,
    /// `s(x_{1,t}, Z_t)`, the arrival that just landed.
    pub arrival: f64,
    /// Outstanding orders, oldest first (the arrival slot already shifted out).
    pub pipeline: &'a [f64],
    /// The completed observation of period `t - 1`; `None` at `t = 1`.
    pub prev: Option<&'a CensoredObservation>,
}

/// An order-emitting procedure consuming only censored data.
pub trait Policy {
    fn place_order(&mut self, ctx: &OrderContext<'_>) -> f64;
}

/// Orders the same quantity every period regardless of state.
#[derive(Debug, Clone, Copy)]
pub struct ConstantOrder(pub f64);

impl Policy for ConstantOrder {
    fn place_order(&mut self, _ctx: &OrderContext<'_>) -> f64 {
        self.0
    }
}

/// Simulation switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Kahan-compensated cost accumulation, for horizons long enough that
    /// plain summation error could matter. Off by default.
    pub compensated_sums: bool,
}

/// Result of a full run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Vec<PeriodRecord>,
    /// Sum of per-period costs (oracle-side accounting).
    pub total_cost: f64,
    /// FNV-1a over the realized `(Z_t, D_t)` bit patterns, for verifying
    /// that coupled runs consumed identical streams.
    pub stream_checksum: u64,
    pub final_state: SystemState,
}

#[inline]
fn period_cost(params: &CostParams, available: f64, demand: f64) -> f64 {
    params.holding * pos(available - demand) + params.penalty * pos(demand - available)
}

/// Advances the system one period. `t` is only recorded, not interpreted.
pub fn step(
    state: &SystemState,
    t: u64,
    order: f64,
    z: f64,
    d: f64,
    params: &CostParams,
    supply: &SupplyFunction,
) -> Result<(SystemState, PeriodRecord)> {
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::NegativeQuantity(order));
    }
    let arrival = supply.realize(state.pipeline[0], z)?;
    let available = state.on_hand + arrival;
    let sales = available.min(d);
    let end = pos(available - d);
    let cost = period_cost(params, available, d);

    let mut pipeline = Vec::with_capacity(state.pipeline.len());
    pipeline.extend_from_slice(&state.pipeline[1..]);
    pipeline.push(order);

    let record = PeriodRecord {
        t,
        order,
        observation: CensoredObservation {
            realized_supply: arrival,
            sales,
            end_on_hand: end,
            stockout: end == 0.0,
        },
        demand: Hidden::new(d),
        shock: Hidden::new(z),
        cost: Hidden::new(cost),
    };
    Ok((
        SystemState {
            on_hand: end,
            pipeline,
        },
        record,
    ))
}

/// Runs `policy` for `params.horizon` periods from the all-zero state.
///
/// One shock and one demand draw are consumed per period, in that order,
/// independent of the policy — runs sharing a seed consume identical
/// `(Z_t, D_t)` sequences, which is what couples learner and benchmark
/// replications.
pub fn run<P: Policy + ?Sized>(
    policy: &mut P,
    params: &CostParams,
    supply: &SupplyModel,
    demand: &DemandModel,
    rng: &mut SeededRng,
    opts: SimOptions,
) -> Result<RunOutcome> {
    let mut state = SystemState::zeros(params.lead_time);
    let mut trace: Vec<PeriodRecord> = Vec::with_capacity(params.horizon as usize);
    let mut checksum = 0xcbf2_9ce4_8422_2325u64;
    let mut total = 0.0f64;
    let mut comp = 0.0f64;

    for t in 1..=params.horizon {
        let z = supply.sample_z(rng);
        let d = demand.sample(rng);
        checksum = fnv1a(checksum, z.to_bits());
        checksum = fnv1a(checksum, d.to_bits());

        let arrival = supply.function().realize(state.pipeline[0], z)?;
        let order = {
            let ctx = OrderContext {
                t,
                on_hand: state.on_hand,
                arrival,
                pipeline: &state.pipeline,
                prev: trace.last().map(|r| &r.observation),
            };
            policy.place_order(&ctx)
        };
        if !order.is_finite() || order < 0.0 {
            return Err(Error::PolicyFault { period: t, order });
        }

        let cost = period_cost(params, state.on_hand + arrival, d);
        if opts.compensated_sums {
            let y = cost - comp;
            let t_sum = total + y;
            comp = (t_sum - total) - y;
            total = t_sum;
        } else {
            total += cost;
        }

        let (next, record) = step(&state, t, order, z, d, params, supply.function())?;
        state = next;
        trace.push(record);
    }

    Ok(RunOutcome {
        trace,
        total_cost: total,
        stream_checksum: checksum,
        final_state: state,
    })
}

#[inline]
fn fnv1a(hash: u64, bits: u64) -> u64 {
    let mut h = hash;
    for i in 0..8 {
        h ^= (bits >> (i * 8)) & 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
