//! Estimation and test statistics used by the evaluators and the experiment
//! harness: batch-means standard errors, the Student-t CDF (via the
//! regularized incomplete beta function), a one-sided paired t-test, and a
//! tie-corrected Spearman trend test.
//!
//! The special functions are implemented on `libm` so they are available to
//! `no_std` builds; values are pinned against an independent reference
//! implementation in the tests.

use alloc::vec::Vec;

use crate::math;

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 when fewer than two points.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the mean of i.i.d. points.
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    math::sqrt(sample_variance(xs) / xs.len() as f64)
}

/// Half-width of a normal-approximation 95% confidence interval.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    1.96 * standard_error(xs)
}

/// Batch-means standard error for a correlated sequence: the series is cut
/// into `n_batches` equal contiguous batches (trailing remainder dropped) and
/// the SE of the batch means is returned.
pub fn batch_means_se(xs: &[f64], n_batches: usize) -> f64 {
    let nb = n_batches.max(2).min(xs.len().max(1));
    let m = xs.len() / nb;
    if m == 0 {
        return standard_error(xs);
    }
    let means: Vec<f64> = (0..nb).map(|i| mean(&xs[i * m..(i + 1) * m])).collect();
    standard_error(&means)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + math::erf(x / core::f64::consts::SQRT_2))
}

const FPMIN: f64 = 1e-300;

/// Continued fraction for the incomplete beta function (modified Lentz).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if math::abs(d) < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if math::abs(del - 1.0) < 3e-14 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let bt = math::exp(
        math::ln_gamma(a + b) - math::ln_gamma(a) - math::ln_gamma(b)
            + a * math::ln(x)
            + b * math::ln(1.0 - x),
    );
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * betacf(a, b, x) / a
    } else {
        1.0 - bt * betacf(b, a, 1.0 - x) / b
    }
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// One-sided paired t-test of H1: `mean(x - y) > 0`.
///
/// Returns `(t, p)`; with fewer than two pairs or all-equal differences the
/// p-value degenerates to 0/1/0.5 according to the sign of the mean.
pub fn paired_t_greater(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len(), "paired test requires equal lengths");
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = diffs.len();
    let m = mean(&diffs);
    let se = standard_error(&diffs);
    if n < 2 || se == 0.0 {
        let p = if m > 0.0 {
            0.0
        } else if m < 0.0 {
            1.0
        } else {
            0.5
        };
        return (if m == 0.0 { 0.0 } else { f64::INFINITY * m.signum() }, p);
    }
    let t = m / se;
    (t, 1.0 - student_t_cdf(t, (n - 1) as f64))
}

/// Average ranks, ties sharing the mean rank (1-based).
fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("NaN in rank input"));
    let mut out = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Tie-corrected Spearman rank correlation with a one-sided p-value for
/// H1: increasing trend (`rho > 0`), via the t approximation with `n - 2`
/// degrees of freedom.
pub fn spearman_trend_greater(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return (0.0, 1.0);
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let mx = mean(&rx);
    let my = mean(&ry);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return (0.0, 1.0);
    }
    let rho = sxy / math::sqrt(sxx * syy);
    if rho >= 1.0 {
        return (1.0, 0.0);
    }
    if rho <= -1.0 {
        return (-1.0, 1.0);
    }
    let t = rho * math::sqrt((n - 2) as f64 / (1.0 - rho * rho));
    (rho, 1.0 - student_t_cdf(t, (n - 2) as f64))
}
