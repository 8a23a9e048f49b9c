//! Two-sided Gaussian tail probabilities in the log domain.

use pqproc_core::PrimeCtx;
use statrs::function::erf::erfc;

use crate::dist::{DistributionSource, ProductDistribution};

/// Reported instead of `-inf` for degenerate (zero-width) distributions.
pub const LOG2_FLOOR: f64 = -1.0e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailMethod {
    Analytic,
    MonteCarloExtrapolated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorEstimate {
    pub prime: PrimeCtx,
    /// `log2 P(|coeff| > q/2)` for the accumulated row coefficient.
    pub log2_prob: f64,
    pub method: TailMethod,
}

/// `ln Q(z)` where `Q` is the standard normal upper tail. Uses `erfc` for
/// moderate `z` and the asymptotic series
/// `φ(z)/z · (1 - 1/z² + 3/z⁴ - 15/z⁶ + ...)` beyond that.
pub fn ln_upper_tail(z: f64) -> f64 {
    if z.is_infinite() && z > 0.0 {
        return f64::NEG_INFINITY;
    }
    if z < 8.0 {
        return (0.5 * erfc(z / std::f64::consts::SQRT_2)).ln();
    }
    let z2 = z * z;
    let mut series = 1.0;
    let mut term = 1.0;
    for k in 1..20 {
        let next = -term * (2 * k - 1) as f64 / z2;
        if next.abs() >= term.abs() || next.abs() < 1e-18 {
            break;
        }
        series += next;
        term = next;
    }
    let ln_phi = -0.5 * z2 - 0.5 * (2.0 * std::f64::consts::PI).ln();
    ln_phi - z.ln() + series.ln()
}

fn ln_add(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Probability that the accumulated coefficient leaves `(-q/2, q/2)`,
/// both tails and the mean shift included.
pub fn tail_log2_prob(dist: &ProductDistribution, prime: PrimeCtx) -> ErrorEstimate {
    let method = match dist.source {
        DistributionSource::Analytic => TailMethod::Analytic,
        DistributionSource::MonteCarlo => TailMethod::MonteCarloExtrapolated,
    };
    let t = prime.q() as f64 / 2.0;
    let (m, s) = (dist.accumulated_mean, dist.accumulated_sigma);
    let log2_prob = if !(s > 0.0) || !s.is_finite() {
        LOG2_FLOOR
    } else {
        let ln_p = ln_add(ln_upper_tail((t - m) / s), ln_upper_tail((t + m) / s));
        (ln_p / std::f64::consts::LN_2).max(LOG2_FLOOR)
    };
    ErrorEstimate {
        prime,
        log2_prob,
        method,
    }
}
