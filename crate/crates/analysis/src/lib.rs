//! Statistics behind the choice of NTT prime for Saber: how large can a
//! coefficient of `A·s` get, how is it distributed in practice, and how
//! likely is it to leave the centered range of a smaller prime.

mod bound;
mod dist;
mod error;
mod tail;

pub use bound::{coefficient_bound, single_product_bound, worst_case_bound, WorstCase};
pub use dist::{
    analytic_sigma, coefficient_255, ks_statistic, monte_carlo_distribution, DistributionSource, Histogram,
    MonteCarloResult, ProductDistribution, MIN_TRIALS,
};
pub use error::AnalysisError;
pub use tail::{ln_upper_tail, tail_log2_prob, ErrorEstimate, TailMethod, LOG2_FLOOR};
