//! Distribution of one output coefficient of `A·s`.

use std::io::Write;

use pqproc_core::saber::{SaberLevel, EQ};
use pqproc_core::N;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::AnalysisError;

/// Smallest accepted Monte Carlo run.
pub const MIN_TRIALS: usize = 100_000;

/// Trials per independently seeded work unit.
const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistributionSource {
    Analytic,
    MonteCarlo,
}

/// Mean and deviation of one product coefficient and of the sum over the
/// `l` products of a matrix row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductDistribution {
    pub level: SaberLevel,
    pub source: DistributionSource,
    pub mean: f64,
    pub sigma: f64,
    pub accumulated_mean: f64,
    pub accumulated_sigma: f64,
}

impl ProductDistribution {
    /// Builds the row distribution from a single-product one, assuming the
    /// `l` products are independent.
    pub fn from_single(level: SaberLevel, source: DistributionSource, mean: f64, sigma: f64) -> Self {
        let l = level.params().l as f64;
        Self {
            level,
            source,
            mean,
            sigma,
            accumulated_mean: mean * l,
            accumulated_sigma: sigma * l.sqrt(),
        }
    }
}

/// Variance of a uniform integer on `width` consecutive values.
fn uniform_var(width: u64) -> f64 {
    ((width * width) as f64 - 1.0) / 12.0
}

/// Normal approximation with uniform secrets on `[-μ/2, μ/2]` and uniform
/// centered public coefficients.
pub fn analytic_sigma(level: SaberLevel) -> ProductDistribution {
    let mu = level.params().mu as u64;
    let var = N as f64 * uniform_var(mu + 1) * uniform_var(1 << EQ);
    ProductDistribution::from_single(level, DistributionSource::Analytic, 0.0, var.sqrt())
}

/// Coefficient 255 of the negacyclic product: `Σ a[i]·s[255-i]`. No index
/// wraps, so no term picks up the sign flip.
pub fn coefficient_255(a: &[i64; N], s: &[i64; N]) -> i64 {
    (0..N).map(|i| a[i] * s[N - 1 - i]).sum()
}

/// Fixed-width histogram; `bins` holds `(center, count)` in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub bins: Vec<(f64, u64)>,
}

impl Histogram {
    pub fn build(samples: &[i64], bin_width: f64) -> Self {
        let mut counts = std::collections::BTreeMap::<i64, u64>::new();
        for &x in samples {
            *counts.entry((x as f64 / bin_width).floor() as i64).or_default() += 1;
        }
        let bins = counts
            .into_iter()
            .map(|(k, c)| ((k as f64 + 0.5) * bin_width, c))
            .collect();
        Self { bin_width, bins }
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "bin_center,count")?;
        for (center, count) in &self.bins {
            writeln!(out, "{center:.3},{count}")?;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.1).sum()
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloResult {
    pub distribution: ProductDistribution,
    pub trials: usize,
    /// Largest magnitude seen for a single product or a row sum.
    pub max_abs: i64,
    /// Kolmogorov-Smirnov distance of the single-product samples to the
    /// normal with their own mean and deviation.
    pub ks_statistic: f64,
    /// Single-product histogram with bin width `sigma/20`.
    pub histogram: Histogram,
}

fn mean_sigma(xs: &[i64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Largest gap between the empirical CDF and `N(mean, sigma)`.
pub fn ks_statistic(samples: &[i64], mean: f64, sigma: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.par_sort_unstable();
    let normal = Normal::new(mean, sigma).expect("positive sigma");
    let n = sorted.len() as f64;
    let mut d = 0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = normal.cdf(x as f64);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

fn run_chunk(level: SaberLevel, seed: u64, chunk: usize, count: usize) -> Vec<(i64, i64)> {
    let p = level.params();
    let half = (p.mu / 2) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let mut a = [0i64; N];
    let mut s = [0i64; N];
    (0..count)
        .map(|_| {
            let mut first = 0;
            let mut row = 0;
            for j in 0..p.l {
                for c in a.iter_mut() {
                    *c = (rng.next_u32() & ((1 << EQ) - 1)) as i64 - (1 << (EQ - 1));
                }
                for c in s.iter_mut() {
                    *c = rng.gen_range(-half..=half);
                }
                let v = coefficient_255(&a, &s);
                if j == 0 {
                    first = v;
                }
                row += v;
            }
            (first, row)
        })
        .collect()
}

/// Samples coefficient 255 of `trials` independent products (and row
/// sums). Work is split into fixed chunks, each on its own ChaCha stream, so
/// the result does not depend on the number of threads.
pub fn monte_carlo_distribution(level: SaberLevel, trials: usize, seed: u64) -> Result<MonteCarloResult, AnalysisError> {
    if trials < MIN_TRIALS {
        return Err(AnalysisError::TooFewTrials {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    let chunks = trials.div_ceil(CHUNK);
    let pairs: Vec<(i64, i64)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| run_chunk(level, seed, c, CHUNK.min(trials - c * CHUNK)))
        .collect();
    let single: Vec<i64> = pairs.iter().map(|p| p.0).collect();
    let rows: Vec<i64> = pairs.iter().map(|p| p.1).collect();
    let (mean, sigma) = mean_sigma(&single);
    let (accumulated_mean, accumulated_sigma) = mean_sigma(&rows);
    let max_abs = single.iter().chain(&rows).map(|x| x.abs()).max().unwrap_or(0);
    Ok(MonteCarloResult {
        distribution: ProductDistribution {
            level,
            source: DistributionSource::MonteCarlo,
            mean,
            sigma,
            accumulated_mean,
            accumulated_sigma,
        },
        trials,
        max_abs,
        ks_statistic: ks_statistic(&single, mean, sigma),
        histogram: Histogram::build(&single, sigma / 20.0),
    })
}
