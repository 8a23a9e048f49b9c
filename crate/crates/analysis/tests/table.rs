//! Published distribution parameters and error exponents.

use pqproc_analysis::{analytic_sigma, tail_log2_prob, worst_case_bound, DistributionSource, ProductDistribution};
use pqproc_core::saber::SaberLevel;
use pqproc_core::PrimeCtx;

// Measured per-product and accumulated deviations.
const SIGMA: [(SaberLevel, f64, f64); 3] = [
    (SaberLevel::LightSaber, 119_708.81, 169_293.83),
    (SaberLevel::Saber, 97_825.69, 169_439.06),
    (SaberLevel::FireSaber, 75_672.40, 151_344.81),
];

#[test]
fn analytic_sigmas_close_to_measured() {
    for (lvl, single, acc) in SIGMA {
        let d = analytic_sigma(lvl);
        assert!((d.sigma / single - 1.0).abs() < 0.002, "{lvl}: {}", d.sigma);
        assert!((d.accumulated_sigma / acc - 1.0).abs() < 0.002, "{lvl}: {}", d.accumulated_sigma);
    }
}

#[test]
fn tail_exponents() {
    let cases = [
        (SaberLevel::LightSaber, PrimeCtx::q23(), -449.0),
        (SaberLevel::Saber, PrimeCtx::q23(), -448.0),
        (SaberLevel::FireSaber, PrimeCtx::q23(), -558.0),
        (SaberLevel::LightSaber, PrimeCtx::q24(), -1774.0),
        (SaberLevel::FireSaber, PrimeCtx::q24(), -2219.0),
    ];
    for (lvl, p, want) in cases {
        let got = tail_log2_prob(&analytic_sigma(lvl), p).log2_prob;
        assert!((got - want).abs() <= 10.0, "{lvl}/{}: {got:.1} vs {want}", p.bits());
    }
}

#[test]
fn saber_24_entry_is_out_of_order() {
    // The published sigmas put Saber's accumulated deviation above
    // LightSaber's, so its 24-bit exponent cannot be lower than LightSaber's
    // (-1774); the table lists -1837.
    let from_table = |lvl, acc| ProductDistribution {
        level: lvl,
        source: DistributionSource::MonteCarlo,
        mean: 0.0,
        sigma: 0.0,
        accumulated_mean: 0.0,
        accumulated_sigma: acc,
    };
    let light = tail_log2_prob(&from_table(SaberLevel::LightSaber, SIGMA[0].2), PrimeCtx::q24()).log2_prob;
    let saber = tail_log2_prob(&from_table(SaberLevel::Saber, SIGMA[1].2), PrimeCtx::q24()).log2_prob;
    assert!(saber > light);
    assert!((saber - -1837.0).abs() > 50.0, "{saber}");
}

#[test]
fn bound_covers_three_sigma_many_times_over() {
    for lvl in SaberLevel::ALL {
        assert!(worst_case_bound(lvl).bound as f64 > 50.0 * analytic_sigma(lvl).accumulated_sigma);
    }
}
