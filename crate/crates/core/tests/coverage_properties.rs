//! Statistical behaviour of the interval estimators over repeated sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use skewkit::{
    difference_interval, run_coverage, BandwidthRule, DistributionSpec, SimConfig, SkewMeasure,
    SortedSample,
};

fn study(dist: &str, n: usize, measure: &str, trials: usize, seed: u64) -> (f64, f64) {
    let cfg = SimConfig::new(
        dist.parse().unwrap(),
        n,
        trials,
        vec![measure.parse().unwrap()],
        seed,
    );
    let report = run_coverage(&cfg).unwrap();
    let m = &report.measures[0];
    println!("{dist} n={n} {measure}: {}", m.cell());
    (m.coverage, m.mean_width)
}

#[test]
fn lognormal_lambda_005_width_at_n_5000() {
    let (cp, w) = study("lognormal(0,1)", 5000, "lambda@0.05", 1000, 31);
    assert!((w / 0.85 - 1.0).abs() <= 0.15, "width {w}");
    assert!(cp >= 0.90, "coverage {cp}");
}

#[test]
fn small_samples_are_conservative() {
    let (small, _) = study("lognormal(0,1)", 50, "auc_gamma", 1000, 5);
    let (large, _) = study("lognormal(0,1)", 5000, "auc_gamma", 1000, 6);
    assert!(small >= large - 0.005, "{small} vs {large}");
}

#[test]
fn widths_shrink_and_coverage_stays_sane() {
    let cells = [
        ("lognormal(0,1)", "auc_gamma"),
        ("lognormal(0,1)", "lambda@0.1"),
        ("exp(1)", "auc_lambda"),
        ("normal(2,1)", "auc_gamma"),
    ];
    for (k, (dist, measure)) in cells.into_iter().enumerate() {
        let mut widths = Vec::new();
        for (i, n) in [50, 200, 1000].into_iter().enumerate() {
            let (cp, w) = study(dist, n, measure, 1000, 100 * k as u64 + i as u64);
            assert!(cp >= 0.90, "{dist} n={n} {measure}: coverage {cp}");
            widths.push(w);
        }
        assert!(widths[0] > widths[1] && widths[1] > widths[2], "{dist} {measure}: {widths:?}");
    }
}

fn difference_hits(a: &str, b: &str, n: usize, reps: usize, seed: u64) -> usize {
    let (da, db): (DistributionSpec, DistributionSpec) = (a.parse().unwrap(), b.parse().unwrap());
    let m: SkewMeasure = "auc_gamma".parse().unwrap();
    (0..reps)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let x = SortedSample::new(da.sample(n, &mut rng).unwrap()).unwrap();
            let y = SortedSample::new(db.sample(n, &mut rng).unwrap()).unwrap();
            difference_interval(&x, &y, &m, 0.95, BandwidthRule::Default)
                .unwrap()
                .contains(0.0)
        })
        .count()
}

#[test]
fn difference_interval_covers_zero_under_equal_skew() {
    let hits = difference_hits("lognormal(0,1)", "lognormal(0,1)", 5000, 1000, 8);
    let rate = hits as f64 / 1000.0;
    println!("equal skew: zero covered in {rate}");
    assert!((0.925..=0.975).contains(&rate), "{rate}");
}

#[test]
fn difference_interval_detects_unequal_skew() {
    let hits = difference_hits("lognormal(0,1)", "normal(0,1)", 5000, 1000, 9);
    let power = 1.0 - hits as f64 / 1000.0;
    println!("unequal skew: zero excluded in {power}");
    assert!(power >= 0.90, "{power}");
}
