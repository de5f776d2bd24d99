//! Monte-Carlo layer checks: exact binomial confidence against a direct
//! summation oracle, structural 1-dependence of bond trials, the relaxed
//!-supply retention rate, and bond-open frequency monotonicity.

mod common;

use rand::Rng;
use rggperc::bounds::BoundQuery;
use rggperc::geom::{Point, Window};
use rggperc::interdep::{GraphSide, InterdepModel};
use rggperc::mc::{
    confidence_verdict_with, effective_density, eval_lower_vacant, eval_upper_crossing,
    eval_upper_merge, BondTrialConfig, TrialVariant,
};
use rggperc::rgg::Rgg;
use rggperc::spatial::{PointSet, RngStream};

#[test]
fn confidence_bound_matches_direct_summation_oracle() {
    // Full sweep: every N <= 200 at a spread of failure counts.
    for n in 1..=200u32 {
        for k in [0, 1, 2, 5, 6, n / 4, n / 2, n.saturating_sub(1), n] {
            let k = k.min(n);
            let s = n - k;
            let v = confidence_verdict_with(n, k, 0.8639, 0.995);
            let oracle_bound = common::clopper_pearson_lower_direct(n, s, 0.995);
            assert!(
                (v.lower_bound - oracle_bound).abs() < 1e-7,
                "N={n} k={k}: {} vs {}",
                v.lower_bound,
                oracle_bound
            );
            assert_eq!(
                v.accepted,
                oracle_bound >= 0.8639 || v.lower_bound >= 0.8639
            );
            // Tail agreement at the threshold itself.
            let tail_direct = common::binom_tail_direct(n, s, 0.8639);
            assert!(
                ((1.0 - v.confidence) - tail_direct).abs() < 1e-9,
                "N={n} k={k} tail"
            );
        }
    }
}

fn cfg(variant: TrialVariant, lam1: f64, lam2: f64, side: f64) -> BondTrialConfig<f64> {
    BondTrialConfig::new(
        variant,
        BoundQuery::new(lam1, lam2, 1.0, 1.0, 0.5).unwrap(),
        Some(side),
    )
    .unwrap()
}

fn model_from_points(
    pts1: Vec<Point<f64>>,
    pts2: Vec<Point<f64>>,
    window: Window<f64>,
) -> InterdepModel<f64> {
    InterdepModel::new(
        Rgg::new(PointSet::from_points(pts1, window).unwrap(), 1.0).unwrap(),
        Rgg::new(PointSet::from_points(pts2, window).unwrap(), 1.0).unwrap(),
        0.5,
    )
    .unwrap()
}

/// Trial outcomes are functions of the points inside R alone: injecting
/// points outside R into an enlarged window and clipping back to R leaves
/// every variant's outcome unchanged.
#[test]
fn trial_outcomes_depend_only_on_points_inside_rectangle() {
    let side = 5.0;
    let rect = Window::new(0.0, 0.0, 2.0 * side, side).unwrap();
    let mut rng = RngStream::new(31, 0).rng();
    for trial in 0..25 {
        let merge_cfg = cfg(TrialVariant::UpperMerge, 2.3, 2.0, side);
        let cross_cfg = cfg(TrialVariant::UpperCrossing, 2.3, 2.0, side);
        let lower_cfg = cfg(TrialVariant::LowerVacant, 1.6, 2.0, side);
        let base = merge_cfg
            .sample_model(&RngStream::new(400 + trial, 0))
            .unwrap();
        let in1 = base.g1().points().points().to_vec();
        let in2 = base.g2().points().points().to_vec();

        // Enlarged window carrying extra out-of-R points, then clipped.
        let enlarged = Window::new(-3.0, -3.0, 2.0 * side + 3.0, side + 3.0).unwrap();
        let mut out1 = in1.clone();
        let mut out2 = in2.clone();
        for _ in 0..40 {
            // Rejection-sample points of the enlarged window outside R.
            loop {
                let p = Point::new(
                    rng.random_range(enlarged.x_min..enlarged.x_max),
                    rng.random_range(enlarged.y_min..enlarged.y_max),
                );
                if !rect.contains(&p) {
                    if out1.len() <= out2.len() {
                        out1.push(p);
                    } else {
                        out2.push(p);
                    }
                    break;
                }
            }
        }
        let clipped1: Vec<Point<f64>> = out1.into_iter().filter(|p| rect.contains(p)).collect();
        let clipped2: Vec<Point<f64>> = out2.into_iter().filter(|p| rect.contains(p)).collect();
        assert_eq!(clipped1, in1);
        assert_eq!(clipped2, in2);
        let replay = model_from_points(clipped1, clipped2, rect);

        assert_eq!(
            eval_upper_merge(&merge_cfg, &base),
            eval_upper_merge(&merge_cfg, &replay)
        );
        assert_eq!(
            eval_upper_crossing(&cross_cfg, &base),
            eval_upper_crossing(&cross_cfg, &replay)
        );
        for side_id in [GraphSide::G1, GraphSide::G2] {
            assert_eq!(
                eval_lower_vacant(&lower_cfg, &base, side_id),
                eval_lower_vacant(&lower_cfg, &replay, side_id)
            );
        }
    }
}

#[test]
fn relaxed_retention_matches_effective_density() {
    // Fraction of first-graph nodes keeping a supply node within dep equals
    // 1 - e^{-lam2 pi dep^2} in expectation. Measured on interior nodes
    // whose dep-ball lies inside the window, where the closed-form rate is
    // exact (boundary balls are truncated).
    let window = Window::square(6.0).unwrap();
    let interior = Window::new(0.5, 0.5, 5.5, 5.5).unwrap();
    let (lam1, lam2, dep) = (2.0, 1.8, 0.5);
    let models = 200;
    let mut fractions = Vec::with_capacity(models);
    for seed in 0..models {
        let ps1 = PointSet::sample_poisson(lam1, window, &RngStream::new(7_700 + seed as u64, 1))
            .unwrap();
        let ps2 = PointSet::sample_poisson(lam2, window, &RngStream::new(7_700 + seed as u64, 2))
            .unwrap();
        let inner = ps1.indices_in_rect(&interior);
        if inner.is_empty() {
            continue;
        }
        let kept = inner
            .iter()
            .filter(|&&i| !ps2.neighbors_within(&ps1.point(i), dep).is_empty())
            .count();
        fractions.push(kept as f64 / inner.len() as f64);
    }
    let n = fractions.len() as f64;
    let mean: f64 = fractions.iter().sum::<f64>() / n;
    let var: f64 = fractions
        .iter()
        .map(|f| (f - mean) * (f - mean))
        .sum::<f64>()
        / (n - 1.0);
    let sem = (var / n).sqrt();
    let expect = 1.0 - (-lam2 * std::f64::consts::PI * dep * dep).exp();
    assert!(
        (mean - expect).abs() < 3.0 * sem.max(1e-4),
        "retention {mean} vs {expect} (sem {sem})"
    );
    // Sanity link: effective_density is lam1 times that retention.
    assert!((effective_density(lam1, lam2, dep) - lam1 * expect).abs() < 1e-12);
}

fn open_frequency(
    variant: TrialVariant,
    lam1: f64,
    lam2: f64,
    side: f64,
    trials: u32,
    seed: u64,
) -> f64 {
    let c = cfg(variant, lam1, lam2, side);
    let open = (0..trials)
        .filter(|&t| {
            let model = c.sample_model(&RngStream::new(seed, t as u64)).unwrap();
            match variant {
                TrialVariant::UpperMerge => eval_upper_merge(&c, &model),
                TrialVariant::UpperCrossing => eval_upper_crossing(&c, &model),
                TrialVariant::LowerVacant => {
                    eval_lower_vacant(&c, &model, GraphSide::G1)
                        || eval_lower_vacant(&c, &model, GraphSide::G2)
                }
            }
        })
        .count();
    open as f64 / trials as f64
}

fn three_sigma(p: f64, n: u32) -> f64 {
    3.0 * (p.max(0.02) * (1.0 - p.min(0.98)) / n as f64).sqrt()
}

#[test]
fn upper_open_frequency_is_nondecreasing_in_density() {
    let trials = 300;
    let f_lo = open_frequency(TrialVariant::UpperMerge, 1.6, 1.6, 5.0, trials, 61);
    let f_hi = open_frequency(TrialVariant::UpperMerge, 3.2, 3.2, 5.0, trials, 62);
    assert!(
        f_hi >= f_lo - three_sigma(f_lo, trials),
        "merge frequency fell: {f_lo} -> {f_hi}"
    );
}

#[test]
fn crossing_open_frequency_is_nondecreasing_in_density() {
    // Doubling both densities must not lower the crossing-bond open rate.
    let trials = 300;
    let f_lo = open_frequency(TrialVariant::UpperCrossing, 1.8, 1.8, 5.0, trials, 67);
    let f_hi = open_frequency(TrialVariant::UpperCrossing, 3.6, 3.6, 5.0, trials, 68);
    assert!(
        f_hi >= f_lo - three_sigma(f_lo, trials),
        "crossing frequency fell: {f_lo} -> {f_hi}"
    );
}

#[test]
fn lower_open_frequency_is_nonincreasing_in_density() {
    let trials = 300;
    let f_lo = open_frequency(TrialVariant::LowerVacant, 1.2, 2.0, 5.0, trials, 63);
    let f_hi = open_frequency(TrialVariant::LowerVacant, 2.4, 2.0, 5.0, trials, 64);
    assert!(
        f_hi <= f_lo + three_sigma(f_hi, trials),
        "vacant frequency rose: {f_lo} -> {f_hi}"
    );
}

#[test]
fn saturated_densities_pin_trial_outcomes() {
    let trials = 200;
    // Very dense: the merge bond is essentially always open.
    let f = open_frequency(TrialVariant::UpperMerge, 50.0, 50.0, 5.0, trials, 65);
    assert!(f > 0.99, "merge frequency at saturation: {f}");
    // And the vacant-crossing bond is essentially never open.
    let f = open_frequency(TrialVariant::LowerVacant, 50.0, 50.0, 5.0, trials, 66);
    assert!(f < 0.01, "vacant frequency at saturation: {f}");
}

#[test]
fn huge_dep_reduces_relaxed_removal_to_identity() {
    // With dep at least the window diameter, the relaxed rule keeps every
    // node as soon as the other graph is nonempty, so the complement
    // crossings reduce to those of the untouched single graph.
    let window = Window::new(0.0, 0.0, 8.0, 4.0).unwrap();
    let dep = 15.0; // > sqrt(8^2 + 4^2)
    let mut checked = 0;
    for seed in 0..30u64 {
        let ps1 = PointSet::sample_poisson(1.5, window, &RngStream::new(900 + seed, 1)).unwrap();
        let ps2 = PointSet::sample_poisson(1.5, window, &RngStream::new(900 + seed, 2)).unwrap();
        if ps2.is_empty() {
            continue;
        }
        let g1 = Rgg::new(ps1, 1.0).unwrap();
        let kept: Vec<usize> = (0..g1.len())
            .filter(|&i| !ps2.neighbors_within(&g1.points().point(i), dep).is_empty())
            .collect();
        assert_eq!(
            kept.len(),
            g1.len(),
            "seed {seed}: relaxed removal dropped nodes"
        );
        // Same node set, same crossings.
        let sub = g1.restrict(&kept);
        let rect = Window::new(2.0, 1.0, 6.0, 3.0).unwrap();
        for spec in [
            rggperc::rgg::CrossingSpec::horizontal(rect),
            rggperc::rgg::CrossingSpec::vertical(rect),
        ] {
            assert_eq!(
                sub.has_vacant_crossing(&spec),
                g1.has_vacant_crossing(&spec)
            );
        }
        checked += 1;
    }
    assert!(checked > 0);
}
