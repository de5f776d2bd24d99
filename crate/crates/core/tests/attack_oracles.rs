//! Attack-layer checks: thinning statistics, post-attack percolation
//! behavior on both sides of the threshold, and monotonicity in attack
//! strength.

mod common;

use rggperc::attack::{apply_attack, post_attack_percolation, AttackSpec};
use rggperc::geom::{Point, Window};
use rggperc::interdep::InterdepModel;
use rggperc::rgg::Rgg;
use rggperc::spatial::{PointSet, RngStream};

fn template(lam1: f64, lam2: f64, d1: f64, d2: f64, dep: f64, side: f64) -> InterdepModel<f64> {
    let window = Window::square(side).unwrap();
    InterdepModel::new(
        Rgg::new(
            PointSet::from_points_with_density(vec![], window, lam1).unwrap(),
            d1,
        )
        .unwrap(),
        Rgg::new(
            PointSet::from_points_with_density(vec![], window, lam2).unwrap(),
            d2,
        )
        .unwrap(),
        dep,
    )
    .unwrap()
}

#[test]
fn thinned_points_pass_the_fresh_sample_chi_square() {
    // Retained counts of a q-thinned sample must match a fresh Poisson
    // process at the reduced density.
    let window = Window::new(0.0, 0.0, 5.0, 2.0).unwrap();
    let (lam, q) = (2.0, 0.35);
    let run = |seed_base: u64| -> bool {
        let counts: Vec<u64> = (0..500)
            .map(|s| {
                let ps1 = PointSet::sample_poisson(lam, window, &RngStream::new(seed_base + s, 1))
                    .unwrap();
                let ps2 = PointSet::sample_poisson(0.5, window, &RngStream::new(seed_base + s, 2))
                    .unwrap();
                let m = InterdepModel::new(
                    Rgg::new(ps1, 1.0).unwrap(),
                    Rgg::new(ps2, 1.0).unwrap(),
                    0.5,
                )
                .unwrap();
                let thinned = apply_attack(
                    &m,
                    &AttackSpec::Random { q1: q, q2: 0.0 },
                    &RngStream::new(seed_base + s, 3),
                )
                .unwrap();
                thinned.g1().len() as u64
            })
            .collect();
        let (stat, crit) = common::poisson_chi_square(&counts, lam * (1.0 - q) * window.area());
        stat <= crit
    };
    assert!(
        run(12_000) || run(98_000),
        "thinning chi-square rejected twice"
    );
}

#[test]
fn vanishing_disk_leaves_fractions_unchanged() {
    let t = template(3.0, 2.0, 1.0, 1.0, 0.5, 10.0);
    let tiny = AttackSpec::Disk {
        center: Point::new(5.0, 5.0),
        radius: 1e-9,
    };
    let seeds = [11u64, 12, 13];
    let attacked = post_attack_percolation(&t, &tiny, &seeds).unwrap();
    // Reference: the identity random attack regenerates the same instances.
    let identity = AttackSpec::Random { q1: 0.0, q2: 0.0 };
    let reference = post_attack_percolation(&t, &identity, &seeds).unwrap();
    for (a, b) in attacked.per_seed.iter().zip(&reference.per_seed) {
        assert_eq!(a.f1, b.f1);
        assert_eq!(a.f2, b.f2);
    }
}

#[test]
fn thinning_below_the_certified_lower_bound_collapses_the_component() {
    // At lam2 = 2 the certified interval for lam1 sits near [1.8, 2.25];
    // thinning lam1 = 2 by half leaves an effective density far below it.
    let t = template(2.0, 2.0, 1.0, 1.0, 0.5, 20.0);
    let spec = AttackSpec::Random { q1: 0.5, q2: 0.0 };
    let out = post_attack_percolation(&t, &spec, &[21, 22, 23, 24, 25]).unwrap();
    assert!(
        out.mean.f1 < 0.2 && out.mean.f2 < 0.2,
        "mean fractions too high: {:?} {:?}",
        out.mean.f1,
        out.mean.f2
    );
}

#[test]
fn post_attack_fraction_is_monotone_in_attack_strength() {
    let t = template(3.0, 2.0, 1.0, 1.0, 0.5, 12.0);
    let seeds: Vec<u64> = (100..120).collect();
    let mean_f1 = |spec: &AttackSpec<f64>| -> f64 {
        post_attack_percolation(&t, spec, &seeds).unwrap().mean.f1
    };
    let sigma = 3.0 * (0.25f64 / seeds.len() as f64).sqrt();

    // Nonincreasing in the removal probability.
    let weak = mean_f1(&AttackSpec::Random { q1: 0.1, q2: 0.0 });
    let strong = mean_f1(&AttackSpec::Random { q1: 0.5, q2: 0.0 });
    assert!(strong <= weak + sigma, "thinning: {weak} -> {strong}");

    // Nonincreasing in the disk radius.
    let center = Point::new(6.0, 6.0);
    let small = mean_f1(&AttackSpec::Disk {
        center,
        radius: 1.0,
    });
    let large = mean_f1(&AttackSpec::Disk {
        center,
        radius: 4.0,
    });
    assert!(large <= small + sigma, "disk: {small} -> {large}");
}
