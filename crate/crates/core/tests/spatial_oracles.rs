//! Spatial-layer checks against independent oracles: brute-force neighbor
//! scans, Poisson count statistics, and grid-bin invariance.

mod common;

use rand::Rng;
use rggperc::geom::{Point, Window};
use rggperc::spatial::{PointSet, RngStream};

fn random_points(n: usize, window: &Window<f64>, seed: u64) -> Vec<Point<f64>> {
    let mut rng = RngStream::new(seed, 900).rng();
    (0..n)
        .map(|_| {
            Point::new(
                rng.random_range(window.x_min..window.x_max),
                rng.random_range(window.y_min..window.y_max),
            )
        })
        .collect()
}

#[test]
fn neighbors_match_brute_force_scan() {
    let window = Window::square(10.0).unwrap();
    let pts = random_points(500, &window, 41);
    let ps = PointSet::from_points(pts.clone(), window).unwrap();
    let mut rng = RngStream::new(42, 0).rng();
    // Random centers and radii, including centers outside the window.
    for _ in 0..100 {
        let center = Point::new(rng.random_range(-2.0..12.0), rng.random_range(-2.0..12.0));
        let radius = rng.random_range(0.0..3.0);
        assert_eq!(
            ps.neighbors_within(&center, radius),
            common::brute_neighbors(&pts, &center, radius),
        );
    }
    // Exhaustive: every point's neighborhood at a fixed radius.
    for (i, p) in pts.iter().enumerate() {
        assert_eq!(
            ps.neighbors_within(p, 1.0),
            common::brute_neighbors(&pts, p, 1.0),
            "query around point {i}"
        );
    }
}

#[test]
fn grid_bin_size_never_changes_results() {
    let window = Window::square(10.0).unwrap();
    let pts = random_points(400, &window, 43);
    let radius = 0.8;
    let reference = PointSet::from_points(pts.clone(), window).unwrap();
    let queries: Vec<Point<f64>> = random_points(50, &window, 44);
    let expected: Vec<Vec<usize>> = queries
        .iter()
        .map(|c| reference.neighbors_within(c, radius))
        .collect();
    for bin in [radius / 2.0, radius, 2.0 * radius] {
        let ps = PointSet::from_points(pts.clone(), window)
            .unwrap()
            .regrid(bin);
        for (c, want) in queries.iter().zip(&expected) {
            assert_eq!(&ps.neighbors_within(c, radius), want, "bin {bin}");
        }
    }
}

#[test]
fn poisson_count_mean_is_calibrated() {
    // density 15 on a 10 x 10 window: E[N] = 1500, sd = sqrt(1500).
    let window = Window::square(10.0).unwrap();
    let mut total = 0u64;
    let seeds = 200u64;
    for s in 0..seeds {
        let ps = PointSet::sample_poisson(15.0, window, &RngStream::new(1000 + s, 0)).unwrap();
        total += ps.len() as u64;
    }
    let mean = total as f64 / seeds as f64;
    let sd = 1500.0f64.sqrt();
    assert!(
        (mean - 1500.0).abs() < 3.0 * sd,
        "sample mean {mean} too far from 1500"
    );
}

#[test]
fn poisson_counts_pass_chi_square() {
    // density 2 on an area-10 window: mu = 20 per sample.
    let window = Window::new(0.0, 0.0, 5.0, 2.0).unwrap();
    let mu = 2.0 * window.area();
    let run = |seed_base: u64| -> bool {
        let counts: Vec<u64> = (0..500)
            .map(|s| {
                PointSet::sample_poisson(2.0, window, &RngStream::new(seed_base + s, 0))
                    .unwrap()
                    .len() as u64
            })
            .collect();
        let (stat, crit) = common::poisson_chi_square(&counts, mu);
        stat <= crit
    };
    // Significance 0.01; one rerun tolerated as the test is stochastic.
    assert!(run(7_000) || run(90_000), "chi-square rejected twice");
}

#[test]
fn uniform_positions_pass_spatial_chi_square() {
    // Quadrant counts of one large sample are multinomial-uniform; compare
    // each quadrant count against its Poisson law by seed repetition.
    let window = Window::square(4.0).unwrap();
    let quadrant = Window::new(0.0, 0.0, 2.0, 2.0).unwrap();
    let mu = 3.0 * quadrant.area();
    let run = |seed_base: u64| -> bool {
        let counts: Vec<u64> = (0..500)
            .map(|s| {
                let ps = PointSet::sample_poisson(3.0, window, &RngStream::new(seed_base + s, 0))
                    .unwrap();
                ps.indices_in_rect(&quadrant).len() as u64
            })
            .collect();
        let (stat, crit) = common::poisson_chi_square(&counts, mu);
        stat <= crit
    };
    assert!(
        run(11_000) || run(95_000),
        "spatial chi-square rejected twice"
    );
}
