//! Fast invariant suite: every module gets a handful of oracle comparisons
//! at tiny sizes, printing one line per module. Any failure flips the exit
//! code. The RGGPERC_SELFCHECK_TAMPER environment variable deliberately
//! corrupts one expected value so the failure path itself can be tested.

use rggperc::attack::{apply_attack, AttackSpec};
use rggperc::bounds::{
    one_dependent_lhs, square_bond_solve_lam2, supply_feasible, BoundQuery, ONE_DEPENDENT_THRESHOLD,
};
use rggperc::geom::Point;
use rggperc::interdep::InterdepModel;
use rggperc::mc::{confidence_verdict, effective_density};
use rggperc::rgg::{CrossingSpec, Rgg};
use rggperc::spatial::{PointSet, RngStream};
use rggperc::Window64;

struct Check {
    module: &'static str,
    failures: Vec<String>,
}

impl Check {
    fn new(module: &'static str) -> Self {
        Self {
            module,
            failures: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: &str) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn report(self) -> bool {
        if self.failures.is_empty() {
            println!("{:<16} ok", self.module);
            true
        } else {
            println!("{:<16} FAIL: {}", self.module, self.failures.join("; "));
            false
        }
    }
}

fn tampered() -> bool {
    std::env::var_os("RGGPERC_SELFCHECK_TAMPER").is_some()
}

fn spatial_core() -> bool {
    let mut c = Check::new("spatial-core");
    let window = Window64::square(8.0).unwrap();
    let ps = PointSet::sample_poisson(3.0, window, &RngStream::new(5, 0)).unwrap();
    let again = PointSet::sample_poisson(3.0, window, &RngStream::new(5, 0)).unwrap();
    c.expect(ps.points() == again.points(), "sampling not reproducible");
    // Neighbor queries against a linear scan.
    for (qi, radius) in [(0usize, 1.0), (1, 0.5), (2, 2.0)] {
        if ps.len() <= qi {
            continue;
        }
        let center = ps.point(qi);
        let brute: Vec<usize> = (0..ps.len())
            .filter(|&j| ps.point(j).dist(&center) <= radius)
            .collect();
        c.expect(
            ps.neighbors_within(&center, radius) == brute,
            "grid query differs from linear scan",
        );
    }
    // Bin size must not change results.
    let coarse = ps.clone().regrid(2.0);
    let fine = ps.clone().regrid(0.25);
    let center = Point::new(4.0, 4.0);
    c.expect(
        coarse.neighbors_within(&center, 1.0) == fine.neighbors_within(&center, 1.0),
        "bin size changed query results",
    );
    c.report()
}

fn rgg_graph() -> bool {
    let mut c = Check::new("rgg-graph");
    let window = Window64::square(5.0).unwrap();
    let pts = vec![
        Point::new(1.0, 1.0),
        Point::new(1.9, 1.0),
        Point::new(2.8, 1.0),
        Point::new(4.5, 4.5),
    ];
    let g = Rgg::new(PointSet::from_points(pts, window).unwrap(), 1.0).unwrap();
    let labels = g.connected_components();
    c.expect(
        labels.n_components() == 2,
        "chain + singleton should be 2 components",
    );
    c.expect(
        labels.label(2) == 0,
        "canonical label should be smallest member",
    );

    let window = Window64::new(-1.0, 0.0, 2.0, 1.0).unwrap();
    let chain = vec![
        Point::new(-0.1, 0.5),
        Point::new(0.5, 0.5),
        Point::new(1.1, 0.5),
    ];
    let g = Rgg::new(PointSet::from_points(chain, window).unwrap(), 0.7).unwrap();
    let rect = Window64::new(0.0, 0.0, 1.0, 1.0).unwrap();
    c.expect(
        g.has_occupied_crossing(&CrossingSpec::horizontal(rect)),
        "constructed chain must cross",
    );
    // A single top-to-bottom link blocks horizontal vacancy, not vertical.
    let window = Window64::square(4.0).unwrap();
    let bar = vec![Point::new(2.0, 0.5), Point::new(2.0, 3.5)];
    let g = Rgg::new(PointSet::from_points(bar, window).unwrap(), 4.0).unwrap();
    let rect = Window64::new(1.0, 1.0, 3.0, 3.0).unwrap();
    c.expect(
        !g.has_vacant_crossing(&CrossingSpec::horizontal(rect)),
        "spanning link must block horizontal vacancy",
    );
    c.expect(
        g.has_vacant_crossing(&CrossingSpec::vertical(rect)),
        "spanning link must not block vertical vacancy",
    );
    c.report()
}

fn interdep() -> bool {
    let mut c = Check::new("interdep");
    let window = Window64::square(10.0).unwrap();
    // Two isolated first-graph nodes sharing a linked second-graph pair.
    let pts1 = vec![Point::new(4.0, 5.2), Point::new(6.0, 5.2)];
    let pts2 = vec![Point::new(4.9, 4.9), Point::new(5.1, 4.9)];
    let m = InterdepModel::new(
        Rgg::new(PointSet::from_points(pts1, window).unwrap(), 1.0).unwrap(),
        Rgg::new(PointSet::from_points(pts2, window).unwrap(), 1.0).unwrap(),
        1.5,
    )
    .unwrap();
    match m.mutual_component_containing(0, 0) {
        Ok(Some(mc)) => {
            c.expect(
                mc.v1 == vec![0] && mc.v2 == vec![0, 1],
                "seeded component mismatch",
            );
            c.expect(m.is_valid_mutual(&mc), "seeded component invalid");
        }
        _ => c.expect(false, "seeded component missing"),
    }
    let greedy = m.greedy_mutual_component(&window);
    c.expect(m.is_valid_mutual(&greedy), "greedy component invalid");
    c.report()
}

fn analytic_bounds() -> bool {
    let mut c = Check::new("analytic-bounds");
    let expected = [1.54, 0.92, 0.75, 2.39, 1.80, 1.58];
    // Test hook: shift one expectation to prove failures are reported.
    let shift = if tampered() { 0.5 } else { 0.0 };
    let rows = [
        (15.0, 1.0, 3.0, 1.5),
        (20.0, 1.0, 3.0, 1.5),
        (25.0, 1.0, 3.0, 1.5),
        (15.0, 1.0, 2.0, 1.0),
        (20.0, 1.0, 2.0, 1.0),
        (25.0, 1.0, 2.0, 1.0),
    ];
    for (i, &(lam1, d1, d2, dep)) in rows.iter().enumerate() {
        let solved = square_bond_solve_lam2(lam1, d1, d2, dep)
            .unwrap()
            .unwrap_or(f64::NAN);
        c.expect(
            (solved - (expected[i] + shift)).abs() < 0.01,
            &format!("small-ratio row {i}: solved {solved}"),
        );
    }
    let q = BoundQuery::new(16.0, 0.190, 1.0, 10.0, 7.07).unwrap();
    let v = one_dependent_lhs(&q).unwrap();
    c.expect(
        (v - ONE_DEPENDENT_THRESHOLD).abs() < 2e-3,
        "large-ratio row off threshold",
    );
    // Feasibility against brute force on a small sweep.
    for tags1 in [vec![1u32], vec![2, 3], vec![1, 2]] {
        for tags2 in [vec![1u32], vec![1, 2]] {
            let brute = (1..=tags1.len() as u32).any(|k1| {
                (1..=tags2.len() as u32).any(|k2| {
                    tags1.iter().filter(|&&t| t <= k2).count() as u32 >= k1
                        && tags2.iter().filter(|&&t| t <= k1).count() as u32 >= k2
                })
            });
            c.expect(
                supply_feasible(&tags1, &tags2) == brute,
                &format!("feasibility mismatch on {tags1:?} vs {tags2:?}"),
            );
        }
    }
    c.report()
}

fn mc_bounds() -> bool {
    let mut c = Check::new("mc-bounds");
    let v = confidence_verdict(100, 5);
    c.expect(v.accepted, "100/5 must accept");
    c.expect(!confidence_verdict(100, 6).accepted, "100/6 must reject");
    // Direct tail summation oracle at the protocol point.
    let mut tail = 0.0;
    for i in 95..=100u32 {
        let ln_c: f64 = (0..i)
            .map(|j| ((100 - j) as f64 / (i - j) as f64).ln())
            .sum();
        tail += (ln_c + i as f64 * 0.8639f64.ln() + (100 - i) as f64 * 0.1361f64.ln()).exp();
    }
    c.expect(tail <= 0.005, "tail above confidence budget");
    c.expect(
        ((1.0 - v.confidence) - tail).abs() < 1e-9,
        "tail mismatch with direct summation",
    );
    let e: f64 = effective_density(2.03, 1.8, 0.5);
    c.expect((e - 1.536).abs() < 1e-3, "effective density value");
    c.report()
}

fn robustness() -> bool {
    let mut c = Check::new("robustness");
    let window = Window64::square(8.0).unwrap();
    let ps1 = PointSet::sample_poisson(2.0, window, &RngStream::new(9, 1)).unwrap();
    let ps2 = PointSet::sample_poisson(2.0, window, &RngStream::new(9, 2)).unwrap();
    let m = InterdepModel::new(
        Rgg::new(ps1, 1.0).unwrap(),
        Rgg::new(ps2, 1.0).unwrap(),
        0.5,
    )
    .unwrap();
    let id = apply_attack(
        &m,
        &AttackSpec::Random { q1: 0.0, q2: 0.0 },
        &RngStream::new(1, 0),
    )
    .unwrap();
    c.expect(
        id.g1().points().points() == m.g1().points().points(),
        "zero removal must be identity",
    );
    let center = Point::new(4.0, 4.0);
    let disk = apply_attack(
        &m,
        &AttackSpec::Disk {
            center,
            radius: 2.0,
        },
        &RngStream::new(1, 0),
    )
    .unwrap();
    let any_inside = disk
        .g1()
        .points()
        .points()
        .iter()
        .chain(disk.g2().points().points())
        .any(|p| p.dist(&center) <= 2.0);
    c.expect(!any_inside, "disk attack left nodes inside the disk");
    let expected_removed = m
        .g1()
        .points()
        .points()
        .iter()
        .filter(|p| p.dist(&center) <= 2.0)
        .count();
    c.expect(
        m.g1().len() - disk.g1().len() == expected_removed,
        "disk removal count off",
    );
    c.report()
}

/// Run the whole suite; true when every module passes.
pub fn run() -> bool {
    let results = [
        spatial_core(),
        rgg_graph(),
        interdep(),
        analytic_bounds(),
        mc_bounds(),
        robustness(),
    ];
    let ok = results.iter().all(|&r| r);
    if ok {
        println!("selfcheck: all modules ok");
    } else {
        println!("selfcheck: FAILURES detected");
    }
    ok
}
