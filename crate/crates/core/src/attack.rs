//! Failure models and post-attack percolation assessment: independent
//! random node thinning, geographical disk attacks, mutual-component
//! statistics of the survivors, and the tolerable random-removal frontier
//! derived from a threshold curve.

use rayon::prelude::*;

use crate::bounds::CurvePoint;
use crate::error::{Error, Result};
use crate::geom::{Point, Window};
use crate::interdep::{InterdepModel, MutualStats};
use crate::rgg::Rgg;
use crate::scalar::Scalar;
use crate::spatial::{PointSet, RngStream};

/// A failure event: independent node removal with per-graph probabilities,
/// or removal of every node inside a closed disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttackSpec<S> {
    Random { q1: S, q2: S },
    Disk { center: Point<S>, radius: S },
}

impl<S: Scalar> AttackSpec<S> {
    pub fn validate(&self, window: &Window<S>) -> Result<()> {
        match self {
            Self::Random { q1, q2 } => {
                for q in [q1, q2] {
                    if !(*q >= S::zero() && *q <= S::one()) {
                        return Err(Error::InvalidArgument(format!(
                            "removal probability must lie in [0, 1], got {q}"
                        )));
                    }
                }
                Ok(())
            }
            Self::Disk { center, radius } => {
                if !(*radius > S::zero()) {
                    return Err(Error::InvalidArgument(format!(
                        "disk radius must be positive, got {radius}"
                    )));
                }
                let nearest = Point::new(
                    center.x.max(window.x_min).min(window.x_max),
                    center.y.max(window.y_min).min(window.y_max),
                );
                if nearest.dist(center) > *radius {
                    return Err(Error::InvalidArgument(
                        "attack disk does not intersect the window".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Apply an attack to a model. Random removal keeps each node of graph i
/// independently with probability 1 - q_i, so the survivors form a Poisson
/// process of density lam_i (1 - q_i); the thinned point sets carry that
/// reduced density. A disk attack removes the nodes of both graphs inside
/// the closed disk and leaves the process density unchanged. The window
/// never changes.
pub fn apply_attack<S: Scalar>(
    model: &InterdepModel<S>,
    spec: &AttackSpec<S>,
    rng: &RngStream,
) -> Result<InterdepModel<S>> {
    spec.validate(model.window())?;
    let window = *model.window();
    let (pts1, dens1, pts2, dens2) = match spec {
        AttackSpec::Random { q1, q2 } => {
            use rand::Rng;
            let mut r = rng.rng();
            let mut thin = |g: &Rgg<S>, q: S| -> Vec<Point<S>> {
                g.points()
                    .points()
                    .iter()
                    .filter(|_| {
                        let u: f64 = r.random_range(0.0..1.0);
                        u >= q.to_f64().unwrap_or(0.0)
                    })
                    .copied()
                    .collect()
            };
            let pts1 = thin(model.g1(), *q1);
            let pts2 = thin(model.g2(), *q2);
            let dens1 = model.g1().points().density() * (S::one() - *q1);
            let dens2 = model.g2().points().density() * (S::one() - *q2);
            (pts1, dens1, pts2, dens2)
        }
        AttackSpec::Disk { center, radius } => {
            let survive = |g: &Rgg<S>| -> Vec<Point<S>> {
                g.points()
                    .points()
                    .iter()
                    .filter(|p| p.dist(center) > *radius)
                    .copied()
                    .collect()
            };
            (
                survive(model.g1()),
                model.g1().points().density(),
                survive(model.g2()),
                model.g2().points().density(),
            )
        }
    };
    let g1 = Rgg::new(
        PointSet::from_points_with_density(pts1, window, dens1)?,
        model.g1().conn_dist(),
    )?;
    let g2 = Rgg::new(
        PointSet::from_points_with_density(pts2, window, dens2)?,
        model.g2().conn_dist(),
    )?;
    InterdepModel::new(g1, g2, model.dep_dist())
}

/// Post-attack percolation summary over independent seeds.
#[derive(Clone, Debug)]
pub struct AttackSummary {
    pub per_seed: Vec<MutualStats>,
    pub mean: MutualStats,
    pub min: MutualStats,
}

/// For each seed, regenerate the point processes with the model's
/// parameters, apply the attack, and measure the surviving nodes' largest
/// mutual-component fractions. Fractions are relative to the survivors, so
/// a disk attack is judged by the percolation of what remains outside the
/// disk.
pub fn post_attack_percolation<S: Scalar>(
    model: &InterdepModel<S>,
    spec: &AttackSpec<S>,
    seeds: &[u64],
) -> Result<AttackSummary> {
    spec.validate(model.window())?;
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let window = *model.window();
    let (lam1, d1) = (model.g1().points().density(), model.g1().conn_dist());
    let (lam2, d2) = (model.g2().points().density(), model.g2().conn_dist());
    let dep = model.dep_dist();

    let per_seed: Result<Vec<MutualStats>> = seeds
        .par_iter()
        .map(|&seed| {
            let ps1 = PointSet::sample_poisson(lam1, window, &RngStream::new(seed, 1))?;
            let ps2 = PointSet::sample_poisson(lam2, window, &RngStream::new(seed, 2))?;
            let fresh = InterdepModel::new(Rgg::new(ps1, d1)?, Rgg::new(ps2, d2)?, dep)?;
            let attacked = apply_attack(&fresh, spec, &RngStream::new(seed, 3))?;
            Ok(attacked.largest_mutual_stats())
        })
        .collect();
    let per_seed = per_seed?;
    let n = per_seed.len() as f64;
    let mean = MutualStats {
        f1: per_seed.iter().map(|s| s.f1).sum::<f64>() / n,
        f2: per_seed.iter().map(|s| s.f2).sum::<f64>() / n,
    };
    let min = MutualStats {
        f1: per_seed.iter().map(|s| s.f1).fold(f64::INFINITY, f64::min),
        f2: per_seed.iter().map(|s| s.f2).fold(f64::INFINITY, f64::min),
    };
    Ok(AttackSummary {
        per_seed,
        mean,
        min,
    })
}

/// One point of the tolerable random-removal frontier: at removal fraction
/// `q2` in the second graph, up to `q1_max` of the first graph may be
/// removed while staying on the certified side of the threshold curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierPoint<S> {
    pub q2: S,
    pub q1_max: S,
}

/// Linear interpolation of the required lam1 on a threshold curve; `None`
/// outside the curve's range or across unreachable entries.
fn curve_lam1_at<S: Scalar>(curve: &[CurvePoint<S>], lam2: S) -> Option<S> {
    let first = curve.first()?;
    let last = curve.last()?;
    if lam2 < first.lam2 || lam2 > last.lam2 {
        return None;
    }
    let pos = curve.partition_point(|p| p.lam2 < lam2);
    if pos < curve.len() && curve[pos].lam2 == lam2 {
        return curve[pos].lam1;
    }
    let (a, b) = (&curve[pos - 1], &curve[pos]);
    let (la, lb) = (a.lam1?, b.lam1?);
    let t = (lam2 - a.lam2) / (b.lam2 - a.lam2);
    Some(la + t * (lb - la))
}

/// The sampled frontier of removal fractions (q1, q2) keeping the thinned
/// densities `(lam1 (1-q1), lam2 (1-q2))` on the certified side of the
/// threshold curve. Scanning stops at the first q2 whose thinned lam2
/// leaves the curve's certified range. The curve must be sorted by lam2.
pub fn max_tolerable_random_fraction<S: Scalar>(
    curve: &[CurvePoint<S>],
    lam1: S,
    lam2: S,
    q2_step: S,
) -> Result<Vec<FrontierPoint<S>>> {
    if curve.is_empty() {
        return Err(Error::InvalidArgument("empty threshold curve".into()));
    }
    if curve.windows(2).any(|w| w[0].lam2 >= w[1].lam2) {
        return Err(Error::InvalidArgument(
            "threshold curve must be strictly sorted by lam2".into(),
        ));
    }
    if !(lam1 > S::zero()) || !(lam2 > S::zero()) {
        return Err(Error::InvalidArgument("densities must be positive".into()));
    }
    if !(q2_step > S::zero() && q2_step <= S::one()) {
        return Err(Error::InvalidArgument(format!(
            "q2 step must lie in (0, 1], got {q2_step}"
        )));
    }
    let slack = S::from(1e-7).unwrap();
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let q2 = S::from(i).unwrap() * q2_step;
        if q2 > S::one() {
            break;
        }
        let thinned = lam2 * (S::one() - q2);
        let Some(required) = curve_lam1_at(curve, thinned) else {
            break;
        };
        let q1_max = S::one() - required / lam1;
        if q1_max < -slack {
            break;
        }
        out.push(FrontierPoint {
            q2,
            q1_max: q1_max.max(S::zero()),
        });
        i += 1;
    }
    Ok(out)
}
