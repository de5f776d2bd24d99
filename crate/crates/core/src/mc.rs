//! Simulation-based confidence bounds for percolation thresholds. Each bond
//! of a 1-dependent square-lattice model is associated with a 2D x D
//! rectangle; a trial samples both point processes on that rectangle alone
//! and decides whether the bond is open. Upper-bound variants certify
//! percolation when the open probability exceeds the 1-dependent threshold;
//! the lower-bound variant works on the complement of a relaxed-supply
//! connection process. Acceptance is an exact one-sided binomial
//! (Clopper-Pearson) confidence statement.

use rayon::prelude::*;

use crate::bounds::{BoundGeometry, BoundQuery, ONE_DEPENDENT_THRESHOLD};
use crate::error::{Error, Result};
use crate::geom::Window;
use crate::interdep::{GraphSide, InterdepModel};
use crate::numeric::binomial_tail_at_least;
use crate::rgg::{CrossingSpec, Rgg};
use crate::scalar::Scalar;
use crate::spatial::{PointSet, RngStream};

/// Default confidence level of the acceptance protocol.
pub const DEFAULT_CONFIDENCE_LEVEL: f64 = 0.995;

/// Default trial count per density grid point.
pub const DEFAULT_TRIALS: u32 = 100;

/// Default density grid step of the threshold search.
pub const DEFAULT_SEARCH_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialVariant {
    /// Open iff the greedy mutual components of the two D x D squares merge
    /// into one mutual component.
    UpperMerge,
    /// Open iff the greedy mutual component of the whole rectangle crosses
    /// the inset rectangle horizontally and the inset square vertically in
    /// both graphs.
    UpperCrossing,
    /// Open iff the complement of the relaxed-supply connection process of
    /// one graph forms both crossings.
    LowerVacant,
}

/// Geometry of one bond trial: the rectangle R = S1 u S2 of side `D`, the
/// variant, the densities and distances, and the inset carving the interior
/// crossing regions R' and S1' so that trial outcomes depend only on points
/// inside R.
#[derive(Clone, Debug)]
pub struct BondTrialConfig<S: Scalar> {
    square_side: S,
    variant: TrialVariant,
    query: BoundQuery<S>,
    inset: S,
    inset_override: Option<S>,
}

impl<S: Scalar> BondTrialConfig<S> {
    /// `square_side` defaults to `10 * max(d1, d2)`. The inset is fixed by
    /// the variant: `max(d1, d2) + dep` for the crossing-based variants
    /// (the lower variant additionally depends on other-graph points within
    /// `dep`, and per-graph uses `d_i + dep`). Requires `2 * inset < D` so
    /// the crossing regions are nonempty.
    pub fn new(
        variant: TrialVariant,
        query: BoundQuery<S>,
        square_side: Option<S>,
    ) -> Result<Self> {
        let d_max = query.d1.max(query.d2);
        let ten = S::from(10.0).unwrap();
        let square_side = square_side.unwrap_or(ten * d_max);
        if !(square_side > S::zero()) || !square_side.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "square side must be positive and finite, got {square_side}"
            )));
        }
        let inset = match variant {
            TrialVariant::UpperMerge => S::zero(),
            TrialVariant::UpperCrossing | TrialVariant::LowerVacant => d_max + query.dep,
        };
        let two = S::from(2.0).unwrap();
        if variant != TrialVariant::UpperMerge && !(two * inset < square_side) {
            return Err(Error::InvalidArgument(format!(
                "square side {square_side} too small for inset {inset}; need 2*inset < D"
            )));
        }
        Ok(Self {
            square_side,
            variant,
            query,
            inset,
            inset_override: None,
        })
    }

    /// Override the crossing-region inset for every variant. Values below
    /// the variant rule shrink the margin that keeps trial outcomes a
    /// function of the rectangle's own points; exploration only.
    pub fn with_inset(mut self, inset: S) -> Result<Self> {
        let two = S::from(2.0).unwrap();
        if !(inset >= S::zero()) || !(two * inset < self.square_side) {
            return Err(Error::InvalidArgument(format!(
                "inset {inset} must be nonnegative with 2*inset < D = {}",
                self.square_side
            )));
        }
        self.inset_override = Some(inset);
        Ok(self)
    }

    pub fn square_side(&self) -> S {
        self.square_side
    }

    pub fn variant(&self) -> TrialVariant {
        self.variant
    }

    pub fn query(&self) -> &BoundQuery<S> {
        &self.query
    }

    /// Effective inset for the crossing-based variants.
    pub fn inset(&self) -> S {
        self.inset_override.unwrap_or(self.inset)
    }

    /// The full trial rectangle R = [0, 2D] x [0, D].
    pub fn rect(&self) -> Window<S> {
        let two = S::from(2.0).unwrap();
        Window::new(
            S::zero(),
            S::zero(),
            two * self.square_side,
            self.square_side,
        )
        .expect("positive side")
    }

    /// Left square S1.
    pub fn square1(&self) -> Window<S> {
        Window::new(S::zero(), S::zero(), self.square_side, self.square_side)
            .expect("positive side")
    }

    /// Right square S2.
    pub fn square2(&self) -> Window<S> {
        let two = S::from(2.0).unwrap();
        Window::new(
            self.square_side,
            S::zero(),
            two * self.square_side,
            self.square_side,
        )
        .expect("positive side")
    }

    /// Crossing regions for a given inset: the (2D-2d) x (D-2d) rectangle R'
    /// centered on R and the (D-2d) x (D-2d) square S1' centered on S1.
    fn crossing_regions(&self, inset: S) -> (Window<S>, Window<S>) {
        let two = S::from(2.0).unwrap();
        let d = self.square_side;
        let rp = Window::centered(self.rect().center(), two * d - two * inset, d - two * inset)
            .expect("validated inset");
        let s1p = Window::centered(self.square1().center(), d - two * inset, d - two * inset)
            .expect("validated inset");
        (rp, s1p)
    }

    /// The lower-bound variant's effective inset for one graph: its own
    /// connection distance plus the interdependence distance (a node's
    /// removal depends on other-graph points within `dep`).
    fn lower_inset(&self, side: GraphSide) -> S {
        if let Some(inset) = self.inset_override {
            return inset;
        }
        let d_own = match side {
            GraphSide::G1 => self.query.d1,
            GraphSide::G2 => self.query.d2,
        };
        d_own + self.query.dep
    }

    /// Sample both point processes on R. One stream drives the whole trial.
    pub fn sample_model(&self, rng: &RngStream) -> Result<InterdepModel<S>> {
        let rect = self.rect();
        let mut r = rng.rng();
        let ps1 = sample_on(self.query.lam1, &rect, &mut r)?;
        let ps2 = sample_on(self.query.lam2, &rect, &mut r)?;
        let g1 = Rgg::new(ps1, self.query.d1)?;
        let g2 = Rgg::new(ps2, self.query.d2)?;
        InterdepModel::new(g1, g2, self.query.dep)
    }
}

/// Poisson sample drawn from an already-positioned generator, so a single
/// stream can drive several draws sequentially.
fn sample_on<S: Scalar>(
    density: S,
    window: &Window<S>,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<PointSet<S>> {
    use rand::Rng;
    use rand_distr::{Distribution, Poisson};
    let mean = density.to_f64().unwrap_or(f64::NAN) * window.area().to_f64().unwrap_or(f64::NAN);
    if !mean.is_finite() || mean > 5e7 {
        return Err(Error::InvalidArgument(format!(
            "expected point count {mean} is not a sane sample size"
        )));
    }
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::InvalidArgument(format!("poisson rate {mean}: {e}")))?
            .sample(rng) as u64
    } else {
        0
    };
    let mut points = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let x = rng.random_range(window.x_min..window.x_max);
        let y = rng.random_range(window.y_min..window.y_max);
        points.push(crate::geom::Point::new(x, y));
    }
    PointSet::from_points_with_density(points, *window, density)
}

/// One merge-variant bond trial: sample R, compute the greedy mutual
/// components of S1 and S2, and test whether they merge.
pub fn trial_upper_merge<S: Scalar>(cfg: &BondTrialConfig<S>, rng: &RngStream) -> Result<bool> {
    require_variant(cfg, TrialVariant::UpperMerge)?;
    let model = cfg.sample_model(rng)?;
    Ok(eval_upper_merge(cfg, &model))
}

/// Merge-variant bond state for an already-sampled model on R. The outcome
/// is a deterministic function of the points inside R.
pub fn eval_upper_merge<S: Scalar>(cfg: &BondTrialConfig<S>, model: &InterdepModel<S>) -> bool {
    let a = model.greedy_mutual_component(&cfg.square1());
    let b = model.greedy_mutual_component(&cfg.square2());
    if a.is_empty() || b.is_empty() {
        return false;
    }
    model.merge_test(&a, &b)
}

/// One crossing-variant bond trial: the greedy mutual component of R must
/// cross R' horizontally and S1' vertically in both graphs.
pub fn trial_upper_crossing<S: Scalar>(cfg: &BondTrialConfig<S>, rng: &RngStream) -> Result<bool> {
    require_variant(cfg, TrialVariant::UpperCrossing)?;
    let model = cfg.sample_model(rng)?;
    Ok(eval_upper_crossing(cfg, &model))
}

/// Crossing-variant bond state for an already-sampled model on R.
pub fn eval_upper_crossing<S: Scalar>(cfg: &BondTrialConfig<S>, model: &InterdepModel<S>) -> bool {
    let comp = model.greedy_mutual_component(&cfg.rect());
    if comp.v1.is_empty() || comp.v2.is_empty() {
        return false;
    }
    let (rp, s1p) = cfg.crossing_regions(cfg.inset());
    let sides = [(&comp.v1, model.g1()), (&comp.v2, model.g2())];
    sides.iter().all(|(members, graph)| {
        let sub = graph.restrict(members);
        sub.has_occupied_crossing(&CrossingSpec::horizontal(rp))
            && sub.has_occupied_crossing(&CrossingSpec::vertical(s1p))
    })
}

/// One lower-bound bond trial for one graph: apply the relaxed supply rule
/// (a node survives iff any other-graph node lies within `dep`), then test
/// whether the complement of the surviving connection process crosses R'
/// horizontally and S1' vertically.
pub fn trial_lower_vacant<S: Scalar>(
    cfg: &BondTrialConfig<S>,
    rng: &RngStream,
    side: GraphSide,
) -> Result<bool> {
    require_variant(cfg, TrialVariant::LowerVacant)?;
    let model = cfg.sample_model(rng)?;
    Ok(eval_lower_vacant(cfg, &model, side))
}

/// Lower-variant bond state for an already-sampled model on R.
pub fn eval_lower_vacant<S: Scalar>(
    cfg: &BondTrialConfig<S>,
    model: &InterdepModel<S>,
    side: GraphSide,
) -> bool {
    let (own, other) = match side {
        GraphSide::G1 => (model.g1(), model.g2()),
        GraphSide::G2 => (model.g2(), model.g1()),
    };
    let kept: Vec<usize> = (0..own.len())
        .filter(|&i| {
            !other
                .points()
                .neighbors_within(&own.points().point(i), model.dep_dist())
                .is_empty()
        })
        .collect();
    let sub = own.restrict(&kept);
    let (rp, s1p) = cfg.crossing_regions(cfg.lower_inset(side));
    sub.has_vacant_crossing(&CrossingSpec::horizontal(rp))
        && sub.has_vacant_crossing(&CrossingSpec::vertical(s1p))
}

fn require_variant<S: Scalar>(cfg: &BondTrialConfig<S>, expected: TrialVariant) -> Result<()> {
    if cfg.variant != expected {
        return Err(Error::InvalidArgument(format!(
            "config variant {:?} does not match trial {:?}",
            cfg.variant, expected
        )));
    }
    Ok(())
}

/// Mean density of first-graph nodes that keep at least one supply node
/// within `dep`: `lam1 * (1 - e^{-lam2 pi dep^2})`.
pub fn effective_density<S: Scalar>(lam1: S, lam2: S, dep: S) -> S {
    assert!(
        lam1 >= S::zero() && lam2 >= S::zero() && dep >= S::zero(),
        "inputs must be nonnegative"
    );
    let pi = S::from(std::f64::consts::PI).unwrap();
    lam1 * (S::one() - (-lam2 * pi * dep * dep).exp())
}

/// Outcome of the exact binomial acceptance rule on a trial batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceVerdict {
    pub trials: u32,
    pub failures: u32,
    /// Open probability the batch must certify (1-dependent threshold).
    pub threshold_p: f64,
    /// Confidence level the lower bound is computed at.
    pub level: f64,
    /// One-sided Clopper-Pearson lower confidence bound on the open
    /// probability.
    pub lower_bound: f64,
    /// Achieved confidence of the statement `p >= threshold_p`:
    /// 1 - P(X >= successes | p = threshold_p).
    pub confidence: f64,
    pub accepted: bool,
}

/// Acceptance under the default protocol: threshold 0.8639 at 99.5%
/// confidence. With 100 trials this accepts exactly when failures <= 5.
pub fn confidence_verdict(trials: u32, failures: u32) -> ConfidenceVerdict {
    confidence_verdict_with(
        trials,
        failures,
        ONE_DEPENDENT_THRESHOLD,
        DEFAULT_CONFIDENCE_LEVEL,
    )
}

pub fn confidence_verdict_with(
    trials: u32,
    failures: u32,
    threshold_p: f64,
    level: f64,
) -> ConfidenceVerdict {
    assert!(failures <= trials, "failures cannot exceed trials");
    assert!(trials > 0, "trial count must be positive");
    assert!(
        (0.0..1.0).contains(&(1.0 - level)),
        "level must lie in (0, 1]"
    );
    let successes = trials - failures;
    let lower_bound = clopper_pearson_lower(trials, successes, level);
    let confidence = 1.0 - binomial_tail_at_least(trials, successes, threshold_p);
    ConfidenceVerdict {
        trials,
        failures,
        threshold_p,
        level,
        lower_bound,
        confidence,
        accepted: lower_bound >= threshold_p,
    }
}

/// One-sided Clopper-Pearson lower confidence bound for a binomial
/// proportion: the p solving P(X >= successes | p) = 1 - level, found by
/// bisection on the exact tail.
pub fn clopper_pearson_lower(trials: u32, successes: u32, level: f64) -> f64 {
    assert!(successes <= trials);
    if successes == 0 {
        return 0.0;
    }
    let alpha = 1.0 - level;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binomial_tail_at_least(trials, successes, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Largest failure count the protocol accepts at the given batch size.
pub fn max_acceptable_failures(trials: u32, threshold_p: f64, level: f64) -> Option<u32> {
    (0..=trials)
        .take_while(|&k| confidence_verdict_with(trials, k, threshold_p, level).accepted)
        .last()
}

/// Density-grid search configuration.
#[derive(Clone, Debug)]
pub struct SearchConfig<S> {
    pub lam1_min: S,
    pub lam1_max: S,
    pub step: S,
    pub trials: u32,
    pub threshold_p: f64,
    pub level: f64,
    /// Square side D; `None` for the default `10 * max(d1, d2)`.
    pub square_side: Option<S>,
    /// Crossing-region inset override; `None` for the variant rule.
    pub inset: Option<S>,
}

impl<S: Scalar> SearchConfig<S> {
    pub fn new(lam1_min: S, lam1_max: S) -> Self {
        Self {
            lam1_min,
            lam1_max,
            step: S::from(DEFAULT_SEARCH_STEP).unwrap(),
            trials: DEFAULT_TRIALS,
            threshold_p: ONE_DEPENDENT_THRESHOLD,
            level: DEFAULT_CONFIDENCE_LEVEL,
            square_side: None,
            inset: None,
        }
    }

    fn grid(&self) -> Result<Vec<S>> {
        if !(self.step > S::zero())
            || !(self.lam1_max >= self.lam1_min)
            || self.lam1_min < S::zero()
        {
            return Err(Error::InvalidArgument(format!(
                "bad search grid: [{}, {}] step {}",
                self.lam1_min, self.lam1_max, self.step
            )));
        }
        let span = (self.lam1_max - self.lam1_min) / self.step;
        let n = span
            .to_f64()
            .map(|v| (v + 1e-9).floor() as usize)
            .unwrap_or(0);
        Ok((0..=n)
            .map(|i| self.lam1_min + S::from(i).unwrap() * self.step)
            .collect())
    }
}

/// Tally of one trial batch at a fixed density. For the lower variant the
/// failure count reported is the better (smaller) of the two graphs'
/// counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchTally<S> {
    pub lam1: S,
    pub trials: u32,
    pub failures: u32,
    pub accepted: bool,
}

/// Search result: the certified density (when found) plus every batch
/// tally that was run, in execution order.
#[derive(Clone, Debug)]
pub enum SearchOutcome<S> {
    Found { lam1: S, trail: Vec<BatchTally<S>> },
    Exhausted { trail: Vec<BatchTally<S>> },
}

impl<S: Copy> SearchOutcome<S> {
    pub fn lam1(&self) -> Option<S> {
        match self {
            Self::Found { lam1, .. } => Some(*lam1),
            Self::Exhausted { .. } => None,
        }
    }

    pub fn trail(&self) -> &[BatchTally<S>] {
        match self {
            Self::Found { trail, .. } => trail,
            Self::Exhausted { trail } => trail,
        }
    }
}

/// Per-trial failure counts for the two tracked verdicts (the upper
/// variants track one, the lower variant one per graph).
type TrialFails = (u32, u32);

/// Run up to `trials` trials in deterministic parallel chunks, stopping
/// early once both failure counters exceed `k_max` (acceptance is then
/// impossible regardless of the remaining outcomes). Chunk boundaries are
/// fixed, so the partial tallies are reproducible.
fn run_batch<F>(trials: u32, k_max: u32, eval: F) -> (u32, u32, u32)
where
    F: Fn(u32) -> TrialFails + Sync,
{
    const CHUNK: u32 = 32;
    let mut run = 0u32;
    let mut fail_a = 0u32;
    let mut fail_b = 0u32;
    while run < trials {
        let upto = (run + CHUNK).min(trials);
        let (a, b): TrialFails = (run..upto)
            .into_par_iter()
            .map(&eval)
            .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
        fail_a += a;
        fail_b += b;
        run = upto;
        if fail_a > k_max && fail_b > k_max {
            break;
        }
    }
    (run, fail_a, fail_b)
}

/// Search the density grid for the bound certified by the chosen variant:
/// upper variants scan upward and return the smallest accepted lam1; the
/// lower variant scans downward and returns the largest lam1 whose
/// vacant-crossing verdict accepts for at least one graph. Trials run in
/// parallel; each (batch, trial) pair owns the substream
/// `(batch << 32) + trial` of `rng`, so results do not depend on the worker
/// count. Batches stop early once too many failures have accrued for the
/// protocol to accept.
pub fn search_threshold<S: Scalar>(
    variant: TrialVariant,
    fixed_lam2: S,
    geom: &BoundGeometry<S>,
    search: &SearchConfig<S>,
    rng: &RngStream,
) -> Result<SearchOutcome<S>> {
    let mut grid = search.grid()?;
    if matches!(variant, TrialVariant::LowerVacant) {
        grid.reverse();
    }
    let Some(k_max) = max_acceptable_failures(search.trials, search.threshold_p, search.level)
    else {
        return Err(Error::InvalidArgument(format!(
            "{} trials can never certify p >= {} at level {}",
            search.trials, search.threshold_p, search.level
        )));
    };
    let mut trail = Vec::new();
    for (batch_idx, &lam1) in grid.iter().enumerate() {
        let mut cfg =
            BondTrialConfig::new(variant, geom.query(lam1, fixed_lam2)?, search.square_side)?;
        if let Some(inset) = search.inset {
            cfg = cfg.with_inset(inset)?;
        }
        let base = rng.substream((batch_idx as u64) << 32);
        let (run, fail_a, fail_b) = match variant {
            TrialVariant::UpperMerge | TrialVariant::UpperCrossing => {
                run_batch(search.trials, k_max, |t| {
                    let model = cfg
                        .sample_model(&base.substream(t as u64))
                        .expect("validated trial parameters");
                    let open = match variant {
                        TrialVariant::UpperMerge => eval_upper_merge(&cfg, &model),
                        TrialVariant::UpperCrossing => eval_upper_crossing(&cfg, &model),
                        TrialVariant::LowerVacant => unreachable!(),
                    };
                    // Second counter counts every trial as failed so the
                    // early-break condition reduces to the first counter.
                    (u32::from(!open), 1)
                })
            }
            TrialVariant::LowerVacant => run_batch(search.trials, k_max, |t| {
                let model = cfg
                    .sample_model(&base.substream(t as u64))
                    .expect("validated trial parameters");
                let open1 = eval_lower_vacant(&cfg, &model, GraphSide::G1);
                let open2 = eval_lower_vacant(&cfg, &model, GraphSide::G2);
                (u32::from(!open1), u32::from(!open2))
            }),
        };
        // A short batch was cut off precisely because it cannot accept.
        let accepted = run == search.trials && {
            let best_fail = fail_a.min(fail_b);
            confidence_verdict_with(search.trials, best_fail, search.threshold_p, search.level)
                .accepted
        };
        trail.push(BatchTally {
            lam1,
            trials: run,
            failures: fail_a.min(fail_b),
            accepted,
        });
        if accepted {
            return Ok(SearchOutcome::Found { lam1, trail });
        }
    }
    Ok(SearchOutcome::Exhausted { trail })
}

/// Both upper-bound variants searched side by side; the smaller certified
/// density is the better upper bound.
#[derive(Clone, Debug)]
pub struct UpperSearchResult<S> {
    pub merge: SearchOutcome<S>,
    pub crossing: SearchOutcome<S>,
}

impl<S: Scalar> UpperSearchResult<S> {
    pub fn best(&self) -> Option<S> {
        match (self.merge.lam1(), self.crossing.lam1()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Run both upper variants (disjoint substream spaces) and keep both trails.
pub fn search_upper_best<S: Scalar>(
    fixed_lam2: S,
    geom: &BoundGeometry<S>,
    search: &SearchConfig<S>,
    rng: &RngStream,
) -> Result<UpperSearchResult<S>> {
    let merge = search_threshold(
        TrialVariant::UpperMerge,
        fixed_lam2,
        geom,
        search,
        &rng.substream(0),
    )?;
    let crossing = search_threshold(
        TrialVariant::UpperCrossing,
        fixed_lam2,
        geom,
        search,
        &rng.substream(1 << 63),
    )?;
    Ok(UpperSearchResult { merge, crossing })
}
