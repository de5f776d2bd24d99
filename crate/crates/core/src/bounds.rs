//! Closed-form percolation-threshold bounds for the interdependent model:
//! the square-lattice bond mapping (small connection-distance ratio), its
//! refined path-counting variant, the 1-dependent bond mapping (large
//! ratio), the triangle-lattice site mapping, supply-requirement variants
//! (fixed count, random count), the sorted-tag supply feasibility test, and
//! a bisection solver that turns any bound into a threshold curve.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spatial::RngStream;

/// Bond-percolation threshold of the square lattice with independent bonds.
pub const SQUARE_BOND_THRESHOLD: f64 = 0.5;

/// Site-percolation threshold of the triangle lattice.
pub const TRIANGLE_SITE_THRESHOLD: f64 = 0.5;

/// Open-probability threshold above which a 1-dependent bond model on the
/// square lattice is guaranteed to percolate.
pub const ONE_DEPENDENT_THRESHOLD: f64 = 0.8639;

/// Area coefficient of the triangle-lattice cell: a cell bounded by arcs of
/// radius r around a site has area 0.8227 r^2.
pub const TRIANGLE_CELL_AREA_COEFF: f64 = 0.8227;

/// Tolerance added before floor() when a length ratio is converted to an
/// integer cell count, so decimal inputs like 0.3/0.1 land on the intended
/// integer.
const RATIO_FLOOR_SLACK: f64 = 1e-9;

/// Poisson tail mass below which infinite series in the random-supply bound
/// are truncated.
const SERIES_TAIL_TOL: f64 = 1e-10;

/// Densities and distances a bound is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundQuery<S> {
    pub lam1: S,
    pub lam2: S,
    pub d1: S,
    pub d2: S,
    pub dep: S,
}

impl<S: Scalar> BoundQuery<S> {
    pub fn new(lam1: S, lam2: S, d1: S, d2: S, dep: S) -> Result<Self> {
        if !(lam1 >= S::zero()) || !(lam2 >= S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "densities must be nonnegative, got ({lam1}, {lam2})"
            )));
        }
        if !(d1 > S::zero()) || !(d2 > S::zero()) || !(dep > S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "distances must be positive, got d1={d1}, d2={d2}, dep={dep}"
            )));
        }
        Ok(Self {
            lam1,
            lam2,
            d1,
            d2,
            dep,
        })
    }

    /// Hypotheses shared by the two lattice-mapping bounds: the first graph
    /// has the smaller connection distance, and the interdependence distance
    /// reaches at least half of the larger one.
    pub fn require_lattice_domain(&self) -> Result<()> {
        if self.d1 > self.d2 {
            return Err(Error::Domain(format!(
                "requires d1 <= d2, got d1={} > d2={}",
                self.d1, self.d2
            )));
        }
        let two = S::from(2.0).unwrap();
        if self.dep < self.d2 / two {
            return Err(Error::Domain(format!(
                "requires dep >= d2/2, got dep={} < {}",
                self.dep,
                self.d2 / two
            )));
        }
        Ok(())
    }

    pub fn geometry(&self) -> BoundGeometry<S> {
        BoundGeometry {
            d1: self.d1,
            d2: self.d2,
            dep: self.dep,
        }
    }
}

/// Distances alone; densities are supplied per evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundGeometry<S> {
    pub d1: S,
    pub d2: S,
    pub dep: S,
}

impl<S: Scalar> BoundGeometry<S> {
    pub fn new(d1: S, d2: S, dep: S) -> Result<Self> {
        BoundQuery::new(S::zero(), S::zero(), d1, d2, dep).map(|q| q.geometry())
    }

    pub fn query(&self, lam1: S, lam2: S) -> Result<BoundQuery<S>> {
        BoundQuery::new(lam1, lam2, self.d1, self.d2, self.dep)
    }

    /// Triangle-lattice cell radius: adjacent cells must sit within both
    /// connection distances and any in-cell pair within the interdependence
    /// distance.
    pub fn cell_radius(&self) -> S {
        let two = S::from(2.0).unwrap();
        self.d1.min(self.d2).min(two * self.dep) / two
    }

    pub fn cell_area(&self) -> S {
        let r = self.cell_radius();
        S::from(TRIANGLE_CELL_AREA_COEFF).unwrap() * r * r
    }
}

/// Scales derived from the distances when the model is discretized onto
/// lattices.
#[derive(Clone, Copy, Debug)]
pub struct LatticeScales<S> {
    /// Small squares per large-square side: floor(d2/d1).
    pub dist_ratio: u32,
    /// Side of the small squares: d1 / (2 sqrt 2).
    pub small_square_side: S,
    /// Side of the 1-dependent lattice squares: min(d2/sqrt(10), dep/sqrt(5)).
    pub dep_square_side: S,
    /// Bond cells spanned by a dep-square: floor(2 * dep_square_side / d1).
    pub crossing_cells: u32,
    /// Triangle-lattice cell radius: min(d1, d2, 2 dep) / 2.
    pub cell_radius: S,
    /// Triangle-lattice cell area: 0.8227 * cell_radius^2.
    pub cell_area: S,
}

impl<S: Scalar> LatticeScales<S> {
    pub fn for_query(q: &BoundQuery<S>) -> Result<Self> {
        q.require_lattice_domain()?;
        let slack = S::from(RATIO_FLOOR_SLACK).unwrap();
        let dist_ratio = (q.d2 / q.d1 + slack)
            .floor()
            .to_u32()
            .ok_or_else(|| Error::Domain("d2/d1 ratio out of range".into()))?;
        let two = S::from(2.0).unwrap();
        let small_square_side = q.d1 / (two * S::from(2.0f64.sqrt()).unwrap());
        let dep_square_side =
            (q.d2 / S::from(10.0f64.sqrt()).unwrap()).min(q.dep / S::from(5.0f64.sqrt()).unwrap());
        let crossing_cells = (two * dep_square_side / q.d1 + slack)
            .floor()
            .to_u32()
            .unwrap_or(0);
        let geom = q.geometry();
        Ok(Self {
            dist_ratio,
            small_square_side,
            dep_square_side,
            crossing_cells,
            cell_radius: geom.cell_radius(),
            cell_area: geom.cell_area(),
        })
    }
}

/// Probability that one small square of side d1/(2 sqrt 2) holds at least
/// one node at density `lam`.
fn small_square_occupied<S: Scalar>(lam: S, d1: S) -> S {
    let eight = S::from(8.0).unwrap();
    S::one() - (-lam * d1 * d1 / eight).exp()
}

/// Left side of the square-lattice bond condition for small d2/d1: the
/// probability that a lattice bond is open,
/// `(1 - e^{-lam1 d1^2/8})^c * (1 - e^{-lam2 c^2 d1^2/8})` with
/// c = floor(d2/d1). Percolation is guaranteed when the value exceeds 1/2.
pub fn square_bond_lhs<S: Scalar>(q: &BoundQuery<S>) -> Result<S> {
    let scales = LatticeScales::for_query(q)?;
    let c = scales.dist_ratio;
    let p1 = small_square_occupied(q.lam1, q.d1).powi(c as i32);
    let c_sq = S::from(c * c).unwrap();
    let eight = S::from(8.0).unwrap();
    let p2 = S::one() - (-q.lam2 * c_sq * q.d1 * q.d1 / eight).exp();
    Ok(p1 * p2)
}

/// Smallest lam2 putting the square-lattice bond condition at its threshold
/// for a fixed lam1, by closed-form inversion. `None` when no finite lam2
/// suffices (the lam1 factor alone cannot exceed 1/2).
pub fn square_bond_solve_lam2<S: Scalar>(lam1: S, d1: S, d2: S, dep: S) -> Result<Option<S>> {
    let q = BoundQuery::new(lam1, S::zero(), d1, d2, dep)?;
    let scales = LatticeScales::for_query(&q)?;
    let c = scales.dist_ratio;
    let p1 = small_square_occupied(lam1, d1).powi(c as i32);
    let half = S::from(0.5).unwrap();
    if p1 <= half {
        return Ok(None);
    }
    let eight = S::from(8.0).unwrap();
    let c_sq = S::from(c * c).unwrap();
    let lam2 = -(eight / (c_sq * d1 * d1)) * (S::one() - half / p1).ln();
    Ok(Some(lam2))
}

/// Refined probability that the bond-end small squares connect through
/// occupied small squares inside one large square, counting every adjacent
/// square sequence instead of only the straight one. Valid for the
/// floor(d2/d1) = 3 geometry. `p_s` is the single-square occupation
/// probability.
pub fn refined_bond_prob_ratio3<S: Scalar>(p_s: S) -> Result<S> {
    if !(p_s >= S::zero() && p_s <= S::one()) {
        return Err(Error::InvalidArgument(format!(
            "occupation probability must lie in [0, 1], got {p_s}"
        )));
    }
    let one = S::one();
    let p3 = p_s * p_s * p_s;
    let p4 = p3 * p_s;
    let p6 = p4 * p_s * p_s;
    Ok(p3 + (one - p_s) * p4 + (one - p_s) * p4 - (one - p_s) * p6)
}

/// Lower bound on the probability that open bonds cross a (k*m) x m square
/// lattice along its long side, each bond open independently with
/// probability `p`: `max(0, 1 - (4/3)(km+1) (3(1-p))^m)`. Vacuous (clamped
/// to zero) for small m or p <= 2/3.
pub fn crossing_prob_lower_bound<S: Scalar>(k: u32, m: u32, p: S) -> S {
    assert!(k >= 1, "aspect ratio k must be at least 1");
    assert!(
        p >= S::zero() && p <= S::one(),
        "bond probability must lie in [0, 1]"
    );
    let three = S::from(3.0).unwrap();
    let decay = (three * (S::one() - p)).powi(m as i32);
    let coeff = S::from(4.0 / 3.0).unwrap() * S::from(k * m + 1).unwrap();
    (S::one() - coeff * decay).max(S::zero())
}

/// Left side of the 1-dependent bond condition for large d2/d1: the product
/// of the two clamped lattice-crossing lower bounds and the probability
/// that a node of the second graph lands in the 2D x D rectangle.
/// Percolation is guaranteed when the value exceeds
/// [`ONE_DEPENDENT_THRESHOLD`].
pub fn one_dependent_lhs<S: Scalar>(q: &BoundQuery<S>) -> Result<S> {
    let scales = LatticeScales::for_query(q)?;
    let m = scales.crossing_cells;
    let p = small_square_occupied(q.lam1, q.d1);
    let two = S::from(2.0).unwrap();
    let d_sq = scales.dep_square_side * scales.dep_square_side;
    let p_node = S::one() - (-two * d_sq * q.lam2).exp();
    let f_square = crossing_prob_lower_bound(1, m, p);
    let f_rect = crossing_prob_lower_bound(2, m, p);
    Ok(f_square * f_rect * p_node)
}

/// Threshold pair for widely separated connection distances, obtained by
/// driving the crossing bounds to their large-m limit: lam1 solves
/// `1 - e^{-lam1 d1^2/8} = 2/3` and lam2 solves the rectangle-occupation
/// condition at the 1-dependent threshold with dep = d2/2.
pub fn large_ratio_threshold<S: Scalar>(d1: S, d2: S) -> Result<(S, S)> {
    if !(d1 > S::zero()) || !(d2 > S::zero()) {
        return Err(Error::InvalidArgument(format!(
            "distances must be positive, got d1={d1}, d2={d2}"
        )));
    }
    if d1 > d2 {
        return Err(Error::InvalidArgument(format!(
            "requires d1 <= d2, got d1={d1} > d2={d2}"
        )));
    }
    let eight = S::from(8.0).unwrap();
    let lam1 = eight * S::from(3.0f64.ln()).unwrap() / (d1 * d1);
    // dep = d2/2 makes D = d2/(2 sqrt 5), so 2 D^2 = d2^2 / 10.
    let ten = S::from(10.0).unwrap();
    let lam2 = -ten * S::from((1.0 - ONE_DEPENDENT_THRESHOLD).ln()).unwrap() / (d2 * d2);
    Ok((lam1, lam2))
}

/// Left side of the triangle-lattice site condition: the probability that a
/// cell of radius `r` holds at least one node from each graph,
/// `(1 - e^{-lam1 A})(1 - e^{-lam2 A})` with A = 0.8227 r^2. Percolation is
/// guaranteed when the value exceeds 1/2. The caller chooses
/// r = min(d1, d2, 2 dep) / 2 (see [`BoundGeometry::cell_radius`]).
pub fn triangle_site_lhs<S: Scalar>(lam1: S, lam2: S, r: S) -> S {
    assert!(r > S::zero(), "cell radius must be positive");
    assert!(
        lam1 >= S::zero() && lam2 >= S::zero(),
        "densities must be nonnegative"
    );
    let area = S::from(TRIANGLE_CELL_AREA_COEFF).unwrap() * r * r;
    (S::one() - (-lam1 * area).exp()) * (S::one() - (-lam2 * area).exp())
}

/// P(N >= k) for N ~ Poisson(mean).
pub fn poisson_upper_tail<S: Scalar>(mean: S, k: u32) -> S {
    assert!(mean >= S::zero(), "Poisson mean must be nonnegative");
    if k == 0 {
        return S::one();
    }
    // CDF up to k-1 by stable pmf recurrence; underflow of e^{-mean} for
    // huge means correctly drives the tail to 1.
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    for l in 1..k {
        pmf = pmf * mean / S::from(l).unwrap();
        cdf = cdf + pmf;
    }
    (S::one() - cdf).max(S::zero())
}

/// Left side of the fixed-count supply condition: each graph must place at
/// least `k_i` nodes in a triangle-lattice cell of the given area, so the
/// site-open probability is the product of two Poisson upper tails.
/// Reduces to [`triangle_site_lhs`] at k1 = k2 = 1.
pub fn fixed_supply_lhs<S: Scalar>(lam1: S, lam2: S, area: S, k1: u32, k2: u32) -> S {
    assert!(k1 >= 1 && k2 >= 1, "supply requirements must be at least 1");
    assert!(area > S::zero(), "cell area must be positive");
    poisson_upper_tail(lam1 * area, k1) * poisson_upper_tail(lam2 * area, k2)
}

/// Finite-support probability mass function over positive integers,
/// describing a random supply requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct SupplyPmf<S> {
    entries: Vec<(u32, S)>,
}

impl<S: Scalar> SupplyPmf<S> {
    /// Entries are (value, probability) pairs; values must be >= 1 and
    /// distinct, probabilities positive and summing to one.
    pub fn new(mut entries: Vec<(u32, S)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("pmf must have support".into()));
        }
        entries.sort_unstable_by_key(|&(v, _)| v);
        let mut sum = S::zero();
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate pmf entry for value {}",
                    window[0].0
                )));
            }
        }
        for &(v, p) in &entries {
            if v < 1 {
                return Err(Error::InvalidArgument(
                    "pmf support must be positive integers".into(),
                ));
            }
            if !(p > S::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "pmf probability for value {v} must be positive, got {p}"
                )));
            }
            sum = sum + p;
        }
        let tol = S::from(1e-12)
            .unwrap()
            .max(S::epsilon() * S::from(8.0).unwrap());
        if (sum - S::one()).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "pmf must sum to 1 within tolerance, got {sum}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn point_mass(value: u32) -> Self {
        Self::new(vec![(value, S::one())]).expect("point mass is a valid pmf")
    }

    pub fn entries(&self) -> &[(u32, S)] {
        &self.entries
    }

    pub fn max_support(&self) -> u32 {
        self.entries.last().map(|&(v, _)| v).unwrap_or(0)
    }

    /// F(k) = P(value <= k).
    pub fn cdf(&self, k: u32) -> S {
        let mut acc = S::zero();
        for &(v, p) in &self.entries {
            if v <= k {
                acc = acc + p;
            }
        }
        acc.min(S::one())
    }

    /// Inverse-CDF sample.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        use rand::Rng;
        let u: f64 = rng.random_range(0.0..1.0);
        let mut acc = 0.0;
        for &(v, p) in &self.entries {
            acc += p.to_f64().unwrap_or(0.0);
            if u < acc {
                return v;
            }
        }
        self.entries.last().expect("pmf nonempty").0
    }
}

/// A supply requirement: a fixed count or a random count with a finite pmf.
#[derive(Clone, Debug, PartialEq)]
pub enum SupplyRequirement<S> {
    Fixed(u32),
    Random(SupplyPmf<S>),
}

impl<S: Scalar> SupplyRequirement<S> {
    pub fn fixed(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument(
                "supply requirement must be at least 1".into(),
            ));
        }
        Ok(Self::Fixed(k))
    }

    pub fn as_pmf(&self) -> SupplyPmf<S> {
        match self {
            Self::Fixed(k) => SupplyPmf::point_mass(*k),
            Self::Random(pmf) => pmf.clone(),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        match self {
            Self::Fixed(k) => *k,
            Self::Random(pmf) => pmf.sample(rng),
        }
    }
}

/// P(at least `k_min` successes out of `n` trials at success probability
/// `f`), by pmf recurrence over the complementary lower tail. `k_min` is
/// expected to be small.
fn binomial_upper_tail_f64(n: u64, k_min: u32, f: f64) -> f64 {
    if k_min == 0 {
        return 1.0;
    }
    if (k_min as u64) > n {
        return 0.0;
    }
    if f >= 1.0 {
        return 1.0;
    }
    if f <= 0.0 {
        return 0.0;
    }
    let fail = 1.0 - f;
    // (1-f)^n via exp keeps huge n safe; underflow to zero is the correct
    // limit (the tail is then 1).
    let mut pmf = (n as f64 * fail.ln()).exp();
    let mut cdf = pmf;
    for t in 0..(k_min as u64).saturating_sub(1) {
        pmf = pmf * ((n - t) as f64) / ((t + 1) as f64) * (f / fail);
        cdf += pmf;
    }
    (1.0 - cdf).max(0.0)
}

fn poisson_upper_tail_f64(mu: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut pmf = (-mu).exp();
    let mut cdf = pmf;
    for l in 1..k {
        pmf = pmf * mu / l as f64;
        cdf += pmf;
    }
    (1.0 - cdf).max(0.0)
}

/// E[ P(at least k1 successes | Binomial(N, f)) ] for N ~ Poisson(mu):
/// the probability that at least `k1` of the cell's first-graph nodes each
/// need no more than the available supply count, at requirement-cdf `f`.
/// The Poisson series is truncated once the remaining tail mass is below
/// 1e-10; for large means the summation window is centered on the mean.
fn poisson_mixture_binom_tail(mu: f64, k1: u32, f: f64) -> f64 {
    if f <= 0.0 || mu <= 0.0 {
        return 0.0;
    }
    if f >= 1.0 {
        return poisson_upper_tail_f64(mu, k1);
    }
    if mu > 600.0 {
        if f * mu >= 1600.0 {
            // Every plausible N puts the binomial tail at 1 in f64.
            return poisson_upper_tail_f64(mu, k1);
        }
        // Sum over a +-12-sigma window, seeding the pmf through log-gamma.
        let sigma = mu.sqrt();
        let lo = ((mu - 12.0 * sigma).floor().max(k1 as f64)) as u64;
        let hi = (mu + 12.0 * sigma).ceil() as u64;
        let ln_pmf = lo as f64 * mu.ln() - mu - crate::numeric::ln_gamma(lo as f64 + 1.0);
        let mut pmf = ln_pmf.exp();
        let mut total = 0.0;
        let mut l = lo;
        loop {
            total += pmf * binomial_upper_tail_f64(l, k1, f);
            if l >= hi {
                break;
            }
            l += 1;
            pmf = pmf * mu / l as f64;
            if pmf == 0.0 && l as f64 > mu {
                break;
            }
        }
        return total;
    }
    let mut pmf = (-mu).exp();
    let mut seen = pmf;
    let mut total = 0.0;
    let mut l = 0u64;
    loop {
        if l >= k1 as u64 {
            total += pmf * binomial_upper_tail_f64(l, k1, f);
        }
        if (1.0 - seen) < SERIES_TAIL_TOL && l >= k1 as u64 {
            break;
        }
        if l > 100_000 {
            break;
        }
        l += 1;
        pmf = pmf * mu / l as f64;
        seen += pmf;
    }
    total
}

/// Site-open probability of the triangle-lattice cell under a fixed
/// requirement `k1` for the second graph's nodes and a random requirement
/// (pmf of needed second-graph supplies) for the first graph's nodes:
/// the probability that, for some k2 >= 1, exactly k2 second-graph nodes
/// fall in the cell while at least k1 first-graph nodes in the cell each
/// need no more than k2 of them.
///
/// The series over the first graph's node count is truncated once the
/// remaining Poisson tail is below 1e-10; the series over k2 terminates
/// exactly at the pmf's maximum support (beyond it the inner probability is
/// constant and the remainder collapses to a closed form). Evaluated in
/// double precision regardless of `S`.
pub fn random_supply_open_prob<S: Scalar>(
    lam1: S,
    lam2: S,
    area: S,
    k1: u32,
    k2_pmf: &SupplyPmf<S>,
) -> S {
    assert!(k1 >= 1, "supply requirement must be at least 1");
    assert!(area > S::zero(), "cell area must be positive");
    assert!(
        lam1 >= S::zero() && lam2 >= S::zero(),
        "densities must be nonnegative"
    );
    let mu1 = (lam1 * area).to_f64().expect("finite mean");
    let mu2 = (lam2 * area).to_f64().expect("finite mean");
    let smax = k2_pmf.max_support();

    let mut total = 0.0;
    let mut pmf_k2 = (-mu2).exp();
    for k2 in 1..smax {
        pmf_k2 = pmf_k2 * mu2 / k2 as f64;
        let f = k2_pmf.cdf(k2).to_f64().unwrap_or(0.0);
        total += pmf_k2 * poisson_mixture_binom_tail(mu1, k1, f);
    }
    total += poisson_upper_tail_f64(mu2, smax) * poisson_upper_tail_f64(mu1, k1);
    S::from(total).unwrap()
}

/// Whether tagged node populations can mutually satisfy their supply
/// requirements: true iff there exist counts (k1*, k2*) such that at least
/// k1* first-graph nodes carry tags <= k2* and at least k2* second-graph
/// nodes carry tags <= k1*. Tags state how many nodes of the other graph
/// each node requires. Decided by the sorted two-pointer sweep; empty
/// populations are infeasible.
pub fn supply_feasible(tags_on_g1: &[u32], tags_on_g2: &[u32]) -> bool {
    if tags_on_g1.is_empty() || tags_on_g2.is_empty() {
        return false;
    }
    debug_assert!(
        tags_on_g1.iter().chain(tags_on_g2).all(|&t| t >= 1),
        "tags must be positive"
    );
    let mut need_from_g2 = tags_on_g1.to_vec();
    need_from_g2.sort_unstable();
    let mut need_from_g1 = tags_on_g2.to_vec();
    need_from_g1.sort_unstable();
    let n1 = tags_on_g1.len() as u64;
    let n2 = tags_on_g2.len() as u64;
    let mut t1 = 1u64;
    let mut t2 = 1u64;
    loop {
        let t1_req = need_from_g1[(t2 - 1) as usize] as u64; // first-graph nodes needed by the t2 easiest second-graph nodes
        let t2_req = need_from_g2[(t1 - 1) as usize] as u64;
        if t1_req <= t1 && t2_req <= t2 {
            return true;
        }
        if t1_req > n1 || t2_req > n2 {
            return false;
        }
        t1 = t1.max(t1_req);
        t2 = t2.max(t2_req);
    }
}

/// Monte-Carlo estimate of the cell-open probability when both supply
/// requirements may be random: per trial, Poisson node counts are drawn for
/// the cell, every node is tagged with a draw of its requirement, and
/// feasibility is decided by [`supply_feasible`].
///
/// `need_of_g1` is the requirement distribution tagged onto first-graph
/// nodes (how many second-graph supplies each needs); `need_of_g2`
/// symmetric.
pub fn mc_supply_open_prob<S: Scalar>(
    lam1: S,
    lam2: S,
    area: S,
    need_of_g1: &SupplyRequirement<S>,
    need_of_g2: &SupplyRequirement<S>,
    trials: u32,
    rng: &RngStream,
) -> f64 {
    use rand_distr::{Distribution, Poisson};
    assert!(trials > 0, "trial count must be positive");
    let mu1 = (lam1 * area).to_f64().expect("finite mean");
    let mu2 = (lam2 * area).to_f64().expect("finite mean");
    let pois1 = (mu1 > 0.0).then(|| Poisson::new(mu1).expect("valid mean"));
    let pois2 = (mu2 > 0.0).then(|| Poisson::new(mu2).expect("valid mean"));
    let mut open = 0u64;
    let mut r = rng.rng();
    let mut tags1 = Vec::new();
    let mut tags2 = Vec::new();
    for _ in 0..trials {
        let n1 = pois1.as_ref().map_or(0, |p| p.sample(&mut r) as u64);
        let n2 = pois2.as_ref().map_or(0, |p| p.sample(&mut r) as u64);
        tags1.clear();
        tags2.clear();
        for _ in 0..n1 {
            tags1.push(need_of_g1.sample(&mut r));
        }
        for _ in 0..n2 {
            tags2.push(need_of_g2.sample(&mut r));
        }
        if supply_feasible(&tags1, &tags2) {
            open += 1;
        }
    }
    open as f64 / trials as f64
}

/// A bound usable for threshold-curve solving.
#[derive(Clone, Debug)]
pub enum ThresholdBound<S: Scalar> {
    /// Square-lattice bond mapping (small d2/d1).
    SquareBond,
    /// 1-dependent bond mapping (large d2/d1).
    OneDependent,
    /// Triangle-lattice site mapping at one supply node per side.
    TriangleSite,
    /// Triangle-lattice mapping with fixed supply counts.
    FixedSupply { k1: u32, k2: u32 },
    /// Triangle-lattice mapping with a fixed count for one side and a random
    /// requirement for the other.
    RandomSupply { k1: u32, k2: SupplyPmf<S> },
}

impl<S: Scalar> ThresholdBound<S> {
    /// Evaluate the bound condition's left-hand side.
    pub fn lhs(&self, lam1: S, lam2: S, geom: &BoundGeometry<S>) -> Result<S> {
        match self {
            Self::SquareBond => square_bond_lhs(&geom.query(lam1, lam2)?),
            Self::OneDependent => one_dependent_lhs(&geom.query(lam1, lam2)?),
            Self::TriangleSite => Ok(triangle_site_lhs(lam1, lam2, geom.cell_radius())),
            Self::FixedSupply { k1, k2 } => {
                Ok(fixed_supply_lhs(lam1, lam2, geom.cell_area(), *k1, *k2))
            }
            Self::RandomSupply { k1, k2 } => Ok(random_supply_open_prob(
                lam1,
                lam2,
                geom.cell_area(),
                *k1,
                k2,
            )),
        }
    }

    /// Threshold the left-hand side must exceed to certify percolation.
    pub fn threshold(&self) -> S {
        let t = match self {
            Self::OneDependent => ONE_DEPENDENT_THRESHOLD,
            _ => SQUARE_BOND_THRESHOLD,
        };
        S::from(t).unwrap()
    }
}

/// One solved point of a threshold curve; `lam1` is `None` where no finite
/// density satisfies the bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<S> {
    pub lam2: S,
    pub lam1: Option<S>,
}

/// Relative tolerance of the bisection solver.
const BISECT_REL_TOL: f64 = 1e-6;

/// Initial bracket top for the solved density, times 1/d1^2.
const BISECT_BRACKET_START: f64 = 1e3;

/// Largest bracket top (times 1/d1^2) before a grid point is declared
/// unreachable.
const BISECT_BRACKET_MAX: f64 = 1e9;

/// For each lam2 in the grid, bisect lam1 to the bound's threshold within
/// 1e-6 relative tolerance. Entries where even an enormous lam1 cannot reach
/// the threshold are reported as `None`. A left-hand side observed to
/// decrease as lam1 grows aborts with an error, since every supported bound
/// must be nondecreasing in the densities.
pub fn solve_threshold_curve<S: Scalar>(
    bound: &ThresholdBound<S>,
    lam2_grid: &[S],
    geom: &BoundGeometry<S>,
) -> Result<Vec<CurvePoint<S>>> {
    let threshold = bound.threshold();
    let d1_sq = geom.d1 * geom.d1;
    let bracket_start = S::from(BISECT_BRACKET_START).unwrap() / d1_sq;
    let bracket_max = S::from(BISECT_BRACKET_MAX).unwrap() / d1_sq;
    let mono_slack = S::from(1e-9).unwrap();

    let mut out = Vec::with_capacity(lam2_grid.len());
    for &lam2 in lam2_grid {
        let mut lo = S::zero();
        let mut f_lo = bound.lhs(lo, lam2, geom)?;
        let mut hi = bracket_start;
        let mut f_hi = bound.lhs(hi, lam2, geom)?;
        while f_hi <= threshold {
            if hi >= bracket_max {
                break;
            }
            hi = (hi * S::from(10.0).unwrap()).min(bracket_max);
            f_hi = bound.lhs(hi, lam2, geom)?;
        }
        if f_hi <= threshold {
            out.push(CurvePoint { lam2, lam1: None });
            continue;
        }
        if f_lo > f_hi + mono_slack {
            return Err(Error::NonMonotone(format!(
                "lhs decreases over the initial bracket at lam2={lam2}"
            )));
        }
        let rel = S::from(BISECT_REL_TOL).unwrap();
        for _ in 0..200 {
            if hi - lo <= rel * hi {
                break;
            }
            let mid = (lo + hi) / S::from(2.0).unwrap();
            let f_mid = bound.lhs(mid, lam2, geom)?;
            if f_mid < f_lo - mono_slack || f_mid > f_hi + mono_slack {
                return Err(Error::NonMonotone(format!(
                    "lhs not monotone near lam1={mid}, lam2={lam2}"
                )));
            }
            if f_mid > threshold {
                hi = mid;
                f_hi = f_mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
        out.push(CurvePoint {
            lam2,
            lam1: Some((lo + hi) / S::from(2.0).unwrap()),
        });
    }
    Ok(out)
}
