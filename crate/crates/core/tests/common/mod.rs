//! Independent oracles shared by the integration suites. Everything here
//! reimplements the quantity under test from its definition, without going
//! through the library's grid index, union-find, clipping, or incomplete-
//! beta paths.

#![allow(dead_code)]

use rggperc::geom::{Point, Window};

pub type P = Point<f64>;

// ---------------------------------------------------------------------------
// Spatial oracles
// ---------------------------------------------------------------------------

/// Linear-scan closed-ball query.
pub fn brute_neighbors(points: &[P], center: &P, radius: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| points[i].dist(center) <= radius)
        .collect()
}

/// O(n^2) adjacency lists at connection distance `d`.
pub fn brute_adjacency(points: &[P], d: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].dist(&points[j]) <= d {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// BFS-from-scratch component labeling with canonical smallest-member
/// labels.
pub fn bfs_components(points: &[P], d: f64) -> Vec<usize> {
    let n = points.len();
    let adj = brute_adjacency(points, d);
    let mut label = vec![usize::MAX; n];
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        label[start] = start;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = start;
                    queue.push_back(v);
                }
            }
        }
    }
    label
}

// ---------------------------------------------------------------------------
// Crossing oracles
// ---------------------------------------------------------------------------

/// Definitional occupied-crossing search: enumerate paths whose interior
/// nodes stay inside the rectangle and whose endpoints straddle it, by DFS
/// over the brute-force adjacency.
pub fn occupied_crossing_oracle(
    points: &[P],
    d: f64,
    rect: &Window<f64>,
    horizontal: bool,
) -> bool {
    let n = points.len();
    let adj = brute_adjacency(points, d);
    let in_band = |p: &P| {
        if horizontal {
            p.y >= rect.y_min && p.y <= rect.y_max
        } else {
            p.x >= rect.x_min && p.x <= rect.x_max
        }
    };
    let starts: Vec<usize> = (0..n)
        .filter(|&i| {
            let p = &points[i];
            in_band(p)
                && if horizontal {
                    p.x <= rect.x_min
                } else {
                    p.y <= rect.y_min
                }
        })
        .collect();
    let is_goal = |i: usize| {
        let p = &points[i];
        in_band(p)
            && if horizontal {
                p.x >= rect.x_max
            } else {
                p.y >= rect.y_max
            }
    };
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for &s in &starts {
        if !seen[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if is_goal(v) {
                return true;
            }
            if !seen[v] && rect.contains(&points[v]) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

/// Closed-segment vs axis-aligned-box overlap by the slab method,
/// independent of the library's clipping code.
fn segment_hits_box(a: &P, b: &P, bx0: f64, by0: f64, bx1: f64, by1: f64) -> bool {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (d, lo, hi, start) in [(dx, bx0, bx1, a.x), (dy, by0, by1, a.y)] {
        if d == 0.0 {
            if start < lo || start > hi {
                return false;
            }
        } else {
            let mut ta = (lo - start) / d;
            let mut tb = (hi - start) / d;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Raster flood-fill decision of the vacant crossing: cells of side
/// `step` are blocked when any link segment touches them; a horizontal
/// vacant crossing exists when free cells connect the left column to the
/// right column (4-connectivity). Understates vacancy when a corridor is
/// narrower than the resolution, never overstates it.
pub fn floodfill_vacant_oracle(
    points: &[P],
    d: f64,
    rect: &Window<f64>,
    horizontal: bool,
    step: f64,
) -> bool {
    let ncx = ((rect.width() / step).ceil() as usize).max(1);
    let ncy = ((rect.height() / step).ceil() as usize).max(1);
    let mut blocked = vec![false; ncx * ncy];

    let n = points.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].dist(&points[j]) > d {
                continue;
            }
            let (a, b) = (&points[i], &points[j]);
            // Cell range overlapped by the segment's bounding box.
            let cx0 = (((a.x.min(b.x) - rect.x_min) / step).floor().max(0.0)) as usize;
            let cx1 = (((a.x.max(b.x) - rect.x_min) / step).floor()).min(ncx as f64 - 1.0);
            let cy0 = (((a.y.min(b.y) - rect.y_min) / step).floor().max(0.0)) as usize;
            let cy1 = (((a.y.max(b.y) - rect.y_min) / step).floor()).min(ncy as f64 - 1.0);
            if cx1 < 0.0 || cy1 < 0.0 || cx0 >= ncx || cy0 >= ncy {
                continue;
            }
            let (cx1, cy1) = (cx1 as usize, cy1 as usize);
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    if blocked[cy * ncx + cx] {
                        continue;
                    }
                    let bx0 = rect.x_min + cx as f64 * step;
                    let by0 = rect.y_min + cy as f64 * step;
                    let bx1 = (bx0 + step).min(rect.x_max);
                    let by1 = (by0 + step).min(rect.y_max);
                    if segment_hits_box(a, b, bx0, by0, bx1, by1) {
                        blocked[cy * ncx + cx] = true;
                    }
                }
            }
        }
    }

    // Flood from one side to the other over free cells.
    let mut seen = vec![false; ncx * ncy];
    let mut queue = std::collections::VecDeque::new();
    let enqueue_side = |seen: &mut Vec<bool>, queue: &mut std::collections::VecDeque<usize>| {
        if horizontal {
            for cy in 0..ncy {
                let c = cy * ncx;
                if !blocked[c] && !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        } else {
            for cx in 0..ncx {
                if !blocked[cx] && !seen[cx] {
                    seen[cx] = true;
                    queue.push_back(cx);
                }
            }
        }
    };
    enqueue_side(&mut seen, &mut queue);
    while let Some(c) = queue.pop_front() {
        let (cx, cy) = (c % ncx, c / ncx);
        if horizontal && cx == ncx - 1 {
            return true;
        }
        if !horizontal && cy == ncy - 1 {
            return true;
        }
        let mut push = |nc: usize| {
            if !blocked[nc] && !seen[nc] {
                seen[nc] = true;
                queue.push_back(nc);
            }
        };
        if cx > 0 {
            push(c - 1);
        }
        if cx + 1 < ncx {
            push(c + 1);
        }
        if cy > 0 {
            push(c - ncx);
        }
        if cy + 1 < ncy {
            push(c + ncx);
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Mutual-component oracles (bitmask graphs, <= 16 nodes per side)
// ---------------------------------------------------------------------------

/// A small interdependent instance with precomputed bitmask adjacency and
/// supply relations, for exhaustive-enumeration oracles.
pub struct SmallInstance {
    pub pts1: Vec<P>,
    pub pts2: Vec<P>,
    pub d1: f64,
    pub d2: f64,
    pub dep: f64,
    adj1: Vec<u32>,
    adj2: Vec<u32>,
    sup12: Vec<u32>,
    sup21: Vec<u32>,
}

impl SmallInstance {
    pub fn new(pts1: Vec<P>, pts2: Vec<P>, d1: f64, d2: f64, dep: f64) -> Self {
        assert!(pts1.len() <= 16 && pts2.len() <= 16);
        let mask_adj = |pts: &[P], d: f64| -> Vec<u32> {
            (0..pts.len())
                .map(|i| {
                    let mut m = 0u32;
                    for j in 0..pts.len() {
                        if j != i && pts[i].dist(&pts[j]) <= d {
                            m |= 1 << j;
                        }
                    }
                    m
                })
                .collect()
        };
        let cross = |from: &[P], to: &[P]| -> Vec<u32> {
            from.iter()
                .map(|f| {
                    let mut m = 0u32;
                    for (j, t) in to.iter().enumerate() {
                        if f.dist(t) <= dep {
                            m |= 1 << j;
                        }
                    }
                    m
                })
                .collect()
        };
        let adj1 = mask_adj(&pts1, d1);
        let adj2 = mask_adj(&pts2, d2);
        let sup12 = cross(&pts1, &pts2);
        let sup21 = cross(&pts2, &pts1);
        Self {
            pts1,
            pts2,
            d1,
            d2,
            dep,
            adj1,
            adj2,
            sup12,
            sup21,
        }
    }

    fn bfs_mask(adj: &[u32], start: usize, allowed: u32) -> u32 {
        if allowed & (1 << start) == 0 {
            return 0;
        }
        let mut seen = 1u32 << start;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0u32;
            let mut f = frontier;
            while f != 0 {
                let i = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= adj[i] & allowed & !seen;
            }
            seen |= next;
            frontier = next;
        }
        seen
    }

    fn connected(adj: &[u32], mask: u32) -> bool {
        if mask == 0 {
            return true;
        }
        let start = mask.trailing_zeros() as usize;
        Self::bfs_mask(adj, start, mask) == mask
    }

    /// Definition check on explicit masks.
    pub fn is_mutual(&self, m1: u32, m2: u32) -> bool {
        if m1 == 0 && m2 == 0 {
            return true;
        }
        if m1 == 0 || m2 == 0 {
            return false;
        }
        if !Self::connected(&self.adj1, m1) || !Self::connected(&self.adj2, m2) {
            return false;
        }
        let mut f = m1;
        while f != 0 {
            let i = f.trailing_zeros() as usize;
            f &= f - 1;
            if self.sup12[i] & m2 == 0 {
                return false;
            }
        }
        let mut f = m2;
        while f != 0 {
            let j = f.trailing_zeros() as usize;
            f &= f - 1;
            if self.sup21[j] & m1 == 0 {
                return false;
            }
        }
        true
    }

    /// Exhaustive maximal mutual component containing the seed pair:
    /// enumerate every connected node subset of the first graph containing
    /// b1; for each, the optimal second side is the component of b2 inside
    /// the supplied-by-m1 set, checked against the first side's supply.
    pub fn max_mutual_containing(&self, b1: usize, b2: usize) -> Option<(u32, u32)> {
        let comp1 = Self::bfs_mask(&self.adj1, b1, u32::MAX >> (32 - self.pts1.len().max(1)));
        let b1_bit = 1u32 << b1;
        let mut best: Option<(u32, u32)> = None;
        // Enumerate submasks of comp1 (including comp1 itself).
        let mut sub = comp1;
        loop {
            if sub & b1_bit != 0 && Self::connected(&self.adj1, sub) {
                let m1 = sub;
                let mut allowed2 = 0u32;
                for j in 0..self.pts2.len() {
                    if self.sup21[j] & m1 != 0 {
                        allowed2 |= 1 << j;
                    }
                }
                let m2 = Self::bfs_mask(&self.adj2, b2, allowed2);
                if m2 != 0 {
                    let mut ok = true;
                    let mut f = m1;
                    while f != 0 {
                        let i = f.trailing_zeros() as usize;
                        f &= f - 1;
                        if self.sup12[i] & m2 == 0 {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        let total = (m1.count_ones() + m2.count_ones()) as usize;
                        let better = match best {
                            None => true,
                            Some((a, b)) => total > (a.count_ones() + b.count_ones()) as usize,
                        };
                        if better {
                            best = Some((m1, m2));
                        }
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & comp1;
        }
        best
    }

    /// Largest mutual component size over every admissible seed pair.
    pub fn max_mutual_total(&self) -> usize {
        let mut best = 0;
        for i in 0..self.pts1.len() {
            for j in 0..self.pts2.len() {
                if self.pts1[i].dist(&self.pts2[j]) > self.dep {
                    continue;
                }
                if let Some((m1, m2)) = self.max_mutual_containing(i, j) {
                    best = best.max((m1.count_ones() + m2.count_ones()) as usize);
                }
            }
        }
        best
    }
}

pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0u32, |m, &i| m | (1 << i))
}

// ---------------------------------------------------------------------------
// Supply-feasibility brute force
// ---------------------------------------------------------------------------

/// Quantifier-elimination-free check: try every (k1*, k2*) pair.
pub fn supply_feasible_brute(tags_on_g1: &[u32], tags_on_g2: &[u32]) -> bool {
    let n1 = tags_on_g1.len() as u32;
    let n2 = tags_on_g2.len() as u32;
    for k1 in 1..=n1 {
        for k2 in 1..=n2 {
            let g1_ok = tags_on_g1.iter().filter(|&&t| t <= k2).count() as u32 >= k1;
            let g2_ok = tags_on_g2.iter().filter(|&&t| t <= k1).count() as u32 >= k2;
            if g1_ok && g2_ok {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Exact binomial oracle
// ---------------------------------------------------------------------------

fn ln_factorial(n: u32) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 4001];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    table[n as usize]
}

/// Direct term-by-term tail summation P(X >= s), X ~ Binomial(n, p).
pub fn binom_tail_direct(n: u32, s: u32, p: f64) -> f64 {
    if s == 0 {
        return 1.0;
    }
    if s > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_n = ln_factorial(n);
    (s..=n)
        .map(|i| {
            let ln_c = ln_n - ln_factorial(i) - ln_factorial(n - i);
            (ln_c + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
        })
        .sum()
}

/// Clopper-Pearson one-sided lower bound from the direct tail sum.
pub fn clopper_pearson_lower_direct(n: u32, successes: u32, level: f64) -> f64 {
    if successes == 0 {
        return 0.0;
    }
    let alpha = 1.0 - level;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binom_tail_direct(n, successes, mid) < alpha {
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

// ---------------------------------------------------------------------------
// Chi-square goodness of fit against a Poisson count distribution
// ---------------------------------------------------------------------------

/// Bins with expected count >= 5 are built greedily from the pmf (left tail
/// merged upward, remainder in the final bin), so the binning depends only
/// on (mu, n), never on the data.
pub fn poisson_chi_square(counts: &[u64], mu: f64) -> (f64, f64) {
    let n = counts.len() as f64;
    // pmf up to a far cutoff.
    let cutoff = (mu + 10.0 * mu.sqrt()).ceil() as usize + 10;
    let mut pmf = vec![0.0; cutoff + 1];
    pmf[0] = (-mu).exp();
    for k in 1..=cutoff {
        pmf[k] = pmf[k - 1] * mu / k as f64;
    }
    // Greedy bins of expected mass >= 5/n.
    let min_mass = 5.0 / n;
    let mut edges = Vec::new(); // inclusive upper edge of each bin
    let mut acc = 0.0;
    let mut used = 0.0;
    for (k, &m) in pmf.iter().enumerate() {
        acc += m;
        if acc >= min_mass {
            edges.push(k);
            used += acc;
            acc = 0.0;
        }
    }
    // Remaining mass (including beyond the cutoff) goes to the last bin.
    if edges.is_empty() {
        edges.push(cutoff);
    }
    let mut expected: Vec<f64> = Vec::with_capacity(edges.len());
    let mut lo = 0usize;
    for &hi in &edges {
        expected.push(pmf[lo..=hi].iter().sum::<f64>() * n);
        lo = hi + 1;
    }
    // Fold the open tail into the final bin.
    let tail = (1.0 - used) * n;
    *expected.last_mut().unwrap() += tail;

    let mut observed = vec![0.0; edges.len()];
    for &c in counts {
        let mut idx = edges.len() - 1;
        for (b, &hi) in edges.iter().enumerate() {
            if (c as usize) <= hi {
                idx = b;
                break;
            }
        }
        observed[idx] += 1.0;
    }
    let stat: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (edges.len() - 1) as f64;
    (stat, chi_square_critical_99(df))
}

/// Wilson-Hilferty approximation of the 99th percentile of chi-square.
pub fn chi_square_critical_99(df: f64) -> f64 {
    let z = 2.326_347_874_040_84; // standard normal 99th percentile
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}
