//! Two interdependent random geometric graphs on a shared window: supply
//! maps, mutual components (paired node sets, each side connected within
//! itself, every node supplied by the paired side within the interdependence
//! distance), the fixed-point algorithms that compute them, and
//! giant-mutual-component statistics.

use crate::error::{Error, Result};
use crate::geom::Window;
use crate::rgg::Rgg;
use crate::scalar::Scalar;

/// The interdependent pair: two RGGs over the same window plus the
/// interdependence distance within which supply nodes must lie.
#[derive(Clone, Debug)]
pub struct InterdepModel<S: Scalar> {
    g1: Rgg<S>,
    g2: Rgg<S>,
    dep_dist: S,
}

/// Bipartite within-distance map: for each node, the other graph's nodes
/// within the interdependence distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupplyMap {
    supplies_1to2: Vec<Vec<usize>>,
    supplies_2to1: Vec<Vec<usize>>,
}

impl SupplyMap {
    /// G2 nodes within reach of G1 node `i`.
    pub fn of_g1(&self, i: usize) -> &[usize] {
        &self.supplies_1to2[i]
    }

    /// G1 nodes within reach of G2 node `j`.
    pub fn of_g2(&self, j: usize) -> &[usize] {
        &self.supplies_2to1[j]
    }

    pub fn g1_lists(&self) -> &[Vec<usize>] {
        &self.supplies_1to2
    }

    pub fn g2_lists(&self) -> &[Vec<usize>] {
        &self.supplies_2to1
    }
}

/// Paired node subsets forming a mutual component: each side connected in
/// its own graph restricted to itself, every node with at least one supply
/// node on the paired side. Both sides empty encodes "no mutual component".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MutualComponent {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
}

impl MutualComponent {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.v1.is_empty() && self.v2.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.v1.len() + self.v2.len()
    }
}

/// Fractions of each graph's nodes inside the reported mutual component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutualStats {
    pub f1: f64,
    pub f2: f64,
}

impl<S: Scalar> InterdepModel<S> {
    pub fn new(g1: Rgg<S>, g2: Rgg<S>, dep_dist: S) -> Result<Self> {
        if g1.points().window() != g2.points().window() {
            return Err(Error::InvalidArgument(
                "both graphs must share the same window".into(),
            ));
        }
        if !(dep_dist > S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "interdependence distance must be positive, got {dep_dist}"
            )));
        }
        Ok(Self { g1, g2, dep_dist })
    }

    pub fn g1(&self) -> &Rgg<S> {
        &self.g1
    }

    pub fn g2(&self) -> &Rgg<S> {
        &self.g2
    }

    pub fn dep_dist(&self) -> S {
        self.dep_dist
    }

    pub fn window(&self) -> &Window<S> {
        self.g1.points().window()
    }

    /// The full within-distance supply map (closed ball on both sides, so
    /// the map is symmetric).
    pub fn build_supply_map(&self) -> SupplyMap {
        let supplies_1to2 = (0..self.g1.len())
            .map(|i| {
                self.g2
                    .points()
                    .neighbors_within(&self.g1.points().point(i), self.dep_dist)
            })
            .collect();
        let supplies_2to1 = (0..self.g2.len())
            .map(|j| {
                self.g1
                    .points()
                    .neighbors_within(&self.g2.points().point(j), self.dep_dist)
            })
            .collect();
        SupplyMap {
            supplies_1to2,
            supplies_2to1,
        }
    }

    fn has_supply(&self, own: GraphSide, i: usize, other_active: &[bool]) -> bool {
        let (p, other) = match own {
            GraphSide::G1 => (self.g1.points().point(i), &self.g2),
            GraphSide::G2 => (self.g2.points().point(i), &self.g1),
        };
        other
            .points()
            .neighbors_within(&p, self.dep_dist)
            .into_iter()
            .any(|j| other_active[j])
    }

    /// Largest mutual component containing the seed pair `(b1, b2)`,
    /// computed by iterating connectivity-from-seed and supply pruning to a
    /// fixed point. Returns `None` when the iteration strips either seed.
    ///
    /// The seeds must be within the interdependence distance of each other.
    pub fn mutual_component_containing(
        &self,
        b1: usize,
        b2: usize,
    ) -> Result<Option<MutualComponent>> {
        if b1 >= self.g1.len() || b2 >= self.g2.len() {
            return Err(Error::InvalidArgument(format!(
                "seed pair ({b1}, {b2}) out of range ({}, {})",
                self.g1.len(),
                self.g2.len()
            )));
        }
        let p1 = self.g1.points().point(b1);
        let p2 = self.g2.points().point(b2);
        if p1.dist(&p2) > self.dep_dist {
            return Err(Error::InvalidArgument(format!(
                "seed nodes are {} apart, beyond the interdependence distance {}",
                p1.dist(&p2),
                self.dep_dist
            )));
        }

        let mut v1 = component_mask_from(&self.g1, b1, None);
        let mut v2 = component_mask_from(&self.g2, b2, None);
        let max_rounds = self.g1.len() + self.g2.len() + 1;
        for _ in 0..max_rounds {
            // Synchronous update: both prunes are taken against the previous
            // iterate of the other side.
            let keep1 = prune_unsupplied(self, GraphSide::G1, &v1, &v2);
            let keep2 = prune_unsupplied(self, GraphSide::G2, &v2, &v1);
            if !keep1[b1] || !keep2[b2] {
                return Ok(None);
            }
            let next1 = component_mask_from(&self.g1, b1, Some(&keep1));
            let next2 = component_mask_from(&self.g2, b2, Some(&keep2));
            if next1 == v1 && next2 == v2 {
                return Ok(Some(MutualComponent {
                    v1: mask_to_indices(&v1),
                    v2: mask_to_indices(&v2),
                }));
            }
            v1 = next1;
            v2 = next2;
        }
        unreachable!("mutual-component iteration failed to reach a fixed point");
    }

    /// Greedy mutual component inside `region`: start from the largest
    /// connected component of each graph restricted to the region, prune
    /// unsupplied nodes, re-take the largest component, repeat to a fixed
    /// point. Size ties break toward the component containing the node with
    /// the smallest x-coordinate, then smallest y, then smallest index.
    pub fn greedy_mutual_component(&self, region: &Window<S>) -> MutualComponent {
        let mut v1 = in_region_mask(&self.g1, region);
        let mut v2 = in_region_mask(&self.g2, region);
        v1 = largest_component_mask(&self.g1, &v1);
        v2 = largest_component_mask(&self.g2, &v2);
        let max_rounds = self.g1.len() + self.g2.len() + 1;
        for _ in 0..max_rounds {
            let keep1 = prune_unsupplied(self, GraphSide::G1, &v1, &v2);
            let keep2 = prune_unsupplied(self, GraphSide::G2, &v2, &v1);
            let next1 = largest_component_mask(&self.g1, &keep1);
            let next2 = largest_component_mask(&self.g2, &keep2);
            if next1 == v1 && next2 == v2 {
                return MutualComponent {
                    v1: mask_to_indices(&v1),
                    v2: mask_to_indices(&v2),
                };
            }
            v1 = next1;
            v2 = next2;
        }
        unreachable!("greedy mutual-component iteration failed to reach a fixed point");
    }

    /// Whether two mutual components merge into one: on each side, the
    /// union must be connected in the ambient graph (paths may run through
    /// nodes outside the two components, which then belong to the same
    /// enclosing connected component). Mutual supply of the union is
    /// automatic because each input already supplies itself.
    pub fn merge_test(&self, a: &MutualComponent, b: &MutualComponent) -> bool {
        ambient_connected(&self.g1, &a.v1, &b.v1) && ambient_connected(&self.g2, &a.v2, &b.v2)
    }

    /// Fractions of nodes inside the greedy mutual component of the full
    /// window. Zero fractions on empty graphs.
    pub fn largest_mutual_stats(&self) -> MutualStats {
        let mc = self.greedy_mutual_component(self.window());
        let frac = |part: usize, total: usize| {
            if total == 0 {
                0.0
            } else {
                part as f64 / total as f64
            }
        };
        MutualStats {
            f1: frac(mc.v1.len(), self.g1.len()),
            f2: frac(mc.v2.len(), self.g2.len()),
        }
    }

    /// Definition check for a candidate mutual component: both sides
    /// connected restricted to themselves, every node supplied from the
    /// paired side. Both sides empty passes; one empty side with the other
    /// nonempty cannot be mutual.
    pub fn is_valid_mutual(&self, mc: &MutualComponent) -> bool {
        if mc.is_empty() {
            return true;
        }
        if mc.v1.is_empty() || mc.v2.is_empty() {
            return false;
        }
        let mask1 = indices_to_mask(&mc.v1, self.g1.len());
        let mask2 = indices_to_mask(&mc.v2, self.g2.len());
        if !connected_within(&self.g1, &mc.v1, &mask1)
            || !connected_within(&self.g2, &mc.v2, &mask2)
        {
            return false;
        }
        mc.v1
            .iter()
            .all(|&i| self.has_supply(GraphSide::G1, i, &mask2))
            && mc
                .v2
                .iter()
                .all(|&j| self.has_supply(GraphSide::G2, j, &mask1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphSide {
    G1,
    G2,
}

fn mask_to_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect()
}

fn indices_to_mask(indices: &[usize], n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in indices {
        mask[i] = true;
    }
    mask
}

fn in_region_mask<S: Scalar>(g: &Rgg<S>, region: &Window<S>) -> Vec<bool> {
    let mut mask = vec![false; g.len()];
    for i in g.points().indices_in_rect(region) {
        mask[i] = true;
    }
    mask
}

/// Nodes of `own_mask` that keep at least one supply node inside
/// `other_mask`.
fn prune_unsupplied<S: Scalar>(
    model: &InterdepModel<S>,
    side: GraphSide,
    own_mask: &[bool],
    other_mask: &[bool],
) -> Vec<bool> {
    own_mask
        .iter()
        .enumerate()
        .map(|(i, &active)| active && model.has_supply(side, i, other_mask))
        .collect()
}

/// BFS component of `start` within `active` (or the whole graph when
/// `active` is `None`), as a membership mask.
fn component_mask_from<S: Scalar>(g: &Rgg<S>, start: usize, active: Option<&[bool]>) -> Vec<bool> {
    let n = g.len();
    let mut seen = vec![false; n];
    if let Some(active) = active {
        if !active[start] {
            return seen;
        }
    }
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in g.neighbors(u) {
            if seen[v] {
                continue;
            }
            if let Some(active) = active {
                if !active[v] {
                    continue;
                }
            }
            seen[v] = true;
            queue.push_back(v);
        }
    }
    seen
}

/// Largest connected component among `active` nodes, ties broken toward the
/// component containing the lexicographically smallest (x, y, index) node.
/// (size, tie-break key, members) of the best component seen so far.
type BestComponent<S> = (usize, (S, S, usize), Vec<usize>);

fn largest_component_mask<S: Scalar>(g: &Rgg<S>, active: &[bool]) -> Vec<bool> {
    let n = g.len();
    let mut assigned = vec![false; n];
    let mut best: Option<BestComponent<S>> = None;
    for start in 0..n {
        if !active[start] || assigned[start] {
            continue;
        }
        let mut members = vec![start];
        assigned[start] = true;
        let mut head = 0;
        while head < members.len() {
            let u = members[head];
            head += 1;
            for v in g.neighbors(u) {
                if active[v] && !assigned[v] {
                    assigned[v] = true;
                    members.push(v);
                }
            }
        }
        let key = members
            .iter()
            .map(|&i| {
                let p = g.points().point(i);
                (p.x, p.y, i)
            })
            .min_by(|a, b| a.partial_cmp(b).expect("coordinates are ordered"))
            .expect("component is nonempty");
        let better = match &best {
            None => true,
            Some((len, best_key, _)) => {
                members.len() > *len
                    || (members.len() == *len
                        && key.partial_cmp(best_key) == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some((members.len(), key, members));
        }
    }
    match best {
        None => vec![false; n],
        Some((_, _, members)) => indices_to_mask(&members, n),
    }
}

/// Connectivity of `indices` in the subgraph induced by `mask` (which must
/// cover exactly those indices). Empty sets count as connected.
fn connected_within<S: Scalar>(g: &Rgg<S>, indices: &[usize], mask: &[bool]) -> bool {
    let Some(&start) = indices.first() else {
        return true;
    };
    let comp = component_mask_from(g, start, Some(mask));
    indices.iter().all(|&i| comp[i])
}

/// Whether all nodes of `a` and `b` lie in one connected component of the
/// full graph. Empty unions count as connected.
fn ambient_connected<S: Scalar>(g: &Rgg<S>, a: &[usize], b: &[usize]) -> bool {
    let mut union: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let Some(&start) = union.first() else {
        return true;
    };
    let comp = component_mask_from(g, start, None);
    union.iter().all(|&i| comp[i])
}
