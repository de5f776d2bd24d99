//! Random geometric graph over a point set: adjacency is implicit (pairs at
//! distance <= `conn_dist` are linked, resolved through grid queries),
//! connected components via union-find, and the two rectangle-crossing
//! predicates used by bond-trial mappings: occupied node-path crossings and
//! vacant crossings of the complement of the connection process.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{clip_segment, segments_intersect, Point, Segment, Window};
use crate::scalar::Scalar;
use crate::spatial::PointSet;

/// Path-compressed union-find over `0..n`.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while cur != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    pub(crate) fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return;
        }
        match self.rank[rx].cmp(&self.rank[ry]) {
            std::cmp::Ordering::Less => self.parent[rx] = ry as u32,
            std::cmp::Ordering::Greater => self.parent[ry] = rx as u32,
            std::cmp::Ordering::Equal => {
                self.parent[ry] = rx as u32;
                self.rank[rx] += 1;
            }
        }
    }

    pub(crate) fn same(&mut self, x: usize, y: usize) -> bool {
        self.find(x) == self.find(y)
    }
}

/// Partition of nodes into connected components. Labels are canonical: the
/// label of a component is its smallest member index, so two labelings of the
/// same partition compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    labels: Vec<usize>,
    sizes: BTreeMap<usize, usize>,
}

impl ComponentLabeling {
    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Component label -> member count.
    pub fn sizes(&self) -> &BTreeMap<usize, usize> {
        &self.sizes
    }

    pub fn n_components(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// All labels of maximum size (possibly several, tie-breaking is the
    /// caller's business).
    pub fn largest_labels(&self) -> Vec<usize> {
        let max = self.sizes.values().copied().max().unwrap_or(0);
        self.sizes
            .iter()
            .filter(|(_, &s)| s == max)
            .map(|(&l, _)| l)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossDirection {
    Horizontal,
    Vertical,
}

/// A rectangle-crossing query: the target rectangle and the direction in
/// which a crossing is sought.
#[derive(Clone, Copy, Debug)]
pub struct CrossingSpec<S> {
    pub rect: Window<S>,
    pub direction: CrossDirection,
}

impl<S: Scalar> CrossingSpec<S> {
    pub fn horizontal(rect: Window<S>) -> Self {
        Self {
            rect,
            direction: CrossDirection::Horizontal,
        }
    }

    pub fn vertical(rect: Window<S>) -> Self {
        Self {
            rect,
            direction: CrossDirection::Vertical,
        }
    }
}

/// Random geometric graph: nodes are the points of a `PointSet`, links join
/// every pair at distance <= `conn_dist` (closed ball). Links are never
/// materialized as an edge list; adjacency is resolved lazily through the
/// grid, except inside the vacant-crossing test where clipped segments are
/// collected.
#[derive(Clone, Debug)]
pub struct Rgg<S: Scalar> {
    points: PointSet<S>,
    conn_dist: S,
}

impl<S: Scalar> Rgg<S> {
    /// The point set is re-indexed with bin size = `conn_dist`, the optimal
    /// bin for adjacency queries.
    pub fn new(points: PointSet<S>, conn_dist: S) -> Result<Self> {
        if !(conn_dist > S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "connection distance must be positive, got {conn_dist}"
            )));
        }
        Ok(Self {
            points: points.regrid(conn_dist),
            conn_dist,
        })
    }

    pub fn points(&self) -> &PointSet<S> {
        &self.points
    }

    pub fn conn_dist(&self) -> S {
        self.conn_dist
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Neighbors of node `i` (distance <= conn_dist, self excluded),
    /// ascending. The link relation is symmetric by construction.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let p = self.points.point(i);
        let mut out = self.points.neighbors_within(&p, self.conn_dist);
        out.retain(|&j| j != i);
        out
    }

    /// Subgraph induced by the given node indices; window and connection
    /// distance are preserved.
    pub fn restrict(&self, keep: &[usize]) -> Rgg<S> {
        Rgg {
            points: self.points.subset(keep),
            conn_dist: self.conn_dist,
        }
    }

    /// Connected components with canonical (smallest-member) labels.
    pub fn connected_components(&self) -> ComponentLabeling {
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in self.neighbors(i) {
                if j > i {
                    uf.union(i, j);
                }
            }
        }
        let mut canonical: Vec<usize> = vec![usize::MAX; n];
        let mut labels = vec![0usize; n];
        for (i, label) in labels.iter_mut().enumerate() {
            let root = uf.find(i);
            if canonical[root] == usize::MAX {
                canonical[root] = i; // first visit in ascending order = smallest member
            }
            *label = canonical[root];
        }
        let mut sizes = BTreeMap::new();
        for &l in &labels {
            *sizes.entry(l).or_insert(0) += 1;
        }
        ComponentLabeling { labels, sizes }
    }

    /// Whether a node path crosses the rectangle in the given direction:
    /// interior nodes must lie inside the closed rectangle, the first and
    /// last node straddle its extent along the crossing axis and stay within
    /// its extent along the other axis. Endpoints may lie outside the
    /// rectangle.
    pub fn has_occupied_crossing(&self, spec: &CrossingSpec<S>) -> bool {
        let rect = &spec.rect;
        // Coordinates along the crossing axis ("main") and across it.
        type Axis<S> = fn(&Point<S>) -> S;
        let (main, cross): (Axis<S>, Axis<S>) = match spec.direction {
            CrossDirection::Horizontal => (|p| p.x, |p| p.y),
            CrossDirection::Vertical => (|p| p.y, |p| p.x),
        };
        let (main_lo, main_hi, cross_lo, cross_hi) = match spec.direction {
            CrossDirection::Horizontal => (rect.x_min, rect.x_max, rect.y_min, rect.y_max),
            CrossDirection::Vertical => (rect.y_min, rect.y_max, rect.x_min, rect.x_max),
        };
        let in_band = |p: &Point<S>| cross(p) >= cross_lo && cross(p) <= cross_hi;
        let is_start = |p: &Point<S>| main(p) <= main_lo && in_band(p);
        let is_goal = |p: &Point<S>| main(p) >= main_hi && in_band(p);

        let n = self.len();
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        for (i, seen) in visited.iter_mut().enumerate() {
            if is_start(&self.points.point(i)) {
                *seen = true;
                queue.push_back(i);
            }
        }
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                let pv = self.points.point(v);
                if is_goal(&pv) {
                    return true;
                }
                if !visited[v] && rect.contains(&pv) {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    /// Link segments clipped to `rect` along with their endpoint node ids.
    /// Degenerate clips are dropped (an isolated touch point has no
    /// blocking power).
    pub(crate) fn clipped_link_segments(
        &self,
        rect: &Window<S>,
    ) -> Vec<(Segment<S>, usize, usize)> {
        let expanded = rect.expanded(self.conn_dist);
        let cand = self.points.indices_in_rect(&expanded);
        let mut in_cand = vec![false; self.len()];
        for &i in &cand {
            in_cand[i] = true;
        }
        let mut segs = Vec::new();
        for &i in &cand {
            for j in self.neighbors(i) {
                // Each unordered pair once: from the smaller candidate index,
                // or from i when j is not a candidate at all.
                if j < i && in_cand[j] {
                    continue;
                }
                let seg = Segment::new(self.points.point(i), self.points.point(j));
                if let Some(c) = clip_segment(&seg, rect) {
                    if !c.is_degenerate() {
                        segs.push((c, i, j));
                    }
                }
            }
        }
        segs
    }

    /// Whether the complement of the connection process crosses the
    /// rectangle: a continuous curve joins the two sides of the rectangle in
    /// the given direction while avoiding every node and link.
    ///
    /// Decided by duality: a horizontal vacant crossing exists iff no
    /// connected barrier of pairwise-intersecting link segments (clipped to
    /// the rectangle) joins the top edge to the bottom edge. Segments touch
    /// the barrier's virtual edge nodes exactly when a clipped endpoint lies
    /// on the corresponding boundary. Isolated nodes are measure-zero
    /// obstacles and never block a curve.
    pub fn has_vacant_crossing(&self, spec: &CrossingSpec<S>) -> bool {
        let rect = &spec.rect;
        let segs = self.clipped_link_segments(rect);
        if segs.is_empty() {
            return true;
        }
        let n = segs.len();
        let side_a = n;
        let side_b = n + 1;
        let mut uf = UnionFind::new(n + 2);
        for (i, (s, _, _)) in segs.iter().enumerate() {
            let (touch_a, touch_b) = match spec.direction {
                CrossDirection::Horizontal => (
                    s.a.y == rect.y_max || s.b.y == rect.y_max,
                    s.a.y == rect.y_min || s.b.y == rect.y_min,
                ),
                CrossDirection::Vertical => (
                    s.a.x == rect.x_min || s.b.x == rect.x_min,
                    s.a.x == rect.x_max || s.b.x == rect.x_max,
                ),
            };
            if touch_a {
                uf.union(i, side_a);
            }
            if touch_b {
                uf.union(i, side_b);
            }
        }

        // Links sharing a node inside the rectangle intersect at that node;
        // union them without geometric tests. This collapses dense clusters
        // before the pairwise sweep.
        {
            let mut first_seg_of: std::collections::HashMap<usize, usize> =
                std::collections::HashMap::new();
            for (i, (_, a, b)) in segs.iter().enumerate() {
                for node in [*a, *b] {
                    if !rect.contains(&self.points.point(node)) {
                        continue;
                    }
                    match first_seg_of.entry(node) {
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(i);
                        }
                        std::collections::hash_map::Entry::Occupied(e) => {
                            uf.union(i, *e.get());
                        }
                    }
                }
            }
        }
        if uf.same(side_a, side_b) {
            return false;
        }

        // Bucket segments by conn_dist-sized cells so only nearby pairs are
        // tested for geometric intersection.
        let bin = self.conn_dist;
        let ncx = ((rect.width() / bin).ceil().to_usize().unwrap_or(1)).max(1);
        let ncy = ((rect.height() / bin).ceil().to_usize().unwrap_or(1)).max(1);
        let axis_cell = |v: S, origin: S, n_cells: usize| -> usize {
            let i = ((v - origin) / bin).floor().to_isize().unwrap_or(0);
            i.clamp(0, n_cells as isize - 1) as usize
        };
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); ncx * ncy];
        for (i, (s, _, _)) in segs.iter().enumerate() {
            let ix0 = axis_cell(s.a.x.min(s.b.x), rect.x_min, ncx);
            let ix1 = axis_cell(s.a.x.max(s.b.x), rect.x_min, ncx);
            let iy0 = axis_cell(s.a.y.min(s.b.y), rect.y_min, ncy);
            let iy1 = axis_cell(s.a.y.max(s.b.y), rect.y_min, ncy);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    buckets[iy * ncx + ix].push(i as u32);
                }
            }
        }
        for bucket in &buckets {
            for (a, &i) in bucket.iter().enumerate() {
                for &j in &bucket[a + 1..] {
                    let (i, j) = (i as usize, j as usize);
                    if !uf.same(i, j) && segments_intersect(&segs[i].0, &segs[j].0) {
                        uf.union(i, j);
                        // The crossing is decided as soon as the sides meet.
                        if uf.same(side_a, side_b) {
                            return false;
                        }
                    }
                }
            }
        }
        !uf.same(side_a, side_b)
    }
}
