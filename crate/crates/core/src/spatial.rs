//! Point-process sampling and spatial indexing: reproducible RNG substreams,
//! Poisson point sets in a rectangular window, and a uniform-grid index for
//! disc and rectangle queries.
//!
//! All types are immutable after construction; queries are pure and safe to
//! call from concurrent workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geom::{Point, Window};
use crate::scalar::Scalar;

/// Hard cap on the expected point count of a single sample. Guards against
/// configs that would attempt to allocate an absurd realization.
const MAX_EXPECTED_POINTS: f64 = 5e7;

/// A reproducible random stream: the pair `(seed, stream_id)` fully
/// determines the generated sequence, and distinct stream ids yield
/// statistically independent streams. Trial runners map each (experiment,
/// trial) pair to its own stream id so parallel execution stays
/// deterministic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Stream shifted by `offset`. Callers are responsible for keeping
    /// offsets of concurrently used substreams disjoint.
    pub fn substream(&self, offset: u64) -> Self {
        Self::new(self.seed, self.stream_id.wrapping_add(offset))
    }

    /// Instantiate the generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Uniform-grid index over points in a window, CSR layout. Cell size affects
/// only query speed, never query results.
#[derive(Clone, Debug)]
pub struct SpatialGrid<S> {
    bin: S,
    x_min: S,
    y_min: S,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    ids: Vec<u32>,
}

impl<S: Scalar> SpatialGrid<S> {
    /// Build an index with the requested bin size. The bin is enlarged when
    /// necessary to keep the cell count bounded.
    pub fn build(points: &[Point<S>], window: &Window<S>, bin: S) -> Self {
        assert!(bin > S::zero(), "grid bin size must be positive");
        let max_side = window.width().max(window.height());
        // At most ~4M cells.
        let mut bin = bin.max(max_side / S::from(2000.0).unwrap());
        if !bin.is_finite() {
            bin = max_side;
        }
        let nx = Self::cell_count(window.width(), bin);
        let ny = Self::cell_count(window.height(), bin);

        let cell_of = |p: &Point<S>| -> usize {
            let ix = Self::axis_cell(p.x - window.x_min, bin, nx);
            let iy = Self::axis_cell(p.y - window.y_min, bin, ny);
            iy * nx + ix
        };

        let mut counts = vec![0u32; nx * ny + 1];
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts;
        let mut cursor = starts.clone();
        let mut ids = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            ids[cursor[c] as usize] = i as u32;
            cursor[c] += 1;
        }
        Self {
            bin,
            x_min: window.x_min,
            y_min: window.y_min,
            nx,
            ny,
            starts,
            ids,
        }
    }

    fn cell_count(extent: S, bin: S) -> usize {
        let n = (extent / bin).ceil().to_usize().unwrap_or(1);
        n.max(1)
    }

    fn float_cell(offset: S, bin: S) -> isize {
        // Saturating float-to-isize conversion keeps extreme query ranges safe.
        let raw = (offset / bin).floor().to_f64().unwrap_or(0.0);
        raw.clamp(-9.0e15, 9.0e15) as isize
    }

    fn axis_cell(offset: S, bin: S, n: usize) -> usize {
        Self::float_cell(offset, bin).clamp(0, n as isize - 1) as usize
    }

    /// Cell range along one axis covering `[lo, hi]`; `None` when the range
    /// misses the grid entirely.
    fn axis_range(&self, lo: S, hi: S, origin: S, n: usize) -> Option<(usize, usize)> {
        let lo_i = Self::float_cell(lo - origin, self.bin);
        let hi_i = Self::float_cell(hi - origin, self.bin);
        if hi_i < 0 || lo_i >= n as isize {
            return None;
        }
        Some((
            lo_i.clamp(0, n as isize - 1) as usize,
            hi_i.clamp(0, n as isize - 1) as usize,
        ))
    }

    fn cell_ids(&self, ix: usize, iy: usize) -> &[u32] {
        let c = iy * self.nx + ix;
        &self.ids[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Indices of points within `radius` of `center` (closed ball), ascending.
    pub fn query_disc(&self, points: &[Point<S>], center: &Point<S>, radius: S) -> Vec<usize> {
        assert!(radius >= S::zero(), "query radius must be nonnegative");
        let mut out = Vec::new();
        let Some((ix0, ix1)) =
            self.axis_range(center.x - radius, center.x + radius, self.x_min, self.nx)
        else {
            return out;
        };
        let Some((iy0, iy1)) =
            self.axis_range(center.y - radius, center.y + radius, self.y_min, self.ny)
        else {
            return out;
        };
        let r_sq = radius * radius;
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                for &id in self.cell_ids(ix, iy) {
                    if points[id as usize].dist_sq(center) <= r_sq {
                        out.push(id as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Indices of points inside the closed rectangle, ascending.
    pub fn query_rect(&self, points: &[Point<S>], rect: &Window<S>) -> Vec<usize> {
        let mut out = Vec::new();
        let Some((ix0, ix1)) = self.axis_range(rect.x_min, rect.x_max, self.x_min, self.nx) else {
            return out;
        };
        let Some((iy0, iy1)) = self.axis_range(rect.y_min, rect.y_max, self.y_min, self.ny) else {
            return out;
        };
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                for &id in self.cell_ids(ix, iy) {
                    if rect.contains(&points[id as usize]) {
                        out.push(id as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn bin(&self) -> S {
        self.bin
    }
}

/// A realization of a Poisson point process in a rectangular window, with a
/// grid index attached.
#[derive(Clone, Debug)]
pub struct PointSet<S: Scalar> {
    points: Vec<Point<S>>,
    window: Window<S>,
    density: S,
    grid: SpatialGrid<S>,
}

impl<S: Scalar> PointSet<S> {
    /// Sample a homogeneous Poisson process of the given density: the point
    /// count is Poisson(density * area) and positions are i.i.d. uniform.
    /// Identical `(seed, stream_id)` pairs reproduce identical point lists.
    pub fn sample_poisson(density: S, window: Window<S>, rng: &RngStream) -> Result<Self> {
        if !(density >= S::zero()) {
            return Err(Error::InvalidArgument(format!(
                "density must be nonnegative, got {density}"
            )));
        }
        let mean =
            density.to_f64().unwrap_or(f64::NAN) * window.area().to_f64().unwrap_or(f64::NAN);
        if !mean.is_finite() || mean > MAX_EXPECTED_POINTS {
            return Err(Error::InvalidArgument(format!(
                "expected point count {mean} is not a sane sample size"
            )));
        }
        let mut r = rng.rng();
        let n = if mean > 0.0 {
            let pois = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson rate {mean}: {e}")))?;
            pois.sample(&mut r) as u64
        } else {
            0
        };
        let mut points = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let x = r.random_range(window.x_min..window.x_max);
            let y = r.random_range(window.y_min..window.y_max);
            points.push(Point::new(x, y));
        }
        Ok(Self::with_density_unchecked(points, window, density))
    }

    /// Wrap an explicit point list; density is taken as `n / area`.
    pub fn from_points(points: Vec<Point<S>>, window: Window<S>) -> Result<Self> {
        let density = S::from(points.len()).unwrap() / window.area();
        Self::from_points_with_density(points, window, density)
    }

    /// Wrap an explicit point list with a stated process density.
    pub fn from_points_with_density(
        points: Vec<Point<S>>,
        window: Window<S>,
        density: S,
    ) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !window.contains(p) {
                return Err(Error::InvalidArgument(format!(
                    "point {i} at ({}, {}) lies outside the window",
                    p.x, p.y
                )));
            }
        }
        Ok(Self::with_density_unchecked(points, window, density))
    }

    fn with_density_unchecked(points: Vec<Point<S>>, window: Window<S>, density: S) -> Self {
        let bin = Self::default_bin(density, &window);
        let grid = SpatialGrid::build(&points, &window, bin);
        Self {
            points,
            window,
            density,
            grid,
        }
    }

    /// Expected one point per cell; degenerates to a single cell for empty
    /// processes.
    fn default_bin(density: S, window: &Window<S>) -> S {
        let max_side = window.width().max(window.height());
        if density > S::zero() {
            (S::one() / density).sqrt().min(max_side)
        } else {
            max_side
        }
    }

    /// Rebuild the index with an explicit bin size. Results of queries are
    /// unaffected; only speed changes.
    pub fn regrid(mut self, bin: S) -> Self {
        self.grid = SpatialGrid::build(&self.points, &self.window, bin);
        self
    }

    /// Indices of points within `radius` of `center` (closed ball, ties
    /// included), in ascending index order.
    pub fn neighbors_within(&self, center: &Point<S>, radius: S) -> Vec<usize> {
        self.grid.query_disc(&self.points, center, radius)
    }

    /// Indices of points inside the closed rectangle, ascending.
    pub fn indices_in_rect(&self, rect: &Window<S>) -> Vec<usize> {
        self.grid.query_rect(&self.points, rect)
    }

    /// Point subset by index, preserving window, density, and bin size.
    pub fn subset(&self, keep: &[usize]) -> Self {
        let points: Vec<Point<S>> = keep.iter().map(|&i| self.points[i]).collect();
        let grid = SpatialGrid::build(&points, &self.window, self.grid.bin);
        Self {
            points,
            window: self.window,
            density: self.density,
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point<S> {
        self.points[i]
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.points
    }

    pub fn window(&self) -> &Window<S> {
        &self.window
    }

    pub fn density(&self) -> S {
        self.density
    }

    pub fn grid(&self) -> &SpatialGrid<S> {
        &self.grid
    }
}
