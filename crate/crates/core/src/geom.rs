//! Planar primitives: points, segments, axis-aligned windows, orientation
//! predicates, segment intersection, and rectangle clipping.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Determinant magnitude at or below which three points are classified
/// collinear. Applied only to collinearity classification; strict sign
/// decisions are exact.
pub const COLLINEAR_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn dist_sq(&self, other: &Self) -> S {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Self) -> S {
        self.dist_sq(other).sqrt()
    }
}

/// Closed line segment between two points. Degenerate (zero-length) segments
/// are permitted and behave as points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<S> {
    pub a: Point<S>,
    pub b: Point<S>,
}

impl<S: Scalar> Segment<S> {
    pub fn new(a: Point<S>, b: Point<S>) -> Self {
        Self { a, b }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`, closed on all
/// sides. Doubles as the sampling window and as crossing-query rectangles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<S> {
    pub x_min: S,
    pub y_min: S,
    pub x_max: S,
    pub y_max: S,
}

impl<S: Scalar> Window<S> {
    pub fn new(x_min: S, y_min: S, x_max: S, y_max: S) -> Result<Self> {
        if !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::InvalidArgument(format!(
                "window must have positive extent, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Square `[0, side] x [0, side]`.
    pub fn square(side: S) -> Result<Self> {
        Self::new(S::zero(), S::zero(), side, side)
    }

    /// Rectangle of the given extent centered on `center`.
    pub fn centered(center: Point<S>, width: S, height: S) -> Result<Self> {
        let two = S::from(2.0).unwrap();
        Self::new(
            center.x - width / two,
            center.y - height / two,
            center.x + width / two,
            center.y + height / two,
        )
    }

    pub fn width(&self) -> S {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> S {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> S {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point<S> {
        let two = S::from(2.0).unwrap();
        Point::new(
            (self.x_min + self.x_max) / two,
            (self.y_min + self.y_max) / two,
        )
    }

    /// Closed containment.
    pub fn contains(&self, p: &Point<S>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn contains_window(&self, other: &Window<S>) -> bool {
        other.x_min >= self.x_min
            && other.x_max <= self.x_max
            && other.y_min >= self.y_min
            && other.y_max <= self.y_max
    }

    /// The window grown by `margin` on every side.
    pub fn expanded(&self, margin: S) -> Self {
        Self {
            x_min: self.x_min - margin,
            y_min: self.y_min - margin,
            x_max: self.x_max + margin,
            y_max: self.y_max + margin,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
    Collinear,
}

/// Orientation of `c` relative to the directed line `a -> b`, by sign of the
/// cross-product determinant.
pub fn orient<S: Scalar>(a: &Point<S>, b: &Point<S>, c: &Point<S>) -> Orientation {
    let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let eps = S::from(COLLINEAR_EPS).unwrap();
    if det.abs() <= eps {
        Orientation::Collinear
    } else if det > S::zero() {
        Orientation::Counterclockwise
    } else {
        Orientation::Clockwise
    }
}

fn in_bbox<S: Scalar>(a: &Point<S>, b: &Point<S>, p: &Point<S>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether two closed segments share at least one point. Collinear overlap
/// and endpoint touching count as intersection.
pub fn segments_intersect<S: Scalar>(s1: &Segment<S>, s2: &Segment<S>) -> bool {
    let (p1, p2, q1, q2) = (&s1.a, &s1.b, &s2.a, &s2.b);
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);

    use Orientation::{Clockwise as Cw, Collinear as Col, Counterclockwise as Ccw};
    let straddle_p = matches!((d1, d2), (Cw, Ccw) | (Ccw, Cw));
    let straddle_q = matches!((d3, d4), (Cw, Ccw) | (Ccw, Cw));
    if straddle_p && straddle_q {
        return true;
    }
    (d1 == Col && in_bbox(q1, q2, p1))
        || (d2 == Col && in_bbox(q1, q2, p2))
        || (d3 == Col && in_bbox(p1, p2, q1))
        || (d4 == Col && in_bbox(p1, p2, q2))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ClipSide {
    Left,
    Right,
    Bottom,
    Top,
}

/// Clip a segment to a rectangle (Liang-Barsky). Endpoints produced by
/// clipping are snapped exactly onto the clipping boundary so that
/// boundary-touch tests can use equality. Returns `None` when the segment
/// misses the rectangle entirely.
pub fn clip_segment<S: Scalar>(seg: &Segment<S>, rect: &Window<S>) -> Option<Segment<S>> {
    let (ax, ay) = (seg.a.x, seg.a.y);
    let dx = seg.b.x - ax;
    let dy = seg.b.y - ay;

    let checks = [
        (-dx, ax - rect.x_min, ClipSide::Left),
        (dx, rect.x_max - ax, ClipSide::Right),
        (-dy, ay - rect.y_min, ClipSide::Bottom),
        (dy, rect.y_max - ay, ClipSide::Top),
    ];

    let mut t0 = S::zero();
    let mut t1 = S::one();
    let mut enter: Option<ClipSide> = None;
    let mut leave: Option<ClipSide> = None;
    for (p, q, side) in checks {
        if p == S::zero() {
            if q < S::zero() {
                return None;
            }
        } else {
            let t = q / p;
            if p < S::zero() {
                if t > t0 {
                    t0 = t;
                    enter = Some(side);
                }
            } else if t < t1 {
                t1 = t;
                leave = Some(side);
            }
        }
    }
    if t0 > t1 {
        return None;
    }

    let at = |t: S, side: ClipSide| -> Point<S> {
        let mut x = ax + t * dx;
        let mut y = ay + t * dy;
        match side {
            ClipSide::Left => x = rect.x_min,
            ClipSide::Right => x = rect.x_max,
            ClipSide::Bottom => y = rect.y_min,
            ClipSide::Top => y = rect.y_max,
        }
        Point::new(
            x.max(rect.x_min).min(rect.x_max),
            y.max(rect.y_min).min(rect.y_max),
        )
    };
    let pa = match enter {
        Some(side) => at(t0, side),
        None => seg.a,
    };
    let pb = match leave {
        Some(side) => at(t1, side),
        None => seg.b,
    };
    Some(Segment::new(pa, pb))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment<f64> {
        Segment::new(p(ax, ay), p(bx, by))
    }

    #[test]
    fn crossing_diagonals_intersect() {
        assert!(segments_intersect(
            &seg(0., 0., 1., 1.),
            &seg(0., 1., 1., 0.)
        ));
    }

    #[test]
    fn parallel_disjoint_do_not_intersect() {
        assert!(!segments_intersect(
            &seg(0., 0., 1., 0.),
            &seg(0., 1., 1., 1.)
        ));
    }

    #[test]
    fn collinear_overlap_intersects() {
        assert!(segments_intersect(
            &seg(0., 0., 2., 0.),
            &seg(1., 0., 3., 0.)
        ));
    }

    #[test]
    fn endpoint_touch_intersects() {
        assert!(segments_intersect(
            &seg(0., 0., 1., 1.),
            &seg(1., 1., 2., 0.)
        ));
    }

    #[test]
    fn degenerate_segment_on_segment() {
        assert!(segments_intersect(
            &seg(0., 0., 2., 0.),
            &seg(1., 0., 1., 0.)
        ));
        assert!(!segments_intersect(
            &seg(0., 0., 2., 0.),
            &seg(1., 0.5, 1., 0.5)
        ));
    }

    #[test]
    fn window_invariants_enforced() {
        assert!(Window::new(0.0, 0.0, 1.0, 1.0).is_ok());
        assert!(Window::new(1.0, 0.0, 1.0, 2.0).is_err());
        assert!(Window::new(0.0, 3.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn clip_keeps_interior_segment() {
        let r = Window::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let s = seg(1., 1., 2., 2.);
        assert_eq!(clip_segment(&s, &r), Some(s));
    }

    #[test]
    fn clip_snaps_to_boundary() {
        let r = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let c = clip_segment(&seg(0.5, -1.0, 0.5, 2.0), &r).unwrap();
        assert_eq!(c.a.y, 0.0);
        assert_eq!(c.b.y, 1.0);
        assert_eq!(c.a.x, 0.5);
    }

    #[test]
    fn clip_rejects_miss() {
        let r = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(clip_segment(&seg(2.0, 0.0, 3.0, 5.0), &r).is_none());
        assert!(clip_segment(&seg(-1.0, 2.0, 2.0, 2.0), &r).is_none());
    }

    #[test]
    fn clip_corner_crossing() {
        let r = Window::new(0.0, 0.0, 1.0, 1.0).unwrap();
        // Cuts across the top-left corner: enters through the left edge,
        // leaves through the top edge.
        let c = clip_segment(&seg(-0.5, 0.25, 0.5, 1.25), &r).unwrap();
        assert_eq!(c.a, p(0.0, 0.75));
        assert_eq!(c.b, p(0.25, 1.0));
        // Passing above the corner misses the rectangle.
        assert!(clip_segment(&seg(-1.0, 0.5, 0.5, 2.0), &r).is_none());
    }
}
