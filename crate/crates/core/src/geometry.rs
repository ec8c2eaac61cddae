//! Planar geometry used by the placement planner.
//!
//! All comparisons use the absolute tolerance [`EPS`]. A point exactly on a
//! circle of radius `r` counts as inside it.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric tolerance in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    /// Lexicographic (x, y) order; used to break exact ties deterministically.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }

    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Unit-disk connectivity test; the boundary is in range.
pub fn in_range(a: Point, b: Point, r: f64) -> Result<bool> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    Ok(within(a, b, r))
}

/// `in_range` for callers that have already validated the radius.
#[inline]
pub(crate) fn within(a: Point, b: Point, r: f64) -> bool {
    distance(a, b) <= r + EPS
}

/// Of the two points where the circle `(center, r)` crosses the line through
/// `center` and `sink`, returns the one nearer the sink.
///
/// Axis-aligned configurations are resolved by shifting a single coordinate,
/// everything else by stepping `r` along the unit direction to the sink.
pub fn point_toward_sink(center: Point, r: f64, sink: Point) -> Result<Point> {
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    if center == sink {
        return Err(Error::DegenerateDirection);
    }
    if center.x == sink.x {
        let y = if center.y < sink.y {
            center.y + r
        } else {
            center.y - r
        };
        return Ok(Point::new(center.x, y));
    }
    if center.y == sink.y {
        let x = if center.x > sink.x {
            center.x - r
        } else {
            center.x + r
        };
        return Ok(Point::new(x, center.y));
    }
    Ok(step_toward(center, r, sink))
}

/// Parametric form: `center + r * unit(sink - center)`.
pub fn step_toward(center: Point, r: f64, sink: Point) -> Point {
    let d = distance(center, sink);
    Point::new(
        center.x + r * (sink.x - center.x) / d,
        center.y + r * (sink.y - center.y) / d,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircleIntersection {
    None,
    Tangent(Point),
    Two(Point, Point),
    /// Same center and radius: every point of the circle is shared.
    Coincident,
}

impl CircleIntersection {
    pub fn points(&self) -> Vec<Point> {
        match *self {
            CircleIntersection::None | CircleIntersection::Coincident => Vec::new(),
            CircleIntersection::Tangent(p) => vec![p],
            CircleIntersection::Two(a, b) => vec![a, b],
        }
    }
}

pub fn circle_circle_intersections(
    c1: Point,
    r1: f64,
    c2: Point,
    r2: f64,
) -> Result<CircleIntersection> {
    if !(r1 > 0.0) {
        return Err(Error::InvalidRadius(r1));
    }
    if !(r2 > 0.0) {
        return Err(Error::InvalidRadius(r2));
    }
    let dx = c2.x - c1.x;
    let dy = c2.y - c1.y;
    let d = dx.hypot(dy);
    if d <= EPS {
        return Ok(if (r1 - r2).abs() <= EPS {
            CircleIntersection::Coincident
        } else {
            CircleIntersection::None
        });
    }
    if d > r1 + r2 + EPS || d < (r1 - r2).abs() - EPS {
        return Ok(CircleIntersection::None);
    }
    // distance from c1 to the chord midpoint, then half chord length
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let mx = c1.x + a * dx / d;
    let my = c1.y + a * dy / d;
    if h <= EPS {
        return Ok(CircleIntersection::Tangent(Point::new(mx, my)));
    }
    let ox = -dy * h / d;
    let oy = dx * h / d;
    Ok(CircleIntersection::Two(
        Point::new(mx + ox, my + oy),
        Point::new(mx - ox, my - oy),
    ))
}

/// Picks the candidate nearest `sink`; equal distances fall back to the
/// lexicographically smaller point.
pub fn closest_to(sink: Point, candidates: impl IntoIterator<Item = Point>) -> Option<Point> {
    candidates.into_iter().min_by(|a, b| {
        let da = distance(*a, sink);
        let db = distance(*b, sink);
        if (da - db).abs() <= EPS {
            a.lex_cmp(b)
        } else {
            da.total_cmp(&db)
        }
    })
}

/// Searches the pairwise cross-section points of equal-radius disks for one
/// lying in every disk, and returns the survivor closest to the sink.
pub fn common_point_closest_to_sink(centers: &[Point], r: f64, sink: Point) -> Result<Option<Point>> {
    if centers.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two centers, got {}",
            centers.len()
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    let mut survivors = Vec::new();
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let cut = circle_circle_intersections(centers[i], r, centers[j], r)?;
            for p in cut.points() {
                if centers.iter().all(|c| within(*c, p, r)) {
                    survivors.push(p);
                }
            }
        }
    }
    Ok(closest_to(sink, survivors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basics() {
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(0.0, 0.0)), 0.0);
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        // sqrt(1 + 43.709^2), evaluated independently of hypot
        let expected = (1.0f64 + 43.709f64 * 43.709).sqrt();
        let got = distance(Point::new(1.0, 2.291), Point::new(2.0, 46.0));
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 43.720_437).abs() < 1e-6);
    }

    #[test]
    fn in_range_boundary_and_errors() {
        let o = Point::new(0.0, 0.0);
        assert!(in_range(o, Point::new(0.0, 2.5), 2.5).unwrap());
        assert!(!in_range(o, Point::new(0.0, 2.6), 2.5).unwrap());
        assert!(in_range(o, Point::new(2.0, 0.0), 2.5).unwrap());
        assert!(matches!(in_range(o, o, 0.0), Err(Error::InvalidRadius(_))));
        assert!(matches!(in_range(o, o, -1.0), Err(Error::InvalidRadius(_))));
    }

    #[test]
    fn toward_sink_axis_cases() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(point_toward_sink(o, 2.5, Point::new(0.0, 10.0)).unwrap(), Point::new(0.0, 2.5));
        assert_eq!(point_toward_sink(o, 2.5, Point::new(10.0, 0.0)).unwrap(), Point::new(2.5, 0.0));
        assert_eq!(point_toward_sink(o, 2.5, Point::new(0.0, -10.0)).unwrap(), Point::new(0.0, -2.5));
        assert_eq!(point_toward_sink(o, 2.5, Point::new(-10.0, 0.0)).unwrap(), Point::new(-2.5, 0.0));
    }

    #[test]
    fn toward_sink_general() {
        let p = point_toward_sink(Point::new(3.0, 4.0), 5.0, Point::new(9.0, 12.0)).unwrap();
        assert!(p.approx_eq(&Point::new(6.0, 8.0), 1e-12));
        assert!(matches!(
            point_toward_sink(Point::new(1.0, 1.0), 5.0, Point::new(1.0, 1.0)),
            Err(Error::DegenerateDirection)
        ));
    }

    #[test]
    fn worked_cross_section() {
        let cut = circle_circle_intersections(Point::new(0.0, 0.0), 2.5, Point::new(2.0, 0.0), 2.5).unwrap();
        let root = 5.25f64.sqrt();
        match cut {
            CircleIntersection::Two(a, b) => {
                let mut pts = [a, b];
                pts.sort_by(|p, q| q.y.total_cmp(&p.y));
                assert!(pts[0].approx_eq(&Point::new(1.0, root), 1e-12));
                assert!(pts[1].approx_eq(&Point::new(1.0, -root), 1e-12));
            }
            other => panic!("expected two points, got {other:?}"),
        }
    }

    #[test]
    fn disjoint_tangent_coincident() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(
            circle_circle_intersections(o, 1.0, Point::new(10.0, 0.0), 1.0).unwrap(),
            CircleIntersection::None
        );
        assert_eq!(
            circle_circle_intersections(o, 2.0, Point::new(4.0, 0.0), 2.0).unwrap(),
            CircleIntersection::Tangent(Point::new(2.0, 0.0))
        );
        assert_eq!(circle_circle_intersections(o, 2.0, o, 2.0).unwrap(), CircleIntersection::Coincident);
        // strictly contained
        assert_eq!(
            circle_circle_intersections(o, 5.0, Point::new(1.0, 0.0), 1.0).unwrap(),
            CircleIntersection::None
        );
    }

    #[test]
    fn common_point_worked_example() {
        let centers = [Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        let p = common_point_closest_to_sink(&centers, 2.5, Point::new(2.0, 46.0))
            .unwrap()
            .unwrap();
        assert!(p.approx_eq(&Point::new(1.0, 5.25f64.sqrt()), 1e-12));
    }

    #[test]
    fn common_point_none_and_errors() {
        let centers = [Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        assert_eq!(common_point_closest_to_sink(&centers, 2.5, Point::new(3.0, 3.0)).unwrap(), None);
        assert!(matches!(
            common_point_closest_to_sink(&centers[..1], 2.5, Point::new(3.0, 3.0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn equidistant_tie_prefers_lexicographic() {
        let sink = Point::new(0.0, 10.0);
        let got = closest_to(sink, [Point::new(1.0, 0.0), Point::new(-1.0, 0.0)]).unwrap();
        assert_eq!(got, Point::new(-1.0, 0.0));
    }
}
