//! Minimum-area triangle enclosing a convex polygon.
//!
//! A minimal enclosing triangle has a side flush with a polygon edge, and
//! the midpoint of every side touches the polygon. The optimum is reached
//! in a configuration where two sides lie on edge lines and the third is
//! either a third edge line or a support line touching a vertex at its
//! midpoint. Every pair of edge lines spans a wedge holding the polygon, so
//! the search walks all wedges and closes each one with every admissible
//! third side, keeping the smallest triangle.

use super::{Contour, GeometryError, Point2D};
use serde::{Deserialize, Serialize};

/// Relative tolerance (times the bounding-box diagonal) for containment and collinearity.
pub const GEOMETRY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub a: Point2D,
    pub b: Point2D,
    pub c: Point2D,
}

impl Triangle {
    /// Fails when the vertices are collinear within `GEOMETRY_TOLERANCE`.
    pub fn new(a: Point2D, b: Point2D, c: Point2D) -> Result<Self, GeometryError> {
        let t = Self { a, b, c };
        if ![a, b, c].iter().all(|p| p.is_finite()) {
            return Err(GeometryError::DegenerateInput("non-finite triangle vertex".into()));
        }
        let diag = super::bbox_diagonal(&[a, b, c]);
        // Twice the area over the longest side is the smallest height.
        let longest = a.distance(b).max(b.distance(c)).max(c.distance(a));
        if longest == 0.0 || 2.0 * t.area() / longest <= GEOMETRY_TOLERANCE * diag {
            return Err(GeometryError::DegenerateInput("collinear triangle vertices".into()));
        }
        Ok(t)
    }

    pub fn vertices(&self) -> [Point2D; 3] {
        [self.a, self.b, self.c]
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * (self.b - self.a).cross(self.c - self.a)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Inside or within `tol` (absolute distance) of the boundary.
    pub fn contains(&self, p: Point2D, tol: f64) -> bool {
        let sign = self.signed_area().signum();
        let v = self.vertices();
        (0..3).all(|i| {
            let (s, e) = (v[i], v[(i + 1) % 3]);
            let len = s.distance(e);
            sign * (e - s).cross(p - s) >= -tol * len
        })
    }
}

/// Checks strict convexity and counterclockwise winding of a closed polygon.
pub(crate) fn validate_convex(points: &[Point2D]) -> Result<f64, GeometryError> {
    let n = points.len();
    if n < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "polygon needs at least 3 vertices, got {n}"
        )));
    }
    let tol = GEOMETRY_TOLERANCE * super::bbox_diagonal(points);
    let mut turning = 0.0;
    for i in 0..n {
        let (p, q, r) = (points[i], points[(i + 1) % n], points[(i + 2) % n]);
        let chord = r.distance(p);
        let height = if chord > 0.0 { (q - p).cross(r - p) / chord } else { 0.0 };
        if height.abs() <= tol {
            return Err(GeometryError::DegenerateInput(format!(
                "vertex {} is collinear with its neighbors",
                (i + 1) % n
            )));
        }
        if height < 0.0 {
            return Err(GeometryError::NotConvex { vertex: (i + 1) % n });
        }
        let (u, v) = (q - p, r - q);
        turning += u.cross(v).atan2(u.dot(v));
    }
    // A star polygon turns left everywhere but winds more than once.
    if (turning - std::f64::consts::TAU).abs() > 1e-6 {
        return Err(GeometryError::NotConvex { vertex: 0 });
    }
    Ok(tol)
}

/// Minimum-area triangle containing a convex, counterclockwise polygon.
///
/// Runs in O(n³) time with O(1) admissibility tests per candidate; hulls of
/// traced masks have a few dozen vertices. The result is counterclockwise.
pub fn min_enclosing_triangle(hull: &Contour) -> Result<Triangle, GeometryError> {
    let pts = hull.points();
    let tol = validate_convex(pts)?;
    let n = pts.len();
    let edge = |i: usize| (pts[i], pts[(i + 1) % n] - pts[i]);

    let mut best: Option<(f64, [Point2D; 3])> = None;
    let mut consider = |area: f64, tri: [Point2D; 3]| {
        if area.is_finite() && best.is_none_or(|(a, _)| area < a) {
            best = Some((area, tri));
        }
    };

    for i in 0..n {
        let (pi, di) = edge(i);
        for j in (i + 1)..n {
            let (pj, dj) = edge(j);
            let denom = dj.cross(di);
            if denom.abs() <= 1e-12 * di.norm() * dj.norm() {
                continue;
            }
            let apex = pi + di * (dj.cross(pj - pi) / denom);
            // Rays from the wedge apex along each line, pointing into the other half-plane.
            let ri = if denom > 0.0 { di } else { -di };
            let rj = if denom > 0.0 { -dj } else { dj };
            let det = ri.cross(rj);
            // Sides shorter than the tolerance are rounding artefacts of touching lines.
            let (min_s, min_t) = (tol / ri.norm(), tol / rj.norm());

            // Third side touching vertex v at its midpoint.
            for v in 0..n {
                let w = (pts[v] - apex) * 2.0;
                let s = w.cross(rj) / det;
                let t = ri.cross(w) / det;
                if !(s > min_s && t > min_t) {
                    continue;
                }
                let a = apex + ri * s;
                let b = apex + rj * t;
                let side = b - a;
                let len = side.norm();
                let apex_side = side.cross(apex - a).signum();
                let supports = [pts[(v + n - 1) % n], pts[(v + 1) % n]]
                    .iter()
                    .all(|&q| apex_side * side.cross(q - a) >= -tol * len);
                if supports {
                    consider(0.5 * s * t * det.abs(), [apex, a, b]);
                }
            }

            // Third side on another edge line.
            for k in (0..n).filter(|&k| k != i && k != j) {
                let (pk, dk) = edge(k);
                let lean = dk.cross(apex - pk);
                if lean <= tol * dk.norm() {
                    continue;
                }
                let s = -lean / dk.cross(ri);
                let t = -lean / dk.cross(rj);
                if s > min_s && t > min_t && s.is_finite() && t.is_finite() {
                    consider(0.5 * s * t * det.abs(), [apex, apex + ri * s, apex + rj * t]);
                }
            }
        }
    }

    let (_, [a, b, c]) = best.ok_or_else(|| {
        GeometryError::DegenerateInput("no enclosing triangle configuration found".into())
    })?;
    let tri = Triangle::new(a, b, c)?;
    Ok(if tri.signed_area() < 0.0 {
        Triangle::new(a, c, b)?
    } else {
        tri
    })
}
