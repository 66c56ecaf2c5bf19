//! Thin-plate spline interpolation between two planar point sets.
//!
//! Kernel convention: `U(r) = r²·ln r`, `U(0) = 0`. The warp is
//! `f(p) = c + A·p + Σᵢ wᵢ·U(‖p − sᵢ‖)`, with no regularization.

use crate::geometry::{bbox_diagonal, Point2D};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TpsError {
    #[error("source and target lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("thin-plate spline needs at least 3 control points, got {0}")]
    TooFewPoints(usize),
    #[error("singular thin-plate system: {0}")]
    SingularSystem(String),
}

pub fn tps_kernel(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpsWarp {
    control_source: Vec<Point2D>,
    control_target: Vec<Point2D>,
    /// Kernel weight (x, y) per control point.
    weights: Vec<[f64; 2]>,
    /// Constant term, then the x and y coefficients, each an (x, y) pair.
    affine: [[f64; 2]; 3],
}

impl TpsWarp {
    pub fn control_source(&self) -> &[Point2D] {
        &self.control_source
    }

    pub fn control_target(&self) -> &[Point2D] {
        &self.control_target
    }

    pub fn weights(&self) -> &[[f64; 2]] {
        &self.weights
    }

    pub fn affine(&self) -> [[f64; 2]; 3] {
        self.affine
    }

    pub fn apply(&self, p: Point2D) -> Point2D {
        let [c, ax, ay] = self.affine;
        let mut x = c[0] + ax[0] * p.x + ay[0] * p.y;
        let mut y = c[1] + ax[1] * p.x + ay[1] * p.y;
        for (s, w) in self.control_source.iter().zip(&self.weights) {
            let u = tps_kernel(p.distance(*s));
            x += w[0] * u;
            y += w[1] * u;
        }
        Point2D::new(x, y)
    }
}

fn check_sources(source: &[Point2D]) -> Result<(), TpsError> {
    if let Some(p) = source.iter().find(|p| !p.is_finite()) {
        return Err(TpsError::SingularSystem(format!("non-finite control point ({}, {})", p.x, p.y)));
    }
    let diag = bbox_diagonal(source);
    let tol = 1e-9 * diag.max(1.0);
    for i in 0..source.len() {
        for j in i + 1..source.len() {
            if source[i].distance(source[j]) <= tol {
                return Err(TpsError::SingularSystem(format!("control points {i} and {j} coincide")));
            }
        }
    }
    // Collinear when every point is within tolerance of the line through the two farthest apart.
    let (mut a, mut b, mut best) = (0, 1, 0.0);
    for i in 0..source.len() {
        for j in i + 1..source.len() {
            let d = source[i].distance(source[j]);
            if d > best {
                (a, b, best) = (i, j, d);
            }
        }
    }
    let dir = source[b] - source[a];
    let spread = source
        .iter()
        .map(|p| (dir.cross(*p - source[a]) / best).abs())
        .fold(0.0, f64::max);
    if spread <= 1e-6 * diag {
        return Err(TpsError::SingularSystem("control points are collinear".into()));
    }
    Ok(())
}

/// Solves for the exact interpolating spline through `source[i] → target[i]`.
pub fn fit_tps(source: &[Point2D], target: &[Point2D]) -> Result<TpsWarp, TpsError> {
    if source.len() != target.len() {
        return Err(TpsError::LengthMismatch(source.len(), target.len()));
    }
    let k = source.len();
    if k < 3 {
        return Err(TpsError::TooFewPoints(k));
    }
    check_sources(source)?;
    if let Some(p) = target.iter().find(|p| !p.is_finite()) {
        return Err(TpsError::SingularSystem(format!("non-finite target ({}, {})", p.x, p.y)));
    }

    let m = k + 3;
    let mut system = DMatrix::<f64>::zeros(m, m);
    for i in 0..k {
        for j in 0..k {
            system[(i, j)] = tps_kernel(source[i].distance(source[j]));
        }
        for (c, v) in [1.0, source[i].x, source[i].y].into_iter().enumerate() {
            system[(i, k + c)] = v;
            system[(k + c, i)] = v;
        }
    }
    let lu = system.clone().lu();
    let mut coeffs = [DVector::zeros(m), DVector::zeros(m)];
    for (axis, out) in coeffs.iter_mut().enumerate() {
        let mut rhs = DVector::<f64>::zeros(m);
        for i in 0..k {
            rhs[i] = if axis == 0 { target[i].x } else { target[i].y };
        }
        let mut x = lu
            .solve(&rhs)
            .ok_or_else(|| TpsError::SingularSystem("LU factorization failed".into()))?;
        // One refinement step tightens interpolation on poorly spread controls.
        let residual = &rhs - &system * &x;
        if let Some(dx) = lu.solve(&residual) {
            x += dx;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(TpsError::SingularSystem("non-finite solution".into()));
        }
        *out = x;
    }

    Ok(TpsWarp {
        control_source: source.to_vec(),
        control_target: target.to_vec(),
        weights: (0..k).map(|i| [coeffs[0][i], coeffs[1][i]]).collect(),
        affine: [
            [coeffs[0][k], coeffs[1][k]],
            [coeffs[0][k + 1], coeffs[1][k + 1]],
            [coeffs[0][k + 2], coeffs[1][k + 2]],
        ],
    })
}

/// Maps every point through the warp, preserving order.
pub fn apply_tps(warp: &TpsWarp, points: &[Point2D]) -> Vec<Point2D> {
    points.iter().map(|&p| warp.apply(p)).collect()
}
