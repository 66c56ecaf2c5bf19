//! Simulated previous-frame masks for mask-tracking training data.
//!
//! A ground-truth mask is deformed in two stages: a thin-plate spline built
//! from five contour points pushed by up to ±10% of the mask's bounding box,
//! then a random similarity (scale ±10% about the centroid, translation up to
//! ±10% of the frame). The warped contour is rasterized back to the frame.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; retry
//! `n` uses stream `n` of the same seed. Draw order per attempt: the five
//! control shifts as (dx, dy) pairs, then scale, then translation x and y.

mod tps;

pub use tps::{apply_tps, fit_tps, tps_kernel, TpsError, TpsWarp};

use crate::geometry::{extract_contour, rasterize_polygon, BinaryMask, Contour, GeometryError, Point2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tps(#[from] TpsError),
    #[error("warp stayed degenerate after {attempts} attempts")]
    DegenerateWarp { attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    /// Scale is drawn from `[1 − s, 1 + s]`.
    pub scale_jitter: f64,
    /// Translation bound as a fraction of the frame width/height.
    pub translate_frac: f64,
    /// Control-point shift bound as a fraction of the mask bounding box.
    pub shift_frac: f64,
    pub control_points: usize,
    pub max_retries: usize,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            scale_jitter: 0.10,
            translate_frac: 0.10,
            shift_frac: 0.10,
            control_points: 5,
            max_retries: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub scale: f64,
    pub translate_x: f64,
    pub translate_y: f64,
    /// Fixed point of the scaling.
    pub center: Point2D,
}

impl AffineParams {
    pub fn apply(&self, p: Point2D) -> Point2D {
        Point2D::new(
            self.center.x + self.scale * (p.x - self.center.x) + self.translate_x,
            self.center.y + self.scale * (p.y - self.center.y) + self.translate_y,
        )
    }
}

/// Parameters actually used for one augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    pub mask: BinaryMask,
    pub affine: AffineParams,
    pub warp: TpsWarp,
    /// 0 for the first try, then the retry stream that succeeded.
    pub attempt: usize,
}

/// Control points spaced uniformly by contour index.
pub fn sample_control_indices(len: usize, count: usize) -> Vec<usize> {
    (0..count).map(|i| i * len / count).collect()
}

fn segments_cross(a: Point2D, b: Point2D, c: Point2D, d: Point2D) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// True when two non-adjacent edges cross properly. Touching and collinear
/// overlap (traced one-pixel spurs) do not count.
pub fn has_proper_self_intersection(points: &[Point2D]) -> bool {
    let n = points.len();
    if n < 4 {
        return false;
    }
    let (mut lo, mut hi) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        lo.push(Point2D::new(a.x.min(b.x), a.y.min(b.y)));
        hi.push(Point2D::new(a.x.max(b.x), a.y.max(b.y)));
    }
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if lo[i].x > hi[j].x || lo[j].x > hi[i].x || lo[i].y > hi[j].y || lo[j].y > hi[i].y {
                continue;
            }
            if segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

fn bbox(points: &[Point2D]) -> (Point2D, Point2D) {
    points.iter().fold(
        (Point2D::new(f64::INFINITY, f64::INFINITY), Point2D::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point2D::new(lo.x.min(p.x), lo.y.min(p.y)), Point2D::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

fn attempt(
    contour: &Contour,
    centroid: Point2D,
    mask: &BinaryMask,
    params: &AugmentParams,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(BinaryMask, AffineParams, TpsWarp)>, AugmentError> {
    let pts = contour.points();
    let (lo, hi) = bbox(pts);
    // Pixel extent of the mask, counting the boundary pixels themselves.
    let (bw, bh) = (hi.x - lo.x + 1.0, hi.y - lo.y + 1.0);

    let source: Vec<Point2D> = sample_control_indices(pts.len(), params.control_points)
        .into_iter()
        .map(|i| pts[i])
        .collect();
    let target: Vec<Point2D> = source
        .iter()
        .map(|&p| {
            let dx = params.shift_frac * bw * rng.random_range(-1.0..=1.0);
            let dy = params.shift_frac * bh * rng.random_range(-1.0..=1.0);
            p + Point2D::new(dx, dy)
        })
        .collect();
    let affine = AffineParams {
        scale: 1.0 + params.scale_jitter * rng.random_range(-1.0..=1.0),
        translate_x: params.translate_frac * mask.width() as f64 * rng.random_range(-1.0..=1.0),
        translate_y: params.translate_frac * mask.height() as f64 * rng.random_range(-1.0..=1.0),
        center: centroid,
    };

    let warp = match fit_tps(&source, &target) {
        Ok(w) => w,
        Err(TpsError::SingularSystem(reason)) => {
            log::debug!("control points rejected: {reason}");
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };
    let warped: Vec<Point2D> = apply_tps(&warp, pts).into_iter().map(|p| affine.apply(p)).collect();
    if has_proper_self_intersection(&warped) {
        return Ok(None);
    }
    let out = rasterize_polygon(&Contour::new(warped)?, mask.width(), mask.height())?;
    if out.is_empty() {
        return Ok(None);
    }
    Ok(Some((out, affine, warp)))
}

/// Deforms `mask` into a plausible previous-frame mask; a pure function of `(mask, seed, params)`.
pub fn simulate_previous_mask_with(
    mask: &BinaryMask,
    seed: u64,
    params: &AugmentParams,
) -> Result<Augmentation, AugmentError> {
    let contour = extract_contour(mask)?;
    let centroid = mask
        .largest_component()
        .centroid()
        .ok_or(GeometryError::EmptyMask)?;
    let attempts = params.max_retries + 1;
    for n in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n as u64);
        if let Some((mask, affine, warp)) = attempt(&contour, centroid, mask, params, &mut rng)? {
            return Ok(Augmentation {
                mask,
                affine,
                warp,
                attempt: n,
            });
        }
        log::debug!("augmentation attempt {n} for seed {seed} rejected");
    }
    Err(AugmentError::DegenerateWarp { attempts })
}

/// Default-parameter augmentation returning only the mask.
pub fn simulate_previous_mask(mask: &BinaryMask, seed: u64) -> Result<BinaryMask, AugmentError> {
    simulate_previous_mask_with(mask, seed, &AugmentParams::default()).map(|a| a.mask)
}

/// SplitMix64 finalizer; mixes a base seed with per-item indices.
pub fn derive_seed(base: u64, frame: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(frame.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
