//! Area-length volume estimation from a single LV mask.
//!
//! Per frame: contour → convex hull → minimum enclosing triangle → landmarks
//! (mitral annulus and apex) → long-axis length → `8·A²/(3π·L)`.

use crate::geometry::{
    convex_hull, extract_contour, mask_area, min_enclosing_triangle, segment_polygon_intersection,
    BinaryMask, Contour, GeometryError, Point2D, Triangle,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of the contour's bounding-box diagonal below which the apex pick is
/// considered a tie between the two farthest triangle vertices.
pub const AMBIGUITY_MARGIN_FRACTION: f64 = 0.01;

/// Relative length change between the two candidate apex picks that makes a tie fatal.
pub const AMBIGUITY_LENGTH_CHANGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("apex choice is ambiguous: margin {margin:.3} px, lengths {length:.3} vs {alternative:.3} px")]
    AmbiguousLandmarks {
        margin: f64,
        length: f64,
        alternative: f64,
    },
    #[error("midline from the apex does not cross the contour")]
    NoMidlineIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvLandmarks {
    pub annulus_a: Point2D,
    pub annulus_b: Point2D,
    pub apex: Point2D,
    /// Midpoint of the two annulus points.
    pub base_midpoint: Point2D,
    /// Where the apex→base ray leaves the contour, farthest from the apex.
    pub midline_foot: Point2D,
    /// Gap between the 3rd and 2nd smallest vertex-to-contour distances.
    pub selection_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSample {
    pub frame_index: usize,
    pub area: f64,
    pub length: f64,
    pub volume: f64,
}

/// Area-length ellipsoid volume `8·A²/(3π·L)` in cubic pixels.
pub fn area_length_volume(area: f64, length: f64) -> f64 {
    8.0 * area * area / (3.0 * std::f64::consts::PI * length)
}

fn landmarks_for(contour: &Contour, apex: Point2D, a: Point2D, b: Point2D, margin: f64) -> Result<LvLandmarks, MeasureError> {
    let base_midpoint = a.midpoint(b);
    let direction = base_midpoint - apex;
    let min_len = 1e-9 * contour.bbox_diagonal().max(1.0);
    let midline_foot = segment_polygon_intersection(apex, direction, contour)
        .into_iter().rfind(|p| p.distance(apex) > min_len)
        .ok_or(MeasureError::NoMidlineIntersection)?;
    Ok(LvLandmarks {
        annulus_a: a,
        annulus_b: b,
        apex,
        base_midpoint,
        midline_foot,
        selection_margin: margin,
    })
}

/// Finds the mitral annulus and apex from the enclosing triangle.
///
/// Each triangle vertex is matched to its nearest point on the contour
/// polyline. The two vertices closest to the contour are basal; the third
/// marks the apex. Ties in distance resolve by vertex order `a, b, c`. When the
/// apex pick is within [`AMBIGUITY_MARGIN_FRACTION`] of the contour diagonal of
/// the runner-up, the alternative pick is measured too, and the frame fails if
/// the two lengths differ by more than [`AMBIGUITY_LENGTH_CHANGE`].
pub fn locate_landmarks(contour: &Contour, triangle: &Triangle) -> Result<LvLandmarks, MeasureError> {
    let mut nearest: Vec<(f64, Point2D)> = triangle
        .vertices()
        .iter()
        .map(|&v| {
            let (p, d) = contour.closest_point(v);
            (d, p)
        })
        .collect();
    // Stable sort keeps vertex order on exact ties.
    nearest.sort_by(|x, y| x.0.total_cmp(&y.0));
    let margin = nearest[2].0 - nearest[1].0;
    let primary = landmarks_for(contour, nearest[2].1, nearest[0].1, nearest[1].1, margin)?;

    if margin < AMBIGUITY_MARGIN_FRACTION * contour.bbox_diagonal() {
        let length = lv_length(&primary);
        let alternative = landmarks_for(contour, nearest[1].1, nearest[0].1, nearest[2].1, margin)
            .map(|l| lv_length(&l))
            .unwrap_or(0.0);
        if (alternative - length).abs() > AMBIGUITY_LENGTH_CHANGE * length {
            return Err(MeasureError::AmbiguousLandmarks {
                margin,
                length,
                alternative,
            });
        }
        log::debug!("near-tie apex pick (margin {margin:.3} px) kept: lengths agree");
    }
    Ok(primary)
}

/// Long-axis length: apex to midline foot, in pixels.
pub fn lv_length(landmarks: &LvLandmarks) -> f64 {
    landmarks.apex.distance(landmarks.midline_foot)
}

/// Everything measured on one frame, kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMeasurement {
    pub sample: VolumeSample,
    pub landmarks: LvLandmarks,
    pub triangle: Triangle,
    pub contour: Contour,
}

/// Runs the full per-frame measurement.
pub fn measure_frame(mask: &BinaryMask, frame_index: usize) -> Result<FrameMeasurement, MeasureError> {
    let contour = extract_contour(mask)?;
    let area = mask_area(mask);
    let hull = convex_hull(contour.points())?;
    let triangle = min_enclosing_triangle(&hull)?;
    let landmarks = locate_landmarks(&contour, &triangle)?;
    let length = lv_length(&landmarks);
    if length <= 0.0 {
        return Err(MeasureError::NoMidlineIntersection);
    }
    Ok(FrameMeasurement {
        sample: VolumeSample {
            frame_index,
            area,
            length,
            volume: area_length_volume(area, length),
        },
        landmarks,
        triangle,
        contour,
    })
}

/// Area (largest-component pixel count), length and volume of one mask.
pub fn volume_from_mask(mask: &BinaryMask) -> Result<VolumeSample, MeasureError> {
    measure_frame(mask, 0).map(|m| m.sample)
}
