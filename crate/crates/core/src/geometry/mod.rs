//! Binary-mask and polygon primitives.
//!
//! Coordinates are pixel centers: pixel `(col, row)` sits at `Point2D { x: col, y: row }`.
//! "Counterclockwise" means positive signed area in these coordinates.

mod contour;
mod hull;
mod intersect;
mod mask;
mod point;
mod raster;
mod triangle;

use thiserror::Error;

pub use contour::{extract_contour, is_boundary_pixel, Contour};
pub use hull::convex_hull;
pub use intersect::segment_polygon_intersection;
pub use mask::{mask_area, BinaryMask, Components};
pub use point::{bbox_diagonal, closest_point_on_segment, signed_area, Point2D};
pub use raster::rasterize_polygon;
pub use triangle::{min_enclosing_triangle, Triangle, GEOMETRY_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("largest component has only {boundary_pixels} boundary pixel(s)")]
    DegenerateRegion { boundary_pixels: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("polygon is not convex at vertex {vertex}")]
    NotConvex { vertex: usize },
    #[error("non-finite coordinate ({}, {})", .0.x, .0.y)]
    NonFinite(Point2D),
    #[error("invalid mask dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("pixel {index} has value {value}, expected 0 or 1")]
    InvalidPixel { index: usize, value: u8 },
}
