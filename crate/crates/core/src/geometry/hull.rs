use super::{Contour, GeometryError, Point2D};

/// Convex hull by Andrew's monotone chain.
///
/// Output is counterclockwise (positive signed area) and drops every vertex
/// lying on the segment between its neighbors, so no three consecutive
/// vertices are collinear.
pub fn convex_hull(points: &[Point2D]) -> Result<Contour, GeometryError> {
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(*p));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "convex hull needs 3 distinct points, got {}",
            pts.len()
        )));
    }

    let turn = |o: Point2D, a: Point2D, b: Point2D| (a - o).cross(b - o);
    let mut hull: Vec<Point2D> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "all points are collinear".to_string(),
        ));
    }
    Contour::new(hull)
}
