use super::{Contour, Point2D};

/// Intersections of the ray `origin + t·direction` (t ≥ 0) with the polygon's edges.
///
/// Hits are sorted by increasing `t`. A hit on a shared vertex is reported
/// once; an edge lying along the ray contributes its two endpoints.
pub fn segment_polygon_intersection(
    origin: Point2D,
    direction: Point2D,
    poly: &Contour,
) -> Vec<Point2D> {
    let dir_len = direction.norm();
    if dir_len == 0.0 || !dir_len.is_finite() {
        return Vec::new();
    }
    let eps = 1e-9 * poly.bbox_diagonal().max(1.0);
    let mut hits: Vec<f64> = Vec::new();

    for (a, b) in poly.edges() {
        let e = b - a;
        let denom = direction.cross(e);
        let rel = a - origin;
        if denom.abs() <= 1e-12 * dir_len * e.norm() {
            // Parallel: only collinear edges touch the ray.
            if (rel.cross(direction) / dir_len).abs() <= eps {
                for q in [a, b] {
                    let t = (q - origin).dot(direction) / (dir_len * dir_len);
                    if t >= -eps / dir_len {
                        hits.push(t.max(0.0));
                    }
                }
            }
            continue;
        }
        let t = rel.cross(e) / denom;
        let u = rel.cross(direction) / denom;
        let u_eps = eps / e.norm().max(f64::MIN_POSITIVE);
        if t >= -eps / dir_len && (-u_eps..=1.0 + u_eps).contains(&u) {
            hits.push(t.max(0.0));
        }
    }

    hits.sort_by(f64::total_cmp);
    let merge = eps / dir_len;
    let mut out: Vec<f64> = Vec::with_capacity(hits.len());
    for t in hits {
        if out.last().is_none_or(|&last| t - last > merge) {
            out.push(t);
        }
    }
    out.into_iter().map(|t| origin + direction * t).collect()
}
