use super::{closest_point_on_segment, BinaryMask, Contour, GeometryError, Point2D};

/// Distance below which a pixel center counts as lying on an edge.
const ON_EDGE_EPS: f64 = 1e-9;

/// Rasterizes a closed polygon onto a `width × height` grid.
///
/// Pixel `(x, y)` is set when its center `(x, y)` is inside the polygon under
/// the even-odd rule or lies on an edge. Parts outside the grid are clipped.
pub fn rasterize_polygon(
    poly: &Contour,
    width: usize,
    height: usize,
) -> Result<BinaryMask, GeometryError> {
    let mut mask = BinaryMask::new(width, height)?;
    let pts = poly.points();
    let n = pts.len();
    let mut crossings: Vec<f64> = Vec::with_capacity(n);

    for row in 0..height {
        let y = row as f64;
        crossings.clear();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            // Half-open rule keeps vertices on the scanline from being counted twice.
            if (a.y <= y && y < b.y) || (b.y <= y && y < a.y) {
                crossings.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            fill_span(&mut mask, row, span[0], span[1]);
        }
    }

    // Even-odd spans miss centers on bottom vertices and (near-)horizontal edges.
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let (y_lo, y_hi) = (a.y.min(b.y), a.y.max(b.y));
        let first = (y_lo - ON_EDGE_EPS).ceil().max(0.0);
        let last = (y_hi + ON_EDGE_EPS).floor().min(height as f64 - 1.0);
        if first > last {
            continue;
        }
        for row in first as usize..=last as usize {
            let y = row as f64;
            // Part of the edge within ON_EDGE_EPS of the scanline, as an x-range.
            let (x0, x1) = if (b.y - a.y).abs() <= ON_EDGE_EPS {
                (a.x.min(b.x), a.x.max(b.x))
            } else {
                let t = |yy: f64| ((yy - a.y) / (b.y - a.y)).clamp(0.0, 1.0);
                let (ta, tb) = (t(y - ON_EDGE_EPS), t(y + ON_EDGE_EPS));
                let (xa, xb) = (a.x + ta * (b.x - a.x), a.x + tb * (b.x - a.x));
                (xa.min(xb), xa.max(xb))
            };
            let lo = (x0 - ON_EDGE_EPS).ceil().max(0.0);
            let hi = (x1 + ON_EDGE_EPS).floor().min(width as f64 - 1.0);
            if lo > hi {
                continue;
            }
            for x in lo as usize..=hi as usize {
                let c = Point2D::new(x as f64, y);
                if c.distance(closest_point_on_segment(c, a, b)) <= ON_EDGE_EPS {
                    mask.set(x, row, true);
                }
            }
        }
    }
    Ok(mask)
}

fn fill_span(mask: &mut BinaryMask, row: usize, x0: f64, x1: f64) {
    let lo = (x0 - ON_EDGE_EPS).ceil().max(0.0);
    let hi = (x1 + ON_EDGE_EPS).floor().min(mask.width() as f64 - 1.0);
    if lo > hi {
        return;
    }
    for x in lo as usize..=hi as usize {
        mask.set(x, row, true);
    }
}
