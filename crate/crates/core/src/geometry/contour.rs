//! Moore-neighbor boundary tracing over pixel centers.

use super::{signed_area, BinaryMask, GeometryError, Point2D};

/// Moore ring, clockwise on screen (y grows downward): W, NW, N, NE, E, SE, S, SW.
const RING: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn ring_index(dx: i64, dy: i64) -> usize {
    RING.iter()
        .position(|&d| d == (dx, dy))
        .expect("backtrack pixel must be a Moore neighbor")
}

/// Closed polygon, last vertex implicitly joined to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<Point2D>,
}

impl Contour {
    pub fn new(points: Vec<Point2D>) -> Result<Self, GeometryError> {
        if points.len() < 3 {
            return Err(GeometryError::DegenerateInput(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(*p));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point2D> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Edges as `(start, end)` pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        super::bbox_diagonal(&self.points)
    }

    /// Closest point on the closed polyline and its distance to `p`.
    pub fn closest_point(&self, p: Point2D) -> (Point2D, f64) {
        let mut best = (self.points[0], f64::INFINITY);
        for (a, b) in self.edges() {
            let q = super::closest_point_on_segment(p, a, b);
            let d = q.distance(p);
            if d < best.1 {
                best = (q, d);
            }
        }
        best
    }
}

/// Traces the outer boundary of the largest 8-connected component.
///
/// Points are pixel centers (`x` = column, `y` = row), 8-connected and ordered
/// with positive signed area in these coordinates, which is clockwise on screen.
/// Tracing starts at the first component pixel in raster order.
pub fn extract_contour(mask: &BinaryMask) -> Result<Contour, GeometryError> {
    let comps = mask.components();
    let label = comps.largest().ok_or(GeometryError::EmptyMask)?;
    let region = comps.mask_of(label);
    let points = trace_region(&region);
    let mut distinct = points.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(GeometryError::DegenerateRegion {
            boundary_pixels: distinct.len(),
        });
    }
    let mut points: Vec<Point2D> = points
        .into_iter()
        .map(|(x, y)| Point2D::new(x as f64, y as f64))
        .collect();
    if signed_area(&points) < 0.0 {
        points.reverse();
    }
    Contour::new(points)
}

/// Moore-neighbor tracing with Jacob's stopping criterion on a single-component mask.
fn trace_region(region: &BinaryMask) -> Vec<(i64, i64)> {
    let w = region.width();
    let start_idx = region
        .as_bytes()
        .iter()
        .position(|&v| v == 1)
        .expect("region is non-empty");
    let start = ((start_idx % w) as i64, (start_idx / w) as i64);

    // The west neighbor of the raster-first pixel is always background.
    let step = |cur: (i64, i64), back_dir: usize| -> Option<((i64, i64), usize)> {
        for k in 1..=8 {
            let idx = (back_dir + k) % 8;
            let cand = (cur.0 + RING[idx].0, cur.1 + RING[idx].1);
            if region.get_signed(cand.0, cand.1) {
                let prev = (idx + 7) % 8;
                let back = (cur.0 + RING[prev].0, cur.1 + RING[prev].1);
                return Some((cand, ring_index(back.0 - cand.0, back.1 - cand.1)));
            }
        }
        None
    };

    let mut points = vec![start];
    let Some((first, first_back)) = step(start, 0) else {
        return points;
    };
    let limit = 4 * region.width() * region.height() + 8;
    let (mut cur, mut back) = (first, first_back);
    while points.len() < limit {
        let (next, next_back) = step(cur, back).expect("traced pixel has a neighbor");
        if cur == start && next == first {
            break;
        }
        points.push(cur);
        cur = next;
        back = next_back;
    }
    points
}

/// A boundary pixel has a 4-neighbor that is background or outside the grid.
pub fn is_boundary_pixel(mask: &BinaryMask, x: usize, y: usize) -> bool {
    let (x, y) = (x as i64, y as i64);
    mask.get_signed(x, y)
        && [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .any(|&(dx, dy)| !mask.get_signed(x + dx, y + dy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from_rows(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        BinaryMask::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#').unwrap()
    }

    #[test]
    fn two_by_two_block() {
        let m = mask_from_rows(&["....", ".##.", ".##.", "...."]);
        let c = extract_contour(&m).unwrap();
        assert_eq!(
            c.points(),
            &[
                Point2D::new(1.0, 1.0),
                Point2D::new(2.0, 1.0),
                Point2D::new(2.0, 2.0),
                Point2D::new(1.0, 2.0)
            ]
        );
        assert!(c.signed_area() > 0.0);
    }

    #[test]
    fn empty_mask_errors() {
        let m = BinaryMask::new(4, 4).unwrap();
        assert_eq!(extract_contour(&m), Err(GeometryError::EmptyMask));
    }

    #[test]
    fn tiny_regions_are_degenerate() {
        let m = mask_from_rows(&["....", ".#..", "...."]);
        assert!(matches!(
            extract_contour(&m),
            Err(GeometryError::DegenerateRegion { boundary_pixels: 1 })
        ));
        let m = mask_from_rows(&["....", ".##.", "...."]);
        assert!(matches!(
            extract_contour(&m),
            Err(GeometryError::DegenerateRegion { boundary_pixels: 2 })
        ));
    }

    #[test]
    fn larger_component_wins() {
        let m = mask_from_rows(&[
            "#.........",
            "..........",
            "...#####..",
            "...#####..",
            "...#####..",
            "...#####..",
            "...#####..",
            "..........",
        ]);
        let c = extract_contour(&m).unwrap();
        assert_eq!(c.len(), 16);
        assert!(c.points().iter().all(|p| p.x >= 3.0 && p.y >= 2.0));
    }

    #[test]
    fn concave_shape_traces_every_boundary_pixel() {
        let m = mask_from_rows(&[
            ".......",
            ".#...#.",
            ".#...#.",
            ".#####.",
            ".......",
        ]);
        let c = extract_contour(&m).unwrap();
        // U-shape: arms are one pixel wide, so the walk revisits them.
        for p in c.points() {
            assert!(is_boundary_pixel(&m, p.x as usize, p.y as usize));
        }
        let mut seen: Vec<_> = c.points().iter().map(|p| (p.x as i64, p.y as i64)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), m.count());
    }

    #[test]
    fn consecutive_points_are_8_neighbors() {
        let m = BinaryMask::from_fn(30, 30, |x, y| {
            let (dx, dy) = (x as f64 - 14.5, y as f64 - 13.0);
            dx * dx / 100.0 + dy * dy / 49.0 <= 1.0
        })
        .unwrap();
        let c = extract_contour(&m).unwrap();
        for (a, b) in c.edges() {
            assert!((a.x - b.x).abs() <= 1.0 && (a.y - b.y).abs() <= 1.0);
            assert_ne!(a, b);
        }
    }
}
