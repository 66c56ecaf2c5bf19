//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use lvef_core::geometry::Point2D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Pt = (f64, f64);

fn sub(a: Pt, b: Pt) -> Pt {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: Pt, b: Pt) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Point in closed triangle via barycentric signs, with absolute slack `tol`.
fn in_triangle(p: Pt, t: [Pt; 3], tol: f64) -> bool {
    let area2 = cross(sub(t[1], t[0]), sub(t[2], t[0]));
    let orient = area2.signum();
    (0..3).all(|i| {
        let a = t[i];
        let b = t[(i + 1) % 3];
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        orient * cross(sub(b, a), sub(p, a)) >= -tol * len
    })
}

fn line_intersection(p: Pt, d: Pt, q: Pt, e: Pt) -> Option<Pt> {
    let den = cross(d, e);
    if den.abs() < 1e-14 * (d.0.hypot(d.1) * e.0.hypot(e.1)) {
        return None;
    }
    let s = cross(sub(q, p), e) / den;
    Some((p.0 + s * d.0, p.1 + s * d.1))
}

fn tri_area(t: [Pt; 3]) -> f64 {
    0.5 * cross(sub(t[1], t[0]), sub(t[2], t[0])).abs()
}

/// Minimum enclosing triangle area by exhaustive enumeration.
///
/// Candidates: every triple of edge lines, and every pair of edge lines closed
/// by a line through a vertex that is the midpoint of the closing side (all
/// four ray orientations). Each candidate is checked for containment of every
/// vertex; the smallest valid area wins.
pub fn brute_force_min_triangle_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for p in poly {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    let tol = 1e-6 * (hi.0 - lo.0).hypot(hi.1 - lo.1);
    let line = |i: usize| (poly[i], sub(poly[(i + 1) % n], poly[i]));
    let valid = |t: [Pt; 3]| poly.iter().all(|&p| in_triangle(p, t, tol));
    let mut best = f64::INFINITY;

    for i in 0..n {
        for j in i + 1..n {
            let (p, d) = line(i);
            let (q, e) = line(j);
            let Some(c) = line_intersection(p, d, q, e) else { continue };
            for k in j + 1..n {
                let (r, f) = line(k);
                let (Some(a), Some(b)) = (line_intersection(p, d, r, f), line_intersection(q, e, r, f)) else {
                    continue;
                };
                let t = [c, a, b];
                let area = tri_area(t);
                if area > 0.0 && area < best && valid(t) {
                    best = area;
                }
            }
            for v in poly {
                for si in [-1.0, 1.0] {
                    for sj in [-1.0, 1.0] {
                        let ri = (si * d.0, si * d.1);
                        let rj = (sj * e.0, sj * e.1);
                        let det = cross(ri, rj);
                        let w = (2.0 * (v.0 - c.0), 2.0 * (v.1 - c.1));
                        let s = cross(w, rj) / det;
                        let t = cross(ri, w) / det;
                        if s <= 0.0 || t <= 0.0 {
                            continue;
                        }
                        let tri = [c, (c.0 + s * ri.0, c.1 + s * ri.1), (c.0 + t * rj.0, c.1 + t * rj.1)];
                        let area = tri_area(tri);
                        if area > 1e-12 && area < best && valid(tri) {
                            best = area;
                        }
                    }
                }
            }
        }
    }
    best
}

/// Hull vertices by definition: a point is a vertex iff it lies in no closed
/// triangle of three other points. O(n⁴).
pub fn brute_force_hull_vertices(points: &[Pt]) -> Vec<Pt> {
    let n = points.len();
    let mut out = Vec::new();
    'outer: for a in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if [i, j, k].contains(&a) {
                        continue;
                    }
                    let t = [points[i], points[j], points[k]];
                    if tri_area(t) > 0.0 && in_triangle(points[a], t, 0.0) {
                        continue 'outer;
                    }
                }
            }
        }
        out.push(points[a]);
    }
    out.sort_by(|p, q| p.partial_cmp(q).unwrap());
    out
}

/// Random convex polygon with 3..=max_vertices vertices in [0, 100]², counterclockwise.
pub fn random_convex_polygon(rng: &mut ChaCha8Rng, max_vertices: usize) -> Vec<Point2D> {
    loop {
        let m = rng.random_range(3..=3 * max_vertices);
        let pts: Vec<Point2D> = (0..m)
            .map(|_| Point2D::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        if let Ok(h) = lvef_core::geometry::convex_hull(&pts) {
            if h.len() <= max_vertices && h.signed_area() > 1.0 {
                return h.into_points();
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_pts(points: &[Point2D]) -> Vec<Pt> {
    points.iter().map(|p| (p.x, p.y)).collect()
}

/// Even-odd point-in-polygon for a pixel center, counting boundary points as inside.
pub fn point_in_polygon_inclusive(p: Pt, poly: &[Pt]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let on_line = cross(sub(b, a), sub(p, a)).abs() <= 1e-9 * (b.0 - a.0).hypot(b.1 - a.1).max(1.0);
        let within = p.0 >= a.0.min(b.0) - 1e-9
            && p.0 <= a.0.max(b.0) + 1e-9
            && p.1 >= a.1.min(b.1) - 1e-9
            && p.1 <= a.1.max(b.1) + 1e-9;
        if on_line && within {
            return true;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Dense TPS reference: assembles the full system with the ½·r²·log(r²)
/// kernel and solves it by Gauss–Jordan elimination with full pivoting.
/// Returns a closure evaluating the warp.
#[allow(clippy::needless_range_loop)]
pub fn dense_tps_oracle(src: &[Pt], dst: &[Pt]) -> impl Fn(Pt) -> Pt {
    let k = src.len();
    let m = k + 3;
    let kernel = |r2: f64| if r2 == 0.0 { 0.0 } else { 0.5 * r2 * r2.ln() };
    let mut a = vec![vec![0.0f64; m + 2]; m];
    for i in 0..k {
        for j in 0..k {
            let dx = src[i].0 - src[j].0;
            let dy = src[i].1 - src[j].1;
            a[i][j] = kernel(dx * dx + dy * dy);
        }
        a[i][k] = 1.0;
        a[i][k + 1] = src[i].0;
        a[i][k + 2] = src[i].1;
        a[k][i] = 1.0;
        a[k + 1][i] = src[i].0;
        a[k + 2][i] = src[i].1;
        a[i][m] = dst[i].0;
        a[i][m + 1] = dst[i].1;
    }
    let mut col_perm: Vec<usize> = (0..m).collect();
    for piv in 0..m {
        let (mut br, mut bc, mut bv) = (piv, piv, 0.0);
        for r in piv..m {
            for c in piv..m {
                if a[r][c].abs() > bv {
                    (br, bc, bv) = (r, c, a[r][c].abs());
                }
            }
        }
        a.swap(piv, br);
        for row in a.iter_mut() {
            row.swap(piv, bc);
        }
        col_perm.swap(piv, bc);
        let p = a[piv][piv];
        for c in 0..m + 2 {
            a[piv][c] /= p;
        }
        for r in 0..m {
            if r != piv {
                let f = a[r][piv];
                if f != 0.0 {
                    for c in 0..m + 2 {
                        a[r][c] -= f * a[piv][c];
                    }
                }
            }
        }
    }
    let mut sol = vec![(0.0, 0.0); m];
    for (i, &var) in col_perm.iter().enumerate() {
        sol[var] = (a[i][m], a[i][m + 1]);
    }
    let src = src.to_vec();
    move |p: Pt| {
        let mut x = sol[k].0 + sol[k + 1].0 * p.0 + sol[k + 2].0 * p.1;
        let mut y = sol[k].1 + sol[k + 1].1 * p.0 + sol[k + 2].1 * p.1;
        for (i, s) in src.iter().enumerate() {
            let dx = p.0 - s.0;
            let dy = p.1 - s.1;
            let u = kernel(dx * dx + dy * dy);
            x += sol[i].0 * u;
            y += sol[i].1 * u;
        }
        (x, y)
    }
}
