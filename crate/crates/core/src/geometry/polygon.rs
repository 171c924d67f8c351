//! Triangles: area, containment, overlap, clipping and the exact Fourier
//! transform of their indicator function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// Triangle with vertices stored counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [Point; 3],
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

impl Triangle {
    /// Builds a triangle from any three vertices, reordering them to be
    /// counter-clockwise.
    pub fn new(a: Point, b: Point, c: Point) -> Self {
        if cross(a, b, c) < 0.0 {
            Self {
                vertices: [a, c, b],
            }
        } else {
            Self {
                vertices: [a, b, c],
            }
        }
    }

    /// Equilateral triangle with one vertex in direction `apex_angle` (rad)
    /// from the centroid.
    pub fn equilateral(centroid: Point, circumradius: f64, apex_angle: f64) -> Self {
        let v = |k: usize| {
            let t = apex_angle + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            [
                centroid[0] + circumradius * t.cos(),
                centroid[1] + circumradius * t.sin(),
            ]
        };
        Self {
            vertices: [v(0), v(1), v(2)],
        }
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = self.vertices;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn translated(&self, d: Point) -> Self {
        let mut out = *self;
        for v in &mut out.vertices {
            v[0] += d[0];
            v[1] += d[1];
        }
        out
    }

    /// Rotation about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut out = *self;
        for v in &mut out.vertices {
            *v = [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        }
        out
    }

    /// Applies a linear map `m` (row-major 2×2) to every vertex.
    pub fn mapped(&self, m: [[f64; 2]; 2]) -> Self {
        let f = |v: Point| {
            [
                m[0][0] * v[0] + m[0][1] * v[1],
                m[1][0] * v[0] + m[1][1] * v[1],
            ]
        };
        let [a, b, c] = self.vertices;
        Self::new(f(a), f(b), f(c))
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }

    pub fn contains(&self, p: Point) -> bool {
        let [a, b, c] = self.vertices;
        cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
    }

    /// True if the interiors intersect with a penetration depth above `tol`.
    /// Triangles that only touch along an edge or at a vertex do not overlap.
    pub fn overlaps(&self, other: &Triangle, tol: f64) -> bool {
        // Separating-axis test on the six edge normals.
        for tri in [self, other] {
            for i in 0..3 {
                let a = tri.vertices[i];
                let b = tri.vertices[(i + 1) % 3];
                let n = [b[1] - a[1], a[0] - b[0]];
                let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
                let proj = |t: &Triangle| {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for v in &t.vertices {
                        let p = (v[0] * n[0] + v[1] * n[1]) / len;
                        lo = lo.min(p);
                        hi = hi.max(p);
                    }
                    (lo, hi)
                };
                let (l1, h1) = proj(self);
                let (l2, h2) = proj(other);
                if h1.min(h2) - l1.max(l2) <= tol {
                    return false;
                }
            }
        }
        true
    }

    /// Area of the intersection with the rectangle `[x0, x1] × [y0, y1]`.
    pub fn clipped_area(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let (lo, hi) = self.bbox();
        if hi[0] <= x0 || lo[0] >= x1 || hi[1] <= y0 || lo[1] >= y1 {
            return 0.0;
        }
        if lo[0] >= x0 && hi[0] <= x1 && lo[1] >= y0 && hi[1] <= y1 {
            return self.area();
        }
        let mut poly: Vec<Point> = self.vertices.to_vec();
        // Sutherland-Hodgman against the four half-planes.
        let planes: [(usize, f64, bool); 4] =
            [(0, x0, true), (0, x1, false), (1, y0, true), (1, y1, false)];
        for (axis, bound, keep_above) in planes {
            if poly.is_empty() {
                return 0.0;
            }
            let inside = |p: &Point| {
                if keep_above {
                    p[axis] >= bound
                } else {
                    p[axis] <= bound
                }
            };
            let mut out = Vec::with_capacity(poly.len() + 2);
            for i in 0..poly.len() {
                let cur = poly[i];
                let prev = poly[(i + poly.len() - 1) % poly.len()];
                let (ci, pi) = (inside(&cur), inside(&prev));
                if ci != pi {
                    let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                    out.push([
                        prev[0] + t * (cur[0] - prev[0]),
                        prev[1] + t * (cur[1] - prev[1]),
                    ]);
                }
                if ci {
                    out.push(cur);
                }
            }
            poly = out;
        }
        if poly.len() < 3 {
            0.0
        } else {
            shoelace(&poly).abs()
        }
    }

    /// `∫_T exp(-i q·r) d²r`, evaluated in closed form as a sum over edges.
    pub fn fourier(&self, q: Point) -> Complex64 {
        let q2 = q[0] * q[0] + q[1] * q[1];
        let (lo, hi) = self.bbox();
        let diam = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        if q2 * diam * diam < 1e-16 {
            let c = self.centroid();
            return self.area() * Complex64::from_polar(1.0, -(q[0] * c[0] + q[1] * c[1]));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 3];
            let e = [b[0] - a[0], b[1] - a[1]];
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            // Outward normal scaled by the edge length.
            let qn = q[0] * e[1] - q[1] * e[0];
            let x = 0.5 * (q[0] * e[0] + q[1] * e[1]);
            let sinc = if x.abs() < 1e-8 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            };
            acc += qn * sinc * Complex64::from_polar(1.0, -(q[0] * mid[0] + q[1] * mid[1]));
        }
        Complex64::new(0.0, 1.0) * acc / q2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quadrature_ft(t: &Triangle, q: Point, n: usize) -> Complex64 {
        // Midpoint rule on the barycentric refinement of the triangle.
        let [a, b, c] = t.vertices;
        let area = t.area();
        let mut acc = Complex64::new(0.0, 0.0);
        let h = 1.0 / n as f64;
        for i in 0..n {
            for j in 0..n - i {
                for (u, v) in [
                    ((i as f64 + 1.0 / 3.0) * h, (j as f64 + 1.0 / 3.0) * h),
                    ((i as f64 + 2.0 / 3.0) * h, (j as f64 + 2.0 / 3.0) * h),
                ] {
                    if u + v > 1.0 {
                        continue;
                    }
                    let p = [
                        a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
                        a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
                    ];
                    acc += Complex64::from_polar(1.0, -(q[0] * p[0] + q[1] * p[1]));
                }
            }
        }
        acc * area / (n * n) as f64
    }

    #[test]
    fn equilateral_area() {
        let s = 0.3;
        let t = Triangle::equilateral([0.2, -0.1], s / 3f64.sqrt(), 0.4);
        assert_relative_eq!(t.area(), 3f64.sqrt() / 4.0 * s * s, max_relative = 1e-12);
        let c = t.centroid();
        assert_relative_eq!(c[0], 0.2, epsilon = 1e-14);
        assert_relative_eq!(c[1], -0.1, epsilon = 1e-14);
    }

    #[test]
    fn fourier_at_zero_is_area() {
        let t = Triangle::new([0.0, 0.0], [1.0, 0.1], [0.3, 0.8]);
        let f = t.fourier([0.0, 0.0]);
        assert_relative_eq!(f.re, t.area(), max_relative = 1e-14);
        assert_eq!(f.im, 0.0);
    }

    #[test]
    fn fourier_matches_quadrature() {
        let t = Triangle::new([0.1, 0.0], [0.5, 0.1], [0.2, 0.45]);
        for q in [[3.0, 0.0], [-7.0, 4.0], [12.0, -20.0], [1e-3, 2e-3]] {
            let exact = t.fourier(q);
            let quad = quadrature_ft(&t, q, 400);
            assert!(
                (exact - quad).norm() < 2e-5 * t.area(),
                "q = {q:?}: {exact} vs {quad}"
            );
        }
    }

    #[test]
    fn clipping_partial_square() {
        let t = Triangle::new([0.0, 0.0], [2.0, 0.0], [0.0, 2.0]);
        assert_relative_eq!(t.clipped_area(0.0, 1.0, 0.0, 1.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(t.clipped_area(1.0, 2.0, 0.0, 1.0), 0.5, epsilon = 1e-14);
        assert_relative_eq!(t.clipped_area(-5.0, 5.0, -5.0, 5.0), 2.0, epsilon = 1e-14);
        assert_eq!(t.clipped_area(3.0, 4.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn touching_triangles_do_not_overlap() {
        let a = Triangle::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        let b = Triangle::new([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]);
        assert!(!a.overlaps(&b, 1e-12));
        let c = b.translated([-0.1, 0.0]);
        assert!(a.overlaps(&c, 1e-12));
    }

    proptest! {
        #[test]
        fn clipped_pieces_sum_to_area(
            x in -1.0f64..1.0, y in -1.0f64..1.0, r in 0.05f64..0.6, ang in 0.0f64..6.3,
            cut in -0.5f64..0.5,
        ) {
            let t = Triangle::equilateral([x, y], r, ang);
            let left = t.clipped_area(-10.0, cut, -10.0, 10.0);
            let right = t.clipped_area(cut, 10.0, -10.0, 10.0);
            prop_assert!((left + right - t.area()).abs() < 1e-12);
        }

        #[test]
        fn fourier_is_hermitian(qx in -30.0f64..30.0, qy in -30.0f64..30.0) {
            let t = Triangle::new([0.1, -0.2], [0.4, 0.05], [-0.1, 0.3]);
            let a = t.fourier([qx, qy]);
            let b = t.fourier([-qx, -qy]);
            prop_assert!((a - b.conj()).norm() < 1e-12);
        }
    }
}
