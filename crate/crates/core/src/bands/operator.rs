//! The TE master-equation operator in a plane-wave basis.
//!
//! With `H_z(r) = Σ_G c_G exp(i(k+G)·r)` the eigenproblem reads
//! `Σ_G' η(G,G') (k+G)·(k+G') c_G' = (ω/c)² c_G`, where `η` is the Fourier
//! matrix of `1/ε`.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64;

use super::kpath::BlochVector;
use crate::error::{Error, Result};
use crate::geometry::{FourierEps, InverseRule, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    /// Cartesian Bloch vector, rad/a0.
    pub k: Point,
    pub indices: Vec<(i32, i32)>,
    /// `k + G` for each basis vector, rad/a0.
    pub q: Vec<Point>,
}

impl PlaneWaveBasis {
    pub fn new(eps: &FourierEps, k: BlochVector) -> Self {
        let kc = k.cartesian();
        let indices = eps.basis(kc);
        let q = indices
            .iter()
            .map(|&(m, n)| {
                let g = eps.g_vector(m, n);
                [kc[0] + g[0], kc[1] + g[1]]
            })
            .collect();
        Self { k: kc, indices, q }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Fourier matrix of `1/ε` on a basis: a scalar medium, or the
/// `[xx, xy, yy]` blocks of a smoothed tensor.
#[derive(Debug, Clone)]
pub enum EtaMatrix {
    Scalar(Mat<Complex64>),
    Tensor([Mat<Complex64>; 3]),
}

/// `ẑ × q`, the direction of `E` for a plane wave of `H_z` (up to sign).
fn rot(q: Point) -> Point {
    [q[1], -q[0]]
}

impl EtaMatrix {
    /// Bilinear form `u^T η(a, b) v` for in-plane vectors `u` at row `a`
    /// and `v` at column `b`.
    #[inline]
    fn form(&self, a: usize, b: usize, u: Point, v: Point) -> Complex64 {
        match self {
            EtaMatrix::Scalar(m) => m[(a, b)] * (u[0] * v[0] + u[1] * v[1]),
            EtaMatrix::Tensor([xx, xy, yy]) => {
                // η_yx(G) = η_xy(G) since the real-space tensor is symmetric.
                xx[(a, b)] * (u[0] * v[0])
                    + xy[(a, b)] * (u[0] * v[1] + u[1] * v[0])
                    + yy[(a, b)] * (u[1] * v[1])
            }
        }
    }

    /// The TE operator `M(a, b) = (ẑ×q_a)·η(a, b)(ẑ×q_b)`.
    pub fn te_operator(&self, q: &[Point]) -> Mat<Complex64> {
        let n = q.len();
        Mat::from_fn(n, n, |a, b| self.form(a, b, rot(q[a]), rot(q[b])))
    }

    /// `u† (dM/dt) u` when every `q` moves along `dq`.
    pub fn derivative_expectation(&self, q: &[Point], dq: Point, u: &[Complex64]) -> f64 {
        let n = q.len();
        let dr = rot(dq);
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..n {
            if u[b] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let rb = rot(q[b]);
            let s: Complex64 = u
                .iter()
                .enumerate()
                .map(|(a, ua)| ua.conj() * self.form(a, b, dr, rb))
                .sum();
            acc += s * u[b];
        }
        // dM = D(dr, r) + D(r, dr), and the second term is the adjoint of the first.
        2.0 * acc.re
    }
}

#[derive(Debug, Clone)]
pub struct TeOperator {
    pub basis: PlaneWaveBasis,
    pub eta: EtaMatrix,
    pub matrix: Mat<Complex64>,
}

fn hermitian_part(m: &Mat<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |a, b| {
        0.5 * (m[(a, b)] + m[(b, a)].conj())
    })
}

/// Matrix of `1/ε` on the basis, built per the coefficient table's inverse rule.
pub fn eta_matrix(eps: &FourierEps, basis: &PlaneWaveBasis) -> Result<EtaMatrix> {
    let n = basis.len();
    let idx = &basis.indices;
    let diff = |a: usize, b: usize| (idx[a].0 - idx[b].0, idx[a].1 - idx[b].1);
    match eps.rule {
        InverseRule::Direct => Ok(EtaMatrix::Scalar(Mat::from_fn(n, n, |a, b| {
            let (m, k) = diff(a, b);
            eps.eta(m, k)
        }))),
        InverseRule::Ho => {
            let e = Mat::from_fn(n, n, |a, b| {
                let (m, k) = diff(a, b);
                eps.eps(m, k)
            });
            let llt = e.llt(Side::Lower).map_err(|err| Error::Eigen {
                kx: basis.k[0] / (2.0 * std::f64::consts::PI),
                ky: basis.k[1] / (2.0 * std::f64::consts::PI),
                reason: format!("permittivity matrix is not positive definite: {err:?}"),
            })?;
            Ok(EtaMatrix::Scalar(hermitian_part(&llt.inverse())))
        }
        InverseRule::Smoothed => {
            let comp = |c: usize| {
                Mat::from_fn(n, n, |a, b| {
                    let (m, k) = diff(a, b);
                    eps.eta_tensor(m, k).expect("smoothed table present")[c]
                })
            };
            Ok(EtaMatrix::Tensor([comp(0), comp(1), comp(2)]))
        }
    }
}

pub fn assemble_te_operator(eps: &FourierEps, k: BlochVector) -> Result<TeOperator> {
    let basis = PlaneWaveBasis::new(eps, k);
    let eta = eta_matrix(eps, &basis)?;
    let matrix = eta.te_operator(&basis.q);
    Ok(TeOperator { basis, eta, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fourier_epsilon, Lattice2D, LatticeSpec, Region};
    use proptest::prelude::*;

    fn frob(m: &Mat<Complex64>) -> f64 {
        let mut s = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                s += m[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    }

    fn hermiticity_defect(m: &Mat<Complex64>) -> f64 {
        let d = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] - m[(j, i)].conj());
        frob(&d) / frob(m)
    }

    #[test]
    fn uniform_medium_is_diagonal() {
        let fe = FourierEps::uniform(
            Lattice2D::hexagonal(),
            9.0,
            4.0 * crate::geometry::hex_reciprocal_length(),
        );
        let op = assemble_te_operator(&fe, BlochVector::new(0.1, 0.05)).unwrap();
        for a in 0..op.basis.len() {
            let q = op.basis.q[a];
            let want = (q[0] * q[0] + q[1] * q[1]) / 9.0;
            assert!((op.matrix[(a, a)].re - want).abs() < 1e-12 * want.max(1.0));
            for b in 0..op.basis.len() {
                if a != b {
                    assert!(op.matrix[(a, b)].norm() < 1e-12);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn operator_is_hermitian(kx in -0.7f64..0.7, ky in -0.7f64..0.7, which in 0usize..3, r in 0usize..3) {
            let region = [Region::Pristine, Region::Expanded, Region::Shrunk][which];
            let rule = [InverseRule::Direct, InverseRule::Ho, InverseRule::Smoothed][r];
            let fe = fourier_epsilon(&LatticeSpec::device(2.9), region, 6.0, rule).unwrap();
            let op = assemble_te_operator(&fe, BlochVector::new(kx, ky)).unwrap();
            prop_assert!(hermiticity_defect(&op.matrix) < 1e-12);
        }
    }
}
