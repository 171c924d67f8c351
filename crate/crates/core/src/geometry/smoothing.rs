//! Anisotropic smoothing of `1/ε` for the plane-wave operator.
//!
//! The hole indicator is blurred with a Gaussian of width `σ`; at each point
//! the blurred fill `f` and its gradient direction `n` give the tensor
//! `η = P⟨1/ε⟩ + (1 - P)/⟨ε⟩` with `P = n nᵀ`: the field component normal to
//! a boundary sees the harmonic mean, the tangential one the arithmetic mean.
//! The blur uses the exact polygon transform, so the construction keeps every
//! symmetry of the hole pattern.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::lattice::Lattice2D;
use super::polygon::Triangle;

/// Gaussian factors below this are dropped from the blurred indicator.
const KERNEL_FLOOR: f64 = 1e-10;

fn fft2(
    data: &mut [Complex64],
    nx: usize,
    ny: usize,
    planner: &mut FftPlanner<f64>,
    inverse: bool,
) {
    let plan = |n: usize, p: &mut FftPlanner<f64>| {
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    };
    let fx = plan(nx, planner);
    for row in data.chunks_exact_mut(nx) {
        fx.process(row);
    }
    let fy = plan(ny, planner);
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = data[j * nx + i];
        }
        fy.process(&mut col);
        for j in 0..ny {
            data[j * nx + i] = col[j];
        }
    }
}

/// Fourier coefficients `[η_xx, η_xy, η_yy]` of the smoothed inverse
/// permittivity for `|m| ≤ m_max`, `|n| ≤ n_max`, laid out row-major in `n`.
/// `sigma` is the blur width in a0.
pub(crate) fn smoothed_inverse_table(
    lattice: &Lattice2D,
    holes: &[Triangle],
    eps_background: f64,
    eps_hole: f64,
    m_max: i32,
    n_max: i32,
    sigma: f64,
) -> Vec<[Complex64; 3]> {
    let [b1, b2] = lattice.reciprocal();
    let area = lattice.area();
    let cut = (-2.0 * KERNEL_FLOOR.ln()).sqrt() / sigma;
    // The grid holds the whole blur disc (a symmetric set, so the pattern's
    // symmetries survive) and twice the table extent, which keeps the tensor
    // nonlinearity from aliasing onto the table.
    let len = |p: [f64; 2]| p[0].hypot(p[1]);
    let size = |ext: i32, a: [f64; 2]| {
        let disc = (cut * len(a) / (2.0 * PI)).ceil() as usize;
        2 * disc.max(2 * ext as usize) + 2
    };
    let (nx, ny) = (size(m_max, lattice.a1), size(n_max, lattice.a2));

    // Blurred indicator and its gradient, sampled at r = (i/nx) a1 + (j/ny) a2.
    let zero = Complex64::new(0.0, 0.0);
    let mut f = vec![zero; nx * ny];
    let mut gx = vec![zero; nx * ny];
    let mut gy = vec![zero; nx * ny];
    let (hx, hy) = ((nx / 2) as i64, (ny / 2) as i64);
    for n in -hy..hy {
        for m in -hx..hx {
            let g = [
                m as f64 * b1[0] + n as f64 * b2[0],
                m as f64 * b1[1] + n as f64 * b2[1],
            ];
            let g2 = g[0] * g[0] + g[1] * g[1];
            // Shells straddling the cut by roundoff would break symmetries.
            if g2.sqrt() > cut * (1.0 - 1e-9) {
                continue;
            }
            let k = (-0.5 * g2 * sigma * sigma).exp() / area;
            let c: Complex64 = holes.iter().map(|t| t.fourier(g)).sum::<Complex64>() * k;
            let p = n.rem_euclid(ny as i64) as usize * nx + m.rem_euclid(nx as i64) as usize;
            f[p] = c;
            gx[p] = Complex64::new(0.0, g[0]) * c;
            gy[p] = Complex64::new(0.0, g[1]) * c;
        }
    }
    let mut planner = FftPlanner::new();
    for d in [&mut f, &mut gx, &mut gy] {
        fft2(d, nx, ny, &mut planner, true);
    }

    let mut comps = [
        vec![zero; nx * ny],
        vec![zero; nx * ny],
        vec![zero; nx * ny],
    ];
    for p in 0..nx * ny {
        let fill = f[p].re.clamp(0.0, 1.0);
        let arith = 1.0 / (fill * eps_hole + (1.0 - fill) * eps_background);
        let harm = fill / eps_hole + (1.0 - fill) / eps_background;
        let (dx, dy) = (gx[p].re, gy[p].re);
        let gn = dx.hypot(dy);
        let (xx, xy, yy) = if gn > 0.0 {
            let (ux, uy) = (dx / gn, dy / gn);
            let d = harm - arith;
            (arith + d * ux * ux, d * ux * uy, arith + d * uy * uy)
        } else {
            (arith, 0.0, arith)
        };
        comps[0][p].re = xx;
        comps[1][p].re = xy;
        comps[2][p].re = yy;
    }
    for c in comps.iter_mut() {
        fft2(c, nx, ny, &mut planner, false);
    }

    let w = (2 * m_max + 1) as usize;
    let mut table = vec![[zero; 3]; w * (2 * n_max + 1) as usize];
    let norm = 1.0 / (nx * ny) as f64;
    for n in -n_max..=n_max {
        for m in -m_max..=m_max {
            let src = (n as i64).rem_euclid(ny as i64) as usize * nx
                + (m as i64).rem_euclid(nx as i64) as usize;
            let dst = (n + n_max) as usize * w + (m + m_max) as usize;
            for c in 0..3 {
                table[dst][c] = comps[c][src] * norm;
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_medium_is_scalar() {
        let t = smoothed_inverse_table(&Lattice2D::hexagonal(), &[], 4.0, 1.0, 3, 3, 0.05);
        let w = 7;
        for (i, c) in t.iter().enumerate() {
            let want = if i == 3 * w + 3 { 0.25 } else { 0.0 };
            assert!((c[0].re - want).abs() < 1e-14 && (c[2].re - want).abs() < 1e-14);
            assert!(c[1].norm() < 1e-14 && c[0].im.abs() < 1e-14);
        }
    }
}
