//! Bloch vectors, high-symmetry paths and Brillouin-zone sampling.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Lattice2D, Point};

/// Bloch wavevector in units of 2π/a0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub kx: f64,
    pub ky: f64,
}

impl BlochVector {
    pub const GAMMA: BlochVector = BlochVector { kx: 0.0, ky: 0.0 };

    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    /// Cartesian wavevector in rad/a0.
    pub fn cartesian(&self) -> Point {
        [2.0 * PI * self.kx, 2.0 * PI * self.ky]
    }

    pub fn from_cartesian(k: Point) -> Self {
        Self {
            kx: k[0] / (2.0 * PI),
            ky: k[1] / (2.0 * PI),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            kx: -self.kx,
            ky: -self.ky,
        }
    }

    pub fn norm(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    /// The equivalent vector of smallest length (the first-zone representative).
    pub fn reduce_to_first_bz(&self, lattice: &Lattice2D) -> Self {
        let [b1, b2] = lattice.reciprocal();
        let k = self.cartesian();
        // Coordinates in the reciprocal basis: k·a_i / 2π.
        let f = [
            self.kx * lattice.a1[0] + self.ky * lattice.a1[1],
            self.kx * lattice.a2[0] + self.ky * lattice.a2[1],
        ];
        let (m0, n0) = (f[0].round() as i32, f[1].round() as i32);
        let mut best = k;
        let mut best_norm = f64::INFINITY;
        for dm in -2..=2 {
            for dn in -2..=2 {
                let (m, n) = ((m0 + dm) as f64, (n0 + dn) as f64);
                let c = [k[0] - m * b1[0] - n * b2[0], k[1] - m * b1[1] - n * b2[1]];
                let len = c[0].hypot(c[1]);
                if len < best_norm - 1e-12 {
                    best_norm = len;
                    best = c;
                }
            }
        }
        Self::from_cartesian(best)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KVertex {
    pub label: String,
    pub k: BlochVector,
}

/// One sampled wavevector with its position on a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSample {
    pub segment: String,
    pub index: usize,
    pub k: BlochVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPath {
    pub vertices: Vec<KVertex>,
    /// Samples per segment, counting the segment's start but not its end.
    pub samples: Vec<usize>,
}

impl KPath {
    pub fn new(vertices: Vec<KVertex>, samples: Vec<usize>) -> Result<Self> {
        if vertices.len() < 2 || samples.len() != vertices.len() - 1 {
            return Err(Error::InvalidArgument(
                "a k-path needs at least two vertices and one sample count per segment".into(),
            ));
        }
        for w in vertices.windows(2) {
            let d = BlochVector::new(w[1].k.kx - w[0].k.kx, w[1].k.ky - w[0].k.ky);
            if d.norm() < 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "consecutive k-path vertices {} and {} coincide",
                    w[0].label, w[1].label
                )));
            }
        }
        if let Some(s) = samples.iter().find(|&&s| s < 2) {
            return Err(Error::InvalidArgument(format!(
                "segment sample count {s} is below 2"
            )));
        }
        Ok(Self { vertices, samples })
    }

    /// Γ-K-M-Γ for the hexagonal lattice, with K along +x.
    pub fn hexagonal(samples_per_segment: usize) -> Result<Self> {
        let s3 = 3f64.sqrt();
        let v = |label: &str, kx: f64, ky: f64| KVertex {
            label: label.into(),
            k: BlochVector::new(kx, ky),
        };
        Self::new(
            vec![
                v("G", 0.0, 0.0),
                v("K", 2.0 / 3.0, 0.0),
                v("M", 0.5, 0.5 / s3),
                v("G", 0.0, 0.0),
            ],
            vec![samples_per_segment; 3],
        )
    }

    /// All samples in path order; the final vertex is included once.
    pub fn points(&self) -> Vec<KSample> {
        let mut out = Vec::new();
        for (s, w) in self.vertices.windows(2).enumerate() {
            let n = self.samples[s];
            let seg = format!("{}-{}", w[0].label, w[1].label);
            let last = s + 2 == self.vertices.len();
            let count = if last { n + 1 } else { n };
            for t in 0..count {
                let f = t as f64 / n as f64;
                out.push(KSample {
                    segment: seg.clone(),
                    index: out.len(),
                    k: BlochVector::new(
                        w[0].k.kx + f * (w[1].k.kx - w[0].k.kx),
                        w[0].k.ky + f * (w[1].k.ky - w[0].k.ky),
                    ),
                });
            }
        }
        out
    }
}

/// An `n × n` grid over the hexagonal Brillouin zone, folded into the
/// irreducible wedge between Γ-K and Γ-M and deduplicated. Valid for media
/// with the full hexagonal point symmetry.
pub fn irreducible_grid(n: usize) -> Vec<KSample> {
    let lat = Lattice2D::hexagonal();
    let [b1, b2] = lat.reciprocal();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let (fu, fv) = (u as f64 / n as f64, v as f64 / n as f64);
            let k = BlochVector::from_cartesian([fu * b1[0] + fv * b2[0], fu * b1[1] + fv * b2[1]])
                .reduce_to_first_bz(&lat);
            let r = k.norm();
            let mut th = k.ky.atan2(k.kx).rem_euclid(PI / 3.0);
            if th > PI / 6.0 {
                th = PI / 3.0 - th;
            }
            let folded = BlochVector::new(r * th.cos(), r * th.sin());
            let key = (
                (folded.kx * 1e9).round() as i64,
                (folded.ky * 1e9).round() as i64,
            );
            if seen.insert(key) {
                out.push(KSample {
                    segment: "grid".into(),
                    index: out.len(),
                    k: folded,
                });
            }
        }
    }
    out
}
