//! Second-order intensity correlation from two timestamp streams.

use serde::{Deserialize, Serialize};

use super::stream::PhotonStream;
use crate::error::{Error, Result};

/// Coincidence histogram of `t_b − t_a`; bin `i` is centred on
/// `(i − half_bins)·bin_width`, so the layout is symmetric about zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Histogram {
    pub bin_width_ns: f64,
    pub edges_ns: Vec<f64>,
    pub g2: Vec<f64>,
    pub counts: Vec<u64>,
    /// Expected coincidences per bin for uncorrelated streams.
    pub normalization: f64,
}

impl G2Histogram {
    pub fn half_bins(&self) -> usize {
        self.g2.len() / 2
    }

    pub fn tau_ns(&self) -> Vec<f64> {
        self.edges_ns
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Value in the bin containing `τ = 0`.
    pub fn at_zero(&self) -> f64 {
        self.g2[self.half_bins()]
    }
}

/// Full cross-correlation of all pairs with `|t_b − t_a|` up to `window_ns`
/// (rounded out to whole bins), normalized by `r_a r_b T w`.
pub fn g2_estimate(
    a: &PhotonStream,
    b: &PhotonStream,
    bin_width_ns: f64,
    window_ns: f64,
) -> Result<G2Histogram> {
    if !(bin_width_ns > 0.0) || !(window_ns >= 10.0 * bin_width_ns) {
        return Err(Error::InvalidArgument(format!(
            "need bin width > 0 and window ≥ 10 bins (got {bin_width_ns}, {window_ns})"
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Undefined("g2 of an empty stream".into()));
    }
    let half = (window_ns / bin_width_ns - 0.5).ceil() as usize;
    let nbins = 2 * half + 1;
    let lo = -(half as f64 + 0.5) * bin_width_ns;
    let hi = -lo;
    let mut counts = vec![0u64; nbins];
    let tb = &b.timestamps_ns;
    let mut start = 0;
    for &t in &a.timestamps_ns {
        while start < tb.len() && tb[start] - t < lo {
            start += 1;
        }
        for &s in &tb[start..] {
            let tau = s - t;
            if tau >= hi {
                break;
            }
            let i = ((tau - lo) / bin_width_ns).floor() as usize;
            counts[i.min(nbins - 1)] += 1;
        }
    }
    let duration = a.duration_ns.min(b.duration_ns);
    let normalization = a.rate() * b.rate() * duration * bin_width_ns;
    let g2 = counts.iter().map(|&c| c as f64 / normalization).collect();
    let edges_ns = (0..=nbins).map(|i| lo + i as f64 * bin_width_ns).collect();
    Ok(G2Histogram {
        bin_width_ns,
        edges_ns,
        g2,
        counts,
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emitter::stream::{beamsplitter, simulate_stream, StreamKind};

    fn poisson(rate: f64, dur: f64, seed: u64) -> PhotonStream {
        simulate_stream(StreamKind::Poisson { rate }, dur, seed).unwrap()
    }

    fn emitter_g2_zero(excitation_rate: f64, seed: u64) -> f64 {
        let s = simulate_stream(
            StreamKind::SingleEmitter {
                excitation_rate,
                decay_rate: 1.0,
            },
            4e6,
            seed,
        )
        .unwrap();
        let (a, b) = beamsplitter(&s, seed + 1);
        g2_estimate(&a, &b, 0.2, 10.0).unwrap().at_zero()
    }

    #[test]
    fn symmetric_bin_layout() {
        let a = poisson(1.0, 100.0, 1);
        let h = g2_estimate(&a, &a, 0.5, 5.0).unwrap();
        assert_eq!(h.g2.len(), 21);
        assert_eq!(h.edges_ns.len(), 22);
        assert!((h.edges_ns[0] + h.edges_ns[21]).abs() < 1e-12);
        assert!(h.tau_ns()[h.half_bins()].abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_light_is_flat() {
        // About 4·10⁴ expected coincidences per bin.
        let (a, b) = (poisson(2.0, 1e5, 3), poisson(2.0, 1e5, 4));
        let h = g2_estimate(&a, &b, 0.1, 2.0).unwrap();
        for g in &h.g2 {
            assert!((g - 1.0).abs() < 0.05, "{g}");
        }
    }

    #[test]
    fn exchanging_streams_mirrors_tau() {
        let (a, b) = (poisson(1.0, 1e4, 5), poisson(1.0, 1e4, 6));
        let ab = g2_estimate(&a, &b, 0.5, 10.0).unwrap();
        let ba = g2_estimate(&b, &a, 0.5, 10.0).unwrap();
        let rev: Vec<u64> = ba.counts.iter().rev().copied().collect();
        assert_eq!(ab.counts, rev);
    }

    #[test]
    fn single_emitter_is_antibunched() {
        let g0 = emitter_g2_zero(0.5, 7);
        assert!(g0 < 0.5, "{g0}");
    }

    #[test]
    fn antibunching_improves_at_lower_duty_cycle() {
        let g: Vec<f64> = [1.0, 0.5, 0.2]
            .iter()
            .map(|&r| emitter_g2_zero(r, 21))
            .collect();
        assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let a = poisson(1.0, 10.0, 1);
        assert!(g2_estimate(&a, &a, 0.0, 1.0).is_err());
        assert!(g2_estimate(&a, &a, 1.0, 5.0).is_err());
        let empty = PhotonStream::new(vec![], 10.0, "x", 0).unwrap();
        assert!(matches!(
            g2_estimate(&a, &empty, 0.1, 1.0),
            Err(Error::Undefined(_))
        ));
    }
}
