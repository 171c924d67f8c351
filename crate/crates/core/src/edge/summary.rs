//! Edge branches at fixed frequency and the windows they span.

use serde::{Deserialize, Serialize};

use super::projected::{EdgeBandSet, EdgeMode};
use super::supercell::InterfaceTag;
use crate::bands::{bulk_gap, intersect, GapInfo, PweSettings, ZoneSampling};
use crate::error::{Error, Result};
use crate::geometry::{LatticeSpec, Region};

/// Frequency steps used to scan a window for branch coverage.
pub const WINDOW_SCAN_STEPS: usize = 400;

/// One edge branch passing through a probe frequency, represented by the
/// sampled mode closest to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub tag: InterfaceTag,
    pub kx: f64,
    pub nu: f64,
    pub vg: f64,
    pub spin: Option<f64>,
    pub loc_len_a0: f64,
}

/// Modes closer than this in frequency are treated as one degenerate cluster
/// when ordering bands.
const CLUSTER_TOL: f64 = 1e-6;

/// Samples sorted by `k_x`, each holding every mode in band order. Inside a
/// degenerate cluster the modes are ordered by tag so that a mirror pair keeps
/// its labels from one sample to the next.
fn bands_by_k(set: &EdgeBandSet) -> Vec<Vec<&EdgeMode>> {
    let mut ks = set.kx.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks.iter()
        .map(|&k| {
            let mut v: Vec<&EdgeMode> = set.at(k).collect();
            v.sort_by(|a, b| a.nu.total_cmp(&b.nu));
            let mut i = 0;
            while i < v.len() {
                let mut j = i + 1;
                while j < v.len() && v[j].nu - v[j - 1].nu < CLUSTER_TOL {
                    j += 1;
                }
                v[i..j].sort_by_key(|m| m.tag);
                i = j;
            }
            v
        })
        .collect()
}

/// Bands crossing `nu` between consecutive samples whose endpoint nearer to
/// `nu` is tagged `tag`. Band `j` at one sample continues as band `j` at the
/// next, so tag changes away from `nu` cannot fake a crossing.
fn crossings_in(samples: &[Vec<&EdgeMode>], tag: InterfaceTag, nu: f64) -> Vec<Crossing> {
    let mut out = Vec::new();
    for pair in samples.windows(2) {
        for (m0, m1) in pair[0].iter().zip(&pair[1]) {
            if (m0.nu - nu) * (m1.nu - nu) >= 0.0 {
                continue;
            }
            let m = if (m0.nu - nu).abs() <= (m1.nu - nu).abs() {
                m0
            } else {
                m1
            };
            if m.tag == tag {
                out.push(Crossing {
                    tag,
                    kx: m.kx,
                    nu,
                    vg: m.vg,
                    spin: m.spin,
                    loc_len_a0: m.loc_len_a0,
                });
            }
        }
    }
    out
}

/// Edge branches on `tag` crossing `nu`.
pub fn crossings(set: &EdgeBandSet, tag: InterfaceTag, nu: f64) -> Vec<Crossing> {
    crossings_in(&bands_by_k(set), tag, nu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSummary {
    /// Intersection of the two bulk gaps.
    pub common_gap_nu: (f64, f64),
    pub common_gap_thz: (f64, f64),
    /// Part of the common gap where both interfaces carry an edge branch.
    pub edge_window_nu: (f64, f64),
    pub edge_window_thz: (f64, f64),
    /// Sub-intervals of the edge window without edge branches (anticrossings
    /// of the counter-propagating branches).
    pub mini_gaps_nu: Vec<(f64, f64)>,
    /// Widest part of the window where each interface carries exactly two
    /// branches.
    pub helical_window_nu: (f64, f64),
    /// Centre of the helical window.
    pub probe_nu: f64,
    pub probe_thz: f64,
    pub crossings: Vec<Crossing>,
}

/// Maximal runs of consecutive `true` entries as inclusive index ranges.
fn runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, flags.len() - 1));
    }
    out
}

/// Edge window, mini-gaps and probe frequency of a projected band set.
pub fn summarize_edges(set: &EdgeBandSet, common_gap: (f64, f64)) -> Result<EdgeSummary> {
    let (lo, hi) = common_gap;
    if !(hi > lo) {
        return Err(Error::Undefined(format!(
            "common gap [{lo:.5}, {hi:.5}] is closed"
        )));
    }
    let tags = [InterfaceTag::A, InterfaceTag::B];
    let samples = bands_by_k(set);
    let step = (hi - lo) / WINDOW_SCAN_STEPS as f64;
    let grid: Vec<f64> = (0..WINDOW_SCAN_STEPS)
        .map(|i| lo + (i as f64 + 0.5) * step)
        .collect();
    let counts: Vec<[usize; 2]> = grid
        .iter()
        .map(|&nu| [0, 1].map(|i| crossings_in(&samples, tags[i], nu).len()))
        .collect();
    let covered: Vec<bool> = counts.iter().map(|c| c[0] > 0 && c[1] > 0).collect();
    let cov = runs(&covered);
    let (Some(first), Some(last)) = (cov.first(), cov.last()) else {
        return Err(Error::Undefined(
            "no edge branch on both interfaces inside the common gap".into(),
        ));
    };
    let edge = (grid[first.0] - 0.5 * step, grid[last.1] + 0.5 * step);
    let mini_gaps = cov
        .windows(2)
        .map(|w| (grid[w[0].1] + 0.5 * step, grid[w[1].0] - 0.5 * step))
        .collect();
    let helical: Vec<bool> = counts.iter().map(|c| c[0] == 2 && c[1] == 2).collect();
    let best = runs(&helical)
        .into_iter()
        .max_by_key(|r| r.1 - r.0)
        .ok_or_else(|| {
            Error::Undefined("no frequency with exactly two branches per interface".into())
        })?;
    let probe = 0.5 * (grid[best.0] + grid[best.1]);
    let c = set.c_over_a0_thz;
    let crossings = (0..2)
        .flat_map(|i| crossings_in(&samples, tags[i], probe))
        .collect();
    Ok(EdgeSummary {
        common_gap_nu: common_gap,
        common_gap_thz: (lo * c, hi * c),
        edge_window_nu: edge,
        edge_window_thz: (edge.0 * c, edge.1 * c),
        mini_gaps_nu: mini_gaps,
        helical_window_nu: (grid[best.0] - 0.5 * step, grid[best.1] + 0.5 * step),
        probe_nu: probe,
        probe_thz: probe * c,
        crossings,
    })
}

/// Gaps of both crystals between bands 3 and 4 (1-based) and their
/// intersection, at the given discretisation.
pub fn common_gap(
    spec: &LatticeSpec,
    pwe: PweSettings,
    sampling: ZoneSampling,
) -> Result<(GapInfo, GapInfo, (f64, f64))> {
    let (shrunk, _) = bulk_gap(spec, Region::Shrunk, 2, 3, pwe, sampling)?;
    let (expanded, _) = bulk_gap(spec, Region::Expanded, 2, 3, pwe, sampling)?;
    let window = intersect(&shrunk, &expanded)
        .ok_or_else(|| Error::Undefined("the gaps of the two crystals do not overlap".into()))?;
    Ok((shrunk, expanded, window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::PweSettings;
    use crate::edge::EdgeSettings;

    fn mode(kx: f64, nu: f64, tag: InterfaceTag) -> EdgeMode {
        let s = if tag == InterfaceTag::A { 1.0 } else { -1.0 };
        EdgeMode {
            kx,
            band: 0,
            nu,
            thz: nu * 100.0,
            tag,
            nearest: tag,
            weight_a: if tag == InterfaceTag::A { 0.9 } else { 0.1 },
            loc_center_a0: 0.0,
            loc_len_a0: 1.5,
            vg: s * kx.signum(),
            spin: Some(s * kx.signum()),
        }
    }

    /// Two crossing linear branches per interface, split by a small gap at `k = 0`.
    fn toy() -> EdgeBandSet {
        let ks: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.01).collect();
        let mut modes = Vec::new();
        for &k in &ks {
            for tag in [InterfaceTag::A, InterfaceTag::B] {
                let (up, down) = (0.5 + 0.002 + k.abs(), 0.5 - 0.002 - k.abs());
                modes.push(mode(k, down, tag));
                modes.push(mode(k, up, tag));
            }
        }
        EdgeBandSet {
            kx: ks,
            modes,
            c_over_a0_thz: 100.0,
            width_a0: 10.0,
            n_rows: 12,
            settings: EdgeSettings {
                pwe: PweSettings::default(),
                ..EdgeSettings::default()
            },
        }
    }

    #[test]
    fn branches_cross_twice_per_interface() {
        let set = toy();
        let c = crossings(&set, InterfaceTag::A, 0.55);
        assert_eq!(c.len(), 2);
        assert!(c.iter().any(|x| x.vg > 0.0) && c.iter().any(|x| x.vg < 0.0));
        assert!(crossings(&set, InterfaceTag::A, 0.5).is_empty());
    }

    #[test]
    fn window_probe_and_mini_gap() {
        let s = summarize_edges(&toy(), (0.45, 0.54)).unwrap();
        assert!(
            (s.edge_window_nu.0 - 0.45).abs() < 1e-3 && (s.edge_window_nu.1 - 0.54).abs() < 1e-3
        );
        assert_eq!(s.mini_gaps_nu.len(), 1);
        let (a, b) = s.mini_gaps_nu[0];
        assert!(
            (a - 0.498).abs() < 1e-3 && (b - 0.502).abs() < 1e-3,
            "{a} {b}"
        );
        // The wider helical stretch is below the mini-gap.
        assert!(s.probe_nu < 0.498 && s.probe_nu > 0.46, "{}", s.probe_nu);
        assert_eq!(s.crossings.len(), 4);
    }

    #[test]
    fn closed_gap_rejected() {
        assert!(summarize_edges(&toy(), (0.5, 0.5)).is_err());
    }
}
