//! CSV and JSON export of projected bands.

use std::io::Write;
use std::path::Path;

use super::projected::EdgeBandSet;
use super::summary::EdgeSummary;
use crate::error::Result;

pub const EDGE_FORMAT_VERSION: u32 = 1;

/// One row per (k_x, mode); `S` is empty where the texture is undefined.
pub fn write_edge_csv<W: Write>(set: &EdgeBandSet, mut out: W) -> Result<()> {
    writeln!(out, "# format_version={EDGE_FORMAT_VERSION}")?;
    writeln!(out, "# c_over_a0_thz={:.9}", set.c_over_a0_thz)?;
    writeln!(out, "# rows={} width_a0={:.6}", set.n_rows, set.width_a0)?;
    writeln!(
        out,
        "# gmax={} rule={:?}",
        set.settings.pwe.gmax, set.settings.pwe.rule
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "kx",
        "band",
        "nu",
        "freq_THz",
        "tag",
        "loc_len_a0",
        "vg",
        "S",
    ])?;
    for m in &set.modes {
        w.write_record([
            format!("{:.9}", m.kx),
            m.band.to_string(),
            format!("{:.9}", m.nu),
            format!("{:.6}", m.thz),
            m.tag.name().to_string(),
            format!("{:.6}", m.loc_len_a0),
            format!("{:.6}", m.vg),
            m.spin.map_or(String::new(), |s| format!("{s:.6}")),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_edge_csv(set: &EdgeBandSet, path: &Path) -> Result<()> {
    write_edge_csv(set, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn save_edge_summary(summary: &EdgeSummary, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(
        &mut f,
        &serde_json::json!({ "format_version": EDGE_FORMAT_VERSION, "summary": summary }),
    )?;
    writeln!(f)?;
    Ok(())
}
