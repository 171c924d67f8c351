//! CSV spectra, JSON metadata and binary field snapshots.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::engine::{SimResult, SIM_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::scenarios::{BendTransmission, Directionality, PositionScan};

/// Writes `nu, freq_thz` followed by one column per named series.
pub fn write_spectra_csv<W: Write>(
    freqs_nu: &[f64],
    c_over_a0_thz: f64,
    columns: &[(&str, &[f64])],
    mut out: W,
) -> Result<()> {
    if let Some((name, _)) = columns.iter().find(|(_, v)| v.len() != freqs_nu.len()) {
        return Err(Error::InvalidSetup(format!(
            "column {name} does not match the frequency list"
        )));
    }
    writeln!(out, "# format_version={SIM_FORMAT_VERSION}")?;
    writeln!(out, "# c_over_a0_thz={c_over_a0_thz:.9}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["nu", "freq_thz"];
    header.extend(columns.iter().map(|(n, _)| *n));
    w.write_record(&header)?;
    for (k, nu) in freqs_nu.iter().enumerate() {
        let mut row = vec![format!("{nu:.6}"), format!("{:.6}", nu * c_over_a0_thz)];
        row.extend(columns.iter().map(|(_, v)| format!("{:.9e}", v[k])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// Raw monitor powers of one run.
pub fn save_monitor_csv(res: &SimResult, path: &Path) -> Result<()> {
    let Some(first) = res.monitors.first() else {
        return Err(Error::InvalidSetup("run has no monitors".into()));
    };
    let cols: Vec<(&str, &[f64])> = res
        .monitors
        .iter()
        .map(|m| (m.name.as_str(), m.power.as_slice()))
        .collect();
    write_spectra_csv(
        &first.freqs_nu,
        res.meta.c_over_a0_thz,
        &cols,
        create(path)?,
    )
}

pub fn save_directionality_csv(d: &Directionality, path: &Path) -> Result<()> {
    write_spectra_csv(
        &d.freqs_nu,
        d.meta.c_over_a0_thz,
        &[("p_left", &d.left), ("p_right", &d.right), ("d", &d.d)],
        create(path)?,
    )
}

pub fn save_bend_csv(b: &BendTransmission, path: &Path) -> Result<()> {
    write_spectra_csv(
        &b.freqs_nu,
        b.meta_bend.c_over_a0_thz,
        &[
            ("t_bend", &b.t_bend),
            ("t_straight", &b.t_straight),
            ("ratio", &b.ratio),
            ("back_bend", &b.back_bend),
            ("back_straight", &b.back_straight),
        ],
        create(path)?,
    )
}

/// One row per (offset, frequency).
pub fn write_scan_csv<W: Write>(scan: &PositionScan, c_over_a0_thz: f64, mut out: W) -> Result<()> {
    writeln!(out, "# format_version={SIM_FORMAT_VERSION}")?;
    writeln!(out, "# c_over_a0_thz={c_over_a0_thz:.9}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["offset_a0", "nu", "freq_thz", "t"])?;
    for p in &scan.points {
        for (nu, t) in scan.freqs_nu.iter().zip(&p.t) {
            w.write_record([
                format!("{:.6}", p.offset),
                format!("{nu:.6}"),
                format!("{:.6}", nu * c_over_a0_thz),
                format!("{t:.9e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_scan_csv(scan: &PositionScan, c_over_a0_thz: f64, path: &Path) -> Result<()> {
    write_scan_csv(scan, c_over_a0_thz, create(path)?)
}

/// Any serializable record wrapped with the format version.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(
        &mut f,
        &serde_json::json!({ "format_version": SIM_FORMAT_VERSION, "data": value }),
    )?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Final `Hz` field in the permittivity-map binary format.
pub fn save_snapshot(res: &SimResult, path: &Path) -> Result<()> {
    let snap = res
        .snapshot
        .as_ref()
        .ok_or_else(|| Error::InvalidSetup("run recorded no snapshot".into()))?;
    snap.write_binary(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectra_layout() {
        let mut buf = Vec::new();
        write_spectra_csv(
            &[0.5, 0.6],
            100.0,
            &[("a", &[1.0, 2.0]), ("b", &[3.0, 4.0])],
            &mut buf,
        )
        .unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], format!("# format_version={SIM_FORMAT_VERSION}"));
        assert_eq!(lines[2], "nu,freq_thz,a,b");
        assert!(lines[3].starts_with("0.500000,50.000000,1.0"));
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn ragged_columns_rejected() {
        let r = write_spectra_csv(&[0.5, 0.6], 1.0, &[("a", &[1.0])], Vec::new());
        assert!(r.is_err());
    }
}
