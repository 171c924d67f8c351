//! CSV and JSON export of band data.

use std::io::Write;
use std::path::Path;

use super::gap::GapInfo;
use super::solve::BandSet;
use crate::error::Result;

pub const BANDS_FORMAT_VERSION: u32 = 1;

/// Writes one row per (k sample, band) preceded by `#` header comments that
/// carry the format version and the frequency conversion.
pub fn write_bands_csv<W: Write>(bands: &BandSet, mut out: W) -> Result<()> {
    writeln!(out, "# format_version={BANDS_FORMAT_VERSION}")?;
    writeln!(out, "# label={}", bands.label)?;
    writeln!(out, "# c_over_a0_thz={:.9}", bands.c_over_a0_thz)?;
    writeln!(
        out,
        "# gmax={} rule={:?}",
        bands.settings.gmax, bands.settings.rule
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["segment", "k_index", "kx", "ky", "band", "nu", "freq_thz"])?;
    for p in &bands.points {
        for (b, nu) in p.nu.iter().enumerate() {
            w.write_record([
                p.segment.clone(),
                p.k_index.to_string(),
                format!("{:.9}", p.k.kx),
                format!("{:.9}", p.k.ky),
                b.to_string(),
                format!("{nu:.9}"),
                format!("{:.6}", nu * bands.c_over_a0_thz),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_bands_csv(bands: &BandSet, path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_bands_csv(bands, f)
}

pub fn save_gap_json(gap: &GapInfo, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(
        &mut f,
        &serde_json::json!({ "format_version": BANDS_FORMAT_VERSION, "gap": gap }),
    )?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::solve::{BandPoint, PweSettings};
    use crate::bands::BlochVector;

    #[test]
    fn csv_layout() {
        let b = BandSet {
            label: "pristine".into(),
            c_over_a0_thz: 673.69,
            nbands: 2,
            settings: PweSettings::default(),
            points: vec![BandPoint {
                segment: "G-K".into(),
                k_index: 0,
                k: BlochVector::GAMMA,
                nu: vec![0.0, 0.25],
                basis_size: 10,
            }],
        };
        let mut buf = Vec::new();
        write_bands_csv(&b, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# format_version=1");
        assert!(lines[2].starts_with("# c_over_a0_thz=673.69"));
        assert_eq!(lines[4], "segment,k_index,kx,ky,band,nu,freq_thz");
        assert_eq!(
            lines[6],
            "G-K,0,0.000000000,0.000000000,1,0.250000000,168.422500"
        );
    }
}
