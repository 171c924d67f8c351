//! Text formats for photon streams, correlation histograms and Zeeman tables.

use std::io::{BufRead, Write};
use std::path::Path;

use super::g2::G2Histogram;
use super::stream::PhotonStream;
use super::zeeman::{ZeemanModel, ZeemanPair};
use crate::error::{Error, Result};

pub const EMITTER_FORMAT_VERSION: u32 = 1;

/// One timestamp (ns) per line after `#` metadata lines.
pub fn write_stream<W: Write>(s: &PhotonStream, mut out: W) -> Result<()> {
    writeln!(out, "# format_version={EMITTER_FORMAT_VERSION}")?;
    writeln!(out, "# duration_ns={:?}", s.duration_ns)?;
    writeln!(out, "# generator={}", s.generator)?;
    writeln!(out, "# seed={}", s.seed)?;
    for t in &s.timestamps_ns {
        writeln!(out, "{t:?}")?;
    }
    Ok(())
}

/// Inverse of [`write_stream`]. Without a duration header the duration is
/// taken just past the last timestamp.
pub fn read_stream<R: BufRead>(input: R) -> Result<PhotonStream> {
    let (mut duration, mut generator, mut seed) = (None, String::from("file"), 0u64);
    let mut ts = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let bad = |what: &str| Error::Format(format!("line {}: {what}", n + 1));
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                match k.trim() {
                    "duration_ns" => {
                        duration = Some(v.trim().parse().map_err(|_| bad("bad duration"))?)
                    }
                    "generator" => generator = v.trim().to_string(),
                    "seed" => seed = v.trim().parse().map_err(|_| bad("bad seed"))?,
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        ts.push(
            line.parse::<f64>()
                .map_err(|_| bad(&format!("not a timestamp: {line:?}")))?,
        );
    }
    let duration = duration.unwrap_or_else(|| ts.last().map_or(1.0, |t| t.next_up()));
    PhotonStream::new(ts, duration, generator, seed)
}

pub fn save_stream(s: &PhotonStream, path: &Path) -> Result<()> {
    write_stream(s, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn load_stream(path: &Path) -> Result<PhotonStream> {
    read_stream(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_g2_csv<W: Write>(h: &G2Histogram, mut out: W) -> Result<()> {
    writeln!(out, "# format_version={EMITTER_FORMAT_VERSION}")?;
    writeln!(out, "# bin_width_ns={:?}", h.bin_width_ns)?;
    writeln!(out, "# normalization={:?}", h.normalization)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau_ns", "g2", "raw_count"])?;
    for ((tau, g), c) in h.tau_ns().iter().zip(&h.g2).zip(&h.counts) {
        w.write_record([format!("{tau:.6}"), format!("{g:.9}"), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_g2_csv(h: &G2Histogram, path: &Path) -> Result<()> {
    write_g2_csv(h, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn save_zeeman_json(model: &ZeemanModel, lines: &[ZeemanPair], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let rows: Vec<_> = lines
        .iter()
        .map(|p| {
            serde_json::json!({
                "field_t": p.field_t,
                "plus": p.plus,
                "minus": p.minus,
                "splitting_uev": p.splitting_uev(),
                "splitting_ghz": p.splitting_ghz(),
            })
        })
        .collect();
    serde_json::to_writer_pretty(
        &mut f,
        &serde_json::json!({
            "format_version": EMITTER_FORMAT_VERSION,
            "model": model,
            "lines": rows,
        }),
    )?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emitter::{g2_estimate, simulate_stream, StreamKind};

    #[test]
    fn stream_round_trip_is_exact() {
        let s = simulate_stream(StreamKind::Poisson { rate: 0.3 }, 500.0, 4).unwrap();
        let mut buf = Vec::new();
        write_stream(&s, &mut buf).unwrap();
        assert_eq!(read_stream(&buf[..]).unwrap(), s);
    }

    #[test]
    fn bare_timestamp_file() {
        let s = read_stream("1.5\n\n2.25\n".as_bytes()).unwrap();
        assert_eq!(s.timestamps_ns, vec![1.5, 2.25]);
        assert!(s.duration_ns > 2.25);
        let e = read_stream("1.0\nx\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn g2_csv_columns() {
        let s = simulate_stream(StreamKind::Poisson { rate: 1.0 }, 100.0, 1).unwrap();
        let h = g2_estimate(&s, &s, 1.0, 10.0).unwrap();
        let mut buf = Vec::new();
        write_g2_csv(&h, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[3], "tau_ns,g2,raw_count");
        assert_eq!(lines.len(), 4 + h.g2.len());
        assert!(lines[4].starts_with("-10.000000,"));
    }
}
