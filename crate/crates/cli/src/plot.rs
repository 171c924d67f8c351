//! Standalone SVG figures drawn from the CSV outputs. Plots never compute
//! physics: they read back what the scenario wrote, so the same CSV always
//! yields the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifest::Manifest;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dots,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub style: Style,
    /// Overrides the palette.
    pub color: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
    pub y_range: Option<(f64, f64)>,
}

/// Tick spacing of 1, 2 or 5 times a power of ten giving about `n` ticks.
fn nice_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let m = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn decimals(step: f64) -> usize {
    (-step.log10().floor()).max(0.0) as usize
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

impl Figure {
    pub fn to_svg(&self) -> Result<String> {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let Some((x0, x1)) = range(pts().map(|p| p[0])) else {
            return Err(Error::BadInput {
                path: self.title.clone().into(),
                message: "figure has no finite points".into(),
            });
        };
        let (y0, y1) = match self.y_range {
            Some(r) => r,
            None => range(pts().map(|p| p[1])).expect("x range implies points"),
        };
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            w,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );

        // Axes and ticks.
        let _ = writeln!(
            w,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (lo, hi, horizontal) in [(x0, x1, true), (y0, y1, false)] {
            let step = nice_step(hi - lo, 6.0);
            let dec = decimals(step);
            let mut t = (lo / step).ceil() * step;
            while t <= hi + 1e-9 * step {
                let label = format!("{t:.dec$}");
                let label = if label
                    .trim_start_matches('-')
                    .chars()
                    .all(|c| c == '0' || c == '.')
                {
                    label.trim_start_matches('-').to_string()
                } else {
                    label
                };
                if horizontal {
                    let x = sx(t);
                    let _ = writeln!(
                        w,
                        r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                        TOP + ph,
                        TOP + ph + 5.0,
                        TOP + ph + 18.0
                    );
                } else {
                    let y = sy(t);
                    let _ = writeln!(
                        w,
                        r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                        LEFT - 5.0,
                        LEFT - 8.0,
                        y + 4.0
                    );
                }
                t += step;
            }
        }
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.xlabel)
        );
        let _ = writeln!(
            w,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.ylabel)
        );

        let _ = writeln!(
            w,
            r#"<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath><g clip-path="url(#plot)">"#
        );
        for (i, ser) in self.series.iter().enumerate() {
            let color = ser.color.unwrap_or(PALETTE[i % PALETTE.len()]);
            match ser.style {
                Style::Line => {
                    // Non-finite points split the line.
                    for run in ser
                        .points
                        .split(|p| !(p[0].is_finite() && p[1].is_finite()))
                    {
                        if run.len() < 2 {
                            continue;
                        }
                        let d: Vec<String> = run
                            .iter()
                            .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
                            .collect();
                        let _ = writeln!(
                            w,
                            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                            d.join(" ")
                        );
                    }
                }
                Style::Dots => {
                    for p in ser
                        .points
                        .iter()
                        .filter(|p| p[0].is_finite() && p[1].is_finite())
                    {
                        let _ = writeln!(
                            w,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{color}"/>"#,
                            sx(p[0]),
                            sy(p[1])
                        );
                    }
                }
            }
        }
        let _ = writeln!(w, "</g>");

        for (i, ser) in self.series.iter().enumerate().take(16) {
            let color = ser.color.unwrap_or(PALETTE[i % PALETTE.len()]);
            let y = TOP + 10.0 + 18.0 * i as f64;
            let x = WIDTH - RIGHT + 14.0;
            let _ = writeln!(
                w,
                r#"<rect x="{x:.1}" y="{:.1}" width="14" height="4" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                y - 4.0,
                x + 20.0,
                y + 2.0,
                escape(&ser.label)
            );
        }
        let _ = writeln!(w, "</svg>");
        Ok(s)
    }
}

/// A CSV file with `#` comment lines, read as text columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| bad(path, e.to_string()))?;
        let headers = r
            .headers()
            .map_err(|e| bad(path, e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()
            .map_err(|e| bad(path, e.to_string()))?;
        if rows.is_empty() {
            return Err(Error::EmptyInput(path.to_path_buf()));
        }
        Ok(Self { headers, rows })
    }

    fn column(&self, path: &Path, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(path, format!("missing column {name}")))
    }

    /// Numeric column; empty cells become NaN.
    pub fn numbers(&self, path: &Path, name: &str) -> Result<Vec<f64>> {
        let c = self.column(path, name)?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r.get(c).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse()
                        .map_err(|_| bad(path, format!("column {name}: {cell:?} is not a number")))
                }
            })
            .collect()
    }

    pub fn text(&self, path: &Path, name: &str) -> Result<Vec<String>> {
        let c = self.column(path, name)?;
        Ok(self
            .rows
            .iter()
            .map(|r| r.get(c).cloned().unwrap_or_default())
            .collect())
    }
}

fn bad(path: &Path, message: String) -> Error {
    Error::BadInput {
        path: path.to_path_buf(),
        message,
    }
}

fn zip(x: &[f64], y: &[f64]) -> Vec<[f64; 2]> {
    x.iter().zip(y).map(|(a, b)| [*a, *b]).collect()
}

fn line(label: &str, points: Vec<[f64; 2]>) -> Series {
    Series {
        label: label.into(),
        points,
        style: Style::Line,
        color: None,
    }
}

/// Groups `(key, point)` pairs into one series per key, in key order.
fn grouped<K: Ord>(keys: Vec<K>, points: Vec<[f64; 2]>) -> BTreeMap<K, Vec<[f64; 2]>> {
    let mut out: BTreeMap<K, Vec<[f64; 2]>> = BTreeMap::new();
    for (k, p) in keys.into_iter().zip(points) {
        out.entry(k).or_default().push(p);
    }
    out
}

fn bands_figure(path: &Path, t: &Table, label: &str) -> Result<Figure> {
    let k = t.numbers(path, "k_index")?;
    let f = t.numbers(path, "freq_thz")?;
    let band: Vec<usize> = t
        .numbers(path, "band")?
        .iter()
        .map(|b| *b as usize)
        .collect();
    let series = grouped(band, zip(&k, &f))
        .into_iter()
        .map(|(b, pts)| line(&format!("band {}", b + 1), pts))
        .collect();
    Ok(Figure {
        title: format!("Bulk TE bands, {label} crystal (Γ-K-M-Γ)"),
        xlabel: "k-path sample".into(),
        ylabel: "frequency (THz)".into(),
        series,
        y_range: None,
    })
}

fn edge_figure(path: &Path, t: &Table) -> Result<Figure> {
    let k = t.numbers(path, "kx")?;
    let f = t.numbers(path, "freq_THz")?;
    let tags = t.text(path, "tag")?;
    let colors = |tag: &str| match tag {
        "A" => "#d62728",
        "B" => "#1f77b4",
        _ => "#9a9a9a",
    };
    let series = grouped(tags, zip(&k, &f))
        .into_iter()
        .map(|(tag, points)| Series {
            label: if tag == "bulk" {
                "bulk".into()
            } else {
                format!("interface {tag}")
            },
            color: Some(colors(&tag)),
            points,
            style: Style::Dots,
        })
        .collect();
    Ok(Figure {
        title: "Projected bands of the interface ribbon".into(),
        xlabel: "kx (2π/a0)".into(),
        ylabel: "frequency (THz)".into(),
        series,
        y_range: None,
    })
}

fn spectra_figure(
    path: &Path,
    t: &Table,
    title: &str,
    cols: &[&str],
    y_range: Option<(f64, f64)>,
) -> Result<Figure> {
    let f = t.numbers(path, "freq_thz")?;
    let series = cols
        .iter()
        .map(|c| Ok(line(c, zip(&f, &t.numbers(path, c)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Figure {
        title: title.into(),
        xlabel: "frequency (THz)".into(),
        ylabel: if y_range.is_some() {
            "directionality D".into()
        } else {
            "normalized power".into()
        },
        series,
        y_range,
    })
}

fn scan_figure(path: &Path, t: &Table) -> Result<Figure> {
    let off = t.numbers(path, "offset_a0")?;
    let f = t.numbers(path, "freq_thz")?;
    let tr = t.numbers(path, "t")?;
    // Offsets are written with fixed precision, so their text keys group exactly.
    let keys: Vec<(i64, String)> = off
        .iter()
        .map(|o| ((o * 1e6).round() as i64, format!("{o:+.2} a0")))
        .collect();
    let series = grouped(keys, zip(&f, &tr))
        .into_iter()
        .map(|((_, label), pts)| line(&label, pts))
        .collect();
    Ok(Figure {
        title: "Transmission to the left monitor vs source offset".into(),
        xlabel: "frequency (THz)".into(),
        ylabel: "normalized power".into(),
        series,
        y_range: None,
    })
}

fn g2_figure(path: &Path, t: &Table) -> Result<Figure> {
    let tau = t.numbers(path, "tau_ns")?;
    let g = t.numbers(path, "g2")?;
    Ok(Figure {
        title: "Second-order correlation".into(),
        xlabel: "τ (ns)".into(),
        ylabel: "g²(τ)".into(),
        series: vec![line("g2", zip(&tau, &g))],
        y_range: None,
    })
}

fn zeeman_figure(path: &Path, t: &Table) -> Result<Figure> {
    let b = t.numbers(path, "field_T")?;
    Ok(Figure {
        title: "Zeeman-split exciton lines".into(),
        xlabel: "B (T)".into(),
        ylabel: "energy (meV)".into(),
        series: vec![
            line("σ+", zip(&b, &t.numbers(path, "e_plus_meV")?)),
            line("σ−", zip(&b, &t.numbers(path, "e_minus_meV")?)),
        ],
        y_range: None,
    })
}

/// Figures for one CSV, keyed by output file name. Unrecognized CSVs give
/// no figures.
pub fn figures_for(path: &Path) -> Result<Vec<(String, Figure)>> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| bad(path, "not a file name".into()))?;
    let stem = name.trim_end_matches(".csv");
    let kind = if stem.starts_with("bands_") {
        "bands"
    } else {
        match stem {
            "edge_bands" | "bend" | "scan" | "g2" | "zeeman" => stem,
            s if s.starts_with("chirality_") => "chirality",
            _ => return Ok(Vec::new()),
        }
    };
    let t = Table::read(path)?;
    let svg = |suffix: &str| format!("{stem}{suffix}.svg");
    Ok(match kind {
        "bands" => vec![(svg(""), bands_figure(path, &t, &stem["bands_".len()..])?)],
        "edge_bands" => vec![(svg(""), edge_figure(path, &t)?)],
        "chirality" => {
            let label = &stem["chirality_".len()..];
            vec![
                (
                    svg("_power"),
                    spectra_figure(
                        path,
                        &t,
                        &format!("Power at the two ends, {label}"),
                        &["p_left", "p_right"],
                        None,
                    )?,
                ),
                (
                    svg("_d"),
                    spectra_figure(
                        path,
                        &t,
                        &format!("Directionality spectrum, {label}"),
                        &["d"],
                        Some((-1.0, 1.0)),
                    )?,
                ),
            ]
        }
        "bend" => vec![(
            svg(""),
            spectra_figure(
                path,
                &t,
                "Transmission around the bend",
                &["t_bend", "t_straight", "back_bend"],
                None,
            )?,
        )],
        "scan" => vec![(svg(""), scan_figure(path, &t)?)],
        "g2" => vec![(svg(""), g2_figure(path, &t)?)],
        "zeeman" => vec![(svg(""), zeeman_figure(path, &t)?)],
        _ => unreachable!(),
    })
}

/// Renders every figure derivable from the CSVs listed in `manifest` into
/// `dir` and returns the file names written.
pub fn emit_plots(manifest: &Manifest, dir: &Path) -> Result<Vec<String>> {
    let mut written = Vec::new();
    for rec in manifest.csv_files() {
        for (name, fig) in figures_for(&dir.join(&rec.path))? {
            let path = dir.join(&name);
            std::fs::write(&path, fig.to_svg()?)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            written.push(name);
        }
    }
    Ok(written)
}
