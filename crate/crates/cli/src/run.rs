//! Runs one configured scenario and writes its outputs and manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use helix_core::bands::io::save_bands_csv;
use helix_core::bands::{
    calibrate_neff, classify_parity, dirac_point, find_gap, intersect, solve_bands, Calibration,
    KPath, PweSettings, ZoneSampling,
};
use helix_core::edge::{
    build_supercell, common_gap, kx_grid, save_edge_csv, save_edge_summary, solve_projected_bands,
    summarize_edges,
};
use helix_core::emitter::{
    beamsplitter, branch_routing_table, g2_estimate, save_g2_csv, save_stream, save_zeeman_json,
    simulate_stream, zeeman_table, StreamKind, ZeemanPair,
};
use helix_core::geometry::{LatticeSpec, Region};
use helix_fdtd::scenarios::{bend_transmission, chirality_directionality, position_scan, um_to_a0};
use helix_fdtd::{io as fio, Polarization};

use crate::config::{
    BandsConfig, BendConfig, ChiralityConfig, EdgeConfig, G2Config, IndexSource, ScanConfig,
    Scenario, ScenarioConfig, ZeemanConfig,
};
use crate::error::{Context, Error, Result, Violation};
use crate::manifest::Manifest;
use crate::plot::emit_plots;

/// Format version of `summary.json` and `config.resolved.json`.
pub const SUMMARY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub plots: bool,
}

impl RunRequest {
    /// Output directory and seed from the config, with optional overrides.
    pub fn from_config(
        cfg: &ScenarioConfig,
        out: Option<PathBuf>,
        seed: Option<u64>,
        plots: bool,
    ) -> Self {
        Self {
            out_dir: out.unwrap_or_else(|| cfg.output.directory.clone()),
            seed: seed.unwrap_or(cfg.seed),
            plots: plots || cfg.output.svg,
        }
    }
}

/// Files written so far, in order.
struct Outputs<'a> {
    dir: &'a Path,
    csv: bool,
    json: bool,
    names: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

fn resolve_spec(cfg: &ScenarioConfig, kind: &str) -> Result<(LatticeSpec, Option<Calibration>)> {
    let mut spec = cfg.lattice.spec;
    match cfg.lattice.index {
        IndexSource::Fixed { n_eff } => {
            spec.n_eff = n_eff;
            Ok((spec, None))
        }
        IndexSource::Calibrate { target_thz, gmax } => {
            let pwe = PweSettings {
                gmax,
                ..PweSettings::default()
            };
            let cal = calibrate_neff(&spec, target_thz, pwe).within(kind)?;
            spec.n_eff = cal.n_eff;
            Ok((spec, Some(cal)))
        }
    }
}

/// Runs the scenario, writes every output and the manifest, and returns
/// the manifest.
pub fn run_scenario(cfg: &ScenarioConfig, config_text: &str, req: &RunRequest) -> Result<Manifest> {
    if req.plots && !cfg.output.csv {
        return Err(Error::Config(vec![Violation {
            line: None,
            key: "output.formats".into(),
            message: "plots are drawn from the CSV files; enable \"csv\"".into(),
        }]));
    }
    let kind = cfg.scenario.kind();
    let dir = req.out_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let (spec, calibration) = resolve_spec(cfg, kind)?;
    let c = spec.frequency_scale().c_over_a0_thz;
    let mut out = Outputs {
        dir,
        csv: cfg.output.csv,
        json: cfg.output.json,
        names: Vec::new(),
    };

    let summary = match &cfg.scenario {
        Scenario::Bands(b) => bands(&spec, b, &mut out)?,
        Scenario::Edge(e) => edge(&spec, e, &mut out)?,
        Scenario::Chirality(ch) => chirality(&spec, ch, &mut out)?,
        Scenario::Bend(b) => bend(&spec, b, &mut out)?,
        Scenario::PositionScan(s) => scan(&spec, s, &mut out)?,
        Scenario::G2(g) => g2(g, req.seed, &mut out)?,
        Scenario::Zeeman(z) => zeeman(z, &mut out)?,
    };
    if out.json {
        out.json(
            "summary.json",
            &json!({
                "format_version": SUMMARY_FORMAT_VERSION,
                "scenario": kind,
                "c_over_a0_thz": c,
                "n_eff": spec.n_eff,
                "calibration": calibration,
                "seed": req.seed,
                "results": summary,
            }),
        )?;
        out.json(
            "config.resolved.json",
            &json!({ "format_version": SUMMARY_FORMAT_VERSION, "config": cfg }),
        )?;
    }

    let mut manifest = Manifest::new(kind, config_text, req.seed, c);
    for name in &out.names {
        manifest.record(dir, name)?;
    }
    if req.plots {
        for name in emit_plots(&manifest, dir)? {
            manifest.record(dir, &name)?;
        }
    }
    manifest.save(dir)?;
    Ok(manifest)
}

fn bands(spec: &LatticeSpec, cfg: &BandsConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let kind = "bands";
    let path = KPath::hexagonal(cfg.samples_per_segment).within(kind)?;
    let mut per_region = serde_json::Map::new();
    let mut gaps = Vec::new();
    for &region in &cfg.regions {
        let set = solve_bands(spec, region, &path, cfg.nbands, cfg.pwe).within(kind)?;
        if out.csv {
            save_bands_csv(&set, &out.path(&format!("bands_{}.csv", region.name())))
                .within(kind)?;
        }
        let gamma: Vec<f64> = set.points[0]
            .nu
            .iter()
            .map(|nu| nu * set.c_over_a0_thz)
            .collect();
        let mut entry = json!({
            "gamma_thz": gamma,
            "band_ranges_nu": (0..set.nbands).map(|b| set.band_range(b)).collect::<Vec<_>>(),
        });
        if region == Region::Pristine {
            entry["dirac"] = json!(dirac_point(spec, cfg.pwe).within(kind)?);
        } else {
            let gap = find_gap(&set, 2, 3).within(kind)?;
            entry["gap_on_path"] = json!(gap);
            gaps.push(gap);
            entry["parity"] = match classify_parity(spec, region, cfg.pwe) {
                Ok(p) => json!(p),
                Err(e) => json!({ "inconclusive": e.to_string() }),
            };
        }
        per_region.insert(region.name().into(), entry);
    }
    let overlap = match gaps.as_slice() {
        [a, b] => intersect(a, b),
        _ => None,
    };
    Ok(json!({ "regions": per_region, "gap_overlap_nu": overlap }))
}

fn edge(spec: &LatticeSpec, cfg: &EdgeConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let kind = "edge";
    let (shrunk, expanded, window) =
        common_gap(spec, cfg.settings.pwe, ZoneSampling::default()).within(kind)?;
    let cell = build_supercell(spec, cfg.n_shrunk, cfg.n_expanded).within(kind)?;
    let set = solve_projected_bands(&cell, &kx_grid(cfg.kx_max, cfg.kx_steps), &cfg.settings)
        .within(kind)?;
    let summary = summarize_edges(&set, window).within(kind)?;
    if out.csv {
        save_edge_csv(&set, &out.path("edge_bands.csv")).within(kind)?;
    }
    if out.json {
        save_edge_summary(&summary, &out.path("edge_summary.json")).within(kind)?;
    }
    Ok(json!({
        "shrunk_gap": shrunk,
        "expanded_gap": expanded,
        "common_gap_nu": window,
        "edge_window_nu": summary.edge_window_nu,
        "helical_window_nu": summary.helical_window_nu,
        "probe_nu": summary.probe_nu,
    }))
}

fn pol_file_label(p: &Polarization) -> String {
    match p {
        Polarization::Circular { .. } => p.label().replace('+', "_plus").replace('-', "_minus"),
        Polarization::Linear { .. } => "linear".into(),
    }
}

fn chirality(
    spec: &LatticeSpec,
    cfg: &ChiralityConfig,
    out: &mut Outputs,
) -> Result<serde_json::Value> {
    let kind = "chirality";
    let mut rows = Vec::new();
    for pol in &cfg.polarizations {
        let d =
            chirality_directionality(spec, *pol, cfg.position_a0, &cfg.transport).within(kind)?;
        if out.csv {
            fio::save_directionality_csv(
                &d,
                &out.path(&format!("chirality_{}.csv", pol_file_label(pol))),
            )
            .within(kind)?;
        }
        rows.push(json!({
            "polarization": pol.label(),
            "band_average_d": d.band_average,
            "band_nu": [d.band.lo, d.band.hi],
            "snap_offset_a0": d.meta.snap_offset_a0,
            "warnings": d.meta.warnings,
        }));
    }
    Ok(json!({ "position_a0": cfg.position_a0, "runs": rows }))
}

fn bend(spec: &LatticeSpec, cfg: &BendConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let kind = "bend";
    let b = bend_transmission(spec, cfg.polarization, &cfg.transport, cfg.control).within(kind)?;
    if out.csv {
        fio::save_bend_csv(&b, &out.path("bend.csv")).within(kind)?;
    }
    Ok(json!({
        "polarization": cfg.polarization.label(),
        "control": cfg.control,
        "band_nu": [b.band.lo, b.band.hi],
        "band_ratio": b.band_ratio,
        "backscatter": b.backscatter,
    }))
}

fn scan(spec: &LatticeSpec, cfg: &ScanConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let kind = "position_scan";
    let offsets: Vec<f64> = cfg
        .offsets_um
        .iter()
        .map(|u| um_to_a0(*u, spec.a0_nm))
        .collect();
    let s = position_scan(spec, &offsets, &cfg.transport).within(kind)?;
    if out.csv {
        fio::save_scan_csv(
            &s,
            spec.frequency_scale().c_over_a0_thz,
            &out.path("scan.csv"),
        )
        .within(kind)?;
    }
    let points: Vec<_> = cfg
        .offsets_um
        .iter()
        .zip(&s.points)
        .map(|(um, p)| json!({ "offset_um": um, "offset_a0": p.offset, "band_mean": p.band_mean, "relative": p.relative }))
        .collect();
    Ok(json!({ "band_nu": [s.band.lo, s.band.hi], "points": points }))
}

/// Seed of the second detector stream, derived so that it never equals the
/// first.
fn second_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

fn g2(cfg: &G2Config, seed: u64, out: &mut Outputs) -> Result<serde_json::Value> {
    let kind = "g2";
    let (a, b) = match cfg.source {
        StreamKind::Poisson { .. } => (
            simulate_stream(cfg.source, cfg.duration_ns, seed).within(kind)?,
            simulate_stream(cfg.source, cfg.duration_ns, second_seed(seed)).within(kind)?,
        ),
        StreamKind::SingleEmitter { .. } => {
            let s = simulate_stream(cfg.source, cfg.duration_ns, seed).within(kind)?;
            beamsplitter(&s, second_seed(seed))
        }
    };
    let h = g2_estimate(&a, &b, cfg.bin_width_ns, cfg.window_ns).within(kind)?;
    if out.csv {
        save_g2_csv(&h, &out.path("g2.csv")).within(kind)?;
    }
    if cfg.save_streams {
        save_stream(&a, &out.path("stream_a.txt")).within(kind)?;
        save_stream(&b, &out.path("stream_b.txt")).within(kind)?;
    }
    let mean = h.g2.iter().sum::<f64>() / h.g2.len() as f64;
    Ok(json!({
        "source": cfg.source,
        "clicks": [a.len(), b.len()],
        "g2_zero": h.at_zero(),
        "g2_mean": mean,
        "normalization": h.normalization,
    }))
}

fn write_zeeman_csv(table: &[ZeemanPair], path: &Path) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# format_version={SUMMARY_FORMAT_VERSION}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record([
        "field_T",
        "e_plus_meV",
        "e_minus_meV",
        "splitting_ueV",
        "splitting_GHz",
    ])?;
    for p in table {
        w.write_record([
            format!("{:.6}", p.field_t),
            format!("{:.9}", p.plus.energy_mev),
            format!("{:.9}", p.minus.energy_mev),
            format!("{:.6}", p.splitting_uev()),
            format!("{:.6}", p.splitting_ghz()),
        ])?;
    }
    w.flush()
}

fn zeeman(cfg: &ZeemanConfig, out: &mut Outputs) -> Result<serde_json::Value> {
    let kind = "zeeman";
    let table = zeeman_table(&cfg.model, &cfg.fields_t).within(kind)?;
    if out.csv {
        let path = out.path("zeeman.csv");
        write_zeeman_csv(&table, &path).map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    if out.json {
        save_zeeman_json(&cfg.model, &table, &out.path("zeeman.json")).within(kind)?;
    }
    let routing: Vec<_> = cfg
        .fields_t
        .iter()
        .map(
            |&b| match branch_routing_table(&cfg.model, b, cfg.resolution_ghz, cfg.convention) {
                Ok(t) => json!({ "field_t": b, "table": t }),
                Err(e) => json!({ "field_t": b, "unresolved": e.to_string() }),
            },
        )
        .collect();
    Ok(json!({ "model": cfg.model, "resolution_ghz": cfg.resolution_ghz, "routing": routing }))
}
