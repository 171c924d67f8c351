//! Strict TOML scenario configuration.
//!
//! Every section and key is checked against the schema; unknown keys,
//! sections belonging to another scenario, wrong types and out-of-range
//! values are all collected and reported together with their line numbers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml_edit::{Document, Item, TableLike};

use helix_core::bands::{PweSettings, DEVICE_NEFF};
use helix_core::edge::EdgeSettings;
use helix_core::emitter::{
    ChiralityConvention, StreamKind, ZeemanModel, DEFAULT_E0_MEV, DEFAULT_G_FACTOR,
};
use helix_core::geometry::{
    build_unit_cell, InverseRule, LatticeSpec, Orientation, RadiusSet, Region,
};
use helix_fdtd::scenarios::{freq_grid, Band, TransportConfig};
use helix_fdtd::{PmlParams, Polarization, SimConfig};

use crate::error::{Error, Result, Violation};

/// Where the background index comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IndexSource {
    Fixed {
        n_eff: f64,
    },
    /// Bisect `n_eff` until the pristine Dirac point sits at `target_thz`.
    Calibrate {
        target_thz: f64,
        gmax: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeConfig {
    /// With [`IndexSource::Calibrate`] the `n_eff` here is a placeholder
    /// replaced at run time.
    pub spec: LatticeSpec,
    pub index: IndexSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandsConfig {
    pub regions: Vec<Region>,
    pub samples_per_segment: usize,
    pub nbands: usize,
    pub pwe: PweSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeConfig {
    pub n_shrunk: usize,
    pub n_expanded: usize,
    /// Largest |k_x|, units of 2π/a0.
    pub kx_max: f64,
    /// Samples on each side of `k_x = 0`.
    pub kx_steps: usize,
    pub settings: EdgeSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiralityConfig {
    pub polarizations: Vec<Polarization>,
    pub position_a0: [f64; 2],
    pub transport: TransportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BendConfig {
    pub polarization: Polarization,
    /// Replace the bend by a straight guide (the ratio must then be one).
    pub control: bool,
    pub transport: TransportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub offsets_um: Vec<f64>,
    pub transport: TransportConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Config {
    pub source: StreamKind,
    pub duration_ns: f64,
    pub bin_width_ns: f64,
    pub window_ns: f64,
    pub save_streams: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeemanConfig {
    pub model: ZeemanModel,
    pub fields_t: Vec<f64>,
    pub resolution_ghz: f64,
    pub convention: ChiralityConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Bands(BandsConfig),
    Edge(EdgeConfig),
    Chirality(ChiralityConfig),
    Bend(BendConfig),
    PositionScan(ScanConfig),
    G2(G2Config),
    Zeeman(ZeemanConfig),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Bands(_) => "bands",
            Scenario::Edge(_) => "edge",
            Scenario::Chirality(_) => "chirality",
            Scenario::Bend(_) => "bend",
            Scenario::PositionScan(_) => "position_scan",
            Scenario::G2(_) => "g2",
            Scenario::Zeeman(_) => "zeeman",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub lattice: LatticeConfig,
    pub seed: u64,
    pub scenario: Scenario,
    pub output: OutputConfig,
}

pub const SCENARIO_KINDS: [&str; 7] = [
    "bands",
    "edge",
    "chirality",
    "bend",
    "position_scan",
    "g2",
    "zeeman",
];

const SHARED_SECTIONS: [&str; 3] = ["lattice", "scenario", "output"];
const OPTIONAL_SECTIONS: [&str; 9] = [
    "bands",
    "edge",
    "chirality",
    "bend",
    "position_scan",
    "g2",
    "zeeman",
    "fdtd",
    "transport",
];

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigRead {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text)
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

#[derive(Debug, Clone, Copy)]
enum Rule {
    Positive,
    NonNegative,
    Finite,
    /// Strictly inside `(lo, hi)`.
    Open(f64, f64),
    /// Inside `[lo, hi]`.
    Closed(f64, f64),
}

impl Rule {
    fn check(self, v: f64) -> Option<String> {
        let ok = match self {
            Rule::Positive => v > 0.0 && v.is_finite(),
            Rule::NonNegative => v >= 0.0 && v.is_finite(),
            Rule::Finite => v.is_finite(),
            Rule::Open(lo, hi) => v > lo && v < hi,
            Rule::Closed(lo, hi) => v >= lo && v <= hi,
        };
        (!ok).then(|| match self {
            Rule::Positive => format!("must be positive (got {v})"),
            Rule::NonNegative => format!("must not be negative (got {v})"),
            Rule::Finite => format!("must be finite (got {v})"),
            Rule::Open(lo, hi) => format!("must lie strictly between {lo} and {hi} (got {v})"),
            Rule::Closed(lo, hi) => format!("must lie in [{lo}, {hi}] (got {v})"),
        })
    }
}

struct Entry {
    item: Item,
    line: Option<usize>,
}

/// Keys of one section, consumed as the schema reads them; what remains at
/// the end is unknown.
struct Section {
    name: String,
    line: Option<usize>,
    entries: BTreeMap<String, Entry>,
    errs: Vec<Violation>,
}

impl Section {
    fn new(name: &str, table: Option<&dyn TableLike>, line: Option<usize>, src: &str) -> Self {
        let mut entries = BTreeMap::new();
        if let Some(t) = table {
            for (k, _) in t.iter() {
                let (key, item) = t.get_key_value(k).expect("key listed by iter");
                let span = key.span().or_else(|| item.span());
                entries.insert(
                    k.to_string(),
                    Entry {
                        item: item.clone(),
                        line: span.map(|s| line_of(src, s.start)),
                    },
                );
            }
        }
        Self {
            name: name.into(),
            line,
            entries,
            errs: Vec::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn fail(&mut self, key: &str, line: Option<usize>, message: String) {
        self.errs.push(Violation {
            line,
            key: self.path(key),
            message,
        });
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|e| e.line).or(self.line)
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn number(&mut self, key: &str, rule: Rule) -> Option<f64> {
        let e = self.take(key)?;
        let v = e
            .item
            .as_float()
            .or_else(|| e.item.as_integer().map(|i| i as f64));
        match v {
            None => {
                self.fail(key, e.line, "expected a number".into());
                None
            }
            Some(v) => {
                if let Some(m) = rule.check(v) {
                    self.fail(key, e.line, m);
                }
                Some(v)
            }
        }
    }

    fn f64(&mut self, key: &str, default: f64, rule: Rule) -> f64 {
        self.number(key, rule).unwrap_or(default)
    }

    fn int(&mut self, key: &str, default: u64, min: u64) -> u64 {
        let Some(e) = self.take(key) else {
            return default;
        };
        match e.item.as_integer() {
            Some(i) if i >= 0 && i as u64 >= min => i as u64,
            Some(i) => {
                self.fail(
                    key,
                    e.line,
                    format!("must be an integer >= {min} (got {i})"),
                );
                default
            }
            None => {
                self.fail(key, e.line, "expected an integer".into());
                default
            }
        }
    }

    fn count(&mut self, key: &str, default: usize, min: usize) -> usize {
        self.int(key, default as u64, min as u64) as usize
    }

    fn bool(&mut self, key: &str, default: bool) -> bool {
        let Some(e) = self.take(key) else {
            return default;
        };
        e.item.as_bool().unwrap_or_else(|| {
            self.fail(key, e.line, "expected true or false".into());
            default
        })
    }

    fn string(&mut self, key: &str) -> Option<(String, Option<usize>)> {
        let e = self.take(key)?;
        match e.item.as_str() {
            Some(s) => Some((s.to_string(), e.line)),
            None => {
                self.fail(key, e.line, "expected a string".into());
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> T {
        let Some((s, line)) = self.string(key) else {
            return default;
        };
        match options.iter().find(|(n, _)| *n == s) {
            Some((_, v)) => *v,
            None => {
                self.fail(
                    key,
                    line,
                    format!("unknown value {s:?}; expected {}", names(options)),
                );
                default
            }
        }
    }

    fn array(&mut self, key: &str) -> Option<(Vec<toml_edit::Value>, Option<usize>)> {
        let e = self.take(key)?;
        match e.item.as_array() {
            Some(a) => Some((a.iter().cloned().collect(), e.line)),
            None => {
                self.fail(key, e.line, "expected an array".into());
                None
            }
        }
    }

    fn f64_list(
        &mut self,
        key: &str,
        default: Vec<f64>,
        rule: Rule,
        len: Option<usize>,
    ) -> Vec<f64> {
        let Some((vals, line)) = self.array(key) else {
            return default;
        };
        let mut out = Vec::with_capacity(vals.len());
        for v in &vals {
            match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
                Some(x) => {
                    if let Some(m) = rule.check(x) {
                        self.fail(key, line, m);
                    }
                    out.push(x);
                }
                None => {
                    self.fail(key, line, "expected an array of numbers".into());
                    return default;
                }
            }
        }
        match len {
            Some(n) if out.len() != n => {
                self.fail(key, line, format!("expected {n} values, got {}", out.len()));
                default
            }
            None if out.is_empty() => {
                self.fail(key, line, "must not be empty".into());
                default
            }
            _ => out,
        }
    }

    fn choice_list<T: Copy>(
        &mut self,
        key: &str,
        default: Vec<T>,
        options: &[(&str, T)],
    ) -> Vec<T> {
        let Some((vals, line)) = self.array(key) else {
            return default;
        };
        let mut out = Vec::with_capacity(vals.len());
        for v in &vals {
            match v
                .as_str()
                .and_then(|s| options.iter().find(|(n, _)| *n == s))
            {
                Some((_, t)) => out.push(*t),
                None => {
                    self.fail(
                        key,
                        line,
                        format!(
                            "unknown entry {}; expected {}",
                            v.as_str()
                                .map_or("(not a string)".into(), |s| format!("{s:?}")),
                            names(options)
                        ),
                    );
                    return default;
                }
            }
        }
        if out.is_empty() {
            self.fail(key, line, "must not be empty".into());
            return default;
        }
        out
    }

    /// Rejects `key` with a reason if present.
    fn forbid(&mut self, key: &str, reason: &str) {
        if let Some(e) = self.take(key) {
            self.fail(key, e.line, reason.into());
        }
    }

    fn finish(mut self) -> Vec<Violation> {
        let left: Vec<(String, Option<usize>)> = self
            .entries
            .iter()
            .map(|(k, e)| (k.clone(), e.line))
            .collect();
        for (k, line) in left {
            self.fail(&k, line, "unknown key".into());
        }
        self.errs
    }
}

fn names<T>(options: &[(&str, T)]) -> String {
    options
        .iter()
        .map(|(n, _)| format!("{n:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

const REGIONS: [(&str, Region); 3] = [
    ("pristine", Region::Pristine),
    ("shrunk", Region::Shrunk),
    ("expanded", Region::Expanded),
];

const RULES: [(&str, InverseRule); 3] = [
    ("smoothed", InverseRule::Smoothed),
    ("ho", InverseRule::Ho),
    ("direct", InverseRule::Direct),
];

#[derive(Clone, Copy)]
enum PolKey {
    Plus,
    Minus,
    Linear,
}

const POLARIZATIONS: [(&str, PolKey); 3] = [
    ("sigma+", PolKey::Plus),
    ("sigma-", PolKey::Minus),
    ("linear", PolKey::Linear),
];

fn polarization(k: PolKey, linear_angle_deg: f64) -> Polarization {
    match k {
        PolKey::Plus => Polarization::SIGMA_PLUS,
        PolKey::Minus => Polarization::SIGMA_MINUS,
        PolKey::Linear => Polarization::Linear {
            angle: linear_angle_deg.to_radians(),
        },
    }
}

/// Parses and validates a configuration document.
pub fn parse_str(src: &str) -> Result<ScenarioConfig> {
    let doc = Document::parse(src).map_err(|e| {
        Error::Config(vec![Violation {
            line: e.span().map(|s| line_of(src, s.start)),
            key: "syntax".into(),
            message: e.message().trim().to_string(),
        }])
    })?;
    let root = doc.as_table();
    let mut errs = Vec::new();

    // Sections present in the document.
    let mut present: BTreeMap<String, Section> = BTreeMap::new();
    for (name, item) in root.iter() {
        let line = root
            .get_key_value(name)
            .and_then(|(k, i)| k.span().or_else(|| i.span()))
            .map(|s| line_of(src, s.start));
        match item.as_table_like() {
            Some(t) => {
                present.insert(name.to_string(), Section::new(name, Some(t), line, src));
            }
            None => errs.push(Violation {
                line,
                key: name.to_string(),
                message: "top-level keys are not allowed; use a [section]".into(),
            }),
        }
    }
    let mut section = |name: &str| -> Section {
        present
            .remove(name)
            .unwrap_or_else(|| Section::new(name, None, None, src))
    };

    let mut sc = section("scenario");
    let kind = match sc.string("kind") {
        Some((k, line)) if SCENARIO_KINDS.contains(&k.as_str()) => Some((k, line)),
        Some((k, line)) => {
            sc.fail(
                "kind",
                line,
                format!(
                    "unknown scenario {k:?}; expected one of {}",
                    SCENARIO_KINDS.join(", ")
                ),
            );
            None
        }
        None => {
            if !sc.errs.iter().any(|v| v.key == "scenario.kind") {
                sc.fail("kind", sc.line, "required".into());
            }
            None
        }
    };
    let seed = sc.int("seed", 0, 0);
    errs.extend(sc.finish());

    let lattice = parse_lattice(section("lattice"), &mut errs);
    let output = parse_output(section("output"), &mut errs);

    let scenario = kind.as_ref().map(|(k, _)| {
        let mut take = |n: &str| section(n);
        match k.as_str() {
            "bands" => Scenario::Bands(parse_bands(take("bands"), &mut errs)),
            "edge" => Scenario::Edge(parse_edge(take("edge"), &mut errs)),
            "chirality" => {
                let t = parse_transport(take("fdtd"), take("transport"), &mut errs);
                Scenario::Chirality(parse_chirality(take("chirality"), t, &mut errs))
            }
            "bend" => {
                let t = parse_transport(take("fdtd"), take("transport"), &mut errs);
                Scenario::Bend(parse_bend(take("bend"), t, &mut errs))
            }
            "position_scan" => {
                let t = parse_transport(take("fdtd"), take("transport"), &mut errs);
                Scenario::PositionScan(parse_scan(take("position_scan"), t, &mut errs))
            }
            "g2" => Scenario::G2(parse_g2(take("g2"), &mut errs)),
            "zeeman" => Scenario::Zeeman(parse_zeeman(take("zeeman"), &mut errs)),
            _ => unreachable!("kind checked above"),
        }
    });

    // Whatever is left was not consumed by the chosen scenario.
    for (name, s) in present {
        let message = if OPTIONAL_SECTIONS.contains(&name.as_str()) {
            match &kind {
                Some((k, _)) => format!("section does not apply to scenario {k}"),
                None => "section cannot be checked without a valid scenario.kind".into(),
            }
        } else if SHARED_SECTIONS.contains(&name.as_str()) {
            unreachable!("shared sections are always consumed")
        } else {
            "unknown section".into()
        };
        errs.push(Violation {
            line: s.line,
            key: format!("[{name}]"),
            message,
        });
    }

    errs.sort_by_key(|v| (v.line.unwrap_or(usize::MAX), v.key.clone()));
    match (errs.is_empty(), scenario) {
        (true, Some(scenario)) => Ok(ScenarioConfig {
            lattice,
            seed,
            scenario,
            output,
        }),
        _ => Err(Error::Config(errs)),
    }
}

fn parse_lattice(mut s: Section, errs: &mut Vec<Violation>) -> LatticeConfig {
    let a0 = s.f64("a0_nm", 445.0, Rule::Positive);
    let s_nm = s.f64("s_nm", 140.0, Rule::Positive);
    let h_nm = s.f64("h_nm", 160.0, Rule::Positive);
    let n_hole = s.f64("n_hole", 1.0, Rule::Closed(1.0, f64::INFINITY));
    let orientation = s.choice(
        "orientation",
        Orientation::ApexInward,
        &[
            ("apex_inward", Orientation::ApexInward),
            ("apex_outward", Orientation::ApexOutward),
        ],
    );
    let explicit = s.choice("r_mode", false, &[("standard", false), ("explicit", true)]);
    let standard = RadiusSet::standard(a0);
    let keys = ["r_pristine_nm", "r_shrunk_nm", "r_expanded_nm"];
    let radii = if explicit {
        let mut r = [0.0; 3];
        for (slot, key) in r.iter_mut().zip(keys) {
            if !s.has(key) {
                s.fail(key, s.line, "required when r_mode = \"explicit\"".into());
            }
            *slot = s.f64(key, f64::NAN, Rule::Positive);
        }
        RadiusSet {
            pristine_nm: r[0],
            shrunk_nm: r[1],
            expanded_nm: r[2],
        }
    } else {
        for key in keys {
            s.forbid(key, "only allowed with r_mode = \"explicit\"");
        }
        standard
    };

    let n_line = s.line("n_eff");
    let n_eff = s.number("n_eff", Rule::Open(n_hole, f64::INFINITY));
    let target_line = s.line("calibrate_target_THz");
    let target = s.number("calibrate_target_THz", Rule::Positive);
    let index = match (n_eff, target) {
        (Some(_), Some(_)) => {
            s.fail(
                "calibrate_target_THz",
                target_line,
                format!(
                    "conflicts with lattice.n_eff (line {}); give either a fixed index or a calibration target",
                    n_line.map_or("?".into(), |l| l.to_string())
                ),
            );
            s.forbid("calibrate_gmax", "only allowed with calibrate_target_THz");
            IndexSource::Fixed { n_eff: DEVICE_NEFF }
        }
        (None, Some(t)) => IndexSource::Calibrate {
            target_thz: t,
            gmax: s.f64(
                "calibrate_gmax",
                PweSettings::default().gmax,
                Rule::Positive,
            ),
        },
        (n, None) => {
            s.forbid("calibrate_gmax", "only allowed with calibrate_target_THz");
            IndexSource::Fixed {
                n_eff: n.unwrap_or(DEVICE_NEFF),
            }
        }
    };
    let spec = LatticeSpec {
        a0_nm: a0,
        s_nm,
        h_nm,
        radii,
        n_eff: match index {
            IndexSource::Fixed { n_eff } => n_eff,
            IndexSource::Calibrate { .. } => DEVICE_NEFF.max(n_hole + 0.1),
        },
        n_hole,
        orientation,
    };
    let line = s.line;
    let mut own = s.finish();
    if own.is_empty() {
        let geometry = spec.validate().and_then(|_| {
            REGIONS
                .iter()
                .try_for_each(|(_, r)| build_unit_cell(&spec, *r).map(|_| ()))
        });
        if let Err(e) = geometry {
            own.push(Violation {
                line,
                key: "lattice".into(),
                message: e.to_string(),
            });
        }
    }
    errs.extend(own);
    LatticeConfig { spec, index }
}

fn parse_output(mut s: Section, errs: &mut Vec<Violation>) -> OutputConfig {
    let directory = s
        .string("directory")
        .map(|(d, _)| PathBuf::from(d))
        .unwrap_or_else(|| PathBuf::from("helix-out"));
    let line = s.line("formats");
    let formats = s.choice_list(
        "formats",
        vec![0u8, 1],
        &[("csv", 0u8), ("json", 1), ("svg", 2)],
    );
    let (csv, json, svg) = (
        formats.contains(&0),
        formats.contains(&1),
        formats.contains(&2),
    );
    if svg && !csv {
        s.fail(
            "formats",
            line,
            "svg plots are drawn from the CSV files; add \"csv\"".into(),
        );
    }
    errs.extend(s.finish());
    OutputConfig {
        directory,
        csv,
        json,
        svg,
    }
}

fn parse_pwe(s: &mut Section, default_gmax: f64) -> PweSettings {
    PweSettings {
        gmax: s.f64("gmax", default_gmax, Rule::Positive),
        rule: s.choice("rule", InverseRule::Smoothed, &RULES),
    }
}

fn parse_bands(mut s: Section, errs: &mut Vec<Violation>) -> BandsConfig {
    let regions = s.choice_list("regions", REGIONS.iter().map(|r| r.1).collect(), &REGIONS);
    let samples_per_segment = s.count("samples_per_segment", 24, 2);
    let nbands = s.count("nbands", 8, 5);
    let pwe = parse_pwe(&mut s, PweSettings::default().gmax);
    errs.extend(s.finish());
    BandsConfig {
        regions,
        samples_per_segment,
        nbands,
        pwe,
    }
}

fn parse_edge(mut s: Section, errs: &mut Vec<Violation>) -> EdgeConfig {
    let d = EdgeSettings::default();
    let n_shrunk = s.count("n_shrunk", 8, 2);
    let n_expanded = s.count("n_expanded", 8, 2);
    let kx_max = s.f64("kx_max", 0.5, Rule::Closed(1e-6, 0.5));
    let kx_steps = s.count("kx_steps", 32, 1);
    let pwe = parse_pwe(&mut s, d.pwe.gmax);
    let ceiling_nu = s.f64("ceiling_nu", d.ceiling_nu, Rule::Positive);
    let pair_tol = s.f64("pair_tol", d.pair_tol, Rule::NonNegative);
    errs.extend(s.finish());
    EdgeConfig {
        n_shrunk,
        n_expanded,
        kx_max,
        kx_steps,
        settings: EdgeSettings {
            pwe,
            ceiling_nu,
            pair_tol,
            ..d
        },
    }
}

fn parse_transport(mut f: Section, mut t: Section, errs: &mut Vec<Violation>) -> TransportConfig {
    let d = TransportConfig::default();
    let sim = SimConfig {
        resolution: f.count("resolution", d.sim.resolution, 16),
        courant: f.f64("courant", d.sim.courant, Rule::Open(0.0, 1.0)),
        duration_periods: f.f64("duration_periods", d.sim.duration_periods, Rule::Positive),
        pml: PmlParams {
            cells: f.count("pml_cells", d.sim.pml.cells, 8),
            ..d.sim.pml
        },
        dft_stride: f.count("dft_stride", d.sim.dft_stride, 1),
        ..d.sim
    };
    let engine_errs = f.finish();
    let engine_ok = engine_errs.is_empty();
    errs.extend(engine_errs);

    let freq_min = t.f64("freq_min_nu", 0.44, Rule::Positive);
    let freq_max = t.f64("freq_max_nu", 0.53, Rule::Positive);
    let step_line = t.line("freq_step_nu");
    let freq_step = t.f64("freq_step_nu", 0.0005, Rule::Positive);
    let band = t.f64_list(
        "band_nu",
        vec![d.band.lo, d.band.hi],
        Rule::Positive,
        Some(2),
    );
    let mut tc = TransportConfig {
        sim,
        length: t.count("length", d.length, 4),
        width: t.count("width", d.width, 2),
        arm_length: t.count("arm_length", d.arm_length, 4),
        monitor_inset: t.f64("monitor_inset", d.monitor_inset, Rule::Positive),
        capture_half_width: t.f64("capture_half_width", d.capture_half_width, Rule::Positive),
        freqs_nu: Vec::new(),
        carrier_nu: t.f64("carrier_nu", d.carrier_nu, Rule::Positive),
        bandwidth_nu: t.f64("bandwidth_nu", d.bandwidth_nu, Rule::Positive),
        band: Band {
            lo: band[0],
            hi: band[1],
        },
    };
    let line = t.line;
    let mut own = t.finish();
    if freq_min < freq_max && freq_step > 0.0 {
        tc.freqs_nu = freq_grid(freq_min, freq_max, freq_step);
        if tc.freqs_nu.len() > 100_000 {
            own.push(Violation {
                line: step_line,
                key: "transport.freq_step_nu".into(),
                message: "too many monitor frequencies".into(),
            });
        }
    } else {
        own.push(Violation {
            line,
            key: "transport.freq_min_nu".into(),
            message: format!("frequency range {freq_min}..{freq_max} is empty"),
        });
    }
    if own.is_empty() && engine_ok {
        if let Err(e) = tc.validate() {
            own.push(Violation {
                line,
                key: "transport".into(),
                message: e.to_string(),
            });
        }
    }
    errs.extend(own);
    tc
}

fn parse_chirality(
    mut s: Section,
    transport: TransportConfig,
    errs: &mut Vec<Violation>,
) -> ChiralityConfig {
    let keys = s.choice_list(
        "polarizations",
        vec![PolKey::Plus, PolKey::Minus, PolKey::Linear],
        &POLARIZATIONS,
    );
    let angle = s.f64("linear_angle_deg", 0.0, Rule::Finite);
    let p = s.f64_list("position_a0", vec![0.0, 0.0], Rule::Finite, Some(2));
    errs.extend(s.finish());
    ChiralityConfig {
        polarizations: keys.into_iter().map(|k| polarization(k, angle)).collect(),
        position_a0: [p[0], p[1]],
        transport,
    }
}

fn parse_bend(mut s: Section, transport: TransportConfig, errs: &mut Vec<Violation>) -> BendConfig {
    let key = s.choice("polarization", PolKey::Plus, &POLARIZATIONS);
    let angle = s.f64("linear_angle_deg", 0.0, Rule::Finite);
    let control = s.bool("control", false);
    errs.extend(s.finish());
    BendConfig {
        polarization: polarization(key, angle),
        control,
        transport,
    }
}

/// Offsets of the default scan, micrometres.
pub const DEFAULT_SCAN_UM: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

fn parse_scan(mut s: Section, transport: TransportConfig, errs: &mut Vec<Violation>) -> ScanConfig {
    let line = s.line("offsets_um");
    let offsets_um = s.f64_list("offsets_um", DEFAULT_SCAN_UM.to_vec(), Rule::Finite, None);
    if !offsets_um.contains(&0.0) {
        s.fail(
            "offsets_um",
            line,
            "must include 0, the on-interface reference point".into(),
        );
    }
    errs.extend(s.finish());
    ScanConfig {
        offsets_um,
        transport,
    }
}

fn parse_g2(mut s: Section, errs: &mut Vec<Violation>) -> G2Config {
    let single = s.choice(
        "source",
        false,
        &[("poisson", false), ("single_emitter", true)],
    );
    let source = if single {
        s.forbid("rate", "only allowed with source = \"poisson\"");
        StreamKind::SingleEmitter {
            excitation_rate: s.f64("excitation_rate", 0.1, Rule::Positive),
            decay_rate: s.f64("decay_rate", 1.0, Rule::Positive),
        }
    } else {
        for k in ["excitation_rate", "decay_rate"] {
            s.forbid(k, "only allowed with source = \"single_emitter\"");
        }
        StreamKind::Poisson {
            rate: s.f64("rate", 0.05, Rule::Positive),
        }
    };
    let duration_ns = s.f64("duration_ns", 1e6, Rule::Positive);
    let bin_width_ns = s.f64("bin_width_ns", 1.0, Rule::Positive);
    let line = s.line("window_ns");
    let window_ns = s.f64("window_ns", 50.0, Rule::Positive);
    if bin_width_ns > 0.0 && window_ns < 10.0 * bin_width_ns {
        s.fail("window_ns", line, "must be at least 10 bin widths".into());
    }
    let save_streams = s.bool("save_streams", false);
    errs.extend(s.finish());
    G2Config {
        source,
        duration_ns,
        bin_width_ns,
        window_ns,
        save_streams,
    }
}

fn parse_zeeman(mut s: Section, errs: &mut Vec<Violation>) -> ZeemanConfig {
    let model = ZeemanModel {
        e0_mev: s.f64("e0_meV", DEFAULT_E0_MEV, Rule::Positive),
        g: s.f64("g", DEFAULT_G_FACTOR, Rule::Finite),
        kappa_uev_per_t2: s.f64("kappa_ueV_per_T2", 0.0, Rule::Finite),
    };
    let default_fields: Vec<f64> = (0..=9).map(f64::from).chain([9.2]).collect();
    let fields_t = s.f64_list("fields_T", default_fields, Rule::Closed(0.0, 12.0), None);
    let resolution_ghz = s.f64("resolution_GHz", 7.0, Rule::Positive);
    let convention = s.choice(
        "convention",
        ChiralityConvention::PlusRight,
        &[
            ("plus_right", ChiralityConvention::PlusRight),
            ("plus_left", ChiralityConvention::PlusLeft),
        ],
    );
    errs.extend(s.finish());
    ZeemanConfig {
        model,
        fields_t,
        resolution_ghz,
        convention,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(src: &str) -> Vec<Violation> {
        match parse_str(src) {
            Err(Error::Config(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_takes_device_defaults() {
        let c = parse_str("[scenario]\nkind = \"zeeman\"\n").unwrap();
        assert_eq!(c.lattice.spec.a0_nm, 445.0);
        assert_eq!(c.lattice.index, IndexSource::Fixed { n_eff: DEVICE_NEFF });
        assert_eq!(c.scenario.kind(), "zeeman");
        assert!(c.output.csv && c.output.json && !c.output.svg);
    }

    #[test]
    fn every_problem_is_reported_with_its_line() {
        let v = violations(
            "[scenario]\nkind = \"bands\"\n[lattice]\ns_nm = -140\nbogus = 1\n[bands]\nnbands = \"many\"\n",
        );
        let keys: Vec<&str> = v.iter().map(|x| x.key.as_str()).collect();
        assert_eq!(
            keys,
            ["lattice.s_nm", "lattice.bogus", "bands.nbands"],
            "{v:?}"
        );
        assert_eq!(v[0].line, Some(4));
        assert_eq!(v[2].line, Some(7));
    }

    #[test]
    fn fixed_index_and_calibration_conflict() {
        let v = violations(
            "[scenario]\nkind = \"bands\"\n[lattice]\nn_eff = 2.9\ncalibrate_target_THz = 319\n",
        );
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].key, "lattice.calibrate_target_THz");
        assert!(v[0].message.contains("conflicts"));
    }

    #[test]
    fn foreign_and_unknown_sections_rejected() {
        let v = violations("[scenario]\nkind = \"g2\"\n[edge]\nn_shrunk = 4\n[plotting]\n");
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v[0].message.contains("does not apply to scenario g2"));
        assert_eq!(v[1].message, "unknown section");
    }

    #[test]
    fn missing_kind_is_required() {
        let v = violations("[lattice]\na0_nm = 445\n");
        assert_eq!(v[0].key, "scenario.kind");
    }

    #[test]
    fn explicit_radii_need_all_three() {
        let v = violations(
            "[scenario]\nkind = \"bands\"\n[lattice]\nr_mode = \"explicit\"\nr_shrunk_nm = 140\n",
        );
        let keys: Vec<&str> = v.iter().map(|x| x.key.as_str()).collect();
        assert!(keys.contains(&"lattice.r_pristine_nm"));
        assert!(keys.contains(&"lattice.r_expanded_nm"));
        assert!(!keys.contains(&"lattice.r_shrunk_nm"));
    }

    #[test]
    fn geometry_is_checked() {
        let v = violations("[scenario]\nkind = \"bands\"\n[lattice]\ns_nm = 400\n");
        assert_eq!(v[0].key, "lattice");
    }

    #[test]
    fn transport_ranges_checked() {
        let v =
            violations("[scenario]\nkind = \"chirality\"\n[fdtd]\nresolution = 8\ncourant = 1.5\n");
        let keys: Vec<&str> = v.iter().map(|x| x.key.as_str()).collect();
        assert_eq!(keys, ["fdtd.resolution", "fdtd.courant"]);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let v = violations("[scenario]\nkind = \n");
        assert_eq!(v[0].key, "syntax");
        assert_eq!(v[0].line, Some(2));
    }

    #[test]
    fn scan_needs_reference_point() {
        let v = violations(
            "[scenario]\nkind = \"position_scan\"\n[position_scan]\noffsets_um = [1, 2]\n",
        );
        assert_eq!(v[0].key, "position_scan.offsets_um");
    }
}
