//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion that evaluates but misses its threshold prints FAIL and does
//! not abort the run; only an evaluation error makes the binary exit non-zero.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use helix_core::bands::{
    bulk_gap, classify_parity, dirac_point, intersect, solve_modes, BlochVector, PweSettings,
    Topology, ZoneSampling, DEVICE_NEFF,
};
use helix_core::edge::{
    build_supercell, common_gap, crossings, kx_grid, solve_projected_bands, solve_supercell_modes,
    summarize_edges, supercell_k, EdgeSettings, EdgeSummary, InterfaceTag, Supercell,
};
use helix_core::emitter::{
    beamsplitter, beta_factor, g2_estimate, simulate_stream, zeeman_lines, BetaInputs, StreamKind,
    ZeemanModel,
};
use helix_core::geometry::{
    fourier_epsilon, FourierEps, InverseRule, Lattice2D, LatticeSpec, Region,
};
use helix_fdtd::scenarios::{
    bend_transmission, chirality_directionality, default_site, half_max_edges, position_scan,
    um_to_a0, Band, Directionality, TransportConfig,
};
use helix_fdtd::validation::{energy_balance, pml_reflection, pulse_speed};
use helix_fdtd::Polarization;

type Eval = Result<(bool, String), Box<dyn std::error::Error>>;

/// Results shared between criteria that build on each other.
#[derive(Default)]
struct Shared {
    edges: Option<EdgeSummary>,
    sigma_plus: Option<Directionality>,
}

fn spec() -> LatticeSpec {
    LatticeSpec::device(DEVICE_NEFF)
}

fn criterion_1() -> Eval {
    let d = dirac_point(&spec(), PweSettings::default())?;
    let pass = (d.thz - 319.0).abs() <= 1.0 && d.splitting_thz < 0.03;
    Ok((
        pass,
        format!(
            "Γ pair at {:.4} THz, splitting {:.2e} THz",
            d.thz, d.splitting_thz
        ),
    ))
}

fn criterion_2() -> Eval {
    let s = spec();
    let pwe = PweSettings::default();
    let (shrunk, _) = bulk_gap(&s, Region::Shrunk, 2, 3, pwe, ZoneSampling::default())?;
    let (expanded, _) = bulk_gap(&s, Region::Expanded, 2, 3, pwe, ZoneSampling::default())?;
    let overlap = intersect(&shrunk, &expanded);
    let pass = shrunk.relative_width > 0.02 && expanded.relative_width > 0.02 && overlap.is_some();
    Ok((
        pass,
        format!(
            "shrunk {:.5}-{:.5} ({:.2}%), expanded {:.5}-{:.5} ({:.2}%), overlap {:?}",
            shrunk.lower_nu,
            shrunk.upper_nu,
            100.0 * shrunk.relative_width,
            expanded.lower_nu,
            expanded.upper_nu,
            100.0 * expanded.relative_width,
            overlap.map(|(a, b)| ((a * 1e5).round() / 1e5, (b * 1e5).round() / 1e5)),
        ),
    ))
}

fn criterion_3() -> Eval {
    let s = spec();
    let pwe = PweSettings::default();
    let shrunk = classify_parity(&s, Region::Shrunk, pwe)?.topology;
    let expanded = classify_parity(&s, Region::Expanded, pwe)?.topology;
    // Seven radii from the shrunk to the expanded value; none is exactly
    // pristine, where the doublets are degenerate and carry no label.
    let r0 = s.radius_nm(Region::Pristine);
    let mut labels = Vec::new();
    for i in 0..7 {
        let f = 0.94 + (1.05 - 0.94) * i as f64 / 6.0;
        let swept = s.with_radius(Region::Shrunk, f * r0);
        labels.push(classify_parity(&swept, Region::Shrunk, pwe)?.topology);
    }
    let flips = labels.windows(2).filter(|w| w[0] != w[1]).count();
    let pass = shrunk == Topology::Trivial
        && expanded == Topology::Nontrivial
        && flips == 1
        && labels[0] == Topology::Trivial;
    Ok((
        pass,
        format!("shrunk {shrunk:?}, expanded {expanded:?}, sweep {labels:?} ({flips} flip)"),
    ))
}

fn criterion_4(shared: &mut Shared) -> Eval {
    let s = spec();
    let settings = EdgeSettings::default();
    let (_, _, gap) = common_gap(&s, settings.pwe, ZoneSampling::default())?;
    let cell = build_supercell(&s, 8, 8)?;
    let set = solve_projected_bands(&cell, &kx_grid(0.15, 12), &settings)?;
    let summary = summarize_edges(&set, gap)?;
    let probe = summary.probe_nu;

    let mut pass = true;
    let mut notes = Vec::new();
    for tag in [InterfaceTag::A, InterfaceTag::B] {
        let c = crossings(&set, tag, probe);
        let opposite = c.len() == 2 && c[0].vg * c[1].vg < 0.0;
        let worst_loc = c.iter().map(|x| x.loc_len_a0).fold(0.0, f64::max);
        pass &= opposite && worst_loc < 3.0;
        notes.push(format!(
            "{}: {} modes, vg {:?}, loc ≤ {:.2} a0",
            tag.name(),
            c.len(),
            c.iter()
                .map(|x| (x.vg * 1e3).round() / 1e3)
                .collect::<Vec<_>>(),
            worst_loc
        ));
    }

    // Spin-momentum locking across the helical window: on each interface
    // sign(S)·sign(vg) is one fixed value. The two interfaces are mirror
    // images, so their locking signs may differ.
    let (lo, hi) = summary.helical_window_nu;
    for tag in [InterfaceTag::A, InterfaceTag::B] {
        let mut signs = Vec::new();
        for i in 1..10 {
            let nu = lo + (hi - lo) * i as f64 / 10.0;
            for c in crossings(&set, tag, nu) {
                if let Some(spin) = c.spin {
                    signs.push(spin.signum() * c.vg.signum());
                }
            }
        }
        let constant = !signs.is_empty() && signs.iter().all(|s| *s == signs[0]);
        pass &= constant;
        notes.push(format!(
            "{}: sign(S) = {}sign(vg) for {}/{} crossings in {lo:.4}-{hi:.4}",
            tag.name(),
            if signs.first() == Some(&-1.0) {
                "−"
            } else {
                ""
            },
            signs.iter().filter(|s| Some(*s) == signs.first()).count(),
            signs.len()
        ));
    }
    let detail = format!("probe ν = {probe:.4}; {}", notes.join("; "));
    shared.edges = Some(summary);
    Ok((pass, detail))
}

fn criterion_5(shared: &mut Shared) -> Eval {
    let s = spec();
    let tc = TransportConfig::default();
    let site = default_site();
    let plus = chirality_directionality(&s, Polarization::SIGMA_PLUS, site, &tc)?;
    let minus = chirality_directionality(&s, Polarization::SIGMA_MINUS, site, &tc)?;
    let (dp, dm) = (plus.band_average, minus.band_average);
    let pass = dp >= 0.7 && dm <= -0.7 && (dp + dm).abs() < 0.1;
    shared.sigma_plus = Some(plus);
    Ok((
        pass,
        format!(
            "D(σ+) = {dp:+.4}, D(σ−) = {dm:+.4}, |sum| = {:.4} over {:.4}-{:.4}",
            (dp + dm).abs(),
            tc.band.lo,
            tc.band.hi
        ),
    ))
}

fn criterion_6(shared: &Shared) -> Eval {
    let mut tc = TransportConfig::default();
    tc.sim.resolution = 32;
    if let Some(e) = &shared.edges {
        let (lo, hi) = e.helical_window_nu;
        tc.band = Band { lo, hi };
    }
    let b = bend_transmission(&spec(), Polarization::SIGMA_PLUS, &tc, false)?;
    let pass = b.band_ratio >= 0.8 && b.backscatter < 0.05;
    Ok((
        pass,
        format!(
            "T_bend/T_straight = {:.3}, backscatter = {:.4} over {:.4}-{:.4} at {} px/a0",
            b.band_ratio, b.backscatter, tc.band.lo, tc.band.hi, tc.sim.resolution
        ),
    ))
}

fn criterion_7() -> Eval {
    let s = spec();
    let tc = TransportConfig {
        length: 24,
        ..TransportConfig::default()
    };
    let offsets: Vec<f64> = (-4..=4)
        .map(|i| um_to_a0(0.5 * i as f64, s.a0_nm))
        .collect();
    let scan = position_scan(&s, &offsets, &tc)?;
    let at = |um: f64| {
        scan.at(um_to_a0(um, s.a0_nm))
            .map(|p| p.relative)
            .ok_or("scan point missing")
    };
    let (left, right) = (at(-1.5)?, at(1.5)?);
    let pass = left < 0.1 && right < 0.1;
    let profile: Vec<String> = scan
        .points
        .iter()
        .map(|p| format!("{:.3}", p.relative))
        .collect();
    Ok((
        pass,
        format!(
            "T(−1.5 μm) = {left:.4}, T(+1.5 μm) = {right:.4} of on-interface; profile [{}]",
            profile.join(", ")
        ),
    ))
}

/// Largest relative deviation of uniform-medium PWE bands from `|k+G|/(2πn)`.
fn uniform_pwe_error() -> Result<f64, Box<dyn std::error::Error>> {
    let n = 2.9;
    let lat = Lattice2D::hexagonal();
    let [b1, b2] = lat.reciprocal();
    let gmax = 5.0 * b1[0].hypot(b1[1]);
    let fe = FourierEps::uniform(lat, n * n, gmax);
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.17, 0.33, 0.5] {
        let k = BlochVector::new(t, 0.3 * t);
        let m = solve_modes(&fe, k, 12, false)?;
        let kc = k.cartesian();
        let mut free = Vec::new();
        for a in -8..=8 {
            for b in -8..=8 {
                let q = [
                    kc[0] + a as f64 * b1[0] + b as f64 * b2[0],
                    kc[1] + a as f64 * b1[1] + b as f64 * b2[1],
                ];
                let len = q[0].hypot(q[1]);
                if len < gmax {
                    free.push(len / (2.0 * PI * n));
                }
            }
        }
        free.sort_by(f64::total_cmp);
        for (got, want) in m.nu.iter().zip(&free) {
            worst = worst.max((got - want).abs() / want.max(1e-3));
        }
    }
    Ok(worst)
}

/// Largest deviation between a ribbon of identical rows and the bulk bands
/// folded onto its Brillouin zone.
fn folding_error() -> Result<f64, Box<dyn std::error::Error>> {
    let s = spec();
    let rows = 6;
    let settings = EdgeSettings {
        pwe: PweSettings {
            gmax: 6.0,
            rule: InverseRule::Smoothed,
        },
        ceiling_nu: 0.5,
        ..EdgeSettings::default()
    };
    let cell = Supercell::uniform(&s, Region::Shrunk, rows)?;
    let eps = cell.fourier(6.0, InverseRule::Smoothed)?;
    let bulk = fourier_epsilon(&s, Region::Shrunk, 6.0, InverseRule::Smoothed)?;
    let mut worst: f64 = 0.0;
    for kx in [0.0, 0.11] {
        let got: Vec<f64> = solve_supercell_modes(&cell, &eps, kx, &settings)?
            .iter()
            .map(|m| m.nu)
            .collect();
        let k0 = supercell_k(kx).cartesian();
        let b = bulk.recip[1];
        let mut want = Vec::new();
        for j in 0..rows {
            let f = j as f64 / rows as f64;
            let k = BlochVector::from_cartesian([k0[0] + f * b[0], k0[1] + f * b[1]]);
            want.extend(
                solve_modes(&bulk, k, 12, false)?
                    .nu
                    .into_iter()
                    .filter(|&v| v < settings.ceiling_nu),
            );
        }
        want.sort_by(f64::total_cmp);
        if got.len() != want.len() {
            return Ok(f64::INFINITY);
        }
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn criterion_8() -> Eval {
    let s = spec();
    let pwe = uniform_pwe_error()?;
    let speed = pulse_speed(&s, 32)?;
    let refl = pml_reflection(&s, 24, 24)?;
    let energy = energy_balance(&s, 24)?;
    let fold = folding_error()?;
    let pass = pwe <= 1e-6
        && speed.relative_error < 0.01
        && refl < 1e-4
        && energy.relative_error() < 0.02
        && fold < 1e-4;
    Ok((
        pass,
        format!(
            "uniform PWE {pwe:.1e}, pulse speed {:.2}%, reflection {refl:.1e}, energy {:.2}%, folding {fold:.1e}",
            100.0 * speed.relative_error,
            100.0 * energy.relative_error()
        ),
    ))
}

fn criterion_9() -> Eval {
    let beta = beta_factor(&BetaInputs::new(1.0, 1.0, 1.0)?)?;
    let scaled = beta_factor(&BetaInputs::new(370.0, 370.0, 370.0)?)?;
    let uneven = beta_factor(&BetaInputs::new(3.0, 5.0, 2.0)?)?;
    let uneven_scaled = beta_factor(&BetaInputs::new(3e4, 5e4, 2e4)?)?;
    let beta_ok = beta == 2.0 / 3.0 && scaled == beta && (uneven - uneven_scaled).abs() < 1e-15;

    let poisson = StreamKind::Poisson { rate: 0.05 };
    let a = simulate_stream(poisson, 2e6, 1)?;
    let b = simulate_stream(poisson, 2e6, 2)?;
    let flat = g2_estimate(&a, &b, 1.0, 50.0)?;
    let mean = flat.g2.iter().sum::<f64>() / flat.g2.len() as f64;

    let emitter = StreamKind::SingleEmitter {
        excitation_rate: 0.1,
        decay_rate: 1.0,
    };
    let (c, d) = beamsplitter(&simulate_stream(emitter, 2e6, 3)?, 4);
    let dip = g2_estimate(&c, &d, 1.0, 50.0)?.at_zero();

    let model = ZeemanModel::default();
    let zero = zeeman_lines(&model, 0.0)?;
    let degenerate = zero.splitting_uev() == 0.0;
    let slope = zeeman_lines(&model, 1.0)?.splitting_uev();
    let linear = (1..=9).all(|b| {
        let b = b as f64;
        let p = zeeman_lines(&model, b).unwrap();
        (p.splitting_uev() - slope * b).abs() <= 1e-9 * slope * b
            && (p.plus.energy_mev + p.minus.energy_mev - 2.0 * model.e0_mev).abs() < 1e-9
    });

    let pass = beta_ok && (0.95..=1.05).contains(&mean) && dip < 0.5 && degenerate && linear;
    Ok((
        pass,
        format!(
            "β(1,1,1) = {beta}, scaling {}, Poisson g2 mean {mean:.4}, emitter g2(0) = {dip:.3}, \
             B=0 degenerate {degenerate}, κ=0 linear {linear}",
            if beta_ok { "invariant" } else { "broken" }
        ),
    ))
}

fn criterion_10(shared: &Shared) -> Eval {
    let edges = shared.edges.as_ref().ok_or("edge summary unavailable")?;
    let plus = shared
        .sigma_plus
        .as_ref()
        .ok_or("σ+ transmission unavailable")?;
    let band = half_max_edges(&plus.freqs_nu, &plus.right, 0.01)?;
    let (lo, hi) = edges.edge_window_nu;
    let (dlo, dhi) = ((band.lo - lo).abs() / lo, (band.hi - hi).abs() / hi);
    let pass = dlo <= 0.02 && dhi <= 0.02;
    Ok((
        pass,
        format!(
            "FDTD half-max band {:.4}-{:.4} vs edge window {lo:.4}-{hi:.4} (Δ {:.2}%, {:.2}%)",
            band.lo,
            band.hi,
            100.0 * dlo,
            100.0 * dhi
        ),
    ))
}

fn report(n: usize, name: &str, eval: Eval, started: Instant, errors: &mut usize) {
    let secs = started.elapsed().as_secs_f64();
    match eval {
        Ok((pass, detail)) => println!(
            "criterion {n:>2} {} {name}: {detail} [{secs:.0} s]",
            if pass { "PASS" } else { "FAIL" }
        ),
        Err(e) => {
            *errors += 1;
            println!("criterion {n:>2} ERROR {name}: {e} [{secs:.0} s]");
        }
    }
}

fn main() -> ExitCode {
    let mut shared = Shared::default();
    let mut errors = 0;
    macro_rules! run {
        ($n:expr, $name:expr, $body:expr) => {{
            let t = Instant::now();
            let eval = $body;
            report($n, $name, eval, t, &mut errors);
        }};
    }
    run!(1, "Dirac point", criterion_1());
    run!(2, "gap opening and overlap", criterion_2());
    run!(3, "band inversion", criterion_3());
    run!(4, "helical edge modes", criterion_4(&mut shared));
    run!(5, "chiral routing", criterion_5(&mut shared));
    run!(6, "bend robustness", criterion_6(&shared));
    run!(7, "position scan", criterion_7());
    run!(8, "numerical oracles", criterion_8());
    run!(9, "emitter analytics", criterion_9());
    run!(
        10,
        "transmission band vs edge window",
        criterion_10(&shared)
    );
    if errors > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
