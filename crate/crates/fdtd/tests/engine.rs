use helix_core::geometry::{DeviceLayout, LatticeSpec, Rect, Region};
use helix_fdtd::validation::{energy_balance, pml_reflection, pulse_speed};
use helix_fdtd::*;

fn spec() -> LatticeSpec {
    LatticeSpec::device(2.9440518)
}

fn small_crystal() -> DeviceLayout {
    DeviceLayout::bulk(
        Region::Shrunk,
        Rect {
            x0: -3.0,
            x1: 3.0,
            y0: -3.0,
            y1: 3.0,
        },
    )
}

fn pulse(position: [f64; 2], polarization: Polarization) -> DipoleSource {
    DipoleSource {
        position,
        polarization,
        carrier_nu: 0.48,
        envelope: Envelope::GaussianPulse { bandwidth_nu: 0.04 },
    }
}

fn quick() -> SimConfig {
    SimConfig {
        resolution: 16,
        duration_periods: 120.0,
        pml: PmlParams {
            cells: 12,
            ..PmlParams::default()
        },
        ..SimConfig::default()
    }
}

fn freqs() -> Vec<f64> {
    (0..21).map(|k| 0.44 + 0.004 * k as f64).collect()
}

fn monitored_run(cfg: &SimConfig) -> SimResult {
    let f = freqs();
    let mons = [
        FluxMonitor::new(
            "r",
            MonitorLine::Vertical {
                x: 2.0,
                y0: -2.0,
                y1: 2.0,
            },
            1.0,
            &f,
        ),
        FluxMonitor::new(
            "t",
            MonitorLine::Horizontal {
                y: 2.0,
                x0: -2.0,
                x1: 2.0,
            },
            1.0,
            &f,
        ),
    ];
    run(
        &small_crystal(),
        &spec(),
        &pulse([0.0, 0.0], Polarization::SIGMA_PLUS),
        &mons,
        cfg,
        &RunOptions::default(),
    )
    .unwrap()
}

#[test]
fn pulse_travels_at_slab_speed() {
    let s = pulse_speed(&spec(), 32).unwrap();
    assert!(s.relative_error < 0.01, "{s:?}");
}

#[test]
fn absorbing_layer_reflects_little() {
    let r = pml_reflection(&spec(), 24, 24).unwrap();
    assert!(r < 1e-4, "reflection {r:e}");
}

#[test]
fn thicker_layers_do_not_reflect_more() {
    let thin = pml_reflection(&spec(), 24, 8).unwrap();
    let thick = pml_reflection(&spec(), 24, 24).unwrap();
    assert!(thick <= thin * 1.01, "{thick:e} vs {thin:e}");
}

#[test]
fn lossless_energy_budget_closes() {
    let e = energy_balance(&spec(), 24).unwrap();
    assert!(e.injected > 0.0);
    assert!(e.relative_error() < 0.02, "{e:?}");
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = monitored_run(&quick());
    let b = monitored_run(&quick());
    for (m, n) in a.monitors.iter().zip(&b.monitors) {
        assert_eq!(m.power, n.power);
    }
}

#[test]
fn thread_count_does_not_change_spectra() {
    let in_pool = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| monitored_run(&quick()))
    };
    let (a, b) = (in_pool(1), in_pool(3));
    for (m, n) in a.monitors.iter().zip(&b.monitors) {
        for (x, y) in m.power.iter().zip(&n.power) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()), "{x} vs {y}");
        }
    }
}

#[test]
fn transfer_is_reciprocal() {
    let (a, b) = ([-1.0, 0.0], [1.5, 1.0]);
    let f = freqs();
    let transfer = |from: [f64; 2], to: [f64; 2]| {
        let opts = RunOptions {
            probes: vec![PointProbe {
                name: "p".into(),
                position: to,
                component: Component::Ex,
            }],
            ..RunOptions::default()
        };
        let src = pulse(from, Polarization::Linear { angle: 0.0 });
        let r = run(&small_crystal(), &spec(), &src, &[], &quick(), &opts).unwrap();
        r.probes[0].spectrum(&f)
    };
    let (ab, ba) = (transfer(a, b), transfer(b, a));
    for ((x, y), nu) in ab.iter().zip(&ba).zip(&f) {
        let d = (x.0 - y.0).hypot(x.1 - y.1);
        let m = x.0.hypot(x.1);
        assert!(d < 0.01 * m, "nu {nu}: {x:?} vs {y:?}");
    }
}

#[test]
fn unstable_step_is_refused() {
    let cfg = SimConfig {
        courant: 1.2,
        ..quick()
    };
    let r = run(
        &small_crystal(),
        &spec(),
        &pulse([0.0, 0.0], Polarization::SIGMA_PLUS),
        &[],
        &cfg,
        &RunOptions::default(),
    );
    assert!(matches!(r, Err(Error::Unstable(_))));
}

#[test]
fn source_in_hole_needs_permission() {
    let spec = spec();
    let layout = small_crystal();
    let hole = layout
        .holes_near(
            &spec,
            &Rect {
                x0: -0.5,
                x1: 0.5,
                y0: -0.5,
                y1: 0.5,
            },
        )
        .unwrap()[0]
        .centroid();
    let src = pulse(hole, Polarization::SIGMA_PLUS);
    let cfg = SimConfig {
        duration_periods: 5.0,
        ..quick()
    };
    let refused = run(&layout, &spec, &src, &[], &cfg, &RunOptions::default());
    assert!(matches!(refused, Err(Error::InvalidSetup(_))));
    let opts = RunOptions {
        allow_source_in_hole: true,
        ..RunOptions::default()
    };
    assert!(run(&layout, &spec, &src, &[], &cfg, &opts).is_ok());
}

#[test]
fn snapping_offset_is_recorded() {
    let cfg = SimConfig {
        duration_periods: 2.0,
        ..quick()
    };
    let p = [0.01, -0.02];
    let r = run(
        &small_crystal(),
        &spec(),
        &pulse(p, Polarization::SIGMA_PLUS),
        &[],
        &cfg,
        &RunOptions::default(),
    )
    .unwrap();
    let m = &r.meta;
    for (k, pk) in p.iter().enumerate() {
        assert!((m.snapped_position[k] + m.snap_offset_a0[k] - pk).abs() < 1e-12);
        assert!(m.snap_offset_a0[k].abs() <= 0.5 / 16.0 + 1e-12);
    }
}

#[test]
fn monitors_must_avoid_the_layers() {
    let f = freqs();
    let mons = [FluxMonitor::new(
        "out",
        MonitorLine::Vertical {
            x: 3.4,
            y0: -1.0,
            y1: 1.0,
        },
        1.0,
        &f,
    )];
    let r = run(
        &small_crystal(),
        &spec(),
        &pulse([0.0, 0.0], Polarization::SIGMA_PLUS),
        &mons,
        &quick(),
        &RunOptions::default(),
    );
    assert!(r.is_err());
}

#[test]
fn snapshot_round_trips_through_binary_format() {
    let cfg = SimConfig {
        duration_periods: 20.0,
        ..quick()
    };
    let opts = RunOptions {
        snapshot: true,
        ..RunOptions::default()
    };
    let r = run(
        &small_crystal(),
        &spec(),
        &pulse([0.0, 0.0], Polarization::SIGMA_PLUS),
        &[],
        &cfg,
        &opts,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hz.bin");
    io::save_snapshot(&r, &path).unwrap();
    let back = helix_core::geometry::PermittivityMap::read_binary(&path).unwrap();
    let snap = r.snapshot.unwrap();
    assert_eq!(back.values, snap.values);
    assert_eq!((back.nx, back.ny), (r.meta.nx, r.meta.ny));
}
