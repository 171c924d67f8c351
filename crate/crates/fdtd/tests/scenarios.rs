use helix_core::geometry::LatticeSpec;
use helix_fdtd::scenarios::*;
use helix_fdtd::{io, PmlParams, Polarization, SimConfig};

fn spec() -> LatticeSpec {
    LatticeSpec::device(2.9440518)
}

/// A coarse, short guide that keeps each run to a few seconds.
fn small() -> TransportConfig {
    TransportConfig {
        sim: SimConfig {
            resolution: 16,
            duration_periods: 250.0,
            pml: PmlParams {
                cells: 16,
                ..PmlParams::default()
            },
            ..SimConfig::default()
        },
        length: 16,
        arm_length: 8,
        freqs_nu: freq_grid(0.46, 0.50, 0.002),
        ..TransportConfig::default()
    }
}

#[test]
fn helicities_route_in_mirror_image() {
    let tc = small();
    let p =
        chirality_directionality(&spec(), Polarization::SIGMA_PLUS, default_site(), &tc).unwrap();
    let m =
        chirality_directionality(&spec(), Polarization::SIGMA_MINUS, default_site(), &tc).unwrap();
    assert!((p.band_average + m.band_average).abs() < 0.1);
    assert!(
        p.band_average > 0.0,
        "sigma+ should favour +x, got {}",
        p.band_average
    );
    for (a, b) in p.left.iter().zip(&m.right) {
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-12), "{a} vs {b}");
    }
}

#[test]
fn linear_dipole_on_the_mirror_line_is_balanced() {
    let d = chirality_directionality(
        &spec(),
        Polarization::Linear { angle: 0.0 },
        default_site(),
        &small(),
    )
    .unwrap();
    assert!(d.band_average.abs() < 0.3);
}

#[test]
fn straight_control_has_unit_ratio() {
    let b = bend_transmission(&spec(), Polarization::SIGMA_PLUS, &small(), true).unwrap();
    assert!((b.band_ratio - 1.0).abs() < 0.05);
    assert!(b.backscatter.abs() < 1e-12);
    let band = b.band;
    for (nu, r) in b.freqs_nu.iter().zip(&b.ratio) {
        if band.contains(*nu) {
            assert!((r - 1.0).abs() < 0.05, "nu {nu}: ratio {r}");
        }
    }
}

#[test]
fn scan_is_normalized_to_the_interface() {
    let s = position_scan(&spec(), &[0.0, 1.0], &small()).unwrap();
    assert_eq!(s.at(0.0).unwrap().relative, 1.0);
    assert!(s.at(1.0).unwrap().relative.is_finite());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    io::save_scan_csv(&s, 673.69, &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 3 + 2 * s.freqs_nu.len());
}

#[test]
fn empty_band_is_rejected() {
    let mut tc = small();
    tc.band = Band { lo: 0.9, hi: 1.0 };
    assert!(
        chirality_directionality(&spec(), Polarization::SIGMA_PLUS, default_site(), &tc).is_err()
    );
}
