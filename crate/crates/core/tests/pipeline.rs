use helix_core::bands::{classify_parity, dirac_point, PweSettings, Topology, DEVICE_NEFF};
use helix_core::edge::{build_supercell, solve_projected_bands, EdgeSettings};
use helix_core::emitter::{
    beamsplitter, branch_routing_table, g2_estimate, load_stream, save_stream, simulate_stream,
    ChiralityConvention, Grating, Helicity, StreamKind, ZeemanModel,
};
use helix_core::geometry::{LatticeSpec, Region};

fn spec() -> LatticeSpec {
    LatticeSpec::device(DEVICE_NEFF)
}

fn coarse() -> PweSettings {
    PweSettings {
        gmax: 9.0,
        ..PweSettings::default()
    }
}

#[test]
fn deformations_straddle_the_dirac_point() {
    let s = spec();
    let d = dirac_point(&s, coarse()).unwrap();
    let shrunk = classify_parity(&s, Region::Shrunk, coarse()).unwrap();
    let expanded = classify_parity(&s, Region::Expanded, coarse()).unwrap();
    assert_eq!(shrunk.topology, Topology::Trivial);
    assert_eq!(expanded.topology, Topology::Nontrivial);
    // Both doublet pairs open around the pristine four-fold point.
    for r in [&shrunk, &expanded] {
        assert!(r.modes[1].nu < d.nu + 0.01 && r.modes[2].nu > d.nu - 0.01);
    }
}

#[test]
fn classification_follows_the_radius_not_the_region_name() {
    let s = spec();
    let swapped = s
        .with_radius(Region::Shrunk, s.radius_nm(Region::Expanded))
        .with_radius(Region::Expanded, s.radius_nm(Region::Shrunk));
    let a = classify_parity(&swapped, Region::Shrunk, coarse()).unwrap();
    assert_eq!(a.topology, Topology::Nontrivial);
}

#[test]
fn ribbon_spectrum_is_time_reversal_symmetric() {
    let cell = build_supercell(&spec(), 6, 6).unwrap();
    let settings = EdgeSettings {
        pwe: PweSettings {
            gmax: 4.0,
            ..PweSettings::default()
        },
        mirror: false,
        ..EdgeSettings::default()
    };
    let k = 0.09;
    let set = solve_projected_bands(&cell, &[-k, k], &settings).unwrap();
    let minus: Vec<f64> = set.at(-k).map(|m| m.nu).collect();
    let plus: Vec<f64> = set.at(k).map(|m| m.nu).collect();
    assert_eq!(minus.len(), plus.len());
    for (a, b) in minus.iter().zip(&plus) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn recorded_streams_reproduce_their_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let kind = StreamKind::SingleEmitter {
        excitation_rate: 0.2,
        decay_rate: 1.0,
    };
    let (a, b) = beamsplitter(&simulate_stream(kind, 2e5, 9).unwrap(), 10);
    save_stream(&a, &dir.path().join("a.txt")).unwrap();
    save_stream(&b, &dir.path().join("b.txt")).unwrap();
    let (ra, rb) = (
        load_stream(&dir.path().join("a.txt")).unwrap(),
        load_stream(&dir.path().join("b.txt")).unwrap(),
    );
    let direct = g2_estimate(&a, &b, 1.0, 20.0).unwrap();
    let reread = g2_estimate(&ra, &rb, 1.0, 20.0).unwrap();
    assert_eq!(direct.g2, reread.g2);
    assert!(direct.at_zero() < 0.5);
}

#[test]
fn flipping_the_convention_swaps_the_gratings() {
    let model = ZeemanModel::default();
    for convention in [
        ChiralityConvention::PlusRight,
        ChiralityConvention::PlusLeft,
    ] {
        let a = branch_routing_table(&model, 9.0, 7.0, convention).unwrap();
        let b = branch_routing_table(&model, 9.0, 7.0, convention.flipped()).unwrap();
        assert_eq!(a.at(Grating::Left), b.at(Grating::Right));
        assert_eq!(a.at(Grating::Right), b.at(Grating::Left));
    }
    let t = branch_routing_table(&model, 9.0, 7.0, ChiralityConvention::default()).unwrap();
    assert_eq!(t.at(Grating::Right).branch, Helicity::Plus);
}
