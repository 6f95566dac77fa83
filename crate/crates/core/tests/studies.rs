use hydrogen_semiclassics::experiments::{
    check_n_budget, cross_decay_study, mixed_measure_study, radon_transform, theorem1_study, GeodesicMeasure,
};
use hydrogen_semiclassics::geometry::KeplerOrbit;
use hydrogen_semiclassics::*;

#[test]
fn off_orbit_symbol_vanishes() {
    let sc = SemiclassicalScale::new(-0.5, 64).unwrap();
    let frame = AlphaFrame::basis(1, 2).unwrap();
    let a = SymbolSpec::off_orbit_bump(&KeplerOrbit::new(frame, sc));
    let rec = theorem1_study(&frame, -0.5, &a, &[16, 32, 64], &QuantizeOptions::default()).unwrap();
    assert_eq!(rec.predicted, 0.0);
    assert!(rec.values[2].abs() < 1e-3, "{:?}", rec.values);
}

#[test]
fn errors_decrease_at_the_default_configuration() {
    let a = SymbolSpec::default_radial_bump(1.0);
    let rec = theorem1_study(
        &AlphaFrame::basis(1, 2).unwrap(),
        -0.5,
        &a,
        &[8, 16, 32, 64],
        &QuantizeOptions::default(),
    )
    .unwrap();
    assert!(rec.errors_monotone(), "{:?}", rec.errors);
}

#[test]
fn conjugate_frame_cross_terms_decay() {
    // same plane, opposite orientation
    let alpha = AlphaFrame::inclined(0.4);
    let a = SymbolSpec::default_radial_bump(1.0);
    let rec = cross_decay_study(
        &alpha,
        &alpha.conj(),
        -0.5,
        &a,
        &[8, 16, 32],
        &QuantizeOptions::default(),
    )
    .unwrap();
    assert!(
        rec.values[2] < 1e-3 * rec.values[0].max(1e-12) || rec.values[2] < 1e-12,
        "{:?}",
        rec.values
    );
}

#[test]
fn intersecting_planes_cross_terms_decay() {
    let alpha = AlphaFrame::basis(1, 2).unwrap();
    let beta = AlphaFrame::basis(1, 3).unwrap();
    let a = SymbolSpec::momentum_ball_bump(Vec3::new(1.0, 0.0, 0.0), 0.8, 1.0 / 3.0);
    let rec = cross_decay_study(&alpha, &beta, -0.5, &a, &[8, 16, 32], &QuantizeOptions::default()).unwrap();
    assert!(rec.ratios.iter().all(|q| *q < 0.25), "{:?}", rec.ratios);
}

#[test]
fn weighted_mixture_is_the_expanded_sum() {
    let f1 = AlphaFrame::basis(1, 2).unwrap();
    let f2 = AlphaFrame::inclined(0.9);
    let a = SymbolSpec::default_radial_bump(1.0);
    let o = QuantizeOptions::default();
    let m = GeodesicMeasure::new(vec![(0.9, f1), (0.1, f2)]).unwrap();
    let rec = mixed_measure_study(&m, -0.5, &a, &[16], &o).unwrap();
    let sc = SemiclassicalScale::new(-0.5, 16).unwrap();
    let (s1, s2) = (MomentumState::new(f1, sc), MomentumState::new(f2, sc));
    let me = |x: &MomentumState, y: &MomentumState| matrix_element(&a, x, y, &o).unwrap().value;
    let expanded = 0.9 * me(&s1, &s1) + 0.1 * me(&s2, &s2) + 0.3 * (me(&s1, &s2) + me(&s2, &s1));
    assert!((rec.measured[0] - expanded).norm() < 1e-12);
    let predicted = 0.9 * radon_transform(&a, &f1, &sc).unwrap() + 0.1 * radon_transform(&a, &f2, &sc).unwrap();
    assert!((rec.predicted - predicted).abs() < 1e-12);
}

#[test]
fn collision_frame_converges_to_the_truncated_average() {
    let frame: AlphaFrame = "e1+ie4".parse().unwrap();
    let a = SymbolSpec::momentum_ball_bump(Vec3::new(1.0, 0.0, 0.0), 0.8, 1.0 / 3.0);
    let rec = theorem1_study(&frame, -0.5, &a, &[16, 32, 64], &QuantizeOptions::default()).unwrap();
    assert!(rec.errors[2] < rec.errors[0]);
    assert!(rec.errors[2] < 2e-2);
}

#[test]
fn large_n_needs_opt_in() {
    assert!(check_n_budget(&[8, 128], false).is_err());
    assert!(check_n_budget(&[8, 128], true).is_ok());
}
