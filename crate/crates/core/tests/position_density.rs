use hydrogen_semiclassics::geometry::{orbit_average, KeplerOrbit};
use hydrogen_semiclassics::*;

fn distance_to_unit_circle(x: &Vec3) -> f64 {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    ((rho - 1.0).powi(2) + x[2] * x[2]).sqrt()
}

#[test]
fn density_concentrates_on_the_circular_orbit() {
    let sc = SemiclassicalScale::new(-0.5, 32).unwrap();
    let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
    let g = st.to_position_grid(&GridSpec::default()).unwrap();
    assert!((g.norm_squared() - 1.0).abs() < 1e-4);
    let tube = g.integrate_density(|x| if distance_to_unit_circle(x) < 0.5 { 1.0 } else { 0.0 });
    assert!(tube >= 0.8, "tube mass {tube}");
    assert!(g.edge_mass(0.05) < 1e-4);
}

#[test]
fn mean_position_tracks_the_orbit_average() {
    let sc = SemiclassicalScale::new(-0.5, 32).unwrap();
    let frame = AlphaFrame::inclined(0.6);
    let g = MomentumState::new(frame, sc)
        .to_position_grid(&GridSpec::default())
        .unwrap();
    let orbit = KeplerOrbit::new(frame, sc);
    let mean = g.mean_position();
    for k in 0..3 {
        let avg = orbit_average(&SymbolSpec::position_coordinate(k), &orbit).unwrap();
        assert!((mean[k] - avg).abs() < 0.1, "axis {k}: {} vs {avg}", mean[k]);
    }
    // Kepler: the time-averaged position sits at −(3/2)·e·a along the pericentre direction
    assert!((mean.norm() - 1.5 * 0.6f64.sin()).abs() < 0.1);
}

#[test]
fn grid_container_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sc = SemiclassicalScale::new(-0.5, 12).unwrap();
    let g = MomentumState::new(AlphaFrame::inclined(0.3), sc)
        .to_position_grid(&GridSpec::default())
        .unwrap();
    let path = dir.path().join("psi.grid");
    let sidecar = g.write(&path).unwrap();
    assert!(sidecar.exists());
    let back = GridState::read(&path).unwrap();
    assert_eq!(back.shape, g.shape);
    assert_eq!(back.samples, g.samples);
    assert_eq!(back.header(), g.header());
}

#[test]
fn unit_plateau_in_position_space_is_one() {
    let sc = SemiclassicalScale::new(-0.5, 16).unwrap();
    let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
    let a = SymbolSpec::position_plateau(2.5, 2.9);
    let r = matrix_element(&a, &st, &st, &QuantizeOptions::default()).unwrap();
    assert_eq!(r.method, Method::Multiplier);
    assert!((r.value.re - 1.0).abs() < 1e-3, "{}", r.value);
}
