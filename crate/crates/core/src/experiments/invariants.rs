//! A fast property suite over all modules, run by `hydrogen-lab invariants`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::Instant;

use super::{mixed_measure_study, radon_transform, theorem1_study, GeodesicMeasure};
use crate::error::Result;
use crate::geometry::{
    hamilton_residual, moser_inv, moser_map, symplectic_defect, AlphaFrame, KeplerOrbit, PhasePoint,
    SemiclassicalScale, Vec3, Vec4,
};
use crate::quantize::{cross_matrix_element, matrix_element, QuantizeOptions};
use crate::states::{fock_multiplier, riesz_apply, MomentumState, SphericalState};
use crate::stationary::{
    check_stationarity, critical_point, hessian_det_closed, hessian_numeric, leading_order_identity,
};
use crate::symbol::{SeparableTerm, SymbolSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    /// The measured worst case, compared against `threshold`.
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    pub wall_time_s: f64,
}

type Check = (&'static str, f64, fn() -> Result<(f64, String)>);

fn random_phase_point(rng: &mut ChaCha8Rng) -> PhasePoint {
    loop {
        let x = Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0));
        let xi = Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0));
        if let Ok(p) = PhasePoint::new(x, xi) {
            if x.norm() > 0.2 {
                return p;
            }
        }
    }
}

fn symplectic() -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sc = SemiclassicalScale::new(-0.7, 1)?;
    let worst = (0..20)
        .map(|_| symplectic_defect(&random_phase_point(&mut rng), &sc, 1e-5))
        .fold(0.0, f64::max);
    Ok((worst, "max |JᵀΩJ − p0Ω| over 20 points".into()))
}

fn energy_surface() -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sc = SemiclassicalScale::new(-0.5, 1)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let dir = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
        let r: f64 = rng.random_range(0.2..1.9);
        let speed = (2.0 * (-0.5 + 1.0 / r)).sqrt();
        let vdir = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
        let p = PhasePoint::new(dir * r, vdir * speed)?;
        let m = moser_map(&p, &sc);
        let back = moser_inv(&m, &sc)?;
        worst = worst.max((m.eta.norm() - 1.0).abs()).max(back.distance(&p));
    }
    Ok((
        worst,
        "| |η| − 1 | and round-trip distance over 20 points on H = −1/2".into(),
    ))
}

fn hamilton() -> Result<(f64, String)> {
    let sc = SemiclassicalScale::new(-0.5, 1)?;
    let orbit = KeplerOrbit::new(AlphaFrame::inclined(0.9), sc);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        worst = worst.max(hamilton_residual(
            &orbit,
            orbit.period() * (k as f64 + 0.3) / 50.0,
            1e-5,
        )?);
    }
    Ok((worst, "Hamilton residual at 50 times, θ0 = 0.9".into()))
}

fn unit_norms() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in [0, 5, 12] {
        let f = AlphaFrame::inclined(0.4);
        worst = worst.max((SphericalState::new(f, n).norm_squared() - 1.0).abs());
        let sc = SemiclassicalScale::new(-0.5, n)?;
        worst = worst.max((MomentumState::new(f, sc).norm_squared() - 1.0).abs());
    }
    Ok((worst, "‖Φ‖² and ‖F_ħΨ‖² − 1 for N ∈ {0, 5, 12}".into()))
}

fn fock() -> Result<(f64, String)> {
    let st = SphericalState::new(AlphaFrame::inclined(0.3), 2);
    let mut worst: f64 = 0.0;
    for u in [
        Vec4::new(0.6, 0.0, 0.8, 0.0),
        Vec4::new(0.5, 0.5, 0.5, 0.5),
        Vec4::new(0.0, 0.6, 0.0, -0.8),
    ] {
        let t = riesz_apply(&st, &u)?;
        let phi = st.eval(&u)?;
        worst = worst.max((t.value * fock_multiplier(2) - phi).norm() / phi.norm());
    }
    Ok((worst, "relative error of λ_N TΦ = Φ at N = 2, 3 points".into()))
}

fn hermitian() -> Result<(f64, String)> {
    let sc = SemiclassicalScale::new(-0.5, 6)?;
    let (a, b) = (AlphaFrame::inclined(0.2), AlphaFrame::basis(1, 3)?);
    let s = SymbolSpec::momentum_ball_bump(Vec3::new(0.6, 0.3, 0.1), 0.8, 1.0);
    let o = QuantizeOptions::default();
    let m1 = cross_matrix_element(&s, &a, &b, &sc, &o)?;
    let m2 = cross_matrix_element(&s, &b, &a, &sc, &o)?;
    let tol = m1.error_estimate + m2.error_estimate + 1e-12;
    Ok((
        (m1.value - m2.value.conj()).norm() / tol,
        format!("|m_ab − conj m_ba| in units of the summed error estimates ({tol:.2e})"),
    ))
}

fn linearity() -> Result<(f64, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a1 = SymbolSpec::default_radial_bump(1.0);
    let a2 = SymbolSpec::momentum_ball_bump(Vec3::new(0.0, 1.0, 0.0), 0.7, 1.0);
    let a3 = SymbolSpec::position_ball_bump(Vec3::new(-1.0, 0.2, 0.0), 0.9, 1.0 / 3.0);
    let terms: Vec<SeparableTerm> = [&a1, &a2, &a3]
        .iter()
        .flat_map(|a| a.separable_terms().expect("separable"))
        .collect();
    let sum = SymbolSpec::separable("sum", terms);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_phase_point(&mut rng);
        let parts = a1.eval(&p.x, &p.xi) + a2.eval(&p.x, &p.xi) + a3.eval(&p.x, &p.xi);
        worst = worst.max((sum.eval(&p.x, &p.xi) - parts).abs());
    }
    Ok((
        worst,
        "separable sum against the sum of its parts at 1000 points".into(),
    ))
}

fn stationarity() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let (beta, theta0) = (-2.8 + 0.6 * k as f64, -1.2 + 0.25 * k as f64);
        let r = check_stationarity(&critical_point(beta, theta0)?, &AlphaFrame::inclined(theta0))?;
        worst = worst.max(r.max_gradient()).max(r.im_p.abs() * 1e4);
    }
    Ok((worst, "max(|∇P|, 1e4·|Im P|) over 10 critical points".into()))
}

fn hessian() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for (beta, theta0) in [
        (0.3, 0.2),
        (1.0, std::f64::consts::FRAC_PI_4),
        (-2.0, 1.3),
        (0.5, std::f64::consts::FRAC_PI_2),
    ] {
        let r = hessian_numeric(beta, theta0)?;
        let c = hessian_det_closed(beta, theta0);
        worst = worst.max((r.sqrt_abs_det - c).abs() / c);
    }
    Ok((worst, "relative error of |det Hess|^{1/2} at 4 points".into()))
}

fn scalar_identity() -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let (l, r) = leading_order_identity(-3.0 + 0.06 * k as f64, -1.5 + 0.03 * k as f64)?;
        worst = worst.max((l - r).abs());
    }
    Ok((worst, "leading-order cancellation at 100 points".into()))
}

fn prediction_consistency() -> Result<(f64, String)> {
    let sc = SemiclassicalScale::new(-0.5, 8)?;
    let (f1, f2) = (AlphaFrame::basis(1, 2)?, AlphaFrame::inclined(0.7));
    let a = SymbolSpec::default_radial_bump(1.0);
    let m = GeodesicMeasure::new(vec![(0.9, f1), (0.1, f2)])?;
    let direct = 0.9 * radon_transform(&a, &f1, &sc)? + 0.1 * radon_transform(&a, &f2, &sc)?;
    let via_studies = {
        let o = QuantizeOptions::default();
        let mixed = mixed_measure_study(&m, -0.5, &a, &[2], &o)?.predicted;
        let t1 = theorem1_study(&f1, -0.5, &a, &[2], &o)?.predicted;
        let t2 = theorem1_study(&f2, -0.5, &a, &[2], &o)?.predicted;
        (mixed - (0.9 * t1 + 0.1 * t2)).abs()
    };
    Ok((
        (m.predicted(&a, &sc)? - direct).abs().max(via_studies),
        "mixed prediction vs weighted single predictions".into(),
    ))
}

fn monte_carlo_determinism() -> Result<(f64, String)> {
    let sc = SemiclassicalScale::new(-0.5, 2)?;
    let st = MomentumState::new(AlphaFrame::basis(1, 2)?, sc);
    let a = SymbolSpec::position_ball_bump(Vec3::new(-1.0, 0.0, 0.0), 1.0, 1.0).as_general();
    let o = QuantizeOptions {
        mc_samples: 512,
        ..QuantizeOptions::default()
    };
    let r1 = matrix_element(&a, &st, &st, &o)?;
    let r2 = matrix_element(&a, &st, &st, &o)?;
    Ok((
        (r1.value - r2.value).norm(),
        "repeat Monte Carlo run with the same seed".into(),
    ))
}

const CHECKS: &[Check] = &[
    ("moser_symplectic", 1e-8, symplectic),
    ("energy_surface_round_trip", 1e-10, energy_surface),
    ("kepler_hamilton_equations", 1e-5, hamilton),
    ("unit_norm_chain", 1e-6, unit_norms),
    ("fock_eigenvalue", 1e-2, fock),
    ("hermitian_symmetry", 1.0, hermitian),
    ("symbol_linearity", 1e-10, linearity),
    ("critical_manifold", 1e-6, stationarity),
    ("hessian_determinant", 1e-4, hessian),
    ("leading_order_identity", 1e-12, scalar_identity),
    ("prediction_consistency", 1e-12, prediction_consistency),
    ("monte_carlo_determinism", 0.0, monte_carlo_determinism),
];

pub fn invariant_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Runs every check; a check that errors counts as failed.
pub fn run_invariants() -> Vec<InvariantResult> {
    CHECKS
        .iter()
        .map(|(name, threshold, f)| {
            let start = Instant::now();
            let (passed, measured, detail) = match f() {
                Ok((m, d)) => (m <= *threshold, m, d),
                Err(e) => (false, f64::NAN, format!("error: {e}")),
            };
            InvariantResult {
                name: name.to_string(),
                passed,
                measured,
                threshold: *threshold,
                detail,
                wall_time_s: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
