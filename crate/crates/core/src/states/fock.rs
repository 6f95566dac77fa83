use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::{MomentumState, SphericalState};
use crate::error::{Error, Result};
use crate::geometry::{Vec3, Vec4};
use crate::quadrature::{basis_with_last, gauss_legendre_on, sphere_directions, sum_complex, NeumaierComplex};

/// Eigenvalue of T on degree-N harmonics: T Φ = 2π²/(N+1) Φ.
pub fn riesz_eigenvalue(n: u32) -> f64 {
    2.0 * PI * PI / (n as f64 + 1.0)
}

/// The multiplier λ_N = (N+1)/(2π²) with λ_N · TΦ = Φ.
pub fn fock_multiplier(n: u32) -> f64 {
    (n as f64 + 1.0) / (2.0 * PI * PI)
}

#[derive(Debug, Clone, Copy)]
pub struct RieszValue {
    pub value: Complex64,
    pub error_estimate: f64,
}

/// T Φ(u) = ∫ Φ(y)/|y − u|² dΩ(y).
///
/// Coordinates centred at u: y = Q(sin ψ sin θ cos φ, sin ψ sin θ sin φ, sin ψ cos θ, cos ψ)
/// with Q e4 = u, for which dΩ/|y − u|² = cos²(ψ/2) sin θ dψ dθ dφ. The constant
/// Φ(u) is subtracted and added back through ∫ dΩ/|y − u|² = 2π².
pub fn riesz_apply(state: &SphericalState, u: &Vec4) -> Result<RieszValue> {
    if (u.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput("riesz_apply needs a unit vector".into()));
    }
    let n = state.n as usize;
    let fine = riesz_quadrature(state, u, n + 16, 2 * n + 16);
    let coarse = riesz_quadrature(state, u, n + 8, 2 * n + 10);
    let err = (fine - coarse).norm();
    let scale = fine.norm().max(state.c_n * 1e-6);
    if err > 1e-3 * scale {
        return Err(Error::NonConvergence {
            what: "Riesz quadrature",
            estimate: err / scale,
        });
    }
    Ok(RieszValue {
        value: fine,
        error_estimate: err,
    })
}

fn riesz_quadrature(state: &SphericalState, u: &Vec4, n_ang: usize, n_phi: usize) -> Complex64 {
    let q = basis_with_last(u);
    let phi_u = state.eval_unchecked(u);
    let psi = gauss_legendre_on(0.0, PI, n_ang);
    let dirs = sphere_directions(n_ang, n_phi);
    let parts: Vec<Complex64> = psi
        .par_iter()
        .map(|&(p, wp)| {
            let (sp, cp) = p.sin_cos();
            let k = (0.5 * p).cos().powi(2) * wp;
            let mut acc = NeumaierComplex::new();
            for (d, wd) in &dirs {
                let y = q * Vec4::new(sp * d[0], sp * d[1], sp * d[2], cp);
                acc.add((state.eval_unchecked(&y) - phi_u) * *wd);
            }
            acc.value() * k
        })
        .collect();
    sum_complex(parts) + phi_u * (2.0 * PI * PI)
}

/// Maximum relative residual of
/// (|ξ|²/2 − E) F_ħΨ(ξ) = (1/(2π²ħ)) ∫ F_ħΨ(p)/|p − ξ|² dp
/// over `samples`, relative to the largest left-hand side.
pub fn hydrogen_residual(state: &MomentumState, samples: &[Vec3]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no momentum samples".into()));
    }
    let sc = state.scale;
    let mut worst: f64 = 0.0;
    let mut lhs_max: f64 = 0.0;
    for xi in samples {
        let lhs = state.eval(xi) * (0.5 * xi.norm_squared() - sc.energy());
        let fine = coulomb_convolution(state, xi, 96, 48, 64);
        let coarse = coulomb_convolution(state, xi, 72, 36, 48);
        let pref = 1.0 / (2.0 * PI * PI * sc.hbar());
        let rhs = fine * pref;
        let est = (fine - coarse).norm() * pref;
        if est > 1e-3 * lhs.norm().max(rhs.norm()).max(1e-300) && est > 1e-12 {
            return Err(Error::NonConvergence {
                what: "Coulomb convolution",
                estimate: est,
            });
        }
        worst = worst.max((lhs - rhs).norm());
        lhs_max = lhs_max.max(lhs.norm());
    }
    Ok(worst / lhs_max)
}

/// ∫ F_ħΨ(p)/|p − ξ|² dp in spherical coordinates centred at ξ, which cancel
/// the kernel: ∫∫ F_ħΨ(ξ + ρ n) dρ dn with ρ = p0 tan(χ/2).
fn coulomb_convolution(state: &MomentumState, xi: &Vec3, n_chi: usize, n_theta: usize, n_phi: usize) -> Complex64 {
    let p0 = state.scale.p0();
    let chi = gauss_legendre_on(0.0, PI, n_chi);
    let dirs = sphere_directions(n_theta, n_phi);
    let parts: Vec<Complex64> = chi
        .par_iter()
        .map(|&(c, wc)| {
            let h = 0.5 * c;
            let rho = p0 * h.tan();
            let jac = p0 / (2.0 * h.cos().powi(2));
            let mut acc = NeumaierComplex::new();
            for (d, wd) in &dirs {
                acc.add(state.eval(&(xi + d * rho)) * *wd);
            }
            acc.value() * (wc * jac)
        })
        .collect();
    sum_complex(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AlphaFrame, SemiclassicalScale};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn riesz_constant() {
        let st = SphericalState::new(AlphaFrame::basis(1, 2).unwrap(), 0);
        let u = Vec4::new(0.1, -0.5, 0.3, 0.8).normalize();
        let t = riesz_apply(&st, &u).unwrap().value / st.c_n;
        assert!((t.re - 2.0 * PI * PI).abs() < 1e-10 && t.im.abs() < 1e-12);
    }

    #[test]
    fn riesz_eigen_and_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = AlphaFrame::inclined(0.5);
        for n in [1, 3, 6] {
            let st = SphericalState::new(f, n);
            for _ in 0..5 {
                let u = Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
                let t = riesz_apply(&st, &u).unwrap().value;
                let phi = st.eval_unchecked(&u);
                assert!((t * fock_multiplier(n) - phi).norm() < 1e-8 * st.c_n);
            }
        }
        // T commutes with rotations: (T Φ_{Rα})(Ru) = (T Φ_α)(u)
        let r = nalgebra::Rotation3::from_euler_angles(0.2, 0.4, -0.9);
        let mut r4 = nalgebra::Matrix4::identity();
        r4.fixed_view_mut::<3, 3>(1, 1).copy_from(r.matrix());
        let a = SphericalState::new(f, 4);
        let b = SphericalState::new(f.rotated(&r4).unwrap(), 4);
        let u = Vec4::new(0.3, 0.1, -0.7, 0.2).normalize();
        let ta = riesz_apply(&a, &u).unwrap().value;
        let tb = riesz_apply(&b, &(r4 * u)).unwrap().value;
        assert!((ta - tb).norm() < 1e-10);
    }

    #[test]
    fn residual_small_for_low_n() {
        let samples: Vec<Vec3> = vec![
            Vec3::new(0.3, 0.2, -0.1),
            Vec3::new(1.0, 0.5, 0.0),
            Vec3::new(-0.4, 1.2, 0.7),
        ];
        for (e, n) in [(-0.5, 0), (-0.5, 2), (-1.7, 2)] {
            let sc = SemiclassicalScale::new(e, n).unwrap();
            let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
            let s: Vec<Vec3> = samples.iter().map(|v| v * sc.p0()).collect();
            let r = hydrogen_residual(&st, &s).unwrap();
            assert!(r < 1e-6, "N={n} residual {r}");
        }
    }
}
