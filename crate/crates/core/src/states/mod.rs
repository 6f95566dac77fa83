//! Quantum side: spherical coherent states on S³, hydrogen coherent states in
//! momentum space, position grids and the Fock-map checks.

mod fock;
pub(crate) mod grid;

pub use fock::{fock_multiplier, hydrogen_residual, riesz_apply, riesz_eigenvalue, RieszValue};
pub use grid::{GridHeader, GridSpec, GridState, Space};

use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{stereographic_inv, AlphaFrame, SemiclassicalScale, Vec3, Vec4};
use crate::quadrature::{HopfRule, R3Rule};

/// c_N = √(N+1)/(π√2).
pub fn coherent_normalization(n: u32) -> f64 {
    (n as f64 + 1.0).sqrt() / (PI * SQRT_2)
}

/// Φ_{α,N}(u) = c_N (α·u)^N on S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalState {
    pub frame: AlphaFrame,
    pub n: u32,
    pub c_n: f64,
}

impl SphericalState {
    pub fn new(frame: AlphaFrame, n: u32) -> Self {
        Self {
            frame,
            n,
            c_n: coherent_normalization(n),
        }
    }

    pub fn eval(&self, u: &Vec4) -> Result<Complex64> {
        if (u.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("|u| = {} is not 1", u.norm())));
        }
        Ok(self.eval_unchecked(u))
    }

    #[inline]
    pub fn eval_unchecked(&self, u: &Vec4) -> Complex64 {
        self.frame.dot(u).powu(self.n) * self.c_n
    }

    /// ∫_{S³} |Φ|² dΩ with a product rule exact for the degree-2N integrand.
    pub fn norm_squared(&self) -> f64 {
        let rule = HopfRule::exact_for_degree(2 * self.n as usize);
        rule.integrate(&nalgebra::Matrix4::identity(), |u| {
            Complex64::new(self.eval_unchecked(u).norm_sqr(), 0.0)
        })
        .re
    }
}

/// The hydrogen coherent state Ψ_{α,N} in the momentum representation,
/// F_ħΨ(ξ) = p0^{−3/2} (2/(|ξ/p0|²+1))² Φ_{α,N}(ω(ξ/p0)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumState {
    pub frame: AlphaFrame,
    pub scale: SemiclassicalScale,
    sphere: SphericalState,
    amp: f64,
}

impl MomentumState {
    pub fn new(frame: AlphaFrame, scale: SemiclassicalScale) -> Self {
        let sphere = SphericalState::new(frame, scale.n());
        Self {
            frame,
            scale,
            sphere,
            amp: scale.p0().powf(-1.5),
        }
    }

    pub fn n(&self) -> u32 {
        self.scale.n()
    }

    pub fn spherical(&self) -> &SphericalState {
        &self.sphere
    }

    #[inline]
    pub fn eval(&self, xi: &Vec3) -> Complex64 {
        let z = xi / self.scale.p0();
        let conf = 2.0 / (z.norm_squared() + 1.0);
        self.sphere.eval_unchecked(&stereographic_inv(&z)) * (self.amp * conf * conf)
    }

    /// ∫_{R³} |F_ħΨ|² dξ by a spherical product rule in R³.
    pub fn norm_squared(&self) -> f64 {
        let n = self.n() as usize;
        let rule = R3Rule {
            scale: self.scale.p0(),
            n_chi: n + 24,
            n_theta: n + 24,
            n_phi: 2 * n + 16,
        };
        rule.integrate(&Vec3::zeros(), |xi| Complex64::new(self.eval(xi).norm_sqr(), 0.0))
            .re
    }

    /// Radius beyond which |F_ħΨ|² carries (for this family) negligible mass;
    /// used for sizing quadratures and grids.
    pub fn momentum_reach(&self) -> f64 {
        3.0 * self.scale.p0()
    }

    pub fn same_scale(&self, other: &MomentumState) -> bool {
        self.scale == other.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::complete_basis;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec4 {
        Vec4::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize()
    }

    #[test]
    fn spherical_examples() {
        let f = AlphaFrame::inclined(0.3);
        let st = SphericalState::new(f, 5);
        assert_abs_diff_eq!(st.eval(f.re()).unwrap().re, st.c_n, epsilon = 1e-15);
        let q = complete_basis(f.re(), f.im());
        assert!(st.eval(&q.column(2).into_owned()).unwrap().norm() < 1e-15);
        assert!(st.eval(&Vec4::new(2.0, 0.0, 0.0, 0.0)).is_err());
        for n in [0, 1, 4, 13, 32] {
            let s = SphericalState::new(AlphaFrame::inclined(0.7), n);
            assert_abs_diff_eq!(s.norm_squared(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn momentum_norm_and_value() {
        for n in [0, 3, 16] {
            let sc = SemiclassicalScale::new(-0.8, n).unwrap();
            let st = MomentumState::new(AlphaFrame::inclined(1.0), sc);
            assert_abs_diff_eq!(st.norm_squared(), 1.0, epsilon = 1e-8);
        }
        // ω(ξ/p0) = Re α = e1 at ξ = p0 e1
        let sc = SemiclassicalScale::new(-2.0, 6).unwrap();
        let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
        let v = st.eval(&Vec3::new(sc.p0(), 0.0, 0.0));
        assert_abs_diff_eq!(v.re, sc.p0().powf(-1.5) * st.spherical().c_n, epsilon = 1e-14);
    }

    #[test]
    fn phase_covariance_and_degree() {
        let f = AlphaFrame::inclined(0.4);
        let st = SphericalState::new(f, 7);
        let rot = SphericalState::new(f.phase_rotated(0.9), 7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = random_unit(&mut rng);
            let lhs = rot.eval(&u).unwrap();
            let rhs = st.eval(&u).unwrap() * Complex64::from_polar(1.0, 7.0 * 0.9);
            assert!((lhs - rhs).norm() < 1e-12);
        }
        for k in 0..20 {
            let s = k as f64 * 0.3;
            let u = f.re() * s.cos() + f.im() * s.sin();
            let v = st.eval(&u).unwrap();
            assert!((v - Complex64::from_polar(st.c_n, 7.0 * s)).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_equivariance() {
        // R' acts on R⁴ fixing e4; R is its restriction to R³.
        let sc = SemiclassicalScale::new(-0.5, 9).unwrap();
        let f = AlphaFrame::inclined(0.6);
        let r3 = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1);
        let mut r4 = nalgebra::Matrix4::identity();
        r4.fixed_view_mut::<3, 3>(0, 0).copy_from(r3.matrix());
        let a = MomentumState::new(f, sc);
        let b = MomentumState::new(f.rotated(&r4).unwrap(), sc);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let xi = Vec3::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let lhs = b.eval(&xi);
            let rhs = a.eval(&(r3.inverse() * xi));
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}
