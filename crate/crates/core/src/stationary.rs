//! The stationary-phase skeleton of the diagonal matrix element at E = −1/2:
//! critical points of P, their Hessians, and the scalar identities that turn the
//! stationary-phase sum into the orbit average.
//!
//! Variables are unscaled with p0 = 1, so (y, ζ, v) = (x, ξ, v).

use nalgebra::{Matrix3, SMatrix};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{AlphaFrame, Vec3};
use crate::quantize::OscillatoryForm;

pub type Hessian8 = SMatrix<Complex64, 8, 8>;

/// Tolerance for treating the frame as a collision frame (|cos θ0| below it).
const COLLISION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub beta: f64,
    pub theta0: f64,
    pub x: Vec3,
    pub xi: Vec3,
    pub v: Vec3,
}

/// x = (sin β − sin θ0, −cos θ0 cos β, 0), ξ = (cos β, sin β cos θ0, 0)/(1 − sin θ0 sin β), v = 0.
pub fn critical_point(beta: f64, theta0: f64) -> Result<CriticalPoint> {
    let (sb, cb) = beta.sin_cos();
    let (st, ct) = theta0.sin_cos();
    let d = 1.0 - st * sb;
    if d <= 1e-12 {
        return Err(Error::InvalidInput(format!(
            "1 − sin θ0 sin β = {d:e}: the collision endpoint has no critical point"
        )));
    }
    Ok(CriticalPoint {
        beta,
        theta0,
        x: Vec3::new(sb - st, -ct * cb, 0.0),
        xi: Vec3::new(cb, sb * ct, 0.0) / d,
        v: Vec3::zeros(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationarityReport {
    /// max |∂P/∂x_k|, max |∂P/∂ξ_k|, max |∂P/∂v_k|
    pub grad_x: f64,
    pub grad_xi: f64,
    pub grad_v: f64,
    pub im_p: f64,
}

impl StationarityReport {
    pub fn max_gradient(&self) -> f64 {
        self.grad_x.max(self.grad_xi).max(self.grad_v)
    }

    /// |∇P| < 1e−6 and |Im P| < 1e−10.
    pub fn is_critical(&self) -> bool {
        self.max_gradient() < 1e-6 && self.im_p.abs() < 1e-10
    }
}

/// Central-difference gradient of the diagonal phase for `frame` at an arbitrary
/// point (x, ξ, v), with the logarithm branch fixed at that point.
pub fn stationarity_at(frame: &AlphaFrame, x: &Vec3, xi: &Vec3, v: &Vec3) -> Result<StationarityReport> {
    let form = OscillatoryForm::for_frames(*frame, *frame, 1, 1.0);
    let reference = form.branch_reference(xi, v);
    let p = |z: &[f64; 9]| -> Result<Complex64> {
        form.phase_near(
            &Vec3::new(z[0], z[1], z[2]),
            &Vec3::new(z[3], z[4], z[5]),
            &Vec3::new(z[6], z[7], z[8]),
            reference,
        )
    };
    let base = [x[0], x[1], x[2], xi[0], xi[1], xi[2], v[0], v[1], v[2]];
    let h = 1e-5;
    let mut g = [0.0; 9];
    for (k, gk) in g.iter_mut().enumerate() {
        let (mut a, mut b) = (base, base);
        a[k] += h;
        b[k] -= h;
        *gk = ((p(&a)? - p(&b)?) / (2.0 * h)).norm();
    }
    let m = |r: std::ops::Range<usize>| g[r].iter().copied().fold(0.0, f64::max);
    Ok(StationarityReport {
        grad_x: m(0..3),
        grad_xi: m(3..6),
        grad_v: m(6..9),
        im_p: p(&base)?.im,
    })
}

pub fn check_stationarity(p: &CriticalPoint, frame: &AlphaFrame) -> Result<StationarityReport> {
    stationarity_at(frame, &p.x, &p.xi, &p.v)
}

fn is_collision_angle(theta0: f64) -> bool {
    theta0.cos().abs() < COLLISION_TOL
}

/// |det Hess P̃|^{1/2}: 2(1 − sin β sin θ0)³ √(1 − sin²β sin²θ0) on generic orbits,
/// 2(1 − σ sin β)³ |cos β| with σ = sin θ0 = ±1 on collision orbits.
pub fn hessian_det_closed(beta: f64, theta0: f64) -> f64 {
    let sb = beta.sin();
    if is_collision_angle(theta0) {
        let sigma = theta0.sin().signum();
        2.0 * (1.0 - sigma * sb).powi(3) * beta.cos().abs()
    } else {
        let st = theta0.sin();
        2.0 * (1.0 - sb * st).powi(3) * (1.0 - sb * sb * st * st).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// x = x(β) + t n_β + s e3, ξ and v free.
    Generic,
    /// (x1, ξ1) = (x(β), ξ1(β)) + t1 (m, m'), x2, x3, ξ2, ξ3 and v free.
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianReport {
    pub chart: Chart,
    /// Coordinate order: generic (t, s, ξ1, ξ2, ξ3, v1, v2, v3);
    /// collision (t1, x2, x3, ξ2, ξ3, v1, v2, v3).
    pub matrix: Hessian8,
    pub det: Complex64,
    pub sqrt_abs_det: f64,
    /// The chart's volume factor at the critical point.
    pub jacobian: f64,
    pub normal: Vec3,
}

/// Unit normal to the orbit inside its plane.
pub fn orbit_normal_at(beta: f64, theta0: f64) -> Vec3 {
    let (sb, cb) = beta.sin_cos();
    let ct = theta0.cos();
    Vec3::new(-sb * ct, cb, 0.0).normalize()
}

/// 8×8 transverse Hessian of the phase by central differences (step 1e−4).
pub fn hessian_numeric(beta: f64, theta0: f64) -> Result<HessianReport> {
    let cp = critical_point(beta, theta0)?;
    let frame = AlphaFrame::inclined(theta0);
    let form = OscillatoryForm::for_frames(frame, frame, 1, 1.0);
    let reference = form.branch_reference(&cp.xi, &cp.v);
    let collision = is_collision_angle(theta0);
    let (sb, cb) = beta.sin_cos();
    let normal = orbit_normal_at(beta, theta0);
    // collision chart direction in the (x1, ξ1) plane, scaled so the chart's
    // volume factor is |cos β|
    let sigma = theta0.sin().signum();
    let tangent = (cb, sigma / (1.0 - sigma * sb));
    let c = cb.abs() / (tangent.0 * tangent.0 + tangent.1 * tangent.1);
    let m = (-tangent.1 * c, tangent.0 * c);
    let chart = |w: &[f64; 8]| -> (Vec3, Vec3, Vec3) {
        let v = Vec3::new(w[5], w[6], w[7]);
        if collision {
            let x = cp.x + Vec3::new(w[0] * m.0, w[1], w[2]);
            let xi = cp.xi + Vec3::new(w[0] * m.1, w[3], w[4]);
            (x, xi, v)
        } else {
            let x = cp.x + normal * w[0] + Vec3::z() * w[1];
            (x, cp.xi + Vec3::new(w[2], w[3], w[4]), v)
        }
    };
    let p = |w: &[f64; 8]| -> Result<Complex64> {
        let (x, xi, v) = chart(w);
        form.phase_near(&x, &xi, &v, reference)
    };
    let h = 1e-4;
    let mut hm = Hessian8::zeros();
    for i in 0..8 {
        for j in i..8 {
            let at = |si: f64, sj: f64| {
                let mut w = [0.0; 8];
                w[i] += si * h;
                w[j] += sj * h;
                p(&w)
            };
            let d = (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h);
            hm[(i, j)] = d;
            hm[(j, i)] = d;
        }
    }
    let det = hm.lu().determinant();
    if det.norm() < 1e-10 {
        return Err(Error::IllConditioned(det.norm()));
    }
    let jacobian = if collision {
        cb.abs()
    } else {
        (1.0 - sb * sb * theta0.sin().powi(2)).sqrt()
    };
    Ok(HessianReport {
        chart: if collision { Chart::Collision } else { Chart::Generic },
        matrix: hm,
        det,
        sqrt_abs_det: det.norm().sqrt(),
        jacobian,
        normal,
    })
}

/// |√(1 − sin²β sin²θ0)|: the volume factor of the generic chart on the orbit.
pub fn tubular_jacobian_closed(beta: f64, theta0: f64) -> f64 {
    (1.0 - (beta.sin() * theta0.sin()).powi(2)).sqrt()
}

/// |det ∂x/∂(β, t, s)| of x = x(β) + t n_β + s e3 by central differences.
pub fn tubular_jacobian_numeric(beta: f64, theta0: f64, t: f64) -> Result<f64> {
    let map = |b: f64, tt: f64, s: f64| -> Result<Vec3> {
        Ok(critical_point(b, theta0)?.x + orbit_normal_at(b, theta0) * tt + Vec3::z() * s)
    };
    let h = 1e-5;
    let d_beta = (map(beta + h, t, 0.0)? - map(beta - h, t, 0.0)?) / (2.0 * h);
    let d_t = (map(beta, t + h, 0.0)? - map(beta, t - h, 0.0)?) / (2.0 * h);
    let d_s = (map(beta, t, h)? - map(beta, t, -h)?) / (2.0 * h);
    Ok(Matrix3::from_columns(&[d_beta, d_t, d_s]).determinant().abs())
}

/// |ξ(β)|² + 1 and its closed form 2/(1 − sin θ0 sin β).
pub fn xi_norm_identity(beta: f64, theta0: f64) -> Result<(f64, f64)> {
    let cp = critical_point(beta, theta0)?;
    Ok((cp.xi.norm_squared() + 1.0, 2.0 / (1.0 - theta0.sin() * beta.sin())))
}

/// The pointwise cancellation in the leading-order term:
/// 16/(|ξ(β)|²+1)⁴ · J / |det|^{1/2} against (1 − sin β sin θ0)/2.
pub fn leading_order_identity(beta: f64, theta0: f64) -> Result<(f64, f64)> {
    let cp = critical_point(beta, theta0)?;
    let q = cp.xi.norm_squared() + 1.0;
    let j = tubular_jacobian_closed(beta, theta0);
    let lhs = 16.0 / q.powi(4) * j / hessian_det_closed(beta, theta0);
    Ok((lhs, 0.5 * (1.0 - beta.sin() * theta0.sin())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hamiltonian, KeplerOrbit, PhasePoint, SemiclassicalScale};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn examples() {
        let c = critical_point(0.0, 0.0).unwrap();
        assert!((c.x - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        assert!((c.xi - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        let c = critical_point(0.0, FRAC_PI_2).unwrap();
        assert!((c.x - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((c.xi - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!(critical_point(FRAC_PI_2, FRAC_PI_2).is_err());
        assert_eq!(hessian_det_closed(0.7, 0.0), 2.0);
        assert!((hessian_det_closed(0.0, FRAC_PI_2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn on_energy_surface_and_on_orbit() {
        let sc = SemiclassicalScale::new(-0.5, 1).unwrap();
        for k in 0..50 {
            let beta = -3.0 + 0.12 * k as f64;
            let theta0 = -1.4 + 0.056 * k as f64;
            let cp = critical_point(beta, theta0).unwrap();
            let pp = PhasePoint::new(cp.x, cp.xi).unwrap();
            assert!((hamiltonian(&pp).unwrap() + 0.5).abs() < 1e-12);
            let orbit = KeplerOrbit::new(AlphaFrame::inclined(theta0), sc);
            let k = orbit.state_at_parameter(beta).unwrap();
            assert!((k.x - cp.x).norm() < 1e-10 && (k.xi - cp.xi).norm() < 1e-10);
        }
    }

    #[test]
    fn gradients_vanish_on_the_manifold() {
        for (beta, theta0) in [(0.3, 0.2), (2.9, 1.0), (-1.0, FRAC_PI_2), (3.0, -0.7)] {
            let f = AlphaFrame::inclined(theta0);
            let r = check_stationarity(&critical_point(beta, theta0).unwrap(), &f).unwrap();
            assert!(r.is_critical(), "{r:?}");
            let cp = critical_point(beta, theta0).unwrap();
            let off = stationarity_at(&f, &cp.x, &cp.xi, &Vec3::new(0.0, 0.0, 1e-2)).unwrap();
            assert!((off.grad_x - 1e-2).abs() < 1e-8);
            let lifted = stationarity_at(&f, &cp.x, &(cp.xi + Vec3::new(0.0, 0.0, 0.05)), &cp.v).unwrap();
            assert!(lifted.im_p > 0.0);
        }
    }

    #[test]
    fn hessian_blocks_and_determinant() {
        let r = hessian_numeric(FRAC_PI_3, FRAC_PI_4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(r.matrix[(i, j)].norm() < 1e-6);
            }
        }
        for k in 0..3 {
            assert!((r.matrix[(0, 5 + k)] - r.normal[k]).norm() < 1e-6);
        }
        let closed = hessian_det_closed(FRAC_PI_3, FRAC_PI_4);
        assert!((r.sqrt_abs_det - closed).abs() < 1e-4 * closed);
        for beta in [0.0, 0.5, -1.0, 2.5, -2.0] {
            for theta0 in [FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2 - 0.1] {
                let r = hessian_numeric(beta, theta0).unwrap();
                let closed = hessian_det_closed(beta, theta0);
                assert!(
                    (r.sqrt_abs_det - closed).abs() < 1e-4 * closed,
                    "{beta} {theta0}: {} vs {closed}",
                    r.sqrt_abs_det
                );
            }
        }
    }

    #[test]
    fn generic_formula_tends_to_collision_formula() {
        for beta in [-2.5, -1.0, 0.0, 0.8, 2.0] {
            let g = hessian_det_closed(beta, FRAC_PI_2 - 1e-3);
            let c = hessian_det_closed(beta, FRAC_PI_2);
            assert!((g - c).abs() < 1e-3 * c.max(1.0));
        }
    }

    #[test]
    fn scalar_identities() {
        for k in 0..100 {
            let beta = -3.1 + 0.0621 * k as f64;
            let theta0 = -1.5 + 0.0301 * k as f64;
            let (a, b) = xi_norm_identity(beta, theta0).unwrap();
            assert!((a - b).abs() < 1e-12 * b);
            let (l, r) = leading_order_identity(beta, theta0).unwrap();
            assert!((l - r).abs() < 1e-12);
            let j = tubular_jacobian_numeric(beta, theta0, 0.0).unwrap();
            assert!((j - tubular_jacobian_closed(beta, theta0)).abs() < 1e-8);
        }
    }
}
