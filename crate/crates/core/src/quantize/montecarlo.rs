use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use super::{Estimate, QuantizeOptions};
use crate::error::{Error, Result};
use crate::geometry::{stereographic_inv, Vec3, Vec4};
use crate::quadrature::{complete_basis, sum_complex, sum_f64, BallRule};
use crate::states::{MomentumState, SphericalState};
use crate::symbol::SymbolSpec;

const NU: f64 = 5.0;
const CHUNK: usize = 256;

/// Importance-sampled estimate of the scaled nine-dimensional form
///
/// ⟨Op_ħ(a)ψ, φ⟩ = (N+1)⁴/(16π⁵) ∫ a(y/p0², p0ζ) A(ζ, v) e^{i(N+1) y·v} dy dζ dv,
/// A = 16 (α·ω(ζ+v/2))^N (β̄·ω(ζ−v/2))^N / ((|ζ+v/2|²+1)²(|ζ−v/2|²+1)²).
///
/// ζ is drawn exactly from |Φ|² pulled back to R³ (a mixture over both frames for
/// cross terms), v from a Student-t of width 3/((N+1)R) with antithetic pairs ±v, and the y-integral over
/// the symbol's declared position support is done by a deterministic ball rule.
pub fn monte_carlo(
    a: &SymbolSpec,
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<Estimate> {
    let ball = a
        .position_support()
        .ok_or_else(|| Error::Symbol("Monte Carlo needs a declared position support".into()))?;
    let sc = psi.scale;
    let p0 = sc.p0();
    let n = sc.n() as i32;
    let np1 = n as f64 + 1.0;
    let res = opts.resolution;
    let r_y = ball.radius * p0 * p0;
    let c_y = ball.center() * p0 * p0;
    // y-rules of increasing order; a sample uses the first one that resolves
    // e^{i(N+1) y·v} across the ball
    let levels: Vec<(f64, BallRule)> = [12usize, 16, 24, 32, 48, 64]
        .iter()
        .map(|&k| {
            let k = ((k as f64) * res).ceil() as usize;
            (0.5 * k as f64, BallRule::new(&c_y, r_y, k, k, 2 * k))
        })
        .collect();
    let sigma = 3.0 / (np1 * r_y);

    let frames = if psi.frame == phi.frame {
        vec![psi.frame]
    } else {
        vec![psi.frame, phi.frame]
    };
    let bases: Vec<Matrix4<f64>> = frames.iter().map(|f| complete_basis(f.re(), f.im())).collect();
    let spheres: Vec<SphericalState> = frames.iter().map(|f| SphericalState::new(*f, sc.n())).collect();
    let (alpha, beta_bar) = (psi.frame, phi.frame.conj());
    let pref = np1.powi(4) / (16.0 * PI.powi(5));

    let q_zeta = |z: &Vec3| -> f64 {
        let w = stereographic_inv(z);
        let conf = 8.0 / (z.norm_squared() + 1.0).powi(3);
        let s: f64 = spheres.iter().map(|s| s.eval_unchecked(&w).norm_sqr()).sum();
        s / spheres.len() as f64 * conf
    };
    let t_norm = 6.0 / (1.329_340_388_179_137 * (NU * PI).powf(1.5));
    let q_v = |v: &Vec3| -> f64 {
        t_norm / sigma.powi(3) * (1.0 + v.norm_squared() / (NU * sigma * sigma)).powf(-(NU + 3.0) / 2.0)
    };

    let samples = opts.mc_samples.max(CHUNK);
    let chunks = samples.div_ceil(CHUNK);
    let chi2 = ChiSquared::new(NU).expect("valid dof");
    let values: Vec<(Vec<Complex64>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.mc_seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut out = Vec::with_capacity(count);
            let mut evals = 0u64;
            while out.len() < count {
                // ζ from |Φ|² of one of the frames
                let which = if bases.len() > 1 && rng.random::<bool>() { 1 } else { 0 };
                let t = 1.0 - rng.random::<f64>().powf(1.0 / np1);
                let (f1, f2) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
                let (c1, s1) = ((1.0 - t).max(0.0).sqrt(), t.max(0.0).sqrt());
                let u = bases[which] * Vec4::new(c1 * f1.cos(), c1 * f1.sin(), s1 * f2.cos(), s1 * f2.sin());
                if 1.0 - u[3] < 1e-12 {
                    continue;
                }
                let zeta = Vec3::new(u[0], u[1], u[2]) / (1.0 - u[3]);
                // v from a Student-t
                let g = Vec3::new(
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                );
                let v = g * (sigma / (chi2.sample(&mut rng) / NU).sqrt());

                let xi = zeta * p0;
                let phase = np1 * v.norm() * r_y;
                let rule = &levels
                    .iter()
                    .find(|l| phase <= l.0)
                    .unwrap_or(&levels[levels.len() - 1])
                    .1;
                let mut plus = Complex64::new(0.0, 0.0);
                let mut minus = Complex64::new(0.0, 0.0);
                for (y, w) in &rule.nodes {
                    let av = a.eval(&(y / (p0 * p0)), &xi);
                    if av != 0.0 {
                        let e = Complex64::from_polar(av * w, np1 * y.dot(&v));
                        plus += e;
                        minus += e.conj();
                    }
                }
                let weight = q_zeta(&zeta) * q_v(&v);
                let mut pair = Complex64::new(0.0, 0.0);
                for (sgn, inner) in [(1.0, plus), (-1.0, minus)] {
                    let vv = v * sgn;
                    let (zp, zm) = (zeta + vv * 0.5, zeta - vv * 0.5);
                    let amp = 16.0 / ((zp.norm_squared() + 1.0).powi(2) * (zm.norm_squared() + 1.0).powi(2));
                    let osc =
                        alpha.dot(&stereographic_inv(&zp)).powi(n) * beta_bar.dot(&stereographic_inv(&zm)).powi(n);
                    pair += inner * osc * amp;
                }
                out.push(pair * (0.5 * pref / weight));
                evals += rule.nodes.len() as u64;
            }
            (out, evals)
        })
        .collect();
    let evaluations = values.iter().map(|v| v.1).sum();
    let flat: Vec<Complex64> = values.into_iter().flat_map(|v| v.0).collect();
    let cnt = flat.len() as f64;
    let mean = sum_complex(flat.iter().copied()) / cnt;
    let var = sum_f64(flat.iter().map(|z| (z - mean).norm_sqr())) / (cnt - 1.0);
    let se = (var / cnt).sqrt();
    if let Some(tol) = opts.mc_tolerance {
        if se > tol {
            return Err(Error::MonteCarloTolerance {
                achieved: se,
                requested: tol,
            });
        }
    }
    Ok(Estimate {
        value: mean,
        error: se,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AlphaFrame, SemiclassicalScale};
    use crate::quantize::{matrix_element, Method};

    #[test]
    fn deterministic_for_fixed_seed() {
        let sc = SemiclassicalScale::new(-0.5, 4).unwrap();
        let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
        let a = SymbolSpec::default_radial_bump(sc.p0());
        let opts = QuantizeOptions {
            mc_samples: 1024,
            ..QuantizeOptions::default()
        }
        .with_method(Method::MonteCarlo);
        let r1 = matrix_element(&a, &st, &st, &opts).unwrap();
        let r2 = matrix_element(&a, &st, &st, &opts).unwrap();
        assert_eq!(r1.value, r2.value);
        assert_eq!(r1.error_estimate, r2.error_estimate);
    }

    #[test]
    fn prefactor_matches_multiplier() {
        let sc = SemiclassicalScale::new(-0.5, 8).unwrap();
        let st = MomentumState::new(AlphaFrame::inclined(0.4), sc);
        let a = SymbolSpec::default_radial_bump(sc.p0());
        let base = QuantizeOptions {
            mc_samples: 4096,
            ..QuantizeOptions::default()
        };
        let m = matrix_element(&a, &st, &st, &base).unwrap();
        let mc = matrix_element(&a, &st, &st, &base.with_method(Method::MonteCarlo)).unwrap();
        assert!(
            (m.value - mc.value).norm() < 4.0 * mc.error_estimate + 1e-4,
            "{} vs {} ± {}",
            m.value,
            mc.value,
            mc.error_estimate
        );
        assert!(mc.error_estimate < 0.1);
    }
}
