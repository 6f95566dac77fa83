use num_complex::Complex64;

use super::{Estimate, QuantizeOptions};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use rayon::prelude::*;

use crate::quadrature::{complete_basis, gauss_legendre_on, sphere_directions, sum_complex, HopfRule, NeumaierComplex};
use crate::states::MomentumState;
use crate::symbol::Ball;

/// ∫ g(ξ) F_ħψ(ξ) conj(F_ħφ(ξ)) dξ.
///
/// With a support ball the integral is first tried in polar coordinates about
/// the ball's centre, which resolves the symbol; otherwise (or if that does not
/// converge) it is pulled back to S³,
/// ∫ g(p0 ω⁻¹(u)) (1 − u4) Φ_α(u) conj(Φ_β(u)) dΩ,
/// on a Hopf rule adapted to ψ's frame (|Φ_α|² = c²(1 − t)^N there), which
/// resolves the state.
pub fn momentum_multiplier(
    g: &(dyn Fn(&Vec3) -> f64 + Sync),
    support: Option<Ball>,
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<Estimate> {
    let mut spent = 0u64;
    if let Some(ball) = support {
        match ball_polar(g, &ball, psi, phi, opts) {
            Ok(e) => return Ok(e),
            Err((_, evals)) => spent = evals,
        }
    }
    hopf(g, psi, phi, opts).map(|e| Estimate {
        evaluations: e.evaluations + spent,
        ..e
    })
}

/// Smallest distance from the centre at which g is nonzero, found on a coarse scan.
fn inner_radius(g: &(dyn Fn(&Vec3) -> f64 + Sync), ball: &Ball) -> f64 {
    let steps = 512;
    let dirs = sphere_directions(12, 24);
    let c = ball.center();
    (0..=steps)
        .map(|k| ball.radius * k as f64 / steps as f64)
        .find(|&r| dirs.iter().any(|(d, _)| g(&(c + d * r)) != 0.0))
        .map_or(0.0, |r| (r - ball.radius / steps as f64).max(0.0))
}

fn ball_polar(
    g: &(dyn Fn(&Vec3) -> f64 + Sync),
    ball: &Ball,
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> std::result::Result<Estimate, (f64, u64)> {
    let n = psi.n() as f64;
    let c = ball.center();
    let r_lo = inner_radius(g, ball);
    let same = psi == phi;
    let integrand = |xi: &Vec3| -> Complex64 {
        let gv = g(xi);
        if gv == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = psi.eval(xi);
        let b = if same { a } else { phi.eval(xi) };
        a * b.conj() * gv
    };
    let integrate = |res: f64| -> (Complex64, u64) {
        let rr = gauss_legendre_on(r_lo, ball.radius, (48.0 * res).ceil() as usize);
        let dirs = sphere_directions(
            ((n + 24.0) * res).ceil() as usize,
            ((2.0 * n + 48.0) * res).ceil() as usize,
        );
        let parts: Vec<Complex64> = rr
            .par_iter()
            .map(|&(r, wr)| {
                let mut acc = NeumaierComplex::new();
                for (d, wd) in &dirs {
                    acc.add(integrand(&(c + d * r)) * *wd);
                }
                acc.value() * (wr * r * r)
            })
            .collect();
        (sum_complex(parts), (rr.len() * dirs.len()) as u64)
    };
    let mut res = opts.resolution;
    let mut evaluations = 0u64;
    let mut last = f64::INFINITY;
    for _ in 0..3 {
        let ((v, e1), (vc, e2)) = (integrate(res), integrate(0.7 * res));
        evaluations += e1 + e2;
        let err = (v - vc).norm();
        if err <= opts.quadrature_tol * v.norm().max(1e-3) {
            return Ok(Estimate {
                value: v,
                error: err,
                evaluations,
            });
        }
        last = err;
        res *= 1.6;
    }
    Err((last, evaluations))
}

fn hopf(
    g: &(dyn Fn(&Vec3) -> f64 + Sync),
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<Estimate> {
    let n = psi.n() as f64;
    let p0 = psi.scale.p0();
    let q = complete_basis(psi.frame.re(), psi.frame.im());
    let (sa, sb) = (*psi.spherical(), *phi.spherical());
    let integrand = |u: &crate::geometry::Vec4| -> Complex64 {
        let w = 1.0 - u[3];
        if w < 1e-14 {
            return Complex64::new(0.0, 0.0);
        }
        let xi = Vec3::new(u[0], u[1], u[2]) * (p0 / w);
        let gv = g(&xi);
        if gv == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        sa.eval_unchecked(u) * sb.eval_unchecked(u).conj() * (gv * w)
    };
    let t_max = if n > 0.0 { (80.0 / n).min(1.0) } else { 1.0 };
    let rule = |res: f64| {
        let n_t = (48.0 * res).ceil() as usize;
        let n_phi = ((2.0 * n + 128.0) * res).ceil() as usize;
        HopfRule::new(n_t, n_phi, n_phi, t_max)
    };
    let mut res = opts.resolution;
    let mut evaluations = 0u64;
    let mut last = f64::INFINITY;
    for _ in 0..6 {
        let (fine, coarse) = (rule(res), rule(0.7 * res));
        evaluations += (fine.len() + coarse.len()) as u64;
        let v = fine.integrate(&q, integrand);
        let vc = coarse.integrate(&q, integrand);
        let err = (v - vc).norm();
        if err <= opts.quadrature_tol * v.norm().max(1e-3) {
            return Ok(Estimate {
                value: v,
                error: err,
                evaluations,
            });
        }
        last = err;
        res *= 1.6;
    }
    Err(Error::NonConvergence {
        what: "momentum multiplier quadrature",
        estimate: last,
    })
}

/// ∫ f(x) ψ(x) conj(φ(x)) dx on the shared position grid.
pub fn position_multiplier(
    f: &(dyn Fn(&Vec3) -> f64 + Sync),
    support: Option<Ball>,
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<Estimate> {
    let ga = psi.to_position_grid(&opts.grid)?;
    let gb = if psi == phi {
        ga.clone()
    } else {
        phi.to_position_grid(&opts.grid)?
    };
    if let Some(b) = support {
        let lo = ga.origin[0];
        let hi = lo + ga.shape[0] as f64 * ga.spacing[0];
        let c = b.center();
        if (0..3).any(|k| c[k] - b.radius < lo || c[k] + b.radius > hi) {
            return Err(Error::Resolution(
                "symbol support extends beyond the position grid".into(),
            ));
        }
    }
    let m = ga.shape;
    let mut full = Vec::with_capacity(m[0] * m[1]);
    let mut even = Vec::with_capacity(m[0] * m[1] / 4);
    for i in 0..m[0] {
        for j in 0..m[1] {
            let mut row = Vec::with_capacity(m[2]);
            let mut row_even = Vec::new();
            for k in 0..m[2] {
                let idx = ga.index(i, j, k);
                let fx = f(&ga.coords(idx));
                if fx == 0.0 {
                    continue;
                }
                let z = ga.samples[idx] * gb.samples[idx].conj() * fx;
                row.push(z);
                if i % 2 == 0 && j % 2 == 0 && k % 2 == 0 {
                    row_even.push(z);
                }
            }
            full.push(sum_complex(row));
            even.push(sum_complex(row_even));
        }
    }
    let dv = ga.cell_volume();
    let value = sum_complex(full) * dv;
    let coarse = sum_complex(even) * (8.0 * dv);
    Ok(Estimate {
        value,
        error: (value - coarse).norm(),
        evaluations: ga.samples.len() as u64,
    })
}
