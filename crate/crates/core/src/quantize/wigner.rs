use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{Estimate, QuantizeOptions};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::quadrature::{sum_complex, NeumaierComplex};
use crate::states::grid::{fft3, fft_friendly};
use crate::states::MomentumState;
use crate::symbol::{Ball, SeparableTerm};

/// Regular cubic grid of n³ momentum points `origin + spacing·(i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub n: usize,
}

impl XiGrid {
    /// Grid on [−half_width, half_width)³.
    pub fn centered(half_width: f64, n: usize) -> Self {
        Self {
            origin: [-half_width; 3],
            spacing: 2.0 * half_width / n as f64,
            n,
        }
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
            self.origin[2] + k as f64 * self.spacing,
        )
    }

    pub fn len(&self) -> usize {
        self.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// W_{ψ,φ}(x, ·) on `grid`, row-major.
///
/// With p = ξ + u/2 the slice is a convolution,
/// W(x, ξ) = 8(2πħ)^{−3} e^{−2i x·ξ/ħ} ∫ A(p) B(2ξ − p) dp,
/// A(p) = F_ħψ(p) e^{2i x·p/ħ}, B = conj(F_ħφ), evaluated on a p-lattice of
/// spacing 2d with one zero-padded FFT convolution. Momentum mass outside the
/// grid box is dropped, so the box should cover the states' momentum bulk.
pub fn wigner_slice(
    psi: &MomentumState,
    phi: &MomentumState,
    x: &Vec3,
    grid: &XiGrid,
    opts: &QuantizeOptions,
) -> Result<Vec<Complex64>> {
    if !psi.same_scale(phi) {
        return Err(Error::ScaleMismatch);
    }
    let sc = psi.scale;
    let hbar = sc.hbar();
    let d = grid.spacing;
    let reach = opts.position_reach / sc.p0().powi(2);
    let limit = PI * hbar / (2.0 * (x.norm() + reach));
    if d >= limit {
        return Err(Error::Resolution(format!(
            "momentum spacing {d:.3e} must be below {limit:.3e} at |x| = {:.3}",
            x.norm()
        )));
    }
    let n = grid.n;
    let m = n.div_ceil(2) + 1;
    let p_size = fft_friendly(2 * m);
    let o = Vec3::from(grid.origin);
    let fill = |f: &(dyn Fn(&Vec3) -> Complex64 + Sync)| -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); p_size.pow(3)];
        buf.par_chunks_mut(p_size).enumerate().for_each(|(row, chunk)| {
            let (i, j) = (row / p_size, row % p_size);
            if i >= m || j >= m {
                return;
            }
            for (k, z) in chunk.iter_mut().enumerate().take(m) {
                let p = o + Vec3::new(i as f64, j as f64, k as f64) * (2.0 * d);
                *z = f(&p);
            }
        });
        buf
    };
    let mut a = fill(&|p: &Vec3| psi.eval(p) * Complex64::from_polar(1.0, 2.0 * x.dot(p) / hbar));
    let mut b = fill(&|p: &Vec3| phi.eval(p).conj());
    fft3(&mut a, p_size, FftDirection::Forward, None);
    fft3(&mut b, p_size, FftDirection::Forward, None);
    a.par_iter_mut().zip(b.par_iter()).for_each(|(u, v)| *u *= v);
    fft3(&mut a, p_size, FftDirection::Inverse, None);
    let pref = 8.0 * (2.0 * d).powi(3) / (2.0 * PI * hbar).powi(3) / (p_size as f64).powi(3);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(row, chunk)| {
        let (i, j) = (row / n, row % n);
        for (k, w) in chunk.iter_mut().enumerate() {
            let xi = grid.point(i, j, k);
            let c = a[(i * p_size + j) * p_size + k];
            *w = c * Complex64::from_polar(pref, -2.0 * x.dot(&xi) / hbar);
        }
    });
    Ok(out)
}

/// Σ_k ∫∫ f_k(x) g_k(ξ) W_{ψ,φ}(x, ξ) dx dξ.
///
/// For each term, F̃(u) = ∫ f(x) e^{i x·u/ħ} dx comes from one FFT of f on a box
/// of side L (the periodisation length, chosen so images of f miss the Wigner
/// support); only the ball of u-modes carrying all but `fourier_tail` of its L¹
/// mass is kept. Then
/// ∫ g G = (2πħ)^{−3} Σ_ξ g(ξ) Σ_u F̃(u) F_ħψ(ξ + u/2) conj(F_ħφ(ξ − u/2)) Δu³ h³
/// with ξ on a lattice of spacing h = Δu/2, so that ξ ± u/2 stay on the same lattice.
pub fn grid_wigner(
    terms: &[SeparableTerm],
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<Estimate> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    for t in terms {
        let e = grid_wigner_term(t, psi, phi, opts)?;
        value += e.value;
        error += e.error;
        evaluations += e.evaluations;
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

struct FourierModes {
    du: f64,
    /// (integer offsets, F̃) for the retained modes
    modes: Vec<([i64; 3], Complex64)>,
    dropped: f64,
}

fn fourier_modes(f: &SeparableTerm, ball: &Ball, l: f64, hbar: f64, tail: f64) -> Result<FourierModes> {
    let c = ball.center();
    let mut m = fft_friendly(((l / (ball.radius / 12.0)).ceil() as usize).max(24));
    loop {
        let dx = l / m as f64;
        let x0 = c - Vec3::repeat(0.5 * l);
        let mut data = vec![Complex64::new(0.0, 0.0); m.pow(3)];
        data.par_chunks_mut(m).enumerate().for_each(|(row, chunk)| {
            let (i, j) = (row / m, row % m);
            for (k, z) in chunk.iter_mut().enumerate() {
                let x = x0 + Vec3::new(i as f64, j as f64, k as f64) * dx;
                *z = Complex64::new(f.eval_f(&x), 0.0);
            }
        });
        let fmax = data.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        if fmax == 0.0 {
            return Ok(FourierModes {
                du: 2.0 * PI * hbar / l,
                modes: vec![],
                dropped: 0.0,
            });
        }
        fft3(&mut data, m, FftDirection::Inverse, None);
        let du = 2.0 * PI * hbar / l;
        let half = (m / 2) as i64;
        let signed = |k: usize| -> i64 {
            let k = k as i64;
            if k >= half {
                k - m as i64
            } else {
                k
            }
        };
        // (offsets, value, radius²)
        let mut all: Vec<([i64; 3], Complex64, i64)> = Vec::with_capacity(data.len());
        for (flat, z) in data.iter().enumerate() {
            let j = [signed(flat / (m * m)), signed((flat / m) % m), signed(flat % m)];
            let phase = (x0[0] * j[0] as f64 + x0[1] * j[1] as f64 + x0[2] * j[2] as f64) * du / hbar;
            let v = z * Complex64::from_polar(dx.powi(3), phase);
            all.push((j, v, j[0] * j[0] + j[1] * j[1] + j[2] * j[2]));
        }
        // L¹ weight of a mode in the sup-norm reconstruction of f
        let w = du.powi(3) / (2.0 * PI * hbar).powi(3);
        all.sort_by_key(|e| std::cmp::Reverse(e.2));
        let budget = tail * fmax;
        let mut acc = 0.0;
        let mut cut_r2 = i64::MAX;
        for e in &all {
            if acc + e.1.norm() * w > budget {
                cut_r2 = e.2;
                break;
            }
            acc += e.1.norm() * w;
        }
        let nyq = half * half;
        if cut_r2 >= (0.64 * nyq as f64) as i64 {
            if m >= 192 {
                return Err(Error::Resolution(
                    "symbol too rough in x for the grid Wigner method".into(),
                ));
            }
            m = fft_friendly(m * 3 / 2);
            continue;
        }
        let dropped: f64 = all.iter().filter(|e| e.2 > cut_r2).map(|e| e.1.norm() * w).sum();
        let modes = all.into_iter().filter(|e| e.2 <= cut_r2).map(|e| (e.0, e.1)).collect();
        return Ok(FourierModes { du, modes, dropped });
    }
}

fn grid_wigner_term(
    t: &SeparableTerm,
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<Estimate> {
    let sc = psi.scale;
    let (p0, hbar) = (sc.p0(), sc.hbar());
    let bf = t
        .position_support
        .ok_or_else(|| Error::Symbol("grid Wigner terms need a declared position support".into()))?;
    let bg = t
        .momentum_support
        .unwrap_or_else(|| Ball::new(Vec3::zeros(), opts.grid.momentum_half_width * p0));
    let reach = opts.position_reach / (p0 * p0);
    let l = (1.1 * (reach + bf.radius + bf.center().norm())).max(2.2 * bf.radius) / opts.resolution.sqrt();
    let fm = fourier_modes(t, &bf, l, hbar, opts.fourier_tail)?;
    if fm.modes.is_empty() {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let h = 0.5 * fm.du;
    let kk = (bg.radius / h).ceil() as i64;
    let jj = fm
        .modes
        .iter()
        .map(|m| m.0.iter().map(|v| v.abs()).max().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let off = kk + jj;
    let s = (2 * off + 1) as usize;
    if s.pow(3) > 40_000_000 {
        return Err(Error::Resolution(format!(
            "momentum lattice of {s}³ points is too large"
        )));
    }
    let cg = bg.center();
    let lattice = |f: &(dyn Fn(&Vec3) -> Complex64 + Sync)| -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); s.pow(3)];
        buf.par_chunks_mut(s).enumerate().for_each(|(row, chunk)| {
            let (i, j) = ((row / s) as i64 - off, (row % s) as i64 - off);
            for (k, z) in chunk.iter_mut().enumerate() {
                let p = cg + Vec3::new(i as f64, j as f64, k as f64 - off as f64) * h;
                *z = f(&p);
            }
        });
        buf
    };
    let a = lattice(&|p| psi.eval(p));
    let b = if psi == phi {
        a.iter().map(|z| z.conj()).collect()
    } else {
        lattice(&|p| phi.eval(p).conj())
    };
    let si = s as i64;
    let offsets: Vec<(i64, Complex64)> = fm
        .modes
        .iter()
        .map(|(j, v)| ((j[0] * si + j[1]) * si + j[2], *v))
        .collect();

    // ξ nodes inside g's support
    let rows: Vec<(i64, i64)> = (-kk..=kk).flat_map(|i| (-kk..=kk).map(move |j| (i, j))).collect();
    let parts: Vec<(Complex64, Complex64)> = rows
        .par_iter()
        .map(|&(i, j)| {
            let mut full = NeumaierComplex::new();
            let mut even = NeumaierComplex::new();
            for k in -kk..=kk {
                let xi = cg + Vec3::new(i as f64, j as f64, k as f64) * h;
                let gv = t.eval_g(&xi);
                if gv == 0.0 {
                    continue;
                }
                let n = ((i + off) * si + (j + off)) * si + (k + off);
                let mut inner = Complex64::new(0.0, 0.0);
                for (o, fv) in &offsets {
                    inner += fv * a[(n + o) as usize] * b[(n - o) as usize];
                }
                let z = inner * gv;
                full.add(z);
                if i % 2 == 0 && j % 2 == 0 && k % 2 == 0 {
                    even.add(z);
                }
            }
            (full.value(), even.value())
        })
        .collect();
    let w = h.powi(3) * fm.du.powi(3) / (2.0 * PI * hbar).powi(3);
    let value = sum_complex(parts.iter().map(|p| p.0)) * w;
    let coarse = sum_complex(parts.iter().map(|p| p.1)) * (8.0 * w);
    let gmax = 1.0;
    Ok(Estimate {
        value,
        error: (value - coarse).norm() + fm.dropped * gmax,
        evaluations: (rows.len() * (2 * kk as usize + 1) * offsets.len()) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AlphaFrame, SemiclassicalScale};
    use crate::quantize::{matrix_element, Method};
    use crate::symbol::SymbolSpec;

    #[test]
    fn slice_is_real_and_integrates_to_density() {
        let sc = SemiclassicalScale::new(-0.5, 3).unwrap();
        let st = MomentumState::new(AlphaFrame::inclined(0.5), sc);
        let opts = QuantizeOptions::default();
        let x = Vec3::new(0.4, -0.8, 0.1);
        let grid = XiGrid::centered(6.0, 144);
        let w = wigner_slice(&st, &st, &x, &grid, &opts).unwrap();
        let max_im = w.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(max_im < 1e-10, "{max_im}");
        let dens: f64 = w.iter().map(|z| z.re).sum::<f64>() * grid.spacing.powi(3);
        // ψ(x) by direct quadrature of the inverse transform
        let rule = crate::quadrature::R3Rule {
            scale: sc.p0(),
            n_chi: 160,
            n_theta: 80,
            n_phi: 80,
        };
        let hb = sc.hbar();
        let psi_x = rule.integrate(&Vec3::zeros(), |xi| {
            st.eval(xi) * Complex64::from_polar(1.0, x.dot(xi) / hb)
        }) / (2.0 * PI * hb).powf(1.5);
        assert!(
            (dens - psi_x.norm_sqr()).abs() < 1e-3 * psi_x.norm_sqr().max(1e-3),
            "{dens} vs {}",
            psi_x.norm_sqr()
        );
        assert!(wigner_slice(&st, &st, &x, &XiGrid::centered(4.0, 24), &opts).is_err());
    }

    #[test]
    fn position_factor_alone_is_a_multiplier() {
        // Op(f(x)·1) = f(x); "1" is a momentum plateau well outside the bulk.
        let sc = SemiclassicalScale::new(-0.5, 1).unwrap();
        let st = MomentumState::new(AlphaFrame::inclined(0.6), sc);
        let c = Vec3::new(0.5, 0.3, 0.0);
        let f = move |x: &Vec3| (-(x - c).norm_squared() / 2.0).exp();
        let support = Ball::new(c, 6.0);
        let term = SeparableTerm::new(
            f,
            |xi: &Vec3| crate::symbol::plateau(xi.norm(), 5.0, 6.0),
            Some(support),
            None,
        );
        let a = SymbolSpec::separable("gaussian x plateau", vec![term]);
        let opts = QuantizeOptions {
            grid: crate::states::GridSpec {
                momentum_half_width: 8.0,
                position_half_width: 10.0,
                max_points_per_axis: 256,
            },
            ..QuantizeOptions::default()
        };
        let g = matrix_element(&a, &st, &st, &opts).unwrap();
        assert_eq!(g.method, Method::GridWigner);
        let m = crate::quantize::position_multiplier(&f, Some(support), &st, &st, &opts).unwrap();
        assert!(
            (m.value - g.value).norm() < 1e-3,
            "{} vs {} (est {})",
            m.value,
            g.value,
            g.error_estimate
        );
        assert!(g.error_estimate < 1e-3);
    }
}
