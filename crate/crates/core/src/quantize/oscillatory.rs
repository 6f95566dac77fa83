use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{stereographic_inv, AlphaFrame, Vec3};
use crate::symbol::SymbolSpec;

/// The matrix element as an oscillatory integral in scaled variables
/// (y, ζ, v) ∈ R⁹, y = p0² x, ζ = ξ/p0:
///
/// ⟨Op_ħ(a)Ψ_α, Ψ_β⟩ = prefactor · ∫ amplitude · e^{iN P} dy dζ dv,
/// P = y·v − i log(α·ω(ζ+v/2)) − i log(β̄·ω(ζ−v/2)).
#[derive(Clone)]
pub struct OscillatoryForm {
    pub symbol: SymbolSpec,
    pub alpha: AlphaFrame,
    pub beta: AlphaFrame,
    pub n: u32,
    pub p0: f64,
}

impl OscillatoryForm {
    pub fn new(symbol: SymbolSpec, alpha: AlphaFrame, beta: AlphaFrame, n: u32, p0: f64) -> Self {
        Self {
            symbol,
            alpha,
            beta,
            n,
            p0,
        }
    }

    /// The form with the unit symbol, for work on the phase alone.
    pub fn for_frames(alpha: AlphaFrame, beta: AlphaFrame, n: u32, p0: f64) -> Self {
        Self::new(SymbolSpec::momentum_only("unit", |_| 1.0, None), alpha, beta, n, p0)
    }

    /// (N+1)⁴/(16π⁵), which absorbs c_N² and the (2πħ)^{−3} of the Wigner transform.
    pub fn prefactor(&self) -> f64 {
        (self.n as f64 + 1.0).powi(4) / (16.0 * PI.powi(5))
    }

    fn factors(&self, zeta: &Vec3, v: &Vec3) -> (Complex64, Complex64) {
        let a = self.alpha.dot(&stereographic_inv(&(zeta + v * 0.5)));
        let b = self.beta.conj().dot(&stereographic_inv(&(zeta - v * 0.5)));
        (a, b)
    }

    /// Amplitude; carries the e^{i y·v} left over from e^{i(N+1) y·v} = e^{iN y·v} e^{i y·v}.
    pub fn amplitude(&self, y: &Vec3, zeta: &Vec3, v: &Vec3) -> Complex64 {
        let p2 = self.p0 * self.p0;
        let av = self.symbol.eval(&(y / p2), &(zeta * self.p0));
        let (zp, zm) = (zeta + v * 0.5, zeta - v * 0.5);
        let conf = 16.0 / ((zp.norm_squared() + 1.0).powi(2) * (zm.norm_squared() + 1.0).powi(2));
        Complex64::from_polar(av * conf, y.dot(v))
    }

    /// Phase with principal logarithms.
    pub fn phase(&self, y: &Vec3, zeta: &Vec3, v: &Vec3) -> Result<Complex64> {
        let (a, b) = self.factors(zeta, v);
        for z in [a, b] {
            if z.norm() < 1e-12 {
                return Err(Error::BranchPoint(z.norm()));
            }
        }
        Ok(Complex64::new(y.dot(v), 0.0) - Complex64::i() * (a.ln() + b.ln()))
    }

    /// Phase on the branch continuous near a reference point: log z = log(z/z_ref) + log z_ref.
    pub fn phase_near(&self, y: &Vec3, zeta: &Vec3, v: &Vec3, reference: (Complex64, Complex64)) -> Result<Complex64> {
        let (a, b) = self.factors(zeta, v);
        for z in [a, b] {
            if z.norm() < 1e-12 {
                return Err(Error::BranchPoint(z.norm()));
            }
        }
        let la = (a / reference.0).ln() + reference.0.ln();
        let lb = (b / reference.1).ln() + reference.1.ln();
        Ok(Complex64::new(y.dot(v), 0.0) - Complex64::i() * (la + lb))
    }

    /// The pair (α·ω(ζ+v/2), β̄·ω(ζ−v/2)) used as a branch reference.
    pub fn branch_reference(&self, zeta: &Vec3, v: &Vec3) -> (Complex64, Complex64) {
        self.factors(zeta, v)
    }

    /// amplitude · e^{iNP}, evaluated without logarithms.
    pub fn integrand(&self, y: &Vec3, zeta: &Vec3, v: &Vec3) -> Complex64 {
        let (a, b) = self.factors(zeta, v);
        let n = self.n as i32;
        self.amplitude(y, zeta, v) * a.powi(n) * b.powi(n) * Complex64::from_polar(1.0, self.n as f64 * y.dot(v))
    }
}
