//! Weyl matrix elements ⟨Op_ħ(a)Ψ, Ψ′⟩ for hydrogen coherent states.
//!
//! Convention: ⟨Op_ħ(a)ψ, φ⟩ = ∫ a(x, ξ) W_{ψ,φ}(x, ξ) dx dξ with
//! W_{ψ,φ}(x, ξ) = (2πħ)^{−3} ∫ F_ħψ(ξ + u/2) conj(F_ħφ(ξ − u/2)) e^{i x·u/ħ} du.

mod montecarlo;
mod multiplier;
mod oscillatory;
mod wigner;

pub use montecarlo::monte_carlo;
pub use multiplier::{momentum_multiplier, position_multiplier};
pub use oscillatory::OscillatoryForm;
pub use wigner::{grid_wigner, wigner_slice, XiGrid};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{AlphaFrame, SemiclassicalScale};
use crate::states::{GridSpec, MomentumState};
use crate::symbol::{SymbolKind, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Multiplier,
    GridWigner,
    MonteCarlo,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplier" => Ok(Method::Multiplier),
            "grid_wigner" | "grid-wigner" => Ok(Method::GridWigner),
            "monte_carlo" | "monte-carlo" => Ok(Method::MonteCarlo),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementReport {
    pub value: Complex64,
    pub method: Method,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantizeOptions {
    /// Force a method; `None` dispatches on the symbol kind.
    pub method: Option<Method>,
    /// Node-count multiplier for the deterministic rules.
    pub resolution: f64,
    /// Relative tolerance for deterministic quadratures (floor: 1e-3 in absolute scale).
    pub quadrature_tol: f64,
    pub grid: GridSpec,
    /// Radius (units of 1/p0²) outside which the Wigner function is treated as zero.
    pub position_reach: f64,
    /// Smooth position cutoff (inner, outer radius in units of 1/p0²) applied to
    /// momentum-only symbols routed through phase-space methods.
    pub position_cutoff: (f64, f64),
    /// L¹ tail of the symbol's Fourier transform discarded by the grid Wigner method.
    pub fourier_tail: f64,
    pub mc_samples: usize,
    pub mc_seed: u64,
    /// Fail when the Monte Carlo standard error exceeds this.
    pub mc_tolerance: Option<f64>,
}

impl Default for QuantizeOptions {
    fn default() -> Self {
        Self {
            method: None,
            resolution: 1.0,
            quadrature_tol: 1e-8,
            grid: GridSpec::default(),
            position_reach: 3.0,
            position_cutoff: (3.0, 6.0),
            fourier_tail: 1e-6,
            mc_samples: 16384,
            mc_seed: 0x5eed,
            mc_tolerance: None,
        }
    }
}

impl QuantizeOptions {
    pub fn with_method(mut self, m: Method) -> Self {
        self.method = Some(m);
        self
    }
}

/// Raw value, error estimate and evaluation count, before timing is attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: u64,
}

pub fn matrix_element(
    a: &SymbolSpec,
    psi: &MomentumState,
    phi: &MomentumState,
    opts: &QuantizeOptions,
) -> Result<MatrixElementReport> {
    if !psi.same_scale(phi) {
        return Err(Error::ScaleMismatch);
    }
    let start = Instant::now();
    let method = opts.method.unwrap_or(match a.kind() {
        SymbolKind::MomentumOnly | SymbolKind::PositionOnly => Method::Multiplier,
        SymbolKind::SeparableSum => Method::GridWigner,
        SymbolKind::General => Method::MonteCarlo,
    });
    let p0 = psi.scale.p0();
    let cut = |s: &SymbolSpec| -> SymbolSpec {
        if s.kind() == SymbolKind::MomentumOnly {
            let (i, o) = opts.position_cutoff;
            s.with_position_cutoff(i / (p0 * p0), o / (p0 * p0))
        } else {
            s.clone()
        }
    };
    let est = match method {
        Method::Multiplier => match a.kind() {
            SymbolKind::MomentumOnly => {
                let g = a.momentum_factor().expect("momentum-only");
                momentum_multiplier(&*g, a.momentum_support(), psi, phi, opts)?
            }
            SymbolKind::PositionOnly => {
                let f = a.position_factor().expect("position-only");
                position_multiplier(&*f, a.position_support(), psi, phi, opts)?
            }
            k => {
                return Err(Error::Symbol(format!(
                    "the multiplier method does not apply to {k:?} symbols"
                )));
            }
        },
        Method::GridWigner => {
            let s = cut(a);
            let terms = s
                .separable_terms()
                .ok_or_else(|| Error::Symbol("the grid Wigner method needs a separable symbol".into()))?;
            grid_wigner(&terms, psi, phi, opts)?
        }
        Method::MonteCarlo => monte_carlo(&cut(a), psi, phi, opts)?,
    };
    Ok(MatrixElementReport {
        value: est.value,
        method,
        error_estimate: est.error,
        evaluations: est.evaluations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// ⟨Op_ħ(a)Ψ_{α,N}, Ψ_{β,N}⟩.
pub fn cross_matrix_element(
    a: &SymbolSpec,
    alpha: &AlphaFrame,
    beta: &AlphaFrame,
    scale: &SemiclassicalScale,
    opts: &QuantizeOptions,
) -> Result<MatrixElementReport> {
    matrix_element(
        a,
        &MomentumState::new(*alpha, *scale),
        &MomentumState::new(*beta, *scale),
        opts,
    )
}
