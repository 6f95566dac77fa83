//! Convergence studies, geodesic measures and report emission.

pub mod cli;
pub mod config;
pub mod invariants;
pub mod report;

pub use config::{ExperimentConfig, FrameSpec, SymbolConfig, Tolerances};
pub use invariants::{run_invariants, InvariantResult};
pub use report::{write_csv, write_summary, Summary};

use num_complex::Complex64;
use serde::Serialize;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{orbit_average, AlphaFrame, KeplerOrbit, SemiclassicalScale};
use crate::quantize::{matrix_element, Method, QuantizeOptions};
use crate::states::MomentumState;
use crate::symbol::SymbolSpec;

/// Largest N the studies accept unless explicitly overridden.
pub const DEFAULT_MAX_N: u32 = 64;

/// A finite convex combination Σ c_j δ_{γ_j} of distinct oriented geodesics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicMeasure {
    entries: Vec<(f64, AlphaFrame)>,
}

impl GeodesicMeasure {
    pub fn new(entries: Vec<(f64, AlphaFrame)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput(
                "a geodesic measure needs at least one entry".into(),
            ));
        }
        if let Some((w, _)) = entries.iter().find(|(w, _)| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidInput(format!("weight {w} is not in (0, 1]")));
        }
        let total: f64 = entries.iter().map(|e| e.0).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        for (i, a) in entries.iter().enumerate() {
            if entries[i + 1..].iter().any(|b| a.1.same_geodesic(&b.1)) {
                return Err(Error::SameGeodesic);
            }
        }
        Ok(Self { entries })
    }

    pub fn single(frame: AlphaFrame) -> Self {
        Self {
            entries: vec![(1.0, frame)],
        }
    }

    pub fn entries(&self) -> &[(f64, AlphaFrame)] {
        &self.entries
    }

    /// Σ c_j ā(γ_j).
    pub fn predicted(&self, a: &SymbolSpec, scale: &SemiclassicalScale) -> Result<f64> {
        let mut total = 0.0;
        for (w, f) in &self.entries {
            total += w * radon_transform(a, f, scale)?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Diagonal,
    CrossDecay,
    MixedMeasure,
}

/// One row per N. `values` is what the CSV reports: the real part for diagonal
/// studies, the modulus for cross terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub study: StudyKind,
    pub label: String,
    pub energy: f64,
    pub n_values: Vec<u32>,
    pub measured: Vec<Complex64>,
    pub values: Vec<f64>,
    pub predicted: f64,
    pub errors: Vec<f64>,
    pub error_estimates: Vec<f64>,
    pub methods: Vec<Method>,
    pub wall_time_s: Vec<f64>,
    /// r in error ≈ C N^{−r}, fitted on the largest three N.
    pub rate: Option<f64>,
    /// values[k+1]/values[k] (cross studies) or errors[k+1]/errors[k].
    pub ratios: Vec<f64>,
    /// Cross studies: whether the successive ratios strictly decrease.
    pub superpolynomial: Option<bool>,
}

impl ConvergenceRecord {
    fn new(study: StudyKind, label: String, energy: f64, predicted: f64) -> Self {
        Self {
            study,
            label,
            energy,
            n_values: vec![],
            measured: vec![],
            values: vec![],
            predicted,
            errors: vec![],
            error_estimates: vec![],
            methods: vec![],
            wall_time_s: vec![],
            rate: None,
            ratios: vec![],
            superpolynomial: None,
        }
    }

    fn push(&mut self, n: u32, m: Complex64, value: f64, error: f64, estimate: f64, method: Method, secs: f64) {
        self.n_values.push(n);
        self.measured.push(m);
        self.values.push(value);
        self.errors.push(error);
        self.error_estimates.push(estimate);
        self.methods.push(method);
        self.wall_time_s.push(secs);
    }

    pub fn len(&self) -> usize {
        self.n_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_values.is_empty()
    }

    /// Errors nonincreasing for N ≥ 16, allowing one inversion smaller than
    /// twice the error estimate.
    pub fn errors_monotone(&self) -> bool {
        let idx: Vec<usize> = (0..self.len()).filter(|&k| self.n_values[k] >= 16).collect();
        let mut inversions = 0;
        for w in idx.windows(2) {
            let (a, b) = (w[0], w[1]);
            if self.errors[b] > self.errors[a] {
                let jump = self.errors[b] - self.errors[a];
                if jump >= 2.0 * self.error_estimates[b].max(self.error_estimates[a]) {
                    return false;
                }
                inversions += 1;
            }
        }
        inversions <= 1
    }
}

/// Least-squares slope of log e against log N over the largest three N; returns
/// the decay exponent r (e ≈ C N^{−r}).
pub fn fit_rate(n_values: &[u32], errors: &[f64]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = n_values
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(n, e)| ((*n as f64).ln(), e.ln()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts = &pts[pts.len().saturating_sub(3)..];
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// ā(γ) = (p0³/2π) ∫_0^{2π/p0³} a(γ(t)) dt; for collision orbits the integral runs
/// over the window ending at the collision.
pub fn radon_transform(a: &SymbolSpec, frame: &AlphaFrame, scale: &SemiclassicalScale) -> Result<f64> {
    orbit_average(a, &KeplerOrbit::new(*frame, *scale))
}

pub fn check_n_budget(n_list: &[u32], allow_large: bool) -> Result<()> {
    match n_list.iter().find(|&&n| n > DEFAULT_MAX_N) {
        Some(n) if !allow_large => Err(Error::Config(format!(
            "N = {n} exceeds the default budget of {DEFAULT_MAX_N}; pass --allow-large-n to override"
        ))),
        _ => Ok(()),
    }
}

fn sorted(n_list: &[u32]) -> Result<Vec<u32>> {
    if n_list.is_empty() {
        return Err(Error::InvalidInput("empty N list".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    Ok(ns)
}

/// ⟨Op_ħ(a)Ψ_{α,N}, Ψ_{α,N}⟩ at fixed energy against ā(γ_α).
pub fn theorem1_study(
    frame: &AlphaFrame,
    energy: f64,
    a: &SymbolSpec,
    n_list: &[u32],
    opts: &QuantizeOptions,
) -> Result<ConvergenceRecord> {
    let ns = sorted(n_list)?;
    let scale = SemiclassicalScale::new(energy, ns[0])?;
    let predicted = radon_transform(a, frame, &scale)?;
    let mut rec = ConvergenceRecord::new(
        StudyKind::Diagonal,
        format!("{} on {frame}", a.label()),
        energy,
        predicted,
    );
    for n in ns {
        let st = MomentumState::new(*frame, scale.with_n(n));
        let r = matrix_element(a, &st, &st, opts)?;
        rec.push(
            n,
            r.value,
            r.value.re,
            (r.value.re - predicted).abs(),
            r.error_estimate,
            r.method,
            r.wall_time_s,
        );
    }
    rec.rate = fit_rate(&rec.n_values, &rec.errors);
    rec.ratios = rec.errors.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(rec)
}

/// |⟨Op_ħ(a)Ψ_{α,N}, Ψ_{β,N}⟩| for distinct geodesics.
pub fn cross_decay_study(
    alpha: &AlphaFrame,
    beta: &AlphaFrame,
    energy: f64,
    a: &SymbolSpec,
    n_list: &[u32],
    opts: &QuantizeOptions,
) -> Result<ConvergenceRecord> {
    if alpha.same_geodesic(beta) {
        return Err(Error::SameGeodesic);
    }
    let ns = sorted(n_list)?;
    let scale = SemiclassicalScale::new(energy, ns[0])?;
    let mut rec = ConvergenceRecord::new(
        StudyKind::CrossDecay,
        format!("{} between {alpha} and {beta}", a.label()),
        energy,
        0.0,
    );
    for n in ns {
        let sc = scale.with_n(n);
        let r = matrix_element(a, &MomentumState::new(*alpha, sc), &MomentumState::new(*beta, sc), opts)?;
        let m = r.value.norm();
        rec.push(n, r.value, m, m, r.error_estimate, r.method, r.wall_time_s);
    }
    rec.ratios = rec.values.windows(2).map(|w| w[1] / w[0]).collect();
    if rec.ratios.len() >= 2 {
        rec.superpolynomial = Some(rec.ratios.windows(2).all(|w| w[1] < w[0]));
    }
    Ok(rec)
}

/// Matrix elements of the unnormalised superposition Ψ_N = Σ √c_j Ψ_{α_j,N}:
/// Σ_j c_j m_jj + Σ_{j≠k} √(c_j c_k) m_jk, against Σ c_j ā(γ_j).
pub fn mixed_measure_study(
    measure: &GeodesicMeasure,
    energy: f64,
    a: &SymbolSpec,
    n_list: &[u32],
    opts: &QuantizeOptions,
) -> Result<ConvergenceRecord> {
    let ns = sorted(n_list)?;
    let scale = SemiclassicalScale::new(energy, ns[0])?;
    let predicted = measure.predicted(a, &scale)?;
    let mut rec = ConvergenceRecord::new(
        StudyKind::MixedMeasure,
        format!("{} on {} geodesics", a.label(), measure.entries().len()),
        energy,
        predicted,
    );
    for n in ns {
        let sc = scale.with_n(n);
        let start = Instant::now();
        let states: Vec<(f64, MomentumState)> = measure
            .entries()
            .iter()
            .map(|(w, f)| (*w, MomentumState::new(*f, sc)))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut estimate = 0.0;
        let mut method = None;
        for (cj, sj) in &states {
            for (ck, sk) in &states {
                let r = matrix_element(a, sj, sk, opts)?;
                let w = (cj * ck).sqrt();
                total += r.value * w;
                estimate += r.error_estimate * w;
                method.get_or_insert(r.method);
            }
        }
        let secs = start.elapsed().as_secs_f64();
        rec.push(
            n,
            total,
            total.re,
            (total.re - predicted).abs(),
            estimate,
            method.expect("nonempty"),
            secs,
        );
    }
    rec.rate = fit_rate(&rec.n_values, &rec.errors);
    rec.ratios = rec.errors.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_recovers_power() {
        let ns = [4, 8, 16, 32, 64];
        let errs: Vec<f64> = ns.iter().map(|&n| 3.0 / (n as f64).powf(1.2)).collect();
        assert!((fit_rate(&ns, &errs).unwrap() - 1.2).abs() < 1e-12);
        assert!(fit_rate(&[8], &[0.1]).is_none());
    }

    #[test]
    fn measure_validation() {
        let f1 = AlphaFrame::basis(1, 2).unwrap();
        let f2 = AlphaFrame::basis(1, 3).unwrap();
        assert!(GeodesicMeasure::new(vec![(0.5, f1), (0.5, f2)]).is_ok());
        assert!(GeodesicMeasure::new(vec![(0.5, f1), (0.4, f2)]).is_err());
        assert!(matches!(
            GeodesicMeasure::new(vec![(0.5, f1), (0.5, f1.phase_rotated(0.3))]),
            Err(Error::SameGeodesic)
        ));
        // reversed orientation is a different oriented geodesic
        assert!(GeodesicMeasure::new(vec![(0.5, f1), (0.5, f1.conj())]).is_ok());
    }

    #[test]
    fn cross_study_rejects_same_geodesic() {
        let f = AlphaFrame::inclined(0.2);
        let a = SymbolSpec::default_radial_bump(1.0);
        let r = cross_decay_study(&f, &f.phase_rotated(1.0), -0.5, &a, &[4], &QuantizeOptions::default());
        assert!(matches!(r, Err(Error::SameGeodesic)));
    }

    #[test]
    fn single_entry_mixture_matches_diagonal() {
        let f = AlphaFrame::basis(1, 2).unwrap();
        let a = SymbolSpec::default_radial_bump(1.0);
        let opts = QuantizeOptions::default();
        let t = theorem1_study(&f, -0.5, &a, &[8, 16], &opts).unwrap();
        let m = mixed_measure_study(&GeodesicMeasure::single(f), -0.5, &a, &[8, 16], &opts).unwrap();
        assert_eq!(t.measured, m.measured);
        assert_eq!(t.predicted, m.predicted);
    }

    #[test]
    fn radon_of_unit_near_orbit() {
        let sc = SemiclassicalScale::new(-0.5, 1).unwrap();
        let one = SymbolSpec::momentum_plateau(3.0, 4.0);
        let v = radon_transform(&one, &AlphaFrame::basis(1, 2).unwrap(), &sc).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget() {
        assert!(check_n_budget(&[8, 64], false).is_ok());
        assert!(check_n_budget(&[128], false).is_err());
        assert!(check_n_budget(&[128], true).is_ok());
    }
}
