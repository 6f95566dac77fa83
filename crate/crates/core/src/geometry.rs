//! Classical side: stereographic projection, the Moser map, Kepler flow through
//! great circles on S^3, collision times and orbit averages.

use nalgebra::{Matrix4, SMatrix, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::periodic_mean;
use crate::symbol::SymbolSpec;

pub type Vec3 = Vector3<f64>;
pub type Vec4 = Vector4<f64>;

/// Frames with `re4² + im4² ≥ 1 − COLLISION_TOL` are treated as collision orbits.
pub const COLLISION_TOL: f64 = 1e-10;
const NORTH_POLE_TOL: f64 = 1e-12;

/// Energy, quantum number and the derived momentum and Planck scales,
/// tied together by `E = −1/(2ħ²(N+1)²)` and `p0 = √(−2E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalScale {
    n: u32,
    energy: f64,
    p0: f64,
    hbar: f64,
}

impl SemiclassicalScale {
    pub fn new(energy: f64, n: u32) -> Result<Self> {
        if !(energy.is_finite() && energy < 0.0) {
            return Err(Error::InvalidInput(format!(
                "energy must be negative and finite, got {energy}"
            )));
        }
        let p0 = (-2.0 * energy).sqrt();
        let hbar = 1.0 / (p0 * (n as f64 + 1.0));
        Ok(Self { n, energy, p0, hbar })
    }

    /// Scale from Planck's constant: `E = −1/(2ħ²(N+1)²)`.
    pub fn from_hbar(hbar: f64, n: u32) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        let m = n as f64 + 1.0;
        Self::new(-1.0 / (2.0 * hbar * hbar * m * m), n)
    }

    /// Same energy, different quantum number.
    pub fn with_n(&self, n: u32) -> Self {
        Self::new(self.energy, n).expect("energy already validated")
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn energy(&self) -> f64 {
        self.energy
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn period(&self) -> f64 {
        TAU / self.p0.powi(3)
    }
}

/// A point (x, ξ) of T*(R³ ∖ {0}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: Vec3,
    pub xi: Vec3,
}

impl PhasePoint {
    pub fn new(x: Vec3, xi: Vec3) -> Result<Self> {
        if !(x.norm() >= 1e-14) {
            return Err(Error::InvalidInput("position must be away from the origin".into()));
        }
        Ok(Self { x, xi })
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        ((self.x - other.x).norm_squared() + (self.xi - other.xi).norm_squared()).sqrt()
    }
}

/// A point (u, η) of T*S³, η identified with a tangent vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub u: Vec4,
    pub eta: Vec4,
}

impl SpherePoint {
    pub fn new(u: Vec4, eta: Vec4) -> Result<Self> {
        if (u.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("|u| = {} is not 1", u.norm())));
        }
        if u.dot(&eta).abs() > 1e-9 * (1.0 + eta.norm()) {
            return Err(Error::InvalidInput("eta is not tangent at u".into()));
        }
        Ok(Self { u, eta })
    }
}

/// α = re + i·im with orthonormal real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FrameRepr", try_from = "FrameRepr")]
pub struct AlphaFrame {
    re: Vec4,
    im: Vec4,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    re: [f64; 4],
    im: [f64; 4],
}

impl From<AlphaFrame> for FrameRepr {
    fn from(f: AlphaFrame) -> Self {
        FrameRepr {
            re: f.re.into(),
            im: f.im.into(),
        }
    }
}

impl TryFrom<FrameRepr> for AlphaFrame {
    type Error = Error;
    fn try_from(r: FrameRepr) -> Result<Self> {
        AlphaFrame::new(Vec4::from(r.re), Vec4::from(r.im))
    }
}

impl AlphaFrame {
    pub fn new(re: Vec4, im: Vec4) -> Result<Self> {
        let tol = 1e-12;
        if (re.norm_squared() - 1.0).abs() > tol || (im.norm_squared() - 1.0).abs() > tol || re.dot(&im).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "frame is not orthonormal: |re|²={}, |im|²={}, re·im={}",
                re.norm_squared(),
                im.norm_squared(),
                re.dot(&im)
            )));
        }
        Ok(Self { re, im })
    }

    /// Gram-Schmidt the pair first; fails only for (numerically) parallel inputs.
    pub fn orthonormalized(re: Vec4, im: Vec4) -> Result<Self> {
        let a = re.normalize();
        let b = im - a * a.dot(&im);
        let nb = b.norm();
        if !(a.iter().all(|v| v.is_finite()) && nb > 1e-8) {
            return Err(Error::InvalidInput("frame vectors are degenerate".into()));
        }
        Self::new(a, b / nb)
    }

    /// `e_i + i e_j` with 1-based indices.
    pub fn basis(i: usize, j: usize) -> Result<Self> {
        if !(1..=4).contains(&i) || !(1..=4).contains(&j) || i == j {
            return Err(Error::InvalidInput(format!("bad basis pair e{i}+ie{j}")));
        }
        let mut re = Vec4::zeros();
        let mut im = Vec4::zeros();
        re[i - 1] = 1.0;
        im[j - 1] = 1.0;
        Self::new(re, im)
    }

    /// `α(θ0) = e1 + i(cos θ0 e2 + sin θ0 e4)`: an orbit of inclination θ0,
    /// colliding for θ0 = ±π/2.
    pub fn inclined(theta0: f64) -> Self {
        let (s, c) = theta0.sin_cos();
        Self {
            re: Vec4::new(1.0, 0.0, 0.0, 0.0),
            im: Vec4::new(0.0, c, 0.0, s),
        }
    }

    pub fn re(&self) -> &Vec4 {
        &self.re
    }
    pub fn im(&self) -> &Vec4 {
        &self.im
    }

    pub fn alpha(&self) -> [Complex64; 4] {
        std::array::from_fn(|k| Complex64::new(self.re[k], self.im[k]))
    }

    /// α·u (no conjugation).
    #[inline]
    pub fn dot(&self, u: &Vec4) -> Complex64 {
        Complex64::new(self.re.dot(u), self.im.dot(u))
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    /// e^{iθ} α.
    pub fn phase_rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            re: self.re * c - self.im * s,
            im: self.re * s + self.im * c,
        }
    }

    pub fn rotated(&self, r: &Matrix4<f64>) -> Result<Self> {
        Self::new(r * self.re, r * self.im)
    }

    pub fn is_collision(&self) -> bool {
        self.re[3].powi(2) + self.im[3].powi(2) >= 1.0 - COLLISION_TOL
    }

    /// Orthogonal projector onto span(re, im).
    pub fn projector(&self) -> Matrix4<f64> {
        self.re * self.re.transpose() + self.im * self.im.transpose()
    }

    /// The bivector re ∧ im, encoding the oriented plane.
    pub fn bivector(&self) -> Matrix4<f64> {
        self.re * self.im.transpose() - self.im * self.re.transpose()
    }

    /// True when both frames generate the same oriented great circle.
    pub fn same_geodesic(&self, other: &AlphaFrame) -> bool {
        (self.bivector() - other.bivector()).abs().max() < 1e-10
    }
}

impl fmt::Display for AlphaFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |x: &Vec4| format!("{},{},{},{}", x[0], x[1], x[2], x[3]);
        write!(f, "{};{}", v(&self.re), v(&self.im))
    }
}

/// Accepts `e1+ie2`, `theta0:<radians>` or `r1,r2,r3,r4;i1,i2,i3,i4`.
impl FromStr for AlphaFrame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix("theta0:") {
            let t: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad theta0 in '{s}'")))?;
            return Ok(Self::inclined(t));
        }
        if let Some((a, b)) = s.split_once(';') {
            let parse4 = |p: &str| -> Result<Vec4> {
                let v: Vec<f64> = p
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Config(format!("bad frame vector '{p}'")))?;
                if v.len() != 4 {
                    return Err(Error::Config(format!("frame vector '{p}' needs 4 entries")));
                }
                Ok(Vec4::from_column_slice(&v))
            };
            return Self::orthonormalized(parse4(a)?, parse4(b)?);
        }
        let lower = s.to_ascii_lowercase();
        if let Some((a, b)) = lower.split_once("+i") {
            let idx = |p: &str| p.trim().strip_prefix('e').and_then(|d| d.parse::<usize>().ok());
            if let (Some(i), Some(j)) = (idx(a), idx(b)) {
                return Self::basis(i, j).map_err(|e| Error::Config(e.to_string()));
            }
        }
        Err(Error::Config(format!("unrecognised frame '{s}'")))
    }
}

/// A Kepler orbit on the energy surface of `scale`, given by the great circle of `frame`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerOrbit {
    pub frame: AlphaFrame,
    pub scale: SemiclassicalScale,
    pub collision: bool,
    pub t_collision: Option<f64>,
}

impl KeplerOrbit {
    pub fn new(frame: AlphaFrame, scale: SemiclassicalScale) -> Self {
        let collision = frame.is_collision();
        let t_collision = if collision {
            collision_time(&frame, &scale).ok()
        } else {
            None
        };
        Self {
            frame,
            scale,
            collision,
            t_collision,
        }
    }

    pub fn period(&self) -> f64 {
        self.scale.period()
    }

    /// Phase point at great-circle parameter `s`.
    pub fn state_at_parameter(&self, s: f64) -> Result<PhasePoint> {
        moser_inv(&great_circle(&self.frame, s), &self.scale)
    }
}

/// ω: R³ → S³ ∖ {north pole}.
pub fn stereographic_inv(x: &Vec3) -> Vec4 {
    let r2 = x.norm_squared();
    let d = r2 + 1.0;
    Vec4::new(2.0 * x[0] / d, 2.0 * x[1] / d, 2.0 * x[2] / d, (r2 - 1.0) / d)
}

/// ω⁻¹(u)_i = u_i / (1 − u4).
pub fn stereographic_fwd(u: &Vec4) -> Result<Vec3> {
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("|u| = {} is not 1", u.norm())));
    }
    if u[3] >= 1.0 - NORTH_POLE_TOL {
        return Err(Error::NorthPole { u4: u[3] });
    }
    let d = 1.0 - u[3];
    Ok(Vec3::new(u[0] / d, u[1] / d, u[2] / d))
}

pub fn moser_map(p: &PhasePoint, scale: &SemiclassicalScale) -> SpherePoint {
    let p0 = scale.p0();
    let u = stereographic_inv(&(p.xi / p0));
    let xx = p.x.dot(&p.xi);
    let k = 0.5 * (p.xi.norm_squared() + p0 * p0);
    let e = -p.x * k + p.xi * xx;
    SpherePoint {
        u,
        eta: Vec4::new(e[0], e[1], e[2], -p0 * xx),
    }
}

pub fn moser_inv(s: &SpherePoint, scale: &SemiclassicalScale) -> Result<PhasePoint> {
    let p0 = scale.p0();
    let zeta = stereographic_fwd(&s.u)?;
    let a = s.u[3] - 1.0;
    let x = Vec3::new(
        s.eta[0] * a - s.eta[3] * s.u[0],
        s.eta[1] * a - s.eta[3] * s.u[1],
        s.eta[2] * a - s.eta[3] * s.u[2],
    ) / (p0 * p0);
    PhasePoint::new(x, zeta * p0)
}

pub fn hamiltonian(p: &PhasePoint) -> Result<f64> {
    let r = p.x.norm();
    if r < 1e-14 {
        return Err(Error::InvalidInput("|x| below 1e-14".into()));
    }
    Ok(0.5 * p.xi.norm_squared() - 1.0 / r)
}

/// (F, G) with `F = |x|²(|ξ|²+p0²)²/8` and `G = √(2F) − 1`.
pub fn aux_hamiltonians(p: &PhasePoint, scale: &SemiclassicalScale) -> Result<(f64, f64)> {
    hamiltonian(p)?;
    let k = p.xi.norm_squared() + scale.p0().powi(2);
    let f = p.x.norm_squared() * k * k / 8.0;
    Ok((f, (2.0 * f).sqrt() - 1.0))
}

pub fn great_circle(frame: &AlphaFrame, s: f64) -> SpherePoint {
    let (sn, cs) = s.sin_cos();
    SpherePoint {
        u: frame.re * cs + frame.im * sn,
        eta: -frame.re * sn + frame.im * cs,
    }
}

/// t(s) = [s − re4 sin s + im4 (cos s − 1)] / p0³.
pub fn time_change(frame: &AlphaFrame, s: f64, scale: &SemiclassicalScale) -> f64 {
    let (sn, cs) = s.sin_cos();
    (s - frame.re[3] * sn + frame.im[3] * (cs - 1.0)) / scale.p0().powi(3)
}

/// Inverse of `time_change` on one period, by Newton safeguarded with bisection.
pub fn invert_time(frame: &AlphaFrame, t: f64, scale: &SemiclassicalScale) -> Result<f64> {
    let period = scale.period();
    let slack = 1e-12 * period;
    if !(t >= -slack && t <= period + slack) {
        return Err(Error::InvalidInput(format!("t = {t} outside [0, {period}]")));
    }
    let p3 = scale.p0().powi(3);
    let g = |s: f64| time_change(frame, s, scale) - t;
    let (mut lo, mut hi) = (0.0_f64, TAU);
    let mut s = (t / period * TAU).clamp(lo, hi);
    for _ in 0..200 {
        let val = g(s);
        if val.abs() <= 1e-15 * period.max(1.0) {
            return Ok(s);
        }
        if val > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        if hi - lo < 1e-13 {
            return Ok(0.5 * (lo + hi));
        }
        let u4 = frame.re[3] * s.cos() + frame.im[3] * s.sin();
        let d = (1.0 - u4) / p3;
        let newton = s - val / d;
        s = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::NonConvergence {
        what: "time inversion",
        estimate: hi - lo,
    })
}

/// Great-circle parameter of the north pole, in (0, 2π].
pub fn collision_parameter(frame: &AlphaFrame) -> Result<f64> {
    let q = frame.re[3].powi(2) + frame.im[3].powi(2);
    if q < 1.0 - COLLISION_TOL {
        return Err(Error::NotCollisionOrbit(q));
    }
    let s = frame.im[3].atan2(frame.re[3]).rem_euclid(TAU);
    Ok(if s <= 0.0 { TAU } else { s })
}

pub fn collision_time(frame: &AlphaFrame, scale: &SemiclassicalScale) -> Result<f64> {
    Ok(time_change(frame, collision_parameter(frame)?, scale))
}

pub fn kepler_state(orbit: &KeplerOrbit, t: f64) -> Result<PhasePoint> {
    let period = orbit.period();
    let tau = t.rem_euclid(period);
    if let Some(tc) = orbit.t_collision {
        let d = (tau - tc).rem_euclid(period);
        if d.min(period - d) <= 1e-12 * period {
            return Err(Error::CollisionInstant { t });
        }
    }
    let s = invert_time(&orbit.frame, tau, &orbit.scale)?;
    match orbit.state_at_parameter(s) {
        Err(Error::NorthPole { .. }) => Err(Error::CollisionInstant { t }),
        other => other,
    }
}

/// Time average of `a` over one period, computed as
/// (1/2π)∫ a(γ(t(s)))(1 − u4(s)) ds; the north-pole parameter contributes zero.
pub fn orbit_average(a: &SymbolSpec, orbit: &KeplerOrbit) -> Result<f64> {
    orbit_average_with_estimate(a, orbit).map(|r| r.0)
}

pub fn orbit_average_with_estimate(a: &SymbolSpec, orbit: &KeplerOrbit) -> Result<(f64, f64)> {
    periodic_mean(
        |s| {
            let sp = great_circle(&orbit.frame, s);
            let w = 1.0 - sp.u[3];
            if w < NORTH_POLE_TOL {
                return 0.0;
            }
            match moser_inv(&sp, &orbit.scale) {
                Ok(p) => a.eval(&p.x, &p.xi) * w,
                Err(_) => 0.0,
            }
        },
        1e-8,
        1024,
    )
}

/// Finite-difference Jacobian of the Moser map as an 8×6 matrix
/// (rows u, η in R⁴ × R⁴; columns x, ξ).
pub fn moser_jacobian(p: &PhasePoint, scale: &SemiclassicalScale, h: f64) -> SMatrix<f64, 8, 6> {
    let mut j = SMatrix::<f64, 8, 6>::zeros();
    let flat = |q: &PhasePoint| -> [f64; 8] {
        let m = moser_map(q, scale);
        [m.u[0], m.u[1], m.u[2], m.u[3], m.eta[0], m.eta[1], m.eta[2], m.eta[3]]
    };
    for c in 0..6 {
        let mut plus = *p;
        let mut minus = *p;
        if c < 3 {
            plus.x[c] += h;
            minus.x[c] -= h;
        } else {
            plus.xi[c - 3] += h;
            minus.xi[c - 3] -= h;
        }
        let (fp, fm) = (flat(&plus), flat(&minus));
        for r in 0..8 {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

fn canonical_form<const D: usize, const H: usize>() -> SMatrix<f64, D, D> {
    let mut o = SMatrix::<f64, D, D>::zeros();
    for k in 0..H {
        o[(k, k + H)] = 1.0;
        o[(k + H, k)] = -1.0;
    }
    o
}

/// Max entry of |Jᵀ Ω₈ J − p0 Ω₆|: the Moser map pulls the canonical form
/// on T*R⁴ ⊃ T*S³ back to p0 times the canonical form on T*R³.
pub fn symplectic_defect(p: &PhasePoint, scale: &SemiclassicalScale, h: f64) -> f64 {
    let j = moser_jacobian(p, scale, h);
    let o8 = canonical_form::<8, 4>();
    let o6 = canonical_form::<6, 3>();
    (j.transpose() * o8 * j - o6 * scale.p0()).abs().max()
}

/// Residual of Hamilton's equations along the flow at time `t`:
/// max(|ẋ − ξ|, |ξ̇ + x/|x|³|), derivatives by the five-point central stencil
/// with step `h` (error O(h⁴), which matters near pericentre of eccentric orbits).
pub fn hamilton_residual(orbit: &KeplerOrbit, t: f64, h: f64) -> Result<f64> {
    let p = kepler_state(orbit, t)?;
    let at = |k: f64| kepler_state(orbit, t + k * h);
    let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
    let xdot = ((p1.x - m1.x) * 8.0 - (p2.x - m2.x)) / (12.0 * h);
    let xidot = ((p1.xi - m1.xi) * 8.0 - (p2.xi - m2.xi)) / (12.0 * h);
    let r3 = p.x.norm().powi(3);
    Ok((xdot - p.xi).norm().max((xidot + p.x / r3).norm()))
}

/// Angle helper shared by callers that scan the orbit.
pub fn parameter_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * PI * k as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_scale() -> SemiclassicalScale {
        SemiclassicalScale::new(-0.5, 10).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng) -> PhasePoint {
        let mut v = || {
            Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            )
        };
        let x = v();
        let xi = v();
        PhasePoint::new(x, xi).unwrap()
    }

    #[test]
    fn scale_invariants() {
        let s = SemiclassicalScale::new(-0.3, 7).unwrap();
        assert_abs_diff_eq!(s.p0(), 0.6_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.p0() * s.hbar() * 8.0, 1.0, epsilon = 1e-15);
        let t = SemiclassicalScale::from_hbar(s.hbar(), 7).unwrap();
        assert_abs_diff_eq!(t.energy(), -0.3, epsilon = 1e-14);
        assert!(SemiclassicalScale::new(0.1, 1).is_err());
    }

    #[test]
    fn stereographic_examples_and_round_trip() {
        assert_eq!(stereographic_inv(&Vec3::zeros()), Vec4::new(0.0, 0.0, 0.0, -1.0));
        assert_eq!(
            stereographic_inv(&Vec3::new(1.0, 0.0, 0.0)),
            Vec4::new(1.0, 0.0, 0.0, 0.0)
        );
        assert!(matches!(
            stereographic_fwd(&Vec4::new(0.0, 0.0, 0.0, 1.0)),
            Err(Error::NorthPole { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let back = stereographic_fwd(&stereographic_inv(&p.x)).unwrap();
            assert!((back - p.x).norm() < 1e-12);
        }
    }

    #[test]
    fn moser_example_and_round_trip() {
        let sc = unit_scale();
        let p = PhasePoint::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let m = moser_map(&p, &sc);
        assert!((m.u - Vec4::new(0.0, 1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((m.eta - Vec4::new(-1.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
        let back = moser_inv(&m, &sc).unwrap();
        assert!(back.distance(&p) < 1e-15);

        let sc2 = SemiclassicalScale::new(-1.3, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let m = moser_map(&p, &sc2);
            assert!(m.u.dot(&m.eta).abs() < 1e-10 * (1.0 + m.eta.norm()));
            let (f, _) = aux_hamiltonians(&p, &sc2).unwrap();
            assert!((0.5 * m.eta.norm_squared() - f).abs() < 1e-10 * f.max(1.0));
            let back = moser_inv(&m, &sc2).unwrap();
            assert!(back.distance(&p) < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_chain() {
        let sc = SemiclassicalScale::new(-0.7, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let h = hamiltonian(&p).unwrap();
            let (_, g) = aux_hamiltonians(&p, &sc).unwrap();
            assert!((h - (g / p.x.norm() - sc.p0().powi(2) / 2.0)).abs() < 1e-12 * (1.0 + h.abs()));
        }
        let p = PhasePoint::new(Vec3::new(2.0, 0.0, 0.0), Vec3::zeros()).unwrap();
        assert_eq!(hamiltonian(&p).unwrap(), -0.5);
    }

    #[test]
    fn symplectic_pullback() {
        let sc = SemiclassicalScale::new(-0.8, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            assert!(symplectic_defect(&p, &sc, 1e-5) < 1e-8);
        }
    }

    #[test]
    fn time_change_examples() {
        let sc = unit_scale();
        let f = AlphaFrame::basis(1, 2).unwrap();
        assert_abs_diff_eq!(time_change(&f, 1.3, &sc), 1.3, epsilon = 1e-15);
        let c = AlphaFrame::basis(1, 4).unwrap();
        let s: f64 = 0.7;
        assert_abs_diff_eq!(time_change(&c, s, &sc), s + s.cos() - 1.0, epsilon = 1e-15);
        for fr in [f, c, AlphaFrame::inclined(0.4)] {
            assert_abs_diff_eq!(time_change(&fr, TAU, &sc), sc.period(), epsilon = 1e-13);
        }
        // derivative
        let fr = AlphaFrame::inclined(0.9);
        let h = 1e-5;
        for s in parameter_grid(37) {
            let d = (time_change(&fr, s + h, &sc) - time_change(&fr, s - h, &sc)) / (2.0 * h);
            let u4 = great_circle(&fr, s).u[3];
            assert!((d - (1.0 - u4)).abs() < 1e-6);
        }
    }

    #[test]
    fn invert_time_round_trip() {
        let sc = SemiclassicalScale::new(-0.4, 1).unwrap();
        let fr = AlphaFrame::inclined(1.2);
        for k in 0..100 {
            let s = TAU * (k as f64 + 0.5) / 100.0;
            let t = time_change(&fr, s, &sc);
            let s2 = invert_time(&fr, t, &sc).unwrap();
            assert!((s - s2).abs() < 1e-9, "{s} {s2}");
        }
        let f = AlphaFrame::basis(1, 2).unwrap();
        assert_abs_diff_eq!(invert_time(&f, 1.0, &unit_scale()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn collision_times() {
        let sc = unit_scale();
        let c = AlphaFrame::basis(1, 4).unwrap();
        assert_abs_diff_eq!(collision_parameter(&c).unwrap(), PI / 2.0, epsilon = 1e-15);
        let tg = collision_time(&c, &sc).unwrap();
        assert_abs_diff_eq!(tg, PI / 2.0 - 1.0, epsilon = 1e-14);
        assert!(matches!(
            collision_time(&AlphaFrame::basis(1, 2).unwrap(), &sc),
            Err(Error::NotCollisionOrbit(_))
        ));
        let tr = collision_time(&c.conj(), &sc).unwrap();
        assert_abs_diff_eq!(tr, sc.period() - tg, epsilon = 1e-13);
        let s = invert_time(&c, tg, &sc).unwrap();
        assert!((s - PI / 2.0).abs() < 1e-4);
        let orbit = KeplerOrbit::new(c, sc);
        assert!(matches!(kepler_state(&orbit, tg), Err(Error::CollisionInstant { .. })));
        assert!(matches!(
            kepler_state(&orbit, tg + sc.period()),
            Err(Error::CollisionInstant { .. })
        ));
        assert!(kepler_state(&orbit, tg + 1e-3).is_ok());
    }

    #[test]
    fn kepler_flow() {
        let sc = unit_scale();
        let orbit = KeplerOrbit::new(AlphaFrame::basis(1, 2).unwrap(), sc);
        let p = kepler_state(&orbit, 0.0).unwrap();
        assert!((p.x - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-14);
        assert!((p.xi - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-14);

        let sc2 = SemiclassicalScale::new(-0.6, 5).unwrap();
        let orbit = KeplerOrbit::new(AlphaFrame::inclined(0.8), sc2);
        for k in 0..50 {
            let t = orbit.period() * k as f64 / 50.0 + 0.01;
            let p = kepler_state(&orbit, t).unwrap();
            assert!((hamiltonian(&p).unwrap() + 0.6).abs() < 1e-8);
            let q = kepler_state(&orbit, t + orbit.period()).unwrap();
            assert!(p.distance(&q) < 1e-8);
            assert!(hamilton_residual(&orbit, t, 1e-5).unwrap() < 1e-5);
        }
    }

    #[test]
    fn orbit_averages() {
        let sc = unit_scale();
        let orbit = KeplerOrbit::new(AlphaFrame::basis(1, 2).unwrap(), sc);
        let one = SymbolSpec::momentum_plateau(3.0, 4.0);
        assert_abs_diff_eq!(orbit_average(&one, &orbit).unwrap(), 1.0, epsilon = 1e-12);
        let xi2 = SymbolSpec::momentum_only(
            "|xi|^2 cut off",
            |xi: &Vec3| xi.norm_squared() * crate::symbol::plateau(xi.norm(), 3.0, 4.0),
            None,
        );
        assert_abs_diff_eq!(orbit_average(&xi2, &orbit).unwrap(), 1.0, epsilon = 1e-10);
        // mean position of an inclined orbit: x1 averages to −(3/2) sin θ0
        let th: f64 = PI / 6.0;
        let orbit = KeplerOrbit::new(AlphaFrame::inclined(th), sc);
        let x1 = SymbolSpec::position_only("x1", |x: &Vec3| x[0], None);
        assert_abs_diff_eq!(orbit_average(&x1, &orbit).unwrap(), -1.5 * th.sin(), epsilon = 1e-8);
    }

    #[test]
    fn collision_average_matches_window() {
        let sc = unit_scale();
        let c = AlphaFrame::basis(1, 4).unwrap();
        let orbit = KeplerOrbit::new(c, sc);
        let a = SymbolSpec::momentum_ball_bump(Vec3::new(1.0, 0.0, 0.0), 0.8, 1.0 / 3.0);
        let avg = orbit_average(&a, &orbit).unwrap();
        // direct t-integral over (t_γ − T, t_γ) with a midpoint rule
        let tg = orbit.t_collision.unwrap();
        let n = 200_000;
        let h = orbit.period() / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let t = tg - orbit.period() + (k as f64 + 0.5) * h;
            let p = kepler_state(&orbit, t).unwrap();
            acc += a.eval(&p.x, &p.xi) * h;
        }
        assert!(avg > 0.05);
        assert!(
            (avg - acc / orbit.period()).abs() < 1e-6,
            "{avg} {}",
            acc / orbit.period()
        );
    }

    #[test]
    fn frame_parsing() {
        let f: AlphaFrame = "e1+ie4".parse().unwrap();
        assert!(f.is_collision());
        let g: AlphaFrame = "theta0:0".parse().unwrap();
        assert!(g.same_geodesic(&AlphaFrame::basis(1, 2).unwrap()));
        let h: AlphaFrame = "1,0,0,0;0,0,1,0".parse().unwrap();
        assert_eq!(h, AlphaFrame::basis(1, 3).unwrap());
        assert!("e1+ie1".parse::<AlphaFrame>().is_err());
        let json = serde_json::to_string(&f).unwrap();
        let back: AlphaFrame = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn geodesic_identity() {
        let a = AlphaFrame::inclined(0.3);
        assert!(a.same_geodesic(&a.phase_rotated(1.1)));
        assert!(!a.same_geodesic(&a.conj()));
        assert!(!a.same_geodesic(&AlphaFrame::basis(1, 3).unwrap()));
    }
}
