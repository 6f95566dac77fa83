//! Phase-space observables a(x, ξ) and a palette of smooth compactly supported bumps.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::geometry::{KeplerOrbit, Vec3};

pub type ScalarField = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
pub type PhaseField = Arc<dyn Fn(&Vec3, &Vec3) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self {
            center: center.into(),
            radius,
        }
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        (p - self.center()).norm_squared() <= self.radius * self.radius
    }

    /// Smallest ball around the origin containing this one.
    pub fn reach(&self) -> f64 {
        self.center().norm() + self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    MomentumOnly,
    PositionOnly,
    SeparableSum,
    General,
}

/// One product term f(x)·g(ξ) of a separable symbol.
#[derive(Clone)]
pub struct SeparableTerm {
    pub f: ScalarField,
    pub g: ScalarField,
    pub position_support: Option<Ball>,
    pub momentum_support: Option<Ball>,
}

impl SeparableTerm {
    pub fn new(
        f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        g: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        position_support: Option<Ball>,
        momentum_support: Option<Ball>,
    ) -> Self {
        Self {
            f: Arc::new(f),
            g: Arc::new(g),
            position_support,
            momentum_support,
        }
    }

    #[inline]
    pub fn eval_f(&self, x: &Vec3) -> f64 {
        match &self.position_support {
            Some(b) if !b.contains(x) => 0.0,
            _ => (self.f)(x),
        }
    }

    #[inline]
    pub fn eval_g(&self, xi: &Vec3) -> f64 {
        match &self.momentum_support {
            Some(b) if !b.contains(xi) => 0.0,
            _ => (self.g)(xi),
        }
    }
}

#[derive(Clone)]
enum Inner {
    Momentum(ScalarField),
    Position(ScalarField),
    Separable(Vec<SeparableTerm>),
    General(PhaseField),
}

/// A real symbol in one of four evaluable classes, with optional declared
/// support balls in position and momentum. Evaluation returns exactly 0
/// outside a declared ball.
#[derive(Clone)]
pub struct SymbolSpec {
    label: String,
    inner: Inner,
    position_support: Option<Ball>,
    momentum_support: Option<Ball>,
}

impl fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolSpec")
            .field("label", &self.label)
            .field("kind", &self.kind())
            .field("position_support", &self.position_support)
            .field("momentum_support", &self.momentum_support)
            .finish()
    }
}

impl SymbolSpec {
    pub fn momentum_only(
        label: impl Into<String>,
        g: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        support: Option<Ball>,
    ) -> Self {
        Self {
            label: label.into(),
            inner: Inner::Momentum(Arc::new(g)),
            position_support: None,
            momentum_support: support,
        }
    }

    pub fn position_only(
        label: impl Into<String>,
        f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        support: Option<Ball>,
    ) -> Self {
        Self {
            label: label.into(),
            inner: Inner::Position(Arc::new(f)),
            position_support: support,
            momentum_support: None,
        }
    }

    pub fn separable(label: impl Into<String>, terms: Vec<SeparableTerm>) -> Self {
        let hull = |get: fn(&SeparableTerm) -> Option<Ball>| -> Option<Ball> {
            let balls: Option<Vec<Ball>> = terms.iter().map(get).collect();
            let balls = balls?;
            let first = balls.first()?;
            let c = first.center();
            let r = balls
                .iter()
                .map(|b| (b.center() - c).norm() + b.radius)
                .fold(0.0, f64::max);
            Some(Ball::new(c, r))
        };
        let position_support = hull(|t| t.position_support);
        let momentum_support = hull(|t| t.momentum_support);
        Self {
            label: label.into(),
            inner: Inner::Separable(terms),
            position_support,
            momentum_support,
        }
    }

    pub fn general(
        label: impl Into<String>,
        a: impl Fn(&Vec3, &Vec3) -> f64 + Send + Sync + 'static,
        position_support: Option<Ball>,
        momentum_support: Option<Ball>,
    ) -> Self {
        Self {
            label: label.into(),
            inner: Inner::General(Arc::new(a)),
            position_support,
            momentum_support,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> SymbolKind {
        match self.inner {
            Inner::Momentum(_) => SymbolKind::MomentumOnly,
            Inner::Position(_) => SymbolKind::PositionOnly,
            Inner::Separable(_) => SymbolKind::SeparableSum,
            Inner::General(_) => SymbolKind::General,
        }
    }

    pub fn position_support(&self) -> Option<Ball> {
        self.position_support
    }

    pub fn momentum_support(&self) -> Option<Ball> {
        self.momentum_support
    }

    pub fn eval(&self, x: &Vec3, xi: &Vec3) -> f64 {
        if let Some(b) = &self.position_support {
            if !b.contains(x) {
                return 0.0;
            }
        }
        if let Some(b) = &self.momentum_support {
            if !b.contains(xi) {
                return 0.0;
            }
        }
        match &self.inner {
            Inner::Momentum(g) => g(xi),
            Inner::Position(f) => f(x),
            Inner::Separable(ts) => ts.iter().map(|t| t.eval_f(x) * t.eval_g(xi)).sum(),
            Inner::General(a) => a(x, xi),
        }
    }

    /// g(ξ) for momentum-only symbols.
    pub fn momentum_factor(&self) -> Option<ScalarField> {
        match &self.inner {
            Inner::Momentum(g) => {
                let g = g.clone();
                let sup = self.momentum_support;
                Some(Arc::new(move |xi: &Vec3| match &sup {
                    Some(b) if !b.contains(xi) => 0.0,
                    _ => g(xi),
                }))
            }
            _ => None,
        }
    }

    /// f(x) for position-only symbols.
    pub fn position_factor(&self) -> Option<ScalarField> {
        match &self.inner {
            Inner::Position(f) => {
                let f = f.clone();
                let sup = self.position_support;
                Some(Arc::new(move |x: &Vec3| match &sup {
                    Some(b) if !b.contains(x) => 0.0,
                    _ => f(x),
                }))
            }
            _ => None,
        }
    }

    /// Product terms, for the classes that have them.
    pub fn separable_terms(&self) -> Option<Vec<SeparableTerm>> {
        let one: ScalarField = Arc::new(|_: &Vec3| 1.0);
        match &self.inner {
            Inner::Separable(ts) => Some(ts.clone()),
            Inner::Momentum(g) => Some(vec![SeparableTerm {
                f: one,
                g: g.clone(),
                position_support: None,
                momentum_support: self.momentum_support,
            }]),
            Inner::Position(f) => Some(vec![SeparableTerm {
                f: f.clone(),
                g: one,
                position_support: self.position_support,
                momentum_support: None,
            }]),
            Inner::General(_) => None,
        }
    }

    /// Multiply by a smooth position cutoff equal to 1 on `plateau_radius` and
    /// vanishing beyond `outer_radius` (both around the origin). The result is
    /// separable (or general) with a declared position support.
    pub fn with_position_cutoff(&self, plateau_radius: f64, outer_radius: f64) -> SymbolSpec {
        let ball = Ball::new(Vec3::zeros(), outer_radius);
        let cut = move |x: &Vec3| plateau(x.norm(), plateau_radius, outer_radius);
        match &self.inner {
            Inner::General(a) => {
                let a = a.clone();
                SymbolSpec::general(
                    format!("{} (position cutoff)", self.label),
                    move |x, xi| cut(x) * a(x, xi),
                    Some(ball),
                    self.momentum_support,
                )
            }
            _ => {
                let terms = self
                    .separable_terms()
                    .expect("non-general symbols are separable")
                    .into_iter()
                    .map(|t| {
                        let f = t.f.clone();
                        SeparableTerm {
                            f: Arc::new(move |x: &Vec3| cut(x) * f(x)),
                            g: t.g,
                            position_support: Some(ball),
                            momentum_support: t.momentum_support,
                        }
                    })
                    .collect();
                SymbolSpec::separable(format!("{} (position cutoff)", self.label), terms)
            }
        }
    }

    /// View any symbol as a general one (same values and supports).
    pub fn as_general(&self) -> SymbolSpec {
        let me = self.clone();
        SymbolSpec {
            label: self.label.clone(),
            inner: Inner::General(Arc::new(move |x, xi| me.eval(x, xi))),
            position_support: self.position_support,
            momentum_support: self.momentum_support,
        }
    }

    // ---- palette ----

    /// Radial momentum bump `m((|ξ| − r0)/w)` with sharpness κ.
    pub fn radial_momentum_bump(center_radius: f64, half_width: f64, sharpness: f64) -> Self {
        Self::momentum_only(
            format!("radial momentum bump r0={center_radius} w={half_width} k={sharpness}"),
            move |xi: &Vec3| mollifier((xi.norm() - center_radius) / half_width, sharpness),
            Some(Ball::new(Vec3::zeros(), center_radius + half_width)),
        )
    }

    /// The default radial bump for momentum scale p0: centred on |ξ| = p0,
    /// half-width 0.9 p0, sharpness 1/3.
    pub fn default_radial_bump(p0: f64) -> Self {
        Self::radial_momentum_bump(p0, 0.9 * p0, 1.0 / 3.0)
    }

    pub fn momentum_ball_bump(center: Vec3, radius: f64, sharpness: f64) -> Self {
        Self::momentum_only(
            format!(
                "momentum ball bump c={:?} r={radius}",
                [center[0], center[1], center[2]]
            ),
            move |xi: &Vec3| mollifier((xi - center).norm() / radius, sharpness),
            Some(Ball::new(center, radius)),
        )
    }

    pub fn position_ball_bump(center: Vec3, radius: f64, sharpness: f64) -> Self {
        Self::position_only(
            format!(
                "position ball bump c={:?} r={radius}",
                [center[0], center[1], center[2]]
            ),
            move |x: &Vec3| mollifier((x - center).norm() / radius, sharpness),
            Some(Ball::new(center, radius)),
        )
    }

    /// Bump in the distance from x to the configuration-space curve of `orbit`.
    pub fn position_tube_bump(orbit: &KeplerOrbit, radius: f64, sharpness: f64) -> Self {
        let curve = OrbitCurve::new(orbit);
        let (c, r) = curve.bounding_ball();
        Self::position_only(
            format!("position tube bump r={radius}"),
            move |x: &Vec3| mollifier(curve.distance(x) / radius, sharpness),
            Some(Ball::new(c, r + radius)),
        )
    }

    /// Angular bump around direction `dir` (angle half-width `angle`), times a
    /// smooth radial band on [r_lo, r_hi] with ramps of width `ramp`.
    pub fn angular_momentum_bump(dir: Vec3, angle: f64, r_lo: f64, r_hi: f64, ramp: f64) -> Self {
        let d = dir.normalize();
        Self::momentum_only(
            format!("angular momentum bump angle={angle}"),
            move |xi: &Vec3| {
                let r = xi.norm();
                if r == 0.0 {
                    return 0.0;
                }
                let ang = (xi.dot(&d) / r).clamp(-1.0, 1.0).acos();
                let band = smooth_step((r - r_lo) / ramp) * (1.0 - smooth_step((r - r_hi) / ramp));
                mollifier(ang / angle, 1.0) * band
            },
            Some(Ball::new(Vec3::zeros(), r_hi + ramp)),
        )
    }

    /// Control bump in momentum, supported well away from the orbit's hodograph:
    /// centred at 1.5 p0 along the orbit normal, radius 0.5 p0.
    pub fn off_orbit_bump(orbit: &KeplerOrbit) -> Self {
        let p0 = orbit.scale.p0();
        let normal = orbit_normal(orbit);
        let mut s = Self::momentum_ball_bump(normal * 1.5 * p0, 0.5 * p0, 1.0);
        s.label = "off-orbit control bump".into();
        s
    }

    /// Smooth cutoff equal to 1 for |ξ| ≤ inner and 0 for |ξ| ≥ outer.
    pub fn momentum_plateau(inner: f64, outer: f64) -> Self {
        Self::momentum_only(
            format!("momentum plateau {inner}..{outer}"),
            move |xi: &Vec3| plateau(xi.norm(), inner, outer),
            Some(Ball::new(Vec3::zeros(), outer)),
        )
    }

    pub fn position_plateau(inner: f64, outer: f64) -> Self {
        Self::position_only(
            format!("position plateau {inner}..{outer}"),
            move |x: &Vec3| plateau(x.norm(), inner, outer),
            Some(Ball::new(Vec3::zeros(), outer)),
        )
    }

    /// The coordinate function x_k (unbounded; fine for orbit averages).
    pub fn position_coordinate(k: usize) -> Self {
        Self::position_only(format!("x{}", k + 1), move |x: &Vec3| x[k], None)
    }
}

/// exp(κ(1 − 1/(1 − s²))) on |s| < 1, zero outside; equals 1 at s = 0.
#[inline]
pub fn mollifier(s: f64, sharpness: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (sharpness * (1.0 - 1.0 / q)).exp()
    }
}

/// C∞ step: 0 for s ≤ 0, 1 for s ≥ 1.
#[inline]
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// 1 for r ≤ inner, 0 for r ≥ outer, smooth in between.
#[inline]
pub fn plateau(r: f64, inner: f64, outer: f64) -> f64 {
    1.0 - smooth_step((r - inner) / (outer - inner))
}

/// Unit normal of the orbit plane in configuration space (any perpendicular
/// to the line for collision orbits).
pub fn orbit_normal(orbit: &KeplerOrbit) -> Vec3 {
    let samples: Vec<_> = crate::geometry::parameter_grid(16)
        .filter_map(|s| orbit.state_at_parameter(s + 0.1).ok())
        .collect();
    let mut best = Vec3::zeros();
    for p in &samples {
        let l = p.x.cross(&p.xi);
        if l.norm() > best.norm() {
            best = l;
        }
    }
    if best.norm() > 1e-8 {
        return best.normalize();
    }
    let dir = samples
        .iter()
        .map(|p| p.x)
        .fold(Vec3::zeros(), |a, b| if b.norm() > a.norm() { b } else { a })
        .normalize();
    let trial = if dir[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    dir.cross(&trial).normalize()
}

/// Sampled configuration-space curve of an orbit, with a refined distance query.
#[derive(Clone)]
struct OrbitCurve {
    orbit: KeplerOrbit,
    samples: Arc<Vec<(f64, Vec3)>>,
}

impl OrbitCurve {
    const N: usize = 720;

    fn new(orbit: &KeplerOrbit) -> Self {
        let samples = (0..Self::N)
            .map(|k| std::f64::consts::TAU * k as f64 / Self::N as f64)
            .map(|s| {
                (
                    s,
                    orbit
                        .state_at_parameter(s)
                        .map(|p| p.x)
                        .unwrap_or_else(|_| Vec3::zeros()),
                )
            })
            .collect();
        Self {
            orbit: *orbit,
            samples: Arc::new(samples),
        }
    }

    fn point(&self, s: f64) -> Vec3 {
        self.orbit
            .state_at_parameter(s)
            .map(|p| p.x)
            .unwrap_or_else(|_| Vec3::zeros())
    }

    fn bounding_ball(&self) -> (Vec3, f64) {
        let c = self.samples.iter().fold(Vec3::zeros(), |a, (_, x)| a + x) / self.samples.len() as f64;
        let r = self.samples.iter().map(|(_, x)| (x - c).norm()).fold(0.0, f64::max);
        (c, r)
    }

    fn distance(&self, p: &Vec3) -> f64 {
        let (k, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, (_, x))| (k, (x - p).norm_squared()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let ds = std::f64::consts::TAU / Self::N as f64;
        let s0 = self.samples[k].0;
        let f = |s: f64| (self.point(s) - p).norm_squared();
        // golden-section refinement on [s0 − ds, s0 + ds]
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (s0 - ds, s0 + ds);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..50 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        fc.min(fd).sqrt()
    }
}
