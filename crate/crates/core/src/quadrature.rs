//! Quadrature rules and compensated summation shared by the numerical modules.

use nalgebra::{Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierComplex {
    re: Neumaier,
    im: Neumaier,
}

impl NeumaierComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn sum_f64<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = Neumaier::new();
    it.into_iter().for_each(|x| acc.add(x));
    acc.value()
}

pub fn sum_complex<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    let mut acc = NeumaierComplex::new();
    it.into_iter().for_each(|z| acc.add(z));
    acc.value()
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let k = (i + 1) as f64;
        let nf = n as f64;
        let mut z = (PI * (k - 0.25) / (nf + 0.5)).cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to [a, b] as (node, weight) pairs.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    x.iter().zip(&w).map(|(&xi, &wi)| (c + h * xi, h * wi)).collect()
}

/// Orthonormal basis of R^4 whose first two columns are `a` and `b`
/// (assumed orthonormal already).
pub fn complete_basis(a: &Vector4<f64>, b: &Vector4<f64>) -> Matrix4<f64> {
    let mut cols: Vec<Vector4<f64>> = vec![*a, *b];
    for k in 0..4 {
        if cols.len() == 4 {
            break;
        }
        let mut v = Vector4::zeros();
        v[k] = 1.0;
        for c in &cols {
            v -= c * c.dot(&v);
        }
        // second pass for stability
        for c in &cols {
            v -= c * c.dot(&v);
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v / n);
        }
    }
    Matrix4::from_columns(&cols)
}

/// Orthonormal basis with `u` as last column.
pub fn basis_with_last(u: &Vector4<f64>) -> Matrix4<f64> {
    let mut cols: Vec<Vector4<f64>> = Vec::with_capacity(4);
    let un = u / u.norm();
    let mut k = 0;
    while cols.len() < 3 {
        let mut v = Vector4::zeros();
        v[k] = 1.0;
        k += 1;
        for _ in 0..2 {
            v -= un * un.dot(&v);
            for c in &cols {
                v -= *c * c.dot(&v);
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v / n);
        }
    }
    cols.push(un);
    Matrix4::from_columns(&cols)
}

/// Product rule on S^3 in Hopf coordinates
/// `u' = (cos η cos φ1, cos η sin φ1, sin η cos φ2, sin η sin φ2)` with `t = sin² η`,
/// for which `dΩ = ½ dt dφ1 dφ2`. Points are mapped through a basis `Q` as `u = Q u'`.
/// The `t` range may be truncated to `[0, t_max]` when the integrand is known to be
/// negligible beyond it.
#[derive(Debug, Clone)]
pub struct HopfRule {
    t_nodes: Vec<(f64, f64)>,
    phi1: Vec<(f64, f64)>,
    phi2: Vec<(f64, f64)>,
}

impl HopfRule {
    pub fn new(n_t: usize, n_phi1: usize, n_phi2: usize, t_max: f64) -> Self {
        let t_max = t_max.clamp(0.0, 1.0);
        let circle = |n: usize| -> Vec<(f64, f64)> {
            (0..n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    (a.cos(), a.sin())
                })
                .collect()
        };
        Self {
            t_nodes: gauss_legendre_on(0.0, t_max, n_t),
            phi1: circle(n_phi1),
            phi2: circle(n_phi2),
        }
    }

    /// Rule exact for polynomials of degree `deg` restricted to S^3.
    pub fn exact_for_degree(deg: usize) -> Self {
        let n_t = deg / 2 + 4;
        let n_phi = deg + 8;
        Self::new(n_t, n_phi, n_phi, 1.0)
    }

    pub fn len(&self) -> usize {
        self.t_nodes.len() * self.phi1.len() * self.phi2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn integrate<F>(&self, basis: &Matrix4<f64>, f: F) -> Complex64
    where
        F: Fn(&Vector4<f64>) -> Complex64 + Sync,
    {
        let w_phi = 0.5 * (2.0 * PI / self.phi1.len() as f64) * (2.0 * PI / self.phi2.len() as f64);
        let partial: Vec<Complex64> = self
            .t_nodes
            .par_iter()
            .map(|&(t, wt)| {
                let c = (1.0 - t).max(0.0).sqrt();
                let s = t.max(0.0).sqrt();
                let mut acc = NeumaierComplex::new();
                for &(c1, s1) in &self.phi1 {
                    for &(c2, s2) in &self.phi2 {
                        let up = Vector4::new(c * c1, c * s1, s * c2, s * s2);
                        acc.add(f(&(basis * up)));
                    }
                }
                acc.value() * wt
            })
            .collect();
        sum_complex(partial) * w_phi
    }
}

/// Spherical product rule on all of R^3 with the radial map `r = scale · tan(χ/2)`,
/// Gauss-Legendre in χ and θ, trapezoid in φ.
#[derive(Debug, Clone)]
pub struct R3Rule {
    pub scale: f64,
    pub n_chi: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl R3Rule {
    pub fn integrate<F>(&self, center: &Vector3<f64>, f: F) -> Complex64
    where
        F: Fn(&Vector3<f64>) -> Complex64 + Sync,
    {
        let chi = gauss_legendre_on(0.0, PI, self.n_chi);
        let dirs = sphere_directions(self.n_theta, self.n_phi);
        let s = self.scale;
        let partial: Vec<Complex64> = chi
            .par_iter()
            .map(|&(x, wx)| {
                let h = 0.5 * x;
                let r = s * h.tan();
                let jac = r * r * s / (2.0 * h.cos().powi(2));
                let mut acc = NeumaierComplex::new();
                for (d, wd) in &dirs {
                    acc.add(f(&(center + d * r)) * *wd);
                }
                acc.value() * (wx * jac)
            })
            .collect();
        sum_complex(partial)
    }
}

/// Product rule on a ball: Gauss-Legendre in r and θ, trapezoid in φ.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub nodes: Vec<(Vector3<f64>, f64)>,
}

impl BallRule {
    pub fn new(center: &Vector3<f64>, radius: f64, n_r: usize, n_theta: usize, n_phi: usize) -> Self {
        let rr = gauss_legendre_on(0.0, radius, n_r);
        let dirs = sphere_directions(n_theta, n_phi);
        let mut nodes = Vec::with_capacity(n_r * dirs.len());
        for &(r, wr) in &rr {
            for (d, wd) in &dirs {
                nodes.push((center + d * r, wr * r * r * wd));
            }
        }
        Self { nodes }
    }
}

/// Unit directions with solid-angle weights: Gauss-Legendre in θ (weight sin θ)
/// and `n_phi` equispaced azimuths.
pub fn sphere_directions(n_theta: usize, n_phi: usize) -> Vec<(Vector3<f64>, f64)> {
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (th, wt) in gauss_legendre_on(0.0, PI, n_theta) {
        let (s, c) = th.sin_cos();
        let wc = wt * s;
        for k in 0..n_phi {
            let p = dphi * k as f64;
            out.push((Vector3::new(s * p.cos(), s * p.sin(), c), wc * dphi));
        }
    }
    out
}

/// Trapezoid rule for a 2π-periodic integrand on [0, 2π], refined by doubling
/// until successive values agree to `rel_tol` (with a small absolute floor).
/// Returns the mean value (1/2π)∫f and the last successive difference.
pub fn periodic_mean<F>(f: F, rel_tol: f64, min_points: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut n = min_points.max(8).next_power_of_two();
    let h0 = 2.0 * PI / n as f64;
    let first: Vec<f64> = (0..n).into_par_iter().map(|k| f(h0 * k as f64)).collect();
    let mut total = sum_f64(first);
    let mut mean = total / n as f64;
    const MAX_POINTS: usize = 1 << 22;
    let mut delta = f64::INFINITY;
    while n < MAX_POINTS {
        let h = 2.0 * PI / n as f64;
        let mids: Vec<f64> = (0..n).into_par_iter().map(|k| f(h * (k as f64 + 0.5))).collect();
        total += sum_f64(mids);
        n *= 2;
        let next = total / n as f64;
        delta = (next - mean).abs();
        mean = next;
        if delta <= rel_tol * mean.abs() || delta < 1e-14 {
            return Ok((mean, delta));
        }
    }
    Err(Error::NonConvergence {
        what: "periodic trapezoid rule",
        estimate: delta,
    })
}
