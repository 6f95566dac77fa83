use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::MomentumState;
use crate::error::{Error, Result};
use crate::geometry::{SemiclassicalScale, Vec3};
use crate::quadrature::{sum_f64, Neumaier};

const MAGIC: &[u8; 8] = b"HCGRID01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Position,
    Momentum,
}

/// Box sizes for the momentum → position transform. The point count per axis
/// follows from reciprocity: M ≥ (2 Lx)(2 Lξ)/(2πħ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Half-width of the momentum box in units of p0.
    pub momentum_half_width: f64,
    /// Half-width of the position box in units of 1/p0².
    pub position_half_width: f64,
    pub max_points_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            momentum_half_width: 3.0,
            position_half_width: 3.0,
            max_points_per_axis: 256,
        }
    }
}

impl GridSpec {
    pub fn points_per_axis(&self, scale: &SemiclassicalScale) -> Result<usize> {
        let lx = self.position_half_width / scale.p0().powi(2);
        let lxi = self.momentum_half_width * scale.p0();
        let m = (4.0 * lx * lxi / (2.0 * PI * scale.hbar())).ceil() as usize;
        let m = fft_friendly(m.max(16));
        if m > self.max_points_per_axis {
            return Err(Error::Resolution(format!(
                "{m} points per axis needed, limit is {}",
                self.max_points_per_axis
            )));
        }
        Ok(m)
    }
}

/// In-place 3D FFT of an m³ row-major array, optionally with per-axis
/// pre- and post-multipliers (the same on every axis).
pub(crate) fn fft3(data: &mut [Complex64], m: usize, dir: FftDirection, phases: Option<(&[Complex64], &[Complex64])>) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(m, dir);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..3 {
        let stride = m.pow(2 - axis as u32);
        for base in 0..m * m {
            // base enumerates the two other indices
            let start = match axis {
                0 => base,
                1 => (base / m) * m * m + base % m,
                _ => base * m,
            };
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[start + k * stride];
                if let Some((pre, _)) = phases {
                    *v *= pre[k];
                }
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, v) in line.iter().enumerate() {
                data[start + k * stride] = match phases {
                    Some((_, post)) => v * post[k],
                    None => *v,
                };
            }
        }
    }
}

/// Smallest even number ≥ n of the form 2^a 3^b 5^c.
pub(crate) fn fft_friendly(n: usize) -> usize {
    let mut m = n + (n % 2);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub space: Space,
    pub n: u32,
    pub energy: f64,
    pub p0: f64,
    pub hbar: f64,
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub shape: [usize; 3],
}

/// Samples of a wavefunction on a regular 3D grid (row-major, last axis fastest).
#[derive(Debug, Clone)]
pub struct GridState {
    pub space: Space,
    pub scale: SemiclassicalScale,
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub shape: [usize; 3],
    pub samples: Vec<Complex64>,
}

impl GridState {
    pub fn header(&self) -> GridHeader {
        GridHeader {
            space: self.space,
            n: self.scale.n(),
            energy: self.scale.energy(),
            p0: self.scale.p0(),
            hbar: self.scale.hbar(),
            origin: self.origin,
            spacing: self.spacing,
            shape: self.shape,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    pub fn coords(&self, flat: usize) -> Vec3 {
        let k = flat % self.shape[2];
        let j = (flat / self.shape[2]) % self.shape[1];
        let i = flat / (self.shape[1] * self.shape[2]);
        Vec3::new(
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
            self.origin[2] + k as f64 * self.spacing[2],
        )
    }

    pub fn norm_squared(&self) -> f64 {
        sum_f64(self.samples.iter().map(|z| z.norm_sqr())) * self.cell_volume()
    }

    /// Σ f(x) |ψ(x)|² ΔV.
    pub fn integrate_density<F: Fn(&Vec3) -> f64 + Sync>(&self, f: F) -> f64 {
        let parts: Vec<f64> = self
            .samples
            .par_chunks(self.shape[2])
            .enumerate()
            .map(|(row, chunk)| {
                let mut acc = Neumaier::new();
                for (k, z) in chunk.iter().enumerate() {
                    acc.add(f(&self.coords(row * self.shape[2] + k)) * z.norm_sqr());
                }
                acc.value()
            })
            .collect();
        sum_f64(parts) * self.cell_volume()
    }

    pub fn mean_position(&self) -> Vec3 {
        Vec3::new(
            self.integrate_density(|x| x[0]),
            self.integrate_density(|x| x[1]),
            self.integrate_density(|x| x[2]),
        )
    }

    /// Fraction of the mass in the outer `frac` layer of the box on any axis.
    pub fn edge_mass(&self, frac: f64) -> f64 {
        let lo: Vec<f64> = (0..3)
            .map(|a| self.origin[a] + frac * self.shape[a] as f64 * self.spacing[a])
            .collect();
        let hi: Vec<f64> = (0..3)
            .map(|a| self.origin[a] + (1.0 - frac) * self.shape[a] as f64 * self.spacing[a])
            .collect();
        self.integrate_density(|x| {
            if (0..3).any(|a| x[a] < lo[a] || x[a] > hi[a]) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Writes the binary container to `path` and a JSON sidecar next to it.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        let mut w = BufWriter::new(File::create(path)?);
        let h = self.header();
        w.write_all(MAGIC)?;
        w.write_u64::<LittleEndian>(match h.space {
            Space::Position => 0,
            Space::Momentum => 1,
        })?;
        w.write_u64::<LittleEndian>(h.n as u64)?;
        for v in [h.energy, h.p0, h.hbar] {
            w.write_f64::<LittleEndian>(v)?;
        }
        for v in h.origin.iter().chain(&h.spacing) {
            w.write_f64::<LittleEndian>(*v)?;
        }
        for v in h.shape {
            w.write_u64::<LittleEndian>(v as u64)?;
        }
        for z in &self.samples {
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
        w.flush()?;
        let sidecar = path.with_extension("json");
        std::fs::write(&sidecar, serde_json::to_string_pretty(&h)?)?;
        Ok(sidecar)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::InvalidInput(format!(
                "{} is not a grid container",
                path.display()
            )));
        }
        let space = match r.read_u64::<LittleEndian>()? {
            0 => Space::Position,
            1 => Space::Momentum,
            t => return Err(Error::InvalidInput(format!("unknown space tag {t}"))),
        };
        let n = r.read_u64::<LittleEndian>()? as u32;
        let energy = r.read_f64::<LittleEndian>()?;
        let _p0 = r.read_f64::<LittleEndian>()?;
        let _hbar = r.read_f64::<LittleEndian>()?;
        let mut origin = [0.0; 3];
        let mut spacing = [0.0; 3];
        for v in origin.iter_mut().chain(spacing.iter_mut()) {
            *v = r.read_f64::<LittleEndian>()?;
        }
        let mut shape = [0usize; 3];
        for v in shape.iter_mut() {
            *v = r.read_u64::<LittleEndian>()? as usize;
        }
        let count = shape.iter().product::<usize>();
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            samples.push(Complex64::new(re, im));
        }
        let scale = SemiclassicalScale::new(energy, n)?;
        Ok(Self {
            space,
            scale,
            origin,
            spacing,
            shape,
            samples,
        })
    }
}

impl MomentumState {
    /// Samples F_ħΨ on the momentum box and applies the discrete inverse
    /// semiclassical Fourier transform
    /// ψ(x) = (2πħ)^{−3/2} Σ_ξ F_ħΨ(ξ) e^{i x·ξ/ħ} Δξ³.
    pub fn to_position_grid(&self, spec: &GridSpec) -> Result<GridState> {
        let sc = self.scale;
        let m = spec.points_per_axis(&sc)?;
        let lxi = spec.momentum_half_width * sc.p0();
        let dxi = 2.0 * lxi / m as f64;
        let xi0 = -lxi;
        let hbar = sc.hbar();
        let dx = 2.0 * PI * hbar / (m as f64 * dxi);
        let x0 = -0.5 * m as f64 * dx;

        let mut data = vec![Complex64::new(0.0, 0.0); m * m * m];
        data.par_chunks_mut(m).enumerate().for_each(|(row, chunk)| {
            let i = row / m;
            let j = row % m;
            for (k, z) in chunk.iter_mut().enumerate() {
                let xi = Vec3::new(xi0 + i as f64 * dxi, xi0 + j as f64 * dxi, xi0 + k as f64 * dxi);
                *z = self.eval(&xi);
            }
        });
        let captured = sum_f64(data.iter().map(|z| z.norm_sqr())) * dxi.powi(3);
        if captured < 1.0 - 1e-4 {
            return Err(Error::InsufficientCoverage { captured });
        }

        // per-axis phases: before the transform e^{i x0 k Δξ/ħ}, after e^{i ξ0 x_j/ħ}
        let pre: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, x0 * k as f64 * dxi / hbar))
            .collect();
        let post: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, xi0 * (x0 + j as f64 * dx) / hbar))
            .collect();
        fft3(&mut data, m, FftDirection::Inverse, Some((&pre, &post)));
        let norm = (dxi / (2.0 * PI * hbar).sqrt()).powi(3);
        data.par_iter_mut().for_each(|z| *z *= norm);

        let grid = GridState {
            space: Space::Position,
            scale: sc,
            origin: [x0; 3],
            spacing: [dx; 3],
            shape: [m; 3],
            samples: data,
        };
        let edge = grid.edge_mass(0.02);
        if edge > 1e-3 {
            return Err(Error::Resolution(format!(
                "position box too small: {edge:.2e} of the mass at the edges"
            )));
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AlphaFrame;
    use crate::states::MomentumState;

    #[test]
    fn friendly_sizes() {
        assert_eq!(fft_friendly(189), 192);
        assert_eq!(fft_friendly(16), 16);
        assert_eq!(fft_friendly(97), 100);
    }

    #[test]
    fn ground_state_transform() {
        // N = 0, E = −1/2: ψ(x) = e^{−|x|}/√π in position space
        let sc = SemiclassicalScale::new(-0.5, 0).unwrap();
        let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
        let spec = GridSpec {
            momentum_half_width: 20.0,
            position_half_width: 8.0,
            max_points_per_axis: 256,
        };
        let g = st.to_position_grid(&spec).unwrap();
        assert!((g.norm_squared() - 1.0).abs() < 1e-3);
        let target = Vec3::new(1.0, 0.0, 0.0);
        let idx = (0..g.samples.len())
            .min_by(|a, b| {
                (g.coords(*a) - target)
                    .norm()
                    .total_cmp(&(g.coords(*b) - target).norm())
            })
            .unwrap();
        let x = g.coords(idx);
        let exact = (-x.norm()).exp() / PI.sqrt();
        assert!(
            (g.samples[idx] - exact).norm() < 2e-2 * exact,
            "{} vs {exact}",
            g.samples[idx]
        );
    }

    #[test]
    fn coverage_error_for_heavy_tails() {
        let sc = SemiclassicalScale::new(-0.5, 0).unwrap();
        let st = MomentumState::new(AlphaFrame::basis(1, 2).unwrap(), sc);
        let err = st.to_position_grid(&GridSpec::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientCoverage { .. }));
    }

    #[test]
    fn container_round_trip() {
        let sc = SemiclassicalScale::new(-0.5, 8).unwrap();
        let g = GridState {
            space: Space::Momentum,
            scale: sc,
            origin: [-1.0, -2.0, -3.0],
            spacing: [0.1, 0.2, 0.3],
            shape: [2, 3, 4],
            samples: (0..24).map(|k| Complex64::new(k as f64, -0.5 * k as f64)).collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.bin");
        let side = g.write(&p).unwrap();
        let h: GridHeader = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(h, g.header());
        let back = GridState::read(&p).unwrap();
        assert_eq!(back.samples, g.samples);
        assert_eq!(back.header(), g.header());
    }
}
