use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{AlphaFrame, KeplerOrbit, SemiclassicalScale, Vec3, Vec4};
use crate::quantize::{Method, QuantizeOptions};
use crate::symbol::SymbolSpec;

/// A frame given either as text ("e1+ie2", "theta0:0.3", "1,0,0,0;0,1,0,0")
/// or as the pair of arrays [Re α, Im α].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameSpec {
    Text(String),
    Arrays([[f64; 4]; 2]),
}

impl FrameSpec {
    pub fn to_frame(&self) -> Result<AlphaFrame> {
        match self {
            FrameSpec::Text(s) => AlphaFrame::from_str(s).map_err(|e| Error::Config(format!("frame '{s}': {e}"))),
            FrameSpec::Arrays([re, im]) => AlphaFrame::new(Vec4::from(*re), Vec4::from(*im))
                .map_err(|e| Error::Config(format!("frame arrays: {e}"))),
        }
    }
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec::Text("e1+ie2".into())
    }
}

/// `{kind, params}`; params default per kind (lengths in units of p0 or 1/p0²
/// where noted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self {
            kind: "radial-bump".into(),
            params: Value::Null,
        }
    }
}

pub const SYMBOL_KINDS: &[&str] = &[
    "radial-bump",
    "momentum-ball",
    "position-ball",
    "tube",
    "angular",
    "off-orbit",
    "momentum-plateau",
    "position-plateau",
];

impl SymbolConfig {
    pub fn named(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            params: Value::Null,
        }
    }

    fn num(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::Config(format!("symbol param '{key}' must be a number"))),
        }
    }

    fn vec3(&self, key: &str, default: Vec3) -> Result<Vec3> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => {
                let a: [f64; 3] = serde_json::from_value(v.clone())
                    .map_err(|_| Error::Config(format!("symbol param '{key}' must be a 3-array")))?;
                Ok(Vec3::from(a))
            }
        }
    }

    /// Build the symbol; `frame` and `scale` fix the orbit-relative defaults.
    pub fn build(&self, frame: &AlphaFrame, scale: &SemiclassicalScale) -> Result<SymbolSpec> {
        let p0 = scale.p0();
        let orbit = KeplerOrbit::new(*frame, *scale);
        let s = match self.kind.as_str() {
            "radial-bump" => SymbolSpec::radial_momentum_bump(
                self.num("center_radius", 1.0)? * p0,
                self.num("half_width", 0.9)? * p0,
                self.num("sharpness", 1.0 / 3.0)?,
            ),
            "momentum-ball" => SymbolSpec::momentum_ball_bump(
                self.vec3("center", Vec3::new(1.0, 0.0, 0.0))? * p0,
                self.num("radius", 0.8)? * p0,
                self.num("sharpness", 1.0 / 3.0)?,
            ),
            "position-ball" => SymbolSpec::position_ball_bump(
                self.vec3("center", Vec3::new(-1.0, 0.0, 0.0))? / (p0 * p0),
                self.num("radius", 0.8)? / (p0 * p0),
                self.num("sharpness", 1.0 / 3.0)?,
            ),
            "tube" => SymbolSpec::position_tube_bump(
                &orbit,
                self.num("radius", 0.5)? / (p0 * p0),
                self.num("sharpness", 1.0 / 3.0)?,
            ),
            "angular" => SymbolSpec::angular_momentum_bump(
                self.vec3("direction", Vec3::new(1.0, 0.0, 0.0))?,
                self.num("angle", 0.8)?,
                self.num("r_lo", 0.2)? * p0,
                self.num("r_hi", 3.0)? * p0,
                self.num("ramp", 0.2)? * p0,
            ),
            "off-orbit" => SymbolSpec::off_orbit_bump(&orbit),
            "momentum-plateau" => {
                SymbolSpec::momentum_plateau(self.num("inner", 3.0)? * p0, self.num("outer", 4.0)? * p0)
            }
            "position-plateau" => {
                SymbolSpec::position_plateau(self.num("inner", 3.0)? / (p0 * p0), self.num("outer", 4.0)? / (p0 * p0))
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown symbol kind '{other}' (known: {})",
                    SYMBOL_KINDS.join(", ")
                )))
            }
        };
        Ok(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub quadrature: Option<f64>,
    pub monte_carlo: Option<f64>,
    pub mc_samples: Option<usize>,
    pub resolution: Option<f64>,
}

/// The JSON experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub frame: FrameSpec,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "N_list")]
    pub n_list: Vec<u32>,
    pub symbol: SymbolConfig,
    pub method: Option<Method>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Second frame for cross-term studies.
    pub beta_frame: Option<FrameSpec>,
    /// Frames and weights for mixed-measure studies.
    pub frames: Option<Vec<FrameSpec>>,
    pub weights: Option<Vec<f64>>,
    pub allow_large_n: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            frame: FrameSpec::default(),
            energy: -0.5,
            n_list: vec![8, 16, 32, 64],
            symbol: SymbolConfig::default(),
            method: None,
            tolerances: Tolerances::default(),
            seed: 0x5eed,
            output_dir: PathBuf::from("out"),
            beta_frame: None,
            frames: None,
            weights: None,
            allow_large_n: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn quantize_options(&self) -> QuantizeOptions {
        let d = QuantizeOptions::default();
        QuantizeOptions {
            method: self.method,
            quadrature_tol: self.tolerances.quadrature.unwrap_or(d.quadrature_tol),
            mc_tolerance: self.tolerances.monte_carlo,
            mc_samples: self.tolerances.mc_samples.unwrap_or(d.mc_samples),
            resolution: self.tolerances.resolution.unwrap_or(d.resolution),
            mc_seed: self.seed,
            ..d
        }
    }

    pub fn scale(&self, n: u32) -> Result<SemiclassicalScale> {
        SemiclassicalScale::new(self.energy, n).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_shape() {
        let text = r#"{
            "frame": [[1,0,0,0],[0,1,0,0]],
            "E": -0.5,
            "N_list": [8, 16],
            "symbol": {"kind": "radial-bump", "params": {"half_width": 0.5}},
            "method": "multiplier",
            "tolerances": {"quadrature": 1e-9},
            "seed": 7,
            "output_dir": "runs/a"
        }"#;
        let c: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.frame.to_frame().unwrap(), AlphaFrame::basis(1, 2).unwrap());
        assert_eq!(c.quantize_options().quadrature_tol, 1e-9);
        assert_eq!(c.quantize_options().method, Some(Method::Multiplier));
        let sc = c.scale(8).unwrap();
        assert!(c.symbol.build(&c.frame.to_frame().unwrap(), &sc).is_ok());
        let minimal: ExperimentConfig = serde_json::from_str(r#"{"frame": "theta0:0.4"}"#).unwrap();
        assert_eq!(minimal.n_list, vec![8, 16, 32, 64]);
    }

    #[test]
    fn every_palette_entry_builds() {
        let sc = SemiclassicalScale::new(-0.5, 4).unwrap();
        let f = AlphaFrame::inclined(0.3);
        for k in SYMBOL_KINDS {
            assert!(SymbolConfig::named(k).build(&f, &sc).is_ok(), "{k}");
        }
        assert!(matches!(
            SymbolConfig::named("nope").build(&f, &sc),
            Err(Error::Config(_))
        ));
    }
}
