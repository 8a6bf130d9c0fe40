//! Versioned TOML scenario configuration.
//!
//! ```toml
//! schema_version = 1
//! net = "mollifier"
//! eps = 0.01
//! u_end = 1.0
//!
//! [manifold]
//! name = "euclidean"
//! dim = 2
//!
//! [profile]
//! name = "linear"
//! coeffs = [1.0, 0.0]
//!
//! [data]
//! x0 = [0.0, 0.0]
//! xdot0 = [1.0, 0.0]
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{InitialData, IntegrationOptions, WaveSpacetime, MAX_EPS};
use crate::error::{Error, Result};
use crate::existence::{CertifyOptions, PicardOptions};
use crate::geometry::{Euclidean, HyperbolicHalfPlane, ManifoldRef, SphereStereographic};
use crate::profiles::{
    AsymmetricMollifier, Constant, DeltaNetRef, FixedSupportNet, GaussianBump, Linear, Mollifier,
    ProfileRef, QuadraticForm, RadialPower, ScaledNet, SignedNet,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Euclidean {
        #[serde(default = "two")]
        dim: usize,
    },
    HyperbolicHalfPlane,
    SphereStereographic,
}

fn two() -> usize {
    2
}

impl ManifoldSpec {
    pub fn build(&self) -> Result<ManifoldRef> {
        Ok(match self {
            ManifoldSpec::Euclidean { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("euclidean dimension must be positive".into()));
                }
                Arc::new(Euclidean::new(*dim))
            }
            ManifoldSpec::HyperbolicHalfPlane => Arc::new(HyperbolicHalfPlane),
            ManifoldSpec::SphereStereographic => Arc::new(SphereStereographic),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Zero,
    Constant {
        value: f64,
    },
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    QuadraticForm {
        /// Row-major square matrix.
        matrix: Vec<Vec<f64>>,
        center: Vec<f64>,
    },
    RadialPower {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
        center: Vec<f64>,
    },
    GaussianBump {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn build(&self, dim: usize) -> Result<ProfileRef> {
        let want = |len: usize, what: &str| {
            if len == dim {
                Ok(())
            } else {
                Err(Error::Config(format!("profile {what} has length {len}, manifold dimension is {dim}")))
            }
        };
        Ok(match self {
            ProfileSpec::Zero => Arc::new(Constant { value: 0.0 }),
            ProfileSpec::Constant { value } => Arc::new(Constant { value: *value }),
            ProfileSpec::Linear { coeffs, offset } => {
                want(coeffs.len(), "coeffs")?;
                Arc::new(Linear {
                    coeffs: coeffs.clone(),
                    offset: *offset,
                })
            }
            ProfileSpec::QuadraticForm { matrix, center } => {
                want(center.len(), "center")?;
                want(matrix.len(), "matrix")?;
                if matrix.iter().any(|r| r.len() != dim) {
                    return Err(Error::Config("quadratic-form matrix must be square".into()));
                }
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                Arc::new(QuadraticForm::new(DMatrix::from_row_slice(dim, dim, &flat), center.clone())?)
            }
            ProfileSpec::RadialPower { exponent, scale, center } => {
                want(center.len(), "center")?;
                Arc::new(RadialPower {
                    exponent: *exponent,
                    scale: *scale,
                    center: center.clone(),
                })
            }
            ProfileSpec::GaussianBump { amplitude, width, center } => {
                want(center.len(), "center")?;
                if !(*width > 0.0) {
                    return Err(Error::Config("gaussian-bump width must be positive".into()));
                }
                Arc::new(GaussianBump {
                    amplitude: *amplitude,
                    width: *width,
                    center: center.clone(),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetSpec {
    Mollifier,
    Asymmetric,
    Signed,
    /// Twice the mollifier: violates unit mass.
    Doubled,
    /// A bump that does not shrink with ε.
    FixedSupport,
}

impl NetSpec {
    pub fn build(self) -> DeltaNetRef {
        match self {
            NetSpec::Mollifier => Arc::new(Mollifier),
            NetSpec::Asymmetric => Arc::new(AsymmetricMollifier),
            NetSpec::Signed => Arc::new(SignedNet),
            NetSpec::Doubled => Arc::new(ScaledNet {
                inner: Arc::new(Mollifier),
                factor: 2.0,
            }),
            NetSpec::FixedSupport => Arc::new(FixedSupportNet),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub x0: Vec<f64>,
    pub xdot0: Vec<f64>,
    #[serde(default)]
    pub v0: f64,
    #[serde(default)]
    pub vdot0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub integrator: f64,
    #[serde(default = "default_blowup")]
    pub blowup: f64,
    #[serde(default = "default_picard")]
    pub picard: f64,
    #[serde(default = "default_net_tol")]
    pub net: f64,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_blowup() -> f64 {
    1e8
}
fn default_picard() -> f64 {
    1e-9
}
fn default_net_tol() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrator: default_tol(),
            blowup: default_blowup(),
            picard: default_picard(),
            net: default_net_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    #[serde(default = "one")]
    pub b: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Also run the fixed-point solver at `ε₀ / 2`.
    #[serde(default)]
    pub picard: bool,
}

fn default_grid() -> usize {
    9
}

impl Default for CertificateSpec {
    fn default() -> Self {
        Self {
            b: 1.0,
            c: 1.0,
            grid: default_grid(),
            picard: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSpec {
    /// `x̄`; defaults to the initial point `data.x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
}

fn default_directions() -> usize {
    8
}
fn default_radii() -> Vec<f64> {
    (0..8).map(|k| 2f64.powi(k)).collect()
}

impl Default for GrowthSpec {
    fn default() -> Self {
        Self {
            center: None,
            directions: default_directions(),
            radii: default_radii(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Sample count of exported paths.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub svg: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_samples() -> usize {
    201
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            samples: default_samples(),
            svg: false,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub net: NetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub u_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<f64>>,
    pub manifold: ManifoldSpec,
    pub profile: ProfileSpec,
    pub data: DataSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub certificate: CertificateSpec,
    #[serde(default)]
    pub growth: GrowthSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        // TOML integers are signed 64-bit
        if let Some(seed) = self.seed {
            if i64::try_from(seed).is_err() {
                return Err(Error::Config(format!("seed {seed} exceeds {}", i64::MAX)));
            }
        }
        let eps_ok = |e: f64| e > 0.0 && e <= MAX_EPS;
        if let Some(e) = self.eps {
            if !eps_ok(e) {
                return Err(Error::Config(format!("eps = {e} outside (0, 1/2]")));
            }
        }
        if let Some(s) = &self.eps_schedule {
            if s.is_empty() || !s.iter().all(|&e| eps_ok(e)) {
                return Err(Error::Config("eps_schedule values must lie in (0, 1/2]".into()));
            }
        }
        let t = &self.tolerances;
        if !(t.integrator > 0.0 && t.blowup > 0.0 && t.picard > 0.0 && t.net > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.output.samples < 2 {
            return Err(Error::Config("output.samples must be at least 2".into()));
        }
        if self.output.workers == Some(0) {
            return Err(Error::Config("output.workers must be positive".into()));
        }
        let m = self.manifold.build()?;
        self.profile.build(m.dim())?;
        if self.data.x0.len() != m.dim() || self.data.xdot0.len() != m.dim() {
            return Err(Error::Config(format!("data must have dimension {}", m.dim())));
        }
        Ok(())
    }

    pub fn wave(&self) -> Result<WaveSpacetime> {
        let m = self.manifold.build()?;
        let p = self.profile.build(m.dim())?;
        Ok(WaveSpacetime::from_refs(m, p, self.net.build()))
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData::new(self.data.x0.clone(), self.data.xdot0.clone(), self.data.v0, self.data.vdot0)
    }

    pub fn integration_options(&self) -> IntegrationOptions {
        IntegrationOptions {
            tol: self.tolerances.integrator,
            blowup: self.tolerances.blowup,
            shock_terms_everywhere: false,
        }
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            b: self.certificate.b,
            c: self.certificate.c,
            grid: self.certificate.grid,
            shrink_ball: false,
            tol: self.tolerances.integrator,
            blowup: self.tolerances.blowup,
        }
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            tol: self.tolerances.picard,
            ..PicardOptions::default()
        }
    }

    pub fn require_eps(&self) -> Result<f64> {
        self.eps.ok_or_else(|| Error::Config("this subcommand needs `eps`".into()))
    }

    pub fn require_schedule(&self) -> Result<Vec<f64>> {
        self.eps_schedule
            .clone()
            .ok_or_else(|| Error::Config("this subcommand needs `eps_schedule`".into()))
    }
}
