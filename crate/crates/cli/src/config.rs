//! Scenario configuration (TOML).
//!
//! ```toml
//! q = 1
//!
//! [geometry]
//! complex_dim = 2
//! grid = 16                  # or one entry per real axis
//! periods = 6.283185307179586 # optional, scalar or per axis
//!
//! [instance]
//! r_const = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-5.0, 0.0]]]
//! phi = { expression = "2 * cos(x1)" }
//!
//! [metric]                   # optional, identity by default
//! omega = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
//! conformal = "0.1 * sin(y1)" # optional u, metric becomes e^u ω
//!
//! [tolerances]
//! eps_pos_rel = 1e-9
//!
//! [output]
//! dir = "out"
//! dump_fields = true
//!
//! [corpus]
//! size = 1000
//! seed = 42
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qpos_core::expr::WeightExpression;
use qpos_core::io::{ComplexMatrixRepr, LineBundleDocument};
use qpos_core::{LineBundleMetric, MetricField, Tolerances, TorusGeometry};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Uniform(T),
    Axes(Vec<T>),
}

impl<T: Clone> PerAxis<T> {
    fn expand(&self, axes: usize) -> Result<Vec<T>> {
        match self {
            PerAxis::Uniform(v) => Ok(vec![v.clone(); axes]),
            PerAxis::Axes(v) if v.len() == axes => Ok(v.clone()),
            PerAxis::Axes(v) => bail!(ConfigError(format!(
                "expected {axes} per-axis entries, found {}",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub complex_dim: usize,
    pub grid: PerAxis<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<PerAxis<f64>>,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<TorusGeometry> {
        let axes = 2 * self.complex_dim;
        let grid = self.grid.expand(axes)?;
        let periods = match &self.periods {
            Some(p) => p.expand(axes)?,
            None => vec![std::f64::consts::TAU; axes],
        };
        Ok(TorusGeometry::new(self.complex_dim, grid, periods)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub omega: ComplexMatrixRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_fields: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub size: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

pub fn default_seed() -> u64 {
    42
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub geometry: GeometryConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<LineBundleDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusConfig>,
    /// Directory that relative paths inside the file resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut config: Config = toml::from_str(&text)
            .map_err(|e| ConfigError(format!("cannot parse {}: {e}", path.display())))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    /// Configuration used when a corpus run has no file.
    pub fn corpus_default() -> Self {
        Self {
            q: None,
            geometry: GeometryConfig {
                complex_dim: 2,
                grid: PerAxis::Uniform(8),
                periods: None,
            },
            instance: None,
            metric: None,
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            corpus: None,
            base_dir: PathBuf::new(),
        }
    }

    pub fn bundle(&self, geometry: &TorusGeometry) -> Result<LineBundleMetric> {
        let doc = self
            .instance
            .as_ref()
            .ok_or_else(|| ConfigError("missing [instance] section".into()))?;
        Ok(doc.resolve(geometry, &self.base_dir)?)
    }

    pub fn metric(&self, geometry: &TorusGeometry) -> Result<MetricField> {
        let Some(m) = &self.metric else {
            return Ok(MetricField::identity(geometry));
        };
        let base = MetricField::constant(geometry, &m.omega.to_matrix()?)?;
        match &m.conformal {
            None => Ok(base),
            Some(src) => {
                let u = WeightExpression::parse(src, geometry.complex_dim())?.sample(geometry)?;
                Ok(base.conformal(&u)?)
            }
        }
    }

    pub fn q(&self, n: usize) -> usize {
        self.q.unwrap_or(n.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate().context("invalid [tolerances]")?;
        Ok(())
    }
}
