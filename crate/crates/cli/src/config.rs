//! Pipeline configuration: a single JSON document describing the system,
//! grid, strategy, and stage parameters.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use conecert::cover::{DimSpec, GridSpec};
use conecert::dynsys::{HenonMap, MapSystem, SmaleMap};
use conecert::periodic::NewtonParams;
use conecert::ExecMode;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum SystemConfig {
    Smale,
    Henon { a: f64, b: f64 },
}

impl SystemConfig {
    pub fn build(&self) -> Arc<dyn MapSystem> {
        match *self {
            SystemConfig::Smale => Arc::new(SmaleMap::new()),
            SystemConfig::Henon { a, b } => Arc::new(HenonMap::new(a, b)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub k: u32,
    pub dims: Vec<DimSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyConfig {
    Attractor,
    Outer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedConfig {
    pub start: Vec<f64>,
    pub transient: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OuterConfig {
    pub max_refine: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SignatureConfig {
    pub u: usize,
    pub s: usize,
}

fn default_max_iter() -> usize {
    50
}
fn default_newton_tol() -> f64 {
    1e-12
}
fn default_dedup_tol() -> f64 {
    1e-8
}
fn default_period_sep_tol() -> f64 {
    1e-6
}
fn default_proof_radius() -> f64 {
    1e-10
}
fn default_bisect_tol() -> f64 {
    1e-3
}
fn default_lambda_max() -> f64 {
    16.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceConfig {
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_dedup_tol")]
    pub dedup_tol: f64,
    #[serde(default = "default_period_sep_tol")]
    pub period_sep_tol: f64,
    #[serde(default = "default_proof_radius")]
    pub proof_radius: f64,
    #[serde(default = "default_bisect_tol")]
    pub bisect_tol: f64,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            newton_tol: default_newton_tol(),
            max_iter: default_max_iter(),
            dedup_tol: default_dedup_tol(),
            period_sep_tol: default_period_sep_tol(),
            proof_radius: default_proof_radius(),
            bisect_tol: default_bisect_tol(),
            lambda_max: default_lambda_max(),
        }
    }
}

impl ToleranceConfig {
    pub fn newton_params(&self) -> NewtonParams {
        NewtonParams {
            newton_tol: self.newton_tol,
            max_iter: self.max_iter,
            dedup_tol: self.dedup_tol,
            period_sep_tol: self.period_sep_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub system: SystemConfig,
    pub grid: GridConfig,
    pub strategy: StrategyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<OuterConfig>,
    pub max_period: usize,
    pub spread_k: usize,
    pub signature: SignatureConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub mode: ExecMode,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: PipelineConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let system = self.system.build();
        let dim = system.dim();
        if self.grid.dims.len() != dim {
            bail!(
                "grid has {} dimensions but system '{}' has {dim}",
                self.grid.dims.len(),
                system.name()
            );
        }
        if self.signature.u + self.signature.s != dim {
            bail!(
                "signature (u={}, s={}) does not span dimension {dim}",
                self.signature.u,
                self.signature.s
            );
        }
        self.build_grid()?;
        match self.strategy {
            StrategyConfig::Attractor => {
                let seed = self
                    .seed
                    .as_ref()
                    .context("attractor strategy requires a 'seed' section")?;
                if seed.start.len() != dim {
                    bail!("seed start point has wrong dimension");
                }
            }
            StrategyConfig::Outer => {
                self.outer
                    .as_ref()
                    .context("outer strategy requires an 'outer' section")?;
            }
        }
        if self.max_period == 0 {
            bail!("max_period must be at least 1");
        }
        if self.spread_k < 2 {
            bail!("spread_k must be at least 2");
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.k, self.grid.dims.clone()).map_err(Into::into)
    }

    /// Effective execution mode after CLI overrides.
    pub fn effective_mode(&self, force_deterministic: bool) -> ExecMode {
        if force_deterministic {
            ExecMode::Deterministic
        } else {
            self.mode
        }
    }
}
