//! Run configuration.
//!
//! Configs are TOML files made of flat `key = value` sections; every section
//! and key is optional. Relative paths are resolved against the directory
//! holding the config file.
//!
//! ```toml
//! [grid]
//! length = 1.0
//! cells = 100
//! final_time = 2.0
//! cfl = 0.9
//! cfl_max = 0.9
//!
//! [source]
//! kind = "example"        # zero | quadratic | cosine | example | smooth
//! example = 1
//! seed = 1
//!
//! [optimizer]
//! eps = 1e-8
//! stop_tol = 1e-8
//! max_iter = 40
//!
//! [measurement]
//! path = "terminal.csv"   # (x, value) rows, used by `invert`
//!
//! [output]
//! dir = "out"
//! snapshots = 5
//!
//! [gradcheck]
//! tolerance = 1e-2
//! min_ratio = 1.5
//! ```

use std::path::{Path, PathBuf};

use kinwave::{Mesh, OptimizerConfig, SpaceGrid, StepRule};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Zero,
    /// `y = t²/2` with unit forcing in all three equations.
    Quadratic,
    /// `y = cos(πx/l) cos(πt/l)` driven through both boundary equations.
    Cosine,
    /// Separable source `F = f_n(x)` of one of the reconstruction examples.
    Example,
    /// Random smooth `(F, G)` drawn from `seed`.
    Smooth,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub cells: usize,
    pub final_time: f64,
    pub cfl: f64,
    pub cfl_max: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            length: 1.0,
            cells: 100,
            final_time: 2.0,
            cfl: 0.9,
            cfl_max: kinwave::DEFAULT_CFL_MAX,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub kind: SourceKind,
    pub example: usize,
    pub seed: u64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            kind: SourceKind::Zero,
            example: 1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub eps: f64,
    pub stop_tol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            eps: d.eps,
            stop_tol: d.stop_tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub snapshots: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshots: 5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckSection {
    pub tolerance: f64,
    pub min_ratio: f64,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        Self {
            tolerance: 1e-2,
            min_ratio: 1.5,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub source: SourceSection,
    pub optimizer: OptimizerSection,
    pub measurement: MeasurementSection,
    pub output: OutputSection,
    pub gradcheck: GradcheckSection,
    #[serde(skip)]
    pub path: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.path = path.to_path_buf();
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.output.dir = base.join(&cfg.output.dir);
        if let Some(m) = cfg.measurement.path.take() {
            cfg.measurement.path = Some(base.join(m));
        }
        Ok(cfg)
    }

    pub fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    pub fn mesh(&self) -> Result<Mesh> {
        self.mesh_with_cells(self.grid.cells)
    }

    pub fn mesh_with_cells(&self, cells: usize) -> Result<Mesh> {
        let g = &self.grid;
        SpaceGrid::new(g.length, cells)
            .and_then(|space| Mesh::with_courant_limit(space, g.final_time, g.cfl, g.cfl_max))
            .map_err(|e| self.error(e.to_string()))
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig> {
        let o = &self.optimizer;
        let cfg = OptimizerConfig {
            eps: o.eps,
            stop_tol: o.stop_tol,
            max_iter: o.max_iter,
            step_rule: StepRule::ConjugateGradient,
            bounds: None,
        };
        cfg.validate().map_err(|e| self.error(e.to_string()))?;
        Ok(cfg)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Number of spatial cells
    #[arg(long)]
    pub nx: Option<usize>,
    /// Courant number dt/dx
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Regularisation parameter
    #[arg(long)]
    pub eps: Option<f64>,
    /// Stop once the regularised cost drops below this value
    #[arg(long = "stop-tol")]
    pub stop_tol: Option<f64>,
    /// Iteration cap
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        if let Some(nx) = self.nx {
            cfg.grid.cells = nx;
        }
        if let Some(cfl) = self.cfl {
            cfg.grid.cfl = cfl;
        }
        if let Some(eps) = self.eps {
            cfg.optimizer.eps = eps;
        }
        if let Some(tol) = self.stop_tol {
            cfg.optimizer.stop_tol = tol;
        }
        if let Some(n) = self.max_iter {
            cfg.optimizer.max_iter = n;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = Config::parse("", Path::new("run.toml")).unwrap();
        assert_eq!(cfg.grid.cells, 100);
        assert_eq!(cfg.source.kind, SourceKind::Zero);
        assert_eq!(cfg.optimizer.max_iter, 40);
        assert_eq!(cfg.mesh().unwrap().time.steps(), 223);
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let text = "[measurement]\npath = \"data.csv\"\n[output]\ndir = \"res\"\n";
        let cfg = Config::parse(text, Path::new("/tmp/cases/run.toml")).unwrap();
        assert_eq!(cfg.measurement.path.unwrap(), Path::new("/tmp/cases/data.csv"));
        assert_eq!(cfg.output.dir, Path::new("/tmp/cases/res"));
    }

    #[test]
    fn unknown_keys_and_bad_grids_are_config_errors() {
        assert!(Config::parse("[grid]\ncels = 3\n", Path::new("a.toml")).is_err());
        let cfg = Config::parse("[grid]\ncells = 2\n", Path::new("a.toml")).unwrap();
        assert_eq!(cfg.mesh().unwrap_err().exit_code(), 2);
        let cfg = Config::parse("[grid]\ncfl = 1.2\n", Path::new("a.toml")).unwrap();
        assert!(cfg.mesh().is_err());
        let cfg = Config::parse("[grid]\ncfl = 1.2\ncfl_max = 1.5\n", Path::new("a.toml")).unwrap();
        assert!(cfg.mesh().is_ok());
        let cfg = Config::parse("[source]\nkind = \"cosine\"\n", Path::new("a.toml")).unwrap();
        assert_eq!(cfg.source.kind, SourceKind::Cosine);
    }
}
