//! Run configuration: a TOML file merged under the command-line flags.
//!
//! ```toml
//! seed = 42
//! mode = "strict"        # or "fast"
//! threads = 4
//! format = "csv"         # or "json"
//! output = "table.csv"
//!
//! [params]
//! dim = 2
//! s = 0.5
//!
//! [quadrature]
//! rel_tol = 1e-8
//! abs_tol = 1e-12
//! max_refinements = 30
//!
//! [solve]
//! radius = 1.0
//! nodes = 41
//! f = 1.0
//! q = 2.0
//!
//! [verify]
//! out_dir = "reports"
//! ```
//!
//! Precedence: flag, then `FRACLAP_THREADS` (threads only), then file, then default.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fraclap::quadrature::{ExecMode, QuadratureSpec};
use fraclap::FracParams;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Fast,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub dim: Option<usize>,
    pub s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_refinements: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub radius: Option<f64>,
    pub nodes: Option<usize>,
    pub f: Option<f64>,
    pub g: Option<f64>,
    pub slab: Option<f64>,
    pub depth: Option<f64>,
    pub half_width: Option<f64>,
    pub normal_cells: Option<usize>,
    pub lateral_cells: Option<usize>,
    pub q: Option<f64>,
    pub u0: Option<f64>,
    pub range_max: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Settings shared by every command after merging flags and file.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: Mode,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub spec: QuadratureSpec,
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

impl RunConfig {
    pub fn resolve(file: &FileConfig, flags: &Overrides) -> Result<Self, CliError> {
        let mode = flags.mode.or(file.mode).unwrap_or(Mode::Strict);
        let mut spec = QuadratureSpec::default();
        if let Some(v) = flags.rel_tol.or(file.quadrature.rel_tol) {
            spec.rel_tol = v;
        }
        if let Some(v) = flags.abs_tol.or(file.quadrature.abs_tol) {
            spec.abs_tol = v;
        }
        if let Some(v) = file.quadrature.max_refinements {
            spec.max_refinements = v;
        }
        spec.mode = match mode {
            Mode::Strict => ExecMode::Strict,
            Mode::Fast => ExecMode::Fast,
        };
        spec.validate()?;
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        Ok(RunConfig {
            seed: flags.seed.or(file.seed).unwrap_or(42),
            mode,
            threads,
            format: flags.format.or(file.format),
            output: flags.output.clone().or_else(|| file.output.clone()),
            spec,
        })
    }
}

/// `(N, s)` from flags, falling back to the `[params]` section.
pub fn params(dim: Option<usize>, s: Option<f64>, file: &ParamsSection) -> Result<Option<FracParams>, CliError> {
    match (dim.or(file.dim), s.or(file.s)) {
        (Some(n), Some(s)) => Ok(Some(FracParams::new(n, s)?)),
        (None, None) => Ok(None),
        _ => Err(CliError::Usage("give both --dim and --s".into())),
    }
}

pub fn require_params(dim: Option<usize>, s: Option<f64>, file: &ParamsSection) -> Result<FracParams, CliError> {
    params(dim, s, file)?.ok_or_else(|| CliError::Usage("--dim and --s are required".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: FileConfig = toml::from_str(
            "seed = 7\nmode = \"fast\"\nformat = \"json\"\n[params]\ndim = 2\ns = 0.5\n[quadrature]\nrel_tol = 1e-6\n",
        )
        .unwrap();
        let cfg = RunConfig::resolve(&file, &Overrides::default()).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.mode, Mode::Fast);
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.spec.rel_tol, 1e-6);
        assert_eq!(cfg.spec.mode, ExecMode::Fast);
        let flags = Overrides { seed: Some(1), mode: Some(Mode::Strict), rel_tol: Some(1e-9), ..Default::default() };
        let cfg = RunConfig::resolve(&file, &flags).unwrap();
        assert_eq!((cfg.seed, cfg.mode, cfg.spec.rel_tol), (1, Mode::Strict, 1e-9));
        let p = require_params(None, Some(0.25), &file.params).unwrap();
        assert_eq!((p.dim(), p.s()), (2, 0.25));
    }

    #[test]
    fn rejects_bad_files_and_values() {
        assert!(toml::from_str::<FileConfig>("sede = 1\n").is_err());
        assert!(toml::from_str::<FileConfig>("[params]\nn = 1\n").is_err());
        let file = FileConfig::default();
        let flags = Overrides { rel_tol: Some(-1.0), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&file, &flags), Err(CliError::Usage(_))));
        assert!(matches!(require_params(Some(1), None, &file.params), Err(CliError::Usage(_))));
        assert!(matches!(require_params(Some(1), Some(1.5), &file.params), Err(CliError::Usage(_))));
        let defaults = RunConfig::resolve(&file, &Overrides::default()).unwrap();
        assert_eq!(defaults.seed, 42);
        assert_eq!(defaults.spec, QuadratureSpec::default());
    }
}
