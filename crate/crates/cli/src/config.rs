//! Run configuration: a TOML file with dotted keys, overridden by flags.
//!
//! ```toml
//! jacobi.alpha = 0.0
//! jacobi.beta = 0.0
//! problem.gamma = 0.5
//! problem.T = 1.0
//! grids.n_x = 256
//! output_dir = "out"
//! tolerances.plancherel = 1e-5
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use jacobi_isp::experiments::stability_setup;
use jacobi_isp::solvers::{GridConfig, ProblemParams};
use jacobi_isp::specfun::JacobiParams;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    jacobi: JacobiSection,
    #[serde(default)]
    problem: ProblemSection,
    #[serde(default)]
    grids: GridSection,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct JacobiSection {
    alpha: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    gamma: Option<f64>,
    a: Option<f64>,
    m: Option<f64>,
    #[serde(rename = "T")]
    t_final: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    x_max: Option<f64>,
    n_x: Option<usize>,
    lambda_max: Option<f64>,
    n_lambda: Option<usize>,
    n_t: Option<usize>,
}

/// Flags shared by every subcommand that builds a discretization.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// fractional order γ ∈ (0, 1]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// pseudo-parabolic coefficient a ≥ 0
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<f64>,
    /// final time T
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    #[arg(long = "x-max")]
    pub x_max: Option<f64>,
    #[arg(long = "n-x")]
    pub n_x: Option<usize>,
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    #[arg(long = "n-lambda")]
    pub n_lambda: Option<usize>,
    #[arg(long = "n-t")]
    pub n_t: Option<usize>,
    #[arg(long = "output-dir")]
    pub output_dir: Option<PathBuf>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub jacobi: JacobiParams,
    pub problem: ProblemParams,
    pub grids: GridConfig,
    pub output_dir: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Defaults are the stability-experiment setup; the file overrides the
    /// defaults and flags override the file.
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let (p0, q0) = stability_setup();
        let g0 = GridConfig::default();
        let jacobi = JacobiParams::new(
            args.alpha.or(file.jacobi.alpha).unwrap_or(p0.alpha()),
            args.beta.or(file.jacobi.beta).unwrap_or(p0.beta()),
        )?;
        let problem = ProblemParams::new(
            args.gamma.or(file.problem.gamma).unwrap_or(q0.gamma()),
            args.a.or(file.problem.a).unwrap_or(q0.a()),
            args.m.or(file.problem.m).unwrap_or(q0.m()),
            args.t_final.or(file.problem.t_final).unwrap_or(q0.t_final()),
        )?;
        let grids = GridConfig {
            x_max: args.x_max.or(file.grids.x_max).unwrap_or(g0.x_max),
            n_x: args.n_x.or(file.grids.n_x).unwrap_or(g0.n_x),
            lambda_max: args.lambda_max.or(file.grids.lambda_max).unwrap_or(g0.lambda_max),
            n_lambda: args.n_lambda.or(file.grids.n_lambda).unwrap_or(g0.n_lambda),
            n_t: args.n_t.or(file.grids.n_t).unwrap_or(g0.n_t),
        };
        if !(grids.x_max > 0.0 && grids.x_max.is_finite() && grids.lambda_max > 0.0 && grids.lambda_max.is_finite()) {
            return Err(CliError::Usage("grid extents must be positive and finite".into()));
        }
        if grids.n_t < 2 {
            return Err(CliError::Usage("n_t must be at least 2".into()));
        }
        Ok(RunConfig {
            jacobi,
            problem,
            grids,
            output_dir: args.output_dir.clone().or(file.output_dir),
            tolerances: file.tolerances,
        })
    }

    pub fn output_dir_or_default(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
