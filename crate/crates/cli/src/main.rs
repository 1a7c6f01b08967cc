//! `jacobi-isp`: command-line driver for the Jacobi spectral solvers.
//!
//! Exit codes: 0 success, 1 acceptance-criterion failure, 2 usage or domain
//! error, 3 numerical failure.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jacobi_isp::experiments::{
    run_roundtrip_suite, run_stability_table_with, write_stability_csv, StabilityRow, SuiteConfig, SuiteReport,
    DEFAULT_EPSILONS,
};
use jacobi_isp::solvers::{direct_solve, isp_solve, Discretization, Source};
use jacobi_isp::specfun::{jacobi_phi, mittag_leffler, JacobiParams};
use jacobi_isp::transform::{build_spatial_grid, build_spectral_grid, SampledFunction, SpectralFunction};
use jacobi_isp::Error;
use serde::Serialize;

use config::{CommonArgs, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    /// at least one acceptance criterion failed
    Criteria(Vec<String>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "jacobi-isp", version, about = "Direct and inverse source problems for the Jacobi operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Jacobi function φ_λ^{α,β}(x)
    Phi {
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long)]
        x: f64,
    },
    /// Evaluate the Mittag-Leffler function E_{γ,β}(t)
    Ml {
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Write a test function sampled on the configured spatial or spectral grid
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Domain::Spatial)]
        domain: Domain,
        #[arg(long, value_enum, default_value_t = Shape::Gaussian)]
        function: Shape,
        /// amplitude
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        scale: f64,
        /// width w of scale·exp(−(x/w)²)
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Forward (x → λ) or inverse (λ → x) Fourier-Jacobi transform of a CSV
    Transform {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// input is spectral (`lambda,value`); output is spatial
        #[arg(long)]
        inverse: bool,
    },
    /// Solve the direct problem for initial data φ and a constant source f
    Direct {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        f: PathBuf,
    },
    /// Recover (u, f) from initial data φ and final data ψ
    Isp {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Reproduce the stability table
    StabilityTable {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS)]
        epsilons: Vec<f64>,
    },
    /// Run the acceptance suite; exits 1 if any criterion fails
    Selftest {
        #[command(flatten)]
        common: CommonArgs,
        /// threshold override `name=value`, repeatable
        #[arg(long = "tolerance", value_parser = parse_tolerance)]
        tolerances: Vec<(String, f64)>,
        /// run only these criteria (names or numbers)
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Spatial,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Zero,
    Gaussian,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad tolerance `{value}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("JACOBI_ISP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("JACOBI_ISP_THREADS must be a non-negative integer, got `{raw}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn build_info() -> BTreeMap<String, String> {
    let mut b = BTreeMap::new();
    b.insert("cli_version".to_string(), env!("CARGO_PKG_VERSION").to_string());
    b.insert("git_describe".to_string(), env!("JACOBI_ISP_GIT_DESCRIBE").to_string());
    b
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Usage(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{}: no such file", path.display())))
    }
}

fn discretization(cfg: &RunConfig) -> Result<Discretization, CliError> {
    Ok(Discretization::build(&cfg.jacobi, &cfg.grids, cfg.problem.t_final())?)
}

fn cmd_phi(alpha: f64, beta: f64, lambda: f64, x: f64) -> Result<(), CliError> {
    let p = JacobiParams::new(alpha, beta)?;
    let v = jacobi_phi(&p, lambda, x)?;
    println!("phi(alpha={alpha}, beta={beta}, lambda={lambda}, x={x}) = {v:.16e}");
    Ok(())
}

fn cmd_ml(gamma: f64, beta: f64, t: f64) -> Result<(), CliError> {
    let v = mittag_leffler(gamma, beta, t)?;
    println!("E(gamma={gamma}, beta={beta}, t={t}) = {v:.16e}");
    Ok(())
}

fn cmd_sample(cfg: &RunConfig, domain: Domain, shape: Shape, scale: f64, width: f64, output: &Path) -> Result<(), CliError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(CliError::Usage("width must be positive".into()));
    }
    let f = move |x: f64| match shape {
        Shape::Zero => 0.0,
        Shape::Gaussian => scale * (-(x / width) * (x / width)).exp(),
    };
    match domain {
        Domain::Spatial => {
            let g = build_spatial_grid(&cfg.jacobi, cfg.grids.x_max, cfg.grids.n_x)?;
            SampledFunction::from_fn(g, f)?.write_csv(output)?;
        }
        Domain::Spectral => {
            let g = build_spectral_grid(&cfg.jacobi, cfg.grids.lambda_max, cfg.grids.n_lambda)?;
            SpectralFunction::from_fn(g, f)?.write_csv(output)?;
        }
    }
    Ok(())
}

fn cmd_transform(cfg: &RunConfig, input: &Path, output: &Path, inverse: bool) -> Result<(), CliError> {
    require_file(input)?;
    let disc = discretization(cfg)?;
    let ft = disc.transform();
    if inverse {
        let g = SpectralFunction::read_csv(input, ft.spectral().clone())?;
        ft.inverse(&g)?.write_csv(output)?;
    } else {
        let f = SampledFunction::read_csv(input, ft.spatial().clone())?;
        ft.forward(&f)?.write_csv(output)?;
    }
    Ok(())
}

fn cmd_direct(cfg: &RunConfig, phi: &Path, f: &Path) -> Result<(), CliError> {
    require_file(phi)?;
    require_file(f)?;
    let disc = discretization(cfg)?;
    let xg = disc.transform().spatial().clone();
    let phi = SampledFunction::read_csv(phi, xg.clone())?;
    let f = SampledFunction::read_csv(f, xg)?;
    let sol = direct_solve(&cfg.problem, &disc, &Source::Constant(f), &phi)?;
    let dir = cfg.output_dir_or_default();
    sol.write_dir(&dir, &disc)?;
    println!("direct: wrote {}", dir.display());
    Ok(())
}

fn cmd_isp(cfg: &RunConfig, phi: &Path, psi: &Path) -> Result<(), CliError> {
    require_file(phi)?;
    require_file(psi)?;
    let disc = discretization(cfg)?;
    let xg = disc.transform().spatial().clone();
    let phi = SampledFunction::read_csv(phi, xg.clone())?;
    let psi = SampledFunction::read_csv(psi, xg)?;
    let sol = isp_solve(&cfg.problem, &disc, &phi, &psi)?;
    let dir = cfg.output_dir_or_default();
    sol.write_dir(&dir, &disc)?;
    println!(
        "isp: wrote {} (coefficient bounds strict: {})",
        dir.display(),
        sol.bounds.strict
    );
    Ok(())
}

fn suite_config(cfg: &RunConfig, criteria: Option<Vec<String>>, extra: &[(String, f64)]) -> SuiteConfig {
    let mut tolerances = cfg.tolerances.clone();
    tolerances.extend(extra.iter().cloned());
    SuiteConfig { grids: cfg.grids, tolerances, criteria, ..SuiteConfig::default() }
}

fn cmd_stability_table(cfg: &RunConfig, epsilons: &[f64]) -> Result<(), CliError> {
    let rows = run_stability_table_with(&cfg.grids, epsilons)?;
    let dir = cfg.output_dir_or_default();
    fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    write_stability_csv(&dir.join("stability_table.csv"), &rows)?;
    let suite = run_roundtrip_suite(&suite_config(
        cfg,
        Some(vec!["table_ratios".into(), "stability".into()]),
        &[],
    ))?;
    #[derive(Serialize)]
    struct Report<'a> {
        epsilons: &'a [f64],
        rows: &'a [StabilityRow],
        suite: &'a SuiteReport,
    }
    let mut suite = suite;
    suite.build.extend(build_info());
    let text = serde_json::to_string_pretty(&Report { epsilons, rows: &rows, suite: &suite })
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    write_text(&dir.join("report.json"), &(text + "\n"))?;
    println!("epsilon,psi_H,u_CH,f_L2mu,psi_appendix,u_appendix,f_appendix");
    for r in &rows {
        println!(
            "{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            r.epsilon,
            r.norm_psi_diff_sq,
            r.norm_u_diff_sq,
            r.norm_f_diff_sq,
            r.norm_psi_appendix,
            r.norm_u_appendix,
            r.norm_f_appendix
        );
    }
    for c in &suite.criteria {
        println!("{}", c.summary_line());
    }
    println!("stability-table: wrote {}", dir.display());
    Ok(())
}

fn cmd_selftest(cfg: &RunConfig, tolerances: &[(String, f64)], criteria: Option<Vec<String>>) -> Result<(), CliError> {
    let sc = suite_config(cfg, criteria, tolerances);
    sc.validate()?;
    let mut report = run_roundtrip_suite(&sc)?;
    report.build.extend(build_info());
    for c in &report.criteria {
        println!("{}", c.summary_line());
    }
    let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    println!("selftest: {} passed, {} failed", report.criteria.len() - failed.len(), failed.len());
    if let Some(dir) = &cfg.output_dir {
        write_text(&dir.join("report.json"), &(report.to_json() + "\n"))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Criteria(failed))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Phi { alpha, beta, lambda, x } => cmd_phi(alpha, beta, lambda, x),
        Command::Ml { gamma, beta, t } => cmd_ml(gamma, beta, t),
        Command::Sample { common, domain, function, scale, width, output } => {
            cmd_sample(&RunConfig::resolve(&common)?, domain, function, scale, width, &output)
        }
        Command::Transform { common, input, output, inverse } => {
            cmd_transform(&RunConfig::resolve(&common)?, &input, &output, inverse)
        }
        Command::Direct { common, phi, f } => cmd_direct(&RunConfig::resolve(&common)?, &phi, &f),
        Command::Isp { common, phi, psi } => cmd_isp(&RunConfig::resolve(&common)?, &phi, &psi),
        Command::StabilityTable { common, epsilons } => cmd_stability_table(&RunConfig::resolve(&common)?, &epsilons),
        Command::Selftest { common, tolerances, criteria } => {
            cmd_selftest(&RunConfig::resolve(&common)?, &tolerances, criteria)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Criteria(names)) => {
            eprintln!("error: failing criteria: {}", names.join(", "));
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
