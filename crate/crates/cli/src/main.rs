mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coarma_core::model::Side;
use coarma_core::{CoarmaError, ModelTemplate};

/// Copula-based ARMA processes: simulation, estimation, forecasting and diagnostics.
///
/// Every subcommand writes CSV preceded by '#' comment lines carrying the
/// library version and seed. Exit codes: 0 ok, 2 parse or domain error,
/// 3 numerical failure, 4 I/O error.
#[derive(Parser, Debug)]
#[command(name = "coarma", version)]
pub struct Cli {
    /// Clamp for arguments near 0 and 1 in copula evaluations.
    #[arg(long, global = true, env = "COARMA_EPS")]
    eps: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a fully specified model.
    Simulate(SimulateArgs),
    /// Maximum likelihood fit of the free ('?') parameters.
    Fit(FitArgs),
    /// One-step-ahead percentile forecasts over the tail of a series.
    Forecast(ForecastArgs),
    /// Train/validation/test backtest of the models in a TOML file.
    Evaluate(EvaluateArgs),
    /// Dependence measures of consecutive observations over a parameter sweep.
    Depmeasure(DepmeasureArgs),
    /// ARMA coefficients of a Gaussian model, optionally checked by simulation.
    Equiv(EquivArgs),
    /// Tabulated conditional CDFs of the GARCH(1,1) copula pair.
    GarchCopula(GarchArgs),
    /// Negative log-likelihood along one parameter.
    NllScan(NllScanArgs),
    /// Filtered innovations with stationarity diagnostics.
    Residuals(ResidualsArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SideArg {
    Ar,
    Mag,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Ar => Side::Ar,
            SideArg::Mag => Side::Mag,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SyntheticArg {
    Arma,
    Regime,
}

fn parse_template(s: &str) -> Result<ModelTemplate, String> {
    s.parse::<ModelTemplate>().map_err(|e| e.to_string())
}

/// `lo:hi:n`, n evenly spaced points including both ends.
fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected lo:hi:n".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| format!("bad lower end '{}'", parts[0]))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| format!("bad upper end '{}'", parts[1]))?;
    let n: usize = parts[2].trim().parse().map_err(|_| format!("bad count '{}'", parts[2]))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() || (n > 1 && hi < lo) {
        return Err("grid needs n >= 1 and lo <= hi".into());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn parse_bound(s: &str) -> Result<(usize, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected slot:lo:hi".into());
    }
    let i = parts[0].parse().map_err(|_| format!("bad slot '{}'", parts[0]))?;
    let lo = parts[1].parse().map_err(|_| format!("bad lower bound '{}'", parts[1]))?;
    let hi = parts[2].parse().map_err(|_| format!("bad upper bound '{}'", parts[2]))?;
    Ok((i, lo, hi))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}'"))).collect()
}

#[derive(Args, Debug)]
pub struct DataArgs {
    /// CSV file; '#' lines are ignored, a non-numeric first row is a header.
    #[arg(long)]
    data: PathBuf,
    /// Column name or zero-based index.
    #[arg(long)]
    column: Option<String>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_template)]
    model: ModelTemplate,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, env = "COARMA_BURN_IN", default_value_t = coarma_core::coarma::DEFAULT_BURN_IN)]
    burn_in: usize,
    /// Data for fitting an empirical or kernel margin (required for those margins).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    column: Option<String>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, value_parser = parse_template)]
    model: ModelTemplate,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Override the box of one free parameter: slot:lo:hi (slots count from 0).
    #[arg(long = "bound", value_parser = parse_bound)]
    bounds: Vec<(usize, f64, f64)>,
    /// Kendall's tau cap for default bounds of non-Gaussian MAG pairs.
    #[arg(long)]
    mag_tau_cap: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    #[arg(long, value_parser = parse_template)]
    model: ModelTemplate,
    #[command(flatten)]
    data: DataArgs,
    /// Start of the forecast segment: a fraction below 1 or an observation count.
    #[arg(long)]
    split: f64,
    /// Needed when the model has free parameters (they are fitted on the first segment).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    #[arg(long)]
    column: Option<String>,
    /// Use a bundled synthetic series instead of a data file.
    #[arg(long, value_enum)]
    synthetic: Option<SyntheticArg>,
    /// Length of the synthetic series.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.7)]
    train: f64,
    #[arg(long, default_value_t = 0.15)]
    val: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug)]
pub struct DepmeasureArgs {
    #[arg(long, value_parser = parse_template)]
    model: ModelTemplate,
    #[arg(long, value_enum)]
    side: SideArg,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Values of the first parameter of the chosen pair: lo:hi:n.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: ::std::vec::Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    nsim: usize,
    #[arg(long)]
    seed: u64,
    /// Level at which finite-u tail coefficients and orders are evaluated.
    #[arg(long, default_value_t = 1e-3)]
    u: f64,
    /// Gauss-Legendre nodes per dimension.
    #[arg(long, env = "COARMA_NODES")]
    nodes: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    /// Comma separated AR pair parameters.
    #[arg(long, value_parser = parse_list, default_value = "", allow_hyphen_values = true)]
    alphas: ::std::vec::Vec<f64>,
    /// Comma separated MAG pair parameters.
    #[arg(long, value_parser = parse_list, default_value = "", allow_hyphen_values = true)]
    betas: ::std::vec::Vec<f64>,
    /// Simulation length for the ACF check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10)]
    max_lag: usize,
}

#[derive(Args, Debug)]
pub struct GarchArgs {
    #[arg(long)]
    alpha0: f64,
    #[arg(long)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.0)]
    beta1: f64,
    #[arg(long, default_value_t = coarma_core::garch_link::DEFAULT_NSIM)]
    nsim: usize,
    #[arg(long)]
    seed: u64,
    /// Interior points per axis.
    #[arg(long, default_value_t = 19)]
    grid: usize,
}

#[derive(Args, Debug)]
pub struct NllScanArgs {
    #[arg(long, value_parser = parse_template)]
    model: ModelTemplate,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    side: SideArg,
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: ::std::vec::Vec<f64>,
}

#[derive(Args, Debug)]
pub struct ResidualsArgs {
    #[arg(long, value_parser = parse_template)]
    model: ModelTemplate,
    #[command(flatten)]
    data: DataArgs,
}

fn run(cli: Cli) -> Result<(), CoarmaError> {
    if let Some(eps) = cli.eps {
        coarma_core::copula::set_boundary_eps(eps)?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Fit(a) => commands::fit(a, out),
        Command::Forecast(a) => commands::forecast(a, out),
        Command::Evaluate(a) => commands::evaluate(a, out),
        Command::Depmeasure(a) => commands::depmeasure(a, out),
        Command::Equiv(a) => commands::equiv(a, out),
        Command::GarchCopula(a) => commands::garch_copula(a, out),
        Command::NllScan(a) => commands::nll_scan(a, out),
        Command::Residuals(a) => commands::residuals(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
