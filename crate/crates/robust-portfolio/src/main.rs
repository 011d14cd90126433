use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use robust_portfolio::asymptotics::are_table;
use robust_portfolio::error::Result;
use robust_portfolio::estimators::{mle, mpd_estimate, Estimate, EstimatorConfig};
use robust_portfolio::influence::dim_series;
use robust_portfolio::io::{
    emit_report, load_returns, InputMode, Report, ReportFormat, ReturnsData,
};
use robust_portfolio::monte_carlo::{run_study, SimulationScenario};
use robust_portfolio::portfolio::{efficient_frontier, log_lambda_grid, portfolio_for_variance};
use robust_portfolio::pseudodistance::Alpha;

#[derive(Parser)]
#[command(
    name = "robust-portfolio",
    about = "Robust mean-variance portfolio estimation and diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the mean vector and covariance matrix from a returns file.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Treat the input as price levels and convert to log-returns.
        #[arg(long)]
        prices: bool,
        /// Robustness tuning parameter; zero is maximum likelihood.
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Trace the mean-variance efficient frontier over a risk-aversion grid.
    Frontier {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        prices: bool,
        #[arg(long)]
        alpha: f64,
        /// Use maximum likelihood estimates (same as --alpha 0).
        #[arg(long)]
        mle: bool,
        #[arg(long, default_value_t = 0.5)]
        lambda_min: f64,
        #[arg(long, default_value_t = 500.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Forbid short positions.
        #[arg(long)]
        no_short: bool,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Per-observation data influence measure on the optimized portfolio.
    Dim {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        prices: bool,
        /// Tuning parameter for the robust parameter plug-ins.
        #[arg(long)]
        alpha: f64,
        /// Frontier portfolio the measure refers to, by variance.
        #[arg(long, default_value_t = 0.005)]
        target_variance: f64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Asymptotic relative efficiency table over dimensions and alphas.
    AreTable {
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.5,0.75,1")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo contamination study with mean-square-error accounting.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        /// Contamination fraction in [0, 1).
        #[arg(long)]
        eps: f64,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long)]
        replicates: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first_line = message
                .lines()
                .next()
                .unwrap_or("bad arguments")
                .trim_start_matches("error: ");
            eprintln!("error: usage: {first_line}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = match err.exit_code() {
                1 => "usage",
                2 => "data",
                _ => "numeric",
            };
            eprintln!("error: {category}: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn mode(prices: bool) -> InputMode {
    if prices {
        InputMode::Prices
    } else {
        InputMode::Returns
    }
}

fn fit(data: &ReturnsData, alpha: Alpha, tol: f64, max_iter: usize) -> Result<Estimate> {
    if alpha.is_zero() {
        mle(&data.sample)
    } else {
        let config = EstimatorConfig::new(alpha).with_tol(tol).with_max_iter(max_iter);
        mpd_estimate(&data.sample, &config)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Estimate { input, prices, alpha, tol, max_iter, output, format } => {
            let alpha = Alpha::new(alpha)?;
            let data = load_returns(&input, mode(prices))?;
            let estimate = fit(&data, alpha, tol, max_iter)?;
            let report =
                Report::Estimate { assets: data.names, alpha: alpha.value(), estimate };
            emit_report(&report, format.into(), &output)
        }
        Command::Frontier {
            input,
            prices,
            alpha,
            mle: use_mle,
            lambda_min,
            lambda_max,
            points,
            no_short,
            output,
            format,
        } => {
            let alpha = if use_mle { Alpha::ZERO } else { Alpha::new(alpha)? };
            let data = load_returns(&input, mode(prices))?;
            let estimate = fit(&data, alpha, 1e-8, 500)?;
            let grid = log_lambda_grid(lambda_min, lambda_max, points)?;
            let frontier = efficient_frontier(&estimate.params(), &grid, !no_short)?;
            emit_report(
                &Report::Frontier { assets: data.names, points: frontier },
                format.into(),
                &output,
            )
        }
        Command::Dim { input, prices, alpha, target_variance, output, format } => {
            let alpha = Alpha::new(alpha)?;
            let data = load_returns(&input, mode(prices))?;
            let estimate = fit(&data, alpha, 1e-8, 500)?;
            let params = estimate.params();
            let point = portfolio_for_variance(&params, target_variance, true)?;
            let values = dim_series(&data.sample, &params, point.lambda)?;
            emit_report(&Report::DimSeries { values }, format.into(), &output)
        }
        Command::AreTable { alphas, n_max, output, format } => {
            let table = are_table(&alphas, n_max)?;
            emit_report(&Report::Are(table), format.into(), &output)
        }
        Command::Simulate {
            n,
            t,
            eps,
            alphas,
            replicates,
            seed,
            tol,
            max_iter,
            output,
            format,
        } => {
            let alphas = alphas
                .into_iter()
                .map(Alpha::new)
                .collect::<Result<Vec<_>>>()?;
            let scenario =
                SimulationScenario::contamination_defaults(n, t, eps, alphas, replicates, seed)?;
            let template = EstimatorConfig::new(Alpha::ZERO)
                .with_tol(tol)
                .with_max_iter(max_iter);
            let table = run_study(&scenario, &template)?;
            emit_report(&Report::Mse(table), format.into(), &output)
        }
    }
}
