//! `rankone`: trajectory plots, outlier scans, local-law diagnostics and
//! outlier-origin histograms.
//!
//! Exit codes: 0 on success, 1 on a numerical failure (a JSON error report
//! is written to stderr), 2 on invalid usage.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use commands::{LocalLawArgs, OriginArgs, ScanArgs, TraceArgs, TraceMethod};
use rankone::rmt::Ensemble;
use rankone::{parallel, Error};
use svg::{ColorScheme, PlotSpec};

#[derive(Parser)]
#[command(name = "rankone", version, about = "Eigenvalue flow of H + i t vv* for Wigner matrices H")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Sampling {
    /// Matrix dimension.
    #[arg(long)]
    n: usize,
    /// gue, wigner-real or wigner-complex-uniform.
    #[arg(long, default_value = "gue")]
    ensemble: Ensemble,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Trace all trajectories; writes PREFIX.csv, PREFIX.meta.json and PREFIX.svg.
    Trace {
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
        /// Output intervals on [0, t-max].
        #[arg(long, default_value_t = 300)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = TraceMethod::Continuation)]
        method: TraceMethod,
        /// RK4 step for the ODE method.
        #[arg(long, default_value_t = commands::default_ode_dt())]
        ode_dt: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 600)]
        height: u32,
        /// Draw every trajectory in this color instead of by index.
        #[arg(long)]
        color: Option<String>,
        /// Fixed real-axis range, as MIN,MAX.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        x_range: Option<(f64, f64)>,
        /// Fixed imaginary-axis range, as MIN,MAX.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        y_range: Option<(f64, f64)>,
        /// Mark i t* and the outlier disk at this time (t > 1).
        #[arg(long)]
        overlay_t: Option<f64>,
        /// Epsilon used for the overlay disk radius.
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
    },
    /// Outlier separation frequency over t; writes PREFIX.csv and PREFIX.json.
    OutlierScan {
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Absolute times, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "offsets")]
        t_grid: Option<Vec<f64>>,
        /// Times 1 + k n^(-1/3) for these k, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,5")]
        offsets: Vec<f64>,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.2)]
        zeta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// |W - m| over a spectral grid; writes PREFIX.csv and PREFIX.json.
    LocalLaw {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value = "gue")]
        ensemble: Ensemble,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use mu = (-1, 1), c = (1/2, 1/2) instead of a random draw.
        #[arg(long)]
        fixture: bool,
        /// Explicit grid point RE,IM (repeatable); replaces the grid flags.
        #[arg(long = "point", value_parser = parse_pair, allow_hyphen_values = true)]
        points: Vec<(f64, f64)>,
        #[arg(long, default_value_t = 2.5)]
        e_max: f64,
        #[arg(long, default_value_t = 10)]
        e_points: usize,
        /// Smallest eta; defaults to n^-0.9.
        #[arg(long)]
        eta_min: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        eta_max: f64,
        #[arg(long, default_value_t = 5)]
        eta_points: usize,
        /// Strip parameter: grid points need eta >= n^(-1 + zeta).
        #[arg(long, default_value_t = 0.1)]
        zeta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram of the rank of the eigenvalue the outlier starts from.
    OriginHist {
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1e3)]
        t_final: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidDimension { .. }
            | Error::Empty(_)
            | Error::Parse(_)
            | Error::Domain(_)
            | Error::OutsideDomain { .. }
    )
}

fn run(command: Command) -> rankone::Result<Vec<PathBuf>> {
    match command {
        Command::Trace {
            sampling,
            t_max,
            steps,
            method,
            ode_dt,
            out,
            width,
            height,
            color,
            x_range,
            y_range,
            overlay_t,
            epsilon,
        } => commands::cmd_trace(&TraceArgs {
            n: sampling.n,
            ensemble: sampling.ensemble,
            seed: sampling.seed,
            t_max,
            steps,
            method,
            ode_dt,
            out,
            plot: PlotSpec {
                width,
                height,
                colors: color.map_or(ColorScheme::Rainbow, ColorScheme::Single),
                x_range,
                y_range,
                ..PlotSpec::default()
            },
            overlay_t,
            epsilon,
        }),
        Command::OutlierScan {
            sampling,
            trials,
            t_grid,
            offsets,
            epsilon,
            zeta,
            out,
        } => commands::cmd_outlier_scan(&ScanArgs {
            n: sampling.n,
            ensemble: sampling.ensemble,
            seed: sampling.seed,
            trials,
            t_grid,
            offsets,
            epsilon,
            zeta,
            out,
        }),
        Command::LocalLaw {
            n,
            ensemble,
            seed,
            fixture,
            points,
            e_max,
            e_points,
            eta_min,
            eta_max,
            eta_points,
            zeta,
            out,
        } => commands::cmd_local_law(&LocalLawArgs {
            n,
            ensemble,
            seed,
            fixture,
            points: points.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
            e_max,
            e_points,
            eta_min,
            eta_max,
            eta_points,
            zeta,
            out,
        }),
        Command::OriginHist {
            sampling,
            trials,
            t_final,
            out,
        } => commands::cmd_origin_hist(&OriginArgs {
            n: sampling.n,
            ensemble: sampling.ensemble,
            seed: sampling.seed,
            trials,
            t_final,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match parallel::install(|| run(cli.command)).and_then(|r| r) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) if is_usage(&e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            let report = serde_json::json!({ "error": e.to_string(), "exit_code": 1, "details": e });
            eprintln!("{}", serde_json::to_string_pretty(&report).expect("error reports serialize"));
            ExitCode::from(1)
        }
    }
}
