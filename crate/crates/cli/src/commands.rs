use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use rankone::analysis::{emergence_scan, origin_histogram, DomainParams, EmergenceCurve, OriginHistogram, ScanOptions};
use rankone::io::{write_emergence_csv, write_file, write_json, write_local_law_csv, write_origin_csv, write_trajectory_csv};
use rankone::resolvent::{local_law_error, local_law_grid, ResolventInput};
use rankone::rmt::{Ensemble, LightInstance, RunConfig, RunMetadata};
use rankone::trajectory::{
    integrate_ode, trace_trajectories, Diagnostics, Method, TimeGrid, TrackOptions, TrajectoryBundle,
    DEFAULT_ODE_DT,
};
use rankone::{Error, Result};

use crate::svg::{render_svg, OutlierOverlay, PlotSpec};

/// `PREFIX` with `suffix` appended to the file name.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn sample(n: usize, ensemble: Ensemble, seed: u64) -> Result<(LightInstance, RunMetadata)> {
    if n == 1 {
        return LightInstance::sample_scalar(ensemble, seed);
    }
    let config = RunConfig::new(n, ensemble, seed)?;
    let inst = LightInstance::sample(&config)?;
    let meta = inst.metadata(&config);
    Ok((inst, meta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMethod {
    Continuation,
    Ode,
    Both,
}

pub struct TraceArgs {
    pub n: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub t_max: f64,
    pub steps: usize,
    pub method: TraceMethod,
    pub ode_dt: f64,
    pub out: PathBuf,
    pub plot: PlotSpec,
    pub overlay_t: Option<f64>,
    pub epsilon: f64,
}

#[derive(Serialize)]
struct GridSummary {
    t_max: f64,
    steps: usize,
}

#[derive(Serialize)]
struct MethodSummary {
    method: Method,
    csv: String,
    /// Largest `|sum_j lambda_j(t) - sum_j mu_j - i t|` over the grid.
    trace_defect: f64,
    diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct TraceMeta {
    command: &'static str,
    run: RunMetadata,
    grid: GridSummary,
    method: TraceMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    ode_dt: Option<f64>,
    mus: Vec<f64>,
    weights: Vec<f64>,
    outputs: Vec<MethodSummary>,
    /// Largest label-wise `|lambda_j^cont(t) - lambda_j^ode(t)|`, for `both`.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
    svg: String,
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn label_deviation(a: &TrajectoryBundle, b: &TrajectoryBundle) -> f64 {
    a.lambdas
        .iter()
        .zip(&b.lambdas)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

pub fn cmd_trace(args: &TraceArgs) -> Result<Vec<PathBuf>> {
    if !(args.t_max > 0.0) || args.steps == 0 {
        return Err(Error::Config("--t-max must be positive and --steps at least 1".into()));
    }
    let (inst, run) = sample(args.n, args.ensemble, args.seed)?;
    let grid = TimeGrid::uniform(args.t_max, args.steps)?;
    let mut bundles = vec![];
    if matches!(args.method, TraceMethod::Continuation | TraceMethod::Both) {
        bundles.push(trace_trajectories(&inst.input, &grid, &TrackOptions::default())?);
    }
    if matches!(args.method, TraceMethod::Ode | TraceMethod::Both) {
        bundles.push(integrate_ode(&inst.input, &grid, args.ode_dt)?);
    }

    let mut written = vec![];
    let mut outputs = vec![];
    for (k, b) in bundles.iter().enumerate() {
        // The first bundle owns PREFIX.csv; the ODE companion of `both` gets PREFIX.ode.csv.
        let path = if k == 0 {
            with_suffix(&args.out, ".csv")
        } else {
            with_suffix(&args.out, ".ode.csv")
        };
        write_file(&path, |w| write_trajectory_csv(w, b))?;
        outputs.push(MethodSummary {
            method: b.method,
            csv: file_name(&path),
            trace_defect: b.trace_defect(),
            diagnostics: b.diagnostics.clone(),
        });
        written.push(path);
    }

    let mut plot = args.plot.clone();
    if let Some(t) = args.overlay_t {
        plot.outlier = Some(OutlierOverlay {
            t,
            params: DomainParams::new(args.epsilon, 0.2, 2.0_f64.max(args.t_max), args.n)?,
        });
    }
    let svg_path = with_suffix(&args.out, ".svg");
    let doc = render_svg(&bundles[0], &plot)?;
    std::fs::write(&svg_path, doc)?;

    let meta = TraceMeta {
        command: "trace",
        run,
        grid: GridSummary {
            t_max: args.t_max,
            steps: args.steps,
        },
        method: args.method,
        ode_dt: (args.method != TraceMethod::Continuation).then_some(args.ode_dt),
        mus: inst.input.mus.clone(),
        weights: inst.input.weights.clone(),
        outputs,
        max_deviation: (bundles.len() == 2).then(|| label_deviation(&bundles[0], &bundles[1])),
        svg: file_name(&svg_path),
    };
    let meta_path = with_suffix(&args.out, ".meta.json");
    write_json(&meta_path, &meta)?;
    written.push(svg_path);
    written.push(meta_path);
    Ok(written)
}

pub struct ScanArgs {
    pub n: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub trials: usize,
    /// Absolute times; defaults to `1 + k n^(-1/3)` for the offsets below.
    pub t_grid: Option<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub epsilon: f64,
    pub zeta: f64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    command: &'static str,
    config: &'a RunConfig,
    params: DomainParams,
    curve: &'a EmergenceCurve,
    csv: String,
}

pub fn scan_times(n: usize, offsets: &[f64]) -> Vec<f64> {
    offsets.iter().map(|k| 1.0 + k * (n as f64).powf(-1.0 / 3.0)).collect()
}

pub fn cmd_outlier_scan(args: &ScanArgs) -> Result<Vec<PathBuf>> {
    let config = RunConfig::new(args.n, args.ensemble, args.seed)?;
    let params = DomainParams::new(args.epsilon, args.zeta, 2.0, args.n)?;
    let times = args.t_grid.clone().unwrap_or_else(|| scan_times(args.n, &args.offsets));
    let curve = emergence_scan(&config, &times, args.trials, &params, &ScanOptions::default())?;
    let csv = with_suffix(&args.out, ".csv");
    write_file(&csv, |w| write_emergence_csv(w, &curve))?;
    let json = with_suffix(&args.out, ".json");
    write_json(
        &json,
        &ScanSummary {
            command: "outlier-scan",
            config: &config,
            params,
            curve: &curve,
            csv: file_name(&csv),
        },
    )?;
    Ok(vec![csv, json])
}

pub struct LocalLawArgs {
    pub n: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub fixture: bool,
    pub points: Vec<Complex64>,
    pub e_max: f64,
    pub e_points: usize,
    pub eta_min: Option<f64>,
    pub eta_max: f64,
    pub eta_points: usize,
    pub zeta: f64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct LocalLawSummary {
    command: &'static str,
    /// `null` for the fixture input.
    run: Option<RunMetadata>,
    fixture: bool,
    n: usize,
    zeta: f64,
    points: usize,
    sup_normalized: f64,
    /// `n^0.15`, the finite-size reference used by the acceptance suite.
    reference_bound: f64,
    csv: String,
}

/// `mu = (-1, 1)`, `c = (1/2, 1/2)`.
pub fn toy_input() -> ResolventInput {
    ResolventInput::new(vec![-1.0, 1.0], vec![0.5, 0.5]).expect("valid fixture")
}

pub fn cmd_local_law(args: &LocalLawArgs) -> Result<Vec<PathBuf>> {
    let (rin, run, n) = if args.fixture {
        (toy_input(), None, 2)
    } else {
        let (inst, run) = sample(args.n, args.ensemble, args.seed)?;
        (inst.input, Some(run), args.n)
    };
    let grid = if !args.points.is_empty() {
        args.points.clone()
    } else if args.fixture {
        vec![Complex64::new(0.0, 1.0)]
    } else {
        let eta_min = args.eta_min.unwrap_or_else(|| (n as f64).powf(-0.9));
        local_law_grid(args.e_max, args.e_points, eta_min, args.eta_max, args.eta_points)
    };
    let report = local_law_error(&rin, &grid, n, args.zeta)?;
    let csv = with_suffix(&args.out, ".csv");
    write_file(&csv, |w| write_local_law_csv(w, &report))?;
    let json = with_suffix(&args.out, ".json");
    write_json(
        &json,
        &LocalLawSummary {
            command: "local-law",
            run,
            fixture: args.fixture,
            n,
            zeta: args.zeta,
            points: grid.len(),
            sup_normalized: report.sup_normalized,
            reference_bound: (n as f64).powf(0.15),
            csv: file_name(&csv),
        },
    )?;
    Ok(vec![csv, json])
}

pub struct OriginArgs {
    pub n: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub trials: usize,
    pub t_final: f64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct OriginSummary<'a> {
    command: &'static str,
    config: &'a RunConfig,
    histogram: &'a OriginHistogram,
    csv: String,
}

pub fn cmd_origin_hist(args: &OriginArgs) -> Result<Vec<PathBuf>> {
    let config = RunConfig::new(args.n, args.ensemble, args.seed)?;
    if !(args.t_final > 0.0) {
        return Err(Error::Config("--t-final must be positive".into()));
    }
    let hist = origin_histogram(&config, args.trials, args.t_final)?;
    let csv = with_suffix(&args.out, ".csv");
    write_file(&csv, |w| write_origin_csv(w, &hist))?;
    let json = with_suffix(&args.out, ".json");
    write_json(
        &json,
        &OriginSummary {
            command: "origin-hist",
            config: &config,
            histogram: &hist,
            csv: file_name(&csv),
        },
    )?;
    Ok(vec![csv, json])
}

pub fn default_ode_dt() -> f64 {
    DEFAULT_ODE_DT
}
