//! Monte Carlo experiments over independent `(H, v)` draws. Trial `k` uses
//! seed `config.seed + k`; trials run in parallel and are aggregated in
//! trial order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_outlier, DomainParams};
use crate::error::{Error, Result};
use crate::rmt::{LightInstance, RunConfig};
use crate::trajectory::{trace_trajectories, TimeGrid, TrackOptions};

/// How each trial is traced.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    /// Output spacing of the time grid used to reach the scan times.
    pub grid_dt: f64,
    pub track: TrackOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_dt: 0.01,
            track: TrackOptions::default(),
        }
    }
}

/// A trial that raised an error instead of producing a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceCurve {
    pub t: Vec<f64>,
    /// Fraction of all trials that were separated at each `t`; failed trials
    /// count as not separated.
    pub frequency: Vec<f64>,
    pub separated: Vec<usize>,
    pub trials: usize,
    pub n: usize,
    pub failures: Vec<TrialFailure>,
}

fn trial_seed(config: &RunConfig, trial: usize) -> u64 {
    config.seed.wrapping_add(trial as u64)
}

/// Separation frequency of the outlier at each time in `t_grid`.
pub fn emergence_scan(
    config: &RunConfig,
    t_grid: &[f64],
    trials: usize,
    params: &DomainParams,
    opts: &ScanOptions,
) -> Result<EmergenceCurve> {
    if t_grid.is_empty() {
        return Err(Error::Empty("emergence scan needs at least one time"));
    }
    if trials == 0 {
        return Err(Error::Config("emergence scan needs at least one trial".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Config("scan times must be finite and nonnegative".into()));
    }
    let traced: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 1.0).collect();
    let grid = match traced.iter().copied().fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t)))) {
        Some(t_max) => {
            let steps = (t_max / opts.grid_dt).ceil().max(1.0) as usize;
            Some(TimeGrid::uniform(t_max, steps)?.with_points(&traced)?)
        }
        None => None,
    };

    let outcomes: Vec<std::result::Result<Vec<bool>, TrialFailure>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(config, trial);
            let Some(grid) = &grid else {
                return Ok(vec![false; t_grid.len()]);
            };
            let fail = |e: Error| TrialFailure {
                trial,
                seed,
                error: e.to_string(),
            };
            let inst = LightInstance::sample(&config.with_seed(seed)).map_err(fail)?;
            let bundle = trace_trajectories(&inst.input, grid, &opts.track).map_err(fail)?;
            t_grid
                .iter()
                .map(|&t| {
                    if t <= 1.0 {
                        return Ok(false);
                    }
                    let row = bundle.at(t).expect("scan times are grid points");
                    Ok(classify_outlier(row, t, params)?.separated)
                })
                .collect::<Result<Vec<bool>>>()
                .map_err(fail)
        })
        .collect();

    let mut separated = vec![0usize; t_grid.len()];
    let mut failures = vec![];
    for outcome in outcomes {
        match outcome {
            Ok(flags) => {
                for (count, flag) in separated.iter_mut().zip(flags) {
                    *count += usize::from(flag);
                }
            }
            Err(f) => failures.push(f),
        }
    }
    Ok(EmergenceCurve {
        t: t_grid.to_vec(),
        frequency: separated.iter().map(|&s| s as f64 / trials as f64).collect(),
        separated,
        trials,
        n: config.n,
        failures,
    })
}

/// Where the outlier comes from: `j_out` per trial and a histogram over the
/// rank of `mu_{j_out}` in the spectrum of `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginHistogram {
    pub n: usize,
    pub trials: usize,
    pub t_final: f64,
    /// `counts[r - 1]` trials had their outlier start at the `r`-th smallest eigenvalue.
    pub counts: Vec<usize>,
    /// One-based rank per successful trial, in trial order.
    pub ranks: Vec<usize>,
    /// `|rank - n/2|` per successful trial.
    pub distance_from_center: Vec<f64>,
    /// Trials whose top trajectory changed over the last decade of `t`.
    pub unstable_trials: Vec<usize>,
    pub failures: Vec<TrialFailure>,
}

/// Default grid for origin runs: fine up to `t = 3`, geometric beyond.
pub fn origin_grid(t_final: f64) -> Result<TimeGrid> {
    if t_final <= 3.0 {
        TimeGrid::uniform(t_final, (t_final / 0.01).ceil().max(1.0) as usize)
    } else {
        TimeGrid::uniform_then_geometric(0.01, 3.0, 1.05, t_final)
    }
}

pub fn origin_histogram(config: &RunConfig, trials: usize, t_final: f64) -> Result<OriginHistogram> {
    origin_histogram_with(config, trials, &origin_grid(t_final)?, &TrackOptions::default())
}

pub fn origin_histogram_with(
    config: &RunConfig,
    trials: usize,
    grid: &TimeGrid,
    track: &TrackOptions,
) -> Result<OriginHistogram> {
    if trials == 0 {
        return Err(Error::Config("origin histogram needs at least one trial".into()));
    }
    let outcomes: Vec<std::result::Result<(usize, bool), TrialFailure>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(config, trial);
            let fail = |e: Error| TrialFailure {
                trial,
                seed,
                error: e.to_string(),
            };
            let inst = LightInstance::sample(&config.with_seed(seed)).map_err(fail)?;
            let bundle = trace_trajectories(&inst.input, grid, track).map_err(fail)?;
            Ok(bundle.outlier_label())
        })
        .collect();

    let n = config.n;
    let mut hist = OriginHistogram {
        n,
        trials,
        t_final: grid.t_max(),
        counts: vec![0; n],
        ranks: vec![],
        distance_from_center: vec![],
        unstable_trials: vec![],
        failures: vec![],
    };
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((j, unstable)) => {
                hist.counts[j] += 1;
                hist.ranks.push(j + 1);
                hist.distance_from_center.push(((j + 1) as f64 - n as f64 / 2.0).abs());
                if unstable {
                    hist.unstable_trials.push(trial);
                }
            }
            Err(f) => hist.failures.push(f),
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_below_one_give_zero_frequency() {
        let config = RunConfig::gue(20, 3).unwrap();
        let params = DomainParams::defaults(20).unwrap();
        let curve = emergence_scan(&config, &[0.2, 0.9, 1.0], 4, &params, &ScanOptions::default()).unwrap();
        assert_eq!(curve.frequency, vec![0.0; 3]);
        assert!(curve.failures.is_empty());
    }

    #[test]
    fn single_trial_is_zero_or_one() {
        let n = 50;
        let config = RunConfig::gue(n, 11).unwrap();
        let params = DomainParams::defaults(n).unwrap();
        let t = 1.0 + 5.0 * (n as f64).powf(-1.0 / 3.0);
        let curve = emergence_scan(&config, &[t], 1, &params, &ScanOptions::default()).unwrap();
        assert!(curve.frequency[0] == 0.0 || curve.frequency[0] == 1.0);
        assert_eq!(curve.trials, 1);
    }

    #[test]
    fn scan_rejects_bad_input() {
        let config = RunConfig::gue(10, 0).unwrap();
        let params = DomainParams::defaults(10).unwrap();
        assert!(emergence_scan(&config, &[], 3, &params, &ScanOptions::default()).is_err());
        assert!(emergence_scan(&config, &[1.5], 0, &params, &ScanOptions::default()).is_err());
    }

    #[test]
    fn origin_histogram_counts_every_trial() {
        let config = RunConfig::gue(12, 5).unwrap();
        let h = origin_histogram(&config, 6, 20.0).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>() + h.failures.len(), 6);
        assert_eq!(h.ranks.len(), 6 - h.failures.len());
        assert!(h.ranks.iter().all(|&r| (1..=12).contains(&r)));
    }
}
