//! Eigenvalue trajectories of `G_t = H + i t v v*`, computed by secular
//! equation continuation, by integrating the closed eigenvalue ODE, and by a
//! polynomial root oracle.

mod continuation;
mod limits;
mod matching;
mod ode;
mod oracle;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resolvent::PoleOffset;

pub use continuation::{secular, trace_trajectories, track_step, TrackOptions};
pub use limits::{limit_points, LimitPoints};
pub use matching::{hungarian, match_unordered, Matching};
pub use ode::{integrate_ode, ode_rhs, DEFAULT_ODE_DT};
pub use oracle::{oracle_eigen, ORACLE_MAX_DIM};

/// Newton stops once `|W(z) - i/t| * t` is below this (or at the rounding floor).
pub const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
/// ... and the last Newton step is below this times `1 + |z|`.
pub const NEWTON_STEP_TOL: f64 = 1e-13;
/// Two trajectories closer than this are considered collided.
pub const COLLISION_TOL: f64 = 1e-10;

/// Output times: strictly increasing, starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config("a time grid needs at least two points".into()));
        }
        if points[0] != 0.0 {
            return Err(Error::Config("time grids start at t = 0".into()));
        }
        if points.iter().any(|t| !t.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("time grid must be finite and strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `steps` equal intervals on `[0, t_max]`.
    pub fn uniform(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max > 0.0) || steps == 0 {
            return Err(Error::Config(format!(
                "uniform grid needs t_max > 0 and steps > 0 (got {t_max}, {steps})"
            )));
        }
        let mut points: Vec<f64> = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
        points[steps] = t_max;
        Self::new(points)
    }

    /// Uniform with spacing `dt` up to `t_switch`, then geometric with ratio
    /// `ratio` up to `t_max`.
    pub fn uniform_then_geometric(dt: f64, t_switch: f64, ratio: f64, t_max: f64) -> Result<Self> {
        if !(ratio > 1.0) || !(t_switch > 0.0) || !(t_max >= t_switch) {
            return Err(Error::Config("invalid geometric grid parameters".into()));
        }
        let steps = (t_switch / dt).ceil().max(1.0) as usize;
        let mut points = Self::uniform(t_switch, steps)?.points;
        let mut t = t_switch;
        while t * ratio < t_max {
            t *= ratio;
            points.push(t);
        }
        if t_max > t_switch {
            points.push(t_max);
        }
        Self::new(points)
    }

    /// Adds extra output times (deduplicated, sorted). Points outside
    /// `(0, inf)` are ignored.
    pub fn with_points(&self, extra: &[f64]) -> Result<Self> {
        let mut points = self.points.clone();
        points.extend(extra.iter().copied().filter(|t| *t > 0.0 && t.is_finite()));
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.points.last().expect("grids have at least two points")
    }

    /// Largest interval between consecutive points.
    pub fn dt_max(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the grid point equal to `t` (exact match).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Continuation,
    Ode,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Continuation => "continuation",
            Method::Ode => "ode",
            Method::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuation" => Ok(Self::Continuation),
            "ode" => Ok(Self::Ode),
            "oracle" => Ok(Self::Oracle),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

/// Per-grid-point bookkeeping of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Newton iterations spent reaching each grid point (0 at t = 0).
    pub newton_iterations: Vec<usize>,
    /// Internal steps taken to reach each grid point.
    pub substeps: Vec<usize>,
    /// Smallest pairwise distance between eigenvalues at each grid point.
    pub min_distance: Vec<f64>,
    /// Step-size halvings over the whole run.
    pub rejections: usize,
}

/// All `n` trajectories sampled on a time grid, labelled so that
/// `lambdas[0][j] = mu_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle {
    pub grid: TimeGrid,
    /// `lambdas[i][j]` is trajectory `j` at time `grid.points()[i]`.
    pub lambdas: Vec<Vec<Complex64>>,
    /// Continuation runs also keep each root as an offset from its nearest
    /// pole, which resolves roots that sit closer to a pole than the spacing
    /// of doubles allows `lambdas` to.
    pub anchored: Option<Vec<Vec<PoleOffset>>>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl TrajectoryBundle {
    pub fn dim(&self) -> usize {
        self.lambdas.first().map_or(0, Vec::len)
    }

    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    /// Values at the grid point `t` (exact match).
    pub fn at(&self, t: f64) -> Option<&[Complex64]> {
        self.grid.index_of(t).map(|i| self.lambdas[i].as_slice())
    }

    pub fn last(&self) -> &[Complex64] {
        self.lambdas.last().expect("bundles are non-empty")
    }

    /// Trajectory `j` over the whole grid.
    pub fn trajectory(&self, j: usize) -> Vec<Complex64> {
        self.lambdas.iter().map(|row| row[j]).collect()
    }

    /// Largest `|sum_j lambda_j(t) - (sum_j mu_j + i t)|` over the grid.
    pub fn trace_defect(&self) -> f64 {
        let base: Complex64 = self.lambdas[0].iter().sum();
        self.times()
            .iter()
            .zip(&self.lambdas)
            .map(|(&t, row)| (row.iter().sum::<Complex64>() - base - Complex64::new(0.0, t)).norm())
            .fold(0.0, f64::max)
    }

    /// Index of the trajectory with the largest imaginary part at the last
    /// time, and whether that index changed over the last decade of `t`.
    pub fn outlier_label(&self) -> (usize, bool) {
        let argmax = |row: &[Complex64]| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, z)| {
                    if z.im > best.1 {
                        (j, z.im)
                    } else {
                        best
                    }
                })
                .0
        };
        let j_out = argmax(self.last());
        let t_end = self.grid.t_max();
        let unstable = self
            .times()
            .iter()
            .zip(&self.lambdas)
            .filter(|(&t, _)| t > 0.0 && t >= t_end / 10.0)
            .any(|(_, row)| argmax(row) != j_out);
        (j_out, unstable)
    }
}

/// Smallest pairwise distance and the pair attaining it.
pub fn min_pairwise_distance(zs: &[Complex64]) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for j in 0..zs.len() {
        for k in j + 1..zs.len() {
            let d = (zs[j] - zs[k]).norm_sqr();
            if d < best.0 {
                best = (d, j, k);
            }
        }
    }
    (best.0.sqrt(), best.1, best.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::uniform(0.0, 3).is_err());
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.dt_max(), 0.5);
    }

    #[test]
    fn geometric_tail() {
        let g = TimeGrid::uniform_then_geometric(0.1, 1.0, 2.0, 10.0).unwrap();
        assert_eq!(g.t_max(), 10.0);
        assert!(g.points().contains(&8.0));
        let g = g.with_points(&[3.0, -1.0, 8.0]).unwrap();
        assert!(g.index_of(3.0).is_some());
    }

    #[test]
    fn pairwise_distance() {
        let zs = [
            Complex64::new(0.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let (d, j, k) = min_pairwise_distance(&zs);
        assert_eq!((d, j, k), (1.0, 0, 2));
    }
}
