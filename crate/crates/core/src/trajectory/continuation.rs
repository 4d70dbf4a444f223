//! Root tracking along `W(z) = i/t`.
//!
//! Each step predicts every root with the exact eigenvalue velocity (or the
//! initial push `i c_j` at `t = 0`) and corrects it with Newton's method.
//! The Newton function is `W(z) - i/t` multiplied by `(mu_p - z)`, where
//! `mu_p` is the pole nearest to the iterate; the product has the same
//! zeros but no singularity next to the root being refined.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{
    min_pairwise_distance, ode::ode_rhs, Diagnostics, Method, TimeGrid, TrajectoryBundle,
    COLLISION_TOL, NEWTON_RESIDUAL_TOL, NEWTON_STEP_TOL,
};
use crate::error::{Error, Result};
use crate::resolvent::{weighted_resolvent, PoleOffset, ResolventInput, POLE_TOL};

const MAX_NEWTON: usize = 50;
/// A corrected root may move at most this fraction of its distance to the
/// nearest other root (measured before the step) away from its prediction.
const JUMP_FRACTION: f64 = 0.25;
const PARALLEL_ABOVE: usize = 128;
/// Weights at or below this decouple their eigenvector from `v`; the
/// trajectory is `mu_j + i t c_j` to working precision.
pub(crate) const NEGLIGIBLE_WEIGHT: f64 = 1e-20;

/// Secular function `1 + i t W(z)`; zero exactly on the spectrum of `G_t`.
pub fn secular(rin: &ResolventInput, t: f64, z: Complex64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("secular function needs t > 0, got {t}")));
    }
    Ok(1.0 + Complex64::new(0.0, t) * weighted_resolvent(rin, z)?)
}

/// Step-size control for [`trace_trajectories`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrackOptions {
    /// First internal step.
    pub dt_init: f64,
    /// Give up once a failing step would be shorter than this.
    pub dt_min: f64,
    /// Cap on the internal step; defaults to the grid spacing.
    pub dt_max: Option<f64>,
    /// Clean steps before the step size is doubled.
    pub grow_after: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            dt_min: 1e-9,
            dt_max: None,
            grow_after: 5,
        }
    }
}

struct StepOutput {
    lambdas: Vec<Complex64>,
    anchored: Vec<PoleOffset>,
    iterations: usize,
    min_distance: f64,
}

#[derive(Debug)]
enum StepFailure {
    Newton { index: usize, iterations: usize },
    Jump { index: usize },
    Close { j: usize, k: usize, distance: f64 },
}

/// Newton correction of one root of `W(z) = i/t`, iterating on the offset
/// from the nearest pole. Returns the root and the iteration count, or the
/// iteration count at failure.
fn newton(rin: &ResolventInput, z0: Complex64, t: f64) -> std::result::Result<(PoleOffset, usize), usize> {
    let target = Complex64::new(0.0, 1.0 / t);
    let mut at = PoleOffset::nearest(rin, z0);
    for it in 1..=MAX_NEWTON {
        let z = at.value(rin);
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(it);
        }
        at = at.rebase(rin, rin.nearest_pole(z).0);
        if at.delta.norm() < POLE_TOL {
            return Err(it);
        }
        let e = rin.eval_offset(at);
        let f = e.w - target;
        let step = if rin.weights[at.pole] > NEGLIGIBLE_WEIGHT {
            let d = -at.delta;
            d * f / (d * e.dw - f)
        } else {
            f / e.dw
        };
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(it);
        }
        // Rounding floor of |f|: term errors plus the precision of delta.
        let floor = 8.0 * f64::EPSILON * (e.abs_w + at.delta.norm() * e.abs_dw);
        let fnorm = f.norm();
        at.delta -= step;
        let small_step = step.norm() <= NEWTON_STEP_TOL * (1.0 + z.norm());
        if small_step && (fnorm * t <= NEWTON_RESIDUAL_TOL || fnorm <= floor) {
            return Ok((at, it));
        }
    }
    Err(MAX_NEWTON)
}

/// Predicted positions at `t_next`.
fn predict(rin: &ResolventInput, prev: &[Complex64], t_prev: f64, t_next: f64, prev_min_distance: f64, history: Option<(f64, &[Complex64])>) -> Vec<Complex64> {
    let h = t_next - t_prev;
    if t_prev == 0.0 {
        return rin
            .mus
            .iter()
            .zip(&rin.weights)
            .map(|(&mu, &c)| Complex64::new(mu, h * c))
            .collect();
    }
    if prev_min_distance > 10.0 * COLLISION_TOL {
        if let Ok(v) = ode_rhs(prev, t_prev, None) {
            return prev.iter().zip(&v).map(|(z, dz)| z + h * dz).collect();
        }
    }
    match history {
        Some((t_old, old)) => prev
            .iter()
            .zip(old)
            .map(|(z, zo)| z + (z - zo) * (h / (t_prev - t_old)))
            .collect(),
        None => prev.to_vec(),
    }
}

/// Distance from each root to its nearest neighbour.
fn neighbour_distances(zs: &[Complex64]) -> Vec<f64> {
    let n = zs.len();
    let mut d = vec![f64::INFINITY; n];
    for j in 0..n {
        for k in j + 1..n {
            let r = (zs[j] - zs[k]).norm();
            d[j] = d[j].min(r);
            d[k] = d[k].min(r);
        }
    }
    d
}

fn step_inner(
    rin: &ResolventInput,
    prev: &[Complex64],
    t_prev: f64,
    t_next: f64,
    prev_spacing: &[f64],
    history: Option<(f64, &[Complex64])>,
) -> std::result::Result<StepOutput, StepFailure> {
    let n = prev.len();
    let prev_min = prev_spacing.iter().copied().fold(f64::INFINITY, f64::min);
    let predicted = predict(rin, prev, t_prev, t_next, prev_min, history);

    let correct = |(j, z0): (usize, &Complex64)| -> std::result::Result<(PoleOffset, usize), StepFailure> {
        let c = rin.weights[j];
        if c <= NEGLIGIBLE_WEIGHT {
            let at = PoleOffset {
                pole: j,
                delta: Complex64::new(0.0, t_next * c),
            };
            return Ok((at, 0));
        }
        let (at, iterations) = newton(rin, *z0, t_next).map_err(|iterations| StepFailure::Newton { index: j, iterations })?;
        if (at.value(rin) - z0).norm() > JUMP_FRACTION * prev_spacing[j] {
            return Err(StepFailure::Jump { index: j });
        }
        Ok((at, iterations))
    };
    let corrected: Vec<_> = if n > PARALLEL_ABOVE {
        predicted.par_iter().enumerate().map(correct).collect()
    } else {
        predicted.iter().enumerate().map(correct).collect()
    };
    let mut lambdas = Vec::with_capacity(n);
    let mut anchored = Vec::with_capacity(n);
    let mut iterations = 0;
    for r in corrected {
        let (at, it) = r?;
        lambdas.push(at.value(rin));
        anchored.push(at);
        iterations += it;
    }
    let (min_distance, j, k) = min_pairwise_distance(&lambdas);
    if min_distance < 10.0 * COLLISION_TOL {
        return Err(StepFailure::Close {
            j,
            k,
            distance: min_distance,
        });
    }
    Ok(StepOutput {
        lambdas,
        anchored,
        iterations,
        min_distance,
    })
}

fn spacing_at(prev: &[Complex64], t_prev: f64) -> Vec<f64> {
    let _ = t_prev;
    if prev.len() == 1 {
        vec![f64::INFINITY]
    } else {
        neighbour_distances(prev)
    }
}

/// Advances the roots `lambda_prev` of `W(z) = i/t_prev` to `t_next`.
///
/// Fails with [`Error::NewtonDivergence`] or [`Error::StepRejected`] when the
/// step should be refined, and with [`Error::Collision`] when two corrected
/// roots are within the collision tolerance.
pub fn track_step(
    rin: &ResolventInput,
    lambda_prev: &[Complex64],
    t_prev: f64,
    t_next: f64,
) -> Result<Vec<Complex64>> {
    if lambda_prev.len() != rin.dim() {
        return Err(Error::DimensionMismatch {
            expected: rin.dim(),
            got: lambda_prev.len(),
        });
    }
    if !(t_next > t_prev) || t_prev < 0.0 {
        return Err(Error::Domain(format!("need 0 <= t_prev < t_next, got {t_prev}, {t_next}")));
    }
    let spacing = spacing_at(lambda_prev, t_prev);
    step_inner(rin, lambda_prev, t_prev, t_next, &spacing, None)
        .map(|o| o.lambdas)
        .map_err(|f| failure_to_error(f, t_next, lambda_prev))
}

fn failure_to_error(f: StepFailure, t: f64, state: &[Complex64]) -> Error {
    match f {
        StepFailure::Newton { index, iterations } => Error::NewtonDivergence { index, t, iterations },
        StepFailure::Jump { index } => Error::StepRejected {
            index,
            t,
            reason: "corrected root moved too far from its prediction",
        },
        StepFailure::Close { j, k, distance } => Error::Collision {
            j,
            k,
            t,
            distance,
            state: state.iter().map(|z| (z.re, z.im)).collect(),
        },
    }
}

/// Tracks all trajectories from `lambda_j(0) = mu_j` across `grid`, halving
/// the internal step on failure and doubling it after a run of clean steps.
pub fn trace_trajectories(
    rin: &ResolventInput,
    grid: &TimeGrid,
    opts: &TrackOptions,
) -> Result<TrajectoryBundle> {
    let n = rin.dim();
    let points = grid.points();
    let dt_cap = opts.dt_max.unwrap_or_else(|| grid.dt_max());
    let mut state: Vec<Complex64> = rin.mus.iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let mut history: Option<(f64, Vec<Complex64>)> = None;
    let mut spacing = spacing_at(&state, 0.0);

    let mut lambdas = Vec::with_capacity(points.len());
    let mut diagnostics = Diagnostics::default();
    lambdas.push(state.clone());
    let mut anchor_state: Vec<PoleOffset> = (0..n)
        .map(|pole| PoleOffset {
            pole,
            delta: Complex64::new(0.0, 0.0),
        })
        .collect();
    let mut anchored = vec![anchor_state.clone()];
    diagnostics.newton_iterations.push(0);
    diagnostics.substeps.push(0);
    diagnostics.min_distance.push(spacing.iter().copied().fold(f64::INFINITY, f64::min));

    let mut t = 0.0;
    let mut h = opts.dt_init.min(dt_cap);
    let mut clean = 0usize;
    for &target in &points[1..] {
        let mut iterations = 0;
        let mut substeps = 0;
        let mut min_distance = f64::INFINITY;
        while t < target {
            let remaining = target - t;
            let t_next = if h >= remaining * (1.0 - 1e-12) { target } else { t + h };
            let hist = history.as_ref().map(|(to, zs)| (*to, zs.as_slice()));
            match step_inner(rin, &state, t, t_next, &spacing, hist) {
                Ok(out) => {
                    history = Some((t, std::mem::replace(&mut state, out.lambdas)));
                    anchor_state = out.anchored;
                    spacing = spacing_at(&state, t_next);
                    iterations += out.iterations;
                    min_distance = out.min_distance;
                    substeps += 1;
                    let full = t_next - t >= h * (1.0 - 1e-12);
                    t = t_next;
                    if full {
                        clean += 1;
                        if clean >= opts.grow_after {
                            h = (2.0 * h).min(dt_cap);
                            clean = 0;
                        }
                    }
                }
                Err(failure) => {
                    diagnostics.rejections += 1;
                    clean = 0;
                    h = 0.5 * (t_next - t);
                    if h < opts.dt_min {
                        let mut err = failure_to_error(failure, t_next, &state);
                        if let Error::NewtonDivergence { .. } | Error::StepRejected { .. } = err {
                            // Refinement never resolved the step; report the
                            // closest pair if trajectories are merging.
                            let (d, j, k) = min_pairwise_distance(&state);
                            if d < 1e3 * COLLISION_TOL {
                                err = Error::Collision {
                                    j,
                                    k,
                                    t,
                                    distance: d,
                                    state: state.iter().map(|z| (z.re, z.im)).collect(),
                                };
                            }
                        }
                        return Err(err);
                    }
                }
            }
        }
        lambdas.push(state.clone());
        anchored.push(anchor_state.clone());
        diagnostics.newton_iterations.push(iterations);
        diagnostics.substeps.push(substeps);
        diagnostics.min_distance.push(if n > 1 { min_distance } else { f64::INFINITY });
    }

    Ok(TrajectoryBundle {
        grid: grid.clone(),
        lambdas,
        anchored: Some(anchored),
        method: Method::Continuation,
        diagnostics,
    })
}
