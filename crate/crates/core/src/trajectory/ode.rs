//! The closed eigenvalue ODE
//!
//! ```text
//! lambda_j'(t) = (i Im lambda_j / t) * prod_{k != j} (1 + 2i Im lambda_k / (lambda_j - lambda_k))
//! ```
//!
//! with the initial push `lambda_j'(0) = i c_j`, integrated by classical RK4.

use num_complex::Complex64;

use super::{min_pairwise_distance, Diagnostics, Method, TimeGrid, TrajectoryBundle};
use crate::error::{Error, Result};
use crate::resolvent::ResolventInput;

/// Default RK4 step.
pub const DEFAULT_ODE_DT: f64 = 5e-4;

/// Eigenvalues closer than this make the right-hand side singular.
const SINGULAR_GAP: f64 = 1e-12;

/// Velocities of all eigenvalues at time `t`. At `t = 0` the weights are
/// required and the velocities are `i c_j`.
pub fn ode_rhs(lambdas: &[Complex64], t: f64, weights: Option<&[f64]>) -> Result<Vec<Complex64>> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("ode_rhs needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        let w = weights.ok_or_else(|| Error::Config("the velocity at t = 0 needs the weights".into()))?;
        if w.len() != lambdas.len() {
            return Err(Error::DimensionMismatch {
                expected: lambdas.len(),
                got: w.len(),
            });
        }
        return Ok(w.iter().map(|&c| Complex64::new(0.0, c)).collect());
    }
    let n = lambdas.len();
    let (gap, j, k) = min_pairwise_distance(lambdas);
    if n > 1 && gap <= SINGULAR_GAP {
        return Err(Error::Singularity { j, k, t, gap });
    }
    Ok((0..n)
        .map(|j| {
            let lj = lambdas[j];
            let prod = lambdas
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(Complex64::new(1.0, 0.0), |acc, (_, &lk)| {
                    acc * (1.0 + Complex64::new(0.0, 2.0 * lk.im) / (lj - lk))
                });
            Complex64::new(0.0, lj.im / t) * prod
        })
        .collect())
}

fn axpy(x: &[Complex64], a: f64, y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

/// RK4 from `lambda_j(0) = mu_j`, with each grid interval split into equal
/// steps no longer than `dt`.
pub fn integrate_ode(rin: &ResolventInput, grid: &TimeGrid, dt: f64) -> Result<TrajectoryBundle> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("RK4 step must be positive, got {dt}")));
    }
    let weights = rin.weights.as_slice();
    let mut state: Vec<Complex64> = rin.mus.iter().map(|&m| Complex64::new(m, 0.0)).collect();
    let points = grid.points();
    let mut lambdas = vec![state.clone()];
    let mut diagnostics = Diagnostics {
        newton_iterations: vec![0],
        substeps: vec![0],
        min_distance: vec![min_pairwise_distance(&state).0],
        rejections: 0,
    };
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let steps = ((b - a) / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        for s in 0..steps {
            let t = a + s as f64 * h;
            let rhs = |z: &[Complex64], tt: f64| ode_rhs(z, tt, Some(weights));
            let k1 = rhs(&state, t)?;
            let k2 = rhs(&axpy(&state, h / 2.0, &k1), t + h / 2.0)?;
            let k3 = rhs(&axpy(&state, h / 2.0, &k2), t + h / 2.0)?;
            let k4 = rhs(&axpy(&state, h, &k3), t + h)?;
            for j in 0..state.len() {
                state[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        lambdas.push(state.clone());
        diagnostics.newton_iterations.push(0);
        diagnostics.substeps.push(steps);
        diagnostics.min_distance.push(min_pairwise_distance(&state).0);
    }
    Ok(TrajectoryBundle {
        grid: grid.clone(),
        lambdas,
        anchored: None,
        method: Method::Ode,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn initial_push() {
        let v = ode_rhs(&[c(-1.0, 0.0), c(1.0, 0.0)], 0.0, Some(&[0.5, 0.5])).unwrap();
        assert_eq!(v, vec![c(0.0, 0.5), c(0.0, 0.5)]);
        assert!(ode_rhs(&[c(-1.0, 0.0)], 0.0, None).is_err());
    }

    #[test]
    fn symmetric_pair_at_t_one() {
        let s3 = 3f64.sqrt();
        let lam = [c(s3 / 2.0, 0.5), c(-s3 / 2.0, 0.5)];
        let v = ode_rhs(&lam, 1.0, None).unwrap();
        // d/dt of (sqrt(4 - t^2) + i t)/2 at t = 1.
        let expected = c(-1.0 / (2.0 * s3), 0.5);
        assert!((v[0] - expected).norm() < 1e-14);
        assert!((v[1] - c(1.0 / (2.0 * s3), 0.5)).norm() < 1e-14);
    }

    #[test]
    fn single_eigenvalue_has_empty_product() {
        let v = ode_rhs(&[c(0.2, 0.7)], 2.0, None).unwrap();
        assert!((v[0] - c(0.0, 0.35)).norm() < 1e-16);
    }

    #[test]
    fn coincident_eigenvalues_are_singular() {
        let err = ode_rhs(&[c(0.0, 1.0), c(0.0, 1.0)], 1.0, None).unwrap_err();
        assert!(matches!(err, Error::Singularity { t, .. } if t == 1.0));
    }

    #[test]
    fn rk4_symmetric_pair() {
        let rin = ResolventInput::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let grid = TimeGrid::uniform(1.8, 18).unwrap();
        let b = integrate_ode(&rin, &grid, 1e-3).unwrap();
        for (&t, row) in b.times().iter().zip(&b.lambdas) {
            let s = (4.0 - t * t).sqrt();
            assert!((row[0] - c(-s / 2.0, t / 2.0)).norm() < 1e-6, "t={t}");
            assert!((row[1] - c(s / 2.0, t / 2.0)).norm() < 1e-6, "t={t}");
        }
        assert_eq!(b.method, Method::Ode);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let rin = ResolventInput::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let grid = TimeGrid::uniform(1.5, 1).unwrap();
        let exact = {
            let s = (4.0f64 - 2.25).sqrt();
            c(s / 2.0, 0.75)
        };
        let err = |dt: f64| (integrate_ode(&rin, &grid, dt).unwrap().last()[1] - exact).norm();
        let ratio = err(0.02) / err(0.01);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }
}
