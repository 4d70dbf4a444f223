//! Brute-force spectrum of `G_t` as the roots of
//! `P(z) = prod_j (mu_j - z) + i t sum_j c_j prod_{k != j} (mu_k - z)`,
//! found by Durand-Kerner (Weierstrass) iteration. `P` is always evaluated
//! in this product/sum form, never through expanded coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 1000;

fn eval_p(mus: &[f64], weights: &[f64], t: f64, z: Complex64) -> Complex64 {
    let n = mus.len();
    let a: Vec<Complex64> = mus.iter().map(|&m| m - z).collect();
    // suffix[j] = prod_{k > j} a_k
    let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] * a[j];
    }
    let mut prefix = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        sum += weights[j] * prefix * suffix[j + 1];
        prefix *= a[j];
    }
    prefix + Complex64::new(0.0, t) * sum
}

/// All `n` eigenvalues of `G_t`, unordered.
pub fn oracle_eigen(mus: &[f64], weights: &[f64], t: f64) -> Result<Vec<Complex64>> {
    let n = mus.len();
    if n == 0 {
        return Err(Error::Empty("oracle needs at least one eigenvalue"));
    }
    if n > ORACLE_MAX_DIM {
        return Err(Error::InvalidDimension {
            n,
            reason: "polynomial oracle is limited to n <= 64",
        });
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("oracle needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(mus.iter().map(|&m| Complex64::new(m, 0.0)).collect());
    }

    // Every root lies in [mu_1, mu_n] x [0, t]; start on a circle around that box.
    let (lo, hi) = (mus[0], mus[n - 1]);
    let center = Complex64::new(0.5 * (lo + hi), 0.5 * t);
    let radius = 1.0 + 1.5 * Complex64::new(0.5 * (hi - lo), 0.5 * t).norm();
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| center + Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let scale = roots
        .iter()
        .map(|&z| eval_p(mus, weights, t, z).norm())
        .fold(0.0, f64::max);
    // Leading coefficient of P is (-1)^n.
    let lead = if n % 2 == 0 { 1.0 } else { -1.0 };

    let mut converged_sweeps = 0;
    let mut max_correction = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        max_correction = 0.0;
        for i in 0..n {
            let zi = roots[i];
            let denom = roots
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .fold(Complex64::new(lead, 0.0), |acc, (_, &zk)| acc * (zi - zk));
            let corr = eval_p(mus, weights, t, zi) / denom;
            if corr.re.is_finite() && corr.im.is_finite() {
                roots[i] = zi - corr;
                max_correction = f64::max(max_correction, corr.norm() / (1.0 + zi.norm()));
            }
        }
        if max_correction < 1e-15 {
            // One extra sweep once converged to settle the last digits.
            converged_sweeps += 1;
            if converged_sweeps >= 2 {
                break;
            }
        }
    }
    let residual_ok = roots
        .iter()
        .all(|&z| eval_p(mus, weights, t, z).norm() <= 1e-10 * scale);
    if converged_sweeps == 0 || !residual_ok {
        return Err(Error::OracleNonConvergence {
            sweeps: MAX_SWEEPS,
            max_correction,
        });
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::match_unordered;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric_pair() {
        let roots = oracle_eigen(&[-1.0, 1.0], &[0.5, 0.5], 1.0).unwrap();
        let s3 = 3f64.sqrt();
        let m = match_unordered(&roots, &[c(s3 / 2.0, 0.5), c(-s3 / 2.0, 0.5)]);
        assert!(m.max_deviation < 1e-13);
    }

    #[test]
    fn unperturbed() {
        let mus = [-0.3, 0.1, 0.4];
        let roots = oracle_eigen(&mus, &[0.2, 0.3, 0.5], 0.0).unwrap();
        assert_eq!(roots, mus.iter().map(|&m| c(m, 0.0)).collect::<Vec<_>>());
    }

    #[test]
    fn decoupled() {
        for t in [0.3, 1.0, 4.0] {
            let roots = oracle_eigen(&[-0.5, 0.7], &[1.0, 0.0], t).unwrap();
            let m = match_unordered(&roots, &[c(-0.5, t), c(0.7, 0.0)]);
            assert!(m.max_deviation < 1e-12, "t={t}");
        }
    }

    #[test]
    fn dimension_limit() {
        let mus: Vec<f64> = (0..65).map(|k| k as f64).collect();
        let w = vec![1.0 / 65.0; 65];
        assert!(matches!(
            oracle_eigen(&mus, &w, 1.0),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn trace_of_roots() {
        let mus = [-1.2, -0.4, 0.1, 0.9, 1.6];
        let w = [0.1, 0.3, 0.2, 0.25, 0.15];
        let t = 0.8;
        let roots = oracle_eigen(&mus, &w, t).unwrap();
        let sum: Complex64 = roots.iter().sum();
        assert!((sum - c(mus.iter().sum(), t)).norm() < 1e-12);
    }
}
