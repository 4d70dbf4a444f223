//! Large-time limits of the non-outlier trajectories: the eigenvalues of `H`
//! compressed to the orthogonal complement of `v`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::hermitian_eigenvalues;
use crate::error::{Error, Result};
use crate::rmt::{HermitianMatrix, UnitVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPoints {
    /// `n - 1` values, ascending.
    pub values: Vec<f64>,
}

/// Eigenvalues of `B* H B` where the columns of `B` are an orthonormal basis
/// of `v^perp`. The basis is the last `n - 1` columns of the Householder
/// reflector mapping `v` onto the first coordinate axis.
pub fn limit_points(h: &HermitianMatrix, v: &UnitVector) -> Result<LimitPoints> {
    let n = h.dim();
    if v.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.dim(),
        });
    }
    if n == 1 {
        return Ok(LimitPoints { values: vec![] });
    }
    let x = v.entries();
    let phase = if x[0].norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x[0] / x[0].norm()
    };
    // Reflector I - 2 w w* with w = (v - alpha e_1) / |v - alpha e_1|.
    let alpha = -phase;
    let mut w = x.to_vec();
    w[0] -= alpha;
    let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut w {
        *z /= wn;
    }
    // M = R H R via p = H w, q = p - (w* p) w, M = H - 2 w q* - 2 q w*.
    let p = h.apply(&w);
    let kappa: Complex64 = w.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
    let q: Vec<Complex64> = p.iter().zip(&w).map(|(pi, wi)| pi - kappa.re * wi).collect();
    let m = n - 1;
    let mut block = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let (a, b) = (i + 1, j + 1);
            block[i * m + j] = h.get(a, b) - 2.0 * (w[a] * q[b].conj() + q[a] * w[b].conj());
        }
        block[i * m + i].im = 0.0;
    }
    // Symmetrize exactly; the rank-two update is Hermitian up to rounding.
    for i in 0..m {
        for j in i + 1..m {
            let avg = 0.5 * (block[i * m + j] + block[j * m + i].conj());
            block[i * m + j] = avg;
            block[j * m + i] = avg.conj();
        }
    }
    let compressed = HermitianMatrix::new(m, block)?;
    Ok(LimitPoints {
        values: hermitian_eigenvalues(&compressed)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::hermitian_eigen;
    use crate::rmt::{sample_gue, sample_unit_vector};

    #[test]
    fn two_by_two() {
        let h = HermitianMatrix::diagonal(&[-1.0, 1.0]);
        let s = 0.5f64.sqrt();
        let v = UnitVector::normalized(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap();
        let lp = limit_points(&h, &v).unwrap();
        assert_eq!(lp.values.len(), 1);
        assert!(lp.values[0].abs() < 1e-15);
    }

    #[test]
    fn eigenvector_direction_removes_its_eigenvalue() {
        let h = sample_gue(12, 3).unwrap();
        let (mus, vecs) = hermitian_eigen(&h).unwrap();
        let v = UnitVector::normalized(vecs[0..12].to_vec()).unwrap();
        let lp = limit_points(&h, &v).unwrap();
        for (a, b) in lp.values.iter().zip(&mus[1..]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn limit_points_interlace() {
        let h = sample_gue(30, 8).unwrap();
        let v = sample_unit_vector(30, 8).unwrap();
        let (mus, _) = hermitian_eigen(&h).unwrap();
        let lp = limit_points(&h, &v).unwrap();
        for (k, nu) in lp.values.iter().enumerate() {
            assert!(mus[k] <= *nu && *nu <= mus[k + 1]);
        }
    }
}
