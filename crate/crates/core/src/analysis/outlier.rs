use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DomainParams;
use crate::error::{Error, Result};
use crate::resolvent::t_star;

/// Classification of one spectrum against the outlier disk
/// `D(i t*, n^(eps/4) / sqrt(n t*))` and the bulk height `n^eps / (n t*^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub t: f64,
    pub t_star: f64,
    /// The unique eigenvalue inside the disk, if exactly one is.
    pub outlier_index: Option<usize>,
    /// The in-disk eigenvalue, or the one of largest imaginary part.
    pub outlier_value: Complex64,
    pub in_disk_count: usize,
    pub disk_radius: f64,
    pub in_disk: bool,
    pub bulk_bound: f64,
    /// Largest imaginary part among the eigenvalues other than the outlier
    /// (or other than the highest one when there is no unique outlier).
    pub bulk_max_im: f64,
    pub separated: bool,
}

pub fn classify_outlier(lambdas: &[Complex64], t: f64, params: &DomainParams) -> Result<OutlierReport> {
    if !(t > 1.0) {
        return Err(Error::Domain(format!("outlier classification needs t > 1, got {t}")));
    }
    if lambdas.is_empty() {
        return Err(Error::Empty("no eigenvalues to classify"));
    }
    let nf = params.nf();
    let ts = t_star(t)?;
    let center = Complex64::new(0.0, ts);
    let disk_radius = nf.powf(params.epsilon / 4.0) / (nf * ts).sqrt();
    let bulk_bound = nf.powf(params.epsilon) / (nf * ts * ts);

    let inside: Vec<usize> = (0..lambdas.len())
        .filter(|&j| (lambdas[j] - center).norm() < disk_radius)
        .collect();
    let highest = (0..lambdas.len())
        .max_by(|&a, &b| lambdas[a].im.total_cmp(&lambdas[b].im))
        .expect("non-empty");
    let outlier_index = (inside.len() == 1).then(|| inside[0]);
    let reference = outlier_index.unwrap_or(highest);
    let bulk_max_im = lambdas
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != reference)
        .map(|(_, z)| z.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let in_disk = outlier_index.is_some();
    let separated = in_disk && bulk_max_im < bulk_bound;
    Ok(OutlierReport {
        t,
        t_star: ts,
        outlier_index,
        outlier_value: lambdas[reference],
        in_disk_count: inside.len(),
        disk_radius,
        in_disk,
        bulk_bound,
        bulk_max_im,
        separated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> DomainParams {
        DomainParams::new(0.3, 0.2, 3.0, n).unwrap()
    }

    #[test]
    fn constructed_separated_spectrum() {
        let n = 50;
        let mut lambdas: Vec<Complex64> = (0..n - 1)
            .map(|k| Complex64::new(-1.0 + 2.0 * k as f64 / n as f64, 1e-9))
            .collect();
        lambdas.insert(17, Complex64::new(0.0, 1.5));
        let r = classify_outlier(&lambdas, 2.0, &params(n)).unwrap();
        assert_eq!(r.outlier_index, Some(17));
        assert!(r.separated && r.in_disk);
        assert_eq!(r.t_star, 1.5);
        assert_eq!(r.outlier_value, Complex64::new(0.0, 1.5));
        assert_eq!(r.bulk_max_im, 1e-9);
    }

    #[test]
    fn two_in_disk_is_not_separated() {
        let p = params(50);
        let r0 = classify_outlier(&[Complex64::new(0.0, 1.5)], 2.0, &p).unwrap();
        let off = r0.disk_radius / 3.0;
        let lambdas = [
            Complex64::new(off, 1.5),
            Complex64::new(-off, 1.5),
            Complex64::new(0.3, 1e-6),
        ];
        let r = classify_outlier(&lambdas, 2.0, &p).unwrap();
        assert_eq!(r.in_disk_count, 2);
        assert_eq!(r.outlier_index, None);
        assert!(!r.separated);
    }

    #[test]
    fn bulk_too_high_is_not_separated() {
        let p = params(50);
        let lambdas = [Complex64::new(0.0, 1.5), Complex64::new(0.2, 0.5)];
        let r = classify_outlier(&lambdas, 2.0, &p).unwrap();
        assert!(r.in_disk && !r.separated);
    }

    #[test]
    fn radius_and_bound_formulas() {
        let p = params(500);
        let r = classify_outlier(&[Complex64::new(0.0, 0.0)], 1.5, &p).unwrap();
        let ts: f64 = 1.5 - 1.0 / 1.5;
        assert!((r.disk_radius - 500f64.powf(0.075) / (500.0 * ts).sqrt()).abs() < 1e-15);
        assert!((r.bulk_bound - 500f64.powf(0.3) / (500.0 * ts * ts)).abs() < 1e-15);
    }

    #[test]
    fn requires_t_above_one() {
        assert!(classify_outlier(&[Complex64::new(0.0, 0.1)], 1.0, &params(10)).is_err());
        assert!(classify_outlier(&[Complex64::new(0.0, 0.1)], 0.5, &params(10)).is_err());
    }
}
