//! Scalar analytic functions of the model: the weighted resolvent
//! `W(z) = sum_j c_j / (mu_j - z)`, its derivative, the semicircle transform
//! continued through `(-2, 2)`, and the resonance height `t - 1/t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to an eigenvalue of `H` are rejected.
pub const POLE_TOL: f64 = 1e-13;

/// Above this many terms the resolvent sums are compensated.
const COMPENSATE_ABOVE: usize = 512;

/// Finite stand-in for the `N^100` upper edge of the strip domain.
pub const ETA_MAX: f64 = 1e4;

/// The `(mu_j, c_j)` pairs that determine `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventInput {
    pub mus: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ResolventInput {
    pub fn new(mus: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if mus.is_empty() {
            return Err(Error::Empty("resolvent input has no eigenvalues"));
        }
        if mus.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: mus.len(),
                got: weights.len(),
            });
        }
        if mus.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("eigenvalues must be strictly increasing".into()));
        }
        if weights.iter().any(|&c| !(c >= 0.0)) {
            return Err(Error::Config("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { mus, weights })
    }

    pub fn dim(&self) -> usize {
        self.mus.len()
    }

    /// Index and distance of the eigenvalue nearest to `z`.
    pub fn nearest_pole(&self, z: Complex64) -> (usize, f64) {
        // mus are sorted: locate by bisection on Re z.
        let idx = self.mus.partition_point(|&m| m < z.re);
        let mut best = (0, f64::INFINITY);
        for j in idx.saturating_sub(1)..(idx + 1).min(self.dim()) {
            let d = (z - self.mus[j]).norm();
            if d < best.1 {
                best = (j, d);
            }
        }
        best
    }

    fn guard(&self, z: Complex64) -> Result<()> {
        let (index, distance) = self.nearest_pole(z);
        if distance < POLE_TOL || !distance.is_finite() {
            return Err(Error::PoleProximity {
                index,
                distance,
                re: z.re,
                im: z.im,
            });
        }
        Ok(())
    }

    /// `W(z)`, `W'(z)` and the sum of term magnitudes of `W` in one pass.
    /// No pole check.
    pub(crate) fn eval(&self, z: Complex64) -> ResolventEval {
        self.eval_diffs(|_, mu| mu - z)
    }

    /// As [`eval`](Self::eval) at `mu_p + delta`, with every denominator
    /// formed as `(mu_k - mu_p) - delta` so that `delta` keeps its full
    /// relative precision.
    pub(crate) fn eval_offset(&self, at: PoleOffset) -> ResolventEval {
        let mu_p = self.mus[at.pole];
        self.eval_diffs(|k, mu| if k == at.pole { -at.delta } else { (mu - mu_p) - at.delta })
    }

    fn eval_diffs(&self, diff: impl Fn(usize, f64) -> Complex64) -> ResolventEval {
        let mut w = Sum::new(self.dim() > COMPENSATE_ABOVE);
        let mut dw = Sum::new(self.dim() > COMPENSATE_ABOVE);
        let mut abs_w = 0.0;
        let mut abs_dw = 0.0;
        for (k, (&mu, &c)) in self.mus.iter().zip(&self.weights).enumerate() {
            let r = diff(k, mu).inv();
            let a = c * r;
            w.add(a);
            dw.add(a * r);
            abs_w += a.norm();
            abs_dw += c * r.norm_sqr();
        }
        ResolventEval {
            w: w.value(),
            dw: dw.value(),
            abs_w,
            abs_dw,
        }
    }
}

/// A point written as `mu_pole + delta`. Near a pole this resolves the
/// point far below the spacing of doubles around `mu_pole`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleOffset {
    pub pole: usize,
    pub delta: Complex64,
}

impl PoleOffset {
    /// Anchors `z` at its nearest pole.
    pub fn nearest(rin: &ResolventInput, z: Complex64) -> Self {
        let pole = rin.nearest_pole(z).0;
        Self {
            pole,
            delta: z - rin.mus[pole],
        }
    }

    /// Re-anchors at `pole`.
    pub fn rebase(self, rin: &ResolventInput, pole: usize) -> Self {
        if pole == self.pole {
            return self;
        }
        Self {
            pole,
            delta: (rin.mus[self.pole] - rin.mus[pole]) + self.delta,
        }
    }

    /// The point itself, rounded to a double.
    pub fn value(self, rin: &ResolventInput) -> Complex64 {
        rin.mus[self.pole] + self.delta
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ResolventEval {
    pub w: Complex64,
    pub dw: Complex64,
    pub abs_w: f64,
    pub abs_dw: f64,
}

/// Plain or Neumaier-compensated complex accumulator.
struct Sum {
    compensated: bool,
    sum: Complex64,
    carry: Complex64,
}

impl Sum {
    fn new(compensated: bool) -> Self {
        Self {
            compensated,
            sum: Complex64::new(0.0, 0.0),
            carry: Complex64::new(0.0, 0.0),
        }
    }

    #[inline]
    fn add(&mut self, x: Complex64) {
        if !self.compensated {
            self.sum += x;
            return;
        }
        let (re, cre) = two_sum(self.sum.re, x.re);
        let (im, cim) = two_sum(self.sum.im, x.im);
        self.sum = Complex64::new(re, im);
        self.carry += Complex64::new(cre, cim);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, err)
}

/// `W(z) = sum_j c_j / (mu_j - z)`.
pub fn weighted_resolvent(rin: &ResolventInput, z: Complex64) -> Result<Complex64> {
    rin.guard(z)?;
    Ok(rin.eval(z).w)
}

/// `W` at a point given relative to a pole.
pub fn weighted_resolvent_offset(rin: &ResolventInput, at: PoleOffset) -> Result<Complex64> {
    if at.pole >= rin.dim() {
        return Err(Error::DimensionMismatch {
            expected: rin.dim(),
            got: at.pole + 1,
        });
    }
    rin.guard(at.value(rin))?;
    if at.delta.norm() < POLE_TOL {
        return Err(Error::PoleProximity {
            index: at.pole,
            distance: at.delta.norm(),
            re: at.value(rin).re,
            im: at.value(rin).im,
        });
    }
    Ok(rin.eval_offset(at).w)
}

/// `W'(z) = sum_j c_j / (mu_j - z)^2`.
pub fn weighted_resolvent_deriv(rin: &ResolventInput, z: Complex64) -> Result<Complex64> {
    rin.guard(z)?;
    Ok(rin.eval(z).dw)
}

/// `(-z + sqrt(z^2 - 4)) / 2` with the root of positive imaginary part, i.e.
/// the semicircle Stieltjes transform on the upper half-plane continued
/// holomorphically through `(-2, 2)`. Undefined on the rays `|x| >= 2`.
pub fn m_frak(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re.abs() >= 2.0 {
        return Err(Error::Domain(format!(
            "{} lies on the branch cut (-inf, -2] U [2, inf)",
            z.re
        )));
    }
    let disc = z * z - 4.0;
    let root = if disc.im == 0.0 && disc.re <= 0.0 {
        Complex64::new(0.0, (-disc.re).sqrt())
    } else {
        let r = disc.sqrt();
        if r.im < 0.0 {
            -r
        } else {
            r
        }
    };
    Ok((root - z) / 2.0)
}

/// Resonance height `t - 1/t`.
pub fn t_star(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t_star needs t > 0, got {t}")));
    }
    Ok(t - 1.0 / t)
}

/// Per-point comparison of `W` against the semicircle transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLawReport {
    pub grid: Vec<Complex64>,
    pub raw_error: Vec<f64>,
    /// `raw * sqrt(n eta) * (1 + eta^2)^(3/4)`.
    pub normalized_error: Vec<f64>,
    pub sup_normalized: f64,
    pub n: usize,
    pub zeta: f64,
}

/// Lower edge `n^(-1 + zeta)` of the strip domain.
pub fn strip_eta_min(n: usize, zeta: f64) -> f64 {
    (n as f64).powf(-1.0 + zeta)
}

/// Membership in the strip `|E| < 3, n^(-1+zeta) <= eta < ETA_MAX`, with
/// the reason for rejection.
pub fn strip_violation(z: Complex64, n: usize, zeta: f64) -> Option<String> {
    let eta_min = strip_eta_min(n, zeta);
    if !(z.re.abs() < 3.0) {
        Some(format!("|E| = {} is not below 3", z.re.abs()))
    } else if !(z.im >= eta_min) {
        Some(format!("eta = {} is below n^(-1+zeta) = {eta_min}", z.im))
    } else if !(z.im < ETA_MAX) {
        Some(format!("eta = {} is not below {ETA_MAX}", z.im))
    } else {
        None
    }
}

/// Measures `|W(z) - m(z)|` on a grid of the strip domain for dimension `n`.
/// Diagnostic only; no pass/fail here.
pub fn local_law_error(
    rin: &ResolventInput,
    grid: &[Complex64],
    n: usize,
    zeta: f64,
) -> Result<LocalLawReport> {
    if grid.is_empty() {
        return Err(Error::Empty("local-law grid"));
    }
    for (index, &z) in grid.iter().enumerate() {
        if let Some(reason) = strip_violation(z, n, zeta) {
            return Err(Error::OutsideDomain { index, reason });
        }
    }
    let mut raw_error = Vec::with_capacity(grid.len());
    let mut normalized_error = Vec::with_capacity(grid.len());
    for &z in grid {
        let raw = (weighted_resolvent(rin, z)? - m_frak(z)?).norm();
        let eta = z.im;
        raw_error.push(raw);
        normalized_error.push(raw * (n as f64 * eta).sqrt() * (1.0 + eta * eta).powf(0.75));
    }
    // First maximum in index order.
    let sup_normalized = normalized_error
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LocalLawReport {
        grid: grid.to_vec(),
        raw_error,
        normalized_error,
        sup_normalized,
        n,
        zeta,
    })
}

/// Grid of `e_points` equispaced energies in `[-e_max, e_max]` times
/// `eta_points` log-spaced heights in `[eta_lo, eta_hi]`, row-major in eta.
pub fn local_law_grid(
    e_max: f64,
    e_points: usize,
    eta_lo: f64,
    eta_hi: f64,
    eta_points: usize,
) -> Vec<Complex64> {
    let es: Vec<f64> = match e_points {
        0 => vec![],
        1 => vec![0.0],
        k => (0..k)
            .map(|i| -e_max + 2.0 * e_max * i as f64 / (k - 1) as f64)
            .collect(),
    };
    let etas: Vec<f64> = match eta_points {
        0 => vec![],
        1 => vec![eta_lo],
        k => {
            let (a, b) = (eta_lo.ln(), eta_hi.ln());
            (0..k)
                .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
                .collect()
        }
    };
    etas.iter()
        .flat_map(|&eta| es.iter().map(move |&e| Complex64::new(e, eta)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toy() -> ResolventInput {
        ResolventInput::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn single_term() {
        let rin = ResolventInput::new(vec![0.7], vec![1.0]).unwrap();
        let z = c(0.2, 0.9);
        let w = weighted_resolvent(&rin, z).unwrap();
        assert!((w - (0.7 - z).inv()).norm() < 1e-16);
        let dw = weighted_resolvent_deriv(&rin, c(0.7, 1.0)).unwrap();
        assert!((dw - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn toy_values() {
        let w = weighted_resolvent(&toy(), c(0.0, 1.0)).unwrap();
        assert!((w - c(0.0, 0.5)).norm() < 1e-15);
        // z = i is a critical point of W.
        let dw = weighted_resolvent_deriv(&toy(), c(0.0, 1.0)).unwrap();
        assert!(dw.norm() < 1e-15);
    }

    #[test]
    fn offset_form_agrees_and_resolves_near_poles() {
        let rin = ResolventInput::new(vec![-0.3, 0.7, 0.9], vec![0.2, 0.5, 0.3]).unwrap();
        let z = c(0.1, 0.2);
        let at = PoleOffset::nearest(&rin, z);
        assert_eq!(at.pole, 0);
        let direct = weighted_resolvent(&rin, z).unwrap();
        assert!((weighted_resolvent_offset(&rin, at).unwrap() - direct).norm() < 1e-14);
        let moved = at.rebase(&rin, 2);
        assert!((moved.value(&rin) - z).norm() < 1e-15);
        // A point 1e-12 from mu_2 along the real axis is not representable
        // as a double to that relative accuracy; the offset form is exact.
        let near = PoleOffset {
            pole: 1,
            delta: c(1e-12 / 3.0, 1e-12),
        };
        let w = weighted_resolvent_offset(&rin, near).unwrap();
        let expected = 0.5 / -near.delta + 0.2 / (c(-1.0, 0.0) - near.delta) + 0.3 / (c(0.2, 0.0) - near.delta);
        assert!((w - expected).norm() <= 1e-15 * expected.norm());
        assert!(weighted_resolvent_offset(&rin, PoleOffset { pole: 1, delta: c(1e-14, 0.0) }).is_err());
        assert!(weighted_resolvent_offset(&rin, PoleOffset { pole: 3, delta: c(1.0, 0.0) }).is_err());
    }

    #[test]
    fn pole_proximity_is_rejected() {
        let rin = toy();
        assert!(matches!(
            weighted_resolvent(&rin, c(1.0, 0.0)),
            Err(Error::PoleProximity { index: 1, .. })
        ));
        assert!(weighted_resolvent(&rin, c(-1.0, 1e-14)).is_err());
        assert!(weighted_resolvent(&rin, c(-1.0, 1e-12)).is_ok());
    }

    #[test]
    fn input_validation() {
        assert!(ResolventInput::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(ResolventInput::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(ResolventInput::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(ResolventInput::new(vec![0.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn m_frak_values() {
        assert!((m_frak(c(0.0, 1.5)).unwrap() - c(0.0, 0.5)).norm() < 1e-15);
        let expected = c(0.0, 2f64.sqrt() - 1.0);
        assert!((m_frak(c(0.0, 2.0)).unwrap() - expected).norm() < 1e-15);
        assert!((m_frak(c(0.0, 1.0)).unwrap() - c(0.0, (5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn m_frak_domain() {
        assert!(m_frak(c(2.0, 0.0)).is_err());
        assert!(m_frak(c(-3.5, 0.0)).is_err());
        assert!(m_frak(c(2.0, -0.0)).is_err());
        // Inside the interval the function is defined and has Im > 0.
        let m = m_frak(c(0.5, 0.0)).unwrap();
        assert!(m.im > 0.0);
        // Lower half-plane below the cut: finite and on the continued branch.
        let m = m_frak(c(0.0, -0.5)).unwrap();
        assert!((m * m + c(0.0, -0.5) * m + 1.0).norm() < 1e-14);
        assert!(m.im > 0.0);
    }

    #[test]
    fn t_star_values() {
        assert_eq!(t_star(1.0).unwrap(), 0.0);
        assert_eq!(t_star(2.0).unwrap(), 1.5);
        assert_eq!(t_star(0.5).unwrap(), -1.5);
        assert!(t_star(0.0).is_err());
        assert!(t_star(-1.0).is_err());
    }

    #[test]
    fn resonance_identity_below_and_above_one() {
        for t in [0.2, 0.5, 0.9, 1.01, 1.5, 2.0, 10.0] {
            let m = m_frak(c(0.0, t_star(t).unwrap())).unwrap();
            assert!((m - c(0.0, 1.0 / t)).norm() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn local_law_toy() {
        let r = local_law_error(&toy(), &[c(0.0, 1.0)], 2, 0.1).unwrap();
        let raw = (0.5 - (5f64.sqrt() - 1.0) / 2.0f64).abs();
        assert!((r.raw_error[0] - raw).abs() < 1e-14);
        assert!((r.normalized_error[0] - 0.2807).abs() < 1e-4);
        assert!((r.normalized_error[0] - raw * 2f64.sqrt() * 2f64.powf(0.75)).abs() < 1e-14);
        assert_eq!(r.sup_normalized, r.normalized_error[0]);
    }

    #[test]
    fn local_law_far_away() {
        let rin = ResolventInput::new(vec![0.3], vec![1.0]).unwrap();
        let r = local_law_error(&rin, &[c(0.5, 100.0), c(-2.0, 100.0)], 10, 0.5).unwrap();
        assert!(r.raw_error.iter().all(|&e| e <= 2.0 / 100.0));
    }

    #[test]
    fn local_law_rejects_points_outside_strip() {
        let grid = [c(0.0, 1.0), c(3.5, 1.0)];
        assert!(matches!(
            local_law_error(&toy(), &grid, 100, 0.1),
            Err(Error::OutsideDomain { index: 1, .. })
        ));
        let grid = [c(0.0, 0.001)];
        assert!(matches!(
            local_law_error(&toy(), &grid, 100, 0.1),
            Err(Error::OutsideDomain { index: 0, .. })
        ));
        assert!(matches!(local_law_error(&toy(), &[], 100, 0.1), Err(Error::Empty(_))));
    }

    #[test]
    fn grid_shape() {
        let g = local_law_grid(2.5, 10, 0.01, 1.0, 5);
        assert_eq!(g.len(), 50);
        assert!((g[0].im - 0.01).abs() < 1e-15 && (g[49].im - 1.0).abs() < 1e-14);
        assert_eq!(g[0].re, -2.5);
        assert_eq!(g[9].re, 2.5);
    }

    #[test]
    fn compensated_sum_matches_plain() {
        let n = 600;
        let mus: Vec<f64> = (0..n).map(|j| -2.0 + 4.0 * j as f64 / n as f64).collect();
        let weights = vec![1.0 / n as f64; n];
        let rin = ResolventInput::new(mus.clone(), weights.clone()).unwrap();
        let z = c(0.1, 0.05);
        let plain: Complex64 = mus.iter().zip(&weights).map(|(m, w)| w / (m - z)).sum();
        assert!((weighted_resolvent(&rin, z).unwrap() - plain).norm() < 1e-12);
    }
}
