//! Report-only checks of a computed bundle against the high-probability
//! confinement statements. Thresholds are applied by callers.

use serde::{Deserialize, Serialize};

use super::domains::{elliptic_ratio, in_elliptic, in_hyperbolic, in_r};
use super::DomainParams;
use crate::trajectory::TrajectoryBundle;

/// One offending eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

const MAX_RECORDED: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub checked: usize,
    /// Points outside `E_{t,eps} U R_zeta`.
    pub elliptic_violations: usize,
    /// Points outside `H_eps`.
    pub hyperbolic_violations: usize,
    /// Smallest relative slack to the elliptic-or-R boundary (negative if violated).
    pub worst_elliptic_margin: f64,
    /// Smallest relative slack `1 - eta E^2 / n^(-1+eps)`.
    pub worst_hyperbolic_margin: f64,
    pub examples: Vec<Violation>,
}

/// Membership of every eigenvalue at every grid time in `(0, T)`.
pub fn check_confinement(bundle: &TrajectoryBundle, params: &DomainParams) -> ConfinementReport {
    let mut report = ConfinementReport {
        checked: 0,
        elliptic_violations: 0,
        hyperbolic_violations: 0,
        worst_elliptic_margin: f64::INFINITY,
        worst_hyperbolic_margin: f64::INFINITY,
        examples: vec![],
    };
    let r_height = params.r_height();
    let h_bound = params.hyperbolic_bound();
    for (&t, row) in bundle.times().iter().zip(&bundle.lambdas) {
        if !(t > 0.0 && t < params.t_cap) {
            continue;
        }
        for (j, &z) in row.iter().enumerate() {
            report.checked += 1;
            let ell = in_elliptic(z, t, params).unwrap_or(false) || in_r(z, params);
            let hyp = in_hyperbolic(z, params);
            let ell_margin = (1.0 - elliptic_ratio(z, t, params)).max(1.0 - z.im / r_height);
            let hyp_margin = 1.0 - z.im * z.re * z.re / h_bound;
            report.worst_elliptic_margin = report.worst_elliptic_margin.min(ell_margin);
            report.worst_hyperbolic_margin = report.worst_hyperbolic_margin.min(hyp_margin);
            if !ell {
                report.elliptic_violations += 1;
            }
            if !hyp {
                report.hyperbolic_violations += 1;
            }
            if (!ell || !hyp) && report.examples.len() < MAX_RECORDED {
                report.examples.push(Violation { t, j, re: z.re, im: z.im });
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub checked: usize,
    pub violations: usize,
    /// Smallest `1 - value / bound` (negative if violated).
    pub worst_margin: f64,
    pub examples: Vec<Violation>,
}

impl BoundReport {
    fn new() -> Self {
        Self {
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            examples: vec![],
        }
    }

    fn record(&mut self, t: f64, j: usize, z: num_complex::Complex64, value: f64, bound: f64) {
        self.checked += 1;
        self.worst_margin = self.worst_margin.min(1.0 - value / bound);
        if !(value < bound) {
            self.violations += 1;
            if self.examples.len() < MAX_RECORDED {
                self.examples.push(Violation { t, j, re: z.re, im: z.im });
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallTReport {
    /// `Im lambda < n^(-1/3+eps)` for `t < 1 + n^(-1/3-eps)`.
    pub below_timescale: BoundReport,
    /// `Im lambda < max(n^eps / (n t*^2), n^zeta / n)` for `t < 1 - n^(-1/3+eps)`.
    pub well_below_timescale: BoundReport,
}

pub fn small_t_check(bundle: &TrajectoryBundle, params: &DomainParams) -> SmallTReport {
    let nf = params.nf();
    let t_edge = 1.0 + nf.powf(-1.0 / 3.0 - params.epsilon);
    let t_early = 1.0 - nf.powf(-1.0 / 3.0 + params.epsilon);
    let height = nf.powf(-1.0 / 3.0 + params.epsilon);
    let mut below = BoundReport::new();
    let mut early = BoundReport::new();
    for (&t, row) in bundle.times().iter().zip(&bundle.lambdas) {
        if !(t > 0.0) {
            continue;
        }
        if t < t_edge {
            for (j, &z) in row.iter().enumerate() {
                below.record(t, j, z, z.im, height);
            }
        }
        if t < t_early {
            let ts = t - 1.0 / t;
            let bound = (nf.powf(params.epsilon) / (nf * ts * ts)).max(nf.powf(params.zeta) / nf);
            for (j, &z) in row.iter().enumerate() {
                early.record(t, j, z, z.im, bound);
            }
        }
    }
    SmallTReport {
        below_timescale: below,
        well_below_timescale: early,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeTReport {
    /// Times in `[T, t_max]` that were inspected.
    pub times_checked: usize,
    /// `|lambda_out - i t*| < n^(-1/2+eps)`, with the outlier taken as the
    /// eigenvalue of largest imaginary part.
    pub outlier: BoundReport,
    /// All other eigenvalues in `R_zeta`.
    pub bulk: BoundReport,
    pub max_outlier_distance: f64,
}

pub fn large_t_check(bundle: &TrajectoryBundle, params: &DomainParams, t_max: f64) -> LargeTReport {
    let nf = params.nf();
    let radius = nf.powf(-0.5 + params.epsilon);
    let r_height = params.r_height();
    let mut report = LargeTReport {
        times_checked: 0,
        outlier: BoundReport::new(),
        bulk: BoundReport::new(),
        max_outlier_distance: 0.0,
    };
    for (&t, row) in bundle.times().iter().zip(&bundle.lambdas) {
        if t < params.t_cap || t > t_max {
            continue;
        }
        report.times_checked += 1;
        let ts = t - 1.0 / t;
        let out = (0..row.len())
            .max_by(|&a, &b| row[a].im.total_cmp(&row[b].im))
            .expect("non-empty row");
        let dist = (row[out] - num_complex::Complex64::new(0.0, ts)).norm();
        report.max_outlier_distance = report.max_outlier_distance.max(dist);
        report.outlier.record(t, out, row[out], dist, radius);
        for (j, &z) in row.iter().enumerate() {
            if j == out {
                continue;
            }
            // R_zeta also needs |E| < 3; fold it into the ratio.
            let value = if z.re.abs() < 3.0 && z.im >= 0.0 { z.im } else { f64::INFINITY };
            report.bulk.record(t, j, z, value, r_height);
        }
    }
    report
}
