//! Executable versions of the high-probability confinement and outlier
//! statements, plus the Monte Carlo experiments built on them.

mod checks;
mod domains;
mod experiments;
mod outlier;

pub use checks::{
    check_confinement, large_t_check, small_t_check, BoundReport, ConfinementReport, LargeTReport,
    SmallTReport, Violation,
};
pub use domains::{in_elliptic, in_hyperbolic, in_r, in_s, DomainParams};
pub use experiments::{
    emergence_scan, origin_grid, origin_histogram, origin_histogram_with, EmergenceCurve,
    OriginHistogram, ScanOptions, TrialFailure,
};
pub use outlier::{classify_outlier, OutlierReport};
