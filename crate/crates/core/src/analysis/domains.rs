//! Spectral domains in which the eigenvalues of `G_t` are confined with high
//! probability. Membership tests are pure arithmetic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resolvent::ETA_MAX;

/// `(epsilon, zeta, T, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub epsilon: f64,
    pub zeta: f64,
    /// Time horizon `T >= 2` separating the small- and large-time regimes.
    pub t_cap: f64,
    pub n: usize,
}

impl DomainParams {
    pub fn new(epsilon: f64, zeta: f64, t_cap: f64, n: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(Error::Config(format!("zeta must lie in (0, 1), got {zeta}")));
        }
        if !(t_cap >= 2.0) || !t_cap.is_finite() {
            return Err(Error::Config(format!("T must be at least 2, got {t_cap}")));
        }
        if n == 0 {
            return Err(Error::InvalidDimension {
                n,
                reason: "domain parameters need n >= 1",
            });
        }
        Ok(Self {
            epsilon,
            zeta,
            t_cap,
            n,
        })
    }

    /// Finite-size defaults `epsilon = 0.3`, `zeta = 0.2`, `T = 2`.
    pub fn defaults(n: usize) -> Result<Self> {
        Self::new(0.3, 0.2, 2.0, n)
    }

    pub(crate) fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `n^(-1 + zeta)`.
    pub fn r_height(&self) -> f64 {
        self.nf().powf(-1.0 + self.zeta)
    }

    /// `n^(-1 + epsilon)`.
    pub fn hyperbolic_bound(&self) -> f64 {
        self.nf().powf(-1.0 + self.epsilon)
    }
}

/// Strip `|E| < 3`, `n^(-1+zeta) <= eta < 1e4`.
pub fn in_s(z: Complex64, params: &DomainParams) -> bool {
    z.re.abs() < 3.0 && z.im >= params.r_height() && z.im < ETA_MAX
}

/// Elliptic region around `i t*`:
/// `E^2 + (eta - t*)^2 < n^eps / (n eta)`, `|E| < 3`, `0 <= eta < T`.
pub fn in_elliptic(z: Complex64, t: f64, params: &DomainParams) -> Result<bool> {
    if !(t > 0.0 && t < params.t_cap) {
        return Err(Error::Domain(format!(
            "elliptic domain needs t in (0, {}), got {t}",
            params.t_cap
        )));
    }
    Ok(elliptic_ratio(z, t, params) < 1.0 && z.re.abs() < 3.0 && z.im >= 0.0 && z.im < params.t_cap)
}

/// `(E^2 + (eta - t*)^2) / (n^eps / (n eta))`; below 1 inside the ellipse.
pub(crate) fn elliptic_ratio(z: Complex64, t: f64, params: &DomainParams) -> f64 {
    let ts = t - 1.0 / t;
    let lhs = z.re * z.re + (z.im - ts) * (z.im - ts);
    lhs * params.nf() * z.im / params.nf().powf(params.epsilon)
}

/// Hyperbolic region `eta E^2 < n^(-1+eps)`, `|E| < 3`, `0 <= eta < T`.
pub fn in_hyperbolic(z: Complex64, params: &DomainParams) -> bool {
    z.im * z.re * z.re < params.hyperbolic_bound()
        && z.re.abs() < 3.0
        && z.im >= 0.0
        && z.im < params.t_cap
}

/// Thin rectangle `|E| < 3`, `0 <= eta < n^(-1+zeta)`.
pub fn in_r(z: Complex64, params: &DomainParams) -> bool {
    z.re.abs() < 3.0 && z.im >= 0.0 && z.im < params.r_height()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(DomainParams::new(0.0, 0.2, 2.0, 10).is_err());
        assert!(DomainParams::new(0.3, 1.0, 2.0, 10).is_err());
        assert!(DomainParams::new(0.3, 0.2, 1.5, 10).is_err());
        assert!(DomainParams::new(0.3, 0.2, 2.0, 0).is_err());
        assert!(DomainParams::defaults(100).is_ok());
    }

    #[test]
    fn strip() {
        let p = DomainParams::new(0.1, 0.1, 2.0, 100).unwrap();
        assert!(in_s(c(0.0, 1.0), &p));
        assert!(!in_s(c(4.0, 1.0), &p));
        assert!(!in_s(c(0.5, 0.01), &p));
        assert!(in_s(c(0.5, 100f64.powf(-0.9)), &p));
    }

    #[test]
    fn elliptic() {
        let p = DomainParams::new(0.1, 0.1, 3.0, 1000).unwrap();
        let t = 2.0;
        let ts = 1.5;
        assert!(in_elliptic(c(0.0, ts), t, &p).unwrap());
        let bound = p.nf().powf(p.epsilon) / (p.nf() * ts);
        assert!(!in_elliptic(c(2.0 * bound.sqrt(), ts), t, &p).unwrap());
        assert!(in_elliptic(c(0.0, 1.0), 0.0, &p).is_err());
        assert!(in_elliptic(c(0.0, 1.0), 3.0, &p).is_err());
    }

    /// Number of sign changes of `eta (eta - t*)^2 - n^(eps - 1)` on the
    /// positive axis, located by a fine scan refined with bisection.
    fn crossings_on_axis(n: f64, eps: f64, t: f64) -> usize {
        let ts = t - 1.0 / t;
        let g = |eta: f64| eta * (eta - ts) * (eta - ts) - n.powf(eps - 1.0);
        let mut roots = Vec::new();
        let steps = 200_000;
        let top = 2.0 * ts.abs() + 1.0;
        let mut prev = (1e-15, g(1e-15));
        for k in 1..=steps {
            let eta = top * k as f64 / steps as f64;
            let val = g(eta);
            if val.signum() != prev.1.signum() {
                let (mut a, mut b) = (prev.0, eta);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if g(m).signum() == g(a).signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            prev = (eta, val);
        }
        roots.len()
    }

    #[test]
    fn elliptic_domain_splits_after_the_timescale() {
        // On E = 0 the domain is {eta : eta (eta - t*)^2 < n^(eps-1)}.
        // Two components means three boundary crossings: (0, a) and (b, c).
        let (n, eps): (f64, f64) = (1e6, 0.1);
        let t = 1.0 + n.powf(-1.0 / 3.0 + 0.05);
        assert_eq!(crossings_on_axis(n, eps, t), 3);
        // Well before the timescale the axis meets a single component.
        assert_eq!(crossings_on_axis(n, eps, 0.5), 1);

        // Same count from the membership test itself.
        let p = DomainParams::new(eps, 0.1, 3.0, 1_000_000).unwrap();
        let ts = t - 1.0 / t;
        let mut components = 0;
        let mut inside = false;
        for k in 1..200_000 {
            let eta = (2.0 * ts) * k as f64 / 200_000.0;
            let now = in_elliptic(c(0.0, eta), t, &p).unwrap();
            if now && !inside {
                components += 1;
            }
            inside = now;
        }
        assert_eq!(components, 2);
    }

    #[test]
    fn hyperbolic_and_r() {
        let p = DomainParams::new(0.1, 0.1, 2.0, 100).unwrap();
        assert!(in_hyperbolic(c(1.5, 0.0), &p));
        assert!(!in_hyperbolic(c(1.0, 1.0), &p));
        assert!(in_r(c(2.5, 0.0), &p));
        assert!(!in_r(c(0.0, 1.0), &p));
        assert!(!in_r(c(0.0, p.r_height()), &p));
        assert!(in_r(c(0.0, p.r_height() * (1.0 - 1e-12)), &p));
    }

    proptest! {
        #[test]
        fn elliptic_implies_hyperbolic(
            re in -3.0f64..3.0,
            im in 0.0f64..2.0,
            t in 0.01f64..1.99,
            eps in 0.05f64..0.9,
            n in 2usize..5000,
        ) {
            let p = DomainParams::new(eps, 0.5, 2.0, n).unwrap();
            let z = c(re, im);
            if in_elliptic(z, t, &p).unwrap() {
                prop_assert!(in_hyperbolic(z, &p));
            }
        }

        #[test]
        fn r_inside_hyperbolic_when_zeta_below_eps(
            re in -3.0f64..3.0,
            im in 0.0f64..0.5,
            eps in 0.5f64..0.95,
            frac in 0.01f64..0.99,
            n in 100usize..100_000,
        ) {
            // eta E^2 < 9 n^(-1+zeta) <= n^(-1+eps) needs n^(eps-zeta) >= 9,
            // so zeta is drawn below eps - ln 9 / ln n.
            let zeta = (eps - 9f64.ln() / (n as f64).ln()) * frac;
            let p = DomainParams::new(eps, zeta, 2.0, n).unwrap();
            let z = c(re, im);
            if in_r(z, &p) {
                prop_assert!(in_hyperbolic(z, &p));
            }
        }
    }
}
