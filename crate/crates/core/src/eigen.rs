//! Hermitian eigensolver: Householder reduction to a complex tridiagonal
//! matrix, a diagonal phase change making it real symmetric, then implicit
//! QL with Wilkinson shifts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rmt::{HermitianMatrix, UnitVector};

/// Total QL iterations allowed, per unit of dimension.
pub const SWEEPS_PER_DIM: usize = 30;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Householder reflectors `I - 2 w w*` acting on trailing coordinates.
struct Reduction {
    n: usize,
    /// Reflector `k` acts on coordinates `k + 1..n`; `None` means identity.
    reflectors: Vec<Option<Vec<Complex64>>>,
    diag: Vec<f64>,
    /// Real, nonnegative subdiagonal after the phase change.
    offdiag: Vec<f64>,
    /// Phases `d_k` with `T = D T_real D*`.
    phases: Vec<Complex64>,
}

fn tridiagonalize(h: &HermitianMatrix) -> Reduction {
    let n = h.dim();
    let mut a = h.entries().to_vec();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut sub = vec![ZERO; n.saturating_sub(1)];

    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x: Vec<Complex64> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if m == 1 || tail == 0.0 {
            sub[k] = x[0];
            reflectors.push(None);
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut w = x;
        w[0] -= alpha;
        let wnorm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut w {
            *z /= wnorm;
        }
        sub[k] = alpha;

        // Trailing block B = a[k+1.., k+1..]; B <- (I - 2ww*) B (I - 2ww*).
        let off = k + 1;
        let p: Vec<Complex64> = (0..m)
            .map(|i| {
                let row = &a[(off + i) * n + off..(off + i) * n + n];
                row.iter().zip(&w).map(|(b, wj)| b * wj).sum()
            })
            .collect();
        let kappa: Complex64 = w.iter().zip(&p).map(|(wi, pi)| wi.conj() * pi).sum();
        let q: Vec<Complex64> = p.iter().zip(&w).map(|(pi, wi)| pi - kappa.re * wi).collect();
        for i in 0..m {
            let wi = w[i];
            let qi = q[i];
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for j in 0..m {
                row[j] -= 2.0 * (wi * q[j].conj() + qi * w[j].conj());
            }
        }
        // Column k below the subdiagonal is now (alpha, 0, ..., 0).
        for i in 0..m {
            a[(off + i) * n + k] = if i == 0 { alpha } else { ZERO };
            a[k * n + off + i] = a[(off + i) * n + k].conj();
        }
        reflectors.push(Some(w));
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let e = sub[k];
        let r = e.norm();
        offdiag[k] = r;
        phases[k + 1] = if r == 0.0 { phases[k] } else { phases[k] * (e / r) };
    }
    Reduction {
        n,
        reflectors,
        diag,
        offdiag,
        phases,
    }
}

impl Reduction {
    /// Returns `x <- Q* x` where `A = Q T Q*`.
    fn apply_qh(&self, x: &mut [Complex64]) {
        for (k, r) in self.reflectors.iter().enumerate() {
            if let Some(w) = r {
                reflect(w, &mut x[k + 1..]);
            }
        }
    }

    /// Dense `Q D`, column-major.
    fn basis(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut q = vec![ZERO; n * n];
        for j in 0..n {
            q[j * n + j] = Complex64::new(1.0, 0.0);
        }
        // Q = H_0 H_1 ... ; accumulate backwards on each column.
        for (k, r) in self.reflectors.iter().enumerate().rev() {
            if let Some(w) = r {
                for j in k + 1..n {
                    reflect(w, &mut q[j * n + k + 1..(j + 1) * n]);
                }
            }
        }
        for j in 0..n {
            let d = self.phases[j];
            for z in &mut q[j * n..(j + 1) * n] {
                *z *= d;
            }
        }
        q
    }
}

fn reflect(w: &[Complex64], x: &mut [Complex64]) {
    let s: Complex64 = w.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    for (xi, wi) in x.iter_mut().zip(w) {
        *xi -= 2.0 * s * wi;
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix. `rotate(i, c, s)`
/// receives every Givens rotation acting on columns `(i, i + 1)` of the
/// eigenvector matrix. Eigenvalues come back unsorted in `d`.
fn tql(d: &mut [f64], offdiag: &[f64], mut rotate: impl FnMut(usize, f64, f64)) -> Result<()> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(offdiag);
    let cap = SWEEPS_PER_DIM * n.max(1);
    let mut total = 0usize;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            loop {
                total += 1;
                if total > cap {
                    return Err(Error::EigenNonConvergence {
                        index: l,
                        iterations: total,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate(i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_order(d: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    idx
}

/// Full eigendecomposition: ascending eigenvalues and orthonormal
/// eigenvectors, column-major (`vecs[j * n..(j + 1) * n]` is `u_j`).
pub fn hermitian_eigen(h: &HermitianMatrix) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let n = h.dim();
    let red = tridiagonalize(h);
    let mut d = red.diag.clone();
    // Real eigenvectors of the tridiagonal matrix, stored column-major.
    let mut z = vec![0.0; n * n];
    for j in 0..n {
        z[j * n + j] = 1.0;
    }
    tql(&mut d, &red.offdiag, |i, c, s| {
        let (left, right) = z.split_at_mut((i + 1) * n);
        let zi = &mut left[i * n..];
        let zi1 = &mut right[..n];
        for k in 0..n {
            let h = zi1[k];
            zi1[k] = s * zi[k] + c * h;
            zi[k] = c * zi[k] - s * h;
        }
    })?;
    let basis = red.basis();
    let order = sort_order(&d);
    let mut vecs = vec![ZERO; n * n];
    for (col, &j) in order.iter().enumerate() {
        let zj = &z[j * n..(j + 1) * n];
        let out = &mut vecs[col * n..(col + 1) * n];
        for (m, &zm) in zj.iter().enumerate() {
            if zm == 0.0 {
                continue;
            }
            let bm = &basis[m * n..(m + 1) * n];
            for (o, b) in out.iter_mut().zip(bm) {
                *o += b * zm;
            }
        }
    }
    let mus = order.iter().map(|&j| d[j]).collect();
    Ok((mus, vecs))
}

/// Ascending eigenvalues with the weights `|<u_j|v>|^2`, without forming the
/// eigenvectors.
pub fn hermitian_eigen_weights(h: &HermitianMatrix, v: &UnitVector) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.dim();
    if v.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.dim(),
        });
    }
    let red = tridiagonalize(h);
    // y = (Q D)* v, then rotated like a row of the tridiagonal eigenvectors.
    let mut y = v.entries().to_vec();
    red.apply_qh(&mut y);
    for (yk, dk) in y.iter_mut().zip(&red.phases) {
        *yk *= dk.conj();
    }
    let mut d = red.diag.clone();
    tql(&mut d, &red.offdiag, |i, c, s| {
        let h = y[i + 1];
        y[i + 1] = s * y[i] + c * h;
        y[i] = c * y[i] - s * h;
    })?;
    let order = sort_order(&d);
    Ok((
        order.iter().map(|&j| d[j]).collect(),
        order.iter().map(|&j| y[j].norm_sqr()).collect(),
    ))
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let red = tridiagonalize(h);
    let mut d = red.diag.clone();
    tql(&mut d, &red.offdiag, |_, _, _| {})?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}
