//! Random Hermitian matrices, random unit vectors and the spectral data that
//! drives the dynamics of `H + i t v v*`.
//!
//! Normalization: off-diagonal entries have `E|h_ij|^2 = 1/n` and diagonal
//! entries are real with variance `1/n`, so the spectrum fills `[-2, 2]`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigen, hermitian_eigen_weights};
use crate::error::{Error, Result};

/// Name of the generator recorded in run metadata.
pub const RNG_NAME: &str = "ChaCha8Rng(stream 0: matrix, stream 1: vector)";

const MATRIX_STREAM: u64 = 0;
const VECTOR_STREAM: u64 = 1;

/// Relative spectral gap below which a draw is treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-12;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Dense Hermitian matrix stored row-major. Hermitian symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Checks exact Hermitian symmetry of a row-major `n x n` array.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension {
                n,
                reason: "matrix dimension must be positive",
            });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i].im != 0.0 {
                return Err(Error::Config(format!(
                    "diagonal entry {i} has nonzero imaginary part"
                )));
            }
            for j in i + 1..n {
                if entries[j * n + i] != entries[i * n + j].conj() {
                    return Err(Error::Config(format!(
                        "entries ({i}, {j}) and ({j}, {i}) are not conjugate"
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix from its diagonal and a generator for the strict upper
    /// triangle; the lower triangle is filled by conjugation.
    fn from_upper(
        n: usize,
        mut diag: impl FnMut(usize) -> f64,
        mut upper: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(diag(i), 0.0);
            for j in i + 1..n {
                let h = upper(i, j);
                entries[i * n + j] = h;
                entries[j * n + i] = h.conj();
            }
        }
        Self { n, entries }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_upper(n, |i| values[i], |_, _| Complex64::new(0.0, 0.0))
    }

    /// Real symmetric matrix from a row-major array (upper triangle is used).
    pub fn from_real_symmetric(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        Ok(Self::from_upper(
            n,
            |i| values[i * n + i],
            |i, j| Complex64::new(values[i * n + j], 0.0),
        ))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `H x` for a complex vector.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Unit vector in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<Complex64>);

impl UnitVector {
    /// Normalizes `entries`; fails on the zero vector.
    pub fn normalized(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension {
                n: 0,
                reason: "vector dimension must be positive",
            });
        }
        let norm = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Config("cannot normalize a zero vector".into()));
        }
        Ok(Self(entries.into_iter().map(|z| z / norm).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }
}

/// Entry distribution of a Wigner matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryLaw {
    GaussianComplex,
    UniformComplex,
    GaussianReal,
}

impl FromStr for EntryLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-complex" => Ok(Self::GaussianComplex),
            "uniform-complex" => Ok(Self::UniformComplex),
            "gaussian-real" => Ok(Self::GaussianReal),
            other => Err(Error::Config(format!("unknown entry law `{other}`"))),
        }
    }
}

/// Ensemble tag carried by a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Gue,
    WignerReal,
    WignerComplexUniform,
}

impl Ensemble {
    pub fn entry_law(self) -> EntryLaw {
        match self {
            Ensemble::Gue => EntryLaw::GaussianComplex,
            Ensemble::WignerReal => EntryLaw::GaussianReal,
            Ensemble::WignerComplexUniform => EntryLaw::UniformComplex,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Ensemble::Gue => "gue",
            Ensemble::WignerReal => "wigner-real",
            Ensemble::WignerComplexUniform => "wigner-complex-uniform",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gue" => Ok(Self::Gue),
            "wigner-real" => Ok(Self::WignerReal),
            "wigner-complex-uniform" => Ok(Self::WignerComplexUniform),
            other => Err(Error::Config(format!("unknown ensemble `{other}`"))),
        }
    }
}

/// What to sample: dimension, ensemble and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub rng: String,
}

impl RunConfig {
    pub fn new(n: usize, ensemble: Ensemble, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension {
                n,
                reason: "runs need n >= 2",
            });
        }
        Ok(Self {
            n,
            ensemble,
            seed,
            rng: RNG_NAME.to_string(),
        })
    }

    pub fn gue(n: usize, seed: u64) -> Result<Self> {
        Self::new(n, Ensemble::Gue, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

/// Metadata persisted next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub n: usize,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub rng: String,
    /// Seed that was actually used after degenerate-spectrum resampling.
    pub effective_seed: u64,
    pub resamples: u32,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub degenerate_gap: f64,
    pub newton_residual: f64,
    pub newton_step: f64,
    pub collision: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degenerate_gap: DEGENERATE_GAP,
            newton_residual: crate::trajectory::NEWTON_RESIDUAL_TOL,
            newton_step: crate::trajectory::NEWTON_STEP_TOL,
            collision: crate::trajectory::COLLISION_TOL,
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidDimension {
            n,
            reason: "random matrices need n >= 2",
        })
    } else {
        Ok(())
    }
}

/// GUE matrix: complex Gaussian off-diagonal entries with `E|h_ij|^2 = 1/n`
/// and real Gaussian diagonal entries with variance `1/n`.
pub fn sample_gue(n: usize, seed: u64) -> Result<HermitianMatrix> {
    sample_wigner(n, EntryLaw::GaussianComplex, seed)
}

/// Wigner matrix with the given entry law. Every law has mean zero,
/// `E|h_ij|^2 = 1/n` off the diagonal and variance `1/n` on it.
pub fn sample_wigner(n: usize, law: EntryLaw, seed: u64) -> Result<HermitianMatrix> {
    check_dim(n)?;
    draw_wigner(n, law, seed)
}

fn draw_wigner(n: usize, law: EntryLaw, seed: u64) -> Result<HermitianMatrix> {
    let mut rng = rng_for(seed, MATRIX_STREAM);
    let nf = n as f64;
    let m = match law {
        EntryLaw::GaussianComplex => {
            let diag_sd = (1.0 / nf).sqrt();
            let off_sd = (0.5 / nf).sqrt();
            let mut draws = Vec::with_capacity(n * n);
            // Draw in a fixed row-major order of the upper triangle.
            for i in 0..n {
                let d: f64 = rng.sample(StandardNormal);
                draws.push(Complex64::new(diag_sd * d, 0.0));
                for _ in i + 1..n {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    draws.push(Complex64::new(off_sd * re, off_sd * im));
                }
            }
            from_draws(n, draws)
        }
        EntryLaw::UniformComplex => {
            // Uniform on [-a, a] has variance a^2 / 3.
            let diag = Uniform::new(-(3.0 / nf).sqrt(), (3.0 / nf).sqrt())
                .map_err(|e| Error::Config(e.to_string()))?;
            let off = Uniform::new(-(1.5 / nf).sqrt(), (1.5 / nf).sqrt())
                .map_err(|e| Error::Config(e.to_string()))?;
            let mut draws = Vec::with_capacity(n * n);
            for i in 0..n {
                draws.push(Complex64::new(rng.sample(diag), 0.0));
                for _ in i + 1..n {
                    draws.push(Complex64::new(rng.sample(off), rng.sample(off)));
                }
            }
            from_draws(n, draws)
        }
        EntryLaw::GaussianReal => {
            let sd = (1.0 / nf).sqrt();
            let mut draws = Vec::with_capacity(n * n);
            for i in 0..n {
                for _ in i..n {
                    let x: f64 = rng.sample(StandardNormal);
                    draws.push(Complex64::new(sd * x, 0.0));
                }
            }
            from_draws(n, draws)
        }
    };
    Ok(m)
}

/// Lays out upper-triangle draws (row-major, diagonal first in each row).
fn from_draws(n: usize, draws: Vec<Complex64>) -> HermitianMatrix {
    let mut it = draws.into_iter();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in i..n {
            let h = it.next().expect("one draw per upper-triangle entry");
            entries[i * n + j] = h;
            entries[j * n + i] = h.conj();
        }
    }
    HermitianMatrix { n, entries }
}

/// Uniform unit vector on the complex sphere: a normalized standard complex
/// Gaussian vector.
pub fn sample_unit_vector(n: usize, seed: u64) -> Result<UnitVector> {
    if n == 0 {
        return Err(Error::InvalidDimension {
            n,
            reason: "vector dimension must be positive",
        });
    }
    let mut rng = rng_for(seed, VECTOR_STREAM);
    let entries = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    UnitVector::normalized(entries)
}

/// Eigenvalues of `H` (ascending), orthonormal eigenvectors and the overlap
/// weights `c_j = |<u_j|v>|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub mus: Vec<f64>,
    /// Column-major: eigenvector `j` is `eigvecs[j * n..(j + 1) * n]`.
    pub eigvecs: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl SpectralData {
    pub fn new(h: &HermitianMatrix, v: &UnitVector) -> Result<Self> {
        let (mus, eigvecs) = hermitian_eigen(h)?;
        let weights = overlaps(&eigvecs, v)?;
        Ok(Self {
            mus,
            eigvecs,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.mus.len()
    }

    pub fn eigvec(&self, j: usize) -> &[Complex64] {
        let n = self.dim();
        &self.eigvecs[j * n..(j + 1) * n]
    }

    pub fn resolvent_input(&self) -> crate::resolvent::ResolventInput {
        crate::resolvent::ResolventInput {
            mus: self.mus.clone(),
            weights: self.weights.clone(),
        }
    }
}

/// `c_j = |<u_j|v>|^2` for column-major eigenvectors.
pub fn overlaps(eigvecs: &[Complex64], v: &UnitVector) -> Result<Vec<f64>> {
    let n = v.dim();
    if eigvecs.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: eigvecs.len(),
        });
    }
    Ok(eigvecs
        .chunks_exact(n)
        .map(|u| {
            u.iter()
                .zip(v.entries())
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect())
}

/// Smallest gap between consecutive sorted eigenvalues.
pub fn min_gap(mus: &[f64]) -> f64 {
    mus.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// One sampled instance `(H, v)` together with its spectral data.
#[derive(Debug, Clone)]
pub struct Instance {
    pub h: HermitianMatrix,
    pub v: UnitVector,
    pub spectral: SpectralData,
    pub effective_seed: u64,
    pub resamples: u32,
}

impl Instance {
    /// Samples `(H, v)` from `config`, resampling with `seed + 1` whenever
    /// the spectrum is degenerate at relative gap [`DEGENERATE_GAP`].
    pub fn sample(config: &RunConfig) -> Result<Self> {
        let mut last = None;
        let (h, v, effective_seed, resamples) = sample_nondegenerate(config, |h, _| {
            let (mus, vecs) = hermitian_eigen(h)?;
            last = Some((mus.clone(), vecs));
            Ok(mus)
        })?;
        let (mus, eigvecs) = last.expect("spectrum computed for the accepted draw");
        let weights = overlaps(&eigvecs, &v)?;
        let spectral = SpectralData {
            mus,
            eigvecs,
            weights,
        };
        Ok(Self {
            h,
            v,
            spectral,
            effective_seed,
            resamples,
        })
    }

    pub fn metadata(&self, config: &RunConfig) -> RunMetadata {
        RunMetadata {
            n: config.n,
            ensemble: config.ensemble,
            seed: config.seed,
            rng: config.rng.clone(),
            effective_seed: self.effective_seed,
            resamples: self.resamples,
            tolerances: Tolerances::default(),
        }
    }
}

/// Eigenvalues and weights only, skipping eigenvectors. Used by the large
/// Monte Carlo experiments.
#[derive(Debug, Clone)]
pub struct LightInstance {
    pub h: HermitianMatrix,
    pub v: UnitVector,
    pub input: crate::resolvent::ResolventInput,
    pub effective_seed: u64,
    pub resamples: u32,
}

impl LightInstance {
    pub fn sample(config: &RunConfig) -> Result<Self> {
        let mut last = None;
        let (h, v, effective_seed, resamples) = sample_nondegenerate(config, |h, v| {
            let (mus, w) = hermitian_eigen_weights(h, v)?;
            last = Some((mus.clone(), w));
            Ok(mus)
        })?;
        let (mus, weights) = last.expect("spectrum computed for the accepted draw");
        Ok(Self {
            h,
            v,
            input: crate::resolvent::ResolventInput { mus, weights },
            effective_seed,
            resamples,
        })
    }
}

impl LightInstance {
    pub fn metadata(&self, config: &RunConfig) -> RunMetadata {
        RunMetadata {
            n: config.n,
            ensemble: config.ensemble,
            seed: config.seed,
            rng: config.rng.clone(),
            effective_seed: self.effective_seed,
            resamples: self.resamples,
            tolerances: Tolerances::default(),
        }
    }

    /// The scalar case `n = 1`, below the dimension random matrix runs
    /// accept: `H = (h)` with the ensemble's diagonal law at `n = 1` and
    /// `v = (e^{i phi})`, so the single weight is 1.
    pub fn sample_scalar(ensemble: Ensemble, seed: u64) -> Result<(Self, RunMetadata)> {
        let h = draw_wigner(1, ensemble.entry_law(), seed)?;
        let v = sample_unit_vector(1, seed)?;
        let input = crate::resolvent::ResolventInput::new(vec![h.get(0, 0).re], vec![1.0])?;
        let meta = RunMetadata {
            n: 1,
            ensemble,
            seed,
            rng: RNG_NAME.to_string(),
            effective_seed: seed,
            resamples: 0,
            tolerances: Tolerances::default(),
        };
        let inst = Self {
            h,
            v,
            input,
            effective_seed: seed,
            resamples: 0,
        };
        Ok((inst, meta))
    }
}

const MAX_RESAMPLES: u32 = 16;

fn sample_nondegenerate(
    config: &RunConfig,
    mut spectrum: impl FnMut(&HermitianMatrix, &UnitVector) -> Result<Vec<f64>>,
) -> Result<(HermitianMatrix, UnitVector, u64, u32)> {
    let mut seed = config.seed;
    for resamples in 0..=MAX_RESAMPLES {
        let h = sample_wigner(config.n, config.ensemble.entry_law(), seed)?;
        let v = sample_unit_vector(config.n, seed)?;
        let mus = spectrum(&h, &v)?;
        if min_gap(&mus) > DEGENERATE_GAP * h.frobenius_norm() {
            return Ok((h, v, seed, resamples));
        }
        log_resample(config, seed);
        seed = seed.wrapping_add(1);
    }
    Err(Error::Config(format!(
        "spectrum degenerate after {MAX_RESAMPLES} resamples starting from seed {}",
        config.seed
    )))
}

fn log_resample(config: &RunConfig, seed: u64) {
    eprintln!(
        "warning: degenerate spectrum for n={} seed={seed}; resampling with seed {}",
        config.n,
        seed.wrapping_add(1)
    );
}
