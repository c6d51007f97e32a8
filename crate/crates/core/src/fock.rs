//! Truncated Fock-space states and operators.
//!
//! A single bosonic mode is represented on the basis `|0>, ..., |D-1>`. States
//! that do not fit (coherent states with too large an amplitude for the chosen
//! `D`) are rejected up front using the analytic tail of their photon-number
//! distribution instead of being silently cut off.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest photon-number mass allowed beyond the last retained level.
pub const TAIL_BOUND: f64 = 1e-10;

/// Smallest truncation handed out by [`PacsSpec::default_dim`].
pub const MIN_DIM: usize = 16;

/// Laguerre polynomial `L_m(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
pub fn laguerre(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..m {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(n!)` for every `n` in `0..len`.
pub(crate) fn ln_factorials(len: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(len.max(1));
    let mut acc = 0.0;
    table.push(acc);
    for n in 1..len {
        acc += (n as f64).ln();
        table.push(acc);
    }
    table
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Pure state of one mode in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::invalid("dim", "a truncated mode needs at least two levels"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Number state `|n>` in a `dim`-level truncation.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::invalid(
                "n",
                format!("level {n} does not fit in dimension {dim}"),
            ));
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        self.amplitudes /= C64::new(norm, 0.0);
        Ok(())
    }

    pub fn mean_photon(&self) -> f64 {
        let n: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, z)| k as f64 * z.norm_sqr())
            .sum();
        n / self.norm_sqr()
    }

    /// `|<self|other>|^2` for normalized states of equal dimension.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }
}

/// Mixed state of one mode in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Accepts a square Hermitian matrix (to 1e-10) and symmetrizes away the rounding.
    pub fn from_matrix(elements: DMatrix<C64>) -> Result<Self> {
        if !elements.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                elements.nrows(),
                elements.ncols()
            )));
        }
        if elements.nrows() < 2 {
            return Err(Error::invalid("dim", "a truncated mode needs at least two levels"));
        }
        let herm = hermiticity_error(&elements);
        if !(herm <= 1e-10) {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (error {herm:.3e})"
            )));
        }
        let symmetric = (&elements + elements.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { elements: symmetric })
    }

    pub(crate) fn from_matrix_unchecked(elements: DMatrix<C64>) -> Self {
        Self { elements }
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        Ok(density_from_state(&StateVector::fock(n, dim)?))
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|z| z.re).collect()
    }

    /// Largest elementwise deviation `max |rho - rho^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.elements)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.elements.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Pads with empty levels, or drops top levels when `dim` is smaller.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("dim", "a truncated mode needs at least two levels"));
        }
        let keep = dim.min(self.dim());
        let mut out = DMatrix::zeros(dim, dim);
        out.view_mut((0, 0), (keep, keep))
            .copy_from(&self.elements.view((0, 0), (keep, keep)));
        Ok(Self { elements: out })
    }

    /// Convex combination `sum_i w_i rho_i`; weights are used as given.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::invalid("parts", "empty mixture"));
        };
        let dim = first.dim();
        let mut out = DMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            check_dim(dim, rho.dim())?;
            out += &rho.elements * C64::new(*w, 0.0);
        }
        Ok(Self { elements: out })
    }
}

pub(crate) fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Photon-added coherent state `a^{dagger m}|alpha>` with its truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacsSpec {
    alpha: C64,
    m: usize,
    dim: usize,
}

impl PacsSpec {
    /// Uses [`PacsSpec::default_dim`] for the truncation.
    pub fn new(alpha: C64, m: usize) -> Result<Self> {
        Self::with_dim(alpha, m, Self::default_dim(alpha, m))
    }

    pub fn with_dim(alpha: C64, m: usize, dim: usize) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::invalid("alpha", "amplitude must be finite"));
        }
        if dim < 2 {
            return Err(Error::invalid("dim", "a truncated mode needs at least two levels"));
        }
        let spec = Self { alpha, m, dim };
        let tail = spec.tail_mass();
        if !(tail < TAIL_BOUND) {
            return Err(Error::TruncationTooSmall {
                tail,
                dim,
                bound: TAIL_BOUND,
            });
        }
        Ok(spec)
    }

    /// `ceil(|alpha|^2 + m + 10 sqrt(|alpha|^2 + m + 1))`, at least [`MIN_DIM`].
    pub fn default_dim(alpha: C64, m: usize) -> usize {
        let mean = alpha.norm_sqr() + m as f64;
        let d = (mean + 10.0 * (mean + 1.0).sqrt()).ceil() as usize;
        d.max(MIN_DIM)
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Analytic normalization `N(alpha, m) = m! L_m(-|alpha|^2)`.
    pub fn norm(&self) -> f64 {
        ln_factorial(self.m).exp() * laguerre(self.m, -self.alpha.norm_sqr())
    }

    /// Photon-number mass of the exact state on levels `n >= dim`.
    pub fn tail_mass(&self) -> f64 {
        pacs_tail_mass(self.alpha.norm_sqr(), self.m, self.dim)
    }
}

/// Tail of `P(n) = e^{-x} x^{n-m} n! / ((n-m)!^2 N)` for `n >= dim`, `x = |alpha|^2`.
/// With `m = 0` this is the Poisson tail of a coherent state.
fn pacs_tail_mass(x: f64, m: usize, dim: usize) -> f64 {
    if dim <= m {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    let ln_norm = ln_factorial(m) + laguerre(m, -x).ln();
    let ln_term = |n: usize| -x + (n - m) as f64 * x.ln() + ln_factorial(n) - 2.0 * ln_factorial(n - m) - ln_norm;
    let mut n = dim;
    let mut term = ln_term(n).exp();
    let mut tail = 0.0;
    // ratio P(n+1)/P(n) = x (n+1) / (n+1-m)^2 eventually drops below one
    loop {
        tail += term;
        let ratio = x * (n + 1) as f64 / ((n + 1 - m) as f64).powi(2);
        term *= ratio;
        n += 1;
        if (ratio < 0.5 && term <= 1e-18 * tail) || term == 0.0 || n > dim + 100_000 {
            break;
        }
    }
    tail.min(1.0)
}

/// Lowering operator `a` and its adjoint in a `dim`-level truncation.
///
/// # Panics
/// If `dim < 2`.
pub fn ladder_matrices(dim: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    assert!(dim >= 2, "ladder operators need at least two levels");
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    (a, a_dag)
}

/// Unnormalized coherent amplitudes `e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n < dim`.
fn coherent_amplitudes(alpha: C64, dim: usize) -> DVector<C64> {
    let ln_fact = ln_factorials(dim);
    let r = alpha.norm();
    let phase = if r > 0.0 { alpha / r } else { C64::new(1.0, 0.0) };
    DVector::from_fn(dim, |n, _| {
        if r == 0.0 {
            return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        let ln_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * ln_fact[n];
        phase.powu(n as u32) * ln_mag.exp()
    })
}

pub fn coherent_state(alpha: C64, dim: usize) -> Result<StateVector> {
    if dim < 2 {
        return Err(Error::invalid("dim", "a truncated mode needs at least two levels"));
    }
    let tail = pacs_tail_mass(alpha.norm_sqr(), 0, dim);
    if !(tail < TAIL_BOUND) {
        return Err(Error::TruncationTooSmall {
            tail,
            dim,
            bound: TAIL_BOUND,
        });
    }
    let mut psi = StateVector::new(coherent_amplitudes(alpha, dim))?;
    psi.normalize()?;
    Ok(psi)
}

/// Norm squared of `a^{dagger m}|alpha>` computed with the truncated ladder matrix.
pub fn pacs_numeric_norm(spec: &PacsSpec) -> f64 {
    raised_coherent(spec).norm_squared()
}

fn raised_coherent(spec: &PacsSpec) -> DVector<C64> {
    let (_, a_dag) = ladder_matrices(spec.dim);
    let mut v = coherent_amplitudes(spec.alpha, spec.dim);
    for _ in 0..spec.m {
        v = &a_dag * v;
    }
    v
}

/// Normalized photon-added coherent state `a^{dagger m}|alpha> / sqrt(m! L_m(-|alpha|^2))`.
pub fn build_pacs(spec: &PacsSpec) -> Result<StateVector> {
    let v = raised_coherent(spec);
    let numeric = v.norm_squared();
    let analytic = spec.norm();
    if (numeric - analytic).abs() > 1e-8 * analytic {
        return Err(Error::TruncationTooSmall {
            tail: (1.0 - numeric / analytic).abs(),
            dim: spec.dim,
            bound: 1e-8,
        });
    }
    let mut psi = StateVector::new(v)?;
    psi.normalize()?;
    Ok(psi)
}

pub fn density_from_state(psi: &StateVector) -> DensityMatrix {
    let v = psi.amplitudes();
    DensityMatrix::from_matrix_unchecked(v * v.adjoint())
}
