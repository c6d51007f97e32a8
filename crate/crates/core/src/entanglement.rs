//! Entanglement potential: log-negativity of the two-mode state produced when
//! the field and a vacuum mode meet on a 50:50 beam splitter
//! `U = exp(i pi/4 (a^dag b + a b^dag))`.
//!
//! The generator conserves total photon number, so `U` is assembled from
//! independent blocks `|j, N-j>`, `j = 0..=N`. A single-mode state on levels
//! `0..D` with a vacuum partner only reaches blocks with `N <= D-1`, all of
//! which fit in the `D x D` product truncation, so the output is exact.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{check_dim, hermiticity_error, DensityMatrix, PacsSpec, C64};
use crate::linalg::{expm_i_hermitian, hermitian_eigenvalues};
use crate::negativity::damped_pacs;

/// Allowed `|1 - Tr rho|` of the two-mode state handed to the log-negativity.
pub const TRUNCATION_BOUND: f64 = 1e-8;

/// Two-mode state on `|n>_a |m>_b`, flattened as `n * D + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeDensityMatrix {
    elements: DMatrix<C64>,
    dim_per_mode: usize,
}

impl TwoModeDensityMatrix {
    pub fn new(elements: DMatrix<C64>, dim_per_mode: usize) -> Result<Self> {
        let n = dim_per_mode * dim_per_mode;
        if dim_per_mode < 2 || elements.nrows() != n || elements.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: elements.nrows(),
            });
        }
        let herm = hermiticity_error(&elements);
        if !(herm <= 1e-10) {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (error {herm:.3e})"
            )));
        }
        Ok(Self { elements, dim_per_mode })
    }

    /// `rho_a (x) rho_b`.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self {
            elements: a.elements().kronecker(b.elements()),
            dim_per_mode: a.dim(),
        })
    }

    pub fn dim_per_mode(&self) -> usize {
        self.dim_per_mode
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * self.dim_per_mode + n_b
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.elements)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.elements)[0]
    }

    /// `(U_a (x) U_b) rho (U_a (x) U_b)^dag` for single-mode unitaries.
    pub fn apply_local(&self, ua: &DMatrix<C64>, ub: &DMatrix<C64>) -> Result<Self> {
        check_dim(self.dim_per_mode, ua.nrows())?;
        check_dim(self.dim_per_mode, ub.nrows())?;
        let u = ua.kronecker(ub);
        Ok(Self {
            elements: &u * &self.elements * u.adjoint(),
            dim_per_mode: self.dim_per_mode,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub log_negativity: f64,
    pub trace_norm: f64,
    pub truncation_error: f64,
}

/// Beam-splitter block on `|j, N-j>`, `j = 0..=N`.
fn splitter_block(total: usize) -> DMatrix<C64> {
    let size = total + 1;
    let mut g = DMatrix::<C64>::zeros(size, size);
    for j in 0..total {
        // a^dag b |j, N-j> = sqrt((j+1)(N-j)) |j+1, N-j-1>
        let amp = (((j + 1) * (total - j)) as f64).sqrt() * std::f64::consts::FRAC_PI_4;
        g[(j + 1, j)] = C64::new(amp, 0.0);
        g[(j, j + 1)] = C64::new(amp, 0.0);
    }
    expm_i_hermitian(&g)
}

/// Full `D^2 x D^2` beam-splitter matrix. Product states with `n_a + n_b >= D`
/// belong to blocks cut by the truncation and are left untouched.
pub fn beam_splitter_unitary(dim: usize) -> DMatrix<C64> {
    assert!(dim >= 2, "beam splitter needs at least two levels per mode");
    let mut u = DMatrix::<C64>::identity(dim * dim, dim * dim);
    for total in 0..dim {
        let block = splitter_block(total);
        let idx = |j: usize| j * dim + (total - j);
        for r in 0..=total {
            for c in 0..=total {
                u[(idx(r), idx(c))] = block[(r, c)];
            }
        }
    }
    u
}

/// `U (rho (x) |0><0|) U^dag`, built from the images `U|n, 0>`.
pub fn beam_splitter_output(rho: &DensityMatrix) -> TwoModeDensityMatrix {
    let dim = rho.dim();
    let mut images = DMatrix::<C64>::zeros(dim * dim, dim);
    for n in 0..dim {
        let block = splitter_block(n);
        for j in 0..=n {
            images[(j * dim + (n - j), n)] = block[(j, n)];
        }
    }
    TwoModeDensityMatrix {
        elements: &images * rho.elements() * images.adjoint(),
        dim_per_mode: dim,
    }
}

/// Transpose on mode `b`: `[(n,m),(n',m')] -> [(n,m'),(n',m)]`.
pub fn partial_transpose(rho: &TwoModeDensityMatrix) -> DMatrix<C64> {
    let d = rho.dim_per_mode;
    let src = &rho.elements;
    DMatrix::from_fn(d * d, d * d, |row, col| {
        let (n, m_prime) = (row / d, row % d);
        let (n_prime, m) = (col / d, col % d);
        src[(n * d + m, n_prime * d + m_prime)]
    })
}

/// `log2 ||rho^T_b||_1`, floored at zero; the partial transpose is Hermitian so
/// its singular values are the moduli of its eigenvalues.
pub fn log_negativity(rho: &TwoModeDensityMatrix) -> Result<EntanglementReport> {
    let truncation_error = (1.0 - rho.trace()).abs();
    if !(truncation_error < TRUNCATION_BOUND) {
        return Err(Error::TruncationTooSmall {
            tail: truncation_error,
            dim: rho.dim_per_mode,
            bound: TRUNCATION_BOUND,
        });
    }
    let pt = partial_transpose(rho);
    let trace_norm: f64 = hermitian_eigenvalues(&pt).iter().map(|l| l.abs()).sum();
    let log_negativity = if trace_norm > 1.0 { trace_norm.log2() } else { 0.0 };
    Ok(EntanglementReport {
        log_negativity,
        trace_norm,
        truncation_error,
    })
}

pub fn entanglement_potential(rho: &DensityMatrix) -> Result<EntanglementReport> {
    log_negativity(&beam_splitter_output(rho))
}

/// Entanglement potential of the damped photon-added coherent state over sorted decay times.
pub fn ep_sweep(spec: &PacsSpec, gamma_ts: &[f64]) -> Result<Vec<(f64, EntanglementReport)>> {
    if gamma_ts.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::invalid("gamma_t", "decay times must be finite and >= 0"));
    }
    if gamma_ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("gamma_t", "decay times must be sorted ascending"));
    }
    gamma_ts
        .par_iter()
        .map(|&gt| {
            let rho = damped_pacs(spec, gt)?;
            entanglement_potential(&rho).map(|r| (gt, r))
        })
        .collect()
}
