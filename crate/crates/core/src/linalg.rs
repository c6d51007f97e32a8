//! Small dense helpers shared by the channel, Wigner and entanglement code.

use nalgebra::DMatrix;

use crate::fock::{ladder_matrices, C64};

/// `exp(i H)` for Hermitian `H`, via its eigendecomposition.
pub fn expm_i_hermitian(h: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|lambda| C64::from_polar(1.0, lambda));
    let mut scaled = v.clone();
    for (mut col, phase) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *phase;
    }
    scaled * v.adjoint()
}

/// Displacement `exp(beta a^dagger - beta^* a)` on a `dim`-level truncation.
pub fn displacement(beta: C64, dim: usize) -> DMatrix<C64> {
    let (a, a_dag) = ladder_matrices(dim);
    // beta a^dagger - beta^* a is anti-Hermitian; -i times it is Hermitian
    let generator = a_dag * beta - a * beta.conj();
    expm_i_hermitian(&(generator * C64::new(0.0, -1.0)))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
