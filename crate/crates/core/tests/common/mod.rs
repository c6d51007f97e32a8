use nalgebra::DMatrix;
use pacs_core::{ladder_matrices, DensityMatrix, C64};

fn lindblad_rhs(rho: &DMatrix<C64>, a: &DMatrix<C64>, ad: &DMatrix<C64>) -> DMatrix<C64> {
    let n = ad * a;
    (a * rho * ad) - (&n * rho + rho * &n) * C64::new(0.5, 0.0)
}

/// Classic fourth-order Runge-Kutta on the photon-loss master equation with `gamma = 1`.
pub fn rk4(rho: &DensityMatrix, tau: f64, steps: usize) -> DMatrix<C64> {
    let (a, ad) = ladder_matrices(rho.dim());
    let h = C64::new(tau / steps as f64, 0.0);
    let half = C64::new(0.5, 0.0);
    let two = C64::new(2.0, 0.0);
    let mut x = rho.elements().clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(&x, &a, &ad);
        let k2 = lindblad_rhs(&(&x + &k1 * h * half), &a, &ad);
        let k3 = lindblad_rhs(&(&x + &k2 * h * half), &a, &ad);
        let k4 = lindblad_rhs(&(&x + &k3 * h), &a, &ad);
        x += (k1 + k2 * two + k3 * two + k4) * (h / 6.0);
    }
    x
}
