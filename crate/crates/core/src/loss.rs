//! Photon-loss (amplitude damping) channel.
//!
//! The master equation `d rho/dt = (gamma/2)(2 a rho a^dag - a^dag a rho - rho a^dag a)`
//! is solved exactly by the Kraus sum
//!
//! ```text
//! rho(t) = sum_k M_k rho M_k^dag,   M_k = sqrt((1 - e^{-gt})^k / k!) e^{-gt a^dag a / 2} a^k
//! ```
//!
//! so only the product `gt = gamma * t` ever enters.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{check_dim, ln_factorials, DensityMatrix, C64};

/// Trace that the retained Kraus terms may lose before `evolve` fails.
pub const TRACE_LOSS_BOUND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    gamma_t: f64,
    kraus_cutoff: usize,
    dim: usize,
}

impl ChannelParams {
    /// Keeps all `dim` Kraus terms, which makes the truncated channel exactly trace preserving.
    pub fn new(gamma_t: f64, dim: usize) -> Result<Self> {
        Self::with_cutoff(gamma_t, dim, dim)
    }

    pub fn with_cutoff(gamma_t: f64, dim: usize, kraus_cutoff: usize) -> Result<Self> {
        if !(gamma_t.is_finite() && gamma_t >= 0.0) {
            return Err(Error::invalid(
                "gamma_t",
                format!("must be finite and >= 0, got {gamma_t}"),
            ));
        }
        if dim < 2 {
            return Err(Error::invalid("dim", "a truncated mode needs at least two levels"));
        }
        if kraus_cutoff == 0 {
            return Err(Error::invalid("kraus_cutoff", "at least one Kraus term is required"));
        }
        Ok(Self {
            gamma_t,
            kraus_cutoff,
            dim,
        })
    }

    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    pub fn kraus_cutoff(&self) -> usize {
        self.kraus_cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Surviving intensity fraction `e^{-gt}`.
    pub fn transmissivity(&self) -> f64 {
        (-self.gamma_t).exp()
    }

    /// Number of Kraus terms that are not identically zero.
    fn effective_terms(&self) -> usize {
        if self.gamma_t == 0.0 {
            1
        } else {
            self.kraus_cutoff.min(self.dim)
        }
    }

    /// `<n| M_k |n+k> = sqrt(C(n+k, k)) (1-eta)^{k/2} eta^{n/2}`, as `table[k][n]`.
    fn kraus_elements(&self) -> Vec<Vec<f64>> {
        let eta = self.transmissivity();
        let loss = -(-self.gamma_t).exp_m1();
        let ln_fact = ln_factorials(self.dim);
        (0..self.effective_terms())
            .map(|k| {
                (0..self.dim - k)
                    .map(|n| {
                        if k == 0 {
                            return eta.powf(0.5 * n as f64);
                        }
                        let ln_binom = ln_fact[n + k] - ln_fact[n] - ln_fact[k];
                        let ln_amp = 0.5 * ln_binom + 0.5 * k as f64 * loss.ln() + 0.5 * n as f64 * (-self.gamma_t);
                        ln_amp.exp()
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn kraus_operators(params: &ChannelParams) -> Vec<DMatrix<C64>> {
    let d = params.dim;
    params
        .kraus_elements()
        .into_iter()
        .enumerate()
        .map(|(k, diag)| {
            let mut op = DMatrix::zeros(d, d);
            for (n, amp) in diag.into_iter().enumerate() {
                op[(n, n + k)] = C64::new(amp, 0.0);
            }
            op
        })
        .collect()
}

/// `sum_k M_k rho M_k^dag`, evaluated elementwise since each `M_k` is a shifted diagonal.
pub fn evolve(rho: &DensityMatrix, params: &ChannelParams) -> Result<DensityMatrix> {
    check_dim(params.dim, rho.dim())?;
    if params.gamma_t == 0.0 {
        return Ok(rho.clone());
    }
    let d = params.dim;
    let src = rho.elements();
    let elements = params.kraus_elements();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for (k, amp) in elements.iter().enumerate() {
        for j in 0..d - k {
            for i in 0..d - k {
                out[(i, j)] += src[(i + k, j + k)] * (amp[i] * amp[j]);
            }
        }
    }
    let before = rho.trace();
    let after: f64 = out.diagonal().iter().map(|z| z.re).sum();
    let lost = before - after;
    if lost > TRACE_LOSS_BOUND * before.abs().max(1.0) {
        return Err(Error::KrausCutoffTooSmall {
            lost,
            cutoff: params.kraus_cutoff,
        });
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// `Tr(rho a^dag a)`.
pub fn mean_photon(rho: &DensityMatrix) -> f64 {
    rho.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_pacs, coherent_state, density_from_state, PacsSpec};
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn rejects_negative_time() {
        assert!(ChannelParams::new(-0.1, 8).is_err());
        assert!(ChannelParams::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn no_decay_is_single_identity() {
        let ops = kraus_operators(&ChannelParams::new(0.0, 6).unwrap());
        assert_eq!(ops.len(), 1);
        assert!((&ops[0] - DMatrix::<C64>::identity(6, 6)).camax() < 1e-15);
    }

    #[test]
    fn qubit_kraus_at_half_loss() {
        let ops = kraus_operators(&ChannelParams::new(LN_2, 2).unwrap());
        let h = 0.5f64.sqrt();
        assert!((ops[0][(0, 0)] - c(1.0)).norm() < 1e-15);
        assert!((ops[0][(1, 1)] - c(h)).norm() < 1e-15);
        assert!((ops[1][(0, 1)] - c(h)).norm() < 1e-15);
        assert_eq!(ops[1].iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn kraus_completeness() {
        let params = ChannelParams::new(0.5, 32).unwrap();
        let ops = kraus_operators(&params);
        let sum = ops
            .iter()
            .fold(DMatrix::<C64>::zeros(32, 32), |acc, m| acc + m.adjoint() * m);
        assert!((sum - DMatrix::<C64>::identity(32, 32)).camax() < 1e-12);
    }

    #[test]
    fn partial_cutoff_complete_on_low_levels() {
        let k = 10;
        let params = ChannelParams::with_cutoff(0.5, 32, k).unwrap();
        let ops = kraus_operators(&params);
        assert_eq!(ops.len(), k);
        let sum = ops
            .iter()
            .fold(DMatrix::<C64>::zeros(32, 32), |acc, m| acc + m.adjoint() * m);
        for n in 0..k {
            assert!((sum[(n, n)] - c(1.0)).norm() < 1e-12);
        }
        // too few terms for a state living on high levels
        let rho = DensityMatrix::fock(20, 32).unwrap();
        assert!(matches!(evolve(&rho, &params), Err(Error::KrausCutoffTooSmall { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let rho = DensityMatrix::fock(0, 4).unwrap();
        let params = ChannelParams::new(0.3, 5).unwrap();
        assert!(matches!(evolve(&rho, &params), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn coherent_state_stays_coherent() {
        let alpha = C64::new(0.8, 0.3);
        let gt = 0.7;
        let rho = density_from_state(&coherent_state(alpha, 40).unwrap());
        let out = evolve(&rho, &ChannelParams::new(gt, 40).unwrap()).unwrap();
        let target = coherent_state(alpha * (-gt / 2.0f64).exp(), 40).unwrap();
        let v = target.amplitudes();
        let fidelity = (v.adjoint() * out.elements() * v)[(0, 0)].re;
        assert!(fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn single_photon_half_loss() {
        let rho = DensityMatrix::fock(1, 4).unwrap();
        let out = evolve(&rho, &ChannelParams::new(LN_2, 4).unwrap()).unwrap();
        let mut expect = DMatrix::<C64>::zeros(4, 4);
        expect[(0, 0)] = c(0.5);
        expect[(1, 1)] = c(0.5);
        assert!((out.elements() - expect).camax() < 1e-15);
        assert!((mean_photon(&out) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mean_photon_examples() {
        assert_eq!(mean_photon(&DensityMatrix::fock(0, 3).unwrap()), 0.0);
        let spec = PacsSpec::with_dim(c(0.5), 1, 32).unwrap();
        let rho = density_from_state(&build_pacs(&spec).unwrap());
        assert!((mean_photon(&rho) - 1.45).abs() < 1e-10);
    }

    #[test]
    fn vacuum_is_fixed_point() {
        let vac = DensityMatrix::fock(0, 8).unwrap();
        for gt in [0.1, 1.0, 5.0] {
            let out = evolve(&vac, &ChannelParams::new(gt, 8).unwrap()).unwrap();
            assert_eq!(out, vac);
        }
    }

    fn pacs_rho(r: f64, theta: f64, m: usize) -> DensityMatrix {
        let spec = PacsSpec::new(C64::from_polar(r, theta), m).unwrap();
        density_from_state(&build_pacs(&spec).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn semigroup(r in 0.0f64..1.5, theta in 0.0f64..6.3, m in 0usize..3,
                     t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let rho = pacs_rho(r, theta, m);
            let d = rho.dim();
            let step = |x: &DensityMatrix, t| evolve(x, &ChannelParams::new(t, d).unwrap()).unwrap();
            let two = step(&step(&rho, t1), t2);
            let one = step(&rho, t1 + t2);
            prop_assert!((two.elements() - one.elements()).camax() < 1e-9);
        }

        #[test]
        fn physicality_preserved(r in 0.0f64..1.5, theta in 0.0f64..6.3, m in 0usize..3, gt in 0.0f64..3.0) {
            let rho = pacs_rho(r, theta, m);
            let out = evolve(&rho, &ChannelParams::new(gt, rho.dim()).unwrap()).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-10);
            prop_assert!(out.hermiticity_error() < 1e-12);
            prop_assert!(out.min_eigenvalue() > -1e-10);
        }

        #[test]
        fn photon_number_decays_exponentially(r in 0.0f64..1.5, theta in 0.0f64..6.3, m in 0usize..3, gt in 0.0f64..3.0) {
            let rho = pacs_rho(r, theta, m);
            let out = evolve(&rho, &ChannelParams::new(gt, rho.dim()).unwrap()).unwrap();
            prop_assert!((mean_photon(&out) - mean_photon(&rho) * (-gt).exp()).abs() < 1e-9);
        }
    }
}
