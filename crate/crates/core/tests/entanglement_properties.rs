use pacs_core::entanglement::{beam_splitter_output, entanglement_potential, ep_sweep, log_negativity};
use pacs_core::linalg::displacement;
use pacs_core::negativity::{damped_pacs, is_nonincreasing};
use pacs_core::{coherent_state, density_from_state, DensityMatrix, PacsSpec, C64};
use proptest::prelude::*;

fn coherent(alpha: C64, dim: usize) -> DensityMatrix {
    density_from_state(&coherent_state(alpha, dim).unwrap())
}

#[test]
fn coherent_mixtures_are_not_entangling() {
    let d = 28;
    let a = coherent(C64::new(0.5, 0.0), d);
    let b = coherent(C64::new(-0.7, 0.4), d);
    let c = coherent(C64::new(0.1, -1.1), d);
    let mix = DensityMatrix::mixture(&[(0.5, &a), (0.3, &b), (0.2, &c)]).unwrap();
    for rho in [&a, &mix] {
        let r = entanglement_potential(rho).unwrap();
        assert!(r.log_negativity < 1e-6, "{}", r.log_negativity);
    }
}

#[test]
fn truncation_stability() {
    for (alpha, m, gt) in [(0.5, 1, 0.0), (1.0, 1, 0.3), (1.5, 2, 0.6)] {
        let spec = PacsSpec::new(C64::new(alpha, 0.0), m).unwrap();
        let big = PacsSpec::with_dim(spec.alpha(), m, spec.dim() + 8).unwrap();
        let a = ep_sweep(&spec, &[gt]).unwrap()[0].1.log_negativity;
        let b = ep_sweep(&big, &[gt]).unwrap()[0].1.log_negativity;
        assert!((a - b).abs() < 1e-6, "alpha {alpha} m {m}: {a} vs {b}");
    }
}

#[test]
fn sorted_sweep_decays() {
    let spec = PacsSpec::new(C64::new(0.5, 0.0), 1).unwrap();
    let sweep = ep_sweep(&spec, &[0.0, 0.4, 0.8]).unwrap();
    let ep: Vec<f64> = sweep.iter().map(|s| s.1.log_negativity).collect();
    assert!(ep[0] > ep[1] && ep[1] > ep[2] && ep[2] > 0.0, "{ep:?}");
    assert!(is_nonincreasing(&ep, 1e-6));
}

#[test]
fn small_amplitude_loses_potential_faster() {
    let drop = |alpha: f64| {
        let spec = PacsSpec::new(C64::new(alpha, 0.0), 1).unwrap();
        let s = ep_sweep(&spec, &[0.0, 1.0]).unwrap();
        1.0 - s[1].1.log_negativity / s[0].1.log_negativity
    };
    assert!(drop(0.1) > drop(1.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn local_displacements_leave_log_negativity_unchanged(
        r in 0.0f64..1.0, theta in 0.0f64..6.3, gt in 0.0f64..1.0,
        b1 in (-0.3f64..0.3, -0.3f64..0.3), b2 in (-0.3f64..0.3, -0.3f64..0.3),
    ) {
        let spec = PacsSpec::new(C64::from_polar(r, theta), 1).unwrap();
        let rho = damped_pacs(&spec, gt).unwrap();
        let out = beam_splitter_output(&rho);
        let d = rho.dim();
        let moved = out
            .apply_local(&displacement(C64::new(b1.0, b1.1), d), &displacement(C64::new(b2.0, b2.1), d))
            .unwrap();
        let before = log_negativity(&out).unwrap().log_negativity;
        let after = log_negativity(&moved).unwrap().log_negativity;
        prop_assert!((before - after).abs() < 1e-6);
    }

    #[test]
    fn output_is_a_valid_state(r in 0.0f64..1.5, theta in 0.0f64..6.3, m in 0usize..3, gt in 0.0f64..2.0) {
        let spec = PacsSpec::new(C64::from_polar(r, theta), m).unwrap();
        let out = beam_splitter_output(&damped_pacs(&spec, gt).unwrap());
        prop_assert!(out.hermiticity_error() < 1e-12);
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue() > -1e-10);
    }
}
