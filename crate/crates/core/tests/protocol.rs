use noisemagic::analytic::{fidelity_ad, CodeParams};
use noisemagic::clifford::enumerate_stabilizer_states;
use noisemagic::magic::sre2;
use noisemagic::par::Execution;
use noisemagic::protocol::{
    decompose_alpha_beta_xi, ensemble_run, ensemble_run_with, master_inequality_check, no_click_distill,
    post_error_layer_rom, run_trajectory, trajectory_seed, AlphaBetaMeans, Measures, NoiseModel, ProtocolConfig,
};
use noisemagic::qcore::{purity, ComplexMatrix, DensityMatrix, C64};
use noisemagic::Error;

fn ad(n: usize, k: usize, p: f64, samples: usize) -> ProtocolConfig {
    ProtocolConfig::new(n, k, NoiseModel::AmplitudeDamping { p }, samples, 7)
}

#[test]
fn noiseless_trajectory_is_trivial() {
    let table = enumerate_stabilizer_states(2).unwrap();
    let cfg = ad(4, 2, 0.0, 1).with_measures(Measures::all());
    for seed in 0..5 {
        let r = run_trajectory(&cfg, seed, Some(&table)).unwrap();
        assert!((r.s_u - 1.0).abs() < 1e-12);
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!((r.rom.unwrap() - 1.0).abs() < 1e-9);
        assert!(r.rho_l.matrix().max_abs_diff(DensityMatrix::zero_state(2).matrix()) < 1e-12);
        let d = r.decomposition.unwrap();
        assert!(d.alpha.abs() < 1e-12 && (d.beta - 1.0).abs() < 1e-12 && d.xi_trace_norm < 1e-10);
    }
}

#[test]
fn full_damping_matches_annealed_half() {
    let s = ensemble_run(&ad(2, 1, 1.0, 400)).unwrap();
    let target = fidelity_ad(1.0, CodeParams::new(2, 1).unwrap()).unwrap();
    assert!((target - 0.5).abs() < 1e-14);
    assert!(s.quenched_fidelity.within(target, 3.0, 1e-12), "{:?}", s.quenched_fidelity);
}

#[test]
fn coherent_noise_keeps_outputs_pure() {
    for alpha in [0.4, 1.3] {
        let cfg = ProtocolConfig::new(4, 2, NoiseModel::Mixed { p: 0.0, alpha }, 30, 3);
        let s = ensemble_run(&cfg).unwrap();
        for r in &s.records {
            assert!((purity(&r.rho_l) - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn decomposition_examples() {
    let ideal = DensityMatrix::zero_state(2);
    let s = 0.37;
    let flat = ComplexMatrix::identity(4).scale_real(s / 4.0);
    let (a, b, xi) = decompose_alpha_beta_xi(&flat, &ideal).unwrap();
    assert!((a - s).abs() < 1e-15 && b.abs() < 1e-15 && xi.frobenius_norm() < 1e-15);
    assert!(decompose_alpha_beta_xi(&flat, &DensityMatrix::maximally_mixed(2)).is_err());
    assert!(decompose_alpha_beta_xi(&ComplexMatrix::identity(2), &ideal).is_err());

    let cfg = ad(4, 2, 0.35, 1).with_measures(Measures { alpha_beta_xi: true, ..Measures::default() });
    for seed in 0..10 {
        let r = run_trajectory(&cfg, seed, None).unwrap();
        let (a, b, xi) = decompose_alpha_beta_xi(&r.lambda, &ideal).unwrap();
        let mut recon = xi.clone();
        recon.axpy(C64::new(b, 0.0), ideal.matrix());
        for i in 0..4 {
            recon[(i, i)] += a / 4.0;
        }
        assert!(recon.max_abs_diff(&r.lambda) < 1e-10);
        assert!((a + b - r.s_u).abs() < 1e-10);
        assert!(xi.trace().norm() < 1e-10 && ideal.matrix().matmul(&xi).trace().norm() < 1e-10);
    }
}

#[test]
fn master_inequality_has_no_violations() {
    let cfg = ad(4, 2, 0.4, 200).with_measures(Measures { alpha_beta_xi: true, distances: true, ..Measures::default() });
    let s = ensemble_run(&cfg).unwrap();
    let m = s.alpha_beta_xi.unwrap();
    assert_eq!(m.master_inequality_violations, 0);
    assert!(m.max_identity_defect < 1e-10);

    let cfg = ad(4, 2, 0.0, 5).with_measures(Measures { alpha_beta_xi: true, ..Measures::default() });
    let s = ensemble_run(&cfg).unwrap();
    let means = AlphaBetaMeans { alpha: 0.0, beta: 1.0 };
    for r in &s.records {
        let c = master_inequality_check(r, means, &DensityMatrix::zero_state(2)).unwrap();
        assert!(c.lhs < 1e-12 && c.rhs < 1e-12 && c.satisfied);
    }
}

#[test]
fn execution_mode_does_not_change_results() {
    let cfg = ad(4, 2, 0.5, 24).with_measures(Measures::all());
    let a = ensemble_run_with(&cfg, Execution::Sequential).unwrap();
    let b = ensemble_run_with(&cfg, Execution::Parallel).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_ne!(trajectory_seed(7, 0), trajectory_seed(7, 1));
    assert_ne!(trajectory_seed(7, 0), trajectory_seed(8, 0));
}

#[test]
fn single_sample_summary_is_the_record() {
    let table_cfg = ad(4, 2, 0.3, 1).with_measures(Measures::all());
    let s = ensemble_run(&table_cfg).unwrap();
    let r = &s.records[0];
    assert_eq!(s.n_used, 1);
    assert_eq!(s.quenched_fidelity.mean, r.fidelity);
    assert_eq!(s.quenched_fidelity.stderr, 0.0);
    assert!(s.mean_state.matrix().max_abs_diff(r.rho_l.matrix()) < 1e-15);
    assert!((s.rom_of_mean.unwrap() - r.rom.unwrap()).abs() < 1e-9);
    assert!(s.hs_concentration.unwrap().mean < 1e-15);
}

#[test]
fn summary_invariants() {
    let cfg = ad(4, 2, 0.6, 60).with_measures(Measures::all());
    let s = ensemble_run(&cfg).unwrap();
    assert!(s.rom_of_mean.unwrap() <= s.mean_rom.unwrap().mean + 1e-6);
    assert!((0.0..=1.0).contains(&s.quenched_fidelity.mean));
    assert_eq!(s.n_used + s.n_excluded, 60);
}

#[test]
fn config_validation() {
    assert!(matches!(ensemble_run(&ad(3, 1, 0.1, 5)), Err(Error::InvalidParameter(_))));
    assert!(ensemble_run(&ad(4, 0, 0.1, 5)).is_err());
    assert!(ensemble_run(&ad(4, 4, 0.1, 5)).is_err());
    assert!(ensemble_run(&ad(4, 2, 0.1, 0)).is_err());
    assert!(ensemble_run(&ad(10, 4, 0.1, 1).with_measures(Measures::all())).is_err());
    assert!(ensemble_run(&ad(4, 2, 1.5, 1)).is_err());
}

#[test]
fn post_error_layer_examples() {
    let t2 = enumerate_stabilizer_states(2).unwrap();
    let zero = post_error_layer_rom(&ad(2, 1, 0.0, 10), &t2, Execution::Parallel).unwrap();
    assert!((zero.mean - 1.0).abs() < 1e-9);
    let dep = ProtocolConfig::new(2, 1, NoiseModel::DepolarizingGlobal { p: 0.6 }, 10, 1);
    let r = post_error_layer_rom(&dep, &t2, Execution::Parallel).unwrap();
    assert!(r.mean >= 1.0 - 1e-9 && r.mean <= 1.0 + 1e-7);
    let damped = post_error_layer_rom(&ad(2, 1, 0.5, 20), &t2, Execution::Parallel).unwrap();
    assert!(damped.mean > 1.0);
    assert!(post_error_layer_rom(&ad(2, 1, 0.5, 2), &enumerate_stabilizer_states(1).unwrap(), Execution::Parallel)
        .is_err());
}

#[test]
fn no_click_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r0 = no_click_distill(0.0).unwrap();
    assert!((r0.probability - 1.0).abs() < 1e-12);
    assert!((r0.state[0].re - h).abs() < 1e-12 && (r0.state[1].re - h).abs() < 1e-12);
    let r1 = no_click_distill(1.0).unwrap();
    assert!((r1.probability - 0.5).abs() < 1e-12);
    assert!((r1.state[0].re - 1.0).abs() < 1e-12 && r1.state[1].norm() < 1e-12);
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let r = no_click_distill(p).unwrap();
        assert!((r.probability - (1.0 - p / 2.0)).abs() < 1e-12);
        assert!(r.outcome_mismatch < 1e-12);
        let norm = (2.0 - p).sqrt();
        assert!((r.state[0].re - 1.0 / norm).abs() < 1e-12);
        assert!((r.state[1].re - (1.0 - p).sqrt() / norm).abs() < 1e-12);
        let m2 = sre2(&DensityMatrix::from_pure(&r.state).unwrap()).unwrap();
        if i == 0 || i == 10 {
            assert!(m2.abs() < 1e-10);
        } else {
            assert!(m2 > 0.0);
        }
    }
    assert!(no_click_distill(1.2).is_err());
}
