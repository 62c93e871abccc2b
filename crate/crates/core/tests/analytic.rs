use noisemagic::analytic::{
    alpha_boundary, fidelity_ad, fidelity_mixed, lambda_ad, p_critical, purity_mean, replica_transfer_trace,
    tau_closed_form, tau_effective, transfer_factor_mixed, CodeParams,
};
use noisemagic::channels::{amplitude_damping, compose, mixed_error, z_rotation, KrausChannel};

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

#[test]
fn lambda_endpoints_and_critical_consistency() {
    assert_eq!(lambda_ad(0.0).unwrap(), 2.0);
    assert_eq!(lambda_ad(1.0).unwrap(), 0.5);
    assert!(lambda_ad(-0.1).is_err() && lambda_ad(1.1).is_err());
    assert!((lambda_ad(0.53516).unwrap() - 2f64.sqrt()).abs() < 1e-4);
    for i in 1..10 {
        let r = i as f64 / 10.0;
        assert!((lambda_ad(p_critical(r).unwrap()).unwrap() - 2f64.powf(r)).abs() < 1e-12);
    }
}

#[test]
fn fidelity_examples() {
    for (n, k) in [(2, 1), (4, 2), (6, 3), (10, 1)] {
        let c = CodeParams::new(n, k).unwrap();
        assert!((fidelity_ad(0.0, c).unwrap() - 1.0).abs() < 1e-14);
    }
    let c = CodeParams::new(2, 1).unwrap();
    assert!((fidelity_ad(1.0, c).unwrap() - 0.5).abs() < 1e-14);
    assert!(CodeParams::new(4, 0).is_err() && CodeParams::new(4, 4).is_err());
}

/// Direct, unscaled evaluation of the closed form.
fn fidelity_direct(lam: f64, n: i32, k: i32) -> f64 {
    let two_n = 2f64.powi(n);
    let ln = lam.powi(n);
    (two_n - 1.0) * (1.0 + ln) / ((two_n - 2f64.powi(k)) * ln + 2f64.powi(n + k) - 1.0)
}

#[test]
fn stabilized_form_matches_direct_evaluation() {
    for (n, k) in [(2, 1), (4, 2), (6, 3), (8, 2), (12, 6)] {
        let c = CodeParams::new(n as usize, k as usize).unwrap();
        for p in grid(51) {
            let direct = fidelity_direct(lambda_ad(p).unwrap(), n, k);
            assert!((fidelity_ad(p, c).unwrap() - direct).abs() < 1e-13);
        }
    }
}

#[test]
fn fidelity_monotone_and_bounded() {
    for (n, k) in [(2, 1), (4, 2), (6, 3), (8, 4), (6, 1)] {
        let c = CodeParams::new(n, k).unwrap();
        let mut prev = f64::INFINITY;
        for p in grid(201) {
            let f = fidelity_ad(p, c).unwrap();
            assert!(f > 0.0 && f <= 1.0 + 1e-15);
            assert!(f <= prev + 1e-12);
            prev = f;
        }
    }
}

#[test]
fn large_system_step_at_critical_point() {
    let c = CodeParams::new(80, 40).unwrap();
    let pc = p_critical(0.5).unwrap();
    assert!(fidelity_ad(pc - 0.1, c).unwrap() > 0.99);
    let below = fidelity_ad(pc + 0.1, c).unwrap();
    assert!(below.is_finite() && below < 1e-3);
    let c = CodeParams::new(1000, 500).unwrap();
    assert!(fidelity_ad(0.3, c).unwrap().is_finite() && fidelity_ad(0.9, c).unwrap() > 0.0);
}

#[test]
fn mixed_noise_reduces_to_damping() {
    assert_eq!(transfer_factor_mixed(0.0, 0.0).unwrap(), 4.0);
    for a in [0.0, 0.7, 2.0, 3.1] {
        assert!((transfer_factor_mixed(1.0, a).unwrap() - 1.0).abs() < 1e-15);
    }
    for (n, k) in [(4, 2), (6, 3)] {
        let c = CodeParams::new(n, k).unwrap();
        for p in grid(50) {
            assert!((fidelity_mixed(p, 0.0, c).unwrap() - fidelity_ad(p, c).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn critical_values() {
    let pc = p_critical(0.5).unwrap();
    assert!((pc - (2f64.powf(1.75) - 2f64.powf(1.5))).abs() < 1e-15);
    assert!((pc - 0.53516).abs() < 1e-5);
    for i in 1..10 {
        let r = i as f64 / 10.0;
        let alt = (-(2f64.powf(2.0 + r)) + 2f64.powf((5.0 + r) / 2.0)) / 2.0;
        assert!((p_critical(r).unwrap() - alt).abs() < 1e-12);
        assert!(alpha_boundary(p_critical(r).unwrap(), r).unwrap().unwrap().abs() < 1e-6);
    }
    let a0 = alpha_boundary(0.0, 0.5).unwrap().unwrap();
    assert!((a0.cos() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((a0 - 1.14372).abs() < 1e-5);
    assert_eq!(alpha_boundary(0.9, 0.5).unwrap(), None);
    assert_eq!(alpha_boundary(1.0, 0.5).unwrap(), None);
    assert!(p_critical(0.0).is_err() && p_critical(1.0).is_err());
}

#[test]
fn tau_routes_agree_and_purity_bounds() {
    let c = CodeParams::new(4, 2).unwrap();
    assert!((tau_effective(0.3, c).unwrap() - tau_closed_form(0.3, c).unwrap()).abs() < 1e-12);
    for (n, k) in [(2, 1), (4, 2), (6, 3), (6, 2)] {
        let c = CodeParams::new(n, k).unwrap();
        assert!((tau_effective(0.0, c).unwrap() - 1.0).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for p in grid(41) {
            let t = tau_effective(p, c).unwrap();
            assert!((t - tau_closed_form(p, c).unwrap()).abs() < 1e-12);
            assert!(t <= prev + 1e-12);
            prev = t;
            let pur = purity_mean(t, c);
            assert!(pur >= 1.0 / c.logical_dim() - 1e-12 && pur <= 1.0 + 1e-12);
        }
    }
    let big = CodeParams::new(400, 200).unwrap();
    let t = tau_effective(0.9, big).unwrap();
    assert!(t.abs() < 1e-10);
    assert!((purity_mean(t, big) - 1.0 / big.logical_dim()).abs() < 1e-10 / big.logical_dim().max(1.0) + 1e-60);
}

#[test]
fn replica_trace_oracles() {
    assert!((replica_transfer_trace(&KrausChannel::identity(1)).unwrap() - 4.0).abs() < 1e-15);
    for p in grid(11) {
        let ad = amplitude_damping(p).unwrap();
        assert!((replica_transfer_trace(&ad).unwrap() - 2.0 * lambda_ad(p).unwrap()).abs() < 1e-12);
        for a in [0.0, 0.5, 1.3, 2.9] {
            let b = transfer_factor_mixed(p, a).unwrap();
            assert!((replica_transfer_trace(&mixed_error(p, a).unwrap()).unwrap() - b).abs() < 1e-12);
            let composed = compose(&ad, &z_rotation(a).unwrap()).unwrap();
            assert!((replica_transfer_trace(&composed).unwrap() - b).abs() < 1e-12);
        }
    }
    assert!(replica_transfer_trace(&KrausChannel::identity(2)).is_err());
}
