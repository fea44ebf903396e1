use finsent::econ::dcc::{correlation_loglik, dcc_correlations};
use finsent::econ::garch::constant_variance_loglik;
use finsent::econ::{fit_dcc, fit_garch11};
use finsent::synth::{simulate_dcc, simulate_garch11, white_noise, DccSimSpec};

#[test]
fn garch_recovers_simulated_parameters() {
    let r = simulate_garch11(10_000, 0.05, 0.05, 0.90, 7);
    let fit = fit_garch11(&r).unwrap();
    assert!((fit.alpha - 0.05).abs() <= 0.02, "alpha {}", fit.alpha);
    assert!((fit.beta - 0.90).abs() <= 0.04, "beta {}", fit.beta);
    assert!(fit.sigma2.iter().all(|&s| s > 0.0));
}

#[test]
fn garch_on_iid_noise_finds_no_arch_effect() {
    let r = white_noise(3_000, 11);
    let fit = fit_garch11(&r).unwrap();
    assert!(fit.alpha <= 0.03, "alpha {}", fit.alpha);
    assert!(fit.loglik >= constant_variance_loglik(&r) - 1e-6);
}

#[test]
fn garch_fit_is_deterministic() {
    let r = simulate_garch11(1_000, 0.05, 0.05, 0.90, 3);
    assert_eq!(fit_garch11(&r).unwrap(), fit_garch11(&r).unwrap());
}

#[test]
fn dcc_recovers_simulated_parameters() {
    let sim = simulate_dcc(10_000, &DccSimSpec::default(), 5);
    let fit = fit_dcc(&sim.x, &sim.y).unwrap();
    assert!((fit.alpha - 0.03).abs() <= 0.02, "alpha {}", fit.alpha);
    assert!((fit.beta - 0.95).abs() <= 0.05, "beta {}", fit.beta);
    let realized = sim.rho.iter().sum::<f64>() / sim.rho.len() as f64;
    assert!((fit.mean_rho - realized).abs() <= 0.05);
    let mad = fit.rho_t.iter().zip(&sim.rho).map(|(a, b)| (a - b).abs()).sum::<f64>() / sim.rho.len() as f64;
    assert!(mad <= 0.1, "mad {mad}");
    assert!(fit.rho_t.iter().all(|r| r.abs() < 1.0));
}

#[test]
fn dcc_replay_reproduces_reported_path() {
    let sim = simulate_dcc(2_000, &DccSimSpec::default(), 8);
    let fit = fit_dcc(&sim.x, &sim.y).unwrap();
    let (z1, z2) = (&fit.garch[0].std_residuals, &fit.garch[1].std_residuals);
    let replay = dcc_correlations(z1, z2, fit.s_bar, fit.alpha, fit.beta);
    assert_eq!(replay, fit.rho_t);
    assert_eq!(correlation_loglik(z1, z2, &replay), fit.loglik);
    // The constant-correlation model is nested, so it cannot beat the optimum.
    let constant = correlation_loglik(z1, z2, &dcc_correlations(z1, z2, fit.s_bar, 0.0, 0.0));
    assert!(fit.loglik >= constant - 1e-9);
}

#[test]
fn dcc_on_independent_series_has_near_zero_correlation() {
    let x = simulate_garch11(3_000, 0.05, 0.05, 0.9, 21);
    let y = simulate_garch11(3_000, 0.05, 0.05, 0.9, 22);
    let fit = fit_dcc(&x, &y).unwrap();
    assert!(fit.mean_rho.abs() <= 0.05, "mean rho {}", fit.mean_rho);
}
