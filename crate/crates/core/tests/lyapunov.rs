use std::f64::consts::PI;

use anderson_core::lyapunov::{
    combined_std_error, gamma_curve, lyapunov_matrix_estimate, lyapunov_matrix_estimate_on,
    lyapunov_vector_estimate, EnsembleConfig, Estimator, HalfLine,
};
use anderson_core::{Exec, SingleSitePotential};

fn ex1() -> SingleSitePotential {
    SingleSitePotential::constant(1.0).unwrap()
}

#[test]
fn free_generator_only_gives_alpha() {
    let cfg = EnsembleConfig::new(0.0, 20_000, 8, 1).unwrap();
    let est = lyapunov_vector_estimate(&ex1(), -4.0, &cfg).unwrap();
    assert!((est.gamma_hat - 2.0).abs() < 0.02, "{}", est.gamma_hat);
}

#[test]
fn below_spectrum_sanity_band() {
    let cfg = EnsembleConfig::new(0.5, 20_000, 16, 2).unwrap();
    let est = lyapunov_vector_estimate(&ex1(), -4.0, &cfg).unwrap();
    assert!(
        (3f64.sqrt() * 0.9..=2.2).contains(&est.gamma_hat),
        "{}",
        est.gamma_hat
    );
}

#[test]
fn estimators_agree_where_gamma_is_not_small() {
    let cfg = EnsembleConfig::new(0.5, 20_000, 32, 3).unwrap();
    for e in [-4.0, -1.0, 2.0] {
        let v = lyapunov_vector_estimate(&ex1(), e, &cfg).unwrap();
        let m = lyapunov_matrix_estimate(&ex1(), e, &cfg).unwrap();
        let se = combined_std_error(&v, &m);
        assert!(
            (v.gamma_hat - m.gamma_hat).abs() <= 3.0 * se,
            "E = {e}: {} vs {} (se {se:e})",
            v.gamma_hat,
            m.gamma_hat
        );
    }
}

#[test]
fn negative_half_line_agrees() {
    let cfg = EnsembleConfig::new(0.5, 20_000, 32, 4).unwrap();
    for e in [-1.0, 2.0] {
        let pos = lyapunov_matrix_estimate_on(&ex1(), e, &cfg, HalfLine::Positive).unwrap();
        let neg = lyapunov_matrix_estimate_on(&ex1(), e, &cfg, HalfLine::Negative).unwrap();
        let se = combined_std_error(&pos, &neg);
        assert!(
            (pos.gamma_hat - neg.gamma_hat).abs() <= 3.0 * se,
            "E = {e}: {} vs {}",
            pos.gamma_hat,
            neg.gamma_hat
        );
    }
}

#[test]
fn matrix_estimate_is_nonnegative_at_critical_energies() {
    let cfg = EnsembleConfig::new(0.5, 5_000, 8, 5).unwrap();
    for e in [PI * PI, PI * PI + 1.0, 4.0 * PI * PI, 4.0 * PI * PI + 1.0] {
        let est = lyapunov_matrix_estimate(&ex1(), e, &cfg).unwrap();
        assert!(est.gamma_hat >= -1e-12, "E = {e}: {}", est.gamma_hat);
    }
}

#[test]
fn curve_is_independent_of_execution_mode() {
    let energies = [-2.0, 0.5, 3.0, 30.0];
    let seq = EnsembleConfig::new(0.3, 2_000, 6, 9)
        .unwrap()
        .with_exec(Exec::Sequential);
    let par = seq.clone().with_exec(Exec::Parallel);
    let a = gamma_curve(&ex1(), &energies, &seq, Estimator::VectorNorm);
    let b = gamma_curve(&ex1(), &energies, &par, Estimator::VectorNorm);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
