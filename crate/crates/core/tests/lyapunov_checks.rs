//! Estimator behavior at moderate scale: convergence to the exact base
//! exponent, return-time statistics against Kac, the induced-exponent
//! relation, and the collapse of the perturbed exponent.

use cocycle_lab::cocycle::{build_base, build_perturbed, ConstructionParams};
use cocycle_lab::lyapunov::{
    exact_exponent_base, induced_exponent_check, induced_matrix, kac_return_time, mc_exponent,
    sample_return_excursions, verify_swap, verify_swap_control, zero_exponent_p,
};
use cocycle_lab::shift::BernoulliParams;

fn params(k: u32) -> ConstructionParams {
    ConstructionParams::new(4.0, 2.0, 0.4, 4.0 / 3.0, k).unwrap()
}

fn half() -> BernoulliParams {
    BernoulliParams::new(0.5).unwrap()
}

#[test]
fn mc_error_decreases_with_steps() {
    let coc = build_base(&params(1));
    let exact = exact_exponent_base(4.0, 2.0, 0.5).unwrap();
    let mut last_err = f64::INFINITY;
    for steps in [1_000u64, 10_000, 100_000] {
        let est = mc_exponent(&coc, &half(), steps, 64, 0).unwrap();
        let err = (est.lambda_plus - exact).abs();
        assert!(err < last_err, "steps={steps}: error {err} grew from {last_err}");
        last_err = err;
    }
    assert!(last_err < 0.01, "final error {last_err}");
}

#[test]
fn mc_symmetric_case_is_a_random_walk() {
    // at sigma = eta, p = 1/2 the log norm is |S_T| for a driftless walk with
    // step ln 2, so the estimator mean sits near s * sqrt(2 / (pi T)), not 0
    let p = ConstructionParams::new(2.0, 2.0, 0.4, 4.0 / 3.0, 1).unwrap();
    let coc = build_base(&p);
    let steps = 20_000u64;
    let est = mc_exponent(&coc, &half(), steps, 32, 1).unwrap();
    let bias_scale = std::f64::consts::LN_2 * (2.0 / (std::f64::consts::PI * steps as f64)).sqrt();
    assert!(
        est.lambda_plus > bias_scale / 3.0 && est.lambda_plus < 3.0 * bias_scale,
        "estimate {} vs walk scale {bias_scale}",
        est.lambda_plus
    );
}

#[test]
fn mc_tracks_p_dependence() {
    // exponent formula is exact for any p, not just 1/2
    let coc = build_base(&params(1));
    for p in [0.2, 0.7] {
        let b = BernoulliParams::new(p).unwrap();
        let est = mc_exponent(&coc, &b, 50_000, 32, 3).unwrap();
        let exact = exact_exponent_base(4.0, 2.0, p).unwrap();
        assert!(
            (est.lambda_plus - exact).abs() <= 4.0 * est.stderr.max(1e-4),
            "p={p}: {} vs {exact}",
            est.lambda_plus
        );
    }
}

#[test]
fn mc_near_locus_is_near_zero() {
    // on the zero locus the estimate carries the |random walk| bias
    // s * sqrt(2 / (pi T)) with step variance (1-p) ln^2 eta + p ln^2 sigma
    let coc = build_base(&params(1));
    let locus = zero_exponent_p(4.0, 2.0).unwrap();
    let b = BernoulliParams::new(locus).unwrap();
    let steps = 50_000u64;
    let est = mc_exponent(&coc, &b, steps, 32, 4).unwrap();
    let step_var = (1.0 - locus) * 2f64.ln().powi(2) + locus * 4f64.ln().powi(2);
    let bias_scale = step_var.sqrt() * (2.0 / (std::f64::consts::PI * steps as f64)).sqrt();
    assert!(
        est.lambda_plus > 0.0 && est.lambda_plus < 3.0 * bias_scale,
        "estimate {} vs walk scale {bias_scale}",
        est.lambda_plus
    );
}

#[test]
fn perturbed_exponent_collapses() {
    // lambda(B_n) = 0: at T = 1e5 the estimate must sit well below the
    // base exponent 0.3466
    let coc = build_perturbed(&params(3));
    let est = mc_exponent(&coc, &half(), 100_000, 16, 0).unwrap();
    assert!(
        est.lambda_plus.abs() < 0.05,
        "perturbed estimate {}",
        est.lambda_plus
    );
}

#[test]
fn swap_certified_up_to_k4() {
    for k in 1..=4u32 {
        let report = verify_swap(&params(k)).unwrap();
        assert!(report.max_diag_residual <= 1e-9, "k={k}");
        assert!(report.max_column_residual <= 1e-9, "k={k}");
        assert!(report.max_offdiag_rel_error.unwrap() <= 1e-10, "k={k}");
        assert!(report.max_det_error <= 1e-10, "k={k}");
        assert_eq!(report.words_checked, 1u64 << (4 * k));
    }
    let control = verify_swap_control(&params(2)).unwrap();
    assert_eq!(control.max_diag_residual, 1.0);
}

#[test]
fn kac_within_three_stderr() {
    let p = params(2);
    let batch = sample_return_excursions(&p, &half(), 20_000, 0);
    assert_eq!(batch.truncated, 0);
    let mean = batch.mean_return_time().unwrap();
    let se = batch.return_time_stderr().unwrap();
    let kac = kac_return_time(&p, &half());
    assert_eq!(kac, 32.0);
    assert!(
        (mean - kac).abs() <= 3.0 * se,
        "mean {mean} vs kac {kac} (se {se})"
    );
}

#[test]
fn kac_tracks_p_off_half() {
    let p = params(1);
    let b = BernoulliParams::new(0.7).unwrap();
    let batch = sample_return_excursions(&p, &b, 20_000, 2);
    let mean = batch.mean_return_time().unwrap();
    let se = batch.return_time_stderr().unwrap();
    // 1 / ((0.3)^1 (0.7)^2) = 6.8027...
    let kac = kac_return_time(&p, &b);
    assert!((kac - 6.802721088435375).abs() < 1e-12);
    assert!((mean - kac).abs() <= 3.0 * se);
}

#[test]
fn induced_matrices_stay_antidiagonal_at_k2() {
    let p = params(2);
    let coc = build_perturbed(&p);
    let batch = sample_return_excursions(&p, &half(), 1_000, 7);
    assert_eq!(batch.truncated, 0);
    for exc in &batch.excursions {
        let m = induced_matrix(&coc, exc).unwrap();
        let norm = m.spectral_norm();
        assert!(m.a11.abs() / norm <= 1e-9);
        assert!(m.a22.abs() / norm <= 1e-9);
        assert!((m.det() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn induced_relation_for_base_at_k2() {
    let p = params(2);
    let report = induced_exponent_check(&p, &build_base(&p), &half(), 50_000, 16, 0).unwrap();
    assert_eq!(report.truncated_trials, 0);
    assert!(
        report.relation_gap <= 3.0 * report.combined_stderr,
        "gap {} vs combined stderr {}",
        report.relation_gap,
        report.combined_stderr
    );
    // the ambient side also has the exact value
    let exact = exact_exponent_base(4.0, 2.0, 0.5).unwrap();
    assert!((report.ambient.lambda_plus - exact).abs() <= 4.0 * report.ambient.stderr);
    assert!((report.mean_return_time - 32.0).abs() <= 0.5);
}

#[test]
fn induced_exponent_of_perturbed_is_small() {
    // lambda(B_n) = 0 forces the induced exponent to 0 as well; per return
    // the estimate stays far below the unperturbed induced value, which is
    // about mean_return * 0.3466 = 2.77 at k=1
    let p = params(1);
    let report =
        induced_exponent_check(&p, &build_perturbed(&p), &half(), 50_000, 16, 1).unwrap();
    assert!(
        report.induced.lambda_plus.abs() < 0.4,
        "induced estimate {}",
        report.induced.lambda_plus
    );
}

#[test]
fn estimates_are_bitwise_reproducible() {
    let p = params(2);
    let coc = build_perturbed(&p);
    let a = mc_exponent(&coc, &half(), 5_000, 8, 123).unwrap();
    let b = mc_exponent(&coc, &half(), 5_000, 8, 123).unwrap();
    assert_eq!(a.lambda_plus.to_bits(), b.lambda_plus.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    let r1 = induced_exponent_check(&p, &coc, &half(), 5_000, 4, 9).unwrap();
    let r2 = induced_exponent_check(&p, &coc, &half(), 5_000, 4, 9).unwrap();
    assert_eq!(
        r1.induced.lambda_plus.to_bits(),
        r2.induced.lambda_plus.to_bits()
    );
    assert_eq!(r1.mean_return_time.to_bits(), r2.mean_return_time.to_bits());
}
