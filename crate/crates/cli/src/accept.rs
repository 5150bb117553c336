//! The acceptance suite: ten numbered checks covering the quantitative
//! claims the library is built around. `cocycle-lab repro` chains them and
//! the `acceptance` test target asserts them one by one.

use std::time::{Duration, Instant};

use cocycle_lab::cocycle::{
    build_base, build_difference, build_perturbed, fiber_bunching_test, holder_bound, holder_norm,
    ConstructionParams,
};
use cocycle_lab::lyapunov::{
    exact_exponent_base, induced_exponent_check, induced_matrix, kac_return_time, mc_exponent,
    sample_return_excursions, verify_swap,
};
use cocycle_lab::regions::{classify, sweep, ParameterPoint, RegionLabel};
use cocycle_lab::shift::BernoulliParams;

use crate::args::{ExponentArgs, GeomArgs, KacArgs, SampleArgs, SeedArg, VerifySwapArgs};
use crate::commands;

const DIAG_RESIDUAL_TOL: f64 = 1e-9;
const OFFDIAG_REL_TOL: f64 = 1e-10;
const DET_TOL: f64 = 1e-10;
const EXPONENT_ABS_ERR: f64 = 0.01;
const COLLAPSE_LIMIT: f64 = 0.05;
const KAC_REL_TOL: f64 = 0.02;
const TRUNCATION_LIMIT: f64 = 1e-3;
const SINGLE_THREAD_BUDGET: Duration = Duration::from_secs(10);
const COLLAPSE_BUDGET: Duration = Duration::from_secs(120);

pub struct CriterionOutcome {
    pub index: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    /// One printable pass/fail line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2}  {:<26} {}  {}",
            self.index,
            self.name,
            if self.passed { "pass" } else { "FAIL" },
            self.detail
        )
    }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=10).map(run).collect()
}

pub fn run(index: u8) -> CriterionOutcome {
    match index {
        1 => exact_formula_agreement(),
        2 => swap_identity(),
        3 => holder_decay(),
        4 => induced_antidiagonality(),
        5 => zero_exponent_collapse(),
        6 => kac_validation(),
        7 => induced_relation(),
        8 => bunching_boundary(),
        9 => region_classifier(),
        10 => determinism(),
        _ => panic!("criteria are numbered 1..=10, got {index}"),
    }
}

fn default_params(k: u32) -> ConstructionParams {
    ConstructionParams::new(4.0, 2.0, 0.4, 4.0 / 3.0, k).expect("valid default parameters")
}

fn half() -> BernoulliParams {
    BernoulliParams::new(0.5).expect("valid probability")
}

fn outcome(index: u8, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        index,
        name,
        passed,
        detail,
    }
}

fn exact_formula_agreement() -> CriterionOutcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool");
    let started = Instant::now();
    let est = pool
        .install(|| mc_exponent(&build_base(&default_params(1)), &half(), 100_000, 64, 0))
        .expect("estimate");
    let elapsed = started.elapsed();
    let exact = exact_exponent_base(4.0, 2.0, 0.5).expect("valid parameters");
    let err = (est.lambda_plus - exact).abs();
    let passed = err <= 3.0 * est.stderr && err < EXPONENT_ABS_ERR && elapsed < SINGLE_THREAD_BUDGET;
    outcome(
        1,
        "exact formula agreement",
        passed,
        format!(
            "estimate {:.8} vs exact {:.8}, |err| {:.2e} (3*stderr {:.2e}), {:.2?} on one thread",
            est.lambda_plus,
            exact,
            err,
            3.0 * est.stderr,
            elapsed
        ),
    )
}

fn swap_identity() -> CriterionOutcome {
    let mut worst_diag = 0.0f64;
    let mut worst_offdiag = 0.0f64;
    let mut worst_det = 0.0f64;
    let mut words = 0u64;
    for k in 1..=3 {
        let report = verify_swap(&default_params(k)).expect("k <= 3 is within capacity");
        worst_diag = worst_diag.max(report.max_diag_residual);
        worst_offdiag = worst_offdiag.max(report.max_offdiag_rel_error.unwrap_or(f64::INFINITY));
        worst_det = worst_det.max(report.max_det_error);
        words += report.words_checked;
    }
    let passed =
        worst_diag <= DIAG_RESIDUAL_TOL && worst_offdiag <= OFFDIAG_REL_TOL && worst_det <= DET_TOL;
    outcome(
        2,
        "swap identity",
        passed,
        format!(
            "k=1..3 over {words} context words: diag {worst_diag:.2e}, offdiag vs closed form {worst_offdiag:.2e}, det {worst_det:.2e}"
        ),
    )
}

fn holder_decay() -> CriterionOutcome {
    let mut exacts = Vec::new();
    let mut all_within = true;
    for k in 1..=4 {
        let params = default_params(k);
        let bound = holder_bound(&params);
        let exact =
            holder_norm(&build_difference(&params), 0.4).expect("k <= 4 is within capacity");
        all_within &= exact.norm <= bound.value;
        exacts.push(exact.norm);
    }
    let shrinks = exacts[3] < exacts[0];
    let steep = ConstructionParams::new(4.0, 2.0, 0.8, 4.0 / 3.0, 1).expect("valid parameters");
    let steep_decays = holder_bound(&steep).decays;
    let passed = all_within && shrinks && !steep_decays;
    outcome(
        3,
        "holder decay",
        passed,
        format!(
            "exact {:.4} (k=1) -> {:.4} (k=4), all within bound: {all_within}, alpha=0.8 decay flag: {steep_decays}",
            exacts[0], exacts[3]
        ),
    )
}

fn induced_antidiagonality() -> CriterionOutcome {
    let params = default_params(2);
    let coc = build_perturbed(&params);
    let batch = sample_return_excursions(&params, &half(), 1000, 0);
    let mut matrices = Vec::with_capacity(batch.excursions.len());
    let mut max_diag = 0.0f64;
    for exc in &batch.excursions {
        let m = induced_matrix(&coc, exc).expect("excursion word covers the passage");
        max_diag = max_diag.max(m.a11.abs().max(m.a22.abs()) / m.spectral_norm());
        matrices.push(m);
    }
    // the pair product is diagonal; its off-diagonal contamination is the
    // factors' diagonal residue scaled by both factor norms, so that is the
    // stable normalization (the product's own norm collapses under
    // cancellation and would amplify the ratio arbitrarily)
    let mut max_pair_offdiag = 0.0f64;
    for pair in matrices.windows(2) {
        let prod = pair[1] * pair[0];
        let scale = pair[1].spectral_norm() * pair[0].spectral_norm();
        max_pair_offdiag = max_pair_offdiag.max(prod.a12.abs().max(prod.a21.abs()) / scale);
    }
    let passed = batch.truncated == 0
        && matrices.len() == 1000
        && max_diag <= DIAG_RESIDUAL_TOL
        && max_pair_offdiag <= DIAG_RESIDUAL_TOL;
    outcome(
        4,
        "induced anti-diagonality",
        passed,
        format!(
            "{} excursions: diag residual {max_diag:.2e}, pair-product offdiag {max_pair_offdiag:.2e}",
            matrices.len()
        ),
    )
}

fn zero_exponent_collapse() -> CriterionOutcome {
    let started = Instant::now();
    let coc = build_perturbed(&default_params(3));
    let mut magnitudes = Vec::new();
    for steps in [10_000u64, 100_000, 1_000_000] {
        let est = mc_exponent(&coc, &half(), steps, 32, 0).expect("estimate");
        magnitudes.push(est.lambda_plus.abs());
    }
    let elapsed = started.elapsed();
    let decreasing = magnitudes.windows(2).all(|w| w[1] < w[0]);
    let passed = magnitudes[2] < COLLAPSE_LIMIT && decreasing && elapsed < COLLAPSE_BUDGET;
    outcome(
        5,
        "zero-exponent collapse",
        passed,
        format!(
            "|estimate| {:.5} -> {:.5} -> {:.5} over T=1e4,1e5,1e6, {:.1?} wall",
            magnitudes[0], magnitudes[1], magnitudes[2], elapsed
        ),
    )
}

fn kac_validation() -> CriterionOutcome {
    let params = default_params(2);
    let batch = sample_return_excursions(&params, &half(), 100_000, 0);
    let expected = kac_return_time(&params, &half());
    let mean = batch.mean_return_time().unwrap_or(f64::NAN);
    let rel = (mean - expected).abs() / expected;
    let truncation = batch.truncated as f64 / batch.requested as f64;
    let passed = rel < KAC_REL_TOL && truncation < TRUNCATION_LIMIT;
    outcome(
        6,
        "kac validation",
        passed,
        format!(
            "mean return {mean:.4} vs {expected} expected (rel {rel:.4}), truncation {truncation:.1e}"
        ),
    )
}

fn induced_relation() -> CriterionOutcome {
    let params = default_params(2);
    let report = induced_exponent_check(&params, &build_base(&params), &half(), 50_000, 16, 0)
        .expect("estimate");
    let exact = exact_exponent_base(4.0, 2.0, 0.5).expect("valid parameters");
    let gap_to_exact = (report.induced.lambda_plus * report.cylinder_measure - exact).abs();
    let allowance = 3.0 * report.combined_stderr;
    let passed = gap_to_exact <= allowance
        && report.relation_gap <= allowance
        && report.truncated_trials == 0;
    outcome(
        7,
        "induced relation",
        passed,
        format!(
            "induced*measure {:.6} vs exact {:.6} (gap {:.1e}, allowed {:.1e})",
            report.induced.lambda_plus * report.cylinder_measure,
            exact,
            gap_to_exact,
            allowance
        ),
    )
}

fn cell_centers(lo: f64, hi: f64, cells: u32) -> Vec<f64> {
    let width = (hi - lo) / f64::from(cells);
    (0..cells)
        .map(|i| lo + (f64::from(i) + 0.5) * width)
        .collect()
}

fn bunching_boundary() -> CriterionOutcome {
    let sigmas = cell_centers(1.0, 2.0, 50);
    let alphas = cell_centers(0.1, 2.0, 50);
    let mut disagreements = 0u32;
    let mut checked = 0u32;
    for &sigma in &sigmas {
        for &alpha in &alphas {
            let params = ConstructionParams::new(sigma, sigma, alpha, 4.0 / 3.0, 1)
                .expect("grid centers are valid");
            let report =
                fiber_bunching_test(&build_base(&params), alpha, 12).expect("within capacity");
            let predicted = sigma * sigma < alpha.exp2();
            if report.bunched_at.is_some() != predicted {
                disagreements += 1;
            }
            checked += 1;
        }
    }
    let passed = disagreements == 0 && checked == 2500;
    outcome(
        8,
        "bunching boundary",
        passed,
        format!("{checked} grid cells, {disagreements} disagreements with sigma^2 < 2^alpha"),
    )
}

fn region_classifier() -> CriterionOutcome {
    let bunched = classify(&ParameterPoint::new(1.2, 1.1, 1.0, 0.5).expect("valid point"));
    let ok_bunched = bunched.labels == vec![RegionLabel::FiberBunchedContinuity];

    let strict = classify(&ParameterPoint::new(4.0, 2.0, 0.4, 0.5).expect("valid point"));
    let ok_strict = strict.labels
        == vec![
            RegionLabel::TheoremADiscontinuity,
            RegionLabel::BockerVianaDiscontinuity,
        ];

    let locus = classify(&ParameterPoint::new(4.0, 2.0, 0.4, 1.0 / 3.0).expect("valid point"));
    let ok_locus = locus.has(RegionLabel::ZeroExponentLocus)
        && !locus.has(RegionLabel::TheoremADiscontinuity);

    // eta-sweep at fixed sigma: a no-discontinuity zone, then the
    // eta^2 >= 2^(2a) zone, then the Theorem-A zone from eta^2 = 2^(3a)
    let rows = sweep(0.5, 0.8, (4.0, 4.0), (1.01, 3.99), 60).expect("valid grid");
    let first_butler = rows
        .iter()
        .position(|r| r.has(RegionLabel::ButlerDiscontinuity));
    let first_theorem_a = rows
        .iter()
        .position(|r| r.has(RegionLabel::TheoremADiscontinuity));
    let ok_sweep = match (first_butler, first_theorem_a) {
        (Some(b), Some(t)) => {
            b > 0
                && t > b
                && rows[..b]
                    .iter()
                    .all(|r| r.labels.iter().all(|l| !l.is_discontinuity()))
                && rows[b..t].iter().all(|r| {
                    r.has(RegionLabel::ButlerDiscontinuity)
                        && !r.has(RegionLabel::TheoremADiscontinuity)
                })
                && rows[t..].iter().all(|r| {
                    r.has(RegionLabel::TheoremADiscontinuity)
                        && r.has(RegionLabel::ButlerDiscontinuity)
                })
        }
        _ => false,
    };
    let passed = ok_bunched && ok_strict && ok_locus && ok_sweep;
    outcome(
        9,
        "region classifier",
        passed,
        format!(
            "worked points: bunched {ok_bunched}, strict {ok_strict}, locus {ok_locus}; eta-sweep zones ordered: {ok_sweep}"
        ),
    )
}

fn determinism() -> CriterionOutcome {
    fn exponent_base_payload() -> String {
        commands::exponent(&ExponentArgs {
            geom: default_geom(),
            p: 0.5,
            perturb: None,
            sample: SampleArgs {
                steps: 100_000,
                trials: 64,
                seed: 0,
            },
        })
        .expect("valid arguments")
        .text
    }
    fn swap_payload() -> String {
        commands::verify_swap(&VerifySwapArgs {
            geom: default_geom(),
            k: 2,
            p: 0.5,
            no_perturb: false,
            returns: 1000,
            seed: SeedArg { seed: 0 },
        })
        .expect("valid arguments")
        .text
    }
    fn exponent_perturbed_payload() -> String {
        commands::exponent(&ExponentArgs {
            geom: default_geom(),
            p: 0.5,
            perturb: Some(3),
            sample: SampleArgs {
                steps: 1_000_000,
                trials: 32,
                seed: 0,
            },
        })
        .expect("valid arguments")
        .text
    }
    fn kac_payload() -> String {
        commands::kac(&KacArgs {
            k: 2,
            p: 0.5,
            count: 100_000,
            horizon: cocycle_lab::lyapunov::DEFAULT_RETURN_HORIZON,
            seed: SeedArg { seed: 0 },
        })
        .expect("valid arguments")
        .text
    }
    fn default_geom() -> GeomArgs {
        GeomArgs {
            sigma: 4.0,
            eta: 2.0,
            alpha: 0.4,
            gamma: 4.0 / 3.0,
        }
    }

    let pool_of = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool")
    };
    let one = pool_of(1);
    let eight = pool_of(8);
    let payloads: [(&str, fn() -> String); 4] = [
        ("exponent-base", exponent_base_payload),
        ("verify-swap", swap_payload),
        ("exponent-perturbed", exponent_perturbed_payload),
        ("kac", kac_payload),
    ];
    let mut mismatched = Vec::new();
    for (name, payload) in payloads {
        if one.install(payload) != eight.install(payload) {
            mismatched.push(name);
        }
    }
    let passed = mismatched.is_empty();
    outcome(
        10,
        "determinism",
        passed,
        if passed {
            "criteria 1, 4, 5, 6 render byte-identical JSON on 1 and 8 workers".to_string()
        } else {
            format!("worker-count mismatch in: {}", mismatched.join(", "))
        },
    )
}
