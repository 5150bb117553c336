use cocycle_lab::cocycle::{
    build_base, build_difference, build_perturbed, fiber_bunching_test, holder_bound, holder_norm,
    ConstructionParams, LocallyConstantCocycle,
};
use cocycle_lab::lyapunov::{
    exact_exponent_base, induced_matrix, kac_return_time, mc_exponent,
    sample_return_excursions_with_horizon,
};
use cocycle_lab::regions::{classify, sweep, ParameterPoint, CSV_HEADER};
use cocycle_lab::shift::BernoulliParams;
use cocycle_lab::{Error, Result};
use serde_json::json;

use crate::args::{
    BunchingArgs, ExponentArgs, Format, GeomArgs, HolderArgs, KacArgs, RegionsArgs, VerifySwapArgs,
};
use crate::output;

/// Relative size of the diagonal entries at or below which the swap is
/// certified.
pub const SWAP_DIAG_TOL: f64 = 1e-9;

pub const HOLDER_CSV_HEADER: &str = "k,exact,exact_norm,bound,decays,exact_le_bound";

/// A rendered report plus the pass/fail gate, when the command has one.
pub struct Rendered {
    pub text: String,
    pub gate: Option<bool>,
}

fn construction(geom: &GeomArgs, k: u32) -> Result<ConstructionParams> {
    ConstructionParams::new(geom.sigma, geom.eta, geom.alpha, geom.gamma, k)
}

pub fn exponent(args: &ExponentArgs) -> Result<Rendered> {
    let params = construction(&args.geom, args.perturb.unwrap_or(1))?;
    let b = BernoulliParams::new(args.p)?;
    let coc = match args.perturb {
        Some(_) => build_perturbed(&params),
        None => build_base(&params),
    };
    let mut est = mc_exponent(&coc, &b, args.sample.steps, args.sample.trials, args.sample.seed)?;
    if args.perturb.is_none() {
        est = est.with_exact(exact_exponent_base(args.geom.sigma, args.geom.eta, args.p)?);
    }
    let config = json!({
        "subcommand": "exponent",
        "sigma": args.geom.sigma,
        "eta": args.geom.eta,
        "alpha": args.geom.alpha,
        "gamma": args.geom.gamma,
        "p": args.p,
        "perturb_k": args.perturb,
        "steps": args.sample.steps,
        "trials": args.sample.trials,
        "seed": args.sample.seed,
        "format": "json",
    });
    let lambda_minus = est.lambda_minus();
    let report = json!({
        "config": config,
        "cocycle": coc.descriptor(),
        "estimate": est,
        "lambda_minus": lambda_minus,
    });
    Ok(Rendered {
        text: output::json_doc(&report),
        gate: None,
    })
}

pub fn holder(args: &HolderArgs) -> Result<Rendered> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(Error::InvalidParameter(format!(
            "bad k range {}..{}",
            args.k_min, args.k_max
        )));
    }
    struct Row {
        k: u32,
        exact: Option<cocycle_lab::cocycle::HolderNorm>,
        bound: cocycle_lab::cocycle::HolderBound,
        within: Option<bool>,
    }
    let mut rows = Vec::new();
    for k in args.k_min..=args.k_max {
        let params = construction(&args.geom, k)?;
        let bound = holder_bound(&params);
        let exact = if args.bound_only {
            None
        } else {
            match holder_norm(&build_difference(&params), args.geom.alpha) {
                Ok(norm) => Some(norm),
                Err(Error::Capacity { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        let within = exact.as_ref().map(|n| n.norm <= bound.value);
        rows.push(Row {
            k,
            exact,
            bound,
            within,
        });
    }
    let all_within = rows.iter().all(|r| r.within != Some(false));
    let config = json!({
        "subcommand": "holder",
        "sigma": args.geom.sigma,
        "eta": args.geom.eta,
        "alpha": args.geom.alpha,
        "gamma": args.geom.gamma,
        "k_min": args.k_min,
        "k_max": args.k_max,
        "bound_only": args.bound_only,
        "format": args.format.as_str(),
    });
    let text = match args.format {
        Format::Json => {
            let json_rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k,
                        "exact": r.exact.is_some(),
                        "exact_norm": r.exact,
                        "bound": r.bound,
                        "exact_le_bound": r.within,
                    })
                })
                .collect();
            output::json_doc(&json!({
                "config": config,
                "rows": json_rows,
                "all_within_bound": all_within,
            }))
        }
        Format::Csv => {
            let csv_rows = rows.iter().map(|r| {
                let exact_norm = r
                    .exact
                    .as_ref()
                    .map(|n| n.norm.to_string())
                    .unwrap_or_default();
                let within = r.within.map(|w| w.to_string()).unwrap_or_default();
                format!(
                    "{},{},{},{},{},{}",
                    r.k,
                    r.exact.is_some(),
                    exact_norm,
                    r.bound.value,
                    r.bound.decays,
                    within
                )
            });
            output::csv_doc(&config, HOLDER_CSV_HEADER, csv_rows)
        }
    };
    Ok(Rendered {
        text,
        gate: Some(all_within),
    })
}

pub fn verify_swap(args: &VerifySwapArgs) -> Result<Rendered> {
    let params = construction(&args.geom, args.k)?;
    let scan = if args.no_perturb {
        cocycle_lab::lyapunov::verify_swap_control(&params)?
    } else {
        cocycle_lab::lyapunov::verify_swap(&params)?
    };
    let mut pass = scan.max_diag_residual <= SWAP_DIAG_TOL;

    let induced = if args.returns > 0 {
        let b = BernoulliParams::new(args.p)?;
        let coc = if args.no_perturb {
            build_base(&params)
        } else {
            build_perturbed(&params)
        };
        let batch = cocycle_lab::lyapunov::sample_return_excursions(
            &params,
            &b,
            args.returns,
            args.seed.seed,
        );
        let mut max_diag = 0.0f64;
        let mut max_det = 0.0f64;
        for exc in &batch.excursions {
            let m = induced_matrix(&coc, exc)?;
            let norm = m.try_spectral_norm()?;
            max_diag = max_diag.max(m.a11.abs().max(m.a22.abs()) / norm);
            max_det = max_det.max((m.det() - 1.0).abs());
        }
        let ok = max_diag <= SWAP_DIAG_TOL;
        pass = pass && ok;
        Some(json!({
            "requested": args.returns,
            "sampled": batch.excursions.len(),
            "truncated": batch.truncated,
            "max_diag_residual": max_diag,
            "max_det_error": max_det,
            "pass": ok,
        }))
    } else {
        None
    };

    let config = json!({
        "subcommand": "verify-swap",
        "sigma": args.geom.sigma,
        "eta": args.geom.eta,
        "alpha": args.geom.alpha,
        "gamma": args.geom.gamma,
        "k": args.k,
        "p": args.p,
        "no_perturb": args.no_perturb,
        "returns": args.returns,
        "seed": args.seed.seed,
        "format": "json",
    });
    let report = json!({
        "config": config,
        "scan": scan,
        "induced": induced,
        "threshold": SWAP_DIAG_TOL,
        "pass": pass,
    });
    Ok(Rendered {
        text: output::json_doc(&report),
        gate: Some(pass),
    })
}

pub fn regions(args: &RegionsArgs) -> Result<Rendered> {
    let is_sweep =
        args.sigma_range.is_some() || args.eta_range.is_some() || args.grid_steps.is_some();
    if is_sweep {
        let sigma_range = args.sigma_range.unwrap_or((args.sigma, args.sigma));
        let eta_range = args.eta_range.unwrap_or((args.eta, args.eta));
        let grid_steps = args.grid_steps.unwrap_or(1);
        let reports = sweep(args.alpha, args.p, sigma_range, eta_range, grid_steps)?;
        let config = json!({
            "subcommand": "regions",
            "alpha": args.alpha,
            "p": args.p,
            "sigma_range": [sigma_range.0, sigma_range.1],
            "eta_range": [eta_range.0, eta_range.1],
            "grid_steps": grid_steps,
            "format": "csv",
        });
        let rows = reports.iter().map(|r| r.csv_row());
        Ok(Rendered {
            text: output::csv_doc(&config, CSV_HEADER, rows),
            gate: None,
        })
    } else {
        let pt = ParameterPoint::new(args.sigma, args.eta, args.alpha, args.p)?;
        let report = classify(&pt);
        let config = json!({
            "subcommand": "regions",
            "sigma": args.sigma,
            "eta": args.eta,
            "alpha": args.alpha,
            "p": args.p,
            "format": "json",
        });
        Ok(Rendered {
            text: output::json_doc(&json!({"config": config, "report": report})),
            gate: None,
        })
    }
}

pub fn kac(args: &KacArgs) -> Result<Rendered> {
    if args.count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    // only the marker shape and the measure matter here; the matrix family
    // is irrelevant, so the geometry stays at its defaults
    let params = ConstructionParams::new(4.0, 2.0, 0.4, 4.0 / 3.0, args.k)?;
    let b = BernoulliParams::new(args.p)?;
    let batch =
        sample_return_excursions_with_horizon(&params, &b, args.count, args.seed.seed, args.horizon);
    let expected = kac_return_time(&params, &b);
    let mean = batch.mean_return_time();
    let stderr = batch.return_time_stderr();
    let relative_error = mean.map(|m| (m - expected).abs() / expected);
    let config = json!({
        "subcommand": "kac",
        "k": args.k,
        "p": args.p,
        "count": args.count,
        "horizon": args.horizon,
        "seed": args.seed.seed,
        "format": "json",
    });
    let report = json!({
        "config": config,
        "sampled": batch.excursions.len(),
        "truncated": batch.truncated,
        "truncation_fraction": batch.truncated as f64 / args.count as f64,
        "mean_return_time": mean,
        "stderr": stderr,
        "kac_expected": expected,
        "relative_error": relative_error,
    });
    Ok(Rendered {
        text: output::json_doc(&report),
        gate: None,
    })
}

pub fn bunching(args: &BunchingArgs) -> Result<Rendered> {
    let coc = if args.identity {
        LocallyConstantCocycle::identity()
    } else {
        let params = ConstructionParams::new(args.sigma, args.eta, args.alpha, 4.0 / 3.0, 1)?;
        build_base(&params)
    };
    let report = fiber_bunching_test(&coc, args.alpha, args.n_max)?;
    let status = if report.bunched_at.is_some() {
        "BUNCHED_AT"
    } else {
        "NOT_FOUND"
    };
    let config = json!({
        "subcommand": "bunching",
        "sigma": args.sigma,
        "eta": args.eta,
        "alpha": args.alpha,
        "n_max": args.n_max,
        "identity": args.identity,
        "format": "json",
    });
    Ok(Rendered {
        text: output::json_doc(&json!({
            "config": config,
            "status": status,
            "report": report,
        })),
        gate: None,
    })
}

pub fn repro() -> Rendered {
    let outcomes = crate::accept::run_all();
    let all_passed = outcomes.iter().all(|o| o.passed);
    let criteria: Vec<_> = outcomes
        .iter()
        .map(|o| {
            json!({
                "index": o.index,
                "name": o.name,
                "passed": o.passed,
                "detail": o.detail,
            })
        })
        .collect();
    let report = json!({
        "config": {"subcommand": "repro", "format": "json"},
        "criteria": criteria,
        "all_passed": all_passed,
    });
    Rendered {
        text: output::json_doc(&report),
        gate: Some(all_passed),
    }
}
