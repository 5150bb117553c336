//! Browser bindings for the explorer page.
//!
//! The callable surface lives in [`ops`] as plain Rust so it can be
//! exercised on the host target; the `#[wasm_bindgen]` exports below are
//! thin shims that only convert errors. Bulk results cross the boundary
//! as one JSON string or one byte buffer per call.

use wasm_bindgen::prelude::*;

pub mod ops {
    use cocycle_lab::cocycle::{
        build_base, build_difference, build_perturbed, holder_bound, holder_norm,
        ConstructionParams,
    };
    use cocycle_lab::lyapunov::{exact_exponent_base, mc_exponent, zero_exponent_p};
    use cocycle_lab::regions::{classify, ParameterPoint, RegionLabel};
    use cocycle_lab::shift::BernoulliParams;
    use cocycle_lab::{Error, Result};
    use serde_json::json;

    /// Palette codes for the region map, one byte per grid cell. Keep in
    /// sync with the legend in www/index.html.
    pub const CODE_UNRESOLVED: u8 = 0;
    pub const CODE_FIBER_BUNCHED: u8 = 1;
    pub const CODE_ZERO_LOCUS: u8 = 2;
    pub const CODE_BOCKER_VIANA: u8 = 3;
    pub const CODE_BN: u8 = 4;
    pub const CODE_BUTLER: u8 = 5;
    pub const CODE_THEOREM_A: u8 = 6;
    pub const CODE_BOUNDARY: u8 = 7;
    pub const CODE_REMARK1: u8 = 8;

    pub const MAX_GRID_CELLS: u32 = 512;
    pub const MAX_CURVE_SAMPLES: u32 = 4096;
    pub const MAX_STEPS: u32 = 10_000_000;
    pub const MAX_TRIALS: u32 = 512;
    /// The exact seminorm enumeration is exponential in k; past 3 it stops
    /// being an interactive operation on a single browser thread.
    pub const MAX_TABLE_K: u32 = 3;

    /// One byte for a whole label set: the sharpest statement wins.
    pub fn display_code(labels: &[RegionLabel]) -> u8 {
        let priority = [
            (RegionLabel::ZeroExponentLocus, CODE_ZERO_LOCUS),
            (RegionLabel::FiberBunchedContinuity, CODE_FIBER_BUNCHED),
            (RegionLabel::BockerVianaDiscontinuity, CODE_BOCKER_VIANA),
            (RegionLabel::BnDiscontinuity, CODE_BN),
            (RegionLabel::ButlerDiscontinuity, CODE_BUTLER),
            (RegionLabel::TheoremADiscontinuity, CODE_THEOREM_A),
            (RegionLabel::BoundaryRemark2, CODE_BOUNDARY),
            (RegionLabel::Remark1Discontinuity, CODE_REMARK1),
        ];
        for (label, code) in priority {
            if labels.contains(&label) {
                return code;
            }
        }
        CODE_UNRESOLVED
    }

    fn centers(lo: f64, hi: f64, cells: u32) -> Result<Vec<f64>> {
        if !lo.is_finite() || !hi.is_finite() || lo <= 1.0 || hi < lo {
            return Err(Error::InvalidParameter(format!(
                "axis must satisfy 1 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / f64::from(cells);
        Ok((0..cells)
            .map(|i| lo + (f64::from(i) + 0.5) * width)
            .collect())
    }

    /// Classify a `cells x cells` grid of cell centers and return one
    /// palette code per cell. Row-major with eta as the row axis: the code
    /// for (row r, column c) sits at `r * cells + c`, where row r has
    /// `eta = eta_lo + (r + 0.5) * (eta_hi - eta_lo) / cells` and column c
    /// the same formula in sigma. Row 0 is the smallest eta; the page
    /// flips vertically when it draws.
    #[allow(clippy::too_many_arguments)]
    pub fn region_grid(
        alpha: f64,
        p: f64,
        sigma_lo: f64,
        sigma_hi: f64,
        eta_lo: f64,
        eta_hi: f64,
        cells: u32,
    ) -> Result<Vec<u8>> {
        if cells == 0 || cells > MAX_GRID_CELLS {
            return Err(Error::InvalidParameter(format!(
                "cells must lie in 1..={MAX_GRID_CELLS}, got {cells}"
            )));
        }
        let sigmas = centers(sigma_lo, sigma_hi, cells)?;
        let etas = centers(eta_lo, eta_hi, cells)?;
        let mut codes = Vec::with_capacity(sigmas.len() * etas.len());
        for &eta in &etas {
            for &sigma in &sigmas {
                let report = classify(&ParameterPoint::new(sigma, eta, alpha, p)?);
                codes.push(display_code(&report.labels));
            }
        }
        Ok(codes)
    }

    /// Full region report for one point, labels and witnesses included.
    pub fn classify_point_json(sigma: f64, eta: f64, alpha: f64, p: f64) -> Result<String> {
        let report = classify(&ParameterPoint::new(sigma, eta, alpha, p)?);
        Ok(serde_json::to_string(&report).expect("report serializes"))
    }

    /// Exact base exponent sampled along p in (0, 1), plus the zero locus.
    pub fn exponent_curve_json(sigma: f64, eta: f64, samples: u32) -> Result<String> {
        if samples < 2 || samples > MAX_CURVE_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "samples must lie in 2..={MAX_CURVE_SAMPLES}, got {samples}"
            )));
        }
        let points: Vec<serde_json::Value> = (0..samples)
            .map(|i| {
                let p = (f64::from(i) + 0.5) / f64::from(samples);
                let exact = exact_exponent_base(sigma, eta, p)?;
                Ok(json!({ "p": p, "exact": exact }))
            })
            .collect::<Result<_>>()?;
        let doc = json!({
            "locus_p": zero_exponent_p(sigma, eta)?,
            "points": points,
        });
        Ok(doc.to_string())
    }

    /// Monte Carlo exponent estimate; `perturb_k = 0` runs the base
    /// cocycle (and attaches the closed form), `k >= 1` the perturbed one.
    #[allow(clippy::too_many_arguments)]
    pub fn exponent_estimate_json(
        sigma: f64,
        eta: f64,
        gamma: f64,
        p: f64,
        perturb_k: u32,
        steps: u32,
        trials: u32,
        seed: u32,
    ) -> Result<String> {
        if steps > MAX_STEPS || trials > MAX_TRIALS {
            return Err(Error::InvalidParameter(format!(
                "budget capped at {MAX_STEPS} steps and {MAX_TRIALS} trials"
            )));
        }
        // alpha only enters the Holder machinery; any valid value builds
        // the same cocycle
        let params = ConstructionParams::new(sigma, eta, 1.0, gamma, perturb_k.max(1))?;
        let coc = if perturb_k == 0 {
            build_base(&params)
        } else {
            build_perturbed(&params)
        };
        let b = BernoulliParams::new(p)?;
        let mut est = mc_exponent(&coc, &b, u64::from(steps), trials, u64::from(seed))?;
        if perturb_k == 0 {
            est = est.with_exact(exact_exponent_base(sigma, eta, p)?);
        }
        let lambda_minus = est.lambda_minus();
        let doc = json!({ "estimate": est, "lambda_minus": lambda_minus });
        Ok(doc.to_string())
    }

    /// Exact Holder norm of the difference cocycle next to the assembled
    /// bound, one row per k.
    pub fn holder_table_json(
        sigma: f64,
        eta: f64,
        alpha: f64,
        gamma: f64,
        k_max: u32,
    ) -> Result<String> {
        if k_max == 0 || k_max > MAX_TABLE_K {
            return Err(Error::InvalidParameter(format!(
                "k_max must lie in 1..={MAX_TABLE_K}, got {k_max}"
            )));
        }
        let rows: Vec<serde_json::Value> = (1..=k_max)
            .map(|k| {
                let params = ConstructionParams::new(sigma, eta, alpha, gamma, k)?;
                let bound = holder_bound(&params);
                let exact = holder_norm(&build_difference(&params), alpha)?;
                Ok(json!({
                    "k": k,
                    "sup": exact.sup,
                    "seminorm": exact.seminorm,
                    "norm": exact.norm,
                    "bound": bound.value,
                    "decays": bound.decays,
                    "within": exact.norm <= bound.value,
                }))
            })
            .collect::<Result<_>>()?;
        Ok(json!({ "alpha": alpha, "gamma": gamma, "rows": rows }).to_string())
    }

    pub fn zero_locus_p(sigma: f64, eta: f64) -> Result<f64> {
        zero_exponent_p(sigma, eta)
    }
}

fn to_js(e: cocycle_lab::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn region_grid(
    alpha: f64,
    p: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    eta_lo: f64,
    eta_hi: f64,
    cells: u32,
) -> Result<Vec<u8>, JsError> {
    ops::region_grid(alpha, p, sigma_lo, sigma_hi, eta_lo, eta_hi, cells).map_err(to_js)
}

#[wasm_bindgen]
pub fn classify_point(sigma: f64, eta: f64, alpha: f64, p: f64) -> Result<String, JsError> {
    ops::classify_point_json(sigma, eta, alpha, p).map_err(to_js)
}

#[wasm_bindgen]
pub fn exponent_curve(sigma: f64, eta: f64, samples: u32) -> Result<String, JsError> {
    ops::exponent_curve_json(sigma, eta, samples).map_err(to_js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn exponent_estimate(
    sigma: f64,
    eta: f64,
    gamma: f64,
    p: f64,
    perturb_k: u32,
    steps: u32,
    trials: u32,
    seed: u32,
) -> Result<String, JsError> {
    ops::exponent_estimate_json(sigma, eta, gamma, p, perturb_k, steps, trials, seed).map_err(to_js)
}

#[wasm_bindgen]
pub fn holder_table(
    sigma: f64,
    eta: f64,
    alpha: f64,
    gamma: f64,
    k_max: u32,
) -> Result<String, JsError> {
    ops::holder_table_json(sigma, eta, alpha, gamma, k_max).map_err(to_js)
}

#[wasm_bindgen]
pub fn zero_locus(sigma: f64, eta: f64) -> Result<f64, JsError> {
    ops::zero_locus_p(sigma, eta).map_err(to_js)
}
