//! Lyapunov exponents: the exact Birkhoff value for the diagonal base
//! cocycle, a renormalized Monte Carlo estimator for arbitrary locally
//! constant cocycles, the horizontal/vertical swap verifier for the
//! perturbed family, and first-return (induced cocycle) machinery over the
//! marker cylinder.
//!
//! All estimators draw from seeded counter-mode streams, one stream per
//! trial, and aggregate in trial-index order, so results are bit-identical
//! across thread counts.

use serde::Serialize;

use crate::cocycle::{
    build_base, build_perturbed, closed_form_bn, iterate, iterate_scaled, ConstructionParams,
    LocallyConstantCocycle,
};
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::shift::{sample_symbol, stream_rng, BernoulliParams, Word};

/// Stream index offset separating induced-trial draws from ambient-trial
/// draws under the same user seed.
const INDUCED_STREAM_OFFSET: u64 = 1 << 32;

/// Default forward-scan horizon (symbols) for first-return sampling.
pub const DEFAULT_RETURN_HORIZON: u64 = 1_000_000;

/// Monte Carlo estimate of the top Lyapunov exponent, in nats per iterate.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentEstimate {
    pub lambda_plus: f64,
    /// Sample standard deviation across trials divided by sqrt(trials).
    pub stderr: f64,
    pub trials: u32,
    #[serde(rename = "steps")]
    pub steps_per_trial: u64,
    /// Exact reference value when one is known (the diagonal base cocycle).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

impl ExponentEstimate {
    /// For SL(2) cocycles `det = 1` forces the exponents to sum to zero.
    pub fn lambda_minus(&self) -> f64 {
        -self.lambda_plus
    }

    pub fn with_exact(mut self, exact: f64) -> Self {
        self.exact = Some(exact);
        self
    }
}

/// Exact top exponent of the diagonal base cocycle under Bernoulli(p):
/// `|(1 - p) ln eta - p ln sigma|` (a Birkhoff average of the log of the
/// diagonal stretch).
pub fn exact_exponent_base(sigma: f64, eta: f64, p: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 1.0 || !eta.is_finite() || eta <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma and eta must be finite and > 1, got sigma={sigma}, eta={eta}"
        )));
    }
    let b = BernoulliParams::new(p)?;
    Ok(((1.0 - b.p()) * eta.ln() - b.p() * sigma.ln()).abs())
}

/// The excluded zero-exponent locus `p = ln eta / ln(sigma eta)`: the only
/// Bernoulli parameter where the base exponent vanishes.
pub fn zero_exponent_p(sigma: f64, eta: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 1.0 || !eta.is_finite() || eta <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma and eta must be finite and > 1, got sigma={sigma}, eta={eta}"
        )));
    }
    Ok(eta.ln() / (sigma * eta).ln())
}

fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo top-exponent estimate: `trials` independent symbol streams,
/// each a fresh counter-mode stream of the seed; per trial the running
/// product is renormalized by its spectral norm every step and the log-norms
/// accumulate, so the estimate is `(sum of logs) / steps` with no overflow.
pub fn mc_exponent(
    coc: &LocallyConstantCocycle,
    b: &BernoulliParams,
    steps: u64,
    trials: u32,
    seed: u64,
) -> Result<ExponentEstimate> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter(format!(
            "trials must be >= 2, got {trials}"
        )));
    }
    let lo = coc.window_lo();
    let hi = steps as i64 + coc.window_hi();
    let outcomes = crate::exec::map_indexed(u64::from(trials), |t| -> Result<f64> {
        let mut rng = stream_rng(seed, t);
        let symbols = (lo..=hi).map(|_| sample_symbol(&mut rng, b)).collect();
        let segment = Word::new(lo, symbols).expect("nonempty sampled segment");
        let (m, log_scale) = iterate_scaled(coc, &segment, steps, 1)?;
        Ok((log_scale + m.spectral_norm().ln()) / steps as f64)
    });
    let samples = outcomes.into_iter().collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_and_stderr(&samples);
    Ok(ExponentEstimate {
        lambda_plus: mean,
        stderr,
        trials,
        steps_per_trial: steps,
        exact: None,
    })
}

/// One first-return passage through the marker cylinder: the coordinates
/// `[0, n-1]` and `[return_time, return_time + n - 1]` both spell the marker
/// and no intermediate time does. `word` spans `[-2k, return_time + 2k]`,
/// wide enough both to drive the cocycle for `return_time` steps and to
/// re-check the closing marker.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnExcursion {
    pub word: Word,
    pub return_time: u64,
    /// The free middle block between the two markers (possibly empty).
    pub label: Vec<u8>,
}

/// A batch of sampled excursions. Scans that exhaust the horizon are counted
/// in `truncated`, never silently dropped or emitted as excursions.
#[derive(Debug, Clone, Serialize)]
pub struct ExcursionBatch {
    pub excursions: Vec<ReturnExcursion>,
    pub truncated: u64,
    pub horizon: u64,
    pub requested: u64,
}

impl ExcursionBatch {
    pub fn mean_return_time(&self) -> Option<f64> {
        if self.excursions.is_empty() {
            return None;
        }
        let sum: f64 = self.excursions.iter().map(|e| e.return_time as f64).sum();
        Some(sum / self.excursions.len() as f64)
    }

    pub fn return_time_stderr(&self) -> Option<f64> {
        if self.excursions.len() < 2 {
            return None;
        }
        let samples: Vec<f64> = self.excursions.iter().map(|e| e.return_time as f64).collect();
        Some(mean_and_stderr(&samples).1)
    }
}

/// Expected first-return time to the marker cylinder under Bernoulli(p),
/// by Kac: `1 / mu_p(Z_n) = 1 / ((1-p)^k p^(k+1))`.
pub fn kac_return_time(params: &ConstructionParams, b: &BernoulliParams) -> f64 {
    1.0 / crate::shift::CylinderSpec::new(params.marker()).measure(b)
}

fn marker_at(word: &Word, marker: &Word, t: i64) -> bool {
    (0..marker.len() as i64).all(|i| word.at(t + i) == marker.at(i))
}

/// Sample `count` first-return excursions with the default horizon.
pub fn sample_return_excursions(
    params: &ConstructionParams,
    b: &BernoulliParams,
    count: u64,
    seed: u64,
) -> ExcursionBatch {
    sample_return_excursions_with_horizon(params, b, count, seed, DEFAULT_RETURN_HORIZON)
}

/// Sample first-return excursions: each start is conditioned on the marker
/// cylinder (coordinates `[0, n-1]` forced, everything else i.i.d.) and the
/// scan walks forward to the first `t > 0` whose window respells the marker.
/// A scan reaching `horizon` without returning counts as truncated.
pub fn sample_return_excursions_with_horizon(
    params: &ConstructionParams,
    b: &BernoulliParams,
    count: u64,
    seed: u64,
    horizon: u64,
) -> ExcursionBatch {
    let marker = params.marker();
    let n = marker.len() as i64;
    let back = i64::from(2 * params.k());
    let outcomes = crate::exec::map_indexed(count, |j| -> Option<ReturnExcursion> {
        let mut rng = stream_rng(seed, j);
        let mut symbols = Vec::with_capacity((back + 4 * n) as usize);
        for _ in 0..back {
            symbols.push(sample_symbol(&mut rng, b));
        }
        symbols.extend_from_slice(marker.symbols());
        let mut word = Word::new(-back, symbols).expect("nonempty start");
        let mut t = 1i64;
        loop {
            if t as u64 > horizon {
                return None;
            }
            // the scan at t reads [t, t + n - 1]
            while word.hi() < t + n - 1 {
                word.push(sample_symbol(&mut rng, b));
            }
            if marker_at(&word, &marker, t) {
                break;
            }
            t += 1;
        }
        // the word now spans [-2k, t + 2k]: wide enough both to iterate for
        // t steps and to re-check the closing marker
        while word.hi() < t + back {
            word.push(sample_symbol(&mut rng, b));
        }
        let label = (n..t).map(|i| word.at(i)).collect();
        Some(ReturnExcursion {
            word,
            return_time: t as u64,
            label,
        })
    });
    let mut excursions = Vec::with_capacity(count as usize);
    let mut truncated = 0u64;
    for outcome in outcomes {
        match outcome {
            Some(exc) => excursions.push(exc),
            None => truncated += 1,
        }
    }
    ExcursionBatch {
        excursions,
        truncated,
        horizon,
        requested: count,
    }
}

/// The induced-cocycle value over one excursion: the ambient product along
/// the full passage, `iterate(coc, word, return_time)`.
///
/// For the perturbed family the result is anti-diagonal: the only
/// non-identity perturbation factors inside `[0, return_time)` act at times
/// 0, k, 2k (the marker cannot recur earlier), so the passage is one swap
/// block followed by diagonal travel.
pub fn induced_matrix(coc: &LocallyConstantCocycle, exc: &ReturnExcursion) -> Result<Mat2> {
    iterate(coc, &exc.word, exc.return_time)
}

/// Exhaustive numerical check that the n-step product of the perturbed
/// cocycle over the marker cylinder swaps the horizontal and vertical
/// directions.
#[derive(Debug, Clone, Serialize)]
pub struct SwapReport {
    /// max over context words of `max(|m11|, |m22|) / ||M||`; at or below
    /// 1e-9 this certifies the swap, at 1 the product is diagonal.
    pub max_diag_residual: f64,
    /// max residual of `M e1 || e2` and `M e2 || e1` (column parallelism).
    pub max_column_residual: f64,
    /// max relative deviation of the off-diagonal entries from the closed
    /// form; `None` for the unperturbed control (no closed form applies).
    pub max_offdiag_rel_error: Option<f64>,
    pub max_det_error: f64,
    pub words_checked: u64,
    pub perturbed: bool,
}

/// Word-enumeration cap for the swap scan (free coordinates).
const SWAP_FREE_BIT_CAP: u32 = 22;

fn swap_scan(
    params: &ConstructionParams,
    coc: &LocallyConstantCocycle,
    perturbed: bool,
) -> Result<SwapReport> {
    let marker = params.marker();
    let n = marker.len() as i64;
    let back = i64::from(2 * params.k());
    // context span for an n-step product: [-2k, n - 1 + 2k]
    let lo = -back;
    let hi = n - 1 + back;
    let free: Vec<i64> = (lo..=hi).filter(|&i| !(0..n).contains(&i)).collect();
    if free.len() as u32 > SWAP_FREE_BIT_CAP {
        return Err(Error::Capacity {
            required: 1u128 << free.len(),
            cap: 1u128 << SWAP_FREE_BIT_CAP,
            fallback: None,
        });
    }
    let closed = closed_form_bn(params);
    let mut symbols = vec![0u8; (hi - lo + 1) as usize];
    for i in 0..n {
        symbols[(i - lo) as usize] = marker.at(i);
    }
    let mut word = Word::new(lo, symbols).expect("nonempty span");

    let mut report = SwapReport {
        max_diag_residual: 0.0,
        max_column_residual: 0.0,
        max_offdiag_rel_error: perturbed.then_some(0.0),
        max_det_error: 0.0,
        words_checked: 1 << free.len(),
        perturbed,
    };
    for mask in 0u64..(1u64 << free.len()) {
        for (j, &index) in free.iter().enumerate() {
            word.set(index, ((mask >> j) & 1) as u8);
        }
        let m = iterate(coc, &word, n as u64)?;
        let norm = m.spectral_norm();
        let diag = m.a11.abs().max(m.a22.abs()) / norm;
        let col1 = m.a11.abs() / m.a11.hypot(m.a21);
        let col2 = m.a22.abs() / m.a12.hypot(m.a22);
        report.max_diag_residual = report.max_diag_residual.max(diag);
        report.max_column_residual = report.max_column_residual.max(col1).max(col2);
        report.max_det_error = report.max_det_error.max((m.det() - 1.0).abs());
        if let Some(off) = report.max_offdiag_rel_error.as_mut() {
            let e12 = (m.a12 - closed.a12).abs() / closed.a12.abs();
            let e21 = (m.a21 - closed.a21).abs() / closed.a21.abs();
            *off = off.max(e12).max(e21);
        }
    }
    Ok(report)
}

/// Verify the swap for the perturbed cocycle over every context word around
/// the marker (all free coordinates enumerated; the product provably does
/// not depend on them, and the scan confirms it numerically).
pub fn verify_swap(params: &ConstructionParams) -> Result<SwapReport> {
    swap_scan(params, &build_perturbed(params), true)
}

/// Control run with the perturbation replaced by the identity: the product
/// is diagonal, so the diagonal residual comes out at exactly 1.
pub fn verify_swap_control(params: &ConstructionParams) -> Result<SwapReport> {
    swap_scan(params, &build_base(params), false)
}

/// Comparison of the induced exponent over the marker cylinder against the
/// ambient exponent. With `tau` the mean return time and `mu` the cylinder
/// measure, the two sides reported are
///
/// ```text
/// lhs = lambda_induced * mu          (induced estimate scaled down by Kac)
/// rhs = lambda_ambient * (tau * mu)  (tau * mu -> 1; keeps the sampling
///                                     error of tau explicit)
/// ```
///
/// which must agree within `3 * combined_stderr` for the base cocycle.
#[derive(Debug, Clone, Serialize)]
pub struct InducedReport {
    pub ambient: ExponentEstimate,
    /// Exponent per induced step (per return), not per ambient step.
    pub induced: ExponentEstimate,
    pub mean_return_time: f64,
    pub return_time_stderr: f64,
    pub cylinder_measure: f64,
    pub induced_times_measure: f64,
    pub ambient_times_kac: f64,
    pub relation_gap: f64,
    pub combined_stderr: f64,
    pub truncated_trials: u32,
}

/// Estimate the induced exponent by driving one long trajectory per trial:
/// start conditioned on the marker cylinder, iterate the ambient cocycle
/// with per-step renormalization, count marker returns, and normalize the
/// accumulated log by the number of returns. The ambient exponent is
/// estimated independently (disjoint stream indices under the same seed).
pub fn induced_exponent_check(
    params: &ConstructionParams,
    coc: &LocallyConstantCocycle,
    b: &BernoulliParams,
    steps: u64,
    trials: u32,
    seed: u64,
) -> Result<InducedReport> {
    let ambient = mc_exponent(coc, b, steps, trials, seed)?;
    let marker = params.marker();
    let n = marker.len() as i64;
    let back = i64::from(2 * params.k());
    let measure = crate::shift::CylinderSpec::new(params.marker()).measure(b);
    // match the ambient sampling effort: about steps ambient iterates per
    // trial means about steps * mu returns
    let returns_target = ((steps as f64 * measure).round() as u64).max(16);
    let horizon = 8 * steps + 10_000;

    struct Trial {
        log_total: f64,
        returns: u64,
        time: u64,
        truncated: bool,
    }

    let outcomes = crate::exec::map_indexed(u64::from(trials), |t| -> Result<Trial> {
        let mut rng = stream_rng(seed, INDUCED_STREAM_OFFSET + t);
        let mut symbols = Vec::with_capacity((back + n) as usize + steps as usize);
        for _ in 0..back {
            symbols.push(sample_symbol(&mut rng, b));
        }
        symbols.extend_from_slice(marker.symbols());
        let mut word = Word::new(-back, symbols).expect("nonempty start");
        let mut m = Mat2::identity();
        let mut log_total = 0.0f64;
        let mut returns = 0u64;
        let mut time = 0i64;
        let mut truncated = false;
        while returns < returns_target {
            if time as u64 >= horizon {
                truncated = true;
                break;
            }
            // one ambient step needs the window at `time`; the return scan
            // at `time + 1` reads up to `time + n`, which covers it
            while word.hi() < time + n {
                word.push(sample_symbol(&mut rng, b));
            }
            m = coc.value_in_context(&word, time) * m;
            let s = m.spectral_norm();
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "running product degenerate at step {time} (norm {s})"
                )));
            }
            // power-of-two renormalization, exact in binary floating point
            let e = s.log2().round();
            m = m.scale((-e).exp2());
            log_total += e * std::f64::consts::LN_2;
            time += 1;
            if marker_at(&word, &marker, time) {
                returns += 1;
            }
        }
        if returns == 0 {
            return Err(Error::InvalidParameter(format!(
                "no marker return within horizon {horizon}"
            )));
        }
        log_total += m.spectral_norm().ln();
        Ok(Trial {
            log_total,
            returns,
            time: time as u64,
            truncated,
        })
    });
    let trials_out = outcomes.into_iter().collect::<Result<Vec<Trial>>>()?;

    let induced_samples: Vec<f64> = trials_out
        .iter()
        .map(|t| t.log_total / t.returns as f64)
        .collect();
    let return_samples: Vec<f64> = trials_out
        .iter()
        .map(|t| t.time as f64 / t.returns as f64)
        .collect();
    let truncated_trials = trials_out.iter().filter(|t| t.truncated).count() as u32;

    let (lambda_ind, se_ind) = mean_and_stderr(&induced_samples);
    let (mean_return, se_return) = mean_and_stderr(&return_samples);
    let induced = ExponentEstimate {
        lambda_plus: lambda_ind,
        stderr: se_ind,
        trials,
        steps_per_trial: returns_target,
        exact: None,
    };
    let lhs = lambda_ind * measure;
    let rhs = ambient.lambda_plus * mean_return * measure;
    let combined = measure
        * (se_ind + mean_return * ambient.stderr + ambient.lambda_plus.abs() * se_return);
    Ok(InducedReport {
        relation_gap: (lhs - rhs).abs(),
        induced_times_measure: lhs,
        ambient_times_kac: rhs,
        combined_stderr: combined,
        ambient,
        induced,
        mean_return_time: mean_return,
        return_time_stderr: se_return,
        cylinder_measure: measure,
        truncated_trials,
    })
}
