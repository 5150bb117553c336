//! Classify parameter tuples `(sigma, eta, alpha, p)` into the known
//! continuity/discontinuity regimes for the Lyapunov exponent of the
//! perturbation family, and sweep grids of such points into CSV rows.
//!
//! Labels are cumulative: a point collects every regime whose hypothesis it
//! satisfies. Prioritizing the strongest result is a plotting choice, not a
//! classification one.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for the equality tests (regime boundary, zero locus).
const EQUALITY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterPoint {
    sigma: f64,
    eta: f64,
    alpha: f64,
    p: f64,
}

impl ParameterPoint {
    pub fn new(sigma: f64, eta: f64, alpha: f64, p: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 1.0 || !eta.is_finite() || eta <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma and eta must be finite and > 1, got sigma={sigma}, eta={eta}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and > 0, got {alpha}"
            )));
        }
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1), got {p}"
            )));
        }
        Ok(ParameterPoint {
            sigma,
            eta,
            alpha,
            p,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// The regimes, in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegionLabel {
    /// `sigma^2 < 2^alpha`: the base cocycle is fiber bunched and the
    /// exponent varies continuously for every p.
    FiberBunchedContinuity,
    /// `eta <= sigma`, `2^(3 alpha) < eta^2`, p off the zero locus: the
    /// exponent is a discontinuity point under arbitrarily small
    /// alpha-Holder perturbations.
    TheoremADiscontinuity,
    /// `2^(3 alpha) = eta^2` within relative 1e-12: the borderline case.
    BoundaryRemark2,
    /// `eta^2 >= 2^(3 alpha)` and `p in (2/3, 1)`.
    BnDiscontinuity,
    /// `eta^2 >= 2^(2 alpha)` and `p in (3/4, 1)`.
    ButlerDiscontinuity,
    /// `eta^2 > 2^(4 alpha)`.
    BockerVianaDiscontinuity,
    /// `sigma < eta` and `2^(3 alpha) < sigma^3 / eta` (the swapped
    /// orientation; the only regime evaluated there).
    Remark1Discontinuity,
    /// `p = ln eta / ln(sigma eta)` within relative 1e-12: the base
    /// exponent vanishes; flagged, not forbidden.
    ZeroExponentLocus,
    /// No hypothesis applies (the unlabeled middle segment of the
    /// number-line diagram).
    Unresolved,
}

pub const ALL_LABELS: [RegionLabel; 9] = [
    RegionLabel::FiberBunchedContinuity,
    RegionLabel::TheoremADiscontinuity,
    RegionLabel::BoundaryRemark2,
    RegionLabel::BnDiscontinuity,
    RegionLabel::ButlerDiscontinuity,
    RegionLabel::BockerVianaDiscontinuity,
    RegionLabel::Remark1Discontinuity,
    RegionLabel::ZeroExponentLocus,
    RegionLabel::Unresolved,
];

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::FiberBunchedContinuity => "FIBER_BUNCHED_CONTINUITY",
            RegionLabel::TheoremADiscontinuity => "THEOREM_A_DISCONTINUITY",
            RegionLabel::BoundaryRemark2 => "BOUNDARY_REMARK2",
            RegionLabel::BnDiscontinuity => "BN_DISCONTINUITY",
            RegionLabel::ButlerDiscontinuity => "BUTLER_DISCONTINUITY",
            RegionLabel::BockerVianaDiscontinuity => "BOCKER_VIANA_DISCONTINUITY",
            RegionLabel::Remark1Discontinuity => "REMARK1_DISCONTINUITY",
            RegionLabel::ZeroExponentLocus => "ZERO_EXPONENT_LOCUS",
            RegionLabel::Unresolved => "UNRESOLVED",
        }
    }

    pub fn is_discontinuity(&self) -> bool {
        matches!(
            self,
            RegionLabel::TheoremADiscontinuity
                | RegionLabel::BnDiscontinuity
                | RegionLabel::ButlerDiscontinuity
                | RegionLabel::BockerVianaDiscontinuity
                | RegionLabel::Remark1Discontinuity
        )
    }
}

impl serde::Serialize for RegionLabel {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The inequality values behind the labels.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Witnesses {
    pub sig2: f64,
    pub eta2: f64,
    pub pow_a: f64,
    pub pow_2a: f64,
    pub pow_3a: f64,
    pub pow_4a: f64,
    pub locus_p: f64,
    pub sig3_over_eta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub point: ParameterPoint,
    pub labels: Vec<RegionLabel>,
    pub witnesses: Witnesses,
}

impl RegionReport {
    pub fn has(&self, label: RegionLabel) -> bool {
        self.labels.contains(&label)
    }

    pub fn labels_joined(&self) -> String {
        let strs: Vec<&str> = self.labels.iter().map(|l| l.as_str()).collect();
        strs.join("|")
    }
}

fn relatively_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQUALITY_REL_TOL * a.abs().max(b.abs())
}

/// Attach every regime whose hypothesis the point satisfies. With
/// `sigma < eta` only the swapped-orientation regime (and the zero locus,
/// which is orientation-free) is evaluated.
pub fn classify(pt: &ParameterPoint) -> RegionReport {
    let sig2 = pt.sigma * pt.sigma;
    let eta2 = pt.eta * pt.eta;
    let witnesses = Witnesses {
        sig2,
        eta2,
        pow_a: pt.alpha.exp2(),
        pow_2a: (2.0 * pt.alpha).exp2(),
        pow_3a: (3.0 * pt.alpha).exp2(),
        pow_4a: (4.0 * pt.alpha).exp2(),
        locus_p: pt.eta.ln() / (pt.sigma * pt.eta).ln(),
        sig3_over_eta: pt.sigma * pt.sigma * pt.sigma / pt.eta,
    };
    let on_locus = relatively_equal(pt.p, witnesses.locus_p);
    let on_boundary = relatively_equal(witnesses.pow_3a, eta2);
    let mut labels = Vec::new();
    if pt.eta <= pt.sigma {
        if sig2 < witnesses.pow_a {
            labels.push(RegionLabel::FiberBunchedContinuity);
        }
        // strictness is decided outside the boundary band: inside it the
        // float comparison is rounding noise
        if witnesses.pow_3a < eta2 && !on_boundary && !on_locus {
            labels.push(RegionLabel::TheoremADiscontinuity);
        }
        if on_boundary {
            labels.push(RegionLabel::BoundaryRemark2);
        }
        if eta2 >= witnesses.pow_3a && pt.p > 2.0 / 3.0 {
            labels.push(RegionLabel::BnDiscontinuity);
        }
        if eta2 >= witnesses.pow_2a && pt.p > 3.0 / 4.0 {
            labels.push(RegionLabel::ButlerDiscontinuity);
        }
        if eta2 > witnesses.pow_4a {
            labels.push(RegionLabel::BockerVianaDiscontinuity);
        }
    } else if witnesses.pow_3a < witnesses.sig3_over_eta {
        labels.push(RegionLabel::Remark1Discontinuity);
    }
    if on_locus {
        labels.push(RegionLabel::ZeroExponentLocus);
    }
    if labels.is_empty() {
        labels.push(RegionLabel::Unresolved);
    }
    labels.sort();

    let report = RegionReport {
        point: *pt,
        labels,
        witnesses,
    };
    // regime disjointness: bunching is incompatible with every
    // discontinuity hypothesis
    if report.has(RegionLabel::FiberBunchedContinuity) {
        assert!(
            report.labels.iter().all(|l| !l.is_discontinuity()),
            "bunched point carries a discontinuity label: {report:?}"
        );
    }
    // nesting: the strict regime implies the weak inequality
    if report.has(RegionLabel::TheoremADiscontinuity) {
        assert!(report.witnesses.eta2 >= report.witnesses.pow_3a);
    }
    report
}

/// Header of the sweep CSV (one row per grid cell).
pub const CSV_HEADER: &str = "sigma,eta,alpha,p,labels,sig2,eta2,pow_a,pow_2a,pow_3a,pow_4a";

impl RegionReport {
    pub fn csv_row(&self) -> String {
        let w = &self.witnesses;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.point.sigma,
            self.point.eta,
            self.point.alpha,
            self.point.p,
            self.labels_joined(),
            w.sig2,
            w.eta2,
            w.pow_a,
            w.pow_2a,
            w.pow_3a,
            w.pow_4a
        )
    }
}

fn axis_centers(range: (f64, f64), steps: u32) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !lo.is_finite() || !hi.is_finite() || lo <= 1.0 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "range must satisfy 1 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if hi == lo {
        return Ok(vec![lo]);
    }
    let width = (hi - lo) / f64::from(steps);
    Ok((0..steps)
        .map(|i| lo + (f64::from(i) + 0.5) * width)
        .collect())
}

/// Classify the centers of a `grid_steps x grid_steps` cell grid over
/// `sigma_range x eta_range` (a degenerate range collapses its axis to one
/// value). Cells with `eta > sigma` are skipped so every emitted row sits in
/// the primary orientation. Row-major: sigma outer, eta inner.
pub fn sweep(
    alpha: f64,
    p: f64,
    sigma_range: (f64, f64),
    eta_range: (f64, f64),
    grid_steps: u32,
) -> Result<Vec<RegionReport>> {
    if grid_steps == 0 {
        return Err(Error::InvalidParameter("grid_steps must be >= 1".into()));
    }
    let sigmas = axis_centers(sigma_range, grid_steps)?;
    let etas = axis_centers(eta_range, grid_steps)?;
    let mut cells = Vec::new();
    for &sigma in &sigmas {
        for &eta in &etas {
            if eta > sigma {
                continue;
            }
            cells.push(ParameterPoint::new(sigma, eta, alpha, p)?);
        }
    }
    if cells.is_empty() {
        return Err(Error::InvalidParameter(
            "empty grid: every cell has eta > sigma".into(),
        ));
    }
    let reports = crate::exec::map_indexed(cells.len() as u64, |i| classify(&cells[i as usize]));
    Ok(reports)
}
