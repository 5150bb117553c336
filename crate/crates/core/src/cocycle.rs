//! Locally constant SL(2,R) cocycles over the binary shift, and a
//! shear/rotation perturbation family supported on three disjoint cylinders.
//!
//! A locally constant cocycle reads a finite symbol window `[window_lo,
//! window_hi]` around the current position and produces a matrix; the
//! `n`-step product multiplies later times on the left:
//!
//! ```text
//! A^n(x) = A(f^{n-1} x) * ... * A(f x) * A(x)
//! ```
//!
//! The base cocycle is diagonal: symbol 0 gives `diag(1/eta, eta)`, symbol 1
//! gives `diag(sigma, 1/sigma)`. The perturbation `R` is the identity except
//! on a marker cylinder `Z_n` (pattern `0^k 1^{k+1}` at indices `[0, n-1]`,
//! `n = 2k+1`) and its `k`-th and `2k`-th shift images, where it applies a
//! small shear, a small rotation-like factor, and another shear. The product
//! `B = A * R` then swaps the horizontal and vertical directions across each
//! passage through the marker: its `n`-step product over `Z_n` is
//! anti-diagonal. The three factors are tuned so that `B` sits close to `A`
//! in alpha-Holder norm while its Lyapunov exponents collapse to zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::shift::{CylinderSpec, Word};

/// Word-enumeration cap for exact sup norms and bunching contexts.
const ENUM_WORD_CAP: u128 = 1 << 22;
/// Pair cap for the exact Holder seminorm (pruned enumeration).
const SEMINORM_PAIR_CAP: u128 = 1_000_000_000;

/// Parameters of the perturbation family.
///
/// `n = 2k+1` is the marker length; the derived factor sizes are
///
/// ```text
/// eps   = eta^(-gamma k)
/// delta = eta^((gamma-2) k)
/// beta  = eta^((2-gamma) k) * sigma^(-2k) = sigma^(-2k) / delta
/// c     = 1 / sqrt(1 + delta^2)
/// ```
///
/// The identities `eps * delta = eta^(-2k)` and `beta * delta = sigma^(-2k)`
/// hold exactly at the level of exponents (the gamma terms cancel
/// identically); the constructor asserts both the cancellation and the
/// floating-point residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstructionParams {
    sigma: f64,
    eta: f64,
    alpha: f64,
    gamma: f64,
    k: u32,
}

impl ConstructionParams {
    pub fn new(sigma: f64, eta: f64, alpha: f64, gamma: f64, k: u32) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and > 1, got {sigma}"
            )));
        }
        if !eta.is_finite() || eta <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "eta must be finite and > 1, got {eta}"
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and > 0, got {alpha}"
            )));
        }
        if !gamma.is_finite() || !(1.0..2.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [1, 2), got {gamma}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let params = ConstructionParams {
            sigma,
            eta,
            alpha,
            gamma,
            k,
        };
        // Exponent-space identities. gamma - 2 is exact for gamma in [1,2)
        // (Sterbenz), so both sums cancel exactly in f64.
        assert_eq!((-gamma) + (gamma - 2.0), -2.0);
        assert_eq!((2.0 - gamma) + (gamma - 2.0), 0.0);
        // Floating-point residual of the same identities.
        let kf = f64::from(k);
        let eta_pow = (-2.0 * kf * eta.ln()).exp();
        let sigma_pow = (-2.0 * kf * sigma.ln()).exp();
        let r1 = (params.eps() * params.delta() - eta_pow).abs() / eta_pow;
        let r2 = (params.beta() * params.delta() - sigma_pow).abs() / sigma_pow;
        if r1 > 1e-12 || r2 > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "factor identities drift beyond 1e-12 (eps*delta: {r1:e}, beta*delta: {r2:e})"
            )));
        }
        Ok(params)
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

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Marker length `n = 2k + 1`.
    pub fn n(&self) -> u32 {
        2 * self.k + 1
    }

    pub fn eps(&self) -> f64 {
        (-self.gamma * f64::from(self.k) * self.eta.ln()).exp()
    }

    pub fn delta(&self) -> f64 {
        ((self.gamma - 2.0) * f64::from(self.k) * self.eta.ln()).exp()
    }

    pub fn beta(&self) -> f64 {
        let kf = f64::from(self.k);
        ((2.0 - self.gamma) * kf * self.eta.ln() - 2.0 * kf * self.sigma.ln()).exp()
    }

    pub fn c(&self) -> f64 {
        let d = self.delta();
        1.0 / (1.0 + d * d).sqrt()
    }

    /// The marker word `0^k 1^{k+1}` at indices `[0, n-1]`.
    pub fn marker(&self) -> Word {
        let k = self.k as usize;
        let mut symbols = vec![0u8; 2 * k + 1];
        for s in symbols.iter_mut().skip(k) {
            *s = 1;
        }
        Word::new(0, symbols).expect("marker word is valid by construction")
    }

    fn base_value(&self, symbol: u8) -> Mat2 {
        if symbol == 0 {
            Mat2::diagonal(1.0 / self.eta, self.eta)
        } else {
            Mat2::diagonal(self.sigma, 1.0 / self.sigma)
        }
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Constant(Mat2),
    /// Window `[0, 0]`: the value depends on the single symbol under the head.
    BySymbol { zero: Mat2, one: Mat2 },
    /// Three disjoint cylinder patterns override a symbol-dependent default.
    Patterned(Box<PatternedRule>),
}

#[derive(Debug, Clone)]
struct PatternedRule {
    params: ConstructionParams,
    patterns: [CylinderSpec; 3],
    special: [Mat2; 3],
    default_zero: Mat2,
    default_one: Mat2,
}

/// Serializable description of how a cocycle was built.
#[derive(Debug, Clone, Serialize)]
pub struct CocycleDescriptor {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct LocallyConstantCocycle {
    window_lo: i64,
    window_hi: i64,
    sl2: bool,
    descriptor: CocycleDescriptor,
    rule: Rule,
}

impl LocallyConstantCocycle {
    /// The constant identity cocycle (window `[0, 0]`).
    pub fn identity() -> Self {
        LocallyConstantCocycle {
            window_lo: 0,
            window_hi: 0,
            sl2: true,
            descriptor: CocycleDescriptor {
                kind: "identity",
                sigma: None,
                eta: None,
                gamma: None,
                k: None,
            },
            rule: Rule::Constant(Mat2::identity()),
        }
    }

    pub fn window_lo(&self) -> i64 {
        self.window_lo
    }

    pub fn window_hi(&self) -> i64 {
        self.window_hi
    }

    pub fn window_len(&self) -> u32 {
        (self.window_hi - self.window_lo + 1) as u32
    }

    pub fn is_sl2(&self) -> bool {
        self.sl2
    }

    pub fn descriptor(&self) -> &CocycleDescriptor {
        &self.descriptor
    }

    /// Value on a word spanning exactly the cocycle window.
    pub fn value(&self, word: &Word) -> Result<Mat2> {
        if word.lo() != self.window_lo || word.hi() != self.window_hi {
            return Err(Error::WindowMismatch {
                expected: (self.window_lo, self.window_hi),
                got: (word.lo(), word.hi()),
            });
        }
        Ok(self.value_in_context(word, 0))
    }

    /// Value at shift time `t` inside a longer symbol segment. The caller
    /// guarantees the segment covers `[t + window_lo, t + window_hi]`.
    pub(crate) fn value_in_context(&self, ctx: &Word, t: i64) -> Mat2 {
        match &self.rule {
            Rule::Constant(m) => *m,
            Rule::BySymbol { zero, one } => {
                if ctx.at(t) == 0 {
                    *zero
                } else {
                    *one
                }
            }
            Rule::Patterned(rule) => {
                for (pattern, value) in rule.patterns.iter().zip(rule.special.iter()) {
                    if matches_at(pattern, ctx, t) {
                        return *value;
                    }
                }
                if ctx.at(t) == 0 {
                    rule.default_zero
                } else {
                    rule.default_one
                }
            }
        }
    }

}

fn matches_at(pattern: &CylinderSpec, ctx: &Word, t: i64) -> bool {
    let base = pattern.base();
    (base.lo()..=base.hi()).all(|i| ctx.at(t + i) == base.at(i))
}

/// The diagonal base cocycle on window `[0, 0]`.
pub fn build_base(params: &ConstructionParams) -> LocallyConstantCocycle {
    LocallyConstantCocycle {
        window_lo: 0,
        window_hi: 0,
        sl2: true,
        descriptor: CocycleDescriptor {
            kind: "base",
            sigma: Some(params.sigma()),
            eta: Some(params.eta()),
            gamma: None,
            k: None,
        },
        rule: Rule::BySymbol {
            zero: params.base_value(0),
            one: params.base_value(1),
        },
    }
}

fn marker_patterns(params: &ConstructionParams) -> [CylinderSpec; 3] {
    let k = i64::from(params.k());
    let z = CylinderSpec::new(params.marker());
    let fk = z.shift(k);
    let f2k = z.shift(2 * k);
    // The marker cannot overlap itself at any shift in [1, n-1], so the three
    // windows conflict pairwise and the cylinders are disjoint; membership
    // tests below need no ordering.
    assert!(z.conflicts_with(&fk));
    assert!(z.conflicts_with(&f2k));
    assert!(fk.conflicts_with(&f2k));
    [z, fk, f2k]
}

fn perturbation_factors(params: &ConstructionParams) -> [Mat2; 3] {
    let c = params.c();
    let delta = params.delta();
    [
        Mat2::lower_shear(params.eps()),
        Mat2::new(c, -c * delta, c * delta, c),
        Mat2::lower_shear(params.beta()),
    ]
}

/// The perturbation cocycle `R` on window `[-2k, 2k]`: a shear on the marker
/// cylinder, a rotation-like factor on its k-shift, a second shear on its
/// 2k-shift, the identity elsewhere.
pub fn build_perturbation(params: &ConstructionParams) -> LocallyConstantCocycle {
    let k = i64::from(params.k());
    let patterns = marker_patterns(params);
    let special = perturbation_factors(params);
    LocallyConstantCocycle {
        window_lo: -2 * k,
        window_hi: 2 * k,
        sl2: true,
        descriptor: CocycleDescriptor {
            kind: "perturbation",
            sigma: Some(params.sigma()),
            eta: Some(params.eta()),
            gamma: Some(params.gamma()),
            k: Some(params.k()),
        },
        rule: Rule::Patterned(Box::new(PatternedRule {
            params: *params,
            patterns,
            special,
            default_zero: Mat2::identity(),
            default_one: Mat2::identity(),
        })),
    }
}

/// The perturbed cocycle `B = A * R` (base value read at coordinate 0, on
/// the left) on window `[-2k, 2k]`.
pub fn build_perturbed(params: &ConstructionParams) -> LocallyConstantCocycle {
    let k = i64::from(params.k());
    let patterns = marker_patterns(params);
    let factors = perturbation_factors(params);
    let mut special = [Mat2::zero(); 3];
    for i in 0..3 {
        let symbol = patterns[i].base().at(0);
        special[i] = params.base_value(symbol) * factors[i];
    }
    LocallyConstantCocycle {
        window_lo: -2 * k,
        window_hi: 2 * k,
        sl2: true,
        descriptor: CocycleDescriptor {
            kind: "perturbed",
            sigma: Some(params.sigma()),
            eta: Some(params.eta()),
            gamma: Some(params.gamma()),
            k: Some(params.k()),
        },
        rule: Rule::Patterned(Box::new(PatternedRule {
            params: *params,
            patterns,
            special,
            default_zero: params.base_value(0),
            default_one: params.base_value(1),
        })),
    }
}

/// The difference cocycle `A - B = A (Id - R)`, materialized on the window of
/// `R`. Not SL(2): off the three cylinders the value is the zero matrix.
pub fn build_difference(params: &ConstructionParams) -> LocallyConstantCocycle {
    let k = i64::from(params.k());
    let patterns = marker_patterns(params);
    let factors = perturbation_factors(params);
    let mut special = [Mat2::zero(); 3];
    for i in 0..3 {
        let symbol = patterns[i].base().at(0);
        let base = params.base_value(symbol);
        special[i] = base - base * factors[i];
    }
    LocallyConstantCocycle {
        window_lo: -2 * k,
        window_hi: 2 * k,
        sl2: false,
        descriptor: CocycleDescriptor {
            kind: "difference",
            sigma: Some(params.sigma()),
            eta: Some(params.eta()),
            gamma: Some(params.gamma()),
            k: Some(params.k()),
        },
        rule: Rule::Patterned(Box::new(PatternedRule {
            params: *params,
            patterns,
            special,
            default_zero: Mat2::zero(),
            default_one: Mat2::zero(),
        })),
    }
}

/// `steps`-fold product along a symbol segment, later times on the left.
/// `steps = 0` gives the identity. The segment must cover
/// `[window_lo, window_hi + steps - 1]`.
pub fn iterate(coc: &LocallyConstantCocycle, segment: &Word, steps: u64) -> Result<Mat2> {
    iterate_scaled(coc, segment, steps, 0).map(|(m, _)| m)
}

/// Product with periodic renormalization: returns the scaled matrix and the
/// accumulated log of the extracted factors. The true product is
/// `m * exp(log_scale)`, and `log_scale + ln ||m||` is `ln` of the product's
/// norm. `renorm_every = 0` never renormalizes.
///
/// The extracted factor is the power of two nearest the spectral norm, not
/// the norm itself: dividing by a power of two is exact in binary floating
/// point, so the running matrix is bit-identical across cadences up to an
/// exact scalar and the log-sum telescopes to rounding level. Dividing by
/// the norm would re-round all four entries at every renormalization, and
/// those perturbations get amplified through the locally hyperbolic
/// stretches of a zero-exponent product (growth at rate `ln sigma` between
/// swaps before cancelling), shifting estimates at the 1e-3 scale.
pub(crate) fn iterate_scaled(
    coc: &LocallyConstantCocycle,
    segment: &Word,
    steps: u64,
    renorm_every: u64,
) -> Result<(Mat2, f64)> {
    if steps == 0 {
        return Ok((Mat2::identity(), 0.0));
    }
    let needs = (coc.window_lo, coc.window_hi + steps as i64 - 1);
    if !segment.covers(needs.0, needs.1) {
        return Err(Error::InsufficientContext {
            needs,
            got: (segment.lo(), segment.hi()),
        });
    }
    let mut m = Mat2::identity();
    let mut log_scale = 0.0;
    for t in 0..steps {
        m = coc.value_in_context(segment, t as i64) * m;
        if renorm_every != 0 && (t + 1) % renorm_every == 0 {
            let s = m.spectral_norm();
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "running product degenerate at step {t} (norm {s})"
                )));
            }
            let e = s.log2().round();
            m = m.scale((-e).exp2());
            log_scale += e * std::f64::consts::LN_2;
        }
    }
    Ok((m, log_scale))
}

/// Closed form of the `n`-step product of `B` over the marker cylinder:
///
/// ```text
/// c * [ 0,                                     -eta^k sigma^(k+1) delta ]
///     [ eta^k sigma^(-k-1) (eta^(-2k) delta + eps),                   0 ]
/// ```
///
/// The diagonal vanishes identically: the factor tuning cancels the
/// stretching exactly, which is what swaps the horizontal and vertical
/// directions. `det = c^2 (delta^2 + 1) = 1`.
pub fn closed_form_bn(params: &ConstructionParams) -> Mat2 {
    let kf = f64::from(params.k());
    let eta = params.eta();
    let sigma = params.sigma();
    let eta_k = (kf * eta.ln()).exp();
    let sigma_k1 = ((kf + 1.0) * sigma.ln()).exp();
    let eta_m2k = (-2.0 * kf * eta.ln()).exp();
    let c = params.c();
    Mat2::new(
        0.0,
        -c * eta_k * sigma_k1 * params.delta(),
        c * eta_k / sigma_k1 * (eta_m2k * params.delta() + params.eps()),
        0.0,
    )
}

fn enumerate_words<F: FnMut(&Word)>(lo: i64, hi: i64, mut visit: F) {
    let width = (hi - lo + 1) as u32;
    let mut scratch = Word::new(lo, vec![0; width as usize]).expect("nonempty window");
    // One allocation reused across all masks; bit j holds the symbol at lo+j.
    for mask in 0u64..(1u64 << width) {
        for j in 0..width {
            scratch.set(lo + i64::from(j), ((mask >> j) & 1) as u8);
        }
        visit(&scratch);
    }
}

/// Exact sup norm: max spectral norm over all window words.
pub fn sup_norm(coc: &LocallyConstantCocycle) -> Result<f64> {
    let width = coc.window_len();
    let count = 1u128 << width;
    if count > ENUM_WORD_CAP {
        return Err(Error::Capacity {
            required: count,
            cap: ENUM_WORD_CAP,
            fallback: Some("holder_bound"),
        });
    }
    let mut max = 0.0f64;
    enumerate_words(coc.window_lo, coc.window_hi, |word| {
        max = max.max(coc.value_in_context(word, 0).spectral_norm());
    });
    Ok(max)
}

/// Exact alpha-Holder seminorm of a locally constant cocycle:
///
/// ```text
/// sup_{x != y} ||F(x) - F(y)|| / d(x,y)^alpha
///   = max over word pairs u != v with F(u) != F(v) of
///        2^(alpha N*(u,v)) ||F(u) - F(v)||
/// ```
///
/// where `N*` is the first disagreement radius inside the window (extensions
/// agreeing outside the window realize exactly that radius). For patterned
/// cocycles the enumeration is pruned to pairs touching a non-default value
/// plus the single default-vs-default class, which is exhaustive because
/// default values depend only on the center symbol.
pub fn holder_seminorm_exact(coc: &LocallyConstantCocycle, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    match &coc.rule {
        Rule::Constant(_) => Ok(0.0),
        // Window [0, 0]: the only differing pair has radius 0.
        Rule::BySymbol { zero, one } => Ok((*zero - *one).spectral_norm()),
        Rule::Patterned(rule) => patterned_seminorm(coc, rule, alpha),
    }
}

/// Bit-mask geometry of a patterned rule: bit `j` of a word mask holds the
/// symbol at index `window_lo + j`.
struct MaskRule {
    width: u32,
    center_bit: u32,
    pattern_mask: [u64; 3],
    pattern_bits: [u64; 3],
}

impl MaskRule {
    fn build(coc: &LocallyConstantCocycle, rule: &PatternedRule) -> Self {
        let width = coc.window_len();
        let center_bit = (-coc.window_lo) as u32;
        let mut pattern_mask = [0u64; 3];
        let mut pattern_bits = [0u64; 3];
        for (i, pattern) in rule.patterns.iter().enumerate() {
            let base = pattern.base();
            for index in base.lo()..=base.hi() {
                let bit = (index - coc.window_lo) as u32;
                pattern_mask[i] |= 1 << bit;
                pattern_bits[i] |= u64::from(base.at(index)) << bit;
            }
        }
        MaskRule {
            width,
            center_bit,
            pattern_mask,
            pattern_bits,
        }
    }

    /// 0..=2: special class; 3: default.
    fn class(&self, word: u64) -> u8 {
        for i in 0..3 {
            if word & self.pattern_mask[i] == self.pattern_bits[i] {
                return i as u8;
            }
        }
        3
    }

    /// First disagreement radius of two masks from their XOR.
    fn radius(&self, diff: u64) -> u32 {
        let below = diff & ((1u64 << self.center_bit) - 1);
        let above = diff >> self.center_bit;
        let from_below = if below != 0 {
            self.center_bit - (63 - below.leading_zeros())
        } else {
            u32::MAX
        };
        let from_above = if above != 0 {
            above.trailing_zeros()
        } else {
            u32::MAX
        };
        from_below.min(from_above)
    }

    /// Enumerate the word masks matching pattern `i`.
    fn pattern_words(&self, i: usize) -> Vec<u64> {
        let free = !self.pattern_mask[i] & ((1u64 << self.width) - 1);
        let free_bits: Vec<u32> = (0..self.width).filter(|b| free >> b & 1 == 1).collect();
        let mut words = Vec::with_capacity(1 << free_bits.len());
        for choice in 0u64..(1u64 << free_bits.len()) {
            let mut word = self.pattern_bits[i];
            for (j, bit) in free_bits.iter().enumerate() {
                word |= ((choice >> j) & 1) << bit;
            }
            words.push(word);
        }
        words
    }
}

fn patterned_seminorm(
    coc: &LocallyConstantCocycle,
    rule: &PatternedRule,
    alpha: f64,
) -> Result<f64> {
    let masks = MaskRule::build(coc, rule);
    let width = masks.width;
    let word_count = 1u128 << width;
    let specials_per_pattern = 1u128 << (width - rule.params.n());
    let pruned = 3 * specials_per_pattern * word_count;
    if pruned > SEMINORM_PAIR_CAP {
        return Err(Error::Capacity {
            required: pruned,
            cap: SEMINORM_PAIR_CAP,
            fallback: Some("holder_bound"),
        });
    }

    // Value-class table and distance weights.
    let class: Vec<u8> = (0..1u64 << width).map(|w| masks.class(w)).collect();
    let defaults = [rule.default_zero, rule.default_one];
    let max_radius = masks.center_bit.max(width - 1 - masks.center_bit);
    let weight: Vec<f64> = (0..=max_radius)
        .map(|r| (alpha * f64::from(r)).exp2())
        .collect();

    // Norm of the value difference between classes: 3 specials x (3 specials
    // + 2 default symbols).
    let mut class_norm = [[0.0f64; 5]; 3];
    for i in 0..3 {
        for j in 0..3 {
            class_norm[i][j] = (rule.special[i] - rule.special[j]).spectral_norm();
        }
        for (s, default) in defaults.iter().enumerate() {
            class_norm[i][3 + s] = (rule.special[i] - *default).spectral_norm();
        }
    }

    let specials: Vec<(usize, u64)> = (0..3)
        .flat_map(|i| masks.pattern_words(i).into_iter().map(move |w| (i, w)))
        .collect();

    let best_for_special = |&(i, u): &(usize, u64)| -> f64 {
        let mut best = 0.0f64;
        for v in 0..(1u64 << width) {
            if v == u {
                continue;
            }
            let cls = class[v as usize] as usize;
            let norm = if cls < 3 {
                class_norm[i][cls]
            } else {
                class_norm[i][3 + (v >> masks.center_bit & 1) as usize]
            };
            if norm == 0.0 {
                continue;
            }
            let r = masks.radius(u ^ v);
            let contribution = weight[r as usize] * norm;
            if contribution > best {
                best = contribution;
            }
        }
        best
    };
    let mut best = crate::exec::max_map(&specials, best_for_special);

    // Default-vs-default pairs: values depend only on the center symbol, so
    // any differing pair has radius 0 and contributes ||D0 - D1||. Both
    // default classes are nonempty: each pattern pins the center, so at most
    // half the words of either center symbol are special.
    let dd = (rule.default_zero - rule.default_one).spectral_norm();
    if dd > 0.0 {
        for symbol in 0..2u64 {
            let total = 1u128 << (width - 1);
            let special_count: u128 = (0..3)
                .filter(|&i| masks.pattern_bits[i] >> masks.center_bit & 1 == symbol)
                .map(|_| specials_per_pattern)
                .sum();
            assert!(special_count < total);
        }
        best = best.max(dd);
    }
    Ok(best)
}

/// Full alpha-Holder norm: exact sup norm plus exact seminorm.
#[derive(Debug, Clone, Serialize)]
pub struct HolderNorm {
    pub sup: f64,
    pub seminorm: f64,
    pub norm: f64,
    pub alpha: f64,
    pub exact: bool,
}

pub fn holder_norm(coc: &LocallyConstantCocycle, alpha: f64) -> Result<HolderNorm> {
    let sup = sup_norm(coc)?;
    let seminorm = holder_seminorm_exact(coc, alpha)?;
    Ok(HolderNorm {
        sup,
        seminorm,
        norm: sup + seminorm,
        alpha,
        exact: true,
    })
}

/// Assembled upper bound for the alpha-Holder norm of `A - B`.
///
/// The sup term is `S = sigma * max(beta, delta, eps)`. The seminorm term
/// takes the worst of the five case bounds: pairs in different depth-one
/// cylinders (`2S`), pairs split by the marker cylinder, by its 2k-shift, by
/// its k-shift against the 2k-shift, and by its k-shift against everything
/// else. Each case term is geometric in `k`; `decays` reports whether every
/// ratio is below one, in which case the bound is strictly decreasing in `k`
/// and tends to zero.
#[derive(Debug, Clone, Serialize)]
pub struct HolderBound {
    pub sup_term: f64,
    pub seminorm_term: f64,
    pub value: f64,
    pub decays: bool,
}

pub fn holder_bound(params: &ConstructionParams) -> HolderBound {
    let sigma = params.sigma();
    let eta = params.eta();
    let alpha = params.alpha();
    let gamma = params.gamma();
    let kf = f64::from(params.k());
    let beta = params.beta();
    let delta = params.delta();
    let eps = params.eps();

    let s = sigma * beta.max(delta).max(eps);
    let pow_a = alpha.exp2();
    let pow_2a = (2.0 * alpha).exp2();
    // geometric bases of the window-split cases
    let b_marker = pow_2a / (gamma * eta.ln()).exp();
    let b_shift2k = pow_2a * ((2.0 - gamma) * eta.ln()).exp() / (sigma * sigma);
    let b_shiftk = pow_a / ((2.0 - gamma) * eta.ln()).exp();

    let t_split = 2.0 * s;
    let t_marker = eta * b_marker.powf(kf);
    let t_shift2k = sigma * b_shift2k.powf(kf);
    let t_rot = pow_a * sigma * (beta + delta);
    let t_shiftk = sigma * b_shiftk.powf(kf);

    let seminorm_term = t_split
        .max(t_marker)
        .max(t_shift2k)
        .max(t_rot)
        .max(t_shiftk);

    // bases of the sup-term factors
    let b_beta = ((2.0 - gamma) * eta.ln() - 2.0 * sigma.ln()).exp();
    let b_delta = ((gamma - 2.0) * eta.ln()).exp();
    let b_eps = (-gamma * eta.ln()).exp();
    let decays = b_marker < 1.0
        && b_shift2k < 1.0
        && b_shiftk < 1.0
        && b_beta < 1.0
        && b_delta < 1.0
        && b_eps < 1.0;

    HolderBound {
        sup_term: s,
        seminorm_term,
        value: s + seminorm_term,
        decays,
    }
}

/// Fiber-bunching probe: the smallest `N <= n_max` with
/// `||A^N(x)|| * ||(A^N(x))^-1|| < 2^(alpha N)` over every length-`N`
/// context, or `None` if no level passes. A `None` is not a proof of
/// non-bunching; `worst_context` and `worst_ratio` report the failing
/// witness at the last level checked.
#[derive(Debug, Clone, Serialize)]
pub struct BunchingReport {
    pub bunched_at: Option<u32>,
    pub checked_up_to: u32,
    pub worst_ratio: f64,
    pub threshold: f64,
    pub worst_context: Word,
}

pub fn fiber_bunching_test(
    coc: &LocallyConstantCocycle,
    alpha: f64,
    n_max: u32,
) -> Result<BunchingReport> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let mut report: Option<BunchingReport> = None;
    for n in 1..=n_max {
        let hi = coc.window_hi + i64::from(n) - 1;
        let width = (hi - coc.window_lo + 1) as u32;
        let count = 1u128 << width;
        if count > ENUM_WORD_CAP {
            return Err(Error::Capacity {
                required: count,
                cap: ENUM_WORD_CAP,
                fallback: None,
            });
        }
        let mut worst_ratio = 0.0f64;
        let mut worst_context: Option<Word> = None;
        let mut failure: Option<Error> = None;
        enumerate_words(coc.window_lo, hi, |word| {
            if failure.is_some() {
                return;
            }
            let mut m = Mat2::identity();
            for t in 0..n {
                m = coc.value_in_context(word, i64::from(t)) * m;
            }
            match m.inverse() {
                Ok(inv) => {
                    let ratio = m.spectral_norm() * inv.spectral_norm();
                    if ratio > worst_ratio {
                        worst_ratio = ratio;
                        worst_context = Some(word.clone());
                    }
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let threshold = (alpha * f64::from(n)).exp2();
        let current = BunchingReport {
            bunched_at: (worst_ratio < threshold).then_some(n),
            checked_up_to: n,
            worst_ratio,
            threshold,
            worst_context: worst_context.expect("at least one context"),
        };
        if current.bunched_at.is_some() {
            return Ok(current);
        }
        report = Some(current);
    }
    Ok(report.expect("n_max >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(sigma: f64, eta: f64, alpha: f64, gamma: f64, k: u32) -> ConstructionParams {
        ConstructionParams::new(sigma, eta, alpha, gamma, k).unwrap()
    }

    fn desk() -> ConstructionParams {
        params(4.0, 2.0, 0.4, 4.0 / 3.0, 1)
    }

    #[test]
    fn derived_factors_match_frozen_values() {
        let p = desk();
        // eta = 2, gamma = 4/3, k = 1: eps = 2^(-4/3), delta = 2^(-2/3),
        // beta = 2^(2/3) / 16.
        assert!((p.eps() - 0.3968502629920499).abs() < 1e-15);
        assert!((p.delta() - 0.6299605249474366).abs() < 1e-15);
        assert!((p.beta() - 0.09921256574801247).abs() < 1e-15);
        assert!((p.c() - 0.8461065811015477).abs() < 1e-15);
    }

    #[test]
    fn params_domain_checks() {
        assert!(ConstructionParams::new(1.0, 2.0, 0.4, 1.0, 1).is_err());
        assert!(ConstructionParams::new(4.0, 1.0, 0.4, 1.0, 1).is_err());
        assert!(ConstructionParams::new(4.0, 2.0, 0.0, 1.0, 1).is_err());
        assert!(ConstructionParams::new(4.0, 2.0, 0.4, 2.0, 1).is_err());
        assert!(ConstructionParams::new(4.0, 2.0, 0.4, 0.99, 1).is_err());
        assert!(ConstructionParams::new(4.0, 2.0, 0.4, 1.0, 0).is_err());
        // sigma < eta is allowed: the family still builds.
        assert!(ConstructionParams::new(1.5, 2.0, 0.4, 1.5, 2).is_ok());
    }

    #[test]
    fn marker_word_shape() {
        let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, 2);
        let m = p.marker();
        assert_eq!(m.lo(), 0);
        assert_eq!(m.symbols(), &[0, 0, 1, 1, 1]);
    }

    #[test]
    fn base_values() {
        let coc = build_base(&desk());
        let zero = Word::from_bits(0, "0").unwrap();
        let one = Word::from_bits(0, "1").unwrap();
        assert_eq!(coc.value(&zero).unwrap(), Mat2::diagonal(0.5, 2.0));
        assert_eq!(coc.value(&one).unwrap(), Mat2::diagonal(4.0, 0.25));
    }

    #[test]
    fn value_window_mismatch() {
        let coc = build_base(&desk());
        let word = Word::from_bits(1, "0").unwrap();
        assert!(matches!(
            coc.value(&word),
            Err(Error::WindowMismatch { .. })
        ));
    }

    #[test]
    fn perturbation_counts_nonidentity_words() {
        for k in 1..=2u32 {
            let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, k);
            let coc = build_perturbation(&p);
            let mut nonidentity = 0u64;
            enumerate_words(coc.window_lo(), coc.window_hi(), |word| {
                if coc.value_in_context(word, 0) != Mat2::identity() {
                    nonidentity += 1;
                }
            });
            // each of the three patterns frees 2k coordinates
            assert_eq!(nonidentity, 3 << (2 * k));
        }
    }

    #[test]
    fn perturbation_values_are_unimodular() {
        let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, 2);
        for m in perturbation_factors(&p) {
            assert!((m.det() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn iterate_of_base_multiplies_diagonals() {
        let coc = build_base(&desk());
        let word = Word::from_bits(0, "01").unwrap();
        let m = iterate(&coc, &word, 2).unwrap();
        assert_eq!(m, Mat2::diagonal(2.0, 0.5));
    }

    #[test]
    fn iterate_zero_steps_is_identity() {
        let coc = build_base(&desk());
        let word = Word::from_bits(0, "1").unwrap();
        assert_eq!(iterate(&coc, &word, 0).unwrap(), Mat2::identity());
    }

    #[test]
    fn iterate_rejects_short_segments() {
        let coc = build_base(&desk());
        let word = Word::from_bits(0, "01").unwrap();
        assert!(matches!(
            iterate(&coc, &word, 3),
            Err(Error::InsufficientContext { .. })
        ));
    }

    #[test]
    fn closed_form_matches_brute_force_product() {
        for k in 1..=4u32 {
            let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, k);
            let coc = build_perturbed(&p);
            let n = u64::from(p.n());
            // marker word extended by zeros on both sides
            let lo = coc.window_lo();
            let hi = coc.window_hi() + n as i64 - 1;
            let mut symbols = vec![0u8; (hi - lo + 1) as usize];
            for i in 0..p.n() as usize {
                symbols[(i as i64 - lo) as usize] = p.marker().at(i as i64);
            }
            let word = Word::new(lo, symbols).unwrap();
            let got = iterate(&coc, &word, n).unwrap();
            let want = closed_form_bn(&p);
            let scale = want.spectral_norm();
            assert!(got.a11.abs() / scale < 1e-12, "k={k}: diag leak {}", got.a11);
            assert!(got.a22.abs() / scale < 1e-12);
            assert!((got.a12 - want.a12).abs() / want.a12.abs() < 1e-12);
            assert!((got.a21 - want.a21).abs() / want.a21.abs() < 1e-12);
            assert!((want.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_frozen_values_k1() {
        let m = closed_form_bn(&desk());
        assert!((m.a12 - -17.05643987175078).abs() < 1e-11);
        assert!((m.a21 - 0.05862888196593829).abs() < 1e-14);
    }

    #[test]
    fn base_sup_and_seminorm() {
        let coc = build_base(&desk());
        assert_eq!(sup_norm(&coc).unwrap(), 4.0);
        // || diag(1/2, 2) - diag(4, 1/4) || = 3.5 at radius 0
        assert_eq!(holder_seminorm_exact(&coc, 0.4).unwrap(), 3.5);
        let norm = holder_norm(&coc, 0.4).unwrap();
        assert_eq!(norm.norm, 7.5);
        assert!(norm.exact);
    }

    #[test]
    fn identity_cocycle_norms() {
        let coc = LocallyConstantCocycle::identity();
        assert_eq!(sup_norm(&coc).unwrap(), 1.0);
        assert_eq!(holder_seminorm_exact(&coc, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn difference_sup_norm_is_bounded_by_s() {
        for k in 1..=3u32 {
            let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, k);
            let diff = build_difference(&p);
            let sup = sup_norm(&diff).unwrap();
            let s = p.sigma() * p.beta().max(p.delta()).max(p.eps());
            assert!(sup <= s, "k={k}: sup {sup} > S {s}");
        }
    }

    #[test]
    fn seminorm_caps_at_large_k() {
        let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, 5);
        let diff = build_difference(&p);
        assert!(matches!(
            holder_seminorm_exact(&diff, 0.4),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn seminorm_weights_use_window_radius() {
        // Difference cocycle at k=1: frozen oracle value (exhaustive pair
        // enumeration over all 32 x 32 window words, done independently).
        let diff = build_difference(&desk());
        let got = holder_seminorm_exact(&diff, 0.4).unwrap();
        assert!(
            (got - 2.928188996811207).abs() < 1e-12,
            "seminorm {got}"
        );
    }

    #[test]
    fn renormalization_cadence_is_invariant() {
        let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, 1);
        let coc = build_perturbed(&p);
        let b = crate::shift::BernoulliParams::new(0.5).unwrap();
        let steps = 4096u64;
        let word = {
            let mut rng = crate::shift::stream_rng(11, 0);
            let lo = coc.window_lo();
            let hi = steps as i64 + coc.window_hi();
            let symbols = (lo..=hi)
                .map(|_| crate::shift::sample_symbol(&mut rng, &b))
                .collect();
            Word::new(lo, symbols).unwrap()
        };
        let (m1, l1) = iterate_scaled(&coc, &word, steps, 1).unwrap();
        let (m16, l16) = iterate_scaled(&coc, &word, steps, 16).unwrap();
        let e1 = (l1 + m1.spectral_norm().ln()) / steps as f64;
        let e16 = (l16 + m16.spectral_norm().ln()) / steps as f64;
        assert!(
            (e1 - e16).abs() <= 1e-12 * e1.abs(),
            "cadence drift: {e1} vs {e16}"
        );
    }

    #[test]
    fn bunching_base_depends_on_sigma_alpha() {
        // sigma^2 < 2^alpha: bunched at the first level.
        let p = params(1.2, 1.1, 1.0, 4.0 / 3.0, 1);
        let report = fiber_bunching_test(&build_base(&p), 1.0, 12).unwrap();
        assert_eq!(report.bunched_at, Some(1));

        // sigma = 4, eta = 2, alpha = 0.4: 16 >= 2^0.4, never bunched; the
        // worst context is all ones.
        let p = desk();
        let report = fiber_bunching_test(&build_base(&p), 0.4, 12).unwrap();
        assert_eq!(report.bunched_at, None);
        assert_eq!(report.checked_up_to, 12);
        assert!(report.worst_context.symbols().iter().all(|&s| s == 1));
        let want = 4.0f64.powi(24);
        assert!((report.worst_ratio - want).abs() / want < 1e-12);
    }

    #[test]
    fn bunching_identity_is_immediate() {
        let report = fiber_bunching_test(&LocallyConstantCocycle::identity(), 0.3, 4).unwrap();
        assert_eq!(report.bunched_at, Some(1));
        assert_eq!(report.worst_ratio, 1.0);
    }

    #[test]
    fn holder_bound_frozen_values() {
        // frozen from the assembled formula evaluated independently
        let cases = [
            (1, 7.559526299369239),
            (2, 4.762203155904598),
            (3, 3.297396709994069),
            (4, 2.539643732768268),
        ];
        for (k, want) in cases {
            let p = params(4.0, 2.0, 0.4, 4.0 / 3.0, k);
            let bound = holder_bound(&p);
            assert!(
                (bound.value - want).abs() < 1e-12 * want,
                "k={k}: {} vs {want}",
                bound.value
            );
            assert!(bound.decays);
        }
    }

    #[test]
    fn holder_bound_decay_flag_flips_at_large_alpha() {
        // 2^(3 alpha) > eta^2 kills the marker-case decay.
        let p = params(4.0, 2.0, 0.8, 4.0 / 3.0, 1);
        assert!(!holder_bound(&p).decays);
    }
}
