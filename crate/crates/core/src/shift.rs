//! The two-sided binary shift space and its Bernoulli measures.
//!
//! Points of the space are bi-infinite 0/1 sequences `x = (x_i)`, with the
//! left shift `f(x)_i = x_{i+1}`. Code never holds a full point: a [`Word`]
//! pins the symbols on a finite index window and stands for the cylinder of
//! all points extending it.
//!
//! The metric is `d(x, y) = 2^-N(x,y)` where `N(x,y)` is the first
//! disagreement radius: the smallest `|i|` at which the sequences differ.
//! Points agreeing on the centered window `(-N, N)` are `2^-N`-close.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Symbols of a point over a finite index window `[lo, hi]`.
///
/// Invariants: at least one symbol, every symbol 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    lo: i64,
    symbols: Vec<u8>,
}

impl Word {
    pub fn new(lo: i64, symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidParameter("word must be nonempty".into()));
        }
        if symbols.iter().any(|&s| s > 1) {
            return Err(Error::InvalidParameter(
                "word symbols must be 0 or 1".into(),
            ));
        }
        Ok(Word { lo, symbols })
    }

    /// Parse symbols from a string of `'0'`/`'1'` characters.
    pub fn from_bits(lo: i64, bits: &str) -> Result<Self> {
        let symbols = bits
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!(
                    "invalid symbol character {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Word::new(lo, symbols)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.symbols.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn get(&self, index: i64) -> Option<u8> {
        if index < self.lo || index > self.hi() {
            None
        } else {
            Some(self.symbols[(index - self.lo) as usize])
        }
    }

    /// Symbol at `index`; the caller guarantees `lo <= index <= hi`.
    pub(crate) fn at(&self, index: i64) -> u8 {
        self.symbols[(index - self.lo) as usize]
    }

    /// Overwrite the symbol at `index`; the caller guarantees bounds and
    /// symbol range. Used by enumeration loops to reuse one allocation.
    pub(crate) fn set(&mut self, index: i64, symbol: u8) {
        self.symbols[(index - self.lo) as usize] = symbol;
    }

    /// Append a symbol at `hi + 1`; the caller guarantees symbol range.
    /// Used by streaming scans that grow a segment forward.
    pub(crate) fn push(&mut self, symbol: u8) {
        self.symbols.push(symbol);
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && hi <= self.hi()
    }

    fn bits_string(&self) -> String {
        self.symbols.iter().map(|&s| if s == 0 { '0' } else { '1' }).collect()
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}; {}]", self.lo, self.bits_string())
    }
}

#[derive(Serialize, Deserialize)]
struct WordRepr {
    lo: i64,
    sym: String,
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        WordRepr {
            lo: self.lo,
            sym: self.bits_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = WordRepr::deserialize(deserializer)?;
        Word::from_bits(repr.lo, &repr.sym).map_err(serde::de::Error::custom)
    }
}

/// Bernoulli parameter: symbol 1 has probability `p`, symbol 0 has `1 - p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernoulliParams {
    p: f64,
}

impl BernoulliParams {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "Bernoulli parameter must lie strictly in (0,1), got {p}"
            )));
        }
        Ok(BernoulliParams { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// The cylinder set of all points whose symbols on the base window match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    base: Word,
}

impl CylinderSpec {
    pub fn new(base: Word) -> Self {
        CylinderSpec { base }
    }

    pub fn base(&self) -> &Word {
        &self.base
    }

    /// Product measure of the cylinder: `p^(#ones) * (1-p)^(#zeros)`.
    pub fn measure(&self, b: &BernoulliParams) -> f64 {
        let ones = self.base.symbols.iter().filter(|&&s| s == 1).count() as i32;
        let zeros = self.base.symbols.len() as i32 - ones;
        b.p().powi(ones) * (1.0 - b.p()).powi(zeros)
    }

    /// Image under the `j`-th shift power: `y` lies in `f^j(C)` iff
    /// `y_{i-j}` equals the base symbol at `i`, so the window moves from
    /// `[lo, hi]` to `[lo - j, hi - j]` with the symbols unchanged. The
    /// measure is carried over exactly (the shift preserves every Bernoulli
    /// measure).
    pub fn shift(&self, j: i64) -> CylinderSpec {
        CylinderSpec {
            base: Word {
                lo: self.base.lo - j,
                symbols: self.base.symbols.clone(),
            },
        }
    }

    /// True when the two cylinders fix some shared index to different
    /// symbols, which makes them disjoint as sets.
    pub fn conflicts_with(&self, other: &CylinderSpec) -> bool {
        let lo = self.base.lo().max(other.base.lo());
        let hi = self.base.hi().min(other.base.hi());
        (lo..=hi).any(|i| self.base.at(i) != other.base.at(i))
    }
}

/// First disagreement radius `N(u, v) = min { |i| : u_i != v_i }`, or `None`
/// when the words agree everywhere on the window.
///
/// The words must share a window containing index 0; radii are only
/// meaningful relative to the center.
pub fn first_disagreement_radius(u: &Word, v: &Word) -> Result<Option<u64>> {
    if u.lo() != v.lo() || u.len() != v.len() {
        return Err(Error::WindowMismatch {
            expected: (u.lo(), u.hi()),
            got: (v.lo(), v.hi()),
        });
    }
    if u.lo() > 0 || u.hi() < 0 {
        return Err(Error::InvalidParameter(format!(
            "window [{}, {}] must contain index 0",
            u.lo(),
            u.hi()
        )));
    }
    let mut best: Option<u64> = None;
    for i in u.lo()..=u.hi() {
        if u.at(i) != v.at(i) {
            let r = i.unsigned_abs();
            best = Some(match best {
                Some(b) => b.min(r),
                None => r,
            });
        }
    }
    Ok(best)
}

/// Metric distance `2^-N(u,v)` between the (deepest known) cylinders of two
/// words. Equal words have no defined distance: every pair of extensions
/// realizes a different value.
pub fn word_distance(u: &Word, v: &Word) -> Result<f64> {
    match first_disagreement_radius(u, v)? {
        Some(r) => Ok((-(r as f64)).exp2()),
        None => Err(Error::EqualWords),
    }
}

/// Deterministic RNG for stream `t` of a base seed.
///
/// Streams are independent counter-mode keyspaces of ChaCha8, so trial `t`
/// draws the same symbols no matter how many other trials run, in what order,
/// or on how many threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample one i.i.d. Bernoulli symbol.
pub(crate) fn sample_symbol(rng: &mut ChaCha8Rng, b: &BernoulliParams) -> u8 {
    u8::from(rng.random::<f64>() < b.p())
}

/// Sample a word of i.i.d. symbols on `[lo, hi]` from stream 0 of `seed`.
pub fn sample_window(seed: u64, lo: i64, hi: i64, b: &BernoulliParams) -> Result<Word> {
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "empty window [{lo}, {hi}]"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let symbols = (lo..=hi).map(|_| sample_symbol(&mut rng, b)).collect();
    Word::new(lo, symbols)
}
