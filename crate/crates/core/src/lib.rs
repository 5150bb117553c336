//! Numerical laboratory for locally constant SL(2,R) cocycles over the
//! two-sided binary shift.
//!
//! The crate builds a diagonal base cocycle and a family of small
//! shear/rotation perturbations supported near a marker word, then measures
//! what the perturbation does: exact Holder norms of the difference, Monte
//! Carlo Lyapunov exponents, return-time statistics to the marker cylinder,
//! and a parameter-plane classifier separating the regime where exponents
//! collapse under arbitrarily small perturbations from the fiber-bunched
//! regime where they cannot.
//!
//! Everything here is deterministic: randomness flows through seeded
//! counter-mode streams, and parallel reductions are order-independent, so
//! results are byte-stable across thread counts.

pub mod cocycle;
pub mod error;
pub mod lyapunov;
pub mod mat2;
pub mod regions;
pub mod shift;

pub use error::{Error, Result};

/// Execution helpers: identical results with or without the `parallel`
/// feature. Reductions are restricted to order-independent ones (index-keyed
/// maps and `f64::max` over nonnegative values).
pub(crate) mod exec {
    /// Map `0..n` preserving index order.
    #[cfg(feature = "parallel")]
    pub(crate) fn map_indexed<T, F>(n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub(crate) fn map_indexed<T, F>(n: u64, f: F) -> Vec<T>
    where
        F: Fn(u64) -> T,
    {
        (0..n).map(f).collect()
    }

    /// Max of `f` over `items`; `f` must be nonnegative (the fold starts
    /// at zero). `f64::max` is associative and commutative here, so the
    /// parallel reduction is deterministic.
    #[cfg(feature = "parallel")]
    pub(crate) fn max_map<T, F>(items: &[T], f: F) -> f64
    where
        T: Sync,
        F: Fn(&T) -> f64 + Sync + Send,
    {
        use rayon::prelude::*;
        items
            .par_iter()
            .map(f)
            .reduce(|| 0.0f64, f64::max)
    }

    #[cfg(not(feature = "parallel"))]
    pub(crate) fn max_map<T, F>(items: &[T], f: F) -> f64
    where
        F: Fn(&T) -> f64,
    {
        items.iter().map(f).fold(0.0f64, f64::max)
    }
}
