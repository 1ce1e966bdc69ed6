//! Approximate maximin-share allocation of indivisible goods.
//!
//! Exact MMS computation, cut-based allocation protocols with re-checkable
//! certificates, the catalogue of impossibility instances and brute-force
//! oracles, all over exact rationals.

pub mod counterexamples;
pub mod cuts;
pub mod items;
pub mod mms;
pub mod model;
pub mod oracle;
pub mod protocols;
pub mod valuations;

pub use num_rational::Ratio;

/// Exact value type used throughout.
pub type Rational = Ratio<i64>;

/// `n / d` as a [`Rational`].
///
/// # Panics
/// If `d == 0`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub use items::{ItemSet, MAX_ITEMS};
pub use model::{
    guarantee_dominates, validate_allocation, Allocation, AllocationViolation, DemandVector,
    Instance, ModelError, Partition, ThresholdVector,
};
pub use valuations::{ValuationClass, ValuationError, ValuationOracle};
