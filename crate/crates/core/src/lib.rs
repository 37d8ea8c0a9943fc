//! Sequence predictability over finite-state predictor classes.
//!
//! A binary sequence is scored against a class of causal predictors by the
//! best error rate any member achieves on a prefix. Predictors here are Moore
//! machines over the binary alphabet; classes are finite, deduplicated by
//! prediction equivalence, and arranged in nested hierarchies.
//!
//! The crate is organised bottom-up:
//!
//! - [`bitseq`]: packed finite binary sequences and the triple operators
//!   (extraction, summation, interleaving).
//! - [`machine`]: Moore machines, execution, minimization, enumeration and
//!   the text file format.
//! - [`combinators`]: product constructions closing the finite-state class
//!   under summation, interleaving, subsequence lifts and switching.
//! - [`estimator`]: exact empirical predictability and curves over a hierarchy.
//! - [`synthesis`]: adversarial blocks, sequences with a prescribed
//!   predictability, and the class-separation sequence.
//! - [`experiments`]: seeded drivers producing [`report::Report`]s.

pub mod bitseq;
pub mod combinators;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod machine;
pub mod report;
pub mod synthesis;

pub use bitseq::BitSeq;
pub use error::{Error, Result};
pub use machine::{Hierarchy, MooreMachine, PredictorClass};

/// Exact rational used for every error rate and predictability value.
pub type Rational = num_rational::Ratio<i64>;

/// Version string echoed into file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Builds `num / den` as a [`Rational`]. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Lossy conversion used only when formatting reports.
pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
