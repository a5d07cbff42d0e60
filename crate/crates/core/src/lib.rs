//! Empirical probabilistic number theory on the finite spaces `[1, n]`.
//!
//! The crate is organised bottom-up:
//!
//! * [`sieve`] streams primes and per-integer factorization data over `[1, n]`
//!   in independent blocks.
//! * [`additive`] defines strongly additive functions by their prime values and
//!   turns them into exact value histograms.
//! * [`space`] treats `[1, n]` with the counting measure as a probability space:
//!   densities, moments and empirical CDFs.
//! * [`density`], [`lln`] and [`clt`] run the prime-density, law-of-large-numbers
//!   and Erdős–Kác experiments.
//! * [`models`] builds sums of independent two-point random variables and
//!   compares their moments with the arithmetic side.
//!
//! Block-level work runs on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise. Every public result is independent of
//! scheduling.

pub mod additive;
pub mod clt;
pub mod density;
mod error;
pub mod golden;
pub mod lln;
pub mod models;
mod numeric;
mod par;
pub mod sieve;
pub mod space;

pub use error::{Error, Result};
pub use numeric::ln_ln;
pub use par::is_parallel;
