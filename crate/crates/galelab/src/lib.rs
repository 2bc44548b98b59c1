//! Finite-state gamblers, product s-gales, and block-entropy dimension estimation.
//!
//! The crate is organised around one pipeline:
//!
//! 1. [`seqgen`] produces symbol streams (canned sequences, seeded coin flips,
//!    file ingestion).
//! 2. [`entropy`] counts disjoint or sliding blocks over a stream and tracks
//!    normalised block entropies along a checkpoint schedule; [`dimension`]
//!    turns the per-length running minima into finite-state dimension
//!    estimates.
//! 3. [`construct`] extracts an empirical block distribution from a prefix,
//!    smooths it into an everywhere-positive rational distribution, and builds
//!    a finite-state gambler matched to it (block-aligned or sliding-window).
//! 4. [`gambler`] runs a gambler over an input and accounts its capital
//!    exactly; [`gale`] checks the induced capital functions against the
//!    defining s-gale identities (exact averaging, root supergales, Kraft sums
//!    over prefix sets) and extracts span covers from winning gales.
//! 5. [`verify`] bundles randomized and exhaustive checks of all of the above;
//!    the `galelab` binary exposes the pipeline as subcommands.
//!
//! Exact arithmetic is used wherever an identity is exact: distributions,
//! bets, and capital mantissas are arbitrary-precision rationals
//! ([`rat::Rational`]), and floating point appears only in logarithmic
//! diagnostics and entropy values.

pub mod alphabet;
pub mod cli;
pub mod construct;
pub mod dimension;
pub mod dist;
pub mod entropy;
pub mod gale;
pub mod gambler;
pub mod ledger;
pub mod rat;
pub mod seqgen;
pub mod verify;

pub use alphabet::{Alphabet, Word};
pub use dist::Distribution;
pub use ledger::{CapitalLedger, Mantissa};
pub use rat::Rational;
