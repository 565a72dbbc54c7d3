//! Exact-arithmetic valuations on Q[X].
//!
//! This crate models extensions of the p-adic valuation on Q to the rational
//! function field Q(X) in two equivalent ways:
//!
//! * as chains of augmented valuations (ordinary, limit, and stable-limit
//!   steps starting from a depth-zero valuation), and
//! * as complete sequences of abstract key polynomials grouped into
//!   degree-homogeneous blocks.
//!
//! It provides evaluation of both representations, conversion in both
//! directions, structural validation against the defining axioms, and a small
//! library of worked scenarios. All arithmetic is exact: polynomial
//! coefficients are arbitrary-precision rationals and values live in finite
//! lexicographic tuples of rationals extended by a formal `inf`.

pub mod chains;
pub mod format;
pub mod keypoly;
pub mod poly;
pub mod sampling;
pub mod scenarios;
pub mod value;
pub mod valuation;

pub use poly::{Field, Poly};
pub use value::{GroupValue, ValueError};
