//! Exact machinery for piecewise-linear interval maps and the inverse limits
//! they generate: zigzag detection, branch analysis, post-critical and leo
//! verification, the `t∘s` factorization of iterates, and accessibility
//! certificates for points of `lim(I, f)`.

// Errors carry the offending rationals as evidence.
#![allow(clippy::result_large_err)]

pub mod certificate;
pub mod dynamics;
pub mod error;
pub mod factorize;
pub mod interval;
pub mod orbit;
pub mod plmap;
pub mod rational;
pub mod zigzag;

pub use certificate::{CertResult, Certificate, Pipeline, Stage};
pub use dynamics::{branch, BranchResult, Decision, GapSide, StabilizationData};
pub use error::ParseError;
pub use factorize::{certify_general, certify_minc, minc_map, Case, FactorPair};
pub use interval::Interval;
pub use orbit::BackwardOrbit;
pub use plmap::{compose, iterate, Breakpoint, Direction, Lap, MapError, PLMap};
pub use rational::Rational;
pub use zigzag::{is_in_zigzag, zigzag_set, Extremum, ZigzagVerdict};
