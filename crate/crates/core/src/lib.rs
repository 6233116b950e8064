//! Certified quadrature for convex functions.
//!
//! The generalized trapezoid rule `(x - a) f(a) + (b - x) f(b)` over- or
//! under-estimates `int_a^b f` by an amount that one-sided derivatives of a
//! convex `f` bound from both sides. This crate turns those bounds into
//! enclosures:
//!
//! - [`pointwise`]: single-interval gap bounds and Hermite-Hadamard
//!   refinements;
//! - [`quadrature`]: composite rules with certified remainder enclosures and
//!   an adaptive integrator;
//! - [`probability`]: expectation bounds for nondecreasing densities;
//! - [`divergence`]: Csiszar, Lin-Wong and Hermite-Hadamard divergences
//!   with their sandwich;
//! - [`expr`]: a small expression language so functions can be given as text;
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod divergence;
pub mod enclosure;
pub mod error;
pub mod expr;
pub mod funcs;
pub mod pointwise;
pub mod probability;
pub mod quadrature;

pub use divergence::{DiscreteDistribution, GeneratorFunction};
pub use enclosure::Enclosure;
pub use error::{Error, Result, Side};
pub use expr::Expr;
pub use funcs::{catalog, ConvexFunction, Interval};
pub use probability::MonotoneDensity;
pub use quadrature::{adaptive_integrate, integrate, Partition, XiRule};
