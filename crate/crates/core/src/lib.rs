//! Dimension toolkit for limsup sets defined by products of continued-fraction
//! partial quotients along arithmetic index progressions.
//!
//! The crate is organized around five layers:
//!
//! * [`cf`] — exact continued-fraction arithmetic: words, convergents,
//!   cylinders, fundamental intervals, and certified expansion of rationals
//!   and of reals given by rational enclosures.
//! * [`pressure`] — finite-level pressure sums over cylinder denominators,
//!   by exhaustive enumeration or by transfer-operator iteration, and the
//!   root solvers / extrapolation built on them.
//! * [`cover`] — the equalized-cover recursions and the sup-min cover value
//!   they optimize, with a brute-force grid oracle.
//! * [`dimension`] — growth descriptors, the two liminf exponents, and the
//!   case analysis that dispatches to a closed form or a pressure root.
//! * [`empirics`] — seeded Monte Carlo experiments on certified expansions
//!   plus exact interval-geometry and tuple-sum checks.
//!
//! [`checks`] packages the heavier invariant sweeps so the CLI and the
//! acceptance tests run the same code.

pub mod cf;
pub mod checks;
pub mod cover;
pub mod dimension;
pub mod empirics;
pub mod numeric;
pub mod pressure;
