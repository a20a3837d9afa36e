//! Discretized C⁰ Glaeser refinement for pointwise linear-inequality systems
//! `A(x) F(x) <= f(x)`, with analytic oracles for a planar counterexample whose
//! feasible data set has a curved boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod convex2;
pub mod counterexample;
pub mod error;
pub mod refine;
pub mod selection;

pub use error::{Error, Result};
