//! Numerical laboratory for minimal weighted L² integrals on model domains.
//!
//! The crate computes `G(t; c)`, the smallest weighted L² norm of a
//! holomorphic extension on the sublevel set `{psi < -t}` of a
//! pluricomplex Green function, and checks the structural facts around it:
//! concavity in the reparametrization `r = g(t)`, the equivalent
//! characterizations of the linear case, the Bergman-kernel restriction law,
//! and the supporting identities (ODE system, layer-cake formula, cutoffs,
//! mollified maxima, optimal extension equalities).
//!
//! Modules, bottom-up:
//! - [`weightlab`]: weights `c`, class checks and the `g` transform;
//! - [`odekit`]: closed-form ODE solution, cutoff profiles, mollifiers;
//! - [`domains`]: disk, ball and polydisc models with sublevel quadrature;
//! - [`minimizer`]: constrained minimum-norm solves and Bergman kernels;
//! - [`analysis`]: the checks built on sampled curves;
//! - [`runner`]: configuration files, reports and the command-line driver.

// `!(x > 0.0)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod domains;
pub mod error;
pub mod minimizer;
pub mod odekit;
pub mod poly;
pub mod quad;
pub mod runner;
pub mod weightlab;

pub use error::{Error, Result};
