//! Randomized quasi-Monte Carlo for integrands `f(u) = g(u) 1{u in Omega}`
//! whose `g` is singular on the boundary of the unit cube.
//!
//! * [`digital_nets`]: base-2 Sobol'-type sequences and exhaustive
//!   (t,m,d)-net verification.
//! * [`scrambling`]: nested uniform (Owen) scrambling driven by a keyed hash.
//! * [`singularity`]: the boundary growth condition, the avoidance region
//!   `K(eps)` and the anchored low-variation extension `g_eps`.
//! * [`finance`]: GBM paths, Cholesky and orthogonal-transformation factors,
//!   Asian payoffs and Greeks, and the geometric-Asian closed form.
//! * [`experiment`]: replicated expected-absolute-error studies and log-log
//!   rate fits against the theoretical exponents.
//! * [`cli`]: the `rqmc` command-line front end.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod digital_nets;
pub mod error;
pub mod experiment;
pub mod finance;
pub mod quadrature;
pub mod scrambling;
pub mod singularity;

pub use error::{Error, Result};
