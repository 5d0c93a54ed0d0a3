//! Numerical toolkit for damped oscillatory integrals over κ-homogeneous
//! surfaces `x3 = c + f(x1, x2)` and the maximal operators they generate.
//!
//! * [`homfn`]: exact calculus of κ-homogeneous polynomial phases.
//! * [`oscquad`]: the integrals `J(t, s)` and the Fourier transform of `G^α dσ`.
//! * [`decayfit`]: fitted decay exponents and sweeps over `s`.
//! * [`maxop`]: averaging and maximal operators on grids, and the lower-bound
//!   constructions for `‖Mg_N‖_p`.
//! * [`experiment`]: config parsing and report files for the `oscdecay` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod bipoly;
pub mod decayfit;
pub mod error;
pub mod experiment;
pub mod homfn;
pub mod maxop;
pub mod oscquad;
pub mod rational;
pub mod upoly;

pub use error::{Error, Result};
