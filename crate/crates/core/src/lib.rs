//! Probability that `d + 2` i.i.d. points in `R^d` form a simplex, for
//! Gaussian, beta and beta-prime laws.
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod anglesums;
pub mod cli;
pub mod geomc;
pub mod quad;
pub mod specfun;
pub mod sylvester;
pub mod verify;
