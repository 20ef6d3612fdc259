//! Hypergeometric machinery attached to root systems of type A, with the
//! numerical checks that certify it.
//!
//! The crate has three computational layers and a reporting layer:
//!
//! - [`root_data`]: exact roots, weights and Weyl group of type A_n.
//! - [`special_fn`]: complex log-gamma and the gamma-product closed forms
//!   (leading coefficients, the evaluation at the identity, the Selberg
//!   right-hand side).
//! - [`hc_series`] and [`quadrature`] / [`pattern_integrals`]: the two
//!   independent routes to the same objects — truncated asymptotic series of
//!   the radial operator on one side, iterated singular quadrature of pattern
//!   integrals over interlacing polytopes on the other.
//! - [`report`] and [`checks`]: named verification checks with
//!   machine-readable reports, exposed by the `hyperg` CLI.

pub mod error;
pub mod root_data;
pub mod special_fn;
pub mod hc_series;
pub mod quadrature;
pub mod pattern_integrals;
pub mod report;
pub mod checks;

pub use error::{Error, Result};
