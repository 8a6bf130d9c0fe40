//! Geodesics of regularized impulsive wave space-times `N × R²₁`.
//!
//! The metric `h + 2 du dv + f(x) δ_ε(u) du²` is integrated across the shock
//! strip, certified against an a-priori existence interval, and compared with
//! its distributional `ε → 0` limit.

// `!(x > 0.0)` is used on purpose: NaN has to fail positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::too_many_arguments)]

pub mod dynamics;
pub mod error;
pub mod existence;
pub mod geometry;
pub mod harness;
pub mod limits;
pub mod ode;
pub mod profiles;
pub mod quadrature;
pub mod scenarios;

pub use error::{Error, Result};
