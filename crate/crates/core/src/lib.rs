//! Cauchy-distribution toolkit built around two transform identities: the
//! Möbius statistic `F_X(gamma) = E[X/(X - conj(gamma))] / E[1/(X - conj(gamma))]`,
//! which is constant in `gamma` exactly for Cauchy laws and whose fixed point
//! is the maximum-likelihood estimate, and the Mellin transform `E[X^a]`,
//! which equals `gamma^a` for the Cauchy law with parameter `gamma`.
//!
//! The crate provides the transform statistics, fixed-point and
//! fractional-moment estimators, circular-Cauchy and mixture-Cauchy
//! extensions, bootstrap-calibrated goodness-of-fit tests, and a quadrature
//! oracle that machine-verifies the analytic identities everything else
//! relies on.

pub mod distributions;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod halfplane;
pub mod oracle;
pub mod transforms;

mod optim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
