//! Numerical laboratory for the Dirichlet divisor problem.
//!
//! Exact divisor sums and the error term Δ(x), the truncated Voronoi
//! expansion, exact and approximate linear relations among square roots,
//! the singular-series constants built from them, moments of Δ and
//! exponential-sum moments.

pub mod acceptance;
pub mod bessel;
pub mod constants;
pub mod divisor;
pub mod error;
pub mod expsum;
pub mod moment;
pub mod numeric;
pub mod relations;
pub mod voronoi;

pub use error::{LabError, Result};
