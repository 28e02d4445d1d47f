//! Flag curvature of invariant Finsler metrics `F = (alpha + beta)^2 / alpha`
//! on Lie groups and reductive homogeneous spaces, computed from Lie-algebra
//! data, with brute-force Riemannian and finite-difference oracles for
//! cross-checking every closed form.
//!
//! Module map:
//!
//! - [`algebra`]: structure constants, brackets, Jacobi check, derived
//!   subalgebra, reductive splitting.
//! - [`metrics`]: `g0`, `phi`, the induced inner product, invariance checks
//!   and flag orthonormalization.
//! - [`riemann_oracle`]: Koszul connection, curvature tensor, naturally
//!   reductive curvature, sectional curvature.
//! - [`finsler`]: evaluation of `F`, the fundamental tensor `g_Y` in closed
//!   form and by finite differences.
//! - [`flagcurv`]: flag curvature assembly and flag scans.
//! - [`berwald`]: obstructions to a parallel drift vector.

pub mod algebra;
pub mod berwald;
pub mod catalog;
pub mod error;
pub mod finsler;
pub mod flagcurv;
pub mod metrics;
pub mod riemann_oracle;
mod sampling;

use serde::{Deserialize, Serialize};

pub use algebra::{LieAlgebraSpec, Part, ReductivePair};
pub use error::{Error, Result};
pub use finsler::FinslerData;
pub use flagcurv::{Convention, CurvatureReport, FlagCurvatureOptions, Method};
pub use metrics::{BiInvariantForm, Flag, InnerProduct, InvariantMetric, MetricEndomorphism};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

/// Numerical tolerances used across the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Jacobi identity and reductive-splitting checks.
    pub jacobi: f64,
    /// Singular-value cut-off for rank decisions.
    pub rank: f64,
    /// Symmetry, invariance and self-adjointness of metric data.
    pub metric: f64,
    /// Required margin in `|X|_g < 1`.
    pub boundary: f64,
    /// Oracle identities and curvature symmetries.
    pub oracle: f64,
    /// Normalized Gram determinant below which a flag is degenerate.
    pub dependence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jacobi: 1e-9,
            rank: 1e-10,
            metric: 1e-9,
            boundary: 1e-12,
            oracle: 1e-10,
            dependence: 1e-10,
        }
    }
}
