//! Numerical tolerances shared by every module.
//!
//! All guards (Hermiticity, unitarity, density checks) and default
//! convergence targets read from a single [`Tolerances`] record so a run can
//! be tightened or loosened in one place.

use serde::{Deserialize, Serialize};

/// Hermiticity guard: `||A - A^dag||_F` must not exceed this.
pub const HERMITICITY: f64 = 1e-10;
/// Unitarity guard: `||U^dag U - I||_F` must not exceed this.
pub const UNITARITY: f64 = 1e-9;
/// Trace and positivity slack for density matrices.
pub const DENSITY: f64 = 1e-9;
/// Eigenvalues closer than this (relative to the spectral scale) form a
/// degenerate block.
pub const DEGENERACY: f64 = 1e-10;
/// Default propagator refinement tolerance.
pub const PROPAGATOR: f64 = 1e-10;
/// Hard cap on midpoint sub-steps per propagation.
pub const PROPAGATOR_MAX_STEPS: usize = 1 << 24;
/// Default tolerance for absolute-value quadratures.
pub const QUADRATURE: f64 = 1e-9;
/// Slack allowed on the duality inequalities before a violation is raised.
pub const BOUND_SLACK: f64 = 1e-9;
/// Admissible imaginary residual of an evaluated work density.
pub const IMAGINARY_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub unitarity: f64,
    pub density: f64,
    pub propagator: f64,
    pub quadrature: f64,
    pub bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: HERMITICITY,
            unitarity: UNITARITY,
            density: DENSITY,
            propagator: PROPAGATOR,
            quadrature: QUADRATURE,
            bound_slack: BOUND_SLACK,
        }
    }
}
