//! Time-ordered propagator `U(t) = T exp(-i int_0^t H(tau) dtau)`.
//!
//! The propagator is a product of exact single-step exponentials evaluated
//! at the midpoint of each step, so every refinement level is unitary to
//! rounding and second-order accurate. The step is halved until two
//! successive levels agree in Frobenius norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian_times_minus_i, frobenius_distance, rodrigues_2x2, Operator, C64};
use crate::model::HamiltonianSchedule;
use crate::tolerance;

/// First refinement level (number of midpoint steps).
const INITIAL_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorResult {
    pub unitary: Operator,
    pub steps_used: usize,
    pub unitarity_residual: f64,
    /// `||U_h - U_{h/2}||_F / 3`, the extrapolated error of the accepted
    /// level for a second-order scheme.
    pub richardson_error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            tol: tolerance::PROPAGATOR,
            max_steps: tolerance::PROPAGATOR_MAX_STEPS,
        }
    }
}

impl PropagatorOptions {
    pub fn with_tol(tol: f64) -> Self {
        PropagatorOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Midpoint product with a fixed number of uniform steps.
pub fn evolve_fixed<S: HamiltonianSchedule>(schedule: &S, t: f64, steps: usize) -> Result<Operator> {
    let d = schedule.dim();
    if steps == 0 || t == 0.0 {
        return Ok(Operator::identity(d));
    }
    let h = t / steps as f64;
    if d == 2 && schedule.hamiltonian_2x2(0.0).is_some() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut u = [[one, zero], [zero, one]];
        for k in 0..steps {
            let tau = (k as f64 + 0.5) * h;
            let hm = schedule.hamiltonian_2x2(tau).expect("2x2 schedule");
            let s = rodrigues_2x2(hm, h);
            u = [
                [
                    s[0][0] * u[0][0] + s[0][1] * u[1][0],
                    s[0][0] * u[0][1] + s[0][1] * u[1][1],
                ],
                [
                    s[1][0] * u[0][0] + s[1][1] * u[1][0],
                    s[1][0] * u[0][1] + s[1][1] * u[1][1],
                ],
            ];
        }
        return Operator::from_entries(2, vec![u[0][0], u[0][1], u[1][0], u[1][1]]);
    }
    let mut u = Operator::identity(d);
    for k in 0..steps {
        let tau = (k as f64 + 0.5) * h;
        let step = expm_hermitian_times_minus_i(&schedule.hamiltonian_at(tau), h)?;
        u = &step * &u;
    }
    Ok(u)
}

/// Converged propagator over `[0, t]`.
pub fn evolve<S: HamiltonianSchedule>(schedule: &S, t: f64, tol: f64) -> Result<PropagatorResult> {
    evolve_with(schedule, t, PropagatorOptions::with_tol(tol))
}

pub fn evolve_with<S: HamiltonianSchedule>(
    schedule: &S,
    t: f64,
    opts: PropagatorOptions,
) -> Result<PropagatorResult> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {}", opts.tol)));
    }
    let d = schedule.dim();
    if t == 0.0 {
        return Ok(PropagatorResult {
            unitary: Operator::identity(d),
            steps_used: 0,
            unitarity_residual: 0.0,
            richardson_error_estimate: 0.0,
        });
    }
    let mut steps = INITIAL_STEPS.min(opts.max_steps.max(1));
    let mut previous = evolve_fixed(schedule, t, steps)?;
    let mut last_change = f64::INFINITY;
    while steps * 2 <= opts.max_steps {
        steps *= 2;
        let current = evolve_fixed(schedule, t, steps)?;
        last_change = frobenius_distance(&current, &previous)?;
        if last_change < opts.tol {
            let unitarity_residual = current.unitarity_defect();
            if unitarity_residual >= tolerance::UNITARITY {
                return Err(Error::NotUnitary {
                    residual: unitarity_residual,
                });
            }
            return Ok(PropagatorResult {
                unitary: current,
                steps_used: steps,
                unitarity_residual,
                richardson_error_estimate: last_change / 3.0,
            });
        }
        previous = current;
    }
    Err(Error::NoConvergence {
        what: "propagator",
        steps,
        last_change,
    })
}
