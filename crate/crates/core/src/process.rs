//! A driving protocol resolved into the three ingredients the work
//! statistics need: initial eigenbasis, final eigenbasis and propagator.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{EigenSystem, Operator};
use crate::model::{eigensystem_at, HamiltonianSchedule};
use crate::propagator::{evolve, PropagatorResult};
use crate::workdist::{build_evolved_work_distribution, build_work_distribution, MeasurementScheme, WorkDecomposition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivenProcess {
    pub duration: f64,
    pub initial: EigenSystem,
    pub fin: EigenSystem,
    pub propagator: PropagatorResult,
}

impl DrivenProcess {
    /// Diagonalises `H(0)` and `H(t)` numerically and propagates to `t`.
    pub fn new<S: HamiltonianSchedule>(schedule: &S, t: f64, propagator_tol: f64) -> Result<Self> {
        let propagator = evolve(schedule, t, propagator_tol)?;
        Ok(DrivenProcess {
            duration: t,
            initial: eigensystem_at(schedule, 0.0)?,
            fin: eigensystem_at(schedule, t)?,
            propagator,
        })
    }

    pub fn unitary(&self) -> &Operator {
        &self.propagator.unitary
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn decompose(&self, rho: &Operator, scheme: MeasurementScheme) -> Result<WorkDecomposition> {
        build_work_distribution(rho, &self.initial, &self.fin, self.unitary(), scheme)
    }

    pub fn decompose_evolved(&self, rho: &Operator, scheme: MeasurementScheme) -> Result<WorkDecomposition> {
        build_evolved_work_distribution(rho, &self.initial, &self.fin, self.unitary(), scheme)
    }
}
