//! Time-dependent Hamiltonians.
//!
//! [`DrivenTwoLevel`] is the sinusoidally driven qubit
//! `H(tau) = omega0 sigma_z + g sin(omega tau) sigma_x` with `g = 1` as the
//! energy unit; its instantaneous eigensystem is known in closed form. Any
//! other protocol can be supplied through [`TabulatedSchedule`] or by
//! implementing [`HamiltonianSchedule`] directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigensystem, EigenSystem, Operator, C64};
use crate::tolerance;

/// A map from time to a Hermitian operator of fixed dimension.
pub trait HamiltonianSchedule: Send + Sync {
    fn dim(&self) -> usize;

    fn hamiltonian_at(&self, tau: f64) -> Operator;

    /// Raw 2x2 entries, avoiding an allocation in the propagator hot loop.
    fn hamiltonian_2x2(&self, tau: f64) -> Option<[[C64; 2]; 2]> {
        if self.dim() != 2 {
            return None;
        }
        let h = self.hamiltonian_at(tau);
        Some([[h.get(0, 0), h.get(0, 1)], [h.get(1, 0), h.get(1, 1)]])
    }
}

impl<S: HamiltonianSchedule + ?Sized> HamiltonianSchedule for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn hamiltonian_at(&self, tau: f64) -> Operator {
        (**self).hamiltonian_at(tau)
    }
    fn hamiltonian_2x2(&self, tau: f64) -> Option<[[C64; 2]; 2]> {
        (**self).hamiltonian_2x2(tau)
    }
}

/// Two-level system with static splitting `omega0` and a sinusoidal
/// transverse drive of unit strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivenTwoLevel {
    omega0: f64,
    omega: f64,
}

impl DrivenTwoLevel {
    /// Drive strength; fixed as the unit of energy.
    pub const G: f64 = 1.0;

    pub fn new(omega0: f64, omega: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(Error::invalid("omega0", format!("must be finite and >= 0, got {omega0}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid("omega", format!("must be finite and > 0, got {omega}")));
        }
        Ok(DrivenTwoLevel { omega0, omega })
    }

    /// Parameters used for the reference sweeps: `omega0 = omega = 0.01`.
    pub fn reference() -> Self {
        DrivenTwoLevel {
            omega0: 0.01,
            omega: 0.01,
        }
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Drive period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    fn drive(&self, tau: f64) -> f64 {
        Self::G * (self.omega * tau).sin()
    }

    /// Upper instantaneous level `sqrt(omega0^2 + sin^2(omega tau))`.
    pub fn transient_energy(&self, tau: f64) -> f64 {
        self.omega0.hypot(self.drive(tau))
    }

    /// Closed-form instantaneous eigensystem, mapped onto the
    /// [`EigenSystem`] phase convention.
    ///
    /// At `omega0 = 0` with a vanishing drive the spectrum is fully
    /// degenerate and the canonical basis is returned.
    pub fn transient_eigensystem(&self, tau: f64) -> EigenSystem {
        let s = self.drive(tau);
        let eps = self.omega0.hypot(s);
        if eps == 0.0 {
            return EigenSystem::canonical(&[0.0, 0.0]).expect("canonical basis");
        }
        let lower = -eps;
        let upper = eps;
        // (omega0 - eps1)|1> - s|2>
        let a1 = self.omega0 - lower;
        let n1 = a1.hypot(s);
        let v1 = vec![C64::new(a1 / n1, 0.0), C64::new(-s / n1, 0.0)];
        // s|1> + (omega0 + eps2)|2>
        let a2 = self.omega0 + upper;
        let n2 = a2.hypot(s);
        let v2 = vec![C64::new(s / n2, 0.0), C64::new(a2 / n2, 0.0)];
        EigenSystem::from_parts(vec![lower, upper], vec![v1, v2])
            .expect("closed-form eigenvectors are normalisable")
    }
}

impl HamiltonianSchedule for DrivenTwoLevel {
    fn dim(&self) -> usize {
        2
    }

    fn hamiltonian_at(&self, tau: f64) -> Operator {
        let h = self.hamiltonian_2x2(tau).unwrap();
        Operator::from_entries(2, vec![h[0][0], h[0][1], h[1][0], h[1][1]]).unwrap()
    }

    fn hamiltonian_2x2(&self, tau: f64) -> Option<[[C64; 2]; 2]> {
        let s = C64::new(self.drive(tau), 0.0);
        Some([
            [C64::new(-self.omega0, 0.0), s],
            [s, C64::new(self.omega0, 0.0)],
        ])
    }
}

/// Time-independent Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSchedule {
    hamiltonian: Operator,
}

impl ConstantSchedule {
    pub fn new(hamiltonian: Operator) -> Result<Self> {
        let asymmetry = hamiltonian.hermiticity_defect();
        if asymmetry > tolerance::HERMITICITY {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(ConstantSchedule { hamiltonian })
    }
}

impl HamiltonianSchedule for ConstantSchedule {
    fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    fn hamiltonian_at(&self, _tau: f64) -> Operator {
        self.hamiltonian.clone()
    }
}

/// Piecewise-linear interpolation between sampled Hamiltonians. Outside the
/// sampled range the end values are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSchedule {
    times: Vec<f64>,
    samples: Vec<Operator>,
}

impl TabulatedSchedule {
    pub fn new(times: Vec<f64>, samples: Vec<Operator>) -> Result<Self> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(Error::invalid(
                "samples",
                format!("{} times for {} samples", times.len(), samples.len()),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("times", "must be strictly increasing"));
        }
        let dim = samples[0].dim();
        for h in &samples {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.dim(),
                });
            }
            let asymmetry = h.hermiticity_defect();
            if asymmetry > tolerance::HERMITICITY {
                return Err(Error::NotHermitian { asymmetry });
            }
        }
        Ok(TabulatedSchedule { times, samples })
    }

    /// Samples `schedule` at `n + 1` equally spaced times on `[0, t_final]`.
    pub fn sample<S: HamiltonianSchedule>(schedule: &S, t_final: f64, n: usize) -> Result<Self> {
        if n == 0 || !(t_final > 0.0) {
            return Err(Error::invalid("n", "need n > 0 and t_final > 0"));
        }
        let times: Vec<f64> = (0..=n).map(|k| t_final * k as f64 / n as f64).collect();
        let samples = times.iter().map(|&t| schedule.hamiltonian_at(t)).collect();
        TabulatedSchedule::new(times, samples)
    }
}

impl HamiltonianSchedule for TabulatedSchedule {
    fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    fn hamiltonian_at(&self, tau: f64) -> Operator {
        let n = self.times.len();
        if tau <= self.times[0] {
            return self.samples[0].clone();
        }
        if tau >= self.times[n - 1] {
            return self.samples[n - 1].clone();
        }
        let k = self.times.partition_point(|&t| t <= tau) - 1;
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let x = (tau - t0) / (t1 - t0);
        let a = self.samples[k].scale(C64::new(1.0 - x, 0.0));
        let b = self.samples[k + 1].scale(C64::new(x, 0.0));
        &a + &b
    }
}

/// `tau -> inner(tau + offset)`.
#[derive(Debug, Clone)]
pub struct ShiftedSchedule<S> {
    inner: S,
    offset: f64,
}

impl<S: HamiltonianSchedule> ShiftedSchedule<S> {
    pub fn new(inner: S, offset: f64) -> Self {
        ShiftedSchedule { inner, offset }
    }
}

impl<S: HamiltonianSchedule> HamiltonianSchedule for ShiftedSchedule<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn hamiltonian_at(&self, tau: f64) -> Operator {
        self.inner.hamiltonian_at(tau + self.offset)
    }
    fn hamiltonian_2x2(&self, tau: f64) -> Option<[[C64; 2]; 2]> {
        self.inner.hamiltonian_2x2(tau + self.offset)
    }
}

/// Numerical instantaneous eigensystem for any schedule.
pub fn eigensystem_at<S: HamiltonianSchedule>(schedule: &S, tau: f64) -> Result<EigenSystem> {
    hermitian_eigensystem(&schedule.hamiltonian_at(tau))
}

/// Pure two-level state `cos(theta)|1> + sin(theta)|2>` as a density matrix.
pub fn two_level_state(theta: f64) -> Operator {
    let psi = [C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)];
    Operator::projector(&psi)
}

/// Maximally mixed state `I / d`.
pub fn maximally_mixed(dim: usize) -> Operator {
    Operator::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0))
}
