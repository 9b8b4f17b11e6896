//! Brute-force references.
//!
//! Nothing in here touches the mixture algebra: the work density is obtained
//! by assembling the Gaussian measurement operators as matrices, evaluating
//! the joint probability `Tr[M_Et U M_E0 rho M_E0^dag U^dag M_Et^dag]`, and
//! integrating it along the line `Et - E0 = W`. The propagator reference is
//! an adaptive Dormand-Prince integration of `i dU/dtau = H(tau) U`.
//!
//! These routines are slow by construction and are meant for tests and the
//! `verify` command only.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{EigenSystem, Operator, C64};
use crate::model::HamiltonianSchedule;

/// Default convergence target for the line integral.
pub const MARGINAL_TOL: f64 = 1e-10;
const MARGINAL_MAX_POINTS: usize = 1 << 18;

/// Point count and ranges for composite Simpson integration over the
/// measured energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub e0_range: (f64, f64),
    pub et_range: (f64, f64),
    /// Initial number of Simpson intervals along `E0` (even, >= 200).
    pub n0: usize,
    /// Initial number of Simpson intervals along `Et` (even, >= 200).
    pub nt: usize,
}

impl QuadratureGrid {
    /// Ranges covering every eigenvalue by ten measurement widths.
    pub fn covering(e0: &EigenSystem, et: &EigenSystem, sigma: f64) -> Self {
        let span = |e: &EigenSystem| {
            let lo = e.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = e.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo - 10.0 * sigma, hi + 10.0 * sigma)
        };
        QuadratureGrid {
            e0_range: span(e0),
            et_range: span(et),
            n0: 200,
            nt: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n0", self.n0), ("nt", self.nt)] {
            if n < 200 || n % 2 != 0 {
                return Err(Error::invalid(name, format!("point count must be even and >= 200, got {n}")));
            }
        }
        if !(self.e0_range.0 < self.e0_range.1 && self.et_range.0 < self.et_range.1) {
            return Err(Error::invalid("range", "empty integration range"));
        }
        Ok(())
    }
}

/// Process data shared by every oracle evaluation.
#[derive(Debug, Clone)]
pub struct OracleProcess<'a> {
    pub rho: &'a Operator,
    pub e0: &'a EigenSystem,
    pub et: &'a EigenSystem,
    pub u: &'a Operator,
    pub sigma: f64,
}

/// Gaussian-smeared energy measurement operator
/// `sum_n (2 pi sigma^2)^(-1/4) exp(-(e_n - E)^2 / (4 sigma^2)) |e_n><e_n|`.
pub fn measurement_operator(eig: &EigenSystem, sigma: f64, energy: f64) -> Operator {
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    let d = eig.dim();
    let mut op = Operator::zeros(d);
    for n in 0..d {
        let x = eig.value(n) - energy;
        let g = norm * (-x * x / (4.0 * sigma * sigma)).exp();
        let p = Operator::projector(eig.vector(n)).scale(C64::new(g, 0.0));
        op = &op + &p;
    }
    op
}

/// Joint density of measuring `e0_value` first and `et_value` second.
pub fn joint_probability(process: &OracleProcess<'_>, e0_value: f64, et_value: f64) -> f64 {
    let m0 = measurement_operator(process.e0, process.sigma, e0_value);
    let mt = measurement_operator(process.et, process.sigma, et_value);
    let inner = &(&m0 * process.rho) * &m0.adjoint();
    let evolved = &(process.u * &inner) * &process.u.adjoint();
    let outer = &(&mt * &evolved) * &mt.adjoint();
    outer.trace().re
}

fn simpson_line<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// `P(W) = int dE0 P(E0 + W, E0)` by composite Simpson, doubling the point
/// count until successive estimates differ by less than `conv_tol`.
pub fn marginal_work_density(
    process: &OracleProcess<'_>,
    grid: &QuadratureGrid,
    w: f64,
    conv_tol: f64,
) -> Result<f64> {
    grid.validate()?;
    if !(process.sigma > 0.0) {
        return Err(Error::invalid("sigma", "oracle needs sigma > 0"));
    }
    // E0 such that both E0 and E0 + W lie inside their ranges
    let a = grid.e0_range.0.max(grid.et_range.0 - w);
    let b = grid.e0_range.1.min(grid.et_range.1 - w);
    if a >= b {
        return Ok(0.0);
    }
    let f = |e0: f64| joint_probability(process, e0, e0 + w);
    let mut n = grid.n0;
    let mut previous = simpson_line(&f, a, b, n);
    let mut change = f64::INFINITY;
    while n * 2 <= MARGINAL_MAX_POINTS {
        n *= 2;
        let current = simpson_line(&f, a, b, n);
        change = (current - previous).abs();
        previous = current;
        if change < conv_tol {
            return Ok(current);
        }
    }
    Err(Error::NoConvergence {
        what: "oracle marginal",
        steps: n,
        last_change: change,
    })
}

/// `int int P(Et, E0) dE0 dEt` on the grid, by tensor-product Simpson.
pub fn total_probability(process: &OracleProcess<'_>, grid: &QuadratureGrid) -> Result<f64> {
    grid.validate()?;
    let inner = |e0: f64| {
        let g = |et: f64| joint_probability(process, e0, et);
        simpson_line(&g, grid.et_range.0, grid.et_range.1, grid.nt)
    };
    Ok(simpson_line(&inner, grid.e0_range.0, grid.e0_range.1, grid.n0))
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of `dU/dtau = -i H(tau) U` from the
/// identity. `tol` is a mixed absolute/relative per-step error target.
pub fn ode_propagator<S: HamiltonianSchedule>(schedule: &S, t: f64, tol: f64) -> Result<Operator> {
    let d = schedule.dim();
    if t == 0.0 {
        return Ok(Operator::identity(d));
    }
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |tau: f64, y: &Operator| (&schedule.hamiltonian_at(tau) * y).scale(minus_i);
    let mut y = Operator::identity(d);
    let mut tau = 0.0;
    let mut h = (t * 1e-3).min(1e-2);
    let mut steps = 0usize;
    let max_steps = 50_000_000usize;
    while tau < t {
        if steps >= max_steps {
            return Err(Error::NoConvergence {
                what: "ODE reference",
                steps,
                last_change: h,
            });
        }
        steps += 1;
        if tau + h > t {
            h = t - tau;
        }
        let mut k: Vec<Operator> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys = &ys + &kj.scale(C64::new(h * A[s][j], 0.0));
                }
            }
            k.push(rhs(tau + C[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut err = Operator::zeros(d);
        for s in 0..7 {
            if B5[s] != 0.0 {
                y5 = &y5 + &k[s].scale(C64::new(h * B5[s], 0.0));
            }
            let e = B5[s] - B4[s];
            if e != 0.0 {
                err = &err + &k[s].scale(C64::new(h * e, 0.0));
            }
        }
        let scale_err = err
            .entries()
            .iter()
            .zip(y5.entries())
            .map(|(e, v)| e.norm() / (tol * (1.0 + v.norm())))
            .fold(0.0, f64::max);
        if scale_err <= 1.0 {
            tau += h;
            y = y5;
        }
        let factor = if scale_err == 0.0 {
            5.0
        } else {
            (0.9 * scale_err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok(y)
}
