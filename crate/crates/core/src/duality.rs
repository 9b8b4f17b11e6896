//! Predictability of energy levels and effectiveness of coherence.
//!
//! Given a [`WorkDecomposition`], the predictability `D_W` measures how well
//! the per-level work densities (weighted by their populations) can be told
//! apart, and the effectiveness `V_W` is the normalised L1 mass of the
//! coherent part. Both are bounded by one and obey `D_W^2 + V_W^2 <= 1`.
//!
//! Besides the definition-level routes this module carries closed forms for
//! the driven two-level system, a discretised check of the inequality chain
//! behind the bound, and the `(theta, sigma)` scan used to locate the
//! minimum-uncertainty state.

use std::f64::consts::SQRT_2;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance, trace_norm_hermitian, EigenSystem, Operator, C64};
use crate::model::{two_level_state, DrivenTwoLevel};
use crate::process::DrivenProcess;
use crate::quadrature::piecewise_adaptive_simpson;
use crate::tolerance;
use crate::workdist::{
    build_evolved_work_distribution, normal_pdf, MeasurementScheme, MixtureDistribution,
    WorkDecomposition,
};

/// Which basis the state was split in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRoute {
    /// Initial energy basis, original POVM.
    Initial,
    /// Final energy basis, POVM conjugated by the propagator.
    Evolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dim: usize,
    pub scheme: MeasurementScheme,
    pub route: SplitRoute,
    pub quadrature_tol: f64,
    pub populations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Predictability of energy levels.
    pub d_w: f64,
    /// Effectiveness of coherence.
    pub v_w: f64,
    /// L1 coherence `sum_{n != m} |rho_mn|` in the split basis.
    pub c: f64,
    /// Trace norm of the off-diagonal part of the state.
    pub c_trace_norm: f64,
    /// Coherence surviving the first measurement.
    pub c_tilde: f64,
    /// Predictability of the state itself (`|rho_11 - rho_22|` for two levels).
    pub d_state: f64,
    /// `c / (d - 1)`.
    pub v_state: f64,
    pub survived_coherence_factor: f64,
    /// `1 - d_w^2 - v_w^2`
    pub bound_residual: f64,
    /// `sqrt(2) - d_w - v_w`
    pub sum_residual: f64,
    pub provenance: Provenance,
}

/// A duality inequality that failed, with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub violations: Vec<String>,
    pub report: DualityReport,
}

impl fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (d_w = {:.12}, v_w = {:.12}, c = {:.12}, scheme = {:?}, route = {:?}, populations = {:?})",
            self.violations.join("; "),
            self.report.d_w,
            self.report.v_w,
            self.report.c,
            self.report.provenance.scheme,
            self.report.provenance.route,
            self.report.provenance.populations,
        )
    }
}

fn check_populations(decomp: &WorkDecomposition, rho_diag: &[f64]) -> Result<()> {
    if rho_diag.len() != decomp.dim() {
        return Err(Error::DimensionMismatch {
            expected: decomp.dim(),
            found: rho_diag.len(),
        });
    }
    let sum: f64 = rho_diag.iter().sum();
    if (sum - 1.0).abs() > tolerance::DENSITY {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

fn weighted_level(decomp: &WorkDecomposition, rho_diag: &[f64], i: usize) -> MixtureDistribution {
    decomp.per_level[i].scaled(C64::new(rho_diag[i], 0.0), decomp.per_level[i].label)
}

/// `D_W = 1/(2(d-1)) sum_{m,n} int |rho_mm P_m(W) - rho_nn P_n(W)| dW`.
///
/// The sum runs over ordered pairs; `(m, n)` and `(n, m)` give the same
/// integral so each unordered pair is integrated once.
pub fn predictability(decomp: &WorkDecomposition, rho_diag: &[f64], tol: f64) -> Result<f64> {
    check_populations(decomp, rho_diag)?;
    let d = decomp.dim();
    if d < 2 {
        return Err(Error::invalid("dim", "need at least two levels"));
    }
    let weighted: Vec<MixtureDistribution> = (0..d).map(|i| weighted_level(decomp, rho_diag, i)).collect();
    let pairs = d * (d - 1) / 2;
    let pair_tol = tol / pairs as f64;
    let mut acc = 0.0;
    for m in 0..d {
        for n in (m + 1)..d {
            let diff = MixtureDistribution::difference(&weighted[m], &weighted[n]);
            acc += 2.0 * diff.integrate_abs(pair_tol)?;
        }
    }
    Ok(acc / (2.0 * (d - 1) as f64))
}

/// `V_W = 1/(d-1) int |P_c(W)| dW`.
pub fn effectiveness(decomp: &WorkDecomposition, tol: f64) -> Result<f64> {
    let d = decomp.dim();
    if d < 2 {
        return Err(Error::invalid("dim", "need at least two levels"));
    }
    Ok(decomp.coherent.integrate_abs(tol)? / (d - 1) as f64)
}

/// Off-diagonal L1 norm of a matrix.
pub fn l1_coherence(state: &Operator) -> f64 {
    let d = state.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += state.get(i, j).norm();
            }
        }
    }
    acc
}

fn off_diagonal(state: &Operator) -> Operator {
    let mut out = state.clone();
    for i in 0..state.dim() {
        out.set(i, i, C64::new(0.0, 0.0));
    }
    out
}

/// Report for the state stored in the decomposition.
pub fn report_from_decomposition(decomp: &WorkDecomposition, tol: f64, route: SplitRoute) -> Result<DualityReport> {
    let d = decomp.dim();
    let state = &decomp.state;
    let pops = &decomp.populations;
    let d_w = predictability(decomp, pops, tol)?;
    let v_w = effectiveness(decomp, tol)?;
    let c = l1_coherence(state);
    let c_trace_norm = trace_norm_hermitian(&off_diagonal(state))?;
    let c_tilde: f64 = decomp
        .pair_damping
        .iter()
        .map(|p| state.get(p.n, p.m).norm() * p.factor)
        .sum();
    let mut d_state = 0.0;
    for m in 0..d {
        for n in 0..d {
            d_state += (pops[m] - pops[n]).abs();
        }
    }
    let d_state = d_state / (2.0 * (d - 1) as f64);
    let report = DualityReport {
        d_w,
        v_w,
        c,
        c_trace_norm,
        c_tilde,
        d_state,
        v_state: c / (d - 1) as f64,
        survived_coherence_factor: decomp.survived_coherence_factor,
        bound_residual: 1.0 - d_w * d_w - v_w * v_w,
        sum_residual: SQRT_2 - d_w - v_w,
        provenance: Provenance {
            dim: d,
            scheme: decomp.scheme,
            route,
            quadrature_tol: tol,
            populations: pops.clone(),
        },
    };
    check_bounds(report)
}

fn check_bounds(report: DualityReport) -> Result<DualityReport> {
    let slack = tolerance::BOUND_SLACK;
    let d = report.provenance.dim as f64;
    let mut violations = Vec::new();
    if report.d_w < -slack || report.d_w > 1.0 + slack {
        violations.push(format!("predictability {} outside [0, 1]", report.d_w));
    }
    if report.v_w > report.c / (d - 1.0) + slack {
        violations.push(format!(
            "effectiveness {} exceeds coherence bound {}",
            report.v_w,
            report.c / (d - 1.0)
        ));
    }
    if report.bound_residual < -slack {
        violations.push(format!("d_w^2 + v_w^2 = {} > 1", 1.0 - report.bound_residual));
    }
    if violations.is_empty() {
        Ok(report)
    } else {
        Err(Error::BoundViolation(Box::new(BoundViolation { violations, report })))
    }
}

/// Duality report for `rho` against its decomposition; `rho` must be the
/// state the decomposition was built from.
pub fn duality_report(decomp: &WorkDecomposition, rho: &Operator, tol: f64) -> Result<DualityReport> {
    let in_split = rho.in_basis(&decomp.split_basis);
    let mismatch = frobenius_distance(&in_split, &decomp.state)?;
    if mismatch > tolerance::DENSITY {
        return Err(Error::invalid(
            "rho",
            format!("state differs from the decomposed state by {mismatch:.3e}"),
        ));
    }
    report_from_decomposition(decomp, tol, SplitRoute::Initial)
}

/// Same quantities for the evolved state `U rho U^dag`, split in the final
/// energy basis `final_basis` and read through the POVM `U M^W U^dag`.
pub fn evolved_basis_report(
    rho: &Operator,
    u: &Operator,
    initial_basis: &EigenSystem,
    final_basis: &EigenSystem,
    scheme: MeasurementScheme,
    tol: f64,
) -> Result<DualityReport> {
    let decomp = build_evolved_work_distribution(rho, initial_basis, final_basis, u, scheme)?;
    report_from_decomposition(&decomp, tol, SplitRoute::Evolved)
}

/// One bin/pair entry of the discretised inequality chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainBin {
    pub v_k: f64,
    pub u_k_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofChainReport {
    pub delta_w: f64,
    /// Bin edges actually used.
    pub edges: Vec<f64>,
    /// Sign changes of the weighted per-level differences inside the support.
    pub crossings: Vec<f64>,
    pub bins: Vec<ChainBin>,
    pub sum_v: f64,
    pub d_w_discrete: f64,
    /// `sum_k v_k |u_k| / (d-1)`, the upper bound on the effectiveness.
    pub v_w_upper_discrete: f64,
    /// `sum_bins |int_bin P_c| / (d-1)`.
    pub v_w_discrete: f64,
    /// `1 - d_w_discrete^2 - v_w_upper_discrete^2`
    pub chain_residual: f64,
}

const CROSSING_SAMPLES_PER_WIDTH: f64 = 16.0;
const CROSSING_FLOOR: f64 = 1e-10;

/// Sign changes of `rho_mm P_m - rho_nn P_n` on `support`, for every pair.
fn crossings(weighted: &[MixtureDistribution], support: (f64, f64)) -> Result<Vec<f64>> {
    let min_width = weighted
        .iter()
        .flat_map(|p| p.components.iter().map(|c| c.width))
        .fold(f64::INFINITY, f64::min);
    if !min_width.is_finite() {
        return Ok(Vec::new());
    }
    let n = (((support.1 - support.0) / min_width) * CROSSING_SAMPLES_PER_WIDTH).ceil() as usize;
    let n = n.clamp(16, 1 << 22);
    let h = (support.1 - support.0) / n as f64;
    let mut roots = Vec::new();
    let d = weighted.len();
    for m in 0..d {
        for k in (m + 1)..d {
            let g = |w: f64| -> Result<f64> { Ok(weighted[m].evaluate(w)? - weighted[k].evaluate(w)?) };
            let xs: Vec<f64> = (0..=n)
                .map(|i| if i == n { support.1 } else { support.0 + i as f64 * h })
                .collect();
            let mut scale = Vec::with_capacity(n + 1);
            let mut gs = Vec::with_capacity(n + 1);
            for &x in &xs {
                let (a, b) = (weighted[m].evaluate(x)?, weighted[k].evaluate(x)?);
                scale.push(a.abs() + b.abs());
                gs.push(a - b);
            }
            // sign flips of tail roundoff are not crossings
            let floor = CROSSING_FLOOR * scale.iter().cloned().fold(0.0, f64::max);
            for i in 1..=n {
                let (x0, x1, g0, g1) = (xs[i - 1], xs[i], gs[i - 1], gs[i]);
                if scale[i - 1].max(scale[i]) <= floor {
                    continue;
                }
                if g0 == 0.0 && i > 1 {
                    roots.push(x0);
                } else if g0 * g1 < 0.0 {
                    let (mut lo, mut hi, glo) = (x0, x1, g0);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if g(mid)? * glo > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    roots.push(0.5 * (lo + hi));
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots)
}

/// Bins of width at most `delta_w`, with one bin of width `delta_w`
/// centred on every crossing.
///
/// Only bins straddling a crossing lose mass when `|int g|` replaces
/// `int |g|`; centring them makes that loss `|g'| delta_w^2 / 4` per
/// crossing, so the binned predictability converges at second order with
/// a fixed constant.
fn chain_edges(support: (f64, f64), crossings: &[f64], delta_w: f64) -> Vec<f64> {
    let mut anchors = vec![support.0, support.1];
    for &r in crossings {
        anchors.push((r - 0.5 * delta_w).max(support.0));
        anchors.push((r + 0.5 * delta_w).min(support.1));
    }
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();
    let mut edges = vec![anchors[0]];
    for pair in anchors.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pieces = ((b - a) / delta_w * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for j in 1..pieces {
            edges.push(a + (b - a) * j as f64 / pieces as f64);
        }
        edges.push(b);
    }
    edges
}

/// Discretises `W` over `support` into bins of width at most `delta_w`
/// and checks every link of the chain
/// `D_W = sum_k v_k sqrt(1 - |u_k|^2) / (d-1)`,
/// `V_W <= sum_k v_k |u_k| / (d-1)`,
/// `D_W^2 + V_W^2 <= (sum_k v_k)^2 / (d-1)^2 = 1`.
///
/// `k` runs over bins and ordered level pairs; `v_k = (a + b) / 2` and
/// `|u_k| = sqrt(ab) / v_k` with `a`, `b` the exact weighted bin masses of
/// the two levels. `sum_k v_k` equals `d - 1` up to the mass outside
/// `support`. Gaussian schemes only.
pub fn proof_chain_check(
    decomp: &WorkDecomposition,
    rho_diag: &[f64],
    delta_w: f64,
    support: (f64, f64),
) -> Result<ProofChainReport> {
    check_populations(decomp, rho_diag)?;
    if !(delta_w > 0.0) {
        return Err(Error::invalid("delta_w", "must be > 0"));
    }
    if !(support.0 < support.1) || !support.0.is_finite() || !support.1.is_finite() {
        return Err(Error::invalid("support", "empty or unbounded interval"));
    }
    if decomp.scheme.sigma() == 0.0 || decomp.full.has_deltas() {
        return Err(Error::invalid("scheme", "the discretised chain needs a Gaussian scheme"));
    }
    let d = decomp.dim();
    let norm = (d - 1) as f64;
    let weighted: Vec<MixtureDistribution> = (0..d).map(|i| weighted_level(decomp, rho_diag, i)).collect();
    let crossings = crossings(&weighted, support)?;
    let edges = chain_edges(support, &crossings, delta_w);
    let mut bins = Vec::with_capacity((edges.len() - 1) * d * (d - 1));
    let (mut sum_v, mut d_acc, mut v_upper, mut v_acc) = (0.0, 0.0, 0.0, 0.0);
    let slack = tolerance::BOUND_SLACK;
    for (i, e) in edges.windows(2).enumerate() {
        let masses: Vec<f64> = weighted.iter().map(|p| p.mass_between(e[0], e[1]).max(0.0)).collect();
        for m in 0..d {
            for n in 0..d {
                if m == n {
                    continue;
                }
                let (a, b) = (masses[m], masses[n]);
                let v = 0.5 * (a + b);
                let u = if v > 0.0 { ((a * b).sqrt() / v).min(1.0) } else { 0.0 };
                if !(v >= 0.0) || !(u <= 1.0) {
                    return Err(Error::invalid("chain", format!("bin {i}: v = {v}, |u| = {u}")));
                }
                sum_v += v;
                d_acc += 0.5 * (a - b).abs();
                v_upper += v * u;
                bins.push(ChainBin { v_k: v, u_k_abs: u });
            }
        }
        v_acc += decomp.coherent.mass_between(e[0], e[1]).abs();
    }
    if sum_v > norm + slack {
        return Err(Error::invalid("chain", format!("sum of v_k = {sum_v} exceeds {norm}")));
    }
    if norm - sum_v > 1e-3 {
        return Err(Error::Resolution {
            reason: format!("sum of v_k = {sum_v}, expected {norm} (support too narrow)"),
        });
    }
    let d_w_discrete = d_acc / norm;
    let v_w_upper_discrete = v_upper / norm;
    let v_w_discrete = v_acc / norm;
    if v_w_discrete > v_w_upper_discrete + slack {
        return Err(Error::invalid(
            "chain",
            format!("discrete effectiveness {v_w_discrete} exceeds its bound {v_w_upper_discrete}"),
        ));
    }
    let chain_residual = 1.0 - d_w_discrete * d_w_discrete - v_w_upper_discrete * v_w_upper_discrete;
    if chain_residual < -slack {
        return Err(Error::invalid("chain", format!("chain residual {chain_residual} < 0")));
    }
    Ok(ProofChainReport {
        delta_w,
        edges,
        crossings,
        bins,
        sum_v,
        d_w_discrete,
        v_w_upper_discrete,
        v_w_discrete,
        chain_residual,
    })
}

/// Bin width in the asymptotic regime: a quarter of the smaller of the
/// component width and the closest spacing between crossings.
pub fn chain_step(decomp: &WorkDecomposition, rho_diag: &[f64], support: (f64, f64)) -> Result<f64> {
    check_populations(decomp, rho_diag)?;
    let weighted: Vec<MixtureDistribution> = (0..decomp.dim()).map(|i| weighted_level(decomp, rho_diag, i)).collect();
    let roots = crossings(&weighted, support)?;
    let mut h = decomp.scheme.component_width();
    for w in roots.windows(2) {
        h = h.min(w[1] - w[0]);
    }
    if !(h > 0.0) {
        return Err(Error::invalid("scheme", "the discretised chain needs a Gaussian scheme"));
    }
    Ok(0.25 * h)
}

/// Discrete predictability at `delta_w`, `delta_w / 2`, `delta_w / 4`
/// against the adaptive-quadrature value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConvergence {
    pub d_w: f64,
    /// Number of crossings; with none the binned value is exact.
    pub crossings: usize,
    pub delta_w: [f64; 3],
    pub d_w_discrete: [f64; 3],
    pub errors: [f64; 3],
    /// `errors[k] / errors[k + 1]`; close to 4 for a second-order rule.
    pub ratios: [f64; 2],
}

pub fn proof_chain_convergence(
    decomp: &WorkDecomposition,
    rho_diag: &[f64],
    delta_w: f64,
    support: (f64, f64),
    tol: f64,
) -> Result<ChainConvergence> {
    let d_w = predictability(decomp, rho_diag, tol)?;
    let steps = [delta_w, delta_w / 2.0, delta_w / 4.0];
    let mut discrete = [0.0; 3];
    let mut crossings = 0;
    for (slot, &h) in discrete.iter_mut().zip(&steps) {
        let r = proof_chain_check(decomp, rho_diag, h, support)?;
        crossings = r.crossings.len();
        *slot = r.d_w_discrete;
    }
    let errors = discrete.map(|x| (x - d_w).abs());
    Ok(ChainConvergence {
        d_w,
        crossings,
        delta_w: steps,
        d_w_discrete: discrete,
        errors,
        ratios: [errors[0] / errors[1], errors[1] / errors[2]],
    })
}

/// Support window of a decomposition: every mean `+-` ten widths.
pub fn support_of(decomp: &WorkDecomposition) -> Option<(f64, f64)> {
    decomp.full.support_window()
}

/// Candidate readings of the unsubscripted final energy in the closed-form
/// effectiveness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalEnergyReading {
    /// Upper final level `eps_2^t`.
    UpperLevel,
    /// Half the final gap `(eps_2^t - eps_1^t) / 2`.
    HalfGap,
    /// The full final gap `eps_2^t - eps_1^t`.
    FullGap,
}

impl FinalEnergyReading {
    pub const ALL: [FinalEnergyReading; 3] = [
        FinalEnergyReading::UpperLevel,
        FinalEnergyReading::HalfGap,
        FinalEnergyReading::FullGap,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingResolution {
    pub chosen: FinalEnergyReading,
    /// Largest deviation from the definition-level effectiveness for each
    /// candidate, over the sigma grid.
    pub deviations: Vec<(FinalEnergyReading, f64)>,
}

/// Closed forms for the driven two-level system with initial state
/// `cos(theta)|1> + sin(theta)|2>`.
#[derive(Debug, Clone)]
pub struct TwoLevelClosedForm {
    pub model: DrivenTwoLevel,
    pub process: DrivenProcess,
}

impl TwoLevelClosedForm {
    pub fn new(model: DrivenTwoLevel, t: f64, propagator_tol: f64) -> Result<Self> {
        let process = DrivenProcess::new(&model, t, propagator_tol)?;
        Ok(TwoLevelClosedForm { model, process })
    }

    /// `<eps_m^t| U |k>` with closed-form final eigenvectors and the lab basis.
    fn amplitude(&self, m: usize, k: usize) -> C64 {
        let et = self.model.transient_eigensystem(self.process.duration);
        let u = self.process.unitary();
        et.vector(m)
            .iter()
            .enumerate()
            .map(|(i, z)| z.conj() * u.get(i, k))
            .sum()
    }

    fn check_sigma(sigma: f64) -> Result<()> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("sigma", format!("closed forms need sigma > 0, got {sigma}")))
        }
    }

    /// Four-Gaussian absolute integral for the predictability.
    pub fn predictability(&self, theta: f64, sigma: f64, tol: f64) -> Result<f64> {
        Self::check_sigma(sigma)?;
        let w0 = self.model.omega0();
        let eps = self.model.transient_energy(self.process.duration);
        let levels = [-eps, eps];
        let st = SQRT_2 * sigma;
        let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
        let mut terms = Vec::with_capacity(4);
        for (m, &e) in levels.iter().enumerate() {
            terms.push((c2 * self.amplitude(m, 0).norm_sqr(), e + w0));
            terms.push((-s2 * self.amplitude(m, 1).norm_sqr(), e - w0));
        }
        let f = |w: f64| {
            terms
                .iter()
                .map(|&(a, mu)| a * normal_pdf(w, mu, st))
                .sum::<f64>()
                .abs()
        };
        let mut breakpoints: Vec<f64> = terms
            .iter()
            .flat_map(|&(_, mu)| (-10..=10).map(move |k| mu + k as f64 * st))
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(piecewise_adaptive_simpson(&f, &breakpoints, tol))
    }

    /// Survived coherence `|sin 2 theta| exp(-omega0^2 / sigma_tilde^2)`.
    pub fn survived_coherence(&self, theta: f64, sigma: f64) -> f64 {
        let st2 = 2.0 * sigma * sigma;
        (2.0 * theta).sin().abs() * (-self.model.omega0().powi(2) / st2).exp()
    }

    pub fn final_energy(&self, reading: FinalEnergyReading) -> f64 {
        let eps = self.model.transient_energy(self.process.duration);
        match reading {
            FinalEnergyReading::UpperLevel => eps,
            FinalEnergyReading::HalfGap => 0.5 * (eps - (-eps)),
            FinalEnergyReading::FullGap => eps - (-eps),
        }
    }

    /// `2 C~ |Re[<eps_1|U|1><2|U^dag|eps_1>]| erf(eps / (2 sigma))`.
    pub fn effectiveness(&self, theta: f64, sigma: f64, reading: FinalEnergyReading) -> Result<f64> {
        Self::check_sigma(sigma)?;
        let overlap = self.amplitude(0, 0) * self.amplitude(0, 1).conj();
        let eps = self.final_energy(reading);
        Ok(2.0 * self.survived_coherence(theta, sigma) * overlap.re.abs() * libm::erf(eps / (2.0 * sigma)))
    }

    pub fn decompose(&self, theta: f64, scheme: MeasurementScheme) -> Result<WorkDecomposition> {
        self.process.decompose(&two_level_state(theta), scheme)
    }

    /// Picks the first reading that reproduces the definition-level
    /// effectiveness to `accept` over `sigmas`.
    pub fn resolve_final_energy(&self, theta: f64, sigmas: &[f64], tol: f64, accept: f64) -> Result<ReadingResolution> {
        let reference: Vec<f64> = sigmas
            .iter()
            .map(|&s| effectiveness(&self.decompose(theta, MeasurementScheme::gaussian(s)?)?, tol))
            .collect::<Result<_>>()?;
        let mut deviations = Vec::new();
        for reading in FinalEnergyReading::ALL {
            let mut worst: f64 = 0.0;
            for (&s, &v) in sigmas.iter().zip(&reference) {
                worst = worst.max((self.effectiveness(theta, s, reading)? - v).abs());
            }
            deviations.push((reading, worst));
        }
        let chosen = deviations
            .iter()
            .find(|(_, dev)| *dev < accept)
            .map(|(r, _)| *r)
            .ok_or_else(|| Error::Resolution {
                reason: format!("no reading of the final energy matches: {deviations:?}"),
            })?;
        Ok(ReadingResolution { chosen, deviations })
    }
}

/// Closed-form predictability for one `(theta, sigma)`; propagates the
/// schedule on every call, prefer [`TwoLevelClosedForm`] for sweeps.
pub fn closed_form_predictability_2level(
    theta: f64,
    model: DrivenTwoLevel,
    t: f64,
    sigma: f64,
    tol: f64,
) -> Result<f64> {
    TwoLevelClosedForm::new(model, t, tolerance::PROPAGATOR)?.predictability(theta, sigma, tol)
}

/// Closed-form effectiveness for one `(theta, sigma)` with the upper final
/// level as the erf argument.
pub fn closed_form_effectiveness_2level(theta: f64, model: DrivenTwoLevel, t: f64, sigma: f64) -> Result<f64> {
    TwoLevelClosedForm::new(model, t, tolerance::PROPAGATOR)?.effectiveness(
        theta,
        sigma,
        FinalEnergyReading::UpperLevel,
    )
}

/// `n` logarithmically spaced points on `[lo, hi]`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Default sigma sweep: 60 log-spaced points on `[1e-3, 1e2]`.
pub fn default_sigma_grid() -> Vec<f64> {
    log_spaced(1e-3, 1e2, 60)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub theta: f64,
    pub sigma: f64,
    pub d_w: f64,
    pub v_w: f64,
    pub c: f64,
    pub c_tilde: f64,
    pub d_state: f64,
    pub v_state: f64,
    pub bound_residual: f64,
    pub sum_residual: f64,
}

impl ScanRow {
    pub fn dw2_plus_vw2(&self) -> f64 {
        self.d_w * self.d_w + self.v_w * self.v_w
    }

    pub fn dw_plus_vw(&self) -> f64 {
        self.d_w + self.v_w
    }

    fn from_report(theta: f64, sigma: f64, r: &DualityReport) -> Self {
        ScanRow {
            theta,
            sigma,
            d_w: r.d_w,
            v_w: r.v_w,
            c: r.c,
            c_tilde: r.c_tilde,
            d_state: r.d_state,
            v_state: r.v_state,
            bound_residual: r.bound_residual,
            sum_residual: r.sum_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    /// Rows in grid order: theta-major, sigma-minor.
    pub rows: Vec<ScanRow>,
    /// Index into `rows` of the largest `d_w + v_w`.
    pub argmax: usize,
}

impl ScanTable {
    pub fn best(&self) -> &ScanRow {
        &self.rows[self.argmax]
    }

    /// `max_sigma (d_w + v_w)` for each theta, in grid order.
    pub fn max_sum_per_theta(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some((theta, best)) if *theta == row.theta => *best = best.max(row.dw_plus_vw()),
                _ => out.push((row.theta, row.dw_plus_vw())),
            }
        }
        out
    }
}

/// One duality report per `(theta, sigma)`. A zero sigma denotes the
/// projective scheme. Rows are computed in parallel and returned in grid
/// order.
pub fn min_uncertainty_scan(
    closed: &TwoLevelClosedForm,
    theta_grid: &[f64],
    sigma_grid: &[f64],
    tol: f64,
) -> Result<ScanTable> {
    if theta_grid.is_empty() || sigma_grid.is_empty() {
        return Err(Error::invalid("grid", "theta and sigma grids must be nonempty"));
    }
    let points: Vec<(f64, f64)> = theta_grid
        .iter()
        .flat_map(|&th| sigma_grid.iter().map(move |&s| (th, s)))
        .collect();
    let rows: Vec<ScanRow> = points
        .par_iter()
        .map(|&(theta, sigma)| {
            let scheme = if sigma == 0.0 {
                MeasurementScheme::Projective
            } else {
                MeasurementScheme::gaussian(sigma)?
            };
            let decomp = closed.decompose(theta, scheme)?;
            let report = report_from_decomposition(&decomp, tol, SplitRoute::Initial)?;
            Ok(ScanRow::from_report(theta, sigma, &report))
        })
        .collect::<Result<_>>()?;
    let argmax = rows
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.dw_plus_vw() > rows[best].dw_plus_vw() { i } else { best });
    Ok(ScanTable { rows, argmax })
}
