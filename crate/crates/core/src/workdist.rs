//! Work distributions as finite mixtures of Gaussians and Dirac deltas.
//!
//! A two-point energy measurement turns a (state, process) pair into a work
//! density `P(W) = Tr[M^W rho]`. For projective measurements `M^W` is a sum
//! of deltas; for Gaussian-smeared measurements every pair of initial
//! eigen-indices `(n, n')` and final index `m` contributes a Gaussian in `W`
//! centred at `E^t_m - (E^0_n + E^0_n') / 2` with width `sqrt(2) sigma`.
//! Splitting the initial state into populations and coherences in a chosen
//! basis splits the density accordingly, so the whole analysis stays
//! analytic up to the absolute-value integrals.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EigenSystem, Operator, C64, ZERO};
use crate::quadrature::piecewise_adaptive_simpson;
use crate::tolerance;

/// Number of component widths the support window extends on each side.
pub const SUPPORT_WIDTHS: f64 = 10.0;

/// Energy measurement used at both ends of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementScheme {
    Projective,
    Gaussian { sigma: f64 },
}

impl MeasurementScheme {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let scheme = MeasurementScheme::Gaussian { sigma };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MeasurementScheme::Projective => Ok(()),
            MeasurementScheme::Gaussian { sigma } if sigma.is_finite() && sigma > 0.0 => Ok(()),
            MeasurementScheme::Gaussian { sigma } => Err(Error::invalid(
                "sigma",
                format!("Gaussian measurement error must be finite and > 0, got {sigma}"),
            )),
        }
    }

    /// Measurement error `sigma` (zero for projective).
    pub fn sigma(&self) -> f64 {
        match *self {
            MeasurementScheme::Projective => 0.0,
            MeasurementScheme::Gaussian { sigma } => sigma,
        }
    }

    /// Width of each work component, `sqrt(2) sigma`.
    pub fn component_width(&self) -> f64 {
        SQRT_2 * self.sigma()
    }

    /// Coherence surviving the first measurement between two initial levels:
    /// `exp(-(E_n - E_n')^2 / (8 sigma^2))`. The projective value is the
    /// `sigma -> 0` limit.
    pub fn damping(&self, e_n: f64, e_np: f64) -> f64 {
        let gap = e_n - e_np;
        match *self {
            MeasurementScheme::Projective => {
                if gap == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            MeasurementScheme::Gaussian { sigma } => (-gap * gap / (8.0 * sigma * sigma)).exp(),
        }
    }
}

/// One term `weight * N(W | mean, width)`; `width == 0` is a delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ComponentRecord", into = "ComponentRecord")]
pub struct MixtureComponent {
    pub weight: C64,
    pub mean: f64,
    pub width: f64,
}

#[derive(Serialize, Deserialize)]
struct ComponentRecord {
    re_weight: f64,
    im_weight: f64,
    mean: f64,
    width: f64,
}

impl From<ComponentRecord> for MixtureComponent {
    fn from(r: ComponentRecord) -> Self {
        MixtureComponent {
            weight: C64::new(r.re_weight, r.im_weight),
            mean: r.mean,
            width: r.width,
        }
    }
}

impl From<MixtureComponent> for ComponentRecord {
    fn from(c: MixtureComponent) -> Self {
        ComponentRecord {
            re_weight: c.weight.re,
            im_weight: c.weight.im,
            mean: c.mean,
            width: c.width,
        }
    }
}

impl MixtureComponent {
    pub fn new(weight: C64, mean: f64, width: f64) -> Self {
        debug_assert!(width >= 0.0);
        MixtureComponent { weight, mean, width }
    }

    pub fn real(weight: f64, mean: f64, width: f64) -> Self {
        MixtureComponent::new(C64::new(weight, 0.0), mean, width)
    }

    pub fn is_delta(&self) -> bool {
        self.width == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionLabel {
    Full,
    Incoherent,
    Coherent,
    PerLevel(usize),
    Difference,
}

/// Finite signed mixture of Gaussians and deltas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDistribution {
    pub label: DistributionLabel,
    pub components: Vec<MixtureComponent>,
}

pub fn normal_pdf(x: f64, mean: f64, width: f64) -> f64 {
    let z = (x - mean) / width;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * width)
}

pub fn normal_cdf(x: f64, mean: f64, width: f64) -> f64 {
    0.5 * libm::erfc(-(x - mean) / (width * SQRT_2))
}

impl MixtureDistribution {
    pub fn empty(label: DistributionLabel) -> Self {
        MixtureDistribution {
            label,
            components: Vec::new(),
        }
    }

    pub fn from_components(label: DistributionLabel, components: Vec<MixtureComponent>) -> Self {
        MixtureDistribution { label, components }
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn has_deltas(&self) -> bool {
        self.components.iter().any(|c| c.is_delta())
    }

    /// Sum of component weights; the total probability mass.
    pub fn total_weight(&self) -> C64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn scaled(&self, factor: C64, label: DistributionLabel) -> Self {
        MixtureDistribution {
            label,
            components: self
                .components
                .iter()
                .map(|c| MixtureComponent::new(c.weight * factor, c.mean, c.width))
                .collect(),
        }
    }

    /// Combines components sharing the same mean and width and drops exact
    /// zeros. Output order is deterministic (sorted by width, then mean).
    pub fn merged(&self) -> Self {
        let mut acc: BTreeMap<(u64, u64), (f64, f64, C64)> = BTreeMap::new();
        for c in &self.components {
            // normalise -0.0 so it shares a key with +0.0
            let mean = if c.mean == 0.0 { 0.0 } else { c.mean };
            let key = (c.width.to_bits(), ordered_bits(mean));
            acc.entry(key).or_insert((c.width, mean, ZERO)).2 += c.weight;
        }
        MixtureDistribution {
            label: self.label,
            components: acc
                .into_values()
                .filter(|(_, _, w)| *w != ZERO)
                .map(|(width, mean, weight)| MixtureComponent::new(weight, mean, width))
                .collect(),
        }
    }

    /// `a - b` component-wise.
    pub fn difference(a: &Self, b: &Self) -> Self {
        let mut components = a.components.clone();
        components.extend(
            b.components
                .iter()
                .map(|c| MixtureComponent::new(-c.weight, c.mean, c.width)),
        );
        MixtureDistribution {
            label: DistributionLabel::Difference,
            components,
        }
        .merged()
    }

    /// `a + b` component-wise.
    pub fn sum(a: &Self, b: &Self, label: DistributionLabel) -> Self {
        let mut components = a.components.clone();
        components.extend_from_slice(&b.components);
        MixtureDistribution { label, components }.merged()
    }

    /// Pointwise density. Fails on delta components; use
    /// [`evaluate_with_bandwidth`](Self::evaluate_with_bandwidth) for those.
    pub fn evaluate(&self, w: f64) -> Result<f64> {
        if let Some(c) = self.components.iter().find(|c| c.is_delta()) {
            return Err(Error::DeltaEvaluation { mean: c.mean });
        }
        self.evaluate_inner(w, 0.0)
    }

    /// Pointwise density with every delta broadened into a Gaussian of width
    /// `bandwidth`.
    pub fn evaluate_with_bandwidth(&self, w: f64, bandwidth: f64) -> Result<f64> {
        if !(bandwidth > 0.0) {
            return Err(Error::invalid("bandwidth", "must be > 0"));
        }
        self.evaluate_inner(w, bandwidth)
    }

    fn evaluate_inner(&self, w: f64, bandwidth: f64) -> Result<f64> {
        let mut acc = ZERO;
        for c in &self.components {
            let width = if c.is_delta() { bandwidth } else { c.width };
            acc += c.weight * normal_pdf(w, c.mean, width);
        }
        if acc.im.abs() > tolerance::IMAGINARY_RESIDUAL {
            return Err(Error::ImaginaryResidual {
                residual: acc.im.abs(),
            });
        }
        Ok(acc.re)
    }

    fn density_re(&self, w: f64) -> f64 {
        self.components
            .iter()
            .filter(|c| !c.is_delta())
            .map(|c| c.weight.re * normal_pdf(w, c.mean, c.width))
            .sum()
    }

    /// Cumulative distribution `int_{-inf}^{w} P(W) dW` (deltas included
    /// as unit steps, right-continuous).
    pub fn cdf(&self, w: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let step = if c.is_delta() {
                    if w >= c.mean {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    normal_cdf(w, c.mean, c.width)
                };
                c.weight.re * step
            })
            .sum()
    }

    /// Real part of the mass on `[a, b]`, evaluated per component on the
    /// tail that avoids cancellation.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let m = if c.is_delta() {
                    if a <= c.mean && c.mean < b {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    let s = SQRT_2 * c.width;
                    if a >= c.mean {
                        0.5 * (libm::erfc((a - c.mean) / s) - libm::erfc((b - c.mean) / s))
                    } else if b <= c.mean {
                        0.5 * (libm::erfc((c.mean - b) / s) - libm::erfc((c.mean - a) / s))
                    } else {
                        0.5 * (libm::erf((b - c.mean) / s) - libm::erf((a - c.mean) / s))
                    }
                };
                c.weight.re * m
            })
            .sum()
    }

    /// Smallest interval holding every mean `+-` the support margin.
    pub fn support_window(&self) -> Option<(f64, f64)> {
        let max_width = self.components.iter().map(|c| c.width).fold(0.0, f64::max);
        let lo = self.components.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
        let hi = self.components.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            Some((lo - SUPPORT_WIDTHS * max_width, hi + SUPPORT_WIDTHS * max_width))
        } else {
            None
        }
    }

    /// `int |P(W)| dW`.
    ///
    /// Deltas sharing a location are summed first and contribute the modulus
    /// of their combined weight exactly. The Gaussian part is integrated by
    /// adaptive Simpson on panels one component-width wide around every mean.
    pub fn integrate_abs(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
        }
        let merged = self.merged();
        let mut deltas: BTreeMap<u64, C64> = BTreeMap::new();
        let mut gaussians = Vec::new();
        for c in &merged.components {
            if c.is_delta() {
                *deltas.entry(ordered_bits(c.mean)).or_insert(ZERO) += c.weight;
            } else {
                gaussians.push(*c);
            }
        }
        let delta_part: f64 = deltas.values().map(|w| w.re.abs()).sum();
        if gaussians.is_empty() {
            return Ok(delta_part);
        }
        let mut breakpoints: Vec<f64> = Vec::with_capacity(gaussians.len() * 21);
        let reach = SUPPORT_WIDTHS as i32;
        for c in &gaussians {
            for k in -reach..=reach {
                breakpoints.push(c.mean + k as f64 * c.width);
            }
        }
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let density = MixtureDistribution::from_components(self.label, gaussians);
        let f = |w: f64| density.density_re(w).abs();
        Ok(delta_part + piecewise_adaptive_simpson(&f, &breakpoints, tol))
    }
}

/// Monotone map from f64 to u64 so that BTreeMap keys sort numerically.
fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// `1/2 int |a(W) - b(W)| dW`
pub fn trace_distance(a: &MixtureDistribution, b: &MixtureDistribution, tol: f64) -> Result<f64> {
    Ok(0.5 * MixtureDistribution::difference(a, b).integrate_abs(tol)?)
}

/// Coherence retained by the first measurement between two initial levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDamping {
    pub n: usize,
    pub m: usize,
    pub factor: f64,
}

/// Full work density split into its population and coherence parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkDecomposition {
    pub full: MixtureDistribution,
    pub incoherent: MixtureDistribution,
    pub coherent: MixtureDistribution,
    /// Work density conditioned on each basis level of the split.
    pub per_level: Vec<MixtureDistribution>,
    /// Diagonal of the state in the split basis.
    pub populations: Vec<f64>,
    /// State expressed in the split basis.
    pub state: Operator,
    /// Basis in which the state was split into populations and coherences.
    pub split_basis: EigenSystem,
    pub scheme: MeasurementScheme,
    /// Coherence-weighted mean of the pair damping factors; for two levels
    /// this is `exp(-omega0^2 / sigma_tilde^2)`. Equals 1 when the state has
    /// no coherence to damp.
    pub survived_coherence_factor: f64,
    pub pair_damping: Vec<PairDamping>,
}

impl WorkDecomposition {
    pub fn dim(&self) -> usize {
        self.per_level.len()
    }
}

/// Rank-one piece `coeff |a><b| N(W | mean, width)` of the work POVM, with
/// `a`, `b` given as coordinates in the split basis.
#[derive(Debug, Clone)]
struct PovmTerm {
    coeff: C64,
    left: Vec<C64>,
    right: Vec<C64>,
    mean: f64,
    width: f64,
}

fn unit(dim: usize, n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[n] = C64::new(1.0, 0.0);
    v
}

/// Transition amplitudes `A[m][n] = <E^t_m| U |E^0_n>`.
fn transition_amplitudes(e0: &EigenSystem, et: &EigenSystem, u: &Operator) -> Vec<Vec<C64>> {
    let d = e0.dim();
    (0..d)
        .map(|m| (0..d).map(|n| u.matrix_element(et.vector(m), e0.vector(n))).collect())
        .collect()
}

/// Work POVM expanded over eigen-indices, expressed in the initial energy
/// basis.
fn povm_terms(
    e0: &EigenSystem,
    et: &EigenSystem,
    amps: &[Vec<C64>],
    scheme: MeasurementScheme,
) -> Vec<PovmTerm> {
    let d = e0.dim();
    let mut terms = Vec::new();
    match scheme {
        MeasurementScheme::Projective => {
            for n in 0..d {
                for (m, row) in amps.iter().enumerate() {
                    terms.push(PovmTerm {
                        coeff: C64::new(row[n].norm_sqr(), 0.0),
                        left: unit(d, n),
                        right: unit(d, n),
                        mean: et.value(m) - e0.value(n),
                        width: 0.0,
                    });
                }
            }
        }
        MeasurementScheme::Gaussian { .. } => {
            let width = scheme.component_width();
            for n in 0..d {
                for np in 0..d {
                    let damp = scheme.damping(e0.value(n), e0.value(np));
                    let centre = 0.5 * (e0.value(n) + e0.value(np));
                    for (m, row) in amps.iter().enumerate() {
                        terms.push(PovmTerm {
                            coeff: row[n].conj() * row[np] * damp,
                            left: unit(d, n),
                            right: unit(d, np),
                            mean: et.value(m) - centre,
                            width,
                        });
                    }
                }
            }
        }
    }
    terms
}

fn check_inputs(rho: &Operator, e0: &EigenSystem, et: &EigenSystem, u: &Operator, scheme: MeasurementScheme) -> Result<()> {
    scheme.validate()?;
    let d = rho.dim();
    for found in [e0.dim(), et.dim(), u.dim()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    rho.check_density(tolerance::DENSITY)?;
    let residual = u.unitarity_defect();
    if residual > tolerance::UNITARITY {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

fn decompose(terms: &[PovmTerm], state: Operator, split_basis: EigenSystem, scheme: MeasurementScheme, damping: Vec<PairDamping>) -> WorkDecomposition {
    let d = state.dim();
    let populations: Vec<f64> = (0..d).map(|i| state.get(i, i).re).collect();

    let mut per_level: Vec<Vec<MixtureComponent>> = vec![Vec::new(); d];
    let mut coherent = Vec::new();
    for term in terms {
        for (i, level) in per_level.iter_mut().enumerate() {
            let w = term.coeff * term.left[i] * term.right[i].conj();
            if w != ZERO {
                level.push(MixtureComponent::new(w, term.mean, term.width));
            }
        }
        // Tr[K rho_c] = sum_{i != j} rho_ij <j|K|i>
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let rho_ij = state.get(i, j);
                if rho_ij == ZERO {
                    continue;
                }
                let w = rho_ij * term.coeff * term.left[j] * term.right[i].conj();
                if w != ZERO {
                    coherent.push(MixtureComponent::new(w, term.mean, term.width));
                }
            }
        }
    }
    let per_level: Vec<MixtureDistribution> = per_level
        .into_iter()
        .enumerate()
        .map(|(i, c)| MixtureDistribution::from_components(DistributionLabel::PerLevel(i), c).merged())
        .collect();
    let mut incoherent = Vec::new();
    for (level, &p) in per_level.iter().zip(&populations) {
        if p != 0.0 {
            incoherent.extend(level.components.iter().map(|c| MixtureComponent::new(c.weight * p, c.mean, c.width)));
        }
    }
    let incoherent = MixtureDistribution::from_components(DistributionLabel::Incoherent, incoherent).merged();
    let coherent = MixtureDistribution::from_components(DistributionLabel::Coherent, coherent).merged();
    let full = MixtureDistribution::sum(&incoherent, &coherent, DistributionLabel::Full);

    let mut weighted = 0.0;
    let mut total = 0.0;
    for pd in &damping {
        let c = state.get(pd.n, pd.m).norm();
        weighted += c * pd.factor;
        total += c;
    }
    let survived_coherence_factor = if total > 0.0 {
        weighted / total
    } else if damping.is_empty() {
        1.0
    } else {
        damping.iter().map(|p| p.factor).sum::<f64>() / damping.len() as f64
    };

    WorkDecomposition {
        full,
        incoherent,
        coherent,
        per_level,
        populations,
        state,
        split_basis,
        scheme,
        survived_coherence_factor,
        pair_damping: damping,
    }
}

fn pair_damping(e0: &EigenSystem, scheme: MeasurementScheme) -> Vec<PairDamping> {
    let d = e0.dim();
    let mut out = Vec::new();
    for n in 0..d {
        for m in 0..d {
            if n != m {
                out.push(PairDamping {
                    n,
                    m,
                    factor: scheme.damping(e0.value(n), e0.value(m)),
                });
            }
        }
    }
    out
}

/// Work distribution of `rho` driven by `u` between the eigenbases `e0`
/// (initial Hamiltonian) and `et` (final Hamiltonian), split into
/// populations and coherences of `rho` in the initial energy basis.
pub fn build_work_distribution(
    rho: &Operator,
    e0: &EigenSystem,
    et: &EigenSystem,
    u: &Operator,
    scheme: MeasurementScheme,
) -> Result<WorkDecomposition> {
    check_inputs(rho, e0, et, u, scheme)?;
    let amps = transition_amplitudes(e0, et, u);
    let terms = povm_terms(e0, et, &amps, scheme);
    let state = rho.in_basis(e0);
    Ok(decompose(&terms, state, e0.clone(), scheme, pair_damping(e0, scheme)))
}

/// Same work distribution, but read through the conjugated POVM
/// `U M^W U^dag` acting on the evolved state `U rho U^dag`, which is split
/// into populations and coherences in the final energy basis `et`.
pub fn build_evolved_work_distribution(
    rho: &Operator,
    e0: &EigenSystem,
    et: &EigenSystem,
    u: &Operator,
    scheme: MeasurementScheme,
) -> Result<WorkDecomposition> {
    check_inputs(rho, e0, et, u, scheme)?;
    let amps = transition_amplitudes(e0, et, u);
    let d = e0.dim();
    // U|E^0_n> in final-basis coordinates is column n of the amplitudes
    let columns: Vec<Vec<C64>> = (0..d).map(|n| (0..d).map(|m| amps[m][n]).collect()).collect();
    let terms: Vec<PovmTerm> = povm_terms(e0, et, &amps, scheme)
        .into_iter()
        .map(|t| {
            let left = conjugate_coords(&t.left, &columns);
            let right = conjugate_coords(&t.right, &columns);
            PovmTerm { left, right, ..t }
        })
        .collect();
    let evolved = &(u * rho) * &u.adjoint();
    let state = evolved.in_basis(et);
    // the evolved split has no first-measurement damping of its own
    let damping = pair_damping(et, scheme)
        .into_iter()
        .map(|p| PairDamping { factor: 1.0, ..p })
        .collect();
    Ok(decompose(&terms, state, et.clone(), scheme, damping))
}

/// Coordinates of `sum_n x_n U|E^0_n>` in the final basis.
fn conjugate_coords(x: &[C64], columns: &[Vec<C64>]) -> Vec<C64> {
    let d = x.len();
    let mut out = vec![ZERO; d];
    for (xn, col) in x.iter().zip(columns) {
        if *xn == ZERO {
            continue;
        }
        for (o, c) in out.iter_mut().zip(col) {
            *o += xn * c;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_reference, hermitian_eigensystem};
    use crate::model::two_level_state;
    use approx::assert_abs_diff_eq;

    fn fixed_unitary() -> Operator {
        let h = &Operator::pauli_x().scale(C64::new(0.7, 0.0))
            + &Operator::pauli_z().scale(C64::new(0.2, 0.0));
        let mut y = Operator::zeros(2);
        y.set(0, 1, C64::new(0.0, -0.3));
        y.set(1, 0, C64::new(0.0, 0.3));
        expm_reference(&(&h + &y), 1.1)
    }

    #[test]
    fn empty_mixture_is_zero() {
        let m = MixtureDistribution::empty(DistributionLabel::Coherent);
        assert_eq!(m.evaluate(0.3).unwrap(), 0.0);
        assert_eq!(m.integrate_abs(1e-9).unwrap(), 0.0);
    }

    #[test]
    fn standard_normal_peak() {
        let m = MixtureDistribution::from_components(
            DistributionLabel::Full,
            vec![MixtureComponent::real(1.0, 0.0, 1.0)],
        );
        assert_abs_diff_eq!(m.evaluate(0.0).unwrap(), 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-16);
        assert_abs_diff_eq!(m.integrate_abs(1e-10).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn deltas_need_bandwidth() {
        let m = MixtureDistribution::from_components(
            DistributionLabel::Full,
            vec![MixtureComponent::real(1.0, 0.5, 0.0)],
        );
        assert!(matches!(m.evaluate(0.5), Err(Error::DeltaEvaluation { .. })));
        let v = m.evaluate_with_bandwidth(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-16);
    }

    #[test]
    fn imaginary_residual_is_rejected() {
        let m = MixtureDistribution::from_components(
            DistributionLabel::Coherent,
            vec![MixtureComponent::new(C64::new(0.0, 0.1), 0.0, 1.0)],
        );
        assert!(matches!(m.evaluate(0.0), Err(Error::ImaginaryResidual { .. })));
    }

    #[test]
    fn separated_signed_lobes() {
        let m = MixtureDistribution::from_components(
            DistributionLabel::Coherent,
            vec![
                MixtureComponent::real(0.5, -5.0, 0.1),
                MixtureComponent::real(-0.5, 5.0, 0.1),
            ],
        );
        assert_abs_diff_eq!(m.integrate_abs(1e-10).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn overlapping_delta_and_gaussian() {
        let m = MixtureDistribution::from_components(
            DistributionLabel::Difference,
            vec![
                MixtureComponent::real(0.3, 1.0, 0.0),
                MixtureComponent::real(-0.7, 1.0, 0.2),
            ],
        );
        assert_abs_diff_eq!(m.integrate_abs(1e-10).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn trace_distance_examples() {
        let a = MixtureDistribution::from_components(
            DistributionLabel::Full,
            vec![
                MixtureComponent::real(0.4, -1.0, 0.3),
                MixtureComponent::real(0.6, 2.0, 0.1),
            ],
        );
        assert_eq!(trace_distance(&a, &a, 1e-9).unwrap(), 0.0);
        let p = MixtureDistribution::from_components(DistributionLabel::Full, vec![MixtureComponent::real(1.0, 0.0, 0.0)]);
        let q = MixtureDistribution::from_components(DistributionLabel::Full, vec![MixtureComponent::real(1.0, 1.0, 0.0)]);
        assert_eq!(trace_distance(&p, &q, 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn eigenstate_has_no_coherent_part() {
        let e0 = EigenSystem::canonical(&[-0.3, 0.3]).unwrap();
        let et = hermitian_eigensystem(&Operator::pauli_x()).unwrap();
        let u = fixed_unitary();
        for scheme in [MeasurementScheme::Projective, MeasurementScheme::Gaussian { sigma: 0.2 }] {
            let dec = build_work_distribution(&two_level_state(0.0), &e0, &et, &u, scheme).unwrap();
            assert!(dec.coherent.is_empty());
            assert_eq!(dec.full.components, dec.per_level[0].components);
        }
    }

    #[test]
    fn projective_identity_process_is_a_single_delta() {
        let e = EigenSystem::canonical(&[-0.3, 0.3]).unwrap();
        let rho = two_level_state(0.4);
        let dec = build_work_distribution(&rho, &e, &e, &Operator::identity(2), MeasurementScheme::Projective).unwrap();
        assert_eq!(dec.full.len(), 1);
        let c = dec.full.components[0];
        assert_eq!(c.mean, 0.0);
        assert!(c.is_delta());
        assert_abs_diff_eq!(c.weight.re, 1.0, epsilon = 1e-15);
        assert!(dec.coherent.is_empty());
    }

    #[test]
    fn degenerate_initial_levels_keep_all_coherence() {
        let e0 = EigenSystem::canonical(&[0.0, 0.0]).unwrap();
        let et = hermitian_eigensystem(&Operator::pauli_x()).unwrap();
        let dec = build_work_distribution(
            &two_level_state(0.5),
            &e0,
            &et,
            &fixed_unitary(),
            MeasurementScheme::Gaussian { sigma: 0.05 },
        )
        .unwrap();
        assert_eq!(dec.survived_coherence_factor, 1.0);
    }

    #[test]
    fn two_level_survived_factor() {
        let omega0 = 0.3;
        let sigma = 0.4;
        let e0 = EigenSystem::canonical(&[-omega0, omega0]).unwrap();
        let et = hermitian_eigensystem(&Operator::pauli_x()).unwrap();
        let dec = build_work_distribution(
            &two_level_state(0.5),
            &e0,
            &et,
            &fixed_unitary(),
            MeasurementScheme::Gaussian { sigma },
        )
        .unwrap();
        let st = SQRT_2 * sigma;
        assert_abs_diff_eq!(dec.survived_coherence_factor, (-omega0 * omega0 / (st * st)).exp(), epsilon = 1e-15);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let e = EigenSystem::canonical(&[-0.3, 0.3]).unwrap();
        let id = Operator::identity(2);
        let rho = two_level_state(0.4);
        assert!(build_work_distribution(&rho, &e, &e, &id, MeasurementScheme::Gaussian { sigma: 0.0 }).is_err());
        assert!(build_work_distribution(&Operator::pauli_z(), &e, &e, &id, MeasurementScheme::Projective).is_err());
        assert!(build_work_distribution(&rho, &e, &e, &Operator::pauli_z().scale(C64::new(2.0, 0.0)), MeasurementScheme::Projective).is_err());
        assert!(MeasurementScheme::gaussian(-1.0).is_err());
    }

    #[test]
    fn mixture_json_shape() {
        let m = MixtureDistribution::from_components(
            DistributionLabel::PerLevel(1),
            vec![MixtureComponent::new(C64::new(0.25, -0.5), 1.5, 0.2)],
        );
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["label"]["per_level"], 1);
        let c = &v["components"][0];
        assert_eq!(c["re_weight"], 0.25);
        assert_eq!(c["im_weight"], -0.5);
        assert_eq!(c["mean"], 1.5);
        assert_eq!(c["width"], 0.2);
        let back: MixtureDistribution = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
        let full = serde_json::to_value(MixtureDistribution::empty(DistributionLabel::Full)).unwrap();
        assert_eq!(full["label"], "full");
    }
}
