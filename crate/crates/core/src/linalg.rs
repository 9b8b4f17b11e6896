//! Small dense complex linear algebra.
//!
//! Everything here targets dimensions of a handful of levels: operators are
//! stored densely in row-major order and every routine is a pure function of
//! its inputs. The Hermitian eigensolver delegates the raw diagonalisation to
//! `nalgebra` and then imposes a deterministic ordering and phase convention
//! on top of it.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense `d x d` complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Operator {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Operator::zeros(dim);
        for i in 0..dim {
            op.set(i, i, ONE);
        }
        op
    }

    /// Builds an operator from row-major entries.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Operator { dim, entries })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Operator::from_entries(dim, entries)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut op = Operator::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            op.set(i, i, C64::new(x, 0.0));
        }
        op
    }

    /// `|a><b|`
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal vectors");
        let dim = a.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for ai in a {
            for bj in b {
                entries.push(ai * bj.conj());
            }
        }
        Operator { dim, entries }
    }

    /// Pure-state density matrix `|psi><psi|`.
    pub fn projector(psi: &[C64]) -> Self {
        Operator::outer(psi, psi)
    }

    /// `sigma_z = |2><2| - |1><1|` in the ordered basis `(|1>, |2>)`.
    pub fn pauli_z() -> Self {
        Operator::from_real_diagonal(&[-1.0, 1.0])
    }

    /// `sigma_x = |2><1| + |1><2|`.
    pub fn pauli_x() -> Self {
        let mut op = Operator::zeros(2);
        op.set(0, 1, ONE);
        op.set(1, 0, ONE);
        op
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Operator::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `<a|self|b>`
    pub fn matrix_element(&self, a: &[C64], b: &[C64]) -> C64 {
        let ob = self.apply(b);
        a.iter().zip(&ob).map(|(x, y)| x.conj() * y).sum()
    }

    /// `||A - A^dag||_F`
    pub fn hermiticity_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `||U^dag U - I||_F`
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.adjoint() * self;
        frobenius_distance(&prod, &Operator::identity(self.dim)).unwrap_or(f64::INFINITY)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Hermitian, unit trace and positive semidefinite up to `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        self.check_density(tol).is_ok()
    }

    pub fn check_density(&self, tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::NotDensity {
                reason: format!("not Hermitian (defect {defect:.3e})"),
            });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::NotDensity {
                reason: format!("trace is {tr}"),
            });
        }
        let eig = raw_eigen(self);
        let min = eig.0.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::NotDensity {
                reason: format!("negative eigenvalue {min:.3e}"),
            });
        }
        Ok(())
    }

    /// Change of basis: entries `<b_i|self|b_j>` for the columns of `basis`.
    pub fn in_basis(&self, basis: &EigenSystem) -> Operator {
        let mut out = Operator::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, self.matrix_element(basis.vector(i), basis.vector(j)));
            }
        }
        out
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut op = Operator::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                op.set(i, j, m[(i, j)]);
            }
        }
        op
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let d = self.dim;
        let mut out = Operator::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `sqrt(Tr[(a-b)^dag (a-b)])`
pub fn frobenius_distance(a: &Operator, b: &Operator) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Ordered real spectrum with orthonormal eigenvectors.
///
/// Values ascend. Each vector has its largest-modulus entry real and
/// positive (the first such entry when several tie), which makes the
/// decomposition a deterministic function of the input operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

impl EigenSystem {
    /// Assembles an eigensystem from explicit data, normalising each vector
    /// and applying the phase convention. Values must already ascend.
    pub fn from_parts(values: Vec<f64>, vectors: Vec<Vec<C64>>) -> Result<Self> {
        let dim = values.len();
        if vectors.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: vectors.len(),
            });
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("values", "eigenvalues must ascend"));
        }
        let mut out = Vec::with_capacity(dim);
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::invalid("vectors", "zero or non-finite eigenvector"));
            }
            out.push(fix_phase(v.iter().map(|z| z / norm).collect()));
        }
        Ok(EigenSystem { values, vectors: out })
    }

    /// Eigenbasis of a diagonal operator: the canonical basis.
    pub fn canonical(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let vectors = (0..dim)
            .map(|n| {
                let mut v = vec![ZERO; dim];
                v[n] = ONE;
                v
            })
            .collect();
        EigenSystem::from_parts(values.to_vec(), vectors)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn vector(&self, n: usize) -> &[C64] {
        &self.vectors[n]
    }

    /// `sum_n values[n] |v_n><v_n|`
    pub fn reconstruct(&self) -> Operator {
        let d = self.dim();
        let mut op = Operator::zeros(d);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let p = Operator::outer(v, v).scale(C64::new(*lambda, 0.0));
            op = &op + &p;
        }
        op
    }

    /// Largest `|<v_i|v_j> - delta_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let ip: C64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn basis_matrix(&self) -> Operator {
        let d = self.dim();
        let mut op = Operator::zeros(d);
        for (j, v) in self.vectors.iter().enumerate() {
            for (i, z) in v.iter().enumerate() {
                op.set(i, j, *z);
            }
        }
        op
    }
}

/// Index of the first entry whose modulus is within rounding of the maximum.
fn pivot_index(v: &[C64]) -> usize {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    v.iter()
        .position(|z| z.norm() >= max - 1e-12)
        .unwrap_or(0)
}

fn fix_phase(mut v: Vec<C64>) -> Vec<C64> {
    let p = v[pivot_index(&v)];
    let r = p.norm();
    if r > 0.0 {
        let phase = p.conj() / r;
        for z in v.iter_mut() {
            *z *= phase;
        }
        // exact real pivot
        let k = pivot_index(&v);
        v[k] = C64::new(v[k].norm(), 0.0);
    }
    v
}

/// Unsorted eigenpairs straight from the solver.
fn raw_eigen(op: &Operator) -> (Vec<f64>, Vec<Vec<C64>>) {
    let m = op.to_nalgebra();
    // symmetrise so that tiny asymmetries do not leak into the solver
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let d = op.dim;
    let values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let vectors = (0..d)
        .map(|j| (0..d).map(|i| eig.eigenvectors[(i, j)]).collect())
        .collect();
    (values, vectors)
}

/// Spectral decomposition of a Hermitian operator.
///
/// Degenerate blocks are re-spanned by Gram-Schmidt over the canonical basis
/// projected into the block, so the returned basis does not depend on solver
/// internals.
pub fn hermitian_eigensystem(op: &Operator) -> Result<EigenSystem> {
    let asymmetry = op.hermiticity_defect();
    if asymmetry > tolerance::HERMITICITY {
        return Err(Error::NotHermitian { asymmetry });
    }
    let d = op.dim;
    let (values, vectors) = raw_eigen(op);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let vectors: Vec<Vec<C64>> = order.iter().map(|&k| vectors[k].clone()).collect();

    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let threshold = tolerance::DEGENERACY * scale;

    let mut out_values = Vec::with_capacity(d);
    let mut out_vectors: Vec<Vec<C64>> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && values[end] - values[end - 1] <= threshold {
            end += 1;
        }
        if end - start == 1 {
            out_values.push(values[start]);
            out_vectors.push(fix_phase(vectors[start].clone()));
        } else {
            let block = &vectors[start..end];
            let basis = canonical_block_basis(block, d);
            let mut pairs: Vec<(f64, Vec<C64>)> = basis
                .into_iter()
                .map(|v| (op.matrix_element(&v, &v).re, fix_phase(v)))
                .collect();
            // keep the Gram-Schmidt order; values inside the block are equal
            let mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
            for p in pairs.iter_mut() {
                p.0 = mean;
            }
            for (v, vec) in pairs {
                out_values.push(v);
                out_vectors.push(vec);
            }
        }
        start = end;
    }
    Ok(EigenSystem {
        values: out_values,
        vectors: out_vectors,
    })
}

fn canonical_block_basis(block: &[Vec<C64>], d: usize) -> Vec<Vec<C64>> {
    let k = block.len();
    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(k);
    for j in 0..d {
        if accepted.len() == k {
            break;
        }
        // projection of e_j onto the block
        let mut w = vec![ZERO; d];
        for v in block {
            let c = v[j].conj();
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi += c * vi;
            }
        }
        for a in &accepted {
            let c: C64 = a.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            for (wi, ai) in w.iter_mut().zip(a) {
                *wi -= c * ai;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            accepted.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    accepted
}

/// `exp(-i * op * dt)` via the spectral decomposition.
pub fn expm_minus_i_eigen(op: &Operator, dt: f64) -> Result<Operator> {
    let eig = hermitian_eigensystem(op)?;
    let d = op.dim;
    let mut out = Operator::zeros(d);
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        let phase = C64::from_polar(1.0, -lambda * dt);
        for i in 0..d {
            for j in 0..d {
                let z = out.get(i, j) + phase * v[i] * v[j].conj();
                out.set(i, j, z);
            }
        }
    }
    Ok(out)
}

/// Closed form of `exp(-i H dt)` for a 2x2 Hermitian `H = a0 I + n.sigma`.
pub fn expm_minus_i_rodrigues(op: &Operator, dt: f64) -> Result<Operator> {
    if op.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.dim,
        });
    }
    let asymmetry = op.hermiticity_defect();
    if asymmetry > tolerance::HERMITICITY {
        return Err(Error::NotHermitian { asymmetry });
    }
    let m = rodrigues_2x2(
        [[op.get(0, 0), op.get(0, 1)], [op.get(1, 0), op.get(1, 1)]],
        dt,
    );
    Operator::from_entries(2, vec![m[0][0], m[0][1], m[1][0], m[1][1]])
}

/// Rodrigues formula on raw 2x2 storage; the hot path of the propagator.
#[inline]
pub(crate) fn rodrigues_2x2(h: [[C64; 2]; 2], dt: f64) -> [[C64; 2]; 2] {
    let a0 = 0.5 * (h[0][0].re + h[1][1].re);
    let nz = 0.5 * (h[0][0].re - h[1][1].re);
    // off-diagonal h01 = nx - i ny
    let off = 0.5 * (h[0][1] + h[1][0].conj());
    let nx = off.re;
    let ny = -off.im;
    let r = (nx * nx + ny * ny + nz * nz).sqrt();
    let (c, s_over_r) = if r * dt.abs() < 1e-8 {
        let x = r * dt;
        (1.0 - 0.5 * x * x, dt * (1.0 - x * x / 6.0))
    } else {
        ((r * dt).cos(), (r * dt).sin() / r)
    };
    let global = C64::from_polar(1.0, -a0 * dt);
    let mi = C64::new(0.0, -s_over_r);
    // cos I - i sin/r (nx X + ny Y + nz Z)
    let m00 = C64::new(c, 0.0) + mi * nz;
    let m11 = C64::new(c, 0.0) - mi * nz;
    let m01 = mi * C64::new(nx, -ny);
    let m10 = mi * C64::new(nx, ny);
    [
        [global * m00, global * m01],
        [global * m10, global * m11],
    ]
}

/// `exp(-i * op * dt)`; the closed 2x2 form when `d = 2`, the spectral route
/// otherwise.
pub fn expm_hermitian_times_minus_i(op: &Operator, dt: f64) -> Result<Operator> {
    if op.dim == 2 {
        expm_minus_i_rodrigues(op, dt)
    } else {
        expm_minus_i_eigen(op, dt)
    }
}

/// Scaling-and-squaring matrix exponential of `-i op dt`, used as an
/// independent reference for the routes above.
pub fn expm_reference(op: &Operator, dt: f64) -> Operator {
    let m = op.to_nalgebra() * C64::new(0.0, -dt);
    Operator::from_nalgebra(&m.exp())
}

/// Sum of absolute eigenvalues of a Hermitian operator.
pub fn trace_norm_hermitian(op: &Operator) -> Result<f64> {
    let asymmetry = op.hermiticity_defect();
    if asymmetry > tolerance::HERMITICITY {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(raw_eigen(op).0.iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_z_eigensystem_is_canonical() {
        let eig = hermitian_eigensystem(&Operator::pauli_z()).unwrap();
        assert_eq!(eig.values(), &[-1.0, 1.0]);
        assert_eq!(eig.vector(0), &[ONE, ZERO]);
        assert_eq!(eig.vector(1), &[ZERO, ONE]);
    }

    #[test]
    fn pauli_x_eigensystem() {
        let eig = hermitian_eigensystem(&Operator::pauli_x()).unwrap();
        assert_abs_diff_eq!(eig.value(0), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.value(1), 1.0, epsilon = 1e-14);
        let minus = [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)];
        let plus = [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)];
        for k in 0..2 {
            assert!((eig.vector(0)[k] - minus[k]).norm() < 1e-14);
            assert!((eig.vector(1)[k] - plus[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_is_rejected_with_defect() {
        let op = Operator::from_rows(&[&[ONE, c(0.0, 1.0)], &[ZERO, ONE]]).unwrap();
        match hermitian_eigensystem(&op) {
            Err(Error::NotHermitian { asymmetry }) => {
                assert_abs_diff_eq!(asymmetry, 2f64.sqrt(), epsilon = 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(expm_hermitian_times_minus_i(&op, 1.0).is_err());
    }

    #[test]
    fn zero_operator_returns_canonical_basis() {
        let eig = hermitian_eigensystem(&Operator::zeros(3)).unwrap();
        assert_eq!(eig.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(eig.basis_matrix(), Operator::identity(3));
    }

    #[test]
    fn degenerate_block_is_deterministic() {
        // diag(1, 1, -2) rotated by a fixed unitary
        let u = expm_reference(
            &Operator::from_rows(&[
                &[c(0.3, 0.0), c(0.1, 0.2), c(0.0, -0.4)],
                &[c(0.1, -0.2), c(-0.5, 0.0), c(0.7, 0.1)],
                &[c(0.0, 0.4), c(0.7, -0.1), c(0.2, 0.0)],
            ])
            .unwrap(),
            1.3,
        );
        let d = Operator::from_real_diagonal(&[1.0, 1.0, -2.0]);
        let h = &(&u * &d) * &u.adjoint();
        let h = (&h + &h.adjoint()).scale(c(0.5, 0.0));
        let a = hermitian_eigensystem(&h).unwrap();
        let b = hermitian_eigensystem(&h.clone()).unwrap();
        assert_eq!(a, b);
        assert!(a.orthonormality_defect() < 1e-12);
        assert!(frobenius_distance(&a.reconstruct(), &h).unwrap() < 1e-10);
        assert_abs_diff_eq!(a.value(0), -2.0, epsilon = 1e-12);
        assert_eq!(a.value(1), a.value(2));
    }

    #[test]
    fn expm_special_values() {
        let id = expm_hermitian_times_minus_i(&Operator::pauli_z(), 0.0).unwrap();
        assert!(frobenius_distance(&id, &Operator::identity(2)).unwrap() < 1e-15);
        let minus_id = expm_hermitian_times_minus_i(&Operator::pauli_x(), PI).unwrap();
        let target = Operator::identity(2).scale(c(-1.0, 0.0));
        assert!(frobenius_distance(&minus_id, &target).unwrap() < 1e-14);
        let via_eigen = expm_minus_i_eigen(&Operator::pauli_x(), PI).unwrap();
        assert!(frobenius_distance(&via_eigen, &target).unwrap() < 1e-14);
    }

    #[test]
    fn frobenius_distance_examples() {
        let i2 = Operator::identity(2);
        assert_eq!(frobenius_distance(&i2, &i2).unwrap(), 0.0);
        let z = Operator::pauli_z();
        let d = frobenius_distance(&z, &z.scale(c(-1.0, 0.0))).unwrap();
        assert_abs_diff_eq!(d, 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            frobenius_distance(&i2, &Operator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_predicates() {
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let rho = Operator::projector(&psi);
        assert!(rho.is_density(1e-12));
        assert!(!Operator::pauli_z().is_density(1e-12));
        assert!(!Operator::identity(2).is_density(1e-12));
        let mixed = Operator::identity(2).scale(c(0.5, 0.0));
        assert!(mixed.is_density(1e-12));
        assert_abs_diff_eq!(
            trace_norm_hermitian(&Operator::pauli_x()).unwrap(),
            2.0,
            epsilon = 1e-14
        );
    }
}
