//! Small dense complex-matrix kernel.
//!
//! Everything else in the crate is built on this module: row-major
//! [`ComplexMatrix`] values with the handful of operations the protocol
//! analysis needs (product, adjoint, trace, inverse, SVD, Kronecker
//! product, unitarity test, Hermitian eigendecomposition). Matrices are
//! tiny (N ≤ 4 in practice) so all algorithms favor robustness and
//! determinism over asymptotic speed.

use num_complex::Complex;

use crate::error::{Error, Result};

/// Complex number type used throughout, f64 precision.
pub type Complex64 = Complex<f64>;

/// Default tolerance for unitarity / orthogonality / residual checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative cutoff below which a singular value is treated as zero.
pub const SINGULARITY_CUTOFF: f64 = 1e-12;

const MAX_JACOBI_SWEEPS: usize = 64;

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Singular value decomposition `a = left · diag(σ) · right†`.
///
/// Both factors are unitary and the singular values are sorted in
/// descending order. The phase of each left singular vector is fixed by
/// making its largest-magnitude entry real and non-negative, so repeated
/// runs produce identical factors.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub right: ComplexMatrix,
}

/// Eigendecomposition of a Hermitian matrix: `a = vectors · diag(λ) · vectors†`
/// with real eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl ComplexMatrix {
    /// Build a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Square matrix with the given complex diagonal.
    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Square matrix with the given real diagonal.
    pub fn diagonal_real(entries: &[f64]) -> Self {
        let diag: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&diag)
    }

    /// Build from nested rows of (re, im) pairs; convenient in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Build a real-valued matrix from nested rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    /// Standard complex matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    /// Matrix × column-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::ShapeMismatch {
                op: "matvec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) * v[j])
                    .sum::<Complex64>()
            })
            .collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Sum of the diagonal; requires a square matrix.
    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "trace",
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_check("add", other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_check("sub", other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn zip_check(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                op,
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise difference `max |self - other|`; shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "max_abs_diff requires equal shapes"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm `sqrt(Σ |entry|²)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// True iff `‖a†a − I‖_max ≤ tol`. Non-square matrices are never unitary.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation().is_some_and(|dev| dev <= tol)
    }

    /// `‖a†a − I‖_max`, or `None` for a non-square matrix.
    pub fn unitarity_deviation(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let product = self.adjoint().matmul(self).expect("shapes agree");
        Some(product.max_abs_diff(&Self::identity(self.rows)))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..=i {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Inverse via Gauss-Jordan elimination with partial pivoting.
    ///
    /// Fails with [`Error::Singular`] when a pivot falls below
    /// [`SINGULARITY_CUTOFF`] relative to the largest input entry, which
    /// for a channel matrix signals a vanishing Schmidt coefficient.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "inverse",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut work = self.clone();
        let mut inv = Self::identity(n);

        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&a, &b| {
                    work.get(a, col)
                        .norm()
                        .partial_cmp(&work.get(b, col).norm())
                        .expect("entry norms are finite")
                })
                .expect("non-empty range");
            let pivot = work.get(pivot_row, col);
            if pivot.norm() <= SINGULARITY_CUTOFF * scale {
                return Err(Error::Singular {
                    cutoff: SINGULARITY_CUTOFF,
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let (a, b) = (work.get(col, j), work.get(pivot_row, j));
                    work.set(col, j, b);
                    work.set(pivot_row, j, a);
                    let (a, b) = (inv.get(col, j), inv.get(pivot_row, j));
                    inv.set(col, j, b);
                    inv.set(pivot_row, j, a);
                }
            }
            let inv_pivot = Complex64::new(1.0, 0.0) / pivot;
            for j in 0..n {
                work.set(col, j, work.get(col, j) * inv_pivot);
                inv.set(col, j, inv.get(col, j) * inv_pivot);
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = work.get(row, col);
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let w = work.get(row, j) - factor * work.get(col, j);
                    work.set(row, j, w);
                    let v = inv.get(row, j) - factor * inv.get(col, j);
                    inv.set(row, j, v);
                }
            }
        }
        Ok(inv)
    }

    /// Singular value decomposition of a square matrix by one-sided Jacobi
    /// rotations. See [`SvdResult`] for the conventions.
    pub fn svd(&self) -> Result<SvdResult> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "svd",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut work = self.clone();
        let mut right = Self::identity(n);
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        let off_tol = 1e-15 * scale * scale;

        let mut converged = false;
        for _ in 0..MAX_JACOBI_SWEEPS {
            let mut max_off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (app, aqq, apq) = column_gram(&work, p, q);
                    let off = apq.norm();
                    max_off = max_off.max(off);
                    if off <= off_tol {
                        continue;
                    }
                    let (c, s, phase) = jacobi_rotation(app, aqq, apq);
                    apply_column_rotation(&mut work, p, q, c, s, phase);
                    apply_column_rotation(&mut right, p, q, c, s, phase);
                }
            }
            if max_off <= off_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            // One last check: the sweep may have converged on its final pass.
            let mut max_off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (_, _, apq) = column_gram(&work, p, q);
                    max_off = max_off.max(apq.norm());
                }
            }
            if max_off > off_tol {
                return Err(Error::SvdNoConvergence {
                    sweeps: MAX_JACOBI_SWEEPS,
                });
            }
        }

        // Columns of `work` are σ_j · u_j; extract norms and normalize.
        let mut sigma: Vec<f64> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| work.get(i, j).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let mut left = Self::zeros(n, n);
        let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
        let zero_tol = SINGULARITY_CUTOFF * sigma_max;
        for (j, &s) in sigma.iter().enumerate() {
            if s > zero_tol {
                for i in 0..n {
                    left.set(i, j, work.get(i, j) / s);
                }
            }
        }
        // Fill columns lost to zero singular values by completing an
        // orthonormal set against the canonical basis.
        complete_orthonormal_columns(&mut left, &sigma, zero_tol);

        // Sort descending, stable in the original column order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            sigma[b]
                .partial_cmp(&sigma[a])
                .expect("finite singular values")
        });
        let mut left_sorted = Self::zeros(n, n);
        let mut right_sorted = Self::zeros(n, n);
        let mut sigma_sorted = vec![0.0; n];
        for (dst, &src) in order.iter().enumerate() {
            sigma_sorted[dst] = sigma[src];
            for i in 0..n {
                left_sorted.set(i, dst, left.get(i, src));
                right_sorted.set(i, dst, right.get(i, src));
            }
        }
        sigma = sigma_sorted;
        left = left_sorted;
        right = right_sorted;

        // Deterministic phases: largest-magnitude entry of each left
        // singular vector becomes real and non-negative.
        for j in 0..n {
            let mut best = 0;
            let mut best_mag = 0.0;
            for i in 0..n {
                let mag = left.get(i, j).norm();
                if mag > best_mag + 1e-15 {
                    best_mag = mag;
                    best = i;
                }
            }
            if best_mag > 0.0 {
                let phase = left.get(best, j) / Complex64::new(best_mag, 0.0);
                let correction = phase.conj();
                for i in 0..n {
                    left.set(i, j, left.get(i, j) * correction);
                    right.set(i, j, right.get(i, j) * correction);
                }
            }
        }

        Ok(SvdResult {
            left,
            singular_values: sigma,
            right,
        })
    }

    /// Eigendecomposition of a Hermitian matrix by two-sided Jacobi
    /// rotations. The input is symmetrized internally; callers are
    /// expected to pass matrices Hermitian within roundoff.
    pub fn hermitian_eig(&self) -> Result<HermitianEig> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "hermitian_eig",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        // Symmetrize to guard against roundoff-level asymmetry.
        let mut h = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = (self.get(i, j) + self.get(j, i).conj()).scale(0.5);
                h.set(i, j, v);
            }
        }
        let mut vectors = Self::identity(n);
        let scale = h.max_abs().max(f64::MIN_POSITIVE);
        let off_tol = 1e-15 * scale;

        for _ in 0..MAX_JACOBI_SWEEPS {
            let mut max_off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    let hpq = h.get(p, q);
                    let off = hpq.norm();
                    max_off = max_off.max(off);
                    if off <= off_tol {
                        continue;
                    }
                    let (c, s, phase) = jacobi_rotation(h.get(p, p).re, h.get(q, q).re, hpq);
                    // h ← r† h r, vectors ← vectors·r
                    apply_column_rotation(&mut h, p, q, c, s, phase);
                    apply_row_rotation_adjoint(&mut h, p, q, c, s, phase);
                    apply_column_rotation(&mut vectors, p, q, c, s, phase);
                }
            }
            if max_off <= off_tol {
                break;
            }
        }

        let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (h.get(i, i).re, i)).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite eigenvalues"));
        let mut sorted_vectors = Self::zeros(n, n);
        let mut eigenvalues = Vec::with_capacity(n);
        for (dst, &(val, src)) in pairs.iter().enumerate() {
            eigenvalues.push(val);
            for i in 0..n {
                sorted_vectors.set(i, dst, vectors.get(i, src));
            }
        }
        Ok(HermitianEig {
            eigenvalues,
            vectors: sorted_vectors,
        })
    }
}

/// Largest entry-wise difference after aligning global phases on the
/// largest-magnitude entry of `reference`. Used wherever two unitaries
/// (or basis vectors) are compared "up to global phase".
pub fn max_abs_diff_up_to_phase(candidate: &ComplexMatrix, reference: &ComplexMatrix) -> f64 {
    assert_eq!(
        (candidate.rows(), candidate.cols()),
        (reference.rows(), reference.cols()),
        "phase comparison requires equal shapes"
    );
    let mut idx = 0;
    let mut mag = 0.0;
    for (i, z) in reference.data().iter().enumerate() {
        if z.norm() > mag {
            mag = z.norm();
            idx = i;
        }
    }
    let anchor = candidate.data()[idx];
    if anchor.norm() < 1e-12 {
        return candidate.max_abs_diff(reference);
    }
    let ratio = reference.data()[idx] / anchor;
    let phase = ratio / Complex64::new(ratio.norm(), 0.0);
    candidate.scale(phase).max_abs_diff(reference)
}

/// Gram data for columns p, q: (‖col_p‖², ‖col_q‖², ⟨col_p, col_q⟩).
fn column_gram(m: &ComplexMatrix, p: usize, q: usize) -> (f64, f64, Complex64) {
    let mut app = 0.0;
    let mut aqq = 0.0;
    let mut apq = Complex64::new(0.0, 0.0);
    for i in 0..m.rows() {
        let vp = m.get(i, p);
        let vq = m.get(i, q);
        app += vp.norm_sqr();
        aqq += vq.norm_sqr();
        apq += vp.conj() * vq;
    }
    (app, aqq, apq)
}

/// Rotation parameters (c, s, phase) diagonalizing the Hermitian 2×2
/// block [[app, apq], [apq*, aqq]]. The unitary is
/// [[c, s·e^{-iφ}], [-s·e^{-iφ}... ]] applied via the helpers below.
fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64) -> (f64, f64, Complex64) {
    let mag = apq.norm();
    let phase = apq / Complex64::new(mag, 0.0); // e^{iφ}
    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta == 0.0 {
        1.0
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    (c, s, phase)
}

/// Post-multiply by the rotation R = diag(1, e^{-iφ})·[[c, s], [-s, c]]:
/// col_p ← c·col_p − s·e^{-iφ}·col_q,  col_q ← s·col_p + c·e^{-iφ}·col_q.
fn apply_column_rotation(
    m: &mut ComplexMatrix,
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    phase: Complex64,
) {
    let en = phase.conj();
    for i in 0..m.rows() {
        let vp = m.get(i, p);
        let vq = m.get(i, q);
        m.set(i, p, vp.scale(c) - vq * en.scale(s));
        m.set(i, q, vp.scale(s) + vq * en.scale(c));
    }
}

/// Pre-multiply by R† where R is the rotation above.
fn apply_row_rotation_adjoint(
    m: &mut ComplexMatrix,
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    phase: Complex64,
) {
    // R† rows: row_p ← c·row_p − s·e^{iφ}·row_q, row_q ← s·row_p + c·e^{iφ}·row_q.
    let ep = phase;
    for j in 0..m.cols() {
        let vp = m.get(p, j);
        let vq = m.get(q, j);
        m.set(p, j, vp.scale(c) - vq * ep.scale(s));
        m.set(q, j, vp.scale(s) + vq * ep.scale(c));
    }
}

/// Replace zero columns of `left` (where σ_j ≤ zero_tol) with unit vectors
/// orthogonal to all the nonzero columns, via Gram-Schmidt against the
/// canonical basis in index order.
fn complete_orthonormal_columns(left: &mut ComplexMatrix, sigma: &[f64], zero_tol: f64) {
    let n = left.rows();
    let missing: Vec<usize> = (0..n).filter(|&j| sigma[j] <= zero_tol).collect();
    if missing.is_empty() {
        return;
    }
    let mut kept: Vec<Vec<Complex64>> = (0..n)
        .filter(|&j| sigma[j] > zero_tol)
        .map(|j| (0..n).map(|i| left.get(i, j)).collect())
        .collect();
    let mut fill = missing.into_iter();
    for basis_index in 0..n {
        let Some(&target) = fill.as_slice().first() else {
            break;
        };
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| {
                if i == basis_index {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        for _ in 0..2 {
            for u in &kept {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in &mut v {
                *z /= norm;
            }
            for (i, &value) in v.iter().enumerate() {
                left.set(i, target, value);
            }
            kept.push(v);
            fill.next();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Deterministic pseudo-random complex matrix for kernel tests.
    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let data: Vec<Complex64> = (0..n * n).map(|_| c(next(), next())).collect();
        ComplexMatrix::new(n, n, data).unwrap()
    }

    #[test]
    fn matmul_identity_is_noop() {
        let m = random_matrix(3, 7);
        let id = ComplexMatrix::identity(3);
        assert_eq!(id.matmul(&m).unwrap().max_abs_diff(&m), 0.0);
    }

    #[test]
    fn matmul_diagonal_squares() {
        let d = ComplexMatrix::diagonal_real(&[0.6, 0.8]);
        let prod = d.matmul(&d).unwrap();
        let expected = ComplexMatrix::diagonal_real(&[0.36, 0.64]);
        assert!(prod.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn matmul_matches_sum_of_products_oracle() {
        let a = random_matrix(2, 11);
        let b = random_matrix(2, 13);
        let prod = a.matmul(&b).unwrap();
        // Independent oracle: explicit entry-wise sum of products over raw data.
        for i in 0..2 {
            for j in 0..2 {
                let mut expected = c(0.0, 0.0);
                for k in 0..2 {
                    expected += a.data()[i * 2 + k] * b.data()[k * 2 + j];
                }
                assert!((prod.get(i, j) - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn matmul_shape_mismatch_errors() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 2);
        assert!(matches!(a.matmul(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn adjoint_examples() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(id.adjoint().max_abs_diff(&id), 0.0);

        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert_eq!(m.adjoint().max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn adjoint_is_an_involution() {
        let m = random_matrix(4, 3);
        assert_eq!(m.adjoint().adjoint().max_abs_diff(&m), 0.0);
    }

    #[test]
    fn trace_examples() {
        for n in 2..=4 {
            let tr = ComplexMatrix::identity(n).trace().unwrap();
            assert!(approx(tr.re, n as f64, 1e-15) && tr.im == 0.0);
        }
        let d = ComplexMatrix::diagonal_real(&[1.0 / 0.36, 1.0 / 0.64]);
        let expected = 1.0 / 0.36 + 1.0 / 0.64;
        assert!(approx(d.trace().unwrap().re, expected, 1e-12));
        assert!(matches!(
            ComplexMatrix::zeros(2, 3).trace(),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn trace_is_cyclic() {
        let a = random_matrix(3, 21);
        let b = random_matrix(3, 22);
        let ab = a.matmul(&b).unwrap().trace().unwrap();
        let ba = b.matmul(&a).unwrap().trace().unwrap();
        assert!((ab - ba).norm() < 1e-12);
    }

    #[test]
    fn trace_of_gram_matches_frobenius_norm() {
        let a = random_matrix(4, 5);
        let gram_trace = a.adjoint().matmul(&a).unwrap().trace().unwrap();
        let frob_sq = a.frobenius_norm().powi(2);
        assert!(approx(gram_trace.re, frob_sq, 1e-12));
        assert!(gram_trace.im.abs() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let id = ComplexMatrix::identity(3);
        assert!(id.inverse().unwrap().max_abs_diff(&id) < 1e-15);

        let d = ComplexMatrix::diagonal_real(&[0.6, 0.8]);
        let expected = ComplexMatrix::diagonal_real(&[1.0 / 0.6, 1.0 / 0.8]);
        assert!(d.inverse().unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn inverse_residual_on_random_4x4() {
        let m = random_matrix(4, 9);
        let inv = m.inverse().unwrap();
        let residual = m
            .matmul(&inv)
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(4));
        assert!(residual < 1e-9, "residual {residual}");
    }

    #[test]
    fn inverse_of_singular_matrix_errors() {
        let d = ComplexMatrix::diagonal_real(&[1.0, 0.0]);
        assert!(matches!(d.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn svd_of_diagonal() {
        let d = ComplexMatrix::diagonal_real(&[0.8, 0.6]);
        let svd = d.svd().unwrap();
        assert!(approx(svd.singular_values[0], 0.8, 1e-12));
        assert!(approx(svd.singular_values[1], 0.6, 1e-12));
    }

    #[test]
    fn svd_of_rotated_real_channel() {
        // Singular values of [[-0.1, -0.7], [0.7, 0.1]] are 0.8 and 0.6.
        let m = ComplexMatrix::from_real_rows(&[vec![-0.1, -0.7], vec![0.7, 0.1]]).unwrap();
        let svd = m.svd().unwrap();
        assert!(approx(svd.singular_values[0], 0.8, 1e-12));
        assert!(approx(svd.singular_values[1], 0.6, 1e-12));
    }

    fn assert_svd_valid(m: &ComplexMatrix, tol: f64) {
        let svd = m.svd().unwrap();
        assert!(svd.left.is_unitary(1e-9));
        assert!(svd.right.is_unitary(1e-9));
        let mut prev = f64::INFINITY;
        for &s in &svd.singular_values {
            assert!(s >= 0.0 && s <= prev);
            prev = s;
        }
        let sigma = ComplexMatrix::diagonal_real(&svd.singular_values);
        let rebuilt = svd
            .left
            .matmul(&sigma)
            .unwrap()
            .matmul(&svd.right.adjoint())
            .unwrap();
        assert!(rebuilt.max_abs_diff(m) < tol, "reconstruction residual");
        // Diagonalization form: left† · m · right = diag(σ).
        let diag = svd
            .left
            .adjoint()
            .matmul(m)
            .unwrap()
            .matmul(&svd.right)
            .unwrap();
        assert!(diag.max_abs_diff(&sigma) < 1e-9);
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        for seed in 0..40 {
            for n in 2..=4 {
                assert_svd_valid(&random_matrix(n, 1000 + seed * 10 + n as u64), 1e-10);
            }
        }
    }

    #[test]
    fn svd_handles_rank_deficiency() {
        let m = ComplexMatrix::diagonal_real(&[1.0, 0.0]);
        assert_svd_valid(&m, 1e-12);
        let svd = m.svd().unwrap();
        assert!(approx(svd.singular_values[1], 0.0, 1e-15));
    }

    #[test]
    fn svd_is_deterministic() {
        let m = random_matrix(3, 77);
        let a = m.svd().unwrap();
        let b = m.svd().unwrap();
        assert_eq!(a.left.max_abs_diff(&b.left), 0.0);
        assert_eq!(a.right.max_abs_diff(&b.right), 0.0);
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert!(i2.kron(&i2).max_abs_diff(&ComplexMatrix::identity(4)) == 0.0);

        let d = ComplexMatrix::diagonal(&[c(0.3, 0.1), c(-0.2, 0.4)]);
        let expanded = d.kron(&i2);
        let expected =
            ComplexMatrix::diagonal(&[c(0.3, 0.1), c(0.3, 0.1), c(-0.2, 0.4), c(-0.2, 0.4)]);
        assert_eq!(expanded.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn kron_mixed_product_property() {
        let a = random_matrix(2, 31);
        let b = random_matrix(2, 32);
        let x = random_matrix(2, 33);
        let y = random_matrix(2, 34);
        let lhs = a.kron(&b).matmul(&x.kron(&y)).unwrap();
        let rhs = a.matmul(&x).unwrap().kron(&b.matmul(&y).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn unitarity_checks() {
        assert!(ComplexMatrix::identity(3).is_unitary(1e-9));
        assert!(!ComplexMatrix::diagonal_real(&[0.6, 0.8]).is_unitary(1e-9));

        // Generic parametrized 2x2 unitary at a few angle choices.
        let cases: [(f64, f64, f64, f64); 3] = [
            (0.3, 1.1, -0.4, 0.7),
            (2.0, 0.0, 3.1, 1.3),
            (-1.2, 2.2, 0.9, 2.6),
        ];
        for (phi, alpha, beta, theta) in cases {
            let e = |x: f64| Complex64::from_polar(1.0, x);
            let u = ComplexMatrix::from_rows(&[
                vec![
                    e(phi) * e(alpha).scale(theta.cos()),
                    e(phi) * e(beta).scale(theta.sin()),
                ],
                vec![
                    e(phi) * e(-beta).scale(-theta.sin()),
                    e(phi) * e(-alpha).scale(theta.cos()),
                ],
            ])
            .unwrap();
            assert!(u.is_unitary(1e-12));
        }
    }

    #[test]
    fn hermitian_eig_recovers_spectrum() {
        // Build H = V diag(λ) V† from a known spectrum and random unitary.
        let m = random_matrix(3, 55);
        let v = m.svd().unwrap().left;
        let lambda = [2.5, 1.0, -0.5];
        let h = v
            .matmul(&ComplexMatrix::diagonal_real(&lambda))
            .unwrap()
            .matmul(&v.adjoint())
            .unwrap();
        let eig = h.hermitian_eig().unwrap();
        for (got, want) in eig.eigenvalues.iter().zip(lambda.iter()) {
            assert!(approx(*got, *want, 1e-10));
        }
        let rebuilt = eig
            .vectors
            .matmul(&ComplexMatrix::diagonal_real(&eig.eigenvalues))
            .unwrap()
            .matmul(&eig.vectors.adjoint())
            .unwrap();
        assert!(rebuilt.max_abs_diff(&h) < 1e-10);
        assert!(eig.vectors.is_unitary(1e-10));
    }

    #[test]
    fn kernel_outputs_stay_finite() {
        for seed in 0..20 {
            let m = random_matrix(3, 400 + seed);
            assert!(m.adjoint().is_finite());
            assert!(m.kron(&m).is_finite());
            assert!(m.svd().unwrap().left.is_finite());
            if let Ok(inv) = m.inverse() {
                assert!(inv.is_finite());
            }
        }
    }
}
