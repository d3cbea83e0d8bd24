//! Measurement-operator synthesis, entanglement matching, and basis
//! completion.
//!
//! A measurement operator is the N×N coefficient matrix of one
//! von-Neumann basis vector on the sender's two particles (row = shared
//! particle, column = input particle). A faithful operator is synthesized
//! from a recovery unitary as `D = p^{1/2} · (Q⁻¹)† · Uᵀ`; conversely the
//! recovery is recovered from a faithful operator as `Uᵀ = p^{-1/2} · Q† · D`.

use crate::channel::{QuantumChannel, SchmidtForm};
use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, DEFAULT_TOL};

/// One von-Neumann basis vector on the sender's particle pair, stored as
/// its N×N coefficient matrix with `trace(d†d) = 1`.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    matrix: ComplexMatrix,
}

/// Outcome-dependent unitary the receiver applies after learning the
/// measurement result.
#[derive(Debug, Clone)]
pub struct RecoveryUnitary {
    matrix: ComplexMatrix,
}

/// Complete orthonormal set of N² measurement operators with
/// per-operator faithfulness annotations.
#[derive(Debug, Clone)]
pub struct MeasurementBasis {
    n: usize,
    operators: Vec<MeasurementOperator>,
    faithful: Vec<bool>,
    recovery: Vec<Option<RecoveryUnitary>>,
}

/// Result of the entanglement-matching test `ρ_m·ρ_q = p·I`.
#[derive(Debug, Clone, Copy)]
pub struct MatchReport {
    pub matched: bool,
    /// Faithful probability recomputed from the channel (never trusted
    /// from the caller).
    pub p: f64,
    /// `‖ρ_m·ρ_q − p·I‖_max` actually observed.
    pub deviation: f64,
}

impl MeasurementOperator {
    /// Validate unit norm within `1e-9`, then renormalize exactly.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidBasis(format!(
                "operator matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidBasis("non-finite operator entry".into()));
        }
        let norm = matrix.frobenius_norm();
        if (norm * norm - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidBasis(format!(
                "operator norm² is {} instead of 1",
                norm * norm
            )));
        }
        Ok(Self {
            matrix: matrix.scale(Complex64::new(1.0 / norm, 0.0)),
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Reduced density matrix of this basis vector on the shared
    /// particle: `D·D†`.
    pub fn reduced_density(&self) -> ComplexMatrix {
        self.matrix
            .matmul(&self.matrix.adjoint())
            .expect("square by construction")
    }
}

impl RecoveryUnitary {
    /// Validate unitarity at `1e-9`.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        match matrix.unitarity_deviation() {
            Some(dev) if dev <= tol => Ok(Self { matrix }),
            Some(dev) => Err(Error::NotUnitary {
                deviation: dev,
                tol,
            }),
            None => Err(Error::NotSquare {
                op: "recovery unitary",
                rows: matrix.rows(),
                cols: matrix.cols(),
            }),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
        }
    }

    /// The n = 2 quarter-turn `[[0, 1], [-1, 0]]`, the conventional
    /// second recovery choice.
    pub fn quarter_turn() -> Self {
        Self {
            matrix: ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]])
                .expect("static shape"),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl MeasurementBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn operators(&self) -> &[MeasurementOperator] {
        &self.operators
    }

    pub fn faithful_flags(&self) -> &[bool] {
        &self.faithful
    }

    pub fn recoveries(&self) -> &[Option<RecoveryUnitary>] {
        &self.recovery
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Assemble a basis from parts, validating counts and pairwise
    /// orthonormality at `1e-9`.
    pub fn from_parts(
        n: usize,
        operators: Vec<MeasurementOperator>,
        faithful: Vec<bool>,
        recovery: Vec<Option<RecoveryUnitary>>,
    ) -> Result<Self> {
        if operators.len() != n * n {
            return Err(Error::InvalidBasis(format!(
                "expected {} operators for dimension {n}, got {}",
                n * n,
                operators.len()
            )));
        }
        if faithful.len() != operators.len() || recovery.len() != operators.len() {
            return Err(Error::InvalidBasis(
                "faithful flags and recoveries must match the operator count".into(),
            ));
        }
        if operators.iter().any(|op| op.n() != n) {
            return Err(Error::InvalidBasis("operator dimension mismatch".into()));
        }
        validate_orthonormal(&operators, DEFAULT_TOL)?;
        Ok(Self {
            n,
            operators,
            faithful,
            recovery,
        })
    }

    /// Recompute faithfulness flags and recoveries against a channel.
    pub fn annotate(&mut self, channel: &QuantumChannel) -> Result<()> {
        for (i, op) in self.operators.iter().enumerate() {
            let recovery = extract_recovery(channel, op)?;
            self.faithful[i] = recovery.is_some();
            self.recovery[i] = recovery;
        }
        Ok(())
    }
}

/// Synthesize the faithful measurement operator matched to `channel` for
/// recovery unitary `u`: `D = p^{1/2} · (Q⁻¹)† · uᵀ`.
pub fn synthesize_faithful(
    channel: &QuantumChannel,
    u: &RecoveryUnitary,
) -> Result<MeasurementOperator> {
    if u.matrix().rows() != channel.n() {
        return Err(Error::ShapeMismatch {
            op: "synthesize_faithful",
            left_rows: channel.n(),
            left_cols: channel.n(),
            right_rows: u.matrix().rows(),
            right_cols: u.matrix().cols(),
        });
    }
    let p = channel.faithful_probability()?;
    let inv_adjoint = channel.coefficients().inverse()?.adjoint();
    let d = inv_adjoint
        .matmul(&u.matrix().transpose())?
        .scale(Complex64::new(p.sqrt(), 0.0));
    MeasurementOperator::new(d)
}

/// True iff `|Tr(a†b)| ≤ tol`; a pair with unit trace is the same vector.
pub fn check_orthogonal(a: &MeasurementOperator, b: &MeasurementOperator, tol: f64) -> bool {
    assert_eq!(a.n(), b.n(), "operators must share a dimension");
    operator_overlap(a, b).norm() <= tol
}

/// The Hilbert-Schmidt overlap `Tr(a†b)`.
pub fn operator_overlap(a: &MeasurementOperator, b: &MeasurementOperator) -> Complex64 {
    a.matrix()
        .data()
        .iter()
        .zip(b.matrix().data())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Test the entanglement-matching condition `ρ_m·ρ_q = p·I` at `tol`,
/// with `p` recomputed from the channel.
pub fn check_matching(
    channel: &QuantumChannel,
    operator: &MeasurementOperator,
    tol: f64,
) -> Result<MatchReport> {
    if operator.n() != channel.n() {
        return Err(Error::ShapeMismatch {
            op: "check_matching",
            left_rows: channel.n(),
            left_cols: channel.n(),
            right_rows: operator.n(),
            right_cols: operator.n(),
        });
    }
    let p = channel.faithful_probability()?;
    let product = operator
        .reduced_density()
        .matmul(&channel.reduced_density())?;
    let target = ComplexMatrix::identity(channel.n()).scale(Complex64::new(p, 0.0));
    let deviation = product.max_abs_diff(&target);
    Ok(MatchReport {
        matched: deviation <= tol,
        p,
        deviation,
    })
}

/// Recover the receiver's unitary from a faithful operator:
/// `Uᵀ = p^{-1/2} · Q† · D`. Returns `None` when the candidate fails the
/// unitarity tolerance, i.e. the operator cannot teleport faithfully with
/// any state-independent unitary. The global phase of a returned unitary
/// is fixed by zeroing the phase of its first nonzero entry.
pub fn extract_recovery(
    channel: &QuantumChannel,
    operator: &MeasurementOperator,
) -> Result<Option<RecoveryUnitary>> {
    if operator.n() != channel.n() {
        return Err(Error::ShapeMismatch {
            op: "extract_recovery",
            left_rows: channel.n(),
            left_cols: channel.n(),
            right_rows: operator.n(),
            right_cols: operator.n(),
        });
    }
    let p = channel.faithful_probability()?;
    let candidate_t = channel
        .coefficients()
        .adjoint()
        .matmul(operator.matrix())?
        .scale(Complex64::new(1.0 / p.sqrt(), 0.0));
    let candidate = fix_global_phase(candidate_t.transpose());
    match RecoveryUnitary::new(candidate) {
        Ok(u) => Ok(Some(u)),
        Err(Error::NotUnitary { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Divide out the phase of the first entry with magnitude above 1e-9.
fn fix_global_phase(m: ComplexMatrix) -> ComplexMatrix {
    for z in m.data() {
        if z.norm() > 1e-9 {
            let phase = z / Complex64::new(z.norm(), 0.0);
            return m.scale(phase.conj());
        }
    }
    m
}

/// Extend a pairwise-orthonormal partial set to a full basis of N²
/// operators by Gram-Schmidt against the canonical matrix units in fixed
/// index order (with a re-orthogonalization pass). The partial set is
/// kept verbatim as a prefix; completion operators are flagged
/// non-faithful until annotated against a channel.
pub fn complete_basis(n: usize, partial: &[MeasurementOperator]) -> Result<MeasurementBasis> {
    if partial.len() > n * n {
        return Err(Error::InvalidBasis(format!(
            "{} operators exceed the basis size {}",
            partial.len(),
            n * n
        )));
    }
    if partial.iter().any(|op| op.n() != n) {
        return Err(Error::InvalidBasis("operator dimension mismatch".into()));
    }
    validate_orthonormal(partial, DEFAULT_TOL)?;

    let mut vectors: Vec<Vec<Complex64>> = partial
        .iter()
        .map(|op| op.matrix().data().to_vec())
        .collect();
    let dim = n * n;
    for unit_index in 0..dim {
        if vectors.len() == dim {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[unit_index] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for u in &vectors {
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
            vectors.push(v);
        }
    }
    if vectors.len() != dim {
        return Err(Error::InvalidBasis(
            "could not complete the basis; input set is numerically degenerate".into(),
        ));
    }

    // The partial set is kept verbatim; only the completions are new.
    let mut operators: Vec<MeasurementOperator> = partial.to_vec();
    for v in vectors.into_iter().skip(partial.len()) {
        operators.push(MeasurementOperator::new(ComplexMatrix::new(n, n, v)?)?);
    }
    let count = operators.len();
    MeasurementBasis::from_parts(n, operators, vec![false; count], vec![None; count])
}

/// Synthesize a complete annotated basis for a channel.
///
/// The faithful operators come from the given recovery unitaries via
/// [`synthesize_faithful`]. The orthogonal complement is completed in the
/// channel's diagonal picture (transforming with the local unitaries from
/// the Schmidt form, with the input-particle transform taken equal to the
/// receiver-side one) and transformed back, which reproduces the familiar
/// structured complement for diagonal channels and its rotated image
/// otherwise. Every operator is then annotated with its recovery, if any.
pub fn synthesize_basis(
    channel: &QuantumChannel,
    unitaries: &[RecoveryUnitary],
) -> Result<MeasurementBasis> {
    let n = channel.n();
    let faithful: Result<Vec<MeasurementOperator>> = unitaries
        .iter()
        .map(|u| synthesize_faithful(channel, u))
        .collect();
    let faithful = faithful?;

    let schmidt = channel.schmidt_decompose()?;
    let to_diagonal: Result<Vec<MeasurementOperator>> = faithful
        .iter()
        .map(|op| transform_to_diagonal_picture(op, &schmidt))
        .collect();
    let diagonal_basis = complete_basis(n, &to_diagonal?)?;

    let mut operators = faithful;
    for op in diagonal_basis.operators().iter().skip(operators.len()) {
        operators.push(transform_from_diagonal_picture(op, &schmidt)?);
    }

    let count = operators.len();
    let mut basis =
        MeasurementBasis::from_parts(n, operators, vec![false; count], vec![None; count])?;
    basis.annotate(channel)?;
    Ok(basis)
}

/// The conventional recovery pair for a channel: the identity plus the
/// quarter turn conjugated into the channel's diagonal picture
/// (`u_b†·[[0,1],[-1,0]]·u_b`), which keeps the two synthesized operators
/// orthogonal for every invertible channel. For real channels whose
/// receiver-side transform is a plane rotation this is exactly
/// `[[0, 1], [-1, 0]]`. Dimensions other than 2 get the identity alone.
pub fn default_recovery_unitaries(channel: &QuantumChannel) -> Result<Vec<RecoveryUnitary>> {
    let n = channel.n();
    if n != 2 {
        return Ok(vec![RecoveryUnitary::identity(n)]);
    }
    let schmidt = channel.schmidt_decompose()?;
    let second = schmidt
        .u_b
        .adjoint()
        .matmul(RecoveryUnitary::quarter_turn().matrix())?
        .matmul(&schmidt.u_b)?;
    Ok(vec![
        RecoveryUnitary::identity(2),
        RecoveryUnitary::new(second)?,
    ])
}

fn transform_to_diagonal_picture(
    op: &MeasurementOperator,
    schmidt: &SchmidtForm,
) -> Result<MeasurementOperator> {
    let d = schmidt
        .u_a
        .matmul(op.matrix())?
        .matmul(&schmidt.u_b.transpose())?;
    MeasurementOperator::new(d)
}

fn transform_from_diagonal_picture(
    op: &MeasurementOperator,
    schmidt: &SchmidtForm,
) -> Result<MeasurementOperator> {
    let d = schmidt
        .u_a
        .adjoint()
        .matmul(op.matrix())?
        .matmul(&schmidt.u_b.conj())?;
    MeasurementOperator::new(d)
}

fn validate_orthonormal(operators: &[MeasurementOperator], tol: f64) -> Result<()> {
    for i in 0..operators.len() {
        for j in 0..=i {
            let overlap = operator_overlap(&operators[i], &operators[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            let deviation = (overlap - Complex64::new(target, 0.0)).norm();
            if deviation > tol {
                return Err(Error::NotOrthonormal { i, j, deviation });
            }
        }
    }
    Ok(())
}
