//! The shared entangled resource and its derived quantities.
//!
//! A channel is the N×N coefficient matrix of the bipartite pure state
//! shared by the two parties: row index = sender's particle, column
//! index = receiver's particle. The matrix is normalized so its squared
//! entries sum to one.

use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, SINGULARITY_CUTOFF};

/// Tolerance accepted on the squared-entry sum before renormalization.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Coefficient matrix of the shared entangled pair.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    n: usize,
    coefficients: ComplexMatrix,
}

/// Diagonal form of a channel: non-negative coefficients plus the local
/// unitaries that realize `u_a · Q · u_bᵀ = diag(coefficients)`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub u_a: ComplexMatrix,
    pub u_b: ComplexMatrix,
}

impl QuantumChannel {
    /// Validate and build a channel. The coefficient matrix must be
    /// square with N ≥ 2, finite, and normalized within `1e-9`; it is
    /// then renormalized exactly so downstream identities hold tightly.
    pub fn new(coefficients: ComplexMatrix) -> Result<Self> {
        if !coefficients.is_square() {
            return Err(Error::InvalidChannel(format!(
                "coefficient matrix must be square, got {}x{}",
                coefficients.rows(),
                coefficients.cols()
            )));
        }
        let n = coefficients.rows();
        if n < 2 {
            return Err(Error::InvalidChannel(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if !coefficients.is_finite() {
            return Err(Error::InvalidChannel("non-finite entry".into()));
        }
        let norm = coefficients.frobenius_norm();
        if (norm * norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidChannel(format!(
                "squared entries sum to {} instead of 1",
                norm * norm
            )));
        }
        let coefficients = coefficients.scale(Complex64::new(1.0 / norm, 0.0));
        Ok(Self { n, coefficients })
    }

    /// Diagonal channel with the given real coefficients (normalized on
    /// construction).
    pub fn from_schmidt_coefficients(coefficients: &[f64]) -> Result<Self> {
        let norm = coefficients.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidChannel("all coefficients are zero".into()));
        }
        let scaled: Vec<f64> = coefficients.iter().map(|x| x / norm).collect();
        Self::new(ComplexMatrix::diagonal_real(&scaled))
    }

    /// Maximally entangled channel of dimension `n`: coefficients
    /// `I / sqrt(n)`.
    pub fn maximally_entangled(n: usize) -> Self {
        let m = ComplexMatrix::identity(n).scale(Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        Self::new(m).expect("identity scaled to unit norm is a valid channel")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &ComplexMatrix {
        &self.coefficients
    }

    /// Reduced density matrix of the sender's particle, `Q·Q†`.
    /// Hermitian, positive semidefinite, unit trace.
    pub fn reduced_density(&self) -> ComplexMatrix {
        self.coefficients
            .matmul(&self.coefficients.adjoint())
            .expect("square by construction")
    }

    /// Probability of faithful teleportation per matching outcome:
    /// the reciprocal of the trace of the inverse reduced density matrix.
    ///
    /// Fails with [`Error::Singular`] when a Schmidt coefficient vanishes;
    /// the matching condition is undefined there and the probability
    /// tends to zero.
    pub fn faithful_probability(&self) -> Result<f64> {
        self.check_invertible()?;
        let inv = self.reduced_density().inverse()?;
        let tr = inv.trace().expect("square").re;
        Ok(1.0 / tr)
    }

    /// Error unless all singular values clear the relative cutoff.
    pub fn check_invertible(&self) -> Result<()> {
        let svd = self.coefficients.svd()?;
        let largest = svd.singular_values[0];
        let smallest = svd.singular_values[self.n - 1];
        if smallest <= SINGULARITY_CUTOFF * largest {
            return Err(Error::Singular {
                cutoff: SINGULARITY_CUTOFF,
            });
        }
        Ok(())
    }

    /// Diagonalize the channel with local unitaries.
    ///
    /// A matrix that is already diagonal with non-negative real entries
    /// is returned as-is with identity transforms (coefficients in their
    /// stored order); otherwise the SVD supplies the transforms and the
    /// coefficients come out sorted in descending order.
    pub fn schmidt_decompose(&self) -> Result<SchmidtForm> {
        if let Some(diag) = self.nonnegative_diagonal() {
            return Ok(SchmidtForm {
                coefficients: diag,
                u_a: ComplexMatrix::identity(self.n),
                u_b: ComplexMatrix::identity(self.n),
            });
        }
        let svd = self.coefficients.svd()?;
        Ok(SchmidtForm {
            coefficients: svd.singular_values,
            u_a: svd.left.adjoint(),
            u_b: svd.right.transpose(),
        })
    }

    fn nonnegative_diagonal(&self) -> Option<Vec<f64>> {
        let mut diag = Vec::with_capacity(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.coefficients.get(i, j);
                if i == j {
                    if v.im != 0.0 || v.re < 0.0 {
                        return None;
                    }
                    diag.push(v.re);
                } else if v != Complex64::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        Some(diag)
    }

    /// Von-Neumann entropy of the reduced density matrix in nats, with
    /// the convention 0·ln 0 = 0. Ranges over [0, ln N].
    pub fn entanglement_entropy(&self) -> f64 {
        let eig = self
            .reduced_density()
            .hermitian_eig()
            .expect("square by construction");
        eig.eigenvalues
            .iter()
            .map(|&lambda| {
                if lambda > 0.0 {
                    -lambda * lambda.ln()
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// True iff the reduced density matrix is `I/N` within `tol` entry-wise.
    pub fn is_maximally_entangled(&self, tol: f64) -> bool {
        let target =
            ComplexMatrix::identity(self.n).scale(Complex64::new(1.0 / self.n as f64, 0.0));
        self.reduced_density().max_abs_diff(&target) <= tol
    }
}

impl SchmidtForm {
    /// Residual of the diagonalization `u_a · Q · u_bᵀ − diag(coefficients)`.
    pub fn diagonalization_residual(&self, channel: &QuantumChannel) -> f64 {
        let transformed = self
            .u_a
            .matmul(channel.coefficients())
            .expect("square")
            .matmul(&self.u_b.transpose())
            .expect("square");
        transformed.max_abs_diff(&ComplexMatrix::diagonal_real(&self.coefficients))
    }

    /// True when every coefficient clears the singularity cutoff.
    pub fn is_invertible(&self) -> bool {
        let largest = self.coefficients.iter().cloned().fold(0.0_f64, f64::max);
        self.coefficients
            .iter()
            .all(|&c| c > SINGULARITY_CUTOFF * largest)
    }
}

/// Shared helper: validity check used by tests and callers that accept a
/// tolerance other than the default.
pub fn unit_norm_deviation(m: &ComplexMatrix) -> f64 {
    (m.frobenius_norm().powi(2) - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rotated_channel() -> QuantumChannel {
        QuantumChannel::new(
            ComplexMatrix::from_real_rows(&[vec![-0.1, -0.7], vec![0.7, 0.1]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn construction_validates_normalization() {
        let bad = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            QuantumChannel::new(bad),
            Err(Error::InvalidChannel(_))
        ));
        let ok = QuantumChannel::from_schmidt_coefficients(&[0.6, 0.8]).unwrap();
        assert!(unit_norm_deviation(ok.coefficients()) < 1e-15);
    }

    #[test]
    fn reduced_density_of_maximally_entangled() {
        let ch = QuantumChannel::maximally_entangled(2);
        let rho = ch.reduced_density();
        let expected = ComplexMatrix::diagonal_real(&[0.5, 0.5]);
        assert!(rho.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn reduced_density_of_diagonal_channel() {
        let ch = QuantumChannel::from_schmidt_coefficients(&[0.6, 0.8]).unwrap();
        let rho = ch.reduced_density();
        let expected = ComplexMatrix::diagonal_real(&[0.36, 0.64]);
        assert!(rho.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn reduced_density_of_rotated_channel() {
        let rho = rotated_channel().reduced_density();
        // Hand-multiplied Q·Q† for [[-0.1,-0.7],[0.7,0.1]].
        let expected =
            ComplexMatrix::from_real_rows(&[vec![0.5, -0.14], vec![-0.14, 0.5]]).unwrap();
        assert!(rho.max_abs_diff(&expected) < 1e-12);
        assert!(rho.is_hermitian(1e-12));
        assert!((rho.trace().unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn faithful_probability_examples() {
        let bell = QuantumChannel::maximally_entangled(2);
        assert!((bell.faithful_probability().unwrap() - 0.25).abs() < 1e-12);

        let diag = QuantumChannel::from_schmidt_coefficients(&[0.6, 0.8]).unwrap();
        assert!((diag.faithful_probability().unwrap() - 0.2304).abs() < 1e-12);

        // Invariant under the local rotation that produced the rotated form.
        let rotated = rotated_channel();
        assert!((rotated.faithful_probability().unwrap() - 0.2304).abs() < 1e-10);
    }

    #[test]
    fn faithful_probability_of_singular_channel_errors() {
        let ch = QuantumChannel::from_schmidt_coefficients(&[1.0, 0.0]).unwrap();
        assert!(matches!(
            ch.faithful_probability(),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn faithful_probability_closed_form_matches_trace_formula() {
        // For N = 2 with Schmidt coefficients (a, b): p = (a·b)².
        for (a, b) in [
            (0.6, 0.8),
            (0.3, (1.0f64 - 0.09).sqrt()),
            (0.99, (1.0f64 - 0.9801).sqrt()),
        ] {
            let ch = QuantumChannel::from_schmidt_coefficients(&[a, b]).unwrap();
            let p = ch.faithful_probability().unwrap();
            assert!((p - (a * b).powi(2)).abs() < 1e-12, "a={a} b={b}");
        }
    }

    #[test]
    fn schmidt_decompose_diagonal_returns_identity_transforms() {
        let ch = QuantumChannel::from_schmidt_coefficients(&[0.6, 0.8]).unwrap();
        let schmidt = ch.schmidt_decompose().unwrap();
        assert_eq!(schmidt.coefficients.len(), 2);
        assert!((schmidt.coefficients[0] - 0.6).abs() < 1e-12);
        assert!((schmidt.coefficients[1] - 0.8).abs() < 1e-12);
        assert!(schmidt.u_a.max_abs_diff(&ComplexMatrix::identity(2)) == 0.0);
        assert!(schmidt.u_b.max_abs_diff(&ComplexMatrix::identity(2)) == 0.0);
    }

    #[test]
    fn schmidt_decompose_rotated_channel() {
        let schmidt = rotated_channel().schmidt_decompose().unwrap();
        assert!((schmidt.coefficients[0] - 0.8).abs() < 1e-10);
        assert!((schmidt.coefficients[1] - 0.6).abs() < 1e-10);
        assert!(schmidt.diagonalization_residual(&rotated_channel()) < 1e-10);
        assert!(schmidt.u_a.is_unitary(1e-10));
        assert!(schmidt.u_b.is_unitary(1e-10));
    }

    #[test]
    fn schmidt_decompose_recovers_planted_coefficients() {
        // Rotate diag(0.6, 0.8) by fixed complex unitaries and decompose.
        let phase = |x: f64| Complex64::from_polar(1.0, x);
        let u = ComplexMatrix::from_rows(&[
            vec![phase(0.3).scale(0.6), phase(1.1).scale(0.8)],
            vec![phase(-1.1).scale(-0.8), phase(-0.3).scale(0.6)],
        ])
        .unwrap();
        let v = ComplexMatrix::from_rows(&[
            vec![phase(-0.7).scale(0.28), phase(0.2).scale(0.96)],
            vec![phase(-0.2).scale(-0.96), phase(0.7).scale(0.28)],
        ])
        .unwrap();
        assert!(u.is_unitary(1e-12) && v.is_unitary(1e-12));
        let diag = ComplexMatrix::diagonal_real(&[0.6, 0.8]);
        let q = u.matmul(&diag).unwrap().matmul(&v.transpose()).unwrap();
        let ch = QuantumChannel::new(q).unwrap();
        let schmidt = ch.schmidt_decompose().unwrap();
        assert!((schmidt.coefficients[0] - 0.8).abs() < 1e-10);
        assert!((schmidt.coefficients[1] - 0.6).abs() < 1e-10);
        assert!(schmidt.diagonalization_residual(&ch) < 1e-9);
    }

    #[test]
    fn entropy_examples() {
        let product = QuantumChannel::from_schmidt_coefficients(&[1.0, 0.0]).unwrap();
        assert!(product.entanglement_entropy().abs() < 1e-12);

        let bell = QuantumChannel::maximally_entangled(2);
        assert!((bell.entanglement_entropy() - std::f64::consts::LN_2).abs() < 1e-12);

        let diag = QuantumChannel::from_schmidt_coefficients(&[0.6, 0.8]).unwrap();
        let expected = -(0.36f64 * 0.36f64.ln() + 0.64 * 0.64f64.ln());
        assert!((diag.entanglement_entropy() - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounds() {
        for n in 2..=3 {
            let bell = QuantumChannel::maximally_entangled(n);
            let e = bell.entanglement_entropy();
            assert!(e >= 0.0 && e <= (n as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn maximal_entanglement_checks() {
        assert!(QuantumChannel::maximally_entangled(2).is_maximally_entangled(1e-9));
        let diag = QuantumChannel::from_schmidt_coefficients(&[0.6, 0.8]).unwrap();
        assert!(!diag.is_maximally_entangled(1e-9));

        // A Bell channel rotated by local unitaries stays maximally entangled.
        let s = 1.0 / 2.0f64.sqrt();
        let u = ComplexMatrix::from_rows(&[vec![c(s, 0.0), c(0.0, s)], vec![c(0.0, s), c(s, 0.0)]])
            .unwrap();
        assert!(u.is_unitary(1e-12));
        let bell = QuantumChannel::maximally_entangled(2);
        let q = u
            .matmul(bell.coefficients())
            .unwrap()
            .matmul(&u.transpose())
            .unwrap();
        let rotated = QuantumChannel::new(q).unwrap();
        assert!(rotated.is_maximally_entangled(1e-9));
    }

    #[test]
    fn reduced_density_eigenvalues_match_squared_schmidt_coefficients() {
        let ch = rotated_channel();
        let mut eigs = ch.reduced_density().hermitian_eig().unwrap().eigenvalues;
        let mut squares: Vec<f64> = ch
            .schmidt_decompose()
            .unwrap()
            .coefficients
            .iter()
            .map(|x| x * x)
            .collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        squares.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (e, s) in eigs.iter().zip(squares.iter()) {
            assert!((e - s).abs() < 1e-9);
        }
    }
}
