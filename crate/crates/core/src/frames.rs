//! Local unitary frame changes and invariance verification.
//!
//! Re-expressing the three particles in new orthonormal bases maps the
//! channel to `u_a·Q·u_bᵀ` and each measurement operator to `u_a·D·u_cᵀ`.
//! Outcome probabilities, faithfulness, entanglement entropy, and the
//! faithful count are all preserved; the recovery unitary picks up the
//! receiver-side transform.

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::measurement::{
    extract_recovery, MeasurementBasis, MeasurementOperator, RecoveryUnitary,
};
use crate::numerics::{max_abs_diff_up_to_phase, ComplexMatrix};
use crate::simulator::{run_protocol_with, PureState, QuantumState, SimulationConfig};

/// Unitarity tolerance required of frame matrices.
const FRAME_TOL: f64 = 1e-12;

/// One local basis change per particle. The input-particle transform
/// defaults to the identity in constructors that only touch the shared
/// pair.
#[derive(Debug, Clone)]
pub struct LocalUnitaryFrame {
    u_a: ComplexMatrix,
    u_b: ComplexMatrix,
    u_c: ComplexMatrix,
}

/// Summary of an invariance check between the original and transformed
/// pictures.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub max_probability_deviation: f64,
    pub faithful_flags_equal: bool,
    pub entropy_deviation: f64,
    pub total_probability_deviation: f64,
    /// Worst phase-aligned deviation between the transformed recovery and
    /// the composition of the original recovery with the receiver-side
    /// transform; 0 when no outcome is faithful.
    pub max_recovery_deviation: f64,
}

impl InvarianceReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.faithful_flags_equal
            && self.max_probability_deviation <= tol
            && self.entropy_deviation <= tol
            && self.total_probability_deviation <= tol
            && self.max_recovery_deviation <= tol
    }
}

impl LocalUnitaryFrame {
    /// Build a frame from three unitaries (each checked at `1e-12`).
    pub fn new(u_a: ComplexMatrix, u_b: ComplexMatrix, u_c: ComplexMatrix) -> Result<Self> {
        for (name, m) in [("u_a", &u_a), ("u_b", &u_b), ("u_c", &u_c)] {
            match m.unitarity_deviation() {
                Some(dev) if dev <= FRAME_TOL => {}
                Some(dev) => {
                    return Err(Error::NotUnitary {
                        deviation: dev,
                        tol: FRAME_TOL,
                    })
                }
                None => {
                    return Err(Error::NotSquare {
                        op: "frame unitary",
                        rows: m.rows(),
                        cols: m.cols(),
                    })
                }
            }
            let _ = name;
        }
        if u_a.rows() != u_b.rows() || u_a.rows() != u_c.rows() {
            return Err(Error::ShapeMismatch {
                op: "frame",
                left_rows: u_a.rows(),
                left_cols: u_b.rows(),
                right_rows: u_c.rows(),
                right_cols: u_c.rows(),
            });
        }
        Ok(Self { u_a, u_b, u_c })
    }

    /// Frame with identity transform on the input particle.
    pub fn shared_only(u_a: ComplexMatrix, u_b: ComplexMatrix) -> Result<Self> {
        let n = u_a.rows();
        Self::new(u_a, u_b, ComplexMatrix::identity(n))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            u_a: ComplexMatrix::identity(n),
            u_b: ComplexMatrix::identity(n),
            u_c: ComplexMatrix::identity(n),
        }
    }

    /// Real-rotation frame for the N = 2 real-coefficient workflow:
    /// both parties rotate by plane rotations `[[cos, -sin], [sin, cos]]`,
    /// the input particle is untouched.
    pub fn rotation(theta_a: f64, theta_b: f64) -> Self {
        Self {
            u_a: plane_rotation(theta_a),
            u_b: plane_rotation(theta_b),
            u_c: ComplexMatrix::identity(2),
        }
    }

    pub fn n(&self) -> usize {
        self.u_a.rows()
    }

    pub fn u_a(&self) -> &ComplexMatrix {
        &self.u_a
    }

    pub fn u_b(&self) -> &ComplexMatrix {
        &self.u_b
    }

    pub fn u_c(&self) -> &ComplexMatrix {
        &self.u_c
    }
}

fn plane_rotation(theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real_rows(&[vec![c, -s], vec![s, c]]).expect("static shape")
}

/// Re-express a channel in the new frame: `q' = u_a·Q·u_bᵀ`.
pub fn transform_channel(
    channel: &QuantumChannel,
    frame: &LocalUnitaryFrame,
) -> Result<QuantumChannel> {
    if frame.n() != channel.n() {
        return Err(Error::ShapeMismatch {
            op: "transform_channel",
            left_rows: channel.n(),
            left_cols: channel.n(),
            right_rows: frame.n(),
            right_cols: frame.n(),
        });
    }
    let q = frame
        .u_a
        .matmul(channel.coefficients())?
        .matmul(&frame.u_b.transpose())?;
    QuantumChannel::new(q)
}

/// Re-express a measurement operator: `d' = u_a·D·u_cᵀ`.
pub fn transform_measurement(
    op: &MeasurementOperator,
    frame: &LocalUnitaryFrame,
) -> Result<MeasurementOperator> {
    if frame.n() != op.n() {
        return Err(Error::ShapeMismatch {
            op: "transform_measurement",
            left_rows: op.n(),
            left_cols: op.n(),
            right_rows: frame.n(),
            right_cols: frame.n(),
        });
    }
    let d = frame
        .u_a
        .matmul(op.matrix())?
        .matmul(&frame.u_c.transpose())?;
    MeasurementOperator::new(d)
}

/// Transform every operator of a basis, carrying the faithful flags and
/// composing each recovery with the frame (`u_c·U·u_b†`).
pub fn transform_basis(
    basis: &MeasurementBasis,
    frame: &LocalUnitaryFrame,
) -> Result<MeasurementBasis> {
    let operators: Result<Vec<MeasurementOperator>> = basis
        .operators()
        .iter()
        .map(|op| transform_measurement(op, frame))
        .collect();
    let recoveries: Result<Vec<Option<RecoveryUnitary>>> = basis
        .recoveries()
        .iter()
        .map(|r| match r {
            Some(u) => Ok(Some(RecoveryUnitary::new(compose_recovery(
                u.matrix(),
                frame,
            )?)?)),
            None => Ok(None),
        })
        .collect();
    MeasurementBasis::from_parts(
        basis.n(),
        operators?,
        basis.faithful_flags().to_vec(),
        recoveries?,
    )
}

/// The recovery the receiver applies in the new picture: `u_c·U·u_b†`.
pub fn compose_recovery(u: &ComplexMatrix, frame: &LocalUnitaryFrame) -> Result<ComplexMatrix> {
    frame.u_c.matmul(u)?.matmul(&frame.u_b.adjoint())
}

/// Run the protocol in both pictures and compare everything that should
/// be invariant: per-outcome probabilities, faithful flags, entropy, the
/// total faithful probability, and the recovery composition rule.
pub fn verify_invariance(
    channel: &QuantumChannel,
    basis: &MeasurementBasis,
    frame: &LocalUnitaryFrame,
    input: &PureState,
    config: &SimulationConfig,
) -> Result<InvarianceReport> {
    let transformed_channel = transform_channel(channel, frame)?;
    let transformed_basis = transform_basis(basis, frame)?;
    let transformed_input = PureState::new(frame.u_c.matvec(input.amplitudes())?)?;

    let before = run_protocol_with(channel, basis, &QuantumState::Pure(input.clone()), config)?;
    let after = run_protocol_with(
        &transformed_channel,
        &transformed_basis,
        &QuantumState::Pure(transformed_input),
        config,
    )?;

    let mut max_probability_deviation = 0.0f64;
    let mut faithful_flags_equal = true;
    let mut max_recovery_deviation = 0.0f64;
    for (a, b) in before.outcomes.iter().zip(&after.outcomes) {
        max_probability_deviation =
            max_probability_deviation.max((a.probability - b.probability).abs());
        faithful_flags_equal &= a.faithful == b.faithful;
        if a.faithful && b.faithful {
            let original = a
                .recovery
                .as_ref()
                .expect("faithful outcomes carry a recovery");
            let expected = compose_recovery(original.matrix(), frame)?;
            let transformed = extract_recovery(
                &transformed_channel,
                &transformed_basis.operators()[b.index],
            )?
            .expect("faithful outcomes carry a recovery");
            max_recovery_deviation = max_recovery_deviation
                .max(max_abs_diff_up_to_phase(transformed.matrix(), &expected));
        }
    }

    Ok(InvarianceReport {
        max_probability_deviation,
        faithful_flags_equal,
        entropy_deviation: (channel.entanglement_entropy()
            - transformed_channel.entanglement_entropy())
        .abs(),
        total_probability_deviation: (before.total_faithful_probability
            - after.total_faithful_probability)
            .abs(),
        max_recovery_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::synthesize_basis;
    use crate::numerics::Complex64;
    use crate::simulator::random_pure_state;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rotated_channel() -> QuantumChannel {
        QuantumChannel::new(
            ComplexMatrix::from_real_rows(&[vec![-0.1, -0.7], vec![0.7, 0.1]]).unwrap(),
        )
        .unwrap()
    }

    fn default_basis(ch: &QuantumChannel) -> MeasurementBasis {
        synthesize_basis(
            ch,
            &[
                RecoveryUnitary::identity(2),
                RecoveryUnitary::quarter_turn(),
            ],
        )
        .unwrap()
    }

    /// Random unitary via the left factor of a random matrix's SVD.
    fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let data: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(n, n, data).unwrap().svd().unwrap().left
    }

    #[test]
    fn identity_frame_is_a_noop() {
        let ch = rotated_channel();
        let frame = LocalUnitaryFrame::identity(2);
        let out = transform_channel(&ch, &frame).unwrap();
        assert!(out.coefficients().max_abs_diff(ch.coefficients()) < 1e-15);
    }

    #[test]
    fn plane_rotation_frame_diagonalizes_the_rotated_channel() {
        let ch = rotated_channel();
        let frame =
            LocalUnitaryFrame::rotation(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4);
        let out = transform_channel(&ch, &frame).unwrap();
        // Off-diagonal entries vanish; the diagonal magnitudes are the
        // Schmidt coefficients {0.8, 0.6}.
        assert!(out.coefficients().get(0, 1).norm() < 1e-12);
        assert!(out.coefficients().get(1, 0).norm() < 1e-12);
        let mut mags = [
            out.coefficients().get(0, 0).norm(),
            out.coefficients().get(1, 1).norm(),
        ];
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((mags[0] - 0.8).abs() < 1e-12);
        assert!((mags[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn random_frame_preserves_the_reduced_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = rotated_channel();
        for _ in 0..5 {
            let frame = LocalUnitaryFrame::new(
                random_unitary(2, &mut rng),
                random_unitary(2, &mut rng),
                ComplexMatrix::identity(2),
            )
            .unwrap();
            let out = transform_channel(&ch, &frame).unwrap();
            let before = ch.reduced_density().hermitian_eig().unwrap().eigenvalues;
            let after = out.reduced_density().hermitian_eig().unwrap().eigenvalues;
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn frames_preserve_operator_overlaps() {
        use crate::measurement::operator_overlap;
        let ch = rotated_channel();
        let basis = default_basis(&ch);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame = LocalUnitaryFrame::new(
            random_unitary(2, &mut rng),
            random_unitary(2, &mut rng),
            random_unitary(2, &mut rng),
        )
        .unwrap();
        let transformed = transform_basis(&basis, &frame).unwrap();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let before = operator_overlap(&basis.operators()[i], &basis.operators()[j]);
                let after =
                    operator_overlap(&transformed.operators()[i], &transformed.operators()[j]);
                assert!((before - after).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn invariance_holds_for_the_worked_rotation() {
        let ch = rotated_channel();
        let basis = default_basis(&ch);
        let frame =
            LocalUnitaryFrame::rotation(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let input = random_pure_state(2, &mut rng);
        let report =
            verify_invariance(&ch, &basis, &frame, &input, &SimulationConfig::default()).unwrap();
        assert!(report.holds(1e-9), "{report:?}");
    }

    #[test]
    fn invariance_holds_for_random_frames_with_input_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let ch = rotated_channel();
        let basis = default_basis(&ch);
        for _ in 0..10 {
            let frame = LocalUnitaryFrame::new(
                random_unitary(2, &mut rng),
                random_unitary(2, &mut rng),
                random_unitary(2, &mut rng),
            )
            .unwrap();
            let input = random_pure_state(2, &mut rng);
            let report =
                verify_invariance(&ch, &basis, &frame, &input, &SimulationConfig::default())
                    .unwrap();
            assert!(report.holds(1e-9), "{report:?}");
        }
    }

    #[test]
    fn transformed_recovery_composes_with_the_receiver_transform() {
        // Direct check of the composition rule on the faithful outcomes.
        let ch = rotated_channel();
        let basis = default_basis(&ch);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let frame = LocalUnitaryFrame::shared_only(
            random_unitary(2, &mut rng),
            random_unitary(2, &mut rng),
        )
        .unwrap();
        let transformed_channel = transform_channel(&ch, &frame).unwrap();
        for (op, recovery) in basis.operators().iter().zip(basis.recoveries()) {
            let Some(u) = recovery else { continue };
            let transformed_op = transform_measurement(op, &frame).unwrap();
            let got = extract_recovery(&transformed_channel, &transformed_op)
                .unwrap()
                .expect("faithfulness is frame invariant");
            let want = compose_recovery(u.matrix(), &frame).unwrap();
            assert!(max_abs_diff_up_to_phase(got.matrix(), &want) < 1e-9);
        }
    }

    #[test]
    fn non_unitary_frame_is_rejected() {
        let bad = ComplexMatrix::diagonal_real(&[0.6, 0.8]);
        assert!(matches!(
            LocalUnitaryFrame::shared_only(bad, ComplexMatrix::identity(2)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn rotated_basis_transforms_into_the_diagonal_family() {
        // The diagonalizing frame (with the input particle following the
        // receiver-side rotation) carries the rotated channel's known
        // basis onto the diagonal channel's structured family.
        let ch = rotated_channel();
        let schmidt = ch.schmidt_decompose().unwrap();
        let frame = LocalUnitaryFrame::new(
            schmidt.u_a.clone(),
            schmidt.u_b.clone(),
            schmidt.u_b.clone(),
        )
        .unwrap();

        let rotated_vectors = [
            vec![vec![0.1, -0.7], vec![0.7, -0.1]],
            vec![vec![-0.7, -0.1], vec![-0.1, -0.7]],
            vec![vec![-0.1, 0.7], vec![0.7, -0.1]],
            vec![vec![0.7, 0.1], vec![-0.1, -0.7]],
        ];
        // Diagonal picture: coefficients (0.8, 0.6), so the family is
        // built from sin ↦ 0.6 and cos ↦ 0.8.
        let diagonal_vectors = [
            vec![vec![0.6, 0.0], vec![0.0, 0.8]],
            vec![vec![0.0, -0.6], vec![0.8, 0.0]],
            vec![vec![0.8, 0.0], vec![0.0, -0.6]],
            vec![vec![0.0, 0.8], vec![0.6, 0.0]],
        ];

        for (rotated, _) in rotated_vectors.iter().zip(&diagonal_vectors) {
            let op =
                MeasurementOperator::new(ComplexMatrix::from_real_rows(rotated).unwrap()).unwrap();
            let moved = transform_measurement(&op, &frame).unwrap();
            // Each transformed vector lands on one member of the diagonal
            // family, up to a global sign.
            let matches = diagonal_vectors.iter().any(|target| {
                let target = ComplexMatrix::from_real_rows(target).unwrap();
                max_abs_diff_up_to_phase(moved.matrix(), &target) < 1e-9
            });
            assert!(matches, "transformed vector left the diagonal family");
        }
    }
}
