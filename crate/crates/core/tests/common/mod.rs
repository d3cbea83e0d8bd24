//! Shared generators for the integration suites. Everything is seeded so
//! reruns are bit-identical.
#![allow(dead_code)] // each test target uses its own subset

use qteleport::numerics::{Complex64, ComplexMatrix};
use qteleport::QuantumChannel;
use rand::Rng;

pub fn complex_uniform(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..n * n).map(|_| complex_uniform(rng)).collect();
    ComplexMatrix::new(n, n, data).expect("length matches")
}

/// Random unitary from the left SVD factor of a random matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    random_matrix(n, rng)
        .svd()
        .expect("svd of a random matrix")
        .left
}

/// Random normalized channel, re-drawn until comfortably invertible
/// (smallest singular value at least 5% of the largest).
pub fn random_invertible_channel(n: usize, rng: &mut impl Rng) -> QuantumChannel {
    loop {
        let m = random_matrix(n, rng);
        let norm = m.frobenius_norm();
        let channel = QuantumChannel::new(m.scale(Complex64::new(1.0 / norm, 0.0)))
            .expect("normalized matrix is a valid channel");
        let singular = channel
            .coefficients()
            .svd()
            .expect("svd of a channel")
            .singular_values;
        if singular[n - 1] >= 0.05 * singular[0] {
            return channel;
        }
    }
}

pub fn rotated_channel() -> QuantumChannel {
    QuantumChannel::new(
        ComplexMatrix::from_real_rows(&[vec![-0.1, -0.7], vec![0.7, 0.1]]).expect("static shape"),
    )
    .expect("normalized")
}

pub fn diag_channel(theta: f64) -> QuantumChannel {
    QuantumChannel::from_schmidt_coefficients(&[theta.cos(), theta.sin()])
        .expect("valid coefficients")
}
