//! Protocol execution and the independent brute-force oracle.
//!
//! The fast path sends the input through `L = Qᵀ·D*` acting on the input
//! particle alone. The oracle assembles the full three-particle system
//! (ordering: shared particle ⊗ input particle ⊗ receiver particle, so
//! the measured pair occupies the leading block) and projects on the
//! measurement vector by direct index summation; the two must agree to
//! machine-level accuracy.
//!
//! Faithfulness of an outcome is decided numerically: the condition must
//! hold for every input, so each operator is probed with a batch of
//! pseudo-random states from a fixed-seed generator, making
//! state-dependent coincidences vanishingly unlikely.
//!
//! No recovery-independent fidelity measure is given for the unfaithful
//! branches by the underlying analysis; this module adopts the Uhlmann
//! form for mixed pairs, which reduces to the squared overlap when either
//! argument is pure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::measurement::{
    extract_recovery, MeasurementBasis, MeasurementOperator, RecoveryUnitary,
};
use crate::numerics::{Complex64, ComplexMatrix, DEFAULT_TOL};

/// Probabilities below this floor cannot produce a normalized
/// post-measurement state.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

/// Default seed for the probe-state generator.
pub const DEFAULT_SEED: u64 = 42;

/// Default number of probe states used for the state-independence check.
pub const DEFAULT_PROBES: usize = 20;

/// Pure state of the input particle: a normalized amplitude vector.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

/// Mixed state of the input particle: Hermitian, unit-trace, positive
/// semidefinite within tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

/// Input (or output) state in either representation.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

/// Per-outcome record of one protocol run.
#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub index: usize,
    pub probability: f64,
    /// Post-recovery state; `None` when the projection annihilated the
    /// input (the probability is still reported so totals stay exact).
    pub recovered: Option<QuantumState>,
    /// Fidelity of the recovered state against the given input
    /// (0 when no normalized output exists).
    pub fidelity: f64,
    /// Worst fidelity over the probe batch with the extracted recovery
    /// applied; this is what decides the faithful flag.
    pub min_probe_fidelity: f64,
    pub faithful: bool,
    pub recovery: Option<RecoveryUnitary>,
}

/// Full protocol report over a complete measurement basis.
#[derive(Debug, Clone)]
pub struct TeleportationReport {
    pub outcomes: Vec<OutcomeRecord>,
    pub total_faithful_probability: f64,
}

/// Knobs for [`run_protocol_with`]; the defaults give the deterministic
/// behavior used everywhere else.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub seed: u64,
    pub probes: usize,
    pub faithful_tol: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            probes: DEFAULT_PROBES,
            faithful_tol: DEFAULT_TOL,
        }
    }
}

impl PureState {
    /// Validate normalization within `1e-9`, then renormalize exactly.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!(
                "squared amplitudes sum to {norm_sq} instead of 1"
            )));
        }
        let norm = norm_sq.sqrt();
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    fn from_normalized(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis_state(n: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Density-matrix form `|c⟩⟨c|`.
    pub fn to_density(&self) -> DensityMatrix {
        let n = self.n();
        let mut rho = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                rho.set(i, j, self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        DensityMatrix { rho }
    }
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace, and positivity within `1e-9`.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        if !rho.is_finite() {
            return Err(Error::InvalidState("non-finite density entry".into()));
        }
        if !rho.is_hermitian(DEFAULT_TOL) {
            return Err(Error::InvalidState(
                "density matrix is not Hermitian".into(),
            ));
        }
        let trace = rho.trace().expect("square").re;
        if (trace - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidState(format!(
                "trace is {trace} instead of 1"
            )));
        }
        let eig = rho.hermitian_eig()?;
        if let Some(&smallest) = eig
            .eigenvalues
            .iter()
            .min_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"))
        {
            if smallest < -DEFAULT_TOL {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {smallest}"
                )));
            }
        }
        Ok(Self {
            rho: rho.scale(Complex64::new(1.0 / trace, 0.0)),
        })
    }

    fn from_valid(rho: ComplexMatrix) -> Self {
        Self { rho }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(n).scale(Complex64::new(1.0 / n as f64, 0.0)),
        }
    }

    pub fn n(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }
}

impl QuantumState {
    pub fn n(&self) -> usize {
        match self {
            QuantumState::Pure(c) => c.n(),
            QuantumState::Mixed(rho) => rho.n(),
        }
    }
}

/// Receiver-side state after outcome `op` on a pure input:
/// unnormalized `w = Qᵀ·D*·c`, probability `‖w‖²`, state `w/‖w‖`.
pub fn bob_state_pure(
    channel: &QuantumChannel,
    op: &MeasurementOperator,
    input: &PureState,
) -> Result<(f64, PureState)> {
    check_dims(channel, op.n(), input.n())?;
    let l = transfer_matrix(channel, op)?;
    let w = l.matvec(input.amplitudes())?;
    let p: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if p < PROBABILITY_FLOOR {
        return Err(Error::ZeroProbability { p });
    }
    let norm = p.sqrt();
    let amplitudes = w.into_iter().map(|z| z / norm).collect();
    Ok((p, PureState::from_normalized(amplitudes)))
}

/// Receiver-side state after outcome `op` on a mixed input:
/// `ϱ = L·ρ·L†`, probability `Tr(ϱ)`, state `ϱ/Tr(ϱ)`.
pub fn bob_state_mixed(
    channel: &QuantumChannel,
    op: &MeasurementOperator,
    input: &DensityMatrix,
) -> Result<(f64, DensityMatrix)> {
    check_dims(channel, op.n(), input.n())?;
    let l = transfer_matrix(channel, op)?;
    let unnormalized = l.matmul(input.rho())?.matmul(&l.adjoint())?;
    let p = unnormalized.trace().expect("square").re;
    if p < PROBABILITY_FLOOR {
        return Err(Error::ZeroProbability { p });
    }
    let rho = unnormalized.scale(Complex64::new(1.0 / p, 0.0));
    Ok((p, DensityMatrix::from_valid(rho)))
}

/// `L = Qᵀ·D*`, the map the protocol applies to the input particle.
fn transfer_matrix(channel: &QuantumChannel, op: &MeasurementOperator) -> Result<ComplexMatrix> {
    channel
        .coefficients()
        .transpose()
        .matmul(&op.matrix().conj())
}

fn check_dims(channel: &QuantumChannel, op_n: usize, state_n: usize) -> Result<()> {
    if op_n != channel.n() || state_n != channel.n() {
        return Err(Error::ShapeMismatch {
            op: "teleportation step",
            left_rows: channel.n(),
            left_cols: op_n,
            right_rows: state_n,
            right_cols: 1,
        });
    }
    Ok(())
}

/// Fidelity between two states, in [0, 1].
///
/// Pure/pure pairs use the squared overlap `|⟨a|b⟩|²`; when one argument
/// is mixed the overlap form `⟨a|ρ|a⟩` applies; mixed/mixed pairs use the
/// Uhlmann form `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> f64 {
    let value = match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => {
            let overlap: Complex64 = x
                .amplitudes()
                .iter()
                .zip(y.amplitudes())
                .map(|(p, q)| p.conj() * q)
                .sum();
            overlap.norm_sqr()
        }
        (QuantumState::Pure(x), QuantumState::Mixed(rho))
        | (QuantumState::Mixed(rho), QuantumState::Pure(x)) => {
            let v = rho
                .rho()
                .matvec(x.amplitudes())
                .expect("dimensions checked by callers");
            x.amplitudes()
                .iter()
                .zip(&v)
                .map(|(p, q)| (p.conj() * q).re)
                .sum()
        }
        (QuantumState::Mixed(rho), QuantumState::Mixed(sigma)) => {
            mixed_fidelity(rho.rho(), sigma.rho())
        }
    };
    value.clamp(0.0, 1.0)
}

/// Purity-aware Uhlmann form: a (near-)pure argument is reduced to the
/// overlap expression through its principal eigenvector, which avoids the
/// √ε noise amplification of the general formula on rank-deficient
/// inputs; genuinely mixed pairs take the full `(Tr √(√ρ σ √ρ))²` route.
fn mixed_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    if let Some(x) = principal_pure_component(rho) {
        return expectation(sigma, &x);
    }
    if let Some(y) = principal_pure_component(sigma) {
        return expectation(rho, &y);
    }
    let sqrt_rho = sqrt_psd(rho);
    let inner = sqrt_rho
        .matmul(sigma)
        .expect("square")
        .matmul(&sqrt_rho)
        .expect("square");
    let eig = inner.hermitian_eig().expect("square");
    let floor = 1e-14 * eig.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let trace_sqrt: f64 = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > floor { l.sqrt() } else { 0.0 })
        .sum();
    trace_sqrt * trace_sqrt
}

/// The dominant eigenvector when the state is pure within tolerance
/// (largest eigenvalue ≥ 1 − 1e-9; the spectrum sums to one).
fn principal_pure_component(rho: &ComplexMatrix) -> Option<Vec<Complex64>> {
    let eig = rho.hermitian_eig().expect("square");
    if eig.eigenvalues.first().copied()? >= 1.0 - DEFAULT_TOL {
        let n = rho.rows();
        Some((0..n).map(|i| eig.vectors.get(i, 0)).collect())
    } else {
        None
    }
}

/// `⟨x|M|x⟩` for a Hermitian matrix.
fn expectation(m: &ComplexMatrix, x: &[Complex64]) -> f64 {
    let v = m.matvec(x).expect("dimensions agree");
    x.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Principal square root of a positive semidefinite Hermitian matrix,
/// clamping roundoff-negative eigenvalues to zero.
fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = m.hermitian_eig().expect("square");
    let sqrt_vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    eig.vectors
        .matmul(&ComplexMatrix::diagonal_real(&sqrt_vals))
        .expect("square")
        .matmul(&eig.vectors.adjoint())
        .expect("square")
}

/// Assemble the full three-particle system in the ordering
/// shared ⊗ input ⊗ receiver, index `(i·N + k)·N + j`. The result is
/// normalized; mixed inputs produce an N³×N³ density matrix.
pub fn assemble_tripartite(channel: &QuantumChannel, input: &QuantumState) -> Result<QuantumState> {
    let n = channel.n();
    if input.n() != n {
        return Err(Error::ShapeMismatch {
            op: "assemble_tripartite",
            left_rows: n,
            left_cols: n,
            right_rows: input.n(),
            right_cols: 1,
        });
    }
    let q = channel.coefficients();
    match input {
        QuantumState::Pure(c) => {
            let mut amplitudes = vec![Complex64::new(0.0, 0.0); n * n * n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        amplitudes[(i * n + k) * n + j] = q.get(i, j) * c.amplitudes()[k];
                    }
                }
            }
            Ok(QuantumState::Pure(PureState::from_normalized(amplitudes)))
        }
        QuantumState::Mixed(rho) => {
            let dim = n * n * n;
            let mut out = ComplexMatrix::zeros(dim, dim);
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        let row = (i * n + k) * n + j;
                        for i2 in 0..n {
                            for k2 in 0..n {
                                for j2 in 0..n {
                                    let col = (i2 * n + k2) * n + j2;
                                    let value =
                                        q.get(i, j) * q.get(i2, j2).conj() * rho.rho().get(k, k2);
                                    out.set(row, col, value);
                                }
                            }
                        }
                    }
                }
            }
            Ok(QuantumState::Mixed(DensityMatrix::from_valid(out)))
        }
    }
}

/// Brute-force projection of the assembled system on one measurement
/// vector, by direct index summation (independent of the fast path).
/// Returns the outcome probability and, when it clears the floor, the
/// normalized receiver-side state.
pub fn project_tripartite(
    tripartite: &QuantumState,
    op: &MeasurementOperator,
    n: usize,
) -> Result<(f64, Option<QuantumState>)> {
    if op.n() != n || tripartite.n() != n * n * n {
        return Err(Error::ShapeMismatch {
            op: "project_tripartite",
            left_rows: n * n * n,
            left_cols: 1,
            right_rows: tripartite.n(),
            right_cols: op.n(),
        });
    }
    let d = op.matrix();
    match tripartite {
        QuantumState::Pure(full) => {
            let mut receiver = vec![Complex64::new(0.0, 0.0); n];
            for (j, slot) in receiver.iter_mut().enumerate() {
                let mut sum = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for k in 0..n {
                        sum += d.get(i, k).conj() * full.amplitudes()[(i * n + k) * n + j];
                    }
                }
                *slot = sum;
            }
            let p: f64 = receiver.iter().map(|z| z.norm_sqr()).sum();
            if p < PROBABILITY_FLOOR {
                return Ok((p, None));
            }
            let norm = p.sqrt();
            let amplitudes = receiver.into_iter().map(|z| z / norm).collect();
            Ok((
                p,
                Some(QuantumState::Pure(PureState::from_normalized(amplitudes))),
            ))
        }
        QuantumState::Mixed(full) => {
            let mut out = ComplexMatrix::zeros(n, n);
            for j in 0..n {
                for j2 in 0..n {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        for k in 0..n {
                            for i2 in 0..n {
                                for k2 in 0..n {
                                    sum += d.get(i, k).conj()
                                        * d.get(i2, k2)
                                        * full
                                            .rho()
                                            .get((i * n + k) * n + j, (i2 * n + k2) * n + j2);
                                }
                            }
                        }
                    }
                    out.set(j, j2, sum);
                }
            }
            let p = out.trace().expect("square").re;
            if p < PROBABILITY_FLOOR {
                return Ok((p, None));
            }
            let rho = out.scale(Complex64::new(1.0 / p, 0.0));
            Ok((p, Some(QuantumState::Mixed(DensityMatrix::from_valid(rho)))))
        }
    }
}

/// Run the full protocol over a complete basis with default settings.
pub fn run_protocol(
    channel: &QuantumChannel,
    basis: &MeasurementBasis,
    input: &QuantumState,
) -> Result<TeleportationReport> {
    run_protocol_with(channel, basis, input, &SimulationConfig::default())
}

/// Run the full protocol: for every outcome, compute the probability and
/// recovered state for the given input, and decide faithfulness by
/// probing the operator with `config.probes` pseudo-random pure states.
/// Outcomes are evaluated in index order; the run is deterministic for a
/// fixed `(input, seed)`.
pub fn run_protocol_with(
    channel: &QuantumChannel,
    basis: &MeasurementBasis,
    input: &QuantumState,
    config: &SimulationConfig,
) -> Result<TeleportationReport> {
    let n = channel.n();
    if basis.n() != n || input.n() != n {
        return Err(Error::ShapeMismatch {
            op: "run_protocol",
            left_rows: n,
            left_cols: basis.n(),
            right_rows: input.n(),
            right_cols: 1,
        });
    }

    let mut outcomes = Vec::with_capacity(basis.len());
    let mut total_faithful = 0.0;
    for (index, op) in basis.operators().iter().enumerate() {
        let recovery = extract_recovery(channel, op)?;
        let recovery_matrix = recovery
            .as_ref()
            .map(|u| u.matrix().clone())
            .unwrap_or_else(|| ComplexMatrix::identity(n));

        let min_probe_fidelity = probe_min_fidelity(channel, op, &recovery_matrix, config);
        let faithful = recovery.is_some() && min_probe_fidelity >= 1.0 - config.faithful_tol;

        let (probability, recovered) = match input {
            QuantumState::Pure(c) => match bob_state_pure(channel, op, c) {
                Ok((p, state)) => {
                    let rotated = recovery_matrix
                        .matvec(state.amplitudes())
                        .expect("dimensions agree");
                    (
                        p,
                        Some(QuantumState::Pure(PureState::from_normalized(rotated))),
                    )
                }
                Err(Error::ZeroProbability { p }) => (p, None),
                Err(e) => return Err(e),
            },
            QuantumState::Mixed(rho) => match bob_state_mixed(channel, op, rho) {
                Ok((p, state)) => {
                    let rotated = recovery_matrix
                        .matmul(state.rho())
                        .expect("square")
                        .matmul(&recovery_matrix.adjoint())
                        .expect("square");
                    (
                        p,
                        Some(QuantumState::Mixed(DensityMatrix::from_valid(rotated))),
                    )
                }
                Err(Error::ZeroProbability { p }) => (p, None),
                Err(e) => return Err(e),
            },
        };

        let fidelity_vs_input = recovered
            .as_ref()
            .map(|state| fidelity(input, state))
            .unwrap_or(0.0);
        if faithful {
            total_faithful += probability;
        }
        outcomes.push(OutcomeRecord {
            index,
            probability,
            recovered,
            fidelity: fidelity_vs_input,
            min_probe_fidelity,
            faithful,
            recovery,
        });
    }

    Ok(TeleportationReport {
        outcomes,
        total_faithful_probability: total_faithful,
    })
}

/// Worst-case fidelity of `op` with `recovery` applied, over the probe
/// batch. Every outcome probes the same fixed-seed batch so reports are
/// comparable across outcomes and runs.
fn probe_min_fidelity(
    channel: &QuantumChannel,
    op: &MeasurementOperator,
    recovery: &ComplexMatrix,
    config: &SimulationConfig,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = channel.n();
    let mut min_fidelity: f64 = 1.0;
    for _ in 0..config.probes.max(1) {
        let probe = random_pure_state(n, &mut rng);
        match bob_state_pure(channel, op, &probe) {
            Ok((_, state)) => {
                let rotated = recovery
                    .matvec(state.amplitudes())
                    .expect("dimensions agree");
                let overlap: Complex64 = probe
                    .amplitudes()
                    .iter()
                    .zip(&rotated)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                min_fidelity = min_fidelity.min(overlap.norm_sqr());
            }
            Err(_) => return 0.0,
        }
    }
    min_fidelity
}

/// Pseudo-random normalized state with independent uniform components.
pub fn random_pure_state(n: usize, rng: &mut impl Rng) -> PureState {
    loop {
        let amplitudes: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq > 1e-6 {
            let norm = norm_sq.sqrt();
            return PureState::from_normalized(amplitudes.into_iter().map(|z| z / norm).collect());
        }
    }
}

/// Pseudo-random full-rank density matrix `A·A† / Tr(A·A†)`.
pub fn random_density_matrix(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let data: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let a = ComplexMatrix::new(n, n, data).expect("length matches");
    let product = a.matmul(&a.adjoint()).expect("square");
    let trace = product.trace().expect("square").re;
    DensityMatrix::from_valid(product.scale(Complex64::new(1.0 / trace, 0.0)))
}

impl TeleportationReport {
    pub fn faithful_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.faithful).count()
    }

    pub fn probability_sum(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }
}
