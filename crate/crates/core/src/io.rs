//! File schemas for channels, states, bases, frames, reports, and
//! certificates.
//!
//! All complex entries are `[re, im]` pairs; matrices are row-major
//! nested arrays. Channel files put the sender's particle on the row
//! index and the receiver's on the column index. Frame files may omit the
//! input-particle transform, which then defaults to the identity.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::eta_search::{EtaBranch, EtaCertificate, SearchConfig, UnitaryParams};
use crate::frames::LocalUnitaryFrame;
use crate::measurement::{MeasurementBasis, MeasurementOperator, RecoveryUnitary};
use crate::numerics::{Complex64, ComplexMatrix};
use crate::simulator::{DensityMatrix, PureState, QuantumState, TeleportationReport};

pub type ComplexPair = [f64; 2];
pub type MatrixData = Vec<Vec<ComplexPair>>;

/// `{"n": N, "q": N×N array of [re, im]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub n: usize,
    pub q: MatrixData,
}

/// Tagged pure/mixed state:
/// `{"kind": "pure", "amplitudes": [[re, im], ...]}` or
/// `{"kind": "mixed", "rho": N×N array of [re, im]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateFile {
    Pure { amplitudes: Vec<ComplexPair> },
    Mixed { rho: MatrixData },
}

/// Complete basis export: operators plus per-operator flags and optional
/// recovery unitaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisFile {
    pub n: usize,
    pub operators: Vec<MatrixData>,
    pub faithful: Vec<bool>,
    pub recovery: Vec<Option<MatrixData>>,
}

/// Local frame: `{"u_a": ..., "u_b": ..., "u_c": optional}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameFile {
    pub u_a: MatrixData,
    pub u_b: MatrixData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_c: Option<MatrixData>,
}

/// Recovery unitaries fed to basis synthesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitariesFile {
    pub unitaries: Vec<MatrixData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutcomeReportFile {
    pub m: usize,
    pub p_m: f64,
    pub faithful: bool,
    pub fidelity: f64,
    pub fidelity_min_over_probes: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery_unitary: Option<MatrixData>,
}

/// Protocol report export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub outcomes: Vec<OutcomeReportFile>,
    pub total_faithful_probability: f64,
    pub faithful_count: usize,
    pub probability_sum: f64,
}

/// Channel analysis export: derived quantities in one object.
/// `p_max` is null for dimensions where the faithful count has no
/// established bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisFile {
    pub n: usize,
    pub reduced_density: MatrixData,
    pub p: f64,
    pub p_max: Option<f64>,
    pub schmidt_coefficients: Vec<f64>,
    pub entropy_nats: f64,
    pub entropy_bits: f64,
    pub maximally_entangled: bool,
    pub branch: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeFile {
    pub q0: f64,
    pub q1: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitaryParamsFile {
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfigFile {
    pub grid_points: usize,
    pub refine_starts: usize,
    pub refine_iters: usize,
    pub found_tol: f64,
    pub certify_tol: f64,
}

/// Faithful-count certificate export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub shape: ShapeFile,
    pub witness: [UnitaryParamsFile; 2],
    pub grid: GridConfigFile,
    pub samples: usize,
    pub min_violation: f64,
    pub found_third: bool,
    pub eta: usize,
    pub branch: String,
    pub gray_zone: bool,
}

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m.get(i, j).re, m.get(i, j).im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_data(data: &MatrixData) -> Result<ComplexMatrix> {
    let rows = data.len();
    let cols = data.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidMatrix("empty matrix".into()));
    }
    if data.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidMatrix("ragged rows".into()));
    }
    let entries: Vec<Complex64> = data
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    ComplexMatrix::new(rows, cols, entries)
}

impl ChannelFile {
    pub fn from_channel(channel: &QuantumChannel) -> Self {
        Self {
            n: channel.n(),
            q: matrix_to_data(channel.coefficients()),
        }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let m = matrix_from_data(&self.q)?;
        if m.rows() != self.n {
            return Err(Error::InvalidChannel(format!(
                "declared n = {} but the matrix is {}x{}",
                self.n,
                m.rows(),
                m.cols()
            )));
        }
        QuantumChannel::new(m)
    }
}

impl StateFile {
    pub fn from_state(state: &QuantumState) -> Self {
        match state {
            QuantumState::Pure(c) => StateFile::Pure {
                amplitudes: c.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            },
            QuantumState::Mixed(rho) => StateFile::Mixed {
                rho: matrix_to_data(rho.rho()),
            },
        }
    }

    pub fn to_state(&self) -> Result<QuantumState> {
        match self {
            StateFile::Pure { amplitudes } => {
                let v: Vec<Complex64> = amplitudes
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                Ok(QuantumState::Pure(PureState::new(v)?))
            }
            StateFile::Mixed { rho } => Ok(QuantumState::Mixed(DensityMatrix::new(
                matrix_from_data(rho)?,
            )?)),
        }
    }
}

impl BasisFile {
    pub fn from_basis(basis: &MeasurementBasis) -> Self {
        Self {
            n: basis.n(),
            operators: basis
                .operators()
                .iter()
                .map(|op| matrix_to_data(op.matrix()))
                .collect(),
            faithful: basis.faithful_flags().to_vec(),
            recovery: basis
                .recoveries()
                .iter()
                .map(|r| r.as_ref().map(|u| matrix_to_data(u.matrix())))
                .collect(),
        }
    }

    pub fn to_basis(&self) -> Result<MeasurementBasis> {
        let operators: Result<Vec<MeasurementOperator>> = self
            .operators
            .iter()
            .map(|data| MeasurementOperator::new(matrix_from_data(data)?))
            .collect();
        let recoveries: Result<Vec<Option<RecoveryUnitary>>> = self
            .recovery
            .iter()
            .map(|entry| match entry {
                Some(data) => Ok(Some(RecoveryUnitary::new(matrix_from_data(data)?)?)),
                None => Ok(None),
            })
            .collect();
        MeasurementBasis::from_parts(self.n, operators?, self.faithful.clone(), recoveries?)
    }
}

impl FrameFile {
    pub fn from_frame(frame: &LocalUnitaryFrame) -> Self {
        Self {
            u_a: matrix_to_data(frame.u_a()),
            u_b: matrix_to_data(frame.u_b()),
            u_c: Some(matrix_to_data(frame.u_c())),
        }
    }

    pub fn to_frame(&self) -> Result<LocalUnitaryFrame> {
        let u_a = matrix_from_data(&self.u_a)?;
        let u_b = matrix_from_data(&self.u_b)?;
        match &self.u_c {
            Some(data) => LocalUnitaryFrame::new(u_a, u_b, matrix_from_data(data)?),
            None => LocalUnitaryFrame::shared_only(u_a, u_b),
        }
    }
}

impl UnitariesFile {
    pub fn to_unitaries(&self) -> Result<Vec<RecoveryUnitary>> {
        self.unitaries
            .iter()
            .map(|data| RecoveryUnitary::new(matrix_from_data(data)?))
            .collect()
    }
}

impl ReportFile {
    pub fn from_report(report: &TeleportationReport) -> Self {
        Self {
            outcomes: report
                .outcomes
                .iter()
                .map(|o| OutcomeReportFile {
                    m: o.index,
                    p_m: o.probability,
                    faithful: o.faithful,
                    fidelity: o.fidelity,
                    fidelity_min_over_probes: o.min_probe_fidelity,
                    recovery_unitary: o.recovery.as_ref().map(|u| matrix_to_data(u.matrix())),
                })
                .collect(),
            total_faithful_probability: report.total_faithful_probability,
            faithful_count: report.faithful_count(),
            probability_sum: report.probability_sum(),
        }
    }
}

impl CertificateFile {
    pub fn from_certificate(cert: &EtaCertificate, config: &SearchConfig) -> Self {
        let params = |p: &UnitaryParams| UnitaryParamsFile {
            phi: p.phi,
            alpha: p.alpha,
            beta: p.beta,
            theta: p.theta,
        };
        Self {
            shape: ShapeFile {
                q0: cert.shape.q0(),
                q1: cert.shape.q1(),
                g: cert.shape.g(),
            },
            witness: [params(&cert.witness.0), params(&cert.witness.1)],
            grid: GridConfigFile {
                grid_points: config.grid_points,
                refine_starts: config.refine_starts,
                refine_iters: config.refine_iters,
                found_tol: config.found_tol,
                certify_tol: config.certify_tol,
            },
            samples: cert.third_search.samples,
            min_violation: cert.third_search.min_violation,
            found_third: cert.third_search.found,
            eta: cert.eta,
            branch: match cert.branch {
                EtaBranch::PartiallyEntangled => "partial".into(),
                EtaBranch::MaximallyEntangled => "maximal".into(),
            },
            gray_zone: cert.gray_zone,
        }
    }
}
