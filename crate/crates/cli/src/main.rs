//! Command-line front end: analyze a channel, synthesize a matching
//! measurement basis, simulate the protocol, certify the faithful count,
//! or sweep the diagonal-channel family.
//!
//! Exit codes: 0 success, 1 usage/parse/validation, 2 domain error
//! (singular channel, non-unitary input, unsupported dimension).

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qteleport::channel::QuantumChannel;
use qteleport::eta_search::{certify_channel, EtaBranch, SearchConfig};
use qteleport::io::{
    matrix_to_data, AnalysisFile, BasisFile, CertificateFile, ChannelFile, ReportFile, StateFile,
    UnitariesFile,
};
use qteleport::measurement::{default_recovery_unitaries, synthesize_basis};
use qteleport::simulator::{run_protocol_with, SimulationConfig, DEFAULT_PROBES, DEFAULT_SEED};
use qteleport::{Error, MeasurementBasis};

#[derive(Parser)]
#[command(
    name = "qteleport",
    version,
    about = "Probabilistic teleportation analysis for bipartite quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the machine-readable artifact to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the machine-readable artifact (`json`; `csv` for sweep) to
    /// stdout instead of the summary.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Channel report: reduced density, faithful probability, Schmidt
    /// coefficients, entanglement entropy.
    Analyze {
        #[arg(long)]
        channel: PathBuf,
        /// Tolerance for the maximal-entanglement test.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Synthesize a complete measurement basis matched to the channel.
    Synthesize {
        #[arg(long)]
        channel: PathBuf,
        /// Recovery unitaries file; defaults to the conventional pair.
        #[arg(long)]
        unitaries: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the teleportation protocol over a basis and input state.
    Simulate {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Seed for the probe-state generator.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Probe states per outcome for the faithfulness decision.
        #[arg(long, default_value_t = DEFAULT_PROBES)]
        probes: usize,
        /// Faithfulness tolerance on probe fidelities.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certify the faithful count of an N = 2 channel.
    Eta {
        #[arg(long)]
        channel: PathBuf,
        /// Grid points per effective search dimension.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep the diagonal family diag(cos θ, sin θ) and emit CSV rows.
    Sweep {
        /// Number of equally spaced θ values (endpoints included).
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long, default_value_t = 0.0)]
        min: f64,
        #[arg(long, default_value_t = FRAC_PI_2)]
        max: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Domain(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Singular { .. }
            | Error::NotUnitary { .. }
            | Error::UnsupportedDimension { .. }
            | Error::Degenerate(_)
            | Error::NotOrthonormal { .. }
            | Error::ZeroProbability { .. }
            | Error::SvdNoConvergence { .. } => CliError::Domain(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// 12 significant digits, the precision all human-readable numbers use.
fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", path.display())))
}

fn write_artifact(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Usage(format!("cannot serialize output: {e}")))
}

/// Print to stdout or write to `--out`, honoring `--format`.
fn emit(output: &OutputArgs, summary: String, artifact: String) -> Result<(), CliError> {
    if let Some(format) = output.format.as_deref() {
        if format != "json" {
            return Err(CliError::Usage(format!(
                "unsupported format {format:?} for this command (expected \"json\")"
            )));
        }
    }
    match &output.out {
        Some(path) => {
            write_artifact(path, &artifact)?;
            print!("{summary}");
            println!("wrote {}", path.display());
        }
        None if output.format.is_some() => println!("{artifact}"),
        None => print!("{summary}"),
    }
    Ok(())
}

fn load_channel(path: &Path) -> Result<QuantumChannel, CliError> {
    let file: ChannelFile = read_json(path)?;
    Ok(file.to_channel()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            channel,
            tol,
            output,
        } => cmd_analyze(&channel, tol, &output),
        Command::Synthesize {
            channel,
            unitaries,
            output,
        } => cmd_synthesize(&channel, unitaries.as_deref(), &output),
        Command::Simulate {
            channel,
            basis,
            state,
            seed,
            probes,
            tol,
            output,
        } => cmd_simulate(&channel, &basis, &state, seed, probes, tol, &output),
        Command::Eta {
            channel,
            grid,
            output,
        } => cmd_eta(&channel, grid, &output),
        Command::Sweep {
            steps,
            min,
            max,
            output,
        } => cmd_sweep(steps, min, max, &output),
    }
}

fn cmd_analyze(channel_path: &Path, tol: f64, output: &OutputArgs) -> Result<(), CliError> {
    let ch = load_channel(channel_path)?;
    let p = ch.faithful_probability()?;
    let schmidt = ch.schmidt_decompose()?;
    let entropy = ch.entanglement_entropy();
    let maximal = ch.is_maximally_entangled(tol);
    let n = ch.n();
    let (p_max, branch) = if maximal {
        (Some(1.0), "maximal")
    } else if n == 2 {
        (Some(2.0 * p), "partial")
    } else {
        // The two-element bound is only established for n = 2.
        (None, "partial")
    };

    let analysis = AnalysisFile {
        n,
        reduced_density: matrix_to_data(&ch.reduced_density()),
        p,
        p_max,
        schmidt_coefficients: schmidt.coefficients.clone(),
        entropy_nats: entropy,
        entropy_bits: entropy / std::f64::consts::LN_2,
        maximally_entangled: maximal,
        branch: branch.into(),
    };

    let mut summary = String::new();
    let _ = writeln!(summary, "channel: n = {n} ({branch} branch)");
    let rho = ch.reduced_density();
    let _ = writeln!(summary, "reduced density matrix:");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let z = rho.get(i, j);
                format!("{} {:+.11e}i", fmt12(z.re), z.im)
            })
            .collect();
        let _ = writeln!(summary, "  [{}]", row.join(", "));
    }
    let _ = writeln!(summary, "faithful probability p = {}", fmt12(p));
    match p_max {
        Some(total) => {
            let _ = writeln!(summary, "total faithful p_max   = {}", fmt12(total));
        }
        None => {
            let _ = writeln!(
                summary,
                "total faithful p_max   = (not established for n = {n})"
            );
        }
    }
    let coeffs: Vec<String> = schmidt.coefficients.iter().map(|&c| fmt12(c)).collect();
    let _ = writeln!(summary, "schmidt coefficients   = [{}]", coeffs.join(", "));
    let _ = writeln!(
        summary,
        "entanglement entropy   = {} nats ({} bits)",
        fmt12(entropy),
        fmt12(entropy / std::f64::consts::LN_2)
    );
    let _ = writeln!(summary, "maximally entangled    = {maximal}");

    emit(output, summary, to_json(&analysis)?)
}

fn cmd_synthesize(
    channel_path: &Path,
    unitaries_path: Option<&Path>,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let ch = load_channel(channel_path)?;
    let unitaries = match unitaries_path {
        Some(path) => {
            let file: UnitariesFile = read_json(path)?;
            file.to_unitaries()?
        }
        None => default_recovery_unitaries(&ch)?,
    };
    let basis = synthesize_basis(&ch, &unitaries)?;

    let mut summary = String::new();
    let faithful = basis.faithful_flags().iter().filter(|&&f| f).count();
    let _ = writeln!(
        summary,
        "synthesized {} operators ({faithful} faithful) for n = {}",
        basis.len(),
        ch.n()
    );
    for (m, flag) in basis.faithful_flags().iter().enumerate() {
        let _ = writeln!(summary, "  operator {m}: faithful = {flag}");
    }

    emit(output, summary, to_json(&BasisFile::from_basis(&basis))?)
}

fn cmd_simulate(
    channel_path: &Path,
    basis_path: &Path,
    state_path: &Path,
    seed: u64,
    probes: usize,
    tol: f64,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let ch = load_channel(channel_path)?;
    let basis_file: BasisFile = read_json(basis_path)?;
    let basis: MeasurementBasis = basis_file.to_basis()?;
    let state_file: StateFile = read_json(state_path)?;
    let state = state_file.to_state()?;

    let config = SimulationConfig {
        seed,
        probes,
        faithful_tol: tol,
    };
    let report = run_protocol_with(&ch, &basis, &state, &config)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "protocol over {} outcomes (seed {seed}, {probes} probes per outcome)",
        report.outcomes.len()
    );
    for outcome in &report.outcomes {
        let _ = writeln!(
            summary,
            "  outcome {}: p = {}, faithful = {}, min probe fidelity = {}",
            outcome.index,
            fmt12(outcome.probability),
            outcome.faithful,
            fmt12(outcome.min_probe_fidelity)
        );
    }
    let _ = writeln!(
        summary,
        "total faithful probability = {}",
        fmt12(report.total_faithful_probability)
    );

    emit(output, summary, to_json(&ReportFile::from_report(&report))?)
}

fn cmd_eta(channel_path: &Path, grid: usize, output: &OutputArgs) -> Result<(), CliError> {
    let ch = load_channel(channel_path)?;
    let config = SearchConfig {
        grid_points: grid,
        ..SearchConfig::default()
    };
    let cert = certify_channel(&ch, &config)?;

    let mut summary = String::new();
    let branch = match cert.branch {
        EtaBranch::PartiallyEntangled => "partially entangled",
        EtaBranch::MaximallyEntangled => "maximally entangled",
    };
    let _ = writeln!(summary, "branch: {branch}");
    let _ = writeln!(summary, "faithful count eta = {}", cert.eta);
    let _ = writeln!(
        summary,
        "third-unitary search: found = {}, min violation = {} over {} samples",
        cert.third_search.found,
        fmt12(cert.third_search.min_violation),
        cert.third_search.samples
    );
    if cert.gray_zone {
        let _ = writeln!(
            summary,
            "warning: min violation is inside the gray zone (≤ 1e-6); the \
             non-existence claim is not certified at this resolution"
        );
    }

    emit(
        output,
        summary,
        to_json(&CertificateFile::from_certificate(&cert, &config))?,
    )
}

fn cmd_sweep(steps: usize, min: f64, max: f64, output: &OutputArgs) -> Result<(), CliError> {
    if steps < 2 || !min.is_finite() || !max.is_finite() || max <= min {
        return Err(CliError::Usage(
            "sweep requires steps >= 2 and a non-empty [min, max] range".into(),
        ));
    }
    if output.format.as_deref().is_some_and(|f| f != "csv") {
        return Err(CliError::Usage("sweep emits csv only".into()));
    }
    let mut csv = String::from("theta,p,p_max,entropy,branch\n");
    for k in 0..steps {
        let theta = min + (max - min) * k as f64 / (steps - 1) as f64;
        let ch = QuantumChannel::from_schmidt_coefficients(&[theta.cos(), theta.sin()])
            .map_err(CliError::from)?;
        let entropy = ch.entanglement_entropy();
        match ch.faithful_probability() {
            Ok(p) => {
                let (p_max, branch) = if ch.is_maximally_entangled(1e-9) {
                    (1.0, "maximal")
                } else {
                    (2.0 * p, "partial")
                };
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{branch}",
                    fmt12(theta),
                    fmt12(p),
                    fmt12(p_max),
                    fmt12(entropy)
                );
            }
            Err(Error::Singular { .. }) => {
                let _ = writeln!(csv, "{},,,{},singular", fmt12(theta), fmt12(entropy));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let rows = steps;
    let summary = format!("swept {rows} angles in [{}, {}]\n", fmt12(min), fmt12(max));
    match &output.out {
        Some(path) => {
            write_artifact(path, &csv)?;
            print!("{summary}");
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
