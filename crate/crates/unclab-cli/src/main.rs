//! JSON-in/JSON-out command-line front end. Every subcommand is
//! deterministic given its flags and seed, writes machine-parseable JSON to
//! stdout (or `--output`), and keeps human logs on stderr.
//!
//! Exit codes: 0 success / in-max / feasible, 1 negative verdict, 2
//! undetermined, 64 usage or bad input, 70 internal inconsistency.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use unclab::cones::{classify, crosscheck, max_membership, min_violation_search, RunConfig};
use unclab::correlations::{identity_tuple, npa_check, sample_ucq, CorrelationTuple, NpaVerdict};
use unclab::dilation::{rfd_compression, unitary_dilation, Representation};
use unclab::linalg::RngState;
use unclab::opsys::VnElement;
use unclab::{ComplexMatrix, Error};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_UNDETERMINED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(
    name = "unclab",
    about = "Operator-system laboratory: cone certificates, dilations, unitary correlations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unitary dilation of a contraction matrix.
    Dilate(DilateArgs),
    /// Cone verdict for an element: violation search, then completion search.
    Classify(ClassifyArgs),
    /// Maximal-cone completion certificate only.
    MaxCert(MembershipArgs),
    /// Minimal-cone violation certificate only.
    MinViolate(MembershipArgs),
    /// Randomized equivalence harness over completion-generated and free elements.
    Crosscheck(CrosscheckArgs),
    /// Sample tensor-model unitary correlation tuples.
    SampleUcq(SampleArgs),
    /// Level-1 moment-matrix feasibility check for correlation tuples.
    NpaCheck(NpaArgs),
    /// Compress-then-dilate a finite-dimensional representation.
    RfdCompress(RfdArgs),
}

/// Solver knobs shared by the cone subcommands. An optional JSON config file
/// provides defaults; explicit flags win.
#[derive(Args, Clone)]
struct SolverFlags {
    /// JSON file with the same fields as the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Archimedean slack for the completion search.
    #[arg(long)]
    eps: Option<f64>,
    /// Dykstra iteration cap.
    #[arg(long)]
    max_iter: Option<u64>,
    /// Largest violation-witness dimension (default 2n).
    #[arg(long)]
    r_max: Option<usize>,
    /// Multistart count per witness dimension.
    #[arg(long)]
    starts: Option<usize>,
    /// Master seed for the violation search.
    #[arg(long)]
    seed: Option<u64>,
    /// Convergence threshold on completion residuals.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Violation threshold on the bottom eigenvalue.
    #[arg(long)]
    violation_tol: Option<f64>,
    /// Also run the completion solver on violated elements and fail loudly
    /// if both certificates appear.
    #[arg(long)]
    check_mutual_exclusion: bool,
}

impl SolverFlags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg: RunConfig = match &self.config {
            Some(path) => parse_json(&read_file(path)?, path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.r_max {
            cfg.r_max = Some(v);
        }
        if let Some(v) = self.starts {
            cfg.starts = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.residual_tol {
            cfg.residual_tol = v;
        }
        if let Some(v) = self.violation_tol {
            cfg.violation_tol = v;
        }
        if self.check_mutual_exclusion {
            cfg.check_mutual_exclusion = true;
        }
        cfg.validate().map_err(CliError::usage)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct DilateArgs {
    /// Matrix JSON: {"rows": R, "cols": C, "data": [[re, im], ...]}.
    #[arg(long)]
    input: PathBuf,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Element JSON: {"n": .., "p": .., "A11": .., "A": [..]}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct MembershipArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct CrosscheckArgs {
    /// Generator grid size n (>= 2).
    #[arg(long)]
    n: usize,
    /// Coefficient block size p (>= 1).
    #[arg(long)]
    p: usize,
    /// Number of randomized trials.
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    /// Block size of the left Hilbert space factor.
    #[arg(long)]
    da: usize,
    /// Block size of the right Hilbert space factor.
    #[arg(long)]
    db: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of tuples to emit (one JSON object per line).
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Emit the deterministic identity-representation tuple instead of
    /// sampling.
    #[arg(long)]
    identity: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NpaArgs {
    /// Line-delimited tuple JSON (one tuple per line).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 50_000)]
    max_iter: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RfdArgs {
    /// Representation JSON: {"n": .., "d": .., "blocks": [[..]]}.
    #[arg(long)]
    input: PathBuf,
    /// Compression rank (1 <= m <= d).
    #[arg(long)]
    m: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn from_lib(e: Error) -> Self {
        let code = match e {
            Error::InternalInconsistency(_) => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<u8, CliError>;

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text)
        .map_err(|e| CliError::usage(format!("cannot parse {}: {e}", path.display())))
}

/// Writes one JSON value per line, to the file or stdout.
fn emit_lines<T: Serialize>(output: &Option<PathBuf>, values: &[T]) -> Result<(), CliError> {
    let mut text = String::new();
    for v in values {
        text.push_str(
            &serde_json::to_string(v).map_err(|e| CliError::usage(format!("serialize: {e}")))?,
        );
        text.push('\n');
    }
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::usage(format!("stdout: {e}")))
        }
    }
}

fn emit<T: Serialize>(output: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    emit_lines(output, std::slice::from_ref(value))
}

#[derive(Serialize)]
struct DilationOutput {
    dilation: ComplexMatrix,
    unitarity_residual: f64,
}

fn cmd_dilate(args: &DilateArgs) -> CliResult {
    let t: ComplexMatrix = parse_json(&read_file(&args.input)?, &args.input)?;
    let v = unitary_dilation(&t).map_err(CliError::from_lib)?;
    let residual = v
        .adjoint()
        .matmul(&v)
        .sub(&ComplexMatrix::identity(v.rows()))
        .frobenius_norm();
    emit(
        &args.output,
        &DilationOutput {
            dilation: v,
            unitarity_residual: residual,
        },
    )?;
    Ok(EXIT_OK)
}

fn cmd_classify(args: &ClassifyArgs) -> CliResult {
    let cfg = args.solver.resolve()?;
    let x: VnElement = parse_json(&read_file(&args.input)?, &args.input)?;
    let verdict = classify(&x, &cfg).map_err(CliError::from_lib)?;
    eprintln!(
        "classify: {:?} after {} iterations in {:.3}s",
        verdict.status,
        verdict.iterations,
        verdict.elapsed.as_secs_f64()
    );
    emit(&args.output, &verdict)?;
    Ok(verdict.status.exit_code() as u8)
}

#[derive(Serialize)]
struct MembershipOutput<T: Serialize> {
    found: bool,
    certificate: Option<T>,
}

fn cmd_max_cert(args: &MembershipArgs) -> CliResult {
    let cfg = args.solver.resolve()?;
    let x: VnElement = parse_json(&read_file(&args.input)?, &args.input)?;
    let cert = max_membership(&x, cfg.eps, cfg.max_iter).map_err(CliError::from_lib)?;
    let found = cert.is_some();
    emit(
        &args.output,
        &MembershipOutput {
            found,
            certificate: cert,
        },
    )?;
    Ok(if found { EXIT_OK } else { EXIT_UNDETERMINED })
}

fn cmd_min_violate(args: &MembershipArgs) -> CliResult {
    let cfg = args.solver.resolve()?;
    let x: VnElement = parse_json(&read_file(&args.input)?, &args.input)?;
    let rng = RngState::new(cfg.seed);
    let cert = min_violation_search(&x, cfg.r_max_for(x.n()), cfg.starts, &rng)
        .map_err(CliError::from_lib)?;
    let found = cert.is_some();
    emit(
        &args.output,
        &MembershipOutput {
            found,
            certificate: cert,
        },
    )?;
    Ok(if found { EXIT_NEGATIVE } else { EXIT_UNDETERMINED })
}

fn cmd_crosscheck(args: &CrosscheckArgs) -> CliResult {
    let cfg = args.solver.resolve()?;
    let rng = RngState::new(cfg.seed);
    let report = crosscheck(args.n, args.p, args.trials, &rng, &cfg).map_err(CliError::from_lib)?;
    eprintln!(
        "crosscheck: {} trials, {} in-max, {} violated, {} undetermined, {} inconsistencies",
        report.trials, report.in_max, report.violated_min, report.undetermined,
        report.inconsistencies
    );
    let consistent = report.consistent();
    emit(&args.output, &report)?;
    Ok(if consistent { EXIT_OK } else { EXIT_INTERNAL })
}

fn cmd_sample_ucq(args: &SampleArgs) -> CliResult {
    let tuples: Vec<CorrelationTuple> = if args.identity {
        vec![identity_tuple(args.n1, args.n2).map_err(CliError::from_lib)?]
    } else {
        let master = RngState::new(args.seed);
        (0..args.count)
            .map(|item| {
                let mut rng = master.derive(item);
                sample_ucq(args.n1, args.n2, args.da, args.db, &mut rng)
                    .map_err(CliError::from_lib)
            })
            .collect::<Result<_, _>>()?
    };
    emit_lines(&args.output, &tuples)?;
    Ok(EXIT_OK)
}

fn cmd_npa_check(args: &NpaArgs) -> CliResult {
    let text = read_file(&args.input)?;
    let mut verdicts = Vec::new();
    let mut worst = EXIT_OK;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let tuple: CorrelationTuple = serde_json::from_str(line).map_err(|e| {
            CliError::usage(format!(
                "cannot parse tuple on line {}: {e}",
                lineno + 1
            ))
        })?;
        let verdict = npa_check(&tuple, args.max_iter).map_err(CliError::from_lib)?;
        worst = match (&verdict, worst) {
            (NpaVerdict::InfeasibleEvidence { .. }, _) => EXIT_NEGATIVE,
            (NpaVerdict::Undetermined, EXIT_OK) => EXIT_UNDETERMINED,
            (_, w) => w,
        };
        verdicts.push(verdict);
    }
    emit_lines(&args.output, &verdicts)?;
    Ok(worst)
}

#[derive(Serialize)]
struct RfdOutput {
    representation: Representation,
    unitarity_residual: f64,
}

fn cmd_rfd_compress(args: &RfdArgs) -> CliResult {
    let rep: Representation = parse_json(&read_file(&args.input)?, &args.input)?;
    let compressed = rfd_compression(&rep, args.m).map_err(CliError::from_lib)?;
    let residual = compressed.unitarity_residual();
    emit(
        &args.output,
        &RfdOutput {
            representation: compressed,
            unitarity_residual: residual,
        },
    )?;
    Ok(EXIT_OK)
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Dilate(args) => cmd_dilate(args),
        Command::Classify(args) => cmd_classify(args),
        Command::MaxCert(args) => cmd_max_cert(args),
        Command::MinViolate(args) => cmd_min_violate(args),
        Command::Crosscheck(args) => cmd_crosscheck(args),
        Command::SampleUcq(args) => cmd_sample_ucq(args),
        Command::NpaCheck(args) => cmd_npa_check(args),
        Command::RfdCompress(args) => cmd_rfd_compress(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("unclab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
