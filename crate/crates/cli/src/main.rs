//! Command line front end: ingest state descriptions, run the
//! analyses, emit machine-readable reports.
//!
//! Exit codes: 0 analyzed with no violation (or a local model
//! exists), 3 violation certified, 1 input error, 2 internal failure.

mod input;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use bellcheck::bellcore::{general_bound, general_lhs, CorrelationTable};
use bellcheck::corrtensor::{compute_tensor, correlation_table, CorrelationTensor};
use bellcheck::criterion::{
    all_tests, lookup_test, max_tmod, werner_threshold, Verdict, ViolationTest,
};
use bellcheck::lhvmodel::{build_lhv, lhv_exists_bruteforce, LhvModel};
use bellcheck::optimizer::OptimOptions;
use bellcheck::qstate::{make_ghz, mix_with_noise};
use bellcheck::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use input::{read_json, SettingsSpec, StateSpec, TableSpec};
use report::{
    criterion_section, print_summary, sig12, EchoedOptions, GeneralSection, LhvSection, Report,
    SectorSummary, TensorComponent, TensorSummary, Timings, WernerSection,
};

const COMPONENT_TOL: f64 = 1e-10;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self { message, code: 1 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFiniteObjective => 2,
            _ => 1,
        };
        Self {
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bellcheck",
    version,
    about = "Decides whether a qubit state's two-setting correlations admit a local hidden variable description"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one state file; JSON report on stdout
    Analyze(AnalyzeArgs),
    /// Scan a state family; JSON rows on stdout
    Sweep(SweepArgs),
    /// Decide local-model existence for a raw correlation table
    Oracle(OracleArgs),
}

#[derive(Args)]
struct OptimArgs {
    /// Independent optimizer starts
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Seed for the deterministic start sequence
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Convergence threshold and verdict slack
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Suppress the human-readable summary on standard error
    #[arg(long)]
    quiet: bool,
}

impl OptimArgs {
    fn options(&self) -> OptimOptions {
        OptimOptions {
            restarts: self.restarts,
            seed: self.seed,
            tol: self.tol,
            ..OptimOptions::default()
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// State description file (JSON)
    state: PathBuf,
    /// Measurement-directions file (JSON); evaluates the general
    /// inequality at these settings instead of the optimized ones
    #[arg(long)]
    settings: Option<PathBuf>,
    /// Comma-separated extra test ids (tmod always runs); default
    /// runs every test supporting the state's qubit count but the
    /// settings search "direct"
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<String>>,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum FamilyKind {
    Werner,
    Ghz,
}

#[derive(Args)]
struct SweepArgs {
    /// State family to scan
    #[arg(long, value_enum)]
    kind: FamilyKind,
    /// Number of qubits
    #[arg(long)]
    n: usize,
    /// First Werner weight
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    /// Last Werner weight (inclusive)
    #[arg(long, default_value_t = 1.0)]
    to: f64,
    /// Weight increment
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Correlation table file (JSON)
    table: PathBuf,
    /// Suppress the human-readable summary on standard error
    #[arg(long)]
    quiet: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

/// The tests to run: tmod always leads, then the requested ids, or
/// by default everything applicable except the settings search.
fn select_tests(
    requested: &Option<Vec<String>>,
    n_qubits: usize,
) -> Result<Vec<&'static dyn ViolationTest>, CliError> {
    let mut tests = vec![lookup_test("tmod")?];
    match requested {
        Some(ids) => {
            for id in ids {
                let test = lookup_test(id)?;
                if !test.supports(n_qubits) {
                    return Err(Error::UnsupportedQubitCount {
                        id: id.clone(),
                        n: n_qubits,
                    }
                    .into());
                }
                if tests.iter().all(|t| t.id() != test.id()) {
                    tests.push(test);
                }
            }
        }
        None => {
            for test in all_tests() {
                if test.id() != "tmod" && test.id() != "direct" && test.supports(n_qubits) {
                    tests.push(*test);
                }
            }
        }
    }
    Ok(tests)
}

fn lhv_section(table: &CorrelationTable) -> Result<LhvSection, CliError> {
    match build_lhv(table) {
        Ok(model) => Ok(LhvSection {
            exists: true,
            noise_weight: Some(model.noise_weight()),
            sectors: Some(sector_summaries(&model)),
            value: None,
            bound: None,
        }),
        Err(Error::NoLocalModel { value, bound }) => Ok(LhvSection {
            exists: false,
            noise_weight: None,
            sectors: None,
            value: Some(value),
            bound: Some(bound),
        }),
        Err(e) => Err(e.into()),
    }
}

fn sector_summaries(model: &LhvModel) -> Vec<SectorSummary> {
    let n = model.n_qubits();
    model
        .sector_probabilities()
        .iter()
        .zip(model.sector_signs())
        .enumerate()
        .filter(|(_, (p, _))| **p > 0.0)
        .map(|(s, (p, sign))| SectorSummary {
            signs: (0..n)
                .map(|j| if (s >> (n - 1 - j)) & 1 == 1 { -1 } else { 1 })
                .collect(),
            probability: *p,
            sign: *sign,
        })
        .collect()
}

fn tensor_summary(t: &CorrelationTensor) -> TensorSummary {
    TensorSummary {
        n_qubits: t.n_qubits(),
        nonzero_components: t
            .nonzero_components(COMPONENT_TOL)
            .into_iter()
            .map(|(axes, value)| TensorComponent { axes, value })
            .collect(),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, CliError> {
    let started = Instant::now();
    let spec: StateSpec = read_json(&args.state, "state file")?;
    let rho = spec.to_density()?;
    let tensor = compute_tensor(&rho)?;
    let tensor_ms = started.elapsed().as_secs_f64() * 1e3;

    let opts = args.optim.options();
    let tests = select_tests(&args.criteria, spec.n_qubits)?;
    let analysis_started = Instant::now();
    let mut criteria = Vec::new();
    let mut tmod_outcome = None;
    for test in &tests {
        let outcome = test.run(&tensor, &opts)?;
        if outcome.id == "tmod" {
            tmod_outcome = Some(outcome.clone());
        }
        criteria.push(criterion_section(&outcome, test.guarantee()));
    }
    let tmod_outcome = tmod_outcome.expect("tmod always runs");
    let certificate = tmod_outcome
        .certificate
        .as_ref()
        .expect("tmod produces a certificate");

    let (settings_source, settings) = match &args.settings {
        Some(path) => {
            let spec: SettingsSpec = read_json(path, "settings file")?;
            ("given", spec.to_settings(tensor.n_qubits())?)
        }
        None => ("optimized", certificate.settings.clone()),
    };
    let table = correlation_table(&tensor, &settings)?;
    let general = GeneralSection {
        settings_source,
        settings: settings.directions().to_vec(),
        table: table.entries().to_vec(),
        value: general_lhs(&table),
        bound: general_bound(tensor.n_qubits()),
    };
    let lhv = lhv_section(&table)?;

    let werner = match spec.werner_weight() {
        Some(v) => {
            let threshold = werner_threshold(spec.n_qubits)?;
            Some(WernerSection {
                v,
                threshold,
                exceeds_threshold: v > threshold,
            })
        }
        None => None,
    };

    let violated = tmod_outcome.verdict == Verdict::Violated;
    let analysis_ms = analysis_started.elapsed().as_secs_f64() * 1e3;
    let report = Report {
        input: spec,
        options: EchoedOptions {
            restarts: opts.restarts,
            seed: opts.seed,
            tol: opts.tol,
            criteria: tests.iter().map(|t| t.id().to_string()).collect(),
        },
        tensor: tensor_summary(&tensor),
        general,
        criteria,
        werner,
        lhv,
        violated,
        timings_ms: Timings {
            tensor: tensor_ms,
            analysis: analysis_ms,
            total: started.elapsed().as_secs_f64() * 1e3,
        },
    };
    emit(&report)?;
    if !args.optim.quiet {
        print_summary(&report);
    }
    Ok(if violated { 3 } else { 0 })
}

#[derive(Serialize)]
struct SweepRow {
    parameter: Option<f64>,
    max_tmod: f64,
    violated: bool,
}

#[derive(Serialize)]
struct SweepReport {
    kind: &'static str,
    n_qubits: usize,
    rows: Vec<SweepRow>,
}

fn cmd_sweep(args: &SweepArgs) -> Result<i32, CliError> {
    let opts = args.optim.options();
    let ghz = make_ghz(args.n)?.density();
    let (kind, weights): (&str, Vec<Option<f64>>) = match args.kind {
        FamilyKind::Ghz => ("ghz", vec![None]),
        FamilyKind::Werner => {
            if args.step <= 0.0 || args.to < args.from {
                return Err(CliError::input(format!(
                    "empty range: from {} to {} step {}",
                    args.from, args.to, args.step
                )));
            }
            let count = ((args.to - args.from) / args.step + 1e-9).floor() as usize + 1;
            ("werner", (0..count)
                .map(|k| Some((args.from + k as f64 * args.step).min(args.to)))
                .collect())
        }
    };
    let mut rows = Vec::new();
    for weight in weights {
        let tensor = match weight {
            Some(v) => compute_tensor(&mix_with_noise(&ghz, v)?)?,
            None => compute_tensor(&ghz)?,
        };
        let cert = max_tmod(&tensor, &opts)?;
        rows.push(SweepRow {
            parameter: weight,
            max_tmod: cert.value,
            violated: cert.value > 1.0 + opts.tol,
        });
    }
    if !args.optim.quiet {
        eprintln!("{:>10}  {:>18}  violated", "parameter", "max_tmod");
        for row in &rows {
            eprintln!(
                "{:>10}  {:>18}  {}",
                row.parameter.map_or("-".into(), |v| format!("{v:.4}")),
                sig12(row.max_tmod),
                if row.violated { "yes" } else { "no" }
            );
        }
    }
    emit(&SweepReport {
        kind,
        n_qubits: args.n,
        rows,
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct OracleReport {
    n_qubits: usize,
    entries: Vec<f64>,
    value: f64,
    bound: f64,
    exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sectors: Option<Vec<SectorSummary>>,
}

fn cmd_oracle(args: &OracleArgs) -> Result<i32, CliError> {
    let spec: TableSpec = read_json(&args.table, "table file")?;
    let table = CorrelationTable::from_entries(spec.n_qubits, spec.entries)?;
    let value = general_lhs(&table);
    let bound = general_bound(table.n_qubits());
    let exists = lhv_exists_bruteforce(&table)?;
    let model = if exists { Some(build_lhv(&table)?) } else { None };
    let report = OracleReport {
        n_qubits: table.n_qubits(),
        entries: table.entries().to_vec(),
        value,
        bound,
        exists,
        noise_weight: model.as_ref().map(|m| m.noise_weight()),
        sectors: model.as_ref().map(sector_summaries),
    };
    emit(&report)?;
    if !args.quiet {
        if exists {
            eprintln!(
                "satisfied: value {} within bound {}; model has {} sectors, noise weight {}",
                sig12(value),
                sig12(bound),
                report.sectors.as_ref().map_or(0, |s| s.len()),
                sig12(report.noise_weight.unwrap_or(0.0))
            );
        } else {
            eprintln!(
                "violated: value {} exceeds bound {}; no local model exists",
                sig12(value),
                sig12(bound)
            );
        }
    }
    Ok(if exists { 0 } else { 3 })
}

fn emit<T: Serialize>(doc: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| CliError {
        message: format!("cannot serialize report: {e}"),
        code: 2,
    })?;
    println!("{text}");
    Ok(())
}
