//! Command-line front end. `main` parses arguments, runs one command and
//! returns the process exit code.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::harness::{run_experiment, ExperimentReport, HarnessConfig, Verdict, EXPERIMENTS};
use crate::mixed::mixed_report;
use crate::oracle::{ComplexityTable, Growth, OracleParams};
use crate::qstate::{partial_trace, BipartitePartition, DensityFile, DensityMatrix, PureState, Side, StateFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "qclab", version, about = "Gate-counting complexity of small qubit states")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Gate-set JSON file; the built-in {H, T, Tdg, CNOT, X} when absent.
    #[arg(long, global = true, env = "QCLAB_GATESET")]
    pub gateset: Option<PathBuf>,
    /// Fidelity tolerance: states within 1 - epsilon count as equal.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Quantization cell of the canonical key.
    #[arg(long, global = true)]
    pub grid: Option<f64>,
    /// Maximum circuit depth explored.
    #[arg(long, global = true)]
    pub budget: Option<u32>,
    /// Hard limit on table entries.
    #[arg(long, global = true)]
    pub max_entries: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Complexity of a pure state from |0…0⟩ or a given reference.
    Complexity {
        state: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Every mixed-state measure of one density matrix.
    MixedReport(MixedInput),
    /// Run a named experiment.
    Experiment {
        name: String,
        /// Random instances per sampled experiment.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Build, inspect or query a persisted table.
    Table {
        #[command(subcommand)]
        action: TableAction,
    },
}

#[derive(Args, Debug)]
pub struct MixedInput {
    /// Density-matrix JSON file.
    #[arg(long, conflicts_with_all = ["state", "spectrum"])]
    pub density: Option<PathBuf>,
    /// Pure-state JSON file, reduced with --partition.
    #[arg(long, requires = "partition", conflicts_with = "spectrum")]
    pub state: Option<PathBuf>,
    /// Qubit counts `A,B` of the pure state; side A is kept unless --keep b.
    #[arg(long, value_delimiter = ',')]
    pub partition: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = Keep::A)]
    pub keep: Keep,
    /// Eigenvalues of a diagonal density matrix, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Keep {
    A,
    B,
}

#[derive(Subcommand, Debug)]
pub enum TableAction {
    /// Explore from the reference to the budget and save.
    Build {
        path: PathBuf,
        #[arg(long, default_value_t = 2)]
        qubits: usize,
        /// Reference state file; |0…0⟩ when absent.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Entry count, saturation and eccentricity.
    Info { path: PathBuf },
    /// Complexity of a state against a saved table.
    Query { path: PathBuf, state: PathBuf },
}

/// Parses `std::env::args`, runs, and returns the exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Json(_)
        | Error::Io(_)
        | Error::NotNormalized(_)
        | Error::InvalidDensityMatrix(_)
        | Error::UnknownGate(_)
        | Error::InvalidGateSet(_)
        | Error::GateSetMismatch { .. } => EXIT_PARSE,
        Error::InvalidParameter(_)
        | Error::InvalidPartition(_)
        | Error::TooManyCoefficients { .. }
        | Error::DimensionMismatch { .. }
        | Error::MissingGate { .. }
        | Error::InvalidTargets(_)
        | Error::SupportViolation(_) => EXIT_USAGE,
        Error::ResourceCap(_) => EXIT_RESOURCE,
        Error::SpectrumMismatch(_) => EXIT_FAILURE,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let gs = GateSet::load(g.gateset.as_deref())?;
    match &cli.command {
        Command::Complexity { state, reference } => {
            let psi = StateFile::read(state)?;
            let reference = match reference {
                Some(p) => StateFile::read(p)?,
                None => PureState::zero(psi.n_qubits()),
            };
            let mut table = ComplexityTable::new(reference, gs.clone(), oracle_params(g)?)?;
            let c = table.complexity(&psi)?;
            let report = json!({
                "n_qubits": psi.n_qubits(),
                "complexity": c,
                "growth": table.growth(),
                "entries": table.len(),
                "parameters": parameters(&gs, table.params()),
            });
            emit(g, &report, None, &format!("complexity: {c}"))?;
            Ok(cap_code(table.growth()))
        }
        Command::MixedReport(input) => {
            let rho = mixed_input(input)?;
            let report = mixed_report(&rho, &gs, oracle_params(g)?)?;
            for (name, c) in [
                ("purification", report.c_purification),
                ("spectrum", report.c_spectrum),
                ("basis", report.c_basis),
                ("c_max", report.c_max_fixed_spectrum),
            ] {
                if !c.is_exact() {
                    eprintln!("warning: {name} complexity is {c}, not an exact value");
                }
            }
            let summary = format!(
                "purification {} spectrum {} basis {} c_max {} uncomplexity {}",
                report.c_purification,
                report.c_spectrum,
                report.c_basis,
                report.c_max_fixed_spectrum,
                report.uncomplexity
            );
            emit(g, &serde_json::to_value(&report)?, None, &summary)?;
            Ok(if report.capped { EXIT_RESOURCE } else { EXIT_OK })
        }
        Command::Experiment { name, samples } => {
            if !EXPERIMENTS.contains(&name.as_str()) {
                eprintln!(
                    "error: unknown experiment `{name}`; valid names: {}",
                    EXPERIMENTS.join(", ")
                );
                return Ok(EXIT_USAGE);
            }
            let cfg = harness_config(g, gs, *samples)?;
            let report = run_experiment(name, &cfg)?;
            emit(
                g,
                &serde_json::to_value(&report)?,
                Some(&report),
                &experiment_summary(&report),
            )?;
            Ok(EXIT_OK)
        }
        Command::Table { action } => table_command(g, gs, action),
    }
}

fn table_command(g: &GlobalArgs, gs: GateSet, action: &TableAction) -> Result<i32> {
    match action {
        TableAction::Build {
            path,
            qubits,
            reference,
        } => {
            let reference = match reference {
                Some(p) => StateFile::read(p)?,
                None => PureState::zero(*qubits),
            };
            let table = ComplexityTable::build(reference, gs, oracle_params(g)?)?;
            table.save(path)?;
            let report = table_info(&table);
            emit(g, &report, None, &info_summary(&table))?;
            Ok(cap_code(table.growth()))
        }
        TableAction::Info { path } => {
            let table = ComplexityTable::load(path, &gs, g.workers)?;
            emit(g, &table_info(&table), None, &info_summary(&table))?;
            Ok(EXIT_OK)
        }
        TableAction::Query { path, state } => {
            let table = ComplexityTable::load(path, &gs, g.workers)?;
            let psi = StateFile::read(state)?;
            let mut table = table;
            let c = if table.is_complete() {
                table.lookup(&psi)?
            } else {
                table.complexity(&psi)?
            };
            let report = json!({
                "complexity": c,
                "growth": table.growth(),
                "entries": table.len(),
                "parameters": parameters(table.gate_set(), table.params()),
            });
            emit(g, &report, None, &format!("complexity: {c}"))?;
            Ok(EXIT_OK)
        }
    }
}

fn table_info(table: &ComplexityTable) -> Value {
    json!({
        "n_qubits": table.n_qubits(),
        "entries": table.len(),
        "growth": table.growth(),
        "saturated": table.is_saturated(),
        "explored_depth": table.explored_depth(),
        "max_depth": table.max_depth(),
        "eccentricity": table.max_pure_complexity(),
        "parameters": parameters(table.gate_set(), table.params()),
    })
}

fn info_summary(table: &ComplexityTable) -> String {
    format!(
        "{} entries, {}, eccentricity {}",
        table.len(),
        if table.is_saturated() {
            "saturated"
        } else {
            "not saturated"
        },
        table.max_pure_complexity()
    )
}

fn experiment_summary(r: &ExperimentReport) -> String {
    format!(
        "{}: {} holds, {} violated, {} undecided, {} measured ({} records)",
        r.experiment,
        r.count(Verdict::Holds),
        r.count(Verdict::Violated),
        r.count(Verdict::Undecided),
        r.count(Verdict::Measured),
        r.records.len()
    )
}

fn cap_code(growth: Growth) -> i32 {
    if growth == Growth::Capped {
        eprintln!("warning: table stopped at the entry cap");
        EXIT_RESOURCE
    } else {
        EXIT_OK
    }
}

fn parameters(gs: &GateSet, p: &OracleParams) -> Value {
    json!({
        "gate_set": gs.name,
        "gate_set_hash": gs.hash_hex(),
        "epsilon": p.epsilon,
        "grid": p.grid,
        "budget": p.budget,
        "max_entries": p.max_entries,
    })
}

/// Oracle settings from the flags over the library defaults.
pub fn oracle_params(g: &GlobalArgs) -> Result<OracleParams> {
    let d = OracleParams::default();
    let p = OracleParams {
        epsilon: g.epsilon.unwrap_or(d.epsilon),
        grid: g.grid.unwrap_or(d.grid),
        budget: g.budget.unwrap_or(d.budget),
        max_entries: g.max_entries.unwrap_or(d.max_entries),
        workers: g.workers,
    };
    p.validate()?;
    Ok(p)
}

/// Experiments start from the coarse configuration, since the default grid
/// cannot close a two-qubit table. Flags override it.
pub fn harness_config(g: &GlobalArgs, gs: GateSet, samples: Option<usize>) -> Result<HarnessConfig> {
    let mut cfg = HarnessConfig::coarse(gs).with_seed(g.seed).with_workers(g.workers);
    if let Some(s) = samples {
        cfg = cfg.with_samples(s);
    }
    for p in [&mut cfg.params, &mut cfg.wide_params] {
        if let Some(e) = g.epsilon {
            p.epsilon = e;
        }
        if let Some(grid) = g.grid {
            p.grid = grid;
        }
    }
    if let Some(b) = g.budget {
        cfg.params.budget = b;
    }
    if let Some(m) = g.max_entries {
        cfg.params.max_entries = m;
    }
    cfg.params.validate()?;
    cfg.wide_params.validate()?;
    Ok(cfg)
}

fn mixed_input(input: &MixedInput) -> Result<DensityMatrix> {
    if let Some(p) = &input.density {
        return DensityFile::read(p);
    }
    if let Some(p) = &input.state {
        let psi = StateFile::read(p)?;
        let sides = input.partition.as_deref().unwrap_or_default();
        if sides.len() != 2 {
            return Err(Error::InvalidPartition(format!(
                "expected A,B qubit counts, got {sides:?}"
            )));
        }
        let part = BipartitePartition::new(sides[0], sides[1])?;
        let keep = match input.keep {
            Keep::A => Side::A,
            Keep::B => Side::B,
        };
        return partial_trace(&psi, part, keep);
    }
    if let Some(probs) = &input.spectrum {
        let n = probs.len().trailing_zeros() as usize;
        if !probs.len().is_power_of_two() || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "{} eigenvalues do not fill a qubit register",
                probs.len()
            )));
        }
        return DensityMatrix::diagonal(n, probs);
    }
    Err(Error::InvalidParameter(
        "mixed-report needs --density, --state with --partition, or --spectrum".into(),
    ))
}

/// Writes the report to `--out` and the summary to standard output, or the
/// report to standard output and the summary to standard error.
fn emit(g: &GlobalArgs, report: &Value, experiment: Option<&ExperimentReport>, summary: &str) -> Result<()> {
    let text = match (g.format, experiment) {
        (Format::Json, Some(r)) => r.to_json() + "\n",
        (Format::Json, None) => serde_json::to_string_pretty(report)? + "\n",
        (Format::Csv, Some(r)) => r.to_csv()?,
        (Format::Csv, None) => object_csv(report)?,
    };
    match &g.out {
        Some(path) => {
            write_atomic(path, &text)?;
            println!("{summary}");
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// One header row of top-level keys and one value row; nested values are
/// written as JSON.
fn object_csv(v: &Value) -> Result<String> {
    let empty = Map::new();
    let obj = v.as_object().unwrap_or(&empty);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(obj.keys()).map_err(csv_err)?;
    w.write_record(obj.values().map(|x| match x {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }))
    .map_err(csv_err)?;
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("report")
    ));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
