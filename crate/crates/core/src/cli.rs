//! Command-line front end. Exit codes: 0 when every check passes, 1 when a
//! verification (or Solovay check) fails, 2 on configuration or input
//! errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_json, ConfigError, EngineKind, OutputSpec, RunConfig, SolovayCheckConfig, SpeedupConfig};
use crate::omega::{bits_to_string, bundled, OmegaEnumeration, ToyMachine};
use crate::report::VerificationReport;
use crate::solovay::{speedup, SolovayWitness, Verdict};
use crate::trace::{engine_name, read_jsonl, write_jsonl, TraceEvent};
use crate::{lemma2, prop3};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "DCELAB_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dcelab",
    version,
    about = "Exact-arithmetic experiments with left-c.e., right-c.e. and d.c.e. reals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the paced β construction and verify its trace.
    #[command(name = "run-lemma2")]
    RunLemma2(RunArgs),
    /// Run the finite-injury construction and verify its trace.
    #[command(name = "run-prop3")]
    RunProp3(RunArgs),
    /// Solovay-reducibility checks and the approximation speedup.
    #[command(subcommand)]
    Solovay(SolovayCommand),
    /// Toy halting-probability enumeration.
    #[command(subcommand)]
    Omega(OmegaCommand),
    /// Verify a recorded trace.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        /// Also write the machine-readable report here.
        #[arg(long)]
        report_json: Option<PathBuf>,
    },
    /// Rebuild the final state from a trace.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Compare against a recorded state file byte for byte.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the environment variable.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SolovayCommand {
    /// Decide a clause on a finite prefix.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the speedup of α paced by β as CSV.
    Speedup {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum OmegaCommand {
    /// Print ω_s for s = 0..=stages as CSV.
    Enumerate {
        #[arg(long)]
        length: usize,
        #[arg(long)]
        stages: usize,
        /// A bundled machine name.
        #[arg(long, default_value = "default", conflicts_with = "machine_file")]
        machine: String,
        #[arg(long)]
        machine_file: Option<PathBuf>,
    },
    /// Print a machine definition.
    Show {
        #[arg(long, default_value = "default")]
        machine: String,
    },
}

/// Failure modes of a command, mapped to exit codes.
enum Outcome {
    Failed(String),
    Config(String),
}

impl From<ConfigError> for Outcome {
    fn from(e: ConfigError) -> Self {
        Outcome::Config(e.to_string())
    }
}

fn config_err(e: impl std::fmt::Display) -> Outcome {
    Outcome::Config(e.to_string())
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Outcome::Failed(msg)) => {
            let _ = writeln!(err, "{msg}");
            EXIT_FAILED
        }
        Err(Outcome::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), Outcome> {
    match cmd {
        Command::RunLemma2(args) => run_engine(EngineKind::Lemma2, &args, out),
        Command::RunProp3(args) => run_engine(EngineKind::Prop3, &args, out),
        Command::Solovay(SolovayCommand::Check { config }) => solovay_check(&config, out),
        Command::Solovay(SolovayCommand::Speedup { config }) => solovay_speedup(&config, out),
        Command::Omega(OmegaCommand::Enumerate {
            length,
            stages,
            machine,
            machine_file,
        }) => omega_enumerate(length, stages, &machine, machine_file.as_deref(), out),
        Command::Omega(OmegaCommand::Show { machine }) => {
            let m = bundled(&machine).map_err(config_err)?;
            write!(out, "{}", m.to_text()).map_err(config_err)
        }
        Command::Verify { trace, report_json } => verify_trace(&trace, report_json.as_deref(), out),
        Command::Replay { trace, state } => replay_trace(&trace, state.as_deref(), out),
    }
}

fn out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

struct OutputPaths {
    trace: PathBuf,
    report: PathBuf,
    report_json: PathBuf,
    state: PathBuf,
}

fn output_paths(spec: &OutputSpec, dir: &Path, engine: &str) -> OutputPaths {
    let pick = |p: &Option<PathBuf>, default: String| dir.join(p.clone().unwrap_or_else(|| PathBuf::from(default)));
    OutputPaths {
        trace: pick(&spec.trace, format!("{engine}.trace.jsonl")),
        report: pick(&spec.report, format!("{engine}.report.txt")),
        report_json: pick(&spec.report_json, format!("{engine}.report.json")),
        state: pick(&spec.state, format!("{engine}.state.json")),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Outcome> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| config_err(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn run_engine(kind: EngineKind, args: &RunArgs, out: &mut dyn Write) -> Result<(), Outcome> {
    let cfg = RunConfig::load(&args.config)?;
    if cfg.engine != kind {
        return Err(Outcome::Config(format!(
            "configuration is for {:?}, not {:?}",
            cfg.engine, kind
        )));
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let (name, trace, state_json, report) = match kind {
        EngineKind::Lemma2 => {
            let run = lemma2::run(cfg.lemma2(base)?).map_err(config_err)?;
            let report = lemma2::verify(&run.trace);
            (lemma2::ENGINE_NAME, run.trace, run.state.to_json(), report)
        }
        EngineKind::Prop3 => {
            let run = prop3::run(cfg.prop3(base)?).map_err(config_err)?;
            let report = prop3::verify(&run.trace);
            (prop3::ENGINE_NAME, run.trace, run.state.to_json(), report)
        }
    };
    let paths = output_paths(&cfg.output, &out_dir(args.out_dir.as_deref()), name);
    write_trace(&paths.trace, &trace)?;
    write_file(&paths.state, format!("{state_json}\n").as_bytes())?;
    write_report(&report, &paths.report, &paths.report_json)?;
    writeln!(out, "trace: {}", paths.trace.display()).map_err(config_err)?;
    writeln!(out, "state: {}", paths.state.display()).map_err(config_err)?;
    writeln!(out, "report: {}", paths.report.display()).map_err(config_err)?;
    finish_report(&report, out)
}

fn write_trace(path: &Path, trace: &[TraceEvent]) -> Result<(), Outcome> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| config_err(format!("{}: {e}", parent.display())))?;
    }
    let f = std::fs::File::create(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    write_jsonl(trace, std::io::BufWriter::new(f)).map_err(config_err)
}

fn write_report(report: &VerificationReport, text: &Path, json: &Path) -> Result<(), Outcome> {
    write_file(text, report.to_text().as_bytes())?;
    let j = serde_json::to_string_pretty(report).map_err(config_err)?;
    write_file(json, format!("{j}\n").as_bytes())
}

fn finish_report(report: &VerificationReport, out: &mut dyn Write) -> Result<(), Outcome> {
    write!(out, "{}", report.to_text()).map_err(config_err)?;
    match report.first_failure() {
        None if report.passed() => Ok(()),
        None => Err(Outcome::Failed("verification failed".into())),
        Some((check, f)) => Err(Outcome::Failed(format!(
            "verification failed: {} ({}) at stage {}{}: {}",
            check.id,
            check.description,
            f.stage.map_or("-".into(), |s| s.to_string()),
            f.requirement.map_or(String::new(), |r| format!(", requirement {r}")),
            f.message
        ))),
    }
}

fn load_trace(path: &Path) -> Result<Vec<TraceEvent>, Outcome> {
    let f = std::fs::File::open(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    read_jsonl(std::io::BufReader::new(f)).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn verify_trace(path: &Path, report_json: Option<&Path>, out: &mut dyn Write) -> Result<(), Outcome> {
    let trace = load_trace(path)?;
    let report = match engine_name(&trace) {
        Some(lemma2::ENGINE_NAME) => lemma2::verify(&trace),
        Some(prop3::ENGINE_NAME) => prop3::verify(&trace),
        other => return Err(Outcome::Config(format!("unknown engine in trace header: {other:?}"))),
    };
    if let Some(p) = report_json {
        let j = serde_json::to_string_pretty(&report).map_err(config_err)?;
        write_file(p, format!("{j}\n").as_bytes())?;
    }
    finish_report(&report, out)
}

fn replay_trace(path: &Path, state: Option<&Path>, out: &mut dyn Write) -> Result<(), Outcome> {
    let trace = load_trace(path)?;
    let json = match engine_name(&trace) {
        Some(lemma2::ENGINE_NAME) => lemma2::replay(&trace)
            .map_err(|e| Outcome::Failed(e.to_string()))?
            .to_json(),
        Some(prop3::ENGINE_NAME) => prop3::replay(&trace)
            .map_err(|e| Outcome::Failed(e.to_string()))?
            .to_json(),
        other => return Err(Outcome::Config(format!("unknown engine in trace header: {other:?}"))),
    };
    let json = format!("{json}\n");
    match state {
        None => write!(out, "{json}").map_err(config_err),
        Some(p) => {
            let recorded = std::fs::read(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            if recorded == json.as_bytes() {
                writeln!(out, "replayed state matches {}", p.display()).map_err(config_err)
            } else {
                Err(Outcome::Failed(format!("replayed state differs from {}", p.display())))
            }
        }
    }
}

fn solovay_check(path: &Path, out: &mut dyn Write) -> Result<(), Outcome> {
    let cfg: SolovayCheckConfig = load_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let horizon = cfg.horizon.unwrap_or(2 * cfg.stages.max(1));
    let alpha = cfg.alpha.build(horizon, base)?;
    let beta = cfg.beta.build(horizon, base)?;
    let mut w = SolovayWitness::new(cfg.q.clone(), cfg.clause, alpha, beta).map_err(config_err)?;
    let verdict = w.check(cfg.stages, cfg.horizon).map_err(config_err)?;
    let clause = serde_json::to_string(&cfg.clause).map_err(config_err)?;
    match verdict {
        Verdict::Holds => writeln!(
            out,
            "clause {clause} with q = {} holds on stages 0..={}",
            cfg.q, cfg.stages
        )
        .map_err(config_err),
        Verdict::FailsAt(s) => Err(Outcome::Failed(format!(
            "clause {clause} with q = {} fails at stage {s}",
            cfg.q
        ))),
    }
}

fn solovay_speedup(path: &Path, out: &mut dyn Write) -> Result<(), Outcome> {
    let cfg: SpeedupConfig = load_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut alpha = cfg.alpha.build(cfg.stages, base)?;
    let mut beta = cfg.beta.build(cfg.stages, base)?;
    let mut gamma = speedup(alpha.clone(), beta.clone(), cfg.p.clone()).map_err(config_err)?;
    writeln!(out, "stage,alpha,beta,gamma").map_err(config_err)?;
    for s in 0..=cfg.stages {
        let a = alpha.value(s).map_err(config_err)?;
        let b = beta.value(s).map_err(config_err)?;
        let g = gamma.value(s).map_err(config_err)?;
        writeln!(out, "{s},{a},{b},{g}").map_err(config_err)?;
    }
    Ok(())
}

fn omega_enumerate(
    length: usize,
    stages: usize,
    machine: &str,
    machine_file: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Outcome> {
    let m = match machine_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            ToyMachine::parse(&text).map_err(config_err)?
        }
        None => bundled(machine).map_err(config_err)?,
    };
    let mut en = OmegaEnumeration::new(m, length).map_err(config_err)?;
    writeln!(out, "stage,omega").map_err(config_err)?;
    for s in 0..=stages {
        let v = en.value(s).map_err(|e| Outcome::Failed(e.to_string()))?;
        writeln!(out, "{s},{v}").map_err(config_err)?;
    }
    for (p, at) in en.halted() {
        writeln!(out, "# halted {} at stage {at}", bits_to_string(p)).map_err(config_err)?;
    }
    Ok(())
}
