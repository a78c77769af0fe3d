#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dcelab_core::config::{EngineKind, RunConfig};
use dcelab_core::report::VerificationReport;
use dcelab_core::trace::TraceEvent;
use dcelab_core::{lemma2, prop3};

pub fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

/// Fixture configs whose file name starts with `prefix`, sorted by name.
pub fn fixture_configs(prefix: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(tests_dir().join("configs"))
        .expect("configs directory")
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.starts_with(prefix) && name.ends_with(".json")
        })
        .collect();
    out.sort();
    out
}

pub struct Outcome {
    pub config: RunConfig,
    pub trace: Vec<TraceEvent>,
    /// Final state as written by the CLI (JSON plus trailing newline).
    pub state: String,
    /// Final state rebuilt from the trace alone.
    pub replayed: String,
    pub report: VerificationReport,
    pub lemma2: Option<lemma2::Lemma2State>,
    pub prop3: Option<prop3::Prop3State>,
    pub seconds: f64,
}

pub fn run_file(path: &Path) -> Outcome {
    let config = RunConfig::load(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let base = path.parent().unwrap();
    let start = std::time::Instant::now();
    match config.engine {
        EngineKind::Lemma2 => {
            let run = lemma2::run(config.lemma2(base).unwrap()).unwrap();
            let report = lemma2::verify(&run.trace);
            let replayed = lemma2::replay(&run.trace).unwrap().to_json();
            Outcome {
                config,
                state: format!("{}\n", run.state.to_json()),
                replayed: format!("{replayed}\n"),
                trace: run.trace,
                report,
                lemma2: Some(run.state),
                prop3: None,
                seconds: start.elapsed().as_secs_f64(),
            }
        }
        EngineKind::Prop3 => {
            let run = prop3::run(config.prop3(base).unwrap()).unwrap();
            let report = prop3::verify(&run.trace);
            let replayed = prop3::replay(&run.trace).unwrap().to_json();
            Outcome {
                config,
                state: format!("{}\n", run.state.to_json()),
                replayed: format!("{replayed}\n"),
                trace: run.trace,
                report,
                lemma2: None,
                prop3: Some(run.state),
                seconds: start.elapsed().as_secs_f64(),
            }
        }
    }
}
