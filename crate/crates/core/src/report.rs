//! Verification reports: one result per named check, with the failing
//! instances (stage, requirement, violated inequality).

use serde::{Deserialize, Serialize};

use crate::trace::Requirement;

/// Failures kept per check; the total count is always exact.
const MAX_RECORDED_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: Option<u64>,
    pub requirement: Option<Requirement>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub instances: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
}

impl CheckResult {
    pub fn new(id: &str, description: &str) -> Self {
        CheckResult {
            id: id.to_string(),
            description: description.to_string(),
            instances: 0,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    /// Records one checked instance; `ok == false` adds a failure.
    pub fn record(
        &mut self,
        ok: bool,
        stage: Option<usize>,
        requirement: Option<Requirement>,
        message: impl FnOnce() -> String,
    ) {
        self.instances += 1;
        if !ok {
            self.fail(stage, requirement, message());
        }
    }

    pub fn fail(&mut self, stage: Option<usize>, requirement: Option<Requirement>, message: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(Failure {
                stage: stage.map(|s| s as u64),
                requirement,
                message,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilization {
    pub requirement: Requirement,
    /// Last stage at which the requirement's parameter changed.
    pub last_change: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub engine: String,
    pub stages: u64,
    pub checks: Vec<CheckResult>,
    pub stabilization: Vec<Stabilization>,
    /// Informational counters that do not affect the verdict.
    pub diagnostics: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// The earliest recorded failure across all checks, by stage.
    pub fn first_failure(&self) -> Option<(&CheckResult, &Failure)> {
        self.checks
            .iter()
            .flat_map(|c| c.failures.iter().map(move |f| (c, f)))
            .min_by_key(|(_, f)| f.stage.unwrap_or(u64::MAX))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("engine: {}\nstages: {}\n", self.engine, self.stages);
        for c in &self.checks {
            out.push_str(&format!(
                "{:<4} {} {} ({} instances, {} failures)\n",
                c.id,
                if c.passed() { "PASS" } else { "FAIL" },
                c.description,
                c.instances,
                c.failure_count
            ));
            for f in &c.failures {
                let stage = f.stage.map_or("-".to_string(), |s| s.to_string());
                let req = f.requirement.map_or("-".to_string(), |r| r.to_string());
                out.push_str(&format!("       stage {stage} requirement {req}: {}\n", f.message));
            }
        }
        if !self.stabilization.is_empty() {
            out.push_str("stabilization (last parameter change):\n");
            for s in &self.stabilization {
                let at = s.last_change.map_or("never".to_string(), |t| t.to_string());
                out.push_str(&format!("  {}: {}\n", s.requirement, at));
            }
        }
        for (k, v) in &self.diagnostics {
            out.push_str(&format!("diagnostic {k}: {v}\n"));
        }
        out.push_str(if self.passed() {
            "verdict: PASS\n"
        } else {
            "verdict: FAIL\n"
        });
        out
    }
}
