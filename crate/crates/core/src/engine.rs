//! Plumbing shared by the two stage engines.

use thiserror::Error;

use crate::stream::StreamError;
use crate::trace::{TraceError, TraceEvent};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Groups records by stage, checking that stages strictly increase between
/// groups.
pub(crate) fn stages_of(trace: &[TraceEvent]) -> Result<Vec<(u64, &[TraceEvent])>, TraceError> {
    let mut out: Vec<(u64, &[TraceEvent])> = Vec::new();
    let mut start = 0;
    for k in 1..=trace.len() {
        if k == trace.len() || trace[k].stage != trace[start].stage {
            let stage = trace[start].stage;
            if let Some(&(prev, _)) = out.last() {
                if stage <= prev {
                    return Err(trace[start].malformed("stages out of order"));
                }
            }
            out.push((stage, &trace[start..k]));
            start = k;
        }
    }
    Ok(out)
}

/// Turns a replay error into the stage it names, if any.
pub(crate) fn error_stage(e: &TraceError) -> Option<usize> {
    match e {
        TraceError::Malformed { stage, .. } => Some(*stage as usize),
        _ => None,
    }
}
