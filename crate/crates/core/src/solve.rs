//! Answering sub-questions and verifying sub-statements by probe execution,
//! then pairing each subproblem with its answer.

use serde::{Deserialize, Serialize};

use crate::decompose::{SubKind, Subproblem};
use crate::program::{execute, ExecError, RuntimeValue};
use crate::table::Table;

pub const NO_EVIDENCE: &str = "no evidence";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("subproblem has no probe")]
    MissingProbe,
    #[error("expected a {expected:?}, got a {found:?}")]
    WrongKind { expected: SubKind, found: SubKind },
    #[error("probe failed: {0}")]
    Exec(#[from] ExecError),
    #[error("probe returned {0}, which cannot answer this subproblem")]
    Result(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub d: String,
    pub a: String,
}

impl EvidenceItem {
    /// Pair text "d a" fed to the encoder.
    pub fn pair_text(&self) -> String {
        format!("{} {}", self.d, self.a).trim().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub items: Vec<EvidenceItem>,
}

impl Evidence {
    pub fn placeholder() -> Evidence {
        Evidence {
            items: vec![EvidenceItem {
                d: NO_EVIDENCE.into(),
                a: String::new(),
            }],
        }
    }

    pub fn is_placeholder(&self) -> bool {
        *self == Evidence::placeholder()
    }
}

fn run(sub: &Subproblem, t: &Table, expected: SubKind) -> Result<RuntimeValue, SolveError> {
    if sub.kind != expected {
        return Err(SolveError::WrongKind {
            expected,
            found: sub.kind,
        });
    }
    let probe = sub.probe.as_ref().ok_or(SolveError::MissingProbe)?;
    Ok(execute(probe, t)?)
}

pub fn answer_subquestion(sub: &Subproblem, t: &Table) -> Result<String, SolveError> {
    match run(sub, t, SubKind::Question)? {
        v @ (RuntimeValue::Number(_) | RuntimeValue::Text(_) | RuntimeValue::Date(_)) => Ok(v.render()),
        other => Err(SolveError::Result(other.render())),
    }
}

pub fn verify_substatement(sub: &Subproblem, t: &Table) -> Result<String, SolveError> {
    match run(sub, t, SubKind::Statement)? {
        RuntimeValue::Bool(b) => Ok(b.to_string()),
        other => Err(SolveError::Result(other.render())),
    }
}

pub fn solve(sub: &Subproblem, t: &Table) -> Result<String, SolveError> {
    match sub.kind {
        SubKind::Question => answer_subquestion(sub, t),
        SubKind::Statement => verify_substatement(sub, t),
    }
}

/// Pair every subproblem with its answer, in order. No subproblems, or any
/// failure, yields the placeholder.
pub fn assemble_evidence(subs: &[Subproblem], t: &Table) -> Evidence {
    if subs.is_empty() {
        return Evidence::placeholder();
    }
    let items: Result<Vec<EvidenceItem>, SolveError> = subs
        .iter()
        .map(|s| {
            Ok(EvidenceItem {
                d: s.text.clone(),
                a: solve(s, t)?,
            })
        })
        .collect();
    items.map_or_else(|_| Evidence::placeholder(), |items| Evidence { items })
}
