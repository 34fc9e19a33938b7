//! Pseudo decomposition dataset construction, augmentation, and
//! inference-time decomposition of statements into subproblems.

mod augment;
mod classify;
mod dataset;
mod infer;
mod template;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::program::Program;

pub use augment::{augment_antonym, augment_dataset, augment_entity_swap, replace_phrase};
pub use classify::{classify_skeleton, detect_type_text};
pub use dataset::{build_pseudo_dataset, DropCounts};
pub use infer::{decompose_statement, filter_wellformed};
pub use template::{instantiate_template, verbalize_claim, verbalize_question, TemplateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionType {
    Conjunction,
    Comparative,
    Superlative,
    Uniqueness,
    Atomic,
}

impl DecompositionType {
    pub const ALL: [DecompositionType; 5] = [
        DecompositionType::Conjunction,
        DecompositionType::Comparative,
        DecompositionType::Superlative,
        DecompositionType::Uniqueness,
        DecompositionType::Atomic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DecompositionType::Conjunction => "conjunction",
            DecompositionType::Comparative => "comparative",
            DecompositionType::Superlative => "superlative",
            DecompositionType::Uniqueness => "uniqueness",
            DecompositionType::Atomic => "atomic",
        }
    }
}

impl fmt::Display for DecompositionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubKind {
    Question,
    Statement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subproblem {
    pub kind: SubKind,
    pub text: String,
    pub probe: Option<Program>,
}

impl Subproblem {
    pub fn question(text: impl Into<String>, probe: Program) -> Subproblem {
        Subproblem {
            kind: SubKind::Question,
            text: text.into(),
            probe: Some(probe),
        }
    }

    pub fn statement(text: impl Into<String>, probe: Program) -> Subproblem {
        Subproblem {
            kind: SubKind::Statement,
            text: text.into(),
            probe: Some(probe),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    EntitySwap,
    Antonym,
}

/// A (statement, type, decomposition) triple with the program it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoSample {
    pub statement_id: String,
    #[serde(rename = "type")]
    pub c: DecompositionType,
    pub provenance: Provenance,
    pub decomposition: Vec<Subproblem>,
    pub table_id: String,
    pub statement: String,
    pub label: bool,
    pub program: Program,
}
