//! Program-guided statement decomposition for table-based fact verification.

pub mod corpus;
pub mod decompose;
pub mod eval;
pub mod fusion;
pub mod lexicon;
pub mod pipeline;
pub mod program;
pub mod solve;
pub mod synthesis;
pub mod table;

pub use corpus::{generate_synthetic_corpus, SyntheticConfig, SyntheticCorpus};
pub use decompose::{DecompositionType, Provenance, PseudoSample, SubKind, Subproblem};
pub use eval::{bleu4, coverage_report, Coverage};
pub use fusion::{FusionInput, FusionModel};
pub use pipeline::{run_all, run_stage, ConfigError, PipelineConfig, Stage, StageError};
pub use program::{execute, parse_program, print_program, Operator, Program, RuntimeValue};
pub use solve::{Evidence, EvidenceItem};
pub use synthesis::{Candidate, CandidateSet, SelectorModel};
pub use table::{Split, Statement, Subset, Table};
