//! Stage orchestration over persisted, versioned artifacts.
//!
//! Each stage reads the artifacts of earlier stages from the output
//! directory and writes its own. Stages run sequentially; work inside a
//! stage is parallel across statements with results merged in input order.

mod artifacts;
mod config;
mod report;
mod stages;

use std::fmt;
use std::path::{Path, PathBuf};

pub use artifacts::{read_json, read_json_plain, read_jsonl, write_json, write_json_plain, write_jsonl, Layout, SCHEMA_VERSION};
pub use config::{ConfigError, DataSource, FusionSettings, PipelineConfig, Seeds, SelectorSettings, SyntheticSpec};
pub use report::{render_report, Report};
pub use stages::{
    DecompositionRecord, EvidenceRecord, FusionTrace, Metrics, ModelArtifact, PredictionRecord, SelectedRecord,
    TableRecord, TablesFile,
};

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error("missing upstream artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Schema { path: PathBuf, msg: String },
    #[error("ingest: {0}")]
    Ingest(String),
    #[error("training failed: {0}")]
    Train(String),
    #[error("{0}")]
    Invalid(String),
}

impl StageError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> StageError {
        StageError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Synthesize,
    Select,
    BuildPseudo,
    Augment,
    Decompose,
    Solve,
    TrainFusion,
    Verify,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Ingest,
        Stage::Synthesize,
        Stage::Select,
        Stage::BuildPseudo,
        Stage::Augment,
        Stage::Decompose,
        Stage::Solve,
        Stage::TrainFusion,
        Stage::Verify,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Synthesize => "synthesize",
            Stage::Select => "select",
            Stage::BuildPseudo => "build-pseudo",
            Stage::Augment => "augment",
            Stage::Decompose => "decompose",
            Stage::Solve => "solve",
            Stage::TrainFusion => "train-fusion",
            Stage::Verify => "verify",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }

    pub fn from_name(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<(), StageError> {
    let layout = Layout { root: cfg.output() };
    match stage {
        Stage::Ingest => stages::ingest(cfg, &layout),
        Stage::Synthesize => stages::synthesize(cfg, &layout),
        Stage::Select => stages::select(cfg, &layout),
        Stage::BuildPseudo => stages::build_pseudo(&layout),
        Stage::Augment => stages::augment(cfg, &layout),
        Stage::Decompose => stages::decompose(&layout),
        Stage::Solve => stages::solve(&layout),
        Stage::TrainFusion => stages::train_fusion(cfg, &layout),
        Stage::Verify => stages::verify(&layout),
        Stage::Evaluate => stages::evaluate(&layout),
        Stage::Report => report::write_report(&layout),
    }
}

/// Every stage in order, stopping at the first failure.
pub fn run_all(cfg: &PipelineConfig) -> Result<(), StageError> {
    for stage in Stage::ALL {
        run_stage(stage, cfg)?;
    }
    Ok(())
}
