use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tdcomp_core::pipeline::{run_all, run_stage, PipelineConfig, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
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
    /// Every stage in order
    All,
}

impl StageArg {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            StageArg::Ingest => Stage::Ingest,
            StageArg::Synthesize => Stage::Synthesize,
            StageArg::Select => Stage::Select,
            StageArg::BuildPseudo => Stage::BuildPseudo,
            StageArg::Augment => Stage::Augment,
            StageArg::Decompose => Stage::Decompose,
            StageArg::Solve => Stage::Solve,
            StageArg::TrainFusion => Stage::TrainFusion,
            StageArg::Verify => Stage::Verify,
            StageArg::Evaluate => Stage::Evaluate,
            StageArg::Report => Stage::Report,
            StageArg::All => return None,
        })
    }
}

/// Program-guided statement decomposition for table fact verification.
///
/// Accuracy and BLEU numbers come from a seeded synthetic corpus (or the
/// bundled mini corpus), not from a large real benchmark: the verifier is a
/// small hashed bag-of-n-grams model trained from scratch, so absolute
/// numbers are only meaningful relative to each other.
///
/// Exit codes: 0 success, 2 configuration error, 3 stage error.
#[derive(Debug, Parser)]
#[command(name = "tdcomp", version)]
struct Cli {
    /// Stage to run
    #[arg(value_enum)]
    stage: StageArg,
    /// Pipeline configuration (JSON)
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match PipelineConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.stage.stage() {
        Some(s) => run_stage(s, &cfg),
        None => run_all(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
