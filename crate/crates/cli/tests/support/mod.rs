#![allow(dead_code)]

pub mod gen;
pub mod ngram;
pub mod oracle;

use std::path::PathBuf;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Mini-corpus config with absolute data paths and the given output dir.
pub fn mini_config(out: &std::path::Path) -> String {
    let data = repo_root().join("data/mini");
    serde_json::json!({
        "output_dir": out,
        "data": {"files": {"tables_dir": data.join("tables"), "statements": data.join("statements.jsonl")}},
        "seeds": {"corpus": 11, "selector": 12, "augment": 13, "fusion": 14},
        "budget": 500,
        "fusion": {"d": 16, "lr": 0.1, "epochs": 40, "batch": 4}
    })
    .to_string()
}
