use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::artifacts::{read_json, write_json, write_text, Layout};
use super::stages::{BleuSummary, Metrics, ModelMetrics, PseudoSummary};
use super::StageError;
use crate::corpus::SplitStats;
use crate::decompose::DecompositionType;
use crate::eval::Coverage;
use crate::table::Split;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub model: String,
    pub all: f64,
    pub test: Option<f64>,
    pub simple: Option<f64>,
    pub complex: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRow {
    #[serde(rename = "type")]
    pub c: DecompositionType,
    pub share: f64,
    pub count: usize,
    pub with_evidence: f64,
    pub no_evidence: f64,
}

/// Final summary. All rates are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub statements: usize,
    pub verification: Vec<VerificationRow>,
    pub ablation_gain_points: Option<f64>,
    pub by_type: Vec<TypeRow>,
    pub coverage: Coverage,
    pub decomposition_bleu4: Option<BleuSummary>,
    pub pseudo: PseudoSummary,
    pub dataset: BTreeMap<Split, SplitStats>,
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

fn row(name: &str, m: &ModelMetrics) -> VerificationRow {
    VerificationRow {
        model: name.into(),
        all: pct(m.all.overall),
        test: m.test.map(pct),
        simple: m.simple.map(pct),
        complex: m.complex.map(pct),
    }
}

impl Report {
    pub fn from_metrics(m: &Metrics) -> Report {
        let by_type = DecompositionType::ALL
            .into_iter()
            .filter_map(|c| {
                let a = m.with_evidence.all.per_type.get(&c)?;
                let b = m.no_evidence.all.per_type.get(&c)?;
                Some(TypeRow {
                    c,
                    share: pct(a.share),
                    count: a.count,
                    with_evidence: pct(a.accuracy),
                    no_evidence: pct(b.accuracy),
                })
            })
            .collect();
        Report {
            statements: m.statements,
            verification: vec![row("with evidence", &m.with_evidence), row("no evidence", &m.no_evidence)],
            ablation_gain_points: m.ablation_gain_points,
            by_type,
            coverage: m.coverage,
            decomposition_bleu4: m.bleu4.clone(),
            pseudo: m.pseudo.clone(),
            dataset: m.dataset.clone(),
        }
    }
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

pub fn render_report(r: &Report) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "statements: {}", r.statements);
    let _ = writeln!(w);
    let _ = writeln!(w, "verification accuracy (%)");
    let _ = writeln!(w, "{:<16}{:>8}{:>8}{:>8}{:>8}", "model", "all", "test", "simple", "complex");
    for v in &r.verification {
        let _ = writeln!(
            w,
            "{:<16}{:>8}{:>8}{:>8}{:>8}",
            v.model,
            cell(Some(v.all)),
            cell(v.test),
            cell(v.simple),
            cell(v.complex)
        );
    }
    let _ = writeln!(w, "evidence gain on test (points): {}", cell(r.ablation_gain_points));
    let _ = writeln!(w);
    let _ = writeln!(w, "accuracy by decomposition type (%)");
    let _ = writeln!(w, "{:<14}{:>8}{:>8}{:>10}{:>10}", "type", "share", "count", "evidence", "none");
    for t in &r.by_type {
        let _ = writeln!(
            w,
            "{:<14}{:>8.2}{:>8}{:>10.2}{:>10.2}",
            t.c.name(),
            t.share,
            t.count,
            t.with_evidence,
            t.no_evidence
        );
    }
    let _ = writeln!(w);
    let _ = writeln!(w, "decomposition coverage (%)");
    let _ = writeln!(w, "{}", Coverage::COLUMNS.map(|c| format!("{c:>9}")).concat());
    let _ = writeln!(w, "{}", r.coverage.values().map(|v| format!("{v:>9.2}")).concat());
    let _ = writeln!(w);
    match &r.decomposition_bleu4 {
        Some(b) => {
            let split = serde_json::to_value(b.split).ok();
            let name = split.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
            let _ = writeln!(w, "decomposition bleu-4 ({name}, {} pairs): {:.4}", b.pairs, b.score);
        }
        None => {
            let _ = writeln!(w, "decomposition bleu-4: -");
        }
    }
    let _ = writeln!(w);
    let _ = writeln!(w, "pseudo decompositions: {}", r.pseudo.total);
    for (c, n) in &r.pseudo.by_type {
        let _ = writeln!(w, "  {:<14}{n:>8}", c.name());
    }
    for (p, n) in &r.pseudo.by_provenance {
        let name = serde_json::to_value(p).ok();
        let _ = writeln!(w, "  {:<14}{n:>8}", name.as_ref().and_then(|v| v.as_str()).unwrap_or("?"));
    }
    let d = &r.pseudo.dropped;
    let _ = writeln!(
        w,
        "  dropped: held out {}, atomic {}, template {}, execution {}",
        d.held_out, d.atomic, d.template, d.execution
    );
    let _ = writeln!(w);
    let _ = writeln!(w, "dataset statistics");
    let _ = writeln!(w, "{:<8}{:>10}{:>8}{:>8}{:>8}", "split", "sentences", "tables", "rows", "cols");
    for (s, st) in &r.dataset {
        let name = match s {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        };
        let _ = writeln!(
            w,
            "{name:<8}{:>10}{:>8}{:>8.2}{:>8.2}",
            st.sentences, st.tables, st.mean_rows, st.mean_cols
        );
    }
    out
}

pub(crate) fn write_report(layout: &Layout) -> Result<(), StageError> {
    let metrics: Metrics = read_json(&layout.metrics())?;
    let report = Report::from_metrics(&metrics);
    write_json(&layout.report_json(), &report)?;
    write_text(&layout.report_text(), &render_report(&report))
}
