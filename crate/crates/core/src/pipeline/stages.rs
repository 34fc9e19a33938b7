use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::artifacts::{read_json, read_json_plain, read_jsonl, write_json, write_json_plain, write_jsonl, Layout, SCHEMA_VERSION};
use super::{DataSource, PipelineConfig, StageError};
use crate::corpus::{apportion, dataset_stats, generate_synthetic_corpus, GoldRecord, SplitStats};
use crate::decompose::{
    augment_dataset, build_pseudo_dataset, decompose_statement, detect_type_text, filter_wellformed, DecompositionType,
    DropCounts, Provenance, PseudoSample, Subproblem,
};
use crate::eval::{accuracy_report, bleu4, coverage_report, tokenize, AccuracyReport, Coverage};
use crate::fusion::{init_model, predict_input, train_fusion as fit_fusion, FusionConfig, FusionInput, FusionModel};
use crate::program::Program;
use crate::solve::{assemble_evidence, Evidence, EvidenceItem};
use crate::synthesis::{
    enumerate_with_depth, select_program, train_selector, CandidateSet, SelectorConfig, SelectorExample,
    SelectorModel, StatementContext,
};
use crate::table::{link_entities, load_table, Split, Statement, Subset, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub id: String,
    pub caption: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesFile {
    pub tables: Vec<TableRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedRecord {
    pub statement_id: String,
    pub program: Option<Program>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub statement_id: String,
    #[serde(rename = "type")]
    pub c: DecompositionType,
    pub valid: bool,
    pub decomposition: Vec<Subproblem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub statement_id: String,
    pub evidence: Vec<EvidenceItem>,
}

/// Fusion weights with the schema key as a plain field, so the large
/// encoder map is written without buffering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub d: usize,
    pub b: f64,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    pub encoder: BTreeMap<u32, Vec<f64>>,
}

impl From<FusionModel> for ModelArtifact {
    fn from(m: FusionModel) -> Self {
        ModelArtifact {
            schema_version: SCHEMA_VERSION,
            d: m.d,
            b: m.b,
            w: m.w,
            encoder: m.encoder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionTrace {
    pub with_evidence: Vec<f64>,
    pub no_evidence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub statement_id: String,
    pub split: Split,
    pub subset: Option<Subset>,
    #[serde(rename = "type")]
    pub c: DecompositionType,
    pub gold_type: Option<DecompositionType>,
    pub label: bool,
    pub prob_evidence: f64,
    pub pred_evidence: bool,
    pub prob_baseline: f64,
    pub pred_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub all: AccuracyReport,
    /// Accuracy on the test split and its simple/complex subsets.
    pub test: Option<f64>,
    pub simple: Option<f64>,
    pub complex: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuSummary {
    pub split: Split,
    pub pairs: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoSummary {
    pub total: usize,
    pub by_type: BTreeMap<DecompositionType, usize>,
    pub by_provenance: BTreeMap<Provenance, usize>,
    pub dropped: DropCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub statements: usize,
    pub with_evidence: ModelMetrics,
    pub no_evidence: ModelMetrics,
    /// Test accuracy with evidence minus without, in points.
    pub ablation_gain_points: Option<f64>,
    pub coverage: Coverage,
    pub bleu4: Option<BleuSummary>,
    pub pseudo: PseudoSummary,
    pub dataset: BTreeMap<Split, SplitStats>,
    pub selector_epochs: usize,
    pub selector_final_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SelectorTrace {
    total_loss: Vec<f64>,
}

fn invalid(path: &std::path::Path, msg: impl Into<String>) -> StageError {
    StageError::Schema {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn load_tables(layout: &Layout) -> Result<BTreeMap<String, Table>, StageError> {
    let path = layout.tables();
    let file: TablesFile = read_json(&path)?;
    file.tables
        .into_iter()
        .map(|r| {
            Table::from_raw(r.id.clone(), r.caption, &r.header, &r.rows)
                .map(|t| (r.id, t))
                .map_err(|e| invalid(&path, e.to_string()))
        })
        .collect()
}

fn load_statements(layout: &Layout) -> Result<Vec<Statement>, StageError> {
    let path = layout.statements();
    let out: Vec<Statement> = read_jsonl(&path)?;
    for s in &out {
        if s.label.is_none() || s.split.is_none() {
            return Err(invalid(&path, format!("statement {} lacks a label or split", s.id)));
        }
    }
    Ok(out)
}

fn label(s: &Statement) -> bool {
    s.label.expect("checked on load")
}

fn split(s: &Statement) -> Split {
    s.split.expect("checked on load")
}

fn table_of<'a>(tables: &'a BTreeMap<String, Table>, s: &Statement) -> &'a Table {
    &tables[&s.table_id]
}

/// Index records by statement id and require one per statement.
fn by_statement<'a, T>(
    path: &std::path::Path,
    statements: &[Statement],
    records: &'a [T],
    id: impl Fn(&T) -> &str,
) -> Result<BTreeMap<&'a str, &'a T>, StageError> {
    let map: BTreeMap<&str, &T> = records.iter().map(|r| (id(r), r)).collect();
    if let Some(s) = statements.iter().find(|s| !map.contains_key(s.id.as_str())) {
        return Err(invalid(path, format!("no record for statement {}", s.id)));
    }
    Ok(map)
}

fn read_table_dir(dir: &std::path::Path) -> Result<Vec<Table>, StageError> {
    let entries = std::fs::read_dir(dir).map_err(|e| StageError::io(dir, e))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e.map_err(|e| StageError::io(dir, e))?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            paths.push(p);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            load_table(p, id).map_err(|e| StageError::Ingest(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Statements without a split inherit one drawn per table.
fn assign_missing_splits(statements: &mut [Statement], fractions: [f64; 3], seed: u64) {
    let tables: BTreeSet<String> = statements
        .iter()
        .filter(|s| s.split.is_none())
        .map(|s| s.table_id.clone())
        .collect();
    let mut splits: Vec<Split> = Vec::with_capacity(tables.len());
    for (s, k) in [Split::Train, Split::Val, Split::Test].into_iter().zip(apportion(tables.len(), &fractions)) {
        splits.extend(std::iter::repeat_n(s, k));
    }
    splits.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let assigned: BTreeMap<String, Split> = tables.into_iter().zip(splits).collect();
    for s in statements.iter_mut().filter(|s| s.split.is_none()) {
        s.split = Some(assigned[&s.table_id]);
    }
}

pub(crate) fn ingest(cfg: &PipelineConfig, layout: &Layout) -> Result<(), StageError> {
    let (tables, mut statements, gold) = match &cfg.data {
        DataSource::Synthetic(_) => {
            let sc = cfg.synthetic().expect("synthetic source");
            let c = generate_synthetic_corpus(&sc, cfg.split_fractions).map_err(|e| StageError::Ingest(e.to_string()))?;
            (c.tables, c.statements, Some(c.gold))
        }
        DataSource::Files { tables_dir, statements } => {
            let tables = read_table_dir(&cfg.resolve(tables_dir))?;
            let path = cfg.resolve(statements);
            let file = std::fs::File::open(&path).map_err(|e| StageError::io(&path, e))?;
            let st = crate::table::read_statements(std::io::BufReader::new(file))
                .map_err(|e| StageError::Ingest(format!("{}: {e}", path.display())))?;
            (tables, st, None)
        }
    };
    let mut table_ids = BTreeSet::new();
    for t in &tables {
        if !table_ids.insert(t.id.as_str()) {
            return Err(StageError::Ingest(format!("duplicate table id {}", t.id)));
        }
    }
    let mut ids = BTreeSet::new();
    for s in &statements {
        if !ids.insert(s.id.as_str()) {
            return Err(StageError::Ingest(format!("duplicate statement id {}", s.id)));
        }
        if !table_ids.contains(s.table_id.as_str()) {
            return Err(StageError::Ingest(format!("statement {} names unknown table {}", s.id, s.table_id)));
        }
        if s.label.is_none() {
            return Err(StageError::Ingest(format!("statement {} has no label", s.id)));
        }
    }
    if statements.is_empty() {
        return Err(StageError::Ingest("no statements".into()));
    }
    assign_missing_splits(&mut statements, cfg.split_fractions, cfg.seeds.corpus);
    for s in statements.iter_mut() {
        if s.split == Some(Split::Test) && s.subset.is_none() {
            s.subset = Some(match detect_type_text(s) {
                DecompositionType::Atomic => Subset::Simple,
                _ => Subset::Complex,
            });
        }
    }

    let records = TablesFile {
        tables: tables
            .iter()
            .map(|t| TableRecord {
                id: t.id.clone(),
                caption: t.caption.clone(),
                header: t.header(),
                rows: t.raw_rows(),
            })
            .collect(),
    };
    write_json(&layout.tables(), &records)?;
    write_jsonl(&layout.statements(), &statements)?;
    match gold {
        Some(g) => write_jsonl(&layout.gold(), &g),
        None => match std::fs::remove_file(layout.gold()) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(StageError::io(&layout.gold(), e)),
            _ => Ok(()),
        },
    }
}

pub(crate) fn synthesize(cfg: &PipelineConfig, layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let sets: Vec<CandidateSet> = statements
        .par_iter()
        .map(|s| {
            let t = table_of(&tables, s);
            let s = s.without_label();
            enumerate_with_depth(&s, t, &link_entities(&s, t), cfg.budget, cfg.max_depth)
        })
        .collect();
    write_jsonl(&layout.candidates(), &sets)
}

fn load_candidates(layout: &Layout) -> Result<Vec<CandidateSet>, StageError> {
    read_jsonl(&layout.candidates())
}

pub(crate) fn select(cfg: &PipelineConfig, layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let sets = load_candidates(layout)?;
    let cs = by_statement(&layout.candidates(), &statements, &sets, |c| &c.statement_id)?;
    let train: Vec<&Statement> = statements.iter().filter(|s| split(s) == Split::Train).collect();
    let examples: Vec<SelectorExample> = train
        .par_iter()
        .map(|s| SelectorExample::new(&StatementContext::new(s, table_of(&tables, s)), cs[s.id.as_str()], label(s)))
        .collect();
    let sc = SelectorConfig {
        epochs: cfg.selector.epochs,
        lr: cfg.selector.lr,
        gamma: cfg.gamma,
        seed: cfg.seeds.selector,
    };
    let (model, trace) = train_selector(&examples, &sc).map_err(|e| StageError::Train(e.to_string()))?;
    let selected: Vec<SelectedRecord> = train
        .par_iter()
        .map(|s| {
            let ctx = StatementContext::new(s, table_of(&tables, s));
            SelectedRecord {
                statement_id: s.id.clone(),
                program: select_program(&model, &ctx, s.label, cs[s.id.as_str()]),
            }
        })
        .collect();
    write_json(&layout.selector(), &model)?;
    write_json(&layout.selector_trace(), &SelectorTrace { total_loss: trace })?;
    write_jsonl(&layout.selected(), &selected)
}

pub(crate) fn build_pseudo(layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let selected: Vec<SelectedRecord> = read_jsonl(&layout.selected())?;
    let by_id: BTreeMap<&str, &Statement> = statements.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut triples = Vec::new();
    for r in &selected {
        let Some(s) = by_id.get(r.statement_id.as_str()) else {
            return Err(invalid(&layout.selected(), format!("unknown statement {}", r.statement_id)));
        };
        if let Some(z) = &r.program {
            triples.push((table_of(&tables, s), *s, z));
        }
    }
    let held_out: BTreeSet<String> = statements
        .iter()
        .filter(|s| split(s) != Split::Train)
        .map(|s| s.id.clone())
        .collect();
    let (samples, drops) = build_pseudo_dataset(&triples, &held_out);
    write_jsonl(&layout.pseudo(), &samples)?;
    write_json(&layout.pseudo_drops(), &drops)
}

pub(crate) fn augment(cfg: &PipelineConfig, layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let samples: Vec<PseudoSample> = read_jsonl(&layout.pseudo())?;
    let out = augment_dataset(&samples, &tables, cfg.augment_volume, cfg.seeds.augment);
    write_jsonl(&layout.augmented(), &out)
}

pub(crate) fn decompose(layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let sets = load_candidates(layout)?;
    let cs = by_statement(&layout.candidates(), &statements, &sets, |c| &c.statement_id)?;
    let model: SelectorModel = read_json(&layout.selector())?;
    let records: Vec<DecompositionRecord> = statements
        .par_iter()
        .map(|s| {
            let t = table_of(&tables, s);
            // Inference mode: the selector never sees the label here.
            let s = s.without_label();
            let (c, subs) = decompose_statement(&s, t, &model, cs[s.id.as_str()]);
            let subs = filter_wellformed(subs, t, &s.text);
            DecompositionRecord {
                statement_id: s.id.clone(),
                c,
                valid: !subs.is_empty(),
                decomposition: subs,
            }
        })
        .collect();
    write_jsonl(&layout.decompositions(), &records)
}

pub(crate) fn solve(layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let decs: Vec<DecompositionRecord> = read_jsonl(&layout.decompositions())?;
    let dec = by_statement(&layout.decompositions(), &statements, &decs, |d| &d.statement_id)?;
    let records: Vec<EvidenceRecord> = statements
        .par_iter()
        .map(|s| EvidenceRecord {
            statement_id: s.id.clone(),
            evidence: assemble_evidence(&dec[s.id.as_str()].decomposition, table_of(&tables, s)).items,
        })
        .collect();
    write_jsonl(&layout.evidence(), &records)
}

fn load_evidence(layout: &Layout, statements: &[Statement]) -> Result<BTreeMap<String, Evidence>, StageError> {
    let recs: Vec<EvidenceRecord> = read_jsonl(&layout.evidence())?;
    by_statement(&layout.evidence(), statements, &recs, |r| &r.statement_id)?;
    Ok(recs
        .into_iter()
        .map(|r| (r.statement_id, Evidence { items: r.evidence }))
        .collect())
}

fn inputs(
    statements: &[&Statement],
    tables: &BTreeMap<String, Table>,
    evidence: Option<&BTreeMap<String, Evidence>>,
) -> Vec<(FusionInput, bool)> {
    let placeholder = Evidence::placeholder();
    statements
        .par_iter()
        .map(|s| {
            let e = evidence.map_or(&placeholder, |m| &m[&s.id]);
            (FusionInput::new(&s.text, table_of(tables, s), e), label(s))
        })
        .collect()
}

pub(crate) fn train_fusion(cfg: &PipelineConfig, layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let evidence = load_evidence(layout, &statements)?;
    let train: Vec<&Statement> = statements.iter().filter(|s| split(s) == Split::Train).collect();
    let fc = FusionConfig {
        d: cfg.fusion.d,
        lr: cfg.fusion.lr,
        epochs: cfg.fusion.epochs,
        batch: cfg.fusion.batch,
        seed: cfg.seeds.fusion,
        init_scale: cfg.fusion.init_scale,
    };
    let fit = |data: &[(FusionInput, bool)]| {
        let m0 = init_model(fc.d, data.iter().map(|(x, _)| x), fc.seed, fc.init_scale);
        fit_fusion(m0, data, &fc).map_err(|e| StageError::Train(e.to_string()))
    };
    let (with_ev, trace_ev) = fit(&inputs(&train, &tables, Some(&evidence)))?;
    let (no_ev, trace_no) = fit(&inputs(&train, &tables, None))?;
    write_json_plain(&layout.model_evidence(), &ModelArtifact::from(with_ev))?;
    write_json_plain(&layout.model_baseline(), &ModelArtifact::from(no_ev))?;
    write_json(
        &layout.fusion_trace(),
        &FusionTrace {
            with_evidence: trace_ev,
            no_evidence: trace_no,
        },
    )
}

fn load_model(path: &std::path::Path) -> Result<FusionModel, StageError> {
    let a: ModelArtifact = read_json_plain(path)?;
    if a.schema_version != SCHEMA_VERSION {
        return Err(invalid(path, format!("schema_version {}, expected {SCHEMA_VERSION}", a.schema_version)));
    }
    let m = FusionModel {
        d: a.d,
        b: a.b,
        w: a.w,
        encoder: a.encoder,
    };
    m.validate().map_err(|e| invalid(path, e.to_string()))?;
    Ok(m)
}

fn load_gold(layout: &Layout) -> Result<Option<Vec<GoldRecord>>, StageError> {
    if layout.gold().exists() {
        read_jsonl(&layout.gold()).map(Some)
    } else {
        Ok(None)
    }
}

pub(crate) fn verify(layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let evidence = load_evidence(layout, &statements)?;
    let decs: Vec<DecompositionRecord> = read_jsonl(&layout.decompositions())?;
    let dec = by_statement(&layout.decompositions(), &statements, &decs, |d| &d.statement_id)?;
    let with_ev = load_model(&layout.model_evidence())?;
    let no_ev = load_model(&layout.model_baseline())?;
    let gold: BTreeMap<String, DecompositionType> = load_gold(layout)?
        .unwrap_or_default()
        .into_iter()
        .map(|g| (g.statement_id, g.c))
        .collect();
    let all: Vec<&Statement> = statements.iter().collect();
    let xe = inputs(&all, &tables, Some(&evidence));
    let xb = inputs(&all, &tables, None);
    let records: Vec<PredictionRecord> = all
        .par_iter()
        .zip(xe.par_iter().zip(&xb))
        .map(|(s, ((xe, _), (xb, _)))| {
            let pe = predict_input(&with_ev, xe);
            let pb = predict_input(&no_ev, xb);
            PredictionRecord {
                statement_id: s.id.clone(),
                split: split(s),
                subset: s.subset,
                c: dec[s.id.as_str()].c,
                gold_type: gold.get(&s.id).copied(),
                label: label(s),
                prob_evidence: pe,
                pred_evidence: pe > 0.5,
                prob_baseline: pb,
                pred_baseline: pb > 0.5,
            }
        })
        .collect();
    write_jsonl(&layout.predictions(), &records)
}

fn accuracy_where(preds: &[PredictionRecord], pick: impl Fn(&PredictionRecord) -> bool, evidence: bool) -> Option<f64> {
    let sel: Vec<&PredictionRecord> = preds.iter().filter(|p| pick(p)).collect();
    if sel.is_empty() {
        return None;
    }
    let ok = sel
        .iter()
        .filter(|p| (if evidence { p.pred_evidence } else { p.pred_baseline }) == p.label)
        .count();
    Some(ok as f64 / sel.len() as f64)
}

fn model_metrics(preds: &[PredictionRecord], evidence: bool) -> Result<ModelMetrics, StageError> {
    let labels: Vec<bool> = preds.iter().map(|p| p.label).collect();
    let guesses: Vec<bool> = preds
        .iter()
        .map(|p| if evidence { p.pred_evidence } else { p.pred_baseline })
        .collect();
    let types: Vec<DecompositionType> = preds.iter().map(|p| p.c).collect();
    let splits: Vec<Split> = preds.iter().map(|p| p.split).collect();
    Ok(ModelMetrics {
        all: accuracy_report(&guesses, &labels, &types, &splits).map_err(|e| StageError::Invalid(e.to_string()))?,
        test: accuracy_where(preds, |p| p.split == Split::Test, evidence),
        simple: accuracy_where(preds, |p| p.subset == Some(Subset::Simple), evidence),
        complex: accuracy_where(preds, |p| p.subset == Some(Subset::Complex), evidence),
    })
}

/// Corpus BLEU-4 of produced against gold decompositions, subproblem texts
/// joined with " ; ", over non-atomic gold statements of the validation
/// split, or of the test split when validation has none.
fn decomposition_bleu(
    statements: &[Statement],
    gold: &[GoldRecord],
    decs: &BTreeMap<&str, &DecompositionRecord>,
) -> Option<BleuSummary> {
    let split_of: BTreeMap<&str, Split> = statements.iter().map(|s| (s.id.as_str(), split(s))).collect();
    for target in [Split::Val, Split::Test] {
        let mut hyps = Vec::new();
        let mut refs = Vec::new();
        for g in gold {
            if g.decomposition.is_empty() || split_of.get(g.statement_id.as_str()) != Some(&target) {
                continue;
            }
            let Some(d) = decs.get(g.statement_id.as_str()) else {
                continue;
            };
            let hyp: Vec<&str> = d.decomposition.iter().map(|x| x.text.as_str()).collect();
            hyps.push(hyp.join(" ; "));
            refs.push(g.decomposition.join(" ; "));
        }
        if hyps.is_empty() {
            continue;
        }
        let h: Vec<Vec<&str>> = hyps.iter().map(|x| tokenize(x)).collect();
        let r: Vec<Vec<&str>> = refs.iter().map(|x| tokenize(x)).collect();
        let score = bleu4(&h, &r).ok()?;
        return Some(BleuSummary {
            split: target,
            pairs: hyps.len(),
            score,
        });
    }
    None
}

pub(crate) fn evaluate(layout: &Layout) -> Result<(), StageError> {
    let tables = load_tables(layout)?;
    let statements = load_statements(layout)?;
    let preds: Vec<PredictionRecord> = read_jsonl(&layout.predictions())?;
    by_statement(&layout.predictions(), &statements, &preds, |p| &p.statement_id)?;
    let decs: Vec<DecompositionRecord> = read_jsonl(&layout.decompositions())?;
    let dec = by_statement(&layout.decompositions(), &statements, &decs, |d| &d.statement_id)?;
    let augmented: Vec<PseudoSample> = read_jsonl(&layout.augmented())?;
    let drops: DropCounts = read_json(&layout.pseudo_drops())?;
    let trace: SelectorTrace = read_json(&layout.selector_trace())?;
    let gold = load_gold(layout)?;

    let with_evidence = model_metrics(&preds, true)?;
    let no_evidence = model_metrics(&preds, false)?;
    let ablation_gain_points = match (with_evidence.test, no_evidence.test) {
        (Some(a), Some(b)) => Some(100.0 * (a - b)),
        _ => None,
    };

    let valid: BTreeMap<String, bool> = decs.iter().map(|d| (d.statement_id.clone(), d.valid)).collect();
    let split_of: BTreeMap<String, Split> = statements.iter().map(|s| (s.id.clone(), split(s))).collect();
    let subset_of: BTreeMap<String, Subset> = statements
        .iter()
        .filter_map(|s| s.subset.map(|x| (s.id.clone(), x)))
        .collect();

    let mut by_type = BTreeMap::new();
    let mut by_provenance = BTreeMap::new();
    for a in &augmented {
        *by_type.entry(a.c).or_insert(0) += 1;
        *by_provenance.entry(a.provenance).or_insert(0) += 1;
    }

    let dataset = [Split::Train, Split::Val, Split::Test]
        .into_iter()
        .map(|sp| {
            let members: Vec<&Statement> = statements.iter().filter(|s| split(s) == sp).collect();
            (sp, dataset_stats(&tables, &members))
        })
        .collect();

    let metrics = Metrics {
        statements: statements.len(),
        with_evidence,
        no_evidence,
        ablation_gain_points,
        coverage: coverage_report(&valid, &split_of, &subset_of),
        bleu4: gold.as_deref().and_then(|g| decomposition_bleu(&statements, g, &dec)),
        pseudo: PseudoSummary {
            total: augmented.len(),
            by_type,
            by_provenance,
            dropped: drops,
        },
        dataset,
        selector_epochs: trace.total_loss.len(),
        selector_final_loss: trace.total_loss.last().copied(),
    };
    write_json(&layout.metrics(), &metrics)
}
