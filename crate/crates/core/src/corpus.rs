//! Synthetic table/statement corpora with known programs, labels, and gold
//! decompositions, plus corpus statistics.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{instantiate_template, DecompositionType};
use crate::program::{execute, Operator, Program, RuntimeValue};
use crate::table::{Split, Statement, Subset, Table};

/// Type shares in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mixture {
    pub conjunction: f64,
    pub superlative: f64,
    pub comparative: f64,
    pub uniqueness: f64,
    pub atomic: f64,
}

impl Default for Mixture {
    fn default() -> Self {
        Mixture {
            conjunction: 15.0,
            superlative: 13.0,
            comparative: 13.0,
            uniqueness: 6.0,
            atomic: 53.0,
        }
    }
}

impl Mixture {
    fn weights(&self) -> [(DecompositionType, f64); 5] {
        use DecompositionType::*;
        [
            (Conjunction, self.conjunction),
            (Superlative, self.superlative),
            (Comparative, self.comparative),
            (Uniqueness, self.uniqueness),
            (Atomic, self.atomic),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    #[serde(default)]
    pub mixture: Mixture,
    /// Statements per table.
    #[serde(default = "default_per_table")]
    pub per_table: usize,
}

fn default_per_table() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid synthetic corpus setting: {0}")]
    Invalid(String),
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::Invalid(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(3..=50).contains(&self.rows) {
            return bad(format!("rows must be in 3..=50, got {}", self.rows));
        }
        if !(3..=8).contains(&self.cols) {
            return bad(format!("cols must be in 3..=8, got {}", self.cols));
        }
        if self.per_table == 0 {
            return bad("per_table must be at least 1".into());
        }
        let w = self.mixture.weights();
        if w.iter().any(|(_, x)| !(x.is_finite() && *x >= 0.0)) || w.iter().map(|(_, x)| x).sum::<f64>() <= 0.0 {
            return bad("mixture weights must be non-negative with a positive sum".into());
        }
        Ok(())
    }
}

/// The generating program and gold decomposition of one statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub statement_id: String,
    #[serde(rename = "type")]
    pub c: DecompositionType,
    pub program: Program,
    pub decomposition: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub tables: Vec<Table>,
    pub statements: Vec<Statement>,
    pub gold: Vec<GoldRecord>,
}

const NAME_COLUMNS: &[&str] = &["player", "team", "club", "rider", "nation"];
const CATEGORY_COLUMNS: &[&str] = &["venue", "city", "region", "ground", "location"];
const NUMBER_COLUMNS: &[&str] = &[
    "goals", "points", "wins", "laps", "assists", "medals", "caps", "games", "attendance", "votes",
];
const CATEGORIES: &[&str] = &[
    "glasgow", "paisley", "leith", "ayr", "perth", "dundee", "stirling", "oban", "largs", "troon",
    "alloa", "forfar", "elgin", "nairn", "wick", "kelso",
];
const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "tu", "vo", "zen", "dar", "pel", "sim", "nor", "bal", "kir", "mon",
    "tal", "gor", "ril", "fan", "dov", "bra",
];

/// Split `total` by `weights` with the largest-remainder method.
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = total - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

fn entity(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=3);
    (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn random_table(id: String, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Table {
    let mut header = vec![
        NAME_COLUMNS.choose(rng).unwrap().to_string(),
        CATEGORY_COLUMNS.choose(rng).unwrap().to_string(),
    ];
    let numeric: Vec<&str> = NUMBER_COLUMNS.choose_multiple(rng, cols - 2).copied().collect();
    header.extend(numeric.iter().map(|s| s.to_string()));

    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut name_col = Vec::with_capacity(rows);
    while name_col.len() < rows {
        let e = entity(rng);
        if names.insert(e.clone()) {
            name_col.push(e);
        }
    }
    // A few repeated categories plus at least one value used exactly once.
    let pool: Vec<&str> = CATEGORIES.choose_multiple(rng, (rows / 2).max(2) + 1).copied().collect();
    let (fresh, shared) = pool.split_last().unwrap();
    let mut cat_col: Vec<&str> = (0..rows).map(|_| *shared.choose(rng).unwrap()).collect();
    let r = rng.random_range(0..rows);
    cat_col[r] = fresh;

    let num_cols: Vec<Vec<u32>> = numeric
        .iter()
        .map(|_| {
            let span = *[60u32, 100, 1000].choose(rng).unwrap();
            let mut vals: Vec<u32> = (1..=span).collect();
            vals.shuffle(rng);
            vals.truncate(rows);
            vals
        })
        .collect();

    let raw: Vec<Vec<String>> = (0..rows)
        .map(|i| {
            let mut row = vec![name_col[i].clone(), cat_col[i].to_string()];
            row.extend(num_cols.iter().map(|c| c[i].to_string()));
            row
        })
        .collect();
    Table::from_raw(id, None, &header, &raw).expect("generated table is rectangular")
}

fn filter_eq(col: &str, val: &str) -> Program {
    Program::apply(Operator::FilterEq, vec![Program::AllRows, Program::col(col), Program::lit(val)])
}

fn hop(rows: Program, col: &str) -> Program {
    Program::apply(Operator::Hop, vec![rows, Program::col(col)])
}

fn eq(a: Program, b: Program) -> Program {
    Program::apply(Operator::Eq, vec![a, b])
}

struct Draft {
    text: String,
    program: Program,
}

/// Another surface from column `c`, different from `not`.
fn other_value(t: &Table, c: usize, not: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let vals: Vec<String> = t.distinct_values(c).into_iter().filter(|v| v != not).collect();
    vals.choose(rng).cloned()
}

fn draft(c: DecompositionType, want: bool, t: &Table, rng: &mut ChaCha8Rng) -> Option<Draft> {
    let rows = t.n_rows();
    let name = t.columns[0].name.clone();
    let cat = t.columns[1].name.clone();
    let numeric: Vec<usize> = (2..t.n_cols()).collect();
    let cell = |r: usize, c: usize| t.cell(r, c).surface.clone();
    match c {
        DecompositionType::Superlative => {
            let col = *numeric.choose(rng)?;
            let cname = &t.columns[col].name;
            let max = rng.random_bool(0.5);
            let value = |r: usize| cell(r, col).parse::<u32>().unwrap_or(0);
            let best = if max {
                (0..rows).max_by_key(|&r| value(r))?
            } else {
                (0..rows).min_by_key(|&r| value(r))?
            };
            let r = if want {
                best
            } else {
                *(0..rows).filter(|&r| r != best).collect::<Vec<_>>().choose(rng)?
            };
            let v = cell(r, 0);
            let word = if max { "highest" } else { "lowest" };
            let text = match rng.random_range(0..2) {
                0 => format!("{v} has the {word} {cname}"),
                _ => format!("{v} had the {word} {cname} of all"),
            };
            let agg = if max { Operator::Max } else { Operator::Min };
            let program = eq(
                Program::apply(agg, vec![Program::AllRows, Program::col(cname)]),
                hop(filter_eq(&name, &v), cname),
            );
            Some(Draft { text, program })
        }
        DecompositionType::Comparative => {
            let col = *numeric.choose(rng)?;
            let cname = &t.columns[col].name;
            let pair: Vec<usize> = (0..rows).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
            let (a, b) = (pair[0], pair[1]);
            let higher = rng.random_bool(0.5);
            let va: u32 = cell(a, col).parse().ok()?;
            let vb: u32 = cell(b, col).parse().ok()?;
            // Order the pair so the claim has the wanted truth value.
            let a_wins = (va > vb) == higher;
            let (a, b) = if a_wins == want { (a, b) } else { (b, a) };
            let (ea, eb) = (cell(a, 0), cell(b, 0));
            let word = if higher { "higher" } else { "lower" };
            let text = format!("{ea} has a {word} {cname} than {eb}");
            let op = if higher { Operator::Greater } else { Operator::Less };
            let program = Program::apply(op, vec![hop(filter_eq(&name, &ea), cname), hop(filter_eq(&name, &eb), cname)]);
            Some(Draft { text, program })
        }
        DecompositionType::Conjunction => {
            let pair: Vec<usize> = (0..rows).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
            let cols: Vec<usize> = (1..t.n_cols()).collect();
            let (c1, c2) = (*cols.choose(rng)?, *cols.choose(rng)?);
            // Which clauses are false when the whole claim should be.
            let (ok1, ok2) = if want {
                (true, true)
            } else {
                *[(false, true), (true, false), (false, false)].choose(rng)?
            };
            let fact = |r: usize, c: usize, ok: bool, rng: &mut ChaCha8Rng| -> Option<String> {
                let truth = cell(r, c);
                if ok {
                    Some(truth)
                } else {
                    other_value(t, c, &truth, rng)
                }
            };
            let x = fact(pair[0], c1, ok1, rng)?;
            let y = fact(pair[1], c2, ok2, rng)?;
            let (a, b) = (cell(pair[0], 0), cell(pair[1], 0));
            let (n1, n2) = (&t.columns[c1].name, &t.columns[c2].name);
            let text = format!("the {n1} of {a} is {x} and the {n2} of {b} is {y}");
            let program = Program::apply(
                Operator::And,
                vec![
                    eq(hop(filter_eq(&name, &a), n1), Program::lit(&x)),
                    eq(hop(filter_eq(&name, &b), n2), Program::lit(&y)),
                ],
            );
            Some(Draft { text, program })
        }
        DecompositionType::Uniqueness => {
            let singles: Vec<usize> = (0..rows)
                .filter(|&r| (0..rows).filter(|&q| cell(q, 1) == cell(r, 1)).count() == 1)
                .collect();
            let r = *singles.choose(rng)?;
            let col = *numeric.choose(rng)?;
            let cname = &t.columns[col].name;
            let v = cell(r, 1);
            let truth = cell(r, col);
            let x = if want { truth } else { other_value(t, col, &truth, rng)? };
            let text = format!("only one row has {cat} {v} and its {cname} is {x}");
            let rows_v = filter_eq(&cat, &v);
            let program = Program::apply(
                Operator::And,
                vec![
                    Program::apply(Operator::Only, vec![rows_v.clone()]),
                    eq(hop(rows_v, cname), Program::lit(&x)),
                ],
            );
            Some(Draft { text, program })
        }
        DecompositionType::Atomic => {
            if rng.random_bool(0.7) {
                let r = rng.random_range(0..rows);
                let col = rng.random_range(1..t.n_cols());
                let cname = &t.columns[col].name;
                let truth = cell(r, col);
                let x = if want { truth } else { other_value(t, col, &truth, rng)? };
                let e = cell(r, 0);
                let text = format!("the {cname} of {e} is {x}");
                Some(Draft {
                    text,
                    program: eq(hop(filter_eq(&name, &e), cname), Program::lit(&x)),
                })
            } else {
                let values = t.distinct_values(1);
                let v = values.choose(rng)?.clone();
                let n = (0..rows).filter(|&q| cell(q, 1) == v).count();
                let k = if want {
                    n
                } else if n > 1 && rng.random_bool(0.5) {
                    n - 1
                } else {
                    n + 1
                };
                let text = format!("there are {k} rows with {cat} {v}");
                let program = eq(
                    Program::apply(Operator::Count, vec![filter_eq(&cat, &v)]),
                    Program::lit(&k.to_string()),
                );
                Some(Draft { text, program })
            }
        }
    }
}

/// Tables are assigned to splits by largest remainder over `fractions`
/// (train, val, test); statements inherit their table's split. Test
/// statements are tagged simple (atomic) or complex (all other types).
pub fn generate_synthetic_corpus(cfg: &SyntheticConfig, fractions: [f64; 3]) -> Result<SyntheticCorpus, CorpusError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_tables = cfg.n.div_ceil(cfg.per_table);
    let tables: Vec<Table> = (0..n_tables)
        .map(|j| random_table(format!("t{j:05}"), cfg.rows, cfg.cols, &mut rng))
        .collect();

    let mut table_split: Vec<Split> = Vec::with_capacity(n_tables);
    for (split, k) in [Split::Train, Split::Val, Split::Test].into_iter().zip(apportion(n_tables, &fractions)) {
        table_split.extend(std::iter::repeat_n(split, k));
    }
    table_split.shuffle(&mut rng);

    let weights = cfg.mixture.weights();
    let counts = apportion(cfg.n, &weights.map(|(_, w)| w));
    let mut types: Vec<DecompositionType> = weights
        .iter()
        .zip(&counts)
        .flat_map(|((c, _), k)| std::iter::repeat_n(*c, *k))
        .collect();
    types.shuffle(&mut rng);

    let mut seen: BTreeMap<DecompositionType, usize> = BTreeMap::new();
    let mut statements = Vec::with_capacity(cfg.n);
    let mut gold = Vec::with_capacity(cfg.n);
    for (i, &c) in types.iter().enumerate() {
        let k = seen.entry(c).or_insert(0);
        let want = k.is_multiple_of(2);
        *k += 1;
        let ti = i % n_tables;
        let t = &tables[ti];
        // Retry with fresh draws; the last resort is the always-available atomic form.
        let (c, d) = (0..20)
            .find_map(|_| draft(c, want, t, &mut rng).map(|d| (c, d)))
            .or_else(|| draft(DecompositionType::Atomic, want, t, &mut rng).map(|d| (DecompositionType::Atomic, d)))
            .expect("atomic statements can always be drafted");
        let label = match execute(&d.program, t) {
            Ok(RuntimeValue::Bool(b)) => b,
            other => unreachable!("generated program failed: {} -> {other:?}", d.program),
        };
        let id = format!("s{i:06}");
        let mut s = Statement::new(&id, &t.id, &d.text, Some(label));
        s.split = Some(table_split[ti]);
        if s.split == Some(Split::Test) {
            s.subset = Some(if c == DecompositionType::Atomic { Subset::Simple } else { Subset::Complex });
        }
        let decomposition = match c {
            DecompositionType::Atomic => Vec::new(),
            _ => instantiate_template(&s, &d.program, c)
                .map(|subs| subs.into_iter().map(|x| x.text).collect())
                .unwrap_or_default(),
        };
        gold.push(GoldRecord {
            statement_id: id,
            c,
            program: d.program,
            decomposition,
        });
        statements.push(s);
    }
    Ok(SyntheticCorpus { tables, statements, gold })
}

/// Counts in the layout of a corpus statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub sentences: usize,
    pub tables: usize,
    pub mean_rows: f64,
    pub mean_cols: f64,
}

/// Statistics over the statements given and the tables they reference.
pub fn dataset_stats(tables: &BTreeMap<String, Table>, statements: &[&Statement]) -> SplitStats {
    let ids: BTreeSet<&str> = statements.iter().map(|s| s.table_id.as_str()).collect();
    let used: Vec<&Table> = ids.iter().filter_map(|id| tables.get(*id)).collect();
    let mean = |f: fn(&Table) -> usize| {
        if used.is_empty() {
            0.0
        } else {
            used.iter().map(|t| f(t) as f64).sum::<f64>() / used.len() as f64
        }
    };
    SplitStats {
        sentences: statements.len(),
        tables: used.len(),
        mean_rows: mean(Table::n_rows),
        mean_cols: mean(Table::n_cols),
    }
}
