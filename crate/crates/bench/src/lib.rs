//! Shared fixtures for the benchmarks.

use std::collections::BTreeMap;

use tdcomp_core::{generate_synthetic_corpus, Program, Statement, SyntheticConfig, Table};

pub struct Fixture {
    pub tables: BTreeMap<String, Table>,
    pub statements: Vec<Statement>,
    pub programs: Vec<Program>,
}

/// A seeded synthetic corpus of `n` statements over 6x4 tables.
pub fn fixture(n: usize) -> Fixture {
    let cfg = SyntheticConfig {
        n,
        rows: 6,
        cols: 4,
        seed: 17,
        mixture: Default::default(),
        per_table: 5,
    };
    let c = generate_synthetic_corpus(&cfg, [1.0, 0.0, 0.0]).expect("valid fixture config");
    Fixture {
        tables: c.tables.into_iter().map(|t| (t.id.clone(), t)).collect(),
        statements: c.statements,
        programs: c.gold.into_iter().map(|g| g.program).collect(),
    }
}

impl Fixture {
    pub fn table(&self, s: &Statement) -> &Table {
        &self.tables[&s.table_id]
    }
}
