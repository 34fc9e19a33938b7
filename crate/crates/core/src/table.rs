//! Evidence tables, statements, and statement-to-cell entity linking.
//!
//! Tables are immutable once built. Every surface string is normalized
//! (lowercased, trimmed, inner whitespace collapsed) on the way in, so all
//! downstream matching is plain string equality.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("table {table}: row {row} has {found} cells, header has {expected}")]
    Ragged {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table {table}: duplicate column name {name:?}")]
    DuplicateColumn { table: String, name: String },
    #[error("table {table}: no rows or no columns")]
    Empty { table: String },
    #[error("table {table}: column {column:?} cell {surface:?}: {source}")]
    Cell {
        table: String,
        column: String,
        surface: String,
        source: ValueError,
    },
    #[error("statements line {line}: {msg}")]
    Statement { line: usize, msg: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{surface:?} is not a valid {kind}")]
pub struct ValueError {
    pub surface: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Text,
    Number,
    Date,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Text => "text",
            ColumnKind::Number => "number",
            ColumnKind::Date => "date",
        })
    }
}

/// Parsed content of a single cell. Empty cells are `Missing`.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Missing,
    Number(f64),
    Text(String),
    Date(NaiveDate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Normalized surface form.
    pub surface: String,
    pub value: CellValue,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self.value, CellValue::Missing)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// A rectangular, typed evidence table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub id: String,
    pub caption: Option<String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

/// Lowercase, trim, and collapse runs of whitespace to one space.
pub fn normalize(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parse a number, accepting plain decimals and comma thousands separators
/// ("9,500", "9500", "9500.0", "-1,234.5").
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let plain = if s.contains(',') {
        let (sign, body) = match s.strip_prefix(['-', '+']) {
            Some(rest) => (&s[..1], rest),
            None => ("", s),
        };
        let (int_part, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let groups: Vec<&str> = int_part.split(',').collect();
        let ok = !groups[0].is_empty()
            && groups[0].len() <= 3
            && groups[1..].iter().all(|g| g.len() == 3)
            && groups.iter().all(|g| g.bytes().all(|b| b.is_ascii_digit()));
        if !ok {
            return None;
        }
        let mut out = String::with_capacity(s.len());
        out.push_str(sign);
        out.extend(groups);
        if let Some(f) = frac {
            out.push('.');
            out.push_str(f);
        }
        out
    } else {
        s.to_string()
    };
    // Reject forms Rust accepts but tables never mean as numbers.
    if !plain
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'))
        || !plain.bytes().any(|b| b.is_ascii_digit())
    {
        return None;
    }
    plain.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parse ISO `yyyy-mm-dd` or `d month yyyy`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%d %B %Y"))
        .ok()
}

pub fn parse_cell_value(surface: &str, kind: ColumnKind) -> Result<CellValue, ValueError> {
    let norm = normalize(surface);
    if norm.is_empty() {
        return Ok(CellValue::Missing);
    }
    let err = || ValueError {
        surface: norm.clone(),
        kind,
    };
    match kind {
        ColumnKind::Text => Ok(CellValue::Text(norm.clone())),
        ColumnKind::Number => parse_number(&norm).map(CellValue::Number).ok_or_else(err),
        ColumnKind::Date => parse_date(&norm).map(CellValue::Date).ok_or_else(err),
    }
}

/// Number if every non-empty cell parses as a number, date if every one
/// parses as a date, text otherwise (including all-empty columns).
pub fn infer_kind<'a>(cells: impl IntoIterator<Item = &'a str> + Clone) -> ColumnKind {
    let mut non_empty = cells.into_iter().map(str::trim).filter(|c| !c.is_empty());
    let first = match non_empty.next() {
        Some(c) => c,
        None => return ColumnKind::Text,
    };
    let rest: Vec<&str> = non_empty.collect();
    let all = |f: fn(&str) -> bool| f(first) && rest.iter().all(|c| f(c));
    if all(|c| parse_number(&normalize(c)).is_some()) {
        ColumnKind::Number
    } else if all(|c| parse_date(&normalize(c)).is_some()) {
        ColumnKind::Date
    } else {
        ColumnKind::Text
    }
}

impl Table {
    /// Build a table from raw header and row surfaces, inferring column kinds.
    pub fn from_raw(
        id: impl Into<String>,
        caption: Option<String>,
        header: &[String],
        raw_rows: &[Vec<String>],
    ) -> Result<Table, IngestError> {
        let id = id.into();
        if header.is_empty() || raw_rows.is_empty() {
            return Err(IngestError::Empty { table: id });
        }
        for (i, row) in raw_rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(IngestError::Ragged {
                    table: id,
                    row: i,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }
        let mut columns: Vec<Column> = Vec::with_capacity(header.len());
        for (j, name) in header.iter().enumerate() {
            let name = normalize(name);
            if columns.iter().any(|c| c.name == name) {
                return Err(IngestError::DuplicateColumn { table: id, name });
            }
            let kind = infer_kind(raw_rows.iter().map(|r| r[j].as_str()));
            columns.push(Column { name, kind });
        }
        let mut rows = Vec::with_capacity(raw_rows.len());
        for raw in raw_rows {
            let mut row = Vec::with_capacity(raw.len());
            for (cell, col) in raw.iter().zip(&columns) {
                let value = parse_cell_value(cell, col.kind).map_err(|source| IngestError::Cell {
                    table: id.clone(),
                    column: col.name.clone(),
                    surface: cell.clone(),
                    source,
                })?;
                row.push(Cell {
                    surface: normalize(cell),
                    value,
                });
            }
            rows.push(row);
        }
        Ok(Table {
            id,
            caption: caption.map(|c| normalize(&c)).filter(|c| !c.is_empty()),
            columns,
            rows,
        })
    }

    pub fn from_csv_reader(id: impl Into<String>, reader: impl Read) -> Result<Table, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Table::from_raw(id, None, &header, &rows)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.surface.as_str()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Look up a column by name, normalizing the query.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        let name = normalize(name);
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    pub fn header(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn raw_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|c| c.surface.clone()).collect())
            .collect()
    }

    /// Distinct non-missing surfaces of a column, in first-occurrence order.
    pub fn distinct_values(&self, col: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for row in &self.rows {
            let c = &row[col];
            if !c.is_missing() && !out.contains(&c.surface) {
                out.push(c.surface.clone());
            }
        }
        out
    }

    /// `caption | col1 col2 ... | r1c1 r1c2 ... ; r2c1 ... ;`
    pub fn linearize(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.caption {
            out.push_str(c);
            out.push_str(" | ");
        }
        out.push_str(&self.header().join(" "));
        out.push_str(" |");
        for row in &self.rows {
            for cell in row {
                if !cell.surface.is_empty() {
                    out.push(' ');
                    out.push_str(&cell.surface);
                }
            }
            out.push_str(" ;");
        }
        out
    }
}

pub fn load_table(path: &Path, id: &str) -> Result<Table, IngestError> {
    let file = std::fs::File::open(path)?;
    Table::from_csv_reader(id, std::io::BufReader::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Difficulty subset of the test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Simple,
    Complex,
}

/// A claim about a table. `label` is 1 for entailed, 0 for refuted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: String,
    pub table_id: String,
    pub text: String,
    #[serde(default, with = "label01", skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Subset>,
}

impl Statement {
    pub fn new(
        id: impl Into<String>,
        table_id: impl Into<String>,
        text: &str,
        label: Option<bool>,
    ) -> Statement {
        Statement {
            id: id.into(),
            table_id: table_id.into(),
            text: normalize(text),
            label,
            split: None,
            subset: None,
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.text.split(' ').filter(|t| !t.is_empty()).collect()
    }

    pub fn without_label(&self) -> Statement {
        Statement {
            label: None,
            ..self.clone()
        }
    }
}

mod label01 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<bool>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(b) => s.serialize_u8(*b as u8),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<bool>, D::Error> {
        match Option::<u8>::deserialize(d)? {
            None => Ok(None),
            Some(0) => Ok(Some(false)),
            Some(1) => Ok(Some(true)),
            Some(n) => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {n}"))),
        }
    }
}

/// Read statements JSONL; text is normalized, blank lines skipped.
pub fn read_statements(reader: impl BufRead) -> Result<Vec<Statement>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut s: Statement = serde_json::from_str(&line).map_err(|e| IngestError::Statement {
            line: i + 1,
            msg: e.to_string(),
        })?;
        s.text = normalize(&s.text);
        out.push(s);
    }
    Ok(out)
}

/// A statement token span that exactly matches a table cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityLink {
    /// Half-open token range `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub row: usize,
    pub column: usize,
    pub surface: String,
}

/// Link maximal token spans of `s` to cells of `t`, left to right.
///
/// A span links to the first matching cell in row-major order. Once a span
/// is linked, scanning resumes after it, so longer spans shadow the shorter
/// spans they contain.
pub fn link_entities(s: &Statement, t: &Table) -> Vec<EntityLink> {
    let mut index: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut max_len = 0;
    for (r, row) in t.rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if cell.is_missing() {
                continue;
            }
            index.entry(cell.surface.as_str()).or_insert((r, c));
            max_len = max_len.max(cell.surface.split(' ').count());
        }
    }
    let tokens = s.tokens();
    let mut links = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=max_len.min(tokens.len() - i)).rev().find_map(|len| {
            let span = tokens[i..i + len].join(" ");
            index.get(span.as_str()).map(|&(r, c)| (len, r, c, span))
        });
        match longest {
            Some((len, row, column, surface)) => {
                links.push(EntityLink {
                    start: i,
                    end: i + len,
                    row,
                    column,
                    surface,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    links
}
