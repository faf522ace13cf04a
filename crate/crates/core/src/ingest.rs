//! Reading OHP corpora and folding records into weighted identities.
//!
//! Row-level problems never abort a parse: every non-blank input line ends
//! up either as an accepted [`OhpRecord`] or as a [`RejectReport`] carrying
//! its line number. Only I/O failures and (for CSV) a bad header are fatal.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    identity_of, validate_record, OhpIdentity, OhpRecord, RawAgent, RawRecord, Responsibility,
    ValidationError, MAX_AGENTS,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad CSV header: {0}")]
    BadHeader(String),
    #[error("CSV error: {0}")]
    Csv(String),
}

/// Why a line was rejected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectCode {
    Invalid(ValidationError),
    MalformedLine,
    SparseAgents,
}

impl RejectCode {
    pub fn code(&self) -> String {
        match self {
            Self::Invalid(e) => e.code(),
            Self::MalformedLine => "MALFORMED_LINE".into(),
            Self::SparseAgents => "SPARSE_AGENTS".into(),
        }
    }
}

impl fmt::Display for RejectCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl Serialize for RejectCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectReport {
    pub line_number: usize,
    pub record_id: Option<String>,
    pub errors: Vec<RejectCode>,
}

/// Non-fatal note about an accepted record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseWarning {
    pub line_number: usize,
    pub record_id: String,
    pub message: String,
}

/// Result of parsing one input stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    pub records: Vec<OhpRecord>,
    pub rejects: Vec<RejectReport>,
    pub warnings: Vec<ParseWarning>,
    pub blank_lines: usize,
    /// Number of data lines seen (excluding a CSV header).
    pub total_lines: usize,
}

impl ParseOutcome {
    fn accept_or_reject(
        &mut self,
        line_number: usize,
        raw: &RawRecord,
        extra: Vec<RejectCode>,
        seen_ids: &mut HashSet<String>,
    ) {
        let record_id = raw
            .record_id
            .as_deref()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        let validated = validate_record(raw);
        match validated {
            Ok(record) if extra.is_empty() => {
                if !seen_ids.insert(record.record_id.clone()) {
                    self.warnings.push(ParseWarning {
                        line_number,
                        record_id: record.record_id.clone(),
                        message: "duplicate record_id".into(),
                    });
                }
                self.records.push(record);
            }
            Ok(_) => self.rejects.push(RejectReport {
                line_number,
                record_id,
                errors: extra,
            }),
            Err(errors) => {
                let mut all = extra;
                all.extend(errors.into_iter().map(RejectCode::Invalid));
                self.rejects.push(RejectReport {
                    line_number,
                    record_id,
                    errors: all,
                });
            }
        }
    }

    /// Appends another outcome, as when several files feed one run.
    pub fn merge(&mut self, other: ParseOutcome) {
        self.records.extend(other.records);
        self.rejects.extend(other.rejects);
        self.warnings.extend(other.warnings);
        self.blank_lines += other.blank_lines;
        self.total_lines += other.total_lines;
    }
}

/// Parses JSON Lines input, one record object per line.
pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<ParseOutcome, IngestError> {
    let mut out = ParseOutcome::default();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_number = idx + 1;
        out.total_lines += 1;
        if line.trim().is_empty() {
            out.blank_lines += 1;
            continue;
        }
        match serde_json::from_str::<RawRecord>(&line) {
            Ok(raw) => out.accept_or_reject(line_number, &raw, Vec::new(), &mut seen),
            Err(_) => out.rejects.push(RejectReport {
                line_number,
                record_id: None,
                errors: vec![RejectCode::MalformedLine],
            }),
        }
    }
    Ok(out)
}

/// Column names of the canonical CSV layout.
pub fn csv_header() -> Vec<String> {
    let mut cols: Vec<String> = [
        "record_id",
        "reported_on",
        "center",
        "pathology",
        "occupation",
        "sector",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 1..=MAX_AGENTS {
        cols.push(format!("agent{i}_code"));
        cols.push(format!("agent{i}_resp"));
    }
    cols
}

/// Parses the canonical CSV layout. Agents must be densely packed from slot 1.
pub fn parse_csv<R: Read>(reader: R) -> Result<ParseOutcome, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::BadHeader(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let expected = csv_header();
    if header != expected {
        return Err(IngestError::BadHeader(format!(
            "expected `{}`, found `{}`",
            expected.join(","),
            header.join(",")
        )));
    }

    let mut out = ParseOutcome::default();
    let mut seen = HashSet::new();
    for row in rdr.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) => return Err(IngestError::Csv(e.to_string())),
                _ => {
                    let line_number = e.position().map(|p| p.line() as usize).unwrap_or(0);
                    out.total_lines += 1;
                    out.rejects.push(RejectReport {
                        line_number,
                        record_id: None,
                        errors: vec![RejectCode::MalformedLine],
                    });
                    continue;
                }
            },
        };
        let line_number = row.position().map(|p| p.line() as usize).unwrap_or(0);
        out.total_lines += 1;
        if row.iter().all(|f| f.trim().is_empty()) {
            out.blank_lines += 1;
            continue;
        }
        if row.len() != expected.len() {
            out.rejects.push(RejectReport {
                line_number,
                record_id: row.get(0).map(str::to_string).filter(|s| !s.is_empty()),
                errors: vec![RejectCode::MalformedLine],
            });
            continue;
        }
        let (raw, extra) = raw_from_csv_row(&row);
        out.accept_or_reject(line_number, &raw, extra, &mut seen);
    }
    Ok(out)
}

fn raw_from_csv_row(row: &csv::StringRecord) -> (RawRecord, Vec<RejectCode>) {
    let field = |i: usize| Some(row.get(i).unwrap_or("").to_string());
    let mut agents = Vec::new();
    let mut extra = Vec::new();
    let mut gap = false;
    for slot in 0..MAX_AGENTS {
        let code = row.get(6 + 2 * slot).unwrap_or("").trim();
        let resp = row.get(7 + 2 * slot).unwrap_or("").trim();
        if code.is_empty() && resp.is_empty() {
            gap = true;
            continue;
        }
        if gap {
            extra.push(RejectCode::SparseAgents);
            gap = false;
        }
        // An unparseable degree keeps its slot as -1 so validation reports it.
        agents.push(RawAgent {
            code: Some(code.to_string()),
            responsibility: Some(resp.parse::<i64>().unwrap_or(-1)),
        });
    }
    extra.dedup();
    let raw = RawRecord {
        record_id: field(0),
        reported_on: field(1),
        center: field(2),
        pathology: field(3),
        occupation: field(4),
        sector: field(5),
        agents,
    };
    (raw, extra)
}

/// Writes records as canonical JSON Lines.
pub fn write_jsonl<W: Write>(records: &[OhpRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, &r.to_raw())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes records in the canonical CSV layout.
pub fn write_csv<W: Write>(records: &[OhpRecord], w: W) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| IngestError::Csv(e.to_string());
    wtr.write_record(csv_header()).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            r.record_id.clone(),
            r.reported_on.format("%Y-%m-%d").to_string(),
            r.center.clone(),
            r.pathology.clone(),
            r.occupation.clone(),
            r.sector.clone(),
        ];
        for slot in 0..MAX_AGENTS {
            match r.agents.get(slot) {
                Some(a) => {
                    row.push(a.code.clone());
                    row.push(a.responsibility.level().to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Aggregated view of every record sharing one identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub weight: u64,
    pub first_seen: NaiveDate,
    pub last_seen: NaiveDate,
    pub max_responsibility: BTreeMap<String, Responsibility>,
}

impl LedgerEntry {
    fn from_record(record: &OhpRecord) -> Self {
        let mut entry = LedgerEntry {
            weight: 0,
            first_seen: record.reported_on,
            last_seen: record.reported_on,
            max_responsibility: BTreeMap::new(),
        };
        entry.absorb(record);
        entry
    }

    fn absorb(&mut self, record: &OhpRecord) {
        self.weight += 1;
        self.first_seen = self.first_seen.min(record.reported_on);
        self.last_seen = self.last_seen.max(record.reported_on);
        for agent in &record.agents {
            let slot = self
                .max_responsibility
                .entry(agent.code.clone())
                .or_insert(agent.responsibility);
            *slot = (*slot).max(agent.responsibility);
        }
    }

    fn merge(&mut self, other: &LedgerEntry) {
        self.weight += other.weight;
        self.first_seen = self.first_seen.min(other.first_seen);
        self.last_seen = self.last_seen.max(other.last_seen);
        for (code, resp) in &other.max_responsibility {
            let slot = self.max_responsibility.entry(code.clone()).or_insert(*resp);
            *slot = (*slot).max(*resp);
        }
    }
}

/// Identities with their multiplicity, keyed in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdentityLedger {
    entries: BTreeMap<OhpIdentity, LedgerEntry>,
}

impl IdentityLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: &OhpRecord) {
        let identity = identity_of(record);
        match self.entries.get_mut(&identity) {
            Some(entry) => entry.absorb(record),
            None => {
                self.entries
                    .insert(identity, LedgerEntry::from_record(record));
            }
        }
    }

    /// Combines two ledgers; the result does not depend on merge order.
    pub fn merge(&mut self, other: &IdentityLedger) {
        for (identity, entry) in &other.entries {
            match self.entries.get_mut(identity) {
                Some(mine) => mine.merge(entry),
                None => {
                    self.entries.insert(identity.clone(), entry.clone());
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, identity: &OhpIdentity) -> Option<&LedgerEntry> {
        self.entries.get(identity)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OhpIdentity, &LedgerEntry)> {
        self.entries.iter()
    }

    pub fn total_weight(&self) -> u64 {
        self.entries.values().map(|e| e.weight).sum()
    }
}

impl<'a> FromIterator<&'a OhpRecord> for IdentityLedger {
    fn from_iter<I: IntoIterator<Item = &'a OhpRecord>>(iter: I) -> Self {
        let mut ledger = IdentityLedger::new();
        for r in iter {
            ledger.insert(r);
        }
        ledger
    }
}

pub fn fold_identities(records: &[OhpRecord]) -> IdentityLedger {
    records.iter().collect()
}
