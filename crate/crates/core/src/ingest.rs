//! Submission-record ingestion: CSV parsing, waiting times in calendar days
//! and row validation.
//!
//! The input is UTF-8 CSV with the exact header `id,submitted,accepted` and
//! ISO-8601 (`YYYY-MM-DD`) dates. A bad data row never aborts the read; it is
//! carried through to [`validate`] and reported as an exclusion.

use std::collections::HashSet;
use std::fmt;
use std::io;

use chrono::NaiveDate;
use thiserror::Error;

pub const RECORDS_HEADER: [&str; 3] = ["id", "submitted", "accepted"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmissionRecord {
    pub id: String,
    pub submitted: NaiveDate,
    pub accepted: NaiveDate,
}

/// A data row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedRow {
    /// 1-based line number in the input, header included.
    pub line: u64,
    pub fields: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedRow {
    Record { line: u64, record: SubmissionRecord },
    Malformed(MalformedRow),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExclusionReason {
    NegativeInterval,
    ZeroInterval,
    /// Unparseable date or wrong number of columns.
    MalformedDate,
    DuplicateId,
}

impl ExclusionReason {
    pub const ALL: [ExclusionReason; 4] = [
        ExclusionReason::NegativeInterval,
        ExclusionReason::ZeroInterval,
        ExclusionReason::MalformedDate,
        ExclusionReason::DuplicateId,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            ExclusionReason::NegativeInterval => "negative_interval",
            ExclusionReason::ZeroInterval => "zero_interval",
            ExclusionReason::MalformedDate => "malformed_date",
            ExclusionReason::DuplicateId => "duplicate_id",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmittedRecord {
    pub line: u64,
    pub record: SubmissionRecord,
    pub waiting_days: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcludedRow {
    pub line: u64,
    /// The parsed record, absent for malformed rows.
    pub record: Option<SubmissionRecord>,
    pub raw: Vec<String>,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IngestReport {
    pub admitted: Vec<AdmittedRecord>,
    pub excluded: Vec<ExcludedRow>,
}

impl IngestReport {
    pub fn total_rows(&self) -> usize {
        self.admitted.len() + self.excluded.len()
    }

    pub fn excluded_count(&self, reason: ExclusionReason) -> usize {
        self.excluded.iter().filter(|e| e.reason == reason).count()
    }

    pub fn waiting_times(&self) -> Vec<f64> {
        self.admitted.iter().map(|a| a.waiting_days as f64).collect()
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable header: {0}")]
    Header(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    // `%Y` alone would also take signed or 5-digit years.
    let b = s.as_bytes();
    let shaped = b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| i == 4 || i == 7 || c.is_ascii_digit());
    if !shaped {
        return Err(format!("`{s}` is not a YYYY-MM-DD date"));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("`{s}`: {e}"))
}

/// Reads every data row. Only a missing or wrong header is a hard error.
pub fn parse_records<R: io::Read>(input: R) -> Result<Vec<ParsedRow>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::Header(format!("{other:?}")),
    })?;
    let names: Vec<&str> = header.iter().collect();
    let names: Vec<&str> = names
        .iter()
        .enumerate()
        .map(|(i, n)| if i == 0 { n.trim_start_matches('\u{feff}') } else { n })
        .collect();
    if names != RECORDS_HEADER {
        return Err(IngestError::Header(format!(
            "expected `{}`, got `{}`",
            RECORDS_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                let fields: Vec<String> = record.iter().map(str::to_string).collect();
                rows.push(row_from_fields(line, fields));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if let csv::ErrorKind::Io(_) = e.kind() {
                    let csv::ErrorKind::Io(io) = e.into_kind() else { unreachable!() };
                    return Err(IngestError::Io(io));
                }
                rows.push(ParsedRow::Malformed(MalformedRow {
                    line,
                    fields: Vec::new(),
                    message: e.to_string(),
                }));
            }
        }
    }
    Ok(rows)
}

fn row_from_fields(line: u64, fields: Vec<String>) -> ParsedRow {
    let malformed = |fields: Vec<String>, message: String| {
        ParsedRow::Malformed(MalformedRow {
            line,
            fields,
            message,
        })
    };
    if fields.len() != RECORDS_HEADER.len() {
        let msg = format!("expected 3 columns, found {}", fields.len());
        return malformed(fields, msg);
    }
    match (parse_date(&fields[1]), parse_date(&fields[2])) {
        (Ok(submitted), Ok(accepted)) => ParsedRow::Record {
            line,
            record: SubmissionRecord {
                id: fields[0].clone(),
                submitted,
                accepted,
            },
        },
        (Err(e), _) | (_, Err(e)) => malformed(fields, e),
    }
}

/// Acceptance date minus submission date, in calendar days.
pub fn compute_waiting_time(record: &SubmissionRecord) -> i64 {
    (record.accepted - record.submitted).num_days()
}

/// Sorts every row into admitted or excluded.
///
/// Checks run in order: malformed, duplicate id (the first well-formed row
/// with an id keeps it), then non-positive interval.
pub fn validate(rows: Vec<ParsedRow>) -> IngestReport {
    let mut report = IngestReport::default();
    let mut seen: HashSet<String> = HashSet::new();
    for row in rows {
        match row {
            ParsedRow::Malformed(m) => report.excluded.push(ExcludedRow {
                line: m.line,
                record: None,
                raw: m.fields,
                reason: ExclusionReason::MalformedDate,
            }),
            ParsedRow::Record { line, record } => {
                let raw = vec![
                    record.id.clone(),
                    record.submitted.to_string(),
                    record.accepted.to_string(),
                ];
                let days = compute_waiting_time(&record);
                let reason = if !seen.insert(record.id.clone()) {
                    Some(ExclusionReason::DuplicateId)
                } else if days < 0 {
                    Some(ExclusionReason::NegativeInterval)
                } else if days == 0 {
                    Some(ExclusionReason::ZeroInterval)
                } else {
                    None
                };
                match reason {
                    Some(reason) => report.excluded.push(ExcludedRow {
                        line,
                        record: Some(record),
                        raw,
                        reason,
                    }),
                    None => report.admitted.push(AdmittedRecord {
                        line,
                        record,
                        waiting_days: days as u32,
                    }),
                }
            }
        }
    }
    report
}
