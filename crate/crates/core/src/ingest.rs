//! Reading and writing collaboration-event and label files.
//!
//! Two event formats are supported: JSONL (canonical, one object per line)
//! and a deliberately regular CSV where participant lists are `;`-joined and
//! ids are restricted to `[A-Za-z0-9_-]` so no quoting is ever needed.
//! Labels are a two-column CSV (`node_id,label` with label 0 or 1).
//! Files whose names end in `.gz` are transparently decompressed.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use thiserror::Error;

use crate::graph::{CollabEvent, TimeBin};

/// Event wire format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Jsonl,
    Csv,
}

impl EventFormat {
    /// Guesses the format from a file name (`.gz` suffix ignored):
    /// `.jsonl`/`.json` → JSONL, `.csv` → CSV.
    pub fn from_path(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?;
        let name = name.strip_suffix(".gz").unwrap_or(name);
        if name.ends_with(".jsonl") || name.ends_with(".json") {
            Some(Self::Jsonl)
        } else if name.ends_with(".csv") {
            Some(Self::Csv)
        } else {
            None
        }
    }
}

/// Binary node label: `true` marks a positive (multi-node) case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub node_id: String,
    pub label: bool,
}

/// One rejected input line with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIssue {
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for LineIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {}: {}", .0.line, .0.reason)]
    Line(LineIssue),
}

/// Events parsed from one stream; `issues` is empty in strict mode and
/// lists every skipped line in lenient mode.
#[derive(Debug)]
pub struct ParsedEvents {
    pub events: Vec<CollabEvent>,
    pub issues: Vec<LineIssue>,
}

const EVENT_CSV_HEADER: &str = "event_id,time,participants";
const LABEL_CSV_HEADER: &str = "node_id,label";

fn valid_id(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

fn parse_event_line(format: EventFormat, line: &str) -> Result<CollabEvent, String> {
    match format {
        EventFormat::Jsonl => {
            let raw: CollabEvent =
                serde_json::from_str(line).map_err(|e| format!("invalid JSON event: {e}"))?;
            CollabEvent::new(raw.event_id, raw.time, raw.participants).map_err(|e| e.to_string())
        }
        EventFormat::Csv => {
            let mut fields = line.split(',');
            let (Some(event_id), Some(time), Some(parts), None) = (
                fields.next(),
                fields.next(),
                fields.next(),
                fields.next(),
            ) else {
                return Err("expected exactly 3 comma-separated fields".to_string());
            };
            if !valid_id(event_id) {
                return Err(format!("invalid event id '{event_id}'"));
            }
            let time: TimeBin = time
                .parse()
                .map_err(|_| format!("invalid time '{time}'"))?;
            let mut participants = Vec::new();
            for p in parts.split(';') {
                if !valid_id(p) {
                    return Err(format!("invalid participant id '{p}'"));
                }
                participants.push(p.to_string());
            }
            CollabEvent::new(event_id, time, participants).map_err(|e| e.to_string())
        }
    }
}

/// Parses events line by line. In strict mode (`lenient = false`) the first
/// bad line aborts with its line number; in lenient mode bad lines and
/// duplicate event ids are skipped and reported in `issues`. Blank lines and
/// a leading CSV header row are ignored in both modes.
pub fn parse_events(
    reader: impl BufRead,
    format: EventFormat,
    lenient: bool,
) -> Result<ParsedEvents, IngestError> {
    let mut events: Vec<CollabEvent> = Vec::new();
    let mut issues: Vec<LineIssue> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if format == EventFormat::Csv && lineno == 1 && trimmed == EVENT_CSV_HEADER {
            continue;
        }
        let reason = match parse_event_line(format, trimmed) {
            Ok(ev) => {
                if seen.insert(ev.event_id.clone()) {
                    events.push(ev);
                    continue;
                }
                format!("duplicate event id '{}'", ev.event_id)
            }
            Err(reason) => reason,
        };
        let issue = LineIssue {
            line: lineno,
            reason,
        };
        if lenient {
            issues.push(issue);
        } else {
            return Err(IngestError::Line(issue));
        }
    }
    Ok(ParsedEvents { events, issues })
}

/// Parses a `node_id,label` CSV. Labels must be 0 or 1; duplicate node ids
/// are rejected.
pub fn parse_labels(reader: impl BufRead) -> Result<Vec<LabelRecord>, IngestError> {
    let mut records: Vec<LabelRecord> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if lineno == 1 && trimmed == LABEL_CSV_HEADER {
            continue;
        }
        let bad = |reason: String| {
            IngestError::Line(LineIssue {
                line: lineno,
                reason,
            })
        };
        let Some((node_id, label)) = trimmed.split_once(',') else {
            return Err(bad("expected 'node_id,label'".to_string()));
        };
        if !valid_id(node_id) {
            return Err(bad(format!("invalid node id '{node_id}'")));
        }
        let label = match label {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("label must be 0 or 1, got '{other}'"))),
        };
        if !seen.insert(node_id.to_string()) {
            return Err(bad(format!("duplicate node id '{node_id}'")));
        }
        records.push(LabelRecord {
            node_id: node_id.to_string(),
            label,
        });
    }
    Ok(records)
}

/// Writes events as JSONL, one object per line, field order fixed.
pub fn write_events_jsonl(
    mut out: impl Write,
    events: &[CollabEvent],
) -> Result<(), IngestError> {
    for ev in events {
        serde_json::to_writer(&mut out, ev).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes events as CSV with a header row. All ids must stay inside the
/// unquoted id alphabet.
pub fn write_events_csv(mut out: impl Write, events: &[CollabEvent]) -> Result<(), IngestError> {
    let check = |line: usize, id: &str| {
        if valid_id(id) {
            Ok(())
        } else {
            Err(IngestError::Line(LineIssue {
                line,
                reason: format!("id '{id}' not representable in CSV (allowed: [A-Za-z0-9_-])"),
            }))
        }
    };
    writeln!(out, "{EVENT_CSV_HEADER}")?;
    for (i, ev) in events.iter().enumerate() {
        let line = i + 2;
        check(line, &ev.event_id)?;
        for p in &ev.participants {
            check(line, p)?;
        }
        writeln!(out, "{},{},{}", ev.event_id, ev.time, ev.participants.join(";"))?;
    }
    Ok(())
}

/// Writes labels as `node_id,label` CSV with a header row.
pub fn write_labels_csv(mut out: impl Write, labels: &[LabelRecord]) -> Result<(), IngestError> {
    writeln!(out, "{LABEL_CSV_HEADER}")?;
    for rec in labels {
        writeln!(out, "{},{}", rec.node_id, u8::from(rec.label))?;
    }
    Ok(())
}

/// Opens a file for reading, transparently gunzipping when the name ends
/// in `.gz`.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>, IngestError> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Reads events from a path, inferring the format from the file name unless
/// one is given explicitly.
pub fn read_events_from_path(
    path: &Path,
    format: Option<EventFormat>,
    lenient: bool,
) -> Result<ParsedEvents, IngestError> {
    let format = format
        .or_else(|| EventFormat::from_path(path))
        .unwrap_or(EventFormat::Jsonl);
    parse_events(open_input(path)?, format, lenient)
}

pub fn read_labels_from_path(path: &Path) -> Result<Vec<LabelRecord>, IngestError> {
    parse_labels(open_input(path)?)
}
