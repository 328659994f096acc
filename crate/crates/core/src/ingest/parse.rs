// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ForwardEvent, IngestError, IssueRecord, UserRecord};
use crate::{ForwardId, IssueId, UserId};

/// Supported export formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Comma separated, header row required, RFC 4180 quoting.
    Csv,
    /// One JSON object per line.
    Ndjson,
}

impl InputFormat {
    /// Picks the format from a file extension; anything that is not
    /// `.json`, `.jsonl` or `.ndjson` is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "json" || ext == "jsonl" || ext == "ndjson" => InputFormat::Ndjson,
            _ => InputFormat::Csv,
        }
    }
}

/// A row that could not be turned into a record. `row` is the 1-based data
/// row (the CSV header and blank NDJSON lines are not counted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
}

impl<T> Default for ParseOutcome<T> {
    fn default() -> Self {
        Self { records: Vec::new(), errors: Vec::new() }
    }
}

/// Parsed forward rows after receiver fan-out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ForwardBatch {
    pub events: Vec<ForwardEvent>,
    /// Raw forward ids whose receiver list was empty. They produce no event
    /// and are reported as drops by [`super::clean`].
    pub empty_receivers: Vec<u64>,
    pub errors: Vec<RowError>,
}

impl From<Vec<ForwardEvent>> for ForwardBatch {
    fn from(events: Vec<ForwardEvent>) -> Self {
        Self { events, ..Default::default() }
    }
}

struct Field {
    name: &'static str,
    aliases: &'static [&'static str],
    required_column: bool,
}

const fn field(name: &'static str, aliases: &'static [&'static str], required_column: bool) -> Field {
    Field { name, aliases, required_column }
}

const ISSUE_FIELDS: &[Field] = &[
    field("ID", &["id", "issueid"], true),
    field("ProjectID", &["projectid"], false),
    field("Description", &["description", "desc"], true),
    field("TypeID", &["typeid"], true),
    field("LevelID", &["levelid"], true),
    field("StatusID", &["statusid"], false),
    field("CreatedAt", &["createdat"], true),
    field("CreatedBy", &["createdby"], true),
];

const FORWARD_FIELDS: &[Field] = &[
    field("ID", &["id", "forwardid"], true),
    field("IssueID", &["issueid"], true),
    field("FromUserID", &["fromuserid", "fromuser"], true),
    field("ToUserIDs", &["touserids", "touserid", "touser"], true),
    field("CreatedAt", &["createdat"], true),
    field("StatusID", &["statusid"], false),
    field("ApproveStatus", &["approvestatus"], false),
];

const USER_FIELDS: &[Field] = &[
    field("ID", &["id", "userid"], true),
    field("RoleID", &["roleid"], false),
    field("Organization", &["organization", "org"], false),
];

fn normalize(key: &str) -> String {
    key.trim()
        .trim_start_matches('\u{feff}')
        .chars()
        .filter(|c| !matches!(c, '_' | '-' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

/// One input row, keyed by canonical field name.
struct Row {
    index: usize,
    values: HashMap<&'static str, String>,
}

impl Row {
    fn raw(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.trim()).filter(|s| !s.is_empty())
    }

    fn text(&self, name: &str) -> String {
        self.values.get(name).cloned().unwrap_or_default()
    }

    fn required<T: std::str::FromStr>(&self, name: &str) -> Result<T, String> {
        let raw = self.raw(name).ok_or_else(|| format!("missing value for {name}"))?;
        raw.parse().map_err(|_| format!("invalid {name} value `{raw}`"))
    }

    fn optional<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, String> {
        match self.raw(name) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| format!("invalid {name} value `{raw}`")),
        }
    }

    fn error(&self, message: String) -> RowError {
        RowError { row: self.index, message }
    }
}

/// Resolves each canonical field to the position of its column, first alias wins.
fn resolve_columns(headers: &[String], fields: &[Field]) -> Result<Vec<Option<usize>>, IngestError> {
    let normalized: Vec<String> = headers.iter().map(|h| normalize(h)).collect();
    let mut taken = vec![false; headers.len()];
    let mut out = Vec::with_capacity(fields.len());
    for f in fields {
        let pos = f.aliases.iter().find_map(|alias| normalized.iter().enumerate().position(|(i, h)| !taken[i] && h == alias));
        match pos {
            Some(p) => {
                taken[p] = true;
                out.push(Some(p));
            }
            None if f.required_column => return Err(IngestError::MissingColumn(f.name.to_string())),
            None => out.push(None),
        }
    }
    Ok(out)
}

fn json_to_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Walks a stream and hands each row (or row-level error) to `sink`.
fn for_each_row<R: Read>(
    source: R,
    format: InputFormat,
    fields: &[Field],
    mut sink: impl FnMut(Result<Row, RowError>),
) -> Result<(), IngestError> {
    match format {
        InputFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
            let headers: Vec<String> =
                reader.headers().map_err(|e| IngestError::Schema(e.to_string()))?.iter().map(str::to_string).collect();
            if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
                return Ok(());
            }
            let columns = resolve_columns(&headers, fields)?;
            for (i, record) in reader.records().enumerate() {
                let index = i + 1;
                match record {
                    Err(e) => {
                        if let csv::ErrorKind::Io(_) = e.kind() {
                            return Err(IngestError::Schema(e.to_string()));
                        }
                        sink(Err(RowError { row: index, message: e.to_string() }));
                    }
                    Ok(rec) => {
                        let mut values = HashMap::new();
                        for (f, col) in fields.iter().zip(&columns) {
                            if let Some(v) = col.and_then(|c| rec.get(c)) {
                                values.insert(f.name, v.to_string());
                            }
                        }
                        sink(Ok(Row { index, values }));
                    }
                }
            }
        }
        InputFormat::Ndjson => {
            let mut index = 0;
            for line in BufReader::new(source).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                index += 1;
                let obj = match serde_json::from_str::<Value>(&line) {
                    Ok(Value::Object(obj)) => obj,
                    Ok(_) => {
                        sink(Err(RowError { row: index, message: "expected a JSON object".into() }));
                        continue;
                    }
                    Err(e) => {
                        sink(Err(RowError { row: index, message: e.to_string() }));
                        continue;
                    }
                };
                let by_key: HashMap<String, &Value> = obj.iter().map(|(k, v)| (normalize(k), v)).collect();
                let mut values = HashMap::new();
                let mut missing = None;
                for f in fields {
                    match f.aliases.iter().find_map(|a| by_key.get(*a)) {
                        Some(v) => {
                            values.insert(f.name, json_to_text(v));
                        }
                        None if f.required_column => {
                            missing.get_or_insert(f.name);
                        }
                        None => {}
                    }
                }
                match missing {
                    Some(name) => sink(Err(RowError { row: index, message: format!("missing field {name}") })),
                    None => sink(Ok(Row { index, values })),
                }
            }
        }
    }
    Ok(())
}

fn issue_from_row(row: &Row) -> Result<IssueRecord, String> {
    Ok(IssueRecord {
        issue_id: IssueId(row.required("ID")?),
        project_id: row.optional("ProjectID")?.unwrap_or(0),
        description: row.text("Description"),
        type_id: row.required("TypeID")?,
        level_id: row.required("LevelID")?,
        status_id: row.optional("StatusID")?.unwrap_or(0),
        created_at: row.required("CreatedAt")?,
        created_by: UserId(row.required("CreatedBy")?),
    })
}

/// Parses issue records. Rows that cannot be parsed are listed in
/// [`ParseOutcome::errors`] and left out of the records.
pub fn parse_issue_records<R: Read>(source: R, format: InputFormat) -> Result<ParseOutcome<IssueRecord>, IngestError> {
    let mut out = ParseOutcome::default();
    for_each_row(source, format, ISSUE_FIELDS, |row| match row {
        Ok(row) => match issue_from_row(&row) {
            Ok(rec) => out.records.push(rec),
            Err(msg) => out.errors.push(row.error(msg)),
        },
        Err(e) => out.errors.push(e),
    })?;
    Ok(out)
}

/// Parses a receiver list such as `["191","61"]`, `[191]`, `""` or `61`.
/// `None` entries stand for blank receivers.
fn parse_receivers(raw: &str) -> Result<Vec<Option<UserId>>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    if !raw.starts_with('[') {
        return raw.parse().map(|id| vec![Some(UserId(id))]).map_err(|_| format!("invalid ToUserIDs value `{raw}`"));
    }
    let items: Vec<Value> = serde_json::from_str(raw).map_err(|e| format!("invalid ToUserIDs list: {e}"))?;
    items
        .into_iter()
        .map(|v| match v {
            Value::Null => Ok(None),
            Value::Number(n) => n.as_u64().map(|id| Some(UserId(id))).ok_or_else(|| format!("invalid receiver id {n}")),
            Value::String(s) if s.trim().is_empty() => Ok(None),
            Value::String(s) => s.trim().parse().map(|id| Some(UserId(id))).map_err(|_| format!("invalid receiver id `{s}`")),
            other => Err(format!("invalid receiver id {other}")),
        })
        .collect()
}

/// Parses forward rows, expanding each row's receiver list into one event
/// per receiver, in list order.
pub fn parse_forward_events<R: Read>(source: R, format: InputFormat) -> Result<ForwardBatch, IngestError> {
    let mut out = ForwardBatch::default();
    for_each_row(source, format, FORWARD_FIELDS, |row| {
        let row = match row {
            Ok(row) => row,
            Err(e) => return out.errors.push(e),
        };
        let parsed = (|| -> Result<(u64, Vec<ForwardEvent>), String> {
            let id: u64 = row.required("ID")?;
            let issue_id = IssueId(row.required("IssueID")?);
            let from_user = row.optional::<u64>("FromUserID")?.map(UserId);
            let created_at = row.required("CreatedAt")?;
            let status_id = row.optional("StatusID")?.unwrap_or(0);
            let approve_status = row.optional("ApproveStatus")?.unwrap_or(0);
            let receivers = parse_receivers(&row.text("ToUserIDs"))?;
            let events = receivers
                .into_iter()
                .enumerate()
                .map(|(k, to_user)| ForwardEvent {
                    forward_id: ForwardId::new(id, k as u32),
                    issue_id,
                    from_user,
                    to_user,
                    created_at,
                    status_id,
                    approve_status,
                })
                .collect();
            Ok((id, events))
        })();
        match parsed {
            Ok((id, events)) if events.is_empty() => out.empty_receivers.push(id),
            Ok((_, events)) => out.events.extend(events),
            Err(msg) => out.errors.push(row.error(msg)),
        }
    })?;
    Ok(out)
}

pub fn parse_user_records<R: Read>(source: R, format: InputFormat) -> Result<ParseOutcome<UserRecord>, IngestError> {
    let mut out = ParseOutcome::default();
    for_each_row(source, format, USER_FIELDS, |row| match row {
        Ok(row) => {
            let rec = (|| -> Result<UserRecord, String> {
                Ok(UserRecord {
                    user_id: UserId(row.required("ID")?),
                    role_id: row.optional("RoleID")?,
                    organization: row.text("Organization").trim().to_string(),
                })
            })();
            match rec {
                Ok(rec) => out.records.push(rec),
                Err(msg) => out.errors.push(row.error(msg)),
            }
        }
        Err(e) => out.errors.push(e),
    })?;
    Ok(out)
}
