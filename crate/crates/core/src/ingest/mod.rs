// SPDX-License-Identifier: Apache-2.0

//! Parsing, cleaning, association and enrichment of raw exports.
//!
//! Three record kinds come in: issue records, forward records and user
//! records. Forward rows may name several receivers and are expanded to one
//! [`ForwardEvent`] per receiver while parsing. [`clean`] then applies the
//! quality rules, [`associate`] joins the kinds and [`enrich`] attaches label
//! text from a [`LabelMap`].

mod clean;
mod labels;
mod link;
mod parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{ForwardId, IssueId, UserId};

pub use clean::{clean, count_tokens, CleaningConfig, DropReason, DropRecord, RecordKind};
pub use labels::{LabelMap, LabelSection};
pub use link::{associate, enrich, EnrichedDataset, EnrichedIssue, EnrichedUser, LinkedDataset, MissingUserPolicy, UNKNOWN_ROLE};
pub use parse::{
    parse_forward_events, parse_issue_records, parse_user_records, ForwardBatch, InputFormat, ParseOutcome, RowError,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub issue_id: IssueId,
    pub project_id: u64,
    pub description: String,
    pub type_id: u32,
    pub level_id: u32,
    pub status_id: u32,
    /// Unix epoch seconds. Treated as an opaque ordering key.
    pub created_at: i64,
    pub created_by: UserId,
}

/// One transfer of an issue from a sender to a single receiver.
///
/// Sender and receiver are optional only until cleaning; every event in a
/// [`CleanDataset`] has both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardEvent {
    pub forward_id: ForwardId,
    pub issue_id: IssueId,
    pub from_user: Option<UserId>,
    pub to_user: Option<UserId>,
    pub created_at: i64,
    pub status_id: u32,
    pub approve_status: u32,
}

impl ForwardEvent {
    /// Sender and receiver, if both are present.
    pub fn endpoints(&self) -> Option<(UserId, UserId)> {
        Some((self.from_user?, self.to_user?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: UserId,
    pub role_id: Option<u32>,
    pub organization: String,
}

/// Input, dropped and retained counts for one record kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordCounts {
    pub input: usize,
    pub dropped: usize,
    pub retained: usize,
}

impl RecordCounts {
    pub fn new(input: usize, retained: usize) -> Self {
        Self { input, dropped: input - retained, retained }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanStats {
    pub issues: RecordCounts,
    pub forwards: RecordCounts,
    /// Filled in by [`associate`]; zero straight out of [`clean`].
    pub users: RecordCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanDataset {
    pub issues: Vec<IssueRecord>,
    pub forwards: Vec<ForwardEvent>,
    pub stats: CleanStats,
    pub drops: Vec<DropRecord>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: missing required column `{0}`")]
    MissingColumn(String),
    #[error("malformed input: {0}")]
    Schema(String),
    #[error("user {0} is referenced but not registered")]
    UnregisteredUser(UserId),
    #[error("no {section} label for id(s) {}", join_ids(.ids))]
    Unmapped { section: LabelSection, ids: Vec<u32> },
    #[error("label map line {line}: {message}")]
    LabelSyntax { line: usize, message: String },
}

fn join_ids(ids: &[u32]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}
