// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CleanDataset, CleanStats, ForwardBatch, IssueRecord, RecordCounts};
use crate::IssueId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningConfig {
    /// Issues whose description has fewer tokens than this are dropped.
    pub min_description_tokens: usize,
    pub drop_self_loops: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        Self { min_description_tokens: 5, drop_self_loops: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Issue,
    Forward,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    EmptyDescription,
    ShortDescription,
    MissingTimestamp,
    DuplicateId,
    NoReceivers,
    MissingSender,
    MissingReceiver,
    Orphaned,
    SelfLoop,
    Unreferenced,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::Issue => "issue",
            RecordKind::Forward => "forward",
            RecordKind::User => "user",
        })
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DropReason::EmptyDescription => "empty description",
            DropReason::ShortDescription => "short description",
            DropReason::MissingTimestamp => "missing timestamp",
            DropReason::DuplicateId => "duplicate id",
            DropReason::NoReceivers => "no receivers",
            DropReason::MissingSender => "missing sender",
            DropReason::MissingReceiver => "missing receiver",
            DropReason::Orphaned => "orphaned",
            DropReason::SelfLoop => "self-loop",
            DropReason::Unreferenced => "unreferenced",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub kind: RecordKind,
    pub id: String,
    pub reason: DropReason,
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF       // kana
        | 0x3400..=0x4DBF     // CJK extension A
        | 0x4E00..=0x9FFF     // CJK unified ideographs
        | 0xAC00..=0xD7AF     // hangul syllables
        | 0xF900..=0xFAFF     // compatibility ideographs
        | 0x20000..=0x2FA1F) // supplementary ideographs
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c as u32, 0x3000..=0x303F | 0xFF00..=0xFF0F | 0xFF1A..=0xFF20)
}

/// Counts description tokens.
///
/// Whitespace separates words. Inside a word every CJK character is a token
/// of its own and each maximal run of other characters is one token, so
/// `"crack in slab"` has 3 tokens and `"承台基坑无"` has 5.
pub fn count_tokens(text: &str) -> usize {
    let mut tokens = 0;
    let mut in_run = false;
    for c in text.chars() {
        if is_separator(c) {
            in_run = false;
        } else if is_cjk(c) {
            tokens += 1;
            in_run = false;
        } else if !in_run {
            tokens += 1;
            in_run = true;
        }
    }
    tokens
}

fn issue_drop_reason(issue: &IssueRecord, config: &CleaningConfig) -> Option<DropReason> {
    if issue.description.trim().is_empty() {
        Some(DropReason::EmptyDescription)
    } else if count_tokens(&issue.description) < config.min_description_tokens {
        Some(DropReason::ShortDescription)
    } else if issue.created_at <= 0 {
        Some(DropReason::MissingTimestamp)
    } else {
        None
    }
}

/// Applies the data quality rules. Never fails; every removed record shows
/// up in [`CleanDataset::drops`] and in the stats. Input order is kept.
pub fn clean(issues: Vec<IssueRecord>, forwards: ForwardBatch, config: &CleaningConfig) -> CleanDataset {
    let mut drops = Vec::new();
    let issue_input = issues.len();
    let mut kept_ids: HashSet<IssueId> = HashSet::with_capacity(issues.len());
    let mut kept_issues = Vec::with_capacity(issues.len());
    for issue in issues {
        let reason =
            if kept_ids.contains(&issue.issue_id) { Some(DropReason::DuplicateId) } else { issue_drop_reason(&issue, config) };
        match reason {
            Some(reason) => drops.push(DropRecord { kind: RecordKind::Issue, id: issue.issue_id.to_string(), reason }),
            None => {
                kept_ids.insert(issue.issue_id);
                kept_issues.push(issue);
            }
        }
    }

    let forward_input = forwards.events.len() + forwards.empty_receivers.len();
    for row in &forwards.empty_receivers {
        drops.push(DropRecord { kind: RecordKind::Forward, id: row.to_string(), reason: DropReason::NoReceivers });
    }
    let mut kept_forwards = Vec::with_capacity(forwards.events.len());
    for ev in forwards.events {
        let reason = match (ev.from_user, ev.to_user) {
            (None, _) => Some(DropReason::MissingSender),
            (_, None) => Some(DropReason::MissingReceiver),
            _ if !kept_ids.contains(&ev.issue_id) => Some(DropReason::Orphaned),
            (Some(a), Some(b)) if config.drop_self_loops && a == b => Some(DropReason::SelfLoop),
            _ => None,
        };
        match reason {
            Some(reason) => drops.push(DropRecord { kind: RecordKind::Forward, id: ev.forward_id.to_string(), reason }),
            None => kept_forwards.push(ev),
        }
    }

    let stats = CleanStats {
        issues: RecordCounts::new(issue_input, kept_issues.len()),
        forwards: RecordCounts::new(forward_input, kept_forwards.len()),
        users: RecordCounts::default(),
    };
    CleanDataset { issues: kept_issues, forwards: kept_forwards, stats, drops }
}
