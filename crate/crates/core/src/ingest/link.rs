// SPDX-License-Identifier: Apache-2.0

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{
    CleanDataset, CleanStats, DropReason, DropRecord, ForwardEvent, IngestError, IssueRecord, LabelMap, LabelSection,
    RecordCounts, RecordKind, UserRecord,
};
use crate::{IssueId, UserId};

/// Role label given to users without a registered (or mapped) role.
pub const UNKNOWN_ROLE: &str = "Unknown";

/// What to do with a user id that appears in the records but not in the
/// user export.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingUserPolicy {
    /// Synthesize a user with the [`UNKNOWN_ROLE`] role.
    #[default]
    Placeholder,
    Fail,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkedDataset {
    pub issues: Vec<IssueRecord>,
    pub forwards: Vec<ForwardEvent>,
    /// Users referenced by a retained record, sorted by id. Includes placeholders.
    pub users: Vec<UserRecord>,
    pub placeholders: Vec<UserId>,
    pub stats: CleanStats,
    pub drops: Vec<DropRecord>,
}

/// Groups forwards by issue, keeping each group in input order.
fn group_forwards(forwards: &[ForwardEvent]) -> BTreeMap<IssueId, Vec<&ForwardEvent>> {
    let mut groups: BTreeMap<IssueId, Vec<&ForwardEvent>> = BTreeMap::new();
    for f in forwards {
        groups.entry(f.issue_id).or_default().push(f);
    }
    groups
}

impl LinkedDataset {
    pub fn forwards_by_issue(&self) -> BTreeMap<IssueId, Vec<&ForwardEvent>> {
        group_forwards(&self.forwards)
    }
}

/// Joins cleaned issues and forwards with the user export.
///
/// Only users referenced as an issue creator, sender or receiver are kept;
/// the rest are reported as unreferenced drops.
pub fn associate(clean: CleanDataset, users: &[UserRecord], policy: MissingUserPolicy) -> Result<LinkedDataset, IngestError> {
    let CleanDataset { issues, forwards, mut stats, mut drops } = clean;

    let mut referenced: BTreeSet<UserId> = issues.iter().map(|i| i.created_by).collect();
    for f in &forwards {
        referenced.extend(f.from_user);
        referenced.extend(f.to_user);
    }

    let mut registry: BTreeMap<UserId, &UserRecord> = BTreeMap::new();
    for u in users {
        match registry.entry(u.user_id) {
            Entry::Occupied(_) => {
                drops.push(DropRecord { kind: RecordKind::User, id: u.user_id.to_string(), reason: DropReason::DuplicateId })
            }
            Entry::Vacant(slot) => {
                slot.insert(u);
            }
        }
    }

    let mut linked_users = Vec::with_capacity(referenced.len());
    let mut placeholders = Vec::new();
    let mut registered_kept = 0;
    for id in &referenced {
        match registry.get(id) {
            Some(u) => {
                registered_kept += 1;
                linked_users.push((*u).clone());
            }
            None => match policy {
                MissingUserPolicy::Fail => return Err(IngestError::UnregisteredUser(*id)),
                MissingUserPolicy::Placeholder => {
                    placeholders.push(*id);
                    linked_users.push(UserRecord { user_id: *id, role_id: None, organization: String::new() });
                }
            },
        }
    }
    for id in registry.keys().filter(|id| !referenced.contains(id)) {
        drops.push(DropRecord { kind: RecordKind::User, id: id.to_string(), reason: DropReason::Unreferenced });
    }
    stats.users = RecordCounts::new(users.len(), registered_kept);

    Ok(LinkedDataset { issues, forwards, users: linked_users, placeholders, stats, drops })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedIssue {
    pub record: IssueRecord,
    pub level: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedUser {
    pub record: UserRecord,
    pub role: String,
    pub placeholder: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnrichedDataset {
    pub issues: Vec<EnrichedIssue>,
    pub forwards: Vec<ForwardEvent>,
    pub users: Vec<EnrichedUser>,
    pub stats: CleanStats,
    pub drops: Vec<DropRecord>,
    /// Every level label the label map can produce, sorted.
    pub level_labels: Vec<String>,
    /// Every type label the label map can produce, sorted.
    pub type_labels: Vec<String>,
}

impl EnrichedDataset {
    pub fn forwards_by_issue(&self) -> BTreeMap<IssueId, Vec<&ForwardEvent>> {
        group_forwards(&self.forwards)
    }

    pub fn user(&self, id: UserId) -> Option<&EnrichedUser> {
        self.users.binary_search_by_key(&id, |u| u.record.user_id).ok().map(|i| &self.users[i])
    }
}

fn label_universe(section: &BTreeMap<u32, String>) -> Vec<String> {
    section.values().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Attaches level/type label text to issues and role text to users.
///
/// Fails with every unmapped id of the first section that has gaps
/// (levels, then types, then roles).
pub fn enrich(linked: LinkedDataset, labels: &LabelMap) -> Result<EnrichedDataset, IngestError> {
    let mut unmapped: HashMap<LabelSection, BTreeSet<u32>> = HashMap::new();
    let mut lookup = |section: LabelSection, id: u32| -> String {
        match labels.get(section, id) {
            Some(l) => l.to_string(),
            None => {
                unmapped.entry(section).or_default().insert(id);
                String::new()
            }
        }
    };

    let issues: Vec<EnrichedIssue> = linked
        .issues
        .into_iter()
        .map(|record| {
            let level = lookup(LabelSection::Levels, record.level_id);
            let kind = lookup(LabelSection::Types, record.type_id);
            EnrichedIssue { record, level, kind }
        })
        .collect();
    let placeholders: BTreeSet<UserId> = linked.placeholders.iter().copied().collect();
    let users: Vec<EnrichedUser> = linked
        .users
        .into_iter()
        .map(|record| {
            let role = match record.role_id {
                Some(r) => lookup(LabelSection::Roles, r),
                None => UNKNOWN_ROLE.to_string(),
            };
            let placeholder = placeholders.contains(&record.user_id);
            EnrichedUser { record, role, placeholder }
        })
        .collect();

    for section in [LabelSection::Levels, LabelSection::Types, LabelSection::Roles] {
        if let Some(ids) = unmapped.remove(&section) {
            return Err(IngestError::Unmapped { section, ids: ids.into_iter().collect() });
        }
    }

    Ok(EnrichedDataset {
        issues,
        forwards: linked.forwards,
        users,
        stats: linked.stats,
        drops: linked.drops,
        level_labels: label_universe(&labels.levels),
        type_labels: label_universe(&labels.types),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{clean, CleaningConfig, ForwardBatch};
    use crate::ForwardId;

    fn issue(id: u64, by: u64, level: u32, kind: u32) -> IssueRecord {
        IssueRecord {
            issue_id: IssueId(id),
            project_id: 1,
            description: "a b c d e".into(),
            type_id: kind,
            level_id: level,
            status_id: 0,
            created_at: 100,
            created_by: UserId(by),
        }
    }

    fn fwd(row: u64, issue: u64, from: u64, to: u64) -> ForwardEvent {
        ForwardEvent {
            forward_id: ForwardId::new(row, 0),
            issue_id: IssueId(issue),
            from_user: Some(UserId(from)),
            to_user: Some(UserId(to)),
            created_at: 100 + row as i64,
            status_id: 0,
            approve_status: 0,
        }
    }

    fn user(id: u64, role: u32) -> UserRecord {
        UserRecord { user_id: UserId(id), role_id: Some(role), organization: "GC".into() }
    }

    fn sample() -> CleanDataset {
        clean(vec![issue(4, 1, 2, 1)], ForwardBatch::from(vec![fwd(1, 4, 1, 2), fwd(2, 4, 2, 999)]), &CleaningConfig::default())
    }

    #[test]
    fn links_and_drops_unreferenced_users() {
        let users = vec![user(1, 1), user(2, 2), user(3, 2)];
        let linked = associate(sample(), &users, MissingUserPolicy::Placeholder).unwrap();
        let ids: Vec<u64> = linked.users.iter().map(|u| u.user_id.0).collect();
        assert_eq!(ids, vec![1, 2, 999]);
        assert_eq!(linked.placeholders, vec![UserId(999)]);
        assert_eq!(linked.stats.users, RecordCounts { input: 3, dropped: 1, retained: 2 });
        assert!(linked.drops.iter().any(|d| d.kind == RecordKind::User && d.id == "3" && d.reason == DropReason::Unreferenced));
        let groups = linked.forwards_by_issue();
        assert_eq!(groups[&IssueId(4)].len(), 2);
    }

    #[test]
    fn unregistered_user_can_fail() {
        let users = vec![user(1, 1), user(2, 2)];
        match associate(sample(), &users, MissingUserPolicy::Fail) {
            Err(IngestError::UnregisteredUser(id)) => assert_eq!(id, UserId(999)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn enrich_attaches_labels() {
        let users = vec![user(1, 1), user(2, 2)];
        let linked = associate(sample(), &users, MissingUserPolicy::Placeholder).unwrap();
        let labels = LabelMap::default();
        let data = enrich(linked, &labels).unwrap();
        assert_eq!(data.issues[0].level, "M");
        assert_eq!(data.issues[0].kind, "Safety");
        assert_eq!(data.user(UserId(2)).unwrap().role, "Safety Engineer");
        let ph = data.user(UserId(999)).unwrap();
        assert_eq!(ph.role, UNKNOWN_ROLE);
        assert!(ph.placeholder);
        assert_eq!(data.level_labels, vec!["H", "L", "M"]);
    }

    #[test]
    fn unmapped_type_is_reported() {
        let linked = associate(
            clean(vec![issue(4, 1, 2, 7), issue(5, 1, 2, 9)], ForwardBatch::default(), &CleaningConfig::default()),
            &[user(1, 1)],
            MissingUserPolicy::Placeholder,
        )
        .unwrap();
        match enrich(linked, &LabelMap::default()) {
            Err(e @ IngestError::Unmapped { section: LabelSection::Types, .. }) => {
                assert_eq!(e.to_string(), "no type label for id(s) 7, 9");
            }
            other => panic!("{other:?}"),
        }
    }
}
