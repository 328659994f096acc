// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use collabtwin::ingest::{
    associate, clean, parse_forward_events, parse_issue_records, CleaningConfig, DropReason, ForwardBatch, InputFormat,
    MissingUserPolicy, RecordKind,
};
use collabtwin::IssueId;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Row {
    issue: u64,
    from: Option<u64>,
    to: Vec<Option<u64>>,
}

fn issue_text(issues: &[(u64, usize, i64)]) -> String {
    let mut s = String::from("ID,Description,TypeID,LevelID,CreatedAt,CreatedBy\n");
    for &(id, words, ts) in issues {
        let desc = vec!["word"; words].join(" ");
        s.push_str(&format!("{id},{desc},1,2,{ts},1\n"));
    }
    s
}

fn forward_text(rows: &[Row]) -> String {
    let mut s = String::from("ID,IssueID,FromUserID,ToUserIDs,CreatedAt\n");
    for (i, r) in rows.iter().enumerate() {
        let to: Vec<String> = r.to.iter().map(|u| u.map_or("null".into(), |u| u.to_string())).collect();
        let from = r.from.map_or(String::new(), |u| u.to_string());
        s.push_str(&format!("{},{},{from},\"[{}]\",{}\n", i + 1, r.issue, to.join(", "), 100 + i));
    }
    s
}

fn rows() -> impl Strategy<Value = Vec<Row>> {
    let user = prop_oneof![9 => (1u64..8).prop_map(Some), 1 => Just(None)];
    let row = (1u64..12, user.clone(), prop::collection::vec(user, 0..5)).prop_map(|(issue, from, to)| Row { issue, from, to });
    prop::collection::vec(row, 0..40)
}

fn issues() -> impl Strategy<Value = Vec<(u64, usize, i64)>> {
    prop::collection::vec((1u64..10, 0usize..8, prop_oneof![9 => 1i64..1000, 1 => Just(0i64)]), 0..15)
}

proptest! {
    #[test]
    fn fan_out_gives_one_event_per_receiver(rows in rows()) {
        let batch = parse_forward_events(forward_text(&rows).as_bytes(), InputFormat::Csv).unwrap();
        prop_assert!(batch.errors.is_empty());
        let expanded: usize = rows.iter().map(|r| r.to.len()).sum();
        prop_assert_eq!(batch.events.len(), expanded);
        prop_assert_eq!(batch.empty_receivers.len(), rows.iter().filter(|r| r.to.is_empty()).count());
        let mut events = batch.events.iter();
        for (i, r) in rows.iter().enumerate() {
            for (k, to) in r.to.iter().enumerate() {
                let ev = events.next().unwrap();
                prop_assert_eq!(ev.forward_id.row, i as u64 + 1);
                prop_assert_eq!(ev.forward_id.receiver, k as u32);
                prop_assert_eq!(ev.to_user.map(|u| u.0), *to);
                prop_assert_eq!(ev.from_user.map(|u| u.0), r.from);
            }
        }
    }

    #[test]
    fn cleaning_is_idempotent(issues in issues(), rows in rows(), drop_self_loops: bool) {
        let config = CleaningConfig { drop_self_loops, ..Default::default() };
        let parsed = parse_issue_records(issue_text(&issues).as_bytes(), InputFormat::Csv).unwrap().records;
        let batch = parse_forward_events(forward_text(&rows).as_bytes(), InputFormat::Csv).unwrap();
        let once = clean(parsed, batch, &config);
        let again = clean(once.issues.clone(), ForwardBatch { events: once.forwards.clone(), ..Default::default() }, &config);
        prop_assert_eq!(&again.issues, &once.issues);
        prop_assert_eq!(&again.forwards, &once.forwards);
        prop_assert!(again.drops.is_empty());
        prop_assert_eq!(once.stats.issues.input, issues.len());
        prop_assert_eq!(once.stats.issues.retained + once.stats.issues.dropped, issues.len());
        let issue_drops = once.drops.iter().filter(|d| d.kind == RecordKind::Issue).count();
        prop_assert_eq!(issue_drops, once.stats.issues.dropped);
        for ev in &once.forwards {
            prop_assert!(ev.from_user.is_some() && ev.to_user.is_some());
            prop_assert!(!drop_self_loops || ev.from_user != ev.to_user);
        }
    }

    #[test]
    fn linked_data_has_no_dangling_references(issues in issues(), rows in rows()) {
        let parsed = parse_issue_records(issue_text(&issues).as_bytes(), InputFormat::Csv).unwrap().records;
        let batch = parse_forward_events(forward_text(&rows).as_bytes(), InputFormat::Csv).unwrap();
        let cleaned = clean(parsed, batch, &CleaningConfig::default());
        let linked = associate(cleaned, &[], MissingUserPolicy::Placeholder).unwrap();
        let issue_ids: BTreeSet<IssueId> = linked.issues.iter().map(|i| i.issue_id).collect();
        let users: BTreeSet<_> = linked.users.iter().map(|u| u.user_id).collect();
        for ev in &linked.forwards {
            prop_assert!(issue_ids.contains(&ev.issue_id));
            prop_assert!(users.contains(&ev.from_user.unwrap()));
            prop_assert!(users.contains(&ev.to_user.unwrap()));
        }
        for issue in &linked.issues {
            prop_assert!(users.contains(&issue.created_by));
        }
        prop_assert_eq!(linked.placeholders.len(), linked.users.len());
    }
}

#[test]
fn orphaned_forwards_are_reported() {
    let parsed = parse_issue_records(issue_text(&[(1, 6, 10)]).as_bytes(), InputFormat::Csv).unwrap().records;
    let rows = [Row { issue: 1, from: Some(1), to: vec![Some(2)] }, Row { issue: 5, from: Some(1), to: vec![Some(3)] }];
    let batch = parse_forward_events(forward_text(&rows).as_bytes(), InputFormat::Csv).unwrap();
    let out = clean(parsed, batch, &CleaningConfig::default());
    assert_eq!(out.forwards.len(), 1);
    assert_eq!(out.drops.len(), 1);
    assert_eq!((out.drops[0].kind, out.drops[0].reason), (RecordKind::Forward, DropReason::Orphaned));
}

#[test]
fn fail_policy_rejects_unregistered_users() {
    let parsed = parse_issue_records(issue_text(&[(1, 6, 10)]).as_bytes(), InputFormat::Csv).unwrap().records;
    let out = clean(parsed, ForwardBatch::default(), &CleaningConfig::default());
    assert!(associate(out, &[], MissingUserPolicy::Fail).is_err());
}
