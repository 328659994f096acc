// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::netbuild::{CollabGraph, LabelAxis};
use crate::{IssueId, UserId};

/// The set of forwards handled within one issue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transaction {
    pub issue: IssueId,
    pub items: BTreeSet<String>,
}

impl Transaction {
    pub fn new<I, S>(issue: IssueId, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Transaction { issue, items: items.into_iter().map(Into::into).collect() }
    }
}

/// Item text for one forward: `"A->B"` or `"A->B:L"`.
pub fn item_text(src: UserId, dst: UserId, label: Option<&str>) -> String {
    match label {
        Some(l) => format!("{src}->{dst}:{l}"),
        None => format!("{src}->{dst}"),
    }
}

/// One transaction per issue with at least one edge, ordered by issue id.
/// With `label` set, each item carries the edge's label on that axis.
pub fn build_transactions(graph: &CollabGraph, label: Option<LabelAxis>) -> Vec<Transaction> {
    let mut by_issue: BTreeMap<IssueId, BTreeSet<String>> = BTreeMap::new();
    for e in graph.edges() {
        let item = item_text(e.src, e.dst, label.map(|axis| e.label(axis)));
        by_issue.entry(e.issue).or_default().insert(item);
    }
    by_issue.into_iter().map(|(issue, items)| Transaction { issue, items }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netbuild::NewEdge;

    #[test]
    fn plain_and_labeled_items() {
        let mut b = CollabGraph::builder();
        b.add_edge(NewEdge::new(291, 255).issue(4).level("M"));
        b.add_edge(NewEdge::new(255, 291).issue(4).level("M"));
        b.add_edge(NewEdge::new(255, 291).issue(4).level("M"));
        b.add_edge(NewEdge::new(1, 2).issue(2).level("H"));
        let g = b.build();

        let plain = build_transactions(&g, None);
        assert_eq!(plain.len(), 2);
        assert_eq!(plain[0], Transaction::new(IssueId(2), ["1->2"]));
        assert_eq!(plain[1], Transaction::new(IssueId(4), ["291->255", "255->291"]));

        let labeled = build_transactions(&g, Some(LabelAxis::Level));
        assert_eq!(labeled[1].items.iter().map(String::as_str).collect::<Vec<_>>(), ["255->291:M", "291->255:M"]);
    }

    #[test]
    fn empty_graph_has_no_transactions() {
        assert!(build_transactions(&CollabGraph::default(), None).is_empty());
    }
}
