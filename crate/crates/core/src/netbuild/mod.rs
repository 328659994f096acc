// SPDX-License-Identifier: Apache-2.0

//! The collaboration multigraph and its weighted simple views.
//!
//! Users are nodes. Each forward event becomes one directed edge carrying the
//! issue id, the forward's timestamp and the issue's level and type labels,
//! so a pair of users is usually joined by many parallel edges.

mod collapse;
mod gml;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EnrichedDataset, UNKNOWN_ROLE};
use crate::{ForwardId, IssueId, UserId};

pub use collapse::{collapse, LabelFilter, SimpleWeightedGraph};
pub use gml::{parse_gml, GmlDocument, GmlError, GmlExport, GmlValue};

/// Which edge label a filter or count looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelAxis {
    Level,
    Type,
}

impl fmt::Display for LabelAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelAxis::Level => "level",
            LabelAxis::Type => "type",
        })
    }
}

impl FromStr for LabelAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "level" => Ok(LabelAxis::Level),
            "type" => Ok(LabelAxis::Type),
            other => Err(format!("unknown label axis `{other}` (expected level or type)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Directed,
    #[default]
    Undirected,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Directed => "directed",
            Direction::Undirected => "undirected",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(UserId),
    #[error("unknown {axis} label `{value}`")]
    UnknownLabel { axis: LabelAxis, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub user: UserId,
    pub role: String,
    pub organization: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub src: UserId,
    pub dst: UserId,
    pub issue: IssueId,
    pub forward: ForwardId,
    pub level: String,
    pub kind: String,
    pub timestamp: i64,
}

impl Edge {
    pub fn label(&self, axis: LabelAxis) -> &str {
        match axis {
            LabelAxis::Level => &self.level,
            LabelAxis::Type => &self.kind,
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

/// Multi-directed labeled collaboration graph. Immutable once built.
///
/// Nodes are ordered by user id; edges keep insertion order and their `id`
/// is their position.
#[derive(Debug, Clone, Default)]
pub struct CollabGraph {
    nodes: Vec<Node>,
    index: HashMap<UserId, usize>,
    edges: Vec<Edge>,
    pairs: HashMap<(UserId, UserId), Vec<usize>>,
    level_labels: BTreeSet<String>,
    type_labels: BTreeSet<String>,
}

impl CollabGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, user: UserId) -> Option<&Node> {
        self.index.get(&user).map(|&i| &self.nodes[i])
    }

    pub fn node_index(&self, user: UserId) -> Option<usize> {
        self.index.get(&user).copied()
    }

    pub fn contains(&self, user: UserId) -> bool {
        self.index.contains_key(&user)
    }

    /// Edges from `src` to `dst`, in insertion order.
    pub fn edges_between(&self, src: UserId, dst: UserId) -> impl Iterator<Item = &Edge> + '_ {
        self.pairs.get(&(src, dst)).into_iter().flatten().map(move |&i| &self.edges[i])
    }

    /// Ordered pairs joined by at least one edge, with their edge indices.
    pub fn pairs(&self) -> impl Iterator<Item = (&(UserId, UserId), &[usize])> + '_ {
        self.pairs.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Every label value known for `axis`: the label map's universe plus any
    /// label seen on an edge.
    pub fn labels(&self, axis: LabelAxis) -> &BTreeSet<String> {
        match axis {
            LabelAxis::Level => &self.level_labels,
            LabelAxis::Type => &self.type_labels,
        }
    }

    pub fn check_label(&self, axis: LabelAxis, value: &str) -> Result<(), GraphError> {
        if self.labels(axis).contains(value) {
            Ok(())
        } else {
            Err(GraphError::UnknownLabel { axis, value: value.to_string() })
        }
    }

    pub fn check_node(&self, user: UserId) -> Result<usize, GraphError> {
        self.node_index(user).ok_or(GraphError::UnknownNode(user))
    }

    /// Writes the `src,dst,issue_id,level,type,ts` edge list.
    pub fn write_edge_list<W: Write>(&self, sink: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        w.write_record(["src", "dst", "issue_id", "level", "type", "ts"])?;
        for e in &self.edges {
            w.write_record([
                e.src.to_string(),
                e.dst.to_string(),
                e.issue.to_string(),
                e.level.clone(),
                e.kind.clone(),
                e.timestamp.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Edge description for [`GraphBuilder::add_edge`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewEdge {
    pub src: UserId,
    pub dst: UserId,
    pub issue: IssueId,
    pub forward: ForwardId,
    pub level: String,
    pub kind: String,
    pub timestamp: i64,
}

impl NewEdge {
    pub fn new(src: impl Into<UserId>, dst: impl Into<UserId>) -> Self {
        NewEdge {
            src: src.into(),
            dst: dst.into(),
            issue: IssueId(0),
            forward: ForwardId::new(0, 0),
            level: String::new(),
            kind: String::new(),
            timestamp: 0,
        }
    }

    pub fn issue(mut self, issue: u64) -> Self {
        self.issue = IssueId(issue);
        self
    }

    pub fn forward(mut self, forward: ForwardId) -> Self {
        self.forward = forward;
        self
    }

    pub fn level(mut self, level: &str) -> Self {
        self.level = level.to_string();
        self
    }

    pub fn kind(mut self, kind: &str) -> Self {
        self.kind = kind.to_string();
        self
    }

    pub fn at(mut self, timestamp: i64) -> Self {
        self.timestamp = timestamp;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<UserId, Node>,
    edges: Vec<Edge>,
    level_labels: BTreeSet<String>,
    type_labels: BTreeSet<String>,
}

impl GraphBuilder {
    /// Finds or creates a node. An existing node keeps its attributes.
    pub fn node(&mut self, user: impl Into<UserId>, role: &str, organization: &str) -> &mut Self {
        let user = user.into();
        self.nodes.entry(user).or_insert_with(|| Node { user, role: role.to_string(), organization: organization.to_string() });
        self
    }

    /// Adds one edge, creating missing endpoints with the unknown role.
    pub fn add_edge(&mut self, edge: NewEdge) -> usize {
        for u in [edge.src, edge.dst] {
            self.node(u, UNKNOWN_ROLE, "");
        }
        if !edge.level.is_empty() {
            self.level_labels.insert(edge.level.clone());
        }
        if !edge.kind.is_empty() {
            self.type_labels.insert(edge.kind.clone());
        }
        let id = self.edges.len();
        self.edges.push(Edge {
            id,
            src: edge.src,
            dst: edge.dst,
            issue: edge.issue,
            forward: edge.forward,
            level: edge.level,
            kind: edge.kind,
            timestamp: edge.timestamp,
        });
        id
    }

    /// Registers label values that may not occur on any edge.
    pub fn label_universe<I, S>(&mut self, axis: LabelAxis, labels: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set = match axis {
            LabelAxis::Level => &mut self.level_labels,
            LabelAxis::Type => &mut self.type_labels,
        };
        set.extend(labels.into_iter().map(Into::into).filter(|s: &String| !s.is_empty()));
        self
    }

    pub fn build(self) -> CollabGraph {
        let nodes: Vec<Node> = self.nodes.into_values().collect();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.user, i)).collect();
        let mut pairs: HashMap<(UserId, UserId), Vec<usize>> = HashMap::new();
        for e in &self.edges {
            pairs.entry((e.src, e.dst)).or_default().push(e.id);
        }
        CollabGraph { nodes, index, edges: self.edges, pairs, level_labels: self.level_labels, type_labels: self.type_labels }
    }
}

/// Builds the collaboration multigraph.
///
/// Issues are visited in id order and each issue's forwards in
/// (timestamp, forward id) order. Nodes come only from forward endpoints, so
/// a creator whose issue was never forwarded does not appear.
pub fn build_network(data: &EnrichedDataset) -> CollabGraph {
    let mut b = GraphBuilder::default();
    b.label_universe(LabelAxis::Level, data.level_labels.iter().cloned());
    b.label_universe(LabelAxis::Type, data.type_labels.iter().cloned());

    let mut by_issue = data.forwards_by_issue();
    let mut issues: Vec<_> = data.issues.iter().collect();
    issues.sort_by_key(|i| i.record.issue_id);
    for issue in issues {
        let Some(forwards) = by_issue.get_mut(&issue.record.issue_id) else { continue };
        forwards.sort_by_key(|f| (f.created_at, f.forward_id));
        for f in forwards.iter() {
            let Some((src, dst)) = f.endpoints() else { continue };
            for u in [src, dst] {
                match data.user(u) {
                    Some(user) => b.node(u, &user.role, &user.record.organization),
                    None => b.node(u, UNKNOWN_ROLE, ""),
                };
            }
            b.add_edge(NewEdge {
                src,
                dst,
                issue: issue.record.issue_id,
                forward: f.forward_id,
                level: issue.level.clone(),
                kind: issue.kind.clone(),
                timestamp: f.created_at,
            });
        }
    }
    b.build()
}
