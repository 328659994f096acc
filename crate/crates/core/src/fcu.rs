// SPDX-License-Identifier: Apache-2.0

//! Frequently collaborating users.
//!
//! The information sharing frequency of a pair is the number of multigraph
//! edges joining it; the labeled variant counts only edges with a given
//! level or type label. Pairs at or above a threshold are reported.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::netbuild::{collapse, CollabGraph, Direction, GraphError, LabelAxis, SimpleWeightedGraph};
use crate::UserId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FcuError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("sharing frequency needs two distinct users, got {0} twice")]
    SelfPair(UserId),
    #[error("threshold must be at least 1, got {0}")]
    InvalidThreshold(u64),
}

fn check_pair(graph: &CollabGraph, x: UserId, y: UserId) -> Result<(), FcuError> {
    graph.check_node(x)?;
    graph.check_node(y)?;
    if x == y {
        return Err(FcuError::SelfPair(x));
    }
    Ok(())
}

fn count_edges(
    graph: &CollabGraph,
    x: UserId,
    y: UserId,
    direction: Direction,
    keep: impl Fn(&crate::netbuild::Edge) -> bool,
) -> u64 {
    let forward = graph.edges_between(x, y).filter(|e| keep(e)).count();
    let backward = match direction {
        Direction::Directed => 0,
        Direction::Undirected => graph.edges_between(y, x).filter(|e| keep(e)).count(),
    };
    (forward + backward) as u64
}

/// Edges from x to y (directed) or between x and y in either direction.
pub fn isf(graph: &CollabGraph, x: UserId, y: UserId, direction: Direction) -> Result<u64, FcuError> {
    check_pair(graph, x, y)?;
    Ok(count_edges(graph, x, y, direction, |_| true))
}

/// As [`isf`], counting only edges whose `axis` label equals `label`.
pub fn lisf(
    graph: &CollabGraph,
    axis: LabelAxis,
    label: &str,
    x: UserId,
    y: UserId,
    direction: Direction,
) -> Result<u64, FcuError> {
    graph.check_label(axis, label)?;
    check_pair(graph, x, y)?;
    Ok(count_edges(graph, x, y, direction, |e| e.label(axis) == label))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequentPair {
    pub x: UserId,
    pub y: UserId,
    pub frequency: u64,
    pub label: Option<String>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequentPairReport {
    pub pairs: Vec<FrequentPair>,
    pub threshold: u64,
    pub direction: Direction,
    pub axis: Option<LabelAxis>,
}

impl FrequentPairReport {
    fn sorted(mut pairs: Vec<FrequentPair>, threshold: u64, direction: Direction, axis: Option<LabelAxis>) -> Self {
        pairs.sort_by(|a, b| b.frequency.cmp(&a.frequency).then((a.x, a.y).cmp(&(b.x, b.y))).then(a.label.cmp(&b.label)));
        FrequentPairReport { pairs, threshold, direction, axis }
    }

    /// CSV with columns `x,y,label,frequency,direction`.
    pub fn write_csv<W: Write>(&self, sink: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        w.write_record(["x", "y", "label", "frequency", "direction"])?;
        for p in &self.pairs {
            w.write_record([
                p.x.to_string(),
                p.y.to_string(),
                p.label.clone().unwrap_or_default(),
                p.frequency.to_string(),
                p.direction.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Pairs whose sharing frequency is at least `min_isf`, plus the weighted
/// subgraph of those pairs for export. Self-loops are never pairs.
pub fn frequent_pairs(
    graph: &CollabGraph,
    min_isf: u64,
    direction: Direction,
) -> Result<(FrequentPairReport, SimpleWeightedGraph), FcuError> {
    if min_isf == 0 {
        return Err(FcuError::InvalidThreshold(min_isf));
    }
    let mut collapsed = collapse(graph, direction, None)?;
    collapsed.arcs.retain(|(a, b), _| a != b);
    let filtered = collapsed.threshold(min_isf);
    let pairs =
        filtered.arcs.iter().map(|(&(x, y), &frequency)| FrequentPair { x, y, frequency, label: None, direction }).collect();
    Ok((FrequentPairReport::sorted(pairs, min_isf, direction, None), filtered))
}

/// One entry per (pair, label) whose labeled frequency reaches `min_lisf`.
pub fn frequent_pairs_labeled(
    graph: &CollabGraph,
    axis: LabelAxis,
    min_lisf: u64,
    direction: Direction,
) -> Result<FrequentPairReport, FcuError> {
    if min_lisf == 0 {
        return Err(FcuError::InvalidThreshold(min_lisf));
    }
    let mut counts: BTreeMap<((UserId, UserId), &str), u64> = BTreeMap::new();
    for e in graph.edges().iter().filter(|e| !e.is_self_loop()) {
        let key = SimpleWeightedGraph::key(direction, e.src, e.dst);
        *counts.entry((key, e.label(axis))).or_insert(0) += 1;
    }
    let pairs = counts
        .into_iter()
        .filter(|&(_, f)| f >= min_lisf)
        .map(|(((x, y), label), frequency)| FrequentPair { x, y, frequency, label: Some(label.to_string()), direction })
        .collect();
    Ok(FrequentPairReport::sorted(pairs, min_lisf, direction, Some(axis)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netbuild::NewEdge;

    fn graph(edges: &[(u64, u64, &str)]) -> CollabGraph {
        let mut b = CollabGraph::builder();
        b.label_universe(LabelAxis::Level, ["L", "M", "H"]);
        for &(s, d, l) in edges {
            b.add_edge(NewEdge::new(s, d).level(l));
        }
        b.build()
    }

    fn u(v: u64) -> UserId {
        UserId(v)
    }

    #[test]
    fn isf_directed_and_undirected() {
        let g = graph(&[(1, 2, "H"), (1, 2, "H"), (1, 2, "M"), (2, 1, "L"), (2, 1, "L"), (3, 4, "L")]);
        assert_eq!(isf(&g, u(1), u(2), Direction::Directed), Ok(3));
        assert_eq!(isf(&g, u(1), u(2), Direction::Undirected), Ok(5));
        assert_eq!(isf(&g, u(1), u(3), Direction::Undirected), Ok(0));
        assert_eq!(isf(&g, u(1), u(1), Direction::Directed), Err(FcuError::SelfPair(u(1))));
        assert_eq!(isf(&g, u(1), u(9), Direction::Directed), Err(FcuError::Graph(GraphError::UnknownNode(u(9)))));
    }

    #[test]
    fn chain_undirected_isf() {
        let g = graph(&[(1, 2, "M"), (2, 3, "M"), (3, 2, "M"), (2, 4, "M")]);
        assert_eq!(isf(&g, u(2), u(3), Direction::Undirected), Ok(2));
    }

    #[test]
    fn lisf_counts_one_label() {
        let g = graph(&[(1, 2, "H"), (1, 2, "H"), (1, 2, "M")]);
        let d = Direction::Directed;
        assert_eq!(lisf(&g, LabelAxis::Level, "H", u(1), u(2), d), Ok(2));
        assert_eq!(lisf(&g, LabelAxis::Level, "M", u(1), u(2), d), Ok(1));
        assert_eq!(lisf(&g, LabelAxis::Level, "L", u(1), u(2), d), Ok(0));
        assert!(matches!(lisf(&g, LabelAxis::Level, "Z", u(1), u(2), d), Err(FcuError::Graph(GraphError::UnknownLabel { .. }))));
    }

    fn weighted(pairs: &[(u64, u64, usize)]) -> CollabGraph {
        let mut b = CollabGraph::builder();
        for &(x, y, n) in pairs {
            for _ in 0..n {
                b.add_edge(NewEdge::new(x, y).level("H"));
            }
        }
        b.build()
    }

    #[test]
    fn threshold_filtering() {
        let g = weighted(&[(1, 2, 120), (3, 4, 99), (5, 6, 100)]);
        let (report, sub) = frequent_pairs(&g, 100, Direction::Undirected).unwrap();
        let got: Vec<_> = report.pairs.iter().map(|p| (p.x.0, p.y.0, p.frequency)).collect();
        assert_eq!(got, vec![(1, 2, 120), (5, 6, 100)]);
        assert_eq!(sub.nodes.len(), 4);
        assert_eq!(sub.weight(u(6), u(5)), 100);

        let (all, _) = frequent_pairs(&g, 1, Direction::Undirected).unwrap();
        assert_eq!(all.pairs.len(), 3);
        assert_eq!(frequent_pairs(&g, 0, Direction::Undirected).unwrap_err(), FcuError::InvalidThreshold(0));
    }

    #[test]
    fn labeled_threshold_is_inclusive() {
        let mut edges = vec![];
        edges.extend(std::iter::repeat_n((1, 2, "H"), 70));
        edges.extend(std::iter::repeat_n((2, 1, "M"), 50));
        edges.extend(std::iter::repeat_n((3, 4, "H"), 60));
        let g = graph(&edges);
        let r = frequent_pairs_labeled(&g, LabelAxis::Level, 60, Direction::Undirected).unwrap();
        let got: Vec<_> = r.pairs.iter().map(|p| (p.x.0, p.y.0, p.label.as_deref().unwrap(), p.frequency)).collect();
        assert_eq!(got, vec![(1, 2, "H", 70), (3, 4, "H", 60)]);
        let empty = frequent_pairs_labeled(&CollabGraph::default(), LabelAxis::Level, 60, Direction::Undirected).unwrap();
        assert!(empty.pairs.is_empty());
    }

    #[test]
    fn report_csv() {
        let g = weighted(&[(1, 2, 3)]);
        let (r, _) = frequent_pairs(&g, 2, Direction::Directed).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,y,label,frequency,direction\n1,2,,3,directed\n");
    }
}
