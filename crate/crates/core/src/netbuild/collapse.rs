// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CollabGraph, Direction, GraphError, LabelAxis, Node};
use crate::UserId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelFilter {
    pub axis: LabelAxis,
    pub value: String,
}

impl LabelFilter {
    pub fn new(axis: LabelAxis, value: &str) -> Self {
        Self { axis, value: value.to_string() }
    }
}

/// Simple graph obtained by merging parallel edges; the weight of an arc is
/// the number of merged edges.
///
/// Undirected arcs are keyed `(min, max)`. Self-loops are kept as arcs so
/// that weights always add up to the multigraph edge count; the shortest
/// path code skips them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleWeightedGraph {
    pub nodes: Vec<Node>,
    pub arcs: BTreeMap<(UserId, UserId), u64>,
    pub direction: Direction,
    pub filter: Option<LabelFilter>,
}

impl SimpleWeightedGraph {
    pub fn key(direction: Direction, x: UserId, y: UserId) -> (UserId, UserId) {
        match direction {
            Direction::Undirected if y < x => (y, x),
            _ => (x, y),
        }
    }

    pub fn weight(&self, x: UserId, y: UserId) -> u64 {
        self.arcs.get(&Self::key(self.direction, x, y)).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.arcs.values().sum()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Keeps arcs with weight at least `min_weight`, and only the nodes
    /// incident to a kept arc.
    pub fn threshold(&self, min_weight: u64) -> SimpleWeightedGraph {
        let arcs: BTreeMap<_, _> = self.arcs.iter().filter(|(_, &w)| w >= min_weight).map(|(k, w)| (*k, *w)).collect();
        let used: BTreeSet<UserId> = arcs.keys().flat_map(|&(a, b)| [a, b]).collect();
        SimpleWeightedGraph {
            nodes: self.nodes.iter().filter(|n| used.contains(&n.user)).cloned().collect(),
            arcs,
            direction: self.direction,
            filter: self.filter.clone(),
        }
    }

    /// Applies `f` to every weight. Zero results drop the arc.
    pub fn map_weights(&self, f: impl Fn(u64) -> u64) -> SimpleWeightedGraph {
        SimpleWeightedGraph {
            nodes: self.nodes.clone(),
            arcs: self.arcs.iter().map(|(k, &w)| (*k, f(w))).filter(|(_, w)| *w > 0).collect(),
            direction: self.direction,
            filter: self.filter.clone(),
        }
    }
}

/// Merges parallel edges, optionally counting only edges whose `filter`
/// label matches. Every multigraph node is kept.
pub fn collapse(
    graph: &CollabGraph,
    direction: Direction,
    filter: Option<&LabelFilter>,
) -> Result<SimpleWeightedGraph, GraphError> {
    if let Some(f) = filter {
        graph.check_label(f.axis, &f.value)?;
    }
    let mut arcs = BTreeMap::new();
    for e in graph.edges() {
        if filter.is_some_and(|f| e.label(f.axis) != f.value) {
            continue;
        }
        *arcs.entry(SimpleWeightedGraph::key(direction, e.src, e.dst)).or_insert(0) += 1;
    }
    Ok(SimpleWeightedGraph { nodes: graph.nodes().to_vec(), arcs, direction, filter: filter.cloned() })
}
