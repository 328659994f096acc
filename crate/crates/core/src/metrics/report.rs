// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};

use serde::Serialize;

use super::community::CommunityPartition;
use super::degree::degree_centrality;
use super::paths::{betweenness_centrality_with, closeness_centrality_with, ClosenessMode};
use crate::netbuild::{collapse, CollabGraph, Direction};
use crate::{Parallelism, UserId};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityRow {
    pub user: UserId,
    pub role: String,
    pub in_degree: u64,
    pub out_degree: u64,
    pub total_degree: u64,
    pub closeness_raw: f64,
    pub closeness_norm: f64,
    pub betweenness: f64,
    pub community: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKey {
    Degree,
    Closeness(ClosenessMode),
    Betweenness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityReport {
    pub rows: Vec<CentralityRow>,
}

/// Degrees on the multigraph, closeness and betweenness on its directed
/// collapse. Rows follow node order.
pub fn centrality_report(graph: &CollabGraph, partition: Option<&CommunityPartition>, par: Parallelism) -> CentralityReport {
    let directed = collapse(graph, Direction::Directed, None).expect("no filter");
    let raw = closeness_centrality_with(&directed, ClosenessMode::Raw, par);
    let norm = closeness_centrality_with(&directed, ClosenessMode::Normalized, par);
    let betweenness = betweenness_centrality_with(&directed, par);
    let rows = degree_centrality(graph)
        .into_iter()
        .zip(graph.nodes())
        .map(|(d, node)| CentralityRow {
            user: d.user,
            role: node.role.clone(),
            in_degree: d.in_degree,
            out_degree: d.out_degree,
            total_degree: d.total,
            closeness_raw: raw[&d.user],
            closeness_norm: norm[&d.user],
            betweenness: betweenness[&d.user],
            community: partition.and_then(|p| p.assignment.get(&d.user).copied()),
        })
        .collect();
    CentralityReport { rows }
}

impl CentralityRow {
    fn value(&self, key: CentralityKey) -> f64 {
        match key {
            CentralityKey::Degree => self.total_degree as f64,
            CentralityKey::Closeness(ClosenessMode::Raw) => self.closeness_raw,
            CentralityKey::Closeness(ClosenessMode::Normalized) => self.closeness_norm,
            CentralityKey::Betweenness => self.betweenness,
        }
    }
}

impl CentralityReport {
    /// The `k` highest rows by `key`; ties go to the lower user id.
    pub fn top(&self, key: CentralityKey, k: usize) -> Vec<&CentralityRow> {
        let mut rows: Vec<&CentralityRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.value(key).total_cmp(&a.value(key)).then(a.user.cmp(&b.user)));
        rows.truncate(k);
        rows
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        w.write_record([
            "node_id",
            "role",
            "in_degree",
            "out_degree",
            "total_degree",
            "closeness_raw",
            "closeness_norm",
            "betweenness",
            "community",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.user.to_string(),
                r.role.clone(),
                r.in_degree.to_string(),
                r.out_degree.to_string(),
                r.total_degree.to_string(),
                r.closeness_raw.to_string(),
                r.closeness_norm.to_string(),
                r.betweenness.to_string(),
                r.community.map(|c| c.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()
    }
}
