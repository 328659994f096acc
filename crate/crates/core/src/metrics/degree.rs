// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use crate::netbuild::CollabGraph;
use crate::UserId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegreeCentrality {
    pub user: UserId,
    pub in_degree: u64,
    pub out_degree: u64,
    pub total: u64,
}

/// In, out and total degree per node (node order), counting every
/// parallel edge. A self-loop adds one to both in and out.
pub fn degree_centrality(graph: &CollabGraph) -> Vec<DegreeCentrality> {
    let mut ins = vec![0u64; graph.node_count()];
    let mut outs = vec![0u64; graph.node_count()];
    for e in graph.edges() {
        if let (Some(s), Some(d)) = (graph.node_index(e.src), graph.node_index(e.dst)) {
            outs[s] += 1;
            ins[d] += 1;
        }
    }
    graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| DegreeCentrality { user: n.user, in_degree: ins[i], out_degree: outs[i], total: ins[i] + outs[i] })
        .collect()
}
