// SPDX-License-Identifier: Apache-2.0

//! Network statistics, node centralities and community detection.
//!
//! Degrees count parallel edges. Closeness, betweenness and diameter work on
//! the collapsed simple digraph with unit hop distances; self-loops never
//! take part in a shortest path.

mod community;
mod degree;
mod paths;
mod report;
mod stats;

pub use community::{detect_communities, modularity, CommunityParams, CommunityPartition};
pub use degree::{degree_centrality, DegreeCentrality};
pub use paths::{
    betweenness_centrality, betweenness_centrality_with, closeness_centrality, closeness_centrality_with, diameter, Bfs,
    ClosenessMode, HopAdjacency, UNREACHABLE,
};
pub use report::{centrality_report, CentralityKey, CentralityReport, CentralityRow};
pub use stats::{average_degree, density, network_stats, network_stats_with, NetworkStats};
