// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::netbuild::{Direction, SimpleWeightedGraph};
use crate::par::{chunked_vec_sum, map_range};
use crate::{Parallelism, UserId};

/// Sources per work unit in the betweenness accumulation.
const SOURCE_CHUNK: usize = 8;

pub const UNREACHABLE: u32 = u32::MAX;

/// Closeness flavour.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosenessMode {
    /// `1 / Σ d(x, y)` over the nodes reachable from x.
    Raw,
    /// `(r - 1) / Σ d(x, y)` where r counts the reachable nodes including x.
    #[default]
    Normalized,
}

impl FromStr for ClosenessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(ClosenessMode::Raw),
            "normalized" | "normalised" => Ok(ClosenessMode::Normalized),
            other => Err(format!("unknown closeness mode `{other}` (expected raw or normalized)")),
        }
    }
}

impl fmt::Display for ClosenessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClosenessMode::Raw => "raw",
            ClosenessMode::Normalized => "normalized",
        })
    }
}

/// Unweighted adjacency in compressed rows, indexed like the graph's nodes.
///
/// Weights are dropped (distances are hop counts) and so are self-loops.
/// An undirected graph contributes both directions of every link.
#[derive(Debug, Clone)]
pub struct HopAdjacency {
    users: Vec<UserId>,
    out_start: Vec<usize>,
    out_adj: Vec<usize>,
    in_start: Vec<usize>,
    in_adj: Vec<usize>,
}

fn compress(n: usize, pairs: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut start = vec![0usize; n + 1];
    for &(a, _) in pairs {
        start[a + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut adj = vec![0usize; pairs.len()];
    for &(a, b) in pairs {
        adj[fill[a]] = b;
        fill[a] += 1;
    }
    (start, adj)
}

impl HopAdjacency {
    pub fn from_weighted(g: &SimpleWeightedGraph) -> Self {
        let users: Vec<UserId> = g.nodes.iter().map(|n| n.user).collect();
        let index: BTreeMap<UserId, usize> = users.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        let mut pairs = Vec::with_capacity(g.arcs.len() * 2);
        for (&(a, b), &w) in &g.arcs {
            if a == b || w == 0 {
                continue;
            }
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else { continue };
            pairs.push((ia, ib));
            if g.direction == Direction::Undirected {
                pairs.push((ib, ia));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let (out_start, out_adj) = compress(users.len(), &pairs);
        let mut rev: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        rev.sort_unstable();
        let (in_start, in_adj) = compress(users.len(), &rev);
        HopAdjacency { users, out_start, out_adj, in_start, in_adj }
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out_adj[self.out_start[v]..self.out_start[v + 1]]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.in_adj[self.in_start[v]..self.in_start[v + 1]]
    }

    /// Breadth-first search from `source`, counting shortest paths.
    pub fn bfs(&self, source: usize) -> Bfs {
        let n = self.len();
        let mut dist = vec![UNREACHABLE; n];
        let mut sigma = vec![0.0f64; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        dist[source] = 0;
        sigma[source] = 1.0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in self.successors(v) {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        Bfs { dist, sigma, order }
    }
}

/// Single-source shortest path data.
#[derive(Debug, Clone, PartialEq)]
pub struct Bfs {
    /// Hop distance, [`UNREACHABLE`] when there is no path.
    pub dist: Vec<u32>,
    /// Number of distinct shortest paths from the source.
    pub sigma: Vec<f64>,
    /// Reached nodes in non-decreasing distance.
    pub order: Vec<usize>,
}

impl Bfs {
    /// Sum of distances to reached nodes and the number of reached nodes
    /// (the source included).
    pub fn reach(&self) -> (u64, usize) {
        let sum = self.order.iter().map(|&v| self.dist[v] as u64).sum();
        (sum, self.order.len())
    }
}

fn closeness_value(sum: u64, reached: usize, mode: ClosenessMode) -> f64 {
    if sum == 0 {
        return 0.0;
    }
    match mode {
        ClosenessMode::Raw => 1.0 / sum as f64,
        ClosenessMode::Normalized => (reached - 1) as f64 / sum as f64,
    }
}

pub fn closeness_centrality(g: &SimpleWeightedGraph, mode: ClosenessMode) -> BTreeMap<UserId, f64> {
    closeness_centrality_with(g, mode, Parallelism::default())
}

/// Outgoing closeness per node. Isolated nodes (nothing reachable) score 0.
pub fn closeness_centrality_with(g: &SimpleWeightedGraph, mode: ClosenessMode, par: Parallelism) -> BTreeMap<UserId, f64> {
    let adj = HopAdjacency::from_weighted(g);
    let reach = map_range(adj.len(), par, |s| adj.bfs(s).reach());
    adj.users().iter().zip(reach).map(|(u, (sum, r))| (*u, closeness_value(sum, r, mode))).collect()
}

pub fn betweenness_centrality(g: &SimpleWeightedGraph) -> BTreeMap<UserId, f64> {
    betweenness_centrality_with(g, Parallelism::default())
}

/// Unnormalized betweenness over ordered pairs, by dependency accumulation
/// from every source. An undirected graph is read as symmetric, so each
/// unordered pair is counted twice.
pub fn betweenness_centrality_with(g: &SimpleWeightedGraph, par: Parallelism) -> BTreeMap<UserId, f64> {
    let adj = HopAdjacency::from_weighted(g);
    let n = adj.len();
    let scores = chunked_vec_sum(n, n, SOURCE_CHUNK, par, |sources, acc| {
        let mut delta = vec![0.0f64; n];
        for s in sources {
            let bfs = adj.bfs(s);
            for &v in &bfs.order {
                delta[v] = 0.0;
            }
            for &w in bfs.order.iter().rev() {
                let coeff = (1.0 + delta[w]) / bfs.sigma[w];
                for &v in adj.predecessors(w) {
                    if bfs.dist[v] != UNREACHABLE && bfs.dist[v] + 1 == bfs.dist[w] {
                        delta[v] += bfs.sigma[v] * coeff;
                    }
                }
                if w != s {
                    acc[w] += delta[w];
                }
            }
        }
    });
    adj.users().iter().copied().zip(scores).collect()
}

/// Largest finite hop distance between any two nodes; 0 for graphs without
/// a path of length one or more.
pub fn diameter(g: &SimpleWeightedGraph, par: Parallelism) -> u32 {
    let adj = HopAdjacency::from_weighted(g);
    map_range(adj.len(), par, |s| {
        let bfs = adj.bfs(s);
        bfs.order.last().map_or(0, |&v| bfs.dist[v])
    })
    .into_iter()
    .max()
    .unwrap_or(0)
}
