// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::paths::diameter;
use crate::netbuild::{collapse, CollabGraph, Direction};
use crate::par::map_range;
use crate::Parallelism;

/// Whole-network indicators.
///
/// `edges` counts parallel edges, and so do `average_degree` (m/n) and
/// `density` (m/(n(n-1))), which is why density can exceed 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    pub density: f64,
    /// On the collapsed digraph, over reachable pairs.
    pub diameter: u32,
    pub diameter_undirected: u32,
    /// Filled in from a community partition, when one was computed.
    pub modularity: Option<f64>,
}

pub fn average_degree(n: usize, m: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        m as f64 / n as f64
    }
}

pub fn density(n: usize, m: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        m as f64 / (n as f64 * (n - 1) as f64)
    }
}

pub fn network_stats(graph: &CollabGraph) -> NetworkStats {
    network_stats_with(graph, Parallelism::default())
}

pub fn network_stats_with(graph: &CollabGraph, par: Parallelism) -> NetworkStats {
    let (n, m) = (graph.node_count(), graph.edge_count());
    let (diameter, diameter_undirected) = match BitAdjacency::dense(graph) {
        Some((out, both)) => (out.diameter(par), both.diameter(par)),
        None => sparse_diameters(graph, par),
    };
    NetworkStats {
        nodes: n,
        edges: m,
        average_degree: average_degree(n, m),
        density: density(n, m),
        diameter,
        diameter_undirected,
        modularity: None,
    }
}

fn sparse_diameters(graph: &CollabGraph, par: Parallelism) -> (u32, u32) {
    let directed = collapse(graph, Direction::Directed, None).expect("no filter");
    let undirected = collapse(graph, Direction::Undirected, None).expect("no filter");
    (diameter(&directed, par), diameter(&undirected, par))
}

/// Adjacency rows as bitsets, for breadth-first search on dense graphs.
struct BitAdjacency {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitAdjacency {
    const MAX_NODES: usize = 8192;

    /// Directed and undirected bit matrices, or `None` when the graph is too
    /// sparse for a row scan to beat adjacency lists.
    fn dense(graph: &CollabGraph) -> Option<(Self, Self)> {
        let n = graph.node_count();
        let words = n.div_ceil(64);
        if n == 0 || n > Self::MAX_NODES || n * words > 2 * graph.edge_count() {
            return None;
        }
        let nodes = graph.nodes();
        let max_id = nodes[n - 1].user.0;
        let table: Option<Vec<u32>> = (max_id <= 4 * n as u64 + 1024).then(|| {
            let mut t = vec![0u32; max_id as usize + 1];
            for (i, node) in nodes.iter().enumerate() {
                t[node.user.0 as usize] = i as u32;
            }
            t
        });
        let index = |u: crate::UserId| match &table {
            Some(t) => t[u.0 as usize] as usize,
            None => nodes.binary_search_by_key(&u, |x| x.user).expect("edge endpoints are nodes"),
        };
        let mut out = BitAdjacency { n, words, rows: vec![0; n * words] };
        let mut both = BitAdjacency { n, words, rows: vec![0; n * words] };
        for e in graph.edges() {
            if e.src == e.dst {
                continue;
            }
            let (s, t) = (index(e.src), index(e.dst));
            out.set(s, t);
            both.set(s, t);
            both.set(t, s);
        }
        Some((out, both))
    }

    fn set(&mut self, row: usize, col: usize) {
        self.rows[row * self.words + col / 64] |= 1 << (col % 64);
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    fn eccentricity(&self, source: usize) -> u32 {
        let mut unseen: Vec<u64> =
            (0..self.words).map(|w| if (w + 1) * 64 <= self.n { !0 } else { (1 << (self.n % 64)) - 1 }).collect();
        let mut frontier = vec![0u64; self.words];
        let mut next = vec![0u64; self.words];
        unseen[source / 64] &= !(1 << (source % 64));
        frontier[source / 64] |= 1 << (source % 64);
        let mut depth = 0;
        loop {
            next.fill(0);
            'expand: for (w, &bits) in frontier.iter().enumerate() {
                let mut bits = bits;
                while bits != 0 {
                    let v = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let mut covered = true;
                    for ((x, r), u) in next.iter_mut().zip(self.row(v)).zip(&unseen) {
                        *x |= r;
                        covered &= *x & u == *u;
                    }
                    if covered {
                        break 'expand;
                    }
                }
            }
            let mut grew = false;
            let mut left = false;
            for (x, u) in next.iter_mut().zip(unseen.iter_mut()) {
                *x &= *u;
                *u &= !*x;
                grew |= *x != 0;
                left |= *u != 0;
            }
            if !grew {
                return depth;
            }
            depth += 1;
            if !left {
                return depth;
            }
            std::mem::swap(&mut frontier, &mut next);
        }
    }

    fn diameter(&self, par: Parallelism) -> u32 {
        map_range(self.n, par, |s| self.eccentricity(s)).into_iter().max().unwrap_or(0)
    }
}

impl NetworkStats {
    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes={}", self.nodes);
        let _ = writeln!(out, "edges={}", self.edges);
        let _ = writeln!(out, "average_degree={}", self.average_degree);
        let _ = writeln!(out, "density={}", self.density);
        let _ = writeln!(out, "diameter={}", self.diameter);
        let _ = writeln!(out, "diameter_undirected={}", self.diameter_undirected);
        if let Some(q) = self.modularity {
            let _ = writeln!(out, "modularity={q}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netbuild::NewEdge;

    #[test]
    fn reference_project_arithmetic() {
        assert!((density(226, 17068) - 0.33565).abs() < 1e-5);
        assert!((average_degree(226, 17068) - 75.522).abs() < 1e-3);
    }

    #[test]
    fn degenerate_graphs() {
        let mut b = CollabGraph::builder();
        b.node(1, "Owner", "");
        let s = network_stats(&b.build());
        assert_eq!((s.nodes, s.edges, s.density, s.diameter), (1, 0, 0.0, 0));
        let s = network_stats(&CollabGraph::default());
        assert_eq!((s.nodes, s.average_degree, s.density), (0, 0.0, 0.0));
    }

    #[test]
    fn path_diameter_directed_vs_undirected() {
        let mut b = CollabGraph::builder();
        b.add_edge(NewEdge::new(1, 2));
        b.add_edge(NewEdge::new(2, 3));
        b.add_edge(NewEdge::new(4, 3));
        let s = network_stats(&b.build());
        assert_eq!(s.diameter, 2);
        assert_eq!(s.diameter_undirected, 3);
        assert!(s.to_key_value().starts_with("nodes=4\nedges=3\naverage_degree=0.75\n"));
    }

    #[test]
    fn dense_and_sparse_diameters_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut dense = 0;
        for _ in 0..60 {
            let n = rng.random_range(2..40u64);
            let p = rng.random_range(0.02..0.9);
            let mut b = CollabGraph::builder();
            b.node(if rng.random_bool(0.5) { n + 500 } else { 1 << 40 }, "", "");
            for s in 1..=n {
                for t in 1..=n {
                    if rng.random_bool(p) {
                        b.add_edge(NewEdge::new(s * 3, t * 3));
                    }
                }
            }
            let g = b.build();
            if let Some((out, both)) = BitAdjacency::dense(&g) {
                dense += 1;
                let want = sparse_diameters(&g, Parallelism::Sequential);
                assert_eq!((out.diameter(Parallelism::Sequential), both.diameter(Parallelism::Parallel)), want);
            }
        }
        assert!(dense > 20);
    }
}
