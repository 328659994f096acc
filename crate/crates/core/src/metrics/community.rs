// SPDX-License-Identifier: Apache-2.0

//! Louvain modularity optimisation on the undirected weighted view.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netbuild::SimpleWeightedGraph;
use crate::UserId;

const GAIN_EPS: f64 = 1e-12;
const MAX_PASSES: usize = 1000;
const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityParams {
    pub resolution: f64,
    pub seed: u64,
}

impl Default for CommunityParams {
    fn default() -> Self {
        Self { resolution: 1.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    /// Community ids are dense and numbered by their smallest member.
    pub assignment: BTreeMap<UserId, usize>,
    pub community_count: usize,
    pub modularity: f64,
    pub resolution: f64,
    pub seed: u64,
}

/// Symmetric weighted adjacency without self entries; `self_weight` holds
/// the weight folded inside a node.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_weight: Vec<f64>,
}

impl Level {
    fn from_graph(g: &SimpleWeightedGraph) -> Self {
        let index: BTreeMap<UserId, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.user, i)).collect();
        let mut links: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(a, b), &w) in &g.arcs {
            if a == b {
                continue;
            }
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else { continue };
            *links.entry((ia.min(ib), ia.max(ib))).or_insert(0.0) += w as f64;
        }
        let mut adj = vec![Vec::new(); g.nodes.len()];
        for ((a, b), w) in links {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for row in &mut adj {
            row.sort_by_key(|&(v, _)| v);
        }
        Level { self_weight: vec![0.0; g.nodes.len()], adj }
    }

    fn strength(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_weight[v]
    }

    /// Local moving. Returns dense labels and whether any node moved.
    fn local_moves(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.adj.len();
        let k: Vec<f64> = (0..n).map(|v| self.strength(v)).collect();
        let m2: f64 = k.iter().sum();
        let mut comm: Vec<usize> = (0..n).collect();
        if m2 == 0.0 {
            return (comm, false);
        }
        let mut tot = k.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut links_to = vec![0.0f64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut improved = false;
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for &v in &order {
                let own = comm[v];
                for &c in &touched {
                    links_to[c] = 0.0;
                }
                touched.clear();
                touched.push(own);
                for &(u, w) in &self.adj[v] {
                    let c = comm[u];
                    if links_to[c] == 0.0 && !touched.contains(&c) {
                        touched.push(c);
                    }
                    links_to[c] += w;
                }
                tot[own] -= k[v];
                let gain = |c: usize| links_to[c] - resolution * tot[c] * k[v] / m2;
                let mut best = own;
                let mut best_gain = gain(own);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c);
                    if g > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[v];
                if best != own {
                    comm[v] = best;
                    moved = true;
                    improved = true;
                }
            }
            if !moved {
                break;
            }
        }
        (relabel(&comm), improved)
    }

    fn aggregate(&self, labels: &[usize], count: usize) -> Level {
        let mut self_weight = vec![0.0; count];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for (v, row) in self.adj.iter().enumerate() {
            let cv = labels[v];
            self_weight[cv] += self.self_weight[v];
            for &(u, w) in row {
                let cu = labels[u];
                if cu == cv {
                    // each internal link is visited from both ends
                    self_weight[cv] += w / 2.0;
                } else {
                    *links[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        Level { adj: links.into_iter().map(|m| m.into_iter().collect()).collect(), self_weight }
    }
}

/// Renumbers labels densely in order of first appearance.
fn relabel(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Louvain community detection on `g` read as undirected and weighted.
///
/// Node visit order within each level comes from a ChaCha8 shuffle seeded
/// with `params.seed`; equal gains resolve to the lowest community id. The
/// reported modularity is recomputed from the final assignment.
pub fn detect_communities(g: &SimpleWeightedGraph, params: CommunityParams) -> CommunityPartition {
    let n = g.nodes.len();
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut level = Level::from_graph(g);
    for depth in 0..MAX_LEVELS {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(depth as u64));
        let (labels, improved) = level.local_moves(params.resolution, &mut rng);
        if !improved {
            break;
        }
        for a in assignment.iter_mut() {
            *a = labels[*a];
        }
        let count = labels.iter().max().map_or(0, |m| m + 1);
        level = level.aggregate(&labels, count);
    }
    let assignment = relabel(&assignment);
    let community_count = assignment.iter().max().map_or(0, |m| m + 1);
    let assignment: BTreeMap<UserId, usize> = g.nodes.iter().map(|n| n.user).zip(assignment).collect();
    let q = modularity(g, &assignment, params.resolution);
    CommunityPartition { assignment, community_count, modularity: q, resolution: params.resolution, seed: params.seed }
}

/// Q = Σ_c [ l_c / m − γ (d_c / 2m)² ] on the undirected weighted view of
/// `g`, self-loops excluded. Nodes missing from `assignment` count as
/// singletons. Returns 0 for a graph without links.
pub fn modularity(g: &SimpleWeightedGraph, assignment: &BTreeMap<UserId, usize>, resolution: f64) -> f64 {
    let mut total = 0.0;
    let mut internal: BTreeMap<Option<usize>, f64> = BTreeMap::new();
    let mut degree: BTreeMap<Option<usize>, f64> = BTreeMap::new();
    let mut singleton_degree: BTreeMap<UserId, f64> = BTreeMap::new();
    for (&(a, b), &w) in &g.arcs {
        if a == b {
            continue;
        }
        let w = w as f64;
        total += w;
        let (ca, cb) = (assignment.get(&a).copied(), assignment.get(&b).copied());
        for (u, c) in [(a, ca), (b, cb)] {
            match c {
                Some(_) => *degree.entry(c).or_insert(0.0) += w,
                None => *singleton_degree.entry(u).or_insert(0.0) += w,
            }
        }
        if ca.is_some() && ca == cb {
            *internal.entry(ca).or_insert(0.0) += w;
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    let two_m = 2.0 * total;
    let mut q = 0.0;
    for (c, d) in &degree {
        let l = internal.get(c).copied().unwrap_or(0.0);
        q += l / total - resolution * (d / two_m).powi(2);
    }
    for d in singleton_degree.values() {
        q -= resolution * (d / two_m).powi(2);
    }
    q
}
