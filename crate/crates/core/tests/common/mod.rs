// SPDX-License-Identifier: Apache-2.0

//! Slow, obviously-correct reference implementations used by the tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use collabtwin::netbuild::{CollabGraph, NewEdge, SimpleWeightedGraph};
use collabtwin::rulemine::{Itemset, Transaction};
use collabtwin::{IssueId, UserId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LEVELS: [&str; 3] = ["L", "M", "H"];
pub const TYPES: [&str; 2] = ["Safety", "Quality"];

/// Random labeled multigraph on users `1..=n`. Parallel edges and the odd
/// self-loop included.
pub fn random_multigraph(seed: u64, n: u64, p: f64) -> CollabGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = CollabGraph::builder();
    b.label_universe(collabtwin::netbuild::LabelAxis::Level, LEVELS);
    b.label_universe(collabtwin::netbuild::LabelAxis::Type, TYPES);
    for u in 1..=n {
        b.node(u, "Engineer", "Org");
    }
    let mut issue = 0;
    for s in 1..=n {
        for t in 1..=n {
            if s == t && !rng.random_bool(0.02) {
                continue;
            }
            if rng.random_bool(p) {
                for _ in 0..rng.random_range(1..=3) {
                    issue += 1;
                    b.add_edge(
                        NewEdge::new(s, t)
                            .issue(issue / 2)
                            .level(LEVELS[rng.random_range(0..3)])
                            .kind(TYPES[rng.random_range(0..2)])
                            .at(issue as i64),
                    );
                }
            }
        }
    }
    b.build()
}

/// All-pairs hop distances, shortest path counts and the centralities derived
/// from them, by Floyd-Warshall and a distance-layered count.
pub struct PathOracle {
    pub users: Vec<UserId>,
    /// `dist[s][t]`, `None` when unreachable.
    pub dist: Vec<Vec<Option<u32>>>,
    pub sigma: Vec<Vec<u128>>,
}

impl PathOracle {
    pub fn new(g: &SimpleWeightedGraph) -> Self {
        let users: Vec<UserId> = g.nodes.iter().map(|n| n.user).collect();
        let n = users.len();
        let idx: BTreeMap<UserId, usize> = users.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in g.arcs.keys() {
            if a == b {
                continue;
            }
            let (i, j) = (idx[&a], idx[&b]);
            adj[i][j] = true;
            if g.direction == collabtwin::netbuild::Direction::Undirected {
                adj[j][i] = true;
            }
        }
        let mut dist = vec![vec![None; n]; n];
        for i in 0..n {
            dist[i][i] = Some(0);
            for j in 0..n {
                if adj[i][j] {
                    dist[i][j] = Some(1);
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (dist[i][k], dist[k][j]) {
                        if dist[i][j].is_none_or(|d| a + b < d) {
                            dist[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        let mut sigma = vec![vec![0u128; n]; n];
        for s in 0..n {
            sigma[s][s] = 1;
            let mut by_layer: Vec<usize> = (0..n).filter(|&t| dist[s][t].is_some()).collect();
            by_layer.sort_by_key(|&t| dist[s][t]);
            for &t in by_layer.iter().skip(1) {
                let d = dist[s][t].unwrap();
                sigma[s][t] = (0..n).filter(|&v| adj[v][t] && dist[s][v] == Some(d - 1)).map(|v| sigma[s][v]).sum();
            }
        }
        PathOracle { users, dist, sigma }
    }

    /// Unnormalized betweenness over ordered pairs.
    pub fn betweenness(&self) -> Vec<f64> {
        let n = self.users.len();
        let mut out = vec![0.0; n];
        for s in 0..n {
            for t in 0..n {
                let Some(dst) = self.dist[s][t] else { continue };
                if s == t {
                    continue;
                }
                for (v, score) in out.iter_mut().enumerate() {
                    if v == s || v == t {
                        continue;
                    }
                    if let (Some(a), Some(b)) = (self.dist[s][v], self.dist[v][t]) {
                        if a + b == dst {
                            *score += (self.sigma[s][v] * self.sigma[v][t]) as f64 / self.sigma[s][t] as f64;
                        }
                    }
                }
            }
        }
        out
    }

    /// Outgoing closeness: raw `1/Σd` and normalized `(r-1)/Σd`.
    pub fn closeness(&self) -> Vec<(f64, f64)> {
        self.dist
            .iter()
            .map(|row| {
                let reached: Vec<u32> = row.iter().flatten().copied().collect();
                let sum: u32 = reached.iter().sum();
                if sum == 0 {
                    (0.0, 0.0)
                } else {
                    (1.0 / sum as f64, (reached.len() - 1) as f64 / sum as f64)
                }
            })
            .collect()
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().flatten().flatten().copied().max().unwrap_or(0)
    }
}

/// Counts shortest s-t paths by enumerating every simple path. Tiny graphs only.
pub fn enumerate_shortest_paths(g: &SimpleWeightedGraph, s: UserId, t: UserId) -> (Option<usize>, u128) {
    let undirected = g.direction == collabtwin::netbuild::Direction::Undirected;
    let succ = |v: UserId| -> Vec<UserId> {
        g.arcs
            .keys()
            .filter_map(|&(a, b)| {
                if a == b {
                    None
                } else if a == v {
                    Some(b)
                } else if undirected && b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    };
    let mut best: Option<usize> = None;
    let mut count = 0u128;
    let mut stack = vec![(s, vec![s])];
    while let Some((v, path)) = stack.pop() {
        if v == t {
            let len = path.len() - 1;
            match best {
                Some(b) if len > b => {}
                Some(b) if len == b => count += 1,
                _ => {
                    best = Some(len);
                    count = 1;
                }
            }
            continue;
        }
        for w in succ(v) {
            if !path.contains(&w) {
                let mut next = path.clone();
                next.push(w);
                stack.push((w, next));
            }
        }
    }
    (best, count)
}

pub fn random_transactions(seed: u64, universe: usize, max_tx: usize) -> Vec<Transaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_tx);
    let density = rng.random_range(0.1..0.6);
    (0..n)
        .map(|i| {
            let mut items: Vec<String> = (0..universe).filter(|_| rng.random_bool(density)).map(|k| format!("i{k:02}")).collect();
            if items.is_empty() {
                items.push(format!("i{:02}", rng.random_range(0..universe)));
            }
            Transaction::new(IssueId(i as u64), items)
        })
        .collect()
}

/// Every itemset over the observed items with `count / denom >= min_support`.
pub fn brute_force_itemsets(transactions: &[Transaction], min_support: f64, denom: u64) -> BTreeMap<Itemset, u64> {
    let universe: Vec<&String> = transactions.iter().flat_map(|t| &t.items).collect::<BTreeSet<_>>().into_iter().collect();
    assert!(universe.len() <= 16);
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << universe.len()) {
        let set: Vec<&String> = (0..universe.len()).filter(|i| mask >> i & 1 == 1).map(|i| universe[i]).collect();
        let count = transactions.iter().filter(|t| set.iter().all(|i| t.items.contains(*i))).count() as u64;
        if count > 0 && count as f64 / denom as f64 >= min_support {
            out.insert(Itemset::new(set.into_iter().cloned()), count);
        }
    }
    out
}

/// Modularity of an assignment on an undirected weighted graph, self-loops
/// ignored: `Σ_c [ l_c / m - γ (d_c / 2m)² ]`.
pub fn modularity(g: &SimpleWeightedGraph, assignment: &BTreeMap<UserId, usize>, resolution: f64) -> f64 {
    let mut links: BTreeMap<(UserId, UserId), f64> = BTreeMap::new();
    for (&(a, b), &w) in &g.arcs {
        if a != b {
            *links.entry((a.min(b), a.max(b))).or_insert(0.0) += w as f64;
        }
    }
    let m: f64 = links.values().sum();
    if m == 0.0 {
        return 0.0;
    }
    let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(a, b), &w) in &links {
        let (ca, cb) = (assignment[&a], assignment[&b]);
        if ca == cb {
            *inside.entry(ca).or_insert(0.0) += w;
        }
        *degree.entry(ca).or_insert(0.0) += w;
        *degree.entry(cb).or_insert(0.0) += w;
    }
    degree.iter().map(|(c, d)| inside.get(c).copied().unwrap_or(0.0) / m - resolution * (d / (2.0 * m)).powi(2)).sum()
}

/// Best modularity over every partition of the nodes (restricted growth strings).
pub fn best_partition(g: &SimpleWeightedGraph) -> (f64, BTreeMap<UserId, usize>) {
    let users: Vec<UserId> = g.nodes.iter().map(|n| n.user).collect();
    let n = users.len();
    assert!(n <= 10);
    let mut labels = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, BTreeMap::new());
    loop {
        let assignment: BTreeMap<UserId, usize> = users.iter().copied().zip(labels.iter().copied()).collect();
        let q = modularity(g, &assignment, 1.0);
        if q > best.0 + 1e-12 {
            best = (q, assignment);
        }
        // Next restricted growth string.
        let mut i = n;
        loop {
            if i <= 1 {
                return best;
            }
            i -= 1;
            let max_prev = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= max_prev {
                labels[i] += 1;
                for l in labels.iter_mut().skip(i + 1) {
                    *l = 0;
                }
                break;
            }
        }
    }
}

/// Transactions made of mirrored pairs and one item triple, padded with
/// rare filler items up to `total`.
pub struct RuleFixture {
    rows: Vec<BTreeSet<String>>,
}

impl RuleFixture {
    pub fn new() -> Self {
        RuleFixture { rows: Vec::new() }
    }

    /// `joint` rows with both items, the rest with one of them.
    pub fn mirrored(mut self, x: &str, y: &str, x_count: usize, y_count: usize, joint: usize) -> Self {
        let one = |s: &str| BTreeSet::from([s.to_string()]);
        self.rows.extend((0..joint).map(|_| BTreeSet::from([x.to_string(), y.to_string()])));
        self.rows.extend((joint..x_count).map(|_| one(x)));
        self.rows.extend((joint..y_count).map(|_| one(y)));
        self
    }

    /// Items a, b, c with counts a=195, b=207, c=211, ab=190, ac=194, bc=207, abc=190.
    pub fn triple(mut self, a: &str, b: &str, c: &str) -> Self {
        let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        self.rows.extend((0..190).map(|_| set(&[a, b, c])));
        self.rows.extend((0..4).map(|_| set(&[a, c])));
        self.rows.extend((0..1).map(|_| set(&[a])));
        self.rows.extend((0..17).map(|_| set(&[b, c])));
        self
    }

    pub fn fill(mut self, total: usize) -> Vec<Transaction> {
        let mut i = 0;
        while self.rows.len() < total {
            self.rows.push(BTreeSet::from([format!("{}->0", 1000 + i % 211)]));
            i += 1;
        }
        self.rows.into_iter().enumerate().map(|(i, items)| Transaction { issue: IssueId(i as u64 + 1), items }).collect()
    }
}

pub const REFERENCE_TRANSACTIONS: usize = 7248;

/// Plain forward rules of a 7248-issue project: `(pattern, antecedent,
/// consequent, support, confidence, lift)` as printed.
pub const PLAIN_RULES: &[(&str, &str, &str, &str, &str, &str)] = &[
    ("278->255 255->278", "278->255", "255->278", "0.01656", "0.9917", "59.90"),
    ("278->255 255->278", "255->278", "278->255", "0.01656", "1.0000", "59.90"),
    ("291->255 255->291", "291->255", "255->291", "0.01876", "0.9577", "51.04"),
    ("291->255 255->291", "255->291", "291->255", "0.01876", "1.0000", "51.04"),
    ("62->255 255->62", "62->255", "255->62", "0.02497", "1.0000", "39.39"),
    ("62->255 255->62", "255->62", "62->255", "0.02497", "0.9837", "39.39"),
    ("210->264 264->210", "210->264", "264->210", "0.02608", "0.9895", "37.35"),
    ("210->264 264->210", "264->210", "210->264", "0.02608", "0.9844", "37.35"),
    ("199->277 199->231", "199->277", "199->231", "0.02856", "1.0000", "34.35"),
    ("199->277 199->231", "199->231", "199->277", "0.02856", "0.9810", "34.35"),
    ("231->199 199->277 199->231", "199->231", "231->199 199->277", "0.02621", "0.9005", "34.35"),
    ("231->199 199->277 199->231", "231->199 199->277", "199->231", "0.02621", "1.0000", "34.35"),
    ("231->199 199->277 199->231", "199->277", "231->199 199->231", "0.02621", "0.9179", "34.29"),
    ("231->199 199->277 199->231", "231->199 199->231", "199->277", "0.02621", "0.9794", "34.29"),
    ("231->199 199->231", "231->199", "199->231", "0.02677", "0.9949", "34.17"),
    ("231->199 199->231", "199->231", "231->199", "0.02677", "0.9194", "34.17"),
    ("231->199 199->277", "231->199", "199->277", "0.02621", "0.9744", "34.12"),
    ("231->199 199->277", "199->277", "231->199", "0.02621", "0.9179", "34.12"),
    ("231->199 199->277 199->231", "231->199", "199->231 199->277", "0.02621", "0.9744", "34.12"),
    ("231->199 199->277 199->231", "199->277 199->231", "231->199", "0.02621", "0.9179", "34.12"),
    ("210->75 75->210", "75->210", "210->75", "0.03091", "1.0000", "31.65"),
    ("210->75 75->210", "210->75", "75->210", "0.03091", "0.9782", "31.65"),
];

/// Level-labeled rules of the same project.
pub const LABELED_RULES: &[(&str, &str, &str, &str, &str, &str)] = &[
    ("291->255:M 255->291:M", "291->255:M", "255->291:M", "0.00855", "0.9841", "115.05"),
    ("291->255:M 255->291:M", "255->291:M", "291->255:M", "0.00855", "1.0000", "115.05"),
    ("255->67:H 67->255:H", "67->255:H", "255->67:H", "0.00855", "1.0000", "113.25"),
    ("255->67:H 67->255:H", "255->67:H", "67->255:H", "0.00855", "0.9688", "113.25"),
    ("75->212:M 212->75:M", "75->212:M", "212->75:M", "0.00869", "0.9692", "111.51"),
    ("75->212:M 212->75:M", "212->75:M", "75->212:M", "0.00869", "1.0000", "111.51"),
    ("255->312:H 312->255:H", "312->255:H", "255->312:H", "0.00911", "0.9851", "106.56"),
    ("255->312:H 312->255:H", "255->312:H", "312->255:H", "0.00911", "0.9851", "106.56"),
    ("262->255:H 255->262:H", "262->255:H", "255->262:H", "0.00924", "0.9853", "103.50"),
    ("262->255:H 255->262:H", "255->262:H", "262->255:H", "0.00924", "0.9710", "103.50"),
    ("291->255:H 255->291:H", "291->255:H", "255->291:H", "0.01021", "0.9367", "91.75"),
    ("291->255:H 255->291:H", "255->291:H", "291->255:H", "0.01021", "1.0000", "91.75"),
    ("278->255:H 255->278:H", "255->278:H", "278->255:H", "0.01159", "1.0000", "85.27"),
    ("278->255:H 255->278:H", "278->255:H", "255->278:H", "0.01159", "0.9882", "85.27"),
    ("62->255:H 255->62:H", "255->62:H", "62->255:H", "0.01973", "0.9795", "49.64"),
    ("62->255:H 255->62:H", "62->255:H", "255->62:H", "0.01973", "1.0000", "49.64"),
    ("210->264:L 264->210:L", "264->210:L", "210->264:L", "0.02414", "0.9887", "40.72"),
    ("210->264:L 264->210:L", "210->264:L", "264->210:L", "0.02414", "0.9943", "40.72"),
    ("210->75:L 75->210:L", "210->75:L", "75->210:L", "0.02815", "0.9808", "34.85"),
    ("210->75:L 75->210:L", "75->210:L", "210->75:L", "0.02815", "1.0000", "34.85"),
    ("199->277:M 199->231:M", "199->231:M", "199->277:M", "0.02856", "0.9810", "34.35"),
    ("199->277:M 199->231:M", "199->277:M", "199->231:M", "0.02856", "1.0000", "34.35"),
    ("199->277:M 199->231:M 231->199:M", "199->231:M", "199->277:M 231->199:M", "0.02621", "0.9005", "34.35"),
    ("199->277:M 199->231:M 231->199:M", "199->277:M 231->199:M", "199->231:M", "0.02621", "1.0000", "34.35"),
    ("199->277:M 199->231:M 231->199:M", "199->277:M", "231->199:M 199->231:M", "0.02621", "0.9179", "34.29"),
    ("199->277:M 199->231:M 231->199:M", "231->199:M 199->231:M", "199->277:M", "0.02621", "0.9794", "34.29"),
    ("231->199:M 199->231:M", "231->199:M", "199->231:M", "0.02677", "0.9949", "34.17"),
    ("231->199:M 199->231:M", "199->231:M", "231->199:M", "0.02677", "0.9194", "34.17"),
    ("199->277:M 231->199:M", "231->199:M", "199->277:M", "0.02621", "0.9744", "34.12"),
    ("199->277:M 231->199:M", "199->277:M", "231->199:M", "0.02621", "0.9179", "34.12"),
    ("199->277:M 199->231:M 231->199:M", "231->199:M", "199->277:M 199->231:M", "0.02621", "0.9744", "34.12"),
    ("199->277:M 199->231:M 231->199:M", "199->277:M 199->231:M", "231->199:M", "0.02621", "0.9179", "34.12"),
];

pub fn plain_reference_db() -> Vec<Transaction> {
    RuleFixture::new()
        .mirrored("278->255", "255->278", 121, 120, 120)
        .mirrored("291->255", "255->291", 142, 136, 136)
        .mirrored("62->255", "255->62", 181, 184, 181)
        .mirrored("210->264", "264->210", 191, 192, 189)
        .triple("231->199", "199->277", "199->231")
        .mirrored("75->210", "210->75", 224, 229, 224)
        .fill(REFERENCE_TRANSACTIONS)
}

pub fn labeled_reference_db() -> Vec<Transaction> {
    RuleFixture::new()
        .mirrored("291->255:M", "255->291:M", 63, 62, 62)
        .mirrored("67->255:H", "255->67:H", 62, 64, 62)
        .mirrored("75->212:M", "212->75:M", 65, 63, 63)
        .mirrored("312->255:H", "255->312:H", 67, 67, 66)
        .mirrored("262->255:H", "255->262:H", 68, 69, 67)
        .mirrored("291->255:H", "255->291:H", 79, 74, 74)
        .mirrored("255->278:H", "278->255:H", 84, 85, 84)
        .mirrored("255->62:H", "62->255:H", 146, 143, 143)
        .mirrored("264->210:L", "210->264:L", 177, 176, 175)
        .mirrored("210->75:L", "75->210:L", 208, 204, 204)
        .triple("231->199:M", "199->277:M", "199->231:M")
        .fill(REFERENCE_TRANSACTIONS)
}

/// A rule as printed: item sets plus rounded scores.
pub type PrintedRule = (Itemset, Itemset, Itemset, String, String, String);

pub fn printed(rows: &[(&str, &str, &str, &str, &str, &str)]) -> Vec<PrintedRule> {
    let set = |s: &str| Itemset::new(s.split_whitespace());
    rows.iter().map(|r| (set(r.0), set(r.1), set(r.2), r.3.to_string(), r.4.to_string(), r.5.to_string())).collect()
}

pub fn render(rules: &[collabtwin::rulemine::AssociationRule]) -> Vec<PrintedRule> {
    rules
        .iter()
        .map(|r| {
            (
                r.pattern(),
                r.antecedent.clone(),
                r.consequent.clone(),
                format!("{:.5}", r.support),
                format!("{:.4}", r.confidence),
                format!("{:.2}", r.lift),
            )
        })
        .collect()
}
