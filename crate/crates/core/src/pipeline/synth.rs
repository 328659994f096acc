// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic issue/forward logs with planted structure.
//!
//! Three kinds of issues are generated. Planted pair issues carry one
//! forward each way between two users; planted pattern issues do the same at
//! a fixed level, so the labeled items form a mirrored rule pair; background
//! issues carry random forwards among the remaining users, with a fixed
//! number of forwards touching each hub. Every background pair is kept at or
//! below `background_pair_cap` forwards, which separates planted from
//! background frequencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ForwardEvent, IssueRecord, LabelMap, UserRecord};
use crate::rulemine::item_text;
use crate::{ForwardId, IssueId, UserId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedHub {
    pub user: u64,
    /// Target ratio of the hub's degree to the mean background degree.
    pub degree_factor: f64,
}

/// `frequency` forwards split evenly between a->b and b->a, one of each per issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    pub a: u64,
    pub b: u64,
    pub frequency: u64,
}

/// `issues` issues at level `level`, each with a->b and b->a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPattern {
    pub a: u64,
    pub b: u64,
    pub level: u32,
    pub issues: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_users: u64,
    pub n_issues: u64,
    /// `(role id, weight)`.
    pub role_weights: Vec<(u32, f64)>,
    /// `(level id, weight)` for background issues. Planted pair issues cycle
    /// through these ids in order.
    pub level_weights: Vec<(u32, f64)>,
    pub type_weights: Vec<(u32, f64)>,
    pub hubs: Vec<PlantedHub>,
    pub pairs: Vec<PlantedPair>,
    pub patterns: Vec<PlantedPattern>,
    pub forwards_per_issue: u32,
    pub background_pair_cap: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 42,
            n_users: 50,
            n_issues: 1000,
            role_weights: vec![(1, 1.0), (2, 3.0), (3, 2.0), (4, 2.0), (5, 2.0)],
            level_weights: vec![(1, 5.0), (2, 3.0), (3, 2.0)],
            type_weights: vec![(1, 1.0), (2, 1.0)],
            hubs: vec![PlantedHub { user: 1, degree_factor: 3.0 }],
            pairs: vec![PlantedPair { a: 7, b: 9, frequency: 150 }],
            patterns: vec![PlantedPattern { a: 11, b: 13, level: 3, issues: 120 }],
            forwards_per_issue: 4,
            background_pair_cap: 20,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubTruth {
    pub user: u64,
    pub degree: u64,
    pub background_mean_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTruth {
    pub a: u64,
    pub b: u64,
    pub isf: u64,
    pub issues: u64,
    pub forwards_ab: u64,
    pub forwards_ba: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTruth {
    pub a: u64,
    pub b: u64,
    pub level: String,
    pub issues: u64,
    pub items: Vec<String>,
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPair {
    pub x: u64,
    pub y: u64,
    pub isf: u64,
}

/// What was planted, written next to the generated logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub n_users: u64,
    pub n_issues: u64,
    pub hubs: Vec<HubTruth>,
    pub pairs: Vec<PairTruth>,
    pub patterns: Vec<PatternTruth>,
    pub background_pair_cap: u64,
    /// Largest undirected forward count over background pairs.
    pub background_max_isf: u64,
    /// Every pair whose undirected frequency exceeds the background cap,
    /// sorted by `(x, y)`: the planted pairs and the pattern pairs.
    pub expected_frequent_pairs: Vec<ExpectedPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub issues: Vec<IssueRecord>,
    pub forwards: Vec<ForwardEvent>,
    pub users: Vec<UserRecord>,
    pub labels: LabelMap,
    pub truth: GroundTruth,
}

enum IssuePlan {
    Pair(usize, u64),
    Pattern(usize),
    Background,
}

fn infeasible<T>(msg: impl Into<String>) -> Result<T, SynthError> {
    Err(SynthError::Infeasible(msg.into()))
}

fn weights(name: &str, w: &[(u32, f64)]) -> Result<WeightedIndex<f64>, SynthError> {
    WeightedIndex::new(w.iter().map(|&(_, x)| x)).or_else(|e| infeasible(format!("{name} weights: {e}")))
}

impl SyntheticSpec {
    fn hub_edges(&self, hub: &PlantedHub, background_edges: u64, others: u64) -> u64 {
        let f = hub.degree_factor;
        (2.0 * f * background_edges as f64 / (others as f64 + f)).ceil() as u64
    }

    fn check(&self) -> Result<(), SynthError> {
        if self.n_users < 2 {
            return infeasible("need at least two users");
        }
        let mut planted = BTreeSet::new();
        let in_range = |u: u64| (1..=self.n_users).contains(&u);
        let pair_users = self.pairs.iter().map(|p| (p.a, p.b)).chain(self.patterns.iter().map(|p| (p.a, p.b)));
        for (a, b) in pair_users {
            if !in_range(a) || !in_range(b) {
                return infeasible(format!("planted user {a} or {b} outside 1..={}", self.n_users));
            }
            if a == b || !planted.insert(a) || !planted.insert(b) {
                return infeasible(format!("planted users must be distinct, ({a}, {b}) overlaps"));
            }
        }
        for h in &self.hubs {
            if !in_range(h.user) || planted.contains(&h.user) {
                return infeasible(format!("hub {} must be a distinct user in range", h.user));
            }
            if !(h.degree_factor > 0.0 && h.degree_factor.is_finite()) {
                return infeasible(format!("hub {} degree factor must be positive", h.user));
            }
        }
        if self.hubs.iter().map(|h| h.user).collect::<BTreeSet<_>>().len() != self.hubs.len() {
            return infeasible("duplicate hub");
        }
        for p in &self.pairs {
            if p.frequency == 0 || p.frequency % 2 == 1 {
                return infeasible(format!("pair ({}, {}) frequency must be even and positive", p.a, p.b));
            }
            if p.frequency <= self.background_pair_cap {
                return infeasible(format!("pair ({}, {}) frequency must exceed the background cap", p.a, p.b));
            }
        }
        for p in &self.patterns {
            if p.issues <= self.background_pair_cap {
                return infeasible(format!("pattern ({}, {}) issue count must exceed the background cap", p.a, p.b));
            }
            if !self.level_weights.iter().any(|&(id, _)| id == p.level) {
                return infeasible(format!("pattern level {} is not among the level ids", p.level));
            }
        }
        let planted_issues: u64 =
            self.pairs.iter().map(|p| p.frequency / 2).sum::<u64>() + self.patterns.iter().map(|p| p.issues).sum::<u64>();
        if planted_issues > self.n_issues {
            return infeasible(format!("{planted_issues} planted issues exceed n_issues {}", self.n_issues));
        }
        let background_issues = self.n_issues - planted_issues;
        let background_edges = background_issues * self.forwards_per_issue as u64;
        if background_edges > 0 && self.forwards_per_issue == 0 {
            return infeasible("forwards_per_issue must be positive");
        }
        let others = self.n_users - planted.len() as u64 - self.hubs.len() as u64;
        let hub_total: u64 = self.hubs.iter().map(|h| self.hub_edges(h, background_edges, others)).sum();
        if hub_total > background_edges {
            return infeasible("hub degrees exceed the available background forwards");
        }
        for h in &self.hubs {
            if self.hub_edges(h, background_edges, others) > self.background_pair_cap * others {
                return infeasible(format!("hub {} cannot reach its degree under the pair cap", h.user));
            }
        }
        let plain = background_edges - hub_total;
        if plain > self.background_pair_cap * others * others.saturating_sub(1) / 2 {
            return infeasible("background forwards do not fit under the pair cap");
        }
        for (name, w) in [("role", &self.role_weights), ("level", &self.level_weights), ("type", &self.type_weights)] {
            weights(name, w)?;
        }
        Ok(())
    }
}

/// Unordered pairs that still have room under the cap.
struct PairPool {
    open: Vec<(u64, u64)>,
    used: BTreeMap<(u64, u64), u64>,
    cap: u64,
}

impl PairPool {
    fn new(open: Vec<(u64, u64)>, cap: u64) -> Self {
        PairPool { open, used: BTreeMap::new(), cap }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> (u64, u64) {
        let i = rng.random_range(0..self.open.len());
        let pair = self.open[i];
        let n = self.used.entry(pair).or_insert(0);
        *n += 1;
        if *n == self.cap {
            self.open.swap_remove(i);
        }
        pair
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData, SynthError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let roles = weights("role", &spec.role_weights)?;
    let levels = weights("level", &spec.level_weights)?;
    let types = weights("type", &spec.type_weights)?;

    let users: Vec<UserRecord> = (1..=spec.n_users)
        .map(|u| UserRecord {
            user_id: UserId(u),
            role_id: Some(spec.role_weights[roles.sample(&mut rng)].0),
            organization: format!("Org{}", 1 + u % 6),
        })
        .collect();

    let planted: BTreeSet<u64> =
        spec.pairs.iter().flat_map(|p| [p.a, p.b]).chain(spec.patterns.iter().flat_map(|p| [p.a, p.b])).collect();
    let hub_ids: BTreeSet<u64> = spec.hubs.iter().map(|h| h.user).collect();
    let others: Vec<u64> = (1..=spec.n_users).filter(|u| !planted.contains(u) && !hub_ids.contains(u)).collect();

    let mut plans: Vec<IssuePlan> = Vec::new();
    for (i, p) in spec.pairs.iter().enumerate() {
        plans.extend((0..p.frequency / 2).map(|k| IssuePlan::Pair(i, k)));
    }
    for (i, p) in spec.patterns.iter().enumerate() {
        plans.extend((0..p.issues).map(|_| IssuePlan::Pattern(i)));
    }
    let background_issues = spec.n_issues as usize - plans.len();
    plans.extend((0..background_issues).map(|_| IssuePlan::Background));
    plans.shuffle(&mut rng);

    // Background forward slots: which hub (if any) each one touches.
    let background_edges = background_issues as u64 * spec.forwards_per_issue as u64;
    let mut slots: Vec<Option<usize>> = Vec::with_capacity(background_edges as usize);
    for (h, hub) in spec.hubs.iter().enumerate() {
        let n = spec.hub_edges(hub, background_edges, others.len() as u64);
        slots.extend((0..n).map(|_| Some(h)));
    }
    slots.resize(background_edges as usize, None);
    slots.shuffle(&mut rng);
    let mut slots = slots.into_iter();

    let cap = spec.background_pair_cap;
    let all_pairs = others.iter().enumerate().flat_map(|(i, &a)| others[i + 1..].iter().map(move |&b| (a, b))).collect();
    let mut plain_pool = PairPool::new(all_pairs, cap);
    let mut hub_pools: Vec<PairPool> =
        spec.hubs.iter().map(|h| PairPool::new(others.iter().map(|&o| (h.user, o)).collect(), cap)).collect();

    let level_ids: Vec<u32> = spec.level_weights.iter().map(|&(id, _)| id).collect();
    let mut issues = Vec::with_capacity(plans.len());
    let mut forwards = Vec::new();
    let mut row = 0u64;
    for (idx, plan) in plans.iter().enumerate() {
        let issue_id = idx as u64 + 1;
        let created_at = 1_600_000_000 + idx as i64 * 3_600;
        let (level_id, pairs): (u32, Vec<(u64, u64)>) = match *plan {
            IssuePlan::Pair(i, k) => {
                let p = &spec.pairs[i];
                (level_ids[k as usize % level_ids.len()], vec![(p.a, p.b), (p.b, p.a)])
            }
            IssuePlan::Pattern(i) => {
                let p = &spec.patterns[i];
                (p.level, vec![(p.a, p.b), (p.b, p.a)])
            }
            IssuePlan::Background => {
                let level = spec.level_weights[levels.sample(&mut rng)].0;
                let edges = (0..spec.forwards_per_issue)
                    .map(|_| {
                        let (a, b) = match slots.next().expect("one slot per background forward") {
                            Some(h) => hub_pools[h].draw(&mut rng),
                            None => plain_pool.draw(&mut rng),
                        };
                        if rng.random_bool(0.5) {
                            (a, b)
                        } else {
                            (b, a)
                        }
                    })
                    .collect();
                (level, edges)
            }
        };
        let type_id = spec.type_weights[types.sample(&mut rng)].0;
        issues.push(IssueRecord {
            issue_id: IssueId(issue_id),
            project_id: 1,
            description: format!("synthetic issue {issue_id} inspection of zone {} needs follow up", rng.random_range(1..=12)),
            type_id,
            level_id,
            status_id: 1,
            created_at,
            created_by: UserId(pairs[0].0),
        });
        for (k, (a, b)) in pairs.into_iter().enumerate() {
            row += 1;
            forwards.push(ForwardEvent {
                forward_id: ForwardId::new(row, 0),
                issue_id: IssueId(issue_id),
                from_user: Some(UserId(a)),
                to_user: Some(UserId(b)),
                created_at: created_at + 60 * (k as i64 + 1),
                status_id: 1,
                approve_status: 0,
            });
        }
    }

    let mut labels = LabelMap::default();
    for (section, ids) in [
        (&mut labels.levels, spec.level_weights.iter().map(|w| w.0).collect::<Vec<_>>()),
        (&mut labels.types, spec.type_weights.iter().map(|w| w.0).collect()),
        (&mut labels.roles, spec.role_weights.iter().map(|w| w.0).collect()),
    ] {
        for id in ids {
            section.entry(id).or_insert_with(|| format!("Label{id}"));
        }
    }

    let truth = ground_truth(spec, &forwards, &labels);
    Ok(SyntheticData { issues, forwards, users, labels, truth })
}

fn ground_truth(spec: &SyntheticSpec, forwards: &[ForwardEvent], labels: &LabelMap) -> GroundTruth {
    let mut directed: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut degree: BTreeMap<u64, u64> = BTreeMap::new();
    for f in forwards {
        let (a, b) = f.endpoints().expect("generated forwards are complete");
        *directed.entry((a.0, b.0)).or_insert(0) += 1;
        *degree.entry(a.0).or_insert(0) += 1;
        *degree.entry(b.0).or_insert(0) += 1;
    }
    let isf = |a: u64, b: u64| directed.get(&(a, b)).copied().unwrap_or(0) + directed.get(&(b, a)).copied().unwrap_or(0);
    let planted: BTreeSet<u64> =
        spec.pairs.iter().flat_map(|p| [p.a, p.b]).chain(spec.patterns.iter().flat_map(|p| [p.a, p.b])).collect();
    let hub_ids: BTreeSet<u64> = spec.hubs.iter().map(|h| h.user).collect();
    let others: Vec<u64> = (1..=spec.n_users).filter(|u| !planted.contains(u) && !hub_ids.contains(u)).collect();
    let mean = if others.is_empty() {
        0.0
    } else {
        others.iter().map(|u| degree.get(u).copied().unwrap_or(0)).sum::<u64>() as f64 / others.len() as f64
    };

    let mut background_max_isf = 0;
    let mut undirected: BTreeSet<(u64, u64)> = BTreeSet::new();
    for &(a, b) in directed.keys() {
        undirected.insert((a.min(b), a.max(b)));
    }
    for &(x, y) in &undirected {
        if !(planted.contains(&x) && planted.contains(&y)) {
            background_max_isf = background_max_isf.max(isf(x, y));
        }
    }

    let patterns: Vec<PatternTruth> = spec
        .patterns
        .iter()
        .map(|p| {
            let level = labels.levels[&p.level].clone();
            let ab = item_text(UserId(p.a), UserId(p.b), Some(&level));
            let ba = item_text(UserId(p.b), UserId(p.a), Some(&level));
            let rules = vec![format!("{{'{ab}'}} => {{'{ba}'}}"), format!("{{'{ba}'}} => {{'{ab}'}}")];
            PatternTruth { a: p.a, b: p.b, level, issues: p.issues, items: vec![ab, ba], rules }
        })
        .collect();

    let mut expected: Vec<ExpectedPair> = spec
        .pairs
        .iter()
        .map(|p| (p.a, p.b))
        .chain(spec.patterns.iter().map(|p| (p.a, p.b)))
        .map(|(a, b)| ExpectedPair { x: a.min(b), y: a.max(b), isf: isf(a, b) })
        .collect();
    expected.sort_by_key(|p| (p.x, p.y));

    GroundTruth {
        seed: spec.seed,
        n_users: spec.n_users,
        n_issues: spec.n_issues,
        hubs: spec
            .hubs
            .iter()
            .map(|h| HubTruth { user: h.user, degree: degree.get(&h.user).copied().unwrap_or(0), background_mean_degree: mean })
            .collect(),
        pairs: spec
            .pairs
            .iter()
            .map(|p| PairTruth {
                a: p.a,
                b: p.b,
                isf: isf(p.a, p.b),
                issues: p.frequency / 2,
                forwards_ab: directed.get(&(p.a, p.b)).copied().unwrap_or(0),
                forwards_ba: directed.get(&(p.b, p.a)).copied().unwrap_or(0),
            })
            .collect(),
        patterns,
        background_pair_cap: spec.background_pair_cap,
        background_max_isf,
        expected_frequent_pairs: expected,
    }
}

impl SyntheticData {
    /// Writes `issues.csv`, `forwards.csv`, `users.csv`, `labels.txt` and
    /// `ground_truth.json` into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        fn lf(path: &Path) -> csv::Result<csv::Writer<fs::File>> {
            csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)
        }

        let issues_path = dir.join("issues.csv");
        let mut w = lf(&issues_path)?;
        w.write_record(["ID", "ProjectID", "Description", "TypeID", "LevelID", "StatusID", "CreatedAt", "CreatedBy"])?;
        for i in &self.issues {
            w.write_record([
                i.issue_id.to_string(),
                i.project_id.to_string(),
                i.description.clone(),
                i.type_id.to_string(),
                i.level_id.to_string(),
                i.status_id.to_string(),
                i.created_at.to_string(),
                i.created_by.to_string(),
            ])?;
        }
        w.flush()?;

        let forwards_path = dir.join("forwards.csv");
        let mut w = lf(&forwards_path)?;
        w.write_record(["ID", "IssueID", "FromUserID", "ToUserIDs", "CreatedAt", "StatusID", "ApproveStatus"])?;
        for f in &self.forwards {
            let (from, to) = f.endpoints().expect("generated forwards are complete");
            w.write_record([
                f.forward_id.row.to_string(),
                f.issue_id.to_string(),
                from.to_string(),
                format!("[{to}]"),
                f.created_at.to_string(),
                f.status_id.to_string(),
                f.approve_status.to_string(),
            ])?;
        }
        w.flush()?;

        let users_path = dir.join("users.csv");
        let mut w = lf(&users_path)?;
        w.write_record(["ID", "RoleID", "Organization"])?;
        for u in &self.users {
            w.write_record([
                u.user_id.to_string(),
                u.role_id.map(|r| r.to_string()).unwrap_or_default(),
                u.organization.clone(),
            ])?;
        }
        w.flush()?;

        let labels_path = dir.join("labels.txt");
        fs::write(&labels_path, self.labels.to_text())?;
        let truth_path = dir.join("ground_truth.json");
        let mut json = serde_json::to_string_pretty(&self.truth)?;
        json.push('\n');
        fs::write(&truth_path, json)?;
        Ok(vec![issues_path, forwards_path, users_path, labels_path, truth_path])
    }
}
