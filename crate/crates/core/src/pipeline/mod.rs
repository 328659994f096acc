// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs: ingest, build, metrics, frequent pairs and rules, with
//! every artifact written under one output directory.
//!
//! CSV and text reports start with a `# collabtwin <version> config=<digest>`
//! line. The manifest lists a SHA-256 per artifact; for reports it covers the
//! data rows only (lines not starting with `#`). Nothing time-dependent is
//! written, so identical inputs and parameters give identical trees.

mod config;
mod synth;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fcu::{frequent_pairs, frequent_pairs_labeled};
use crate::ingest::{self, EnrichedDataset, InputFormat, LabelMap};
use crate::metrics::{
    centrality_report, detect_communities, network_stats_with, CentralityReport, CommunityPartition, NetworkStats,
};
use crate::netbuild::{build_network, collapse, parse_gml, CollabGraph, Direction, GmlExport};
use crate::rulemine::{
    apriori_frequent_with, build_transactions, generate_rules, verify_rule_consistency, write_rules_csv, write_rules_json,
    AssociationRule, ConsistencyReport, Denominator, FrequentItemsets,
};
use crate::Parallelism;

pub use config::{ConfigError, DenominatorChoice, OutputFormat, PipelineConfig};
pub use synth::{
    generate_synthetic, ExpectedPair, GroundTruth, HubTruth, PairTruth, PatternTruth, PlantedHub, PlantedPair, PlantedPattern,
    SynthError, SyntheticData, SyntheticSpec,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Netbuild,
    Metrics,
    Fcu,
    Rulemine,
    Synth,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Netbuild => "netbuild",
            Stage::Metrics => "metrics",
            Stage::Fcu => "fcu",
            Stage::Rulemine => "rulemine",
            Stage::Synth => "synth",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing input file: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("stage {stage}: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    pub fn stage(stage: Stage, cause: impl fmt::Display) -> Self {
        PipelineError::Stage { stage, message: cause.to_string() }
    }

    /// 2 for missing inputs and bad configuration, 1 for failures inside a stage.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingInput(_) | PipelineError::Stage { stage: Stage::Config, .. } => 2,
            PipelineError::Stage { .. } => 1,
        }
    }
}

fn at(stage: Stage) -> impl Fn(&dyn fmt::Display) -> PipelineError {
    move |cause| PipelineError::stage(stage, cause)
}

/// Checks the config and that every named input exists.
pub fn check_inputs(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    cfg.validate().map_err(|e| at(Stage::Config)(&e))?;
    let named = [&cfg.graph, &cfg.issues, &cfg.forwards, &cfg.users, &cfg.labels];
    for path in named.into_iter().flatten() {
        if !path.is_file() {
            return Err(PipelineError::MissingInput(path.clone()));
        }
    }
    if cfg.graph.is_none() && (cfg.issues.is_none() || cfg.forwards.is_none()) {
        return Err(at(Stage::Config)(&"need --issues and --forwards, or --graph"));
    }
    Ok(())
}

fn open(path: &Path) -> Result<fs::File, PipelineError> {
    fs::File::open(path).map_err(|_| PipelineError::MissingInput(path.to_path_buf()))
}

/// Parses, cleans, joins and labels the raw logs.
pub fn ingest_stage(cfg: &PipelineConfig) -> Result<EnrichedDataset, PipelineError> {
    let err = at(Stage::Ingest);
    let (Some(issues_path), Some(forwards_path)) = (&cfg.issues, &cfg.forwards) else {
        return Err(at(Stage::Config)(&"need --issues and --forwards"));
    };
    let issues = ingest::parse_issue_records(open(issues_path)?, InputFormat::from_path(issues_path)).map_err(|e| err(&e))?;
    let forwards =
        ingest::parse_forward_events(open(forwards_path)?, InputFormat::from_path(forwards_path)).map_err(|e| err(&e))?;
    let users = match &cfg.users {
        Some(p) => ingest::parse_user_records(open(p)?, InputFormat::from_path(p)).map_err(|e| err(&e))?.records,
        None => Vec::new(),
    };
    let labels = match &cfg.labels {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| err(&e))?;
            LabelMap::parse(&text).map_err(|e| err(&e))?
        }
        None => LabelMap::default(),
    };
    let cleaned = ingest::clean(issues.records, forwards, &cfg.cleaning);
    let linked = ingest::associate(cleaned, &users, cfg.missing_users).map_err(|e| err(&e))?;
    ingest::enrich(linked, &labels).map_err(|e| err(&e))
}

/// The collaboration graph plus what mining needs from the issue table.
pub struct LoadedGraph {
    pub graph: CollabGraph,
    /// Cleaned issues, or distinct edge issues when loaded from GML.
    pub issue_count: u64,
    pub dataset: Option<EnrichedDataset>,
}

pub fn load_graph(cfg: &PipelineConfig) -> Result<LoadedGraph, PipelineError> {
    if let Some(path) = &cfg.graph {
        let err = at(Stage::Netbuild);
        let text = fs::read_to_string(path).map_err(|_| PipelineError::MissingInput(path.clone()))?;
        let graph = parse_gml(&text).and_then(|doc| doc.to_collab_graph()).map_err(|e| err(&e))?;
        let issue_count = graph.edges().iter().map(|e| e.issue).collect::<BTreeSet<_>>().len() as u64;
        return Ok(LoadedGraph { graph, issue_count, dataset: None });
    }
    let dataset = ingest_stage(cfg)?;
    let graph = build_network(&dataset);
    Ok(LoadedGraph { graph, issue_count: dataset.issues.len() as u64, dataset: Some(dataset) })
}

/// Writes reports into one directory and remembers their digests.
pub struct Artifacts {
    dir: PathBuf,
    header: String,
    digests: BTreeMap<String, String>,
}

fn is_report(name: &str) -> bool {
    name.ends_with(".csv") || name.ends_with(".txt")
}

impl Artifacts {
    pub fn new(dir: &Path, cfg: &PipelineConfig) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            header: format!("# collabtwin {TOOL_VERSION} config={}\n", cfg.digest()),
            digests: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `name`. CSV and text files get the header line and a digest
    /// over their data rows; anything else is digested whole.
    pub fn write(&mut self, name: &str, body: &[u8]) -> io::Result<()> {
        let mut hasher = Sha256::new();
        let content = if is_report(name) {
            for line in body.split_inclusive(|&b| b == b'\n').filter(|l| !l.starts_with(b"#")) {
                hasher.update(line);
            }
            [self.header.as_bytes(), body].concat()
        } else {
            hasher.update(body);
            body.to_vec()
        };
        fs::write(self.dir.join(name), content)?;
        self.digests.insert(name.to_string(), hex::encode(hasher.finalize()));
        Ok(())
    }

    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut body = serde_json::to_vec_pretty(value)?;
        body.push(b'\n');
        self.write(name, &body)
    }

    /// `(name, digest)` for everything written so far, sorted by name.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.digests.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Writes `manifest.txt`: one `<sha256>  <name>` line per artifact.
    pub fn write_manifest(&self) -> io::Result<PathBuf> {
        let mut text = self.header.clone();
        for (name, digest) in self.entries() {
            text.push_str(&format!("{digest}  {name}\n"));
        }
        let path = self.dir.join("manifest.txt");
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[derive(Serialize)]
struct CleanSummary {
    issues: ingest::RecordCounts,
    forwards: ingest::RecordCounts,
    users: ingest::RecordCounts,
    placeholder_users: usize,
    drops_by_reason: BTreeMap<String, usize>,
}

pub fn write_ingest(arts: &mut Artifacts, data: &EnrichedDataset) -> io::Result<()> {
    let mut by_reason = BTreeMap::new();
    for d in &data.drops {
        *by_reason.entry(format!("{}:{}", d.kind, d.reason)).or_insert(0) += 1;
    }
    let summary = CleanSummary {
        issues: data.stats.issues,
        forwards: data.stats.forwards,
        users: data.stats.users,
        placeholder_users: data.users.iter().filter(|u| u.placeholder).count(),
        drops_by_reason: by_reason,
    };
    arts.write_json("clean_stats.json", &summary)?;
    arts.write_with("drops.csv", |buf| {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        w.write_record(["kind", "id", "reason"])?;
        for d in &data.drops {
            w.write_record([d.kind.to_string(), d.id.clone(), d.reason.to_string()])?;
        }
        w.flush()
    })
}

#[derive(Serialize)]
struct GraphJson<'a> {
    nodes: &'a [crate::netbuild::Node],
    edges: &'a [crate::netbuild::Edge],
}

/// The multigraph as `graph.gml`, `edges.csv` or `graph.json`.
pub fn write_graph(arts: &mut Artifacts, graph: &CollabGraph, format: OutputFormat) -> io::Result<()> {
    match format {
        OutputFormat::Gml => arts.write("graph.gml", graph.to_gml_string().as_bytes()),
        OutputFormat::Csv => arts.write_with("edges.csv", |buf| graph.write_edge_list(buf)),
        OutputFormat::Json => arts.write_json("graph.json", &GraphJson { nodes: graph.nodes(), edges: graph.edges() }),
    }
}

/// Louvain on the undirected collapse, edge multiplicities as weights.
pub fn communities(graph: &CollabGraph, cfg: &PipelineConfig) -> CommunityPartition {
    let undirected = collapse(graph, Direction::Undirected, None).expect("no filter");
    detect_communities(&undirected, cfg.community)
}

pub fn stats(graph: &CollabGraph, partition: Option<&CommunityPartition>, par: Parallelism) -> NetworkStats {
    let mut s = network_stats_with(graph, par);
    s.modularity = partition.map(|p| p.modularity);
    s
}

pub fn write_stats(arts: &mut Artifacts, s: &NetworkStats, format: OutputFormat) -> io::Result<()> {
    match format {
        OutputFormat::Json => arts.write_json("stats.json", s),
        _ => arts.write("stats.txt", s.to_key_value().as_bytes()),
    }
}

pub fn write_centrality(arts: &mut Artifacts, report: &CentralityReport, format: OutputFormat) -> io::Result<()> {
    match format {
        OutputFormat::Json => arts.write_json("centrality.json", report),
        _ => arts.write_with("centrality.csv", |buf| report.write_csv(buf)),
    }
}

pub fn write_communities(arts: &mut Artifacts, p: &CommunityPartition, format: OutputFormat) -> io::Result<()> {
    match format {
        OutputFormat::Json => arts.write_json("communities.json", p),
        _ => arts.write_with("communities.csv", |buf| {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
            w.write_record(["node_id", "community"])?;
            for (u, c) in &p.assignment {
                w.write_record([u.to_string(), c.to_string()])?;
            }
            w.flush()
        }),
    }
}

/// Frequent pairs, labeled frequent pairs and the frequent-pair subgraph.
/// Returns the number of plain and labeled pairs.
pub fn write_fcu(arts: &mut Artifacts, graph: &CollabGraph, cfg: &PipelineConfig) -> Result<(usize, usize), PipelineError> {
    let err = at(Stage::Fcu);
    let (plain, sub) = frequent_pairs(graph, cfg.min_isf, cfg.fcu_direction).map_err(|e| err(&e))?;
    let labeled = frequent_pairs_labeled(graph, cfg.label_axis, cfg.min_lisf, cfg.fcu_direction).map_err(|e| err(&e))?;
    let w = at(Stage::Write);
    arts.write_with("fcu.csv", |buf| plain.write_csv(buf)).map_err(|e| w(&e))?;
    arts.write_with("fcu_labeled.csv", |buf| labeled.write_csv(buf)).map_err(|e| w(&e))?;
    arts.write("fcu.gml", sub.to_gml_string().as_bytes()).map_err(|e| w(&e))?;
    Ok((plain.pairs.len(), labeled.pairs.len()))
}

pub struct RuleMining {
    pub transactions: usize,
    pub frequent: FrequentItemsets,
    pub rules: Vec<AssociationRule>,
    pub consistency: ConsistencyReport,
}

/// Builds transactions, runs Apriori and scores rules. Fails if any rule
/// breaks the support/confidence/lift identities.
pub fn mine_rules(
    loaded: &LoadedGraph,
    cfg: &PipelineConfig,
    labeled: bool,
    par: Parallelism,
) -> Result<RuleMining, PipelineError> {
    let err = at(Stage::Rulemine);
    let params = cfg.mining_params(labeled);
    let transactions = build_transactions(&loaded.graph, labeled.then_some(cfg.label_axis));
    let denominator = match cfg.denominator {
        DenominatorChoice::Transactions => Denominator::Transactions,
        DenominatorChoice::Issues => Denominator::Fixed(loaded.issue_count),
    };
    let frequent = apriori_frequent_with(&transactions, params.min_support, denominator, par).map_err(|e| err(&e))?;
    let rules = generate_rules(&frequent, &params);
    let consistency = verify_rule_consistency(&rules, &frequent);
    if let Some(v) = consistency.violations.first() {
        return Err(err(&format!("rule {} is inconsistent: {}", v.rule, v.message)));
    }
    Ok(RuleMining { transactions: transactions.len(), frequent, rules, consistency })
}

pub fn write_rules(arts: &mut Artifacts, rules: &[AssociationRule], labeled: bool, format: OutputFormat) -> io::Result<()> {
    let stem = if labeled { "rules_labeled" } else { "rules" };
    match format {
        OutputFormat::Json => arts.write_with(&format!("{stem}.json"), |buf| write_rules_json(rules, buf)),
        _ => arts.write_with(&format!("{stem}.csv"), |buf| write_rules_csv(rules, buf)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out: PathBuf,
    pub stats: NetworkStats,
    pub communities: usize,
    pub frequent_pairs: usize,
    pub labeled_frequent_pairs: usize,
    pub rules: usize,
    pub labeled_rules: usize,
    /// `(artifact, digest)` as listed in the manifest.
    pub artifacts: Vec<(String, String)>,
    pub manifest: PathBuf,
}

/// Runs every stage and writes every artifact into `cfg.out`.
pub fn run_pipeline(cfg: &PipelineConfig, par: Parallelism) -> Result<RunSummary, PipelineError> {
    check_inputs(cfg)?;
    let w = at(Stage::Write);
    let loaded = load_graph(cfg)?;
    let mut arts = Artifacts::new(&cfg.out, cfg).map_err(|e| w(&e))?;
    if let Some(data) = &loaded.dataset {
        write_ingest(&mut arts, data).map_err(|e| w(&e))?;
    }
    let graph = &loaded.graph;
    write_graph(&mut arts, graph, OutputFormat::Gml).map_err(|e| w(&e))?;
    write_graph(&mut arts, graph, OutputFormat::Csv).map_err(|e| w(&e))?;

    let partition = communities(graph, cfg);
    let network = stats(graph, Some(&partition), par);
    let report = centrality_report(graph, Some(&partition), par);
    write_stats(&mut arts, &network, OutputFormat::Csv).map_err(|e| w(&e))?;
    write_stats(&mut arts, &network, OutputFormat::Json).map_err(|e| w(&e))?;
    write_centrality(&mut arts, &report, OutputFormat::Csv).map_err(|e| w(&e))?;
    write_communities(&mut arts, &partition, OutputFormat::Csv).map_err(|e| w(&e))?;

    let (pairs, labeled_pairs) = write_fcu(&mut arts, graph, cfg)?;

    let mut counts = [0; 2];
    for (i, labeled) in [false, true].into_iter().enumerate() {
        let mined = mine_rules(&loaded, cfg, labeled, par)?;
        write_rules(&mut arts, &mined.rules, labeled, OutputFormat::Csv).map_err(|e| w(&e))?;
        write_rules(&mut arts, &mined.rules, labeled, OutputFormat::Json).map_err(|e| w(&e))?;
        counts[i] = mined.rules.len();
    }
    let manifest = arts.write_manifest().map_err(|e| w(&e))?;
    Ok(RunSummary {
        out: cfg.out.clone(),
        stats: network,
        communities: partition.community_count,
        frequent_pairs: pairs,
        labeled_frequent_pairs: labeled_pairs,
        rules: counts[0],
        labeled_rules: counts[1],
        artifacts: arts.entries().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        manifest,
    })
}
