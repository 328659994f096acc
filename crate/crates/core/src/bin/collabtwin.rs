// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use collabtwin::metrics::{centrality_report, CentralityKey, ClosenessMode};
use collabtwin::netbuild::{Direction, LabelAxis};
use collabtwin::pipeline::{
    self as pl, Artifacts, DenominatorChoice, OutputFormat, PipelineConfig, PipelineError, Stage, SyntheticSpec,
};
use collabtwin::Parallelism;

#[derive(Parser)]
#[command(name = "collabtwin", version, about = "Twin and mine collaboration networks from issue/forward logs")]
struct Cli {
    /// key=value config file; flags override it.
    #[arg(long, global = true, env = "COLLABTWIN_CONFIG")]
    config: Option<PathBuf>,
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, clean and join the raw logs.
    Ingest(Common),
    /// Build the multigraph and write graph.gml and edges.csv.
    Build(Common),
    /// Nodes, edges, density, average degree, diameter, modularity.
    Stats(Common),
    /// Degree, closeness and betweenness per user.
    Centrality(Common),
    /// Louvain communities.
    Communities(Common),
    /// Frequently collaborating user pairs.
    Fcu(Common),
    /// Apriori association rules between forwards.
    Rules(Common),
    /// Write the multigraph in --format.
    Export(Common),
    /// Generate seeded synthetic logs with planted structure.
    Synth(SynthArgs),
    /// Every stage, every artifact, plus a manifest.
    Run(Common),
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    issues: Option<PathBuf>,
    #[arg(long)]
    forwards: Option<PathBuf>,
    #[arg(long)]
    users: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Read a GML multigraph instead of raw logs.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_desc_tokens: Option<usize>,
    #[arg(long)]
    drop_self_loops: bool,
    /// placeholder | fail
    #[arg(long)]
    missing_users: Option<String>,
    #[arg(long)]
    closeness_mode: Option<ClosenessMode>,
    #[arg(long)]
    community_seed: Option<u64>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    min_isf: Option<u64>,
    #[arg(long)]
    min_lisf: Option<u64>,
    #[arg(long)]
    label_axis: Option<LabelAxis>,
    /// directed | undirected
    #[arg(long)]
    fcu_direction: Option<String>,
    #[arg(long)]
    min_support: Option<f64>,
    /// Support threshold for labeled rules. `rules --labeled` takes
    /// --min-support instead when it is given.
    #[arg(long)]
    labeled_min_support: Option<f64>,
    #[arg(long)]
    min_confidence: Option<f64>,
    #[arg(long)]
    min_lift: Option<f64>,
    /// Mine labeled items (`rules` only; `run` mines both).
    #[arg(long)]
    labeled: bool,
    #[arg(long)]
    denominator: Option<DenominatorChoice>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "synthetic")]
    out: PathBuf,
    /// JSON spec; missing fields take the defaults.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n_users: Option<u64>,
    #[arg(long)]
    n_issues: Option<u64>,
}

fn config_error(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::stage(Stage::Config, e)
}

fn resolve(file: Option<&PathBuf>, c: &Common) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match file {
        Some(path) if !path.is_file() => return Err(PipelineError::MissingInput(path.clone())),
        Some(path) => PipelineConfig::from_file(path).map_err(config_error)?,
        None => PipelineConfig::default(),
    };
    macro_rules! take {
        ($($field:ident => $target:expr),* $(,)?) => {
            $(if let Some(v) = c.$field.clone() { $target = v.into(); })*
        };
    }
    take!(
        min_desc_tokens => cfg.cleaning.min_description_tokens,
        closeness_mode => cfg.closeness_mode,
        community_seed => cfg.community.seed,
        resolution => cfg.community.resolution,
        min_isf => cfg.min_isf,
        min_lisf => cfg.min_lisf,
        label_axis => cfg.label_axis,
        min_support => cfg.min_support,
        labeled_min_support => cfg.labeled_min_support,
        min_confidence => cfg.min_confidence,
        min_lift => cfg.min_lift,
        denominator => cfg.denominator,
        format => cfg.format,
        seed => cfg.seed,
        out => cfg.out,
    );
    for (path, slot) in [
        (&c.issues, &mut cfg.issues),
        (&c.forwards, &mut cfg.forwards),
        (&c.users, &mut cfg.users),
        (&c.labels, &mut cfg.labels),
        (&c.graph, &mut cfg.graph),
    ] {
        if path.is_some() {
            slot.clone_from(path);
        }
    }
    if let Some(v) = &c.missing_users {
        cfg.set("missing_users", v).map_err(config_error)?;
    }
    if let Some(v) = &c.fcu_direction {
        cfg.set("fcu_direction", v).map_err(config_error)?;
    }
    cfg.cleaning.drop_self_loops |= c.drop_self_loops;
    cfg.labeled |= c.labeled;
    Ok(cfg)
}

fn write_err(e: std::io::Error) -> PipelineError {
    PipelineError::stage(Stage::Write, e)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let par = if cli.sequential { Parallelism::Sequential } else { Parallelism::default() };
    let common = match &cli.command {
        Command::Synth(args) => return synth(args),
        Command::Ingest(c)
        | Command::Build(c)
        | Command::Stats(c)
        | Command::Centrality(c)
        | Command::Communities(c)
        | Command::Fcu(c)
        | Command::Rules(c)
        | Command::Export(c)
        | Command::Run(c) => c,
    };
    let mut cfg = resolve(cli.config.as_ref(), common)?;
    if let (Command::Rules(_), true, Some(s)) = (&cli.command, cfg.labeled, common.min_support) {
        cfg.labeled_min_support = s;
    }
    if let Command::Run(_) = cli.command {
        let s = pl::run_pipeline(&cfg, par)?;
        println!("nodes={} edges={} communities={}", s.stats.nodes, s.stats.edges, s.communities);
        println!("frequent_pairs={} labeled_frequent_pairs={}", s.frequent_pairs, s.labeled_frequent_pairs);
        println!("rules={} labeled_rules={}", s.rules, s.labeled_rules);
        println!("wrote {} artifacts and {}", s.artifacts.len(), s.manifest.display());
        return Ok(());
    }
    if let Command::Ingest(_) = cli.command {
        pl::check_inputs(&PipelineConfig { graph: None, ..cfg.clone() })?;
        let data = pl::ingest_stage(&cfg)?;
        let mut arts = Artifacts::new(&cfg.out, &cfg).map_err(write_err)?;
        pl::write_ingest(&mut arts, &data).map_err(write_err)?;
        let st = &data.stats;
        println!("issues: {} in, {} kept", st.issues.input, st.issues.retained);
        println!("forwards: {} in, {} kept", st.forwards.input, st.forwards.retained);
        println!("users: {} in, {} kept", st.users.input, st.users.retained);
        return Ok(());
    }

    pl::check_inputs(&cfg)?;
    let loaded = pl::load_graph(&cfg)?;
    let graph = &loaded.graph;
    let mut arts = Artifacts::new(&cfg.out, &cfg).map_err(write_err)?;
    match cli.command {
        Command::Build(_) => {
            pl::write_graph(&mut arts, graph, OutputFormat::Gml).map_err(write_err)?;
            pl::write_graph(&mut arts, graph, OutputFormat::Csv).map_err(write_err)?;
            println!("nodes={} edges={}", graph.node_count(), graph.edge_count());
        }
        Command::Export(_) => {
            pl::write_graph(&mut arts, graph, cfg.format).map_err(write_err)?;
        }
        Command::Stats(_) => {
            let partition = pl::communities(graph, &cfg);
            let s = pl::stats(graph, Some(&partition), par);
            pl::write_stats(&mut arts, &s, cfg.format).map_err(write_err)?;
            print!("{}", s.to_key_value());
        }
        Command::Centrality(_) => {
            let partition = pl::communities(graph, &cfg);
            let report = centrality_report(graph, Some(&partition), par);
            pl::write_centrality(&mut arts, &report, cfg.format).map_err(write_err)?;
            for (name, key) in [
                ("degree", CentralityKey::Degree),
                ("closeness", CentralityKey::Closeness(cfg.closeness_mode)),
                ("betweenness", CentralityKey::Betweenness),
            ] {
                let top: Vec<String> = report.top(key, 5).iter().map(|r| r.user.to_string()).collect();
                println!("top {name}: {}", top.join(" "));
            }
        }
        Command::Communities(_) => {
            let partition = pl::communities(graph, &cfg);
            pl::write_communities(&mut arts, &partition, cfg.format).map_err(write_err)?;
            println!("communities={} modularity={:.4}", partition.community_count, partition.modularity);
        }
        Command::Fcu(_) => {
            let (plain, labeled) = pl::write_fcu(&mut arts, graph, &cfg)?;
            let direction = if cfg.fcu_direction == Direction::Directed { "directed" } else { "undirected" };
            println!("{direction} pairs with isf >= {}: {plain}", cfg.min_isf);
            println!("{direction} pairs with {} lisf >= {}: {labeled}", cfg.label_axis, cfg.min_lisf);
        }
        Command::Rules(_) => {
            let mined = pl::mine_rules(&loaded, &cfg, cfg.labeled, par)?;
            pl::write_rules(&mut arts, &mined.rules, cfg.labeled, cfg.format).map_err(write_err)?;
            println!(
                "transactions={} frequent_itemsets={} rules={}",
                mined.transactions,
                mined.frequent.len(),
                mined.rules.len()
            );
        }
        Command::Synth(_) | Command::Run(_) | Command::Ingest(_) => unreachable!(),
    }
    for (name, _) in arts.entries() {
        println!("wrote {}", cfg.out.join(name).display());
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), PipelineError> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|_| PipelineError::MissingInput(path.clone()))?;
            serde_json::from_str::<SyntheticSpec>(&text).map_err(config_error)?
        }
        None => SyntheticSpec::default(),
    };
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(n) = args.n_users {
        spec.n_users = n;
    }
    if let Some(n) = args.n_issues {
        spec.n_issues = n;
    }
    let data = pl::generate_synthetic(&spec).map_err(|e| PipelineError::stage(Stage::Synth, e))?;
    for path in data.write(&args.out).map_err(write_err)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
