//! `nstree`: build, check and dissect normal spanning trees from the shell.
//!
//! Exit codes: 0 success, 1 engine invariant violated (or `verify` found a
//! violation), 2 bad input, 3 witness evidence insufficient, 4 nothing to
//! witness.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nstree::construct::{build_budgeted, build_finite, BuildReport};
use nstree::cover::CoverAssignment;
use nstree::export::{separation_dot, tree_dot, witness_dot};
use nstree::families::{make_family, FamilyGraph, FamilySpec};
use nstree::graph::truncation;
use nstree::separators::max_disjoint_paths;
use nstree::tree::is_normal;
use nstree::witness::{run_witness, Truncation, WitnessParams};
use nstree::{Error, FiniteGraph, Graph, RootedTree, VertexId};

#[derive(Parser)]
#[command(name = "nstree", version, about = "Normal spanning trees on finite and lazily presented graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the construction and write the tree and its event log.
    Build(BuildArgs),
    /// Check a tree for normality in a finite graph.
    Verify(VerifyArgs),
    /// Analyse an uncovered component of a budgeted run.
    Witness(WitnessArgs),
    /// Disjoint A-B paths and a minimum separator in a finite graph.
    Separate(SeparateArgs),
}

#[derive(Args)]
struct HostArgs {
    /// A family such as `path:9`, `komega`, `star_of_rays:4`, or `file:g.json`.
    #[arg(long)]
    graph: String,
    /// `singleton`, `constant:N` or `table:levels.json`.
    #[arg(long, default_value = "singleton")]
    cover: String,
    /// Steer picks and neighbour choices away from this vertex.
    #[arg(long)]
    avoid: Option<u64>,
    /// Scheduler ticks for a budgeted run.
    #[arg(long)]
    budget: Option<u64>,
    /// Root vertex; defaults to the smallest vertex.
    #[arg(long)]
    root: Option<u64>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    host: HostArgs,
    /// Directory for tree.json, events.jsonl and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Tree JSON file.
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    host: HostArgs,
    /// Order of the subdivided clique.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Size of the fans and of the disjoint U-R path system.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Only uncovered vertices below this id are probed.
    #[arg(long, default_value_t = 100)]
    region: u64,
    /// Truncation radius around the ray.
    #[arg(long, default_value_t = 1)]
    radius: usize,
    /// Neighbours listed per truncation vertex.
    #[arg(long, default_value_t = 64)]
    degree_cap: usize,
    /// Bundle JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct SeparateArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated ids.
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    b: Vec<u64>,
    #[arg(long)]
    dot: Option<PathBuf>,
}

/// Failures that decide the exit code.
enum Failure {
    Input(anyhow::Error),
    Invariant(anyhow::Error),
    NothingToWitness,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Invariant(_)) => Failure::Invariant(e),
            Some(Error::NothingToWitness) => Failure::NothingToWitness,
            _ => Failure::Input(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

enum Host {
    Family(FamilyGraph),
    File(FiniteGraph),
}

impl Host {
    fn parse(spec: &str) -> Result<Host> {
        if let Some(path) = spec.strip_prefix("file:") {
            return Ok(Host::File(read_graph(Path::new(path))?));
        }
        let family: FamilySpec = spec.parse()?;
        Ok(Host::Family(make_family(family)?))
    }

    fn graph(&self) -> &dyn Graph {
        match self {
            Host::Family(g) => g,
            Host::File(g) => g,
        }
    }

    fn finite(&self) -> Option<&FiniteGraph> {
        match self {
            Host::Family(g) => g.as_finite(),
            Host::File(g) => Some(g),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_graph(path: &Path) -> Result<FiniteGraph> {
    FiniteGraph::from_json(&read(path)?).with_context(|| format!("parsing graph {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_cover(host: &HostArgs) -> Result<CoverAssignment> {
    let cover = CoverAssignment::parse_with_table(&host.cover, |src| {
        fs::read_to_string(src).map_err(|e| Error::InvalidArgument(format!("reading cover table {src}: {e}")))
    })?;
    Ok(match host.avoid {
        Some(v) => cover.avoiding(VertexId(v)),
        None => cover,
    })
}

fn root_of(host: &HostArgs, g: &dyn Graph) -> Result<VertexId> {
    match host.root {
        Some(r) => Ok(VertexId(r)),
        None => g.vertices().next().context("graph has no vertices"),
    }
}

/// The finite graph to draw a tree against: the host itself, or the host
/// induced on the tree's vertices.
fn drawing_graph(host: &Host, tree: &RootedTree) -> Result<FiniteGraph> {
    match host.finite() {
        Some(g) => Ok(g.clone()),
        None => {
            let seeds: Vec<VertexId> = tree.vertices().collect();
            Ok(truncation(host.graph(), &seeds, 0, None)?.graph)
        }
    }
}

fn cmd_build(args: &BuildArgs) -> Result<ExitCode, Failure> {
    let host = Host::parse(&args.host.graph)?;
    let cover = parse_cover(&args.host)?;
    let g = host.graph();
    let report: BuildReport = match (host.finite(), args.host.budget, args.host.root) {
        (Some(fg), None, None) => build_finite(fg, &cover)?.1,
        _ => {
            let budget = args.host.budget.unwrap_or(10_000);
            build_budgeted(g, &cover, budget, root_of(&args.host, g)?)?
        }
    };
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write(&dir.join("tree.json"), &(report.tree.to_json() + "\n"))?;
        write(&dir.join("events.jsonl"), &report.log_jsonl())?;
        let summary = serde_json::json!({
            "graph": args.host.graph,
            "cover": cover.to_string(),
            "spanning": report.spanning,
            "covered": report.tree.len(),
            "pending": report.pending,
            "ticks": report.ticks,
            "steps": report.steps,
            "dropped_tasks": report.dropped_tasks,
            "notices": report.notices,
        });
        write(&dir.join("summary.json"), &(serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)? + "\n"))?;
    }
    if let Some(path) = &args.dot {
        write(path, &tree_dot(&drawing_graph(&host, &report.tree)?, &report.tree))?;
    }
    println!("{}", report.verdict());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Failure> {
    let g = read_graph(&args.graph)?;
    let tree = RootedTree::from_json(&read(&args.tree)?).with_context(|| format!("parsing tree {}", args.tree.display()))?;
    let report = is_normal(&g, &tree).context("tree does not fit the graph")?;
    if let Some(path) = &args.dot {
        write(path, &tree_dot(&g, &tree))?;
    }
    match report.violation {
        None => {
            println!("normal: {} of {} vertices", tree.len(), g.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(v) => {
            println!("not normal: {}", serde_json::to_string(&v).map_err(anyhow::Error::from)?);
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_witness(args: &WitnessArgs) -> Result<ExitCode, Failure> {
    let host = Host::parse(&args.host.graph)?;
    let cover = parse_cover(&args.host)?;
    let g = host.graph();
    let params = WitnessParams {
        budget: args.host.budget.unwrap_or(100_000),
        root: root_of(&args.host, g)?,
        m: args.m,
        k: args.k,
        region: args.region,
        reach: Truncation { radius: args.radius, degree_cap: Some(args.degree_cap) },
        ..WitnessParams::default()
    };
    let bundle = run_witness(g, &cover, &params)?;
    if let Some(path) = &args.out {
        let doc = serde_json::json!({ "params": params, "bundle": bundle });
        write(path, &(serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)? + "\n"))?;
    }
    if let Some(path) = &args.dot {
        write(path, &witness_dot(&bundle.probe.tree, &bundle))?;
    }
    println!(
        "component of {} (level {}): tree {} vertices, chain {} members, {}",
        bundle.probe.rep,
        bundle.probe.level,
        bundle.tree_size,
        bundle.chain.len(),
        if bundle.verified { "evidence verified".to_string() } else { format!("insufficient: {}", bundle.shortfalls.join("; ")) }
    );
    Ok(ExitCode::from(if bundle.verified { 0 } else { 3 }))
}

fn cmd_separate(args: &SeparateArgs) -> Result<ExitCode, Failure> {
    let g = read_graph(&args.graph)?;
    let a: BTreeSet<VertexId> = args.a.iter().copied().map(VertexId).collect();
    let b: BTreeSet<VertexId> = args.b.iter().copied().map(VertexId).collect();
    let res = max_disjoint_paths(&g, &a, &b, usize::MAX)?;
    if let Some(path) = &args.dot {
        write(path, &separation_dot(&g, &a, &b, &res))?;
    }
    println!("{}", serde_json::to_string_pretty(&res).map_err(anyhow::Error::from)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Separate(a) => cmd_separate(a),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(e)) => {
            eprintln!("internal invariant violated: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::NothingToWitness) => {
            eprintln!("nothing to witness: every probed vertex is covered");
            ExitCode::from(4)
        }
    }
}
