mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use quasihom_core::ball::Decorations;
use quasihom_core::coloring::{random_b_labels, square_edge_coloring};
use quasihom_core::decomposer::{
    decompose, splitting_diagnostics, verify_partition, CheckMode, DecomposeParams, Partition, ThresholdMode, VerifyParams,
};
use quasihom_core::generators::{convergence_report, generate, FamilySpec};
use quasihom_core::graph::{edit_distance, parse_edge_list, symmetric_difference, to_edge_list};
use quasihom_core::io::{
    AtlasDoc, ColoringDoc, ConvergenceDoc, DistanceDoc, EditDistanceDoc, PartitionDoc, PartitionVerdictDoc, RationalJson,
    SparseDensityDoc, SplitReportDoc, StatVectorDoc, VerdictDoc, FORMAT_VERSION,
};
use quasihom_core::quasihom::{check_exact_with_cap, falsify_heuristic, QuasihomParams, DEFAULT_EXACT_CAP};
use quasihom_core::stats::{sparse_density, subgraph_count, DEFAULT_PATTERN_CAP};
use quasihom_core::{d_s, stat_vector, Graph, Rational, Scalar, StatVector};

use crate::manifest::RunManifest;

/// Local statistics, quasihomogeneity tests and decompositions of
/// bounded-degree graphs.
#[derive(Parser, Debug)]
#[command(name = "quasihom", version)]
struct Cli {
    /// Worker threads for census and search (default: all cores, or
    /// QUASIHOM_THREADS when set).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Where to write the run manifest. Defaults to `<output>.manifest.json`
    /// when --output is a file; no manifest is written for stdout output
    /// unless this is given.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Output {
    /// Output file (default: stdout).
    #[arg(short, long, visible_alias = "out")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Write a graph from a named family as an edge list.
    Generate(GenerateArgs),
    /// Ball-type statistics (StatVector JSON) of a graph.
    Stats(StatsArgs),
    /// Statistical distance between two StatVector files (or edge lists with --radius).
    Distance(DistanceArgs),
    /// Edit distance |E(G) △ E(H)| / n.
    Editdist(EditdistArgs),
    /// Number of copies of a pattern divided by the vertex count.
    SparseDensity(SparseDensityArgs),
    /// Proper edge coloring from a greedy coloring of the square graph.
    ColorEdges(ColorEdgesArgs),
    /// Search for a subset violating (ε, λ, δ)-quasihomogeneity.
    CheckQuasihom(CheckQuasihomArgs),
    /// Partition a graph into parts with homogeneous local statistics.
    Decompose(DecomposeArgs),
    /// Check a partition against the decomposition conditions.
    VerifyPartition(VerifyPartitionArgs),
    /// Cross-edge ratios and mixture identity along a sequence of partitioned graphs.
    SplitDiagnostics(SplitDiagnosticsArgs),
    /// Pairwise statistical distances along a sequence of graphs.
    Convergence(ConvergenceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    Cycle,
    Path,
    Torus,
    RandomRegular,
    Tree,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(long, visible_alias = "kind", conflicts_with = "spec", required_unless_present = "spec")]
    family: Option<Family>,
    /// Positional family parameters, comma separated: cycle/path `n`;
    /// torus `rows,cols`; random-regular `n,d[,seed]`; tree `arity,depth`.
    #[arg(long, conflicts_with = "spec")]
    params: Option<String>,
    /// Family spec as JSON, e.g. '{"kind":"grid_torus","rows":8,"cols":8}'; `@file` reads a file.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct LabelArgs {
    /// Attach uniform random bit-string labels of this width.
    #[arg(long)]
    label_width: Option<u32>,
    #[arg(long, default_value_t = 0)]
    label_seed: u64,
    /// Color edges by the square-graph construction before the census.
    #[arg(long)]
    edge_colors: bool,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, short = 'R')]
    radius: usize,
    #[command(flatten)]
    labels: LabelArgs,
    /// Emit every ball type with its decoded structure instead of the StatVector.
    #[arg(long)]
    dump_atlas: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct DistanceArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Required when an input is an edge list; truncates StatVectors otherwise.
    #[arg(long, short = 'R')]
    radius: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct EditdistArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct SparseDensityArgs {
    /// Pattern graph F as an edge list.
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Largest pattern size accepted.
    #[arg(long, default_value_t = DEFAULT_PATTERN_CAP)]
    cap: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum ColoringFormat {
    Json,
    /// `n d` header then `u v color` lines.
    Edges,
}

#[derive(Args, Debug, Serialize)]
struct ColorEdgesArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ColoringFormat::Json)]
    format: ColoringFormat,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct QuasihomArgs {
    #[arg(long, value_parser = parse_rational_arg)]
    #[serde(serialize_with = "ser_rational")]
    epsilon: Rational,
    #[arg(long, value_parser = parse_rational_arg)]
    #[serde(serialize_with = "ser_rational")]
    lambda: Rational,
    #[arg(long, value_parser = parse_rational_arg)]
    #[serde(serialize_with = "ser_rational")]
    delta: Rational,
    #[arg(long, short = 'R')]
    radius: usize,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    /// Enumerate all subsets (small graphs only).
    #[arg(long, conflicts_with_all = ["budget"])]
    exact: bool,
    /// Largest vertex count for --exact.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP, requires = "exact")]
    cap: usize,
    /// Heuristic search moves.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct CheckQuasihomArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    params: QuasihomArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Threshold {
    /// δ² / (10 d K)
    Statement,
    /// δ / (10 d K)
    Proof,
}

impl From<Threshold> for ThresholdMode {
    fn from(t: Threshold) -> Self {
        match t {
            Threshold::Statement => ThresholdMode::Statement,
            Threshold::Proof => ThresholdMode::Proof,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_rational_arg)]
    #[serde(serialize_with = "ser_rational")]
    delta: Rational,
    #[arg(long, value_parser = parse_rational_arg)]
    #[serde(serialize_with = "ser_rational")]
    lambda: Rational,
    #[arg(long)]
    kmax: u32,
    #[arg(long, short = 'M')]
    signature_radius: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Threshold::Statement)]
    threshold: Threshold,
    /// Boundary budget ε for the attached verdict (default δ/2).
    #[arg(long, value_parser = parse_rational_arg)]
    #[serde(serialize_with = "ser_opt_rational")]
    epsilon: Option<Rational>,
    /// Statistic radius for the attached verdict.
    #[arg(long, short = 'R', default_value_t = 2)]
    radius: usize,
    /// Heuristic moves per part for the attached verdict.
    #[arg(long, default_value_t = 2000)]
    budget: u64,
    /// Skip the verdict.
    #[arg(long)]
    no_verify: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct VerifyPartitionArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[command(flatten)]
    params: QuasihomArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Threshold::Statement)]
    threshold: Threshold,
    /// K used in the size threshold (default: the partition's K).
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct SplitDiagnosticsArgs {
    /// `graph.el:partition.json`, repeated in sequence order.
    #[arg(long = "item", required = true)]
    items: Vec<String>,
    #[arg(long, short = 'R')]
    radius: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct ConvergenceArgs {
    /// Edge-list inputs, in sequence order.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    /// Family specs (JSON or `@file`), in sequence order, after the inputs.
    #[arg(long = "spec")]
    specs: Vec<String>,
    #[arg(long, short = 'R')]
    radius: usize,
    #[command(flatten)]
    out: Output,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

/// Accepts `a/b`, integers and finite decimals such as `0.05`, all exactly.
fn parse_rational_arg(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    let bad = || format!("`{text}` is not a rational (use a/b or a decimal like 0.05)");
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let q = Rational::new(num, BigInt::from(10u8).pow(frac.len() as u32));
        return Ok(if neg { -q } else { q });
    }
    let q = Rational::from_str(t).map_err(|_| bad())?;
    if q.denom().is_zero() {
        return Err(bad());
    }
    Ok(q)
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad invocation: exit 2.
    Usage(String),
    /// The inputs or the computation failed: exit 1.
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

type CmdResult = Result<Report, Failure>;

/// What a subcommand produced.
struct Report {
    body: String,
    output: Option<PathBuf>,
    inputs: Vec<PathBuf>,
    seeds: Vec<u64>,
}

impl Report {
    fn json<T: Serialize>(doc: &T, out: &Output) -> Result<Report, Failure> {
        let body = serde_json::to_string_pretty(doc).context("serializing report")? + "\n";
        Ok(Report { body, output: out.output.clone(), inputs: Vec::new(), seeds: Vec::new() })
    }

    fn text(body: String, out: &Output) -> Report {
        Report { body, output: out.output.clone(), inputs: Vec::new(), seeds: Vec::new() }
    }

    fn inputs(mut self, inputs: impl IntoIterator<Item = PathBuf>) -> Self {
        self.inputs.extend(inputs);
        self
    }

    fn seeds(mut self, seeds: impl IntoIterator<Item = u64>) -> Self {
        self.seeds.extend(seeds);
        self
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print and exit 0; everything else is a usage error.
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            let args: Vec<String> = std::env::args().collect();
            let name = args.iter().skip(1).find(|a| Cli::command().find_subcommand(a.as_str()).is_some());
            eprintln!("\n{}", valid_flags(name.map(String::as_str)));
            return ExitCode::from(2);
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(msg) => return usage_failure(&cli, &msg),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(1);
    }

    let started = Instant::now();
    let result = run(&cli.command);
    let report = match result {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => return usage_failure(&cli, &msg),
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_report(&cli, &report, threads, started) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, String> {
    let n = match (flag, std::env::var("QUASIHOM_THREADS")) {
        (Some(n), _) => n,
        (None, Ok(v)) => v.trim().parse().map_err(|_| format!("QUASIHOM_THREADS must be a positive integer, got `{v}`"))?,
        (None, Err(_)) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if n == 0 {
        return Err("thread count must be at least 1".into());
    }
    Ok(n)
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Generate(_) => "generate",
        Command::Stats(_) => "stats",
        Command::Distance(_) => "distance",
        Command::Editdist(_) => "editdist",
        Command::SparseDensity(_) => "sparse-density",
        Command::ColorEdges(_) => "color-edges",
        Command::CheckQuasihom(_) => "check-quasihom",
        Command::Decompose(_) => "decompose",
        Command::VerifyPartition(_) => "verify-partition",
        Command::SplitDiagnostics(_) => "split-diagnostics",
        Command::Convergence(_) => "convergence",
    }
}

/// One line naming the accepted flags of a subcommand (or the subcommands).
fn valid_flags(subcommand: Option<&str>) -> String {
    let root = Cli::command();
    let Some(cmd) = subcommand.and_then(|n| root.find_subcommand(n)) else {
        let names: Vec<&str> = root.get_subcommands().map(|c| c.get_name()).collect();
        return format!("valid subcommands: {}", names.join(", "));
    };
    let flags: Vec<String> = cmd
        .get_arguments()
        .chain(root.get_arguments())
        .filter_map(|a| a.get_long().map(|l| format!("--{l}")))
        .chain(["--help".to_string()])
        .collect();
    format!("valid flags for {}: {}", cmd.get_name(), flags.join(" "))
}

fn usage_failure(cli: &Cli, msg: &str) -> ExitCode {
    let mut cmd = Cli::command();
    let name = subcommand_name(&cli.command);
    let usage = cmd.find_subcommand_mut(name).map(|c| c.render_usage().to_string()).unwrap_or_default();
    eprintln!("error: {msg}\n\n{usage}\n{}", valid_flags(Some(name)));
    ExitCode::from(2)
}

fn write_report(cli: &Cli, report: &Report, threads: usize, started: Instant) -> anyhow::Result<()> {
    match &report.output {
        Some(path) => fs::write(path, &report.body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", report.body),
    }
    let manifest_path = cli.manifest.clone().or_else(|| {
        report.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    if let Some(path) = manifest_path {
        let m = RunManifest {
            format_version: FORMAT_VERSION,
            tool: "quasihom".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand_name(&cli.command).into(),
            argv: std::env::args().collect(),
            parameters: serde_json::to_value(&cli.command)?,
            seeds: report.seeds.clone(),
            inputs: report.inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: report.output.iter().map(|p| p.display().to_string()).collect(),
            threads,
            wall_time_seconds: started.elapsed().as_secs_f64(),
        };
        fs::write(&path, serde_json::to_string_pretty(&m)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    parse_edge_list(&read_text(path)?).with_context(|| format!("parsing edge list {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn spec_text(arg: &str) -> anyhow::Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => read_text(Path::new(path)),
        None => Ok(arg.to_string()),
    }
}

fn parse_spec(arg: &str) -> Result<FamilySpec, Failure> {
    let text = spec_text(arg)?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid family spec: {e}")))
}

fn run(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Editdist(a) => cmd_editdist(a),
        Command::SparseDensity(a) => cmd_sparse_density(a),
        Command::ColorEdges(a) => cmd_color_edges(a),
        Command::CheckQuasihom(a) => cmd_check_quasihom(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::VerifyPartition(a) => cmd_verify_partition(a),
        Command::SplitDiagnostics(a) => cmd_split_diagnostics(a),
        Command::Convergence(a) => cmd_convergence(a),
    }
}

fn cmd_generate(a: &GenerateArgs) -> CmdResult {
    let pos: Vec<u64> = match &a.params {
        Some(text) => text
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("--params `{text}` must be comma-separated non-negative integers")))?,
        None => Vec::new(),
    };
    if pos.len() > 3 {
        return Err(Failure::Usage("--params takes at most three values".into()));
    }
    let at = |i: usize| pos.get(i).map(|&v| v as usize);
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this family")));
    let seed = pos.get(2).copied().unwrap_or(a.seed);
    let spec = match (&a.spec, a.family) {
        (Some(s), _) => parse_spec(s)?,
        (None, Some(Family::Cycle)) => FamilySpec::Cycle { n: need(a.n.or(at(0)), "n")? },
        (None, Some(Family::Path)) => FamilySpec::Path { n: need(a.n.or(at(0)), "n")? },
        (None, Some(Family::Torus)) => {
            let rows = need(a.rows.or(a.n).or(at(0)), "rows")?;
            FamilySpec::GridTorus { rows, cols: a.cols.or(at(1)).unwrap_or(rows) }
        }
        (None, Some(Family::RandomRegular)) => {
            FamilySpec::RandomRegular { n: need(a.n.or(at(0)), "n")?, d: need(a.d.or(at(1)), "d")?, seed }
        }
        (None, Some(Family::Tree)) => {
            FamilySpec::DAryTree { arity: need(a.arity.or(at(0)), "arity")?, depth: need(a.depth.or(at(1)), "depth")? }
        }
        (None, None) => return Err(Failure::Usage("one of --family or --spec is required".into())),
    };
    let g = generate(&spec).context("generating graph")?;
    Ok(Report::text(to_edge_list(&g), &a.out).seeds([seed]))
}

/// Owned decorations for a census.
struct Decor {
    labels: Option<quasihom_core::coloring::BLabels>,
    colors: Option<Vec<Vec<u32>>>,
}

impl Decor {
    fn build(g: &Graph, a: &LabelArgs) -> anyhow::Result<Decor> {
        let labels = a.label_width.map(|w| random_b_labels(g.n(), w, a.label_seed)).transpose()?;
        let colors = a.edge_colors.then(|| square_edge_coloring(g).1.adjacency_colors(g));
        Ok(Decor { labels, colors })
    }

    fn view(&self) -> Decorations<'_> {
        Decorations { labels: self.labels.as_ref().map(|l| l.view()), edge_colors: self.colors.as_deref() }
    }
}

fn cmd_stats(a: &StatsArgs) -> CmdResult {
    if a.radius == 0 {
        return Err(Failure::Usage("--radius must be at least 1".into()));
    }
    let g = read_graph(&a.input)?;
    let decor = Decor::build(&g, &a.labels)?;
    let s = stat_vector::<Rational>(&g, a.radius, decor.view()).context("computing statistics")?;
    let report = if a.dump_atlas {
        Report::json(&AtlasDoc::new(&s).context("building atlas")?, &a.out)?
    } else {
        Report::json(&StatVectorDoc::from_stats(&s).context("encoding statistics")?, &a.out)?
    };
    let seeds = a.labels.label_width.map(|_| a.labels.label_seed);
    Ok(report.inputs([a.input.clone()]).seeds(seeds))
}

fn load_stats(path: &Path, radius: Option<usize>) -> Result<StatVector<Rational>, Failure> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let doc: StatVectorDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let s = doc.to_stats().with_context(|| format!("decoding {}", path.display()))?;
        return match radius {
            Some(r) if r > s.radius() => Err(Failure::Domain(anyhow::anyhow!(
                "{} has radius {}, cannot evaluate at radius {r}",
                path.display(),
                s.radius()
            ))),
            Some(r) => Ok(s.truncated(r)),
            None => Ok(s),
        };
    }
    let Some(r) = radius else {
        return Err(Failure::Usage(format!("{} is an edge list; pass --radius", path.display())));
    };
    let g = parse_edge_list(&text).with_context(|| format!("parsing edge list {}", path.display()))?;
    Ok(stat_vector(&g, r, Decorations::plain()).context("computing statistics")?)
}

fn cmd_distance(a: &DistanceArgs) -> CmdResult {
    let (sa, sb) = (load_stats(&a.a, a.radius)?, load_stats(&a.b, a.radius)?);
    let d = d_s(&sa, &sb).context("comparing statistics")?;
    Ok(Report::json(&DistanceDoc::new(sa.radius(), &d).context("encoding distance")?, &a.out)?.inputs([a.a.clone(), a.b.clone()]))
}

fn cmd_editdist(a: &EditdistArgs) -> CmdResult {
    let (g, h) = (read_graph(&a.a)?, read_graph(&a.b)?);
    let d: Rational = edit_distance(&g, &h).context("comparing graphs")?;
    let doc = EditDistanceDoc {
        format_version: FORMAT_VERSION,
        n: g.n(),
        symmetric_difference: symmetric_difference(&g, &h).len(),
        distance: RationalJson::from_rational(&d).context("encoding distance")?,
    };
    Ok(Report::json(&doc, &a.out)?.inputs([a.a.clone(), a.b.clone()]))
}

fn cmd_sparse_density(a: &SparseDensityArgs) -> CmdResult {
    let (f, g) = (read_graph(&a.pattern)?, read_graph(&a.input)?);
    let count = subgraph_count(&f, &g, a.cap).context("counting pattern copies")?;
    let density: Rational = sparse_density(&f, &g, a.cap).context("counting pattern copies")?;
    let doc = SparseDensityDoc {
        format_version: FORMAT_VERSION,
        pattern_vertices: f.n(),
        pattern_edges: f.edge_count(),
        n: g.n(),
        count,
        density: RationalJson::from_rational(&density).context("encoding density")?,
    };
    Ok(Report::json(&doc, &a.out)?.inputs([a.pattern.clone(), a.input.clone()]))
}

fn cmd_color_edges(a: &ColorEdgesArgs) -> CmdResult {
    let g = read_graph(&a.input)?;
    let (vc, ec) = square_edge_coloring(&g);
    let report = match a.format {
        ColoringFormat::Json => Report::json(&ColoringDoc::new(&g, &vc, &ec), &a.out)?,
        ColoringFormat::Edges => Report::text(ec.to_colored_edge_list(&g), &a.out),
    };
    Ok(report.inputs([a.input.clone()]))
}

fn quasihom_params(p: &QuasihomArgs) -> Result<QuasihomParams<Rational>, Failure> {
    QuasihomParams::new(p.epsilon.clone(), p.lambda.clone(), p.delta.clone(), p.radius).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_check_quasihom(a: &CheckQuasihomArgs) -> CmdResult {
    let p = quasihom_params(&a.params)?;
    let g = read_graph(&a.input)?;
    let v = if a.search.exact {
        check_exact_with_cap(&g, &p, a.search.cap).context("exhaustive check")?
    } else {
        let Some(budget) = a.search.budget else {
            return Err(Failure::Usage("pass --exact or --budget N".into()));
        };
        falsify_heuristic(&g, &p, budget, a.search.seed).context("heuristic search")?
    };
    let doc = VerdictDoc::new(g.n(), &p, &v).context("encoding verdict")?;
    let seeds = (!a.search.exact).then_some(a.search.seed);
    Ok(Report::json(&doc, &a.out)?.inputs([a.input.clone()]).seeds(seeds))
}

fn cmd_decompose(a: &DecomposeArgs) -> CmdResult {
    let g = read_graph(&a.input)?;
    let params = DecomposeParams {
        delta: a.delta.clone(),
        lambda: a.lambda.clone(),
        k_max: a.kmax,
        signature_radius: a.signature_radius,
        seed: a.seed,
        threshold_mode: a.threshold.into(),
    };
    if a.kmax == 0 || a.signature_radius == 0 {
        return Err(Failure::Usage("--kmax and --signature-radius must be at least 1".into()));
    }
    let p = decompose(&g, &params).context("decomposing")?;
    let mut doc = PartitionDoc::new(&p);
    doc.decompose = Some(quasihom_core::io::DecomposeParamsDoc::new(&params).context("encoding parameters")?);
    if !a.no_verify {
        let epsilon = a.epsilon.clone().unwrap_or_else(|| a.delta.clone() / Rational::from_int(2));
        let qp = QuasihomParams::new(epsilon.clone(), a.lambda.clone(), a.delta.clone(), a.radius)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        let vp = VerifyParams {
            delta: a.delta.clone(),
            lambda: a.lambda.clone(),
            epsilon,
            radius: a.radius,
            mode: CheckMode::Heuristic { budget: a.budget, seed: a.seed },
            threshold_mode: a.threshold.into(),
            k: Some(a.kmax),
        };
        let v = verify_partition(&g, &p, &vp).context("verifying partition")?;
        doc.verdict = Some(PartitionVerdictDoc::new(&v, &qp).context("encoding verdict")?);
    }
    Ok(Report::json(&doc, &a.out)?.inputs([a.input.clone()]).seeds([a.seed]))
}

fn cmd_verify_partition(a: &VerifyPartitionArgs) -> CmdResult {
    let qp = quasihom_params(&a.params)?;
    let g = read_graph(&a.input)?;
    let doc: PartitionDoc = read_json(&a.partition)?;
    let p = doc.to_partition().context("decoding partition")?;
    let mode = if a.search.exact {
        CheckMode::Exact
    } else {
        match a.search.budget {
            Some(budget) => CheckMode::Heuristic { budget, seed: a.search.seed },
            None => return Err(Failure::Usage("pass --exact or --budget N".into())),
        }
    };
    let vp = VerifyParams {
        delta: qp.delta.clone(),
        lambda: qp.lambda.clone(),
        epsilon: qp.epsilon.clone(),
        radius: qp.radius,
        mode,
        threshold_mode: a.threshold.into(),
        k: a.k,
    };
    let v = verify_partition(&g, &p, &vp).context("verifying partition")?;
    let seeds = (!a.search.exact).then_some(a.search.seed);
    Ok(Report::json(&PartitionVerdictDoc::new(&v, &qp).context("encoding verdict")?, &a.out)?
        .inputs([a.input.clone(), a.partition.clone()])
        .seeds(seeds))
}

fn cmd_split_diagnostics(a: &SplitDiagnosticsArgs) -> CmdResult {
    if a.radius == 0 {
        return Err(Failure::Usage("--radius must be at least 1".into()));
    }
    let mut seq: Vec<(Graph, Partition)> = Vec::new();
    let mut inputs = Vec::new();
    for item in &a.items {
        let Some((gp, pp)) = item.rsplit_once(':') else {
            return Err(Failure::Usage(format!("--item `{item}` must be graph.el:partition.json")));
        };
        let (gp, pp) = (PathBuf::from(gp), PathBuf::from(pp));
        let g = read_graph(&gp)?;
        let doc: PartitionDoc = read_json(&pp)?;
        seq.push((g, doc.to_partition().context("decoding partition")?));
        inputs.extend([gp, pp]);
    }
    let r = splitting_diagnostics::<Rational>(&seq, a.radius).context("splitting diagnostics")?;
    Ok(Report::json(&SplitReportDoc::new(&r).context("encoding report")?, &a.out)?.inputs(inputs))
}

fn cmd_convergence(a: &ConvergenceArgs) -> CmdResult {
    let mut graphs = a.inputs.iter().map(|p| read_graph(p)).collect::<anyhow::Result<Vec<_>>>()?;
    for s in &a.specs {
        graphs.push(generate(&parse_spec(s)?).context("generating graph")?);
    }
    if graphs.len() < 2 {
        return Err(Failure::Usage("convergence needs at least two graphs (--input or --spec)".into()));
    }
    if a.radius == 0 {
        return Err(Failure::Usage("--radius must be at least 1".into()));
    }
    let r = convergence_report::<Rational>(&graphs, a.radius).context("computing statistics")?;
    Ok(Report::json(&ConvergenceDoc::new(a.radius, &r).context("encoding report")?, &a.out)?.inputs(a.inputs.clone()))
}
