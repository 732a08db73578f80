use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lazymc::{
    lazy_mc, must_may_stats, with_threads, CsrGraph, PrepopulatePolicy, SolveResult, SolverConfig,
};
use serde_json::json;

const EXIT_NOT_A_CLIQUE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_TIMEOUT: u8 = 5;

#[derive(Parser)]
#[command(name = "lazymc", version, about = "Exact maximum clique search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a maximum clique.
    Solve(SolveArgs),
    /// Check that the vertices listed in a file form a clique.
    Verify(VerifyArgs),
    /// Report how much of the graph an exact search must and may touch.
    Stats(StatsArgs),
    /// Time repeated solves at several thread counts.
    Bench(BenchArgs),
    /// Rewrite an edge list in the binary format (ids become dense).
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edgelist,
    Binary,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: Format,
}

#[derive(Args)]
struct TuningArgs {
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Density above which neighborhoods go to the vertex-cover solver.
    #[arg(long, default_value_t = 0.1)]
    phi: f64,
    #[arg(long, default_value_t = lazymc::heuristics::DEFAULT_TOP_K)]
    top_k: usize,
    #[arg(long, value_parser = parse_policy, default_value = "must")]
    prepopulate: PrepopulatePolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pick one random seed vertex per coreness level instead of the first.
    #[arg(long)]
    random_seed_pick: bool,
    #[arg(long)]
    no_filters: bool,
    #[arg(long)]
    no_early_exit: bool,
    #[arg(long)]
    no_coloring: bool,
    #[arg(long)]
    no_kernels: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Seconds before giving up with the best clique so far.
    #[arg(long)]
    timeout: Option<f64>,
    /// Write a JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// File of vertex ids; the output of `solve` is accepted as is.
    #[arg(long)]
    clique: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Clique number; solved for when absent.
    #[arg(long)]
    omega: Option<usize>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    /// Thread counts to compare, e.g. 1,4,8.
    #[arg(long = "thread-counts", value_delimiter = ',', default_value = "1,0")]
    thread_counts: Vec<usize>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
}

fn parse_policy(s: &str) -> Result<PrepopulatePolicy, String> {
    s.parse().map_err(|e: lazymc::Error| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn from_lazymc(path: &Path, e: lazymc::Error) -> Self {
        let code = match &e {
            lazymc::Error::Io(io) if io.kind() == ErrorKind::UnexpectedEof => EXIT_PARSE,
            lazymc::Error::Io(_) => EXIT_IO,
            lazymc::Error::Parse { .. } | lazymc::Error::InvalidGraph(_) => EXIT_PARSE,
            lazymc::Error::Config(_) => EXIT_USAGE,
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn load(args: &GraphArgs) -> Result<CsrGraph, Failure> {
    let file = File::open(&args.input)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", args.input.display())))?;
    let reader = BufReader::new(file);
    match args.format {
        Format::Edgelist => lazymc::load_edge_list(reader),
        Format::Binary => lazymc::load_binary(reader),
    }
    .map_err(|e| Failure::from_lazymc(&args.input, e))
}

impl TuningArgs {
    fn config(&self, timeout: Option<f64>) -> Result<SolverConfig, Failure> {
        let cfg = SolverConfig {
            threads: self.threads,
            phi: self.phi,
            top_k: self.top_k,
            prepopulate: self.prepopulate,
            seed: self.seed,
            timeout,
            random_seed_pick: self.random_seed_pick,
            filters: !self.no_filters,
            early_exit: !self.no_early_exit,
            coloring: !self.no_coloring,
            kernels: !self.no_kernels,
        };
        cfg.validate()
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        Ok(cfg)
    }
}

/// Prints a line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn join_ids(ids: &[u64]) -> String {
    ids.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn report_json(g: &CsrGraph, cfg: &SolverConfig, r: &SolveResult) -> serde_json::Value {
    let rep = &r.report;
    json!({
        "omega": r.omega,
        "exact": r.exact,
        "clique": r.clique,
        "config": cfg,
        "graph": { "vertices": g.num_vertices(), "edges": g.num_edges(), "degeneracy": rep.degeneracy },
        "heuristics": { "degree": rep.heuristic_degree, "coreness": rep.heuristic_coreness },
        "phases": rep.phases,
        "filters": rep.filters,
        "dispatch": rep.dispatch,
    })
}

fn solve(args: SolveArgs) -> CmdResult {
    let cfg = args.tuning.config(args.timeout)?;
    let g = load(&args.graph)?;
    let r = lazy_mc(&g, &cfg).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    if let Some(path) = &args.json {
        let out = File::create(path)
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        serde_json::to_writer_pretty(BufWriter::new(out), &report_json(&g, &cfg, &r))
            .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    }
    emit(&format!(
        "omega={}\nclique: {}",
        r.omega,
        join_ids(&r.clique)
    ));
    if !r.exact {
        eprintln!("timed out; omega is a lower bound");
        return Ok(ExitCode::from(EXIT_TIMEOUT));
    }
    Ok(ExitCode::SUCCESS)
}

/// Vertex ids listed in a clique file. `omega=` lines and `#` comments are
/// skipped and a leading `clique:` label is dropped.
fn read_clique(path: &Path) -> Result<Vec<u64>, Failure> {
    let file =
        File::open(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let mut ids = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("omega=") {
            continue;
        }
        let line = line.strip_prefix("clique:").unwrap_or(line);
        for tok in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let id = tok.parse::<u64>().map_err(|e| {
                Failure::new(
                    EXIT_PARSE,
                    format!(
                        "{}: line {}: invalid vertex id {tok:?}: {e}",
                        path.display(),
                        i + 1
                    ),
                )
            })?;
            ids.push(id);
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn verify(args: VerifyArgs) -> CmdResult {
    let g = load(&args.graph)?;
    let ids = read_clique(&args.clique)?;
    let mut dense = Vec::with_capacity(ids.len());
    for &id in &ids {
        match g.dense_id(id) {
            Some(v) => dense.push(v),
            None => {
                println!("FAIL: vertex {id} is not in the graph");
                return Ok(ExitCode::from(EXIT_NOT_A_CLIQUE));
            }
        }
    }
    match g.find_non_edge(&dense) {
        Some((u, v)) => {
            println!(
                "FAIL: ({}, {}) not adjacent",
                g.original_id(u),
                g.original_id(v)
            );
            Ok(ExitCode::from(EXIT_NOT_A_CLIQUE))
        }
        None => {
            println!("OK: clique of size {}", dense.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn stats(args: StatsArgs) -> CmdResult {
    let g = load(&args.graph)?;
    let omega = match args.omega {
        Some(w) => w,
        None => {
            let cfg = SolverConfig {
                threads: args.threads,
                ..Default::default()
            };
            lazy_mc(&g, &cfg)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?
                .omega
        }
    };
    let s = with_threads(args.threads, |exec| must_may_stats(&g, omega, exec));
    println!("omega={omega}");
    println!("vertices={} edges={}", s.vertices, s.edges);
    println!(
        "must_vertices={} must_vertex_fraction={:.6}",
        s.must_vertices,
        s.must_vertex_fraction()
    );
    println!(
        "must_edges={} must_edge_fraction={:.6}",
        s.must_edges,
        s.must_edge_fraction()
    );
    println!(
        "may_vertices={} may_vertex_fraction={:.6}",
        s.may_vertices,
        s.may_vertex_fraction()
    );
    println!(
        "may_edges={} may_edge_fraction={:.6}",
        s.may_edges,
        s.may_edge_fraction()
    );
    println!(
        "attached_edges={} attached_edge_fraction={:.6}",
        s.attached_edges,
        s.attached_edge_fraction()
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> CmdResult {
    let g = load(&args.graph)?;
    if args.repeat == 0 {
        return Err(Failure::new(EXIT_USAGE, "--repeat must be at least 1"));
    }
    for &threads in &args.thread_counts {
        let cfg = TuningArgs {
            threads,
            ..args.tuning
        }
        .config(None)?;
        let mut times = Vec::with_capacity(args.repeat);
        let mut omega = 0;
        for _ in 0..args.repeat {
            let start = Instant::now();
            omega = lazy_mc(&g, &cfg)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?
                .omega;
            times.push(start.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        println!(
            "threads={threads} omega={omega} min={:.6}s median={:.6}s max={:.6}s",
            times[0],
            times[times.len() / 2],
            times[times.len() - 1]
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn convert(args: ConvertArgs) -> CmdResult {
    let g = load(&GraphArgs {
        input: args.input,
        format: Format::Edgelist,
    })?;
    let out = File::create(&args.output)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", args.output.display())))?;
    g.write_binary(BufWriter::new(out))
        .map_err(|e| Failure::from_lazymc(&args.output, e))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Stats(a) => stats(a),
        Command::Bench(a) => bench(a),
        Command::Convert(a) => convert(a),
    };
    result.unwrap_or_else(|f| {
        eprintln!("error: {}", f.message);
        ExitCode::from(f.code)
    })
}
