use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use graph_diffusion::analysis::{run_experiment, spectral_embedding, ExperimentConfig, Preset};
use graph_diffusion::diffusion::{default_kmax, diffusion_distance, mc_diffusion_distance};
use graph_diffusion::generators::{gen_knn_point_cloud, gen_small_world, sample_dumbbell, GenSpec};
use graph_diffusion::io::{load_graph, load_vertex_set, parse_vertex_list, read_vertex_set, write_edge_list, write_points_csv, write_vertex_set, Table};
use graph_diffusion::spectral::{
    absorbing_dominant_eigenpair_checked, leading_nontrivial_eigenpairs, schrodinger_ground_state, EigenPair,
    DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
use graph_diffusion::theorems::{check_corollary1, check_theorem1, check_theorem2, BoundReport, EpsChoice};
use graph_diffusion::{Error, Graph, Result, TransitionOperator};

const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "gdiff", version, about = "Diffusion distances and eigenvector bounds on weighted digraphs")]
struct Cli {
    /// Seed for randomized generators and Monte Carlo estimates.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph as an edge list plus absorbing-set file.
    Gen(GenArgs),
    /// Eigenpairs of the averaging Laplacian.
    Eig(EigArgs),
    /// Diffusion distance to a target set.
    Dist(DistArgs),
    /// Evaluate an eigenvector bound vertex by vertex.
    Check(CheckArgs),
    /// Spectral embedding and sign labels.
    Embed(EmbedArgs),
    /// Run a named experiment preset.
    Run(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Path,
    Cycle,
    CompleteAbsorbing,
    CyclePlusBoundary,
    TwoCompleteBridge,
    SmallWorldRing,
    KnnDumbbell,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    family: Family,
    /// Vertex count (block size for two-complete-bridge, point count for knn-dumbbell).
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Boundary weight for cycle-plus-boundary.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Absorbing vertex count for small-world-ring.
    #[arg(long, default_value_t = 8)]
    boundary: usize,
    /// Expected chord count for small-world-ring.
    #[arg(long, default_value_t = 64.0)]
    extra: f64,
    /// Neighbor count for knn-dumbbell.
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(Args)]
struct GraphInput {
    /// Edge list (`src<TAB>dst<TAB>weight`).
    #[arg(long)]
    graph: PathBuf,
    /// Absorbing vertices, comma separated.
    #[arg(long, conflicts_with = "absorbing_file")]
    absorbing: Option<String>,
    /// Absorbing vertices, one per line.
    #[arg(long)]
    absorbing_file: Option<PathBuf>,
}

impl GraphInput {
    fn load(&self) -> Result<Graph> {
        let absorbing = match (&self.absorbing, &self.absorbing_file) {
            (Some(s), _) => parse_vertex_list(s)?,
            (None, Some(p)) => load_vertex_set(p)?,
            (None, None) => Vec::new(),
        };
        load_graph(&self.graph, &absorbing)
    }
}

#[derive(Args)]
struct EigArgs {
    #[command(flatten)]
    input: GraphInput,
    /// `absorbing` needs an absorbing set; `auto` picks by graph.
    #[arg(long, value_enum, default_value_t = EigMode::Auto)]
    mode: EigMode,
    /// Number of nontrivial pairs (nontrivial mode).
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EigMode {
    Auto,
    Nontrivial,
    Absorbing,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Target vertices, comma separated, or `absorbing` (the default).
    #[arg(long, conflicts_with = "target_file")]
    target: Option<String>,
    #[arg(long)]
    target_file: Option<PathBuf>,
    /// Hitting-probability threshold.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long)]
    kmax: Option<usize>,
    /// Estimate by simulation with this many walkers per vertex.
    #[arg(long)]
    mc: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoremArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "c1")]
    C1,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, value_enum)]
    theorem: TheoremArg,
    /// Sublevel threshold: a number, `auto` or `nodal`.
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Potential values, one per line (c1 only). The ground state is solved
    /// for this potential up to a constant shift.
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, default_value_t = 2)]
    dims: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct RunArgs {
    preset: String,
    #[arg(long)]
    replicates: Option<usize>,
    /// Monte Carlo cross-check with this many walkers per vertex.
    #[arg(long)]
    walkers: Option<usize>,
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn emit<T: Serialize>(&self, name: &str, value: &T, table: Table) -> Result<()> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(value)?)?;
                table.save(&dir.join(format!("{name}.csv")))
            }
            None => {
                let mut stdout = io::stdout().lock();
                match self.format {
                    Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(value)?)?,
                    Format::Csv => table.write(&mut stdout)?,
                }
                Ok(())
            }
        }
    }
}

fn cmd_gen(ctx: &Ctx, a: &GenArgs) -> Result<()> {
    let spec = match a.family {
        Family::Path => GenSpec::Path { n: a.n },
        Family::Cycle => GenSpec::Cycle { n: a.n },
        Family::CompleteAbsorbing => GenSpec::CompleteAbsorbing { n: a.n },
        Family::CyclePlusBoundary => GenSpec::CyclePlusBoundary { n: a.n, eps: a.eps },
        Family::TwoCompleteBridge => GenSpec::TwoCompleteBridge { n: a.n },
        Family::SmallWorldRing => GenSpec::SmallWorldRing {
            n: a.n,
            n_boundary: a.boundary,
            expected_extra_edges: a.extra,
            seed: ctx.seed,
        },
        Family::KnnDumbbell => GenSpec::KnnDumbbell { points: a.n, k: a.k, seed: ctx.seed },
    };
    let mut points = None;
    let g = match spec {
        GenSpec::KnnDumbbell { points: count, k, seed } => {
            let pts = sample_dumbbell(count, seed);
            let g = gen_knn_point_cloud(&pts, k)?;
            points = Some(pts);
            g
        }
        GenSpec::SmallWorldRing { n, n_boundary, expected_extra_edges, seed } => {
            gen_small_world(n, n_boundary, expected_extra_edges, seed)?.graph
        }
        ref s => s.build()?,
    };
    match &ctx.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_edge_list(&g, fs::File::create(dir.join("graph.tsv"))?)?;
            write_vertex_set(g.absorbing(), fs::File::create(dir.join("absorbing.txt"))?)?;
            fs::write(dir.join("spec.json"), serde_json::to_string_pretty(&spec)?)?;
            if let Some(pts) = &points {
                write_points_csv(pts, fs::File::create(dir.join("points.csv"))?)?;
            }
            Ok(())
        }
        None => match ctx.format {
            Format::Json => {
                println!("{}", g.to_json());
                Ok(())
            }
            Format::Csv => write_edge_list(&g, io::stdout().lock()),
        },
    }
}

fn eig_table(pairs: &[EigenPair]) -> Table {
    let n = pairs.first().map_or(0, |p| p.u.len());
    let mut t = Table::new().column("vertex", 0..n);
    for (k, p) in pairs.iter().enumerate() {
        t = t.column(&format!("u{}", k + 1), p.u.iter());
    }
    t
}

fn cmd_eig(ctx: &Ctx, a: &EigArgs) -> Result<()> {
    let g = a.input.load()?;
    let absorbing = match a.mode {
        EigMode::Auto => g.has_absorbing(),
        EigMode::Nontrivial => false,
        EigMode::Absorbing => true,
    };
    let pairs = if absorbing {
        vec![absorbing_dominant_eigenpair_checked(&g, a.tol, a.max_iters)?]
    } else {
        if g.has_absorbing() {
            return Err(Error::HasAbsorbingSet);
        }
        leading_nontrivial_eigenpairs(&g, a.count, a.tol, a.max_iters)?
    };
    ctx.emit("eig", &pairs, eig_table(&pairs))
}

fn cmd_dist(ctx: &Ctx, a: &DistArgs) -> Result<()> {
    let g = a.input.load()?;
    let target = match (&a.target, &a.target_file) {
        (Some(s), _) if s != "absorbing" => parse_vertex_list(s)?,
        (None, Some(p)) => read_vertex_set(fs::File::open(p)?)?,
        _ => g.absorbing().to_vec(),
    };
    let kmax = a.kmax.unwrap_or_else(|| default_kmax(g.n()));
    match a.mc {
        None => {
            let field = diffusion_distance(&g, &target, a.p, kmax)?;
            let table = Table::new().column("vertex", 0..g.n()).column("d", field.d.iter()).column("capped", field.capped.iter());
            ctx.emit("dist", &field, table)
        }
        Some(walkers) => {
            let mc = mc_diffusion_distance(&g, &target, a.p, walkers, kmax, ctx.seed)?;
            let table = Table::new()
                .column("vertex", 0..g.n())
                .column("d", mc.field.d.iter())
                .column("capped", mc.field.capped.iter())
                .column("ci_low", mc.ci.iter().map(|c| c.0))
                .column("ci_high", mc.ci.iter().map(|c| c.1))
                .column("near_threshold", mc.near_threshold.iter());
            ctx.emit("dist", &mc, table)
        }
    }
}

fn parse_eps(s: &str) -> Result<EpsChoice> {
    match s {
        "auto" => Ok(EpsChoice::Auto),
        "nodal" => Ok(EpsChoice::Nodal),
        v => v
            .parse::<f64>()
            .map(EpsChoice::Value)
            .map_err(|_| Error::InvalidParameter(format!("eps must be a number, auto or nodal, got {v:?}"))),
    }
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.split('#').next().unwrap_or("").trim();
        if !t.is_empty() {
            out.push(t.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad value {t:?}") })?);
        }
    }
    Ok(out)
}

fn bound_table(rep: &BoundReport) -> Table {
    Table::new()
        .column("vertex", rep.rows.iter().map(|r| r.vertex))
        .column("d", rep.rows.iter().map(|r| r.d))
        .column("lhs", rep.rows.iter().map(|r| r.lhs))
        .column("rhs", rep.rows.iter().map(|r| r.rhs))
        .column("slack", rep.rows.iter().map(|r| r.slack))
        .column("holds", rep.rows.iter().map(|r| r.holds))
        .column("status", rep.rows.iter().map(|r| serde_json::to_value(r.status).unwrap().as_str().unwrap_or("").to_string()))
}

fn cmd_check(ctx: &Ctx, a: &CheckArgs) -> Result<bool> {
    let g = a.input.load()?;
    let kmax = a.kmax.unwrap_or_else(|| default_kmax(g.n()));
    let rep = match a.theorem {
        TheoremArg::One => {
            if g.has_absorbing() {
                return Err(Error::HasAbsorbingSet);
            }
            let pair = leading_nontrivial_eigenpairs(&g, 1, a.tol, DEFAULT_MAX_ITERS)?.remove(0);
            check_theorem1(&g, &pair, parse_eps(&a.eps)?, kmax)?
        }
        TheoremArg::Two => {
            let pair = absorbing_dominant_eigenpair_checked(&g, a.tol, DEFAULT_MAX_ITERS)?;
            check_theorem2(&g, &pair, kmax)?
        }
        TheoremArg::C1 => {
            let w = match &a.potential {
                Some(p) => read_values(p)?,
                None => vec![0.0; g.n()],
            };
            let (u, potential) = schrodinger_ground_state(&g, &w, a.tol, DEFAULT_MAX_ITERS)?;
            check_corollary1(&g, &potential, &u, kmax)?
        }
    };
    let clean = rep.summary.violations == 0 && rep.summary.inconclusive == 0;
    ctx.emit("check", &rep, bound_table(&rep))?;
    Ok(clean)
}

#[derive(Serialize)]
struct EmbedOutput<'a> {
    embedding: &'a graph_diffusion::analysis::Embedding,
    labels: Vec<i8>,
}

fn cmd_embed(ctx: &Ctx, a: &EmbedArgs) -> Result<()> {
    let g = a.input.load()?;
    let e = spectral_embedding(&g, a.dims, a.tol)?;
    let labels = graph_diffusion::analysis::sign_classifier(&e.column(0));
    let mut t = Table::new().column("vertex", 0..g.n());
    for c in 0..e.dims {
        t = t.column(&format!("x{}", c + 1), e.column(c));
    }
    t = t.column("label", labels.iter());
    ctx.emit("embed", &EmbedOutput { embedding: &e, labels }, t)
}

fn cmd_run(ctx: &Ctx, a: &RunArgs) -> Result<bool> {
    let preset: Preset = a.preset.parse()?;
    let mut cfg = ExperimentConfig::new(preset);
    cfg.seed = ctx.seed;
    cfg.walkers = a.walkers;
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    let report = run_experiment(&cfg)?;
    match &ctx.out {
        Some(dir) => {
            for p in report.write_outputs(dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => println!("{}", report.to_json()?),
    }
    Ok(report.failures.is_empty())
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    let ctx = Ctx { seed: cli.seed, out: cli.out.clone(), format: cli.format };
    match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(&ctx, a)?,
        Cmd::Eig(a) => cmd_eig(&ctx, a)?,
        Cmd::Dist(a) => cmd_dist(&ctx, a)?,
        Cmd::Check(a) => {
            if !cmd_check(&ctx, a)? {
                return Ok(ExitCode::from(EXIT_INCONCLUSIVE));
            }
        }
        Cmd::Embed(a) => cmd_embed(&ctx, a)?,
        Cmd::Run(a) => {
            if !cmd_run(&ctx, a)? {
                eprintln!("some stages failed; see the failures list in the report");
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        // a closed pipe (e.g. `| head`) is not a failure
        Err(Error::Io(msg)) if msg.contains("Broken pipe") => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
