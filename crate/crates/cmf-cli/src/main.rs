//! `cmf`: complex matrix factorization benchmark tool.
//!
//! Subcommands: `bench` (full protocol grid over a PGM dataset),
//! `factorize` (single matrix -> model directory), `occlude` (patch one
//! image), `grad-check` (finite-difference audit of the solver gradients)
//! and `summarize` (aggregate a records CSV).

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use cmf_core::dataset::{occlude, read_pgm, write_pgm};
use cmf_core::factor::{factorize, Method, SolverParams};
use cmf_core::linalg::ComplexMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cmf_cli::bench::{
    grad_check, parse_records_csv, records_to_csv, run_bench, summarize, summary_to_csv,
};
use cmf_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "cmf", version, about = "Complex matrix factorization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark grid and write a records CSV.
    Bench(BenchArgs),
    /// Factorize a cmfmat matrix into a model directory.
    Factorize(FactorizeArgs),
    /// Overwrite a random square patch of a PGM image.
    Occlude(OccludeArgs),
    /// Verify the solver gradients against central finite differences.
    GradCheck(GradCheckArgs),
    /// Aggregate a records CSV into mean/std rows.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset root (ORL-style tree) or manifest file; overrides the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comma-separated methods, e.g. CMF,SpaCMF,NMF; overrides the config.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    /// Subspace dimension K; overrides the config.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated training counts per subject; overrides the config.
    #[arg(long = "n-train", value_delimiter = ',')]
    n_train: Vec<usize>,
    /// Comma-separated occlusion patch sizes (0 = none); overrides the config.
    #[arg(long, value_delimiter = ',')]
    occlusion: Vec<usize>,
    /// Number of repeats per cell; overrides the config.
    #[arg(long)]
    repeats: Option<usize>,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<i64>,
    /// Euler transform phase gain; overrides the config.
    #[arg(long)]
    alpha: Option<f64>,
    /// Neighbor count for the GraCMF graph; overrides the config.
    #[arg(long = "graph-k")]
    graph_k: Option<usize>,
    /// Resize images to HxW (e.g. 28x21) after occlusion; overrides the config.
    #[arg(long)]
    resize: Option<String>,
    /// Records CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-cell summary CSV here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct FactorizeArgs {
    /// Input matrix in cmfmat v1 format.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    k: usize,
    /// Laplacian matrix (cmfmat v1); required for GraCMF.
    #[arg(long)]
    laplacian: Option<PathBuf>,
    #[arg(long = "alpha-sparse", default_value_t = 0.1)]
    alpha_sparse: f64,
    #[arg(long = "lambda-graph", default_value_t = 0.1)]
    lambda_graph: f64,
    #[arg(long = "max-outer", default_value_t = 300)]
    max_outer: usize,
    #[arg(long = "inner-v-steps", default_value_t = 5)]
    inner_v_steps: usize,
    #[arg(long = "tol-rel", default_value_t = 1e-5)]
    tol_rel: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model directory (W.cmfmat, V.cmfmat, meta.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OccludeArgs {
    /// Input PGM image.
    #[arg(long)]
    input: PathBuf,
    /// Patch edge length.
    #[arg(long)]
    patch: usize,
    /// Fill intensity.
    #[arg(long, default_value_t = 0)]
    fill: u16,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output PGM image.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per method.
    #[arg(long, default_value_t = 20)]
    trials: usize,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Records CSV produced by `cmf bench`.
    #[arg(long)]
    input: PathBuf,
    /// Summary CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(text: &str, dest: Option<&PathBuf>) -> anyhow::Result<()> {
    match dest {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = args.dataset {
        cfg.dataset_path = Some(p);
    }
    if !args.methods.is_empty() {
        cfg.methods = args.methods;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if !args.n_train.is_empty() {
        cfg.n_train_list = args.n_train;
    }
    if !args.occlusion.is_empty() {
        cfg.occlusion_sizes = args.occlusion;
    }
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(a) = args.alpha {
        cfg.transform_alpha = a;
    }
    if let Some(g) = args.graph_k {
        cfg.graph_k = g;
    }
    if let Some(spec) = args.resize {
        let (h, w) = spec
            .split_once('x')
            .with_context(|| format!("--resize expects HxW, got {spec:?}"))?;
        cfg.resize = Some([h.parse()?, w.parse()?]);
    }
    cfg.validate()?;

    let records = run_bench(&cfg)?;
    emit(&records_to_csv(&records), args.out.as_ref())?;
    if let Some(path) = &args.summary {
        let rows = summarize(&records)?;
        emit(&summary_to_csv(&rows), Some(path))?;
    }
    Ok(())
}

fn cmd_factorize(args: FactorizeArgs) -> anyhow::Result<()> {
    let z = ComplexMatrix::load_cmfmat(&args.input)
        .with_context(|| format!("loading {}", args.input.display()))?;
    let laplacian = match &args.laplacian {
        Some(path) => Some(
            ComplexMatrix::load_cmfmat(path)
                .with_context(|| format!("loading {}", path.display()))?,
        ),
        None => None,
    };
    if args.method == Method::GraCmf && laplacian.is_none() {
        bail!("GraCMF needs --laplacian");
    }
    let mut params = SolverParams::new(args.method, args.k);
    params.alpha_sparse = args.alpha_sparse;
    params.lambda_graph = args.lambda_graph;
    params.max_outer = args.max_outer;
    params.inner_v_steps = args.inner_v_steps;
    params.tol_rel = args.tol_rel;
    params.seed = args.seed;
    let model = factorize(&z, &params, laplacian.as_ref())?;
    model.save_dir(&args.out)?;
    println!(
        "{}: objective {:.6e} after {} outer iterations ({})",
        args.method,
        model.final_objective(),
        model.objective_trace.len() - 1,
        if model.converged { "converged" } else { "iteration cap" }
    );
    Ok(())
}

fn cmd_occlude(args: OccludeArgs) -> anyhow::Result<()> {
    let (img, maxval) = read_pgm(&args.input)?;
    if args.fill > maxval {
        bail!("fill {} exceeds maxval {maxval}", args.fill);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let patched = occlude(&img, args.patch, args.fill, &mut rng)?;
    write_pgm(&patched, maxval, &args.out)?;
    Ok(())
}

fn cmd_grad_check(args: GradCheckArgs) -> anyhow::Result<()> {
    let report = grad_check(args.seed, args.trials)?;
    println!("{}", report.text());
    if !report.pass {
        std::process::exit(1);
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let records = parse_records_csv(&text)?;
    let rows = summarize(&records)?;
    emit(&summary_to_csv(&rows), args.out.as_ref())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Bench(args) => cmd_bench(args),
        Command::Factorize(args) => cmd_factorize(args),
        Command::Occlude(args) => cmd_occlude(args),
        Command::GradCheck(args) => cmd_grad_check(args),
        Command::Summarize(args) => cmd_summarize(args),
    }
}
