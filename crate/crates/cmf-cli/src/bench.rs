//! Benchmark harness: repeated random splits over a method grid, with CSV
//! emission and aggregation.
//!
//! Reproducibility contract: repeat `r` derives its seed as
//! `base_seed + r * 10007`, and that one seed drives the occlusion
//! placement, the train/test split and the solver initialization. Every
//! method inside a repeat therefore sees identical splits and occlusions,
//! which makes per-repeat comparisons paired. Cells of the
//! `(n_train, occlusion, repeat)` grid run in parallel; records are sorted
//! by key afterwards, so scheduling never changes the output.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Context};
use cmf_core::dataset::{
    load_pgm_dir, load_pgm_manifest, occlude_all, resize_all, split, vectorize, ImageSet,
};
use cmf_core::factor::{factorize, grad_v, objective, Method, SolverParams};
use cmf_core::graph::knn_graph;
use cmf_core::linalg::ComplexMatrix;
use cmf_core::recognition::{evaluate, LabeledData};
use cmf_core::transform::{euler_map, EulerParams};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;

/// Salt mixed into the repeat seed for the occlusion stream, so patch
/// placement and split draws stay independent.
const OCCLUSION_SALT: u64 = 0x4f43_434c;

/// Seed stride between repeats.
pub const REPEAT_SEED_STRIDE: i64 = 10007;

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub method: Method,
    pub n_train: usize,
    pub occlusion: usize,
    pub repeat_index: usize,
    pub seed: i64,
    pub accuracy: f64,
    pub wall_time_seconds: f64,
    pub final_objective: f64,
}

/// Loads the configured dataset (directory tree or manifest file).
pub fn load_dataset(cfg: &ExperimentConfig) -> anyhow::Result<ImageSet> {
    let path = cfg
        .dataset_path
        .as_ref()
        .context("config has no dataset_path")?;
    let set = if path.is_dir() {
        load_pgm_dir(path)
    } else {
        load_pgm_manifest(path)
    };
    set.with_context(|| format!("loading dataset {}", path.display()))
}

/// Runs the full benchmark grid on the configured dataset.
pub fn run_bench(cfg: &ExperimentConfig) -> anyhow::Result<Vec<ResultRecord>> {
    let set = load_dataset(cfg)?;
    run_bench_on(&set, cfg)
}

/// Runs the benchmark grid on an already-loaded image set.
pub fn run_bench_on(set: &ImageSet, cfg: &ExperimentConfig) -> anyhow::Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, usize)> = cfg
        .n_train_list
        .iter()
        .flat_map(|&n_train| {
            cfg.occlusion_sizes.iter().flat_map(move |&occ| {
                (0..cfg.repeats).map(move |r| (n_train, occ, r))
            })
        })
        .collect();

    let mut records: Vec<ResultRecord> = cells
        .par_iter()
        .map(|&(n_train, occ, repeat)| run_cell(set, cfg, n_train, occ, repeat))
        .collect::<anyhow::Result<Vec<Vec<ResultRecord>>>>()?
        .into_iter()
        .flatten()
        .collect();

    records.sort_by(|a, b| {
        (a.method, a.n_train, a.occlusion, a.repeat_index)
            .cmp(&(b.method, b.n_train, b.occlusion, b.repeat_index))
    });
    Ok(records)
}

fn run_cell(
    set: &ImageSet,
    cfg: &ExperimentConfig,
    n_train: usize,
    occlusion: usize,
    repeat: usize,
) -> anyhow::Result<Vec<ResultRecord>> {
    let seed = cfg
        .base_seed
        .wrapping_add((repeat as i64).wrapping_mul(REPEAT_SEED_STRIDE));
    let seed_u = seed as u64;

    // Paper protocol order: occlude at native resolution, then resize, then
    // draw the split.
    let mut work = set.clone();
    if occlusion > 0 {
        let mut occ_rng = ChaCha8Rng::seed_from_u64(seed_u ^ OCCLUSION_SALT);
        work = occlude_all(&work, occlusion, cfg.occlusion_fill, &mut occ_rng)?;
    }
    if let Some([h, w]) = cfg.resize {
        work = resize_all(&work, h, w)?;
    }
    let (train_set, test_set) = split(&work, n_train, seed_u)?;
    let x_train = vectorize(&train_set);
    let x_test = vectorize(&test_set);

    let euler = EulerParams::new(cfg.transform_alpha)
        .map_err(|e| anyhow::anyhow!("transform.alpha: {e}"))?;
    // Built lazily: only complex methods need the transformed matrices.
    let mut complex_data: Option<(ComplexMatrix, ComplexMatrix)> = None;

    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let started = Instant::now();
        let mut params = SolverParams::new(method, cfg.k);
        params.alpha_sparse = cfg.solver_alpha_sparse;
        params.lambda_graph = cfg.solver_lambda_graph;
        params.max_outer = cfg.solver_max_outer;
        params.inner_v_steps = cfg.solver_inner_v_steps;
        params.tol_rel = cfg.solver_tol_rel;
        params.eps_sign = cfg.solver_eps_sign;
        params.seed = seed_u;

        let (accuracy, final_objective) = if method == Method::Nmf {
            let model = factorize(&x_train, &params, None)?;
            let train = LabeledData::new(x_train.clone(), train_set.labels.clone())?;
            let test = LabeledData::new(x_test.clone(), test_set.labels.clone())?;
            (evaluate(&model, &train, &test)?, model.final_objective())
        } else {
            if complex_data.is_none() {
                complex_data = Some((euler_map(&x_train, euler)?, euler_map(&x_test, euler)?));
            }
            let (z_train, z_test) = complex_data.as_ref().expect("filled above");
            let graph = if method == Method::GraCmf {
                // Similarity graph over raw training intensities only.
                Some(knn_graph(&x_train, cfg.graph_k)?)
            } else {
                None
            };
            let model = factorize(z_train, &params, graph.as_ref().map(|g| &g.l))?;
            let train = LabeledData::new(z_train.clone(), train_set.labels.clone())?;
            let test = LabeledData::new(z_test.clone(), test_set.labels.clone())?;
            (evaluate(&model, &train, &test)?, model.final_objective())
        };

        out.push(ResultRecord {
            method,
            n_train,
            occlusion,
            repeat_index: repeat,
            seed,
            accuracy,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            final_objective,
        });
    }
    Ok(out)
}

/// Exact header of the records CSV.
pub const RECORDS_CSV_HEADER: &str =
    "method,n_train,occlusion,repeat,seed,accuracy,wall_time_s,final_objective";

/// Serializes records (assumed sorted) with six decimal places on floats.
pub fn records_to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORDS_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.method,
            r.n_train,
            r.occlusion,
            r.repeat_index,
            r.seed,
            r.accuracy,
            r.wall_time_seconds,
            r.final_objective
        );
    }
    out
}

/// Parses a records CSV produced by [`records_to_csv`].
pub fn parse_records_csv(text: &str) -> anyhow::Result<Vec<ResultRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RECORDS_CSV_HEADER => {}
        other => bail!("bad records header: {other:?}"),
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            bail!("line {}: expected 8 fields, got {}", idx + 2, fields.len());
        }
        records.push(ResultRecord {
            method: fields[0].parse().map_err(|e| anyhow::anyhow!("{e}"))?,
            n_train: fields[1].parse()?,
            occlusion: fields[2].parse()?,
            repeat_index: fields[3].parse()?,
            seed: fields[4].parse()?,
            accuracy: fields[5].parse()?,
            wall_time_seconds: fields[6].parse()?,
            final_objective: fields[7].parse()?,
        });
    }
    Ok(records)
}

/// Aggregated accuracy for one `(method, n_train, occlusion)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub n_train: usize,
    pub occlusion: usize,
    /// Mean accuracy in percent.
    pub mean_pct: f64,
    /// Sample standard deviation (n-1 denominator) in percent; zero for a
    /// single record.
    pub std_pct: f64,
}

/// Groups records by `(method, n_train, occlusion)` and reports
/// `mean +- std` of accuracy in percent. Record order never matters.
pub fn summarize(records: &[ResultRecord]) -> anyhow::Result<Vec<SummaryRow>> {
    if records.is_empty() {
        bail!("no records to summarize");
    }
    let mut groups: std::collections::BTreeMap<(Method, usize, usize), Vec<f64>> =
        std::collections::BTreeMap::new();
    for r in records {
        groups
            .entry((r.method, r.n_train, r.occlusion))
            .or_default()
            .push(r.accuracy * 100.0);
    }
    Ok(groups
        .into_iter()
        .map(|((method, n_train, occlusion), accs)| {
            let n = accs.len() as f64;
            let mean = accs.iter().sum::<f64>() / n;
            let std = if accs.len() > 1 {
                (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                method,
                n_train,
                occlusion,
                mean_pct: mean,
                std_pct: std,
            }
        })
        .collect())
}

/// Exact header of the summary CSV.
pub const SUMMARY_CSV_HEADER: &str = "method,n_train,occlusion,mean_pct,std_pct";

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6}",
            r.method, r.n_train, r.occlusion, r.mean_pct, r.std_pct
        );
    }
    out
}

// ---- Gradient contract check --------------------------------------------

/// Outcome of the finite-difference gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub worst_rel_err: f64,
    pub lines: Vec<String>,
    pub pass: bool,
}

impl GradCheckReport {
    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

/// Relative error threshold for the gradient contract.
pub const GRAD_CHECK_TOL: f64 = 1e-6;

fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Checks `d/dt f(V + tP)|_0 = Re Trace(G^H P)` for all three complex
/// objectives on `trials` random instances with 10 random directions each,
/// using central finite differences of the objective at step `1e-6`.
///
/// The differencing goes through objective evaluations only, so it stays
/// independent of the closed-form gradient it audits.
pub fn grad_check(seed: u64, trials: usize) -> anyhow::Result<GradCheckReport> {
    if trials == 0 {
        bail!("trials must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut lines = Vec::new();
    let mut worst_overall: f64 = 0.0;

    for method in [Method::Cmf, Method::SpaCmf, Method::GraCmf] {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            // GraCMF instances carry a 5-vertex Laplacian; M is free otherwise.
            let m = if method == Method::GraCmf {
                5
            } else {
                rng.gen_range(2..=10)
            };
            let n = rng.gen_range(2..=10);
            let k = rng.gen_range(1..=4.min(n).min(m));
            let z = random_complex(&mut rng, n, m);
            let w = random_complex(&mut rng, n, k);
            let v = random_complex(&mut rng, k, m);
            let laplacian = if method == Method::GraCmf {
                let features = ComplexMatrix::from_real_fn(6, m, |_, _| rng.gen_range(0.01..1.0));
                Some(knn_graph(&features, 2)?.l)
            } else {
                None
            };
            let mut params = SolverParams::new(method, k);
            params.alpha_sparse = 0.3;
            params.lambda_graph = 0.5;
            let l = laplacian.as_ref();

            let g = grad_v(&z, &w, &v, &params, l)?;
            for _ in 0..10 {
                let dir = random_complex(&mut rng, k, m);
                let f_plus = objective(&z, &w, &v.sub_scaled(-h, &dir)?, &params, l)?;
                let f_minus = objective(&z, &w, &v.sub_scaled(h, &dir)?, &params, l)?;
                let fd = (f_plus - f_minus) / (2.0 * h);
                let ip: f64 = g
                    .as_slice()
                    .iter()
                    .zip(dir.as_slice())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum();
                let rel = (fd - ip).abs() / ip.abs().max(1e-12);
                worst = worst.max(rel);
            }
        }
        lines.push(format!(
            "{method}: worst relative error {worst:.3e} over {trials} instances x 10 directions"
        ));
        worst_overall = worst_overall.max(worst);
    }

    let pass = worst_overall <= GRAD_CHECK_TOL;
    lines.push(format!(
        "overall worst relative error {worst_overall:.3e} ({})",
        if pass { "PASS" } else { "FAIL" }
    ));
    Ok(GradCheckReport {
        worst_rel_err: worst_overall,
        lines,
        pass,
    })
}
