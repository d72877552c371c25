//! Complex matrix factorization solvers and the real NMF baseline.
//!
//! Given complex data `Z` (N x M), the solvers look for `W` (N x K) and
//! `V` (K x M) minimizing
//!
//! ```text
//! CMF     f = 1/2 ||Z - W V||_F^2
//! SpaCMF  f = 1/2 ||Z - W V||_F^2 + alpha * sum_ij |V_ij|
//! GraCMF  f = 1/2 ||Z - W V||_F^2 + lambda * Trace(V L V^H)
//! ```
//!
//! by block coordinate descent: a handful of gradient steps on `V` with `W`
//! fixed (step sizes from Armijo backtracking on the true objective), then
//! the exact least-squares update `W = Z * pinv(V)`. The gradient of each
//! real-valued objective with respect to the complex block satisfies the
//! directional-derivative identity `d/dt f(V + tP)|_0 = Re Trace(G^H P)`,
//! which is what the finite-difference checks in the test suite verify.
//!
//! The baseline is the classic multiplicative-update NMF on nonnegative real
//! data, kept behind the same [`FactorModel`] interface.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CmfError, Result};
use crate::graph::graph_penalty;
use crate::linalg::{lstsq_w, ComplexMatrix};

/// Armijo sufficient-decrease coefficient.
const ARMIJO_SIGMA: f64 = 1e-4;
/// Maximum number of step-size halvings per line search.
const ARMIJO_MAX_HALVINGS: usize = 30;
/// Denominator guard in the NMF multiplicative updates.
const NMF_EPS: f64 = 1e-9;

/// Factorization method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "CMF")]
    Cmf,
    #[serde(rename = "SpaCMF")]
    SpaCmf,
    #[serde(rename = "GraCMF")]
    GraCmf,
    #[serde(rename = "NMF")]
    Nmf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cmf => "CMF",
            Method::SpaCmf => "SpaCMF",
            Method::GraCmf => "GraCMF",
            Method::Nmf => "NMF",
        }
    }

    /// True for the complex-domain methods that consume Euler-mapped data.
    pub fn is_complex(self) -> bool {
        !matches!(self, Method::Nmf)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = CmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CMF" | "cmf" => Ok(Method::Cmf),
            "SpaCMF" | "spacmf" => Ok(Method::SpaCmf),
            "GraCMF" | "gracmf" => Ok(Method::GraCmf),
            "NMF" | "nmf" => Ok(Method::Nmf),
            other => Err(CmfError::InvalidParameter(format!(
                "unknown method {other:?} (expected CMF, SpaCMF, GraCMF or NMF)"
            ))),
        }
    }
}

/// Solver hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub method: Method,
    /// Subspace dimension; must satisfy `k <= min(N, M)`.
    pub k: usize,
    /// Sparsity weight; used by SpaCMF only.
    pub alpha_sparse: f64,
    /// Graph regularization weight; used by GraCMF only.
    pub lambda_graph: f64,
    /// Outer BCD iteration cap.
    pub max_outer: usize,
    /// Gradient steps on V per outer cycle.
    pub inner_v_steps: usize,
    /// Relative objective change below which the solver stops.
    pub tol_rel: f64,
    /// Smoothing floor for the complex sign of near-zero entries.
    pub eps_sign: f64,
    /// Seed for the factor initialization.
    pub seed: u64,
}

impl SolverParams {
    pub fn new(method: Method, k: usize) -> Self {
        Self {
            method,
            k,
            alpha_sparse: 0.1,
            lambda_graph: 0.1,
            max_outer: 300,
            inner_v_steps: 5,
            tol_rel: 1e-5,
            eps_sign: 1e-9,
            seed: 0,
        }
    }

    fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.k == 0 || self.k > n.min(m) {
            return Err(CmfError::InvalidParameter(format!(
                "K = {} must satisfy 1 <= K <= min({n}, {m})",
                self.k
            )));
        }
        if self.max_outer == 0 || self.inner_v_steps == 0 {
            return Err(CmfError::InvalidParameter(
                "max_outer and inner_v_steps must be positive".into(),
            ));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.tol_rel) || !positive(self.eps_sign) {
            return Err(CmfError::InvalidParameter(
                "tol_rel and eps_sign must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Output of a solver run.
#[derive(Debug, Clone)]
pub struct FactorModel {
    pub w: ComplexMatrix,
    pub v: ComplexMatrix,
    pub params: SolverParams,
    /// Objective value before the first outer iteration and after each one;
    /// non-increasing by construction.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl FactorModel {
    pub fn final_objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace always holds the initial value")
    }
}

fn check_laplacian(
    method: Method,
    m: usize,
    l: Option<&ComplexMatrix>,
) -> Result<Option<&ComplexMatrix>> {
    match (method, l) {
        (Method::GraCmf, Some(l)) => {
            if l.rows() != m || l.cols() != m {
                return Err(CmfError::ShapeMismatch {
                    op: "laplacian",
                    left_rows: m,
                    left_cols: m,
                    right_rows: l.rows(),
                    right_cols: l.cols(),
                });
            }
            Ok(Some(l))
        }
        (Method::GraCmf, None) => Err(CmfError::MissingLaplacian { method: "GraCMF" }),
        (_, Some(_)) => Err(CmfError::InvalidParameter(format!(
            "method {method} does not take a Laplacian"
        ))),
        (_, None) => Ok(None),
    }
}

fn check_factor_shapes(z: &ComplexMatrix, w: &ComplexMatrix, v: &ComplexMatrix) -> Result<()> {
    if w.rows() != z.rows() || v.cols() != z.cols() || w.cols() != v.rows() {
        return Err(CmfError::ShapeMismatch {
            op: "factor objective",
            left_rows: w.rows(),
            left_cols: w.cols(),
            right_rows: v.rows(),
            right_cols: v.cols(),
        });
    }
    Ok(())
}

/// Objective value for the configured method; always real and nonnegative.
pub fn objective(
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    v: &ComplexMatrix,
    params: &SolverParams,
    l: Option<&ComplexMatrix>,
) -> Result<f64> {
    check_factor_shapes(z, w, v)?;
    let l = check_laplacian(params.method, z.cols(), l)?;
    let data = 0.5 * z.sub(&w.matmul(v)?)?.frob_norm_sq();
    let penalty = match params.method {
        Method::Cmf | Method::Nmf => 0.0,
        Method::SpaCmf => {
            params.alpha_sparse * v.as_slice().iter().map(|c| c.norm()).sum::<f64>()
        }
        Method::GraCmf => {
            params.lambda_graph * graph_penalty(v, l.expect("checked above"))?
        }
    };
    Ok(data + penalty)
}

/// Smoothed complex sign: `v / max(|v|, eps)`.
pub fn csign(v: Complex64, eps: f64) -> Complex64 {
    v / v.norm().max(eps)
}

/// Gradient of the objective with respect to `V`, under the identity
/// `d/dt f(V + tP)|_0 = Re Trace(G^H P)` for every perturbation `P`.
///
/// Closed forms: `W^H (W V - Z)`, plus `alpha * csign(V)` for SpaCMF and
/// `2 * lambda * V L` for GraCMF.
pub fn grad_v(
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    v: &ComplexMatrix,
    params: &SolverParams,
    l: Option<&ComplexMatrix>,
) -> Result<ComplexMatrix> {
    check_factor_shapes(z, w, v)?;
    let l = check_laplacian(params.method, z.cols(), l)?;
    if params.method == Method::Nmf {
        return Err(CmfError::InvalidParameter(
            "NMF uses multiplicative updates, not the Wirtinger gradient".into(),
        ));
    }
    let residual = w.matmul(v)?.sub(z)?;
    let mut g = w.hermitian().matmul(&residual)?;
    match params.method {
        Method::SpaCmf => {
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    g[(i, j)] += params.alpha_sparse * csign(v[(i, j)], params.eps_sign);
                }
            }
        }
        Method::GraCmf => {
            let vl = v.matmul(l.expect("checked above"))?;
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    g[(i, j)] += 2.0 * params.lambda_graph * vl[(i, j)];
                }
            }
        }
        Method::Cmf | Method::Nmf => {}
    }
    Ok(g)
}

/// Result of one backtracking gradient step on `V`.
#[derive(Debug, Clone)]
pub struct ArmijoStep {
    pub v: ComplexMatrix,
    pub objective: f64,
    /// Accepted step size; zero when the line search exhausted its halvings
    /// (stationary-point signal, `v` is returned unchanged).
    pub beta: f64,
}

/// One gradient step `V' = V - beta * G` with Armijo backtracking.
///
/// Starting from `beta0`, the step is halved until
/// `f(V') <= f(V) - sigma * beta * ||G||_F^2` or 30 halvings are spent; the
/// test always evaluates the true (possibly non-smooth) objective, so an
/// accepted step never increases it.
pub fn step_v_armijo(
    z: &ComplexMatrix,
    w: &ComplexMatrix,
    v: &ComplexMatrix,
    params: &SolverParams,
    l: Option<&ComplexMatrix>,
    beta0: f64,
) -> Result<ArmijoStep> {
    if !beta0.is_finite() || beta0 <= 0.0 {
        return Err(CmfError::InvalidParameter(format!(
            "initial step size must be positive and finite, got {beta0}"
        )));
    }
    let f0 = objective(z, w, v, params, l)?;
    let g = grad_v(z, w, v, params, l)?;
    let g_norm_sq = g.frob_norm_sq();
    let mut beta = beta0;
    for _ in 0..=ARMIJO_MAX_HALVINGS {
        let candidate = v.sub_scaled(beta, &g)?;
        let f = objective(z, w, &candidate, params, l)?;
        if f <= f0 - ARMIJO_SIGMA * beta * g_norm_sq {
            return Ok(ArmijoStep {
                v: candidate,
                objective: f,
                beta,
            });
        }
        beta *= 0.5;
    }
    Ok(ArmijoStep {
        v: v.clone(),
        objective: f0,
        beta: 0.0,
    })
}

/// Draws a factor matrix with real and imaginary parts uniform on
/// `[-0.5, 0.5]`, scaled by `1/sqrt(K)`.
fn init_complex_factor(rng: &mut ChaCha8Rng, rows: usize, cols: usize, k: usize) -> ComplexMatrix {
    let scale = 1.0 / (k as f64).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re = rng.gen_range(-0.5..=0.5);
        let im = rng.gen_range(-0.5..=0.5);
        Complex64::new(re * scale, im * scale)
    })
}

/// Factorizes `Z` with the configured method.
///
/// The complex methods alternate `inner_v_steps` Armijo gradient steps on `V`
/// with the exact update `W = Z * pinv(V)` until the relative objective
/// change drops below `tol_rel` or `max_outer` cycles have run. The NMF
/// method dispatches to the multiplicative-update baseline with the same
/// stopping rule. Runs are deterministic given `params.seed`.
pub fn factorize(
    z: &ComplexMatrix,
    params: &SolverParams,
    l: Option<&ComplexMatrix>,
) -> Result<FactorModel> {
    let (n, m) = (z.rows(), z.cols());
    params.validate(n, m)?;
    check_laplacian(params.method, m, l)?;
    if params.method == Method::Nmf {
        let (w, h, trace, converged) = nmf_run(
            z,
            params.k,
            params.max_outer,
            params.seed,
            Some(params.tol_rel),
        )?;
        return Ok(FactorModel {
            w,
            v: h,
            params: *params,
            objective_trace: trace,
            converged,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut w = init_complex_factor(&mut rng, n, params.k, params.k);
    let mut v = init_complex_factor(&mut rng, params.k, m, params.k);

    let f0 = objective(z, &w, &v, params, l)?;
    if !f0.is_finite() {
        return Err(CmfError::NonFiniteObjective {
            iteration: 0,
            value: f0,
        });
    }
    let mut trace = vec![f0];
    let mut beta_warm = 1.0;
    let mut converged = false;

    for outer in 1..=params.max_outer {
        for _ in 0..params.inner_v_steps {
            let step = step_v_armijo(z, &w, &v, params, l, beta_warm)?;
            v = step.v;
            if step.beta > 0.0 {
                beta_warm = 2.0 * step.beta;
            }
        }
        w = lstsq_w(z, &v)?;
        let f = objective(z, &w, &v, params, l)?;
        if !f.is_finite() {
            return Err(CmfError::NonFiniteObjective {
                iteration: outer,
                value: f,
            });
        }
        let prev = *trace.last().expect("trace is non-empty");
        trace.push(f);
        if (prev - f).abs() / trace[0].max(1e-12) < params.tol_rel {
            converged = true;
            break;
        }
    }

    Ok(FactorModel {
        w,
        v,
        params: *params,
        objective_trace: trace,
        converged,
    })
}

// ---- NMF baseline -------------------------------------------------------

fn real_nonneg_parts(x: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.rows() * x.cols());
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let z = x[(i, j)];
            if z.im != 0.0 || z.re < 0.0 {
                return Err(CmfError::NegativeEntry {
                    row: i,
                    col: j,
                    value: if z.im != 0.0 { z.im } else { z.re },
                });
            }
            out.push(z.re);
        }
    }
    Ok(out)
}

/// `C = A * B` for row-major real buffers.
fn rmul(a: &[f64], ar: usize, ac: usize, b: &[f64], bc: usize, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..ar {
        for p in 0..ac {
            let v = a[i * ac + p];
            let brow = &b[p * bc..(p + 1) * bc];
            let crow = &mut out[i * bc..(i + 1) * bc];
            for (c, bb) in crow.iter_mut().zip(brow) {
                *c += v * bb;
            }
        }
    }
}

/// `C = A^T * B` where `A` is `ar x ac` row-major.
fn rmul_ta(a: &[f64], ar: usize, ac: usize, b: &[f64], bc: usize, out: &mut [f64]) {
    out.fill(0.0);
    for p in 0..ar {
        for i in 0..ac {
            let v = a[p * ac + i];
            let brow = &b[p * bc..(p + 1) * bc];
            let crow = &mut out[i * bc..(i + 1) * bc];
            for (c, bb) in crow.iter_mut().zip(brow) {
                *c += v * bb;
            }
        }
    }
}

/// `C = A * B^T` where `B` is `br x bc` row-major and shares `bc` with `A`.
fn rmul_tb(a: &[f64], ar: usize, ac: usize, b: &[f64], br: usize, out: &mut [f64]) {
    for i in 0..ar {
        for j in 0..br {
            let mut s = 0.0;
            for p in 0..ac {
                s += a[i * ac + p] * b[j * ac + p];
            }
            out[i * br + j] = s;
        }
    }
}

fn residual_sq(x: &[f64], w: &[f64], h: &[f64], n: usize, k: usize, m: usize) -> f64 {
    let mut wh = vec![0.0; n * m];
    rmul(w, n, k, h, m, &mut wh);
    x.iter()
        .zip(&wh)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn nmf_run(
    x: &ComplexMatrix,
    k: usize,
    iters: usize,
    seed: u64,
    tol_rel: Option<f64>,
) -> Result<(ComplexMatrix, ComplexMatrix, Vec<f64>, bool)> {
    let (n, m) = (x.rows(), x.cols());
    if k == 0 || k > n.min(m) {
        return Err(CmfError::InvalidParameter(format!(
            "K = {k} must satisfy 1 <= K <= min({n}, {m})"
        )));
    }
    let xs = real_nonneg_parts(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..n * k).map(|_| rng.gen_range(0.01..=1.0)).collect();
    let mut h: Vec<f64> = (0..k * m).map(|_| rng.gen_range(0.01..=1.0)).collect();

    let f0 = 0.5 * residual_sq(&xs, &w, &h, n, k, m);
    let mut trace = vec![f0];
    let mut converged = false;

    let mut wt_x = vec![0.0; k * m];
    let mut gram_w = vec![0.0; k * k];
    let mut gram_w_h = vec![0.0; k * m];
    let mut x_ht = vec![0.0; n * k];
    let mut gram_h = vec![0.0; k * k];
    let mut w_gram_h = vec![0.0; n * k];

    for _ in 0..iters {
        // H <- H .* (W^T X) ./ (W^T W H + eps)
        rmul_ta(&w, n, k, &xs, m, &mut wt_x);
        rmul_ta(&w, n, k, &w, k, &mut gram_w);
        rmul(&gram_w, k, k, &h, m, &mut gram_w_h);
        for (hv, (num, den)) in h.iter_mut().zip(wt_x.iter().zip(&gram_w_h)) {
            *hv *= num / (den + NMF_EPS);
        }
        // W <- W .* (X H^T) ./ (W H H^T + eps)
        rmul_tb(&xs, n, m, &h, k, &mut x_ht);
        rmul_tb(&h, k, m, &h, k, &mut gram_h);
        rmul(&w, n, k, &gram_h, k, &mut w_gram_h);
        for (wv, (num, den)) in w.iter_mut().zip(x_ht.iter().zip(&w_gram_h)) {
            *wv *= num / (den + NMF_EPS);
        }

        let f = 0.5 * residual_sq(&xs, &w, &h, n, k, m);
        let prev = *trace.last().expect("trace is non-empty");
        trace.push(f);
        if let Some(tol) = tol_rel {
            if (prev - f).abs() / trace[0].max(1e-12) < tol {
                converged = true;
                break;
            }
        }
    }

    let w_mat = ComplexMatrix::from_real_fn(n, k, |i, j| w[i * k + j]);
    let h_mat = ComplexMatrix::from_real_fn(k, m, |i, j| h[i * m + j]);
    Ok((w_mat, h_mat, trace, converged))
}

/// Multiplicative-update NMF of Lee and Seung.
///
/// Runs exactly `iters` sweeps of
/// `H <- H .* (W^T X) ./ (W^T W H + eps)` followed by
/// `W <- W .* (X H^T) ./ (W H H^T + eps)` with `eps = 1e-9`; the squared
/// residual `||X - W H||_F^2` is non-increasing per sweep up to that guard.
pub fn nmf_baseline(
    x: &ComplexMatrix,
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (w, h, _, _) = nmf_run(x, k, iters, seed, None)?;
    Ok((w, h))
}

/// Per-sweep squared-residual trace of the multiplicative updates, exposed
/// for monotonicity checks (`||X - W H||_F^2`, including the initial value).
pub fn nmf_residual_trace(x: &ComplexMatrix, k: usize, iters: usize, seed: u64) -> Result<Vec<f64>> {
    let (_, _, trace, _) = nmf_run(x, k, iters, seed, None)?;
    Ok(trace.into_iter().map(|f| 2.0 * f).collect())
}

// ---- Persistence --------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ModelMeta {
    method: Method,
    #[serde(rename = "K")]
    k: usize,
    alpha: f64,
    lambda: f64,
    seed: u64,
    converged: bool,
    trace: Vec<f64>,
}

impl FactorModel {
    /// Persists the model as a directory holding `W.cmfmat`, `V.cmfmat` and
    /// `meta.json`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.w.save_cmfmat(&dir.join("W.cmfmat"))?;
        self.v.save_cmfmat(&dir.join("V.cmfmat"))?;
        let meta = ModelMeta {
            method: self.params.method,
            k: self.params.k,
            alpha: self.params.alpha_sparse,
            lambda: self.params.lambda_graph,
            seed: self.params.seed,
            converged: self.converged,
            trace: self.objective_trace.clone(),
        };
        let json = serde_json::to_string_pretty(&meta)
            .map_err(|e| CmfError::Meta(e.to_string()))?;
        std::fs::write(dir.join("meta.json"), json)?;
        Ok(())
    }

    /// Loads a model directory written by [`FactorModel::save_dir`].
    ///
    /// Loop-control parameters not recorded in `meta.json` come back at
    /// their defaults.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let w = ComplexMatrix::load_cmfmat(&dir.join("W.cmfmat"))?;
        let v = ComplexMatrix::load_cmfmat(&dir.join("V.cmfmat"))?;
        let json = std::fs::read_to_string(dir.join("meta.json"))?;
        let meta: ModelMeta =
            serde_json::from_str(&json).map_err(|e| CmfError::Meta(e.to_string()))?;
        if meta.trace.is_empty() {
            return Err(CmfError::Meta("trace must be non-empty".into()));
        }
        let mut params = SolverParams::new(meta.method, meta.k);
        params.alpha_sparse = meta.alpha;
        params.lambda_graph = meta.lambda;
        params.seed = meta.seed;
        Ok(FactorModel {
            w,
            v,
            params,
            objective_trace: meta.trace,
            converged: meta.converged,
        })
    }
}
