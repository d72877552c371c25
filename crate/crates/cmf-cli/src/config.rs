//! Experiment configuration: JSON file keys mirror the field names, with the
//! dotted groups `transform.alpha`, `graph.k` and `solver.*` kept as literal
//! keys. Command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cmf_core::factor::Method;
use serde::{Deserialize, Serialize};

fn default_k() -> usize {
    20
}
fn default_n_train_list() -> Vec<usize> {
    vec![5]
}
fn default_occlusions() -> Vec<usize> {
    vec![0]
}
fn default_repeats() -> usize {
    10
}
fn default_alpha() -> f64 {
    cmf_core::transform::EulerParams::DEFAULT_ALPHA
}
fn default_graph_k() -> usize {
    cmf_core::graph::DEFAULT_K
}
fn default_alpha_sparse() -> f64 {
    0.1
}
fn default_lambda_graph() -> f64 {
    0.1
}
fn default_max_outer() -> usize {
    300
}
fn default_inner_v_steps() -> usize {
    5
}
fn default_tol_rel() -> f64 {
    1e-5
}
fn default_eps_sign() -> f64 {
    1e-9
}

/// Benchmark description: dataset, methods, protocol grid and solver knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root of an ORL-style PGM tree, or a `path,label` manifest file.
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    pub methods: Vec<Method>,
    #[serde(rename = "K", default = "default_k")]
    pub k: usize,
    #[serde(default = "default_n_train_list")]
    pub n_train_list: Vec<usize>,
    /// Patch edge lengths; `0` means no occlusion.
    #[serde(default = "default_occlusions")]
    pub occlusion_sizes: Vec<usize>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub base_seed: i64,
    #[serde(rename = "transform.alpha", default = "default_alpha")]
    pub transform_alpha: f64,
    #[serde(rename = "graph.k", default = "default_graph_k")]
    pub graph_k: usize,
    #[serde(rename = "solver.alpha_sparse", default = "default_alpha_sparse")]
    pub solver_alpha_sparse: f64,
    #[serde(rename = "solver.lambda_graph", default = "default_lambda_graph")]
    pub solver_lambda_graph: f64,
    #[serde(rename = "solver.max_outer", default = "default_max_outer")]
    pub solver_max_outer: usize,
    #[serde(rename = "solver.inner_v_steps", default = "default_inner_v_steps")]
    pub solver_inner_v_steps: usize,
    #[serde(rename = "solver.tol_rel", default = "default_tol_rel")]
    pub solver_tol_rel: f64,
    #[serde(rename = "solver.eps_sign", default = "default_eps_sign")]
    pub solver_eps_sign: f64,
    /// Optional `[height, width]` applied after occlusion, before splitting.
    #[serde(default)]
    pub resize: Option<[usize; 2]>,
    /// Intensity written into occlusion patches.
    #[serde(default)]
    pub occlusion_fill: u16,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset_path: None,
            methods: vec![Method::Cmf],
            k: default_k(),
            n_train_list: default_n_train_list(),
            occlusion_sizes: default_occlusions(),
            repeats: default_repeats(),
            base_seed: 0,
            transform_alpha: default_alpha(),
            graph_k: default_graph_k(),
            solver_alpha_sparse: default_alpha_sparse(),
            solver_lambda_graph: default_lambda_graph(),
            solver_max_outer: default_max_outer(),
            solver_inner_v_steps: default_inner_v_steps(),
            solver_tol_rel: default_tol_rel(),
            solver_eps_sign: default_eps_sign(),
            resize: None,
            occlusion_fill: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.methods.is_empty() {
            bail!("methods must not be empty");
        }
        if self.n_train_list.is_empty() || self.n_train_list.contains(&0) {
            bail!("n_train_list must hold positive entries");
        }
        if self.occlusion_sizes.is_empty() {
            bail!("occlusion_sizes must not be empty (use 0 for no occlusion)");
        }
        if self.repeats == 0 {
            bail!("repeats must be at least 1");
        }
        if self.k == 0 {
            bail!("K must be positive");
        }
        if !(self.transform_alpha > 0.0 && self.transform_alpha < 2.0) {
            bail!("transform.alpha must lie in (0, 2)");
        }
        if let Some([h, w]) = self.resize {
            if h == 0 || w == 0 {
                bail!("resize dimensions must be positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dotted_keys_and_defaults() {
        let json = r#"{
            "dataset_path": "/data/orl",
            "methods": ["CMF", "NMF"],
            "K": 20,
            "n_train_list": [5],
            "repeats": 2,
            "base_seed": 42,
            "transform.alpha": 1.5,
            "graph.k": 3,
            "solver.max_outer": 50
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.methods, vec![Method::Cmf, Method::Nmf]);
        assert_eq!(cfg.transform_alpha, 1.5);
        assert_eq!(cfg.graph_k, 3);
        assert_eq!(cfg.solver_max_outer, 50);
        assert_eq!(cfg.solver_tol_rel, 1e-5); // default
        assert_eq!(cfg.occlusion_sizes, vec![0]); // default
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let json = r#"{"methods": ["CMF"], "unknown.key": 1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(json).is_err());

        let cfg = ExperimentConfig {
            methods: vec![],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig {
            repeats: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
