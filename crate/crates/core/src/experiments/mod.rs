//! Monte Carlo replication of the simulation studies: simulate many seeded
//! histories, fit each, and summarize the estimates.

mod normality;
mod summary;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bo::bo_mle;
use crate::error::{Error, Result};
use crate::graph::{BoDomain, HpamParams};
use crate::hpam::{gamma_mle, Denominator};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sim::{sample_bo, sample_hpam};

pub use normality::{normality_diagnostic, NormalityReport, MIN_ESTIMATES};
pub use summary::{
    describe, read_raw_csv, summarize, write_raw_csv, write_summary_csv, RawEstimate, SummaryRow,
};

pub const RAW_FILE: &str = "raw_estimates.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentModel {
    Bo,
    Hpam,
}

/// True parameters: a list of `a0` values for the Buckley-Osthus model, or
/// one `(π, γ)` pair for the hierarchical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrueParams {
    Bo { a0: Vec<f64> },
    Hpam { pi: Vec<f64>, gamma: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ExperimentModel,
    pub true_params: TrueParams,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    /// Directory receiving `raw_estimates.csv` and `summary.csv`.
    pub output_path: PathBuf,
    /// BO search domain; defaults to `[1e-3, 100]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    /// HPAM denominator convention; defaults to exact.
    #[serde(default)]
    pub denominator: Denominator,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err("$", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(config_err("replications", "must be at least 1"));
        }
        if self.sample_sizes.is_empty() {
            return Err(config_err("sample_sizes", "must not be empty"));
        }
        if self.sample_sizes[0] < 2 {
            return Err(config_err("sample_sizes", "every size must be at least 2"));
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("sample_sizes", "must be strictly increasing"));
        }
        match (&self.model, &self.true_params) {
            (ExperimentModel::Bo, TrueParams::Bo { a0 }) => {
                if a0.is_empty() {
                    return Err(config_err("true_params.a0", "must not be empty"));
                }
                if let Some(i) = a0.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
                    return Err(config_err(
                        &format!("true_params.a0[{i}]"),
                        "must be positive",
                    ));
                }
                let d = self.bo_domain()?;
                if let Some(i) = a0.iter().position(|&a| !d.contains(a)) {
                    return Err(config_err(
                        &format!("true_params.a0[{i}]"),
                        "must lie inside the search domain",
                    ));
                }
            }
            (ExperimentModel::Hpam, TrueParams::Hpam { .. }) => {
                self.hpam_params()?;
            }
            _ => {
                return Err(config_err(
                    "true_params",
                    "does not match the model (bo needs a0, hpam needs pi and gamma)",
                ))
            }
        }
        Ok(())
    }

    pub fn bo_domain(&self) -> Result<BoDomain> {
        match self.domain {
            None => Ok(BoDomain::default()),
            Some([eps, max]) => {
                BoDomain::new(eps, max).map_err(|e| config_err("domain", e.to_string()))
            }
        }
    }

    pub fn hpam_params(&self) -> Result<HpamParams> {
        match &self.true_params {
            TrueParams::Hpam { pi, gamma } => HpamParams::new(pi.clone(), gamma.clone())
                .map_err(|e| config_err("true_params", e.to_string())),
            TrueParams::Bo { .. } => Err(config_err("true_params", "expected pi and gamma")),
        }
    }
}

/// Raw estimates and their summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub raw: Vec<RawEstimate>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutput {
    pub fn raw_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_raw_csv(&mut buf, &self.raw)?;
        Ok(buf)
    }

    pub fn summary_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &self.summary)?;
        Ok(buf)
    }
}

/// Runs whichever study `config` describes.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.model {
        ExperimentModel::Bo => run_bo_experiment(config),
        ExperimentModel::Hpam => run_hpam_experiment(config),
    }
}

/// Seeds are derived per `(a0 index, n, replication)`, so rows do not
/// depend on scheduling.
pub fn run_bo_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let TrueParams::Bo { a0 } = &config.true_params else {
        return Err(config_err("true_params", "expected a0"));
    };
    let domain = config.bo_domain()?;
    let mut raw = Vec::new();
    for (ai, &a) in a0.iter().enumerate() {
        let tag = format!("bo:{ai}");
        for &n in &config.sample_sizes {
            let rows: Vec<RawEstimate> = (0..config.replications)
                .into_par_iter()
                .map(|r| {
                    let mut rng =
                        rng_from_seed(derive_seed(config.base_seed, &tag, n as u64, r as u64));
                    let h = sample_bo(n, a, &mut rng);
                    let (value, converged) = match bo_mle(&h.degree_counts(), domain) {
                        Ok(fit) => (fit.a_hat, fit.converged),
                        Err(e) => {
                            log::warn!("n = {n}, replication {r}: {e}");
                            (f64::NAN, false)
                        }
                    };
                    RawEstimate {
                        n,
                        replication: r,
                        parameter: "a".into(),
                        value,
                        true_value: a,
                        converged,
                    }
                })
                .collect();
            raw.extend(rows);
        }
    }
    let summary = summarize(&raw);
    Ok(ExperimentOutput { raw, summary })
}

/// Parameter names in the order they are reported: `pi1..piK`, then the
/// upper triangle of `γ` without the pinned `γ11`.
pub fn hpam_parameter_names(k: usize) -> Vec<String> {
    let sep = if k > 9 { "_" } else { "" };
    let mut names: Vec<String> = (1..=k).map(|j| format!("pi{j}")).collect();
    for i in 1..=k {
        for j in i..=k {
            if (i, j) != (1, 1) {
                names.push(format!("gamma{i}{sep}{j}"));
            }
        }
    }
    names
}

pub fn run_hpam_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let params = config.hpam_params()?;
    let k = params.k();
    let names = hpam_parameter_names(k);
    let mut truth: Vec<f64> = params.pi().to_vec();
    for i in 0..k {
        for j in i..k {
            if (i, j) != (0, 0) {
                truth.push(params.gamma(i, j));
            }
        }
    }
    let init = HpamParams::uniform(k);
    let mut raw = Vec::new();
    for &n in &config.sample_sizes {
        let rows: Vec<Vec<RawEstimate>> = (0..config.replications)
            .into_par_iter()
            .map(|r| {
                let mut rng =
                    rng_from_seed(derive_seed(config.base_seed, "hpam", n as u64, r as u64));
                let h = sample_hpam(n, &params, &mut rng);
                let stats = h.community_stats().expect("sampler output is labeled");
                let (values, gamma_ok) = match gamma_mle(&stats, &init, config.denominator) {
                    Ok(fit) => {
                        let mut v = fit.pi_hat.clone();
                        for i in 0..k {
                            for j in i..k {
                                if (i, j) != (0, 0) {
                                    v.push(fit.gamma(i, j));
                                }
                            }
                        }
                        (v, fit.converged)
                    }
                    Err(e) => {
                        log::warn!("n = {n}, replication {r}: {e}");
                        let mut v = crate::hpam::pi_mle(&stats);
                        v.resize(names.len(), f64::NAN);
                        (v, false)
                    }
                };
                names
                    .iter()
                    .zip(values)
                    .zip(&truth)
                    .enumerate()
                    .map(|(idx, ((name, value), &true_value))| RawEstimate {
                        n,
                        replication: r,
                        parameter: name.clone(),
                        value,
                        true_value,
                        converged: idx < k || gamma_ok,
                    })
                    .collect()
            })
            .collect();
        raw.extend(rows.into_iter().flatten());
    }
    let summary = summarize(&raw);
    Ok(ExperimentOutput { raw, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bo_config(a0: Vec<f64>, sizes: Vec<usize>, r: usize) -> ExperimentConfig {
        ExperimentConfig {
            model: ExperimentModel::Bo,
            true_params: TrueParams::Bo { a0 },
            sample_sizes: sizes,
            replications: r,
            base_seed: 42,
            output_path: "out".into(),
            domain: None,
            denominator: Denominator::Exact,
        }
    }

    #[test]
    fn config_parses_and_validates() {
        let text = r#"{"model":"bo","true_params":{"a0":[0.5,1.0]},"sample_sizes":[100,200],
                       "replications":3,"base_seed":1,"output_path":"x"}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.sample_sizes, vec![100, 200]);
        let bad = text.replace("[100,200]", "[200,100]");
        match ExperimentConfig::from_json(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "sample_sizes"),
            other => panic!("{other:?}"),
        }
        let mismatch = text.replace("\"bo\"", "\"hpam\"");
        assert!(matches!(
            ExperimentConfig::from_json(&mismatch),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = bo_config(vec![1.0], vec![50, 100], 8);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.raw_csv().unwrap(), b.raw_csv().unwrap());
        assert_eq!(a.summary.len(), 2);
    }

    #[test]
    fn single_replication_has_zero_std() {
        let out = run_experiment(&bo_config(vec![1.0], vec![50], 1)).unwrap();
        assert_eq!(out.summary[0].std, 0.0);
        assert_eq!(out.summary[0].count, 1);
    }

    #[test]
    fn hpam_pi_estimates_are_complementary() {
        let cfg = ExperimentConfig {
            model: ExperimentModel::Hpam,
            true_params: TrueParams::Hpam {
                pi: vec![0.3, 0.7],
                gamma: vec![1.0, 0.5, 0.5, 1.5],
            },
            ..bo_config(vec![], vec![200], 6)
        };
        let out = run_experiment(&cfg).unwrap();
        for r in 0..6 {
            let get = |p: &str| {
                out.raw
                    .iter()
                    .find(|e| e.replication == r && e.parameter == p)
                    .unwrap()
                    .value
            };
            assert!((get("pi1") + get("pi2") - 1.0).abs() < 1e-15);
        }
        let std = |p: &str| out.summary.iter().find(|s| s.parameter == p).unwrap().std;
        assert!((std("pi1") - std("pi2")).abs() < 1e-12);
        let names: Vec<&str> = out.summary.iter().map(|s| s.parameter.as_str()).collect();
        assert_eq!(names, ["pi1", "pi2", "gamma12", "gamma22"]);
    }
}
