//! Run configuration: parameters, α certificate and perturbation.

use std::path::{Path, PathBuf};

use circle_core::diophantine::{self, DEFAULT_CUTOFF_K};
use circle_core::graphflow::DEFAULT_ETA_CAP;
use circle_core::maps::{Params, Perturbation};
use circle_core::normalform::DEFAULT_C2;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::expr::eval_alpha;
use crate::formats::PerturbationJson;

/// A number or an expression such as `"golden"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Expr(String),
}

impl AlphaSpec {
    pub fn value(&self) -> Result<f64, LabError> {
        match self {
            AlphaSpec::Value(v) => Ok(*v),
            AlphaSpec::Expr(s) => eval_alpha(s),
        }
    }
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Expr("golden".into())
    }
}

/// JSON run configuration. Missing `nu` defaults to `alpha`; a missing
/// perturbation defaults to `f = sin θ`, `g = cos θ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub alpha: AlphaSpec,
    pub nu: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "K")]
    pub cutoff_k: Option<usize>,
    pub perturbation: Option<PerturbationJson>,
    pub perturbation_file: Option<PathBuf>,
    /// Lipschitz budget of the graph transform (default `η/6`).
    pub k: Option<f64>,
    pub grid: Option<usize>,
    pub eta_cap: Option<f64>,
    pub c2: Option<f64>,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub alpha: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunSetup {
    pub params: Params,
    pub pert: Perturbation,
    pub k: f64,
    pub grid: Option<usize>,
    pub eta_cap: f64,
    pub c2: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, LabError> {
        let mut cfg: RunConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if let (Some(file), Some(dir)) = (&cfg.perturbation_file, path.parent()) {
            if file.is_relative() {
                cfg.perturbation_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn resolve(&self, ov: &Overrides) -> Result<RunSetup, LabError> {
        let alpha = match &ov.alpha {
            Some(s) => eval_alpha(s)?,
            None => self.alpha.value()?,
        };
        let eta = ov.eta.or(self.eta).ok_or_else(|| LabError::Config("eta is required".into()))?;
        let dn = diophantine::certify(alpha, self.q.unwrap_or(1.0), self.cutoff_k.unwrap_or(DEFAULT_CUTOFF_K))?;
        let eps = ov.eps.or(self.eps).unwrap_or(0.0);
        let nu = ov.nu.or(self.nu).unwrap_or(alpha);
        let params = Params::new(nu, eta, eps, dn)?;
        let pert = load_perturbation(self.perturbation.as_ref(), self.perturbation_file.as_deref())?;
        Ok(RunSetup {
            params,
            pert,
            k: self.k.unwrap_or(eta / 6.0),
            grid: self.grid,
            eta_cap: self.eta_cap.unwrap_or(DEFAULT_ETA_CAP),
            c2: self.c2.unwrap_or(DEFAULT_C2),
        })
    }
}

pub fn load_perturbation(inline: Option<&PerturbationJson>, file: Option<&Path>) -> Result<Perturbation, LabError> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(LabError::Config("give either perturbation or perturbation_file".into())),
        (Some(p), None) => p.to_perturbation(),
        (None, Some(f)) => PerturbationJson::load(f)?.to_perturbation(),
        (None, None) => Ok(Perturbation::sin_cos()),
    }
}
