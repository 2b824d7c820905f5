//! JSON shapes for trigonometric polynomials and perturbations.

use std::path::Path;

use circle_core::maps::Perturbation;
use circle_core::{Complex64, TrigPoly};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// `{ "N", "coeffs": [[re, im], ...] for k = −N..N, "s", "real" }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolyJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<[f64; 2]>,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_real")]
    pub real: bool,
}

fn default_real() -> bool {
    true
}

impl TrigPolyJson {
    pub fn to_poly(&self) -> Result<TrigPoly, LabError> {
        if self.coeffs.len() != 2 * self.n + 1 {
            return Err(LabError::Config(format!(
                "trigpoly with N = {} needs {} coefficients, got {}",
                self.n,
                2 * self.n + 1,
                self.coeffs.len()
            )));
        }
        if self.coeffs.iter().flatten().any(|c| !c.is_finite()) || !(self.s >= 0.0) {
            return Err(LabError::Config("trigpoly coefficients and width must be finite".into()));
        }
        let c = self.coeffs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Ok(TrigPoly::from_coeffs(c, self.s, self.real)?)
    }
}

impl From<&TrigPoly> for TrigPolyJson {
    fn from(p: &TrigPoly) -> Self {
        TrigPolyJson {
            n: p.order(),
            coeffs: p.coeffs().iter().map(|c| [c.re, c.im]).collect(),
            s: p.width(),
            real: p.is_real(),
        }
    }
}

/// `{ "f": [[j, trigpoly], ...], "g": [...] }`; entry `j` multiplies `ρ^j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationJson {
    #[serde(default)]
    pub f: Vec<(usize, TrigPolyJson)>,
    #[serde(default)]
    pub g: Vec<(usize, TrigPolyJson)>,
}

impl PerturbationJson {
    pub fn to_perturbation(&self) -> Result<Perturbation, LabError> {
        let conv = |v: &[(usize, TrigPolyJson)]| -> Result<Vec<(usize, TrigPoly)>, LabError> {
            v.iter()
                .map(|(j, p)| {
                    let poly = p.to_poly()?;
                    if !poly.is_real() {
                        return Err(LabError::Config("perturbation terms must be real".into()));
                    }
                    Ok((*j, poly))
                })
                .collect()
        };
        Ok(Perturbation::new(&conv(&self.f)?, &conv(&self.g)?))
    }

    pub fn load(path: &Path) -> Result<PerturbationJson, LabError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl From<&Perturbation> for PerturbationJson {
    fn from(p: &Perturbation) -> Self {
        let conv = |e: Vec<(usize, TrigPoly)>| e.iter().map(|(j, t)| (*j, TrigPolyJson::from(t))).collect();
        PerturbationJson { f: conv(p.f.entries()), g: conv(p.g.entries()) }
    }
}
