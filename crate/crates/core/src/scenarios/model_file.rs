use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geom::{AxisBox, Isometry, Point, TOL};
use crate::group::{EnumerationLimits, GeneratedGroup};
use crate::strata::OrbifoldModel;

use super::ScenarioError;

/// Environment variable overriding the tolerance of every loaded model.
pub const TOL_ENV: &str = "ORBISTRAT_TOL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    /// Row-major `n·n` entries.
    pub linear: Vec<f64>,
    pub translation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerationSpec {
    pub max_word_length: usize,
    pub element_cap: usize,
}

impl Default for EnumerationSpec {
    fn default() -> Self {
        let d = EnumerationLimits::default();
        Self {
            max_word_length: d.max_word_length,
            element_cap: d.element_cap,
        }
    }
}

fn default_tol() -> f64 {
    TOL
}

/// On-disk description of a model `ℝⁿ/Γ` (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub label: String,
    pub dimension: usize,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_basis: Option<Vec<Vec<f64>>>,
    pub fundamental_box: BoxSpec,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default)]
    pub enumeration: EnumerationSpec,
}

fn shape_error(what: &str, expected: usize, found: usize) -> ScenarioError {
    ScenarioError::Validation {
        invariant: "dimension",
        message: format!("{what}: expected {expected} entries, found {found}"),
    }
}

impl ModelFile {
    /// Builds and validates the model. `tol_override` replaces `tolerance`.
    pub fn build(&self, tol_override: Option<f64>) -> Result<OrbifoldModel, ScenarioError> {
        let n = self.dimension;
        let tol = tol_override.unwrap_or(self.tolerance);
        if n == 0 {
            return Err(shape_error("dimension", 1, 0));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(ScenarioError::Validation {
                invariant: "tolerance",
                message: format!("tolerance must be positive, got {tol}"),
            });
        }
        let mut generators = Vec::with_capacity(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            if g.linear.len() != n * n {
                return Err(shape_error(&format!("generator {i} linear part"), n * n, g.linear.len()));
            }
            if g.translation.len() != n {
                return Err(shape_error(&format!("generator {i} translation"), n, g.translation.len()));
            }
            let iso = Isometry::from_row_major(n, &g.linear, &g.translation, tol).map_err(|e| {
                ScenarioError::from_strata(e.into()).with_context(&format!("generator {i}"))
            })?;
            generators.push(iso);
        }
        let lattice = match &self.lattice_basis {
            None => None,
            Some(rows) => {
                if rows.len() != n {
                    return Err(shape_error("lattice_basis", n, rows.len()));
                }
                let mut basis = Vec::with_capacity(n);
                for row in rows {
                    if row.len() != n {
                        return Err(shape_error("lattice_basis row", n, row.len()));
                    }
                    basis.push(Point::from_row_slice(row));
                }
                Some(basis)
            }
        };
        let b = &self.fundamental_box;
        if b.min.len() != n || b.max.len() != n {
            return Err(shape_error("fundamental_box", n, b.min.len().min(b.max.len())));
        }
        let limits = EnumerationLimits {
            max_word_length: self.enumeration.max_word_length,
            element_cap: self.enumeration.element_cap,
            ..EnumerationLimits::default()
        };
        let group = GeneratedGroup::new(n, generators, lattice, limits, tol)
            .map_err(|e| ScenarioError::from_strata(e.into()))?;
        let region = AxisBox::new(Point::from_row_slice(&b.min), Point::from_row_slice(&b.max))
            .map_err(|e| ScenarioError::from_strata(e.into()))?;
        OrbifoldModel::new(self.label.clone(), group, region).map_err(ScenarioError::from_strata)
    }
}

impl ScenarioError {
    fn with_context(self, ctx: &str) -> Self {
        match self {
            ScenarioError::Validation { invariant, message } => ScenarioError::Validation {
                invariant,
                message: format!("{ctx}: {message}"),
            },
            other => other,
        }
    }
}

/// Parses the JSON text of a model file without validating it.
pub fn parse_model(text: &str) -> Result<ModelFile, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
}

/// Tolerance from `ORBISTRAT_TOL`, if set.
pub(crate) fn tol_from_env() -> Result<Option<f64>, ScenarioError> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|e| ScenarioError::Parse(format!("{TOL_ENV}={s:?}: {e}"))),
        Err(_) => Ok(None),
    }
}

/// Reads, parses and validates a model file, honouring `ORBISTRAT_TOL`.
pub fn load_model(path: &Path) -> Result<OrbifoldModel, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    parse_model(&text)?.build(tol_from_env()?)
}
