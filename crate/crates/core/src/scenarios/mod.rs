//! Model files, the built-in catalog, pipelines and report serialization.

mod catalog;
mod model_file;
mod pipeline;
mod report;

use thiserror::Error;

use crate::geodesic::GeodesicError;
use crate::strata::StrataError;

pub use catalog::{emit_example, example_names, load_example, EXAMPLES};
pub use model_file::{
    load_model, parse_model, BoxSpec, EnumerationSpec, GeneratorSpec, ModelFile, TOL_ENV,
};
pub use pipeline::{run_geodesic, run_stratify, GeodesicRun, StrategyChoice, StratifyRun};
pub use report::{
    component_rows, geodesic_section, polylines_csv, svg_overview, ComponentRow, FrontierRow, GeodesicRecord,
    GeodesicSection, IsometryRecord, ModelSummary, ProperSummary, Report, SkippedStrategy, StratificationSection,
    Timing, REPORT_SCHEMA,
};

/// Process exit code for an open case.
pub const EXIT_OPEN_CASE: i32 = 10;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed ({invariant}): {message}")]
    Validation { invariant: &'static str, message: String },
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Precondition(String),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) | ScenarioError::UnknownExample(_) => 2,
            ScenarioError::Validation { .. } => 3,
            ScenarioError::Io { .. } => 4,
            ScenarioError::Precondition(_) => 5,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Maps a model construction failure to the invariant it violates.
    pub(crate) fn from_strata(err: StrataError) -> Self {
        use crate::geom::GeomError;
        use crate::group::GroupError;
        let invariant = match &err {
            StrataError::Geom(GeomError::NotOrthogonal { .. })
            | StrataError::Group(GroupError::Geom(GeomError::NotOrthogonal { .. })) => "orthogonality",
            StrataError::Geom(_) | StrataError::Group(GroupError::Geom(_)) => "geometry",
            StrataError::Group(GroupError::SingularLattice)
            | StrataError::Group(GroupError::LatticeNotInvariant { .. })
            | StrataError::Group(GroupError::LatticeTranslationMissing { .. }) => "lattice invariance",
            StrataError::Group(_) => "properness",
            StrataError::DegenerateBox | StrataError::WrongDimension { .. } => "fundamental box",
            StrataError::NotCovering { .. } => "box covering",
            _ => "model",
        };
        ScenarioError::Validation {
            invariant,
            message: err.to_string(),
        }
    }
}

impl From<GeodesicError> for ScenarioError {
    fn from(err: GeodesicError) -> Self {
        ScenarioError::Precondition(err.to_string())
    }
}
