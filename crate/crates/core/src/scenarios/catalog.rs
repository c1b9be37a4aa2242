use super::model_file::tol_from_env;
use super::{parse_model, ScenarioError};
use crate::strata::OrbifoldModel;

/// Built-in models, `(name, file contents)`.
pub const EXAMPLES: [(&str, &str); 5] = [
    ("torus2", include_str!("../../models/torus2.model")),
    ("pillowcase_p2", include_str!("../../models/pillowcase_p2.model")),
    ("wallpaper_p4", include_str!("../../models/wallpaper_p4.model")),
    ("hexagonal3d_d3", include_str!("../../models/hexagonal3d_d3.model")),
    ("kleinfour3d", include_str!("../../models/kleinfour3d.model")),
];

pub fn example_names() -> impl Iterator<Item = &'static str> {
    EXAMPLES.iter().map(|(name, _)| *name)
}

/// The exact bytes of a shipped model file.
pub fn emit_example(name: &str) -> Result<&'static str, ScenarioError> {
    EXAMPLES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| ScenarioError::UnknownExample(name.to_string()))
}

/// Parses and validates a shipped model, honouring `ORBISTRAT_TOL`.
pub fn load_example(name: &str) -> Result<OrbifoldModel, ScenarioError> {
    parse_model(emit_example(name)?)?.build(tol_from_env()?)
}
