use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::geodesic::{existence_dispatch, run_strategy, DispatchConfig, ExistenceOutcome, Strategy};
use crate::strata::{stratify, OrbifoldModel, Stratification};

use super::report::{component_rows, geodesic_section, polylines_csv, svg_overview, Report};
use super::ScenarioError;

/// `auto` runs the dispatcher; a name forces one construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    Auto,
    Named(Strategy),
}

impl FromStr for StrategyChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            Ok(StrategyChoice::Auto)
        } else {
            s.parse().map(StrategyChoice::Named)
        }
    }
}

#[derive(Debug, Clone)]
pub struct StratifyRun {
    pub stratification: Stratification,
    pub report: Report,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GeodesicRun {
    pub stratification: Stratification,
    pub outcome: ExistenceOutcome,
    pub report: Report,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| ScenarioError::io(&path, e))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Stratifies and, with `out`, writes `report.json`, `polylines.csv`
/// (`n ≤ 3`) and `overview.svg` (`n = 2`, when `svg` is set).
pub fn run_stratify(model: &OrbifoldModel, out: Option<&Path>, svg: bool) -> Result<StratifyRun, ScenarioError> {
    let t = Instant::now();
    let stratification = stratify(model).map_err(ScenarioError::from_strata)?;
    let mut report = Report::new(model);
    report.stratification = Some(component_rows(&stratification));
    report.timing.stratify_ms = Some(ms(t));
    let csv = polylines_csv(model, &stratification);
    let svg = if svg { svg_overview(model, &stratification) } else { None };
    if let Some(dir) = out {
        write(dir, "report.json", &report.to_json())?;
        if let Some(c) = &csv {
            write(dir, "polylines.csv", c)?;
        }
        if let Some(s) = &svg {
            write(dir, "overview.svg", s)?;
        }
    }
    Ok(StratifyRun {
        stratification,
        report,
        csv,
        svg,
    })
}

/// Stratifies, builds a closed geodesic and, with `out`, writes `report.json`.
/// A forced strategy whose preconditions fail is an error; the open case is not.
pub fn run_geodesic(
    model: &OrbifoldModel,
    choice: StrategyChoice,
    config: &DispatchConfig,
    out: Option<&Path>,
) -> Result<GeodesicRun, ScenarioError> {
    let t = Instant::now();
    let stratification = stratify(model).map_err(ScenarioError::from_strata)?;
    let stratify_ms = ms(t);
    let t = Instant::now();
    let outcome = match choice {
        StrategyChoice::Auto => existence_dispatch(model, &stratification, config),
        StrategyChoice::Named(s) => run_strategy(model, &stratification, s, config)?,
    };
    let mut report = Report::new(model);
    report.stratification = Some(component_rows(&stratification));
    report.existence = Some(geodesic_section(&outcome, model.tol()));
    report.timing.stratify_ms = Some(stratify_ms);
    report.timing.geodesic_ms = Some(ms(t));
    if let Some(dir) = out {
        write(dir, "report.json", &report.to_json())?;
    }
    Ok(GeodesicRun {
        stratification,
        outcome,
        report,
    })
}
