use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::geom::IsometryKind;
use crate::group::GroupElement;
use crate::strata::{OrbifoldModel, Stratification};

use super::construct::nearest_mover;
use super::{
    from_closed_component, from_even_isotropy, from_hyperbolic, from_odd_stratum, from_sigma1, is_closed,
    ClosednessReport, GeodesicError, GeodesicPair, Sigma1Kind,
};

/// The constructions tried by [`existence_dispatch`], in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    HyperbolicElement,
    Sigma1,
    ClosedComponent,
    EvenIsotropyPoint,
    OddStratumReduction,
    OpenCase,
}

impl Strategy {
    pub const ORDER: [Strategy; 5] = [
        Strategy::HyperbolicElement,
        Strategy::Sigma1,
        Strategy::ClosedComponent,
        Strategy::EvenIsotropyPoint,
        Strategy::OddStratumReduction,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Strategy::HyperbolicElement => "hyperbolic",
            Strategy::Sigma1 => "sigma1",
            Strategy::ClosedComponent => "closed-component",
            Strategy::EvenIsotropyPoint => "even-isotropy",
            Strategy::OddStratumReduction => "odd-stratum",
            Strategy::OpenCase => "open-case",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ORDER
            .into_iter()
            .find(|st| st.slug() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct DispatchConfig {
    pub disabled: Vec<Strategy>,
    /// Longest word searched for a hyperbolic element.
    pub hyperbolic_word_length: usize,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        Self {
            disabled: Vec::new(),
            hyperbolic_word_length: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExistenceOutcome {
    pub strategy: Strategy,
    pub geodesic: Option<GeodesicPair>,
    pub report: Option<ClosednessReport>,
    /// What was built, or why nothing was.
    pub detail: String,
    /// Strategies tried before the successful one, with the reason each gave up.
    pub skipped: Vec<(Strategy, String)>,
}

/// Hyperbolic element of smallest translation length among the generators,
/// then among all words up to `word_length`.
fn shortest_hyperbolic(model: &OrbifoldModel, word_length: usize) -> Result<Option<GroupElement>, GeodesicError> {
    let tol = model.tol();
    let group = model.group();
    let pick = |cands: Vec<GroupElement>| {
        cands
            .into_iter()
            .filter(|g| g.isometry.classify(tol) == IsometryKind::Hyperbolic)
            .map(|g| (g.isometry.min_displacement(tol).value, g))
            .min_by(|(a, ga), (b, gb)| {
                if (a - b).abs() > tol {
                    a.total_cmp(b)
                } else {
                    ga.word.len().cmp(&gb.word.len())
                }
            })
            .map(|(_, g)| g)
    };
    let gens: Vec<GroupElement> = (0..group.generators().len()).map(|i| group.generator_element(i)).collect();
    if let Some(g) = pick(gens) {
        return Ok(Some(g));
    }
    Ok(pick(group.words_up_to(word_length)?))
}

fn outcome(strategy: Strategy, pair: GeodesicPair, tol: f64, detail: String) -> ExistenceOutcome {
    let report = is_closed(&pair, tol);
    ExistenceOutcome {
        strategy,
        geodesic: Some(pair),
        report: Some(report),
        detail,
        skipped: Vec::new(),
    }
}

/// Runs one named construction with its default choices. A failed
/// precondition is an error.
pub fn run_strategy(
    model: &OrbifoldModel,
    strat: &Stratification,
    strategy: Strategy,
    config: &DispatchConfig,
) -> Result<ExistenceOutcome, GeodesicError> {
    let tol = model.tol();
    let n = model.dimension();
    match strategy {
        Strategy::HyperbolicElement => {
            let g = shortest_hyperbolic(model, config.hyperbolic_word_length)?.ok_or_else(|| {
                GeodesicError::Precondition(format!(
                    "no hyperbolic element among words of length ≤ {}",
                    config.hyperbolic_word_length
                ))
            })?;
            let detail = format!("axis of the hyperbolic element {}", crate::group::format_word(&g.word));
            Ok(outcome(strategy, from_hyperbolic(model, &g)?, tol, detail))
        }
        Strategy::Sigma1 => {
            let mut first = None;
            for c in strat.by_k(1) {
                let g = from_sigma1(model, strat, c.id)?;
                let detail = match &g.kind {
                    Sigma1Kind::Doubled { prolonged_length } => format!(
                        "component {} prolonged to length {prolonged_length} and doubled",
                        c.id
                    ),
                    Sigma1Kind::Loop => format!("prolongation of component {} closes into a circle", c.id),
                    Sigma1Kind::Closed => format!("component {} is closed", c.id),
                };
                if matches!(g.kind, Sigma1Kind::Doubled { .. }) {
                    return Ok(outcome(strategy, g.pair, tol, detail));
                }
                first.get_or_insert((g.pair, detail));
            }
            let (pair, detail) = first.ok_or_else(|| GeodesicError::Precondition("Σ₁ is empty".into()))?;
            Ok(outcome(strategy, pair, tol, detail))
        }
        Strategy::ClosedComponent => {
            let c = strat
                .components
                .iter()
                .find(|c| c.k >= 1 && c.is_closed)
                .ok_or_else(|| GeodesicError::Precondition("no closed component of positive dimension".into()))?;
            let detail = format!("shortest translation along closed component {} (k = {})", c.id, c.k);
            Ok(outcome(strategy, from_closed_component(model, c)?, tol, detail))
        }
        Strategy::EvenIsotropyPoint => {
            let minus = -nalgebra::DMatrix::<f64>::identity(n, n);
            for c in strat.by_k(0) {
                let x = &c.representative;
                let gamma = c
                    .isotropy
                    .elements()
                    .iter()
                    .find(|g| (g.isometry.linear() - &minus).amax() <= tol);
                let Some(gamma) = gamma else { continue };
                let delta = nearest_mover(model, x, |_| true)?;
                let (pair, _) = from_even_isotropy(model, x, gamma, &delta)?;
                let detail = format!(
                    "doubling through singular point {:?} (isotropy order {})",
                    x.as_slice(),
                    c.isotropy.order()
                );
                return Ok(outcome(strategy, pair, tol, detail));
            }
            Err(GeodesicError::Precondition(
                "no isolated singular point whose isotropy contains −I".into(),
            ))
        }
        Strategy::OddStratumReduction => {
            let k = strat
                .singular()
                .map(|c| c.k)
                .filter(|&k| k > 0)
                .min()
                .ok_or_else(|| GeodesicError::Precondition("no singular stratum of positive dimension".into()))?;
            let mut last = None;
            for c in strat.by_k(k) {
                match from_odd_stratum(model, strat, c.id) {
                    Ok(pair) => {
                        let detail = format!("reduction to the closure of component {} (k = {k})", c.id);
                        return Ok(outcome(strategy, pair, tol, detail));
                    }
                    Err(e) => last = Some(e),
                }
            }
            Err(last.unwrap_or_else(|| GeodesicError::Precondition("stratum is empty".into())))
        }
        Strategy::OpenCase => Err(GeodesicError::Precondition("the open case is not a construction".into())),
    }
}

fn open_case_explanation(model: &OrbifoldModel, strat: &Stratification) -> String {
    let n = model.dimension();
    let only_points = strat.singular().all(|c| c.k == 0) && !strat.is_singular_empty();
    let all_odd = strat.by_k(0).all(|c| c.isotropy.order() % 2 == 1);
    if n.is_multiple_of(2) && only_points && all_odd {
        "even dimension, singular locus made of isolated points of odd isotropy, and no hyperbolic element \
         found: existence of a closed geodesic is not settled by these constructions"
            .into()
    } else {
        "no enabled construction applies".into()
    }
}

/// Tries the constructions in [`Strategy::ORDER`] and returns the first
/// verified geodesic, or the open case.
pub fn existence_dispatch(model: &OrbifoldModel, strat: &Stratification, config: &DispatchConfig) -> ExistenceOutcome {
    let mut skipped = Vec::new();
    for strategy in Strategy::ORDER {
        if config.disabled.contains(&strategy) {
            skipped.push((strategy, "disabled".to_string()));
            continue;
        }
        match run_strategy(model, strat, strategy, config) {
            Ok(mut out) if out.report.is_some_and(|r| r.is_closed) => {
                out.skipped = skipped;
                return out;
            }
            Ok(_) => skipped.push((strategy, "result failed verification".to_string())),
            Err(e) => skipped.push((strategy, e.to_string())),
        }
    }
    ExistenceOutcome {
        strategy: Strategy::OpenCase,
        geodesic: None,
        report: None,
        detail: open_case_explanation(model, strat),
        skipped,
    }
}
