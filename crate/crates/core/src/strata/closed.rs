use nalgebra::DMatrix;

use crate::geom::Point;
use crate::group::{normalizer, FiniteGroup, GroupElement};

use super::{restrict_linear, OrbifoldModel, StrataError, Stratification, StratumComponent};

/// `N_{Γ_x}(Γ_S)/Γ_S` at one frontier point.
#[derive(Debug, Clone)]
pub struct EffectiveGroup {
    pub point: Point,
    pub normalizer: FiniteGroup,
    pub order: usize,
    /// One normaliser element per coset of `Γ_S`.
    pub coset_representatives: Vec<GroupElement>,
    /// Action of each coset on the tangent space of the stratum, in the
    /// basis of `upstairs_fixed`.
    pub action: Vec<DMatrix<f64>>,
}

/// Data of the closed stratum `cl(S)` as a compact orbifold.
#[derive(Debug, Clone)]
pub struct ClosedStratumOrbifold {
    pub component: StratumComponent,
    /// `Γ_S`, acting trivially on the stratum.
    pub kernel: FiniteGroup,
    pub frontier_effective_groups: Vec<EffectiveGroup>,
    pub is_manifold: bool,
}

/// Closed-stratum data for component `id`, which must have the smallest
/// positive singular dimension in the model.
pub fn closed_stratum(strat: &Stratification, id: usize) -> Result<ClosedStratumOrbifold, StrataError> {
    let s = strat.component(id)?;
    let min_positive = strat
        .components
        .iter()
        .map(|c| c.k)
        .filter(|&k| k > 0)
        .min()
        .unwrap_or(0);
    if s.k == 0 || s.k != min_positive {
        return Err(StrataError::Hypothesis(format!(
            "component {id} has singular dimension {}, the smallest positive one is {min_positive}",
            s.k
        )));
    }
    if s.k >= 2 && strat.by_k(1).next().is_some() {
        return Err(StrataError::Hypothesis("Σ₁ is not empty".into()));
    }
    let mut groups = Vec::with_capacity(s.frontier.len());
    for fp in &s.frontier {
        let norm = normalizer(&fp.isotropy, &s.isotropy)?;
        let mut reps: Vec<GroupElement> = Vec::new();
        for e in norm.elements() {
            let fresh = reps.iter().all(|r| {
                let q = r.inverse().mul(e);
                !s.isotropy.contains(&q.isometry)
            });
            if fresh {
                reps.push(e.clone());
            }
        }
        let action = reps.iter().map(|r| restrict_linear(&r.isometry, &s.upstairs_fixed)).collect();
        debug_assert!(reps.len() * s.isotropy.order() == norm.order());
        groups.push(EffectiveGroup {
            point: fp.point.clone(),
            order: norm.order() / s.isotropy.order(),
            normalizer: norm,
            coset_representatives: reps,
            action,
        });
    }
    let is_manifold = groups.iter().all(|g| g.order == 1);
    Ok(ClosedStratumOrbifold {
        component: s.clone(),
        kernel: s.isotropy.clone(),
        frontier_effective_groups: groups,
        is_manifold,
    })
}

/// How a one-dimensional component behaves at a frontier point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierBehavior {
    /// Some isotropy element reverses the direction of the component.
    End,
    /// The line continues straight into this component.
    ExtendsInto(usize),
}

/// Classifies the frontier point `x` (upstairs point or its box image) of the
/// one-dimensional component `id`.
pub fn analyze_frontier_sigma1(
    model: &OrbifoldModel,
    strat: &Stratification,
    id: usize,
    x: &Point,
) -> Result<FrontierBehavior, StrataError> {
    let tol = model.tol();
    let s = strat.component(id)?;
    if s.k != 1 {
        return Err(StrataError::Hypothesis(format!("component {id} has singular dimension {}", s.k)));
    }
    let fp = s
        .frontier
        .iter()
        .find(|f| (&f.point - x).norm() <= tol || (&f.box_point - x).norm() <= tol)
        .ok_or(StrataError::NotFrontier(id))?;
    let v = fp.inward.as_ref().ok_or(StrataError::NotFrontier(id))?;
    let eps = 0.25 * s.segment_length().unwrap_or(1.0).min(1.0);
    if strat.locate(model, &(&fp.point + v * eps))? != id {
        return Err(StrataError::NotFrontier(id));
    }
    frontier_behavior(model, strat, &fp.point, v, &fp.isotropy, eps)
}

/// End/extends decision at `x` for a line leaving `x` in direction `v`.
pub(crate) fn frontier_behavior(
    model: &OrbifoldModel,
    strat: &Stratification,
    x: &Point,
    v: &Point,
    isotropy: &FiniteGroup,
    eps: f64,
) -> Result<FrontierBehavior, StrataError> {
    let tol = model.tol();
    if reversing_element(isotropy, v, tol).is_some() {
        return Ok(FrontierBehavior::End);
    }
    Ok(FrontierBehavior::ExtendsInto(strat.locate(model, &(x - v * eps))?))
}

/// An element of `h` whose linear part sends `v` to `-v`.
pub(crate) fn reversing_element<'a>(h: &'a FiniteGroup, v: &Point, tol: f64) -> Option<&'a GroupElement> {
    h.elements()
        .iter()
        .find(|e| (e.isometry.apply_vector(v) + v).norm() <= tol)
}
