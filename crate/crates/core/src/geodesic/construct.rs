use crate::geom::{lex_cmp, AffineSubspace, GeodesicSegment, IsometryKind, Point};
use crate::group::GroupElement;
use crate::strata::{reversing_element, CellExtent, OrbifoldModel, Stratification, StratumComponent};

use super::{concatenate_smooth, verified, GeodesicError, GeodesicPair, GeodesicPathSequence};

/// Cells visited before a prolongation is declared runaway.
const MAX_TRACE_CELLS: usize = 64;
/// Radius escalation bound, in multiples of the box diameter.
const MAX_RADIUS_FACTOR: f64 = 64.0;

/// The closed geodesic along the axis of a hyperbolic `γ`: `x*` on the axis,
/// `c̃ = [x*, γ·x*]`, paired with `γ⁻¹`.
pub fn from_hyperbolic(model: &OrbifoldModel, gamma: &GroupElement) -> Result<GeodesicPair, GeodesicError> {
    let tol = model.tol();
    if gamma.isometry.classify(tol) != IsometryKind::Hyperbolic {
        return Err(GeodesicError::NotHyperbolic);
    }
    let axis = gamma.isometry.min_displacement(tol).axis;
    let x = axis.base_point().clone();
    let seg = GeodesicSegment::between(&x, &gamma.isometry.apply(&x));
    verified(GeodesicPair::new(seg, gamma.inverse()), tol)
}

/// Branches of the doubling construction through a point `x` with
/// `γ ∈ Γ_x` acting as `−1` along `[x, δ·x]`.
#[derive(Debug, Clone)]
pub enum EvenCase {
    /// `γδ·x = δ·x`; the doubled path closes with the identity.
    FixedImage,
    /// Otherwise it closes with `λ = δγδ⁻¹γ`.
    Lambda(GroupElement),
}

pub fn select_case(x: &Point, gamma: &GroupElement, delta: &GroupElement, tol: f64) -> EvenCase {
    let dx = delta.isometry.apply(x);
    if (gamma.isometry.apply(&dx) - &dx).norm() <= tol {
        EvenCase::FixedImage
    } else {
        EvenCase::Lambda(delta.mul(gamma).mul(&delta.inverse()).mul(gamma))
    }
}

/// `c̃′ = c̃⁻ * γc̃` with `c̃ = [x, δ·x]`, reparametrised onto `[0, 1]`, and the
/// closing element chosen by [`select_case`]. Not verified here.
pub fn double_through(
    x: &Point,
    gamma: &GroupElement,
    delta: &GroupElement,
    tol: f64,
) -> Result<(GeodesicPair, EvenCase), GeodesicError> {
    let c = GeodesicSegment::between(x, &delta.isometry.apply(x));
    let doubled = concatenate_smooth(&c.reverse(), &c.translate(&gamma.isometry), tol)?.reparametrized(0.0, 1.0)?;
    let case = select_case(x, gamma, delta, tol);
    let closing = match &case {
        EvenCase::FixedImage => GroupElement::identity(x.len()),
        EvenCase::Lambda(l) => l.clone(),
    };
    Ok((GeodesicPair::new(doubled, closing), case))
}

/// Doubling through an isolated singular point `x` whose isotropy contains
/// the inversion `γ` (linear part `−I`), with `δ ∉ Γ_x`.
pub fn from_even_isotropy(
    model: &OrbifoldModel,
    x: &Point,
    gamma: &GroupElement,
    delta: &GroupElement,
) -> Result<(GeodesicPair, EvenCase), GeodesicError> {
    let tol = model.tol();
    let n = model.dimension();
    if model.singular_dimension(x)? != 0 {
        return Err(GeodesicError::Precondition("x is not an isolated singular point".into()));
    }
    if gamma.isometry.displacement_at(x) > tol {
        return Err(GeodesicError::Precondition("γ does not fix x".into()));
    }
    let minus = -nalgebra::DMatrix::<f64>::identity(n, n);
    if (gamma.isometry.linear() - minus).amax() > tol {
        return Err(GeodesicError::Precondition("γ does not act as −I at x".into()));
    }
    if delta.isometry.displacement_at(x) <= tol {
        return Err(GeodesicError::Precondition("δ lies in the isotropy of x".into()));
    }
    let (pair, case) = double_through(x, gamma, delta, tol)?;
    Ok((verified(pair, tol)?, case))
}

/// How a Σ₁ component produced its geodesic.
#[derive(Debug, Clone, PartialEq)]
pub enum Sigma1Kind {
    /// The prolongation ends at both sides and the path is run back and forth.
    Doubled { prolonged_length: f64 },
    /// The prolongation closes up into a circle.
    Loop,
    /// The component is already closed.
    Closed,
}

#[derive(Debug, Clone)]
pub struct Sigma1Geodesic {
    pub pair: GeodesicPair,
    pub kind: Sigma1Kind,
    /// Ends of the prolonged segment upstairs (doubled case) or the loop.
    pub endpoints: (Point, Point),
}

enum TraceStop {
    End(Point, GroupElement),
    Loop(Point, GroupElement),
}

/// An element taking `x` to `target` and fixing the direction `u`.
fn closing_element(
    model: &OrbifoldModel,
    x: &Point,
    target: &Point,
    u: &Point,
) -> Result<Option<GroupElement>, GeodesicError> {
    let tol = model.tol();
    let ball = model.group().enumerate_ball_complete(x, (x - target).norm() + tol)?;
    Ok(ball.into_iter().find(|g| {
        (g.isometry.apply(x) - target).norm() <= tol && (g.isometry.apply_vector(u) - u).norm() <= tol
    }))
}

/// Walks from the cell endpoint `x` in direction `u` along `line`.
fn trace(
    model: &OrbifoldModel,
    line: &AffineSubspace,
    mut x: Point,
    u: &Point,
    loop_target: Option<&Point>,
) -> Result<TraceStop, GeodesicError> {
    let tol = model.tol();
    let period = model.translations_along(line, 1)?[0].norm();
    for _ in 0..MAX_TRACE_CELLS {
        let iso = model.isotropy_at(&x)?;
        if let Some(g) = reversing_element(&iso, u, tol) {
            return Ok(TraceStop::End(x, g.clone()));
        }
        if let Some(m0) = loop_target {
            if let Some(g) = closing_element(model, &x, m0, u)? {
                return Ok(TraceStop::Loop(x, g));
            }
        }
        let far = &x + u * period;
        let next = model
            .singular_crossings(&x, &far, line)?
            .into_iter()
            .map(|s| s * period)
            .find(|&t| t > 10.0 * tol)
            .unwrap_or(period);
        x = &x + u * next;
    }
    Err(GeodesicError::NotFound(format!(
        "prolongation did not end or close within {MAX_TRACE_CELLS} cells"
    )))
}

/// Closed geodesic from a one-dimensional component: the closed component
/// itself, the circle its prolongation closes into, or the prolongation run
/// forward and back between two ends.
pub fn from_sigma1(
    model: &OrbifoldModel,
    strat: &Stratification,
    id: usize,
) -> Result<Sigma1Geodesic, GeodesicError> {
    let tol = model.tol();
    let s = strat.component(id)?;
    if s.k != 1 {
        return Err(GeodesicError::Precondition(format!("component {id} has singular dimension {}", s.k)));
    }
    if s.is_closed {
        let pair = from_closed_component(model, s)?;
        let endpoints = (pair.segment.start().clone(), pair.segment.end());
        return Ok(Sigma1Geodesic {
            pair,
            kind: Sigma1Kind::Closed,
            endpoints,
        });
    }
    let CellExtent::Segment {
        direction,
        lo: Some(lo),
        hi: Some(hi),
    } = &s.extent
    else {
        return Err(GeodesicError::Precondition(format!("component {id} is not a bounded segment")));
    };
    let u = direction.clone();
    let m0 = &s.representative + &u * *lo;
    let m1 = &s.representative + &u * *hi;
    let line = &s.upstairs_fixed;
    let (xb, gb) = match trace(model, line, m1, &u, Some(&m0))? {
        TraceStop::Loop(x, g) => {
            let pair = verified(GeodesicPair::new(GeodesicSegment::between(&m0, &x), g), tol)?;
            return Ok(Sigma1Geodesic {
                pair,
                kind: Sigma1Kind::Loop,
                endpoints: (m0, x),
            });
        }
        TraceStop::End(x, g) => (x, g),
    };
    let back = -&u;
    let (xa, ga) = match trace(model, line, m0, &back, None)? {
        TraceStop::End(x, g) => (x, g),
        TraceStop::Loop(..) => unreachable!("no loop target given"),
    };
    let seq = GeodesicPathSequence {
        pieces: vec![
            (GeodesicSegment::between(&xa, &xb), gb),
            (GeodesicSegment::between(&xb, &xa), ga),
        ],
    };
    let pair = verified(super::reduce(&seq, tol)?, tol)?;
    Ok(Sigma1Geodesic {
        pair,
        kind: Sigma1Kind::Doubled {
            prolonged_length: (&xb - &xa).norm(),
        },
        endpoints: (xa, xb),
    })
}

/// Whether `g` maps the flat `f` onto itself.
fn preserves(g: &GroupElement, f: &AffineSubspace, tol: f64) -> bool {
    f.contains(&g.isometry.apply(f.base_point()), tol)
        && f.basis().iter().all(|b| f.contains_direction(&g.isometry.apply_vector(b), tol))
}

/// Shortest closed geodesic inside a closed component: the shortest nonzero
/// `w = γ·p − p` along the component with `A_γ·w = w`, for `γ` preserving it.
pub fn from_closed_component(model: &OrbifoldModel, s: &StratumComponent) -> Result<GeodesicPair, GeodesicError> {
    let tol = model.tol();
    if !s.is_closed || s.k == 0 {
        return Err(GeodesicError::Precondition(format!(
            "component {} is not a closed component of positive dimension",
            s.id
        )));
    }
    let flat = &s.upstairs_fixed;
    let p = s.representative.clone();
    let diam = model.fundamental_box().diameter();
    let mut radius = diam;
    while radius <= MAX_RADIUS_FACTOR * diam {
        let ball = model.group().enumerate_ball_complete(&p, radius)?;
        let best = ball
            .into_iter()
            .filter(|g| preserves(g, flat, tol))
            .filter_map(|g| {
                let w = g.isometry.apply(&p) - &p;
                (w.norm() > tol && (g.isometry.apply_vector(&w) - &w).norm() <= tol).then_some((g, w))
            })
            .min_by(|(_, a), (_, b)| {
                let (na, nb) = (a.norm(), b.norm());
                if (na - nb).abs() > tol {
                    na.total_cmp(&nb)
                } else {
                    lex_cmp(a.as_slice(), b.as_slice(), tol)
                }
            });
        if let Some((g, w)) = best {
            let seg = GeodesicSegment::between(&p, &(&p + w));
            return verified(GeodesicPair::new(seg, g.inverse()), tol);
        }
        radius *= 2.0;
    }
    Err(GeodesicError::NotFound(format!(
        "no translation along component {} within {MAX_RADIUS_FACTOR}·diam",
        s.id
    )))
}

/// The element `δ` minimising `|δ·x − x|` among those outside `Γ_x` that
/// satisfy `admissible`; ties go to the lexicographically smaller `δ·x`.
pub(crate) fn nearest_mover(
    model: &OrbifoldModel,
    x: &Point,
    admissible: impl Fn(&GroupElement) -> bool,
) -> Result<GroupElement, GeodesicError> {
    let tol = model.tol();
    let diam = model.fundamental_box().diameter();
    let mut radius = diam;
    while radius <= MAX_RADIUS_FACTOR * diam {
        let ball = model.group().enumerate_ball_complete(x, radius)?;
        let best = ball
            .into_iter()
            .filter(|d| d.isometry.displacement_at(x) > tol && admissible(d))
            .map(|d| {
                let y = d.isometry.apply(x);
                (d, y)
            })
            .min_by(|(_, a), (_, b)| {
                let (da, db) = ((a - x).norm(), (b - x).norm());
                if (da - db).abs() > tol {
                    da.total_cmp(&db)
                } else {
                    lex_cmp(a.as_slice(), b.as_slice(), tol)
                }
            });
        if let Some((d, _)) = best {
            return Ok(d);
        }
        radius *= 2.0;
    }
    Err(GeodesicError::NotFound("no element moves the point".into()))
}

/// Reduction through the smallest stratum: at a frontier point `x` of the
/// component, an isotropy element acting as `−1` on the component's
/// directions and the nearest `δ` preserving the component give a doubled
/// geodesic inside it. A closed component is handled directly.
pub fn from_odd_stratum(
    model: &OrbifoldModel,
    strat: &Stratification,
    id: usize,
) -> Result<GeodesicPair, GeodesicError> {
    let tol = model.tol();
    let n = model.dimension();
    let s = strat.component(id)?;
    let k = s.k;
    let smallest = strat.components.iter().map(|c| c.k).filter(|&m| m > 0).min();
    if k == 0 || k == n || Some(k) != smallest {
        return Err(GeodesicError::Precondition(format!(
            "component {id} is not in the smallest positive singular stratum"
        )));
    }
    if !(k % 2 == 1 || (2 * k >= n && (n - k) % 2 == 1)) {
        return Err(GeodesicError::Precondition(format!(
            "singular dimension {k} in dimension {n} fails the parity condition"
        )));
    }
    if s.is_closed {
        return from_closed_component(model, s);
    }
    let flat = &s.upstairs_fixed;
    for fp in &s.frontier {
        let x = &fp.point;
        let flips = fp.isotropy.elements().iter().find(|g| {
            flat.basis()
                .iter()
                .all(|b| (g.isometry.apply_vector(b) + b).norm() <= tol)
        });
        let Some(gamma) = flips else { continue };
        let delta = nearest_mover(model, x, |d| preserves(d, flat, tol))?;
        let (pair, _) = double_through(x, gamma, &delta, tol)?;
        return verified(pair, tol);
    }
    Err(GeodesicError::Precondition(format!(
        "no frontier point of component {id} carries an element acting as −1 on it"
    )))
}
