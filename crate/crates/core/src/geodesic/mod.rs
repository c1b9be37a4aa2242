//! Orbifold geodesics as pairs `(c̃, γ)` and constructions of closed ones.
//!
//! A pair is a straight segment `c̃ : [a, b] → ℝⁿ` and an element `γ ∈ Γ`.
//! It is closed when `γ·c̃(b) = c̃(a)` and `A_γ·ċ(b) = ċ(a)`. Two pairs are
//! equivalent when `δ·c̃₁ = c̃₂` and `δγ₁δ⁻¹ = γ₂` for some `δ ∈ Γ`.

mod construct;
mod dispatch;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{concatenate, Concatenation, GeodesicSegment, GeomError, JoinPolicy};
use crate::group::{GroupElement, GroupError};
use crate::strata::{OrbifoldModel, StrataError};

pub use construct::{
    double_through, from_closed_component, from_even_isotropy, from_hyperbolic, from_odd_stratum, from_sigma1,
    select_case, EvenCase, Sigma1Geodesic, Sigma1Kind,
};
pub use dispatch::{existence_dispatch, run_strategy, DispatchConfig, ExistenceOutcome, Strategy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Strata(#[from] StrataError),
    #[error("path sequence is empty")]
    EmptySequence,
    #[error("element is not hyperbolic")]
    NotHyperbolic,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("constructed pair is not closed (position {position_residual:e}, velocity {velocity_residual:e}, length {length:e})")]
    NotClosed {
        position_residual: f64,
        velocity_residual: f64,
        length: f64,
    },
    #[error("nothing found within the search bound: {0}")]
    NotFound(String),
}

/// An orbifold geodesic `(c̃, γ)`.
#[derive(Debug, Clone)]
pub struct GeodesicPair {
    pub segment: GeodesicSegment,
    pub gamma: GroupElement,
}

impl GeodesicPair {
    pub fn new(segment: GeodesicSegment, gamma: GroupElement) -> Self {
        Self { segment, gamma }
    }

    pub fn length(&self) -> f64 {
        self.segment.length()
    }

    /// `(δ·c̃, δγδ⁻¹)`.
    pub fn conjugated(&self, delta: &GroupElement) -> GeodesicPair {
        GeodesicPair {
            segment: self.segment.translate(&delta.isometry),
            gamma: delta.conjugate(&self.gamma),
        }
    }
}

/// Residuals of the closing conditions of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosednessReport {
    pub position_residual: f64,
    pub velocity_residual: f64,
    pub is_closed: bool,
    pub length: f64,
}

/// `(c̃₁, γ₁, …, c̃_k, γ_k)`: `γᵢ` carries the end of piece `i` to the start
/// of piece `i + 1`, and `γ_k` carries the end of the last piece to the start
/// of the first.
#[derive(Debug, Clone, Default)]
pub struct GeodesicPathSequence {
    pub pieces: Vec<(GeodesicSegment, GroupElement)>,
}

pub fn is_closed(pair: &GeodesicPair, tol: f64) -> ClosednessReport {
    let c = &pair.segment;
    let g = &pair.gamma.isometry;
    let position_residual = (g.apply(&c.end()) - c.start()).norm();
    let velocity_residual = (g.apply_vector(c.velocity()) - c.velocity()).norm();
    let length = c.length();
    ClosednessReport {
        position_residual,
        velocity_residual,
        is_closed: position_residual <= tol && velocity_residual <= tol && length > tol,
        length,
    }
}

/// Returns the pair if it passes [`is_closed`].
pub(crate) fn verified(pair: GeodesicPair, tol: f64) -> Result<GeodesicPair, GeodesicError> {
    let r = is_closed(&pair, tol);
    if r.is_closed {
        Ok(pair)
    } else {
        Err(GeodesicError::NotClosed {
            position_residual: r.position_residual,
            velocity_residual: r.velocity_residual,
            length: r.length,
        })
    }
}

pub(crate) fn concatenate_smooth(
    a: &GeodesicSegment,
    b: &GeodesicSegment,
    tol: f64,
) -> Result<GeodesicSegment, GeodesicError> {
    match concatenate(a, b, JoinPolicy::Smooth, tol)? {
        Concatenation::Smooth(s) => Ok(s),
        Concatenation::Broken(_) => unreachable!("smooth policy never returns a corner"),
    }
}

/// Unwinds a sequence into one pair: piece `i` is moved by `γ₁⁻¹⋯γᵢ₋₁⁻¹`, the
/// pieces are joined, and `γ = γ_k⋯γ₂γ₁`.
pub fn reduce(seq: &GeodesicPathSequence, tol: f64) -> Result<GeodesicPair, GeodesicError> {
    let mut pieces = seq.pieces.iter();
    let (first, g1) = pieces.next().ok_or(GeodesicError::EmptySequence)?;
    let mut acc = g1.inverse();
    let mut gamma = g1.clone();
    let mut segment = first.clone();
    for (piece, g) in pieces {
        let moved = piece.translate(&acc.isometry);
        segment = concatenate_smooth(&segment, &moved, tol)?;
        acc = acc.mul(&g.inverse());
        gamma = g.mul(&gamma);
    }
    Ok(GeodesicPair { segment, gamma })
}

/// Cuts `pair` at the interior parameters `cuts` and moves piece `i` by
/// `moves[i]`, choosing transitions so that [`reduce`] returns
/// `(h₁·c̃, h₁γh₁⁻¹)`.
pub fn split(pair: &GeodesicPair, cuts: &[f64], moves: &[GroupElement]) -> Result<GeodesicPathSequence, GeodesicError> {
    let c = &pair.segment;
    let mut ts = vec![c.t0()];
    ts.extend_from_slice(cuts);
    ts.push(c.t1());
    if ts.windows(2).any(|w| w[0] > w[1]) || moves.len() != ts.len() - 1 {
        return Err(GeodesicError::Precondition(
            "cuts must be increasing and inside the interval, one move per piece".into(),
        ));
    }
    let k = moves.len();
    let mut pieces = Vec::with_capacity(k);
    for i in 0..k {
        let piece = c.restricted(ts[i], ts[i + 1])?.translate(&moves[i].isometry);
        let transition = if i + 1 < k {
            moves[i + 1].mul(&moves[i].inverse())
        } else {
            moves[0].mul(&pair.gamma).mul(&moves[k - 1].inverse())
        };
        pieces.push((piece, transition));
    }
    Ok(GeodesicPathSequence { pieces })
}

fn same_segment(a: &GeodesicSegment, b: &GeodesicSegment, tol: f64) -> bool {
    (a.start() - b.start()).norm() <= tol
        && (a.velocity() - b.velocity()).norm() <= tol
        && (a.t0() - b.t0()).abs() <= tol
        && (a.t1() - b.t1()).abs() <= tol
}

/// Looks for `δ` moving `c̃₁(a)` by at most `search_radius` with
/// `δ·c̃₁ = c̃₂` and `δγ₁δ⁻¹ = γ₂`. `false` only means none was found.
pub fn equivalent(
    model: &OrbifoldModel,
    p1: &GeodesicPair,
    p2: &GeodesicPair,
    search_radius: f64,
) -> Result<bool, GeodesicError> {
    let tol = model.tol();
    let ball = model.group().enumerate_ball(p1.segment.start(), search_radius)?;
    Ok(ball.elements.iter().any(|d| {
        same_segment(&p1.segment.translate(&d.isometry), &p2.segment, tol)
            && d.conjugate(&p1.gamma).approx_eq(&p2.gamma, tol)
    }))
}
