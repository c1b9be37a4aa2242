use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::{lex_cmp, GeodesicSegment, Isometry, Point};
use crate::geodesic::{is_closed, ExistenceOutcome, GeodesicPair};
use crate::group::{format_word, GroupElement};
use crate::strata::{CellExtent, OrbifoldModel, Stratification, StratumComponent};

use super::ScenarioError;

pub const REPORT_SCHEMA: &str = "orbistrat.report/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub label: String,
    pub dimension: usize,
    pub generators: usize,
    pub lattice_mode: bool,
    pub tolerance: f64,
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperSummary {
    pub box_moves: usize,
    pub candidates_examined: usize,
    pub search_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub point: Vec<f64>,
    pub isotropy_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRow {
    pub id: usize,
    pub k: usize,
    pub isotropy_order: usize,
    pub closed: bool,
    pub frontier_count: usize,
    pub sample_point: Vec<f64>,
    /// Length of the representative cell for bounded one-dimensional components.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_length: Option<f64>,
    pub frontier: Vec<FrontierRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratificationSection {
    pub singular_empty: bool,
    /// Component count per singular dimension.
    pub counts: BTreeMap<String, usize>,
    pub regular_dimension_check: bool,
    pub components: Vec<ComponentRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryRecord {
    /// Row-major linear part.
    pub linear: Vec<f64>,
    pub translation: Vec<f64>,
    pub word: String,
}

impl IsometryRecord {
    pub fn of(g: &GroupElement) -> Self {
        Self {
            // `+ 0.0` turns negative zeros into zeros.
            linear: g.isometry.linear_row_major().into_iter().map(|x| x + 0.0).collect(),
            translation: g.isometry.translation().iter().map(|x| x + 0.0).collect(),
            word: format_word(&g.word),
        }
    }

    pub fn isometry(&self, tol: f64) -> Result<Isometry, ScenarioError> {
        Isometry::from_row_major(self.translation.len(), &self.linear, &self.translation, tol)
            .map_err(|e| ScenarioError::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicRecord {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub velocity: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub gamma: IsometryRecord,
    pub length: f64,
    pub position_residual: f64,
    pub velocity_residual: f64,
    pub is_closed: bool,
}

impl GeodesicRecord {
    pub fn of(pair: &GeodesicPair, tol: f64) -> Self {
        let r = is_closed(pair, tol);
        let s = &pair.segment;
        Self {
            start: s.start().iter().copied().collect(),
            end: s.end().iter().copied().collect(),
            velocity: s.velocity().iter().copied().collect(),
            t0: s.t0(),
            t1: s.t1(),
            gamma: IsometryRecord::of(&pair.gamma),
            length: r.length,
            position_residual: r.position_residual,
            velocity_residual: r.velocity_residual,
            is_closed: r.is_closed,
        }
    }

    /// Rebuilds the pair from the recorded start, velocity, interval and `γ`.
    pub fn to_pair(&self, tol: f64) -> Result<GeodesicPair, ScenarioError> {
        let seg = GeodesicSegment::new(
            Point::from_row_slice(&self.start),
            Point::from_row_slice(&self.velocity),
            self.t0,
            self.t1,
        )
        .map_err(|e| ScenarioError::Parse(e.to_string()))?;
        let gamma = GroupElement {
            isometry: self.gamma.isometry(tol)?,
            word: Vec::new(),
        };
        Ok(GeodesicPair::new(seg, gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedStrategy {
    pub strategy: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSection {
    pub strategy: String,
    pub detail: String,
    pub skipped: Vec<SkippedStrategy>,
    pub geodesic: Option<GeodesicRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stratify_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub model: ModelSummary,
    pub properness: ProperSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stratification: Option<StratificationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub existence: Option<GeodesicSection>,
    pub timing: Timing,
}

impl Report {
    pub fn new(model: &OrbifoldModel) -> Self {
        let b = model.fundamental_box();
        let cert = model.certificate();
        Self {
            schema: REPORT_SCHEMA.to_string(),
            model: ModelSummary {
                label: model.label().to_string(),
                dimension: model.dimension(),
                generators: model.group().generators().len(),
                lattice_mode: model.group().lattice_basis().is_some(),
                tolerance: model.tol(),
                box_min: b.min.iter().copied().collect(),
                box_max: b.max.iter().copied().collect(),
            },
            properness: ProperSummary {
                box_moves: cert.elements.len(),
                candidates_examined: cert.candidates_examined,
                search_radius: cert.search_radius,
            },
            stratification: None,
            existence: None,
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }
}

fn row(c: &StratumComponent) -> ComponentRow {
    ComponentRow {
        id: c.id,
        k: c.k,
        isotropy_order: c.isotropy.order(),
        closed: c.is_closed,
        frontier_count: c.frontier.len(),
        sample_point: c.representative.iter().copied().collect(),
        cell_length: c.segment_length(),
        frontier: c
            .frontier
            .iter()
            .map(|f| FrontierRow {
                point: f.box_point.iter().copied().collect(),
                isotropy_order: f.isotropy.order(),
            })
            .collect(),
    }
}

pub fn component_rows(strat: &Stratification) -> StratificationSection {
    StratificationSection {
        singular_empty: strat.is_singular_empty(),
        counts: strat.component_counts().into_iter().map(|(k, c)| (k.to_string(), c)).collect(),
        regular_dimension_check: strat.regular_dimension_check,
        components: strat.components.iter().map(row).collect(),
    }
}

pub fn geodesic_section(outcome: &ExistenceOutcome, tol: f64) -> GeodesicSection {
    GeodesicSection {
        strategy: outcome.strategy.slug().to_string(),
        detail: outcome.detail.clone(),
        skipped: outcome
            .skipped
            .iter()
            .map(|(s, r)| SkippedStrategy {
                strategy: s.slug().to_string(),
                reason: r.clone(),
            })
            .collect(),
        geodesic: outcome.geodesic.as_ref().map(|p| GeodesicRecord::of(p, tol)),
    }
}

fn push_unique(points: &mut Vec<Point>, p: Point, tol: f64) {
    if points.iter().all(|q| (q - &p).norm() > tol) {
        points.push(p);
    }
}

/// Box-clipped pieces of a component: points for `k = 0`, segments for `k = 1`.
fn pieces(model: &OrbifoldModel, c: &StratumComponent) -> Vec<Vec<Point>> {
    let tol = model.tol();
    let b = model.fundamental_box();
    match &c.extent {
        CellExtent::Point => {
            let mut pts = Vec::new();
            for g in model.box_moves() {
                let p = g.isometry.apply(&c.representative);
                if b.contains(&p, tol) {
                    push_unique(&mut pts, b.clamp(&p), 1e3 * tol);
                }
            }
            pts.sort_by(|p, q| lex_cmp(p.as_slice(), q.as_slice(), tol));
            pts.into_iter().map(|p| vec![p]).collect()
        }
        CellExtent::Segment { direction, lo, hi } => {
            let reach = b.diameter() + (&c.representative - b.center()).norm();
            let a = &c.representative + direction * lo.unwrap_or(-reach);
            let z = &c.representative + direction * hi.unwrap_or(reach);
            let mut segs: Vec<(Point, Point)> = Vec::new();
            for g in model.box_moves() {
                let (ga, gz) = (g.isometry.apply(&a), g.isometry.apply(&z));
                let Some((p, q)) = b.clip_segment(&ga, &gz) else { continue };
                let (p, q) = (b.clamp(&p), b.clamp(&q));
                if (&q - &p).norm() <= 1e3 * tol {
                    continue;
                }
                let (p, q) = if lex_cmp(p.as_slice(), q.as_slice(), tol).is_gt() { (q, p) } else { (p, q) };
                let seen = segs
                    .iter()
                    .any(|(s, t)| (s - &p).norm() <= 1e3 * tol && (t - &q).norm() <= 1e3 * tol);
                if !seen {
                    segs.push((p, q));
                }
            }
            segs.sort_by(|(p, _), (q, _)| lex_cmp(p.as_slice(), q.as_slice(), tol));
            segs.into_iter().map(|(p, q)| vec![p, q]).collect()
        }
        CellExtent::Region => c.sample_points.iter().map(|p| vec![p.clone()]).collect(),
    }
}

fn fmt_coord(x: f64) -> String {
    let r = if x.abs() < 5e-13 { 0.0 } else { x };
    format!("{r:.12}")
}

/// CSV of singular components clipped to the box, one row per vertex.
/// Each segment of a one-dimensional component is two consecutive rows.
pub fn polylines_csv(model: &OrbifoldModel, strat: &Stratification) -> Option<String> {
    let n = model.dimension();
    if n > 3 {
        return None;
    }
    let mut out = String::from("component_id,k,x,y");
    if n == 3 {
        out.push_str(",z");
    }
    out.push('\n');
    for c in strat.singular() {
        for piece in pieces(model, c) {
            for p in piece {
                let _ = write!(out, "{},{}", c.id, c.k);
                for i in 0..n {
                    let _ = write!(out, ",{}", fmt_coord(p[i]));
                }
                if n == 1 {
                    out.push_str(",0.000000000000");
                }
                out.push('\n');
            }
        }
    }
    Some(out)
}

/// Static SVG of the box with singular points and lines, for `n = 2`.
pub fn svg_overview(model: &OrbifoldModel, strat: &Stratification) -> Option<String> {
    if model.dimension() != 2 {
        return None;
    }
    let b = model.fundamental_box();
    let (w, h) = (b.max[0] - b.min[0], b.max[1] - b.min[1]);
    let scale = 400.0 / w.max(h);
    let pad = 20.0;
    let x = |v: f64| pad + (v - b.min[0]) * scale;
    let y = |v: f64| pad + (b.max[1] - v) * scale;
    let (pw, ph) = (w * scale + 2.0 * pad, h * scale + 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pw:.1}" height="{ph:.1}" viewBox="0 0 {pw:.1} {ph:.1}">"#
    );
    let _ = writeln!(s, "  <title>{}</title>", model.label());
    let _ = writeln!(
        s,
        r##"  <rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#f7f7f7" stroke="#444"/>"##,
        x(b.min[0]),
        y(b.max[1]),
        w * scale,
        h * scale
    );
    for c in strat.singular() {
        for piece in pieces(model, c) {
            match piece.as_slice() {
                [p] => {
                    let _ = writeln!(
                        s,
                        r##"  <circle cx="{:.2}" cy="{:.2}" r="5" fill="#c0392b"><title>component {} order {}</title></circle>"##,
                        x(p[0]),
                        y(p[1]),
                        c.id,
                        c.isotropy.order()
                    );
                    let _ = writeln!(
                        s,
                        r#"  <text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
                        x(p[0]) + 7.0,
                        y(p[1]) - 7.0,
                        c.isotropy.order()
                    );
                }
                [p, q] => {
                    let _ = writeln!(
                        s,
                        r##"  <line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2c7fb8" stroke-width="2"/>"##,
                        x(p[0]),
                        y(p[1]),
                        x(q[0]),
                        y(q[1])
                    );
                }
                _ => {}
            }
        }
    }
    s.push_str("</svg>\n");
    Some(s)
}
