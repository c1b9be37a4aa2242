//! Stratification of `Q = ℝⁿ/Γ` by singular dimension.
//!
//! Upstairs, the singular set near the fundamental box is a finite arrangement
//! of affine flats (fixed sets of elliptic elements, closed under
//! intersection). A point's singular dimension is the dimension of the
//! smallest flat through it. Cells of a `k`-flat are the connected pieces left
//! after removing lower flats; components of `Σ_k` are `Γ`-orbits of cells.
//! Orbits are found by union-find over the elements that move the box onto
//! itself, which suffices because cells are convex and the box translates
//! tile `ℝⁿ`.

mod closed;
mod model;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{lex_cmp, AffineSubspace, GeomError, IsometryKind, Point};
use crate::group::{FiniteGroup, GroupError};

pub use closed::{
    analyze_frontier_sigma1, closed_stratum, ClosedStratumOrbifold, EffectiveGroup, FrontierBehavior,
};
pub use model::{fixed_dimension, singular_dimension, OrbifoldModel};
pub(crate) use closed::reversing_element;
pub(crate) use model::{flat_meets_box, normal_within, restrict_linear};

/// Seed for generic-point sampling inside flats of dimension ≥ 2.
pub const SAMPLING_SEED: u64 = 0x0b15_7a7e;
/// Accepted samples per flat of dimension ≥ 2.
const SAMPLES_PER_FLAT: usize = 64;
/// Attempts per accepted sample.
const SAMPLE_RETRIES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrataError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("fundamental box is degenerate")]
    DegenerateBox,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("box translates do not cover the point {point:?}")]
    NotCovering { point: Vec<f64> },
    #[error("no translation along a fixed flat within the search bound (component not compact)")]
    NonCompactFlat,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("point is not a frontier point of component {0}")]
    NotFrontier(usize),
    #[error("no component with id {0}")]
    UnknownComponent(usize),
    #[error("point {0:?} is not in any computed cell")]
    Unlocated(Vec<f64>),
}

/// Shape of the representative cell of a component.
#[derive(Debug, Clone, PartialEq)]
pub enum CellExtent {
    Point,
    /// `representative + t·direction` for `t ∈ (lo, hi)`; `None` means the
    /// cell runs on forever (then the whole line is the cell).
    Segment {
        direction: Point,
        lo: Option<f64>,
        hi: Option<f64>,
    },
    Region,
}

/// A limit point of a component, on the closure of its representative cell.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub point: Point,
    /// The same point moved into the fundamental box.
    pub box_point: Point,
    pub isotropy: FiniteGroup,
    /// For `k = 1`: unit direction pointing from the point into the cell.
    pub inward: Option<Point>,
}

/// One connected component `S` of some `Σ_k`.
#[derive(Debug, Clone)]
pub struct StratumComponent {
    pub id: usize,
    pub k: usize,
    /// `Γ_S`, the isotropy of the representative point.
    pub isotropy: FiniteGroup,
    pub upstairs_fixed: AffineSubspace,
    /// Generic point of the representative cell, inside the box.
    pub representative: Point,
    /// Generic points of every box cell in the orbit.
    pub sample_points: Vec<Point>,
    pub extent: CellExtent,
    pub is_closed: bool,
    pub frontier: Vec<FrontierPoint>,
}

impl StratumComponent {
    /// Length of a bounded one-dimensional cell.
    pub fn segment_length(&self) -> Option<f64> {
        match &self.extent {
            CellExtent::Segment {
                lo: Some(lo),
                hi: Some(hi),
                ..
            } => Some(hi - lo),
            _ => None,
        }
    }

    pub fn direction(&self) -> Option<&Point> {
        match &self.extent {
            CellExtent::Segment { direction, .. } => Some(direction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Cell {
    k: usize,
    flat: usize,
    rep: Point,
    extent: CellExtent,
    component: usize,
}

/// `Q = ⊔ Σ_k`, components ordered by `k`, isotropy order, then base point.
#[derive(Debug, Clone)]
pub struct Stratification {
    pub dimension: usize,
    pub components: Vec<StratumComponent>,
    /// Every sampled cell point had singular dimension equal to its flat's.
    pub regular_dimension_check: bool,
    arrangement: Vec<AffineSubspace>,
    cells: Vec<Cell>,
}

impl Stratification {
    pub fn component(&self, id: usize) -> Result<&StratumComponent, StrataError> {
        self.components.get(id).ok_or(StrataError::UnknownComponent(id))
    }

    pub fn by_k(&self, k: usize) -> impl Iterator<Item = &StratumComponent> {
        self.components.iter().filter(move |c| c.k == k)
    }

    pub fn singular(&self) -> impl Iterator<Item = &StratumComponent> {
        let n = self.dimension;
        self.components.iter().filter(move |c| c.k < n)
    }

    pub fn is_singular_empty(&self) -> bool {
        self.singular().next().is_none()
    }

    /// Smallest singular dimension present, if `Σ ≠ ∅`.
    pub fn minimal_singular_k(&self) -> Option<usize> {
        self.singular().map(|c| c.k).min()
    }

    /// Flats of the fixed-set arrangement that meet the box.
    pub fn arrangement(&self) -> &[AffineSubspace] {
        &self.arrangement
    }

    pub fn component_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for c in &self.components {
            *m.entry(c.k).or_insert(0) += 1;
        }
        m
    }

    /// Id of the component containing `p`.
    pub fn locate(&self, model: &OrbifoldModel, p: &Point) -> Result<usize, StrataError> {
        let (_, q) = model.to_box(p)?;
        let k = model.singular_dimension(&q)?;
        if k == self.dimension {
            return self
                .components
                .iter()
                .position(|c| c.k == k)
                .ok_or_else(|| StrataError::Unlocated(p.iter().copied().collect()));
        }
        for cell in self.cells.iter().filter(|c| c.k == k) {
            if cell_contains(model, &self.arrangement[cell.flat], cell, &q)? {
                return Ok(cell.component);
            }
        }
        Err(StrataError::Unlocated(p.iter().copied().collect()))
    }
}

fn cell_contains(model: &OrbifoldModel, flat: &AffineSubspace, cell: &Cell, y: &Point) -> Result<bool, StrataError> {
    let tol = model.tol();
    if !flat.contains(y, tol) {
        return Ok(false);
    }
    Ok(match &cell.extent {
        CellExtent::Point => (y - &cell.rep).norm() <= tol,
        CellExtent::Segment { direction, lo, hi } => {
            let t = (y - &cell.rep).dot(direction);
            lo.is_none_or(|lo| t > lo + tol) && hi.is_none_or(|hi| t < hi - tol)
        }
        CellExtent::Region => model.singular_crossings(&cell.rep, y, flat)?.is_empty(),
    })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Fixed flats meeting the box, closed under intersection.
fn build_arrangement(model: &OrbifoldModel) -> Vec<AffineSubspace> {
    let tol = model.tol();
    let region = model.fundamental_box();
    let mut flats: Vec<AffineSubspace> = Vec::new();
    let push = |flats: &mut Vec<AffineSubspace>, f: AffineSubspace| -> bool {
        if flats.iter().any(|g| g.same_as(&f, tol)) || flat_meets_box(&f, region, tol).is_none() {
            return false;
        }
        flats.push(f);
        true
    };
    for g in model.box_moves() {
        if g.isometry.classify(tol) != IsometryKind::Elliptic {
            continue;
        }
        if let Some(f) = g.isometry.fixed_set(tol) {
            push(&mut flats, f);
        }
    }
    let mut start = 0;
    loop {
        let end = flats.len();
        let mut added = false;
        for i in 0..end {
            for j in start.max(i + 1)..end {
                if let Some(x) = flats[i].intersect(&flats[j], tol) {
                    added |= push(&mut flats, x);
                }
            }
        }
        if !added {
            break;
        }
        start = end;
    }
    flats.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| lex_cmp(a.base_point().as_slice(), b.base_point().as_slice(), tol)));
    flats
}

fn lower_flats<'a>(flats: &'a [AffineSubspace], f: &AffineSubspace, tol: f64) -> Vec<&'a AffineSubspace> {
    flats
        .iter()
        .filter(|g| g.dim() < f.dim() && f.contains_subspace(g, tol))
        .collect()
}

/// Box cells of a line: pieces of `line ∩ box` between cut points.
fn line_cells(model: &OrbifoldModel, flats: &[AffineSubspace], flat: usize) -> Vec<Point> {
    let tol = model.tol();
    let f = &flats[flat];
    let u = &f.basis()[0];
    let region = model.fundamental_box().expanded(tol);
    let p = f.base_point();
    let reach = (p - region.center()).norm() + region.diameter() + 1.0;
    let Some((a, b)) = region.clip_segment(&(p - u * reach), &(p + u * reach)) else {
        return Vec::new();
    };
    let ta = (&a - p).dot(u);
    let tb = (&b - p).dot(u);
    let mut cuts: Vec<f64> = lower_flats(flats, f, tol)
        .iter()
        .map(|g| (g.base_point() - p).dot(u))
        .filter(|t| *t > ta + tol && *t < tb - tol)
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut bounds = vec![ta];
    bounds.extend(cuts);
    bounds.push(tb);
    bounds
        .windows(2)
        .filter(|w| w[1] - w[0] > 10.0 * tol)
        .map(|w| p + u * (0.5 * (w[0] + w[1])))
        .collect()
}

/// Global extent `(lo, hi)` of the line cell through generic `rep`.
pub(crate) fn line_extent(
    model: &OrbifoldModel,
    line: &AffineSubspace,
    rep: &Point,
) -> Result<(Option<f64>, Option<f64>), StrataError> {
    let tol = model.tol();
    let u = &line.basis()[0];
    let period = model.translations_along(line, 1)?[0].norm();
    let a = rep - u * period;
    let b = rep + u * period;
    let ts = model.singular_crossings(&a, &b, line)?;
    let mut lo = None;
    let mut hi = None;
    for s in ts {
        let t = (2.0 * s - 1.0) * period;
        if t < -tol {
            lo = Some(lo.map_or(t, |l: f64| l.max(t)));
        } else if t > tol {
            hi = Some(hi.map_or(t, |h: f64| h.min(t)));
        }
    }
    // Cuts repeat with the period, so one side empty means both are.
    if lo.is_none() != hi.is_none() {
        return Err(StrataError::Hypothesis("cut points are not periodic along a fixed line".into()));
    }
    Ok((lo, hi))
}

/// Box cells of a flat of dimension ≥ 2, by seeded sampling and sign vectors.
fn region_cells(model: &OrbifoldModel, flats: &[AffineSubspace], flat: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let tol = model.tol();
    let f = &flats[flat];
    let region = model.fundamental_box();
    let lower = lower_flats(flats, f, tol);
    let walls: Vec<(&AffineSubspace, Point)> = lower
        .iter()
        .filter(|g| g.dim() + 1 == f.dim())
        .map(|g| (*g, normal_within(f, g)))
        .collect();
    let n = model.dimension();
    let mut seen: Vec<(Vec<bool>, Point)> = Vec::new();
    let mut accepted = 0;
    for _ in 0..SAMPLES_PER_FLAT * SAMPLE_RETRIES {
        if accepted == SAMPLES_PER_FLAT {
            break;
        }
        let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let x = f.project(&region.lerp(&u));
        if !region.contains(&x, tol) || lower.iter().any(|g| g.distance(&x) <= 10.0 * tol) {
            continue;
        }
        accepted += 1;
        let signs: Vec<bool> = walls.iter().map(|(g, nrm)| (&x - g.base_point()).dot(nrm) > 0.0).collect();
        if !seen.iter().any(|(s, _)| *s == signs) {
            seen.push((signs, x));
        }
    }
    seen.into_iter().map(|(_, x)| x).collect()
}

fn generic_point(model: &OrbifoldModel, flats: &[AffineSubspace], rng: &mut ChaCha8Rng) -> Point {
    let region = model.fundamental_box();
    let n = model.dimension();
    let mut best = region.center();
    let mut best_d = -1.0;
    for _ in 0..SAMPLE_RETRIES {
        let u: Vec<f64> = (0..n).map(|_| 0.1 + 0.8 * rng.gen::<f64>()).collect();
        let x = region.lerp(&u);
        let d = flats.iter().map(|f| f.distance(&x)).fold(f64::INFINITY, f64::min);
        if d > best_d {
            best_d = d;
            best = x;
        }
    }
    best
}

/// Computes all components of all strata.
pub fn stratify(model: &OrbifoldModel) -> Result<Stratification, StrataError> {
    let tol = model.tol();
    let n = model.dimension();
    let flats = build_arrangement(model);
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);

    let mut cells: Vec<Cell> = Vec::new();
    for (i, f) in flats.iter().enumerate() {
        let reps = match f.dim() {
            0 => vec![f.base_point().clone()],
            1 => line_cells(model, &flats, i),
            _ => region_cells(model, &flats, i, &mut rng),
        };
        for rep in reps {
            let extent = match f.dim() {
                0 => CellExtent::Point,
                1 => {
                    let (lo, hi) = line_extent(model, f, &rep)?;
                    CellExtent::Segment {
                        direction: f.basis()[0].clone(),
                        lo,
                        hi,
                    }
                }
                _ => CellExtent::Region,
            };
            cells.push(Cell {
                k: f.dim(),
                flat: i,
                rep,
                extent,
                component: usize::MAX,
            });
        }
    }

    let mut regular_dimension_check = true;
    for cell in &cells {
        if model.singular_dimension(&cell.rep)? != cell.k {
            regular_dimension_check = false;
        }
    }

    // Orbits of cells.
    let mut uf = UnionFind((0..cells.len()).collect());
    for i in 0..cells.len() {
        for g in model.box_moves() {
            let y = g.isometry.apply(&cells[i].rep);
            for j in 0..cells.len() {
                if j == i || cells[j].k != cells[i].k || uf.find(i) == uf.find(j) {
                    continue;
                }
                if cell_contains(model, &flats[cells[j].flat], &cells[j], &y)? {
                    uf.union(i, j);
                }
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..cells.len() {
        classes.entry(uf.find(i)).or_default().push(i);
    }

    struct Draft {
        cell: usize,
        members: Vec<usize>,
        isotropy: FiniteGroup,
    }
    let mut drafts = Vec::new();
    for members in classes.into_values() {
        let cell = *members
            .iter()
            .min_by(|&&a, &&b| lex_cmp(cells[a].rep.as_slice(), cells[b].rep.as_slice(), tol))
            .expect("nonempty class");
        let isotropy = model.isotropy_at(&cells[cell].rep)?;
        drafts.push(Draft {
            cell,
            members,
            isotropy,
        });
    }
    drafts.sort_by(|a, b| {
        let (ca, cb) = (&cells[a.cell], &cells[b.cell]);
        ca.k.cmp(&cb.k)
            .then(a.isotropy.order().cmp(&b.isotropy.order()))
            .then_with(|| lex_cmp(ca.rep.as_slice(), cb.rep.as_slice(), tol))
    });

    let mut components = Vec::with_capacity(drafts.len() + 1);
    for (id, d) in drafts.into_iter().enumerate() {
        for &m in &d.members {
            cells[m].component = id;
        }
        let c = &cells[d.cell];
        let flat = &flats[c.flat];
        let is_closed = match (&c.extent, c.k) {
            (CellExtent::Point, _) => true,
            (CellExtent::Segment { lo, hi, .. }, _) => lo.is_none() && hi.is_none(),
            (CellExtent::Region, _) => flat_is_clean(model, flat)?,
        };
        components.push(StratumComponent {
            id,
            k: c.k,
            isotropy: d.isotropy,
            upstairs_fixed: flat.clone(),
            representative: c.rep.clone(),
            sample_points: d.members.iter().map(|&m| cells[m].rep.clone()).collect(),
            extent: c.extent.clone(),
            is_closed,
            frontier: Vec::new(),
        });
    }

    // The regular part is connected.
    let rep = generic_point(model, &flats, &mut rng);
    let regular_id = components.len();
    let regular_isotropy = model.isotropy_at(&rep)?;
    if fixed_dimension(&regular_isotropy, &rep, tol)? != n {
        regular_dimension_check = false;
    }
    components.push(StratumComponent {
        id: regular_id,
        k: n,
        isotropy: regular_isotropy,
        upstairs_fixed: AffineSubspace::whole(n),
        representative: rep.clone(),
        sample_points: vec![rep],
        extent: CellExtent::Region,
        is_closed: flats.is_empty(),
        frontier: Vec::new(),
    });

    for id in 0..components.len() {
        let frontier = frontier_points(model, &flats, &components, id)?;
        components[id].frontier = frontier;
    }

    Ok(Stratification {
        dimension: n,
        components,
        regular_dimension_check,
        arrangement: flats,
        cells,
    })
}

/// True when no point of `flat` has isotropy larger than its pointwise stabiliser.
fn flat_is_clean(model: &OrbifoldModel, flat: &AffineSubspace) -> Result<bool, StrataError> {
    let tol = model.tol();
    let k = flat.dim();
    let ts = model.translations_along(flat, k)?;
    let mut centre = flat.base_point().clone();
    let mut half = 0.0;
    for t in &ts {
        centre += t * 0.5;
        half += 0.5 * t.norm();
    }
    let ball = model.group().enumerate_ball_complete(&centre, 2.0 * half + tol)?;
    for g in &ball {
        if g.isometry.classify(tol) != IsometryKind::Elliptic {
            continue;
        }
        let Some(fix) = g.isometry.fixed_set(tol) else { continue };
        if !fix.contains_subspace(flat, tol) && fix.intersect(flat, tol).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn frontier_point(model: &OrbifoldModel, point: Point, inward: Option<Point>) -> Result<FrontierPoint, StrataError> {
    let (_, box_point) = model.to_box(&point)?;
    Ok(FrontierPoint {
        isotropy: model.isotropy_at(&point)?,
        point,
        box_point,
        inward,
    })
}

fn frontier_points(
    model: &OrbifoldModel,
    flats: &[AffineSubspace],
    components: &[StratumComponent],
    id: usize,
) -> Result<Vec<FrontierPoint>, StrataError> {
    let tol = model.tol();
    let n = model.dimension();
    let c = &components[id];
    if c.is_closed {
        return Ok(Vec::new());
    }
    if c.k == n {
        return components
            .iter()
            .filter(|s| s.k < n)
            .map(|s| frontier_point(model, s.representative.clone(), None))
            .collect();
    }
    match &c.extent {
        CellExtent::Point => Ok(Vec::new()),
        CellExtent::Segment { direction, lo, hi } => {
            let mut out = Vec::new();
            if let Some(lo) = lo {
                out.push(frontier_point(model, &c.representative + direction * *lo, Some(direction.clone()))?);
            }
            if let Some(hi) = hi {
                out.push(frontier_point(model, &c.representative + direction * *hi, Some(-direction))?);
            }
            Ok(out)
        }
        CellExtent::Region => {
            let mut out = Vec::new();
            for g in lower_flats(flats, &c.upstairs_fixed, tol) {
                let q = g.project(&c.representative);
                let hits = model.singular_crossings(&c.representative, &q, &c.upstairs_fixed)?;
                let len = (&q - &c.representative).norm().max(tol);
                if hits.iter().all(|t| *t >= 1.0 - 10.0 * tol / len) {
                    out.push(frontier_point(model, q, None)?);
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests;
