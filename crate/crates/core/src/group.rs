//! Discrete groups of isometries given by generators.
//!
//! Two enumeration modes:
//!
//! * **lattice mode** (a translation lattice `L` is declared): coset
//!   representatives of `Γ/L` are found by a word search with translations
//!   reduced modulo `L`, and the lattice part of a ball is enumerated
//!   analytically. The result is always complete.
//! * **word mode**: breadth-first search over generator words with
//!   deduplication, declared complete only when the search closes or the
//!   last word layer has left the ball by a safety margin.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::geom::{lex_cmp, AxisBox, GeomError, Isometry, Point};

/// Largest finite group handled by the exhaustive subgroup search.
pub const SUBGROUP_ORDER_CAP: usize = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("enumeration budget exceeded: more than {cap} elements")]
    BudgetExceeded { cap: usize },
    #[error("enumeration incomplete: words of length {max_word_length} still reach the ball")]
    Incomplete { max_word_length: usize },
    #[error("lattice basis is singular")]
    SingularLattice,
    #[error("lattice invariance violated: generator {generator} does not map the lattice to itself")]
    LatticeNotInvariant { generator: usize },
    #[error("lattice translation {index} is not generated within word length {max_word_length}")]
    LatticeTranslationMissing { index: usize, max_word_length: usize },
    #[error("element set is not closed under composition")]
    NotClosed,
    #[error("group order {order} exceeds the exhaustive cap {cap}")]
    OrderTooLarge { order: usize, cap: usize },
    #[error("subgroup containment violated: an element is not in the parent group")]
    NotASubgroup,
    #[error("element {index} moves the base point by {displacement:e}")]
    NotFixing { index: usize, displacement: f64 },
    #[error("group has no generators")]
    NoGenerators,
}

/// One letter of a word: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "g{}^-1", self.generator)
        } else {
            write!(f, "g{}", self.generator)
        }
    }
}

/// A word `l₁ l₂ … lₘ`, evaluated as the product `l₁ ∘ l₂ ∘ … ∘ lₘ`.
pub type Word = Vec<Letter>;

pub fn invert_word(word: &[Letter]) -> Word {
    word.iter()
        .rev()
        .map(|l| Letter {
            generator: l.generator,
            inverse: !l.inverse,
        })
        .collect()
}

pub fn format_word(word: &[Letter]) -> String {
    if word.is_empty() {
        return "e".to_string();
    }
    word.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

/// An element of `Γ` together with a word that produces it.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub isometry: Isometry,
    pub word: Word,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self {
            isometry: Isometry::identity(n),
            word: Vec::new(),
        }
    }

    /// `self ∘ other`.
    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        GroupElement {
            isometry: self.isometry.mul(&other.isometry),
            word,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            isometry: self.isometry.inverse(),
            word: invert_word(&self.word),
        }
    }

    /// `self · h · self⁻¹`.
    pub fn conjugate(&self, h: &GroupElement) -> GroupElement {
        self.mul(h).mul(&self.inverse())
    }

    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        self.isometry.approx_eq(&other.isometry, tol)
    }
}

/// Evaluates a word against a generator list.
pub fn evaluate_word(generators: &[Isometry], word: &[Letter]) -> Isometry {
    let n = generators.first().map_or(0, |g| g.dim());
    let mut acc = Isometry::identity(n);
    for l in word {
        let g = &generators[l.generator];
        let g = if l.inverse { g.inverse() } else { g.clone() };
        acc = acc.mul(&g);
    }
    acc
}

/// Enumeration bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationLimits {
    pub max_word_length: usize,
    pub element_cap: usize,
    /// Default radius used by callers that need "a neighbourhood".
    pub enumeration_radius: f64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_word_length: 12,
            element_cap: 200_000,
            enumeration_radius: 4.0,
        }
    }
}

/// Elements found in a ball and whether the list is provably exhaustive.
#[derive(Debug, Clone)]
pub struct BallEnumeration {
    pub elements: Vec<GroupElement>,
    pub complete: bool,
}

#[derive(Debug, Clone)]
struct LatticeData {
    basis: DMatrix<f64>,
    basis_inv: DMatrix<f64>,
    basis_words: Vec<Word>,
    cosets: Vec<GroupElement>,
}

#[derive(Debug, Clone)]
struct WordBall {
    elements: Vec<GroupElement>,
    /// Start index of the final layer in `elements`.
    last_layer: usize,
    closed: bool,
}

/// Tolerance-bucketed lookup of isometries.
struct ElementIndex {
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl ElementIndex {
    const GRID: f64 = 1e-6;

    fn new() -> Self {
        Self {
            buckets: HashMap::new(),
        }
    }

    fn key(g: &Isometry) -> Vec<i64> {
        g.flat_key().iter().map(|x| (x / Self::GRID).round() as i64).collect()
    }

    fn find(&self, g: &Isometry, store: &[GroupElement], tol: f64) -> Option<usize> {
        self.buckets
            .get(&Self::key(g))?
            .iter()
            .copied()
            .find(|&i| store[i].isometry.approx_eq(g, tol))
    }

    fn insert(&mut self, g: &Isometry, index: usize) {
        self.buckets.entry(Self::key(g)).or_default().push(index);
    }
}

/// A discrete group `Γ ⊆ Isom(ℝⁿ)` presented by generators.
#[derive(Debug, Clone)]
pub struct GeneratedGroup {
    dimension: usize,
    generators: Vec<Isometry>,
    lattice_basis: Option<Vec<Point>>,
    limits: EnumerationLimits,
    tol: f64,
    lattice: Option<LatticeData>,
    word_ball: OnceLock<Result<WordBall, GroupError>>,
}

impl GeneratedGroup {
    /// Builds the group and, in lattice mode, validates lattice invariance and
    /// computes the coset representatives.
    pub fn new(
        dimension: usize,
        generators: Vec<Isometry>,
        lattice_basis: Option<Vec<Point>>,
        limits: EnumerationLimits,
        tol: f64,
    ) -> Result<Self, GroupError> {
        for g in &generators {
            if g.dim() != dimension {
                return Err(GeomError::DimensionMismatch {
                    expected: dimension,
                    found: g.dim(),
                }
                .into());
            }
        }
        let mut group = Self {
            dimension,
            generators,
            lattice_basis,
            limits,
            tol,
            lattice: None,
            word_ball: OnceLock::new(),
        };
        if let Some(basis) = &group.lattice_basis {
            group.lattice = Some(group.build_lattice(basis)?);
        }
        Ok(group)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> &[Isometry] {
        &self.generators
    }

    pub fn lattice_basis(&self) -> Option<&[Point]> {
        self.lattice_basis.as_deref()
    }

    pub fn limits(&self) -> &EnumerationLimits {
        &self.limits
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn generator_element(&self, index: usize) -> GroupElement {
        GroupElement {
            isometry: self.generators[index].clone(),
            word: vec![Letter {
                generator: index,
                inverse: false,
            }],
        }
    }

    pub fn evaluate(&self, word: &[Letter]) -> Isometry {
        if word.is_empty() {
            return Isometry::identity(self.dimension);
        }
        evaluate_word(&self.generators, word)
    }

    /// Number of cosets of the declared lattice, if any.
    pub fn point_group_size(&self) -> Option<usize> {
        self.lattice.as_ref().map(|l| l.cosets.len())
    }

    /// Coset representatives of `Γ/L` in lattice mode.
    pub fn coset_representatives(&self) -> Option<&[GroupElement]> {
        self.lattice.as_ref().map(|l| l.cosets.as_slice())
    }

    /// The group `g Γ g⁻¹`, with the lattice mapped along.
    pub fn conjugated(&self, g: &Isometry) -> Result<GeneratedGroup, GroupError> {
        let generators = self.generators.iter().map(|h| g.conjugate(h)).collect();
        let basis = self
            .lattice_basis
            .as_ref()
            .map(|b| b.iter().map(|v| g.apply_vector(v)).collect());
        GeneratedGroup::new(self.dimension, generators, basis, self.limits.clone(), self.tol)
    }

    fn letters(&self) -> Vec<(Letter, Isometry)> {
        let mut out = Vec::with_capacity(2 * self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            out.push((
                Letter {
                    generator: i,
                    inverse: false,
                },
                g.clone(),
            ));
            let inv = g.inverse();
            if !inv.approx_eq(g, self.tol) {
                out.push((
                    Letter {
                        generator: i,
                        inverse: true,
                    },
                    inv,
                ));
            }
        }
        out
    }

    /// Breadth-first word search. Stops early when `stop` returns true.
    fn bfs(&self, max_len: usize, mut stop: impl FnMut(&[GroupElement]) -> bool) -> Result<WordBall, GroupError> {
        let letters = self.letters();
        let mut elements = vec![GroupElement::identity(self.dimension)];
        let mut index = ElementIndex::new();
        index.insert(&elements[0].isometry, 0);
        let mut layer_start = 0;
        let mut closed = false;
        for _ in 0..max_len {
            let layer_end = elements.len();
            for i in layer_start..layer_end {
                for (letter, g) in &letters {
                    let iso = elements[i].isometry.mul(g);
                    if index.find(&iso, &elements, self.tol).is_some() {
                        continue;
                    }
                    let mut word = elements[i].word.clone();
                    word.push(*letter);
                    let id = elements.len();
                    index.insert(&iso, id);
                    elements.push(GroupElement { isometry: iso, word });
                    if elements.len() > self.limits.element_cap {
                        return Err(GroupError::BudgetExceeded {
                            cap: self.limits.element_cap,
                        });
                    }
                }
            }
            if elements.len() == layer_end {
                closed = true;
                break;
            }
            layer_start = layer_end;
            if stop(&elements) {
                break;
            }
        }
        Ok(WordBall {
            elements,
            last_layer: layer_start,
            closed,
        })
    }

    fn word_ball(&self) -> Result<&WordBall, GroupError> {
        self.word_ball
            .get_or_init(|| self.bfs(self.limits.max_word_length, |_| false))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn build_lattice(&self, basis: &[Point]) -> Result<LatticeData, GroupError> {
        let n = self.dimension;
        if basis.len() != n || basis.iter().any(|v| v.len() != n) {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                found: basis.len(),
            }
            .into());
        }
        let b = DMatrix::from_columns(basis);
        let b_inv = b.clone().try_inverse().ok_or(GroupError::SingularLattice)?;
        if b.determinant().abs() <= self.tol {
            return Err(GroupError::SingularLattice);
        }
        for (i, g) in self.generators.iter().enumerate() {
            let m = &b_inv * g.linear() * &b;
            if m.iter().any(|x| (x - x.round()).abs() > 1e-6) {
                return Err(GroupError::LatticeNotInvariant { generator: i });
            }
        }

        // Words for the basis translations.
        let targets: Vec<Isometry> = basis.iter().map(|v| Isometry::translation_by(v.clone())).collect();
        let tol = self.tol;
        let found = |els: &[GroupElement]| {
            targets
                .iter()
                .all(|t| els.iter().any(|e| e.isometry.approx_eq(t, tol)))
        };
        let ball = self.bfs(self.limits.max_word_length, found)?;
        let mut basis_words = Vec::with_capacity(n);
        for (index, t) in targets.iter().enumerate() {
            let e = ball
                .elements
                .iter()
                .find(|e| e.isometry.approx_eq(t, tol))
                .ok_or(GroupError::LatticeTranslationMissing {
                    index,
                    max_word_length: self.limits.max_word_length,
                })?;
            basis_words.push(e.word.clone());
        }

        let mut data = LatticeData {
            basis: b,
            basis_inv: b_inv,
            basis_words,
            cosets: Vec::new(),
        };
        let letters = self.letters();
        let mut cosets = vec![GroupElement::identity(n)];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (letter, g) in &letters {
                let mut word = cosets[i].word.clone();
                word.push(*letter);
                let raw = GroupElement {
                    isometry: cosets[i].isometry.mul(g),
                    word,
                };
                let reduced = data.reduce_mod_lattice(&raw);
                if cosets.iter().any(|c| data.same_coset(c, &reduced, tol)) {
                    continue;
                }
                cosets.push(reduced);
                queue.push_back(cosets.len() - 1);
                if cosets.len() > self.limits.element_cap {
                    return Err(GroupError::BudgetExceeded {
                        cap: self.limits.element_cap,
                    });
                }
            }
        }
        data.cosets = cosets;
        Ok(data)
    }

    /// Largest displacement of a generator at `x`.
    pub fn max_generator_displacement(&self, x: &Point) -> f64 {
        self.generators
            .iter()
            .map(|g| g.displacement_at(x))
            .fold(0.0, f64::max)
    }

    /// Distinct elements represented by words of length at most `max_len`,
    /// shortest words first.
    pub fn words_up_to(&self, max_len: usize) -> Result<Vec<GroupElement>, GroupError> {
        Ok(self.bfs(max_len, |_| false)?.elements)
    }

    /// All `γ` with `|γ·center − center| ≤ radius` (plus tolerance), in
    /// canonical order.
    pub fn enumerate_ball(&self, center: &Point, radius: f64) -> Result<BallEnumeration, GroupError> {
        if center.len() != self.dimension {
            return Err(GeomError::DimensionMismatch {
                expected: self.dimension,
                found: center.len(),
            }
            .into());
        }
        let radius = radius.max(0.0);
        let mut out = match &self.lattice {
            Some(lattice) => BallEnumeration {
                elements: lattice.enumerate_ball(center, radius, self.tol, self.limits.element_cap)?,
                complete: true,
            },
            None => {
                let ball = self.word_ball()?;
                let reach = radius + self.tol;
                let elements: Vec<GroupElement> = ball
                    .elements
                    .iter()
                    .filter(|e| e.isometry.displacement_at(center) <= reach)
                    .cloned()
                    .collect();
                let margin = radius + 2.0 * self.max_generator_displacement(center);
                let complete = ball.closed
                    || ball.elements[ball.last_layer..]
                        .iter()
                        .all(|e| e.isometry.displacement_at(center) > margin);
                BallEnumeration { elements, complete }
            }
        };
        sort_canonical(&mut out.elements, self.tol);
        Ok(out)
    }

    /// Like [`enumerate_ball`](Self::enumerate_ball) but fails if the result
    /// is not provably exhaustive.
    pub fn enumerate_ball_complete(&self, center: &Point, radius: f64) -> Result<Vec<GroupElement>, GroupError> {
        let ball = self.enumerate_ball(center, radius)?;
        if ball.complete {
            Ok(ball.elements)
        } else {
            Err(GroupError::Incomplete {
                max_word_length: self.limits.max_word_length,
            })
        }
    }

    /// The isotropy group `Γ_x`.
    pub fn isotropy_at(&self, x: &Point) -> Result<FiniteGroup, GroupError> {
        let elements = self.enumerate_ball_complete(x, 0.0)?;
        FiniteGroup::from_elements(elements, self.tol)
    }

    /// Certifies that only finitely many `γ` move `region` onto itself.
    pub fn properness_check(&self, region: &AxisBox) -> Result<ProperCertificate, GroupError> {
        let c = region.center();
        let h = region.half_diagonal();
        let candidates = self.enumerate_ball_complete(&c, 2.0 * h)?;
        let examined = candidates.len();
        let elements: Vec<GroupElement> = candidates
            .into_iter()
            .filter(|g| box_image_meets(&g.isometry, region, self.tol))
            .collect();
        Ok(ProperCertificate {
            elements,
            candidates_examined: examined,
            search_radius: 2.0 * h,
        })
    }
}

impl LatticeData {
    fn lattice_word(&self, m: &[i64]) -> Word {
        let mut word = Vec::new();
        for (i, &k) in m.iter().enumerate() {
            let w = if k < 0 {
                invert_word(&self.basis_words[i])
            } else {
                self.basis_words[i].clone()
            };
            for _ in 0..k.unsigned_abs() {
                word.extend_from_slice(&w);
            }
        }
        word
    }

    fn reduce_mod_lattice(&self, g: &GroupElement) -> GroupElement {
        let f = &self.basis_inv * g.isometry.translation();
        let m: Vec<i64> = f.iter().map(|x| (x + 1e-8).floor() as i64).collect();
        if m.iter().all(|&k| k == 0) {
            return g.clone();
        }
        let neg: Vec<i64> = m.iter().map(|k| -k).collect();
        let shift = &self.basis * DVector::from_iterator(m.len(), neg.iter().map(|&k| k as f64));
        let t = Isometry::translation_by(shift);
        let mut word = self.lattice_word(&neg);
        word.extend_from_slice(&g.word);
        GroupElement {
            isometry: t.mul(&g.isometry),
            word,
        }
    }

    fn same_coset(&self, a: &GroupElement, b: &GroupElement, tol: f64) -> bool {
        if (a.isometry.linear() - b.isometry.linear()).amax() > tol {
            return false;
        }
        let d = &self.basis_inv * (a.isometry.translation() - b.isometry.translation());
        let wrapped = d.map(|x| x - x.round());
        (&self.basis * wrapped).norm() <= tol
    }

    fn enumerate_ball(&self, center: &Point, radius: f64, tol: f64, cap: usize) -> Result<Vec<GroupElement>, GroupError> {
        let n = center.len();
        let reach = radius + tol;
        let row_norms: Vec<f64> = (0..n).map(|i| self.basis_inv.row(i).norm()).collect();
        let mut out = Vec::new();
        for rep in &self.cosets {
            // γ = t(Bm)∘rep moves the center by w + Bm.
            let w = rep.isometry.apply(center) - center;
            let mid = -(&self.basis_inv * &w);
            let lo: Vec<i64> = (0..n).map(|i| (mid[i] - reach * row_norms[i]).floor() as i64).collect();
            let hi: Vec<i64> = (0..n).map(|i| (mid[i] + reach * row_norms[i]).ceil() as i64).collect();
            let mut m = lo.clone();
            loop {
                let v = &self.basis * DVector::from_iterator(n, m.iter().map(|&k| k as f64));
                if (&w + &v).norm() <= reach {
                    let mut word = self.lattice_word(&m);
                    word.extend_from_slice(&rep.word);
                    out.push(GroupElement {
                        isometry: Isometry::translation_by(v).mul(&rep.isometry),
                        word,
                    });
                    if out.len() > cap {
                        return Err(GroupError::BudgetExceeded { cap });
                    }
                }
                // Odometer increment.
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    m[i] += 1;
                    if m[i] <= hi[i] {
                        break;
                    }
                    m[i] = lo[i];
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        Ok(out)
    }
}

fn sort_canonical(elements: &mut [GroupElement], tol: f64) {
    elements.sort_by(|a, b| lex_cmp(&a.isometry.flat_key(), &b.isometry.flat_key(), tol));
}

/// True when `A` has exactly one nonzero entry `±1` per row.
fn is_signed_permutation(a: &DMatrix<f64>, tol: f64) -> bool {
    a.row_iter().all(|row| {
        let big = row.iter().filter(|x| (x.abs() - 1.0).abs() <= tol).count();
        let zero = row.iter().filter(|x| x.abs() <= tol).count();
        big == 1 && zero == row.len() - 1
    })
}

/// Whether `g(region)` meets `region`. Exact for signed-permutation linear
/// parts; otherwise decided by alternating projections between the two boxes.
fn box_image_meets(g: &Isometry, region: &AxisBox, tol: f64) -> bool {
    if is_signed_permutation(g.linear(), tol) {
        let a = g.apply(&region.min);
        let b = g.apply(&region.max);
        return (0..region.dim()).all(|i| {
            let lo = a[i].min(b[i]);
            let hi = a[i].max(b[i]);
            hi >= region.min[i] - tol && lo <= region.max[i] + tol
        });
    }
    box_image_meets_by_projection(g, region)
}

fn box_image_meets_by_projection(g: &Isometry, region: &AxisBox) -> bool {
    let inv = g.inverse();
    let mut p = region.center();
    for _ in 0..500 {
        let q = g.apply(&region.clamp(&inv.apply(&p)));
        let r = region.clamp(&q);
        if (&q - &r).norm() <= 1e-7 {
            return true;
        }
        if (&r - &p).norm() <= 1e-14 {
            break;
        }
        p = r;
    }
    false
}

/// Finite set `{γ : γ·box ∩ box ≠ ∅}` found within a provably complete search.
#[derive(Debug, Clone)]
pub struct ProperCertificate {
    pub elements: Vec<GroupElement>,
    pub candidates_examined: usize,
    pub search_radius: f64,
}

/// A finite group of isometries with its Cayley table. The identity comes
/// first; the rest are in canonical order.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    elements: Vec<GroupElement>,
    table: Vec<Vec<usize>>,
    inverses: Vec<usize>,
    tol: f64,
}

impl FiniteGroup {
    pub fn from_elements(elements: Vec<GroupElement>, tol: f64) -> Result<Self, GroupError> {
        let n = elements
            .first()
            .map(|e| e.isometry.dim())
            .ok_or(GroupError::NotClosed)?;
        let mut unique: Vec<GroupElement> = Vec::with_capacity(elements.len());
        for e in elements {
            if !unique.iter().any(|u| u.approx_eq(&e, tol)) {
                unique.push(e);
            }
        }
        let id_pos = unique
            .iter()
            .position(|e| e.isometry.is_identity(tol))
            .ok_or(GroupError::NotClosed)?;
        let mut identity = unique.remove(id_pos);
        identity.isometry = Isometry::identity(n);
        sort_canonical(&mut unique, tol);
        unique.insert(0, identity);

        let m = unique.len();
        let find = |iso: &Isometry| unique.iter().position(|u| u.isometry.approx_eq(iso, tol));
        let mut table = vec![vec![0; m]; m];
        for i in 0..m {
            for j in 0..m {
                let prod = unique[i].isometry.mul(&unique[j].isometry);
                table[i][j] = find(&prod).ok_or(GroupError::NotClosed)?;
            }
        }
        let inverses = (0..m)
            .map(|i| (0..m).find(|&j| table[i][j] == 0).ok_or(GroupError::NotClosed))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            elements: unique,
            table,
            inverses,
            tol,
        })
    }

    pub fn trivial(n: usize, tol: f64) -> Self {
        Self {
            elements: vec![GroupElement::identity(n)],
            table: vec![vec![0]],
            inverses: vec![0],
            tol,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.elements[0].isometry.dim()
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse_of(&self, i: usize) -> usize {
        self.inverses[i]
    }

    pub fn index_of(&self, g: &Isometry) -> Option<usize> {
        self.elements.iter().position(|e| e.isometry.approx_eq(g, self.tol))
    }

    pub fn contains(&self, g: &Isometry) -> bool {
        self.index_of(g).is_some()
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut k = 1;
        let mut x = i;
        while x != 0 {
            x = self.table[x][i];
            k += 1;
        }
        k
    }

    /// Bitmask of `sub`'s elements inside `self`.
    pub fn mask_of(&self, sub: &FiniteGroup) -> Result<u64, GroupError> {
        if self.order() > 64 {
            return Err(GroupError::OrderTooLarge {
                order: self.order(),
                cap: 64,
            });
        }
        let mut mask = 0u64;
        for e in &sub.elements {
            let i = self.index_of(&e.isometry).ok_or(GroupError::NotASubgroup)?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn subgroup_from_mask(&self, mask: u64) -> FiniteGroup {
        let idx: Vec<usize> = (0..self.order()).filter(|i| mask >> i & 1 == 1).collect();
        let elements = idx.iter().map(|&i| self.elements[i].clone()).collect();
        // Masks produced here are closed by construction.
        FiniteGroup::from_elements(elements, self.tol).expect("closed subset")
    }

    fn closure(&self, mut mask: u64) -> u64 {
        mask |= 1;
        loop {
            let mut next = mask;
            for i in 0..self.order() {
                if mask >> i & 1 == 0 {
                    continue;
                }
                for j in 0..self.order() {
                    if mask >> j & 1 == 1 {
                        next |= 1 << self.table[i][j];
                    }
                }
            }
            if next == mask {
                return mask;
            }
            mask = next;
        }
    }

    fn conjugate_mask(&self, g: usize, mask: u64) -> u64 {
        let gi = self.inverses[g];
        let mut out = 0u64;
        for h in 0..self.order() {
            if mask >> h & 1 == 1 {
                out |= 1 << self.table[self.table[g][h]][gi];
            }
        }
        out
    }

    fn normalizer_mask(&self, mask: u64) -> u64 {
        (0..self.order())
            .filter(|&g| self.conjugate_mask(g, mask) == mask)
            .fold(0u64, |acc, g| acc | 1 << g)
    }

    /// Linear parts after recentring at `x`; fails if an element moves `x`.
    pub fn linearize_at(&self, x: &Point) -> Result<Vec<DMatrix<f64>>, GroupError> {
        self.elements
            .iter()
            .enumerate()
            .map(|(index, e)| {
                let displacement = e.isometry.conjugate_by_translation(&-x).translation().norm();
                if displacement > self.tol {
                    Err(GroupError::NotFixing { index, displacement })
                } else {
                    Ok(e.isometry.linear().clone())
                }
            })
            .collect()
    }
}

/// A subgroup of a finite group with normalizer and conjugacy data.
#[derive(Debug, Clone)]
pub struct SubgroupRecord {
    pub subgroup: FiniteGroup,
    pub parent: Arc<FiniteGroup>,
    pub normalizer: FiniteGroup,
    pub conjugacy_class_id: usize,
    pub class_size: usize,
    pub mask: u64,
}

impl SubgroupRecord {
    pub fn order(&self) -> usize {
        self.subgroup.order()
    }

    pub fn normalizer_index(&self) -> usize {
        self.parent.order() / self.normalizer.order()
    }
}

/// Every subgroup of `h`, each exactly once, ordered by order then membership.
pub fn subgroups(h: &FiniteGroup) -> Result<Vec<SubgroupRecord>, GroupError> {
    if h.order() > SUBGROUP_ORDER_CAP {
        return Err(GroupError::OrderTooLarge {
            order: h.order(),
            cap: SUBGROUP_ORDER_CAP,
        });
    }
    let parent = Arc::new(h.clone());
    let mut found: Vec<u64> = vec![1];
    let mut i = 0;
    while i < found.len() {
        let s = found[i];
        for g in 0..h.order() {
            if s >> g & 1 == 1 {
                continue;
            }
            let t = h.closure(s | 1 << g);
            if !found.contains(&t) {
                found.push(t);
            }
        }
        i += 1;
    }
    found.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));

    let mut class_of: HashMap<u64, usize> = HashMap::new();
    let mut next_class = 0;
    let mut records = Vec::with_capacity(found.len());
    for &mask in &found {
        let class = *class_of.entry(mask).or_insert_with(|| {
            next_class += 1;
            next_class - 1
        });
        for g in 0..h.order() {
            class_of.entry(h.conjugate_mask(g, mask)).or_insert(class);
        }
        let nmask = h.normalizer_mask(mask);
        let normalizer = h.subgroup_from_mask(nmask);
        records.push(SubgroupRecord {
            subgroup: h.subgroup_from_mask(mask),
            parent: Arc::clone(&parent),
            class_size: h.order() / normalizer.order(),
            normalizer,
            conjugacy_class_id: class,
            mask,
        });
    }
    Ok(records)
}

/// `N_G(H) = {g ∈ G : gHg⁻¹ = H}`.
pub fn normalizer(g: &FiniteGroup, h: &FiniteGroup) -> Result<FiniteGroup, GroupError> {
    let mask = g.mask_of(h)?;
    if g.closure(mask) != mask {
        return Err(GroupError::NotASubgroup);
    }
    Ok(g.subgroup_from_mask(g.normalizer_mask(mask)))
}

/// Whether `H₁` and `H₂` are conjugate inside `G`.
pub fn are_conjugate(g: &FiniteGroup, h1: &FiniteGroup, h2: &FiniteGroup) -> Result<bool, GroupError> {
    let m1 = g.mask_of(h1)?;
    let m2 = g.mask_of(h2)?;
    Ok((0..g.order()).any(|x| g.conjugate_mask(x, m1) == m2))
}

/// Linear parts of `h`, recentred at `x`.
pub fn linearize_at(h: &FiniteGroup, x: &Point) -> Result<Vec<DMatrix<f64>>, GroupError> {
    h.linearize_at(x)
}
