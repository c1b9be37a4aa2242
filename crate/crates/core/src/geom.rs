//! Euclidean isometry algebra in ℝⁿ.
//!
//! Everything here works in double precision with a single absolute tolerance
//! (see [`TOL`]). Rank decisions, and therefore the dimension of every fixed
//! subspace, are made by one routine ([`least_squares`]) using the same cutoff.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// A point or a tangent vector of ℝⁿ.
pub type Point = DVector<f64>;

/// Default absolute tolerance for residuals, orthogonality and rank cutoffs.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("linear part is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("orthogonality violated: max |AᵀA - I| = {residual:e}")]
    NotOrthogonal { residual: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("segment parameters out of order: t0 = {t0}, t1 = {t1}")]
    BadInterval { t0: f64, t1: f64 },
    #[error("segment endpoints do not meet (gap {gap:e})")]
    EndpointMismatch { gap: f64 },
    #[error("join is not smooth (velocity jump {jump:e})")]
    NonSmoothJoin { jump: f64 },
}

fn check_finite(v: &DVector<f64>) -> Result<(), GeomError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite)
    }
}

/// Result of an SVD-based least-squares solve of `m·x = rhs`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// Minimum-norm minimiser of `|m·x - rhs|`.
    pub solution: Point,
    /// `|m·solution - rhs|`.
    pub residual: f64,
    /// Orthonormal basis of `ker(m)`, singular values `<= cutoff` count as zero.
    pub kernel: Vec<Point>,
}

/// Minimum-norm least squares with an explicit singular-value cutoff.
pub fn least_squares(m: &DMatrix<f64>, rhs: &DVector<f64>, cutoff: f64) -> LeastSquares {
    let cols = m.ncols();
    // Pad to at least `cols` rows so that the SVD returns a full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let mut b = DVector::zeros(rows);
    b.rows_mut(0, rhs.len()).copy_from(rhs);

    let svd = padded.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    let mut solution = DVector::zeros(cols);
    let mut kernel = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        let v = v_t.row(i).transpose();
        if sigma > cutoff {
            let coeff = u.column(i).dot(&b) / sigma;
            solution += v * coeff;
        } else {
            kernel.push(v);
        }
    }
    let residual = (&padded * &solution - &b).norm();
    LeastSquares {
        solution,
        residual,
        kernel,
    }
}

/// Orthonormal basis for the span of `vectors`, dropping dependent directions.
pub fn orthonormalize(vectors: &[Point], n: usize, cutoff: f64) -> Vec<Point> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| u.column(i).into_owned())
        .filter(|c| c.len() == n)
        .collect()
}

/// An isometry `x ↦ A·x + b` of ℝⁿ.
#[derive(Clone, PartialEq)]
pub struct Isometry {
    linear: DMatrix<f64>,
    translation: Point,
}

impl fmt::Debug for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Isometry(A=[")?;
        for r in 0..self.dim() {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.dim() {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:.4}", self.linear[(r, c)])?;
            }
        }
        write!(f, "], b=[")?;
        for (i, x) in self.translation.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x:.4}")?;
        }
        write!(f, "])")
    }
}

/// Identity / elliptic (has a fixed point) / hyperbolic (fixed-point free).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum IsometryKind {
    Identity,
    Elliptic,
    Hyperbolic,
}

/// Minimal displacement `min |g·x - x|` and the affine set where it is attained.
#[derive(Debug, Clone)]
pub struct Displacement {
    pub value: f64,
    pub axis: AffineSubspace,
}

impl Isometry {
    /// Validated constructor; orthogonality is checked at tolerance `tol`.
    pub fn new(linear: DMatrix<f64>, translation: Point, tol: f64) -> Result<Self, GeomError> {
        if linear.nrows() != linear.ncols() {
            return Err(GeomError::NotSquare {
                rows: linear.nrows(),
                cols: linear.ncols(),
            });
        }
        if translation.len() != linear.nrows() {
            return Err(GeomError::DimensionMismatch {
                expected: linear.nrows(),
                found: translation.len(),
            });
        }
        if !linear.iter().all(|x| x.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        check_finite(&translation)?;
        let n = linear.nrows();
        let gram = linear.transpose() * &linear - DMatrix::identity(n, n);
        let residual = gram.amax();
        if residual > tol {
            return Err(GeomError::NotOrthogonal { residual });
        }
        Ok(Self {
            linear,
            translation,
        })
    }

    /// Builds from a row-major linear part and a translation.
    pub fn from_row_major(n: usize, linear: &[f64], translation: &[f64], tol: f64) -> Result<Self, GeomError> {
        if linear.len() != n * n {
            return Err(GeomError::DimensionMismatch {
                expected: n * n,
                found: linear.len(),
            });
        }
        if translation.len() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                found: translation.len(),
            });
        }
        Self::new(
            DMatrix::from_row_slice(n, n, linear),
            DVector::from_column_slice(translation),
            tol,
        )
    }

    /// Unchecked constructor for products of already valid isometries.
    pub(crate) fn from_parts(linear: DMatrix<f64>, translation: Point) -> Self {
        Self {
            linear,
            translation,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts(DMatrix::identity(n, n), DVector::zeros(n))
    }

    pub fn translation_by(v: Point) -> Self {
        let n = v.len();
        Self::from_parts(DMatrix::identity(n, n), v)
    }

    /// Pure linear map; the caller guarantees orthogonality.
    pub fn linear_map(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        Self::from_parts(a, DVector::zeros(n))
    }

    /// Rotation by `angle` about the origin of ℝ².
    pub fn rotation_2d(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::linear_map(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Rotation of ℝ³ by `angle` about the line through the origin along `axis`.
    pub fn rotation_3d(axis: [f64; 3], angle: f64) -> Self {
        let k = nalgebra::Vector3::from(axis).normalize();
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(k), angle);
        let m = rot.matrix();
        Self::linear_map(DMatrix::from_fn(3, 3, |r, c| m[(r, c)]))
    }

    /// Point reflection `x ↦ 2c - x`.
    pub fn point_reflection(center: &Point) -> Self {
        let n = center.len();
        Self::from_parts(-DMatrix::identity(n, n), center * 2.0)
    }

    /// `self` conjugated so that its fixed behaviour is moved to `x ↦ t + x`:
    /// returns `T ∘ self ∘ T⁻¹` with `T` the translation by `shift`.
    pub fn conjugate_by_translation(&self, shift: &Point) -> Self {
        let b = &self.translation + shift - &self.linear * shift;
        Self::from_parts(self.linear.clone(), b)
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn translation(&self) -> &Point {
        &self.translation
    }

    pub fn determinant(&self) -> f64 {
        self.linear.determinant()
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry, GeomError> {
        if self.dim() != other.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.mul(other))
    }

    /// Composition without the dimension check.
    pub(crate) fn mul(&self, other: &Isometry) -> Isometry {
        Isometry::from_parts(
            &self.linear * &other.linear,
            &self.linear * &other.translation + &self.translation,
        )
    }

    pub fn inverse(&self) -> Isometry {
        let at = self.linear.transpose();
        let b = -(&at * &self.translation);
        Isometry::from_parts(at, b)
    }

    /// `g·h·g⁻¹`.
    pub fn conjugate(&self, h: &Isometry) -> Isometry {
        self.mul(h).mul(&self.inverse())
    }

    pub fn apply(&self, x: &Point) -> Point {
        &self.linear * x + &self.translation
    }

    /// Action on tangent vectors.
    pub fn apply_vector(&self, v: &Point) -> Point {
        &self.linear * v
    }

    pub fn displacement_at(&self, x: &Point) -> f64 {
        (self.apply(x) - x).norm()
    }

    /// Entrywise comparison of linear parts and translations.
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        self.dim() == other.dim()
            && (&self.linear - &other.linear).amax() <= tol
            && (&self.translation - &other.translation).norm() <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let n = self.dim();
        (&self.linear - DMatrix::<f64>::identity(n, n)).amax() <= tol && self.translation.norm() <= tol
    }

    pub fn linear_is_identity(&self, tol: f64) -> bool {
        let n = self.dim();
        (&self.linear - DMatrix::<f64>::identity(n, n)).amax() <= tol
    }

    /// Splits `b` against `ker(A - I)` and returns the minimal displacement and
    /// its argmin set. Closed form: with `b = b∥ + b⊥`, the minimum is `|b∥|`
    /// attained on `{x : (A - I)x = -b⊥}`.
    pub fn min_displacement(&self, tol: f64) -> Displacement {
        let n = self.dim();
        let m = &self.linear - DMatrix::<f64>::identity(n, n);
        let zero = DVector::zeros(n);
        let ker = least_squares(&m, &zero, tol).kernel;
        let mut parallel = DVector::zeros(n);
        for k in &ker {
            parallel += k * k.dot(&self.translation);
        }
        let perp = &self.translation - &parallel;
        let ls = least_squares(&m, &(-perp), tol);
        let axis = AffineSubspace::from_orthonormal(ls.solution, ls.kernel);
        Displacement {
            value: parallel.norm(),
            axis,
        }
    }

    /// Solution set of `A·x + b = x`, or `None` for a hyperbolic isometry.
    pub fn fixed_set(&self, tol: f64) -> Option<AffineSubspace> {
        let d = self.min_displacement(tol);
        (d.value <= tol).then_some(d.axis)
    }

    pub fn classify(&self, tol: f64) -> IsometryKind {
        if self.is_identity(tol) {
            IsometryKind::Identity
        } else if self.min_displacement(tol).value <= tol {
            IsometryKind::Elliptic
        } else {
            IsometryKind::Hyperbolic
        }
    }

    /// Row-major linear entries followed by the translation, for stable ordering.
    pub fn flat_key(&self) -> Vec<f64> {
        let n = self.dim();
        let mut key = Vec::with_capacity(n * n + n);
        for r in 0..n {
            for c in 0..n {
                key.push(self.linear[(r, c)]);
            }
        }
        key.extend(self.translation.iter());
        key
    }

    pub fn linear_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n * n).map(|i| self.linear[(i / n, i % n)]).collect()
    }
}

/// Lexicographic comparison of float slices with a tolerance band.
pub fn lex_cmp(a: &[f64], b: &[f64], tol: f64) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x.total_cmp(y);
        }
    }
    a.len().cmp(&b.len())
}

/// Intersection of the fixed sets of all `gs`. `None` when empty.
pub fn common_fixed_set(gs: &[Isometry], tol: f64) -> Option<AffineSubspace> {
    let n = gs.first()?.dim();
    let rows = gs.len() * n;
    let mut m = DMatrix::zeros(rows, n);
    let mut rhs = DVector::zeros(rows);
    for (i, g) in gs.iter().enumerate() {
        let block = g.linear() - DMatrix::<f64>::identity(n, n);
        m.view_mut((i * n, 0), (n, n)).copy_from(&block);
        rhs.rows_mut(i * n, n).copy_from(&(-g.translation()));
    }
    let ls = least_squares(&m, &rhs, tol);
    if ls.residual > tol {
        return None;
    }
    let sub = AffineSubspace::from_orthonormal(ls.solution, ls.kernel);
    // The stacked residual can hide a per-element miss; confirm on the base point.
    gs.iter()
        .all(|g| g.displacement_at(sub.base_point()) <= tol)
        .then_some(sub)
}

/// Common fixed subspace of a set of linear maps.
pub fn common_fixed_directions(maps: &[DMatrix<f64>], n: usize, tol: f64) -> Vec<Point> {
    if maps.is_empty() {
        return (0..n).map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    }
    let mut m = DMatrix::zeros(maps.len() * n, n);
    for (i, a) in maps.iter().enumerate() {
        m.view_mut((i * n, 0), (n, n))
            .copy_from(&(a - DMatrix::<f64>::identity(n, n)));
    }
    least_squares(&m, &DVector::zeros(maps.len() * n), tol).kernel
}

/// `p + span(basis)` with an orthonormal basis and the minimum-norm base point.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    base_point: Point,
    basis: Vec<Point>,
}

impl AffineSubspace {
    /// From a point and any spanning set.
    pub fn new(point: Point, spanning: &[Point], tol: f64) -> Self {
        let n = point.len();
        let basis = orthonormalize(spanning, n, tol);
        Self::from_orthonormal(point, basis)
    }

    pub(crate) fn from_orthonormal(point: Point, basis: Vec<Point>) -> Self {
        let mut base = point;
        for e in &basis {
            let c = e.dot(&base);
            base -= e * c;
        }
        Self {
            base_point: base,
            basis,
        }
    }

    pub fn point(p: Point) -> Self {
        Self::from_orthonormal(p, Vec::new())
    }

    pub fn whole(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        Self::from_orthonormal(DVector::zeros(n), basis)
    }

    pub fn line(point: Point, direction: Point) -> Self {
        let d = direction.normalize();
        Self::from_orthonormal(point, vec![d])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base_point.len()
    }

    pub fn base_point(&self) -> &Point {
        &self.base_point
    }

    pub fn basis(&self) -> &[Point] {
        &self.basis
    }

    pub fn point_at(&self, coeffs: &[f64]) -> Point {
        let mut p = self.base_point.clone();
        for (e, c) in self.basis.iter().zip(coeffs) {
            p += e * *c;
        }
        p
    }

    /// Orthogonal projection of a direction onto the direction space.
    pub fn project_direction(&self, v: &Point) -> Point {
        let mut out = DVector::zeros(v.len());
        for e in &self.basis {
            out += e * e.dot(v);
        }
        out
    }

    pub fn project(&self, p: &Point) -> Point {
        &self.base_point + self.project_direction(&(p - &self.base_point))
    }

    pub fn distance(&self, p: &Point) -> f64 {
        (p - self.project(p)).norm()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    pub fn contains_direction(&self, v: &Point, tol: f64) -> bool {
        (v - self.project_direction(v)).norm() <= tol
    }

    /// Orthonormal basis of the orthogonal complement of the direction space.
    pub fn normals(&self, tol: f64) -> Vec<Point> {
        let n = self.ambient_dim();
        if self.basis.is_empty() {
            return AffineSubspace::whole(n).basis;
        }
        let bt = DMatrix::from_columns(&self.basis).transpose();
        least_squares(&bt, &DVector::zeros(bt.nrows()), tol).kernel
    }

    pub fn intersect(&self, other: &AffineSubspace, tol: f64) -> Option<AffineSubspace> {
        let n = self.ambient_dim();
        let na = self.normals(tol);
        let nb = other.normals(tol);
        let rows = na.len() + nb.len();
        if rows == 0 {
            return Some(AffineSubspace::whole(n));
        }
        let mut m = DMatrix::zeros(rows, n);
        let mut rhs = DVector::zeros(rows);
        for (i, v) in na.iter().enumerate() {
            m.set_row(i, &v.transpose());
            rhs[i] = v.dot(&self.base_point);
        }
        for (j, v) in nb.iter().enumerate() {
            m.set_row(na.len() + j, &v.transpose());
            rhs[na.len() + j] = v.dot(&other.base_point);
        }
        let ls = least_squares(&m, &rhs, tol);
        if ls.residual > tol {
            return None;
        }
        let sub = AffineSubspace::from_orthonormal(ls.solution, ls.kernel);
        (self.contains(sub.base_point(), tol) && other.contains(sub.base_point(), tol)).then_some(sub)
    }

    pub fn contains_subspace(&self, other: &AffineSubspace, tol: f64) -> bool {
        self.contains(other.base_point(), tol)
            && other.basis.iter().all(|e| self.contains_direction(e, tol))
    }

    pub fn same_as(&self, other: &AffineSubspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other, tol)
    }

    /// Image under an isometry.
    pub fn transformed(&self, g: &Isometry) -> AffineSubspace {
        AffineSubspace::from_orthonormal(
            g.apply(&self.base_point),
            self.basis.iter().map(|e| g.apply_vector(e)).collect(),
        )
    }
}

/// How [`concatenate`] treats a corner at the join.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinPolicy {
    Smooth,
    CornerAllowed,
}

/// A constant-velocity segment `t ↦ start + (t - t0)·velocity`, `t ∈ [t0, t1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    start: Point,
    velocity: Point,
    t0: f64,
    t1: f64,
}

/// Outcome of joining two segments.
#[derive(Debug, Clone, PartialEq)]
pub enum Concatenation {
    Smooth(GeodesicSegment),
    Broken(Vec<GeodesicSegment>),
}

impl GeodesicSegment {
    pub fn new(start: Point, velocity: Point, t0: f64, t1: f64) -> Result<Self, GeomError> {
        if start.len() != velocity.len() {
            return Err(GeomError::DimensionMismatch {
                expected: start.len(),
                found: velocity.len(),
            });
        }
        check_finite(&start)?;
        check_finite(&velocity)?;
        if !(t0.is_finite() && t1.is_finite()) || t0 > t1 {
            return Err(GeomError::BadInterval { t0, t1 });
        }
        Ok(Self {
            start,
            velocity,
            t0,
            t1,
        })
    }

    /// Segment from `a` to `b` over `[0, 1]`.
    pub fn between(a: &Point, b: &Point) -> Self {
        Self {
            start: a.clone(),
            velocity: b - a,
            t0: 0.0,
            t1: 1.0,
        }
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn velocity(&self) -> &Point {
        &self.velocity
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn evaluate(&self, t: f64) -> Point {
        &self.start + &self.velocity * (t - self.t0)
    }

    pub fn end(&self) -> Point {
        self.evaluate(self.t1)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn length(&self) -> f64 {
        self.speed() * (self.t1 - self.t0)
    }

    /// Same image traversed backwards over the same interval.
    pub fn reverse(&self) -> Self {
        Self {
            start: self.end(),
            velocity: -&self.velocity,
            t0: self.t0,
            t1: self.t1,
        }
    }

    pub fn translate(&self, g: &Isometry) -> Self {
        Self {
            start: g.apply(&self.start),
            velocity: g.apply_vector(&self.velocity),
            t0: self.t0,
            t1: self.t1,
        }
    }

    /// Constant-speed reparametrisation onto `[t0, t1]`.
    pub fn reparametrized(&self, t0: f64, t1: f64) -> Result<Self, GeomError> {
        if t0.partial_cmp(&t1) != Some(std::cmp::Ordering::Less) {
            return Err(GeomError::BadInterval { t0, t1 });
        }
        let scale = (self.t1 - self.t0) / (t1 - t0);
        Ok(Self {
            start: self.start.clone(),
            velocity: &self.velocity * scale,
            t0,
            t1,
        })
    }

    /// Restriction to `[a, b] ⊆ [t0, t1]`.
    pub fn restricted(&self, a: f64, b: f64) -> Result<Self, GeomError> {
        if a > b || a < self.t0 - TOL || b > self.t1 + TOL {
            return Err(GeomError::BadInterval { t0: a, t1: b });
        }
        Ok(Self {
            start: self.evaluate(a),
            velocity: self.velocity.clone(),
            t0: a,
            t1: b,
        })
    }
}

/// Joins `a` then `b`. A smooth join requires matching endpoint and equal
/// velocity; the result is then one segment over `[a.t0, a.t1 + (b.t1 - b.t0)]`.
pub fn concatenate(
    a: &GeodesicSegment,
    b: &GeodesicSegment,
    policy: JoinPolicy,
    tol: f64,
) -> Result<Concatenation, GeomError> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let gap = (a.end() - &b.start).norm();
    if gap > tol {
        return Err(GeomError::EndpointMismatch { gap });
    }
    let jump = (&a.velocity - &b.velocity).norm();
    if jump <= tol {
        return Ok(Concatenation::Smooth(GeodesicSegment {
            start: a.start.clone(),
            velocity: a.velocity.clone(),
            t0: a.t0,
            t1: a.t1 + (b.t1 - b.t0),
        }));
    }
    match policy {
        JoinPolicy::Smooth => Err(GeomError::NonSmoothJoin { jump }),
        JoinPolicy::CornerAllowed => Ok(Concatenation::Broken(vec![a.clone(), b.clone()])),
    }
}

/// An axis-aligned box `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub min: Point,
    pub max: Point,
}

impl AxisBox {
    pub fn new(min: Point, max: Point) -> Result<Self, GeomError> {
        if min.len() != max.len() {
            return Err(GeomError::DimensionMismatch {
                expected: min.len(),
                found: max.len(),
            });
        }
        check_finite(&min)?;
        check_finite(&max)?;
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.min.iter().zip(self.max.iter()).any(|(a, b)| b.partial_cmp(a) != Some(std::cmp::Ordering::Greater))
    }

    pub fn center(&self) -> Point {
        (&self.min + &self.max) * 0.5
    }

    pub fn half_diagonal(&self) -> f64 {
        (&self.max - &self.min).norm() * 0.5
    }

    pub fn diameter(&self) -> f64 {
        (&self.max - &self.min).norm()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        p.iter()
            .zip(self.min.iter().zip(self.max.iter()))
            .all(|(x, (lo, hi))| *x >= lo - tol && *x <= hi + tol)
    }

    pub fn clamp(&self, p: &Point) -> Point {
        DVector::from_fn(p.len(), |i, _| p[i].clamp(self.min[i], self.max[i]))
    }

    /// Point at relative coordinates `u ∈ [0,1]ⁿ`.
    pub fn lerp(&self, u: &[f64]) -> Point {
        DVector::from_fn(self.dim(), |i, _| self.min[i] + u[i] * (self.max[i] - self.min[i]))
    }

    pub fn expanded(&self, margin: f64) -> AxisBox {
        AxisBox {
            min: self.min.add_scalar(-margin),
            max: self.max.add_scalar(margin),
        }
    }

    /// Clips the straight segment `a → b` to the box (Liang–Barsky).
    pub fn clip_segment(&self, a: &Point, b: &Point) -> Option<(Point, Point)> {
        let d = b - a;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for i in 0..self.dim() {
            if d[i].abs() < 1e-15 {
                if a[i] < self.min[i] || a[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let t1 = (self.min[i] - a[i]) / d[i];
            let t2 = (self.max[i] - a[i]) / d[i];
            let (e, x) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
            lo = lo.max(e);
            hi = hi.min(x);
            if lo > hi {
                return None;
            }
        }
        Some((a + &d * lo, a + &d * hi))
    }
}
