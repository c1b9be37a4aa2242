use nalgebra::DVector;

use crate::geom::{common_fixed_directions, lex_cmp, AffineSubspace, AxisBox, Isometry, IsometryKind, Point};
use crate::group::{FiniteGroup, GeneratedGroup, GroupElement, ProperCertificate};

use super::StrataError;

/// A compact flat orbifold `ℝⁿ/Γ` together with a box whose translates cover ℝⁿ.
#[derive(Debug, Clone)]
pub struct OrbifoldModel {
    label: String,
    group: GeneratedGroup,
    fundamental_box: AxisBox,
    certificate: ProperCertificate,
}

impl OrbifoldModel {
    /// Validates the box, certifies properness on it and checks that its
    /// translates cover a neighbourhood of it.
    pub fn new(label: impl Into<String>, group: GeneratedGroup, fundamental_box: AxisBox) -> Result<Self, StrataError> {
        if fundamental_box.dim() != group.dimension() {
            return Err(StrataError::WrongDimension {
                expected: group.dimension(),
                found: fundamental_box.dim(),
            });
        }
        if fundamental_box.is_degenerate() {
            return Err(StrataError::DegenerateBox);
        }
        let certificate = group.properness_check(&fundamental_box)?;
        let model = Self {
            label: label.into(),
            group,
            fundamental_box,
            certificate,
        };
        model.check_cover()?;
        Ok(model)
    }

    fn check_cover(&self) -> Result<(), StrataError> {
        let n = self.dimension();
        let b = &self.fundamental_box;
        let margin = (0..n).map(|i| b.max[i] - b.min[i]).fold(f64::INFINITY, f64::min) * 0.1;
        let outer = b.expanded(margin);
        let steps = [0.0, 0.37, 0.71, 1.0];
        let total = steps.len().pow(n as u32);
        for idx in 0..total {
            let mut rest = idx;
            let u: Vec<f64> = (0..n)
                .map(|_| {
                    let s = steps[rest % steps.len()];
                    rest /= steps.len();
                    s
                })
                .collect();
            let p = outer.lerp(&u);
            if self.to_box(&p).is_err() {
                return Err(StrataError::NotCovering { point: p.iter().copied().collect() });
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.group.dimension()
    }

    pub fn group(&self) -> &GeneratedGroup {
        &self.group
    }

    pub fn fundamental_box(&self) -> &AxisBox {
        &self.fundamental_box
    }

    pub fn tol(&self) -> f64 {
        self.group.tol()
    }

    pub fn certificate(&self) -> &ProperCertificate {
        &self.certificate
    }

    /// Elements `γ` with `γ·box ∩ box ≠ ∅`.
    pub fn box_moves(&self) -> &[GroupElement] {
        &self.certificate.elements
    }

    /// Some `γ` with `γ·p` in the box, preferring images close to the box centre.
    pub fn to_box(&self, p: &Point) -> Result<(GroupElement, Point), StrataError> {
        let tol = self.tol();
        let b = &self.fundamental_box;
        if b.contains(p, tol) {
            return Ok((GroupElement::identity(self.dimension()), p.clone()));
        }
        let c = b.center();
        let radius = (p - &c).norm() + b.half_diagonal() + tol;
        let ball = self.group.enumerate_ball_complete(p, radius)?;
        ball.into_iter()
            .map(|g| {
                let q = g.isometry.apply(p);
                (g, q)
            })
            .filter(|(_, q)| b.contains(q, tol))
            .min_by(|(_, q1), (_, q2)| {
                let d1 = (q1 - &c).norm();
                let d2 = (q2 - &c).norm();
                if (d1 - d2).abs() > tol {
                    d1.total_cmp(&d2)
                } else {
                    lex_cmp(q1.as_slice(), q2.as_slice(), tol)
                }
            })
            .ok_or_else(|| StrataError::NotCovering { point: p.iter().copied().collect() })
    }

    pub fn isotropy_at(&self, x: &Point) -> Result<FiniteGroup, StrataError> {
        Ok(self.group.isotropy_at(x)?)
    }

    /// Dimension of the subspace fixed by the linearised isotropy at `x`.
    pub fn singular_dimension(&self, x: &Point) -> Result<usize, StrataError> {
        let iso = self.isotropy_at(x)?;
        Ok(fixed_dimension(&iso, x, self.tol())?)
    }

    /// Pure translations of `Γ` along the direction space of `flat`, shortest
    /// first, chosen linearly independent; at most `need` of them.
    pub(crate) fn translations_along(&self, flat: &AffineSubspace, need: usize) -> Result<Vec<Point>, StrataError> {
        let tol = self.tol();
        let p = flat.base_point().clone();
        let diam = self.fundamental_box.diameter();
        let mut radius = diam;
        while radius <= 64.0 * diam {
            let ball = self.group.enumerate_ball_complete(&p, radius)?;
            let mut found: Vec<Point> = ball
                .iter()
                .filter(|g| g.isometry.linear_is_identity(tol))
                .map(|g| g.isometry.translation().clone())
                .filter(|b| b.norm() > tol && flat.contains_direction(b, tol))
                .collect();
            found.sort_by(|a, b| {
                let (na, nb) = (a.norm(), b.norm());
                if (na - nb).abs() > tol {
                    na.total_cmp(&nb)
                } else {
                    lex_cmp(b.as_slice(), a.as_slice(), tol)
                }
            });
            let mut chosen: Vec<Point> = Vec::new();
            for v in found {
                let mut trial = chosen.clone();
                trial.push(v.clone());
                if crate::geom::orthonormalize(&trial, p.len(), tol).len() == trial.len() {
                    chosen = trial;
                    if chosen.len() == need {
                        return Ok(chosen);
                    }
                }
            }
            radius *= 2.0;
        }
        Err(StrataError::NonCompactFlat)
    }

    /// Parameters `t ∈ [0, 1]` along `a → b` where a point of strictly larger
    /// isotropy than the pointwise stabiliser of `flat` lies on the segment.
    /// A segment contained in a lower flat reports `0`.
    pub(crate) fn singular_crossings(&self, a: &Point, b: &Point, flat: &AffineSubspace) -> Result<Vec<f64>, StrataError> {
        let tol = self.tol();
        let d = b - a;
        let len = d.norm();
        let mid = (a + b) * 0.5;
        let line = if len > tol {
            AffineSubspace::line(a.clone(), d.clone())
        } else {
            AffineSubspace::point(a.clone())
        };
        let ball = self.group.enumerate_ball_complete(&mid, len + tol)?;
        let mut out = Vec::new();
        for g in &ball {
            if g.isometry.classify(tol) != IsometryKind::Elliptic {
                continue;
            }
            let Some(fix) = g.isometry.fixed_set(tol) else { continue };
            if fix.contains_subspace(flat, tol) {
                continue;
            }
            let Some(hit) = fix.intersect(&line, tol) else { continue };
            if hit.dim() > 0 {
                out.push(0.0);
                continue;
            }
            let t = if len > tol {
                (hit.base_point() - a).dot(&d) / (len * len)
            } else {
                0.0
            };
            let slack = if len > tol { tol / len } else { 0.0 };
            if t >= -slack && t <= 1.0 + slack {
                out.push(t.clamp(0.0, 1.0));
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() * len.max(1.0) <= tol);
        Ok(out)
    }
}

/// `dim` of the common fixed subspace of the linearised `iso` at `x`.
pub fn fixed_dimension(iso: &FiniteGroup, x: &Point, tol: f64) -> Result<usize, crate::group::GroupError> {
    let lin = iso.linearize_at(x)?;
    Ok(common_fixed_directions(&lin, x.len(), tol).len())
}

/// Singular dimension of `x` in `model`.
pub fn singular_dimension(model: &OrbifoldModel, x: &Point) -> Result<usize, StrataError> {
    model.singular_dimension(x)
}

/// A point of `flat` inside `region` (expanded by `tol`), if any.
pub(crate) fn flat_meets_box(flat: &AffineSubspace, region: &AxisBox, tol: f64) -> Option<Point> {
    let grown = region.expanded(tol);
    if flat.dim() == 0 {
        let p = flat.base_point();
        return grown.contains(p, tol).then(|| p.clone());
    }
    if flat.dim() == 1 {
        let p = flat.base_point();
        let u = &flat.basis()[0];
        let reach = (p - region.center()).norm() + region.diameter() + 1.0;
        let a = p - u * reach;
        let b = p + u * reach;
        return grown.clip_segment(&a, &b).map(|(x, y)| (x + y) * 0.5);
    }
    let mut p = flat.project(&region.center());
    for _ in 0..2000 {
        let q = grown.clamp(&p);
        let r = flat.project(&q);
        if (&q - &r).norm() <= 1e-7 {
            return Some(q);
        }
        if (&r - &p).norm() <= 1e-15 {
            break;
        }
        p = r;
    }
    None
}

/// Unit vector of `outer`'s direction space orthogonal to `inner`'s, for a
/// hyperplane `inner` inside `outer`.
pub(crate) fn normal_within(outer: &AffineSubspace, inner: &AffineSubspace) -> Point {
    let n = outer.ambient_dim();
    let mut best = DVector::zeros(n);
    for e in outer.basis() {
        let r = e - inner.project_direction(e);
        if r.norm() > best.norm() {
            best = r;
        }
    }
    best.normalize()
}

/// Restriction of a linear map to the direction space of `flat`, in its basis.
pub(crate) fn restrict_linear(g: &Isometry, flat: &AffineSubspace) -> nalgebra::DMatrix<f64> {
    let k = flat.dim();
    nalgebra::DMatrix::from_fn(k, k, |r, c| flat.basis()[r].dot(&g.apply_vector(&flat.basis()[c])))
}
