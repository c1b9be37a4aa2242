use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geom::{AxisBox, Isometry};
use crate::group::{subgroups, GeneratedGroup};
use crate::scenarios::{example_names, load_example};

fn v(xs: &[f64]) -> Point {
    Point::from_row_slice(xs)
}

fn strat(name: &str) -> (OrbifoldModel, Stratification) {
    let model = load_example(name).unwrap();
    let s = stratify(&model).unwrap();
    (model, s)
}

fn sigma0_orders(s: &Stratification) -> Vec<usize> {
    let mut orders: Vec<usize> = s.by_k(0).map(|c| c.isotropy.order()).collect();
    orders.sort_unstable();
    orders
}

/// Signature used to compare stratifications: `(k, |Γ_S|, closed)` sorted.
fn signature(s: &Stratification) -> Vec<(usize, usize, bool)> {
    let mut sig: Vec<_> = s.components.iter().map(|c| (c.k, c.isotropy.order(), c.is_closed)).collect();
    sig.sort_unstable();
    sig
}

fn component_along(s: &Stratification, k: usize, order: usize, dir: &[f64]) -> Vec<usize> {
    let d = v(dir);
    s.by_k(k)
        .filter(|c| c.isotropy.order() == order && c.direction().is_some_and(|u| u.dot(&d).abs() > 1.0 - 1e-9))
        .map(|c| c.id)
        .collect()
}

#[test]
fn torus_has_no_singular_points() {
    let (_, s) = strat("torus2");
    assert!(s.is_singular_empty());
    assert_eq!(s.components.len(), 1);
    assert_eq!(s.components[0].k, 2);
    assert!(s.components[0].is_closed);
}

#[test]
fn pillowcase_has_four_cone_points() {
    let (model, s) = strat("pillowcase_p2");
    assert_eq!(sigma0_orders(&s), vec![2, 2, 2, 2]);
    assert_eq!(s.by_k(1).count(), 0);
    let reg = s.by_k(2).next().unwrap();
    assert!(!reg.is_closed);
    assert_eq!(reg.frontier.len(), 4);
    for p in [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]] {
        assert_eq!(model.singular_dimension(&v(&p)).unwrap(), 0);
    }
    let ids: std::collections::BTreeSet<usize> = [[1.0, 1.0], [0.5, 1.0], [1.0, 0.5], [0.5, 0.5]]
        .iter()
        .map(|p| s.locate(&model, &v(p)).unwrap())
        .collect();
    assert_eq!(ids.len(), 4);
}

#[test]
fn p4_orders() {
    let (_, s) = strat("wallpaper_p4");
    assert_eq!(sigma0_orders(&s), vec![2, 4, 4]);
    assert_eq!(s.by_k(1).count(), 0);
}

#[test]
fn hexagonal_strata() {
    let (model, s) = strat("hexagonal3d_d3");
    assert_eq!(sigma0_orders(&s), vec![6, 6]);
    assert_eq!(s.by_k(1).count(), 4);
    assert_eq!(model.singular_dimension(&v(&[0.0, 0.0, 0.0])).unwrap(), 0);
    assert_eq!(model.singular_dimension(&v(&[0.0, 0.0, 0.3])).unwrap(), 1);
    assert_eq!(model.singular_dimension(&v(&[0.1, 0.2, 0.3])).unwrap(), 3);
    let z = component_along(&s, 1, 3, &[0.0, 0.0, 1.0]);
    assert_eq!(z.len(), 2);
    let open: Vec<_> = z.iter().map(|&id| s.component(id).unwrap()).filter(|c| !c.is_closed).collect();
    assert_eq!(open.len(), 1);
    assert!((open[0].segment_length().unwrap() - 0.5).abs() < 1e-9);
    assert!(open[0].frontier.iter().all(|f| f.isotropy.order() == 6));
    assert_eq!(component_along(&s, 1, 2, &[1.0, 0.0, 0.0]).len(), 2);
}

#[test]
fn kleinfour_strata() {
    let (_, s) = strat("kleinfour3d");
    assert_eq!(sigma0_orders(&s), vec![4; 8]);
    assert_eq!(s.by_k(1).count(), 12);
    for c in s.by_k(1) {
        assert_eq!(c.isotropy.order(), 2);
        assert!((c.segment_length().unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(c.frontier.len(), 2);
    }
}

#[test]
fn frontier_behaviour_in_hexagonal_model() {
    let (model, s) = strat("hexagonal3d_d3");
    let z = component_along(&s, 1, 3, &[0.0, 0.0, 1.0]);
    let zc = z.iter().map(|&id| s.component(id).unwrap()).find(|c| !c.is_closed).unwrap();
    for f in &zc.frontier {
        assert_eq!(
            analyze_frontier_sigma1(&model, &s, zc.id, &f.box_point).unwrap(),
            FrontierBehavior::End
        );
    }
    for id in component_along(&s, 1, 2, &[1.0, 0.0, 0.0]) {
        let c = s.component(id).unwrap();
        for f in &c.frontier {
            // The translation by a lattice vector along the axis glues the two
            // sides of the D₃ point, so the line runs on into the same component.
            assert_eq!(
                analyze_frontier_sigma1(&model, &s, id, &f.point).unwrap(),
                FrontierBehavior::ExtendsInto(id)
            );
        }
    }
}

#[test]
fn kleinfour_frontiers_are_ends() {
    let (model, s) = strat("kleinfour3d");
    for c in s.by_k(1) {
        for f in &c.frontier {
            assert_eq!(
                analyze_frontier_sigma1(&model, &s, c.id, &f.box_point).unwrap(),
                FrontierBehavior::End
            );
        }
    }
}

#[test]
fn analyze_rejects_non_frontier_points() {
    let (model, s) = strat("kleinfour3d");
    let c = s.by_k(1).next().unwrap();
    let err = analyze_frontier_sigma1(&model, &s, c.id, &v(&[0.3, 0.3, 0.3])).unwrap_err();
    assert_eq!(err, StrataError::NotFrontier(c.id));
    let p = s.by_k(0).next().unwrap();
    assert!(matches!(
        analyze_frontier_sigma1(&model, &s, p.id, &p.representative),
        Err(StrataError::Hypothesis(_))
    ));
}

#[test]
fn effective_group_at_d3_point() {
    let (_, s) = strat("hexagonal3d_d3");
    let z = component_along(&s, 1, 3, &[0.0, 0.0, 1.0]);
    let zc = z.iter().map(|&id| s.component(id).unwrap()).find(|c| !c.is_closed).unwrap();
    let closed = closed_stratum(&s, zc.id).unwrap();
    assert_eq!(closed.kernel.order(), 3);
    assert_eq!(closed.frontier_effective_groups.len(), 2);
    for g in &closed.frontier_effective_groups {
        assert_eq!(g.normalizer.order(), 6);
        assert_eq!(g.order, 2);
        // The non-trivial coset reverses the axis.
        assert!(g.action.iter().any(|m| (m[(0, 0)] + 1.0).abs() < 1e-9));
    }
    assert!(!closed.is_manifold);

    let x = component_along(&s, 1, 2, &[1.0, 0.0, 0.0])[0];
    let closed = closed_stratum(&s, x).unwrap();
    assert!(closed.frontier_effective_groups.iter().all(|g| g.order == 1));
    assert!(closed.is_manifold);

    let circle = z.iter().map(|&id| s.component(id).unwrap()).find(|c| c.is_closed).unwrap();
    let closed = closed_stratum(&s, circle.id).unwrap();
    assert!(closed.frontier_effective_groups.is_empty());
    assert!(closed.is_manifold);
}

#[test]
fn closed_stratum_hypotheses() {
    let (_, s) = strat("hexagonal3d_d3");
    let p = s.by_k(0).next().unwrap().id;
    assert!(matches!(closed_stratum(&s, p), Err(StrataError::Hypothesis(_))));
    let reg = s.by_k(3).next().unwrap().id;
    assert!(matches!(closed_stratum(&s, reg), Err(StrataError::Hypothesis(_))));
    assert_eq!(closed_stratum(&s, 999).unwrap_err(), StrataError::UnknownComponent(999));
}

fn mirror_model() -> OrbifoldModel {
    let n = 3;
    let mut gens = vec![Isometry::linear_map(nalgebra::DMatrix::from_diagonal(&v(&[1.0, 1.0, -1.0])))];
    let mut basis = Vec::new();
    for i in 0..n {
        let mut e = Point::zeros(n);
        e[i] = 1.0;
        gens.push(Isometry::translation_by(e.clone()));
        basis.push(e);
    }
    let group = GeneratedGroup::new(n, gens, Some(basis), Default::default(), 1e-9).unwrap();
    let b = AxisBox::new(Point::zeros(n), v(&[1.0, 1.0, 1.0])).unwrap();
    OrbifoldModel::new("mirror", group, b).unwrap()
}

#[test]
fn mirror_planes_are_closed_two_dimensional_strata() {
    let model = mirror_model();
    let s = stratify(&model).unwrap();
    assert_eq!(s.minimal_singular_k(), Some(2));
    let planes: Vec<_> = s.by_k(2).collect();
    assert_eq!(planes.len(), 2);
    assert!(planes.iter().all(|c| c.is_closed && c.isotropy.order() == 2 && c.frontier.is_empty()));
    let closed = closed_stratum(&s, planes[0].id).unwrap();
    assert!(closed.is_manifold);
}

#[test]
fn every_stored_sample_has_its_dimension() {
    for name in example_names() {
        let (model, s) = strat(name);
        for c in &s.components {
            assert_eq!(c.upstairs_fixed.dim(), c.k, "{name} component {}", c.id);
            for p in c.sample_points.iter().chain(std::iter::once(&c.representative)) {
                assert_eq!(model.singular_dimension(p).unwrap(), c.k, "{name} component {}", c.id);
                assert_eq!(s.locate(&model, p).unwrap(), c.id, "{name} component {}", c.id);
            }
        }
        assert!(s.regular_dimension_check);
    }
}

#[test]
fn partition_of_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in example_names() {
        let (model, s) = strat(name);
        let b = model.fundamental_box().clone();
        let n = model.dimension();
        for _ in 0..300 {
            let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let p = b.lerp(&u);
            let k = model.singular_dimension(&p).unwrap();
            let id = s.locate(&model, &p).unwrap();
            assert_eq!(s.component(id).unwrap().k, k);
            let far = s.arrangement().iter().all(|f| f.distance(&p) > 1e-9);
            if far {
                assert_eq!(k, n);
            }
        }
    }
}

#[test]
fn frontier_isotropy_grows() {
    for name in example_names() {
        let (model, s) = strat(name);
        let tol = model.tol();
        for c in &s.components {
            for f in &c.frontier {
                let big = f.isotropy.order();
                let small = c.isotropy.order();
                assert!(big > small && big % small == 0, "{name} component {}", c.id);
                assert!(c.isotropy.elements().iter().all(|g| f.isotropy.contains(&g.isometry)));
                assert!(model.singular_dimension(&f.point).unwrap() < c.k);
                assert!(c.upstairs_fixed.distance(&f.point) <= 10.0 * tol);
            }
        }
    }
}

#[test]
fn segments_stay_in_the_fixed_line() {
    for name in ["hexagonal3d_d3", "kleinfour3d"] {
        let (model, s) = strat(name);
        for c in s.by_k(1) {
            let CellExtent::Segment { direction, lo, hi } = &c.extent else { panic!() };
            let (lo, hi) = (lo.unwrap_or(-1.0), hi.unwrap_or(1.0));
            for i in 1..10 {
                let t = lo + (hi - lo) * i as f64 / 10.0;
                let p = &c.representative + direction * t;
                assert!(model.singular_dimension(&p).unwrap() >= 1);
                assert!(c.upstairs_fixed.distance(&p) <= model.tol());
            }
        }
    }
}

#[test]
fn component_counts_respect_subgroup_bound() {
    for name in example_names() {
        let (_, s) = strat(name);
        let mut classes = 0;
        for c in &s.components {
            for h in std::iter::once(&c.isotropy).chain(c.frontier.iter().map(|f| &f.isotropy)) {
                let subs = subgroups(h).unwrap();
                let mut ids: Vec<usize> = subs.iter().map(|r| r.conjugacy_class_id).collect();
                ids.dedup();
                classes += ids.len();
            }
        }
        for count in s.component_counts().values() {
            assert!(*count <= 2 * classes);
        }
    }
}

#[test]
fn stratify_is_deterministic() {
    let (_, a) = strat("hexagonal3d_d3");
    let (_, b) = strat("hexagonal3d_d3");
    assert_eq!(signature(&a), signature(&b));
    for (x, y) in a.components.iter().zip(&b.components) {
        assert_eq!(x.representative, y.representative);
    }
}

fn conjugated_model(model: &OrbifoldModel, g: &Isometry) -> OrbifoldModel {
    let group = model.group().conjugated(g).unwrap();
    let b = model.fundamental_box();
    let n = model.dimension();
    let mut lo = Point::from_element(n, f64::INFINITY);
    let mut hi = Point::from_element(n, f64::NEG_INFINITY);
    for corner in 0..(1usize << n) {
        let u: Vec<f64> = (0..n).map(|i| ((corner >> i) & 1) as f64).collect();
        let p = g.apply(&b.lerp(&u));
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    OrbifoldModel::new(model.label(), group, AxisBox::new(lo, hi).unwrap()).unwrap()
}

#[test]
fn conjugation_by_a_screw_keeps_the_hexagonal_table() {
    let (model, s) = strat("hexagonal3d_d3");
    let g = Isometry::rotation_3d([0.0, 0.0, 1.0], 0.7)
        .compose(&Isometry::translation_by(v(&[0.31, -0.12, 0.27])))
        .unwrap();
    let t = stratify(&conjugated_model(&model, &g)).unwrap();
    assert_eq!(signature(&s), signature(&t));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stratify_is_conjugation_invariant(
        which in 0usize..3,
        angle in -3.2f64..3.2,
        tx in -2.0f64..2.0,
        ty in -2.0f64..2.0,
    ) {
        let name = ["torus2", "pillowcase_p2", "wallpaper_p4"][which];
        let (model, s) = strat(name);
        let g = Isometry::rotation_2d(angle)
            .compose(&Isometry::translation_by(v(&[tx, ty])))
            .unwrap();
        let t = stratify(&conjugated_model(&model, &g)).unwrap();
        prop_assert_eq!(signature(&s), signature(&t));
    }
}
