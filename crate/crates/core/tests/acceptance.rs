//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbistrat::geodesic::{
    existence_dispatch, from_even_isotropy, from_hyperbolic, from_sigma1, is_closed, reduce, run_strategy, split,
    DispatchConfig, EvenCase, GeodesicPair, Sigma1Kind, Strategy,
};
use orbistrat::geom::{Isometry, Point};
use orbistrat::group::{subgroups, GroupElement};
use orbistrat::scenarios::{example_names, load_example};
use orbistrat::strata::{
    analyze_frontier_sigma1, closed_stratum, stratify, FrontierBehavior, OrbifoldModel, Stratification,
};

/// Closedness residuals and lengths.
const RESIDUAL_TOL: f64 = 1e-9;
/// Agreement of `min_displacement` with the grid oracle.
const ORACLE_TOL: f64 = 1e-6;
const HYPERBOLIC_SAMPLES: usize = 100;
const CONJUGATION_TESTS: usize = 1000;
const ROUND_TRIPS: usize = 200;
const PARTITION_SAMPLES: usize = 10_000;
const SEED: u64 = 20_240_611;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn v(xs: &[f64]) -> Point {
    Point::from_row_slice(xs)
}

fn el(iso: Isometry) -> GroupElement {
    GroupElement {
        isometry: iso,
        word: Vec::new(),
    }
}

fn model(name: &str) -> Result<(OrbifoldModel, Stratification), String> {
    let m = load_example(name).map_err(|e| e.to_string())?;
    let s = stratify(&m).map_err(|e| e.to_string())?;
    Ok((m, s))
}

fn axis_component(s: &Stratification, order: usize, dir: &[f64], closed: bool) -> Vec<usize> {
    let d = v(dir);
    s.by_k(1)
        .filter(|c| {
            c.isotropy.order() == order
                && c.is_closed == closed
                && c.direction().is_some_and(|u| u.dot(&d).abs() > 1.0 - 1e-9)
        })
        .map(|c| c.id)
        .collect()
}

fn criterion_1() -> Check {
    let m = load_example("hexagonal3d_d3").map_err(|e| e.to_string())?;
    let d3 = m.isotropy_at(&Point::zeros(3)).map_err(|e| e.to_string())?;
    ensure(d3.order() == 6, || format!("origin isotropy has order {}", d3.order()))?;
    let subs = subgroups(&d3).map_err(|e| e.to_string())?;
    ensure(subs.len() == 6, || format!("{} subgroups", subs.len()))?;
    let proper: Vec<_> = subs.iter().filter(|r| r.order() > 1 && r.order() < 6).collect();
    ensure(proper.len() == 4, || format!("{} proper non-trivial subgroups", proper.len()))?;
    let threes: Vec<_> = proper.iter().filter(|r| r.order() == 3).collect();
    let twos: Vec<_> = proper.iter().filter(|r| r.order() == 2).collect();
    ensure(threes.len() == 1 && twos.len() == 3, || "wrong subgroup orders".into())?;
    let class = twos[0].conjugacy_class_id;
    ensure(
        twos.iter().all(|r| r.conjugacy_class_id == class && r.class_size == 3 && r.normalizer_index() == 3),
        || "order-2 subgroups are not one class with normalizer index 3".into(),
    )
}

fn criterion_2() -> Check {
    let (m, s) = model("hexagonal3d_d3")?;
    let z = axis_component(&s, 3, &[0.0, 0.0, 1.0], false);
    ensure(z.len() == 1, || format!("{} open 3-fold axis components", z.len()))?;
    let zc = s.component(z[0]).map_err(|e| e.to_string())?;
    ensure(zc.frontier.iter().all(|f| f.isotropy.order() == 6), || "z-axis ends are not D3 points".into())?;
    for f in &zc.frontier {
        let b = analyze_frontier_sigma1(&m, &s, zc.id, &f.box_point).map_err(|e| e.to_string())?;
        ensure(b == FrontierBehavior::End, || format!("z-axis at {:?}: {b:?}", f.box_point.as_slice()))?;
    }
    let x = axis_component(&s, 2, &[1.0, 0.0, 0.0], false);
    ensure(!x.is_empty(), || "no order-2 axis components".into())?;
    for id in x {
        let c = s.component(id).map_err(|e| e.to_string())?;
        for f in &c.frontier {
            let b = analyze_frontier_sigma1(&m, &s, id, &f.point).map_err(|e| e.to_string())?;
            ensure(matches!(b, FrontierBehavior::ExtendsInto(_)), || {
                format!("order-2 axis {id} at {:?}: {b:?}", f.point.as_slice())
            })?;
        }
    }
    Ok(())
}

fn criterion_3() -> Check {
    let (_, s) = model("hexagonal3d_d3")?;
    let z = axis_component(&s, 3, &[0.0, 0.0, 1.0], false);
    let id = *z.first().ok_or("no open 3-fold axis")?;
    let closed = closed_stratum(&s, id).map_err(|e| e.to_string())?;
    ensure(!closed.frontier_effective_groups.is_empty(), || "no frontier points".into())?;
    for g in &closed.frontier_effective_groups {
        ensure(g.normalizer.order() == 6 && g.order == 2, || {
            format!("normalizer order {}, effective order {}", g.normalizer.order(), g.order)
        })?;
    }
    Ok(())
}

/// Brute-force singular classes of `ℝ²/(ℤ² ⋊ P)` for a symmorphic model:
/// fixed points of `(A, m)` with `A ∈ P`, `m ∈ ℤ²` small, reduced to `[0,1)²`,
/// grouped into orbits. Returns the sorted isotropy orders of the classes.
fn brute_force_classes(point_group_gen: Option<DMatrix<f64>>) -> Vec<usize> {
    let mut pg = vec![DMatrix::<f64>::identity(2, 2)];
    if let Some(g) = point_group_gen {
        let mut p = g.clone();
        while (&p - DMatrix::<f64>::identity(2, 2)).amax() > 1e-9 {
            pg.push(p.clone());
            p = &g * &p;
        }
    }
    let frac = |x: f64| {
        let f = x - x.floor();
        if f > 1.0 - 1e-9 {
            0.0
        } else {
            f
        }
    };
    let mut points: Vec<[f64; 2]> = Vec::new();
    for a in &pg[1..] {
        let m = DMatrix::<f64>::identity(2, 2) - a;
        let inv = m.try_inverse().expect("non-identity rotation fixes one point");
        for i in -3..=3 {
            for j in -3..=3 {
                let x = &inv * nalgebra::DVector::from_row_slice(&[i as f64, j as f64]);
                let p = [frac(x[0]), frac(x[1])];
                if points.iter().all(|q| (q[0] - p[0]).abs() + (q[1] - p[1]).abs() > 1e-9) {
                    points.push(p);
                }
            }
        }
    }
    let same_mod_lattice = |p: &[f64; 2], q: &[f64; 2]| {
        let d = [p[0] - q[0], p[1] - q[1]];
        d.iter().all(|x| (x - x.round()).abs() < 1e-9)
    };
    let stabiliser_order = |p: &[f64; 2]| {
        pg.iter()
            .filter(|a| {
                let ap = *a * nalgebra::DVector::from_row_slice(p);
                same_mod_lattice(&[ap[0], ap[1]], p)
            })
            .count()
    };
    let mut classes: Vec<[f64; 2]> = Vec::new();
    for p in &points {
        let known = classes.iter().any(|q| {
            pg.iter().any(|a| {
                let ap = a * nalgebra::DVector::from_row_slice(p);
                same_mod_lattice(&[ap[0], ap[1]], q)
            })
        });
        if !known {
            classes.push(*p);
        }
    }
    let mut orders: Vec<usize> = classes.iter().map(stabiliser_order).collect();
    orders.sort_unstable();
    orders
}

fn criterion_4() -> Check {
    let quarter = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let half = -DMatrix::<f64>::identity(2, 2);
    let cases = [
        ("pillowcase_p2", Some(half), vec![2, 2, 2, 2]),
        ("wallpaper_p4", Some(quarter), vec![2, 4, 4]),
        ("torus2", None, vec![]),
    ];
    for (name, gen, expected) in cases {
        let oracle = brute_force_classes(gen);
        ensure(oracle == expected, || format!("{name}: oracle gives {oracle:?}"))?;
        let (_, s) = model(name)?;
        let mut got: Vec<usize> = s.singular().map(|c| c.isotropy.order()).collect();
        got.sort_unstable();
        ensure(s.singular().all(|c| c.k == 0), || format!("{name}: positive-dimensional strata"))?;
        ensure(got == oracle, || format!("{name}: stratify gives {got:?}, oracle {oracle:?}"))?;
    }
    Ok(())
}

fn criterion_5() -> Check {
    let (m, s) = model("pillowcase_p2")?;
    let out = run_strategy(&m, &s, Strategy::EvenIsotropyPoint, &DispatchConfig::default()).map_err(|e| e.to_string())?;
    let pair = out.geodesic.ok_or("no geodesic")?;
    let r = is_closed(&pair, RESIDUAL_TOL);
    ensure(r.is_closed, || format!("{r:?}"))?;
    // c̃′ runs δx → x → γδx, so x is its midpoint.
    let x = pair.segment.evaluate(0.5 * (pair.segment.t0() + pair.segment.t1()));
    let dx = pair.segment.start().clone();
    let gamma = el(Isometry::point_reflection(&x));
    let delta_gamma_delta_inv = el(Isometry::point_reflection(&dx));
    let lambda = delta_gamma_delta_inv.mul(&gamma);
    ensure(pair.gamma.approx_eq(&lambda, RESIDUAL_TOL), || "closing element is not δγδ⁻¹γ".into())?;
    let law = 2.0 * (&x - &dx).norm();
    ensure((r.length - law).abs() <= RESIDUAL_TOL, || format!("length {} vs 2|x − δx| = {law}", r.length))?;

    let x = Point::zeros(2);
    let inv = el(Isometry::point_reflection(&x));
    let delta = el(Isometry::translation_by(v(&[1.0, 0.0])));
    let (pair, case) = from_even_isotropy(&m, &x, &inv, &delta).map_err(|e| e.to_string())?;
    let EvenCase::Lambda(lambda) = case else {
        return Err("identity branch on the pillowcase".into());
    };
    let expected = delta.mul(&inv).mul(&delta.inverse()).mul(&inv);
    ensure(lambda.approx_eq(&expected, RESIDUAL_TOL), || "λ ≠ δγδ⁻¹γ".into())?;
    ensure(pair.gamma.approx_eq(&expected, RESIDUAL_TOL), || "pair does not close with λ".into())?;
    let r = is_closed(&pair, RESIDUAL_TOL);
    ensure(r.is_closed && (r.length - 2.0).abs() <= RESIDUAL_TOL, || format!("{r:?}"))
}

fn criterion_6() -> Check {
    let (m, s) = model("hexagonal3d_d3")?;
    let z = axis_component(&s, 3, &[0.0, 0.0, 1.0], false);
    let id = *z.first().ok_or("no open 3-fold axis")?;
    let g = from_sigma1(&m, &s, id).map_err(|e| e.to_string())?;
    let Sigma1Kind::Doubled { prolonged_length } = g.kind else {
        return Err(format!("expected doubling, got {:?}", g.kind));
    };
    let r = is_closed(&g.pair, RESIDUAL_TOL);
    ensure(r.is_closed, || format!("{r:?}"))?;
    ensure((r.length - 2.0 * prolonged_length).abs() <= RESIDUAL_TOL, || {
        format!("length {} vs twice {prolonged_length}", r.length)
    })?;
    ensure((prolonged_length - 0.5).abs() <= RESIDUAL_TOL, || format!("prolonged length {prolonged_length}"))
}

/// Minimum of `|g·x − x|` by successively refined grids. The first window
/// holds every minimiser: rotation angles are multiples of `π/3`, so the
/// singular values of `A − I` off its kernel are at least 1 and some
/// minimiser has norm at most `|b|`.
fn grid_min_displacement(g: &Isometry) -> f64 {
    let n = g.dim();
    let steps = 10i64;
    let mut center = Point::zeros(n);
    let mut half = 2.0 * (g.translation().norm() + 1.0);
    let mut best = g.displacement_at(&center);
    for _ in 0..30 {
        let mut best_x = center.clone();
        let total = (2 * steps + 1).pow(n as u32);
        for idx in 0..total {
            let mut rest = idx;
            let mut x = center.clone();
            for i in 0..n {
                let k = rest % (2 * steps + 1) - steps;
                rest /= 2 * steps + 1;
                x[i] += half * k as f64 / steps as f64;
            }
            let d = g.displacement_at(&x);
            if d < best {
                best = d;
                best_x = x;
            }
        }
        center = best_x;
        half *= 0.3;
    }
    best
}

fn random_hyperbolic(rng: &mut ChaCha8Rng) -> Isometry {
    let rational = |rng: &mut ChaCha8Rng| rng.gen_range(-12i32..=12) as f64 / rng.gen_range(1i32..=6) as f64;
    match rng.gen_range(0..3) {
        0 => {
            // Screw motion about a rational axis.
            let angle = 2.0 * std::f64::consts::PI * rng.gen_range(1..6) as f64 / 6.0;
            let axis = [0, 1, 2].map(|_| rng.gen_range(-2i32..=2) as f64);
            let axis = if axis.iter().all(|a| *a == 0.0) { [0.0, 0.0, 1.0] } else { axis };
            let rot = Isometry::rotation_3d(axis, angle);
            let u = v(&axis).normalize();
            let mut along = rational(rng);
            if along == 0.0 {
                along = 0.5;
            }
            let off = v(&[rational(rng), rational(rng), rational(rng)]);
            let shift = &u * along + (&off - &u * u.dot(&off));
            Isometry::translation_by(shift).compose(&rot).unwrap()
        }
        1 => {
            // Glide reflection in the plane along a coordinate axis.
            let mut a = rational(rng);
            if a == 0.0 {
                a = 1.0;
            }
            let b = rational(rng);
            Isometry::new(DMatrix::from_diagonal(&v(&[1.0, -1.0])), v(&[a, b]), 1e-12).unwrap()
        }
        _ => {
            let mut t = v(&[rational(rng), rational(rng), rational(rng)]);
            if t.norm() == 0.0 {
                t[0] = 1.0;
            }
            Isometry::translation_by(t)
        }
    }
}

fn criterion_7() -> Check {
    let plane = load_example("torus2").map_err(|e| e.to_string())?;
    let space = load_example("kleinfour3d").map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..HYPERBOLIC_SAMPLES {
        let g = random_hyperbolic(&mut rng);
        let m = if g.dim() == 2 { &plane } else { &space };
        let value = g.min_displacement(RESIDUAL_TOL).value;
        let pair = from_hyperbolic(m, &el(g.clone())).map_err(|e| format!("sample {i}: {e}"))?;
        let r = is_closed(&pair, RESIDUAL_TOL);
        ensure(r.is_closed, || format!("sample {i}: {r:?}"))?;
        ensure((r.length - value).abs() <= RESIDUAL_TOL, || {
            format!("sample {i}: length {} vs min displacement {value}", r.length)
        })?;
        let grid = grid_min_displacement(&g);
        ensure((grid - value).abs() <= ORACLE_TOL, || format!("sample {i}: grid {grid} vs {value}"))?;
    }
    Ok(())
}

fn closed_pairs() -> Result<Vec<(OrbifoldModel, GeodesicPair)>, String> {
    let mut out = Vec::new();
    for name in example_names() {
        let (m, s) = model(name)?;
        for st in Strategy::ORDER {
            if let Ok(o) = run_strategy(&m, &s, st, &DispatchConfig::default()) {
                out.push((m.clone(), o.geodesic.ok_or("strategy returned no geodesic")?));
            }
        }
    }
    Ok(out)
}

fn criterion_8() -> Check {
    let pairs = closed_pairs()?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    for i in 0..CONJUGATION_TESTS {
        let (m, pair) = &pairs[rng.gen_range(0..pairs.len())];
        let ball = m
            .group()
            .enumerate_ball_complete(pair.segment.start(), 3.0)
            .map_err(|e| e.to_string())?;
        let delta = &ball[rng.gen_range(0..ball.len())];
        let q = pair.conjugated(delta);
        let r = is_closed(&q, RESIDUAL_TOL);
        ensure(r.is_closed && (r.length - pair.length()).abs() <= RESIDUAL_TOL, || {
            format!("conjugation {i}: {r:?}")
        })?;
    }
    for i in 0..ROUND_TRIPS {
        let (m, pair) = &pairs[rng.gen_range(0..pairs.len())];
        let pieces = rng.gen_range(2..6);
        let (t0, t1) = (pair.segment.t0(), pair.segment.t1());
        let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(t0..t1)).collect();
        cuts.sort_by(f64::total_cmp);
        let ball = m
            .group()
            .enumerate_ball_complete(pair.segment.start(), 2.0)
            .map_err(|e| e.to_string())?;
        let mut moves: Vec<GroupElement> = (0..pieces).map(|_| ball[rng.gen_range(0..ball.len())].clone()).collect();
        moves[0] = GroupElement::identity(m.dimension());
        let seq = split(pair, &cuts, &moves).map_err(|e| e.to_string())?;
        let q = reduce(&seq, RESIDUAL_TOL).map_err(|e| format!("round trip {i}: {e}"))?;
        let same = (q.segment.start() - pair.segment.start()).norm() <= RESIDUAL_TOL
            && (q.segment.velocity() - pair.segment.velocity()).norm() <= RESIDUAL_TOL
            && (q.segment.t1() - t1).abs() <= RESIDUAL_TOL
            && q.gamma.approx_eq(&pair.gamma, RESIDUAL_TOL);
        ensure(same, || format!("round trip {i} changed the pair"))?;
    }
    Ok(())
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    for name in example_names() {
        let (m, s) = model(name)?;
        let n = m.dimension();
        let b = m.fundamental_box().clone();
        for _ in 0..PARTITION_SAMPLES {
            let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let p = b.lerp(&u);
            let k = m.singular_dimension(&p).map_err(|e| e.to_string())?;
            let id = s.locate(&m, &p).map_err(|e| e.to_string())?;
            let ck = s.component(id).map_err(|e| e.to_string())?.k;
            ensure(ck == k, || format!("{name}: {:?} has k = {k} but lies in a k = {ck} component", p.as_slice()))?;
            if s.arrangement().iter().all(|f| f.distance(&p) > RESIDUAL_TOL) {
                ensure(k == n, || format!("{name}: generic point {:?} has k = {k}", p.as_slice()))?;
            }
        }
        for c in &s.components {
            for f in &c.frontier {
                let (big, small) = (f.isotropy.order(), c.isotropy.order());
                ensure(big > small && big % small == 0, || format!("{name}: component {} orders {small}/{big}", c.id))?;
                ensure(c.isotropy.elements().iter().all(|g| f.isotropy.contains(&g.isometry)), || {
                    format!("{name}: component {} isotropy not in frontier isotropy", c.id)
                })?;
            }
        }
    }
    Ok(())
}

fn criterion_10() -> Check {
    for name in example_names() {
        let (m, s) = model(name)?;
        let out = existence_dispatch(&m, &s, &DispatchConfig::default());
        ensure(out.strategy != Strategy::OpenCase, || format!("{name}: open case"))?;
        let pair = out.geodesic.ok_or_else(|| format!("{name}: no geodesic"))?;
        let r = is_closed(&pair, RESIDUAL_TOL);
        ensure(r.is_closed, || format!("{name}: {r:?}"))?;
    }
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/p3.model");
    let status = Command::new(env!("CARGO_BIN_EXE_orbistrat"))
        .args(["geodesic", fixture, "--disable", "hyperbolic"])
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(status.code() == Some(10), || format!("open case exited with {status}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("D3 subgroup structure", criterion_1),
        ("frontier behaviour in hexagonal3d_d3", criterion_2),
        ("effective group at the D3 point", criterion_3),
        ("stratification tables vs brute force", criterion_4),
        ("doubling through an inversion point", criterion_5),
        ("doubling a Σ₁ component", criterion_6),
        ("hyperbolic axes vs grid oracle", criterion_7),
        ("conjugation and split/reduce invariants", criterion_8),
        ("partition and frontier growth", criterion_9),
        ("dispatch soundness and open case", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match check() {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({:.2?})", i + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.2?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
