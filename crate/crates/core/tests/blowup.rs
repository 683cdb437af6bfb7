use std::f64::consts::PI;

use num_rational::Ratio;
use proptest::prelude::*;
use quadrapt::blowup::{
    blowup_identity_residual, blowup_singularities, branch_cycle, integrate_leaf, integrate_portrait,
    portrait_csv, portrait_index, portrait_svg, sign_of_q_at_root, LeafStop, SingularityKind,
};
use quadrapt::localmodel::{HyperbolicModel, LocalModel, Region};

const HYP1: [f64; 4] = [1.0, 2.0, -4.0, 12.0];
const HYP2: [f64; 4] = [-8.0 / 3.0, 10.0 / 3.0, -5.0 / 3.0, 1.0];
const HYP3: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];
const HYP4: [f64; 4] = [-1.0, -2.5, 2.5, 1.0];
const BOX: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

fn hyp(v: [f64; 4]) -> LocalModel {
    LocalModel::new(Region::Hyperbolic, v)
}

fn kinds(m: &LocalModel) -> (usize, usize, usize) {
    let s = blowup_singularities(m).unwrap();
    let sa = s.iter().filter(|x| x.kind == SingularityKind::Saddle).count();
    let no = s.iter().filter(|x| x.kind == SingularityKind::Node).count();
    (s.len(), sa, no)
}

#[test]
fn singularity_counts_of_the_examples() {
    assert_eq!(kinds(&hyp(HYP1)), (0, 0, 0));
    assert_eq!(kinds(&hyp(HYP2)), (4, 2, 2));
    assert_eq!(kinds(&hyp(HYP3)), (4, 4, 0));
    assert_eq!(kinds(&hyp(HYP4)), (8, 4, 4));
}

#[test]
fn sign_of_q_on_hyp3() {
    let m = HyperbolicModel::new(HYP3[0], HYP3[1], HYP3[2], HYP3[3]);
    // Direct Q = xy((ax + by)x - (cx + dy)y) at the unit vectors.
    let q = |t: f64| {
        let (y, x) = t.sin_cos();
        x * y * ((m.a * x + m.b * y) * x - (m.c * x + m.d * y) * y)
    };
    for t in [PI / 4.0, 5.0 * PI / 4.0] {
        assert!(q(t) < 0.0);
        assert_eq!(sign_of_q_at_root(&m, t).unwrap(), -1);
    }
    for t in [3.0 * PI / 4.0, 7.0 * PI / 4.0] {
        assert!(q(t) > 0.0);
        assert_eq!(sign_of_q_at_root(&m, t).unwrap(), 1);
    }
}

#[test]
fn blowup_identity_on_the_examples() {
    for v in [HYP2, HYP3, HYP4] {
        let m = hyp(v);
        for s in blowup_singularities(&m).unwrap() {
            assert!(blowup_identity_residual(&m, &s) < 1e-6, "{v:?} at {}", s.t0);
        }
    }
    let e = LocalModel::new(Region::Elliptic, [0.3, 0.9, -0.2, -0.4]);
    for s in blowup_singularities(&e).unwrap() {
        assert!(blowup_identity_residual(&e, &s) < 1e-6, "elliptic at {}", s.t0);
    }
}

#[test]
fn portrait_indices_of_the_examples() {
    for (v, expect) in [(HYP1, 1), (HYP2, 1), (HYP3, -1), (HYP4, 1)] {
        let p = integrate_portrait(&hyp(v), BOX, 8).unwrap();
        assert_eq!(portrait_index(&p).unwrap(), Ratio::from_integer(expect), "{v:?}");
    }
}

#[test]
fn hyp1_leaves_follow_the_radial_law() {
    // With no radial direction the leaves of a homogeneous line field obey
    // d(log r)/dt = cot(ψ(t) - t), ψ the field direction on the ray at
    // angle t, so each leaf is a spiral whose radial change is fixed by its
    // polar sweep.
    let m = hyp(HYP1);
    let psi = |t: f64| quadrapt::cubicform::binary_cubic_roots(m.omega1(t.cos(), t.sin())).angles[0];
    let p = integrate_portrait(&m, BOX, 12).unwrap();
    assert!(p.singularities.is_empty());
    for l in p.leaves.iter().filter(|l| l.points.len() > 10) {
        let (first, last) = (l.points[0], *l.points.last().unwrap());
        let mut t = first[1].atan2(first[0]);
        let mut predicted = 0.0;
        for w in l.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dt = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
            // Simpson's rule on the exact integrand.
            let f = |u: f64| 1.0 / (psi(u) - u).tan();
            predicted += dt / 6.0 * (f(t) + 4.0 * f(t + 0.5 * dt) + f(t + dt));
            t += dt;
        }
        let actual = (last[0].hypot(last[1]) / first[0].hypot(first[1])).ln();
        assert!((actual - predicted).abs() < 1e-3 * actual.abs().max(1.0), "leaf {}: {actual} vs {predicted}", l.id);
    }
    // One turn scales the radius by e^G with G = ∫₀^{2π} cot(ψ - t) dt: a focus.
    let n = 100_000;
    let g: f64 = (0..n)
        .map(|k| {
            let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            2.0 * PI / n as f64 / (psi(t) - t).tan()
        })
        .sum();
    assert!(g.abs() > 1.0, "{g}");
}

#[test]
fn hyp3_has_eight_separatrices() {
    let p = integrate_portrait(&hyp(HYP3), BOX, 8).unwrap();
    assert_eq!(p.count(SingularityKind::Saddle), 4);
    let seps: Vec<_> = p.separatrices().collect();
    assert_eq!(seps.len(), 8);
    // Each saddle emits one half-leaf leaving the box and one reaching the origin.
    assert_eq!(seps.iter().filter(|l| l.stop == LeafStop::LeftBox).count(), 4);
    assert_eq!(seps.iter().filter(|l| l.stop == LeafStop::ReachedOrigin).count(), 4);
}

#[test]
fn svg_markers() {
    let svg3 = portrait_svg(&integrate_portrait(&hyp(HYP3), BOX, 6).unwrap(), 400.0);
    assert_eq!(svg3.matches(r#"class="saddle""#).count(), 4);
    assert_eq!(svg3.matches(r#"class="node""#).count(), 0);
    let svg4 = portrait_svg(&integrate_portrait(&hyp(HYP4), BOX, 6).unwrap(), 400.0);
    assert_eq!(svg4.matches(r#"class="saddle""#).count(), 4);
    assert_eq!(svg4.matches(r#"class="node""#).count(), 4);
    assert!(svg4.starts_with("<svg") && svg4.trim_end().ends_with("</svg>"));
}

#[test]
fn csv_has_one_row_per_vertex() {
    let p = integrate_portrait(&hyp(HYP2), BOX, 4).unwrap();
    let csv = portrait_csv(&p);
    let rows = csv.lines().count() - 1;
    assert_eq!(csv.lines().next(), Some("leafId,branch,x,y"));
    assert_eq!(rows, p.leaves.iter().map(|l| l.points.len()).sum::<usize>());
}

#[test]
fn zero_area_box_is_rejected() {
    assert!(integrate_portrait(&hyp(HYP2), [0.0, 0.0, 0.0, 1.0], 4).is_err());
}

#[test]
fn d3_web_has_eight_blowup_points() {
    let m = LocalModel::new(Region::Elliptic, [0.0, 0.5, -0.5, 0.0]);
    let s = blowup_singularities(&m).unwrap();
    assert_eq!(s.len(), 8);
    assert_eq!(m.char_poly().roots().unwrap().count(), 4);
    // Over three turns the tracked branch meets every lift on every branch
    // it passes through: 8 lifts, each met once per turn.
    let cycle = branch_cycle(&m).unwrap();
    assert_eq!(cycle.len(), 8);
    let p = integrate_portrait(&m, BOX, 6).unwrap();
    assert_eq!(portrait_index(&p).unwrap(), Ratio::new(-1, 3));
}

#[test]
fn elliptic_portrait_index_matches_prediction() {
    for (a, h) in [(0.0, 0.0), (0.3, 0.35), (1.2, 0.4), (-0.2, 1.5)] {
        let e = quadrapt::localmodel::EllipticModel::from_normalized(a, h);
        let m = LocalModel::Elliptic(e.clone());
        let p = integrate_portrait(&m, BOX, 4).unwrap();
        assert_eq!(Some(portrait_index(&p).unwrap()), e.index, "(a, h) = ({a}, {h})");
    }
}

fn simple_model() -> impl Strategy<Value = LocalModel> {
    (prop::bool::ANY, prop::array::uniform4(-1.0..1.0f64))
        .prop_filter("simple", |(_, v)| (v[0] * v[3] - v[1] * v[2]).abs() > 0.05 && (v[0] * v[3]).abs() > 0.01)
        .prop_map(|(ell, v)| LocalModel::new(if ell { Region::Elliptic } else { Region::Hyperbolic }, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn singularities_come_in_antipodal_pairs(m in simple_model()) {
        let Ok(r) = m.char_poly().roots() else { return Ok(()) };
        prop_assume!(r.all_simple());
        let s = blowup_singularities(&m).unwrap();
        prop_assert_eq!(s.len(), 2 * r.count());
        for x in &s {
            let partner = s.iter().find(|y| {
                let d = (y.t0 - x.t0 - PI).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d) < 1e-9
            });
            prop_assert!(partner.is_some(), "no partner for {}", x.t0);
            prop_assert_eq!(partner.unwrap().kind, x.kind);
        }
    }

    #[test]
    fn blowup_identity_holds(m in simple_model()) {
        let Ok(s) = blowup_singularities(&m) else { return Ok(()) };
        for x in s.iter().filter(|x| x.kind != SingularityKind::NonHyperbolic) {
            prop_assert!(blowup_identity_residual(&m, x) < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reversed_seed_direction_reverses_the_leaf(m in simple_model(), a in 0.0..6.28f64) {
        let seed = [0.4 * a.cos(), 0.4 * a.sin()];
        let dirs = quadrapt::cubicform::binary_cubic_roots(m.omega1(seed[0], seed[1]));
        let t = dirs.angles[0];
        let h = [t.cos(), t.sin()];
        let fwd = integrate_leaf(&m, BOX, seed, h);
        let mut back = integrate_leaf(&m, BOX, seed, [-h[0], -h[1]]);
        back.reverse();
        prop_assert_eq!(fwd.len(), back.len());
        for (p, q) in fwd.iter().zip(&back) {
            prop_assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
    }
}
