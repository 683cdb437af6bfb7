use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use quadrapt::cubicform::{
    bcde_directions, binary_cubic_roots, cubic_components, darboux_directions, normalize_jet, DirectionKind,
};
use quadrapt::jets::{jet_eval, Jet2};
use quadrapt::localmodel::{EllipticModel, HyperbolicModel};
use quadrapt::surfaces::{catalog, cusp_cubic_oracle, fold_cubic_oracle};
use quadrapt::Error;

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Distance between two undirected angles.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn same_directions(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| angle_gap(*x, *y) < tol))
}

fn slope_angle(dx: f64, dy: f64) -> f64 {
    dy.atan2(dx).rem_euclid(PI)
}

#[test]
fn fold_numerators_at_one_one() {
    let e = catalog("fold", &BTreeMap::new()).unwrap();
    let c = cubic_components(&jet_eval(e.chart().unwrap(), [1.0, 1.0], 4).unwrap());
    // Hand evaluation with f_xx = 1, f_xy = 0, f_yy = y, f_yyy = 1.
    let expect = [0.0, -0.25, 0.0, 0.25];
    for (x, y) in c.components().iter().zip(expect) {
        assert!((x - y).abs() < 1e-15);
    }
    assert_eq!(c.hess, 1.0);
    assert_eq!(fold_cubic_oracle([1.0, 1.0]).components(), expect);
}

#[test]
fn fold_directions_at_one_one() {
    let e = catalog("fold", &BTreeMap::new()).unwrap();
    let c = cubic_components(&jet_eval(e.chart().unwrap(), [1.0, 1.0], 4).unwrap());
    let d = bcde_directions(&c).unwrap();
    assert_eq!(d.kind, DirectionKind::Elliptic3);
    let s3 = 3.0_f64.sqrt();
    let expect = [slope_angle(1.0, 0.0), slope_angle(1.0, s3), slope_angle(1.0, -s3)];
    assert!(same_directions(&d.angles, &expect, 1e-12), "{:?}", d.angles);
}

#[test]
fn gauss_cusp_numerators_at_one_one() {
    let e = catalog("gauss_cusp", &params(&[("lambda_cusp", 1.0)])).unwrap();
    let c = cubic_components(&jet_eval(e.chart().unwrap(), [1.0, 1.0], 4).unwrap());
    let o = [-3.0, -1.0, 2.5, 6.5];
    let k = c.n111 / o[0];
    assert!(k > 0.0);
    for (x, y) in c.components().iter().zip(o) {
        assert!((x - k * y).abs() < 1e-13 * k.abs(), "{x} vs {}", k * y);
    }
    assert_eq!(cusp_cubic_oracle([1.0, 1.0], 1.0).components(), o.map(|v| v * 0.25));
}

#[test]
fn quadric_has_vanishing_cubic_form() {
    let j = Jet2::from_terms(4, [0.3, -0.2], [(2, 0, 1.3), (1, 1, -0.4), (0, 2, 2.1), (1, 0, 0.7)]);
    let c = cubic_components(&j);
    assert_eq!(c.components(), [0.0; 4]);
    assert!(matches!(bcde_directions(&c), Err(Error::SingularCubic)));
}

#[test]
fn pick_definite_darboux_directions() {
    let e = catalog("pick_def", &params(&[("c", 1.0)])).unwrap();
    let j = jet_eval(e.chart().unwrap(), [0.0, 0.0], 4).unwrap();
    let d = darboux_directions(&j).unwrap();
    let s3 = 3.0_f64.sqrt();
    let expect = [slope_angle(0.0, 1.0), slope_angle(3.0, s3), slope_angle(3.0, -s3)];
    assert_eq!(d.kind, DirectionKind::Elliptic3);
    assert!(same_directions(&d.angles, &expect, 1e-12), "{:?}", d.angles);
}

#[test]
fn pick_definite_with_zero_c_is_quadratic() {
    let e = catalog("pick_def", &params(&[("c", 0.0)])).unwrap();
    let j = jet_eval(e.chart().unwrap(), [0.0, 0.0], 4).unwrap();
    assert!(matches!(darboux_directions(&j), Err(Error::SingularCubic)));
    assert!(matches!(bcde_directions(&cubic_components(&j)), Err(Error::SingularCubic)));
}

#[test]
fn pick_indefinite_darboux_direction() {
    let e = catalog("pick_indef", &params(&[("a", 1.0), ("b", 1.0)])).unwrap();
    let j = jet_eval(e.chart().unwrap(), [0.0, 0.0], 4).unwrap();
    let d = darboux_directions(&j).unwrap();
    assert_eq!(d.kind, DirectionKind::Hyperbolic1);
    assert!(same_directions(&d.angles, &[slope_angle(-1.0, 1.0)], 1e-12), "{:?}", d.angles);
}

#[test]
fn darboux_requires_normal_form() {
    let j = Jet2::from_terms(4, [0.0, 0.0], [(2, 0, 1.0), (0, 2, 3.0), (3, 0, 1.0)]);
    assert!(matches!(darboux_directions(&j), Err(Error::NormalizationRequired(_))));
}

#[test]
fn darboux_directions_are_the_limit_of_the_web() {
    let e = catalog("pick_def", &params(&[("c", 1.0)])).unwrap();
    let chart = e.chart().unwrap();
    let d0 = darboux_directions(&jet_eval(chart, [0.0, 0.0], 4).unwrap()).unwrap();
    let gap = |r: f64| {
        let p = [r * 0.6, r * 0.8];
        let d = bcde_directions(&cubic_components(&jet_eval(chart, p, 4).unwrap())).unwrap();
        d0.angles
            .iter()
            .map(|a| d.angles.iter().map(|b| angle_gap(*a, *b)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&r| gap(r)).collect();
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "{gaps:?}");
    }
    assert!(gaps[3] < 1e-3, "{gaps:?}");
}

#[test]
fn elliptic_model_web_is_equiangular() {
    let m = EllipticModel::new(0.7, -0.3, 1.1, 0.2);
    for (x, y) in [(0.3, 0.1), (-0.5, 0.8), (1.0, -1.0)] {
        let d = binary_cubic_roots(m.omega1(x, y));
        assert_eq!(d.kind, DirectionKind::Elliptic3);
        let a = &d.angles;
        assert!((a[1] - a[0] - PI / 3.0).abs() < 1e-10 && (a[2] - a[1] - PI / 3.0).abs() < 1e-10, "{a:?}");
    }
}

#[test]
fn hyperbolic_model_on_the_null_line_has_dy_zero() {
    let m = HyperbolicModel::new(1.0, 2.0, -4.0, 12.0);
    // ax + by = 0 at (2, -1); cx + dy = -20.
    let d = binary_cubic_roots(m.omega1(2.0, -1.0));
    assert_eq!(d.angles, vec![0.0]);
}

fn random_cubic_jet(base: [f64; 2], c: &[f64]) -> Jet2 {
    Jet2::from_terms(
        4,
        base,
        [(2, 0, c[0]), (1, 1, c[1]), (0, 2, c[2]), (3, 0, c[3]), (2, 1, c[4]), (1, 2, c[5]), (0, 3, c[6])],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn apolarity_in_elliptic_normal_form(c in prop::collection::vec(-3.0..3.0f64, 4)) {
        let j = Jet2::from_terms(4, [0.0, 0.0], [(2, 0, 0.5), (0, 2, 0.5), (3, 0, c[0]), (2, 1, c[1]), (1, 2, c[2]), (0, 3, c[3])]);
        let v = cubic_components(&j);
        let s = v.max_abs().max(1e-300);
        prop_assert!((v.n122 + v.n111).abs() <= 1e-9 * s);
        prop_assert!((v.n112 + v.n222).abs() <= 1e-9 * s);
    }

    #[test]
    fn apolarity_after_normalizing(c in prop::collection::vec(-3.0..3.0f64, 7)) {
        let hess = 4.0 * c[0] * c[2] - c[1] * c[1];
        prop_assume!(hess > 0.5);
        let j = random_cubic_jet([0.0, 0.0], &c);
        let (_, h) = normalize_jet(&j).unwrap();
        let v = cubic_components(&h);
        let s = v.max_abs().max(1e-300);
        prop_assert!((v.n122 + v.n111).abs() <= 1e-9 * s);
        prop_assert!((v.n112 + v.n222).abs() <= 1e-9 * s);
    }

    #[test]
    fn rotation_shifts_directions(c in prop::collection::vec(-3.0..3.0f64, 7), alpha in -PI..PI) {
        let hess = 4.0 * c[0] * c[2] - c[1] * c[1];
        prop_assume!(hess.abs() > 0.1);
        let j = random_cubic_jet([0.0, 0.0], &c);
        let v = cubic_components(&j);
        prop_assume!(v.max_abs() > 1e-3);
        let d = bcde_directions(&v).unwrap();
        prop_assume!(d.kind != DirectionKind::Degenerate);
        let (s, co) = alpha.sin_cos();
        // Rotated chart g(X) = f(R_α X): a direction at angle θ becomes θ - α.
        let g = j.linear_substitution([[co, -s], [s, co]]);
        let dg = bcde_directions(&cubic_components(&g)).unwrap();
        let shifted: Vec<f64> = d.angles.iter().map(|a| a - alpha).collect();
        prop_assert!(same_directions(&dg.angles, &shifted, 1e-7), "{:?} vs {:?}", dg.angles, shifted);
    }
}
