use std::f64::consts::PI;

use num_rational::Ratio;
use proptest::prelude::*;
use quadrapt::index::{elliptic_index, hyperbolic_qp_degree};
use quadrapt::jets::Jet2;
use quadrapt::localmodel::roots::quartic_real_roots;
use quadrapt::localmodel::{
    extract_elliptic, extract_hyperbolic, hyperbolic_normal_jet, BcCase, EllipticModel, EllipticPortrait,
    HyperbolicModel, HyperbolicRegion, LocalModel, ModelSpec, Region,
};
use quadrapt::Error;

/// Sign changes of `P(cos t, sin t)` on a dense grid over `[0, π)`: the
/// number of simple projective roots, found without any algebra.
fn sign_changes(p: [f64; 5]) -> usize {
    let n = 200_000;
    let val = |t: f64| {
        let (s, c) = t.sin_cos();
        p[0] * c.powi(4) + p[1] * c.powi(3) * s + p[2] * c * c * s * s + p[3] * c * s.powi(3) + p[4] * s.powi(4)
    };
    let mut prev = val(0.0);
    let mut k = 0;
    for i in 1..=n {
        let v = val(PI * i as f64 / n as f64);
        if v * prev < 0.0 {
            k += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    // P(π) = P(0) for even degree, so the count closes up.
    k
}

#[test]
fn elliptic_from_fourth_partials() {
    let j = Jet2::from_terms(4, [0.0, 0.0], [(2, 0, 0.5), (0, 2, 0.5), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)]);
    let m = extract_elliptic(&j).unwrap();
    assert_eq!([m.a, m.b, m.c, m.d], [1.0, 0.0, 0.0, 1.0]);
    assert_eq!(m.delta, 1.0);
    assert_eq!(m.index, Some(Ratio::new(-1, 3)));
}

#[test]
fn elliptic_origin_of_ah_plane() {
    let m = EllipticModel::new(0.0, 0.5, -0.5, 0.0);
    assert_eq!(m.delta, 0.25);
    assert_eq!(m.astroid, Some(-1.0));
    assert_eq!((m.a_norm, m.h_norm), (Some(0.0), Some(0.0)));
    assert_eq!(m.portrait, EllipticPortrait::D3);
    assert_eq!(m.index, Some(Ratio::new(-1, 3)));
}

#[test]
fn zero_model_is_not_simple() {
    let m = EllipticModel::new(0.0, 0.0, 0.0, 0.0);
    assert!(!m.is_simple());
    assert_eq!(m.portrait, EllipticPortrait::NonSimple);
    assert!(matches!(m.classify(), Err(Error::NonSimple { .. })));
}

#[test]
fn astroid_boundary_is_flagged() {
    // Normalised (a, h) = (1, 0) lies on the astroid.
    let m = EllipticModel::from_normalized(1.0, 0.0);
    assert_eq!(m.astroid, Some(0.0));
    assert!(matches!(m.classify(), Err(Error::Boundary { .. })));
    // (1, 0, 0, -1) has b - c = 0, so it is not in normalised form; there
    // δ = -1 and P = x⁴ - y⁴ has two roots, which is D1.
    let m = EllipticModel::new(1.0, 0.0, 0.0, -1.0);
    assert_eq!(m.a_norm, None);
    assert_eq!(m.portrait, EllipticPortrait::D1);
    assert_eq!(m.root_count_p, Some(2));
}

#[test]
fn elliptic_char_poly_of_the_d3_origin() {
    let cp = EllipticModel::new(0.0, 0.5, -0.5, 0.0).char_poly();
    assert_eq!(cp.p, [0.0, 2.0, 0.0, -2.0, 0.0]);
    let r = cp.roots().unwrap();
    let mut t: Vec<f64> = r.roots.iter().map(|x| x.t).collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let expect = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0];
    assert_eq!(t.len(), 4);
    for (x, y) in t.iter().zip(expect) {
        assert!((x - y).abs() < 1e-10, "{t:?}");
    }
}

#[test]
fn hyp1_char_poly_factors() {
    let cp = HyperbolicModel::new(1.0, 2.0, -4.0, 12.0).char_poly();
    // (x² - 2xy + 2y²)(x² + 4xy + 6y²)
    let (f, g) = ([1.0, -2.0, 2.0], [1.0, 4.0, 6.0]);
    let mut prod = [0.0; 5];
    for i in 0..3 {
        for k in 0..3 {
            prod[i + k] += f[i] * g[k];
        }
    }
    assert_eq!(cp.p, prod);
}

#[test]
fn hyperbolic_examples() {
    let cases = [
        ([1.0, 2.0, -4.0, 12.0], 0, 1),
        ([-1.0, -0.5, 0.5, 1.0], 2, -1),
        ([-1.0, -2.5, 2.5, 1.0], 4, 1),
        ([-8.0 / 3.0, 10.0 / 3.0, -5.0 / 3.0, 1.0], 2, 1),
    ];
    for (v, roots, index) in cases {
        let m = extract_hyperbolic(&hyperbolic_normal_jet(v[0], v[1], v[2], v[3], 0.0, 4)).unwrap();
        assert_eq!(m.abcd(), v);
        assert_eq!(m.root_count_p, Some(roots), "{v:?}");
        assert_eq!(sign_changes(m.char_poly().p), roots, "{v:?}");
        assert_eq!(m.index, Some(index), "{v:?}");
    }
    let m = HyperbolicModel::new(1.0, 2.0, -4.0, 12.0);
    assert!(m.discriminant > 0.0);
}

#[test]
fn hyperbolic_bc16_saddle_region() {
    // b = c = 4, ad < 16 and Δ = (ad - 4)³ - 27(a + d)² < 0.
    let m = HyperbolicModel::new(1.0, 4.0, 4.0, 2.0);
    let p = m.classify().unwrap();
    assert_eq!(p.case, BcCase::Bc16);
    assert_eq!(p.region, HyperbolicRegion::Saddle16);
    assert_eq!(p.index, -1);
}

#[test]
fn hyperbolic_bc0_first_quadrant() {
    let p = HyperbolicModel::new(1.0, 0.0, 4.0, 1.0).classify().unwrap();
    assert_eq!(p.case, BcCase::Bc0);
    assert_eq!(p.index, 1);
}

#[test]
fn extraction_rejects_bad_jets() {
    let not_normal = Jet2::from_terms(4, [0.0, 0.0], [(2, 0, 1.0), (0, 2, 0.5)]);
    assert!(matches!(extract_elliptic(&not_normal), Err(Error::NormalizationRequired(_))));
    let cubic = Jet2::from_terms(4, [0.0, 0.0], [(1, 1, 1.0), (3, 0, 0.1)]);
    assert!(matches!(extract_hyperbolic(&cubic), Err(Error::NotQuadratic(_))));
}

#[test]
fn model_spec_json_round_trip() {
    let spec: ModelSpec = serde_json::from_str(r#"{"region":"hyperbolic","abcd":[1,2,-4,12],"e":0.5}"#).unwrap();
    let m = spec.build();
    assert_eq!(m.region(), Region::Hyperbolic);
    let back = ModelSpec::from(&m);
    assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&spec).unwrap());
}

fn simple_elliptic() -> impl Strategy<Value = EllipticModel> {
    prop::array::uniform4(-1.0..1.0f64)
        .prop_filter("|δ| > 0.01", |v| (v[0] * v[3] - v[1] * v[2]).abs() > 0.01)
        .prop_map(|v| EllipticModel::new(v[0], v[1], v[2], v[3]))
        .prop_filter("off the discriminant", |m| m.classify().is_ok())
}

fn simple_hyperbolic() -> impl Strategy<Value = HyperbolicModel> {
    prop::array::uniform4(-1.0..1.0f64)
        .prop_filter("simple with ad != 0", |v| {
            (v[0] * v[3] - v[1] * v[2]).abs() > 0.01 && (v[0] * v[3]).abs() > 0.01
        })
        .prop_map(|v| HyperbolicModel::new(v[0], v[1], v[2], v[3]))
        .prop_filter("classified", |m| m.classify().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn elliptic_index_is_minus_sign_delta_over_three(m in simple_elliptic()) {
        let expect = Ratio::new(-(m.delta.signum() as i64), 3);
        prop_assert_eq!(m.index, Some(expect));
        prop_assert_eq!(elliptic_index(&m).unwrap(), expect);
    }

    #[test]
    fn hyperbolic_index_is_qp_degree_plus_one(m in simple_hyperbolic()) {
        let p = m.classify().unwrap();
        prop_assert_eq!(p.index as i64, hyperbolic_qp_degree(&m).unwrap() + 1);
    }

    #[test]
    fn root_count_parity_follows_discriminant(v in prop::array::uniform5(-1.0..1.0f64)) {
        let Ok(r) = quartic_real_roots(v) else { return Ok(()) };
        prop_assume!(r.all_simple() && r.discriminant.abs() > 1e-6);
        if r.discriminant > 0.0 {
            prop_assert!(r.count() == 0 || r.count() == 4, "{} roots", r.count());
        } else {
            prop_assert_eq!(r.count(), 2);
        }
    }

    #[test]
    fn root_count_matches_sign_changes(v in prop::array::uniform5(-1.0..1.0f64)) {
        let Ok(r) = quartic_real_roots(v) else { return Ok(()) };
        prop_assume!(r.all_simple() && r.discriminant.abs() > 1e-4 && v[0].abs() > 1e-3);
        prop_assert_eq!(r.count(), sign_changes(v));
    }

    #[test]
    fn elliptic_p_and_q_share_no_root(m in simple_elliptic()) {
        let cp = m.char_poly();
        let n = cp.p.iter().chain(&cp.q).fold(0.0f64, |a, b| a.max(b.abs()));
        for r in cp.roots().unwrap().roots {
            prop_assert!(cp.q_at(r.t).abs() > 1e-6 * n, "Q({}) = {}", r.t, cp.q_at(r.t));
        }
    }

    #[test]
    fn hyperbolic_p_and_q_share_no_root(m in simple_hyperbolic()) {
        let cp = LocalModel::Hyperbolic(m.clone()).char_poly();
        let n = cp.p.iter().chain(&cp.q).fold(0.0f64, |a, b| a.max(b.abs()));
        for r in cp.roots().unwrap().roots {
            prop_assert!(cp.q_at(r.t).abs() > 1e-9 * n, "Q({}) = {}", r.t, cp.q_at(r.t));
        }
    }
}
