use std::f64::consts::TAU;

use num_rational::Ratio;
use proptest::prelude::*;
use quadrapt::index::{
    elliptic_index, elliptic_linear_degree, hyperbolic_index, line_field_index, loewner_check, semihomogeneous_index,
    web_index, winding_degree, LoopMap, SemiHomogeneousForm,
};
use quadrapt::localmodel::{EllipticModel, HyperbolicModel};
use quadrapt::poly::binary_eval;
use quadrapt::Error;

/// Degree by summing principal angle increments over a dense uniform grid.
fn dense_winding(f: impl Fn(f64) -> [f64; 2], n: usize) -> i64 {
    let mut total = 0.0;
    let mut prev = f(0.0);
    for k in 1..=n {
        let v = f(TAU * k as f64 / n as f64);
        total += (prev[0] * v[1] - prev[1] * v[0]).atan2(prev[0] * v[0] + prev[1] * v[1]);
        prev = v;
    }
    (total / TAU).round() as i64
}

/// `Re((x + iy)^m)` as binary-form coefficients of `x^{m-i} y^i`.
fn re_power(m: usize) -> Vec<f64> {
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    (0..=m)
        .map(|i| match i % 4 {
            0 => binom(m, i),
            2 => -binom(m, i),
            _ => 0.0,
        })
        .collect()
}

#[test]
fn identity_loop_has_degree_one() {
    assert_eq!(winding_degree(&LoopMap::new(|t| [t.cos(), t.sin()], 1e-12)).unwrap(), 1);
}

#[test]
fn conjugate_square_has_degree_minus_two() {
    let m = LoopMap::new(|t| [(2.0 * t).cos(), -(2.0 * t).sin()], 1e-12);
    assert_eq!(winding_degree(&m).unwrap(), -2);
}

#[test]
fn loop_through_origin_is_near_singular() {
    let m = LoopMap::new(|t| [t.cos(), 0.0], 1e-12);
    assert!(matches!(winding_degree(&m), Err(Error::NearSingular { .. })));
}

#[test]
fn linear_part_of_identity_model() {
    let m = EllipticModel::new(1.0, 0.0, 0.0, 1.0);
    let dense = dense_winding(|t| m.linear_part(t.cos(), t.sin()), 100_000);
    assert_eq!(dense, 1);
    assert_eq!(elliptic_linear_degree(&m).unwrap(), dense);
}

#[test]
fn elliptic_index_examples() {
    assert_eq!(elliptic_index(&EllipticModel::new(1.0, 0.0, 0.0, 1.0)).unwrap(), Ratio::new(-1, 3));
    assert_eq!(elliptic_index(&EllipticModel::new(0.0, 0.5, -0.5, 0.0)).unwrap(), Ratio::new(-1, 3));
    assert_eq!(elliptic_index(&EllipticModel::from_normalized(1.0, 1.0)).unwrap(), Ratio::new(1, 3));
    assert!(matches!(elliptic_index(&EllipticModel::new(1.0, 1.0, 1.0, 1.0)), Err(Error::NonSimple { .. })));
}

#[test]
fn hyperbolic_index_examples() {
    assert_eq!(hyperbolic_index(&HyperbolicModel::new(1.0, 2.0, -4.0, 12.0)).unwrap(), 1);
    assert_eq!(hyperbolic_index(&HyperbolicModel::new(-1.0, -0.5, 0.5, 1.0)).unwrap(), -1);
    assert_eq!(hyperbolic_index(&HyperbolicModel::new(-8.0 / 3.0, 10.0 / 3.0, -5.0 / 3.0, 1.0)).unwrap(), 1);
}

#[test]
fn hyperbolic_index_with_ad_zero() {
    // a = 0: (Q, P) degenerates on an axis, so the line field is tracked.
    let m = HyperbolicModel::new(0.0, 1.0, 2.0, 1.0);
    assert_eq!(hyperbolic_index(&m).unwrap(), -1);
    let m = HyperbolicModel::new(0.0, 1.0, -2.0, 1.0);
    assert_eq!(hyperbolic_index(&m).unwrap(), 1);
}

#[test]
fn semihomogeneous_real_power() {
    // h = Re(z⁵): A + iB = 4·60·z², so the index is -2/3.
    let s = SemiHomogeneousForm::new(re_power(5)).unwrap();
    let (a, b) = s.ab();
    let dense = dense_winding(|t| [binary_eval(&a, t.cos(), t.sin()), binary_eval(&b, t.cos(), t.sin())], 100_000);
    assert_eq!(dense, 2);
    let i = semihomogeneous_index(&s).unwrap();
    assert_eq!(i, Ratio::new(-2, 3));
    assert!(i <= Ratio::from_integer(1));
}

#[test]
fn semihomogeneous_matches_elliptic_model() {
    // h = Re(z⁴)/96 has A + iB = x + iy, the model (1, 0, 0, 1).
    let h: Vec<f64> = re_power(4).into_iter().map(|c| c / 96.0).collect();
    let s = SemiHomogeneousForm::new(h).unwrap();
    let (a, b) = s.ab();
    for (x, y) in a.iter().zip([1.0, 0.0]).chain(b.iter().zip([0.0, 1.0])) {
        assert!((x - y).abs() < 1e-14);
    }
    assert_eq!(semihomogeneous_index(&s).unwrap(), elliptic_index(&EllipticModel::new(1.0, 0.0, 0.0, 1.0)).unwrap());
}

#[test]
fn common_root_is_rejected() {
    // h = x⁵: A = 60x², B = 0.
    let s = SemiHomogeneousForm::new(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(semihomogeneous_index(&s), Err(Error::NotSemiHomogeneous { .. })));
}

#[test]
fn quartic_families_have_index_one_third() {
    for (u, v) in [(1.0, 0.0), (1.0, 0.3), (0.2, -1.0), (-0.7, 0.5)] {
        // u(x³y - xy³) + v(x⁴ + y⁴)
        let s = SemiHomogeneousForm::new(vec![v, u, 0.0, -u, v]).unwrap();
        let i = semihomogeneous_index(&s).unwrap();
        assert!(i == Ratio::new(1, 3) || i == Ratio::new(-1, 3), "{i}");
    }
}

#[test]
fn loewner_trivial_and_full() {
    let r = loewner_check(0, 8, 1);
    assert_eq!((r.trials, r.violations), (0, 0));
    assert!(r.histogram.is_empty());
    let r = loewner_check(500, 8, 42);
    assert_eq!(r.violations, 0);
    assert_eq!(r.histogram.values().sum::<usize>(), 500);
}

#[test]
fn web_and_line_field_of_models() {
    let e = EllipticModel::new(0.0, 0.5, -0.5, 0.0);
    assert_eq!(web_index(|x, y| e.omega1(x, y)).unwrap(), Ratio::new(-1, 3));
    let h = HyperbolicModel::new(-1.0, -0.5, 0.5, 1.0);
    assert_eq!(line_field_index(|x, y| h.omega1(x, y)).unwrap(), Ratio::from_integer(-1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn winding_invariant_under_reparametrization_and_scaling(
        coeffs in prop::collection::vec(-1.0..1.0f64, 6),
        eps in -0.9..0.9f64,
        k in 1usize..4,
        scale in 0.01..100.0f64,
    ) {
        // The perturbation has norm at most 3√2 < 5, so the loop avoids 0.
        let f = |t: f64| {
            let mut v = [5.0 * (k as f64 * t).cos(), 5.0 * (k as f64 * t).sin()];
            for (j, c) in coeffs.chunks(2).enumerate() {
                let w = (j + 1) as f64;
                v[0] += c[0] * (w * t).cos();
                v[1] += c[1] * (w * t).sin();
            }
            v
        };
        let base = winding_degree(&LoopMap::new(f, 1e-12)).unwrap();
        // t ↦ t + ε sin t is an increasing diffeomorphism of [0, 2π].
        let re = winding_degree(&LoopMap::new(|t| f(t + eps * t.sin()), 1e-12)).unwrap();
        let sc = winding_degree(&LoopMap::new(|t| { let v = f(t); [scale * v[0], scale * v[1]] }, 1e-12)).unwrap();
        prop_assert_eq!(base, k as i64);
        prop_assert_eq!(re, base);
        prop_assert_eq!(sc, base);
    }

    #[test]
    fn elliptic_index_is_plus_or_minus_one_third(v in prop::array::uniform4(-1.0..1.0f64)) {
        prop_assume!((v[0] * v[3] - v[1] * v[2]).abs() > 0.01);
        let i = elliptic_index(&EllipticModel::new(v[0], v[1], v[2], v[3])).unwrap();
        prop_assert!(i == Ratio::new(1, 3) || i == Ratio::new(-1, 3));
    }

    #[test]
    fn hyperbolic_index_is_plus_or_minus_one(v in prop::array::uniform4(-1.0..1.0f64)) {
        prop_assume!((v[0] * v[3] - v[1] * v[2]).abs() > 0.01 && (v[0] * v[3]).abs() > 0.01);
        let i = hyperbolic_index(&HyperbolicModel::new(v[0], v[1], v[2], v[3])).unwrap();
        prop_assert!(i == 1 || i == -1);
    }
}

#[test]
fn index_sets_over_a_thousand_models() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let (mut ne, mut nh) = (0, 0);
    while ne < 1000 || nh < 1000 {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let delta = v[0] * v[3] - v[1] * v[2];
        if delta.abs() <= 0.01 {
            continue;
        }
        if ne < 1000 {
            let i = elliptic_index(&EllipticModel::new(v[0], v[1], v[2], v[3])).unwrap();
            assert_eq!(i, Ratio::new(-(delta.signum() as i64), 3));
            ne += 1;
        }
        if nh < 1000 && (v[0] * v[3]).abs() > 0.01 {
            let i = hyperbolic_index(&HyperbolicModel::new(v[0], v[1], v[2], v[3])).unwrap();
            assert!(i == 1 || i == -1);
            nh += 1;
        }
    }
}
