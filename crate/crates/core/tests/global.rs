use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_rational::Ratio;
use quadrapt::cubicform::{cubic_components, normalize_jet};
use quadrapt::global::{
    find_quadratic_points, poincare_hopf_check, same_point_set, summary_table, GlobalStatus, QuadraticPointReport,
    SearchConfig,
};
use quadrapt::jets::{graph_jet, Frame};
use quadrapt::localmodel::Region;
use quadrapt::surfaces::catalog;
use quadrapt::Error;
use rayon::prelude::*;

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn check_report_invariants(points: &[QuadraticPointReport]) {
    let allowed = [Ratio::new(1, 3), Ratio::new(-1, 3), Ratio::from_integer(1), Ratio::from_integer(-1)];
    for p in points {
        assert!(p.residual < 1e-10, "residual {}", p.residual);
        if p.simple {
            assert!(allowed.contains(&p.index), "index {}", p.index);
            assert_eq!(p.analytic_index, Some(p.index));
        }
    }
}

#[test]
fn rotation_surface_has_exactly_the_poles() {
    let e = catalog("rotation", &params(&[("lambda_rot", 0.2)])).unwrap();
    let r = poincare_hopf_check(&e, &SearchConfig::with_grid(32)).unwrap();
    assert_eq!(r.points.len(), 2);
    // The poles are zeros of order two of the numerators, so a residual of
    // 1e-10 locates them to about 1e-6 only.
    for (p, z) in r.points.iter().zip([-1.0, 1.0]) {
        assert!(dist(p.location, [0.0, 0.0, z]) < 1e-5, "{:?}", p.location);
        assert_eq!(p.index, Ratio::from_integer(1));
        assert_eq!(p.region, Region::Elliptic);
    }
    assert_eq!(r.sum_e, Ratio::from_integer(2));
    assert_eq!(r.residual_m, Some(Ratio::from_integer(0)));
    assert_eq!(r.status, GlobalStatus::Pass);
    assert!(r.unconverged.is_empty());
    assert!(summary_table(&r).contains("status: PASS"));
}

#[test]
fn rotation_point_set_is_stable_under_refinement() {
    let e = catalog("rotation", &BTreeMap::new()).unwrap();
    let a = find_quadratic_points(&e, &SearchConfig::with_grid(32)).unwrap();
    let b = find_quadratic_points(&e, &SearchConfig::with_grid(64)).unwrap();
    assert_eq!(a.points.len(), 2);
    assert!(same_point_set(&a.points, &b.points, 1e-5));
}

/// The perturbed sphere is invariant under coordinate permutations and sign
/// changes; so is its set of quadratic points.
fn octahedral_images(p: [f64; 3]) -> Vec<[f64; 3]> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for pm in perms {
        for s in 0..8 {
            let sg = |k: usize| if s >> k & 1 == 1 { -1.0 } else { 1.0 };
            out.push([sg(0) * p[pm[0]], sg(1) * p[pm[1]], sg(2) * p[pm[2]]]);
        }
    }
    out
}

/// Point of `x² + y² + z² - 1 + ε(x⁴ + y⁴ + z⁴ - 3/5) = 0` on the ray along
/// the unit vector `u`, from the quadratic in `r²`.
fn sphere_ray(u: [f64; 3], eps: f64) -> [f64; 3] {
    let s = u.iter().map(|v| v.powi(4)).sum::<f64>();
    let c = 1.0 + 0.6 * eps;
    let r2 = if eps == 0.0 { c } else { 2.0 * c / (1.0 + (1.0 + 4.0 * eps * s * c).sqrt()) };
    let r = r2.sqrt();
    [r * u[0], r * u[1], r * u[2]]
}

#[test]
fn perturbed_sphere_index_sum_and_count() {
    let e = catalog("perturbed_sphere", &params(&[("eps", 0.05)])).unwrap();
    let r = poincare_hopf_check(&e, &SearchConfig::with_grid(48)).unwrap();
    check_report_invariants(&r.points);
    let third = Ratio::new(1, 3);
    assert!(r.points.iter().all(|p| p.region == Region::Elliptic && (p.index == third || p.index == -third)));
    assert_eq!(r.sum_e, Ratio::from_integer(2));
    assert!(r.points.len() >= 6);
    assert_eq!(r.count_bound_check, Some(true));
    assert_eq!(r.status, GlobalStatus::Pass);
    // Index sum 2 with indices ±1/3: #(+) - #(-) = 6.
    let pos = r.points.iter().filter(|p| p.index == third).count() as i64;
    let neg = r.points.len() as i64 - pos;
    assert_eq!(pos - neg, 6);
    for p in &r.points {
        for img in octahedral_images(p.location) {
            let m = r.points.iter().find(|q| dist(q.location, img) < 1e-6);
            assert!(m.is_some_and(|q| q.index == p.index), "image {img:?} of {:?} missing", p.location);
        }
    }
}

#[test]
fn perturbed_sphere_dense_scan_finds_nothing_new() {
    let eps = 0.05;
    let e = catalog("perturbed_sphere", &params(&[("eps", eps)])).unwrap();
    let surf = e.implicit().unwrap().clone();
    let r = find_quadratic_points(&e, &SearchConfig::with_grid(48)).unwrap();
    let n = 1000;
    // 10⁶ samples on a latitude-longitude grid, each scored by the largest
    // numerator after normalizing the 2-jet.
    let scan: Vec<([f64; 3], f64)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let th = PI * (k / n) as f64 / (n - 1) as f64;
            let ph = 2.0 * PI * (k % n) as f64 / n as f64;
            let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let q = sphere_ray(u, eps);
            let frame = Frame::from_normal(q, surf.f.gradient(q), None);
            let j = graph_jet(&surf, &frame, [0.0, 0.0], 3).unwrap();
            let (_, h) = normalize_jet(&j).unwrap();
            (q, cubic_components(&h).max_abs())
        })
        .collect();
    let mut vals: Vec<f64> = scan.iter().map(|s| s.1).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = vals[vals.len() / 2];
    let low: Vec<_> = scan.iter().filter(|s| s.1 < 0.02 * med).collect();
    assert!(!low.is_empty());
    for (q, v) in &low {
        let near = r.points.iter().map(|p| dist(p.location, *q)).fold(f64::INFINITY, f64::min);
        assert!(near < 0.05, "low sample {q:?} (score {v:e}) is {near} from every reported point");
    }
    for p in &r.points {
        assert!(low.iter().any(|(q, _)| dist(p.location, *q) < 0.05), "{:?} has no low sample", p.location);
    }
}

#[test]
fn hyperbolic_disc_has_an_odd_count() {
    let e = catalog("hyperbolic_disc", &BTreeMap::new()).unwrap();
    let r = poincare_hopf_check(&e, &SearchConfig::with_grid(64)).unwrap();
    check_report_invariants(&r.points);
    assert!(r.points.iter().all(|p| p.region == Region::Hyperbolic));
    assert!(r.points.iter().all(|p| p.index == Ratio::from_integer(1) || p.index == Ratio::from_integer(-1)));
    assert_eq!(r.points.len() % 2, 1);
    assert_eq!(r.parity_check, Some(true));
    assert!(r.points.iter().any(|p| dist(p.location, [0.0, 0.0, 0.0]) < 1e-9));
}

#[test]
fn quadric_is_totally_quadratic() {
    let e = catalog("quadric", &BTreeMap::new()).unwrap();
    let r = poincare_hopf_check(&e, &SearchConfig::with_grid(32)).unwrap();
    assert_eq!(r.status, GlobalStatus::TotallyQuadratic);
    assert!(r.points.is_empty());
    assert!(r.warnings.iter().any(|w| w.contains("totally quadratic")));
}

#[test]
fn search_preconditions() {
    let e = catalog("rotation", &BTreeMap::new()).unwrap();
    assert!(matches!(find_quadratic_points(&e, &SearchConfig::with_grid(31)), Err(Error::InvalidParameter(_))));
    let fold = catalog("fold", &BTreeMap::new()).unwrap();
    assert!(matches!(find_quadratic_points(&fold, &SearchConfig::with_grid(32)), Err(Error::Unsupported(_))));
}

#[test]
fn reports_are_deterministic() {
    let e = catalog("perturbed_sphere", &BTreeMap::new()).unwrap();
    let a = poincare_hopf_check(&e, &SearchConfig::with_grid(32)).unwrap();
    let b = poincare_hopf_check(&e, &SearchConfig::with_grid(32)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    // Lexicographic by location, at a resolution of 1e-9.
    let locs: Vec<_> = a.points.iter().map(|p| p.location.map(|x| (x * 1e9).round() as i64)).collect();
    let mut sorted = locs.clone();
    sorted.sort();
    assert_eq!(locs, sorted);
}
