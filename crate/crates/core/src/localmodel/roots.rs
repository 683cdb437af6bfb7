//! Projective real roots of binary quartics.
//!
//! Roots are isolated with a Sturm chain after rotating the form so that no
//! root sits at infinity, then cross-checked against the count predicted by
//! the discriminant and the auxiliary invariants of the dehomogenised
//! quartic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{binary_eval, binary_substitute, Poly1};

/// A projective root as an angle in `[0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveRoot {
    pub t: f64,
    pub multiplicity: usize,
}

impl ProjectiveRoot {
    pub fn tan(&self) -> f64 {
        self.t.tan()
    }
}

/// What the discriminant says about the number of distinct real roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictedCount {
    Exactly(usize),
    /// Δ is within tolerance of zero.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticRoots {
    pub roots: Vec<ProjectiveRoot>,
    /// Standard discriminant sign carrier `I³ - 27 J²` of the binary quartic.
    pub discriminant: f64,
    pub predicted: PredictedCount,
    pub boundary_warning: bool,
}

impl QuarticRoots {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.roots.iter().all(|r| r.multiplicity == 1)
    }
}

/// `I` and `J` of `Σ p[i] x^{4-i} y^i`, so that `I³ - 27J²` has the sign of
/// the discriminant.
pub fn quartic_invariants(p: [f64; 5]) -> (f64, f64) {
    let (a, b, c, d, e) = (p[0], p[1] / 4.0, p[2] / 6.0, p[3] / 4.0, p[4]);
    let i = a * e - 4.0 * b * d + 3.0 * c * c;
    let j = a * c * e + 2.0 * b * c * d - a * d * d - e * b * b - c * c * c;
    (i, j)
}

fn predicted_count(q: &[f64], rel_tol: f64) -> (f64, PredictedCount) {
    // q is a dehomogenised quartic a X⁴ + b X³ + c X² + d X + e with a ≠ 0.
    let p = [q[0], q[1], q[2], q[3], q[4]];
    let (i, j) = quartic_invariants(p);
    let disc = i * i * i - 27.0 * j * j;
    let m = p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if disc.abs() <= rel_tol * m.powi(6) {
        return (disc, PredictedCount::Boundary);
    }
    if disc < 0.0 {
        return (disc, PredictedCount::Exactly(2));
    }
    let [a, b, c, d, e] = p;
    let p8 = 8.0 * a * c - 3.0 * b * b;
    let dd = 64.0 * a * a * a * e - 16.0 * a * a * c * c + 16.0 * a * b * b * c
        - 16.0 * a * a * b * d
        - 3.0 * b * b * b * b;
    if p8 < 0.0 && dd < 0.0 {
        (disc, PredictedCount::Exactly(4))
    } else {
        (disc, PredictedCount::Exactly(0))
    }
}

/// Projective real roots of the binary quartic `Σ p[i] x^{4-i} y^i`.
pub fn quartic_real_roots(p: [f64; 5]) -> Result<QuarticRoots> {
    quartic_real_roots_tol(p, 1e-9)
}

pub fn quartic_real_roots_tol(p: [f64; 5], rel_tol: f64) -> Result<QuarticRoots> {
    let m = p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return Err(Error::InvalidParameter("quartic is identically zero".into()));
    }
    let mut best = (0.0, 0.0_f64);
    for k in 0..16 {
        let psi = k as f64 * PI / 16.0;
        let v = binary_eval(&p, psi.cos(), psi.sin()).abs();
        if v > best.1 {
            best = (psi, v);
        }
    }
    let psi = best.0;
    let (s, c) = psi.sin_cos();
    let q = binary_substitute(&p, [[c, -s], [s, c]]);
    let poly = Poly1::new(vec![q[4], q[3], q[2], q[1], q[0]]);
    let raw = poly.real_roots(1e-13);
    let mut roots: Vec<ProjectiveRoot> = raw
        .into_iter()
        .map(|(x, mult)| ProjectiveRoot { t: (1.0_f64.atan2(x) + psi).rem_euclid(PI), multiplicity: mult })
        .collect();
    roots.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());

    let (_, predicted) = predicted_count(&q, rel_tol);
    // The discriminant is rotation invariant; report it for the input form.
    let (i, j) = quartic_invariants(p);
    let discriminant = i * i * i - 27.0 * j * j;
    let boundary_warning = predicted == PredictedCount::Boundary;
    if let PredictedCount::Exactly(n) = predicted {
        if n != roots.len() || roots.iter().any(|r| r.multiplicity != 1) {
            return Err(Error::Numerical(format!(
                "quartic root isolation found {} distinct roots but the discriminant predicts {n}",
                roots.len()
            )));
        }
    }
    Ok(QuarticRoots { roots, discriminant, predicted, boundary_warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_squares_has_no_roots() {
        let r = quartic_real_roots([1.0, 0.0, 2.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.count(), 0);
    }

    #[test]
    fn four_roots_from_product() {
        // (x - y)(x + y)(x - 2y)(x + 3y)
        let p = [1.0, 1.0, -7.0, -1.0, 6.0];
        let r = quartic_real_roots(p).unwrap();
        assert_eq!(r.count(), 4);
        let mut cot: Vec<f64> = r.roots.iter().map(|x| 1.0 / x.tan()).collect();
        cot.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in cot.iter().zip([-3.0, -1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn triple_root_is_boundary() {
        // (x - y)(x + y)³
        let p = [1.0, 2.0, 0.0, -2.0, -1.0];
        let r = quartic_real_roots(p).unwrap();
        assert!(r.boundary_warning);
        assert_eq!(r.count(), 2);
        assert_eq!(r.count_with_multiplicity(), 4);
    }
}
