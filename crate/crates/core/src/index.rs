//! Degrees of loops in the punctured plane and the index formulas built on
//! them.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubicform::binary_cubic_roots;
use crate::error::{Error, Result};
use crate::localmodel::{EllipticModel, HyperbolicModel};
use crate::poly::{binary_eval, binary_substitute, binom, Poly1};

/// Refinement depth limit of [`winding_degree`].
pub const MAX_DEPTH: usize = 40;

/// A closed loop `t ↦ v(t)`, `t ∈ [0, 2π]`, that must avoid the origin.
pub struct LoopMap<'a> {
    sampler: Box<dyn Fn(f64) -> [f64; 2] + Sync + 'a>,
    /// Samples with norm below this are treated as hitting zero.
    pub zero_tol: f64,
}

impl<'a> LoopMap<'a> {
    pub fn new<F: Fn(f64) -> [f64; 2] + Sync + 'a>(f: F, zero_tol: f64) -> Self {
        Self { sampler: Box::new(f), zero_tol }
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        (self.sampler)(t)
    }

    /// Smallest sampled norm on a uniform grid of `n` points.
    pub fn min_norm(&self, n: usize) -> f64 {
        (0..n)
            .map(|k| {
                let v = self.eval(TAU * k as f64 / n as f64);
                v[0].hypot(v[1])
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn angle_between(u: [f64; 2], v: [f64; 2]) -> f64 {
    (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1])
}

/// Degree of the loop by continuous angle tracking. Intervals are bisected
/// until every angular step is below π/2.
pub fn winding_degree(m: &LoopMap) -> Result<i64> {
    let total = winding_angle(m, 0.0, TAU)?;
    Ok((total / TAU).round() as i64)
}

/// Total angle swept by the loop over `[t0, t1]`.
pub fn winding_angle(m: &LoopMap, t0: f64, t1: f64) -> Result<f64> {
    let n = 256;
    let mut total = 0.0;
    let check = |t: f64| -> Result<[f64; 2]> {
        let v = m.eval(t);
        if !(v[0].hypot(v[1]) > m.zero_tol) {
            return Err(Error::NearSingular { t });
        }
        Ok(v)
    };
    let mut prev_t = t0;
    let mut prev = check(t0)?;
    for k in 1..=n {
        let t = t0 + (t1 - t0) * k as f64 / n as f64;
        let v = check(t)?;
        total += refine(&check, prev_t, prev, t, v, 0)?;
        prev_t = t;
        prev = v;
    }
    Ok(total)
}

fn refine(
    f: &dyn Fn(f64) -> Result<[f64; 2]>,
    ta: f64,
    va: [f64; 2],
    tb: f64,
    vb: [f64; 2],
    depth: usize,
) -> Result<f64> {
    let d = angle_between(va, vb);
    if d.abs() < PI / 2.0 {
        return Ok(d);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::NearSingular { t: 0.5 * (ta + tb) });
    }
    let tm = 0.5 * (ta + tb);
    let vm = f(tm)?;
    Ok(refine(f, ta, va, tm, vm, depth + 1)? + refine(f, tm, vm, tb, vb, depth + 1)?)
}

fn zero_tol_for(scale: f64) -> f64 {
    1e-12 * scale.max(f64::MIN_POSITIVE)
}

/// `deg(A₁ + iB₁)` on the unit circle.
pub fn elliptic_linear_degree(m: &EllipticModel) -> Result<i64> {
    let scale = m.abcd().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    winding_degree(&LoopMap::new(|t| m.linear_part(t.cos(), t.sin()), zero_tol_for(scale)))
}

/// `deg(P + iQ)` on the unit circle.
pub fn elliptic_pq_degree(m: &EllipticModel) -> Result<i64> {
    let cp = m.char_poly();
    let scale = m.abcd().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let lm = LoopMap::new(|t| [cp.p_at(t), cp.q_at(t)], zero_tol_for(scale));
    winding_degree(&lm)
}

/// `I = -deg(A₁ + iB₁)/3`, cross-checked against `1 - deg(P + iQ)/3`.
pub fn elliptic_index(m: &EllipticModel) -> Result<Ratio<i64>> {
    if !m.is_simple() {
        return Err(Error::NonSimple { delta: m.delta });
    }
    let i1 = Ratio::new(-elliptic_linear_degree(m)?, 3);
    let i2 = Ratio::from_integer(1) - Ratio::new(elliptic_pq_degree(m)?, 3);
    if i1 != i2 {
        return Err(Error::Numerical(format!(
            "index formulas disagree: -deg(A1+iB1)/3 = {i1}, 1 - deg(P+iQ)/3 = {i2}"
        )));
    }
    Ok(i1)
}

/// `deg(t ↦ (Q(t), P(t)))`.
pub fn hyperbolic_qp_degree(m: &HyperbolicModel) -> Result<i64> {
    let cp = m.char_poly();
    let scale = m.abcd().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let lm = LoopMap::new(|t| [cp.q_at(t), cp.p_at(t)], zero_tol_for(scale));
    winding_degree(&lm)
}

/// Index of the line field: `deg(Q, P) + 1` when `ad ≠ 0`. When `ad = 0`
/// the map `(Q, P)` vanishes on a coordinate axis, and the index is read
/// from the rotation of the line field itself.
pub fn hyperbolic_index(m: &HyperbolicModel) -> Result<i32> {
    if !m.is_simple() {
        return Err(Error::NonSimple { delta: m.delta });
    }
    let scale = m.abcd().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if (m.a * m.d).abs() > 1e-9 * scale * scale {
        Ok(hyperbolic_qp_degree(m)? as i32 + 1)
    } else {
        let r = line_field_index(|x, y| m.omega1(x, y))?;
        if *r.denom() != 1 {
            return Err(Error::Numerical(format!("line-field rotation gave non-integer index {r}")));
        }
        Ok(*r.numer() as i32)
    }
}

/// Tracks one root direction of the binary cubic field `omega(cos t, sin t)`
/// continuously over `[0, turns·2π]` and returns the total rotation.
pub fn track_direction<F>(omega: F, turns: usize, start: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> [f64; 4],
{
    let roots_at = |t: f64| binary_cubic_roots(omega(t.cos(), t.sin())).angles;
    let t_end = TAU * turns as f64;
    let mut t = 0.0;
    let mut psi = start;
    let mut total = 0.0;
    let mut h = TAU / 720.0;
    while t < t_end {
        let step = h.min(t_end - t);
        let cand = roots_at(t + step);
        if cand.is_empty() {
            return Err(Error::NearSingular { t: t + step });
        }
        // Closest root modulo π to the current heading.
        let (best, gap) = cand
            .iter()
            .map(|&a| {
                let d = (a - psi + PI / 2.0).rem_euclid(PI) - PI / 2.0;
                (d, d.abs())
            })
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        // Require the chosen root to be clearly closer than the others.
        let second = cand
            .iter()
            .map(|&a| ((a - psi + PI / 2.0).rem_euclid(PI) - PI / 2.0).abs())
            .filter(|&g| g > gap)
            .fold(f64::INFINITY, f64::min);
        if gap > PI / 16.0 || second < 3.0 * gap {
            h *= 0.5;
            if h < 1e-12 {
                return Err(Error::NearSingular { t });
            }
            continue;
        }
        psi += best;
        total += best;
        t += step;
        if gap < PI / 64.0 {
            h = (h * 1.5).min(TAU / 360.0);
        }
    }
    Ok(total)
}

/// Index of a line field (one real direction per point) around the origin.
pub fn line_field_index<F>(omega: F) -> Result<Ratio<i64>>
where
    F: Fn(f64, f64) -> [f64; 4],
{
    let start = binary_cubic_roots(omega(1.0, 0.0))
        .angles
        .first()
        .copied()
        .ok_or(Error::NearSingular { t: 0.0 })?;
    let total = track_direction(&omega, 1, start)?;
    Ok(Ratio::new((total / PI).round() as i64, 2))
}

/// Index of a 3-web around the origin: one branch tracked over three turns
/// returns to itself after rotating by `3 · 2π · I`.
pub fn web_index<F>(omega: F) -> Result<Ratio<i64>>
where
    F: Fn(f64, f64) -> [f64; 4],
{
    let start = binary_cubic_roots(omega(1.0, 0.0))
        .angles
        .first()
        .copied()
        .ok_or(Error::NearSingular { t: 0.0 })?;
    let total = track_direction(&omega, 3, start)?;
    // total = 6π I, and I is a multiple of 1/6 a priori.
    Ok(Ratio::new((total / PI).round() as i64, 6))
}

/// Homogeneous `h` of degree `n + 3` whose third derivatives give the
/// leading part of a semi-homogeneous cubic form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiHomogeneousForm {
    pub n: usize,
    /// Coefficients of `x^{n+3-i} y^i`.
    pub h: Vec<f64>,
}

fn binary_derivative(p: &[f64], axis: usize) -> Vec<f64> {
    let n = p.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| if axis == 0 { (n - i) as f64 * p[i] } else { (i + 1) as f64 * p[i + 1] })
        .collect()
}

impl SemiHomogeneousForm {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.len() < 4 {
            return Err(Error::InvalidParameter("h must have degree at least 3".into()));
        }
        Ok(Self { n: h.len() - 4, h })
    }

    fn d(&self, nx: usize, ny: usize) -> Vec<f64> {
        let mut p = self.h.clone();
        for _ in 0..nx {
            p = binary_derivative(&p, 0);
        }
        for _ in 0..ny {
            p = binary_derivative(&p, 1);
        }
        p
    }

    /// `(A_n, B_n) = (h_xxx - 3h_xyy, h_yyy - 3h_xxy)` as binary forms of degree `n`.
    pub fn ab(&self) -> (Vec<f64>, Vec<f64>) {
        let (xxx, xyy, yyy, xxy) = (self.d(3, 0), self.d(1, 2), self.d(0, 3), self.d(2, 1));
        let a = xxx.iter().zip(&xyy).map(|(p, q)| p - 3.0 * q).collect();
        let b = yyy.iter().zip(&xxy).map(|(p, q)| p - 3.0 * q).collect();
        (a, b)
    }

    pub fn scale(&self) -> f64 {
        let (a, b) = self.ab();
        a.iter().chain(&b).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `min |A_n + iB_n| / max |A_n + iB_n|` on the unit circle (sampled).
    /// The leading part controls the index on circles of radius `r` as long
    /// as the higher-order terms stay below half the minimum modulus there.
    pub fn min_modulus_ratio(&self, samples: usize) -> f64 {
        let (a, b) = self.ab();
        let mods: Vec<f64> = (0..samples)
            .map(|k| {
                let t = TAU * k as f64 / samples as f64;
                binary_eval(&a, t.cos(), t.sin()).hypot(binary_eval(&b, t.cos(), t.sin()))
            })
            .collect();
        let mx = mods.iter().cloned().fold(0.0, f64::max);
        mods.iter().cloned().fold(f64::INFINITY, f64::min) / mx.max(f64::MIN_POSITIVE)
    }

    /// Rejects forms whose `A_n` and `B_n` share a real direction.
    pub fn check_semi_homogeneous(&self) -> Result<()> {
        let (a, b) = self.ab();
        let scale = self.scale();
        if scale == 0.0 {
            return Err(Error::NotSemiHomogeneous { t: 0.0 });
        }
        if self.n == 0 {
            return Ok(());
        }
        let am = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let (p, q) = if am > 1e-12 * scale { (&a, &b) } else { (&b, &a) };
        for t in binary_form_root_angles(p) {
            let (qv, mag) = (binary_eval(q, t.cos(), t.sin()), binary_magnitude(q, t));
            if qv.abs() <= 1e-9 * mag.max(scale) {
                return Err(Error::NotSemiHomogeneous { t });
            }
        }
        Ok(())
    }
}

fn binary_magnitude(p: &[f64], t: f64) -> f64 {
    let n = p.len() - 1;
    let (c, s) = (t.cos().abs(), t.sin().abs());
    p.iter().enumerate().map(|(i, v)| v.abs() * c.powi((n - i) as i32) * s.powi(i as i32)).sum()
}

/// Real projective roots (angles in `[0, π)`) of a binary form.
pub fn binary_form_root_angles(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let mut best = (0.0, 0.0_f64);
    for k in 0..(4 * n + 4) {
        let psi = k as f64 * PI / (4 * n + 4) as f64;
        let v = binary_eval(p, psi.cos(), psi.sin()).abs();
        if v > best.1 {
            best = (psi, v);
        }
    }
    if best.1 == 0.0 {
        return Vec::new();
    }
    let (s, c) = best.0.sin_cos();
    let q = binary_substitute(p, [[c, -s], [s, c]]);
    let poly = Poly1::new(q.iter().rev().cloned().collect());
    poly.real_roots(1e-12)
        .into_iter()
        .map(|(x, _)| (1.0_f64.atan2(x) + best.0).rem_euclid(PI))
        .collect()
}

/// `I = -deg(A_n + iB_n)/3`.
pub fn semihomogeneous_index(s: &SemiHomogeneousForm) -> Result<Ratio<i64>> {
    s.check_semi_homogeneous()?;
    let (a, b) = s.ab();
    let tol = zero_tol_for(s.scale());
    let deg = winding_degree(&LoopMap::new(
        |t| [binary_eval(&a, t.cos(), t.sin()), binary_eval(&b, t.cos(), t.sin())],
        tol,
    ))?;
    Ok(Ratio::new(-deg, 3))
}

/// Output of [`loewner_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoewnerReport {
    pub trials: usize,
    pub violations: usize,
    /// Index (as `"p/q"`) to count.
    pub histogram: BTreeMap<String, usize>,
    pub seed: u64,
    pub max_degree: usize,
    /// Forms drawn but rejected as not semi-homogeneous.
    pub rejected: usize,
    pub max_index: Option<String>,
}

/// Random real `h` of degree `n + 3` written as `Σ Re(κ_pq z^p z̄^q)` with
/// complex weights of random magnitude, so that every `z^p z̄^q` balance
/// is exercised.
pub fn random_semihomogeneous(rng: &mut impl Rng, n: usize) -> SemiHomogeneousForm {
    let m = n + 3;
    let mut h = vec![0.0; m + 1];
    for p in 0..=m {
        let q = m - p;
        if p < q {
            // Re(κ z^p z̄^q) and its conjugate pair coincide.
            continue;
        }
        let mag = 10f64.powf(-rng.gen_range(0.0..3.0));
        let (kr, ki) = (mag * rng.gen_range(-1.0..1.0), mag * rng.gen_range(-1.0..1.0));
        // Expand z^p z̄^q = (x+iy)^p (x-iy)^q into real/imag binary forms.
        let mut re = vec![0.0; m + 1];
        let mut im = vec![0.0; m + 1];
        for i in 0..=p {
            for j in 0..=q {
                // (iy)^i from z^p, (-iy)^j from z̄^q
                let coef = binom(p, i) * binom(q, j) * if j % 2 == 1 { -1.0 } else { 1.0 };
                let k = i + j;
                match k % 4 {
                    0 => re[k] += coef,
                    1 => im[k] += coef,
                    2 => re[k] -= coef,
                    _ => im[k] -= coef,
                }
            }
        }
        for k in 0..=m {
            h[k] += kr * re[k] - ki * im[k];
        }
    }
    SemiHomogeneousForm { n, h }
}

/// Draws random semi-homogeneous forms with `1 ≤ n ≤ max_degree` and
/// checks that every index is at most 1.
pub fn loewner_check(trials: usize, max_degree: usize, seed: u64) -> LoewnerReport {
    let max_degree = max_degree.max(1);
    let outcomes: Vec<(Option<Ratio<i64>>, usize)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rejected = 0;
            loop {
                let n = rng.gen_range(1..=max_degree);
                let s = random_semihomogeneous(&mut rng, n);
                match semihomogeneous_index(&s) {
                    Ok(i) => return (Some(i), rejected),
                    Err(_) => {
                        rejected += 1;
                        if rejected > 1000 {
                            return (None, rejected);
                        }
                    }
                }
            }
        })
        .collect();
    let mut histogram = BTreeMap::new();
    let mut violations = 0;
    let mut rejected = 0;
    let mut max_index: Option<Ratio<i64>> = None;
    for (i, r) in outcomes {
        rejected += r;
        if let Some(i) = i {
            if i > Ratio::from_integer(1) {
                violations += 1;
            }
            max_index = Some(max_index.map_or(i, |m| m.max(i)));
            *histogram.entry(crate::localmodel::ratio_serde::to_string(&i)).or_insert(0) += 1;
        }
    }
    LoewnerReport {
        trials,
        violations,
        histogram,
        seed,
        max_degree,
        rejected,
        max_index: max_index.map(|m| crate::localmodel::ratio_serde::to_string(&m)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_conjugate_square() {
        let id = LoopMap::new(|t| [t.cos(), t.sin()], 1e-12);
        assert_eq!(winding_degree(&id).unwrap(), 1);
        let sq = LoopMap::new(|t| [(2.0 * t).cos(), -(2.0 * t).sin()], 1e-12);
        assert_eq!(winding_degree(&sq).unwrap(), -2);
    }

    #[test]
    fn loop_through_zero_is_rejected() {
        let m = LoopMap::new(|t| [t.cos(), 0.0], 1e-12);
        assert!(matches!(winding_degree(&m), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn web_index_of_linear_model() {
        let m = EllipticModel::new(1.0, 0.0, 0.0, 1.0);
        assert_eq!(web_index(|x, y| m.omega1(x, y)).unwrap(), Ratio::new(-1, 3));
    }
}
