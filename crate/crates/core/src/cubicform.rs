//! Numerators of the affine cubic form of a graph and the directions it
//! defines (the 3-web in the elliptic region, the line field in the
//! hyperbolic region).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet2;
use crate::poly::binary_substitute;

/// `φ⁵ C_ijk` for the four index patterns, `φ⁴ = hess`, and the metric
/// numerators `(f_xx, f_xy, f_yy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicFormValue {
    pub n111: f64,
    pub n112: f64,
    pub n122: f64,
    pub n222: f64,
    pub hess: f64,
    pub g: [f64; 3],
}

impl CubicFormValue {
    pub fn components(&self) -> [f64; 4] {
        [self.n111, self.n112, self.n122, self.n222]
    }

    pub fn max_abs(&self) -> f64 {
        self.components().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Coefficients of `n111 dx³ + 3 n112 dx²dy + 3 n122 dx dy² + n222 dy³`
    /// by increasing power of `dy`.
    pub fn binary_cubic(&self) -> [f64; 4] {
        [self.n111, 3.0 * self.n112, 3.0 * self.n122, self.n222]
    }
}

/// Raw third partials and Hessian entries feeding the numerator formulas.
#[derive(Clone, Copy, Debug)]
struct Partials {
    xx: f64,
    xy: f64,
    yy: f64,
    xxx: f64,
    xxy: f64,
    xyy: f64,
    yyy: f64,
}

fn numerators(p: Partials) -> [f64; 4] {
    let Partials { xx, xy, yy, xxx, xxy, xyy, yyy } = p;
    let n111 = 0.25 * xxx * xx * yy - 0.75 * xyy * xx * xx + 1.5 * xxy * xx * xy - xxx * xy * xy;
    let n112 = -0.25 * xx * xx * yyy + 0.75 * xx * yy * xxy - 0.5 * xy * yy * xxx;
    let n122 = -0.25 * yy * yy * xxx + 0.75 * xx * yy * xyy - 0.5 * xy * xx * yyy;
    let n222 = 0.25 * yyy * xx * yy - 0.75 * xxy * yy * yy + 1.5 * xyy * yy * xy - yyy * xy * xy;
    [n111, n112, n122, n222]
}

/// Numerator components of the cubic form from the 3-jet of `j`.
pub fn cubic_components(j: &Jet2) -> CubicFormValue {
    let p = Partials {
        xx: j.partial(2, 0),
        xy: j.partial(1, 1),
        yy: j.partial(0, 2),
        xxx: j.partial(3, 0),
        xxy: j.partial(2, 1),
        xyy: j.partial(1, 2),
        yyy: j.partial(0, 3),
    };
    let [n111, n112, n122, n222] = numerators(p);
    CubicFormValue {
        n111,
        n112,
        n122,
        n222,
        hess: p.xx * p.yy - p.xy * p.xy,
        g: [p.xx, p.xy, p.yy],
    }
}

/// The numerator components as jets of order `j.order() - 3` around the base
/// point, so their Taylor expansion can be read off directly.
pub fn components_as_jets(j: &Jet2) -> [Jet2; 4] {
    assert!(j.order() >= 3, "need at least a 3-jet");
    let d = |i: usize, k: usize| {
        let mut out = j.clone();
        for _ in 0..i {
            out = out.derivative(0);
        }
        for _ in 0..k {
            out = out.derivative(1);
        }
        out.truncate(j.order() - 3)
    };
    let (xx, xy, yy) = (d(2, 0), d(1, 1), d(0, 2));
    let (xxx, xxy, xyy, yyy) = (d(3, 0), d(2, 1), d(1, 2), d(0, 3));
    let m = |a: &Jet2, b: &Jet2, c: &Jet2| &(a * b) * c;
    let mut n111 = m(&xxx, &xx, &yy).scale(0.25);
    n111.axpy(-0.75, &m(&xyy, &xx, &xx));
    n111.axpy(1.5, &m(&xxy, &xx, &xy));
    n111.axpy(-1.0, &m(&xxx, &xy, &xy));
    let mut n112 = m(&xx, &xx, &yyy).scale(-0.25);
    n112.axpy(0.75, &m(&xx, &yy, &xxy));
    n112.axpy(-0.5, &m(&xy, &yy, &xxx));
    let mut n122 = m(&yy, &yy, &xxx).scale(-0.25);
    n122.axpy(0.75, &m(&xx, &yy, &xyy));
    n122.axpy(-0.5, &m(&xy, &xx, &yyy));
    let mut n222 = m(&yyy, &xx, &yy).scale(0.25);
    n222.axpy(-0.75, &m(&xxy, &yy, &yy));
    n222.axpy(1.5, &m(&xyy, &yy, &xy));
    n222.axpy(-1.0, &m(&yyy, &xy, &xy));
    [n111, n112, n122, n222]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionKind {
    Elliptic3,
    Hyperbolic1,
    Degenerate,
}

/// Undirected angles in `[0, π)`, sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub kind: DirectionKind,
    pub angles: Vec<f64>,
}

/// Angles closer than this are reported as a repeated root.
pub const MERGE_ANGLE: f64 = 1e-8;

/// Default relative zero tolerance for a vanishing cubic form.
pub const ZERO_TOL: f64 = 1e-9;

/// Real root directions of the binary cubic `Σ p[i] dx^{3-i} dy^i`.
pub fn binary_cubic_roots(p: [f64; 4]) -> DirectionSet {
    // Rotate so the dx³ coefficient is the largest sampled value; then no
    // root is at infinity and the cubic in X = dx/dy has a sizeable lead.
    let mut best = (0.0, 0.0_f64);
    for k in 0..12 {
        let psi = k as f64 * PI / 12.0;
        let v = crate::poly::binary_eval(&p, psi.cos(), psi.sin()).abs();
        if v > best.1 {
            best = (psi, v);
        }
    }
    let psi = best.0;
    let (s, c) = psi.sin_cos();
    // x = c X - s Y, y = s X + c Y: direction (X, Y) maps to angle(X, Y) + psi.
    let q = binary_substitute(&p, [[c, -s], [s, c]]);
    let roots = real_cubic_roots(q[0], q[1], q[2], q[3]);
    let mut angles: Vec<f64> = roots
        .into_iter()
        .map(|x| (1.0_f64.atan2(x) + psi).rem_euclid(PI))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::new();
    let mut degenerate = false;
    for a in angles {
        if let Some(&last) = merged.last() {
            if a - last < MERGE_ANGLE {
                degenerate = true;
                continue;
            }
        }
        merged.push(a);
    }
    if merged.len() > 1 && merged[0] + PI - merged[merged.len() - 1] < MERGE_ANGLE {
        merged.pop();
        degenerate = true;
    }
    let kind = if degenerate {
        DirectionKind::Degenerate
    } else if merged.len() == 3 {
        DirectionKind::Elliptic3
    } else {
        DirectionKind::Hyperbolic1
    };
    DirectionSet { kind, angles: merged }
}

/// Real roots of `a x³ + b x² + c x + d` with `a ≠ 0`, via the depressed
/// cubic; repeated roots are returned once per multiplicity.
pub fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (b, c, d) = (b / a, c / a, d / a);
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let scale = (p.abs().powi(3) + q * q).max(f64::MIN_POSITIVE);
    let mut roots = if disc > 1e-14 * scale {
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3).map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos()).collect()
    } else if disc < -1e-14 * scale {
        let r = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        vec![(-q / 2.0 + r).cbrt() + (-q / 2.0 - r).cbrt()]
    } else if p.abs() < 1e-15 {
        vec![0.0; 3]
    } else {
        let t1 = 3.0 * q / p;
        let t2 = -1.5 * q / p;
        vec![t1, t2, t2]
    };
    for r in roots.iter_mut() {
        *r += shift;
        // One Newton step on the original cubic tightens the closed form.
        let f = ((*r + b) * *r + c) * *r + d;
        let df = (3.0 * *r + 2.0 * b) * *r + c;
        if df.abs() > 1e-12 {
            let nr = *r - f / df;
            if nr.is_finite() {
                *r = nr;
            }
        }
    }
    roots
}

/// Directions of the binary cubic differential equation defined by `c`.
pub fn bcde_directions(c: &CubicFormValue) -> Result<DirectionSet> {
    bcde_directions_tol(c, ZERO_TOL)
}

pub fn bcde_directions_tol(c: &CubicFormValue, tol: f64) -> Result<DirectionSet> {
    let scale = 1.0 + c.g.iter().fold(0.0_f64, |m, v| m.max(v.abs())).powi(3);
    if c.max_abs() < tol * scale {
        return Err(Error::SingularCubic);
    }
    Ok(binary_cubic_roots(c.binary_cubic()))
}

/// Which normal form the 2-jet is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalForm {
    /// `(x² + y²)/2`
    Elliptic,
    /// `xy`
    Hyperbolic,
}

pub fn detect_normal_form(j: &Jet2, tol: f64) -> Option<NormalForm> {
    let (a, b, c) = (j.coeff(2, 0), j.coeff(1, 1), j.coeff(0, 2));
    let lin = j.coeff(1, 0).abs().max(j.coeff(0, 1).abs());
    if lin > tol {
        return None;
    }
    if (a - 0.5).abs() < tol && (c - 0.5).abs() < tol && b.abs() < tol {
        Some(NormalForm::Elliptic)
    } else if a.abs() < tol && c.abs() < tol && (b - 1.0).abs() < tol {
        Some(NormalForm::Hyperbolic)
    } else {
        None
    }
}

/// Darboux directions at the base point of a jet in normal form.
///
/// These are the null directions of the cubic term that survives the
/// second-order-contact quadrics: the harmonic part for `(x²+y²)/2`, the
/// `x³, y³` part for `xy`.
pub fn darboux_directions(j: &Jet2) -> Result<DirectionSet> {
    let nf = detect_normal_form(j, 1e-9).ok_or_else(|| {
        Error::NormalizationRequired(format!(
            "2-jet ({}, {}, {}) is neither (x²+y²)/2 nor xy",
            j.coeff(2, 0),
            j.coeff(1, 1),
            j.coeff(0, 2)
        ))
    })?;
    let (c30, c21, c12, c03) = (j.coeff(3, 0), j.coeff(2, 1), j.coeff(1, 2), j.coeff(0, 3));
    let cubic = match nf {
        NormalForm::Elliptic => {
            let alpha = (c30 - c12) / 4.0;
            let beta = (c21 - c03) / 4.0;
            [alpha, 3.0 * beta, -3.0 * alpha, -beta]
        }
        NormalForm::Hyperbolic => [c30, 0.0, 0.0, c03],
    };
    let scale = 1.0 + j.max_abs();
    if cubic.iter().all(|v| v.abs() < ZERO_TOL * scale) {
        return Err(Error::SingularCubic);
    }
    Ok(binary_cubic_roots(cubic))
}

/// Linear change `x = L u` bringing the 2-jet of `j` to normal form, and
/// the sign by which `f` must be multiplied first (elliptic points with a
/// negative definite Hessian).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalizer {
    pub form: NormalForm,
    pub sign: f64,
    pub l: [[f64; 2]; 2],
}

pub fn normalizer(j: &Jet2) -> Option<Normalizer> {
    let (fxx, fxy, fyy) = (j.partial(2, 0), j.partial(1, 1), j.partial(0, 2));
    let hess = fxx * fyy - fxy * fxy;
    let scale = fxx.abs().max(fyy.abs()).max(fxy.abs());
    if scale == 0.0 || hess.abs() < 1e-14 * scale * scale {
        return None;
    }
    // Symmetric eigen-decomposition of [[fxx, fxy], [fxy, fyy]].
    let theta = 0.5 * (2.0 * fxy).atan2(fxx - fyy);
    let (s, c) = theta.sin_cos();
    let k1 = c * c * fxx + 2.0 * s * c * fxy + s * s * fyy;
    let k2 = s * s * fxx - 2.0 * s * c * fxy + c * c * fyy;
    if hess > 0.0 {
        let sign = if k1 > 0.0 { 1.0 } else { -1.0 };
        let (a1, a2) = (1.0 / (sign * k1).sqrt(), 1.0 / (sign * k2).sqrt());
        // L = R diag(a1, a2) Rᵀ keeps the frame orientation and is symmetric.
        let l = [
            [c * c * a1 + s * s * a2, c * s * (a1 - a2)],
            [c * s * (a1 - a2), s * s * a1 + c * c * a2],
        ];
        Some(Normalizer { form: NormalForm::Elliptic, sign, l })
    } else {
        // Order eigenpairs so the first is positive.
        let (kp, kn, ep, en) = if k1 > 0.0 {
            (k1, k2, [c, s], [-s, c])
        } else {
            (k2, k1, [-s, c], [c, s])
        };
        let (ap, an) = (1.0 / kp.sqrt(), 1.0 / (-kn).sqrt());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // x = ep*ap*(X+Y)/√2 - en*an*(X-Y)/√2 gives 2-jet XY, and L = I
        // when the 2-jet already is xy.
        let l = [
            [h * (ep[0] * ap - en[0] * an), h * (ep[0] * ap + en[0] * an)],
            [h * (ep[1] * ap - en[1] * an), h * (ep[1] * ap + en[1] * an)],
        ];
        Some(Normalizer { form: NormalForm::Hyperbolic, sign: 1.0, l })
    }
}

/// The jet re-expressed in normal-form coordinates at its base point (with
/// constant and linear terms removed).
pub fn normalize_jet(j: &Jet2) -> Option<(Normalizer, Jet2)> {
    let n = normalizer(j)?;
    let mut h = j.scale(n.sign);
    h.set(0, 0, 0.0);
    if h.order() >= 1 {
        h.set(1, 0, 0.0);
        h.set(0, 1, 0.0);
    }
    Some((n, h.linear_substitution(n.l)))
}

/// The two independent numerator components `(n111, n222)` after bringing
/// the 2-jet to normal form; in those coordinates they determine the other
/// two (apolarity), so their common zeros are exactly the quadratic points.
pub fn normalized_pair(j: &Jet2) -> Option<(NormalForm, [f64; 2])> {
    let (n, h) = normalize_jet(&j.truncate(3))?;
    let c = cubic_components(&h);
    Some((n.form, [c.n111, c.n222]))
}
