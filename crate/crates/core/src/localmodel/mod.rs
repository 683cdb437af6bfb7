//! First-order models of the cubic form at a quadratic point: the
//! coefficients `(a, b, c, d)`, the characteristic polynomials `P` and `Q`,
//! their invariants, and the classification of simple singularities.

pub mod roots;

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::cubicform::{detect_normal_form, NormalForm};
use crate::error::{Error, Result};
use crate::jets::Jet2;
use crate::poly::binary_eval;
pub use roots::{quartic_real_roots, ProjectiveRoot, QuarticRoots};

/// Relative tolerance for the `δ = 0` and `Δ = 0` strata.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Elliptic,
    Hyperbolic,
}

impl std::str::FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(Region::Elliptic),
            "hyperbolic" => Ok(Region::Hyperbolic),
            other => Err(Error::InvalidParameter(format!("unknown region `{other}`"))),
        }
    }
}

/// Phase portrait types of simple elliptic points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EllipticPortrait {
    /// Outside the astroid: two roots of `P`.
    D1,
    /// Inside the astroid, outside the circle `δ = 0`.
    D2,
    /// Inside the circle.
    D3,
    NonSimple,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sign_with_tol(x: f64, tol: f64) -> i32 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EllipticModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Normalised `(a, h)` with `a + d = 0`, `b - c = 1`; absent when the
    /// `dz³` coefficient `((a+d) - i(b-c))/2` vanishes.
    pub a_norm: Option<f64>,
    pub h_norm: Option<f64>,
    /// `S³ - 27T²` (positive when `P` has 0 or 4 real roots).
    pub discriminant: f64,
    /// `27a²h² - (1 - a² - h²)³` in normalised parameters: negative inside
    /// the astroid.
    pub astroid: Option<f64>,
    pub delta: f64,
    pub s: f64,
    pub t: f64,
    pub root_count_p: Option<usize>,
    pub portrait: EllipticPortrait,
    #[serde(with = "ratio_serde::option")]
    pub index: Option<Ratio<i64>>,
}

impl EllipticModel {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        let delta = a * d - b * c;
        let s = 0.25 * (10.0 * delta + 3.0 * (a * a + b * b + c * c + d * d));
        let t = 0.125
            * ((a + d) * (a - d) * (a - d) - 2.0 * b * c * (a + d) + a * c * c + d * b * b
                - 3.0 * d * c * c
                - 3.0 * a * b * b);
        let discriminant = s * s * s - 27.0 * t * t;
        let (a_norm, h_norm) = match normalize_elliptic(a, b, c, d) {
            Some((an, hn)) => (Some(an), Some(hn)),
            None => (None, None),
        };
        let astroid = match (a_norm, h_norm) {
            (Some(x), Some(h)) => Some(27.0 * x * x * h * h - (1.0 - x * x - h * h).powi(3)),
            _ => None,
        };
        let mut m = Self {
            a,
            b,
            c,
            d,
            a_norm,
            h_norm,
            discriminant,
            astroid,
            delta,
            s,
            t,
            root_count_p: None,
            portrait: EllipticPortrait::NonSimple,
            index: None,
        };
        m.root_count_p = m.char_poly().roots().ok().map(|r| r.count());
        if let Ok((portrait, index)) = m.classify() {
            m.portrait = portrait;
            m.index = Some(index);
        }
        m
    }

    /// Model with normalised parameters `(a, h)`.
    pub fn from_normalized(a: f64, h: f64) -> Self {
        Self::new(a, h + 0.5, h - 0.5, -a)
    }

    pub fn abcd(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    fn scale(&self) -> f64 {
        max_abs(&self.abcd())
    }

    pub fn is_simple(&self) -> bool {
        sign_with_tol(self.delta, BOUNDARY_TOL * self.scale().powi(2)) != 0
    }

    /// Portrait label and index from the signs of `δ` and `Δ`.
    pub fn classify(&self) -> Result<(EllipticPortrait, Ratio<i64>)> {
        let m = self.scale();
        let sd = sign_with_tol(self.delta, BOUNDARY_TOL * m * m);
        if sd == 0 {
            return Err(Error::NonSimple { delta: self.delta });
        }
        // Normalised parameters make the threshold scale-free when available.
        let (disc, dtol) = match self.astroid {
            Some(ast) => (-ast, BOUNDARY_TOL),
            None => (self.discriminant, BOUNDARY_TOL * m.powi(6)),
        };
        let sdisc = sign_with_tol(disc, dtol);
        if sdisc == 0 {
            return Err(Error::Boundary { what: "discriminant", value: disc });
        }
        let portrait = if sd > 0 {
            EllipticPortrait::D3
        } else if sdisc < 0 {
            EllipticPortrait::D1
        } else {
            EllipticPortrait::D2
        };
        Ok((portrait, Ratio::new(-sd as i64, 3)))
    }

    /// Root count of `P` implied by the portrait label.
    pub fn predicted_root_count(&self) -> Option<usize> {
        match self.portrait {
            EllipticPortrait::D1 => Some(2),
            EllipticPortrait::D2 | EllipticPortrait::D3 => Some(4),
            EllipticPortrait::NonSimple => None,
        }
    }

    pub fn char_poly(&self) -> CharPoly {
        char_polys(&LocalModel::Elliptic(self.clone()))
    }

    /// `(A₁, B₁) = (ax + by, cx + dy)`.
    pub fn linear_part(&self, x: f64, y: f64) -> [f64; 2] {
        [self.a * x + self.b * y, self.c * x + self.d * y]
    }

    /// Binary cubic of `ω₁` at `(x, y)`: coefficients of `dx³, dx²dy, dxdy², dy³`.
    pub fn omega1(&self, x: f64, y: f64) -> [f64; 4] {
        let [a1, b1] = self.linear_part(x, y);
        [a1, -3.0 * b1, -3.0 * a1, b1]
    }
}

/// Rotation and positive scaling bringing `(a, b, c, d)` to `a + d = 0`,
/// `b - c = 1`; returns the normalised `(a, h)`.
///
/// With `α = ((a+d) - i(b-c))/2` and `β = ((a-d) + i(b+c))/2` a chart
/// rotation by `ψ` sends `α ↦ α e^{4iψ}` and `β ↦ β e^{2iψ}`. Choosing `ψ`
/// with `α e^{4iψ} = -i|α|` and scaling by `1/(2|α|)` gives `α = -i/2` and
/// `a + ih = β`.
pub fn normalize_elliptic(a: f64, b: f64, c: f64, d: f64) -> Option<(f64, f64)> {
    let (ar, ai) = ((a + d) / 2.0, -(b - c) / 2.0);
    let (br, bi) = ((a - d) / 2.0, (b + c) / 2.0);
    let mod_alpha = ar.hypot(ai);
    let m = max_abs(&[a, b, c, d]);
    if mod_alpha <= 1e-12 * m || m == 0.0 {
        return None;
    }
    let psi = (-PI / 2.0 - ai.atan2(ar)) / 4.0;
    let (s2, c2) = (2.0 * psi).sin_cos();
    let k = 1.0 / (2.0 * mod_alpha);
    Some((k * (br * c2 - bi * s2), k * (br * s2 + bi * c2)))
}

/// The four coefficient cases of the hyperbolic parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcCase {
    #[serde(rename = "BC16")]
    Bc16,
    #[serde(rename = "BCm16")]
    BcM16,
    #[serde(rename = "BC0")]
    Bc0,
    Other,
}

/// Region of the normalised `(a, d)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HyperbolicRegion {
    /// `bc = 16`, `Δ > 0`.
    NoRoots16,
    /// `bc = 16`, `Δ < 0`, `δ > 0`.
    TwoRootsNode16,
    /// `bc = 16`, `Δ < 0`, `δ < 0`.
    Saddle16,
    /// `bc = -16`, bounded component of `Δ > 0`.
    I,
    /// `bc = -16`, unbounded components of `Δ > 0`.
    II,
    /// `bc = -16`, `Δ < 0`, `δ > 0`.
    IIINode,
    /// `bc = -16`, `Δ < 0`, `δ < 0`.
    IIISaddle,
    /// `bc = 0`, first or third quadrant, `a d³ > 27`.
    Quadrant13Outer,
    /// `bc = 0`, first or third quadrant, `a d³ < 27`.
    Quadrant13Inner,
    /// `bc = 0`, second or fourth quadrant.
    Quadrant24,
    Unclassified,
}

/// Predicted root count and index for a hyperbolic region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicPrediction {
    pub case: BcCase,
    pub region: HyperbolicRegion,
    pub root_count: Option<usize>,
    pub index: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HyperbolicModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub case_label: BcCase,
    /// `(a, d)` after scaling to the case's normal form.
    pub normalized: Option<[f64; 4]>,
    pub region: HyperbolicRegion,
    pub discriminant: f64,
    pub delta: f64,
    pub s: f64,
    pub t: f64,
    pub root_count_p: Option<usize>,
    pub index: Option<i32>,
}

impl HyperbolicModel {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::with_e(a, b, c, d, 0.0)
    }

    pub fn with_e(a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        let delta = a * d - b * c;
        let s = a * d - b * c / 4.0;
        let t = -(a * c * c + d * b * b) / 16.0;
        let discriminant = s * s * s - 27.0 * t * t;
        let mut m = Self {
            a,
            b,
            c,
            d,
            e,
            case_label: BcCase::Other,
            normalized: None,
            region: HyperbolicRegion::Unclassified,
            discriminant,
            delta,
            s,
            t,
            root_count_p: None,
            index: None,
        };
        let scale = m.scale();
        m.root_count_p = m.char_poly().roots().ok().map(|r| r.count());
        if let Some(n) = normalize_hyperbolic(a, b, c, d) {
            m.case_label = n.0;
            m.normalized = Some(n.1);
        }
        if let Ok(p) = m.classify() {
            m.region = p.region;
            m.index = Some(p.index);
        } else if sign_with_tol(delta, BOUNDARY_TOL * scale * scale) != 0 {
            m.index = None;
        }
        m
    }

    pub fn abcd(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    fn scale(&self) -> f64 {
        max_abs(&self.abcd())
    }

    pub fn is_simple(&self) -> bool {
        sign_with_tol(self.delta, BOUNDARY_TOL * self.scale().powi(2)) != 0
    }

    pub fn char_poly(&self) -> CharPoly {
        char_polys(&LocalModel::Hyperbolic(self.clone()))
    }

    pub fn linear_part(&self, x: f64, y: f64) -> [f64; 2] {
        [self.a * x + self.b * y, self.c * x + self.d * y]
    }

    /// Binary cubic of `ω₁ = (ax+by)dx³ + (cx+dy)dy³` at `(x, y)`.
    pub fn omega1(&self, x: f64, y: f64) -> [f64; 4] {
        let [a1, b1] = self.linear_part(x, y);
        [a1, 0.0, 0.0, b1]
    }

    /// Region, root count and index predicted by the parameter-space tables.
    pub fn classify(&self) -> Result<HyperbolicPrediction> {
        let m = self.scale();
        if sign_with_tol(self.delta, BOUNDARY_TOL * m * m) == 0 {
            return Err(Error::NonSimple { delta: self.delta });
        }
        let Some((case, [a, _b, _c, d])) = normalize_hyperbolic(self.a, self.b, self.c, self.d) else {
            let index = self.delta.signum() as i32;
            return Ok(HyperbolicPrediction {
                case: BcCase::Other,
                region: HyperbolicRegion::Unclassified,
                root_count: None,
                index,
            });
        };
        let scale = max_abs(&[a, d, 4.0]);
        let tol6 = BOUNDARY_TOL * scale.powi(6);
        let tol2 = BOUNDARY_TOL * scale.powi(2);
        let boundary = |what, value| Err(Error::Boundary { what, value });
        let (region, roots, index) = match case {
            BcCase::Bc16 => {
                let disc = (a * d - 4.0).powi(3) - 27.0 * (a + d).powi(2);
                let delta = a * d - 16.0;
                match (sign_with_tol(disc, tol6), sign_with_tol(delta, tol2)) {
                    (0, _) => return boundary("discriminant", disc),
                    (1, _) => (HyperbolicRegion::NoRoots16, 0, 1),
                    (_, 0) => return boundary("delta", delta),
                    (_, 1) => (HyperbolicRegion::TwoRootsNode16, 2, 1),
                    _ => (HyperbolicRegion::Saddle16, 2, -1),
                }
            }
            BcCase::BcM16 => {
                let disc = (a * d + 4.0).powi(3) - 27.0 * (a + d).powi(2);
                let delta = a * d + 16.0;
                match (sign_with_tol(disc, tol6), sign_with_tol(delta, tol2)) {
                    (0, _) => return boundary("discriminant", disc),
                    (1, _) => {
                        if in_bounded_component(a, d) {
                            (HyperbolicRegion::I, 4, 1)
                        } else {
                            (HyperbolicRegion::II, 0, 1)
                        }
                    }
                    (_, 0) => return boundary("delta", delta),
                    (_, 1) => (HyperbolicRegion::IIINode, 2, 1),
                    _ => (HyperbolicRegion::IIISaddle, 2, -1),
                }
            }
            BcCase::Bc0 => {
                let disc = a * a * (a * d * d * d - 27.0);
                let ad = a * d;
                match sign_with_tol(ad, tol2) {
                    0 => return boundary("delta", ad),
                    -1 => (HyperbolicRegion::Quadrant24, 2, -1),
                    _ => match sign_with_tol(disc, tol6) {
                        0 => return boundary("discriminant", disc),
                        1 => (HyperbolicRegion::Quadrant13Outer, 0, 1),
                        _ => (HyperbolicRegion::Quadrant13Inner, 2, 1),
                    },
                }
            }
            BcCase::Other => unreachable!("normalize_hyperbolic never returns Other"),
        };
        Ok(HyperbolicPrediction { case, region, root_count: Some(roots), index })
    }
}

/// Whether `(a, d)` lies in the component of `Δ > 0` containing the origin
/// for `bc = -16`, tested along the segment from the origin: region I is
/// star-shaped with respect to the origin.
fn in_bounded_component(a: f64, d: f64) -> bool {
    // Δ(u a, u d) with u = s² is g(u) = (u ad + 4)³ - 27 u (a+d)².
    let (p, q) = (a * d, 27.0 * (a + d).powi(2));
    let g = |u: f64| (u * p + 4.0).powi(3) - q * u;
    let n = 400;
    (0..=n).all(|k| g(k as f64 / n as f64) > 0.0) && {
        // g is cubic: also rule out a dip between samples via its critical points.
        let (a3, a2, a1) = (3.0 * p * p * p, 24.0 * p * p, 48.0 * p - q);
        // g'(u) = 3p³u² + 24p²u + 48p - q
        let crit: Vec<f64> = if a3.abs() > 1e-300 {
            let disc = a2 * a2 - 4.0 * a3 * a1;
            if disc >= 0.0 {
                let r = disc.sqrt();
                vec![(-a2 + r) / (2.0 * a3), (-a2 - r) / (2.0 * a3)]
            } else {
                vec![]
            }
        } else if a2.abs() > 1e-300 {
            vec![-a1 / a2]
        } else {
            vec![]
        };
        crit.into_iter().filter(|u| (0.0..=1.0).contains(u)).all(|u| g(u) > 0.0)
    }
}

/// Scales `(a, b, c, d)` to one of the normal forms `bc = ±16` (with
/// `b = 4`) or `b = 0, c = 4`, using `x ↦ αx, y ↦ βy`, the swap `x ↔ y`
/// and an overall sign change.
pub fn normalize_hyperbolic(a: f64, b: f64, c: f64, d: f64) -> Option<(BcCase, [f64; 4])> {
    let m = max_abs(&[a, b, c, d]);
    if m == 0.0 {
        return None;
    }
    let zero = |x: f64| x.abs() <= 1e-12 * m;
    let (mut a, mut b, mut c, mut d) = (a, b, c, d);
    let case = match (zero(b), zero(c)) {
        (true, true) => return None,
        (false, false) => {
            // Want b > 0.
            if b < 0.0 {
                if c > 0.0 {
                    (a, b, c, d) = (d, c, b, a);
                } else {
                    (a, b, c, d) = (-a, -b, -c, -d);
                }
            }
            let (al, be) = ((4.0 / b).sqrt(), (4.0 / c.abs()).sqrt());
            a *= al.powi(3) / be;
            d *= be.powi(3) / al;
            b = 4.0;
            c = 4.0 * c.signum();
            if c > 0.0 {
                BcCase::Bc16
            } else {
                BcCase::BcM16
            }
        }
        (bz, _) => {
            if !bz {
                (a, c, d) = (d, b, a);
            }
            if c < 0.0 {
                (a, c, d) = (-a, -c, -d);
            }
            let be = (4.0 / c).sqrt();
            a /= be;
            d *= be.powi(3);
            b = 0.0;
            c = 4.0;
            BcCase::Bc0
        }
    };
    Some((case, [a, b, c, d]))
}

/// Either kind of first-order model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "lowercase")]
pub enum LocalModel {
    Elliptic(EllipticModel),
    Hyperbolic(HyperbolicModel),
}

impl LocalModel {
    pub fn new(region: Region, abcd: [f64; 4]) -> Self {
        let [a, b, c, d] = abcd;
        match region {
            Region::Elliptic => LocalModel::Elliptic(EllipticModel::new(a, b, c, d)),
            Region::Hyperbolic => LocalModel::Hyperbolic(HyperbolicModel::new(a, b, c, d)),
        }
    }

    pub fn region(&self) -> Region {
        match self {
            LocalModel::Elliptic(_) => Region::Elliptic,
            LocalModel::Hyperbolic(_) => Region::Hyperbolic,
        }
    }

    pub fn abcd(&self) -> [f64; 4] {
        match self {
            LocalModel::Elliptic(m) => m.abcd(),
            LocalModel::Hyperbolic(m) => m.abcd(),
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            LocalModel::Elliptic(m) => m.delta,
            LocalModel::Hyperbolic(m) => m.delta,
        }
    }

    pub fn is_simple(&self) -> bool {
        match self {
            LocalModel::Elliptic(m) => m.is_simple(),
            LocalModel::Hyperbolic(m) => m.is_simple(),
        }
    }

    pub fn omega1(&self, x: f64, y: f64) -> [f64; 4] {
        match self {
            LocalModel::Elliptic(m) => m.omega1(x, y),
            LocalModel::Hyperbolic(m) => m.omega1(x, y),
        }
    }

    pub fn char_poly(&self) -> CharPoly {
        char_polys(self)
    }

    /// Predicted index as a rational.
    pub fn predicted_index(&self) -> Option<Ratio<i64>> {
        match self {
            LocalModel::Elliptic(m) => m.index,
            LocalModel::Hyperbolic(m) => m.index.map(|i| Ratio::from_integer(i as i64)),
        }
    }
}

/// JSON shape `{"region": "...", "abcd": [...], "e": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub region: Region,
    pub abcd: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
}

impl ModelSpec {
    pub fn build(&self) -> LocalModel {
        let [a, b, c, d] = self.abcd;
        match self.region {
            Region::Elliptic => LocalModel::Elliptic(EllipticModel::new(a, b, c, d)),
            Region::Hyperbolic => {
                LocalModel::Hyperbolic(HyperbolicModel::with_e(a, b, c, d, self.e.unwrap_or(0.0)))
            }
        }
    }
}

impl From<&LocalModel> for ModelSpec {
    fn from(m: &LocalModel) -> Self {
        match m {
            LocalModel::Elliptic(e) => ModelSpec { region: Region::Elliptic, abcd: e.abcd(), e: None },
            LocalModel::Hyperbolic(h) => {
                ModelSpec { region: Region::Hyperbolic, abcd: h.abcd(), e: Some(h.e) }
            }
        }
    }
}

/// Characteristic polynomials `P` and `Q` as binary quartics
/// (coefficients of `x⁴, x³y, x²y², xy³, y⁴`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CharPoly {
    pub p: [f64; 5],
    pub q: [f64; 5],
    pub region_kind: Region,
}

impl CharPoly {
    pub fn p_at(&self, t: f64) -> f64 {
        binary_eval(&self.p, t.cos(), t.sin())
    }

    pub fn q_at(&self, t: f64) -> f64 {
        binary_eval(&self.q, t.cos(), t.sin())
    }

    /// `dP(cos t, sin t)/dt`.
    pub fn dp_at(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let p = &self.p;
        // ∂P/∂x · (-sin t) + ∂P/∂y · cos t
        let px = 4.0 * p[0] * c.powi(3) + 3.0 * p[1] * c * c * s + 2.0 * p[2] * c * s * s + p[3] * s.powi(3);
        let py = p[1] * c.powi(3) + 2.0 * p[2] * c * c * s + 3.0 * p[3] * c * s * s + 4.0 * p[4] * s.powi(3);
        -s * px + c * py
    }

    pub fn roots(&self) -> Result<QuarticRoots> {
        quartic_real_roots(self.p)
    }
}

pub fn char_polys(m: &LocalModel) -> CharPoly {
    match m {
        LocalModel::Elliptic(e) => {
            let (a, b, c, d) = (e.a, e.b, e.c, e.d);
            // P = (ax+by)(x³-3xy²) + (cx+dy)(y³-3x²y)
            let p = [a, b - 3.0 * c, -3.0 * (a + d), c - 3.0 * b, d];
            // Q = -(ax+by)(y³-3x²y) + (cx+dy)(x³-3xy²), so P + iQ = (A₁+iB₁)(x+iy)³.
            let q = [c, d + 3.0 * a, 3.0 * (b - c), -a - 3.0 * d, -b];
            CharPoly { p, q, region_kind: Region::Elliptic }
        }
        LocalModel::Hyperbolic(h) => {
            let (a, b, c, d) = (h.a, h.b, h.c, h.d);
            let p = [a, b, 0.0, c, d];
            // Q = xy(ax² + bxy - cxy - dy²)
            let q = [0.0, a, b - c, -d, 0.0];
            CharPoly { p, q, region_kind: Region::Hyperbolic }
        }
    }
}

/// Reads the elliptic model from a jet with 2-jet `(x² + y²)/2` and
/// vanishing 3-jet.
pub fn extract_elliptic(j: &Jet2) -> Result<EllipticModel> {
    let [a40, a31, a22, a13, a04] = fourth_partials(j, NormalForm::Elliptic)?;
    Ok(EllipticModel::new(a40 - 3.0 * a22, a31 - 3.0 * a13, a13 - 3.0 * a31, a04 - 3.0 * a22))
}

/// Reads the hyperbolic model from a jet with 2-jet `xy` and vanishing
/// 3-jet.
pub fn extract_hyperbolic(j: &Jet2) -> Result<HyperbolicModel> {
    let [a, b, e, c, d] = fourth_partials(j, NormalForm::Hyperbolic)?;
    Ok(HyperbolicModel::with_e(a, b, c, d, e))
}

fn fourth_partials(j: &Jet2, want: NormalForm) -> Result<[f64; 5]> {
    if j.order() < 4 {
        return Err(Error::Order(j.order(), 4));
    }
    let tol = 1e-9 * (1.0 + j.max_abs());
    if detect_normal_form(j, tol) != Some(want) {
        return Err(Error::NormalizationRequired(format!(
            "expected {want:?} 2-jet, found ({}, {}, {})",
            j.coeff(2, 0),
            j.coeff(1, 1),
            j.coeff(0, 2)
        )));
    }
    let third = j.degree_part(3);
    if max_abs(&third) > tol {
        return Err(Error::NotQuadratic(format!("3-jet {third:?} does not vanish")));
    }
    Ok([j.partial(4, 0), j.partial(3, 1), j.partial(2, 2), j.partial(1, 3), j.partial(0, 4)])
}

/// The 4-jet `(x²+y²)/2 + (1/24)Σ binom(4,k) a_k x^{4-k} y^k` reproducing
/// the elliptic model with `a₂₂ = 0`.
pub fn elliptic_normal_jet(a: f64, b: f64, c: f64, d: f64, order: usize) -> Jet2 {
    // a = a40 - 3a22, b = a31 - 3a13, c = a13 - 3a31, d = a04 - 3a22.
    // With a22 = 0: a40 = a, a04 = d, and (a31, a13) solve the 2×2 system.
    let a31 = -(b + 3.0 * c) / 8.0;
    let a13 = -(c + 3.0 * b) / 8.0;
    Jet2::from_terms(
        order,
        [0.0, 0.0],
        [
            (2, 0, 0.5),
            (0, 2, 0.5),
            (4, 0, a / 24.0),
            (3, 1, a31 / 6.0),
            (1, 3, a13 / 6.0),
            (0, 4, d / 24.0),
        ],
    )
}

/// The 4-jet `xy + (1/24)(ax⁴ + 4bx³y + 6ex²y² + 4cxy³ + dy⁴)`.
pub fn hyperbolic_normal_jet(a: f64, b: f64, c: f64, d: f64, e: f64, order: usize) -> Jet2 {
    Jet2::from_terms(
        order,
        [0.0, 0.0],
        [(1, 1, 1.0), (4, 0, a / 24.0), (3, 1, b / 6.0), (2, 2, e / 4.0), (1, 3, c / 6.0), (0, 4, d / 24.0)],
    )
}

pub(crate) mod ratio_serde {
    //! Rationals serialised as `"p/q"` strings.
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn to_string(r: &Ratio<i64>) -> String {
        if *r.denom() == 1 {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    pub fn parse(s: &str) -> Option<Ratio<i64>> {
        match s.split_once('/') {
            Some((n, d)) => Some(Ratio::new(n.trim().parse().ok()?, d.trim().parse().ok()?)),
            None => Some(Ratio::from_integer(s.trim().parse().ok()?)),
        }
    }

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Ratio<i64>>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&to_string(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Ratio<i64>>, D::Error> {
            let s: Option<String> = Option::deserialize(d)?;
            match s {
                None => Ok(None),
                Some(s) => parse(&s)
                    .map(Some)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_q_matches_complex_product() {
        let m = EllipticModel::new(0.3, -1.2, 0.7, 2.0);
        let cp = m.char_poly();
        for k in 0..20 {
            let t = k as f64 * 0.31;
            let [a1, b1] = m.linear_part(t.cos(), t.sin());
            let (c3, s3) = ((3.0 * t).cos(), (3.0 * t).sin());
            assert!((cp.p_at(t) - (a1 * c3 - b1 * s3)).abs() < 1e-12);
            assert!((cp.q_at(t) - (a1 * s3 + b1 * c3)).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_jet_round_trip() {
        let j = elliptic_normal_jet(0.4, -0.3, 1.1, 0.9, 4);
        let m = extract_elliptic(&j).unwrap();
        for (x, y) in m.abcd().iter().zip([0.4, -0.3, 1.1, 0.9]) {
            assert!((x - y).abs() < 1e-14);
        }
        let j = hyperbolic_normal_jet(1.0, 2.0, -4.0, 12.0, 0.5, 4);
        let m = extract_hyperbolic(&j).unwrap();
        assert_eq!(m.abcd(), [1.0, 2.0, -4.0, 12.0]);
        assert_eq!(m.e, 0.5);
    }

    #[test]
    fn hyperbolic_normalization_preserves_invariant_signs() {
        let (case, n) = normalize_hyperbolic(1.0, 2.0, -4.0, 12.0).unwrap();
        assert_eq!(case, BcCase::BcM16);
        let m = HyperbolicModel::new(n[0], n[1], n[2], n[3]);
        assert!(m.discriminant.signum() == HyperbolicModel::new(1.0, 2.0, -4.0, 12.0).discriminant.signum());
    }
}
