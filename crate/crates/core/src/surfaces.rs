//! Catalog of model surfaces with closed-form oracles.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::cubicform::CubicFormValue;
use crate::error::{Error, Result};
use crate::jets::{Domain, ImplicitSurface, SurfaceChart};
use crate::localmodel::{elliptic_normal_jet, hyperbolic_normal_jet};
use crate::poly::{Poly2, Poly3};

/// Euler characteristics of the elliptic part, hyperbolic part and whole
/// surface. Declared, never computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EulerData {
    pub chi_e: i64,
    pub chi_h: i64,
    pub chi_m: i64,
}

#[derive(Clone, Debug)]
pub enum Geometry {
    Graph(SurfaceChart),
    Implicit(ImplicitSurface),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownPoint {
    pub location: [f64; 3],
    #[serde(with = "crate::localmodel::ratio_serde")]
    pub index: Ratio<i64>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub geometry: Geometry,
    pub euler: Option<EulerData>,
    pub known_points: Vec<KnownPoint>,
    pub profile: Option<ProfileCurve>,
}

impl CatalogEntry {
    pub fn chart(&self) -> Option<&SurfaceChart> {
        match &self.geometry {
            Geometry::Graph(c) => Some(c),
            Geometry::Implicit(_) => None,
        }
    }

    pub fn implicit(&self) -> Option<&ImplicitSurface> {
        match &self.geometry {
            Geometry::Implicit(s) => Some(s),
            Geometry::Graph(_) => None,
        }
    }
}

/// Catalog names with their parameters and defaults.
pub const CATALOG: &[(&str, &[(&str, f64)])] = &[
    ("fold", &[]),
    ("gauss_cusp", &[("lambda_cusp", 1.0)]),
    ("pick_def", &[("c", 1.0)]),
    ("pick_indef", &[("a", 1.0), ("b", 1.0)]),
    ("elliptic_normal", &[("a", 0.0), ("b", 0.5), ("c", -0.5), ("d", 0.0)]),
    ("hyperbolic_normal", &[("a", 1.0), ("b", 2.0), ("c", -4.0), ("d", 12.0), ("e", 0.0)]),
    ("hyperbolic_disc", &[("a", 1.0), ("b", 2.0), ("c", -4.0), ("d", 12.0), ("e", 0.0), ("radius", 0.3)]),
    ("rotation", &[("lambda_rot", 0.2)]),
    ("perturbed_sphere", &[("eps", 0.05)]),
    ("quadric", &[("rx", 1.0), ("ry", 1.5), ("rz", 2.0)]),
];

/// Resolves `params` against the defaults of `name`. The key `lambda` is
/// accepted for whichever of `lambda_cusp` / `lambda_rot` the entry uses.
fn resolve(name: &str, params: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let (_, defaults) = CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownCatalog(name.to_string()))?;
    let mut out: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in params {
        let key = if k == "lambda" {
            defaults
                .iter()
                .map(|(d, _)| *d)
                .find(|d| d.starts_with("lambda"))
                .ok_or_else(|| Error::InvalidParameter(format!("`{name}` takes no lambda")))?
                .to_string()
        } else {
            k.clone()
        };
        if !out.contains_key(&key) {
            return Err(Error::InvalidParameter(format!("`{name}` has no parameter `{k}`")));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{k} = {v}")));
        }
        out.insert(key, *v);
    }
    Ok(out)
}

pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let p = resolve(name, params)?;
    let g = |k: &str| p[k];
    let graph = |f: Poly2, domain: Domain| {
        let mut c = SurfaceChart::polynomial(name, f, domain);
        for (k, v) in &p {
            c = c.with_param(k, *v);
        }
        Geometry::Graph(c)
    };
    let mut entry = CatalogEntry {
        name: name.to_string(),
        params: p.clone(),
        geometry: Geometry::Graph(SurfaceChart::polynomial(name, Poly2::new(), Domain::Plane)),
        euler: None,
        known_points: Vec::new(),
        profile: None,
    };
    match name {
        "fold" => {
            entry.geometry = graph(Poly2::from_terms([(2, 0, 0.5), (0, 3, 1.0 / 6.0)]), Domain::Plane);
        }
        "gauss_cusp" => {
            let l = g("lambda_cusp");
            if l == 0.0 || l == 3.0 {
                return Err(Error::InvalidParameter(format!("Gauss cusp modulus must avoid 0 and 3, got {l}")));
            }
            entry.geometry = graph(gauss_cusp_poly(l), Domain::Plane);
        }
        "pick_def" => {
            let c = g("c");
            entry.geometry = graph(
                Poly2::from_terms([(2, 0, 0.5), (0, 2, 0.5), (3, 0, c / 6.0), (1, 2, -c / 2.0)]),
                Domain::Plane,
            );
        }
        "pick_indef" => {
            let (a, b) = (g("a"), g("b"));
            entry.geometry =
                graph(Poly2::from_terms([(1, 1, 1.0), (3, 0, a.powi(3)), (0, 3, b.powi(3))]), Domain::Plane);
        }
        "elliptic_normal" => {
            let j = elliptic_normal_jet(g("a"), g("b"), g("c"), g("d"), 4);
            entry.geometry = graph(jet_poly(&j), Domain::Plane);
        }
        "hyperbolic_normal" | "hyperbolic_disc" => {
            let j = hyperbolic_normal_jet(g("a"), g("b"), g("c"), g("d"), g("e"), 4);
            if name == "hyperbolic_disc" {
                let r = g("radius");
                if r <= 0.0 {
                    return Err(Error::InvalidParameter(format!("radius = {r}")));
                }
                entry.geometry = graph(jet_poly(&j), Domain::Disc { center: [0.0, 0.0], radius: r });
                entry.euler = Some(EulerData { chi_e: 0, chi_h: 1, chi_m: 1 });
            } else {
                entry.geometry = graph(jet_poly(&j), Domain::Plane);
            }
        }
        "rotation" => {
            let l = g("lambda_rot");
            if !(0.0..0.5).contains(&l) {
                return Err(Error::InvalidParameter(format!("lambda_rot must lie in [0, 0.5), got {l}")));
            }
            entry.geometry = Geometry::Implicit(ImplicitSurface::new(rotation_implicit(l)));
            entry.euler = Some(EulerData { chi_e: 2, chi_h: 0, chi_m: 2 });
            entry.profile = Some(ProfileCurve::rotation_example(l));
            entry.known_points = vec![
                KnownPoint { location: [0.0, 0.0, 1.0], index: Ratio::from_integer(1) },
                KnownPoint { location: [0.0, 0.0, -1.0], index: Ratio::from_integer(1) },
            ];
        }
        "perturbed_sphere" => {
            let e = g("eps");
            if !(0.0..0.2).contains(&e) {
                return Err(Error::InvalidParameter(format!("eps must lie in [0, 0.2), got {e}")));
            }
            entry.geometry = Geometry::Implicit(ImplicitSurface::new(Poly3::from_terms([
                (2, 0, 0, 1.0),
                (0, 2, 0, 1.0),
                (0, 0, 2, 1.0),
                (4, 0, 0, e),
                (0, 4, 0, e),
                (0, 0, 4, e),
                (0, 0, 0, -1.0 - 0.6 * e),
            ])));
            entry.euler = Some(EulerData { chi_e: 2, chi_h: 0, chi_m: 2 });
        }
        "quadric" => {
            let (rx, ry, rz) = (g("rx"), g("ry"), g("rz"));
            if rx <= 0.0 || ry <= 0.0 || rz <= 0.0 {
                return Err(Error::InvalidParameter("ellipsoid radii must be positive".into()));
            }
            entry.geometry = Geometry::Implicit(ImplicitSurface::new(Poly3::from_terms([
                (2, 0, 0, 1.0 / (rx * rx)),
                (0, 2, 0, 1.0 / (ry * ry)),
                (0, 0, 2, 1.0 / (rz * rz)),
                (0, 0, 0, -1.0),
            ])));
            entry.euler = Some(EulerData { chi_e: 2, chi_h: 0, chi_m: 2 });
        }
        _ => return Err(Error::UnknownCatalog(name.to_string())),
    }
    Ok(entry)
}

pub fn gauss_cusp_poly(lambda: f64) -> Poly2 {
    Poly2::from_terms([(2, 0, 0.5), (1, 2, 0.5), (0, 4, lambda / 24.0)])
}

/// The polynomial whose jet at the origin is `j`.
fn jet_poly(j: &crate::jets::Jet2) -> Poly2 {
    let mut p = Poly2::new();
    for k in 0..=j.order() {
        for jj in 0..=k {
            let c = j.coeff(k - jj, jj);
            if c != 0.0 {
                p.add_term((k - jj) as u32, jj as u32, c);
            }
        }
    }
    p
}

/// `x₁² + x₂² + (y² - 1)(1 + λy)²` with `y` the third coordinate.
pub fn rotation_implicit(l: f64) -> Poly3 {
    Poly3::from_terms([
        (2, 0, 0, 1.0),
        (0, 2, 0, 1.0),
        (0, 0, 4, l * l),
        (0, 0, 3, 2.0 * l),
        (0, 0, 2, 1.0 - l * l),
        (0, 0, 1, -2.0 * l),
        (0, 0, 0, -1.0),
    ])
}

type ProfileFn = dyn Fn(f64) -> [[f64; 4]; 2] + Send + Sync;

/// Plane curve `t ↦ (x(t), y(t))` with derivatives to order 3.
#[derive(Clone)]
pub struct ProfileCurve {
    pub name: String,
    pub interval: [f64; 2],
    f: Arc<ProfileFn>,
}

impl fmt::Debug for ProfileCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProfileCurve").field("name", &self.name).field("interval", &self.interval).finish()
    }
}

impl ProfileCurve {
    pub fn new<F>(name: impl Into<String>, interval: [f64; 2], f: F) -> Self
    where
        F: Fn(f64) -> [[f64; 4]; 2] + Send + Sync + 'static,
    {
        Self { name: name.into(), interval, f: Arc::new(f) }
    }

    /// `(cos t (1 + λ sin t), sin t)` on `[-π/2, π/2]`.
    pub fn rotation_example(l: f64) -> Self {
        Self::new(format!("rotation({l})"), [-FRAC_PI_2, FRAC_PI_2], move |t| {
            let (s, c) = t.sin_cos();
            // x = cos t + (λ/2) sin 2t
            let (s2, c2) = (2.0 * t).sin_cos();
            let x = [c + 0.5 * l * s2, -s + l * c2, -c - 2.0 * l * s2, s - 4.0 * l * c2];
            let y = [s, c, -s, -c];
            [x, y]
        })
    }

    pub fn circle() -> Self {
        Self::rotation_example(0.0)
    }

    /// `[[x, x', x'', x'''], [y, y', y'', y''']]` at `t`.
    pub fn eval(&self, t: f64) -> [[f64; 4]; 2] {
        (self.f)(t)
    }

    /// `Δ = x_t y_tt - x_tt y_t`.
    pub fn delta(&self, t: f64) -> f64 {
        let [x, y] = self.eval(t);
        x[1] * y[2] - x[2] * y[1]
    }

    /// `Δ_t = x_t y_ttt - x_ttt y_t`.
    pub fn delta_t(&self, t: f64) -> f64 {
        let [x, y] = self.eval(t);
        x[1] * y[3] - x[3] * y[1]
    }
}

/// `x y'' - x' y'` in the affine arclength `s` (`ds = Δ^{1/3} dt`),
/// expressed through `t`-derivatives. Its zeros are the quadratic parallels.
pub fn affine_reparam_condition(c: &ProfileCurve, t: f64) -> Result<f64> {
    let [x, y] = c.eval(t);
    let d = c.delta(t);
    if d <= 0.0 {
        return Err(Error::InvalidParameter(format!("profile is not affinely regular at t = {t} (Δ = {d})")));
    }
    if x[0].abs() < 1e-12 {
        return Err(Error::Domain { chart: c.name.clone(), x: t, y: x[0] });
    }
    let dt = c.delta_t(t);
    Ok(d.powf(-2.0 / 3.0) * (y[2] * x[0] - y[1] * x[1]) - dt * y[1] * x[0] / (3.0 * d.powf(5.0 / 3.0)))
}

/// `Δ_t(1 + λ sin t) + 3λ cos t Δ - 6λ cos³t (1 + 2λ sin t)`, from the
/// profile derivatives.
pub fn rotation_identity_residual(c: &ProfileCurve, l: f64, t: f64) -> f64 {
    let (s, co) = t.sin_cos();
    c.delta_t(t) * (1.0 + l * s) + 3.0 * l * co * c.delta(t) - 6.0 * l * co.powi(3) * (1.0 + 2.0 * l * s)
}

/// Closed-form numerators for `z = x²/2 + y³/6`: `¼(0, -1, 0, y)`.
pub fn fold_cubic_oracle(p: [f64; 2]) -> CubicFormValue {
    let y = p[1];
    CubicFormValue { n111: 0.0, n112: -0.25, n122: 0.0, n222: 0.25 * y, hess: y, g: [1.0, 0.0, y] }
}

/// Closed-form numerators for `z = x²/2 + xy²/2 + λy⁴/24`:
/// `¼(-3, -λy, 3x - λy²/2, y(x(6+λ) + λ(λ-2)y²/2))`.
pub fn cusp_cubic_oracle(p: [f64; 2], l: f64) -> CubicFormValue {
    let [x, y] = p;
    let fyy = x + 0.5 * l * y * y;
    CubicFormValue {
        n111: -0.75,
        n112: -0.25 * l * y,
        n122: 0.25 * (3.0 * x - 0.5 * l * y * y),
        n222: 0.25 * y * (x * (6.0 + l) + 0.5 * l * (l - 2.0) * y * y),
        hess: fyy - y * y,
        g: [1.0, y, fyy],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_alias_and_rejections() {
        let mut p = BTreeMap::new();
        p.insert("lambda".to_string(), 3.0);
        assert!(catalog("gauss_cusp", &p).is_err());
        p.insert("lambda".to_string(), 2.0);
        let e = catalog("gauss_cusp", &p).unwrap();
        assert_eq!(e.params["lambda_cusp"], 2.0);
        assert!(catalog("nope", &BTreeMap::new()).is_err());
        p.insert("mu".to_string(), 1.0);
        assert!(catalog("gauss_cusp", &p).is_err());
    }

    #[test]
    fn rotation_implicit_contains_profile() {
        let l = 0.2;
        let f = rotation_implicit(l);
        let c = ProfileCurve::rotation_example(l);
        for k in 0..50 {
            let t = -1.5 + 3.0 * k as f64 / 49.0;
            let [x, y] = c.eval(t);
            assert!(f.eval([x[0], 0.0, y[0]]).abs() < 1e-14);
        }
    }
}
