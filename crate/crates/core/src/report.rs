//! Versioned JSON documents shared by the command-line and web front ends.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::blowup::{blowup_singularities, SingularityKind};
use crate::error::{Error, Result};
use crate::localmodel::{ratio_serde, EllipticModel, EllipticPortrait, HyperbolicModel, LocalModel, Region};

pub const SCHEMA_VERSION: u32 = 1;

/// Any document with a `schemaVersion` field in front.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Versioned<T: Serialize> {
    pub schema_version: u32,
    pub kind: &'static str,
    #[serde(flatten)]
    pub body: T,
}

pub fn versioned<T: Serialize>(kind: &'static str, body: T) -> Versioned<T> {
    Versioned { schema_version: SCHEMA_VERSION, kind, body }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Classification {
    pub region: Region,
    pub abcd: [f64; 4],
    /// `ad - bc`.
    pub delta: f64,
    /// Discriminant of `P`.
    pub discriminant: f64,
    /// Projective roots of `P` in `[0, π)`.
    pub roots: usize,
    pub root_angles: Vec<f64>,
    /// `D1`/`D2`/`D3` for elliptic points, the parameter-space region for
    /// hyperbolic ones.
    pub portrait: String,
    pub saddles: usize,
    pub nodes: usize,
    #[serde(with = "ratio_serde")]
    pub index: Ratio<i64>,
    pub model: LocalModel,
}

/// Classification of the model `(a, b, c, d)` in `region`. Non-simple and
/// boundary models are errors.
pub fn classify(region: Region, abcd: [f64; 4]) -> Result<Classification> {
    if abcd.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("coefficients must be finite".into()));
    }
    let [a, b, c, d] = abcd;
    let (model, portrait, index) = match region {
        Region::Elliptic => {
            let m = EllipticModel::new(a, b, c, d);
            let (p, i) = m.classify()?;
            (LocalModel::Elliptic(m), format!("{p:?}"), i)
        }
        Region::Hyperbolic => {
            let m = HyperbolicModel::new(a, b, c, d);
            let p = m.classify()?;
            (LocalModel::Hyperbolic(m), format!("{:?}", p.region), Ratio::from_integer(p.index as i64))
        }
    };
    let roots = model.char_poly().roots()?;
    let mut root_angles: Vec<f64> = roots.roots.iter().map(|r| r.t).collect();
    root_angles.sort_by(|x, y| x.total_cmp(y));
    let sing = blowup_singularities(&model)?;
    let count = |k| sing.iter().filter(|s| s.kind == k).count();
    Ok(Classification {
        region,
        abcd,
        delta: model.delta(),
        discriminant: roots.discriminant,
        roots: roots.count(),
        root_angles,
        portrait,
        saddles: count(SingularityKind::Saddle),
        nodes: count(SingularityKind::Node),
        index,
        model,
    })
}

/// Label of the normalized elliptic model `(a, h)`; `None` on the circle,
/// the astroid, or where either is within `BOUNDARY_TOL`.
pub fn elliptic_label(a: f64, h: f64) -> Option<EllipticPortrait> {
    EllipticModel::from_normalized(a, h).classify().ok().map(|(p, _)| p)
}

/// `n × n` labels over the square `[-r, r]²` of the `(a, h)` plane, rows
/// from `h = r` down to `h = -r`.
pub fn elliptic_parameter_map(n: usize, r: f64) -> Result<Vec<Vec<Option<EllipticPortrait>>>> {
    if n < 2 || n > 2048 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("map needs 2 <= n <= 2048 and r > 0, got n = {n}, r = {r}")));
    }
    let at = |k: usize| -r + 2.0 * r * (k as f64 + 0.5) / n as f64;
    Ok((0..n).map(|i| (0..n).map(|j| elliptic_label(at(j), at(n - 1 - i))).collect()).collect())
}

/// The parameter map as an SVG of square cells.
pub fn elliptic_parameter_map_svg(n: usize, r: f64, size: f64) -> Result<String> {
    let map = elliptic_parameter_map(n, r)?;
    let cell = size / n as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    for (i, row) in map.iter().enumerate() {
        for (j, label) in row.iter().enumerate() {
            let (class, fill) = match label {
                Some(EllipticPortrait::D1) => ("d1", "#4e79a7"),
                Some(EllipticPortrait::D2) => ("d2", "#f28e2b"),
                Some(EllipticPortrait::D3) => ("d3", "#59a14f"),
                _ => ("boundary", "#000000"),
            };
            let _ = writeln!(
                s,
                r#"<rect class="{class}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                j as f64 * cell,
                i as f64 * cell,
                cell,
                cell
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
