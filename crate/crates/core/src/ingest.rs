//! JSON surface documents.
//!
//! ```json
//! {"kind": "graph", "coeffs": [[2, 0, 0.5], [0, 3, 0.1667]], "domain": {"shape": "disc", "center": [0, 0], "radius": 0.5}}
//! {"kind": "implicit", "terms": [[2, 0, 0, 1], [0, 2, 0, 1], [0, 0, 2, 1], [0, 0, 0, -1]]}
//! {"kind": "catalog", "name": "rotation", "params": {"lambda_rot": 0.2}}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Domain, ImplicitSurface, SurfaceChart};
use crate::poly::{Poly2, Poly3};
use crate::surfaces::{catalog, CatalogEntry, EulerData, Geometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceDoc {
    Graph {
        coeffs: Vec<(u32, u32, f64)>,
        #[serde(default = "plane")]
        domain: Domain,
        #[serde(default)]
        euler: Option<EulerData>,
        #[serde(default)]
        name: Option<String>,
    },
    Implicit {
        terms: Vec<(u32, u32, u32, f64)>,
        #[serde(default)]
        euler: Option<EulerData>,
        #[serde(default)]
        name: Option<String>,
    },
    Catalog {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

fn plane() -> Domain {
    Domain::Plane
}

impl SurfaceDoc {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn build(&self) -> Result<CatalogEntry> {
        match self {
            SurfaceDoc::Catalog { name, params } => catalog(name, params),
            SurfaceDoc::Graph { coeffs, domain, euler, name } => {
                check_finite(coeffs.iter().map(|t| t.2))?;
                let name = name.clone().unwrap_or_else(|| "graph".into());
                let f = Poly2::from_terms(coeffs.iter().copied());
                Ok(CatalogEntry {
                    name: name.clone(),
                    params: BTreeMap::new(),
                    geometry: Geometry::Graph(SurfaceChart::polynomial(name, f, *domain)),
                    euler: *euler,
                    known_points: Vec::new(),
                    profile: None,
                })
            }
            SurfaceDoc::Implicit { terms, euler, name } => {
                check_finite(terms.iter().map(|t| t.3))?;
                if terms.is_empty() {
                    return Err(Error::InvalidParameter("implicit surface has no terms".into()));
                }
                Ok(CatalogEntry {
                    name: name.clone().unwrap_or_else(|| "implicit".into()),
                    params: BTreeMap::new(),
                    geometry: Geometry::Implicit(ImplicitSurface::new(Poly3::from_terms(terms.iter().copied()))),
                    euler: *euler,
                    known_points: Vec::new(),
                    profile: None,
                })
            }
        }
    }
}

fn check_finite(mut it: impl Iterator<Item = f64>) -> Result<()> {
    if it.all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("non-finite coefficient".into()))
    }
}
