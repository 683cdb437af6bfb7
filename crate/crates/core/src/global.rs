//! Global search for quadratic points and the index-sum checks.
//!
//! Compact implicit surfaces are sampled through a cube-sphere atlas of rays
//! from the origin; graph charts are sampled on a grid over their domain.
//! Seeds are discrete local minima of the normalized pair `(n111, n222)`,
//! refined by damped Newton in a tangent-plane graph chart.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubicform::{components_as_jets, cubic_components, normalize_jet, NormalForm};
use crate::error::{Error, Result};
use crate::index::{line_field_index, web_index};
use crate::jets::{graph_jet, jet_eval, norm3, normalize3, Domain, Frame, ImplicitSurface, Jet2, SurfaceChart};
use crate::localmodel::{ratio_serde, LocalModel, Region};
use crate::surfaces::{CatalogEntry, EulerData, Geometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchConfig {
    /// Samples per cube face edge, or per chart-domain edge.
    pub grid: usize,
    pub merge_radius: f64,
    /// Converged when `|(n111, n222)|` falls below this times the median
    /// sample norm.
    pub residual_tol: f64,
    pub step_tol: f64,
    pub hess_tol: f64,
    /// Local minima above this fraction of the median norm are not seeds.
    pub seed_fraction: f64,
    pub max_newton: usize,
    /// All samples below this absolute norm: the cubic form vanishes
    /// identically.
    pub totally_quadratic_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 48,
            merge_radius: 1e-3,
            residual_tol: 1e-10,
            step_tol: 1e-12,
            hess_tol: 1e-6,
            seed_fraction: 0.25,
            max_newton: 200,
            totally_quadratic_tol: 1e-9,
        }
    }
}

impl SearchConfig {
    pub fn with_grid(grid: usize) -> Self {
        Self { grid, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadraticPointReport {
    pub chart: String,
    /// Tangent frame at the point (implicit surfaces).
    pub frame: Option<Frame>,
    /// Location in chart coordinates.
    pub planar: [f64; 2],
    pub location: [f64; 3],
    pub region: Region,
    /// First-order model in normalized coordinates, up to a positive factor.
    pub model: LocalModel,
    pub simple: bool,
    /// Index from the rotation of the web or line field on a small loop.
    #[serde(with = "ratio_serde")]
    pub index: Ratio<i64>,
    /// Index predicted by the local model (simple points only).
    #[serde(with = "ratio_serde::option")]
    pub analytic_index: Option<Ratio<i64>>,
    pub loop_radius: f64,
    pub residual: f64,
    pub hess: f64,
    pub newton_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub location: [f64; 3],
    pub value: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchResult {
    pub points: Vec<QuadraticPointReport>,
    pub unconverged: Vec<Candidate>,
    pub near_parabolic: Vec<Candidate>,
    pub totally_quadratic: bool,
    pub samples: usize,
    pub seeds: usize,
    pub median_norm: f64,
    pub warnings: Vec<String>,
}

/// Value of the normalized pair and its Jacobian in the jet's own
/// coordinates.
#[derive(Clone, Copy, Debug)]
pub struct PairEval {
    pub form: NormalForm,
    pub f: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub hess: f64,
    /// First-order model coefficients `(a, b, c, d)` in normalized
    /// coordinates.
    pub abcd: [f64; 4],
}

/// `(n111, n222)` after normalization, with derivatives. Needs a 4-jet.
pub fn pair_eval(j: &Jet2) -> Option<PairEval> {
    let (nz, h) = normalize_jet(j)?;
    let c = components_as_jets(&h);
    let f = [c[0].coeff(0, 0), c[3].coeff(0, 0)];
    let gx = [[c[0].coeff(1, 0), c[0].coeff(0, 1)], [c[3].coeff(1, 0), c[3].coeff(0, 1)]];
    // u = L X, so d/du = d/dX · L⁻¹.
    let l = nz.l;
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    let inv = [[l[1][1] / det, -l[0][1] / det], [-l[1][0] / det, l[0][0] / det]];
    let mut jac = [[0.0; 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            jac[r][k] = gx[r][0] * inv[0][k] + gx[r][1] * inv[1][k];
        }
    }
    let (fxx, fxy, fyy) = (j.partial(2, 0), j.partial(1, 1), j.partial(0, 2));
    let abcd = match nz.form {
        NormalForm::Elliptic => [4.0 * gx[0][0], 4.0 * gx[0][1], 4.0 * gx[1][0], 4.0 * gx[1][1]],
        NormalForm::Hyperbolic => [-gx[0][0], -gx[0][1], -gx[1][0], -gx[1][1]],
    };
    Some(PairEval { form: nz.form, f, jac, hess: fxx * fyy - fxy * fxy, abcd })
}

/// Norm of the normalized pair from a 3-jet (cheap sampling).
fn pair_norm(j: &Jet2) -> Option<(f64, f64)> {
    let (_, h) = normalize_jet(&j.truncate(3))?;
    let c = cubic_components(&h);
    let (fxx, fxy, fyy) = (j.partial(2, 0), j.partial(1, 1), j.partial(0, 2));
    Some((c.n111.hypot(c.n222), fxx * fyy - fxy * fxy))
}

/// Local parametrization used for refinement and loop indices.
trait LocalGraph: Sync {
    fn jet(&self, uv: [f64; 2], order: usize) -> Result<Jet2>;
    fn lift(&self, uv: [f64; 2], j: &Jet2) -> [f64; 3];
    fn radius(&self) -> f64;
    fn name(&self) -> String;
    fn frame(&self) -> Option<Frame>;
}

struct ImplicitLocal<'a> {
    surf: &'a ImplicitSurface,
    frame: Frame,
    radius: f64,
}

impl LocalGraph for ImplicitLocal<'_> {
    fn jet(&self, uv: [f64; 2], order: usize) -> Result<Jet2> {
        graph_jet(self.surf, &self.frame, uv, order)
    }
    fn lift(&self, uv: [f64; 2], j: &Jet2) -> [f64; 3] {
        self.frame.point(uv[0], uv[1], j.coeff(0, 0))
    }
    fn radius(&self) -> f64 {
        self.radius
    }
    fn name(&self) -> String {
        "atlas".into()
    }
    fn frame(&self) -> Option<Frame> {
        Some(self.frame)
    }
}

struct ChartLocal<'a> {
    chart: &'a SurfaceChart,
}

impl LocalGraph for ChartLocal<'_> {
    fn jet(&self, uv: [f64; 2], order: usize) -> Result<Jet2> {
        jet_eval(self.chart, uv, order.max(4))
    }
    fn lift(&self, uv: [f64; 2], j: &Jet2) -> [f64; 3] {
        [uv[0], uv[1], j.coeff(0, 0)]
    }
    fn radius(&self) -> f64 {
        f64::INFINITY
    }
    fn name(&self) -> String {
        self.chart.name.clone()
    }
    fn frame(&self) -> Option<Frame> {
        None
    }
}

enum NewtonOutcome {
    Converged { uv: [f64; 2], steps: usize, residual: f64 },
    Failed { uv: [f64; 2], value: f64, why: String },
}

fn newton(g: &dyn LocalGraph, start: [f64; 2], scale: f64, cfg: &SearchConfig) -> NewtonOutcome {
    let eval = |uv: [f64; 2]| g.jet(uv, 4).ok().and_then(|j| pair_eval(&j));
    let mut uv = start;
    let Some(mut cur) = eval(uv) else {
        return NewtonOutcome::Failed { uv, value: f64::NAN, why: "jet unavailable at seed".into() };
    };
    let norm = |p: &PairEval| p.f[0].hypot(p.f[1]);
    // Iterate past the tolerance until the residual stops decreasing, so
    // that zeros of higher order are still located accurately.
    let finish = |uv: [f64; 2], steps: usize, cur: &PairEval, why: &str| {
        let r = norm(cur) / scale;
        if r < cfg.residual_tol {
            NewtonOutcome::Converged { uv, steps, residual: r }
        } else {
            NewtonOutcome::Failed { uv, value: r, why: why.into() }
        }
    };
    for steps in 0..cfg.max_newton {
        if norm(&cur) == 0.0 {
            return finish(uv, steps, &cur, "");
        }
        let [[a, b], [c, d]] = cur.jac;
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return finish(uv, steps, &cur, "singular Jacobian");
        }
        let step = [-(d * cur.f[0] - b * cur.f[1]) / det, -(-c * cur.f[0] + a * cur.f[1]) / det];
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = [uv[0] + t * step[0], uv[1] + t * step[1]];
            if cand[0].hypot(cand[1]) <= g.radius() {
                if let Some(p) = eval(cand) {
                    if norm(&p) < norm(&cur) {
                        accepted = Some((cand, p));
                        break;
                    }
                }
            }
            t *= 0.5;
            if norm(&cur) / scale < cfg.residual_tol && t < 1e-3 {
                break;
            }
        }
        let Some((next, p)) = accepted else {
            return finish(uv, steps, &cur, "stagnated");
        };
        let moved = (next[0] - uv[0]).hypot(next[1] - uv[1]);
        uv = next;
        cur = p;
        if moved < cfg.step_tol {
            return finish(uv, steps + 1, &cur, "step below tolerance with nonzero residual");
        }
    }
    finish(uv, cfg.max_newton, &cur, "iteration limit")
}

/// Index of the web (elliptic) or line field (hyperbolic) on a circle of
/// radius `rho` around `center`, with halving retries.
fn loop_index(g: &dyn LocalGraph, center: [f64; 2], region: Region, mut rho: f64) -> Result<(Ratio<i64>, f64)> {
    let mut last = None;
    for _ in 0..5 {
        let omega = |x: f64, y: f64| {
            g.jet([center[0] + rho * x, center[1] + rho * y], 4)
                .map(|j| cubic_components(&j).binary_cubic())
                .unwrap_or([0.0; 4])
        };
        let r = match region {
            Region::Elliptic => web_index(omega),
            Region::Hyperbolic => line_field_index(omega),
        };
        match r {
            Ok(i) => return Ok((i, rho)),
            Err(e) => last = Some(e),
        }
        rho *= 0.5;
    }
    Err(last.unwrap())
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Unit directions of an equiangular cube-sphere grid with `n × n` cells per
/// face.
pub fn cube_sphere(n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(6 * n * n);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            for i in 0..n {
                for j in 0..n {
                    let a = (std::f64::consts::FRAC_PI_4 * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0)).tan();
                    let b = (std::f64::consts::FRAC_PI_4 * (2.0 * (j as f64 + 0.5) / n as f64 - 1.0)).tan();
                    let mut p = [0.0; 3];
                    p[axis] = sign;
                    p[(axis + 1) % 3] = a;
                    p[(axis + 2) % 3] = b;
                    out.push(normalize3(p));
                }
            }
        }
    }
    out
}

/// First crossing of the zero set along the ray `s·dir`, projected onto the
/// surface. The origin must be inside (`F(0) < 0`).
pub fn ray_cast(surf: &ImplicitSurface, dir: [f64; 3], max_radius: f64) -> Result<[f64; 3]> {
    let f = |s: f64| surf.f.eval([s * dir[0], s * dir[1], s * dir[2]]);
    if f(0.0) >= 0.0 {
        return Err(Error::Unsupported("atlas search needs the origin strictly inside the surface".into()));
    }
    let ds = max_radius / 400.0;
    let mut lo = 0.0;
    let mut hi = None;
    let mut s = ds;
    while s <= max_radius {
        if f(s) > 0.0 {
            hi = Some(s);
            break;
        }
        lo = s;
        s += ds;
    }
    let mut hi = hi.ok_or_else(|| Error::Unsupported(format!("ray {dir:?} does not meet the surface")))?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    surf.project([s * dir[0], s * dir[1], s * dir[2]])
}

struct Sample {
    key: [f64; 3],
    q: [f64; 3],
    uv: [f64; 2],
    value: f64,
}

/// Indices of samples that are no larger than any sample within `radius`
/// of their key.
fn local_minima(samples: &[Sample], radius: f64) -> Vec<usize> {
    let cell = radius;
    let key = |p: [f64; 3]| {
        [(p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64, (p[2] / cell).floor() as i64]
    };
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        buckets.entry(key(s.key)).or_default().push(i);
    }
    (0..samples.len())
        .into_par_iter()
        .filter(|&i| {
            let s = &samples[i];
            if !s.value.is_finite() {
                return false;
            }
            let k = key(s.key);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(v) = buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            for &j in v {
                                if j == i {
                                    continue;
                                }
                                let o = &samples[j];
                                let d = [o.key[0] - s.key[0], o.key[1] - s.key[1], o.key[2] - s.key[2]];
                                if norm3(d) <= radius
                                    && (o.value < s.value || (o.value == s.value && j < i))
                                {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
            true
        })
        .collect()
}

/// Bounding radius for ray casting.
const MAX_RAY: f64 = 10.0;

pub fn find_quadratic_points(entry: &CatalogEntry, cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.grid < 32 {
        return Err(Error::InvalidParameter(format!("grid density {} is below 32", cfg.grid)));
    }
    match &entry.geometry {
        Geometry::Implicit(surf) => search_implicit(surf, cfg),
        Geometry::Graph(chart) => search_chart(chart, cfg),
    }
}

fn search_implicit(surf: &ImplicitSurface, cfg: &SearchConfig) -> Result<SearchResult> {
    let dirs = cube_sphere(cfg.grid);
    let samples: Vec<Sample> = dirs
        .par_iter()
        .map(|&d| -> Result<Sample> {
            let q = ray_cast(surf, d, MAX_RAY)?;
            let frame = Frame::from_normal(q, surf.f.gradient(q), None);
            let j = graph_jet(surf, &frame, [0.0, 0.0], 3)?;
            let value = pair_norm(&j).map_or(f64::NAN, |v| v.0);
            Ok(Sample { key: d, q, uv: [0.0, 0.0], value })
        })
        .collect::<Result<_>>()?;
    let spacing = std::f64::consts::FRAC_PI_2 / cfg.grid as f64;
    let at = |q: [f64; 3]| -> Box<dyn LocalGraph + '_> {
        let frame = Frame::from_normal(q, surf.f.gradient(q), None);
        Box::new(ImplicitLocal { surf, frame, radius: 0.5 })
    };
    refine(&samples, 1.6 * spacing, cfg, |s: &Sample| at(s.q), at)
}

fn search_chart(chart: &SurfaceChart, cfg: &SearchConfig) -> Result<SearchResult> {
    let (min, max) = match chart.domain {
        Domain::Rect { min, max } => (min, max),
        Domain::Disc { center, radius } => {
            ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
        }
        Domain::Plane => {
            return Err(Error::Unsupported("global search needs a bounded chart domain".into()));
        }
    };
    let n = cfg.grid;
    let h = [(max[0] - min[0]) / n as f64, (max[1] - min[1]) / n as f64];
    let pts: Vec<[f64; 2]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| [min[0] + (i as f64 + 0.5) * h[0], min[1] + (j as f64 + 0.5) * h[1]])
        .filter(|&p| chart.domain.contains(p))
        .collect();
    let samples: Vec<Sample> = pts
        .par_iter()
        .map(|&uv| -> Result<Sample> {
            let j = jet_eval(chart, uv, 4)?;
            let value = pair_norm(&j).map_or(f64::NAN, |v| v.0);
            Ok(Sample { key: [uv[0], uv[1], 0.0], q: [uv[0], uv[1], j.coeff(0, 0)], uv, value })
        })
        .collect::<Result<_>>()?;
    refine(&samples, 1.5 * h[0].max(h[1]), cfg, |_| Box::new(ChartLocal { chart }), |_| {
        Box::new(ChartLocal { chart })
    })
}

fn refine<'a, S, P>(
    samples: &[Sample],
    neighbor_radius: f64,
    cfg: &SearchConfig,
    seed_graph: S,
    point_graph: P,
) -> Result<SearchResult>
where
    S: Fn(&Sample) -> Box<dyn LocalGraph + 'a> + Sync,
    P: Fn([f64; 3]) -> Box<dyn LocalGraph + 'a> + Sync,
{
    let mut warnings = Vec::new();
    let mut vals: Vec<f64> = samples.iter().map(|s| s.value).filter(|v| v.is_finite()).collect();
    let max_norm = vals.iter().cloned().fold(0.0_f64, f64::max);
    let med = median(&mut vals);
    if max_norm < cfg.totally_quadratic_tol {
        return Ok(SearchResult {
            points: Vec::new(),
            unconverged: Vec::new(),
            near_parabolic: Vec::new(),
            totally_quadratic: true,
            samples: samples.len(),
            seeds: 0,
            median_norm: med,
            warnings: vec!["cubic form vanishes at every sample: the surface is totally quadratic".into()],
        });
    }
    let nan = samples.len() - vals.len();
    if nan > 0 {
        warnings.push(format!("{nan} samples on the parabolic set were skipped"));
    }
    let seeds: Vec<usize> = local_minima(samples, neighbor_radius)
        .into_iter()
        .filter(|&i| samples[i].value < cfg.seed_fraction * med)
        .collect();

    let outcomes: Vec<(usize, NewtonOutcome)> = seeds
        .par_iter()
        .map(|&i| {
            let g = seed_graph(&samples[i]);
            (i, newton(g.as_ref(), samples[i].uv, med, cfg))
        })
        .collect();

    // Merge converged points; each keeps the graph it converged in.
    let mut found: Vec<([f64; 3], usize, f64)> = Vec::new();
    let mut unconverged = Vec::new();
    for (i, o) in outcomes {
        match o {
            NewtonOutcome::Converged { uv, steps, residual } => {
                let g = seed_graph(&samples[i]);
                let j = g.jet(uv, 4)?;
                let q = g.lift(uv, &j);
                if let Some(k) = found.iter().position(|(p, _, _)| dist(*p, q) < cfg.merge_radius) {
                    if residual < found[k].2 {
                        found[k] = (q, steps, residual);
                    }
                } else {
                    found.push((q, steps, residual));
                }
            }
            NewtonOutcome::Failed { uv, value, why } => {
                // Only seeds that were already near zero count as lost points.
                if samples[i].value < 1e-3 * med {
                    let g = seed_graph(&samples[i]);
                    let q = g.jet(uv, 4).map(|j| g.lift(uv, &j)).unwrap_or(samples[i].q);
                    unconverged.push(Candidate { location: q, value, reason: why });
                }
            }
        }
    }

    let analysed: Vec<Result<std::result::Result<QuadraticPointReport, Candidate>>> = found
        .par_iter()
        .enumerate()
        .map(|(k, &(q, steps, residual))| {
            let nearest = found
                .iter()
                .enumerate()
                .filter(|(m, _)| *m != k)
                .map(|(_, (p, _, _))| dist(*p, q))
                .fold(f64::INFINITY, f64::min);
            analyse_point(point_graph(q).as_ref(), q, steps, residual, nearest, med, cfg)
        })
        .collect();
    let mut points = Vec::new();
    let mut near_parabolic = Vec::new();
    for a in analysed {
        match a? {
            Ok(p) => points.push(p),
            Err(c) => near_parabolic.push(c),
        }
    }
    for p in &points {
        if let Some(ai) = p.analytic_index {
            if ai != p.index {
                warnings.push(format!(
                    "at {:?} the loop index {} differs from the model index {}",
                    p.location, p.index, ai
                ));
            }
        }
    }
    points.sort_by(|a, b| lex(a.location, b.location));
    unconverged.sort_by(|a, b| lex(a.location, b.location));
    near_parabolic.sort_by(|a, b| lex(a.location, b.location));
    Ok(SearchResult {
        points,
        unconverged,
        near_parabolic,
        totally_quadratic: false,
        samples: samples.len(),
        seeds: seeds.len(),
        median_norm: med,
        warnings,
    })
}

fn lex(a: [f64; 3], b: [f64; 3]) -> std::cmp::Ordering {
    let r = |x: f64| (x * 1e9).round() as i64;
    (r(a[0]), r(a[1]), r(a[2])).cmp(&(r(b[0]), r(b[1]), r(b[2])))
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm3([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

fn analyse_point(
    g: &dyn LocalGraph,
    q: [f64; 3],
    steps: usize,
    residual: f64,
    nearest: f64,
    med: f64,
    cfg: &SearchConfig,
) -> Result<std::result::Result<QuadraticPointReport, Candidate>> {
    // For atlas graphs the frame is centred at q; for charts the centre is (x, y).
    let center = if g.frame().is_some() { [0.0, 0.0] } else { [q[0], q[1]] };
    let j = g.jet(center, 4)?;
    let pe = pair_eval(&j).ok_or_else(|| Error::Numerical(format!("no normal form at {q:?}")))?;
    if pe.hess.abs() < cfg.hess_tol {
        return Ok(Err(Candidate { location: q, value: pe.hess, reason: "near the parabolic curve".into() }));
    }
    let region = if pe.hess > 0.0 { Region::Elliptic } else { Region::Hyperbolic };
    let model = LocalModel::new(region, pe.abcd);
    let m_scale = match region {
        Region::Elliptic => 4.0 * med,
        Region::Hyperbolic => med,
    };
    let mx = pe.abcd.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let simple = mx > 1e-3 * m_scale && model.delta().abs() > 1e-6 * m_scale * m_scale && model.is_simple();
    let rho0 = (0.3 * nearest).min(0.05);
    let (index, loop_radius) = loop_index(g, center, region, rho0)?;
    let analytic_index = if simple { model.predicted_index() } else { None };
    Ok(Ok(QuadraticPointReport {
        chart: g.name(),
        frame: g.frame(),
        planar: center,
        location: q,
        region,
        model,
        simple,
        index,
        analytic_index,
        loop_radius,
        residual,
        hess: pe.hess,
        newton_steps: steps,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GlobalStatus {
    Pass,
    Fail,
    Inconclusive,
    TotallyQuadratic,
    /// No Euler characteristic declared for the surface.
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GlobalReport {
    pub surface: String,
    pub params: std::collections::BTreeMap<String, f64>,
    pub config: SearchConfig,
    pub points: Vec<QuadraticPointReport>,
    #[serde(with = "ratio_serde")]
    pub sum_e: Ratio<i64>,
    #[serde(with = "ratio_serde")]
    pub sum_h: Ratio<i64>,
    pub euler: Option<EulerData>,
    #[serde(with = "ratio_serde::option")]
    pub residual_e: Option<Ratio<i64>>,
    #[serde(with = "ratio_serde::option")]
    pub residual_h: Option<Ratio<i64>>,
    #[serde(with = "ratio_serde::option")]
    pub residual_m: Option<Ratio<i64>>,
    /// Odd count of hyperbolic points when χ(H) is odd and all indices are ±1.
    pub parity_check: Option<bool>,
    /// At least six elliptic points when all indices are ±1/3 and the sum is 2.
    pub count_bound_check: Option<bool>,
    pub status: GlobalStatus,
    pub unconverged: Vec<Candidate>,
    pub near_parabolic: Vec<Candidate>,
    pub samples: usize,
    pub seeds: usize,
    pub warnings: Vec<String>,
}

pub fn poincare_hopf_check(entry: &CatalogEntry, cfg: &SearchConfig) -> Result<GlobalReport> {
    let res = find_quadratic_points(entry, cfg)?;
    let zero = Ratio::from_integer(0);
    let sum_e = res.points.iter().filter(|p| p.region == Region::Elliptic).fold(zero, |a, p| a + p.index);
    let sum_h = res.points.iter().filter(|p| p.region == Region::Hyperbolic).fold(zero, |a, p| a + p.index);
    let euler = entry.euler;
    let residual_e = euler.map(|e| sum_e - Ratio::from_integer(e.chi_e));
    let residual_h = euler.map(|e| sum_h - Ratio::from_integer(e.chi_h));
    let residual_m = euler.map(|e| sum_e + sum_h - Ratio::from_integer(e.chi_m));

    let hyp: Vec<_> = res.points.iter().filter(|p| p.region == Region::Hyperbolic).collect();
    let ell: Vec<_> = res.points.iter().filter(|p| p.region == Region::Elliptic).collect();
    let one = Ratio::from_integer(1);
    let third = Ratio::new(1, 3);
    let parity_check = match euler {
        Some(e) if e.chi_h % 2 != 0 && hyp.iter().all(|p| p.index == one || p.index == -one) => {
            Some(hyp.len() % 2 == 1)
        }
        _ => None,
    };
    let count_bound_check = if !ell.is_empty()
        && ell.iter().all(|p| p.index == third || p.index == -third)
        && sum_e == Ratio::from_integer(2)
    {
        Some(ell.len() >= 6)
    } else {
        None
    };
    let status = if res.totally_quadratic {
        GlobalStatus::TotallyQuadratic
    } else if !res.unconverged.is_empty() {
        GlobalStatus::Inconclusive
    } else if euler.is_none() {
        GlobalStatus::Unchecked
    } else if residual_e == Some(zero)
        && residual_h == Some(zero)
        && residual_m == Some(zero)
        && parity_check != Some(false)
        && count_bound_check != Some(false)
    {
        GlobalStatus::Pass
    } else {
        GlobalStatus::Fail
    };
    Ok(GlobalReport {
        surface: entry.name.clone(),
        params: entry.params.clone(),
        config: cfg.clone(),
        points: res.points,
        sum_e,
        sum_h,
        euler,
        residual_e,
        residual_h,
        residual_m,
        parity_check,
        count_bound_check,
        status,
        unconverged: res.unconverged,
        near_parabolic: res.near_parabolic,
        samples: res.samples,
        seeds: res.seeds,
        warnings: res.warnings,
    })
}

/// Whether two point sets agree within `tol`, point by point.
pub fn same_point_set(a: &[QuadraticPointReport], b: &[QuadraticPointReport], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| dist(p.location, q.location) < tol && p.index == q.index))
}

/// Human-readable table of a report.
pub fn summary_table(r: &GlobalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "surface: {} {:?}", r.surface, r.params);
    let _ = writeln!(s, "{:>4}  {:>10}  {:>10}  {:>10}  {:<10}  {:>6}  {:>9}", "#", "x", "y", "z", "region", "index", "residual");
    for (k, p) in r.points.iter().enumerate() {
        let region = match p.region {
            Region::Elliptic => "elliptic",
            Region::Hyperbolic => "hyperbolic",
        };
        let _ = writeln!(
            s,
            "{:>4}  {:>10.6}  {:>10.6}  {:>10.6}  {:<10}  {:>6}  {:>9.2e}",
            k + 1,
            p.location[0],
            p.location[1],
            p.location[2],
            region,
            ratio_serde::to_string(&p.index),
            p.residual
        );
    }
    let _ = writeln!(s, "sum over E: {}   sum over H: {}", r.sum_e, r.sum_h);
    if let Some(e) = r.euler {
        let _ = writeln!(s, "chi(E) = {}   chi(H) = {}   chi(M) = {}", e.chi_e, e.chi_h, e.chi_m);
    }
    let status = match r.status {
        GlobalStatus::Pass => "PASS",
        GlobalStatus::Fail => "FAIL",
        GlobalStatus::Inconclusive => "INCONCLUSIVE",
        GlobalStatus::TotallyQuadratic => "TOTALLY QUADRATIC",
        GlobalStatus::Unchecked => "UNCHECKED (no Euler characteristic declared)",
    };
    let _ = writeln!(s, "status: {status}");
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
