//! Polar blow-up of the first-order cubic form: singular points on the
//! exceptional circle, their saddle/node type, and integrated leaves.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubicform::binary_cubic_roots;
use crate::error::{Error, Result};
use crate::localmodel::{CharPoly, HyperbolicModel, LocalModel, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityKind {
    Saddle,
    Node,
    NonHyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlowupSingularity {
    pub t0: f64,
    /// Web branch `j ∈ {1, 2, 3}` with `φ_j = θ + (j-2)π/3`; always 1 for line fields.
    pub branch: u8,
    pub kind: SingularityKind,
    pub dp: f64,
    pub q: f64,
}

/// Unwrapped angle function whose blow-up singularities are the zeros of
/// `cos(φ(t) + t)`.
///
/// Elliptic: `3θ = arg(A₁ + iB₁)`, `φ₂ = θ`. Hyperbolic: `tan³φ = -B₁/A₁`,
/// defined modulo π.
pub fn phi(model: &LocalModel, t: f64) -> f64 {
    let [a1, b1] = linear_part(model, t.cos(), t.sin());
    match model {
        LocalModel::Elliptic(_) => b1.atan2(a1) / 3.0,
        LocalModel::Hyperbolic(_) => (-b1).cbrt().atan2(a1.cbrt()),
    }
}

fn linear_part(model: &LocalModel, x: f64, y: f64) -> [f64; 2] {
    match model {
        LocalModel::Elliptic(m) => m.linear_part(x, y),
        LocalModel::Hyperbolic(m) => m.linear_part(x, y),
    }
}

/// Period of the ambiguity of [`phi`]: `2π/3` (elliptic) or `π` (hyperbolic).
fn phi_period(model: &LocalModel) -> f64 {
    match model {
        LocalModel::Elliptic(_) => TAU / 3.0,
        LocalModel::Hyperbolic(_) => PI,
    }
}

/// `φ'(t)` by a five-point central difference, unwrapping across the branch
/// cut. Near a zero of `A₁` or `B₁` the hyperbolic `φ` behaves like a cube
/// root, so the step shrinks with `min(|A₁|, |B₁|)`.
pub fn phi_prime(model: &LocalModel, t: f64) -> f64 {
    let [a1, b1] = linear_part(model, t.cos(), t.sin());
    let lip: f64 = model.abcd().iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let local = match model {
        LocalModel::Elliptic(_) => a1.hypot(b1),
        LocalModel::Hyperbolic(_) => a1.abs().min(b1.abs()),
    } / lip;
    let h = (1e-2 * local).clamp(1e-7, 1e-4);
    let per = phi_period(model);
    let p0 = phi(model, t);
    let dphi = |s: f64| {
        let d = phi(model, t + s) - p0;
        (d + per / 2.0).rem_euclid(per) - per / 2.0
    };
    (8.0 * (dphi(h) - dphi(-h)) - (dphi(2.0 * h) - dphi(-2.0 * h))) / (12.0 * h)
}

fn kind_from(dp: f64, q: f64, simple: bool) -> SingularityKind {
    if !simple {
        SingularityKind::NonHyperbolic
    } else if dp * q < 0.0 {
        SingularityKind::Saddle
    } else {
        SingularityKind::Node
    }
}

/// Blow-up singularities on `[0, 2π)`: both lifts `t₀`, `t₀ + π` of every
/// projective root of `P`, typed by the sign of `P'(t₀) Q(t₀)`.
pub fn blowup_singularities(model: &LocalModel) -> Result<Vec<BlowupSingularity>> {
    if !model.is_simple() {
        return Err(Error::NonSimple { delta: model.delta() });
    }
    let cp = model.char_poly();
    let roots = cp.roots()?;
    let mut out = Vec::new();
    for r in &roots.roots {
        for lift in [r.t, r.t + PI] {
            let dp = cp.dp_at(lift);
            let q = cp.q_at(lift);
            let branch = match model {
                LocalModel::Elliptic(_) => web_branch(model, lift),
                LocalModel::Hyperbolic(_) => 1,
            };
            out.push(BlowupSingularity { t0: lift, branch, kind: kind_from(dp, q, r.multiplicity == 1), dp, q });
        }
    }
    out.sort_by(|a, b| a.t0.partial_cmp(&b.t0).unwrap());
    Ok(out)
}

/// Branch `j` with `φ_j(t₀) + t₀ ≡ π/2 (mod π)`.
fn web_branch(model: &LocalModel, t0: f64) -> u8 {
    let th = phi(model, t0);
    (1..=3u8)
        .min_by(|&i, &j| {
            let g = |k: u8| {
                let v = th + (k as f64 - 2.0) * PI / 3.0 + t0 - PI / 2.0;
                ((v + PI / 2.0).rem_euclid(PI) - PI / 2.0).abs()
            };
            g(i).partial_cmp(&g(j)).unwrap()
        })
        .unwrap()
}

/// Relative residual of `P'(t₀) = -3Q(t₀)(1 + φ'(t₀))`.
pub fn blowup_identity_residual(model: &LocalModel, s: &BlowupSingularity) -> f64 {
    let lhs = s.dp;
    let rhs = -3.0 * s.q * (1.0 + phi_prime(model, s.t0));
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Sign of `Q(t₀)` at a root of `P` via `Q = -sin²t (c + d tan t)`, checked
/// against direct evaluation.
pub fn sign_of_q_at_root(m: &HyperbolicModel, t0: f64) -> Result<i32> {
    let cp = m.char_poly();
    let direct = cp.q_at(t0);
    let (s, c) = t0.sin_cos();
    if s.abs() < 1e-12 || c.abs() < 1e-12 {
        return Ok(sign(direct));
    }
    let closed = -s * s * (m.c + m.d * s / c);
    let sc = sign(closed);
    let scale = m.abcd().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if direct.abs() > 1e-9 * scale && sc != sign(direct) {
        return Err(Error::Numerical(format!(
            "closed-form sign of Q ({closed}) disagrees with direct evaluation ({direct}) at t = {t0}"
        )));
    }
    Ok(sc)
}

fn sign(x: f64) -> i32 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Singularities met by one continuously tracked branch, in order, over
/// `[0, 2π)` (line field) or `[0, 6π)` (web), found as zeros of
/// `cos(φ(t) + t)` independently of the roots of `P`.
pub fn branch_cycle(model: &LocalModel) -> Result<Vec<BlowupSingularity>> {
    let cp = model.char_poly();
    let turns = match model {
        LocalModel::Elliptic(_) => 3,
        LocalModel::Hyperbolic(_) => 1,
    };
    let per = phi_period(model);
    let n = 7200 * turns;
    let t_end = TAU * turns as f64;
    let mut unwrapped = Vec::with_capacity(n + 1);
    let mut prev = phi(model, 0.0);
    unwrapped.push(prev);
    for k in 1..=n {
        let t = t_end * k as f64 / n as f64;
        let raw = phi(model, t);
        let last = *unwrapped.last().unwrap();
        let d = ((raw - prev) + per / 2.0).rem_euclid(per) - per / 2.0;
        unwrapped.push(last + d);
        prev = raw;
    }
    let g = |k: usize| (unwrapped[k] + t_end * k as f64 / n as f64).cos();
    let mut out = Vec::new();
    for k in 0..n {
        let (ga, gb) = (g(k), g(k + 1));
        if ga == 0.0 || ga.signum() != gb.signum() {
            // Bisect on the linear interpolation of the unwrapped phase.
            let (ta, tb) = (t_end * k as f64 / n as f64, t_end * (k + 1) as f64 / n as f64);
            let (pa, pb) = (unwrapped[k], unwrapped[k + 1]);
            let mut lo = 0.0;
            let mut hi = 1.0;
            let h = |s: f64| (pa + s * (pb - pa) + ta + s * (tb - ta)).cos();
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if h(mid).signum() == ga.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = ta + 0.5 * (lo + hi) * (tb - ta);
            let t0 = t.rem_euclid(TAU);
            let (dp, q) = (cp.dp_at(t0), cp.q_at(t0));
            let simple = dp.abs() > 1e-9 * model.abcd().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let branch = match model {
                LocalModel::Elliptic(_) => web_branch(model, t0),
                LocalModel::Hyperbolic(_) => 1,
            };
            out.push(BlowupSingularity { t0, branch, kind: kind_from(dp, q, simple), dp, q });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Leaf {
    pub id: usize,
    pub branch: u8,
    pub separatrix: bool,
    pub points: Vec<[f64; 2]>,
    /// Why integration stopped.
    pub stop: LeafStop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafStop {
    LeftBox,
    ReachedOrigin,
    Budget,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhasePortrait {
    pub region: Region,
    pub abcd: [f64; 4],
    pub singularities: Vec<BlowupSingularity>,
    /// Singularities in the order met by the tracked branch.
    pub cycle: Vec<BlowupSingularity>,
    pub leaves: Vec<Leaf>,
    /// `[xmin, ymin, xmax, ymax]`
    pub bbox: [f64; 4],
    pub density: usize,
}

impl PhasePortrait {
    pub fn separatrices(&self) -> impl Iterator<Item = &Leaf> {
        self.leaves.iter().filter(|l| l.separatrix)
    }

    pub fn count(&self, kind: SingularityKind) -> usize {
        self.singularities.iter().filter(|s| s.kind == kind).count()
    }
}

/// Leaf termination radius.
pub const ORIGIN_RADIUS: f64 = 1e-6;
/// Offset of separatrix seeds from the origin.
pub const SEPARATRIX_OFFSET: f64 = 1e-4;
pub const STEP_BUDGET: usize = 100_000;

struct Integrator<'a> {
    model: &'a LocalModel,
    bbox: [f64; 4],
    h0: f64,
}

impl Integrator<'_> {
    /// Unit direction of the root nearest to `reference` (mod π), oriented
    /// to agree with it.
    fn dir(&self, p: [f64; 2], reference: [f64; 2]) -> Option<[f64; 2]> {
        let ds = binary_cubic_roots(self.model.omega1(p[0], p[1]));
        let rang = reference[1].atan2(reference[0]);
        let best = ds.angles.iter().copied().min_by(|&a, &b| {
            let ga = ((a - rang + PI / 2.0).rem_euclid(PI) - PI / 2.0).abs();
            let gb = ((b - rang + PI / 2.0).rem_euclid(PI) - PI / 2.0).abs();
            ga.partial_cmp(&gb).unwrap()
        })?;
        let v = [best.cos(), best.sin()];
        Some(if v[0] * reference[0] + v[1] * reference[1] < 0.0 { [-v[0], -v[1]] } else { v })
    }

    fn inside(&self, p: [f64; 2]) -> bool {
        p[0] >= self.bbox[0] && p[0] <= self.bbox[2] && p[1] >= self.bbox[1] && p[1] <= self.bbox[3]
    }

    /// RK4 along the direction field from `p` with initial heading `v`.
    fn half_leaf(&self, mut p: [f64; 2], mut v: [f64; 2]) -> (Vec<[f64; 2]>, LeafStop) {
        let mut pts = vec![p];
        let mut h = self.h0;
        let mut steps = 0;
        loop {
            if !self.inside(p) {
                return (pts, LeafStop::LeftBox);
            }
            let r = p[0].hypot(p[1]);
            if r < ORIGIN_RADIUS {
                return (pts, LeafStop::ReachedOrigin);
            }
            if steps >= STEP_BUDGET {
                return (pts, LeafStop::Budget);
            }
            steps += 1;
            // The field is scale invariant; steps proportional to r resolve
            // the approach to the origin geometrically.
            let hh = h.min(0.05 * r);
            let add = |a: [f64; 2], k: [f64; 2], s: f64| [a[0] + s * k[0], a[1] + s * k[1]];
            let step = (|| {
                let k1 = self.dir(p, v)?;
                let k2 = self.dir(add(p, k1, hh / 2.0), k1)?;
                let k3 = self.dir(add(p, k2, hh / 2.0), k2)?;
                let k4 = self.dir(add(p, k3, hh), k3)?;
                let turn = angle(k1, k4).abs().max(angle(v, k1).abs());
                Some((k1, k2, k3, k4, turn))
            })();
            let Some((k1, k2, k3, k4, turn)) = step else {
                return (pts, LeafStop::Degenerate);
            };
            if turn > PI / 4.0 {
                h = hh * 0.5;
                if h < 1e-14 * self.h0 {
                    return (pts, LeafStop::Degenerate);
                }
                continue;
            }
            let d = [
                (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0,
                (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0,
            ];
            p = add(p, d, hh);
            v = k4;
            pts.push(p);
            h = (h * 1.25).min(self.h0);
        }
    }

    fn leaf(&self, seed: [f64; 2], heading: [f64; 2]) -> (Vec<[f64; 2]>, LeafStop) {
        let (fwd, s1) = self.half_leaf(seed, heading);
        let (mut bwd, s2) = self.half_leaf(seed, [-heading[0], -heading[1]]);
        bwd.reverse();
        bwd.pop();
        bwd.extend(fwd);
        let stop = if s1 == LeafStop::Degenerate || s2 == LeafStop::Degenerate {
            LeafStop::Degenerate
        } else if s1 == LeafStop::Budget || s2 == LeafStop::Budget {
            LeafStop::Budget
        } else {
            s1
        };
        (bwd, stop)
    }
}

fn angle(u: [f64; 2], v: [f64; 2]) -> f64 {
    (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1])
}

/// Full leaf through `seed` with heading `heading` inside `bbox`.
pub fn integrate_leaf(model: &LocalModel, bbox: [f64; 4], seed: [f64; 2], heading: [f64; 2]) -> Vec<[f64; 2]> {
    let it = Integrator { model, bbox, h0: diag(bbox) / 2000.0 };
    it.leaf(seed, heading).0
}

fn diag(b: [f64; 4]) -> f64 {
    (b[2] - b[0]).hypot(b[3] - b[1])
}

/// Phase portrait of the model in `bbox`: `density` seeds on a ring, every
/// root direction at each seed, plus two half-leaves along the radial
/// eigendirection of each saddle.
pub fn integrate_portrait(model: &LocalModel, bbox: [f64; 4], density: usize) -> Result<PhasePortrait> {
    if !(bbox[2] > bbox[0] && bbox[3] > bbox[1]) {
        return Err(Error::InvalidParameter(format!("bounding box {bbox:?} has zero area")));
    }
    let singularities = blowup_singularities(model)?;
    let cycle = branch_cycle(model)?;
    let it = Integrator { model, bbox, h0: diag(bbox) / 2000.0 };
    let center = [0.5 * (bbox[0] + bbox[2]), 0.5 * (bbox[1] + bbox[3])];
    let radius = 0.3 * (bbox[2] - bbox[0]).min(bbox[3] - bbox[1]);

    let mut seeds: Vec<([f64; 2], [f64; 2], u8, bool)> = Vec::new();
    for k in 0..density {
        let a = TAU * (k as f64 + 0.5) / density as f64;
        let p = [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
        let ds = binary_cubic_roots(model.omega1(p[0], p[1]));
        for (j, &ang) in ds.angles.iter().enumerate() {
            seeds.push((p, [ang.cos(), ang.sin()], j as u8 + 1, false));
        }
    }
    for s in singularities.iter().filter(|s| s.kind == SingularityKind::Saddle) {
        let u = [s.t0.cos(), s.t0.sin()];
        let p = [SEPARATRIX_OFFSET * u[0], SEPARATRIX_OFFSET * u[1]];
        seeds.push((p, u, s.branch, true));
        seeds.push((p, [-u[0], -u[1]], s.branch, true));
    }
    let leaves: Vec<Leaf> = seeds
        .par_iter()
        .enumerate()
        .map(|(id, &(p, v, branch, sep))| {
            let (points, stop) = if sep { it.half_leaf(p, v) } else { it.leaf(p, v) };
            Leaf { id, branch, separatrix: sep, points, stop }
        })
        .collect();
    Ok(PhasePortrait {
        region: model.region(),
        abcd: model.abcd(),
        singularities,
        cycle,
        leaves,
        bbox,
        density,
    })
}

/// Index from sector counts along the tracked branch: `1 + (e - h)/2` for a
/// line field, `1 + (e - h)/6` for a web, where `h` (`e`) counts arcs between
/// consecutive singularities that are both saddles (both nodes).
pub fn portrait_index(p: &PhasePortrait) -> Result<Ratio<i64>> {
    if p.cycle.iter().any(|s| s.kind == SingularityKind::NonHyperbolic) {
        return Err(Error::Unsupported("non-hyperbolic blow-up singularities".into()));
    }
    let denom = match p.region {
        Region::Elliptic => 6,
        Region::Hyperbolic => 2,
    };
    let n = p.cycle.len();
    let (mut e, mut h) = (0i64, 0i64);
    for k in 0..n {
        let (a, b) = (p.cycle[k].kind, p.cycle[(k + 1) % n].kind);
        match (a, b) {
            (SingularityKind::Saddle, SingularityKind::Saddle) => h += 1,
            (SingularityKind::Node, SingularityKind::Node) => e += 1,
            _ => {}
        }
    }
    Ok(Ratio::from_integer(1) + Ratio::new(e - h, denom))
}

/// One row per polyline vertex: `leafId,branch,x,y`.
pub fn portrait_csv(p: &PhasePortrait) -> String {
    let mut s = String::from("leafId,branch,x,y\n");
    for l in &p.leaves {
        for q in &l.points {
            let _ = writeln!(s, "{},{},{:.9},{:.9}", l.id, l.branch, q[0], q[1]);
        }
    }
    s
}

/// SVG rendering; blow-up singularities are drawn on a small circle around
/// the origin with `class="saddle"` or `class="node"`.
pub fn portrait_svg(p: &PhasePortrait, size: f64) -> String {
    let [x0, y0, x1, y1] = p.bbox;
    let sx = size / (x1 - x0);
    let sy = size / (y1 - y0);
    let map = |q: [f64; 2]| ((q[0] - x0) * sx, (y1 - q[1]) * sy);
    let colors = ["#1f77b4", "#2ca02c", "#9467bd"];
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for l in &p.leaves {
        if l.points.len() < 2 {
            continue;
        }
        let color = if l.separatrix { "#d62728" } else { colors[(l.branch as usize + 2) % 3] };
        let width = if l.separatrix { 1.6 } else { 0.8 };
        let mut pts = String::new();
        for q in &l.points {
            let (u, v) = map(*q);
            let _ = write!(pts, "{u:.2},{v:.2} ");
        }
        let _ = writeln!(
            s,
            r#"<polyline class="{}" fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
            if l.separatrix { "separatrix" } else { "leaf" },
            pts.trim_end()
        );
    }
    let (cx, cy) = map([0.0, 0.0]);
    let rr = 0.06 * size;
    let _ = writeln!(
        s,
        r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{rr:.2}" fill="none" stroke="#888888" stroke-dasharray="3,3"/>"##
    );
    for sg in &p.singularities {
        let (u, v) = (cx + rr * sg.t0.cos(), cy - rr * sg.t0.sin());
        match sg.kind {
            SingularityKind::Saddle => {
                let _ = writeln!(
                    s,
                    r##"<rect class="saddle" x="{:.2}" y="{:.2}" width="7" height="7" fill="#d62728"/>"##,
                    u - 3.5,
                    v - 3.5
                );
            }
            SingularityKind::Node => {
                let _ = writeln!(s, r##"<circle class="node" cx="{u:.2}" cy="{v:.2}" r="4" fill="#1f77b4"/>"##);
            }
            SingularityKind::NonHyperbolic => {
                let _ = writeln!(
                    s,
                    r##"<circle class="nonhyperbolic" cx="{u:.2}" cy="{v:.2}" r="4" fill="none" stroke="#000000"/>"##
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Characteristic polynomial evaluated on the blow-up circle, for plotting.
pub fn sample_char_poly(cp: &CharPoly, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            [t, cp.p_at(t), cp.q_at(t)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localmodel::Region;

    #[test]
    fn hyp3_has_four_saddles() {
        let m = LocalModel::new(Region::Hyperbolic, [-1.0, -0.5, 0.5, 1.0]);
        let s = blowup_singularities(&m).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|x| x.kind == SingularityKind::Saddle));
    }
}
