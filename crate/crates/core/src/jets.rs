//! Truncated bivariate Taylor series and surface charts.
//!
//! A [`Jet2`] stores `c_ij = ∂^{i+j} f / (i! j!)` for `i + j <= order`,
//! packed by total degree. Raw partial derivatives are available through
//! [`Jet2::partial`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{factorial, Poly2, Poly3};

#[derive(Clone, PartialEq)]
pub struct Jet2 {
    order: usize,
    base: [f64; 2],
    coeff: Vec<f64>,
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let k = i + j;
    k * (k + 1) / 2 + j
}

pub fn jet_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

impl Jet2 {
    pub fn zero(order: usize, base: [f64; 2]) -> Self {
        Self { order, base, coeff: vec![0.0; jet_len(order)] }
    }

    pub fn constant(order: usize, base: [f64; 2], c: f64) -> Self {
        let mut j = Self::zero(order, base);
        j.coeff[0] = c;
        j
    }

    /// The jet of the coordinate function `x` (axis 0) or `y` (axis 1).
    pub fn coordinate(order: usize, base: [f64; 2], axis: usize) -> Self {
        let mut j = Self::constant(order, base, base[axis]);
        if order >= 1 {
            if axis == 0 {
                j.set(1, 0, 1.0);
            } else {
                j.set(0, 1, 1.0);
            }
        }
        j
    }

    /// Builds a jet from `(i, j, c)` triples; terms above `order` are dropped.
    pub fn from_terms<I: IntoIterator<Item = (usize, usize, f64)>>(
        order: usize,
        base: [f64; 2],
        terms: I,
    ) -> Self {
        let mut j = Self::zero(order, base);
        for (a, b, c) in terms {
            if a + b <= order {
                j.add_to(a, b, c);
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> [f64; 2] {
        self.base
    }

    pub fn with_base(mut self, base: [f64; 2]) -> Self {
        self.base = base;
        self
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeff
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order {
            0.0
        } else {
            self.coeff[idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        self.coeff[idx(i, j)] = c;
    }

    pub fn add_to(&mut self, i: usize, j: usize, c: f64) {
        self.coeff[idx(i, j)] += c;
    }

    /// `∂^{i+j} f / ∂x^i ∂y^j` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    pub fn truncate(&self, order: usize) -> Jet2 {
        let order = order.min(self.order);
        Self { order, base: self.base, coeff: self.coeff[..jet_len(order)].to_vec() }
    }

    /// Copy of the degree-`k` homogeneous part as a jet of the same order.
    pub fn homogeneous(&self, k: usize) -> Jet2 {
        let mut out = Self::zero(self.order, self.base);
        if k <= self.order {
            for j in 0..=k {
                out.set(k - j, j, self.coeff(k - j, j));
            }
        }
        out
    }

    /// Coefficients of the degree-`k` part, ordered by increasing power of y.
    pub fn degree_part(&self, k: usize) -> Vec<f64> {
        (0..=k).map(|j| self.coeff(k - j, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        Self { order: self.order, base: self.base, coeff: self.coeff.iter().map(|c| c * s).collect() }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Jet2) {
        let n = jet_len(self.order.min(other.order));
        for (s, o) in self.coeff[..n].iter_mut().zip(&other.coeff[..n]) {
            *s += a * o;
        }
    }

    /// ∂/∂x (axis 0) or ∂/∂y (axis 1); the result has order one less.
    pub fn derivative(&self, axis: usize) -> Jet2 {
        assert!(self.order >= 1, "cannot differentiate a 0-jet");
        let mut out = Self::zero(self.order - 1, self.base);
        for k in 0..self.order {
            for j in 0..=k {
                let i = k - j;
                let v = if axis == 0 {
                    (i + 1) as f64 * self.coeff(i + 1, j)
                } else {
                    (j + 1) as f64 * self.coeff(i, j + 1)
                };
                out.set(i, j, v);
            }
        }
        out
    }

    /// Value of the truncated polynomial at `base + (dx, dy)`.
    pub fn eval_offset(&self, dx: f64, dy: f64) -> f64 {
        let mut acc = 0.0;
        for k in (0..=self.order).rev() {
            let mut h = 0.0;
            for j in 0..=k {
                h += self.coeff(k - j, j) * dx.powi((k - j) as i32) * dy.powi(j as i32);
            }
            acc += h;
        }
        acc
    }

    /// The jet of `g(u) = f(base + L u)` at `u = 0`, where `L` is given row-major.
    pub fn linear_substitution(&self, l: [[f64; 2]; 2]) -> Jet2 {
        let o = [0.0, 0.0];
        let mut x = Jet2::zero(self.order, o);
        let mut y = Jet2::zero(self.order, o);
        if self.order >= 1 {
            x.set(1, 0, l[0][0]);
            x.set(0, 1, l[0][1]);
            y.set(1, 0, l[1][0]);
            y.set(0, 1, l[1][1]);
        }
        self.compose_offsets(&x, &y)
    }

    /// Composes this jet with offset jets `(dx(u), dy(u))` that vanish at 0.
    pub fn compose_offsets(&self, dx: &Jet2, dy: &Jet2) -> Jet2 {
        let order = self.order;
        let o = dx.base;
        let powers = |j: &Jet2| {
            let mut v = vec![Jet2::constant(order, o, 1.0)];
            for k in 1..=order {
                let n = &v[k - 1] * j;
                v.push(n);
            }
            v
        };
        let px = powers(dx);
        let py = powers(dy);
        let mut out = Jet2::zero(order, o);
        for k in 0..=order {
            for j in 0..=k {
                let c = self.coeff(k - j, j);
                if c != 0.0 {
                    out.axpy(c, &(&px[k - j] * &py[j]));
                }
            }
        }
        out
    }

    /// Re-expands the truncated polynomial at `base + shift`.
    pub fn recentered(&self, shift: [f64; 2]) -> Jet2 {
        let nb = [self.base[0] + shift[0], self.base[1] + shift[1]];
        let x = Jet2::from_terms(self.order, nb, [(0, 0, shift[0]), (1, 0, 1.0)]);
        let y = Jet2::from_terms(self.order, nb, [(0, 0, shift[1]), (0, 1, 1.0)]);
        // compose_offsets assumes offsets without constant terms only for
        // efficiency; with constants the full expansion is still exact.
        self.compose_offsets(&x, &y).with_base(nb)
    }
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet2(order={}, base={:?}, [", self.order, self.base)?;
        for k in 0..=self.order {
            if k > 0 {
                write!(f, " |")?;
            }
            for j in 0..=k {
                write!(f, " {:.6e}", self.coeff(k - j, j))?;
            }
        }
        write!(f, " ])")
    }
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        let mut out = self.truncate(self.order.min(rhs.order));
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        let mut out = self.truncate(self.order.min(rhs.order));
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let mut out = Jet2::zero(order, self.base);
        for k1 in 0..=order {
            for j1 in 0..=k1 {
                let a = self.coeff(k1 - j1, j1);
                if a == 0.0 {
                    continue;
                }
                for k2 in 0..=(order - k1) {
                    for j2 in 0..=k2 {
                        let b = rhs.coeff(k2 - j2, j2);
                        out.add_to(k1 - j1 + k2 - j2, j1 + j2, a * b);
                    }
                }
            }
        }
        out
    }
}

/// Domain of a chart in its own coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Domain {
    Plane,
    Rect { min: [f64; 2], max: [f64; 2] },
    Disc { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Domain::Plane => p[0].is_finite() && p[1].is_finite(),
            Domain::Rect { min, max } => {
                p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1]
            }
            Domain::Disc { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= radius
            }
        }
    }
}

type JetFn = dyn Fn([f64; 2], usize) -> Result<Jet2> + Send + Sync;

/// A surface presented as the graph of a function over a plane domain.
#[derive(Clone)]
pub struct SurfaceChart {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub domain: Domain,
    eval: ChartEval,
}

#[derive(Clone)]
enum ChartEval {
    Poly(Poly2),
    Func(Arc<JetFn>),
}

impl fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .finish()
    }
}

impl SurfaceChart {
    pub fn polynomial(name: impl Into<String>, f: Poly2, domain: Domain) -> Self {
        Self { name: name.into(), params: Vec::new(), domain, eval: ChartEval::Poly(f) }
    }

    pub fn from_fn<F>(name: impl Into<String>, domain: Domain, f: F) -> Self
    where
        F: Fn([f64; 2], usize) -> Result<Jet2> + Send + Sync + 'static,
    {
        Self { name: name.into(), params: Vec::new(), domain, eval: ChartEval::Func(Arc::new(f)) }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.push((key.to_string(), value));
        self
    }

    pub fn as_polynomial(&self) -> Option<&Poly2> {
        match &self.eval {
            ChartEval::Poly(p) => Some(p),
            ChartEval::Func(_) => None,
        }
    }
}

/// Taylor coefficients of the chart function at `p` up to `order`.
pub fn jet_eval(chart: &SurfaceChart, p: [f64; 2], order: usize) -> Result<Jet2> {
    if order < 4 {
        return Err(Error::Order(order, 4));
    }
    if !chart.domain.contains(p) {
        return Err(Error::Domain { chart: chart.name.clone(), x: p[0], y: p[1] });
    }
    match &chart.eval {
        ChartEval::Poly(f) => Ok(f.jet_at(p, order)),
        ChartEval::Func(f) => f(p, order),
    }
}

/// Zero set of a trivariate polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicitSurface {
    pub f: Poly3,
    pub grad_threshold: f64,
}

impl ImplicitSurface {
    pub fn new(f: Poly3) -> Self {
        Self { f, grad_threshold: 1e-8 }
    }

    pub fn residual_tolerance(q: [f64; 3]) -> f64 {
        1e-10 * (1.0 + norm3(q).powi(2))
    }

    /// Newton projection of `q` onto the surface along the gradient.
    pub fn project(&self, mut q: [f64; 3]) -> Result<[f64; 3]> {
        for _ in 0..60 {
            let v = self.f.eval(q);
            let g = self.f.gradient(q);
            let gg = dot3(g, g);
            if gg.sqrt() < self.grad_threshold {
                return Err(Error::DegenerateChart { norm: gg.sqrt(), threshold: self.grad_threshold });
            }
            let s = v / gg;
            for k in 0..3 {
                q[k] -= s * g[k];
            }
            if v.abs() < 1e-3 * Self::residual_tolerance(q) {
                break;
            }
        }
        let r = self.f.eval(q).abs();
        let tol = Self::residual_tolerance(q);
        if r > tol {
            return Err(Error::OffSurface { residual: r, tolerance: tol });
        }
        Ok(q)
    }
}

/// Orthonormal frame `(e1, e2, n)` at a surface point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub n: [f64; 3],
}

impl Frame {
    /// Frame with normal along `n` and `e1` the projection of `hint`
    /// (falling back to a coordinate axis when the hint is nearly normal).
    pub fn from_normal(origin: [f64; 3], n: [f64; 3], hint: Option<[f64; 3]>) -> Self {
        let n = normalize3(n);
        let pick = |h: [f64; 3]| {
            let p = sub3(h, scale3(n, dot3(h, n)));
            let l = norm3(p);
            (l > 1e-6).then(|| scale3(p, 1.0 / l))
        };
        let e1 = hint
            .and_then(pick)
            .or_else(|| {
                let k = (0..3)
                    .min_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap())
                    .unwrap();
                let mut ax = [0.0; 3];
                ax[k] = 1.0;
                pick(ax)
            })
            .unwrap();
        let e2 = cross3(n, e1);
        Self { origin, e1, e2, n }
    }

    pub fn point(&self, u: f64, v: f64, w: f64) -> [f64; 3] {
        let mut p = self.origin;
        for k in 0..3 {
            p[k] += u * self.e1[k] + v * self.e2[k] + w * self.n[k];
        }
        p
    }

    /// Rotates `(e1, e2)` by angle `alpha` about `n`.
    pub fn rotated(&self, alpha: f64) -> Frame {
        let (s, c) = alpha.sin_cos();
        Frame {
            origin: self.origin,
            e1: add3(scale3(self.e1, c), scale3(self.e2, s)),
            e2: add3(scale3(self.e1, -s), scale3(self.e2, c)),
            n: self.n,
        }
    }
}

/// Result of [`monge_chart`].
#[derive(Clone, Debug)]
pub struct MongeChart {
    pub frame: Frame,
    pub jet: Jet2,
}

/// Jet of the graph `w = f(u, v)` of `surf` over the plane of `frame`,
/// taken at chart point `uv`.
///
/// The height `w0 = f(uv)` is found by Newton along the frame normal; the
/// higher coefficients are solved degree by degree from
/// `F(frame.point(u, v, f(u, v))) = 0`.
pub fn graph_jet(surf: &ImplicitSurface, frame: &Frame, uv: [f64; 2], order: usize) -> Result<Jet2> {
    let mut w0 = 0.0;
    let mut gw = 0.0;
    for it in 0..80 {
        let q = frame.point(uv[0], uv[1], w0);
        let v = surf.f.eval(q);
        let g = surf.f.gradient(q);
        gw = dot3(g, frame.n);
        if gw.abs() < surf.grad_threshold {
            return Err(Error::DegenerateChart { norm: gw.abs(), threshold: surf.grad_threshold });
        }
        let step = v / gw;
        w0 -= step;
        if step.abs() < 1e-15 * (1.0 + w0.abs()) && it > 0 {
            break;
        }
    }
    let q = frame.point(uv[0], uv[1], w0);
    let res = surf.f.eval(q).abs();
    let tol = ImplicitSurface::residual_tolerance(q);
    if res > tol || !w0.is_finite() {
        return Err(Error::OffSurface { residual: res, tolerance: tol });
    }

    let o = [0.0, 0.0];
    let du = Jet2::from_terms(order, o, [(1, 0, 1.0)]);
    let dv = Jet2::from_terms(order, o, [(0, 1, 1.0)]);
    let mut h = Jet2::constant(order, o, w0);
    for k in 1..=order {
        let r = eval_on_frame(&surf.f, frame, uv, &du, &dv, &h);
        for j in 0..=k {
            h.add_to(k - j, j, -r.coeff(k - j, j) / gw);
        }
    }
    Ok(h.with_base(uv))
}

fn eval_on_frame(f: &Poly3, frame: &Frame, uv: [f64; 2], du: &Jet2, dv: &Jet2, w: &Jet2) -> Jet2 {
    let o = du.base();
    let order = du.order();
    let mut xs = Vec::with_capacity(3);
    for k in 0..3 {
        let mut x = Jet2::constant(order, o, frame.origin[k] + uv[0] * frame.e1[k] + uv[1] * frame.e2[k]);
        x.axpy(frame.e1[k], du);
        x.axpy(frame.e2[k], dv);
        let mut wn = w.scale(frame.n[k]);
        wn.axpy(1.0, &x);
        xs.push(wn);
    }
    f.eval_jets(&xs[0], &xs[1], &xs[2])
}

/// Monge chart at a surface point: orthonormal tangent frame and the jet of
/// the local graph with `f(0,0) = f_x = f_y = 0`.
pub fn monge_chart(surf: &ImplicitSurface, q: [f64; 3], order: usize) -> Result<MongeChart> {
    monge_chart_with_hint(surf, q, None, order)
}

/// As [`monge_chart`], with `e1` taken from the tangential part of `hint`.
pub fn monge_chart_with_hint(
    surf: &ImplicitSurface,
    q: [f64; 3],
    hint: Option<[f64; 3]>,
    order: usize,
) -> Result<MongeChart> {
    let tol = ImplicitSurface::residual_tolerance(q);
    let r = surf.f.eval(q).abs();
    if r > tol {
        return Err(Error::OffSurface { residual: r, tolerance: tol });
    }
    let g = surf.f.gradient(q);
    let gn = norm3(g);
    if gn < surf.grad_threshold {
        return Err(Error::DegenerateChart { norm: gn, threshold: surf.grad_threshold });
    }
    let frame = Frame::from_normal(q, g, hint);
    monge_chart_in_frame(surf, frame, order)
}

pub fn monge_chart_in_frame(surf: &ImplicitSurface, frame: Frame, order: usize) -> Result<MongeChart> {
    let mut jet = graph_jet(surf, &frame, [0.0, 0.0], order)?;
    // The frame is tangent, so the constant and linear terms are rounding noise.
    jet.set(0, 0, 0.0);
    if order >= 1 {
        jet.set(1, 0, 0.0);
        jet.set(0, 1, 0.0);
    }
    Ok(MongeChart { frame, jet })
}

/// Graph chart over the tangent plane of `frame`, valid near its origin.
pub fn tangent_graph_chart(surf: ImplicitSurface, frame: Frame, radius: f64) -> SurfaceChart {
    SurfaceChart::from_fn("tangent-graph", Domain::Disc { center: [0.0, 0.0], radius }, move |p, order| {
        graph_jet(&surf, &frame, p, order)
    })
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}
pub(crate) fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
pub(crate) fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub(crate) fn normalize3(a: [f64; 3]) -> [f64; 3] {
    scale3(a, 1.0 / norm3(a))
}
pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
