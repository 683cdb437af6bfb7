//! Small dense/sparse polynomial types used throughout the crate.
//!
//! [`Poly1`] is a dense univariate polynomial with a Sturm-chain real root
//! isolator. [`Poly2`] and [`Poly3`] are sparse bivariate/trivariate
//! polynomials keyed by exponent tuples; they back graph charts and implicit
//! surfaces and can be evaluated on [`Jet2`] arguments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::jets::Jet2;

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly1 {
        if self.coeffs.len() <= 1 {
            return Poly1::new(vec![0.0]);
        }
        Poly1::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Polynomial long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly1) -> (Poly1, Poly1) {
        let dd = divisor.degree();
        let lead = divisor.leading();
        assert!(lead != 0.0, "division by the zero polynomial");
        if self.degree() < dd {
            return (Poly1::new(vec![0.0]), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd] / lead;
            quot[k] = c;
            for (i, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= c * dc;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd.max(1));
        (Poly1::new(quot), Poly1::new(rem))
    }

    /// Drops coefficients that are negligible relative to `scale`.
    fn cleaned(&self, scale: f64, rel_tol: f64) -> Poly1 {
        Poly1::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= rel_tol * scale { 0.0 } else { c })
                .collect(),
        )
    }

    /// Sturm chain of the polynomial. The last entry is (up to scale) the
    /// gcd of `p` and `p'`; a non-constant tail means repeated roots.
    pub fn sturm_chain(&self, rel_tol: f64) -> Vec<Poly1> {
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            if chain[n - 1].degree() == 0 {
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            let r = Poly1::new(r.coeffs.iter().map(|c| -c).collect());
            // Normalise each member to unit sup-norm so the relative
            // cleaning threshold means the same thing at every depth.
            let r_scale = chain[n - 2].norm_inf().max(chain[n - 1].norm_inf());
            let r = r.cleaned(r_scale.max(scale * f64::EPSILON), rel_tol);
            if r.is_zero() {
                break;
            }
            let nrm = r.norm_inf();
            chain.push(Poly1::new(r.coeffs.iter().map(|c| c / nrm).collect()));
        }
        chain
    }

    /// Real roots with multiplicities, sorted increasingly.
    ///
    /// Distinct roots are isolated with a Sturm chain on the square-free part
    /// and refined by bisection followed by Newton polishing.
    pub fn real_roots(&self, rel_tol: f64) -> Vec<(f64, usize)> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let chain = self.sturm_chain(rel_tol);
        let gcd = chain.last().unwrap();
        let square_free = if gcd.degree() > 0 {
            self.div_rem(gcd).0
        } else {
            self.clone()
        };
        if square_free.degree() == 0 {
            return Vec::new();
        }
        let sf_chain = square_free.sturm_chain(rel_tol);
        let lead = square_free.leading();
        let bound = 1.0
            + square_free.coeffs[..square_free.degree()]
                .iter()
                .fold(0.0_f64, |m, c| m.max((c / lead).abs()));
        let mut roots = Vec::new();
        isolate(&sf_chain, -bound, bound, 0, &mut roots);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let dp = square_free.derivative();
        roots
            .into_iter()
            .map(|r| {
                let r = newton_polish(&square_free, &dp, r);
                (r, self.multiplicity_at(r, rel_tol))
            })
            .collect()
    }

    fn multiplicity_at(&self, x: f64, rel_tol: f64) -> usize {
        let mut d = self.clone();
        let mut m = 0;
        // Scale-aware: compare each derivative against its own coefficients
        // evaluated in magnitude at x.
        while d.degree() > 0 {
            let mag: f64 = d
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (c * x.abs().powi(k as i32)).abs())
                .sum();
            if d.eval(x).abs() > rel_tol.sqrt() * mag.max(f64::MIN_POSITIVE) {
                break;
            }
            m += 1;
            d = d.derivative();
        }
        m.max(1)
    }
}

fn sign_variations(chain: &[Poly1], x: f64) -> usize {
    let mut count = 0;
    let mut prev = 0.0_f64;
    for p in chain {
        let v = p.eval(x);
        if v != 0.0 {
            if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
                count += 1;
            }
            prev = v;
        }
    }
    count
}

fn isolate(chain: &[Poly1], lo: f64, hi: f64, depth: usize, out: &mut Vec<f64>) {
    let n = sign_variations(chain, lo) as i64 - sign_variations(chain, hi) as i64;
    if n <= 0 {
        return;
    }
    if n == 1 || depth > 200 || hi - lo < 1e-15 * (1.0 + lo.abs()) {
        out.push(bisect_root(&chain[0], lo, hi));
        return;
    }
    let mid = 0.5 * (lo + hi);
    isolate(chain, lo, mid, depth + 1, out);
    isolate(chain, mid, hi, depth + 1, out);
}

fn bisect_root(p: &Poly1, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = p.eval(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = p.eval(hi);
    if fhi == 0.0 || flo.signum() == fhi.signum() {
        // Root sits at the upper endpoint or sign information is lost.
        return if fhi.abs() < flo.abs() { hi } else { 0.5 * (lo + hi) };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn newton_polish(p: &Poly1, dp: &Poly1, mut x: f64) -> f64 {
    for _ in 0..3 {
        let d = dp.eval(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval(x) / d;
        if !step.is_finite() || step.abs() > 1e-6 * (1.0 + x.abs()) {
            break;
        }
        x -= step;
    }
    x
}

/// Sparse bivariate polynomial `Σ c_{ij} x^i y^j`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, f64)>>(terms: I) -> Self {
        let mut p = Self::new();
        for (i, j, c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: f64) {
        *self.terms.entry((i, j)).or_insert(0.0) += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * p[0].powi(i as i32) * p[1].powi(j as i32))
            .sum()
    }

    /// Exact Taylor expansion about `p`, truncated at `order`.
    pub fn jet_at(&self, p: [f64; 2], order: usize) -> Jet2 {
        let mut jet = Jet2::zero(order, p);
        for (&(a, b), &c) in &self.terms {
            for i in 0..=(a as usize) {
                for j in 0..=(b as usize) {
                    if i + j > order {
                        continue;
                    }
                    let w = binom(a as usize, i)
                        * binom(b as usize, j)
                        * p[0].powi(a as i32 - i as i32)
                        * p[1].powi(b as i32 - j as i32);
                    jet.add_to(i, j, c * w);
                }
            }
        }
        jet
    }
}

/// Sparse trivariate polynomial `Σ c_{ijk} x^i y^j z^k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly3 {
    terms: BTreeMap<(u32, u32, u32), f64>,
}

impl Poly3 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, u32, f64)>>(terms: I) -> Self {
        let mut p = Self::new();
        for (i, j, k, c) in terms {
            p.add_term(i, j, k, c);
        }
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, k: u32, c: f64) {
        *self.terms.entry((i, j, k)).or_insert(0.0) += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j, k), &c)| (i, j, k, c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j, k)| i + j + k).max().unwrap_or(0)
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j, k), &c)| {
                c * p[0].powi(i as i32) * p[1].powi(j as i32) * p[2].powi(k as i32)
            })
            .sum()
    }

    pub fn gradient(&self, p: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (&(i, j, k), &c) in &self.terms {
            let e = [i as i32, j as i32, k as i32];
            for (axis, slot) in g.iter_mut().enumerate() {
                if e[axis] == 0 {
                    continue;
                }
                let mut term = c * e[axis] as f64;
                for (ax, &pow) in e.iter().enumerate() {
                    let pw = if ax == axis { pow - 1 } else { pow };
                    term *= p[ax].powi(pw);
                }
                *slot += term;
            }
        }
        g
    }

    /// Evaluates the polynomial on jet arguments.
    pub fn eval_jets(&self, x: &Jet2, y: &Jet2, z: &Jet2) -> Jet2 {
        let deg = self.degree() as usize;
        let powers = |j: &Jet2| {
            let mut v = vec![Jet2::constant(j.order(), j.base(), 1.0)];
            for k in 1..=deg {
                let next = &v[k - 1] * j;
                v.push(next);
            }
            v
        };
        let (px, py, pz) = (powers(x), powers(y), powers(z));
        let mut acc = Jet2::zero(x.order(), x.base());
        for (&(i, j, k), &c) in &self.terms {
            let term = &(&px[i as usize] * &py[j as usize]) * &pz[k as usize];
            acc.axpy(c, &term);
        }
        acc
    }
}

/// Substitutes `x = m00 X + m01 Y`, `y = m10 X + m11 Y` into the binary form
/// `Σ p[i] x^{n-i} y^i`; the result uses the same coefficient layout.
pub fn binary_substitute(p: &[f64], m: [[f64; 2]; 2]) -> Vec<f64> {
    let n = p.len() - 1;
    let lx = [m[0][0], m[0][1]];
    let ly = [m[1][0], m[1][1]];
    let mul = |a: &[f64], b: [f64; 2]| {
        let mut out = vec![0.0; a.len() + 1];
        for (i, &c) in a.iter().enumerate() {
            out[i] += c * b[0];
            out[i + 1] += c * b[1];
        }
        out
    };
    let mut out = vec![0.0; n + 1];
    for (i, &c) in p.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut t = vec![1.0];
        for _ in 0..(n - i) {
            t = mul(&t, lx);
        }
        for _ in 0..i {
            t = mul(&t, ly);
        }
        for (o, v) in out.iter_mut().zip(t) {
            *o += c * v;
        }
    }
    out
}

/// Evaluates the binary form `Σ p[i] x^{n-i} y^i`.
pub fn binary_eval(p: &[f64], x: f64, y: f64) -> f64 {
    let n = p.len() - 1;
    p.iter()
        .enumerate()
        .map(|(i, c)| c * x.powi((n - i) as i32) * y.powi(i as i32))
        .sum()
}

pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
