//! Jacobi polynomials, their trigonometric normalization, eigenvalues of the
//! Jacobi operator, and the first order derivatives `δ = d/dθ` and `δ*`.
//!
//! Derivatives of `P_n^{(a,b)}(cos θ)` are carried symbolically: a term
//! `c · sin^p θ · cos^q θ · P_k^{(a,b)}(cos θ)` differentiates into at most
//! three terms of the same shape, using
//! `d/dθ P_k^{(a,b)}(cos θ) = -sin θ · (k+a+b+1)/2 · P_{k-1}^{(a+1,b+1)}(cos θ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::GridFunction;
use crate::special::{ln_beta, ln_gamma};

/// Type parameters `(α, β)` of the Jacobi setting, both `> -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub alpha: f64,
    pub beta: f64,
}

/// The four parameter regimes of the `Υ` majorant, split at `-1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `α, β ≥ -1/2`
    I,
    /// `-1 < α < -1/2 ≤ β`
    II,
    /// `-1 < β < -1/2 ≤ α`
    III,
    /// `-1 < α, β < -1/2`
    IV,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    /// The same setting with `α` and `β` exchanged (reflection `θ ↦ π - θ`).
    pub fn swapped(self) -> Self {
        Self { alpha: self.beta, beta: self.alpha }
    }

    pub fn regime(&self) -> Regime {
        match (self.alpha >= -0.5, self.beta >= -0.5) {
            (true, true) => Regime::I,
            (false, true) => Regime::II,
            (true, false) => Regime::III,
            (false, false) => Regime::IV,
        }
    }

    /// `(α + β + 1) / 2`
    pub fn half_shift(&self) -> f64 {
        0.5 * (self.alpha + self.beta + 1.0)
    }

    pub fn lambda0(&self) -> f64 {
        self.half_shift().powi(2)
    }

    /// `√λ_n = |n + (α+β+1)/2|`
    pub fn sqrt_eigenvalue(&self, n: usize) -> f64 {
        (n as f64 + self.half_shift()).abs()
    }

    pub fn min_exponent(&self) -> f64 {
        self.alpha.min(self.beta)
    }
}

/// `λ_n = (n + (α+β+1)/2)^2`
pub fn eigenvalue(n: usize, p: &JacobiParams) -> f64 {
    (n as f64 + p.half_shift()).powi(2)
}

/// Classical Jacobi polynomial `P_n^{(a,b)}(x)` by the ascending three-term
/// recurrence. No domain checks.
pub fn jacobi_p(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut seq = JacobiSeq::new(a, b, x);
    for _ in 0..n {
        seq.step();
    }
    seq.value()
}

/// Checked evaluation of `P_n^{(α,β)}(x)`, `|x| ≤ 1`.
pub fn eval_jacobi(n: usize, p: &JacobiParams, x: f64) -> Result<f64> {
    JacobiParams::new(p.alpha, p.beta)?;
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    Ok(jacobi_p(n, p.alpha, p.beta, x))
}

/// Streams `P_0, P_1, ...` of one Jacobi family at a fixed point.
#[derive(Debug, Clone)]
pub struct JacobiSeq {
    a: f64,
    b: f64,
    x: f64,
    degree: usize,
    cur: f64,
    prev: f64,
}

impl JacobiSeq {
    pub fn new(a: f64, b: f64, x: f64) -> Self {
        Self { a, b, x, degree: 0, cur: 1.0, prev: 0.0 }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value(&self) -> f64 {
        self.cur
    }

    /// Advance to the next degree.
    pub fn step(&mut self) {
        let (a, b, x) = (self.a, self.b, self.x);
        let n = (self.degree + 1) as f64;
        let next = if self.degree == 0 {
            (a + 1.0) + (a + b + 2.0) * (x - 1.0) * 0.5
        } else {
            let s = 2.0 * n + a + b;
            let c0 = 2.0 * n * (n + a + b) * (s - 2.0);
            let c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
            let c2 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
            (c1 * self.cur - c2 * self.prev) / c0
        };
        self.prev = self.cur;
        self.cur = next;
        self.degree += 1;
    }
}

/// `ln h_n` where `h_n = ‖P_n^{(α,β)}(cos ·)‖²_{L²(dμ)}`.
pub fn ln_squared_norm(n: usize, p: &JacobiParams) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    if n == 0 {
        // μ(0, π) = B(α+1, β+1); the generic formula has a 0·∞ form when α+β+1 = 0.
        return ln_beta(a + 1.0, b + 1.0);
    }
    let nf = n as f64;
    ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - (2.0 * nf + a + b + 1.0).ln()
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0)
}

/// Positive constant `c_n` with `𝒫_n(θ) = c_n P_n^{(α,β)}(cos θ)` orthonormal in `L²(dμ)`.
pub fn normalizing_constant(n: usize, p: &JacobiParams) -> f64 {
    (-0.5 * ln_squared_norm(n, p)).exp()
}

/// Streams `c_0, c_1, ...` by the ratio `h_n / h_{n-1}`, resynchronised
/// against the closed form every 512 steps.
#[derive(Debug, Clone)]
pub struct NormStream {
    p: JacobiParams,
    n: usize,
    ln_h: f64,
}

impl NormStream {
    pub fn new(p: JacobiParams) -> Self {
        Self { p, n: 0, ln_h: ln_squared_norm(0, &p) }
    }

    pub fn current(&self) -> f64 {
        (-0.5 * self.ln_h).exp()
    }

    pub fn step(&mut self) {
        self.n += 1;
        let n = self.n;
        if n == 1 || n % 512 == 0 {
            self.ln_h = ln_squared_norm(n, &self.p);
            return;
        }
        let (a, b) = (self.p.alpha, self.p.beta);
        let nf = n as f64;
        let ratio = (nf + a) * (nf + b) * (2.0 * nf + a + b - 1.0)
            / ((2.0 * nf + a + b + 1.0) * (nf + a + b) * nf);
        self.ln_h += ratio.ln();
    }
}

/// Normalized Jacobi trigonometric polynomial `𝒫_n(θ)`.
pub fn normalized(n: usize, p: &JacobiParams, theta: f64) -> f64 {
    normalizing_constant(n, p) * jacobi_p(n, p.alpha, p.beta, theta.cos())
}

/// `c · sin^p θ · cos^q θ · P_k^{(a,b)}(cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub coeff: f64,
    pub sin_pow: u32,
    pub cos_pow: u32,
    pub degree: usize,
    pub a: f64,
    pub b: f64,
}

impl TrigTerm {
    /// The summand `𝒫_n` itself as a single term.
    pub fn normalized(n: usize, p: &JacobiParams) -> Self {
        Self {
            coeff: normalizing_constant(n, p),
            sin_pow: 0,
            cos_pow: 0,
            degree: n,
            a: p.alpha,
            b: p.beta,
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.coeff
            * s.powi(self.sin_pow as i32)
            * c.powi(self.cos_pow as i32)
            * jacobi_p(self.degree, self.a, self.b, c)
    }
}

/// Exact `d/dθ` of a term; at most three terms, zero terms dropped.
pub fn delta_term(t: &TrigTerm) -> Vec<TrigTerm> {
    let mut out = Vec::with_capacity(3);
    if t.coeff == 0.0 {
        return out;
    }
    if t.sin_pow > 0 {
        out.push(TrigTerm {
            coeff: t.coeff * t.sin_pow as f64,
            sin_pow: t.sin_pow - 1,
            cos_pow: t.cos_pow + 1,
            ..*t
        });
    }
    if t.cos_pow > 0 {
        out.push(TrigTerm {
            coeff: -t.coeff * t.cos_pow as f64,
            sin_pow: t.sin_pow + 1,
            cos_pow: t.cos_pow - 1,
            ..*t
        });
    }
    if t.degree > 0 {
        let k = t.degree as f64;
        out.push(TrigTerm {
            coeff: -t.coeff * 0.5 * (k + t.a + t.b + 1.0),
            sin_pow: t.sin_pow + 1,
            cos_pow: t.cos_pow,
            degree: t.degree - 1,
            a: t.a + 1.0,
            b: t.b + 1.0,
        });
    }
    out
}

/// `δ^k` applied to a sum of terms.
pub fn delta_terms(terms: &[TrigTerm], k: usize) -> Vec<TrigTerm> {
    let mut cur = terms.to_vec();
    for _ in 0..k {
        cur = cur.iter().flat_map(delta_term).collect();
    }
    cur
}

/// `δ^k 𝒫_n(θ)` through the term algebra.
pub fn delta_normalized(n: usize, k: usize, p: &JacobiParams, theta: f64) -> f64 {
    delta_terms(&[TrigTerm::normalized(n, p)], k)
        .iter()
        .map(|t| t.eval(theta))
        .sum()
}

/// Symbolic form of `δ^k` applied to `P_n^{(α,β)}(cos θ)`, valid for every `n`:
/// each term is `poly(n) · sin^p θ · cos^q θ · P_{n-j}^{(α+j, β+j)}(cos θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePlan {
    pub order: usize,
    pub terms: Vec<PlanTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanTerm {
    /// Polynomial in `n`, ascending coefficients.
    pub poly: Vec<f64>,
    pub sin_pow: u32,
    pub cos_pow: u32,
    pub shift: usize,
}

fn poly_scale(p: &[f64], s: f64) -> Vec<f64> {
    p.iter().map(|c| c * s).collect()
}

/// `p(n) · (n + c) · s`
fn poly_mul_linear(p: &[f64], c: f64, s: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (i, &a) in p.iter().enumerate() {
        out[i] += a * c * s;
        out[i + 1] += a * s;
    }
    out
}

fn poly_add(a: &mut Vec<f64>, b: &[f64]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0.0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

pub fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl DerivativePlan {
    pub fn new(order: usize, p: &JacobiParams) -> Self {
        let mut terms = vec![PlanTerm { poly: vec![1.0], sin_pow: 0, cos_pow: 0, shift: 0 }];
        for _ in 0..order {
            let mut next: Vec<PlanTerm> = Vec::new();
            let mut push = |t: PlanTerm| {
                if let Some(e) = next
                    .iter_mut()
                    .find(|e| e.sin_pow == t.sin_pow && e.cos_pow == t.cos_pow && e.shift == t.shift)
                {
                    poly_add(&mut e.poly, &t.poly);
                } else {
                    next.push(t);
                }
            };
            for t in &terms {
                if t.sin_pow > 0 {
                    push(PlanTerm {
                        poly: poly_scale(&t.poly, t.sin_pow as f64),
                        sin_pow: t.sin_pow - 1,
                        cos_pow: t.cos_pow + 1,
                        shift: t.shift,
                    });
                }
                if t.cos_pow > 0 {
                    push(PlanTerm {
                        poly: poly_scale(&t.poly, -(t.cos_pow as f64)),
                        sin_pow: t.sin_pow + 1,
                        cos_pow: t.cos_pow - 1,
                        shift: t.shift,
                    });
                }
                let c = p.alpha + p.beta + t.shift as f64 + 1.0;
                push(PlanTerm {
                    poly: poly_mul_linear(&t.poly, c, -0.5),
                    sin_pow: t.sin_pow + 1,
                    cos_pow: t.cos_pow,
                    shift: t.shift + 1,
                });
            }
            terms = next;
        }
        Self { order, terms }
    }

    /// Collapse the trigonometric factors at `θ` into one polynomial per shift.
    pub fn at(&self, theta: f64) -> Vec<Vec<f64>> {
        let (s, c) = theta.sin_cos();
        let mut by_shift = vec![Vec::new(); self.order + 1];
        for t in &self.terms {
            let f = s.powi(t.sin_pow as i32) * c.powi(t.cos_pow as i32);
            poly_add(&mut by_shift[t.shift], &poly_scale(&t.poly, f));
        }
        by_shift
    }
}

/// Streams `δ^k P_n^{(α,β)}(cos θ)` (unnormalized) for `n = 0, 1, 2, ...` at
/// a fixed `θ`; multiply by `c_n` for `δ^k 𝒫_n(θ)`.
#[derive(Debug, Clone)]
pub struct ThetaStream {
    polys: Vec<Vec<f64>>,
    families: Vec<JacobiSeq>,
    n: usize,
}

impl ThetaStream {
    pub fn new(plan: &DerivativePlan, p: &JacobiParams, theta: f64) -> Self {
        let x = theta.cos();
        let families = (0..=plan.order)
            .map(|j| JacobiSeq::new(p.alpha + j as f64, p.beta + j as f64, x))
            .collect();
        Self { polys: plan.at(theta), families, n: 0 }
    }

    /// Value at the current `n`, then advance.
    pub fn next_raw(&mut self) -> f64 {
        let n = self.n;
        let nf = n as f64;
        let mut acc = 0.0;
        for (j, fam) in self.families.iter_mut().enumerate() {
            if j > n {
                break;
            }
            let poly = &self.polys[j];
            if !poly.is_empty() {
                acc += poly_eval(poly, nf) * fam.value();
            }
            fam.step();
        }
        self.n += 1;
        acc
    }
}

/// [`ThetaStream`] over many angles at once. The recurrence coefficients of
/// each family depend only on the degree, so one step computes them once.
#[derive(Debug, Clone)]
pub struct ThetaBatch {
    xs: Vec<f64>,
    /// `polys[j][i]`: polynomial in `n` multiplying family `j` at angle `i`.
    polys: Vec<Vec<Vec<f64>>>,
    active: Vec<bool>,
    /// `cur[j][i]`, `prev[j][i]`: family `j` at degree `n - j` and one below.
    cur: Vec<Vec<f64>>,
    prev: Vec<Vec<f64>>,
    alpha: f64,
    beta: f64,
    n: usize,
}

impl ThetaBatch {
    pub fn new(plan: &DerivativePlan, p: &JacobiParams, thetas: &[f64]) -> Self {
        let fams = plan.order + 1;
        let at: Vec<Vec<Vec<f64>>> = thetas.iter().map(|&th| plan.at(th)).collect();
        let polys: Vec<Vec<Vec<f64>>> = (0..fams).map(|j| at.iter().map(|a| a[j].clone()).collect()).collect();
        let active = polys.iter().map(|col| col.iter().any(|q| !q.is_empty())).collect();
        let m = thetas.len();
        Self {
            xs: thetas.iter().map(|t| t.cos()).collect(),
            polys,
            active,
            cur: vec![vec![1.0; m]; fams],
            prev: vec![vec![0.0; m]; fams],
            alpha: p.alpha,
            beta: p.beta,
            n: 0,
        }
    }

    /// Writes the values at the current `n` into `out`, then advances.
    pub fn next_raw(&mut self, out: &mut [f64]) {
        let n = self.n;
        let nf = n as f64;
        out.fill(0.0);
        for j in 0..self.cur.len().min(n + 1) {
            let (cur, prev) = (&mut self.cur[j], &mut self.prev[j]);
            if self.active[j] {
                for ((o, q), c) in out.iter_mut().zip(&self.polys[j]).zip(cur.iter()) {
                    if !q.is_empty() {
                        *o += poly_eval(q, nf) * c;
                    }
                }
            }
            let (a, b) = (self.alpha + j as f64, self.beta + j as f64);
            let deg = n - j;
            if deg == 0 {
                let (c0, c1) = (a + 1.0 - 0.5 * (a + b + 2.0), 0.5 * (a + b + 2.0));
                for ((c, p), &x) in cur.iter_mut().zip(prev.iter_mut()).zip(&self.xs) {
                    *p = *c;
                    *c = c0 + c1 * x;
                }
            } else {
                let d = (deg + 1) as f64;
                let s = 2.0 * d + a + b;
                let inv = 1.0 / (2.0 * d * (d + a + b) * (s - 2.0));
                let kx = (s - 1.0) * s * (s - 2.0) * inv;
                let k0 = (s - 1.0) * (a * a - b * b) * inv;
                let k2 = 2.0 * (d + a - 1.0) * (d + b - 1.0) * s * inv;
                for ((c, p), &x) in cur.iter_mut().zip(prev.iter_mut()).zip(&self.xs) {
                    let next = (kx * x + k0) * *c - k2 * *p;
                    *p = *c;
                    *c = next;
                }
            }
        }
        self.n += 1;
    }
}

/// How many spectral terms an `H_t`-based series uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruncationMode {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTruncation {
    pub mode: TruncationMode,
    pub n_max: usize,
    pub tail_eps: f64,
}

impl SpectralTruncation {
    /// Minimum number of terms before the adaptive rule may stop.
    pub const FLOOR: usize = 8;

    pub fn adaptive(tail_eps: f64) -> Self {
        Self { mode: TruncationMode::Adaptive, n_max: 50_000, tail_eps }
    }

    pub fn fixed(n_max: usize) -> Self {
        Self { mode: TruncationMode::Fixed, n_max, tail_eps: f64::INFINITY }
    }

    /// Adaptive default; looser for high derivatives whose multipliers grow fast.
    pub fn for_order(total_order: usize) -> Self {
        Self::adaptive(if total_order >= 4 { 1e-10 } else { 1e-12 })
    }

    pub fn term_cap(&self) -> usize {
        match self.mode {
            TruncationMode::Fixed => self.n_max + 1,
            TruncationMode::Adaptive => 10 * self.n_max,
        }
    }
}

impl Default for SpectralTruncation {
    fn default() -> Self {
        Self::adaptive(1e-12)
    }
}

/// Exclusion margin around `0` and `π` for `δ*`.
pub const ENDPOINT_MARGIN: f64 = 1e-6;

/// `δ* f(θ)` for `f = Σ c_n 𝒫_n`, with `f'` from the term algebra.
pub fn delta_star_expansion(coeffs: &[f64], p: &JacobiParams, theta: f64) -> Result<f64> {
    if theta < ENDPOINT_MARGIN || theta > std::f64::consts::PI - ENDPOINT_MARGIN {
        return Err(Error::EndpointProximity { theta, margin: ENDPOINT_MARGIN });
    }
    let mut f = 0.0;
    let mut df = 0.0;
    for (n, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            f += c * normalized(n, p, theta);
            df += c * delta_normalized(n, 1, p, theta);
        }
    }
    Ok(delta_star_value(f, df, p, theta))
}

fn delta_star_value(f: f64, df: f64, p: &JacobiParams, theta: f64) -> f64 {
    let half = 0.5 * theta;
    -df - (p.alpha + 0.5) / half.tan() * f + (p.beta + 0.5) * half.tan() * f
}

/// `δ* f` on sampled data, with `f'` by second order finite differences on
/// the (possibly nonuniform) grid.
pub fn delta_star(f: &GridFunction, p: &JacobiParams) -> Result<GridFunction> {
    let x = &f.nodes;
    let y = &f.values;
    for &t in x {
        if t < ENDPOINT_MARGIN || t > std::f64::consts::PI - ENDPOINT_MARGIN {
            return Err(Error::EndpointProximity { theta: t, margin: ENDPOINT_MARGIN });
        }
    }
    let m = x.len();
    if m < 3 {
        return Err(Error::Domain("delta_star needs at least 3 samples".into()));
    }
    let deriv = |i: usize| -> f64 {
        // three-point Lagrange derivative at x[i] using a centred stencil where possible
        let (i0, i1, i2) = if i == 0 {
            (0, 1, 2)
        } else if i == m - 1 {
            (m - 3, m - 2, m - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (a, b, c) = (x[i0], x[i1], x[i2]);
        let t = x[i];
        let l0 = (2.0 * t - b - c) / ((a - b) * (a - c));
        let l1 = (2.0 * t - a - c) / ((b - a) * (b - c));
        let l2 = (2.0 * t - a - b) / ((c - a) * (c - b));
        l0 * y[i0] + l1 * y[i1] + l2 * y[i2]
    };
    let values = (0..m).map(|i| delta_star_value(y[i], deriv(i), p, x[i])).collect();
    GridFunction::new(x.clone(), values)
}
