//! Quadrature rules: Gauss-Jacobi (Golub-Welsch with Newton polish),
//! Gauss-Legendre, a double-exponential rule for endpoint singularities,
//! and composite log-graded panel rules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::jacobi::jacobi_p;
use crate::special::ln_gamma;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn monic_recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        diag.push(d);
        if k >= 1 {
            let s = 2.0 * kf + ab;
            let beta = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off.push(beta.sqrt());
        }
    }
    (diag, off)
}

/// Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`, `a, b > -1`.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> QuadRule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let (diag, off) = monic_recurrence(n, a, b);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let nf = n as f64;
    let dscale = 0.5 * (nf + a + b + 1.0);
    let log_norm = ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0)
        + (a + b + 1.0) * std::f64::consts::LN_2;
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let p = jacobi_p(n, a, b, *x);
            let dp = dscale * jacobi_p(n - 1, a + 1.0, b + 1.0, *x);
            let step = p / dp;
            let next = *x - step;
            if next > -1.0 && next < 1.0 {
                *x = next;
            }
            if step.abs() < 1e-16 {
                break;
            }
        }
        let dp = dscale * jacobi_p(n - 1, a + 1.0, b + 1.0, *x);
        let w = (log_norm - ((1.0 - *x) * (1.0 + *x)).ln() - 2.0 * dp.abs().ln()).exp();
        weights.push(w);
    }
    QuadRule { nodes, weights }
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> QuadRule {
    gauss_jacobi(n, 0.0, 0.0)
}

/// A node of a rule on a unit interval, stored by its distances to both
/// endpoints so points near a singular endpoint keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointNode {
    pub from_left: f64,
    pub from_right: f64,
    pub weight: f64,
}

/// Double-exponential (tanh-sinh) rule on `[0, 1]` with `2k+1` nodes.
pub fn tanh_sinh(k: usize) -> Vec<EndpointNode> {
    let k = k.max(1);
    let h = 4.5 / k as f64;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::with_capacity(2 * k + 1);
    for j in -(k as i64)..=(k as i64) {
        let s = j as f64 * h;
        let u = half_pi * s.sinh();
        let from_right = 1.0 / (1.0 + (2.0 * u).exp());
        let from_left = 1.0 / (1.0 + (-2.0 * u).exp());
        // dx/ds on [0,1]: (pi/2) cosh(s) sech^2(u) / 2, sech^2 u = 4 l r
        let weight = h * half_pi * s.cosh() * 2.0 * from_left * from_right;
        if weight > 0.0 && weight.is_finite() {
            out.push(EndpointNode { from_left, from_right, weight });
        }
    }
    out
}

/// Composite Gauss-Legendre rule on `[lo, hi]` with geometrically graded
/// panels, split additionally at `breaks` inside the interval.
pub fn log_panels(lo: f64, hi: f64, panels: usize, breaks: &[f64], rule: &QuadRule) -> Vec<(f64, f64)> {
    assert!(lo > 0.0 && hi > lo && panels >= 1);
    let ratio = (hi / lo).ln() / panels as f64;
    let mut edges: Vec<f64> = (0..=panels).map(|i| lo * (ratio * i as f64).exp()).collect();
    edges[panels] = hi;
    for &b in breaks {
        if b > lo * (1.0 + 1e-12) && b < hi * (1.0 - 1e-12) {
            edges.push(b);
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs());
    linear_panels(&edges, rule)
}

/// Gauss-Legendre applied on each `[edges[i], edges[i+1]]`.
pub fn linear_panels(edges: &[f64], rule: &QuadRule) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(edges.len() * rule.len());
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
            out.push((mid + half * x, half * wt));
        }
    }
    out
}
