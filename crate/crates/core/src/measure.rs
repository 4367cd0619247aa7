//! The measure `dμ = sin(θ/2)^{2α+1} cos(θ/2)^{2β+1} dθ` on `(0, π)`, ball
//! volumes, the cone weight `Ω`, and quadrature against `dμ` on subintervals.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::quadrature::{gauss_jacobi, gauss_legendre, QuadRule};
use crate::special::{beta_inc_pair, ln_beta};

/// Interval `(center - radius, center + radius) ∩ (0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(center > 0.0 && center < PI) {
            return Err(Error::Domain(format!("ball center {center} outside (0, pi)")));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn interval(&self) -> (f64, f64) {
        ((self.center - self.radius).max(0.0), (self.center + self.radius).min(PI))
    }

    pub fn measure(&self, p: &JacobiParams) -> f64 {
        let (a, b) = self.interval();
        measure_interval_unchecked(a, b, p)
    }
}

/// Samples of a function on an interior grid of `(0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Domain("grid nodes and values differ in length".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("grid nodes must be strictly increasing".into()));
        }
        if nodes.iter().any(|&t| !(t > 0.0 && t < PI)) {
            return Err(Error::Domain("grid nodes must lie inside (0, pi)".into()));
        }
        Ok(Self { nodes, values })
    }
}

/// Density of `μ_{α,β}` with respect to `dθ`.
pub fn density(theta: f64, p: &JacobiParams) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
    }
    Ok(density_unchecked(theta, p))
}

pub(crate) fn density_unchecked(theta: f64, p: &JacobiParams) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    s.powf(2.0 * p.alpha + 1.0) * c.powf(2.0 * p.beta + 1.0)
}

/// `μ(0, π) = B(α+1, β+1)`.
pub fn total_mass(p: &JacobiParams) -> f64 {
    ln_beta(p.alpha + 1.0, p.beta + 1.0).exp()
}

/// `(sin²(θ/2), cos²(θ/2))` without cancellation.
fn half_angle_sq(theta: f64) -> (f64, f64) {
    let (s, c) = (0.5 * theta).sin_cos();
    (s * s, c * c)
}

/// `μ(a, b)` via the incomplete Beta function in `u = sin²(θ/2)`.
pub fn measure_interval(a: f64, b: f64, p: &JacobiParams) -> Result<f64> {
    if a > b {
        return Err(Error::Ordering { a, b });
    }
    if !(a >= 0.0 && b <= PI) {
        return Err(Error::Domain(format!("interval ({a}, {b}) not inside [0, pi]")));
    }
    Ok(measure_interval_unchecked(a, b, p))
}

pub(crate) fn measure_interval_unchecked(a: f64, b: f64, p: &JacobiParams) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (ap, bp) = (p.alpha + 1.0, p.beta + 1.0);
    let (ua, uac) = half_angle_sq(a);
    let (ub, ubc) = half_angle_sq(b);
    let (ia, iac) = if a <= 0.0 { (0.0, 1.0) } else { beta_inc_pair(ua, uac, ap, bp) };
    let (ib, ibc) = if b >= PI { (1.0, 0.0) } else { beta_inc_pair(ub, ubc, ap, bp) };
    let frac = if 0.5 * (a + b) <= 0.5 * PI { ib - ia } else { iac - ibc };
    total_mass(p) * frac.max(0.0)
}

/// `V_t(θ) = μ(B(θ, t))`.
pub fn ball_volume(t: f64, theta: f64, p: &JacobiParams) -> Result<f64> {
    Ok(Ball::new(theta, t)?.measure(p))
}

/// Closed-form comparator `r (θ+r)^{2α+1} (π-θ+r)^{2β+1}` for `r < π`, `1` otherwise.
pub fn ball_volume_surrogate(r: f64, theta: f64, p: &JacobiParams) -> f64 {
    if r >= PI {
        return 1.0;
    }
    r * (theta + r).powf(2.0 * p.alpha + 1.0) * (PI - theta + r).powf(2.0 * p.beta + 1.0)
}

/// Cone weight `Ω_t(θ, η) = density(θ+η) / V_t(θ)`, zero when `θ+η ∉ (0, π)`.
pub fn omega(theta: f64, eta: f64, t: f64, p: &JacobiParams) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let psi = theta + eta;
    if !(psi > 0.0 && psi < PI) {
        return Ok(0.0);
    }
    Ok(density_unchecked(psi, p) / ball_volume(t, theta, p)?)
}

/// Gauss rules for integrating against `dμ` over subintervals of `(0, π)`,
/// absorbing the algebraic endpoint behaviour of the density at `0` and `π`.
#[derive(Debug, Clone)]
pub struct MuRules {
    p: JacobiParams,
    plain: QuadRule,
    left: QuadRule,
    right: QuadRule,
    both: QuadRule,
}

/// Relative distance below which an endpoint counts as touching `0` or `π`.
const NEAR_ENDPOINT: f64 = 0.1;

impl MuRules {
    pub fn new(p: JacobiParams, n: usize) -> Self {
        let (le, re) = (2.0 * p.alpha + 1.0, 2.0 * p.beta + 1.0);
        Self {
            p,
            plain: gauss_legendre(n),
            left: gauss_jacobi(n, 0.0, le),
            right: gauss_jacobi(n, re, 0.0),
            both: gauss_jacobi(n, re, le),
        }
    }

    pub fn params(&self) -> &JacobiParams {
        &self.p
    }

    pub fn order(&self) -> usize {
        self.plain.len()
    }

    fn push_rule(&self, lo: f64, hi: f64, left: bool, right: bool, sign: f64, out: &mut Vec<(f64, f64)>) {
        let (le, re) = (2.0 * self.p.alpha + 1.0, 2.0 * self.p.beta + 1.0);
        let (rule, el, er) = match (left, right) {
            (false, false) => (&self.plain, 0.0, 0.0),
            (true, false) => (&self.left, le, 0.0),
            (false, true) => (&self.right, 0.0, re),
            (true, true) => (&self.both, le, re),
        };
        let half = 0.5 * (hi - lo);
        let scale = half.powf(1.0 + el + er);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let psi = lo + half * (1.0 + x);
            let (s, c) = (0.5 * psi).sin_cos();
            let sp = if left { (s / psi).powf(le) } else { s.powf(le) };
            let cp = if right { (c / (PI - psi)).powf(re) } else { c.powf(re) };
            out.push((psi, sign * scale * w * sp * cp));
        }
    }

    /// Nodes `ψ_i` and weights `w_i` with `∫_lo^hi g dμ ≈ Σ w_i g(ψ_i)` for
    /// smooth `g`. Nodes may fall outside `[lo, hi]` (but inside `(0, π)`)
    /// when an endpoint sits close to `0` or `π`.
    pub fn nodes(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let lo = lo.max(0.0);
        let hi = hi.min(PI);
        let mut out = Vec::new();
        if hi <= lo {
            return out;
        }
        let len = hi - lo;
        let left = self.p.alpha != -0.5 && lo < NEAR_ENDPOINT * len;
        let right = self.p.beta != -0.5 && PI - hi < NEAR_ENDPOINT * len;
        let l = if left { 0.0 } else { lo };
        let r = if right { PI } else { hi };
        self.push_rule(l, r, left, right, 1.0, &mut out);
        if left && lo > 0.0 {
            self.push_rule(0.0, lo, true, false, -1.0, &mut out);
        }
        if right && hi < PI {
            self.push_rule(hi, PI, false, true, -1.0, &mut out);
        }
        out
    }

    pub fn integrate(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes(lo, hi).into_iter().map(|(x, w)| w * g(x)).sum()
    }
}

/// `∫_{|η|<t} χ_{θ+η ∈ (0,π)} Ω_t(θ, η) dη` by quadrature; equals one.
pub fn omega_mass(theta: f64, t: f64, rules: &MuRules) -> Result<f64> {
    let p = rules.params();
    let v = ball_volume(t, theta, p)?;
    Ok(rules.integrate(theta - t, theta + t, |_| 1.0) / v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::beta;

    fn params(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn density_values() {
        let c = params(-0.5, -0.5);
        assert!((density(0.7, &c).unwrap() - 1.0).abs() < 1e-15);
        let z = params(0.0, 0.0);
        assert!((density(PI / 2.0, &z).unwrap() - 0.5).abs() < 1e-15);
        let p = params(0.3, -0.7);
        for &th in &[0.1, 1.0, 2.2] {
            let d1 = density(th, &p).unwrap();
            let d2 = density(PI - th, &p.swapped()).unwrap();
            assert!((d1 - d2).abs() < 1e-14 * d1);
        }
        assert!(density(0.0, &p).is_err());
    }

    #[test]
    fn whole_interval_is_beta() {
        for &(a, b) in &[(-0.5, -0.5), (0.5, 0.5), (-0.9, 0.5), (2.0, -0.95)] {
            let p = params(a, b);
            let m = measure_interval(0.0, PI, &p).unwrap();
            assert!((m - beta(a + 1.0, b + 1.0)).abs() < 1e-12 * m);
            let rules = MuRules::new(p, 40);
            let q = rules.integrate(0.0, PI, |_| 1.0);
            assert!((q - m).abs() < 1e-12 * m);
        }
        assert!((measure_interval(0.0, PI, &params(-0.5, -0.5)).unwrap() - PI).abs() < 1e-13);
    }

    #[test]
    fn interval_basics() {
        let p = params(0.3, -0.4);
        assert_eq!(measure_interval(1.0, 1.0, &p).unwrap(), 0.0);
        assert!(matches!(measure_interval(2.0, 1.0, &p), Err(Error::Ordering { .. })));
        let c = 1.234;
        let s = measure_interval(0.0, c, &p).unwrap() + measure_interval(c, PI, &p).unwrap();
        assert!((s - total_mass(&p)).abs() < 1e-12);
    }

    #[test]
    fn ball_volume_cases() {
        let c = params(-0.5, -0.5);
        assert!((ball_volume(0.5, 1.0, &c).unwrap() - 1.0).abs() < 1e-13);
        let p = params(0.7, -0.8);
        assert!((ball_volume(4.0, 1.0, &p).unwrap() - total_mass(&p)).abs() < 1e-13);
        let mut prev = 0.0;
        for i in 1..60 {
            let v = ball_volume(i as f64 * 0.06, 0.8, &p).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(ball_volume(0.0, 1.0, &p).is_err());
        assert!(ball_volume(-1.0, 1.0, &p).is_err());
    }

    #[test]
    fn surrogate_small_radius_ratio() {
        let c = params(-0.5, -0.5);
        let r = 1e-3;
        let ratio = ball_volume(r, PI / 2.0, &c).unwrap() / ball_volume_surrogate(r, PI / 2.0, &c);
        assert!((ratio - 2.0).abs() < 1e-9);
        assert_eq!(ball_volume_surrogate(PI, 1.0, &c), 1.0);
    }

    #[test]
    fn omega_constant_for_chebyshev() {
        let c = params(-0.5, -0.5);
        let v = omega(1.5, 0.2, 0.4, &c).unwrap();
        assert!((v - 1.0 / 0.8).abs() < 1e-13);
        assert_eq!(omega(0.3, -0.5, 1.0, &c).unwrap(), 0.0);
    }

    #[test]
    fn omega_mass_is_one() {
        for &(a, b) in &[(-0.9, -0.9), (-0.9, 0.5), (0.5, -0.9), (0.5, 0.5), (3.0, -0.2)] {
            let rules = MuRules::new(params(a, b), 32);
            for &(th, t) in &[(0.01, 0.5), (1.0, 1e-3), (3.1, 0.05), (1.5, 2.0), (0.3, 0.31), (2.0, 7.0)] {
                let m = omega_mass(th, t, &rules).unwrap();
                assert!((m - 1.0).abs() < 1e-10, "({a},{b}) th={th} t={t}: {m}");
            }
        }
    }
}
