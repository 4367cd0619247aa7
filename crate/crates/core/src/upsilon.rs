//! The probability measures `dΠ_a` on `[-1, 1]`, the quantity
//! `q(θ, φ, u, v)`, and the four-regime majorant `Υ_{W,s}(t, θ, φ)`.
//!
//! Near `θ = φ` the integrand `(t² + q)^{-E}` concentrates at `u = v = 1`
//! on a scale `~ (t² + q(θ,φ,1,1)) / sin(θ/2) sin(φ/2)`, so slot rules are
//! graded geometrically toward `u = 1` down to that scale.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jacobi::{JacobiParams, Regime};
use crate::quadrature::{gauss_jacobi, gauss_legendre, log_panels, QuadRule};
use crate::special::ln_gamma;

pub const DEFAULT_NPTS: usize = 60;
/// Number of log-spaced panels of the `t`-mesh used by [`upsilon_bnorm`].
pub const BNORM_PANELS: usize = 400;
const GRADE_RATIO: f64 = 4.0;
const GRADE_NODES: usize = 8;

/// A rule for `dΠ_a`; `gaps[i] = 1 - nodes[i]` is kept separately so nodes
/// close to `u = 1` keep full relative precision.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMeasureRule {
    pub a: f64,
    pub nodes: Vec<f64>,
    pub gaps: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PiMeasureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * f(u)).sum()
    }

    fn point_masses(a: f64) -> Self {
        Self { a, nodes: vec![-1.0, 1.0], gaps: vec![2.0, 0.0], weights: vec![0.5, 0.5] }
    }
}

fn pi_ln_normalizer(a: f64) -> f64 {
    ln_gamma(a + 1.0) - 0.5 * PI.ln() - ln_gamma(a + 0.5)
}

fn check_pi_index(a: f64) -> Result<()> {
    if !(a >= -0.5) || !a.is_finite() {
        return Err(Error::InvalidPiIndex(a));
    }
    Ok(())
}

/// Gauss rule for `dΠ_a(u) ∝ (1 - u²)^{a - 1/2} du`, normalized to mass 1.
/// `a = -1/2` gives the two point masses at `±1`.
pub fn pi_rule(a: f64, npts: usize) -> Result<PiMeasureRule> {
    check_pi_index(a)?;
    if a == -0.5 {
        return Ok(PiMeasureRule::point_masses(a));
    }
    let e = a - 0.5;
    let rule = gauss_jacobi(npts.max(1), e, e);
    let scale = 1.0 / rule.weights.iter().sum::<f64>();
    Ok(PiMeasureRule {
        a,
        gaps: rule.nodes.iter().map(|&u| 1.0 - u).collect(),
        nodes: rule.nodes,
        weights: rule.weights.iter().map(|w| w * scale).collect(),
    })
}

/// `dΠ_a` rule resolving features at distance `scale` from `u = 1`.
/// Falls back to [`pi_rule`] when `scale` is not small.
pub fn graded_pi_rule(a: f64, npts: usize, scale: f64) -> Result<PiMeasureRule> {
    check_pi_index(a)?;
    if a == -0.5 || scale >= 0.05 {
        return pi_rule(a, npts);
    }
    let e = a - 0.5;
    let ln_c = pi_ln_normalizer(a);
    let half = (npts / 2).max(GRADE_NODES);
    let mut nodes = Vec::new();
    let mut gaps = Vec::new();
    let mut weights = Vec::new();

    // u ∈ [-1, 0]: weight (1+u)^e exact, (1-u)^e smooth
    let left = gauss_jacobi(half, 0.0, e);
    for (&x, &w) in left.nodes.iter().zip(&left.weights) {
        let u = 0.5 * (x - 1.0);
        let g = 1.0 - u;
        nodes.push(u);
        gaps.push(g);
        weights.push((ln_c + w.ln() - (e + 1.0) * std::f64::consts::LN_2 + e * g.ln()).exp());
    }

    // g = 1 - u ∈ [0, scale]: weight g^e exact, (2-g)^e smooth
    let s = scale.max(1e-15);
    let first = gauss_jacobi(GRADE_NODES, 0.0, e);
    for (&x, &w) in first.nodes.iter().zip(&first.weights) {
        let g = 0.5 * s * (x + 1.0);
        nodes.push(1.0 - g);
        gaps.push(g);
        weights.push((ln_c + w.ln() + (e + 1.0) * (0.5 * s).ln() + e * (2.0 - g).ln()).exp());
    }

    // g ∈ [scale, 1]: geometric panels in y = ln g, where g^{e+1} is smooth
    let gl = gauss_legendre(GRADE_NODES);
    let mut lo = s.ln();
    while lo < 0.0 {
        let hi = (lo + GRADE_RATIO.ln()).min(0.0);
        let (mid, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let y = mid + hw * x;
            let g = y.exp();
            nodes.push(1.0 - g);
            gaps.push(g);
            weights.push(hw * w * (ln_c + y + e * (g * (2.0 - g)).ln()).exp());
        }
        lo = hi;
    }
    let mass: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= mass;
    }
    Ok(PiMeasureRule { a, nodes, gaps, weights })
}

/// `q(θ,φ,u,v) = 1 - u sin(θ/2) sin(φ/2) - v cos(θ/2) cos(φ/2)`, clamped at 0.
pub fn q_fn(theta: f64, phi: f64, u: f64, v: f64) -> f64 {
    q_from_gaps(theta, phi, 1.0 - u, 1.0 - v)
}

/// `q` written as `2 sin²((θ-φ)/4) + (1-u) sin sin + (1-v) cos cos`, which
/// has no cancellation near `u = v = 1`.
pub fn q_from_gaps(theta: f64, phi: f64, gu: f64, gv: f64) -> f64 {
    let ss = (theta / 2.0).sin() * (phi / 2.0).sin();
    let cc = (theta / 2.0).cos() * (phi / 2.0).cos();
    let d = ((theta - phi) / 4.0).sin();
    let q = 2.0 * d * d + gu * ss + gv * cc;
    if q < 1e-15 && q > -1e-15 {
        q.max(0.0)
    } else {
        q
    }
}

/// `(θ-φ)² + (1-u)θφ + (1-v)(π-θ)(π-φ)`, comparable to `q`.
pub fn q_model(theta: f64, phi: f64, u: f64, v: f64) -> f64 {
    (theta - phi).powi(2) + (1.0 - u) * theta * phi + (1.0 - v) * (PI - theta) * (PI - phi)
}

/// Parameters of `Υ_{W,s}`; the regime follows from `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsilonSpec {
    pub w: f64,
    pub s: f64,
    pub params: JacobiParams,
    pub regime: Regime,
}

impl UpsilonSpec {
    pub fn new(w: f64, s: f64, params: JacobiParams) -> Self {
        Self { w, s, params, regime: params.regime() }
    }

    /// `α + β + 3/2 + W/4 + s/2`
    pub fn exponent(&self) -> f64 {
        self.params.alpha + self.params.beta + 1.5 + self.w / 4.0 + self.s / 2.0
    }
}

/// One slot option: a rule and the `(coefficient, extra exponent)` pairs
/// multiplying the corresponding integral.
struct SlotOption {
    rule: PiMeasureRule,
    factors: Vec<(f64, f64)>,
}

fn slot_options(exp: f64, sum: f64, npts: usize, scale: f64) -> Result<Vec<SlotOption>> {
    if exp >= -0.5 {
        return Ok(vec![SlotOption { rule: graded_pi_rule(exp, npts, scale)?, factors: vec![(1.0, 0.0)] }]);
    }
    // K = 0 contributes the same point-mass integral for k = 0, 1, 2
    Ok(vec![
        SlotOption { rule: pi_rule(-0.5, npts)?, factors: vec![(1.0, 0.0); 3] },
        SlotOption {
            rule: graded_pi_rule(exp + 1.0, npts, scale)?,
            factors: vec![(1.0, 0.0), (sum, 0.5), (sum * sum, 1.0)],
        },
    ])
}

/// Precomputed `(u, v)` quadrature for `Υ` at fixed `(θ, φ)`, accurate for
/// all `t ≥ t_lo`.
pub struct UpsilonGrid {
    exponent: f64,
    constant: f64,
    blocks: Vec<Block>,
}

struct Block {
    q: Vec<f64>,
    w: Vec<f64>,
    /// `(coefficient, extra exponent)` after combining both slots.
    factors: Vec<(f64, f64)>,
}

impl UpsilonGrid {
    pub fn new(spec: &UpsilonSpec, theta: f64, phi: f64, t_lo: f64, npts: usize) -> Result<Self> {
        for (name, x) in [("theta", theta), ("phi", phi)] {
            if !(x > 0.0 && x < PI) {
                return Err(Error::Domain(format!("{name} = {x} outside (0, pi)")));
            }
        }
        let p = &spec.params;
        let (sh, ch) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let (sp, cp) = ((phi / 2.0).sin(), (phi / 2.0).cos());
        let base = t_lo * t_lo + q_from_gaps(theta, phi, 0.0, 0.0);
        let su = (0.25 * base / (sh * sp)).min(1.0);
        let sv = (0.25 * base / (ch * cp)).min(1.0);
        let us = slot_options(p.alpha, sh + sp, npts, su)?;
        let vs = slot_options(p.beta, ch + cp, npts, sv)?;
        let mut blocks = Vec::new();
        for uo in &us {
            for vo in &vs {
                let mut q = Vec::with_capacity(uo.rule.nodes.len() * vo.rule.nodes.len());
                let mut w = Vec::with_capacity(q.capacity());
                for (&gu, &wu) in uo.rule.gaps.iter().zip(&uo.rule.weights) {
                    for (&gv, &wv) in vo.rule.gaps.iter().zip(&vo.rule.weights) {
                        q.push(q_from_gaps(theta, phi, gu, gv));
                        w.push(wu * wv);
                    }
                }
                let mut factors = Vec::new();
                for &(cu, eu) in &uo.factors {
                    for &(cv, ev) in &vo.factors {
                        factors.push((cu * cv, eu + ev));
                    }
                }
                blocks.push(Block { q, w, factors });
            }
        }
        let constant = if spec.regime == Regime::I { 0.0 } else { 1.0 };
        Ok(Self { exponent: spec.exponent(), constant, blocks })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t2 = t * t;
        let mut total = self.constant;
        let mut extras: Vec<f64> = Vec::new();
        for b in &self.blocks {
            extras.clear();
            for &(_, e) in &b.factors {
                if !extras.iter().any(|&x| x == e) {
                    extras.push(e);
                }
            }
            let mut acc = vec![0.0; extras.len()];
            for (&q, &w) in b.q.iter().zip(&b.w) {
                let l = (t2 + q).ln();
                for (a, &e) in acc.iter_mut().zip(&extras) {
                    *a += w * (-(self.exponent + e) * l).exp();
                }
            }
            for &(c, e) in &b.factors {
                let k = extras.iter().position(|&x| x == e).unwrap();
                total += c * acc[k];
            }
        }
        total
    }
}

/// `Υ_{W,s}(t, θ, φ)` for `t ∈ (0, π]`.
pub fn upsilon(spec: &UpsilonSpec, t: f64, theta: f64, phi: f64, npts: usize) -> Result<f64> {
    if !(t > 0.0 && t <= PI) {
        return Err(Error::Domain(format!("t = {t} outside (0, pi]")));
    }
    Ok(UpsilonGrid::new(spec, theta, phi, t, npts)?.eval(t))
}

/// Lower end of the `t`-mesh used by [`upsilon_bnorm`].
pub fn bnorm_floor(theta: f64, phi: f64) -> f64 {
    (1e-3 * (theta - phi).abs()).max(1e-6)
}

/// `(∫_0^π Υ(t,θ,φ)² t^{W-1} dt)^{1/2}` with `panels` log-spaced panels on
/// `[t_floor, π]`; below the floor `Υ` is constant to within `O(floor²/q)`
/// and that part is added in closed form.
pub fn upsilon_bnorm_with(spec: &UpsilonSpec, theta: f64, phi: f64, wnorm: f64, panels: usize, npts: usize) -> Result<f64> {
    if (theta - phi).abs() < 1e-9 {
        return Err(Error::Coincidence((theta - phi).abs()));
    }
    if !(wnorm > 0.0) {
        return Err(Error::Domain(format!("t-weight exponent W = {wnorm} must be positive")));
    }
    let t_min = bnorm_floor(theta, phi).min(0.5);
    let grid = UpsilonGrid::new(spec, theta, phi, t_min, npts)?;
    let gl: QuadRule = gauss_legendre(3);
    let nodes = log_panels(t_min, PI, panels, &[(theta - phi).abs()], &gl);
    let mut acc = 0.0;
    for (t, w) in nodes {
        let y = grid.eval(t);
        acc += w * y * y * t.powf(wnorm - 1.0);
    }
    let y0 = grid.eval(t_min);
    acc += y0 * y0 * t_min.powf(wnorm) / wnorm;
    Ok(acc.sqrt())
}

pub fn upsilon_bnorm(spec: &UpsilonSpec, theta: f64, phi: f64, wnorm: f64) -> Result<f64> {
    upsilon_bnorm_with(spec, theta, phi, wnorm, BNORM_PANELS, DEFAULT_NPTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn pi_rule_mass_and_point_masses() {
        let r = pi_rule(-0.5, 10).unwrap();
        assert_eq!(r.nodes, vec![-1.0, 1.0]);
        assert_eq!(r.weights, vec![0.5, 0.5]);
        for &a in &[-0.4, 0.0, 0.5, 1.3, 3.0] {
            let m: f64 = pi_rule(a, 40).unwrap().weights.iter().sum();
            assert!((m - 1.0).abs() < 1e-13, "a = {a}: {m}");
        }
        assert!(pi_rule(-0.6, 10).is_err());
    }

    #[test]
    fn second_moments() {
        // ∫u² dΠ_a = 1/(2a+2): uniform at a = 1/2, semicircle at a = 1
        let m = |a: f64| pi_rule(a, 40).unwrap().integrate(|u| u * u);
        assert!((m(0.5) - 1.0 / 3.0).abs() < 1e-12);
        assert!((m(1.0) - 0.25).abs() < 1e-12);
        assert!((m(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn graded_rule_matches_plain_rule() {
        for &a in &[-0.45, 0.2, 1.5] {
            let g = graded_pi_rule(a, 40, 1e-8).unwrap();
            let mass: f64 = g.weights.iter().sum();
            assert!((mass - 1.0).abs() < 1e-12, "{a}: {mass}");
            let exact = 1.0 / (2.0 * a + 2.0);
            let m2 = g.integrate(|u| u * u);
            assert!((m2 - exact).abs() < 1e-10, "{a}: {m2} vs {exact}");
        }
    }

    #[test]
    fn graded_rule_resolves_near_endpoint_peak() {
        // ∫ (ε + 1 - u)^{-2} dΠ_1 with a dense oracle on the gap variable
        let a = 1.0;
        let eps = 1e-6;
        let g = graded_pi_rule(a, 40, eps).unwrap();
        let approx: f64 = g.gaps.iter().zip(&g.weights).map(|(&x, &w)| w * (eps + x).powi(-2)).sum();
        let c = pi_ln_normalizer(a).exp();
        let gl = gauss_legendre(30);
        let oracle: f64 = log_panels(1e-12, 2.0, 200, &[], &gl)
            .iter()
            .map(|&(x, w)| w * c * (x * (2.0 - x)).powf(a - 0.5) * (eps + x).powi(-2))
            .sum();
        assert!((approx - oracle).abs() < 1e-7 * oracle, "{approx} vs {oracle}");
    }

    #[test]
    fn q_identities() {
        for &th in &[0.2, 1.0, 2.9] {
            assert_eq!(q_fn(th, th, 1.0, 1.0), 0.0);
            for &ph in &[0.4, 1.7] {
                let expect = 2.0 * ((th - ph) / 4.0).sin().powi(2);
                assert!((q_fn(th, ph, 1.0, 1.0) - expect).abs() < 1e-15);
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 1..20 {
            for j in 1..20 {
                for &(u, v) in &[(-1.0, -1.0), (0.3, -0.7), (1.0, 1.0), (1.0, -1.0)] {
                    let (th, ph) = (i as f64 * PI / 20.0, j as f64 * PI / 20.0);
                    let q = q_fn(th, ph, u, v);
                    assert!((0.0..=2.0).contains(&q));
                    let m = q_model(th, ph, u, v);
                    if m > 0.0 {
                        lo = lo.min(q / m);
                        hi = hi.max(q / m);
                    }
                }
            }
        }
        assert!(lo > 0.0 && hi.is_finite());
    }

    #[test]
    fn shift_identity() {
        let p = params(0.3, -0.7);
        for &tau in &[-1.0, 0.5, 2.0] {
            let a = upsilon(&UpsilonSpec::new(2.0, 0.0, p), 0.4, 1.0, 1.5, 40).unwrap();
            let b = upsilon(&UpsilonSpec::new(2.0 - 2.0 * tau, tau, p), 0.4, 1.0, 1.5, 40).unwrap();
            assert!((a - b).abs() < 1e-13 * a.abs());
        }
    }

    #[test]
    fn chebyshev_point_mass_value() {
        // α = β = -1/2: four point masses of weight 1/4; (u,v) = (1,1) gives q = 0 at θ = φ
        let p = params(-0.5, -0.5);
        let spec = UpsilonSpec::new(2.0, 0.0, p);
        let (t, th) = (0.3, 1.2);
        let e = spec.exponent();
        let full = upsilon(&spec, t, th, th, 40).unwrap();
        let mut expect = 0.0;
        for &u in &[-1.0, 1.0] {
            for &v in &[-1.0, 1.0] {
                expect += 0.25 * (t * t + q_fn(th, th, u, v)).powf(-e);
            }
        }
        assert!((full - expect).abs() < 1e-13 * expect);
        assert!((0.25 * (t * t).powf(-e) - 0.25 * t.powf(-2.0 * (0.5 + 0.5))).abs() < 1e-12);
    }

    #[test]
    fn boundary_regime_matches_point_mass_slot() {
        // α = -1/2 sits in regime (i); dΠ_{-1/2} equals the K = 0 slot
        let p = params(-0.5, 0.3);
        let spec = UpsilonSpec::new(2.0, 1.0, p);
        let v = upsilon(&spec, 0.5, 0.8, 2.0, 40).unwrap();
        let rv = pi_rule(0.3, 40).unwrap();
        let e = spec.exponent();
        let mut direct = 0.0;
        for &u in &[-1.0, 1.0] {
            direct += 0.5 * rv.integrate(|x| (0.25 + q_fn(0.8, 2.0, u, x)).powf(-e));
        }
        assert!((v - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn regime_four_has_constant_floor() {
        let p = params(-0.8, -0.9);
        let spec = UpsilonSpec::new(0.0, 0.0, p);
        assert!(upsilon(&spec, 1.0, 0.5, 2.5, 30).unwrap() > 1.0);
    }

    #[test]
    fn bnorm_converges_under_refinement() {
        let p = params(0.5, 0.5);
        let spec = UpsilonSpec::new(2.0, 0.0, p);
        let a = upsilon_bnorm_with(&spec, 1.0, 1.3, 2.0, 400, 60).unwrap();
        let b = upsilon_bnorm_with(&spec, 1.0, 1.3, 2.0, 800, 120).unwrap();
        assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
        assert!(upsilon_bnorm(&spec, 1.0, 1.0, 2.0).is_err());
    }
}
