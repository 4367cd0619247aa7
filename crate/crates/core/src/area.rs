//! Mixed Lusin area integrals, their vector-valued kernels and norms in
//! `𝔹 = L²(Γ, t^{2M+2N-1} dη dt)`, and the vertical g-functions.
//!
//! All cone integrals go through one engine. The integrand is
//! `t^w |Σ_c coef_c F_c(θ_c+η, t) √Ω_t(θ_c, η)|²` with `F_c` either a
//! derivative kernel `∂…H_t(·, φ_c)` or a derivative of `ℋ_t f`. The
//! `η`-integral uses tanh-sinh on the pieces cut out by the indicators, so the
//! algebraic density singularities at `0` and `π` are absorbed. The
//! `t`-integral runs over log-graded panels on `[t_lo, T]`. Below `t_lo` the
//! integrand scales like `t^w`. Above `T ≥ π` the `η`-range no longer
//! depends on `t`, and the tail is summed exactly per spectral mode.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{DerivativePlan, JacobiParams, NormStream, SpectralTruncation, ThetaStream};
use crate::measure::{ball_volume, total_mass};
use crate::par::map_ordered;
use crate::poisson::{kernel_grid_with_floor, semigroup_derivative, DerivativeSpec, DEFAULT_T_FLOOR};
use crate::quadrature::{gauss_legendre, log_panels, tanh_sinh};
use crate::special::ln_gamma;

/// Gap kept between kernel evaluation points and the endpoints `0`, `π`.
const EVAL_MARGIN: f64 = 1e-12;
/// Spectral modes carried in the exact long-time tail.
const TAIL_MODES: usize = 32;
/// `t_lo` is at most this fraction of the smallest kernel separation.
const NEAR_ZERO_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailMode {
    /// Drop `t > T_max`.
    #[serde(rename = "truncate")]
    Truncate,
    /// Add the exact `t > T_max` contribution of the leading modes.
    #[serde(rename = "analytic-bound")]
    AnalyticBound,
}

/// Discretization of the cone `Γ = {(η, t) : |η| < t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeGrid {
    /// Lower end of the `t`-mesh for expansion integrands.
    pub t_min: f64,
    pub t_max: f64,
    /// Log-spaced `t` panels up to `t_max`.
    pub panels: usize,
    /// Gauss-Legendre nodes per `t` panel.
    pub t_nodes: usize,
    /// Tanh-sinh half-width per `η` piece (`2 eta_nodes + 1` points).
    pub eta_nodes: usize,
    pub tail_mode: TailMode,
}

impl Default for ConeGrid {
    fn default() -> Self {
        Self { t_min: 1e-3, t_max: PI, panels: 24, t_nodes: 6, eta_nodes: 32, tail_mode: TailMode::AnalyticBound }
    }
}

impl ConeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(Error::InvalidSpec(format!("cone grid needs 0 < t_min < t_max (got {} and {})", self.t_min, self.t_max)));
        }
        if self.tail_mode == TailMode::AnalyticBound && self.t_max < PI {
            return Err(Error::InvalidSpec(format!("analytic tail needs t_max >= pi (got {})", self.t_max)));
        }
        if self.panels == 0 || self.t_nodes == 0 || self.eta_nodes < 2 {
            return Err(Error::InvalidSpec("cone grid sizes must be positive".into()));
        }
        Ok(())
    }

    /// Every discretization dimension doubled.
    pub fn refined(&self) -> Self {
        Self { panels: 2 * self.panels, eta_nodes: 2 * self.eta_nodes, ..*self }
    }

    /// Smaller grid for quick runs.
    pub fn coarse() -> Self {
        Self { panels: 16, t_nodes: 5, eta_nodes: 24, ..Self::default() }
    }

    /// Cheapest grid still accurate to about `1e-3` on kernel norms; the base
    /// level of the sampled verification suites.
    pub fn draft() -> Self {
        Self { panels: 8, t_nodes: 4, eta_nodes: 12, ..Self::default() }
    }

    /// Smoke-test grid; kernel norms only to a few percent.
    pub fn smoke() -> Self {
        Self { panels: 4, t_nodes: 3, eta_nodes: 8, ..Self::default() }
    }
}

/// What a cone component carries along `ψ = θ_c + η`.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    /// `∂_φ^L ∂_ψ^P ∂_t^M (δ^N | D^N)_ψ H_t(ψ, φ)`.
    Kernel { phi: f64 },
    /// `∂_t^M (δ^N | D^N) ℋ_t f(ψ)` with `f = Σ coeffs[n] 𝒫_n`.
    Expansion { coeffs: &'a [f64] },
}

/// One signed term `coef · F(θ + η, t) √Ω_t(θ, η)` of a cone integrand.
#[derive(Debug, Clone, Copy)]
pub struct Component<'a> {
    pub theta: f64,
    pub coef: f64,
    pub source: Source<'a>,
}

/// Squared cone norm split by origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConeNorm {
    /// `∫_{t_lo}^{T}`.
    pub main: f64,
    /// `∫_0^{t_lo}` from the `t^w` scaling at `t_lo`.
    pub near_zero: f64,
    /// `∫_T^∞`, exact over the leading modes.
    pub tail: f64,
    pub t_lo: f64,
}

impl ConeNorm {
    pub fn total_sq(&self) -> f64 {
        self.main + self.near_zero + self.tail
    }

    pub fn norm(&self) -> f64 {
        self.total_sq().max(0.0).sqrt()
    }
}

/// A quadrature node in `η` with the endpoint gaps of every component.
struct EtaNode {
    weight: f64,
    /// Per component: `(ψ, gap to 0, gap to π)`, or `None` outside `(0, π)`.
    slots: Vec<Option<(f64, f64, f64)>>,
}

fn eta_nodes(thetas: &[f64], lo: f64, hi: f64, k: usize) -> Vec<EtaNode> {
    let mut cuts = vec![lo, hi];
    for &th in thetas {
        for c in [-th, PI - th] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let rule = tanh_sinh(k);
    let mut out = Vec::new();
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let len = b - a;
        let active: Vec<bool> = thetas.iter().map(|&th| a >= -th && b <= PI - th).collect();
        if !active.iter().any(|&x| x) {
            continue;
        }
        for node in &rule {
            let slots = thetas
                .iter()
                .zip(&active)
                .map(|(&th, &on)| {
                    if !on {
                        return None;
                    }
                    let left = if a == -th { len * node.from_left } else { th + a + len * node.from_left };
                    let right = if b == PI - th { len * node.from_right } else { PI - th - b + len * node.from_right };
                    if left <= 0.0 || right <= 0.0 {
                        return None;
                    }
                    let psi = if node.from_left <= node.from_right { left } else { PI - right };
                    Some((psi, left, right))
                })
                .collect();
            out.push(EtaNode { weight: len * node.weight, slots });
        }
    }
    out
}

fn density_from_gaps(left: f64, right: f64, p: &JacobiParams) -> f64 {
    let ls = (0.5 * left).sin().ln();
    let rs = (0.5 * right).sin().ln();
    ((2.0 * p.alpha + 1.0) * ls + (2.0 * p.beta + 1.0) * rs).exp()
}

fn clamp_eval(psi: f64) -> f64 {
    psi.clamp(EVAL_MARGIN, PI - EVAL_MARGIN)
}

/// `∫_T^∞ t^w e^{-s t} dt` for integer `w ≥ 0`.
fn exp_moment(w: u32, s: f64, big_t: f64) -> f64 {
    let mut acc = 0.0;
    let mut term = 1.0 / s;
    // term_j = w!/(w-j)! T^{w-j} / s^{j+1}
    let mut pow_t = big_t.powi(w as i32);
    for j in 0..=w {
        acc += term * pow_t;
        if j < w {
            term *= (w - j) as f64 / s;
            pow_t /= big_t;
        }
    }
    (-s * big_t).exp() * acc
}

/// `δ^k 𝒫_n(ψ)` for `n < count` (normalized).
fn mode_values(plan: &DerivativePlan, p: &JacobiParams, psi: f64, count: usize) -> Vec<f64> {
    let mut s = ThetaStream::new(plan, p, psi);
    let mut norms = NormStream::new(*p);
    (0..count)
        .map(|_| {
            let v = norms.current() * s.next_raw();
            norms.step();
            v
        })
        .collect()
}

struct Engine<'a> {
    d: DerivativeSpec,
    comps: &'a [Component<'a>],
    p: JacobiParams,
    tr: SpectralTruncation,
    w: u32,
    k_eta: usize,
    thetas: Vec<f64>,
    t_floor: f64,
}

impl<'a> Engine<'a> {
    fn new(d: &DerivativeSpec, comps: &'a [Component<'a>], p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<Self> {
        d.require_area()?;
        cg.validate()?;
        for c in comps {
            if !(c.theta > 0.0 && c.theta < PI) {
                return Err(Error::Domain(format!("theta = {} outside (0, pi)", c.theta)));
            }
            if let Source::Kernel { phi } = c.source {
                if !(phi > 0.0 && phi < PI) {
                    return Err(Error::Domain(format!("phi = {phi} outside (0, pi)")));
                }
            }
        }
        Ok(Self {
            d: *d,
            comps,
            p: *p,
            tr: *tr,
            w: 2 * (d.m + d.n) - 1,
            k_eta: cg.eta_nodes.max(1),
            thetas: comps.iter().map(|c| c.theta).collect(),
            t_floor: DEFAULT_T_FLOOR,
        })
    }

    /// `∫ |Σ_c coef_c F_c √Ω_c|² dη` at a fixed `t`.
    fn eta_integral(&self, t: f64) -> Result<f64> {
        let nodes = eta_nodes(&self.thetas, -t, t, self.k_eta);
        let vols: Vec<f64> = self.thetas.iter().map(|&th| ball_volume(t, th, &self.p)).collect::<Result<_>>()?;
        let mut values = vec![vec![0.0; nodes.len()]; self.comps.len()];
        for (ci, comp) in self.comps.iter().enumerate() {
            let idx: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].slots[ci].is_some()).collect();
            if idx.is_empty() {
                continue;
            }
            let psis: Vec<f64> = idx.iter().map(|&i| clamp_eval(nodes[i].slots[ci].unwrap().0)).collect();
            let f = match comp.source {
                Source::Kernel { phi } => kernel_grid_with_floor(&self.d, t, &psis, &[phi], &self.p, &self.tr, self.t_floor)?.values,
                Source::Expansion { coeffs } => semigroup_derivative(coeffs, &self.d, t, &psis, &self.p),
            };
            for (&i, fv) in idx.iter().zip(f) {
                let (_, l, r) = nodes[i].slots[ci].unwrap();
                values[ci][i] = comp.coef * fv * (density_from_gaps(l, r, &self.p) / vols[ci]).sqrt();
            }
        }
        Ok(nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let s: f64 = values.iter().map(|v| v[i]).sum();
                n.weight * s * s
            })
            .sum())
    }

    fn integrand(&self, t: f64) -> Result<f64> {
        Ok(t.powi(self.w as i32) * self.eta_integral(t)?)
    }

    /// Exact `∫_T^∞` over the first `TAIL_MODES` modes, valid for `T ≥ π`.
    fn tail(&self, big_t: f64) -> Result<f64> {
        let nodes = eta_nodes(&self.thetas, -PI, PI, self.k_eta);
        let mass = total_mass(&self.p);
        let plan = DerivativePlan::new(self.d.theta_order(), &self.p);
        let lplan = DerivativePlan::new(self.d.l as usize, &self.p);
        let count = TAIL_MODES;
        let spectral: Vec<f64> = (0..count).map(|n| self.d.spectral_factor(n, &self.p)).collect();
        let weights_per_comp: Vec<Vec<f64>> = self
            .comps
            .iter()
            .map(|c| match c.source {
                Source::Kernel { phi } => mode_values(&lplan, &self.p, phi, count),
                Source::Expansion { coeffs } => (0..count).map(|n| coeffs.get(n).copied().unwrap_or(0.0)).collect(),
            })
            .collect();
        // h[i][n]: mode-n vector component at η-node i
        let mut h = vec![vec![0.0; count]; nodes.len()];
        for (ci, comp) in self.comps.iter().enumerate() {
            for (i, node) in nodes.iter().enumerate() {
                if let Some((psi, l, r)) = node.slots[ci] {
                    let root = (density_from_gaps(l, r, &self.p) / mass).sqrt();
                    let modes = mode_values(&plan, &self.p, clamp_eval(psi), count);
                    for n in 0..count {
                        h[i][n] += comp.coef * spectral[n] * weights_per_comp[ci][n] * modes[n] * root;
                    }
                }
            }
        }
        let mut total = 0.0;
        for n in 0..count {
            for m in 0..count {
                let gram: f64 = nodes.iter().zip(&h).map(|(node, hv)| node.weight * hv[n] * hv[m]).sum();
                if gram == 0.0 {
                    continue;
                }
                let s = self.p.sqrt_eigenvalue(n) + self.p.sqrt_eigenvalue(m);
                if s <= 0.0 {
                    return Err(Error::NonConvergence { t: big_t, n: 0 });
                }
                total += gram * exp_moment(self.w, s, big_t);
            }
        }
        Ok(total)
    }

    /// Kernel integrands are smooth in `t` below a tenth of the smallest
    /// separation; expansions start at `t_min`.
    fn t_lo(&self, cg: &ConeGrid) -> f64 {
        let mut scale = f64::INFINITY;
        for c in self.comps {
            if let Source::Kernel { phi } = c.source {
                scale = scale.min((c.theta - phi).abs());
            }
        }
        let lo = if scale.is_finite() { NEAR_ZERO_FRACTION * scale } else { cg.t_min };
        lo.max(self.t_floor).min(0.5 * cg.t_max)
    }

    fn run(&self, cg: &ConeGrid) -> Result<ConeNorm> {
        let t_lo = self.t_lo(cg);
        let mut breaks: Vec<f64> = Vec::new();
        for c in self.comps {
            breaks.push(c.theta);
            breaks.push(PI - c.theta);
            if let Source::Kernel { phi } = c.source {
                breaks.push((c.theta - phi).abs());
            }
        }
        for a in self.comps {
            for b in self.comps {
                let gap = (a.theta - b.theta).abs();
                if gap > 0.0 {
                    breaks.push(gap);
                }
            }
        }
        let gl = gauss_legendre(cg.t_nodes);
        let nodes = log_panels(t_lo, cg.t_max, cg.panels, &breaks, &gl);
        let vals = map_ordered(&nodes, |&(t, _)| self.integrand(t));
        let mut main = 0.0;
        for ((_, w), v) in nodes.iter().zip(vals) {
            main += w * v?;
        }
        let near_zero = self.integrand(t_lo)? * t_lo / (self.w as f64 + 1.0);
        let tail = match cg.tail_mode {
            TailMode::Truncate => 0.0,
            TailMode::AnalyticBound => self.tail(cg.t_max)?,
        };
        Ok(ConeNorm { main, near_zero, tail, t_lo })
    }
}

/// Squared `𝔹`-norm of `Σ_c coef_c F_c(θ_c + η, t) χ √Ω_t(θ_c, η)`.
pub fn cone_norm(d: &DerivativeSpec, comps: &[Component], p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<ConeNorm> {
    Engine::new(d, comps, p, cg, tr)?.run(cg)
}

/// One component of the kernel `S_{M,N}(θ, φ)` (or `𝒮_{M,N}`) at `(η, t)`.
pub fn s_kernel(d: &DerivativeSpec, eta: f64, t: f64, theta: f64, phi: f64, p: &JacobiParams, tr: &SpectralTruncation) -> Result<f64> {
    if !(eta.abs() < t) {
        return Err(Error::Domain(format!("(eta, t) = ({eta}, {t}) outside the cone")));
    }
    let psi = theta + eta;
    if !(psi > 0.0 && psi < PI) {
        return Ok(0.0);
    }
    let k = kernel_grid_with_floor(d, t, &[psi], &[phi], p, tr, DEFAULT_T_FLOOR)?.values[0];
    let om = crate::measure::omega(theta, eta, t, p)?;
    Ok(k * om.sqrt())
}

fn check_coincidence(theta: f64, phi: f64) -> Result<()> {
    if (theta - phi).abs() < 1e-9 {
        return Err(Error::Coincidence((theta - phi).abs()));
    }
    Ok(())
}

/// `‖S_{M,N}(θ, φ)‖_𝔹` with its quadrature breakdown.
pub fn b_norm_parts(d: &DerivativeSpec, theta: f64, phi: f64, p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<ConeNorm> {
    check_coincidence(theta, phi)?;
    cone_norm(d, &[Component { theta, coef: 1.0, source: Source::Kernel { phi } }], p, cg, tr)
}

/// `‖S_{M,N}(θ, φ)‖_𝔹` (flavor selects `S` or `𝒮`).
pub fn b_norm(d: &DerivativeSpec, theta: f64, phi: f64, p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<f64> {
    Ok(b_norm_parts(d, theta, phi, p, cg, tr)?.norm())
}

/// `‖S(θ, φ) - S(θ', φ)‖_𝔹` on a shared cone grid.
pub fn b_norm_theta_diff(d: &DerivativeSpec, theta: f64, theta2: f64, phi: f64, p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<ConeNorm> {
    check_coincidence(theta, phi)?;
    check_coincidence(theta2, phi)?;
    if theta == theta2 {
        return Ok(ConeNorm::default());
    }
    let comps = [
        Component { theta, coef: 1.0, source: Source::Kernel { phi } },
        Component { theta: theta2, coef: -1.0, source: Source::Kernel { phi } },
    ];
    cone_norm(d, &comps, p, cg, tr)
}

/// `‖S(θ, φ) - S(θ, φ')‖_𝔹` on a shared cone grid.
pub fn b_norm_phi_diff(d: &DerivativeSpec, theta: f64, phi: f64, phi2: f64, p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<ConeNorm> {
    check_coincidence(theta, phi)?;
    check_coincidence(theta, phi2)?;
    if phi == phi2 {
        return Ok(ConeNorm::default());
    }
    let comps = [
        Component { theta, coef: 1.0, source: Source::Kernel { phi } },
        Component { theta, coef: -1.0, source: Source::Kernel { phi: phi2 } },
    ];
    cone_norm(d, &comps, p, cg, tr)
}

/// `S_{M,N} f(θ)` (or `𝒮_{M,N} f(θ)`) for `f = Σ coeffs[n] 𝒫_n`.
pub fn area_integral(coeffs: &[f64], d: &DerivativeSpec, theta: f64, p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<f64> {
    area_integral_parts(coeffs, d, theta, p, cg, tr).map(|c| c.norm())
}

pub fn area_integral_parts(coeffs: &[f64], d: &DerivativeSpec, theta: f64, p: &JacobiParams, cg: &ConeGrid, tr: &SpectralTruncation) -> Result<ConeNorm> {
    if coeffs.len() > TAIL_MODES {
        return Err(Error::InvalidSpec(format!("at most {TAIL_MODES} coefficients are supported (got {})", coeffs.len())));
    }
    cone_norm(d, &[Component { theta, coef: 1.0, source: Source::Expansion { coeffs } }], p, cg, tr)
}

/// Vertical square function `(∫_0^∞ t^{2M+2N-1} |∂_t^M (δ^N|D^N) ℋ_t f(θ)|² dt)^{1/2}`,
/// summed in closed form over mode pairs.
pub fn g_function(coeffs: &[f64], d: &DerivativeSpec, theta: f64, p: &JacobiParams) -> Result<f64> {
    d.require_area()?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
    }
    let plan = DerivativePlan::new(d.theta_order(), p);
    let modes = mode_values(&plan, p, theta, coeffs.len());
    let a: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(n, &c)| c * d.spectral_factor(n, p) * modes[n])
        .collect();
    let power = 2 * (d.m + d.n);
    let ln_gam = ln_gamma(power as f64);
    let mut total = 0.0;
    for (n, &an) in a.iter().enumerate() {
        for (m, &am) in a.iter().enumerate() {
            if an == 0.0 || am == 0.0 {
                continue;
            }
            let s = p.sqrt_eigenvalue(n) + p.sqrt_eigenvalue(m);
            total += an * am * (ln_gam - power as f64 * s.ln()).exp();
        }
    }
    Ok(total.max(0.0).sqrt())
}

/// Matrix `G` (row-major, `count × count`) with `‖S f(θ)‖²_𝔹 = Σ a_n a_m G[n][m]`
/// for `f = Σ_{n<count} a_n 𝒫_n`, on the discretization of [`area_integral`].
pub fn cone_gram(d: &DerivativeSpec, theta: f64, count: usize, p: &JacobiParams, cg: &ConeGrid) -> Result<Vec<f64>> {
    d.require_area()?;
    cg.validate()?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi)")));
    }
    let w = 2 * (d.m + d.n) - 1;
    let plan = DerivativePlan::new(d.theta_order(), p);
    let spectral: Vec<f64> = (0..count).map(|n| d.spectral_factor(n, p)).collect();
    let sqrt_lam: Vec<f64> = (0..count).map(|n| p.sqrt_eigenvalue(n)).collect();
    let k = cg.eta_nodes.max(1);
    // Σ_η w_η h h^T with h_n = spectral_n δ^k𝒫_n(ψ) √(density/vol), optionally damped by e^{-t√λ_n}
    let gram_at = |t: f64, lo: f64, hi: f64, vol: f64, damp: bool| -> Vec<f64> {
        let mut g = vec![0.0; count * count];
        let mut h = vec![0.0; count];
        for node in eta_nodes(&[theta], lo, hi, k) {
            let Some((psi, l, r)) = node.slots[0] else { continue };
            let root = (density_from_gaps(l, r, p) / vol).sqrt();
            let modes = mode_values(&plan, p, clamp_eval(psi), count);
            for n in 0..count {
                let decay = if damp { (-t * sqrt_lam[n]).exp() } else { 1.0 };
                h[n] = spectral[n] * modes[n] * root * decay;
            }
            for n in 0..count {
                for m in 0..count {
                    g[n * count + m] += node.weight * h[n] * h[m];
                }
            }
        }
        g
    };
    let t_lo = cg.t_min;
    let gl = gauss_legendre(cg.t_nodes);
    let nodes = log_panels(t_lo, cg.t_max, cg.panels, &[theta, PI - theta], &gl);
    let slices = map_ordered(&nodes, |&(t, _)| -> Result<Vec<f64>> {
        let vol = ball_volume(t, theta, p)?;
        Ok(gram_at(t, -t, t, vol, true))
    });
    let mut total = vec![0.0; count * count];
    for ((t, wt), g) in nodes.iter().zip(slices) {
        let scale = wt * t.powi(w as i32);
        for (acc, v) in total.iter_mut().zip(g?) {
            *acc += scale * v;
        }
    }
    let g0 = gram_at(t_lo, -t_lo, t_lo, ball_volume(t_lo, theta, p)?, true);
    let scale = t_lo.powi(w as i32) * t_lo / (w as f64 + 1.0);
    for (acc, v) in total.iter_mut().zip(g0) {
        *acc += scale * v;
    }
    if cg.tail_mode == TailMode::AnalyticBound {
        let g = gram_at(cg.t_max, -PI, PI, total_mass(p), false);
        for n in 0..count {
            for m in 0..count {
                let v = g[n * count + m];
                if v != 0.0 {
                    total[n * count + m] += v * exp_moment(w, sqrt_lam[n] + sqrt_lam[m], cg.t_max);
                }
            }
        }
    }
    Ok(total)
}

/// `∫_{|η|<t} χ_{θ+η, θ'+η ∈ (0,π)} |√Ω_t(θ,η) - √Ω_t(θ',η)|² dη` with
/// `2k+1` tanh-sinh nodes per piece.
pub fn omega_diff_integral(theta: f64, theta2: f64, t: f64, p: &JacobiParams, k: usize) -> Result<f64> {
    for th in [theta, theta2] {
        if !(th > 0.0 && th < PI) {
            return Err(Error::Domain(format!("theta = {th} outside (0, pi)")));
        }
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let (v1, v2) = (ball_volume(t, theta, p)?, ball_volume(t, theta2, p)?);
    let mut acc = 0.0;
    for node in eta_nodes(&[theta, theta2], -t, t, k) {
        if let (Some((_, l1, r1)), Some((_, l2, r2))) = (node.slots[0], node.slots[1]) {
            let diff = (density_from_gaps(l1, r1, p) / v1).sqrt() - (density_from_gaps(l2, r2, p) / v2).sqrt();
            acc += node.weight * diff * diff;
        }
    }
    Ok(acc)
}
