//! `L²(dμ)` behaviour of the area integrals on finite expansions, and the
//! comparison of the area integral with the vertical g-function.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::area::{area_integral_parts, cone_gram, g_function, ConeGrid};
use crate::error::{Error, Result};
use crate::jacobi::{DerivativePlan, JacobiParams, NormStream, SpectralTruncation, ThetaStream};
use crate::measure::{ball_volume, MuRules};
use crate::par::map_ordered;
use crate::poisson::{semigroup_derivative, DerivativeSpec};
use crate::quadrature::{gauss_legendre, log_panels};

use super::sampling::stream;
use super::{relative_delta, Draft, Tally, Verdict, VerificationReport, VerifyConfig};

/// Most modes an expansion may carry.
pub const MAX_MODES: usize = 32;
/// Fewest random trials per check.
pub const MIN_TRIALS: usize = 10;
/// Relative size of a negative Gram eigenvalue that counts as a sign failure.
const PSD_TOLERANCE: f64 = 1e-9;

/// `G` with `‖S f‖²_{L²(dμ)} = aᵀ G a` for `f = Σ_{n<count} a_n 𝒫_n`,
/// `θ`-integral by an order-`order` Gauss rule for `dμ`.
pub fn l2_gram(d: &DerivativeSpec, count: usize, p: &JacobiParams, cone: &ConeGrid, order: usize) -> Result<DMatrix<f64>> {
    let nodes = MuRules::new(*p, order).nodes(0.0, PI);
    let grams = map_ordered(&nodes, |&(th, _)| cone_gram(d, th, count, p, cone));
    let mut total = DMatrix::<f64>::zeros(count, count);
    for ((_, w), g) in nodes.iter().zip(grams) {
        total += DMatrix::from_row_slice(count, count, &g?) * *w;
    }
    Ok(total)
}

/// Random unit vectors in `ℝ^count`, normalized uniform draws from `[-1,1]^count`.
pub fn unit_trials(seed: u64, count: usize, trials: usize) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, "l2/trials", 0);
    (0..trials)
        .map(|_| loop {
            let v: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                break v.into_iter().map(|x| x / n).collect();
            }
        })
        .collect()
}

fn quadratic(g: &DMatrix<f64>, a: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[i] * g[(i, j)] * a[j];
        }
    }
    acc
}

/// Outcome of one discretization level.
struct L2Level {
    ratios: Vec<f64>,
    top: f64,
    negative: bool,
}

fn l2_level(cfg: &VerifyConfig, trials: &[Vec<f64>], cone: &ConeGrid, order: usize) -> Result<L2Level> {
    let g = l2_gram(&cfg.spec, cfg.l2_modes, &cfg.params, cone, order)?;
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let max = eig.iter().copied().fold(0.0, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(L2Level {
        ratios: trials.iter().map(|a| quadratic(&g, a).max(0.0).sqrt()).collect(),
        top: max.sqrt(),
        negative: min < -PSD_TOLERANCE * max.max(f64::MIN_POSITIVE),
    })
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Per-trial ratios `‖S f‖_{L²(dμ)} / ‖f‖` at the configured discretization.
pub fn l2_ratios(cfg: &VerifyConfig) -> Result<Vec<f64>> {
    let trials = unit_trials(cfg.seed, cfg.l2_modes, cfg.l2_trials);
    Ok(l2_level(cfg, &trials, &cfg.cone, cfg.l2_nodes)?.ratios)
}

/// Sup of `‖S f‖_{L²(dμ)}` over random unit `f` with `l2_modes` modes.
/// `measuredC` is the largest trial ratio, `measuredInf` the smallest; the
/// note carries the median and the exact sup over the span.
pub fn l2_operator_check(cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.spec.require_area()?;
    if cfg.l2_modes == 0 || cfg.l2_modes > MAX_MODES {
        return Err(Error::InvalidSpec(format!("l2 check needs 1..={MAX_MODES} modes (got {})", cfg.l2_modes)));
    }
    if cfg.l2_trials < MIN_TRIALS {
        return Err(Error::InvalidSpec(format!("l2 check needs at least {MIN_TRIALS} trials (got {})", cfg.l2_trials)));
    }
    let draft = Draft::new("l2", cfg);
    let trials = unit_trials(cfg.seed, cfg.l2_modes, cfg.l2_trials);
    let base = l2_level(cfg, &trials, &cfg.cone, cfg.l2_nodes)?;
    let refined = l2_level(cfg, &trials, &cfg.cone.refined(), 2 * cfg.l2_nodes)?;
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let inf = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = relative_delta(sup(&base.ratios), sup(&refined.ratios));
    let med = median(&refined.ratios);
    let c = sup(&refined.ratios);
    let t = Tally { sup: c, inf: inf(&refined.ratios), samples: trials.len(), skipped: 0, failures: 0, last_error: None };
    let draft = draft.note(format!("modes={} median={:.6e} max/median={:.4} span-sup={:.6e}", cfg.l2_modes, med, c / med, refined.top));
    let violated = base.negative || refined.negative;
    Ok(draft.finish(c, Some(t.inf), delta, Verdict::classify(delta, c, violated), &t))
}

/// `‖S f‖`, `‖g f‖`, and the vertical norm reweighted by
/// `κ_t(ψ) = ∫_{B(ψ,t)} dμ(θ)/V_t(θ)`, all in `L²(dμ)`.
///
/// Exchanging the `θ` and `ψ` integrals turns `‖S f‖²` into
/// `∫ t^w ∫ |F(ψ,t)|² κ_t(ψ) dμ(ψ) dt`, so the weighted norm equals `‖S f‖`
/// while `‖g f‖` (the same with `κ ≡ 1`) is only comparable to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalComparison {
    pub area: f64,
    pub vertical: f64,
    pub weighted_vertical: f64,
}

impl VerticalComparison {
    pub fn vertical_gap(&self) -> f64 {
        (self.vertical - self.area).abs() / self.area
    }

    pub fn weighted_gap(&self) -> f64 {
        (self.weighted_vertical - self.area).abs() / self.area
    }
}

/// `κ_t(ψ)` with the `θ`-integral split where `V_t` changes form.
fn ball_weight(psi: f64, t: f64, p: &JacobiParams, rules: &MuRules) -> Result<f64> {
    if t >= PI {
        return Ok(1.0);
    }
    let (lo, hi) = ((psi - t).max(0.0), (psi + t).min(PI));
    let mut cuts = vec![lo, hi];
    cuts.extend([t, PI - t].into_iter().filter(|&c| c > lo && c < hi));
    cuts.sort_by(|a, b| a.total_cmp(b));
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        for (th, wt) in rules.nodes(w[0], w[1]) {
            acc += wt / ball_volume(t, th, p)?;
        }
    }
    Ok(acc)
}

/// `Σ_n a_n (spectral) δ^k𝒫_n(ψ)`-type mode values used by the long-time part.
fn mode_row(d: &DerivativeSpec, p: &JacobiParams, psi: f64, count: usize) -> Vec<f64> {
    let plan = DerivativePlan::new(d.theta_order(), p);
    let mut s = ThetaStream::new(&plan, p, psi);
    let mut norms = NormStream::new(*p);
    (0..count)
        .map(|n| {
            let v = norms.current() * s.next_raw() * d.spectral_factor(n, p);
            norms.step();
            v
        })
        .collect()
}

pub fn vertical_comparison(coeffs: &[f64], d: &DerivativeSpec, p: &JacobiParams, cone: &ConeGrid, order: usize) -> Result<VerticalComparison> {
    d.require_area()?;
    let rules = MuRules::new(*p, order);
    let tr = SpectralTruncation::default();
    let outer = rules.nodes(0.0, PI);
    let per_theta = map_ordered(&outer, |&(th, _)| -> Result<(f64, f64)> {
        let s = area_integral_parts(coeffs, d, th, p, cone, &tr)?.total_sq();
        let g = g_function(coeffs, d, th, p)?;
        Ok((s, g * g))
    });
    let (mut area, mut vertical) = (0.0, 0.0);
    for ((_, w), r) in outer.iter().zip(per_theta) {
        let (s, g) = r?;
        area += w * s;
        vertical += w * g;
    }

    // reweighted vertical norm: t < π by quadrature, t ≥ π in closed form (κ = 1)
    let w_exp = 2 * (d.m + d.n) - 1;
    let inner = |t: f64| -> Result<f64> {
        let mut cuts = vec![0.0, PI];
        cuts.extend([t, PI - t].into_iter().filter(|&c| c > 0.0 && c < PI));
        cuts.sort_by(|a, b| a.total_cmp(b));
        let mut acc = 0.0;
        for win in cuts.windows(2) {
            let nodes = rules.nodes(win[0], win[1]);
            let psis: Vec<f64> = nodes.iter().map(|n| n.0).collect();
            let f = semigroup_derivative(coeffs, d, t, &psis, p);
            for ((psi, wt), fv) in nodes.iter().zip(f) {
                acc += wt * fv * fv * ball_weight(*psi, t, p, &rules)?;
            }
        }
        Ok(acc * t.powi(w_exp as i32))
    };
    let gl = gauss_legendre(cone.t_nodes);
    let t_lo = cone.t_min;
    let tnodes = log_panels(t_lo, PI, cone.panels, &[], &gl);
    let vals = map_ordered(&tnodes, |&(t, _)| inner(t));
    let mut weighted = inner(t_lo)? * t_lo / (w_exp as f64 + 1.0);
    for ((_, w), v) in tnodes.iter().zip(vals) {
        weighted += w * v?;
    }
    let count = coeffs.len();
    let mut gram = vec![0.0; count * count];
    for (psi, wt) in rules.nodes(0.0, PI) {
        let row = mode_row(d, p, psi, count);
        for n in 0..count {
            for m in 0..count {
                gram[n * count + m] += wt * row[n] * row[m];
            }
        }
    }
    for n in 0..count {
        for m in 0..count {
            let s = p.sqrt_eigenvalue(n) + p.sqrt_eigenvalue(m);
            let v = coeffs[n] * coeffs[m] * gram[n * count + m];
            if v != 0.0 {
                weighted += v * moment_from_pi(w_exp, s);
            }
        }
    }
    Ok(VerticalComparison { area: area.sqrt(), vertical: vertical.sqrt(), weighted_vertical: weighted.max(0.0).sqrt() })
}

/// `∫_π^∞ t^w e^{-s t} dt`.
fn moment_from_pi(w: u32, s: f64) -> f64 {
    let mut acc = 0.0;
    let mut term = 1.0 / s;
    let mut pow_t = PI.powi(w as i32);
    for j in 0..=w {
        acc += term * pow_t;
        if j < w {
            term *= (w - j) as f64 / s;
            pow_t /= PI;
        }
    }
    (-s * PI).exp() * acc
}
