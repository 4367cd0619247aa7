//! Pointwise auxiliary suites: kernel derivatives against the majorant `Υ`,
//! comparability of `t² + q` and of `Υ`, the `t`-norm of `Υ`, the long-time
//! kernel norm, and the identities and bounds for the cone weight `Ω`.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::area::omega_diff_integral;
use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::measure::{ball_volume, measure_interval, omega_mass, MuRules};
use crate::poisson::{kernel_derivative, kernel_grid, DerivativeSpec, Flavor};
use crate::quadrature::{gauss_legendre, linear_panels};
use crate::upsilon::{q_from_gaps, upsilon, upsilon_bnorm_with, UpsilonGrid, UpsilonSpec, BNORM_PANELS};

use super::sampling::{grid_triples, log_axis, log_uniform, pairs, refined_points, stream, PairDesign, ANGLE_MARGIN};
use super::{relative_delta, Draft, GammaChoice, Outcome, Tally, Verdict, VerificationReport, VerifyConfig};

/// Largest deviation of an identity that still counts as exact.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Smallest `t` sampled by the pointwise suites.
const T_SAMPLE_MIN: f64 = 1e-3;
/// Smallest `t` sampled by the `t² + q` comparability suite.
const T_SAMPLE_MIN_Q: f64 = 1e-4;
/// Offset of the moved point as a fraction of `|θ-φ|`; the largest admissible.
const SHIFT_RATIO: f64 = 0.45;

/// Stratified pairs, each decorated with extra draws from a per-stratum stream.
fn decorate<X>(seed: u64, tag: &str, per: usize, mut f: impl FnMut(&mut ChaCha8Rng, (f64, f64)) -> X) -> Vec<X> {
    let base = pairs(seed, tag, per, &PairDesign::default());
    let mut out = Vec::with_capacity(base.len());
    for (lane, chunk) in base.chunks(per.max(1)).enumerate() {
        let mut rng = stream(seed, &format!("{tag}/extra"), lane as u64);
        out.extend(chunk.iter().map(|&pr| f(&mut rng, pr)));
    }
    out
}

fn per_stratum(total: usize) -> usize {
    total.div_ceil(4).max(1)
}

/// `(|δ-flavor| + |D-flavor|)(t, θ+η, φ) / Υ_{2M+2N, L+P}(t, θ, φ)`; `η = 0`
/// unless `shifted`.
pub fn kernel_bound(cfg: &VerifyConfig, shifted: bool) -> Result<VerificationReport> {
    cfg.spec.require_area()?;
    let suite = if shifted { "Ht1eta" } else { "Ht1" };
    let d = cfg.spec;
    let (w, s) = (2.0 * (d.m + d.n) as f64, (d.l + d.p) as f64);
    let draft = Draft::new(suite, cfg).flavor("both").note(format!("majorant W={w} s={s}, L={} P={}", d.l, d.p));
    let ups = UpsilonSpec::new(w, s, cfg.params);
    let tr = cfg.truncation();
    let specs = [DerivativeSpec { flavor: Flavor::Delta, ..d }, DerivativeSpec { flavor: Flavor::Interlaced, ..d }];
    let sample = |per: usize| {
        decorate(cfg.seed, suite, per, |rng, (th, ph)| {
            let t = log_uniform(rng, T_SAMPLE_MIN, PI);
            let eta = if shifted { (0..32).map(|_| rng.gen_range(-t..t)).find(|e| th + e > 0.0 && th + e < PI) } else { Some(0.0) };
            (t, th, ph, eta)
        })
    };
    let eval = |items: &[(f64, f64, f64, Option<f64>)], npts: usize| {
        Tally::map(items, |&(t, th, ph, eta)| {
            let Some(eta) = eta else { return Outcome::Skipped };
            let r = (|| -> Result<f64> {
                let mut lhs = 0.0;
                for sp in &specs {
                    lhs += kernel_derivative(sp, t, th + eta, ph, &cfg.params, &tr)?.value.abs();
                }
                Ok(lhs / upsilon(&ups, t, th, ph, npts)?)
            })();
            r.into()
        })
    };
    let n = per_stratum(cfg.pointwise_samples / 4);
    let base = eval(&sample(n), cfg.upsilon_npts).require_values()?;
    let refined = eval(&sample(2 * n), 2 * cfg.upsilon_npts).require_values()?;
    Ok(draft.sup(base, refined, false))
}

/// `(t² + q(θ+η, φ, u, v)) / (t² + q(θ, φ, u, v))` over the cone.
pub fn shift_comparability(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let draft = Draft::new("qeta", cfg).flavor("none");
    let sample = |per: usize| {
        decorate(cfg.seed, "qeta", per, |rng, (th, ph)| {
            let t = log_uniform(rng, T_SAMPLE_MIN_Q, PI);
            let eta = (0..32).map(|_| rng.gen_range(-t..t)).find(|e| th + e > 0.0 && th + e < PI);
            // gaps 1-u, 1-v: half uniform, half log-graded toward u, v = 1
            let gap = |rng: &mut ChaCha8Rng| if rng.gen::<bool>() { rng.gen_range(0.0..2.0) } else { log_uniform(rng, 1e-10, 2.0) };
            let (gu, gv) = (gap(rng), gap(rng));
            (t, th, ph, eta, gu, gv)
        })
    };
    let eval = |items: &[(f64, f64, f64, Option<f64>, f64, f64)]| {
        Tally::map(items, |&(t, th, ph, eta, gu, gv)| match eta {
            None => Outcome::Skipped,
            Some(e) => Outcome::Value((t * t + q_from_gaps(th + e, ph, gu, gv)) / (t * t + q_from_gaps(th, ph, gu, gv))),
        })
    };
    let n = per_stratum(cfg.pointwise_samples);
    let base = eval(&sample(n)).require_values()?;
    let refined = eval(&sample(2 * n)).require_values()?;
    Ok(draft.ratio(base, refined))
}

/// `Υ(t, θ̃, φ) / Υ(t, θ, φ)` for `|θ-φ| > 2|θ-θ̃|`, and the same with the
/// second argument moved; both directions share one sup and inf. The moved
/// point sits at the largest admissible offset toward and away from the
/// other one, over nested pair and log-`t` grids.
pub fn majorant_shift(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let (w, s) = cfg.majorant();
    let draft = Draft::new("upstilde", cfg).flavor("none").note(format!("majorant W={w} s={s}"));
    let ups = UpsilonSpec::new(w, s, cfg.params);
    let design = PairDesign { pinned_gap: None, diagonal_gap: (1e-2, 1e-1) };
    // (moved first argument, point, moved point, fixed point)
    let items = |k: usize| {
        let mut out = Vec::new();
        for first in [true, false] {
            for ratio in [SHIFT_RATIO, -SHIFT_RATIO] {
                for (a, a2, b) in grid_triples(k, &design, ratio) {
                    out.push((first, a, a2.filter(|x| *x > 0.0 && *x < PI), b));
                }
            }
        }
        out
    };
    let eval = |k: usize, kt: usize, npts: usize| {
        let ts = log_axis(T_SAMPLE_MIN, PI, kt);
        Tally::map_many(&items(k), |&(first, a, a2, b)| {
            let Some(a2) = a2 else { return vec![Outcome::Skipped] };
            let (at, moved) = if first { ((a, b), (a2, b)) } else { ((b, a), (b, a2)) };
            let grids = UpsilonGrid::new(&ups, at.0, at.1, T_SAMPLE_MIN, npts)
                .and_then(|g0| Ok((g0, UpsilonGrid::new(&ups, moved.0, moved.1, T_SAMPLE_MIN, npts)?)));
            match grids {
                Ok((g0, g1)) => ts.iter().map(|&t| Outcome::Value(g1.eval(t) / g0.eval(t))).collect(),
                Err(e) => vec![Outcome::Failed(e)],
            }
        })
    };
    // pointwise ratios are cheap next to cone norms: one more point per axis
    let k = cfg.grid_points + 1;
    let base = eval(k, 3 * k, cfg.upsilon_npts).require_values()?;
    let refined = eval(refined_points(k), refined_points(3 * k), 2 * cfg.upsilon_npts).require_values()?;
    Ok(draft.ratio(base, refined))
}

/// `‖Υ_{W,s}(·, θ, φ)‖_{L²((0,π), t^{W-1} dt)} |θ-φ|^s μ(B(θ, |θ-φ|))`.
pub fn majorant_norm(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let (w, s) = cfg.majorant();
    if !(w >= 1.0 && s >= 0.0) {
        return Err(Error::Hypothesis(format!("majorant norm needs W >= 1 and s >= 0 (got W = {w}, s = {s})")));
    }
    let draft = Draft::new("finbridge", cfg).flavor("none").note(format!("majorant W={w} s={s}; t-mesh floor max(1e-6, 1e-3|theta-phi|)"));
    let ups = UpsilonSpec::new(w, s, cfg.params);
    let eval = |items: &[(f64, f64)], panels: usize, npts: usize| {
        Tally::map(items, |&(th, ph)| {
            let d = (th - ph).abs();
            upsilon_bnorm_with(&ups, th, ph, w, panels, npts)
                .and_then(|v| Ok(v * d.powf(s) * ball_volume(d, th, &cfg.params)?))
                .into()
        })
    };
    let n = cfg.bridge_pairs_per_stratum;
    let design = PairDesign::default();
    let base = eval(&pairs(cfg.seed, "finbridge", n, &design), BNORM_PANELS, cfg.upsilon_npts).require_values()?;
    let refined = eval(&pairs(cfg.seed, "finbridge", 2 * n, &design), 2 * BNORM_PANELS, 2 * cfg.upsilon_npts).require_values()?;
    Ok(draft.sup(base, refined, false))
}

/// Slowest decay rate `√λ_n` among modes that survive the derivative.
fn slowest_rate(d: &DerivativeSpec, p: &JacobiParams) -> f64 {
    let zero_mode_survives = [Flavor::Delta, Flavor::Interlaced].iter().any(|&f| {
        let s = DerivativeSpec { flavor: f, ..*d };
        s.theta_order() == 0 && s.l == 0 && s.spectral_factor(0, p) != 0.0
    });
    p.sqrt_eigenvalue(if zero_mode_survives { 0 } else { 1 })
}

/// `‖sup_{θ,φ} (|δ-flavor| + |D-flavor|)‖_{L²((π,∞), t^{W-1} dt)}` with the
/// sup over an interior `(θ,φ)` grid of `grid` points per axis.
fn long_time_norm(cfg: &VerifyConfig, w: f64, grid: usize, panels: usize) -> Result<f64> {
    let d = cfg.spec;
    let p = &cfg.params;
    let tr = cfg.truncation();
    let angles: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) * PI / grid as f64).collect();
    let sup_at = |t: f64| -> Result<f64> {
        let a = kernel_grid(&DerivativeSpec { flavor: Flavor::Delta, ..d }, t, &angles, &angles, p, &tr)?;
        let b = kernel_grid(&DerivativeSpec { flavor: Flavor::Interlaced, ..d }, t, &angles, &angles, p, &tr)?;
        Ok(a.values.iter().zip(&b.values).map(|(x, y)| x.abs() + y.abs()).fold(0.0, f64::max))
    };
    let rate = slowest_rate(&d, p);
    let t_end = PI + 40.0 / rate;
    let edges: Vec<f64> = (0..=panels).map(|i| PI + (t_end - PI) * i as f64 / panels as f64).collect();
    let nodes = linear_panels(&edges, &gauss_legendre(6));
    let vals = crate::par::map_ordered(&nodes, |&(t, _)| sup_at(t));
    let mut acc = 0.0;
    for ((t, wt), v) in nodes.iter().zip(vals) {
        let v = v?;
        acc += wt * v * v * t.powf(w - 1.0);
    }
    // beyond t_end the sup decays at least like e^{-rate t}
    let s_end = sup_at(t_end)?;
    let denom = 2.0 * rate - (w - 1.0).max(0.0) / t_end;
    if denom > 0.0 {
        acc += s_end * s_end * t_end.powf(w - 1.0) / denom;
    }
    Ok(acc.sqrt())
}

pub fn long_time(cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.spec.require_area()?;
    let (w, _) = cfg.majorant();
    if !(w >= 1.0) {
        return Err(Error::Hypothesis(format!("long-time norm needs W >= 1 (got {w})")));
    }
    let draft = Draft::new("longtime", cfg).flavor("both").note(format!("weight t^(W-1), W={w}"));
    let grid = 4 * cfg.pairs_per_stratum.max(3);
    let base = long_time_norm(cfg, w, grid, 20)?;
    let refined = long_time_norm(cfg, w, 2 * grid, 40)?;
    let delta = relative_delta(base, refined);
    let samples = Tally { sup: refined, inf: refined, samples: (2 * grid) * (2 * grid), skipped: 0, failures: 0, last_error: None };
    Ok(draft.finish(refined, None, delta, Verdict::classify(delta, refined, false), &samples))
}

/// Relative drift of an identity residual, measured against the tolerance floor.
fn identity_delta(base: f64, refined: f64) -> f64 {
    (refined - base).abs() / base.max(IDENTITY_TOLERANCE)
}

/// `max |∫ Ω dη - 1|` over random `(θ, t, α, β)`; the first sample uses the
/// configured `(α, β)`.
pub fn cone_mass(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let draft = Draft::new("omega", cfg).flavor("none").note("alpha, beta randomized after the first sample");
    let n = (cfg.pointwise_samples / 20).max(10);
    let sample = |count: usize| {
        let mut rng = stream(cfg.seed, "omega", 0);
        (0..count)
            .map(|i| {
                let (a, b) = (rng.gen_range(-0.95..2.0), rng.gen_range(-0.95..2.0));
                let (a, b) = if i == 0 { (cfg.params.alpha, cfg.params.beta) } else { (a, b) };
                let th = if rng.gen::<bool>() { rng.gen_range(ANGLE_MARGIN..PI - ANGLE_MARGIN) } else { log_uniform(&mut rng, ANGLE_MARGIN, 0.5) };
                let th = if rng.gen::<bool>() { th } else { PI - th };
                (a, b, th, log_uniform(&mut rng, T_SAMPLE_MIN, 2.0 * PI))
            })
            .collect::<Vec<_>>()
    };
    let eval = |items: &[(f64, f64, f64, f64)], order: usize| {
        Tally::map(items, |&(a, b, th, t)| {
            JacobiParams::new(a, b)
                .and_then(|p| omega_mass(th, t, &MuRules::new(p, order)))
                .map(|m| (m - 1.0).abs())
                .into()
        })
    };
    let base = eval(&sample(n), 40).require_values()?;
    let refined = eval(&sample(2 * n), 80).require_values()?;
    let delta = identity_delta(base.sup, refined.sup);
    let violated = !(refined.sup <= IDENTITY_TOLERANCE);
    Ok(draft.finish(refined.sup, None, delta, Verdict::classify(delta, refined.sup, violated), &refined))
}

/// Pairs `(θ, θ')` and times `t` covering `|θ-θ'| ≤ t` and beyond, with `t`
/// past `π` for the long-time branch.
fn weight_samples(cfg: &VerifyConfig, tag: &str, per: usize) -> Vec<(f64, f64, f64)> {
    decorate(cfg.seed, tag, per, |rng, (th, th2)| {
        let gap = (th - th2).abs();
        let t = if rng.gen::<bool>() { log_uniform(rng, T_SAMPLE_MIN, 2.0 * PI) } else { (gap * log_uniform(rng, 1.0, 1e3)).min(2.0 * PI) };
        (th, th2, t)
    })
}

/// Nested `(θ, θ', t)` grid for the exit bound: `θ` log-graded toward both
/// endpoints, `θ'` moved toward and away from the endpoint by a log-spaced
/// gap, and `t` from the gap up to `10³` gaps, capped at `2π`.
fn exit_grid(k: usize) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for th in log_axis(ANGLE_MARGIN, 1.0, k) {
        for gap in log_axis(ANGLE_MARGIN, 1.0, k) {
            for th2 in [th - gap, th + gap] {
                for ratio in log_axis(1.0, 1e3, k) {
                    let t = (gap * ratio).min(2.0 * PI);
                    if th2 > 0.0 {
                        out.push((th, th2, t));
                        out.push((PI - th, PI - th2, t));
                    }
                }
            }
        }
    }
    out
}

/// Two-branch right side: `(|θ-θ'|/t)^{2γ}` for `t ≤ π`, `|θ-θ'|^{2γ}` beyond.
fn weight_rhs(gap: f64, t: f64, gamma: f64) -> f64 {
    if t <= PI {
        (gap / t).powf(2.0 * gamma)
    } else {
        gap.powf(2.0 * gamma)
    }
}

/// `∫ χ |√Ω_t(θ,·) - √Ω_t(θ',·)|² dη` against the two-branch bound, on the
/// strict range `γ < min(α,β) + 1`.
pub fn cone_weight_diff(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let exploratory = cfg.gamma.check(&cfg.params, true)?;
    let g = cfg.gamma.gamma;
    let draft = Draft::new("omegadiff", cfg).flavor("none").gamma(g, exploratory);
    let eval = |items: &[(f64, f64, f64)], k: usize| {
        Tally::map(items, |&(th, th2, t)| {
            omega_diff_integral(th, th2, t, &cfg.params, k).map(|lhs| lhs / weight_rhs((th - th2).abs(), t, g)).into()
        })
    };
    let n = per_stratum(cfg.pointwise_samples / 4);
    let k = cfg.cone.eta_nodes;
    let base = eval(&weight_samples(cfg, "omegadiff", n), k).require_values()?;
    let refined = eval(&weight_samples(cfg, "omegadiff", 2 * n), 2 * k).require_values()?;
    Ok(draft.sup(base, refined, false))
}

/// `∫ χ_{θ+η ∈ (0,π), θ'+η ∉ (0,π)} Ω_t(θ, η) dη`, exactly via `μ` of intervals.
pub fn exit_mass(theta: f64, theta2: f64, t: f64, p: &JacobiParams) -> Result<f64> {
    let vol = ball_volume(t, theta, p)?;
    let (lo, hi) = ((theta - t).max(0.0), (theta + t).min(PI));
    // θ'+η ≤ 0 ⇔ ψ ≤ θ-θ';  θ'+η ≥ π ⇔ ψ ≥ π+θ-θ'
    let left = (lo, hi.min(theta - theta2));
    let right = (lo.max(PI + theta - theta2), hi);
    let mut mass = 0.0;
    for (a, b) in [left, right] {
        if b > a {
            mass += measure_interval(a, b, p)?;
        }
    }
    Ok(mass / vol)
}

/// [`exit_mass`] against the two-branch bound, on the closed range
/// `γ ≤ min(α,β) + 1` this bound is proven for.
pub fn cone_weight_exit(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let exploratory = cfg.gamma.check(&cfg.params, false)?;
    let g = cfg.gamma.gamma;
    let mut draft = Draft::new("omegaprime", cfg).flavor("none").gamma(g, exploratory);
    if GammaChoice::in_range(g, &cfg.params, false) && !GammaChoice::in_range(g, &cfg.params, true) {
        draft = draft.note("gamma = min(alpha,beta)+1: admitted by this bound's closed range, not by the strict range of the others");
    }
    let eval = |items: &[(f64, f64, f64)]| {
        Tally::map(items, |&(th, th2, t)| exit_mass(th, th2, t, &cfg.params).map(|lhs| lhs / weight_rhs((th - th2).abs(), t, g)).into())
    };
    let k = cfg.grid_points + 2;
    let base = eval(&exit_grid(k)).require_values()?;
    let refined = eval(&exit_grid(refined_points(k))).require_values()?;
    Ok(draft.sup(base, refined, false))
}

/// `sup |x-y|^ξ / |x^ξ - y^ξ|` on an `n × n` grid of `[0, 4]²`, over
/// `ξ ∈ {1, 2, 1/(2γ)}`.
pub fn power_difference_constant(gamma: f64, n: usize) -> f64 {
    let xs: Vec<f64> = (0..=n).map(|i| 4.0 * i as f64 / n as f64).collect();
    let mut sup: f64 = 0.0;
    for xi in [1.0, 2.0, 1.0 / (2.0 * gamma)] {
        for &x in &xs {
            for &y in &xs {
                if x != y {
                    sup = sup.max((x - y).abs().powf(xi) / (x.powf(xi) - y.powf(xi)).abs());
                }
            }
        }
    }
    sup
}

pub fn power_difference(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let g = cfg.gamma.gamma;
    if !(g > 0.0 && g <= 0.5) {
        return Err(Error::InvalidGamma { gamma: g, reason: "the exponent 1/(2 gamma) must be at least 1".into() });
    }
    let draft = Draft::new("estxyxi", cfg).flavor("none").gamma(g, false);
    let base = power_difference_constant(g, 200);
    let refined = power_difference_constant(g, 400);
    let delta = relative_delta(base, refined);
    let t = Tally { sup: refined, inf: refined, samples: 401 * 401, skipped: 0, failures: 0, last_error: None };
    Ok(draft.finish(refined, None, delta, Verdict::classify(delta, refined, false), &t))
}
