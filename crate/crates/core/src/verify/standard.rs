//! Growth and smoothness of the vector-valued area-integral kernels:
//! `‖K(θ,φ)‖ μ(B(θ,|θ-φ|))` and the two difference bounds.

use crate::area::{b_norm, b_norm_phi_diff, b_norm_theta_diff, ConeGrid};
use crate::error::Result;
use crate::measure::ball_volume;

use super::sampling::{grid_pairs, grid_triples, refined_points, PairDesign};
use super::{Draft, Outcome, Tally, VerificationReport, VerifyConfig};

/// Gap of the pinned near-diagonal pair in the growth suite.
pub const PINNED_DIAGONAL_GAP: f64 = 1e-3;

/// `sup ‖K(θ,φ)‖_𝔹 μ(B(θ,|θ-φ|))` over explicit pairs; coincident pairs are skipped.
pub(crate) fn growth_tally(cfg: &VerifyConfig, samples: &[(f64, f64)], cone: &ConeGrid) -> Tally {
    let tr = cfg.truncation();
    Tally::map(samples, |&(th, ph)| {
        if th == ph {
            return Outcome::Skipped;
        }
        let r = b_norm(&cfg.spec, th, ph, &cfg.params, cone, &tr)
            .and_then(|v| Ok(v * ball_volume((th - ph).abs(), th, &cfg.params)?));
        r.into()
    })
}

/// `sup ‖K(θ,φ) - K(θ',φ)‖_𝔹 (|θ-φ|/|θ-θ'|)^γ μ(B(θ,|θ-φ|))`; identical
/// points contribute zero, triples violating `|θ-φ| > 2|θ-θ'|` are skipped.
pub(crate) fn smoothness_theta_tally(cfg: &VerifyConfig, gamma: f64, samples: &[(f64, Option<f64>, f64)], cone: &ConeGrid) -> Tally {
    let tr = cfg.truncation();
    Tally::map(samples, |&(th, th2, ph)| {
        let Some(th2) = th2 else { return Outcome::Skipped };
        let d = (th - ph).abs();
        if th == th2 {
            return Outcome::Value(0.0);
        }
        if !(d > 2.0 * (th - th2).abs()) {
            return Outcome::Skipped;
        }
        let r = b_norm_theta_diff(&cfg.spec, th, th2, ph, &cfg.params, cone, &tr)
            .and_then(|n| Ok(n.norm() * (d / (th - th2).abs()).powf(gamma) * ball_volume(d, th, &cfg.params)?));
        r.into()
    })
}

/// As [`smoothness_theta_tally`] with the second variable moved: samples are
/// `(θ, φ, φ')` and the weight is `(|θ-φ|/|φ-φ'|)^γ`.
pub(crate) fn smoothness_phi_tally(cfg: &VerifyConfig, gamma: f64, samples: &[(f64, f64, Option<f64>)], cone: &ConeGrid) -> Tally {
    let tr = cfg.truncation();
    Tally::map(samples, |&(th, ph, ph2)| {
        let Some(ph2) = ph2 else { return Outcome::Skipped };
        let d = (th - ph).abs();
        if ph == ph2 {
            return Outcome::Value(0.0);
        }
        if !(d > 2.0 * (ph - ph2).abs()) {
            return Outcome::Skipped;
        }
        let r = b_norm_phi_diff(&cfg.spec, th, ph, ph2, &cfg.params, cone, &tr)
            .and_then(|n| Ok(n.norm() * (d / (ph - ph2).abs()).powf(gamma) * ball_volume(d, th, &cfg.params)?));
        r.into()
    })
}

/// Fraction of the way from one point toward the other used for the
/// difference bounds; the weighted difference grows like `r^{1-γ}`, so the
/// sup sits at the largest admissible offset.
pub const OFFSET_RATIO: f64 = 0.45;

fn design(pinned: bool) -> PairDesign {
    PairDesign { pinned_gap: pinned.then_some(PINNED_DIAGONAL_GAP), diagonal_gap: (1e-2, 1e-1) }
}

pub fn check_growth(cfg: &VerifyConfig) -> Result<VerificationReport> {
    let draft = Draft::new("growth", cfg);
    cfg.spec.require_area()?;
    let k = cfg.grid_points;
    let base = growth_tally(cfg, &grid_pairs(k, &design(true)), &cfg.cone).require_values()?;
    let refined = growth_tally(cfg, &grid_pairs(refined_points(k), &design(true)), &cfg.cone.refined()).require_values()?;
    Ok(draft.sup(base, refined, false))
}

pub fn check_smoothness_theta(cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.spec.require_area()?;
    let exploratory = cfg.gamma.check(&cfg.params, true)?;
    let g = cfg.gamma.gamma;
    let draft = Draft::new("smooth-theta", cfg).gamma(g, exploratory);
    let k = cfg.grid_points;
    let base = smoothness_theta_tally(cfg, g, &grid_triples(k, &design(false), OFFSET_RATIO), &cfg.cone).require_values()?;
    let refined = smoothness_theta_tally(cfg, g, &grid_triples(refined_points(k), &design(false), OFFSET_RATIO), &cfg.cone.refined()).require_values()?;
    Ok(draft.sup(base, refined, false))
}

/// The second-variable bound is proven with exponent 1; `cfg.gamma` is not used.
pub fn check_smoothness_phi(cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.spec.require_area()?;
    let draft = Draft::new("smooth-phi", cfg).gamma(1.0, false);
    let k = cfg.grid_points;
    // (φ, φ', θ) triples read as (θ, φ, φ')
    let swap = |v: Vec<(f64, Option<f64>, f64)>| -> Vec<(f64, f64, Option<f64>)> { v.into_iter().map(|(a, a2, b)| (b, a, a2)).collect() };
    let base = smoothness_phi_tally(cfg, 1.0, &swap(grid_triples(k, &design(false), OFFSET_RATIO)), &cfg.cone).require_values()?;
    let refined = smoothness_phi_tally(cfg, 1.0, &swap(grid_triples(refined_points(k), &design(false), OFFSET_RATIO)), &cfg.cone.refined()).require_values()?;
    Ok(draft.sup(base, refined, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::JacobiParams;
    use crate::poisson::{DerivativeSpec, Flavor};

    fn cfg(a: f64, b: f64, m: u32, n: u32) -> VerifyConfig {
        VerifyConfig::new(JacobiParams::new(a, b).unwrap(), DerivativeSpec::new(m, n, Flavor::Delta), 7)
    }

    #[test]
    fn coincident_pair_is_skipped_not_evaluated() {
        let c = cfg(0.5, 0.5, 1, 0);
        let t = growth_tally(&c, &[(1.0, 1.0), (1.0, 2.0)], &ConeGrid::coarse());
        assert_eq!((t.samples, t.skipped, t.failures), (1, 1, 0));
        assert!(t.sup > 0.0 && t.sup.is_finite());
    }

    #[test]
    fn identical_points_contribute_zero() {
        let c = cfg(0.5, 0.5, 1, 0);
        let t = smoothness_theta_tally(&c, 0.5, &[(1.0, Some(1.0), 2.0)], &ConeGrid::coarse());
        assert_eq!((t.samples, t.sup), (1, 0.0));
        let t = smoothness_phi_tally(&c, 1.0, &[(1.0, 2.0, Some(2.0))], &ConeGrid::coarse());
        assert_eq!((t.samples, t.sup), (1, 0.0));
        // ill-formed triple: |θ-φ| = 1 is not > 2·0.6
        let t = smoothness_theta_tally(&c, 0.5, &[(1.0, Some(1.6), 2.0)], &ConeGrid::coarse());
        assert_eq!((t.samples, t.skipped), (0, 1));
    }

    #[test]
    fn reflection_symmetry_of_the_phi_constant() {
        // (α,β) ↔ (β,α) under θ ↦ π - θ: the kernel norms agree pointwise
        let pi = std::f64::consts::PI;
        let a = cfg(0.5, -0.3, 1, 0);
        let b = cfg(-0.3, 0.5, 1, 0);
        let s = [(0.7, 2.0, Some(2.1)), (2.5, 1.2, Some(1.0))];
        let r: Vec<_> = s.iter().map(|&(t, p, q)| (pi - t, pi - p, q.map(|q| pi - q))).collect();
        let ca = smoothness_phi_tally(&a, 1.0, &s, &ConeGrid::coarse()).sup;
        let cb = smoothness_phi_tally(&b, 1.0, &r, &ConeGrid::coarse()).sup;
        assert!((ca - cb).abs() < 0.05 * ca, "{ca} vs {cb}");
    }
}
