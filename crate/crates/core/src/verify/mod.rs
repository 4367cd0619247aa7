//! Verification suites: sampled estimates of the implied constants in the
//! kernel bounds, each judged by its stability under 2× refinement.

pub mod l2;
pub mod auxiliary;
pub mod report;
pub mod sampling;
pub mod standard;

use std::time::Instant;

use crate::area::ConeGrid;
use crate::error::{Error, Result};
use crate::jacobi::{JacobiParams, SpectralTruncation};
use crate::par::map_ordered;
use crate::poisson::{DerivativeSpec, Flavor};

pub use report::{relative_delta, Verdict, VerificationReport, STABILITY_TOLERANCE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hölder exponent for the smoothness suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaChoice {
    pub gamma: f64,
    /// Set when `γ` may leave the proven range; reports then carry the flag.
    pub exploratory: bool,
}

impl GammaChoice {
    /// `0 < γ ≤ 1/2` and `γ < min(α, β) + 1`.
    pub fn theorem(gamma: f64, p: &JacobiParams) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(Error::InvalidGamma { gamma, reason: "need 0 < gamma <= 1/2".into() });
        }
        if !Self::in_range(gamma, p, true) {
            return Err(Error::InvalidGamma { gamma, reason: format!("need gamma < min(alpha, beta) + 1 = {}", p.alpha.min(p.beta) + 1.0) });
        }
        Ok(Self { gamma, exploratory: false })
    }

    /// Any positive `γ`, flagged in every report that leaves the proven range.
    pub fn exploratory(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidGamma { gamma, reason: "need gamma > 0".into() });
        }
        Ok(Self { gamma, exploratory: true })
    }

    /// `0.9 · min(1/2, min(α, β) + 1)`, strictly inside the range.
    pub fn default_for(p: &JacobiParams) -> Self {
        Self { gamma: 0.9 * (p.alpha.min(p.beta) + 1.0).min(0.5), exploratory: false }
    }

    /// `γ ∈ (0, 1/2]` and `γ < min(α,β)+1` (strict) or `≤` (closed).
    pub fn in_range(gamma: f64, p: &JacobiParams, strict: bool) -> bool {
        let cap = p.alpha.min(p.beta) + 1.0;
        gamma > 0.0 && gamma <= 0.5 && if strict { gamma < cap } else { gamma <= cap }
    }

    /// Whether a report for a bound proven on the given range is exploratory;
    /// an error if the choice was not made in exploratory mode.
    fn check(&self, p: &JacobiParams, strict: bool) -> Result<bool> {
        let inside = Self::in_range(self.gamma, p, strict);
        if !inside && !self.exploratory {
            return Err(Error::InvalidGamma { gamma: self.gamma, reason: "outside the proven range; rerun in exploratory mode".into() });
        }
        Ok(!inside)
    }
}

/// Sample sizes and discretizations shared by all suites. Refinement doubles
/// every one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub params: JacobiParams,
    pub spec: DerivativeSpec,
    pub gamma: GammaChoice,
    pub seed: u64,
    /// Random `(θ, φ)` pairs per stratum for the kernel-bound suites.
    pub pairs_per_stratum: usize,
    /// Points per axis of the nested per-stratum grids of the cone-norm suites.
    pub grid_points: usize,
    /// Pairs per stratum for the majorant-norm suite.
    pub bridge_pairs_per_stratum: usize,
    /// Samples for the pointwise suites.
    pub pointwise_samples: usize,
    pub cone: ConeGrid,
    pub upsilon_npts: usize,
    /// `(W, s)` override for the majorant suites; default `(2M+2N, L+P)`.
    pub majorant: Option<(f64, f64)>,
    pub l2_modes: usize,
    pub l2_trials: usize,
    /// `θ`-quadrature order for `L²(dμ)` norms.
    pub l2_nodes: usize,
}

impl VerifyConfig {
    pub fn new(params: JacobiParams, spec: DerivativeSpec, seed: u64) -> Self {
        Self {
            params,
            spec,
            gamma: GammaChoice::default_for(&params),
            seed,
            pairs_per_stratum: 3,
            grid_points: 2,
            bridge_pairs_per_stratum: 6,
            pointwise_samples: 2000,
            cone: ConeGrid::draft(),
            upsilon_npts: crate::upsilon::DEFAULT_NPTS,
            majorant: None,
            l2_modes: 16,
            l2_trials: 50,
            l2_nodes: 24,
        }
    }

    /// Small samples for smoke runs and determinism checks.
    pub fn quick(self) -> Self {
        Self {
            pairs_per_stratum: 1,
            grid_points: 2,
            bridge_pairs_per_stratum: 2,
            pointwise_samples: 200,
            upsilon_npts: 30,
            l2_modes: 6,
            l2_trials: 10,
            l2_nodes: 12,
            cone: ConeGrid::smoke(),
            ..self
        }
    }

    pub fn with_spec(&self, spec: DerivativeSpec) -> Self {
        Self { spec, ..self.clone() }
    }

    pub fn truncation(&self) -> SpectralTruncation {
        SpectralTruncation::for_order(self.spec.total_order())
    }

    /// `(W, s)` for the majorant suites.
    pub fn majorant(&self) -> (f64, f64) {
        self.majorant.unwrap_or((2.0 * (self.spec.m + self.spec.n) as f64, (self.spec.l + self.spec.p) as f64))
    }
}

/// Per-sample result.
#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    Value(f64),
    /// Outside the suite's hypotheses.
    Skipped,
    Failed(Error),
}

impl From<Result<f64>> for Outcome {
    fn from(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Outcome::Value(v),
            Err(e) => Outcome::Failed(e),
        }
    }
}

/// Aggregate of one sample set.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    pub sup: f64,
    pub inf: f64,
    pub samples: usize,
    pub skipped: usize,
    pub failures: usize,
    pub last_error: Option<Error>,
}

impl Tally {
    pub fn collect(outcomes: Vec<Outcome>) -> Self {
        let mut t = Tally { sup: f64::NEG_INFINITY, inf: f64::INFINITY, samples: 0, skipped: 0, failures: 0, last_error: None };
        for o in outcomes {
            match o {
                Outcome::Value(v) => {
                    // NaN counts as an unbounded sample
                    let v = if v.is_nan() { f64::INFINITY } else { v };
                    t.sup = t.sup.max(v);
                    t.inf = t.inf.min(v);
                    t.samples += 1;
                }
                Outcome::Skipped => t.skipped += 1,
                Outcome::Failed(e) => {
                    t.failures += 1;
                    t.last_error = Some(e);
                }
            }
        }
        t
    }

    /// Evaluates `f` over `items` in parallel, keeping input order.
    pub fn map<T: Sync>(items: &[T], f: impl Fn(&T) -> Outcome + Sync + Send) -> Self {
        Self::collect(map_ordered(items, f))
    }

    /// As [`Tally::map`] with several outcomes per item.
    pub fn map_many<T: Sync>(items: &[T], f: impl Fn(&T) -> Vec<Outcome> + Sync + Send) -> Self {
        Self::collect(map_ordered(items, f).into_iter().flatten().collect())
    }

    /// A suite whose every sample failed is a numerical failure.
    pub fn require_values(self) -> Result<Self> {
        match (self.samples, self.last_error.clone()) {
            (0, Some(e)) => Err(e),
            _ => Ok(self),
        }
    }
}

/// Shared report fields of one suite run.
pub(crate) struct Draft<'a> {
    pub suite: &'static str,
    pub cfg: &'a VerifyConfig,
    pub flavor: String,
    pub gamma: Option<f64>,
    pub exploratory: bool,
    pub note: Option<String>,
    pub started: Instant,
}

impl<'a> Draft<'a> {
    pub fn new(suite: &'static str, cfg: &'a VerifyConfig) -> Self {
        Self { suite, cfg, flavor: cfg.spec.flavor.as_str().into(), gamma: None, exploratory: false, note: None, started: Instant::now() }
    }

    pub fn flavor(mut self, f: &str) -> Self {
        self.flavor = f.into();
        self
    }

    pub fn gamma(mut self, g: f64, exploratory: bool) -> Self {
        self.gamma = Some(g);
        self.exploratory = exploratory;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }

    /// Sup-type suite: `measuredC` is the refined sup.
    pub fn sup(self, base: Tally, refined: Tally, violation: bool) -> VerificationReport {
        let delta = relative_delta(base.sup, refined.sup);
        let verdict = Verdict::classify(delta, refined.sup, violation);
        self.finish(refined.sup, None, delta, verdict, &refined)
    }

    /// Ratio suite: `sup` and `inf` both reported; drift of either counts.
    pub fn ratio(self, base: Tally, refined: Tally) -> VerificationReport {
        let delta = relative_delta(base.sup, refined.sup).max(relative_delta(base.inf, refined.inf));
        let violation = !(refined.inf > 0.0) || refined.samples == 0;
        let c = refined.sup.max(1.0 / refined.inf);
        let verdict = Verdict::classify(delta, c, violation);
        self.finish(refined.sup, Some(refined.inf), delta, verdict, &refined)
    }

    pub fn finish(self, c: f64, inf: Option<f64>, delta: f64, verdict: Verdict, t: &Tally) -> VerificationReport {
        let cfg = self.cfg;
        VerificationReport {
            suite: self.suite.into(),
            alpha: cfg.params.alpha,
            beta: cfg.params.beta,
            m: cfg.spec.m,
            n: cfg.spec.n,
            flavor: self.flavor,
            gamma: self.gamma,
            measured_c: c,
            refinement_delta: delta,
            samples: t.samples,
            verdict,
            seed: cfg.seed,
            runtime_ms: self.started.elapsed().as_millis() as u64,
            version: VERSION.into(),
            measured_inf: inf,
            exploratory: self.exploratory,
            skipped: t.skipped,
            failures: t.failures,
            note: self.note,
        }
    }
}

/// Every runnable suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Kernel norm times ball volume.
    Growth,
    /// Kernel difference in the first variable.
    SmoothTheta,
    /// Kernel difference in the second variable, exponent 1.
    SmoothPhi,
    /// Kernel derivatives against the majorant.
    KernelBound,
    /// Same with the first variable moved inside the cone.
    ShiftedKernelBound,
    /// `t² + q` under a cone shift.
    ShiftComparability,
    /// `t`-norm of the majorant times `|θ-φ|^s μ(B)`.
    MajorantNorm,
    /// Long-time `t`-norm of sup-over-`(θ,φ)` derivative kernels.
    LongTime,
    /// Unit mass of the cone weight.
    ConeMass,
    /// Hölder bound on `√Ω` in `θ`.
    ConeWeightDiff,
    /// Mass of `Ω` where only one of two shifted points stays in `(0, π)`.
    ConeWeightExit,
    /// Majorant comparability under a small move of one argument.
    MajorantShift,
    /// `|x-y|^ξ ≲ |x^ξ - y^ξ|`.
    PowerDiff,
    /// Discrete `L²(dμ)` bound of the area integral.
    L2Bound,
}

impl Suite {
    pub const ALL: [Suite; 14] = [
        Suite::Growth,
        Suite::SmoothTheta,
        Suite::SmoothPhi,
        Suite::KernelBound,
        Suite::ShiftedKernelBound,
        Suite::ShiftComparability,
        Suite::MajorantNorm,
        Suite::LongTime,
        Suite::ConeMass,
        Suite::ConeWeightDiff,
        Suite::ConeWeightExit,
        Suite::MajorantShift,
        Suite::PowerDiff,
        Suite::L2Bound,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Suite::Growth => "growth",
            Suite::SmoothTheta => "smooth-theta",
            Suite::SmoothPhi => "smooth-phi",
            Suite::KernelBound => "Ht1",
            Suite::ShiftedKernelBound => "Ht1eta",
            Suite::ShiftComparability => "qeta",
            Suite::MajorantNorm => "finbridge",
            Suite::LongTime => "longtime",
            Suite::ConeMass => "omega",
            Suite::ConeWeightDiff => "omegadiff",
            Suite::ConeWeightExit => "omegaprime",
            Suite::MajorantShift => "upstilde",
            Suite::PowerDiff => "estxyxi",
            Suite::L2Bound => "l2",
        }
    }

    /// Case-insensitive; `gr`, `sm1`, `sm2` are accepted aliases.
    pub fn parse(s: &str) -> Option<Suite> {
        let key = s.to_ascii_lowercase();
        let alias = match key.as_str() {
            "gr" => "growth",
            "sm1" => "smooth-theta",
            "sm2" => "smooth-phi",
            other => other,
        };
        Suite::ALL.iter().copied().find(|s| s.id().to_ascii_lowercase() == alias)
    }

    /// Suites that evaluate one kernel family and so run once per flavor.
    pub fn per_flavor(&self) -> bool {
        matches!(self, Suite::Growth | Suite::SmoothTheta | Suite::SmoothPhi | Suite::L2Bound)
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<VerificationReport> {
    match suite {
        Suite::Growth => standard::check_growth(cfg),
        Suite::SmoothTheta => standard::check_smoothness_theta(cfg),
        Suite::SmoothPhi => standard::check_smoothness_phi(cfg),
        Suite::KernelBound => auxiliary::kernel_bound(cfg, false),
        Suite::ShiftedKernelBound => auxiliary::kernel_bound(cfg, true),
        Suite::ShiftComparability => auxiliary::shift_comparability(cfg),
        Suite::MajorantNorm => auxiliary::majorant_norm(cfg),
        Suite::LongTime => auxiliary::long_time(cfg),
        Suite::ConeMass => auxiliary::cone_mass(cfg),
        Suite::ConeWeightDiff => auxiliary::cone_weight_diff(cfg),
        Suite::ConeWeightExit => auxiliary::cone_weight_exit(cfg),
        Suite::MajorantShift => auxiliary::majorant_shift(cfg),
        Suite::PowerDiff => auxiliary::power_difference(cfg),
        Suite::L2Bound => l2::l2_operator_check(cfg),
    }
}

/// Derivative orders exercised by the full run.
pub const FULL_RUN_ORDERS: [(u32, u32); 5] = [(1, 0), (0, 1), (1, 1), (0, 2), (2, 1)];

/// The job list of a full run, in report order: the kernel-family suites for
/// every order in [`FULL_RUN_ORDERS`] and both flavors, then each remaining
/// suite once with `cfg` as given.
pub fn full_run_jobs(cfg: &VerifyConfig) -> Vec<(Suite, VerifyConfig)> {
    let mut jobs = Vec::new();
    for &(m, n) in &FULL_RUN_ORDERS {
        for flavor in [Flavor::Delta, Flavor::Interlaced] {
            let c = cfg.with_spec(DerivativeSpec::new(m, n, flavor));
            for s in [Suite::Growth, Suite::SmoothTheta, Suite::SmoothPhi] {
                jobs.push((s, c.clone()));
            }
        }
    }
    for s in Suite::ALL {
        if !matches!(s, Suite::Growth | Suite::SmoothTheta | Suite::SmoothPhi) {
            jobs.push((s, cfg.clone()));
        }
    }
    jobs
}

/// Runs jobs in parallel; results keep job order.
pub fn run_jobs(jobs: &[(Suite, VerifyConfig)]) -> Vec<Result<VerificationReport>> {
    map_ordered(jobs, |(s, c)| run_suite(*s, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_ranges() {
        let p = JacobiParams::new(-0.9, -0.9).unwrap();
        assert!(GammaChoice::theorem(0.05, &p).is_ok());
        assert!(matches!(GammaChoice::theorem(0.3, &p), Err(Error::InvalidGamma { .. })));
        let g = GammaChoice::exploratory(0.3).unwrap();
        assert!(g.check(&p, true).unwrap());
        let q = JacobiParams::new(0.5, 0.5).unwrap();
        assert!(GammaChoice::theorem(0.5, &q).is_ok());
        assert!(GammaChoice::theorem(0.6, &q).is_err());
        assert!(GammaChoice::theorem(0.0, &q).is_err());
        // the closed range admits the endpoint, the strict one does not
        let r = JacobiParams::new(-0.6, 0.0).unwrap();
        let cap = r.alpha + 1.0;
        assert!(GammaChoice::in_range(cap, &r, false));
        assert!(!GammaChoice::in_range(cap, &r, true));
        assert!((GammaChoice::default_for(&q).gamma - 0.45).abs() < 1e-15);
        assert!((GammaChoice::default_for(&p).gamma - 0.09).abs() < 1e-12);
    }

    #[test]
    fn suite_ids_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.id()), Some(s));
        }
        assert_eq!(Suite::parse("SM1"), Some(Suite::SmoothTheta));
        assert_eq!(Suite::parse("ht1eta"), Some(Suite::ShiftedKernelBound));
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn full_run_covers_orders_and_flavors() {
        let cfg = VerifyConfig::new(JacobiParams::new(0.5, 0.5).unwrap(), DerivativeSpec::new(1, 0, Flavor::Delta), 7);
        let jobs = full_run_jobs(&cfg);
        assert_eq!(jobs.len(), 5 * 2 * 3 + 11);
        for s in Suite::ALL {
            assert!(jobs.iter().any(|(j, _)| *j == s));
        }
    }
}
