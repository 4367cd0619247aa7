//! The Jacobi-Poisson kernel `H_t(θ, φ) = Σ e^{-t√λ_n} 𝒫_n(θ) 𝒫_n(φ)` and its
//! mixed derivatives `∂_φ^L ∂_θ^P ∂_t^M δ_θ^N H_t` and `∂_φ^L ∂_θ^P ∂_t^M D_θ^N H_t`.
//!
//! Everything is evaluated term-wise on the spectral series. `∂_t` multiplies
//! the n-th summand by `-√λ_n`; `θ`/`φ` derivatives go through
//! [`DerivativePlan`]. The interlaced derivative satisfies
//! `D^N = δ^{N mod 2} (J - λ_0)^{⌊N/2⌋}`, so on the n-th summand it acts as
//! the multiplier `(λ_n - λ_0)^{⌊N/2⌋}` followed by at most one `δ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{eigenvalue, normalized, DerivativePlan, JacobiParams, NormStream, SpectralTruncation, ThetaBatch, ThetaStream, TruncationMode};

/// Smallest `t` accepted by the series evaluators unless overridden.
pub const DEFAULT_T_FLOOR: f64 = 1e-4;

/// Which higher order derivative in `θ` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    /// Iterated `δ^N`.
    #[serde(rename = "delta")]
    Delta,
    /// Interlaced `D^N = … δ δ* δ`.
    #[serde(rename = "D")]
    Interlaced,
}

impl Flavor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flavor::Delta => "delta",
            Flavor::Interlaced => "D",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" | "δ" => Ok(Flavor::Delta),
            "D" => Ok(Flavor::Interlaced),
            other => Err(Error::InvalidSpec(format!("unknown flavor `{other}` (expected delta or D)"))),
        }
    }
}

/// Selects `∂_φ^L ∂_θ^P ∂_t^M (δ^N or D^N)_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivativeSpec {
    pub m: u32,
    pub n: u32,
    pub flavor: Flavor,
    pub l: u32,
    pub p: u32,
}

impl DerivativeSpec {
    pub fn new(m: u32, n: u32, flavor: Flavor) -> Self {
        Self { m, n, flavor, l: 0, p: 0 }
    }

    pub fn with_lp(mut self, l: u32, p: u32) -> Result<Self> {
        if l > 1 || p > 1 {
            return Err(Error::InvalidSpec(format!("L and P must be 0 or 1 (got L = {l}, P = {p})")));
        }
        self.l = l;
        self.p = p;
        Ok(self)
    }

    /// The kernel itself.
    pub fn identity() -> Self {
        Self::new(0, 0, Flavor::Delta)
    }

    /// Area integrals need `M + N > 0`.
    pub fn require_area(&self) -> Result<()> {
        if self.m + self.n == 0 {
            return Err(Error::InvalidSpec("M + N > 0 is required (got M = 0, N = 0)".into()));
        }
        Ok(())
    }

    /// Number of plain `d/dθ` applied to each summand.
    pub fn theta_order(&self) -> usize {
        let base = match self.flavor {
            Flavor::Delta => self.n,
            Flavor::Interlaced => self.n % 2,
        };
        (base + self.p) as usize
    }

    /// Power of `λ_n - λ_0` multiplying each summand.
    pub fn multiplier_power(&self) -> u32 {
        match self.flavor {
            Flavor::Delta => 0,
            Flavor::Interlaced => self.n / 2,
        }
    }

    pub fn total_order(&self) -> usize {
        (self.m + 2 * self.n + self.l + self.p) as usize
    }

    /// Spectral factor `(-√λ_n)^M (λ_n - λ_0)^k` of the n-th summand.
    pub fn spectral_factor(&self, n: usize, params: &JacobiParams) -> f64 {
        let sq = params.sqrt_eigenvalue(n);
        let mut f = (-sq).powi(self.m as i32);
        let k = self.multiplier_power();
        if k > 0 {
            f *= (eigenvalue(n, params) - params.lambda0()).powi(k as i32);
        }
        f
    }
}

/// A truncated series value with its truncation record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub terms_used: usize,
    /// Largest relative magnitude among the trailing summands that triggered the stop.
    pub tail_bound: f64,
}

/// Values of one derivative kernel on a product grid `ψ_i × φ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesGrid {
    pub n_psi: usize,
    pub n_phi: usize,
    /// Row-major: `values[i * n_phi + j]`.
    pub values: Vec<f64>,
    pub terms_used: usize,
    pub tail_bound: f64,
}

impl SeriesGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_phi + j]
    }
}

fn check_angle(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < PI) {
        return Err(Error::Domain(format!("{name} = {x} outside (0, pi)")));
    }
    Ok(())
}

fn check_t(t: f64, floor: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    if t < floor {
        return Err(Error::Domain(format!("t = {t} below the evaluation floor {floor}")));
    }
    Ok(())
}

/// Evaluates `∂_φ^L ∂_θ^P ∂_t^M (δ^N | D^N)_θ H_t(ψ_i, φ_j)` for all pairs,
/// sharing the spectral stream across the grid.
pub fn kernel_grid(
    d: &DerivativeSpec,
    t: f64,
    psis: &[f64],
    phis: &[f64],
    p: &JacobiParams,
    tr: &SpectralTruncation,
) -> Result<SeriesGrid> {
    kernel_grid_with_floor(d, t, psis, phis, p, tr, DEFAULT_T_FLOOR)
}

pub fn kernel_grid_with_floor(
    d: &DerivativeSpec,
    t: f64,
    psis: &[f64],
    phis: &[f64],
    p: &JacobiParams,
    tr: &SpectralTruncation,
    t_floor: f64,
) -> Result<SeriesGrid> {
    check_t(t, t_floor)?;
    for &x in psis {
        check_angle("theta", x)?;
    }
    for &x in phis {
        check_angle("phi", x)?;
    }
    let theta_plan = DerivativePlan::new(d.theta_order(), p);
    let phi_plan = DerivativePlan::new(d.l as usize, p);
    let mut ts = ThetaBatch::new(&theta_plan, p, psis);
    let mut fs = ThetaBatch::new(&phi_plan, p, phis);
    let (npsi, nphi) = (psis.len(), phis.len());
    let mut sums = vec![0.0; npsi * nphi];
    let mut traw = vec![0.0; npsi];
    let mut fraw = vec![0.0; nphi];
    let mut norms = NormStream::new(*p);
    let cap = tr.term_cap();
    let mut quiet = 0usize;
    let mut last_tail = 0.0f64;
    let mut tail_window = [0.0f64; 3];
    let mut n = 0usize;
    loop {
        if n >= cap {
            if tr.mode == TruncationMode::Fixed {
                break;
            }
            return Err(Error::NonConvergence { t, n });
        }
        let sq = p.sqrt_eigenvalue(n);
        let damp = (-t * sq).exp();
        let cn = norms.current();
        let factor = damp * d.spectral_factor(n, p) * cn * cn;
        ts.next_raw(&mut traw);
        fs.next_raw(&mut fraw);
        let mut worst = 0.0f64;
        for i in 0..npsi {
            let a = factor * traw[i];
            for j in 0..nphi {
                let term = a * fraw[j];
                let k = i * nphi + j;
                sums[k] += term;
                let scale = sums[k].abs().max(1.0);
                // division only when the running worst is exceeded
                if term.abs() > worst * scale {
                    worst = term.abs() / scale;
                }
            }
        }
        norms.step();
        n += 1;
        if tr.mode == TruncationMode::Adaptive {
            tail_window = [tail_window[1], tail_window[2], worst];
            if worst < tr.tail_eps {
                quiet += 1;
            } else {
                quiet = 0;
            }
            // the damping guard keeps accidental zeros of the summands from stopping early
            if quiet >= 3 && n >= SpectralTruncation::FLOOR && damp < 0.5 {
                last_tail = tail_window.iter().cloned().fold(0.0, f64::max);
                break;
            }
        }
    }
    if !sums.iter().all(|v| v.is_finite()) {
        return Err(Error::NonConvergence { t, n });
    }
    Ok(SeriesGrid { n_psi: npsi, n_phi: nphi, values: sums, terms_used: n, tail_bound: last_tail })
}

/// `H_t(θ, φ)`.
pub fn poisson_kernel(t: f64, theta: f64, phi: f64, p: &JacobiParams, tr: &SpectralTruncation) -> Result<KernelValue> {
    kernel_derivative(&DerivativeSpec::identity(), t, theta, phi, p, tr)
}

/// A single mixed derivative of `H_t` at `(θ, φ)`.
pub fn kernel_derivative(
    d: &DerivativeSpec,
    t: f64,
    theta: f64,
    phi: f64,
    p: &JacobiParams,
    tr: &SpectralTruncation,
) -> Result<KernelValue> {
    let g = kernel_grid(d, t, &[theta], &[phi], p, tr)?;
    Ok(KernelValue { value: g.values[0], terms_used: g.terms_used, tail_bound: g.tail_bound })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients `c_k` of `(∂_t² - λ_0)^K = Σ_k c_k λ_0^{K-k} ∂_t^{2k}`.
pub fn iden1_coefficients(half_n: u32) -> Vec<f64> {
    (0..=half_n)
        .map(|k| {
            let sign = if (half_n - k) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(half_n, k)
        })
        .collect()
}

/// `∂_φ^L ∂_θ^P ∂_t^M D_θ^N H_t` assembled from iterated `t`-derivatives:
/// `Σ_k c_k λ_0^{⌊N/2⌋-k} ∂_φ^L ∂_θ^{P+N̄} ∂_t^{M+2k} H_t`.
pub fn iden1_expansion(
    d: &DerivativeSpec,
    t: f64,
    theta: f64,
    phi: f64,
    p: &JacobiParams,
    tr: &SpectralTruncation,
) -> Result<KernelValue> {
    if d.flavor != Flavor::Interlaced {
        return Err(Error::InvalidSpec("iden1 expansion needs the interlaced flavor".into()));
    }
    let half = d.n / 2;
    let odd = d.n % 2;
    let lam0 = p.lambda0();
    let mut value = 0.0;
    let mut terms_used = 0;
    let mut tail = 0.0f64;
    for (k, c) in iden1_coefficients(half).into_iter().enumerate() {
        let k = k as u32;
        let spec = DerivativeSpec { m: d.m + 2 * k, n: odd, flavor: Flavor::Delta, l: d.l, p: d.p };
        let kv = kernel_derivative(&spec, t, theta, phi, p, tr)?;
        value += c * lam0.powi((half - k) as i32) * kv.value;
        terms_used = terms_used.max(kv.terms_used);
        tail = tail.max(kv.tail_bound);
    }
    Ok(KernelValue { value, terms_used, tail_bound: tail })
}

/// Coefficients of `ℋ_t f` given those of `f` in the `𝒫_n` basis.
pub fn semigroup_coeffs(coeffs: &[f64], t: f64, p: &JacobiParams) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, &c)| c * (-t * p.sqrt_eigenvalue(n)).exp())
        .collect()
}

/// `ℋ_t f(θ)` for `f = Σ a_n 𝒫_n`.
pub fn semigroup_apply(coeffs: &[f64], t: f64, theta: f64, p: &JacobiParams) -> Result<f64> {
    check_angle("theta", theta)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be nonnegative")));
    }
    Ok(semigroup_coeffs(coeffs, t, p)
        .iter()
        .enumerate()
        .map(|(n, &c)| if c == 0.0 { 0.0 } else { c * normalized(n, p, theta) })
        .sum())
}

/// `∂_t^M (δ^N | D^N) ℋ_t f(ψ_i)` for a finite expansion `f`; one value per `ψ_i`.
pub fn semigroup_derivative(
    coeffs: &[f64],
    d: &DerivativeSpec,
    t: f64,
    psis: &[f64],
    p: &JacobiParams,
) -> Vec<f64> {
    let plan = DerivativePlan::new(d.theta_order(), p);
    let factors: Vec<f64> = {
        let mut norms = NormStream::new(*p);
        coeffs
            .iter()
            .enumerate()
            .map(|(n, &c)| {
                let v = c * (-t * p.sqrt_eigenvalue(n)).exp() * d.spectral_factor(n, p) * norms.current();
                norms.step();
                v
            })
            .collect()
    };
    psis.iter()
        .map(|&x| {
            let mut s = ThetaStream::new(&plan, p, x);
            factors.iter().map(|&f| f * s.next_raw()).sum()
        })
        .collect()
}
