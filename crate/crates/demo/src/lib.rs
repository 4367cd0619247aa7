//! Browser bindings: kernel curves, cone-weight profiles and the two square
//! functions of a short Jacobi expansion.

use std::f64::consts::PI;

use wasm_bindgen::prelude::*;

use jacobi_lusin::area::{area_integral, g_function, ConeGrid};
use jacobi_lusin::jacobi::{JacobiParams, SpectralTruncation};
use jacobi_lusin::measure::omega;
use jacobi_lusin::poisson::{kernel_grid, DerivativeSpec, Flavor};

fn js(e: jacobi_lusin::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn flavor(interlaced: bool) -> Flavor {
    if interlaced {
        Flavor::Interlaced
    } else {
        Flavor::Delta
    }
}

/// `count` interior points of `(0, π)`, avoiding the endpoints.
#[wasm_bindgen]
pub fn angle_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| PI * (i as f64 + 0.5) / count as f64).collect()
}

/// `∂_t^M (δ^N | D^N) H_t(θ_i, φ)` along [`angle_grid`].
#[wasm_bindgen]
pub fn kernel_curve(alpha: f64, beta: f64, m: u32, n: u32, interlaced: bool, t: f64, phi: f64, count: usize) -> Result<Vec<f64>, JsError> {
    let p = JacobiParams::new(alpha, beta).map_err(js)?;
    let d = DerivativeSpec::new(m, n, flavor(interlaced));
    let tr = SpectralTruncation::for_order(d.total_order());
    Ok(kernel_grid(&d, t, &angle_grid(count), &[phi], &p, &tr).map_err(js)?.values)
}

/// `Ω_t(θ, η)` at `count` points `η` across `(-t, t)`; zero outside `(0, π)`.
#[wasm_bindgen]
pub fn cone_weight_profile(alpha: f64, beta: f64, theta: f64, t: f64, count: usize) -> Result<Vec<f64>, JsError> {
    let p = JacobiParams::new(alpha, beta).map_err(js)?;
    (0..count)
        .map(|i| omega(theta, t * (2.0 * (i as f64 + 0.5) / count as f64 - 1.0), t, &p).map_err(js))
        .collect()
}

/// Area integral and vertical square function of `f = Σ c_k 𝒫_k` along
/// [`angle_grid`], interleaved as `[S(θ_0), g(θ_0), S(θ_1), ...]`.
#[wasm_bindgen]
pub fn square_functions(alpha: f64, beta: f64, m: u32, n: u32, interlaced: bool, coeffs: Vec<f64>, count: usize) -> Result<Vec<f64>, JsError> {
    let p = JacobiParams::new(alpha, beta).map_err(js)?;
    let d = DerivativeSpec::new(m, n, flavor(interlaced));
    let tr = SpectralTruncation::for_order(d.total_order());
    let cg = ConeGrid::draft();
    let mut out = Vec::with_capacity(2 * count);
    for th in angle_grid(count) {
        out.push(area_integral(&coeffs, &d, th, &p, &cg, &tr).map_err(js)?);
        out.push(g_function(&coeffs, &d, th, &p).map_err(js)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_curve_is_positive_and_peaks_near_phi() {
        let v = kernel_curve(-0.5, -0.5, 0, 0, false, 0.2, 1.0, 60).unwrap();
        let grid = angle_grid(60);
        let (i, _) = v.iter().enumerate().fold((0, f64::MIN), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        assert!(v.iter().all(|&x| x > 0.0));
        assert!((grid[i] - 1.0).abs() < 0.1);
    }

    #[test]
    fn profile_vanishes_past_the_endpoint() {
        let w = cone_weight_profile(0.5, 0.5, 0.2, 0.5, 40).unwrap();
        assert_eq!(w[0], 0.0);
        assert!(w[39] > 0.0);
    }

    #[test]
    fn square_functions_are_positive() {
        let v = square_functions(0.5, 0.5, 1, 0, false, vec![0.0, 1.0, 0.0, 1.0], 3).unwrap();
        assert_eq!(v.len(), 6);
        assert!(v.iter().all(|&x| x > 0.0));
    }
}
