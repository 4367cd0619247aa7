//! Seeded stratified samples. Every stratum draws from its own ChaCha stream,
//! so the first `n` samples of a size-`2n` request equal the size-`n` request.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closest any sampled angle comes to `0` or `π`.
pub const ANGLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    NearZero,
    NearPi,
    NearDiagonal,
    Bulk,
}

pub const STRATA: [Stratum; 4] = [Stratum::NearZero, Stratum::NearPi, Stratum::NearDiagonal, Stratum::Bulk];

/// FNV-1a, stable across platforms and toolchains.
fn fnv(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Independent stream for `(seed, tag, lane)`.
pub fn stream(seed: u64, tag: &str, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(tag));
    rng.set_stream(lane);
    rng
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn sign(rng: &mut impl Rng) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Sampling ranges for `(θ, φ)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDesign {
    /// Diagonal gaps are log-uniform in this range.
    pub diagonal_gap: (f64, f64),
    /// When set, the first near-diagonal pair has exactly this gap.
    pub pinned_gap: Option<f64>,
}

impl Default for PairDesign {
    fn default() -> Self {
        Self { diagonal_gap: (3e-3, 3e-2), pinned_gap: None }
    }
}

fn near_zero_pair(rng: &mut impl Rng) -> (f64, f64) {
    loop {
        let th = log_uniform(rng, ANGLE_MARGIN, 0.5);
        let ph = log_uniform(rng, ANGLE_MARGIN, 1.0);
        if (th - ph).abs() >= ANGLE_MARGIN {
            return (th, ph);
        }
    }
}

fn pair_in(stratum: Stratum, design: &PairDesign, index: usize, rng: &mut impl Rng) -> (f64, f64) {
    match stratum {
        Stratum::NearZero => near_zero_pair(rng),
        Stratum::NearPi => {
            let (a, b) = near_zero_pair(rng);
            (PI - a, PI - b)
        }
        Stratum::NearDiagonal => {
            let th = rng.gen_range(0.1..PI - 0.1);
            let (lo, hi) = design.diagonal_gap;
            let gap = log_uniform(rng, lo, hi);
            let gap = match design.pinned_gap {
                Some(g) if index == 0 => g,
                _ => gap,
            };
            (th, th + sign(rng) * gap)
        }
        Stratum::Bulk => loop {
            let th = rng.gen_range(0.25..PI - 0.25);
            let ph = rng.gen_range(0.25..PI - 0.25);
            if (th - ph).abs() >= 0.1 {
                return (th, ph);
            }
        },
    }
}

/// `per_stratum` pairs from each stratum, grouped by stratum.
pub fn pairs(seed: u64, tag: &str, per_stratum: usize, design: &PairDesign) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(4 * per_stratum);
    for (lane, &st) in STRATA.iter().enumerate() {
        let mut rng = stream(seed, tag, lane as u64);
        out.extend((0..per_stratum).map(|i| pair_in(st, design, i, &mut rng)));
    }
    out
}

/// `k` points from `lo` to `hi`, geometric or linear; the `2k-1` grid
/// contains the `k` grid.
fn axis(lo: f64, hi: f64, k: usize, geometric: bool) -> Vec<f64> {
    let k = k.max(2);
    (0..k)
        .map(|i| {
            let s = i as f64 / (k - 1) as f64;
            if geometric {
                lo * (hi / lo).powf(s)
            } else {
                lo + (hi - lo) * s
            }
        })
        .collect()
}

/// Resolution of the refined grid nested over a `k`-point one.
pub fn refined_points(k: usize) -> usize {
    2 * k.max(2) - 1
}

/// Deterministic `(θ, φ)` grids per stratum, nested under `k → 2k-1`.
/// Near an endpoint the bounds are close to scale invariant, so the
/// boundary strata pair a `k`-point log axis for the smaller distance to the
/// endpoint with a finer `2k-1`-point log axis for the ratio of the two
/// distances, in both orders. Near the diagonal `θ` is linear against
/// log-spaced gaps; the bulk is a shifted linear grid.
pub fn grid_pairs(k: usize, design: &PairDesign) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let scales = axis(5.0 * ANGLE_MARGIN, 0.02, k, true);
    let ratios = axis(2.0, 75.0, refined_points(k), true);
    let mut near = Vec::new();
    for &s in &scales {
        for &x in &ratios {
            near.push((s, s * x));
            near.push((s * x, s));
        }
    }
    out.extend(near.iter().copied());
    out.extend(near.iter().map(|&(a, b)| (PI - a, PI - b)));
    let (glo, ghi) = design.diagonal_gap;
    if let Some(g) = design.pinned_gap {
        out.push((0.5 * PI, 0.5 * PI + g));
    }
    for &th in &axis(0.3, PI - 0.3, k, false) {
        for &gap in &axis(glo, ghi, k, true) {
            out.push((th, if th <= 0.5 * PI { th + gap } else { th - gap }));
        }
    }
    let bulk = axis(0.25, PI - 0.35, k, false);
    for &th in &bulk {
        for &ph in &bulk {
            out.push((th, ph + 0.1));
        }
    }
    out
}

/// `(θ, θ', φ)` on [`grid_pairs`] with `θ'` a fraction `ratio < 1/2` of the
/// way from `θ` to `φ`.
pub fn grid_triples(k: usize, design: &PairDesign, ratio: f64) -> Vec<(f64, Option<f64>, f64)> {
    grid_pairs(k, design).into_iter().map(|(th, ph)| (th, Some(th + ratio * (ph - th)), ph)).collect()
}

/// `k` log-spaced values on `[lo, hi]`, nested under `k → 2k-1`.
pub fn log_axis(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    axis(lo, hi, k, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_property_and_determinism() {
        let d = PairDesign::default();
        let a = pairs(7, "x", 3, &d);
        let b = pairs(7, "x", 6, &d);
        for s in 0..4 {
            assert_eq!(&a[3 * s..3 * s + 3], &b[6 * s..6 * s + 3]);
        }
        assert_eq!(a, pairs(7, "x", 3, &d));
        assert_ne!(a, pairs(8, "x", 3, &d));
        assert_ne!(a, pairs(7, "y", 3, &d));
    }

    #[test]
    fn strata_land_where_intended() {
        let d = PairDesign { pinned_gap: Some(1e-3), ..PairDesign::default() };
        let ps = pairs(1, "strata", 50, &d);
        for &(th, ph) in &ps {
            assert!(th > 0.0 && th < PI && ph > 0.0 && ph < PI && th != ph);
        }
        assert!(ps[..50].iter().all(|&(th, _)| th <= 0.5));
        assert!(ps[50..100].iter().all(|&(th, _)| th >= PI - 0.5));
        assert!(((ps[100].0 - ps[100].1).abs() - 1e-3).abs() < 1e-15);
        assert!(ps[100..150].iter().all(|&(th, ph)| (th - ph).abs() <= 3e-2 + 1e-12));
        assert!(ps[150..].iter().all(|&(th, ph)| (th - ph).abs() >= 0.1));
    }

    #[test]
    fn grids_are_nested_and_admissible() {
        let d = PairDesign { pinned_gap: Some(1e-3), diagonal_gap: (1e-2, 1e-1) };
        let a = grid_pairs(3, &d);
        let b = grid_pairs(refined_points(3), &d);
        for p in &a {
            assert!(b.iter().any(|q| (p.0 - q.0).abs() < 1e-14 && (p.1 - q.1).abs() < 1e-14), "{p:?} lost under refinement");
        }
        for &(th, ph) in &b {
            assert!(th > 0.0 && th < PI && ph > 0.0 && ph < PI);
            assert!((th - ph).abs() >= 1e-3 - 1e-15);
        }
        for (th, th2, ph) in grid_triples(3, &d, 0.45) {
            assert!((th - ph).abs() > 2.0 * (th - th2.unwrap()).abs());
        }
    }

    #[test]
    fn triples_respect_separation() {
        for ratio in [0.45, -0.45] {
            for (th, th2, ph) in grid_triples(3, &PairDesign::default(), ratio) {
                let th2 = th2.unwrap();
                assert!((th - ph).abs() > 2.0 * (th - th2).abs());
            }
        }
    }
}
