use std::f64::consts::PI;

use proptest::prelude::*;

use jacobi_lusin::jacobi::{JacobiParams, SpectralTruncation};
use jacobi_lusin::measure::{ball_volume, measure_interval, omega_mass, total_mass, MuRules};
use jacobi_lusin::poisson::poisson_kernel;
use jacobi_lusin::upsilon::{upsilon, UpsilonSpec};
use jacobi_lusin::verify::relative_delta;
use jacobi_lusin::verify::sampling::{grid_pairs, refined_points, PairDesign};

fn index() -> impl Strategy<Value = f64> {
    -0.95f64..2.0
}

fn angle() -> impl Strategy<Value = f64> {
    0.01f64..PI - 0.01
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_positive_symmetric_and_reflects(a in index(), b in index(), th in angle(), ph in angle(), t in 0.05f64..3.0) {
        let p = JacobiParams::new(a, b).unwrap();
        let q = JacobiParams::new(b, a).unwrap();
        let tr = SpectralTruncation::default();
        let h = poisson_kernel(t, th, ph, &p, &tr).unwrap().value;
        let swapped = poisson_kernel(t, ph, th, &p, &tr).unwrap().value;
        let reflected = poisson_kernel(t, PI - th, PI - ph, &q, &tr).unwrap().value;
        prop_assert!(h > 0.0);
        prop_assert!((h - swapped).abs() <= 1e-10 * h);
        prop_assert!((h - reflected).abs() <= 1e-9 * h);
    }

    #[test]
    fn measure_is_additive_and_balls_grow(a in index(), b in index(), x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0, th in angle(), t in 1e-3f64..3.0) {
        let p = JacobiParams::new(a, b).unwrap();
        let mut v = [x * PI, y * PI, z * PI];
        v.sort_by(|l, r| l.total_cmp(r));
        let whole = measure_interval(v[0], v[2], &p).unwrap();
        let parts = measure_interval(v[0], v[1], &p).unwrap() + measure_interval(v[1], v[2], &p).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-10 * total_mass(&p));
        let small = ball_volume(t, th, &p).unwrap();
        let big = ball_volume(1.5 * t, th, &p).unwrap();
        prop_assert!(small > 0.0 && big >= small);
    }

    #[test]
    fn cone_weight_has_unit_mass(a in index(), b in index(), th in 1e-3f64..PI - 1e-3, lt in (1e-3f64).ln()..(2.0 * PI).ln()) {
        let p = JacobiParams::new(a, b).unwrap();
        let m = omega_mass(th, lt.exp(), &MuRules::new(p, 40)).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-9, "mass {m}");
    }

    #[test]
    fn majorant_is_positive_and_symmetric(a in index(), b in index(), th in angle(), ph in angle(), t in 1e-3f64..PI) {
        prop_assume!((th - ph).abs() > 1e-3);
        let spec = UpsilonSpec::new(2.0, 0.0, JacobiParams::new(a, b).unwrap());
        let u = upsilon(&spec, t, th, ph, 30).unwrap();
        let w = upsilon(&spec, t, ph, th, 30).unwrap();
        prop_assert!(u > 0.0 && u.is_finite());
        prop_assert!((u - w).abs() <= 1e-8 * u, "{u} vs {w}");
    }

    #[test]
    fn relative_delta_vanishes_only_on_equality(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        let d = relative_delta(x, y);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d == 0.0, x == y);
        prop_assert_eq!(relative_delta(x, x), 0.0);
    }

    #[test]
    fn stratified_grids_nest_and_stay_admissible(k in 2usize..5, lo in 1e-3f64..1e-2) {
        let design = PairDesign { pinned_gap: Some(1e-3), diagonal_gap: (lo, 0.1) };
        let base = grid_pairs(k, &design);
        let fine = grid_pairs(refined_points(k), &design);
        for &(th, ph) in &fine {
            prop_assert!(th > 0.0 && th < PI && ph > 0.0 && ph < PI && th != ph);
        }
        for p in &base {
            prop_assert!(fine.iter().any(|q| (p.0 - q.0).abs() < 1e-13 && (p.1 - q.1).abs() < 1e-13));
        }
    }
}
