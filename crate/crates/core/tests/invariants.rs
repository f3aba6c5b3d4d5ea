//! Property tests for structural invariants of the core types.

use num_complex::Complex64;
use proptest::prelude::*;

use fqc_core::cutproject::{fibonacci_scheme, model_set, Window};
use fqc_core::diffraction::{autocorrelation_points, AutocorrelationOptions};
use fqc_core::geometry::{min_separation, BoxRegion, PointSet};
use fqc_core::io::{from_json, point_set_from_csv, point_set_to_csv, to_json};
use fqc_core::measures::{ft_grid, ft_point, DiscreteMeasure, FrequencyGrid};
use fqc_core::numeric::unit_phase;

fn measure_strategy() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-40.0f64..40.0, -2.0f64..2.0, -2.0f64..2.0), 1..40).prop_map(|atoms| {
        let a: Vec<(Vec<f64>, Complex64)> = atoms.into_iter().map(|(x, re, im)| (vec![x], Complex64::new(re, im))).collect();
        DiscreteMeasure::from_atoms(&a, BoxRegion::cube(1, 50.0)).unwrap()
    })
}

fn points_strategy() -> impl Strategy<Value = PointSet> {
    prop::collection::vec(-40.0f64..40.0, 2..60).prop_map(|v| PointSet::from_1d(&v, -50.0, 50.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_exact(mu in measure_strategy()) {
        let back: DiscreteMeasure = from_json(&to_json(&mu).unwrap()).unwrap();
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn csv_round_trip_keeps_coordinates(ps in points_strategy()) {
        let back = point_set_from_csv(&point_set_to_csv(&ps).unwrap()).unwrap();
        prop_assert_eq!(back.coords(), ps.coords());
    }

    #[test]
    fn transform_is_linear(mu in measure_strategy(), nu in measure_strategy(), t in -5.0f64..5.0,
                           a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (a, b) = (Complex64::new(a, 0.5), Complex64::new(b, -1.0));
        let lhs = ft_point(&mu.linear_combination(a, &nu, b).unwrap(), &[t]);
        let rhs = a * ft_point(&mu, &[t]) + b * ft_point(&nu, &[t]);
        let scale = 1.0 + mu.translation_bounded_norm() + nu.translation_bounded_norm();
        prop_assert!((lhs - rhs).norm() < 1e-10 * scale * 20.0, "{lhs} vs {rhs}");
    }

    #[test]
    fn translation_multiplies_by_phase(mu in measure_strategy(), v in -5.0f64..5.0, t in -5.0f64..5.0) {
        let moved = mu.translate(&[v]).unwrap();
        let expect = unit_phase(v * t) * ft_point(&mu, &[t]);
        let got = ft_point(&moved, &[t]);
        prop_assert!((got - expect).norm() < 1e-10 * (1.0 + mu.len() as f64), "{got} vs {expect}");
    }

    #[test]
    fn separation_scales_with_the_set(ps in points_strategy(), c in 0.1f64..10.0) {
        let d = min_separation(&ps).distance;
        let dc = min_separation(&ps.scaled(c).unwrap()).distance;
        prop_assume!(d.is_finite());
        prop_assert!((dc - c * d).abs() <= 1e-12 * c * d.max(1.0), "{dc} vs {}", c * d);
    }

    #[test]
    fn diffraction_of_a_point_set_is_nonnegative(ps in points_strategy()) {
        // Without caps or corrections the transform is |μ̂_R|²/2R.
        let r = 50.0;
        let ac = autocorrelation_points(&ps, r, &AutocorrelationOptions::default()).unwrap();
        let grid = FrequencyGrid::with_max_pitch(&[-2.0], &[2.0], 1.0 / (4.0 * r)).unwrap();
        let ft = ft_grid(&ac.measure, &grid).unwrap();
        let floor = -1e-10 * ps.len() as f64;
        prop_assert!(ft.values.iter().all(|v| v.re >= floor));
    }

    #[test]
    fn model_sets_grow_with_the_window(lo in -1.0f64..0.0, hi in 0.01f64..1.0, pad in 0.0f64..0.5) {
        let scheme = fibonacci_scheme();
        let bbox = BoxRegion::cube(1, 60.0);
        let small = model_set(&scheme, &Window::interval(lo, hi).unwrap(), &bbox).unwrap();
        let large = model_set(&scheme, &Window::interval(lo - pad, hi + pad).unwrap(), &bbox).unwrap();
        let big: Vec<f64> = large.coords().to_vec();
        prop_assert!(small.coords().iter().all(|x| big.iter().any(|y| (x - y).abs() < 1e-9)));
    }
}
