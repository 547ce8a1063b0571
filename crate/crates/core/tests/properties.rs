use proptest::prelude::*;
use weakcover::coverage::{CoverageQuery, DistanceSample};
use weakcover::geometry::unit_ball_volume;
use weakcover::intersect::{
    clt_probability, edgeworth_probability, mc_intersection_oracle, sum_moments, EdgeworthConfig,
};
use weakcover::sampling::{sample_design, SamplingScheme, SchemeKind};
use weakcover::solvers::{delta_sweep, McBudget};
use weakcover::{Point, SeededStream};

fn scheme_kind() -> impl Strategy<Value = SchemeKind> {
    prop_oneof![Just(SchemeKind::UniformDeltaCube), Just(SchemeKind::BetaDeltaCube), Just(SchemeKind::SobolDeltaCube)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_volume_recurrence(d in 3usize..=100) {
        let lhs = unit_ball_volume(d).unwrap();
        let rhs = 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn designs_stay_in_the_delta_cube(
        kind in scheme_kind(),
        dim in 1usize..12,
        n in 1usize..200,
        delta in 0.01f64..=1.0,
        alpha in 0.2f64..4.0,
        seed in any::<u64>(),
    ) {
        let scheme = SamplingScheme::build(kind, dim, delta, alpha).unwrap();
        let cube = scheme.cube();
        let a = sample_design(&scheme, n, SeededStream::new(seed, 1)).unwrap();
        prop_assert_eq!(a.len(), n);
        prop_assert!(a.iter().all(|p| cube.contains(p)));
        let b = sample_design(&scheme, n, SeededStream::new(seed, 1)).unwrap();
        prop_assert_eq!(a.as_flat(), b.as_flat());
        if kind == SchemeKind::SobolDeltaCube {
            let c = sample_design(&scheme, n, SeededStream::new(seed ^ 0x5555, 9)).unwrap();
            prop_assert_eq!(a.as_flat(), c.as_flat());
        }
    }

    #[test]
    fn approximations_are_symmetric(
        u in prop::collection::vec(0.0f64..=1.0, 2..8),
        delta in 0.1f64..=1.0,
        r in 0.05f64..2.0,
        order in 0usize..=2,
    ) {
        let cfg = EdgeworthConfig::new(order);
        let p = edgeworth_probability(&Point::new(u.clone()).unwrap(), delta, 1.0, r, cfg).unwrap().probability;
        let mut rev = u.clone();
        rev.reverse();
        let reflected: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
        for v in [rev, reflected] {
            let q = edgeworth_probability(&Point::new(v).unwrap(), delta, 1.0, r, cfg).unwrap().probability;
            prop_assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn order_zero_is_the_normal_approximation(
        u in prop::collection::vec(0.0f64..=1.0, 1..20),
        delta in 0.1f64..=1.0,
        r in 0.0f64..3.0,
    ) {
        let u = Point::new(u).unwrap();
        let e = edgeworth_probability(&u, delta, 1.0, r, EdgeworthConfig::new(0)).unwrap().probability;
        prop_assert_eq!(e, clt_probability(&u, delta, 1.0, r).unwrap());
    }

    #[test]
    fn uniform_moment_identities(
        u in prop::collection::vec(0.0f64..=1.0, 1..20),
        delta in 0.01f64..=1.0,
    ) {
        let d = u.len() as f64;
        let offset: f64 = u.iter().map(|x| (x - 0.5) * (x - 0.5)).sum();
        let m = sum_moments(&Point::new(u).unwrap(), delta, 1.0).unwrap();
        prop_assert!(m.variance > 0.0);
        let mean = offset + d * delta * delta / 12.0;
        prop_assert!((m.mean - mean).abs() <= 1e-12 * mean.max(1.0));
        prop_assert!((m.cumulant_sum(3).unwrap() - m.third_central).abs() <= 1e-15);
    }

    #[test]
    fn evaluators_are_monotone_in_r(
        u in prop::collection::vec(0.0f64..=1.0, 2..10),
        delta in 0.2f64..=1.0,
        r1 in 0.0f64..2.0,
        dr in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let u = Point::new(u).unwrap();
        let r2 = r1 + dr;
        prop_assert!(clt_probability(&u, delta, 1.0, r1).unwrap() <= clt_probability(&u, delta, 1.0, r2).unwrap());
        // Order 2 is not monotone near the clamp at 1.
        for order in 0..=1 {
            let cfg = EdgeworthConfig::new(order);
            let a = edgeworth_probability(&u, delta, 1.0, r1, cfg).unwrap().probability;
            let b = edgeworth_probability(&u, delta, 1.0, r2, cfg).unwrap().probability;
            prop_assert!(a <= b, "order {order}: {a} > {b}");
        }
        let s = SeededStream::new(seed, 0);
        let a = mc_intersection_oracle(&u, delta, 1.0, r1, 4000, s).unwrap().value;
        let b = mc_intersection_oracle(&u, delta, 1.0, r2, 4000, s).unwrap().value;
        prop_assert!(a <= b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coverage_is_monotone_in_r_and_n(
        dim in 1usize..8,
        n in 1usize..60,
        delta in 0.3f64..=1.0,
        seed in any::<u64>(),
    ) {
        let s = SeededStream::new(seed, 3);
        let q = CoverageQuery::uniform(dim, 0.0, n, delta).unwrap();
        let small = DistanceSample::draw(&q, 2, 300, s).unwrap();
        let large = DistanceSample::draw(&q.with_n(n + 7).unwrap(), 2, 300, s).unwrap();
        let mut prev = 0.0;
        for k in 0..=20 {
            let r = k as f64 * 0.05 * (dim as f64).sqrt();
            let c = small.coverage(r);
            prop_assert!((0.0..=1.0).contains(&c.value) && c.std_error >= 0.0);
            prop_assert!(c.value >= prev);
            prop_assert!(large.coverage(r).value >= c.value);
            prev = c.value;
        }
    }

    #[test]
    fn sweep_reports_the_grid_maximum(
        dim in 2usize..10,
        n in 5usize..80,
        r in 0.1f64..1.0,
        seed in any::<u64>(),
    ) {
        let q = CoverageQuery::uniform(dim, r, n, 1.0).unwrap();
        let grid = [0.25, 0.5, 0.75, 1.0];
        let res = delta_sweep(&q, &grid, McBudget::new(2, 200).unwrap(), SeededStream::new(seed, 4)).unwrap();
        let max = res.grid.iter().map(|(_, e)| e.value).fold(f64::MIN, f64::max);
        prop_assert_eq!(res.best_coverage, max);
        prop_assert!(res.grid.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(res.grid.iter().any(|(d, e)| *d == res.best_delta && e.value == max));
    }
}
