use fraclap::kernels::bump;
use fraclap::solver::{fmt17, linspace, ExteriorRule, GridFunction};
use fraclap::verify::{check_rng, fit_line, Relation, Report};
use fraclap::{reflect_point, Domain, FracParams, KernelIntegral, Kernels};
use proptest::prelude::*;
use rand::Rng;

fn params() -> impl Strategy<Value = FracParams> {
    (1usize..=3, 0.05f64..0.95).prop_map(|(n, s)| FracParams::new(n, s).unwrap())
}

fn point(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(lo..hi, dim)
}

fn pair_in(p: FracParams, lo: f64, hi: f64) -> impl Strategy<Value = (FracParams, Vec<f64>, Vec<f64>)> {
    (Just(p), point(p.dim(), lo, hi), point(p.dim(), lo, hi))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

proptest! {
    #[test]
    fn ball_green_function_is_symmetric_and_positive((p, x, y) in params().prop_flat_map(|p| pair_in(p, -0.6, 0.6))) {
        prop_assume!(x != y);
        let k = Kernels::new(p);
        let a = k.green_ball(1.0, &x, &y).unwrap();
        let b = k.green_ball(1.0, &y, &x).unwrap();
        prop_assert!(close(a, b, 1e-12), "{a} {b}");
        prop_assert!(a > 0.0);
    }

    #[test]
    fn ball_kernels_vanish_off_their_support((p, x, y) in params().prop_flat_map(|p| pair_in(p, -2.0, 2.0))) {
        prop_assume!(x != y);
        let k = Kernels::new(p);
        let inside = |z: &[f64]| z.iter().map(|v| v * v).sum::<f64>() < 1.0;
        let g = k.green_ball(1.0, &x, &y).unwrap();
        prop_assert_eq!(g > 0.0, inside(&x) && inside(&y));
        let gamma = k.poisson_ball(1.0, &x, &y).unwrap();
        let outside_y = y.iter().map(|v| v * v).sum::<f64>() > 1.0;
        prop_assert_eq!(gamma > 0.0, inside(&x) && outside_y);
    }

    #[test]
    fn halfspace_green_function_is_homogeneous(
        (p, x, y) in params().prop_flat_map(|p| pair_in(p, 0.01, 3.0)),
        c in 0.1f64..10.0,
    ) {
        prop_assume!(x != y);
        let k = Kernels::new(p);
        let scale = |z: &[f64]| z.iter().map(|v| c * v).collect::<Vec<f64>>();
        let g = k.green_halfspace(&x, &y).unwrap();
        let gc = k.green_halfspace(&scale(&x), &scale(&y)).unwrap();
        let expected = g * c.powf(2.0 * p.s() - p.dim() as f64);
        prop_assert!(close(gc, expected, 1e-9), "{gc} {expected}");
        prop_assert!(close(g, k.green_halfspace(&y, &x).unwrap(), 1e-12));
    }

    #[test]
    fn shifted_ball_green_functions_increase_to_the_halfspace_one(
        (p, x, y) in params().prop_flat_map(|p| pair_in(p, 0.05, 1.0)),
        radius in 2.0f64..20.0,
    ) {
        prop_assume!(x != y);
        let k = Kernels::new(p);
        let small = k.green_shifted_ball(radius, &x, &y).unwrap();
        let large = k.green_shifted_ball(2.0 * radius, &x, &y).unwrap();
        let limit = k.green_halfspace(&x, &y).unwrap();
        prop_assert!(small <= large * (1.0 + 1e-12), "{small} {large}");
        prop_assert!(large <= limit * (1.0 + 1e-12), "{large} {limit}");
    }

    #[test]
    fn reflection_is_an_involution(x in point(3, -5.0, 5.0), lambda in -3.0f64..3.0) {
        let twice = reflect_point(&reflect_point(&x, lambda), lambda);
        prop_assert!((twice[0] - x[0]).abs() <= 1e-12 * (1.0 + x[0].abs() + lambda.abs()));
        prop_assert_eq!(&twice[1..], &x[1..]);
    }

    #[test]
    fn kernel_integral_is_nondecreasing(p in params(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let i = KernelIntegral::new(&p);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (vlo, vhi) = (i.eval(lo).unwrap(), i.eval(hi).unwrap());
        prop_assert!(vlo <= vhi * (1.0 + 1e-13), "{vlo} {vhi}");
        prop_assert!(i.increment(lo, hi) >= 0.0);
    }

    #[test]
    fn riesz_potential_decreases_with_distance(p in params(), r1 in 0.01f64..10.0, r2 in 0.01f64..10.0) {
        prop_assume!(r1 < r2);
        let k = Kernels::new(p);
        let at = |r: f64| {
            let mut y = vec![0.0; p.dim()];
            y[0] = r;
            k.riesz_potential(&vec![0.0; p.dim()], &y).unwrap()
        };
        prop_assert!(at(r1) > at(r2));
    }

    #[test]
    fn order_outside_the_unit_interval_is_rejected(n in 1usize..6, s in prop_oneof![-2.0f64..=0.0, 1.0f64..3.0]) {
        prop_assert!(FracParams::new(n, s).is_err());
    }

    #[test]
    fn bump_profile_is_a_nonnegative_bump(r in -1.0f64..2.0) {
        let v = bump(r);
        prop_assert!(v >= 0.0 && v.is_finite());
        prop_assert_eq!(v > 0.0, r > 0.5 && r < 1.0);
    }

    #[test]
    fn grid_text_round_trips_exactly(values in proptest::collection::vec(-1e6f64..1e6, 12), s in 0.01f64..0.99) {
        let p = FracParams::new(2, s).unwrap();
        let axes = vec![linspace(0.0, 1.5, 4), linspace(-1.0, 1.0, 3)];
        let u = GridFunction::new(p, Domain::HalfSpace, axes, values, ExteriorRule::Zero).unwrap();
        let back = GridFunction::from_text(&u.to_text()).unwrap();
        prop_assert_eq!(back.values(), u.values());
        prop_assert_eq!(back.axes(), u.axes());
        prop_assert_eq!(back.params().s(), s);
    }

    #[test]
    fn fmt17_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn report_verdict_is_a_function_of_measurements(
        entries in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0usize..4), 1..6),
    ) {
        let relations = [Relation::AtMost, Relation::Below, Relation::AtLeast, Relation::Above];
        let mut r = Report::new("synthetic", 1);
        for (k, (m, t, rel)) in entries.iter().enumerate() {
            r.measure(&format!("m{k}"), *m);
            r.require(&format!("m{k}"), relations[*rel], &format!("t{k}"), *t);
        }
        let r = r.finish();
        let expected = entries.iter().all(|(m, t, rel)| relations[*rel].holds(*m, *t));
        prop_assert_eq!(r.pass, expected);
        let back = Report::from_json(&r.to_json()).unwrap();
        prop_assert_eq!(back.evaluate(), r.pass);
        prop_assert_eq!(back.failures().is_empty(), r.pass);
    }

    #[test]
    fn least_squares_recovers_lines(slope in -5.0f64..5.0, intercept in -5.0f64..5.0, n in 2usize..30) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.37 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + intercept).collect();
        let fit = fit_line(&x, &y).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - intercept).abs() < 1e-9);
    }

    #[test]
    fn check_streams_are_reproducible(seed in any::<u64>()) {
        let a: [u64; 4] = check_rng(seed, "holder").random();
        let b: [u64; 4] = check_rng(seed, "holder").random();
        prop_assert_eq!(a, b);
    }
}
