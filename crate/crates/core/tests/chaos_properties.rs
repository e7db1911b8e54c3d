use concentra_core::chaos::{
    all_subsets, norm_t_i, sample_chaos, solve_ball_argmax, BallConstraint, ChaosSpec,
    CoefficientTensor, Outer, DEFAULT_RESTARTS,
};
use concentra_core::oracles::{brute_force_enumerate, naive_chaos_value, water_fill};
use concentra_core::stats::exact_moment;
use concentra_core::RandomStream;
use proptest::prelude::*;

fn small_tensor() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(d, n)| {
        let len = n.pow(d as u32);
        (Just(d), Just(n), prop::collection::vec(-3.0f64..3.0, len))
    })
}

fn spec(d: usize, n: usize, entries: Vec<f64>) -> ChaosSpec {
    let t = CoefficientTensor::new(d, n, entries, false, false).unwrap();
    ChaosSpec::rademacher(d, n, vec![t], true).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn empty_subset_norm_is_first_moment((d, n, e) in small_tensor()) {
        let s = spec(d, n, e);
        let norm = norm_t_i(&s, 0, &Outer::Exact, DEFAULT_RESTARTS, &RandomStream::new(0)).unwrap();
        let law = brute_force_enumerate(&s).unwrap();
        let m1 = exact_moment(&law, 1.0, false).unwrap();
        prop_assert!((norm.value - m1).abs() <= 1e-12 * m1.max(1.0));
    }

    #[test]
    fn subset_norms_are_homogeneous((d, n, e) in small_tensor(), c in -4.0f64..4.0) {
        let s = spec(d, n, e.clone());
        let scaled = spec(d, n, e.iter().map(|v| v * c).collect());
        for subset in all_subsets(d) {
            let a = norm_t_i(&s, subset, &Outer::Exact, DEFAULT_RESTARTS, &RandomStream::new(1)).unwrap().value;
            let b = norm_t_i(&scaled, subset, &Outer::Exact, DEFAULT_RESTARTS, &RandomStream::new(1)).unwrap().value;
            prop_assert!((b - c.abs() * a).abs() <= 1e-7 * (1.0 + b.abs()), "I={subset:#b}: {b} vs {}", c.abs() * a);
        }
    }

    #[test]
    fn exact_moments_increase_with_p((d, n, e) in small_tensor()) {
        let law = brute_force_enumerate(&spec(d, n, e)).unwrap();
        let mut last = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, 8.0] {
            let m = exact_moment(&law, p, false).unwrap();
            prop_assert!(m >= last * (1.0 - 1e-12));
            last = m;
        }
    }

    #[test]
    fn ball_solver_matches_water_fill(c in prop::collection::vec(-5.0f64..5.0, 1..10), extra in 0.0f64..1.0) {
        let n = c.len();
        let p = 1.0 + extra * n as f64;
        let got = solve_ball_argmax(&c, &BallConstraint::rademacher(n, p).unwrap()).unwrap().value;
        let want = water_fill(&c, p);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn one_vector_norms_have_closed_forms() {
    let v = vec![3.0, -4.0, 0.0, 1.0];
    let s = ChaosSpec::rademacher(
        1,
        4,
        vec![CoefficientTensor::vector(v.clone()).unwrap()],
        true,
    )
    .unwrap();
    let full = norm_t_i(
        &s,
        1,
        &Outer::Exact,
        DEFAULT_RESTARTS,
        &RandomStream::new(0),
    )
    .unwrap();
    assert!((full.value - 26f64.sqrt()).abs() < 1e-12);
    assert!(full.exact);
}

#[test]
fn samples_follow_the_enumerated_law() {
    let t = CoefficientTensor::new(2, 2, vec![1.0, 2.0, -1.0, 0.5], false, false).unwrap();
    let s = ChaosSpec::rademacher(2, 2, vec![t], true).unwrap();
    let law = brute_force_enumerate(&s).unwrap();
    let xs = sample_chaos(&s, 20_000, &RandomStream::new(3));
    assert_eq!(xs, sample_chaos(&s, 20_000, &RandomStream::new(3)));
    for (v, p) in law.iter() {
        let f = xs.iter().filter(|&&x| (x - v).abs() < 1e-9).count() as f64 / xs.len() as f64;
        assert!(
            (f - p).abs() < 4.0 * (p * (1.0 - p) / xs.len() as f64).sqrt(),
            "{v}: {f} vs {p}"
        );
    }
    assert!(law
        .support()
        .contains(&naive_chaos_value(&s, &[1.0, 1.0, 1.0, 1.0])));
}
