use mur_core::deviation::{err_cal, err_ent, err_max, sampled_err_max_lower_bound};
use mur_core::observables::{outcome_distribution, random_observable, random_projective};
use mur_core::transport::{enumerate_mccm, transport_cost_primal};
use mur_core::{CostFunction, ErrorMeasure, Execution, Observable, SchemeFamily, State, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    a: Observable,
    b1: Observable,
    b2: Observable,
    c: CostFunction,
    family: SchemeFamily,
}

fn case(d: usize, seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_projective(d, &mut rng).unwrap();
    let b1 = random_observable(d, d, &mut rng).unwrap();
    let b2 = random_observable(d, d, &mut rng).unwrap();
    let rows = (0..d).map(|x| (0..d).map(|y| if x == y { 0.0 } else { rng.random_range(0.1..1.0) }).collect()).collect();
    let c = CostFunction::new(rows).unwrap();
    let family = enumerate_mccm(&c).unwrap();
    Case { a, b1, b2, c, family }
}

fn all_errors(b: &Observable, k: &Case) -> [f64; 3] {
    [
        err_max(b, &k.a, &k.c, &k.family).unwrap(),
        err_cal(b, &k.a, &k.c).unwrap(),
        err_ent(b, &k.a, &k.c).unwrap(),
    ]
}

fn pure_qubit(theta: f64, phi: f64) -> State {
    State::pure(&[C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]).unwrap()
}

fn transported(rho: &State, aprime: &Observable, a: &Observable, c: &CostFunction) -> f64 {
    let p = outcome_distribution(rho, aprime).unwrap();
    let q = outcome_distribution(rho, a).unwrap();
    transport_cost_primal(c, &p, &q).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measures_are_ordered(d in 2usize..=4, seed in any::<u64>()) {
        let k = case(d, seed);
        let [m, c, e] = all_errors(&k.b1, &k);
        prop_assert!(m >= c - 1e-9 && c >= e - 1e-9, "M {m} C {c} E {e}");
    }

    #[test]
    fn measures_vanish_exactly_on_the_reference(d in 2usize..=4, seed in any::<u64>()) {
        let k = case(d, seed);
        for v in all_errors(&k.a, &k) {
            prop_assert!(v.abs() <= 1e-9);
        }
        for v in all_errors(&k.b1, &k) {
            prop_assert!(v > 1e-9);
        }
    }

    #[test]
    fn measures_are_convex_in_the_approximation(d in 2usize..=3, seed in any::<u64>()) {
        let k = case(d, seed);
        let e1 = all_errors(&k.b1, &k);
        let e2 = all_errors(&k.b2, &k);
        for t in [0.25, 0.5, 0.75] {
            let mixed = all_errors(&Observable::mix(t, &k.b1, &k.b2).unwrap(), &k);
            for l in 0..3 {
                prop_assert!(mixed[l] <= t * e1[l] + (1.0 - t) * e2[l] + 1e-9, "{}", ErrorMeasure::ALL[l]);
            }
        }
    }

    #[test]
    fn no_state_transports_more_than_the_maximal_error(d in 2usize..=3, seed in any::<u64>()) {
        let k = case(d, seed);
        let bound = err_max(&k.b1, &k.a, &k.c, &k.family).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..50 {
            let rho = State::random_pure(d, &mut rng);
            prop_assert!(transported(&rho, &k.b1, &k.a, &k.c) <= bound + 1e-9);
        }
    }

    #[test]
    fn constant_approximation_costs_its_worst_row(d in 2usize..=4, seed in any::<u64>(), at in 0usize..4) {
        let k = case(d, seed);
        let at = at % d;
        let b = Observable::constant(d, d, at);
        let expected = (0..d).map(|y| k.c.get(at, y)).fold(0.0, f64::max);
        prop_assert!((err_max(&b, &k.a, &k.c, &k.family).unwrap() - expected).abs() <= 1e-9);
    }
}

#[test]
fn maximal_error_is_the_supremum_over_states_for_a_qubit() {
    let k = case(2, 2024);
    let certified = err_max(&k.b1, &k.a, &k.c, &k.family).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for _ in 0..50_000 {
        let theta = (1.0 - 2.0 * rng.random::<f64>()).acos();
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let v = transported(&pure_qubit(theta, phi), &k.b1, &k.a, &k.c);
        assert!(v <= certified + 1e-12, "sampled {v} exceeds {certified}");
        if v > best.0 {
            best = (v, theta, phi);
        }
    }
    // pattern search on the Bloch sphere from the best sample
    let mut step = 0.05;
    while step > 1e-10 {
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (t, p) = (best.1 + dt, best.2 + dp);
            let v = transported(&pure_qubit(t, p), &k.b1, &k.a, &k.c);
            assert!(v <= certified + 1e-12);
            if v > best.0 {
                best = (v, t, p);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    assert!(certified - best.0 <= 1e-6, "certified {certified}, best state {}", best.0);
}

#[test]
fn library_lower_bound_is_below_the_certified_value_and_reproducible() {
    let k = case(3, 99);
    let certified = err_max(&k.b1, &k.a, &k.c, &k.family).unwrap();
    let par = sampled_err_max_lower_bound(&k.b1, &k.a, &k.c, 2000, 5, Execution::Parallel).unwrap();
    let seq = sampled_err_max_lower_bound(&k.b1, &k.a, &k.c, 2000, 5, Execution::Sequential).unwrap();
    assert_eq!(par.to_bits(), seq.to_bits());
    assert!(par <= certified + 1e-12);
    assert!(par > 0.5 * certified);
}
