use chaining_bounds::ast::{linearized_factor, radicand_factor};
use chaining_bounds::bounds::{cor_fixed_s, cor_load_factor, main_bound, params_from_load};
use chaining_bounds::probability::MASS_TOLERANCE;
use chaining_bounds::*;
use proptest::prelude::*;

fn dist_strategy() -> impl Strategy<Value = ProbabilityVector> {
    (1usize..64).prop_flat_map(|size| {
        prop_oneof![
            Just(ProbabilityVector::uniform(size).unwrap()),
            (0.0f64..3.0).prop_map(move |e| ProbabilityVector::zipf(size, e).unwrap()),
            (1..=size).prop_map(move |active| {
                let alpha = ((active as f64 + 0.5) / size as f64).min(1.0);
                ProbabilityVector::restricted_uniform(size, alpha).unwrap()
            }),
            prop::collection::vec(0.0f64..10.0, size)
                .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 0.0)
                .prop_map(|w| ProbabilityVector::from_weights(w).unwrap()),
        ]
    })
}

/// A random table hash together with a key sequence over its universe.
fn table_and_keys(max_m: usize) -> impl Strategy<Value = (HashModel, KeySequence)> {
    (1usize..=256, 1usize..=64, any::<u64>()).prop_flat_map(move |(u, n, seed)| {
        let h = HashModel::random_table(u, n, seed).unwrap();
        prop::collection::vec(0..u, 0..=max_m).prop_map(move |k| (h.clone(), KeySequence::from(k)))
    })
}

proptest! {
    #[test]
    fn constructors_give_probability_vectors(pv in dist_strategy()) {
        prop_assert!(pv.weights().iter().all(|w| *w >= 0.0));
        prop_assert!((pv.weights().iter().sum::<f64>() - 1.0).abs() <= MASS_TOLERANCE);
    }

    #[test]
    fn collision_probability_at_least_reciprocal_size(pv in dist_strategy()) {
        let floor = 1.0 / pv.len() as f64;
        prop_assert!(pv.norm_sq() >= floor - 1e-12);
        prop_assert!(pv.norm_sq() <= 1.0 + 1e-12);
        let uniform = pv.weights().iter().all(|w| (w - floor).abs() < 1e-12);
        prop_assert_eq!(uniform, (pv.norm_sq() - floor).abs() <= 1e-12);
    }

    #[test]
    fn sampling_is_reproducible(pv in dist_strategy(), seed in any::<u64>(), count in 0usize..300) {
        let a = pv.sample(seed, count);
        prop_assert_eq!(a.len(), count);
        prop_assert_eq!(&a, &pv.sample(seed, count));
        prop_assert!(a.keys().iter().all(|&k| k < pv.len() && pv.weights()[k] > 0.0));
    }

    #[test]
    fn slot_distribution_is_normalized(pv in dist_strategy(), n in 1usize..40, seed in any::<u64>()) {
        let h = HashModel::random_table(pv.len(), n, seed).unwrap();
        let p = slot_probabilities(&pv, &h).unwrap();
        prop_assert_eq!(p.len(), n);
        prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() <= MASS_TOLERANCE);
        prop_assert!(true_collision_probability(&pv, &h).unwrap() >= 0.0);
    }

    #[test]
    fn counts_are_conserved_and_dominate_distinct((h, x) in table_and_keys(300)) {
        let k = count_slots(&x, &h).unwrap();
        let d = distinct_counts(&x, &h).unwrap();
        prop_assert_eq!(k.counts().iter().sum::<u64>(), x.len() as u64);
        prop_assert_eq!(k.total(), x.len() as u64);
        prop_assert!(d.counts().iter().zip(k.counts()).all(|(a, b)| a <= b));
    }

    #[test]
    fn counts_compose_over_concatenation((h, x) in table_and_keys(100), split in 0usize..=100) {
        let cut = split.min(x.len());
        let (a, b) = x.keys().split_at(cut);
        let (a, b) = (KeySequence::from(a.to_vec()), KeySequence::from(b.to_vec()));
        let merged = count_slots(&a, &h).unwrap().merged(&count_slots(&b, &h).unwrap()).unwrap();
        prop_assert_eq!(merged, count_slots(&a.concat(&b), &h).unwrap());
    }

    #[test]
    fn slot_formula_matches_pair_enumeration((h, x) in table_and_keys(500)) {
        let k = count_slots(&x, &h).unwrap();
        prop_assert_eq!(collision_pairs(&k), brute_force_collision_pairs(&x, &h).unwrap());
    }

    #[test]
    fn estimate_in_unit_range_and_permutation_invariant(
        (h, x) in table_and_keys(200),
        rotate in 0usize..200,
    ) {
        prop_assume!(x.len() >= 2);
        let est = empirical_collision_probability(&count_slots(&x, &h).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&est.empirical_cp));
        let mut keys = x.keys().to_vec();
        let len = keys.len();
        keys.rotate_left(rotate % len);
        keys.reverse();
        let permuted = empirical_collision_probability(
            &count_slots(&KeySequence::from(keys), &h).unwrap(),
        ).unwrap();
        prop_assert_eq!(est, permuted);
    }

    #[test]
    fn search_time_ordering((h, x) in table_and_keys(200), vw in prop::collection::vec(0.0f64..1.0, 64)) {
        let w: Vec<f64> = vw[..h.slots()].iter().map(|w| w + 1e-3).collect();
        let v = ProbabilityVector::from_weights(w).unwrap();
        let exact = ast_exact(&v, &x, &h).unwrap();
        let upper = ast_upper_empirical(&v, &count_slots(&x, &h).unwrap()).unwrap();
        prop_assert!(exact <= upper + 1e-12);
        let mut distinct = x.keys().to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() == x.len() {
            prop_assert!((exact - upper).abs() <= 1e-12);
        }
    }

    #[test]
    fn main_bound_monotone(
        n in 25u64..10_000,
        eps in 0.001f64..0.33,
        delta in 0.01f64..3.0,
        s in 0.01f64..50.0,
    ) {
        let base = main_bound(n, eps, delta, s).unwrap();
        prop_assert!(base.error_bound >= 0.0 && base.confidence <= 1.0);
        let eps_up = (eps * 1.001).min(0.3333);
        if eps_up > eps {
            prop_assert!(main_bound(n, eps_up, delta, s).unwrap().error_bound > base.error_bound);
        }
        prop_assert!(main_bound(n, eps, delta, s * 1.01).unwrap().error_bound > base.error_bound);
        prop_assert!(main_bound(n + 10, eps, delta, s).unwrap().error_bound < base.error_bound);
        prop_assert!(main_bound(n, eps, delta * 1.01, s).unwrap().error_bound < base.error_bound);
    }

    #[test]
    fn fixed_s_dominates_main_bound(n in 25u64..1_000_000, eps in 1e-6f64..0.3333, delta in 0.001f64..3.0) {
        let s = 2.0 * (n as f64).powf(delta / 2.0);
        let main = main_bound(n, eps, delta, s).unwrap();
        let fixed = cor_fixed_s(n, eps, delta).unwrap();
        prop_assert!(main.error_bound <= fixed.error_bound * (1.0 + 1e-12));
        prop_assert!((main.confidence - fixed.confidence).abs() <= 1e-12);
    }

    #[test]
    fn load_factor_confidence_increases(eps in 0.01f64..0.333, extra in 0.01f64..100.0) {
        let load = eps.powi(-2) * (1.0 + extra);
        let a = cor_load_factor(eps, load).unwrap();
        let b = cor_load_factor(eps, load * 1.1).unwrap();
        prop_assert!(b.tail < a.tail);
        prop_assert!(b.confidence >= a.confidence);
    }

    #[test]
    fn params_round_trip(n in 25u64..100_000, eps in 0.01f64..0.333, c in 1.001f64..1000.0) {
        let load = c / (eps * eps);
        let p = params_from_load(n, load, eps).unwrap();
        prop_assert!((p.realized_load() - load).abs() <= 1.0 / n as f64);
        let m_target = eps.powi(-2) * (n as f64).powf(1.0 + p.delta);
        prop_assert!((p.m as f64 - m_target).abs() <= 0.5 + 1e-6 * m_target);
        prop_assert!(p.delta > 0.0);
    }

    #[test]
    fn eps_substitution_reproduces_linearized_bound(
        load in 9.001f64..1e6,
        s in 0.001f64..100.0,
        n in 25u64..10_000,
        v_scale in 0.0f64..1.0,
        p_scale in 0.0f64..1.0,
    ) {
        let nf = n as f64;
        let v_norm = 1.0 / nf.sqrt() + v_scale * (1.0 - 1.0 / nf.sqrt());
        let p_norm = 1.0 / nf.sqrt() + p_scale * (1.0 - 1.0 / nf.sqrt());
        let eps = s / (2.0 * load.sqrt());
        let by_eps = ast_bound_eps(load, n, v_norm, p_norm, eps).unwrap();
        let scale = load * nf * v_norm * p_norm;
        let linear = scale * linearized_factor(load, s) + 1.0;
        prop_assert!((by_eps.value - linear).abs() <= 1e-9 * linear);
        let by_s = ast_bound_s(load, n, v_norm, p_norm, s).unwrap();
        prop_assert!((by_eps.tail - by_s.tail).abs() <= 1e-12 * by_s.tail.max(1e-300));
        prop_assert!(by_s.value >= 1.0 && by_eps.value >= 1.0);
    }

    /// Exact region where the radicand sits below its linearization:
    /// (1 + 4s/sqrt(L))^2 - radicand^2 = (2s + 11 s^2 / sqrt(L) - 3) / sqrt(L).
    #[test]
    fn radicand_linearization_region(load in 9.001f64..1e6, s in 0.001f64..100.0) {
        let margin = 2.0 * s + 11.0 * s * s / load.sqrt() - 3.0;
        prop_assume!(margin.abs() > 1e-9);
        let below = radicand_factor(load, s) < linearized_factor(load, s);
        prop_assert_eq!(below, margin > 0.0);
    }

    #[test]
    fn example1_is_the_eps_bound_with_restricted_access(
        c in 1.0f64..5.0,
        alpha in 0.05f64..=1.0,
        eps in 0.001f64..0.5,
        load in 9.5f64..1e5,
    ) {
        let n = 10_000u64;
        let nf = n as f64;
        let active = (alpha * nf).floor();
        let alpha = active / nf;
        let e1 = example1_bound(c, alpha, eps, load).unwrap();
        let general = ast_bound_eps(load, n, 1.0 / (alpha * nf).sqrt(), c / nf.sqrt(), eps).unwrap();
        let total = e1.center + e1.halfwidth;
        prop_assert!((general.value - total).abs() <= 1e-9 * total);
        prop_assert!((general.confidence - e1.confidence).abs() <= 1e-15);
        let e2 = example2_bound(c, alpha, 1.0, eps, load).unwrap();
        prop_assert!((e2.value - total).abs() <= 1e-9 * total);
        prop_assert!(e2.confidence <= e1.confidence);
    }
}
