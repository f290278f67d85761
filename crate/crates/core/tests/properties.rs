use nonlin_mdp::discount::{catalog, gamma_tilde_iterates, gamma_tilde_power, DiscountFunction};
use nonlin_mdp::model::{
    validate_model, weighted_diff, weighted_norm, FiniteModel, Mode, StationaryPolicy, ValueTable,
};
use nonlin_mdp::random::{random_model, RandomModelSpec};
use nonlin_mdp::solver::{
    bellman_t, evaluate_finite_horizon, evaluate_stationary, policy_t, value_iterate,
    value_iterate_from, SolveOptions,
};
use proptest::prelude::*;

fn model_strategy(weighted: bool) -> impl Strategy<Value = FiniteModel> {
    (1usize..8, 1usize..4, any::<u64>()).prop_map(move |(s, a, seed)| {
        let mut spec = RandomModelSpec::new(s, a);
        if weighted {
            spec = spec.weights(3.0);
        }
        random_model(&spec, seed)
    })
}

fn values_for(model: &FiniteModel, raw: &[f64]) -> ValueTable {
    ValueTable::new(
        (0..model.n_states())
            .map(|x| raw[x % raw.len()] * model.weight(x))
            .collect(),
    )
}

fn discount_strategy() -> impl Strategy<Value = DiscountFunction> {
    (0usize..4).prop_map(|i| catalog().swap_remove(i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_norm_is_a_norm(
        m in model_strategy(true),
        a in prop::collection::vec(-10.0f64..10.0, 1..8),
        b in prop::collection::vec(-10.0f64..10.0, 1..8),
        t in -5.0f64..5.0,
    ) {
        let v1 = values_for(&m, &a);
        let v2 = values_for(&m, &b);
        let scaled = ValueTable::new(v1.iter().map(|x| t * x).collect());
        let n1 = weighted_norm(&v1, &m).unwrap();
        prop_assert!((weighted_norm(&scaled, &m).unwrap() - t.abs() * n1).abs() <= 1e-12 * (1.0 + n1 * t.abs()));
        let sum = ValueTable::new(v1.iter().zip(v2.iter()).map(|(x, y)| x + y).collect());
        prop_assert!(weighted_norm(&sum, &m).unwrap() <= n1 + weighted_norm(&v2, &m).unwrap() + 1e-12);
    }

    #[test]
    fn constants_survive_state_permutation(m in model_strategy(true), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..m.n_states()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let p = m.permute_states(&perm).unwrap();
        let c1 = validate_model(&m, Mode::Bounded).unwrap();
        let c2 = validate_model(&p, Mode::Bounded).unwrap();
        prop_assert_eq!(c1.b, c2.b);
        prop_assert_eq!(c1.c, c2.c);
        prop_assert!((c1.alpha - c2.alpha).abs() <= 1e-12);
    }

    #[test]
    fn alpha_bounds_every_pair_and_is_attained(m in model_strategy(true)) {
        let alpha = validate_model(&m, Mode::Bounded).unwrap().alpha;
        let mut best = f64::NEG_INFINITY;
        for x in 0..m.n_states() {
            for k in 0..m.admissible(x).len() {
                let drift: f64 = m.row(x, k).iter().zip(m.weights()).map(|(q, w)| q * w).sum();
                prop_assert!(drift <= alpha * m.weight(x) * (1.0 + 1e-12));
                best = best.max(drift / m.weight(x));
            }
        }
        prop_assert!((best - alpha).abs() <= 1e-12);
    }

    #[test]
    fn operators_are_monotone(
        m in model_strategy(true),
        d in discount_strategy(),
        a in prop::collection::vec(-5.0f64..5.0, 1..8),
        bump in prop::collection::vec(0.0f64..2.0, 1..8),
    ) {
        let v1 = values_for(&m, &a);
        let v2 = ValueTable::new(v1.iter().enumerate().map(|(x, v)| v + bump[x % bump.len()]).collect());
        let t1 = bellman_t(&m, &d, &v1).unwrap().value;
        let t2 = bellman_t(&m, &d, &v2).unwrap().value;
        let f = StationaryPolicy::lowest_index(&m);
        let f1 = policy_t(&m, &d, &f, &v1).unwrap();
        let f2 = policy_t(&m, &d, &f, &v2).unwrap();
        for x in 0..m.n_states() {
            prop_assert!(t1[x] <= t2[x] + 1e-12);
            prop_assert!(f1[x] <= f2[x] + 1e-12);
        }
    }

    #[test]
    fn backup_contracts_by_gamma_tilde(
        m in model_strategy(true),
        d in discount_strategy(),
        a in prop::collection::vec(-5.0f64..5.0, 1..8),
        b in prop::collection::vec(-5.0f64..5.0, 1..8),
    ) {
        let alpha = validate_model(&m, Mode::Bounded).unwrap().alpha;
        let v1 = values_for(&m, &a);
        let v2 = values_for(&m, &b);
        let lhs = weighted_diff(&bellman_t(&m, &d, &v1).unwrap().value, &bellman_t(&m, &d, &v2).unwrap().value, &m).unwrap();
        prop_assert!(lhs <= d.gamma_tilde(alpha, weighted_diff(&v1, &v2, &m).unwrap()) + 1e-10);
    }

    #[test]
    fn fixed_point_is_unique(m in model_strategy(false), d in discount_strategy()) {
        let tol = 1e-8;
        let opts = SolveOptions { tol: tol / 10.0, max_iters: 1_000_000 };
        let from_zero = value_iterate(&m, &d, opts).unwrap();
        let c = from_zero.constants.c;
        let start = ValueTable::new(m.weights().iter().map(|w| c * w).collect());
        let from_top = value_iterate_from(&m, &d, start, opts).unwrap();
        prop_assert!(from_zero.converged() && from_top.converged());
        prop_assert!(weighted_diff(&from_zero.value, &from_top.value, &m).unwrap() <= 2.0 * tol);
    }

    #[test]
    fn greedy_policy_is_optimal(m in model_strategy(false), d in discount_strategy()) {
        let tol = 1e-8;
        let opts = SolveOptions { tol: tol / 10.0, max_iters: 1_000_000 };
        let r = value_iterate(&m, &d, opts).unwrap();
        let u = evaluate_stationary(&m, &d, &r.policy, opts).unwrap();
        prop_assert!(weighted_diff(&u, &r.value, &m).unwrap() <= 2.0 * tol);
    }

    #[test]
    fn finite_horizon_sandwich(
        m in model_strategy(false),
        d in discount_strategy(),
        n in 1usize..12,
        extra in 1usize..12,
    ) {
        let constants = validate_model(&m, Mode::Bounded).unwrap();
        let it = gamma_tilde_iterates(&d, constants.alpha, constants.z, 1e-12).unwrap();
        let f = StationaryPolicy::lowest_index(&m);
        let seq = vec![f; n + extra];
        let un = evaluate_finite_horizon(&m, &d, &seq, n).unwrap();
        let unm = evaluate_finite_horizon(&m, &d, &seq, n + extra).unwrap();
        let bound = gamma_tilde_power(&d, constants.alpha, it.l_tilde, n);
        prop_assert!(weighted_diff(&un, &unm, &m).unwrap() <= bound + 1e-12);
    }

    #[test]
    fn apriori_column_is_non_increasing_and_residual_small(m in model_strategy(false), d in discount_strategy()) {
        let r = value_iterate(&m, &d, SolveOptions::default()).unwrap();
        for w in r.trace.windows(2) {
            prop_assert!(w[1].apriori_bound <= w[0].apriori_bound);
        }
        let last = r.trace.last().unwrap();
        prop_assert!(last.residual <= 1e-8 || last.apriori_bound < 1e-8);
    }
}
