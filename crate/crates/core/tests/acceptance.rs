//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use nonlin_mdp::discount::{catalog, gamma_tilde_iterates, DiscountFunction};
use nonlin_mdp::export::{trace_csv, value_csv};
use nonlin_mdp::model::{validate_model, weighted_diff, FiniteModel, Mode, StationaryPolicy, ValueTable};
use nonlin_mdp::models::{
    build_growth2, build_stopping, growth2_alpha, preset, solve_house_selling, Growth2Params,
    HouseSelling, ModelsError,
};
use nonlin_mdp::oracle::{
    classical_discounted_vi, enumerate_histories_un, pathwise_rn, HistoryPolicy,
};
use nonlin_mdp::random::{random_model, random_values, RandomModelSpec};
use nonlin_mdp::solver::{
    bellman_t, evaluate_finite_horizon, howard_solve, policy_iteration_sets, truncation_solve,
    value_iterate, HowardOptions, SolveOptions, TruncationOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

type Outcome = Result<String, String>;

fn tight() -> SolveOptions {
    SolveOptions {
        tol: 1e-11,
        max_iters: 1_000_000,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_policy(model: &FiniteModel, rng: &mut ChaCha8Rng) -> StationaryPolicy {
    let choice = (0..model.n_states())
        .map(|x| {
            let adm = model.admissible(x);
            adm[rng.gen_range(0..adm.len())]
        })
        .collect();
    StationaryPolicy::new(model, choice).unwrap()
}

fn c1_linear_coincidence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let spec = RandomModelSpec::new(rng.gen_range(2..=20), rng.gen_range(1..=5));
        let model = random_model(&spec, seed);
        let beta = if seed % 2 == 0 { 0.5 } else { 0.9 };
        let d = DiscountFunction::linear(beta).unwrap();
        let r = value_iterate(&model, &d, tight()).map_err(|e| e.to_string())?;
        ensure(r.converged(), || format!("model {seed} hit the cap"))?;
        let (oracle, _) =
            classical_discounted_vi(&model, beta, 1e-13, 1_000_000).map_err(|e| e.to_string())?;
        worst = worst.max(weighted_diff(&r.value, &oracle, &model).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-8, || format!("max weighted diff {worst:e}"))?;
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("50 models, max weighted diff {worst:.2e}, {secs:.2} s"))
}

fn c2_finite_horizon() -> Outcome {
    let mut worst_fh: f64 = 0.0;
    let mut worst_lin: f64 = 0.0;
    let mut best_gap: f64 = 0.0;
    let mut cases = 0;
    for d in catalog() {
        let linear = d.linear_beta().is_some();
        for seed in 0..12u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let spec = RandomModelSpec::new(rng.gen_range(1..=4), rng.gen_range(1..=2));
            let model = random_model(&spec, seed);
            let seq: Vec<StationaryPolicy> = (0..4).map(|_| random_policy(&model, &mut rng)).collect();
            for n in 1..=4 {
                let hp = HistoryPolicy::markov(&model, &seq[..n]).map_err(|e| e.to_string())?;
                let fh = evaluate_finite_horizon(&model, &d, &seq, n).map_err(|e| e.to_string())?;
                for x0 in 0..model.n_states() {
                    let tree = enumerate_histories_un(&model, &d, &hp, n, x0).map_err(|e| e.to_string())?;
                    let path = pathwise_rn(&model, &d, &hp, n, x0).map_err(|e| e.to_string())?;
                    worst_fh = worst_fh.max((tree.value - fh[x0]).abs());
                    let gap = (tree.value - path.value).abs();
                    if linear {
                        worst_lin = worst_lin.max(gap);
                    } else {
                        best_gap = best_gap.max(gap);
                    }
                    cases += 1;
                }
            }
        }
    }
    ensure(worst_fh <= 1e-12, || format!("U_n mismatch {worst_fh:e}"))?;
    ensure(worst_lin <= 1e-12, || format!("linear R_n mismatch {worst_lin:e}"))?;
    ensure(best_gap > 1e-6, || format!("largest non-linear R_n gap only {best_gap:e}"))?;
    Ok(format!(
        "{cases} cases, U_n diff {worst_fh:.1e}, linear R_n diff {worst_lin:.1e}, non-linear R_n gap up to {best_gap:.3}"
    ))
}

fn c3_contraction() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0;
    for d in catalog() {
        for seed in 0..5u64 {
            let spec = RandomModelSpec::new(8, 3).weights(3.0);
            let model = random_model(&spec, 3000 + seed);
            let alpha = validate_model(&model, Mode::Bounded).unwrap().alpha;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..100 {
                let a = random_values(&model, 5.0, &mut rng);
                // Every other pair is a small perturbation, where γ is tightest.
                let scale = if i % 2 == 0 { 5.0 } else { 1e-3 };
                let b: Vec<f64> = if i % 2 == 0 {
                    random_values(&model, scale, &mut rng)
                } else {
                    a.iter().zip(random_values(&model, scale, &mut rng)).map(|(x, e)| x + e).collect()
                };
                let (v1, v2) = (ValueTable::new(a), ValueTable::new(b));
                let t1 = bellman_t(&model, &d, &v1).unwrap().value;
                let t2 = bellman_t(&model, &d, &v2).unwrap().value;
                let lhs = weighted_diff(&t1, &t2, &model).unwrap();
                let rhs = d.gamma_tilde(alpha, weighted_diff(&v1, &v2, &model).unwrap());
                worst = worst.max(lhs - rhs);
                pairs += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("certificate exceeded by {worst:e}"))?;
    Ok(format!("{pairs} pairs, max slack use {worst:.2e}"))
}

fn c4_iterates() -> Outcome {
    for d in catalog() {
        for z in [0.1, 1.0, 10.0] {
            let it = gamma_tilde_iterates(&d, 1.0, z, 1e-12).map_err(|e| e.to_string())?;
            for j in 1..it.sequence.len() {
                let inc = it.sequence[j] - it.sequence[j - 1];
                ensure(inc > 0.0, || format!("{} z={z}: not increasing at k={}", d.name(), j + 1))?;
                ensure(inc <= it.majorants[j - 1] + 1e-12, || {
                    format!("{} z={z}: increment {inc} above majorant at k={}", d.name(), j + 1)
                })?;
            }
            ensure(it.l_tilde.is_finite(), || format!("{} z={z}: infinite limit", d.name()))?;
        }
    }
    let mut worst: f64 = 0.0;
    for beta in [0.5, 0.9] {
        let d = DiscountFunction::linear(beta).unwrap();
        for z in [0.1, 1.0, 10.0] {
            let it = gamma_tilde_iterates(&d, 1.0, z, 1e-13).unwrap();
            worst = worst.max((it.l_tilde - z / (1.0 - beta)).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("linear closed form off by {worst:e}"))?;
    Ok(format!("4 discounts x 3 z values; linear closed form within {worst:.1e}"))
}

fn c5_howard() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for (di, d) in catalog().into_iter().enumerate() {
        for seed in 0..20u64 {
            let spec = RandomModelSpec::new(8, 3);
            let model = random_model(&spec, 5000 + 100 * di as u64 + seed);
            let vi = value_iterate(&model, &d, tight()).map_err(|e| e.to_string())?;
            ensure(vi.converged(), || format!("VI cap on model {seed}"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let f0 = random_policy(&model, &mut rng);
                let h = howard_solve(&model, &d, &f0, HowardOptions::default())
                    .map_err(|e| format!("{}: {e}", d.name()))?;
                worst = worst.max(weighted_diff(&h.value, &vi.value, &model).unwrap());
                for w in h.steps.windows(2) {
                    for x in 0..model.n_states() {
                        let (old, new) = (w[0].value[x], w[1].value[x]);
                        ensure(new >= old - 1e-10, || {
                            format!("{}: value fell at state {x}: {old} -> {new}", d.name())
                        })?;
                        if w[0].improved_states.contains(&x) {
                            ensure(new > old, || format!("{}: no strict gain at {x}", d.name()))?;
                        }
                    }
                }
                runs += 1;
            }
        }
    }
    ensure(worst <= 1e-7, || format!("Howard vs VI {worst:e}"))?;
    Ok(format!("{runs} Howard runs, max diff to VI {worst:.1e}"))
}

fn c6_policy_sets() -> Outcome {
    let cat = catalog();
    let mut recurring = 0;
    for seed in 0..20u64 {
        let d = &cat[seed as usize % cat.len()];
        let model = random_model(&RandomModelSpec::new(6, 3), 6000 + seed);
        let vi = value_iterate(&model, d, tight()).map_err(|e| e.to_string())?;
        let sets = policy_iteration_sets(&model, d, &vi, 200, 1e-9).map_err(|e| e.to_string())?;
        ensure(sets.all_recurring_included(), || {
            format!("model {seed} ({}): recurring {:?} vs limit {:?}", d.name(), sets.recurring, sets.limit)
        })?;
        ensure(sets.limit.iter().all(|s| !s.is_empty()), || "empty A*".into())?;
        recurring += sets.recurring.iter().map(Vec::len).sum::<usize>();
    }
    Ok(format!("20 models, {recurring} recurring maximisers, all inside A*"))
}

fn c7_truncation() -> Outcome {
    let cat = catalog();
    let opts = TruncationOptions::default();
    let mut worst_inc = f64::NEG_INFINITY;
    for seed in 0..10u64 {
        let d = &cat[seed as usize % cat.len()];
        let model = random_model(&RandomModelSpec::new(6, 3).neg_inf(0.4), 7000 + seed);
        let r = truncation_solve(&model, d, &opts).map_err(|e| format!("instance {seed}: {e}"))?;
        ensure(r.all_converged(), || format!("instance {seed} hit the cap"))?;
        worst_inc = worst_inc.max(r.max_increase);
        for v in &r.values {
            for x in 0..model.n_states() {
                ensure(v[x] >= r.limit[x] - 1e-10, || format!("instance {seed} below limit"))?;
            }
        }
    }
    let chain = preset("chain", &BTreeMap::new()).map_err(|e| e.to_string())?;
    let r = truncation_solve(&chain.app.model, &chain.app.discount, &opts).map_err(|e| e.to_string())?;
    let zero = r.limit.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(zero <= 1e-9, || format!("chain limit not zero: {zero:e}"))?;
    let (model, family) = nonlin_mdp::models::build_chain_counterexample(10, 0.5).unwrap();
    let d = family.discount();
    let mut resid: f64 = 0.0;
    for r in [1.0, -2.5, 0.75] {
        let v = family.member(r);
        let tv = bellman_t(&model, &d, &v).unwrap().value;
        for x in family.interior() {
            resid = resid.max((tv[x] - v[x]).abs() / model.weight(x));
        }
    }
    ensure(resid <= 1e-10, || format!("interior residual {resid:e}"))?;
    Ok(format!(
        "10 instances, max increase {worst_inc:.1e}; chain limit {zero:.1e}; v_r interior residual {resid:.1e}"
    ))
}

fn c8_house_selling() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.5, 0.9] {
        for (n, c) in [(4, 0.0), (7, 0.1), (12, 0.3)] {
            let hs = HouseSelling::uniform(1.0, 4.0, n, c).unwrap();
            let d = DiscountFunction::linear(beta).unwrap();
            let a = solve_house_selling(&hs, &d, tight()).map_err(|e| e.to_string())?;
            let model = build_stopping(&hs.stopping_spec().unwrap()).unwrap();
            let (v, _) = classical_discounted_vi(&model, beta, 1e-13, 1_000_000).map_err(|e| e.to_string())?;
            let oracle: f64 = -c + beta * hs.probs.iter().zip(v.iter()).map(|(q, v)| q * v).sum::<f64>();
            worst = worst.max((a.threshold - oracle).abs());
            ensure(a.region_is_up_set && a.geometric_stop, || "region shape".into())?;
            ensure(a.c_star_spread <= 1e-10, || format!("C* spread {}", a.c_star_spread))?;
        }
    }
    ensure(worst <= 1e-8, || format!("threshold vs oracle {worst:e}"))?;
    let pairs = [
        (DiscountFunction::linear(0.5).unwrap(), DiscountFunction::linear(0.9).unwrap()),
        (
            DiscountFunction::sign_effect(0.5, 0.6).unwrap(),
            DiscountFunction::sign_effect(0.5, 0.9).unwrap(),
        ),
        (
            DiscountFunction::sign_effect(0.9, 0.4).unwrap(),
            DiscountFunction::sign_effect(0.2, 0.7).unwrap(),
        ),
        (DiscountFunction::log_blend(0.5).unwrap(), DiscountFunction::log_blend(0.25).unwrap()),
    ];
    for (lo, hi) in &pairs {
        for c in [0.0, 0.2] {
            let hs = HouseSelling::uniform(1.0, 4.0, 10, c).unwrap();
            let a = solve_house_selling(&hs, lo, tight()).map_err(|e| e.to_string())?;
            let b = solve_house_selling(&hs, hi, tight()).map_err(|e| e.to_string())?;
            ensure(a.c_star <= b.c_star + 1e-12 && a.threshold <= b.threshold + 1e-12, || {
                format!("{} vs {}: C* {} vs {}", lo.name(), hi.name(), a.c_star, b.c_star)
            })?;
            ensure(a.region_is_up_set && b.region_is_up_set, || "region not an up-set".into())?;
        }
    }
    Ok(format!("threshold vs oracle {worst:.1e}; {} ordered pairs monotone", pairs.len()))
}

fn c9_presets() -> Outcome {
    let opts = SolveOptions {
        tol: 1e-9,
        max_iters: 1_000_000,
    };
    let mut notes = Vec::new();
    for name in ["growth1", "growth2", "inventory"] {
        let p = preset(name, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let r = value_iterate(&p.app.model, &p.app.discount, opts).map_err(|e| e.to_string())?;
        let resid = nonlin_mdp::solver::bellman_residual(&p.app.model, &p.app.discount, &r.value).unwrap();
        ensure(r.converged() && resid <= 1e-8, || format!("{name}: residual {resid:e}"))?;
        notes.push(format!("{name} {} iters", r.iterations));
    }
    let alpha = growth2_alpha(1.0, 0.5, 0.5, 0.5, 4.0);
    ensure((alpha - 2f64.sqrt()).abs() <= 1e-12, || format!("alpha {alpha}"))?;
    let reject = build_growth2(&Growth2Params {
        eps: 0.25,
        ..Default::default()
    });
    ensure(matches!(reject, Err(ModelsError::Drift { .. })), || "eps 0.25 accepted".into())?;
    let accept = build_growth2(&Growth2Params {
        eps: 0.35,
        ..Default::default()
    });
    ensure(accept.is_ok(), || "eps 0.35 rejected".into())?;
    Ok(format!("{}; alpha = {alpha:.12}", notes.join(", ")))
}

fn scenario_csvs() -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for seed in [1u64, 2] {
        let model = random_model(&RandomModelSpec::new(80, 3), seed);
        for d in catalog().into_iter().skip(1) {
            let r = value_iterate(&model, &d, SolveOptions::default()).map_err(|e| e.to_string())?;
            out.push(value_csv(&model, &r.value, Some(&r.policy)));
            out.push(trace_csv(&r.trace));
        }
    }
    let hs = HouseSelling::uniform(1.0, 4.0, 9, 0.1).unwrap();
    let a = solve_house_selling(&hs, &DiscountFunction::log_blend(0.5).unwrap(), SolveOptions::default())
        .map_err(|e| e.to_string())?;
    let m = build_stopping(&hs.stopping_spec().unwrap()).unwrap();
    out.push(value_csv(&m, &a.value, Some(&a.report.policy)));
    Ok(out)
}

fn c10_determinism() -> Outcome {
    let first = scenario_csvs()?;
    let second = scenario_csvs()?;
    ensure(first == second, || "repeated runs differ".into())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(scenario_csvs)?;
    ensure(first == single, || "single-thread run differs".into())?;
    let bytes: usize = first.iter().map(String::len).sum();
    Ok(format!("{} CSVs ({bytes} bytes) identical across runs and thread counts", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 linear coincidence", c1_linear_coincidence),
        ("2 finite-horizon oracles", c2_finite_horizon),
        ("3 contraction certificate", c3_contraction),
        ("4 gamma iterates", c4_iterates),
        ("5 Howard vs value iteration", c5_howard),
        ("6 maximiser sets", c6_policy_sets),
        ("7 truncation", c7_truncation),
        ("8 house selling", c8_house_selling),
        ("9 application presets", c9_presets),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
