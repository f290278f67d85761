//! Batch front end: load a model file or build a preset, run one algorithm,
//! and write CSV results plus a JSON manifest into an output directory.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use nonlin_mdp::discount::{check_discount, gamma_tilde_iterates, DiscountFunction, SampleGrid};
use nonlin_mdp::export::{csv_field, fmt_f64, trace_csv, value_csv};
use nonlin_mdp::io::{model_to_json, parse_model_json};
use nonlin_mdp::models::{house_selling_problem, preset, solve_house_selling};
use nonlin_mdp::oracle::classical_discounted_vi;
use nonlin_mdp::solver::{
    evaluate_finite_horizon, evaluate_stationary, howard_solve, policy_iteration_sets, policy_t,
    truncation_solve, value_iterate, HowardOptions, SolverError, TraceRecord, TruncationOptions,
};
use nonlin_mdp::{
    validate_model, weighted_diff, FiniteModel, Mode, ModelConstants, SolveOptions,
    StationaryPolicy, Status, ValueTable,
};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable that takes precedence over `--out`.
pub const OUT_ENV: &str = "NONLIN_MDP_OUT";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_ITERATION_CAP: u8 = 2;

const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Value iteration to the optimal value and a greedy policy.
    Solve,
    /// Value of the stationary policy given by --policy.
    Evaluate,
    /// n-stage value of a stationary policy (--horizon, optional --policy).
    FiniteHorizon,
    /// Howard policy improvement from --policy or the lowest-index policy.
    Howard,
    /// Maximiser sets along value iteration compared with those at the optimum.
    PolicySets,
    /// Truncation scheme for utilities unbounded below.
    Truncate,
    /// Threshold analysis for the house-selling preset.
    HouseSelling,
    /// Validate the model and discount function without solving.
    Check,
    /// Solve once per --discount and compare the values.
    Compare,
}

impl Algorithm {
    fn name(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "nonlin-mdp", version, about = "Solve finite MDPs with non-linear discounting")]
pub struct RunConfig {
    /// Model file in the JSON model schema.
    #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
    pub model: Option<PathBuf>,
    /// Built-in model: chain, growth1, growth2, inventory, stopping, house-selling, random.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Preset parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    pub overrides: Vec<(String, f64)>,
    /// Discount function: a file, a JSON spec, or `kind:p1,p2` (repeat for compare).
    #[arg(long, value_name = "PATH|SPEC")]
    pub discount: Vec<String>,
    #[arg(long, value_enum, default_value_t = Algorithm::Solve)]
    pub algorithm: Algorithm,
    /// Stopping tolerance [default: 1e-8; truncate and Howard's inner evaluation use 1e-11].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Output directory; NONLIN_MDP_OUT takes precedence.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for the random preset.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for state sweeps (0 = all cores).
    #[arg(long, value_name = "THREADS")]
    pub parallel: Option<usize>,
    /// Exit 0 even when a property check fails.
    #[arg(long)]
    pub force: bool,
    /// Stationary policy: policy.csv from an earlier run, or a JSON array of action indices.
    #[arg(long, value_name = "PATH")]
    pub policy: Option<PathBuf>,
    /// Horizon for finite-horizon, iteration count for policy-sets (default 200).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Shortcut for `--set beta=...`; with --model and no --discount, selects linear:β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Shortcut for `--set c=...` (house-selling waiting cost).
    #[arg(long)]
    pub c: Option<f64>,
    /// Gap below which actions count as tied maximisers.
    #[arg(long, default_value_t = 1e-9)]
    pub gap_tol: f64,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// What a run produced, besides the files on disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: u8,
    pub out_dir: PathBuf,
    pub summary: String,
    pub notes: Vec<String>,
}

/// Runs `cfg`, writing artifacts into the output directory.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let (threads, note) = thread_setting(cfg.parallel);
    match threads {
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building the thread pool")?;
            pool.install(|| run_inner(cfg, note))
        }
        _ => run_inner(cfg, note),
    }
}

#[cfg(feature = "parallel")]
fn thread_setting(n: Option<usize>) -> (Option<usize>, Option<String>) {
    (n, None)
}

#[cfg(not(feature = "parallel"))]
fn thread_setting(n: Option<usize>) -> (Option<usize>, Option<String>) {
    let note = n.map(|_| "built without the parallel feature; --parallel ignored".to_string());
    (None, note)
}

struct Loaded {
    model: FiniteModel,
    mode: Mode,
    source: Value,
    natural: Option<DiscountFunction>,
    diagnostics: BTreeMap<String, f64>,
    overrides: BTreeMap<String, f64>,
}

fn override_map(cfg: &RunConfig, notes: &mut Vec<String>) -> BTreeMap<String, f64> {
    let mut map: BTreeMap<String, f64> = cfg.overrides.iter().cloned().collect();
    if let Some(b) = cfg.beta {
        map.insert("beta".into(), b);
    }
    if let Some(c) = cfg.c {
        map.insert("c".into(), c);
    }
    if let Some(s) = cfg.seed {
        if cfg.preset.as_deref() == Some("random") {
            map.insert("seed".into(), s as f64);
        } else {
            notes.push("--seed only affects the random preset".into());
        }
    }
    map
}

fn load(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<Loaded> {
    if let Some(path) = &cfg.model {
        if !cfg.overrides.is_empty() || cfg.c.is_some() {
            bail!("--set and --c apply to presets only");
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let (model, mode) =
            parse_model_json(&text).with_context(|| format!("loading model {}", path.display()))?;
        let natural = match cfg.beta {
            Some(b) => Some(DiscountFunction::linear(b)?),
            None => None,
        };
        return Ok(Loaded {
            model,
            mode,
            source: json!({"model": path.display().to_string()}),
            natural,
            diagnostics: BTreeMap::new(),
            overrides: BTreeMap::new(),
        });
    }
    let name = cfg.preset.as_deref().ok_or_else(|| anyhow!("need --model or --preset"))?;
    let overrides = override_map(cfg, notes);
    let p = preset(name, &overrides).with_context(|| format!("building preset {name}"))?;
    Ok(Loaded {
        model: p.app.model,
        mode: p.mode,
        source: json!({"preset": name, "overrides": overrides}),
        natural: Some(p.app.discount),
        diagnostics: p.app.diagnostics,
        overrides,
    })
}

fn parse_discount(text: &str) -> Result<DiscountFunction> {
    let path = Path::new(text);
    let body = if !text.trim_start().starts_with('{') && path.is_file() {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else {
        text.to_string()
    };
    DiscountFunction::parse(&body).with_context(|| format!("discount {text:?}"))
}

fn load_policy(path: &Path, model: &FiniteModel) -> Result<StationaryPolicy> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let choice: Vec<usize> = if text.trim_start().starts_with('[') {
        let v: Value = serde_json::from_str(&text).context("policy JSON")?;
        v.as_array()
            .ok_or_else(|| anyhow!("policy JSON must be an array"))?
            .iter()
            .map(|a| {
                a.as_u64()
                    .map(|a| a as usize)
                    .ok_or_else(|| anyhow!("policy entries must be action indices"))
            })
            .collect::<Result<_>>()?
    } else {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = split_csv_line(lines.next().unwrap_or_default());
        let col = header
            .iter()
            .position(|h| h.trim() == "action_index")
            .ok_or_else(|| anyhow!("policy CSV needs an action_index column"))?;
        lines
            .enumerate()
            .map(|(i, l)| {
                let fields = split_csv_line(l);
                let field = fields.get(col).map(String::as_str).unwrap_or("");
                field
                    .trim()
                    .parse::<usize>()
                    .with_context(|| format!("policy row {}: action_index {field:?}", i + 1))
            })
            .collect::<Result<_>>()?
    };
    StationaryPolicy::new(model, choice).context("policy does not fit the model")
}

/// Splits one CSV record, honouring double-quoted fields.
fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = vec![String::new()];
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '"' if quoted && chars.peek() == Some(&'"') => {
                chars.next();
                fields.last_mut().unwrap().push('"');
            }
            '"' => quoted = !quoted,
            ',' if !quoted => fields.push(String::new()),
            _ => fields.last_mut().unwrap().push(ch),
        }
    }
    fields
}

/// Files, status and algorithm details produced by one algorithm.
#[derive(Default)]
struct Results {
    value: Option<ValueTable>,
    policy: Option<StationaryPolicy>,
    trace: Option<Vec<TraceRecord>>,
    capped: bool,
    failed_checks: Vec<String>,
    errors: Vec<String>,
    details: Value,
    files: Vec<(&'static str, String)>,
    summary: String,
}

fn opts(cfg: &RunConfig, default_tol: f64) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol.unwrap_or(default_tol),
        max_iters: cfg.max_iters,
    }
}

fn status_name(capped: bool) -> &'static str {
    if capped {
        "iteration_cap"
    } else {
        "converged"
    }
}

fn gamma_diagnostics(d: &DiscountFunction, c: &ModelConstants, tol: f64) -> Value {
    if !c.z.is_finite() {
        return json!({"note": "utilities unbounded below; L̃ not defined"});
    }
    if c.z == 0.0 {
        return json!({"l_tilde": 0.0, "note": "all utilities are zero"});
    }
    let majorant_scaled = c.alpha > 1.0 + nonlin_mdp::discount::ALPHA_TOL;
    match gamma_tilde_iterates(d, c.alpha, c.z, (tol * 1e-2).max(1e-12 * c.z)) {
        Ok(it) => json!({
            "alpha": c.alpha,
            "gamma_tilde": if majorant_scaled { "alpha*gamma" } else { "gamma" },
            "z": it.z,
            "l_tilde": it.l_tilde,
            "last_partial_sum": it.last(),
            "residual": it.residual,
            "terms": it.k_stop,
            "stop": format!("{:?}", it.stop),
        }),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn run_inner(cfg: &RunConfig, thread_note: Option<String>) -> Result<Outcome> {
    let mut notes: Vec<String> = thread_note.into_iter().collect();
    let out_dir = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.out.clone());

    let loaded = load(cfg, &mut notes)?;
    let constants = validate_model(&loaded.model, loaded.mode).context("validating model")?;

    let discounts: Vec<(String, DiscountFunction)> = if cfg.discount.is_empty() {
        let d = loaded
            .natural
            .clone()
            .ok_or_else(|| anyhow!("--discount is required with --model (or pass --beta)"))?;
        vec![("default".to_string(), d)]
    } else {
        cfg.discount
            .iter()
            .map(|t| Ok((t.clone(), parse_discount(t)?)))
            .collect::<Result<_>>()?
    };
    match cfg.algorithm {
        Algorithm::Compare if discounts.len() < 2 => bail!("compare needs at least two --discount values"),
        Algorithm::Compare => {}
        _ if discounts.len() > 1 => bail!("only compare accepts several --discount values"),
        _ => {}
    }

    let grid = SampleGrid::default();
    let tol_for_gamma = cfg.tol.unwrap_or(DEFAULT_TOL);
    let mut property_failed = Vec::new();
    let discount_json: Vec<Value> = discounts
        .iter()
        .map(|(input, d)| {
            let report = check_discount(d, &grid);
            if !report.all_passed() {
                property_failed.push(format!("{}: {}", d.name(), report.failures().join(", ")));
            }
            json!({
                "input": input,
                "name": d.name(),
                "spec": d.to_spec(),
                "properties_passed": report.all_passed(),
                "property_report": report,
                "gamma_iterates": gamma_diagnostics(d, &constants, tol_for_gamma),
            })
        })
        .collect();

    let mut res = execute(cfg, &loaded, &discounts)?;
    res.failed_checks.extend(property_failed.iter().map(|s| format!("discount property: {s}")));

    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let write = |name: &str, body: &str| -> Result<()> {
        let p = out_dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))
    };
    if let Some(v) = &res.value {
        let body = value_csv(&loaded.model, v, res.policy.as_ref());
        write("value.csv", &body)?;
        write("policy.csv", &body)?;
    }
    if let Some(t) = &res.trace {
        write("trace.csv", &trace_csv(t))?;
    }
    for (name, body) in &res.files {
        write(name, body)?;
    }
    write(
        "model.json",
        &serde_json::to_string_pretty(&model_to_json(&loaded.model, loaded.mode))?,
    )?;

    let exit_code = if !res.errors.is_empty() || (!res.failed_checks.is_empty() && !cfg.force) {
        EXIT_FAILURE
    } else if res.capped {
        EXIT_ITERATION_CAP
    } else {
        EXIT_OK
    };
    for f in &res.failed_checks {
        notes.push(format!("check failed: {f}"));
    }
    for e in &res.errors {
        notes.push(format!("error: {e}"));
    }

    let manifest = json!({
        "config": config_json(cfg, &out_dir),
        "source": loaded.source,
        "model": {
            "states": loaded.model.n_states(),
            "actions": loaded.model.n_actions(),
            "mode": loaded.mode.to_string(),
            "builder_diagnostics": loaded.diagnostics,
        },
        "constants": constants,
        "discounts": discount_json,
        "algorithm": cfg.algorithm.name(),
        "status": if !res.errors.is_empty() { "error" } else { status_name(res.capped) },
        "failed_checks": res.failed_checks,
        "errors": res.errors,
        "exit_code": exit_code,
        "results": res.details,
        "notes": notes,
    });
    write("manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"))?;

    Ok(Outcome {
        exit_code,
        out_dir,
        summary: res.summary,
        notes,
    })
}

fn config_json(cfg: &RunConfig, out_dir: &Path) -> Value {
    json!({
        "model": cfg.model.as_ref().map(|p| p.display().to_string()),
        "preset": cfg.preset,
        "set": cfg.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>(),
        "discount": cfg.discount,
        "algorithm": cfg.algorithm.name(),
        "tol": cfg.tol,
        "max_iters": cfg.max_iters,
        "out": out_dir.display().to_string(),
        "seed": cfg.seed,
        "parallel": cfg.parallel,
        "force": cfg.force,
        "policy": cfg.policy.as_ref().map(|p| p.display().to_string()),
        "horizon": cfg.horizon,
        "beta": cfg.beta,
        "c": cfg.c,
        "gap_tol": cfg.gap_tol,
    })
}

fn policy_or_default(cfg: &RunConfig, model: &FiniteModel) -> Result<(StationaryPolicy, String)> {
    match &cfg.policy {
        Some(p) => Ok((load_policy(p, model)?, p.display().to_string())),
        None => Ok((StationaryPolicy::lowest_index(model), "lowest_index".into())),
    }
}

fn execute(cfg: &RunConfig, l: &Loaded, discounts: &[(String, DiscountFunction)]) -> Result<Results> {
    let m = &l.model;
    let d = &discounts[0].1;
    let mut r = Results::default();
    match cfg.algorithm {
        Algorithm::Solve => {
            let o = opts(cfg, DEFAULT_TOL);
            let rep = value_iterate(m, d, o)?;
            r.capped = !rep.converged();
            r.summary = format!("{} after {} iterations", rep.status, rep.iterations);
            r.details = json!({
                "tol": o.tol,
                "iterations": rep.iterations,
                "final_residual": rep.final_residual(),
                "final_apriori_bound": rep.trace.last().map(|t| t.apriori_bound),
            });
            r.value = Some(rep.value);
            r.policy = Some(rep.policy);
            r.trace = Some(rep.trace);
        }
        Algorithm::Evaluate => {
            let path = cfg
                .policy
                .as_ref()
                .ok_or_else(|| anyhow!("evaluate needs --policy"))?;
            let f = load_policy(path, m)?;
            let o = opts(cfg, DEFAULT_TOL);
            let v = match evaluate_stationary(m, d, &f, o) {
                Ok(v) => v,
                Err(SolverError::IterationCap { best, .. }) => {
                    r.capped = true;
                    best
                }
                Err(e) => return Err(e.into()),
            };
            let residual = weighted_diff(&policy_t(m, d, &f, &v)?, &v, m)?;
            r.summary = format!("{}; ‖T_f v − v‖ = {residual:e}", status_name(r.capped));
            r.details = json!({"tol": o.tol, "policy_residual": residual});
            r.value = Some(v);
            r.policy = Some(f);
        }
        Algorithm::FiniteHorizon => {
            let n = cfg
                .horizon
                .ok_or_else(|| anyhow!("finite-horizon needs --horizon"))?;
            let (f, source) = policy_or_default(cfg, m)?;
            let v = evaluate_finite_horizon(m, d, &vec![f.clone(); n], n)?;
            r.summary = format!("{n}-stage values of policy {source}");
            r.details = json!({"horizon": n, "policy": source});
            r.value = Some(v);
            r.policy = Some(f);
        }
        Algorithm::Howard => howard(cfg, m, d, &mut r)?,
        Algorithm::PolicySets => {
            let o = opts(cfg, DEFAULT_TOL);
            let optimum = value_iterate(m, d, o)?;
            let n_max = cfg.horizon.unwrap_or(200);
            let sets = policy_iteration_sets(m, d, &optimum, n_max, cfg.gap_tol)?;
            if !sets.all_recurring_included() {
                r.failed_checks.push("a recurring maximiser lies outside A*(x)".into());
            }
            r.summary = format!(
                "recurring maximisers inside A*: {}",
                sets.all_recurring_included()
            );
            r.details = json!({
                "tol": o.tol,
                "n_max": n_max,
                "gap_tol": sets.gap_tol,
                "tail_start": sets.tail_start,
                "limit": sets.limit,
                "recurring": sets.recurring,
                "tail_union": sets.tail_union,
                "recurring_included": sets.recurring_included,
                "union_included": sets.union_included,
            });
            r.value = Some(optimum.value);
            r.policy = Some(optimum.policy);
            r.trace = Some(optimum.trace);
        }
        Algorithm::Truncate => {
            let base = TruncationOptions::default();
            let o = TruncationOptions {
                solve: opts(cfg, base.solve.tol),
                ..base
            };
            let t = truncation_solve(m, d, &o)?;
            r.capped = !t.all_converged();
            if !t.monotone {
                r.failed_checks.push(format!(
                    "truncated values increased by {:e} along the K schedule",
                    t.max_increase
                ));
            }
            let per_k: Vec<Value> = (0..t.k_schedule.len())
                .map(|i| {
                    json!({
                        "k": t.k_schedule[i],
                        "status": t.statuses[i].to_string(),
                        "iterations": t.iterations[i],
                    })
                })
                .collect();
            r.summary = format!(
                "{} K values, monotone: {}, max increase {:e}",
                t.k_schedule.len(),
                t.monotone,
                t.max_increase
            );
            r.details = json!({
                "tol": o.solve.tol,
                "per_k": per_k,
                "monotone": t.monotone,
                "max_increase": t.max_increase,
                "stabilized": t.stabilized,
            });
            r.files.push(("truncation.csv", truncation_csv(m, &t.k_schedule, &t.values)));
            r.value = Some(t.limit);
            r.policy = Some(t.policy);
        }
        Algorithm::HouseSelling => {
            if cfg.preset.as_deref() != Some("house-selling") {
                bail!("house-selling needs --preset house-selling");
            }
            let hs = house_selling_problem(&l.overrides)?;
            let o = opts(cfg, DEFAULT_TOL);
            let a = solve_house_selling(&hs, d, o)?;
            r.capped = !a.report.converged();
            if !a.region_is_up_set {
                r.failed_checks.push("stopping region is not an up-set".into());
            }
            r.summary = format!("C* = {}, accept offers ≥ {}", a.c_star, a.threshold);
            r.details = json!({
                "tol": o.tol,
                "c_star": a.c_star,
                "c_star_spread": a.c_star_spread,
                "threshold": a.threshold,
                "offers": hs.offers,
                "stop_region": a.stop_region,
                "region_is_up_set": a.region_is_up_set,
                "accept_prob": a.accept_prob,
                "geometric_stop": a.geometric_stop,
            });
            r.value = Some(a.value);
            r.policy = Some(a.report.policy);
            r.trace = Some(a.report.trace);
        }
        Algorithm::Check => {
            r.summary = "model and discount validated".into();
            r.details = json!({});
        }
        Algorithm::Compare => compare(cfg, m, discounts, &mut r),
    }
    Ok(r)
}

fn howard(cfg: &RunConfig, m: &FiniteModel, d: &DiscountFunction, r: &mut Results) -> Result<()> {
    let (f0, source) = policy_or_default(cfg, m)?;
    let mut o = HowardOptions::default();
    o.eval = opts(cfg, o.eval.tol);
    o.eval.max_iters = cfg.max_iters;
    o.gap_tol = cfg.gap_tol;
    let h = match howard_solve(m, d, &f0, o) {
        Ok(h) => h,
        Err(SolverError::IterationCap { iterations, best }) => {
            r.capped = true;
            r.summary = format!("iteration cap after {iterations} outer steps");
            r.details = json!({"initial_policy": source, "iterations": iterations});
            r.value = Some(best);
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let mut monotone = true;
    for w in h.steps.windows(2) {
        monotone &= (0..m.n_states()).all(|x| w[1].value[x] >= w[0].value[x] - 1e-10);
    }
    if !monotone {
        r.failed_checks.push("Howard values decreased between outer steps".into());
    }
    let steps: Vec<Value> = h
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "step": i,
                "improved_states": s.improved_states,
                "improvement": s.improvement,
                "value_change": s.value_change,
            })
        })
        .collect();
    r.capped = h.status == Status::IterationCap;
    r.summary = format!("{} after {} policy improvements", h.status, h.iterations);
    r.details = json!({
        "initial_policy": source,
        "eval_tol": o.eval.tol,
        "iterations": h.iterations,
        "monotone": monotone,
        "steps": steps,
    });
    r.value = Some(h.value);
    r.policy = Some(h.policy);
    Ok(())
}

fn compare(cfg: &RunConfig, m: &FiniteModel, discounts: &[(String, DiscountFunction)], r: &mut Results) {
    let o = opts(cfg, DEFAULT_TOL);
    let runs: Vec<Option<ValueTable>> = discounts
        .iter()
        .map(|(_, d)| match value_iterate(m, d, o) {
            Ok(rep) => {
                r.capped |= !rep.converged();
                Some(rep.value)
            }
            Err(e) => {
                r.errors.push(format!("{}: {e}", d.name()));
                None
            }
        })
        .collect();

    let mut oracle: Vec<(String, Vec<f64>, f64)> = Vec::new();
    for ((_, d), v) in discounts.iter().zip(&runs) {
        let (Some(beta), Some(v)) = (d.linear_beta(), v) else {
            continue;
        };
        match classical_discounted_vi(m, beta, o.tol, o.max_iters) {
            Ok((w, _)) => {
                let diffs: Vec<f64> = (0..m.n_states()).map(|x| (v[x] - w[x]).abs()).collect();
                let max = weighted_diff(v, &w, m).unwrap_or(f64::NAN);
                oracle.push((d.name(), diffs, max));
            }
            Err(e) => r.errors.push(format!("classical oracle for {}: {e}", d.name())),
        }
    }

    let mut csv = String::from("state_index,state_label");
    for (_, d) in discounts {
        write!(csv, ",{}", csv_field(&format!("v[{}]", d.name()))).unwrap();
    }
    for (name, _, _) in &oracle {
        write!(csv, ",{}", csv_field(&format!("oracle_absdiff[{name}]"))).unwrap();
    }
    csv.push('\n');
    for x in 0..m.n_states() {
        write!(csv, "{x},{}", csv_field(&m.states()[x].label)).unwrap();
        for v in &runs {
            write!(csv, ",{}", v.as_ref().map_or("nan".into(), |v| fmt_f64(v[x]))).unwrap();
        }
        for (_, diffs, _) in &oracle {
            write!(csv, ",{}", fmt_f64(diffs[x])).unwrap();
        }
        csv.push('\n');
    }

    let mut pairs_csv = String::from("discount_a,discount_b,max_weighted_diff\n");
    let mut pairs = Vec::new();
    for i in 0..discounts.len() {
        for j in i + 1..discounts.len() {
            let diff = match (&runs[i], &runs[j]) {
                (Some(a), Some(b)) => weighted_diff(a, b, m).unwrap_or(f64::NAN),
                _ => f64::NAN,
            };
            let (a, b) = (discounts[i].1.name(), discounts[j].1.name());
            writeln!(pairs_csv, "{},{},{}", csv_field(&a), csv_field(&b), fmt_f64(diff)).unwrap();
            pairs.push(json!({"a": a, "b": b, "max_weighted_diff": diff}));
        }
    }
    let oracle_json: Vec<Value> = oracle
        .iter()
        .map(|(n, _, max)| json!({"discount": n, "max_weighted_diff": max}))
        .collect();
    r.summary = format!("compared {} discount functions", discounts.len());
    r.details = json!({
        "tol": o.tol,
        "pairs": pairs,
        "oracle": oracle_json,
        "failed": runs.iter().zip(discounts).filter(|(v, _)| v.is_none()).map(|(_, (_, d))| d.name()).collect::<Vec<_>>(),
    });
    r.files.push(("comparison.csv", csv));
    r.files.push(("comparison_pairs.csv", pairs_csv));
}

fn truncation_csv(m: &FiniteModel, ks: &[f64], values: &[ValueTable]) -> String {
    let mut out = String::from("state_index,state_label");
    for k in ks {
        write!(out, ",K={k}").unwrap();
    }
    out.push('\n');
    for x in 0..m.n_states() {
        write!(out, "{x},{}", csv_field(&m.states()[x].label)).unwrap();
        for v in values {
            write!(out, ",{}", fmt_f64(v[x])).unwrap();
        }
        out.push('\n');
    }
    out
}
