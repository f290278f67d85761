//! Discount functions δ with their comparison modulus γ, a sampled checker
//! for the modulus axioms, and the γ̃-iterate machinery behind every error
//! bound the solvers report.
//!
//! The catalog:
//!
//! | kind          | δ(z), z ≥ 0                   | δ(z), z < 0      | γ(z)              |
//! |---------------|-------------------------------|------------------|-------------------|
//! | `linear`      | βz                            | βz               | βz                |
//! | `sign_effect` | d₂z                           | d₁z              | max(d₁, d₂)·z     |
//! | `log_blend`   | (1−ε)z + ε·ln(1+z)            | (1−ε)z           | δ on ℝ₊           |
//! | `log_blend2`  | (1−2ε)z + ε·ln(1+z)           | (1−2ε)z          | δ on ℝ₊           |
//!
//! The log-blend functions are only meaningful on ℝ₊ as formulas. Below zero
//! they continue linearly with their asymptotic slope, which is the steepest
//! continuation for which `|δ(z₁) − δ(z₂)| ≤ γ(|z₁ − z₂|)` still holds across
//! a sign change.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Absolute slack used by every sampled inequality.
pub const PROPERTY_TOL: f64 = 1e-12;

/// Drift constants within this distance of one select the `α ≤ 1` branch of γ̃.
pub const ALPHA_TOL: f64 = 1e-12;

/// Default cap on the number of γ̃_k terms.
pub const DEFAULT_ITERATE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscountError {
    #[error("ParamError: {kind}: {reason}")]
    Param { kind: String, reason: String },
    #[error("DivergenceError: γ̃ iterates did not settle within {cap} terms")]
    Divergence { cap: usize },
    #[error("DriftError: α·γ(y) < y fails at y = {y:e} with α = {alpha}")]
    Drift { alpha: f64, y: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("cannot parse discount spec: {0}")]
    Parse(String),
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Linear { beta: f64 },
    SignEffect { loss: f64, gain: f64 },
    LogBlend { eps: f64 },
    LogBlend2 { eps: f64 },
    Custom { name: String, delta: RealFn, gamma: RealFn },
}

/// A discount function together with its comparison modulus.
#[derive(Clone)]
pub struct DiscountFunction {
    kind: Kind,
}

impl fmt::Debug for DiscountFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn unit_interval(kind: &str, name: &str, value: f64) -> Result<(), DiscountError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(DiscountError::Param {
            kind: kind.into(),
            reason: format!("{name} = {value} must lie in (0, 1)"),
        })
    }
}

impl DiscountFunction {
    /// Classical discounting `δ(z) = βz`.
    pub fn linear(beta: f64) -> Result<Self, DiscountError> {
        unit_interval("linear", "beta", beta)?;
        Ok(Self {
            kind: Kind::Linear { beta },
        })
    }

    /// Losses discounted by `loss`, gains by `gain`.
    pub fn sign_effect(loss: f64, gain: f64) -> Result<Self, DiscountError> {
        unit_interval("sign_effect", "d1", loss)?;
        unit_interval("sign_effect", "d2", gain)?;
        Ok(Self {
            kind: Kind::SignEffect { loss, gain },
        })
    }

    /// `δ(z) = (1−ε)z + ε ln(1+z)` on ℝ₊; γ = δ.
    pub fn log_blend(eps: f64) -> Result<Self, DiscountError> {
        unit_interval("log_blend", "eps", eps)?;
        Ok(Self {
            kind: Kind::LogBlend { eps },
        })
    }

    /// `δ(z) = (1−2ε)z + ε ln(1+z)` on ℝ₊; γ = δ. Needs `ε < 1/2`.
    pub fn log_blend2(eps: f64) -> Result<Self, DiscountError> {
        unit_interval("log_blend2", "eps", eps)?;
        if eps >= 0.5 {
            return Err(DiscountError::Param {
                kind: "log_blend2".into(),
                reason: format!("eps = {eps} must be below 1/2 for δ to increase"),
            });
        }
        Ok(Self {
            kind: Kind::LogBlend2 { eps },
        })
    }

    /// Extension point for discount functions outside the catalog. Nothing is
    /// verified here; run [`check_discount`] before handing it to a solver.
    pub fn custom(
        name: impl Into<String>,
        delta: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: Kind::Custom {
                name: name.into(),
                delta: Arc::new(delta),
                gamma: Arc::new(gamma),
            },
        }
    }

    pub fn delta(&self, z: f64) -> f64 {
        if z == f64::NEG_INFINITY {
            if let Kind::Custom { delta, .. } = &self.kind {
                return delta(z);
            }
            return f64::NEG_INFINITY;
        }
        match &self.kind {
            Kind::Linear { beta } => beta * z,
            Kind::SignEffect { loss, gain } => {
                if z <= 0.0 {
                    loss * z
                } else {
                    gain * z
                }
            }
            Kind::LogBlend { eps } => {
                if z >= 0.0 {
                    (1.0 - eps) * z + eps * z.ln_1p()
                } else {
                    (1.0 - eps) * z
                }
            }
            Kind::LogBlend2 { eps } => {
                if z >= 0.0 {
                    (1.0 - 2.0 * eps) * z + eps * z.ln_1p()
                } else {
                    (1.0 - 2.0 * eps) * z
                }
            }
            Kind::Custom { delta, .. } => delta(z),
        }
    }

    /// The modulus γ on ℝ₊.
    pub fn gamma(&self, z: f64) -> f64 {
        match &self.kind {
            Kind::Linear { beta } => beta * z,
            Kind::SignEffect { loss, gain } => loss.max(*gain) * z,
            Kind::LogBlend { eps } => (1.0 - eps) * z + eps * z.ln_1p(),
            Kind::LogBlend2 { eps } => (1.0 - 2.0 * eps) * z + eps * z.ln_1p(),
            Kind::Custom { gamma, .. } => gamma(z),
        }
    }

    /// γ̃: γ when `α ≤ 1`, `α·γ` otherwise.
    pub fn gamma_tilde(&self, alpha: f64, y: f64) -> f64 {
        if alpha <= 1.0 + ALPHA_TOL {
            self.gamma(y)
        } else {
            alpha * self.gamma(y)
        }
    }

    pub fn kind(&self) -> &str {
        match &self.kind {
            Kind::Linear { .. } => "linear",
            Kind::SignEffect { .. } => "sign_effect",
            Kind::LogBlend { .. } => "log_blend",
            Kind::LogBlend2 { .. } => "log_blend2",
            Kind::Custom { .. } => "custom",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        match &self.kind {
            Kind::Linear { beta } => {
                p.insert("beta".into(), *beta);
            }
            Kind::SignEffect { loss, gain } => {
                p.insert("d1".into(), *loss);
                p.insert("d2".into(), *gain);
            }
            Kind::LogBlend { eps } | Kind::LogBlend2 { eps } => {
                p.insert("eps".into(), *eps);
            }
            Kind::Custom { .. } => {}
        }
        p
    }

    pub fn name(&self) -> String {
        if let Kind::Custom { name, .. } = &self.kind {
            return name.clone();
        }
        let params: Vec<String> = self
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("{}({})", self.kind(), params.join(","))
    }

    /// The linear factor β when δ is linear.
    pub fn linear_beta(&self) -> Option<f64> {
        match self.kind {
            Kind::Linear { beta } => Some(beta),
            _ => None,
        }
    }

    pub fn to_spec(&self) -> Option<DiscountSpec> {
        match self.kind {
            Kind::Custom { .. } => None,
            _ => Some(DiscountSpec {
                kind: self.kind().to_string(),
                params: self.params(),
            }),
        }
    }

    /// Parses either JSON (`{"kind": ..., "params": {...}}`) or the short
    /// form `kind:p1,p2` (e.g. `linear:0.9`, `sign_effect:0.5,0.9`).
    pub fn parse(text: &str) -> Result<Self, DiscountError> {
        let text = text.trim();
        if text.starts_with('{') {
            let spec: DiscountSpec =
                serde_json::from_str(text).map_err(|e| DiscountError::Parse(e.to_string()))?;
            return spec.build();
        }
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| DiscountError::Parse(format!("expected kind:params, got {text:?}")))?;
        let values = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| DiscountError::Parse(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let names: &[&str] = match kind {
            "linear" => &["beta"],
            "sign_effect" => &["d1", "d2"],
            "log_blend" | "log_blend2" => &["eps"],
            other => return Err(DiscountError::Parse(format!("unknown kind {other:?}"))),
        };
        if values.len() != names.len() {
            return Err(DiscountError::Parse(format!(
                "{kind} takes {} parameter(s), got {}",
                names.len(),
                values.len()
            )));
        }
        DiscountSpec {
            kind: kind.to_string(),
            params: names.iter().map(|n| n.to_string()).zip(values).collect(),
        }
        .build()
    }
}

/// Serialized form of a catalog discount function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl DiscountSpec {
    pub fn build(&self) -> Result<DiscountFunction, DiscountError> {
        let get = |name: &str| {
            self.params.get(name).copied().ok_or_else(|| DiscountError::Param {
                kind: self.kind.clone(),
                reason: format!("missing parameter {name:?}"),
            })
        };
        match self.kind.as_str() {
            "linear" => DiscountFunction::linear(get("beta")?),
            "sign_effect" => DiscountFunction::sign_effect(get("d1")?, get("d2")?),
            "log_blend" => DiscountFunction::log_blend(get("eps")?),
            "log_blend2" => DiscountFunction::log_blend2(get("eps")?),
            other => Err(DiscountError::Parse(format!("unknown kind {other:?}"))),
        }
    }
}

/// One representative of each catalog kind.
pub fn catalog() -> Vec<DiscountFunction> {
    vec![
        DiscountFunction::linear(0.9).unwrap(),
        DiscountFunction::sign_effect(0.5, 0.9).unwrap(),
        DiscountFunction::log_blend(0.5).unwrap(),
        DiscountFunction::log_blend2(0.25).unwrap(),
    ]
}

// ── property checks ─────────────────────────────────────────────────────

/// Sample points used by [`check_discount`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    /// Evenly spaced points on `[lo, hi]`; the points `0, ±1e-6, ±1e-3` are added.
    pub points: usize,
    /// Extra uniformly random pairs on `[lo, hi]²`.
    pub random_pairs: usize,
    pub seed: u64,
    /// Factors `d ≥ 1` for `γ(d·y) ≤ d·γ(y)`.
    pub factors: Vec<f64>,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            lo: -50.0,
            hi: 50.0,
            points: 400,
            random_pairs: 200,
            seed: 0x5eed,
            factors: vec![1.0, 1.5, 2.0, 3.0, 5.0, 10.0],
        }
    }
}

impl SampleGrid {
    fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.points)
            .map(|i| {
                if self.points == 1 {
                    self.lo
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
                }
            })
            .collect();
        v.extend([0.0, 1e-6, -1e-6, 1e-3, -1e-3]);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.random_pairs)
            .map(|_| (rng.gen_range(self.lo..=self.hi), rng.gen_range(self.lo..=self.hi)))
            .collect()
    }
}

/// Outcome of one sampled inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// Largest `lhs − rhs` seen (tolerance already subtracted); `≤ 0` means satisfied.
    pub worst_margin: f64,
    /// Arguments at which `worst_margin` occurred.
    pub worst_sample: Vec<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub discount: String,
    pub grid: SampleGrid,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

struct Tracker {
    name: &'static str,
    strict: bool,
    worst: f64,
    at: Vec<f64>,
    n: usize,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            strict: false,
            worst: f64::NEG_INFINITY,
            at: Vec::new(),
            n: 0,
        }
    }

    /// Passing requires every margin `< 0` rather than `≤ 0`.
    fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    fn record(&mut self, margin: f64, at: &[f64]) {
        self.n += 1;
        let margin = if margin.is_nan() { f64::INFINITY } else { margin };
        if margin > self.worst {
            self.worst = margin;
            self.at = at.to_vec();
        }
    }

    fn finish(self) -> PropertyCheck {
        let passed = if self.strict {
            self.worst < 0.0
        } else {
            self.worst <= 0.0
        };
        PropertyCheck {
            name: self.name.to_string(),
            passed,
            worst_margin: self.worst,
            worst_sample: self.at,
            samples: self.n,
        }
    }
}

fn gamma_checks(gamma: &dyn Fn(f64) -> f64, grid: &SampleGrid, positives: &[f64]) -> Vec<PropertyCheck> {
    let mut below = Tracker::new("gamma_below_identity").strict();
    let mut increasing = Tracker::new("gamma_increasing");
    let mut subadditive = Tracker::new("gamma_subadditive");
    let mut homogeneous = Tracker::new("gamma_homogeneity");

    for &z in positives {
        below.record(gamma(z) - z, &[z]);
    }
    for w in positives.windows(2) {
        increasing.record(gamma(w[0]) - gamma(w[1]), &[w[0], w[1]]);
    }
    let mut pos_pairs: Vec<(f64, f64)> = Vec::new();
    for (i, &y) in positives.iter().enumerate() {
        for &z in &positives[i..] {
            pos_pairs.push((y, z));
        }
    }
    pos_pairs.extend(grid.pairs().into_iter().map(|(a, b)| (a.abs(), b.abs())));
    for (y, z) in pos_pairs {
        subadditive.record(gamma(y + z) - gamma(y) - gamma(z) - PROPERTY_TOL, &[y, z]);
    }
    for &d in &grid.factors {
        for &y in positives {
            homogeneous.record(gamma(d * y) - d * gamma(y) - PROPERTY_TOL, &[d, y]);
        }
    }
    vec![below.finish(), increasing.finish(), subadditive.finish(), homogeneous.finish()]
}

/// Samples every axiom on `grid` and reports the worst violation of each.
pub fn check_discount(d: &DiscountFunction, grid: &SampleGrid) -> PropertyReport {
    let values = grid.values();
    let positives: Vec<f64> = values.iter().copied().filter(|&z| z > 0.0).collect();
    let magnitudes: Vec<f64> = {
        let mut m: Vec<f64> = values.iter().map(|z| z.abs()).filter(|&z| z > 0.0).collect();
        m.sort_by(f64::total_cmp);
        m.dedup();
        m
    };

    let mut checks = Vec::new();

    let mut zero = Tracker::new("delta_zero");
    let d0 = d.delta(0.0);
    zero.record(if d0 == 0.0 { 0.0 } else { d0.abs().max(f64::MIN_POSITIVE) }, &[0.0]);
    checks.push(zero.finish());

    let mut neg_inf = Tracker::new("delta_neg_inf");
    let dn = d.delta(f64::NEG_INFINITY);
    neg_inf.record(if dn == f64::NEG_INFINITY { 0.0 } else { 1.0 }, &[f64::NEG_INFINITY]);
    checks.push(neg_inf.finish());

    let mut increasing = Tracker::new("delta_increasing");
    for w in values.windows(2) {
        increasing.record(d.delta(w[0]) - d.delta(w[1]), &[w[0], w[1]]);
    }
    checks.push(increasing.finish());

    let mut modulus = Tracker::new("modulus");
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(values.len() * values.len() / 2);
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs.extend(grid.pairs());
    for (a, b) in pairs {
        let lhs = (d.delta(a) - d.delta(b)).abs();
        modulus.record(lhs - d.gamma((a - b).abs()) - PROPERTY_TOL, &[a, b]);
    }
    checks.push(modulus.finish());

    let mut bounded = Tracker::new("delta_bounded_by_gamma");
    for &z in &values {
        bounded.record(d.delta(z).abs() - d.gamma(z.abs()) - PROPERTY_TOL, &[z]);
    }
    checks.push(bounded.finish());

    let gamma = |z: f64| d.gamma(z);
    let mut gamma_part = gamma_checks(&gamma, grid, &positives);
    // γ(z) < z is sampled on |z| so negative grid points count too.
    gamma_part[0] = {
        let mut below = Tracker::new("gamma_below_identity").strict();
        for &z in &magnitudes {
            below.record(d.gamma(z) - z, &[z]);
        }
        below.finish()
    };
    checks.extend(gamma_part);

    PropertyReport {
        discount: d.name(),
        grid: grid.clone(),
        checks,
    }
}

/// The γ-only axioms for a standalone comparison function.
pub fn check_modulus(name: &str, gamma: impl Fn(f64) -> f64, grid: &SampleGrid) -> PropertyReport {
    let positives: Vec<f64> = grid.values().into_iter().filter(|&z| z > 0.0).collect();
    PropertyReport {
        discount: name.to_string(),
        grid: grid.clone(),
        checks: gamma_checks(&gamma, grid, &positives),
    }
}

/// Samples `α·γ(y) < y` on a log grid over `[1e-8, 1e8]` when `α > 1`.
pub fn check_drift(d: &DiscountFunction, alpha: f64) -> Result<(), DiscountError> {
    if alpha <= 1.0 + ALPHA_TOL {
        return Ok(());
    }
    for k in -160..=160 {
        let y = 10f64.powf(k as f64 / 20.0);
        if alpha * d.gamma(y) >= y {
            return Err(DiscountError::Drift { alpha, y });
        }
    }
    Ok(())
}

// ── γ̃ iterates ──────────────────────────────────────────────────────────

/// Which test ended the γ̃_k recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterateStop {
    /// The increment majorant γ̃^(k−1)(z) fell below `tol`.
    Majorant,
    /// The observed increment γ̃_k − γ̃_{k−1} fell below `tol`.
    Increment,
}

/// The nested sums `γ̃_k(z) = z + γ̃(γ̃_{k−1}(z))` and a certified bound on their limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaIterates {
    pub z: f64,
    pub alpha: f64,
    pub tol: f64,
    /// γ̃_1(z), …, γ̃_{k_stop}(z).
    pub sequence: Vec<f64>,
    /// γ̃^(0)(z), …, γ̃^(k_stop−1)(z): entry `j` bounds `sequence[j+1] − sequence[j]`.
    pub majorants: Vec<f64>,
    pub k_stop: usize,
    pub stop: IterateStop,
    /// Certified bound on `L̃(z) − γ̃_{k_stop}(z)`.
    pub residual: f64,
    /// Certified upper bound on `L̃(z)`: last term plus `residual`.
    pub l_tilde: f64,
}

impl GammaIterates {
    pub fn last(&self) -> f64 {
        *self.sequence.last().expect("nonempty")
    }
}

/// Runs the γ̃_k recursion to `tol` with the default term cap.
pub fn gamma_tilde_iterates(
    d: &DiscountFunction,
    alpha: f64,
    z: f64,
    tol: f64,
) -> Result<GammaIterates, DiscountError> {
    gamma_tilde_iterates_capped(d, alpha, z, tol, DEFAULT_ITERATE_CAP)
}

pub fn gamma_tilde_iterates_capped(
    d: &DiscountFunction,
    alpha: f64,
    z: f64,
    tol: f64,
    cap: usize,
) -> Result<GammaIterates, DiscountError> {
    if !(z.is_finite() && z > 0.0) {
        return Err(DiscountError::Argument(format!("z = {z} must be positive and finite")));
    }
    if !(tol > 0.0) {
        return Err(DiscountError::Argument(format!("tol = {tol} must be positive")));
    }
    check_drift(d, alpha)?;
    let gt = |y: f64| d.gamma_tilde(alpha, y);

    let mut sequence = vec![z];
    let mut majorants = vec![z];
    let stop = loop {
        if *majorants.last().unwrap() < tol {
            break IterateStop::Majorant;
        }
        if sequence.len() >= cap {
            return Err(DiscountError::Divergence { cap });
        }
        let last = *sequence.last().unwrap();
        let next = z + gt(last);
        let p = gt(*majorants.last().unwrap());
        sequence.push(next);
        majorants.push(p);
        if next - last < tol {
            break IterateStop::Increment;
        }
    };
    let last = *sequence.last().unwrap();

    let mut residual = super_solution_gap(&gt, z, last, tol, cap)?;
    if stop == IterateStop::Majorant {
        if let Some(tail) = majorant_tail(&gt, *majorants.last().unwrap(), cap) {
            residual = residual.min(tail);
        }
    }
    Ok(GammaIterates {
        z,
        alpha,
        tol,
        k_stop: sequence.len(),
        sequence,
        majorants,
        stop,
        residual,
        l_tilde: last + residual,
    })
}

/// `Σ_{j ≥ 1} γ̃^(j)(p)`, if it settles in floating point within `cap` terms.
fn majorant_tail(gt: &dyn Fn(f64) -> f64, p: f64, cap: usize) -> Option<f64> {
    let mut term = gt(p);
    let mut sum = 0.0;
    for _ in 0..cap.min(1_000_000) {
        if term == 0.0 || sum + term == sum {
            return Some(sum);
        }
        sum += term;
        term = gt(term);
    }
    None
}

/// Distance from `last` to the smallest located `y` with `z + γ̃(y) ≤ y`.
///
/// Any such `y` bounds every γ̃_k(z) by induction, so `y` bounds the limit.
fn super_solution_gap(
    gt: &dyn Fn(f64) -> f64,
    z: f64,
    last: f64,
    tol: f64,
    cap: usize,
) -> Result<f64, DiscountError> {
    let is_super = |y: f64| z + gt(y) <= y;
    if is_super(last) {
        return Ok(0.0);
    }
    let mut step = tol.max(last * f64::EPSILON);
    let mut hi = None;
    for _ in 0..2000 {
        let y = last + step;
        if !y.is_finite() {
            break;
        }
        if is_super(y) {
            hi = Some(y);
            break;
        }
        step *= 2.0;
    }
    let Some(mut hi) = hi else {
        return Err(DiscountError::Divergence { cap });
    };
    let mut lo = last;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if is_super(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi - last)
}

/// The n-fold composition γ̃^(n)(z).
pub fn gamma_tilde_power(d: &DiscountFunction, alpha: f64, z: f64, n: usize) -> f64 {
    let mut y = z;
    for _ in 0..n {
        y = d.gamma_tilde(alpha, y);
    }
    y
}
