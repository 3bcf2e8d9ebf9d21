//! Run configuration: a JSON file, command-line flags layered on top, and
//! per-command defaults underneath.
//!
//! ```json
//! {
//!   "command": "uniqueness",
//!   "seed": 7,
//!   "out": "verdict.json",
//!   "model": { "ising": { "beta": 0.2, "m": 2 } },
//!   "params": { "tol": 1e-6, "r_max": 200 }
//! }
//! ```
//!
//! Unknown keys are rejected, and so are parameters the chosen command does
//! not read. Paths inside a config file are relative to the file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::formats::read_json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    CheckDobrushin,
    CheckAttractive,
    Uniqueness,
    ExactGibbs,
    SampleGlauber,
    Entropy,
    SoficEntropy,
    SewardBound,
    FInvariant,
    PhaseCriterion,
    IsingScan,
    SoficGen,
    Selftest,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::CheckDobrushin => "check-dobrushin",
            CommandName::CheckAttractive => "check-attractive",
            CommandName::Uniqueness => "uniqueness",
            CommandName::ExactGibbs => "exact-gibbs",
            CommandName::SampleGlauber => "sample-glauber",
            CommandName::Entropy => "entropy",
            CommandName::SoficEntropy => "sofic-entropy",
            CommandName::SewardBound => "seward-bound",
            CommandName::FInvariant => "f-invariant",
            CommandName::PhaseCriterion => "phase-criterion",
            CommandName::IsingScan => "ising-scan",
            CommandName::SoficGen => "sofic-gen",
            CommandName::Selftest => "selftest",
        }
    }

    /// Parameter keys the command reads, with their defaults.
    fn defaults(self) -> Value {
        let ti = json!({"grid_points": 11, "burn_in": 200, "sweeps": 2000, "batches": 20});
        let sofic_ti = json!({"grid_points": 11, "burn_in": 100, "sweeps": 400, "batches": 20, "exact_bits": 24.0});
        let mut v = match self {
            CommandName::CheckDobrushin | CommandName::CheckAttractive | CommandName::PhaseCriterion => json!({}),
            CommandName::Uniqueness => json!({"tol": 1e-6, "r_max": 200}),
            CommandName::ExactGibbs => json!({"budget": gibbsent::DEFAULT_BUDGET}),
            CommandName::SampleGlauber => json!({"burn_in": 200, "sweeps": 2000, "batches": 20}),
            CommandName::Entropy => json!({"method": "exact", "budget": gibbsent::DEFAULT_BUDGET}),
            CommandName::SoficEntropy => json!({"sizes": [100, 1000], "seeds": 3}),
            CommandName::SewardBound => json!({"radius": [2], "samples": 2000, "conditioning": "past"}),
            CommandName::FInvariant => json!({"method": "markov", "r_max": 1}),
            CommandName::IsingScan => json!({
                "m": 2, "beta_grid": "0:1:0.05", "tol": 1e-6, "r_max": 200,
                "radius": [2], "samples": 200, "conditioning": "past",
                "sizes": [1000], "seeds": 2,
            }),
            CommandName::SoficGen => json!({"m": 2, "n": 1000}),
            CommandName::Selftest => json!({"quick": false}),
        };
        let extra = match self {
            CommandName::Entropy => Some(ti),
            CommandName::SoficEntropy | CommandName::IsingScan => Some(sofic_ti),
            _ => None,
        };
        if let (Some(Value::Object(extra)), Value::Object(obj)) = (extra, &mut v) {
            obj.extend(extra);
        }
        v
    }

    /// Whether the command consumes randomness and therefore needs a master seed.
    fn stochastic(self, params: &Params) -> bool {
        match self {
            CommandName::SampleGlauber
            | CommandName::SoficEntropy
            | CommandName::SewardBound
            | CommandName::IsingScan
            | CommandName::SoficGen => true,
            CommandName::Entropy => params.method.as_deref() == Some("ti"),
            _ => false,
        }
    }
}

/// Tunable parameters; each command reads the subset listed in its defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Gap tolerance of the uniqueness verdict.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Largest radius of the boundary recursion (or of the f-invariant ball formula).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<usize>,
    /// Cap on configurations visited by exact enumeration.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// `exact` or `ti` for entropy; `markov` or `ball` for f-invariant.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Simpson nodes of thermodynamic integration (odd).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Discarded sweeps per chain.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    /// Recorded sweeps per chain.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    /// Batches for batch-means standard errors.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
    /// Sofic approximation sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Number of sofic approximations per size (0 disables the sofic columns of a scan).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    /// Exact enumeration when each interaction component has at most `2^exact_bits` states.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_bits: Option<f64>,
    /// Window radii `r` for `F = ball(m, r) \ {e}`, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<Vec<usize>>,
    /// Random orderings per window (0 disables the bound columns of a scan).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// `past` or `past_and_boundary`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<String>,
    /// Number of free generators.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Vertex count of a generated sofic map.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Inverse temperatures `start:stop:step`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<String>,
    /// Skip the slow self-checks.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quick: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingModel {
    pub beta: f64,
    #[serde(default = "default_rank")]
    pub m: usize,
}

fn default_rank() -> usize {
    2
}

/// Exactly one of `ising`, `potential`, `markov`, `structure`; `ball`
/// restricts a shift model to a finite window and `sofic` supplies a fixed
/// sofic map.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ising: Option<IsingModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sofic: Option<PathBuf>,
}

const MODEL_KINDS: [&str; 4] = ["ising", "potential", "markov", "structure"];
const PATH_KEYS: [&str; 4] = ["potential", "markov", "structure", "sofic"];

impl ModelConfig {
    fn kind(&self) -> Option<&'static str> {
        [
            self.ising.is_some(),
            self.potential.is_some(),
            self.markov.is_some(),
            self.structure.is_some(),
        ]
        .iter()
        .position(|&b| b)
        .map(|i| MODEL_KINDS[i])
    }

    fn count(&self) -> usize {
        [
            self.ising.is_some(),
            self.potential.is_some(),
            self.markov.is_some(),
            self.structure.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }
}

/// A fully resolved invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub bits: bool,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub params: Params,
}

impl RunConfig {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Overlays `top` onto `base`, recursing into objects. A model kind given in
/// `top` replaces whatever kind `base` named.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                if v.is_null() {
                    continue;
                }
                if k == "model" {
                    if let (Some(Value::Object(bm)), Value::Object(tm)) = (b.get_mut("model"), &v) {
                        if MODEL_KINDS.iter().any(|kind| tm.contains_key(*kind)) {
                            bm.retain(|key, _| !MODEL_KINDS.contains(&key.as_str()));
                        }
                    }
                }
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn resolve_paths(file: &mut Value, dir: &Path) {
    let fix = |v: &mut Value| {
        if let Some(s) = v.as_str() {
            let p = Path::new(s);
            if p.is_relative() {
                *v = Value::String(dir.join(p).to_string_lossy().into_owned());
            }
        }
    };
    if let Some(out) = file.get_mut("out") {
        fix(out);
    }
    if let Some(Value::Object(model)) = file.get_mut("model") {
        for key in PATH_KEYS {
            if let Some(v) = model.get_mut(key) {
                fix(v);
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Merges an optional config file under the flag values, fills defaults and
/// validates the result.
pub fn resolve(config_file: Option<&Path>, flags: Value) -> Result<RunConfig> {
    let mut merged = match config_file {
        Some(path) => {
            let mut file: Value = read_json(path)?;
            if !file.is_object() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    message: "expected a JSON object".into(),
                });
            }
            let dir = path.parent().unwrap_or(Path::new(""));
            resolve_paths(&mut file, dir);
            file
        }
        None => Value::Object(Map::new()),
    };
    merge(&mut merged, flags);
    let command = merged
        .get("command")
        .cloned()
        .ok_or_else(|| usage("no command given"))?;
    let command: CommandName =
        serde_json::from_value(command).map_err(|e| usage(format!("unknown command: {e}")))?;

    let mut params = command.defaults();
    let allowed: Vec<String> = params.as_object().unwrap().keys().cloned().collect();
    if let Some(Value::Object(given)) = merged.get("params") {
        if let Some(bad) = given.keys().find(|k| !allowed.contains(k)) {
            let known = if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") };
            return Err(usage(format!(
                "`{bad}` is not a parameter of {} (accepted: {known})",
                command.as_str()
            )));
        }
    }
    if let Some(given) = merged.get("params").cloned() {
        merge(&mut params, given);
    }
    merged
        .as_object_mut()
        .ok_or_else(|| usage("configuration must be an object"))?
        .insert("params".into(), params);

    let config: RunConfig = serde_json::from_value(merged).map_err(|e| usage(format!("invalid configuration: {e}")))?;
    validate(&config)?;
    Ok(config)
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(usage(msg))
    }
}

/// Parses `start:stop:step` into the grid `start, start+step, …` up to `stop`
/// inclusive (within a relative slack of `1e-9·step`).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("beta grid `{s}` is not start:stop:step")))?;
    let [start, stop, step] = parts[..] else {
        return Err(usage(format!("beta grid `{s}` is not start:stop:step")));
    };
    check(
        start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start,
        "beta grid needs finite start ≤ stop and a positive step",
    )?;
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    check(count <= 100_000, "beta grid has more than 100000 points")?;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

fn validate(c: &RunConfig) -> Result<()> {
    let p = &c.params;
    let cmd = c.command;
    if let Some(t) = c.threads {
        check((1..=1024).contains(&t), "threads must be between 1 and 1024")?;
    }
    if cmd.stochastic(p) && c.seed.is_none() {
        return Err(usage(format!("{} is stochastic and needs a master seed (--seed)", cmd.as_str())));
    }
    if let Some(tol) = p.tol {
        check(tol > 0.0 && tol < 1.0, "tol must lie in (0, 1)")?;
    }
    if let Some(r) = p.r_max {
        check((1..=100_000).contains(&r), "r_max must be between 1 and 100000")?;
    }
    if let Some(b) = p.budget {
        check(b >= 1, "budget must be positive")?;
    }
    if let Some(g) = p.grid_points {
        check((3..=1001).contains(&g) && g % 2 == 1, "grid_points must be odd and between 3 and 1001")?;
    }
    if let Some(s) = p.sweeps {
        check(s >= 1, "sweeps must be positive")?;
    }
    if let Some(b) = p.batches {
        check(b >= 2 && b <= p.sweeps.unwrap_or(usize::MAX), "batches must be at least 2 and at most sweeps")?;
    }
    if let Some(sizes) = &p.sizes {
        check(!sizes.is_empty() && sizes.iter().all(|&n| n >= 1), "sizes must be a nonempty list of positive integers")?;
    }
    if let Some(s) = p.seeds {
        check(s >= 1 || cmd == CommandName::IsingScan, "seeds must be positive")?;
    }
    if let Some(b) = p.exact_bits {
        check((0.0..=62.0).contains(&b), "exact_bits must lie in [0, 62]")?;
    }
    if let Some(radius) = &p.radius {
        check(!radius.is_empty() && radius.iter().all(|&r| r <= 6), "radius must be a nonempty list of values at most 6")?;
    }
    if let Some(s) = p.samples {
        check(s >= 1 || cmd == CommandName::IsingScan, "samples must be positive")?;
    }
    if let Some(m) = p.m {
        check((1..=16).contains(&m), "m must be between 1 and 16")?;
    }
    if let Some(n) = p.n {
        check(n >= 1 && n <= u32::MAX as usize, "n must be positive")?;
    }
    if let Some(g) = &p.beta_grid {
        parse_grid(g)?;
    }
    if let Some(method) = p.method.as_deref() {
        let ok = match cmd {
            CommandName::Entropy => ["exact", "ti"].contains(&method),
            CommandName::FInvariant => ["markov", "ball"].contains(&method),
            _ => false,
        };
        check(ok, "method must be exact|ti for entropy and markov|ball for f-invariant")?;
    }
    if let Some(cond) = p.conditioning.as_deref() {
        check(["past", "past_and_boundary"].contains(&cond), "conditioning must be past or past_and_boundary")?;
    }
    validate_model(c)
}

fn validate_model(c: &RunConfig) -> Result<()> {
    use CommandName::*;
    let model = &c.model;
    if let Some(ising) = &model.ising {
        check(ising.beta.is_finite(), "ising beta must be finite")?;
        check((1..=16).contains(&ising.m), "ising m must be between 1 and 16")?;
    }
    check(model.count() <= 1, "give only one of ising, potential, markov, structure")?;
    let kind = model.kind();
    let accepted: &[&str] = match c.command {
        CheckDobrushin => &["ising", "potential", "structure"],
        CheckAttractive => &MODEL_KINDS,
        Uniqueness | SewardBound | FInvariant | PhaseCriterion => &["ising", "markov"],
        ExactGibbs | SampleGlauber | Entropy => &["ising", "potential", "structure"],
        SoficEntropy => &["ising", "potential"],
        IsingScan | SoficGen | Selftest => &[],
    };
    match kind {
        None if !accepted.is_empty() => {
            return Err(usage(format!("{} needs a model: {}", c.command.as_str(), accepted.join(", "))));
        }
        Some(k) if !accepted.contains(&k) => {
            let msg = if accepted.is_empty() {
                format!("{} takes no model", c.command.as_str())
            } else {
                format!("{} accepts models: {}", c.command.as_str(), accepted.join(", "))
            };
            return Err(usage(msg));
        }
        _ => {}
    }
    let finite = matches!(c.command, ExactGibbs | SampleGlauber | Entropy);
    if let Some(r) = model.ball {
        check(finite && kind != Some("structure"), "ball applies to ising or potential models of exact-gibbs, sample-glauber and entropy")?;
        check(r <= 8, "ball radius must be at most 8")?;
    } else if finite && kind != Some("structure") {
        return Err(usage(format!("{} on a shift model needs --ball", c.command.as_str())));
    }
    if model.sofic.is_some() {
        check(c.command == SoficEntropy, "a sofic map file is only read by sofic-entropy")?;
    }
    Ok(())
}
