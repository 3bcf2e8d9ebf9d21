//! One function per command. Each returns a [`Report`]; emission is handled
//! by the caller.

use std::f64::consts::LN_2;

use gibbsent::dobrushin::{dobrushin, dobrushin_shift};
use gibbsent::entropy::{
    f_invariant_ball, f_invariant_markov, gibbs_entropy_components, gibbs_entropy_exact_with_budget,
    gibbs_entropy_ti, ising_f, ising_sign_change, phase_transition_criterion, seward_bound_with, sofic_run,
    Conditioning, EntropyEstimate, Method, SoficParams, SoficRun, TiParams,
};
use gibbsent::group::window_labels;
use gibbsent::order::{is_attractive, is_attractive_at, AttractivenessWitness};
use gibbsent::recursion::{uniqueness_verdict, TreePairModel, UniquenessReport, Verdict, DEFAULT_R_MAX, DEFAULT_TOL};
use gibbsent::seed::{derive_seed, task_rng};
use gibbsent::{math, FiniteWindow, GibbsStructure, GroupWord, MarkovTreeSpec, ShiftPotential, SiteOrder, SoficMap};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{parse_grid, CommandName, ModelConfig, Params, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::{read_json, MarkovFile, PotentialFile, SoficFile, StructureFile};
use crate::output::{Cell, Table};
use crate::selftest;

/// Label attached to entropy results outside the uniqueness regime.
pub const OUTSIDE_UGM: &str = "outside UGM regime, no equality claim";

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub fields: Map<String, Value>,
    pub table: Option<Table>,
    /// Replaces the default JSON document (used by `sofic-gen`).
    pub document: Option<Value>,
    /// Lines printed instead of the JSON document (used by `selftest`).
    pub lines: Option<Vec<String>>,
    pub undecided: bool,
    pub failed: bool,
}

impl Report {
    fn new(fields: Value) -> Self {
        Report {
            fields: into_map(fields),
            ..Report::default()
        }
    }

    fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("report fields are objects"),
    }
}

pub enum Model {
    Ising { beta: f64, m: usize },
    Potential(ShiftPotential),
    Markov(MarkovTreeSpec),
    Structure(GibbsStructure),
}

impl Model {
    pub fn load(cfg: &ModelConfig) -> Result<Option<Model>> {
        Ok(if let Some(i) = cfg.ising {
            Some(Model::Ising { beta: i.beta, m: i.m })
        } else if let Some(p) = &cfg.potential {
            Some(Model::Potential(read_json::<PotentialFile>(p)?.into_potential()?))
        } else if let Some(p) = &cfg.markov {
            Some(Model::Markov(read_json::<MarkovFile>(p)?.into_spec()?))
        } else if let Some(p) = &cfg.structure {
            Some(Model::Structure(read_json::<StructureFile>(p)?.into_structure()?))
        } else {
            None
        })
    }

    fn shift(&self) -> Result<ShiftPotential> {
        match self {
            Model::Ising { beta, m } => Ok(ShiftPotential::ising(*beta, *m)),
            Model::Potential(p) => Ok(p.clone()),
            _ => Err(CliError::Usage("this command needs a shift potential".into())),
        }
    }

    fn markov(&self) -> Result<MarkovTreeSpec> {
        match self {
            Model::Ising { beta, m } => Ok(MarkovTreeSpec::ising(*beta, *m)),
            Model::Markov(s) => Ok(s.clone()),
            _ => Err(CliError::Usage("this command needs an ising or markov model".into())),
        }
    }

    fn tree(&self) -> Result<TreePairModel> {
        match self {
            Model::Ising { beta, m } => Ok(TreePairModel::ising(*beta, *m)),
            Model::Markov(s) => Ok(TreePairModel::from_markov(s)?),
            _ => Err(CliError::Usage("this command needs an ising or markov model".into())),
        }
    }

    /// The finite structure together with a label per vertex.
    fn finite(&self, ball: Option<usize>) -> Result<(GibbsStructure, Vec<String>)> {
        match (self, ball) {
            (Model::Structure(g), _) => Ok((g.clone(), (0..g.len()).map(|v| v.to_string()).collect())),
            (_, Some(r)) => {
                let p = self.shift()?;
                let window = FiniteWindow::ball(p.rank(), r);
                Ok((p.restrict_to(&window)?, window_labels(&window)))
            }
            _ => Err(CliError::Usage("a shift model needs --ball to become finite".into())),
        }
    }
}

#[derive(Clone, Copy)]
struct Unit(f64, &'static str);

impl Unit {
    fn new(bits: bool) -> Self {
        if bits {
            Unit(1.0 / LN_2, "bits")
        } else {
            Unit(1.0, "nats")
        }
    }

    fn of(self, x: f64) -> f64 {
        x * self.0
    }
}

fn seed_of(cfg: &RunConfig) -> u64 {
    cfg.seed.expect("stochastic commands are validated to carry a seed")
}

fn ti_params(p: &Params) -> TiParams {
    TiParams {
        grid_points: p.grid_points.unwrap(),
        burn_in: p.burn_in.unwrap(),
        sweeps: p.sweeps.unwrap(),
        batches: p.batches.unwrap(),
    }
}

fn sofic_params(p: &Params) -> SoficParams {
    SoficParams {
        ti: ti_params(p),
        exact_bits: p.exact_bits.unwrap(),
    }
}

fn conditioning(p: &Params) -> Conditioning {
    match p.conditioning.as_deref() {
        Some("past_and_boundary") => Conditioning::PastAndBoundary,
        _ => Conditioning::Past,
    }
}

/// `F = ball(m, r) \ {e}`.
fn punctured_ball(m: usize, r: usize) -> FiniteWindow {
    FiniteWindow::ball(m, r).difference(&FiniteWindow::identity())
}

fn chain_orders(g: &GibbsStructure) -> Vec<SiteOrder> {
    g.alphabets().iter().map(|a| SiteOrder::chain(a.clone())).collect()
}

/// Verdict, mapping a non-monotone root kernel to `None`.
fn verdict_of(tree: &TreePairModel, tol: f64, r_max: usize) -> Result<Option<UniquenessReport>> {
    match uniqueness_verdict(tree, &SiteOrder::chain(tree.alphabet().clone()), tol, r_max) {
        Ok(r) => Ok(Some(r)),
        Err(gibbsent::Error::NotAttractive { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn regime(tree: &TreePairModel) -> Result<&'static str> {
    let v = verdict_of(tree, DEFAULT_TOL, DEFAULT_R_MAX)?;
    Ok(match v {
        Some(r) if r.verdict == Verdict::Unique => "unique",
        _ => OUTSIDE_UGM,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let model = Model::load(&cfg.model)?;
    let model = model.as_ref();
    let need = || model.expect("model presence is validated");
    let unit = Unit::new(cfg.bits);
    match cfg.command {
        CommandName::CheckDobrushin => check_dobrushin(need()),
        CommandName::CheckAttractive => check_attractive(need()),
        CommandName::Uniqueness => uniqueness(need(), &cfg.params),
        CommandName::ExactGibbs => exact_gibbs(need(), cfg, unit),
        CommandName::SampleGlauber => sample_glauber(need(), cfg),
        CommandName::Entropy => entropy(need(), cfg, unit),
        CommandName::SoficEntropy => sofic_entropy(need(), cfg, unit),
        CommandName::SewardBound => seward(need(), cfg, unit),
        CommandName::FInvariant => f_invariant(need(), &cfg.params, unit),
        CommandName::PhaseCriterion => phase(need(), unit),
        CommandName::IsingScan => ising_scan(cfg, unit),
        CommandName::SoficGen => sofic_gen(cfg),
        CommandName::Selftest => Ok(selftest::report(cfg.params.quick.unwrap_or(false))),
    }
}

fn check_dobrushin(model: &Model) -> Result<Report> {
    if let Model::Structure(g) = model {
        let r = dobrushin(g)?;
        let mut t = Table::new(["vertex", "b_row"]);
        for (v, &b) in r.b_row().iter().enumerate() {
            t.push(vec![v.into(), b.into()]);
        }
        return Ok(Report::new(json!({
            "quantity": "b_star",
            "value": r.b_star(),
            "satisfied": r.satisfied(),
        }))
        .with_table(t));
    }
    let r = dobrushin_shift(&model.shift()?)?;
    let mut t = Table::new(["neighbour", "coefficient"]);
    for (u, &b) in r.boundary.iter().zip(&r.coefficients) {
        t.push(vec![u.to_string().into(), b.into()]);
    }
    Ok(Report::new(json!({
        "quantity": "b_star",
        "value": r.b_star,
        "satisfied": r.satisfied(),
        "boundary_size": r.boundary.len(),
    }))
    .with_table(t))
}

fn witness_json(w: &AttractivenessWitness, g: &GibbsStructure, labels: &[String]) -> Value {
    let symbols = |config: &[usize]| -> Vec<String> {
        w.boundary
            .iter()
            .zip(config)
            .map(|(&u, &a)| g.alphabet(u).symbol(a).to_string())
            .collect()
    };
    json!({
        "vertex": labels[w.vertex],
        "boundary": w.boundary.iter().map(|&u| labels[u].clone()).collect::<Vec<_>>(),
        "lower": symbols(&w.lower),
        "upper": symbols(&w.upper),
    })
}

fn check_attractive(model: &Model) -> Result<Report> {
    let (g, labels, at): (GibbsStructure, Vec<String>, Option<usize>) = match model {
        Model::Structure(g) => (g.clone(), (0..g.len()).map(|v| v.to_string()).collect(), None),
        Model::Markov(_) => {
            let star = model.tree()?.star_structure()?;
            let mut labels = vec!["e".to_string()];
            labels.extend(gibbsent::Letter::all(model.markov()?.rank()).map(|l| GroupWord::letter(l).to_string()));
            (star, labels, Some(0))
        }
        _ => {
            let (window, g) = model.shift()?.local_structure(&FiniteWindow::identity())?;
            let e = window.index_of(&GroupWord::identity()).expect("local window contains e");
            (g, window_labels(&window), Some(e))
        }
    };
    let orders = chain_orders(&g);
    let r = match at {
        Some(v) => is_attractive_at(&g, &orders, &[v])?,
        None => is_attractive(&g, &orders)?,
    };
    Ok(Report::new(json!({
        "quantity": "attractive",
        "value": r.attractive,
        "order": "alphabet order",
        "witness": r.witness.as_ref().map(|w| witness_json(w, &g, &labels)),
    })))
}

fn uniqueness(model: &Model, p: &Params) -> Result<Report> {
    let tree = model.tree()?;
    let (tol, r_max) = (p.tol.unwrap(), p.r_max.unwrap());
    let report = verdict_of(&tree, tol, r_max)?;
    let mut out = match &report {
        Some(r) => Report::new(json!({
            "quantity": "uniqueness_verdict",
            "value": r.verdict.as_str(),
            "attractive": true,
            "radius": r.radius,
            "gap": r.gap,
            "limit_gap": r.limit_gap,
            "max_marginal": r.max_marginal,
            "min_marginal": r.min_marginal,
        })),
        None => Report::new(json!({
            "quantity": "uniqueness_verdict",
            "value": Verdict::Undecided.as_str(),
            "attractive": false,
            "reason": "root kernel is not monotone in the alphabet order",
        })),
    };
    out.undecided = report.map_or(true, |r| r.verdict == Verdict::Undecided);
    Ok(out)
}

fn exact_gibbs(model: &Model, cfg: &RunConfig, unit: Unit) -> Result<Report> {
    let (g, labels) = model.finite(cfg.model.ball)?;
    let mu = g.exact_gibbs_with_budget(cfg.params.budget.unwrap())?;
    let mut t = Table::new(["index", "configuration", "probability"]);
    for i in 0..mu.len() {
        let config = mu.config_at(i);
        let text = config
            .iter()
            .enumerate()
            .map(|(v, &a)| g.alphabet(v).symbol(a))
            .collect::<Vec<_>>()
            .join(" ");
        t.push(vec![i.into(), text.into(), mu.probs()[i].into()]);
    }
    Ok(Report::new(json!({
        "quantity": "gibbs_measure",
        "vertices": labels,
        "states": mu.len(),
        "entropy": unit.of(mu.entropy()),
        "unit": unit.1,
    }))
    .with_table(t))
}

fn sample_glauber(model: &Model, cfg: &RunConfig) -> Result<Report> {
    let (g, labels) = model.finite(cfg.model.ball)?;
    let p = &cfg.params;
    let seed = seed_of(cfg);
    let (burn_in, batches) = (p.burn_in.unwrap(), p.batches.unwrap());
    let per_batch = p.sweeps.unwrap() / batches;
    let offsets: Vec<usize> = g
        .radices()
        .iter()
        .scan(0, |acc, &q| {
            let o = *acc;
            *acc += q;
            Some(o)
        })
        .collect();
    let cells = offsets.last().map_or(0, |o| o + g.radix(g.len() - 1));

    let mut rng = task_rng(seed, &[0]);
    let mut omega = g.random_configuration(&mut rng);
    let mut buf = Vec::new();
    for _ in 0..burn_in {
        g.glauber_sweep(&mut omega, 1.0, &mut buf, &mut rng);
    }
    let mut freq = vec![vec![0.0; cells]; batches];
    let mut energy = vec![0.0; batches];
    for b in 0..batches {
        for _ in 0..per_batch {
            g.glauber_sweep(&mut omega, 1.0, &mut buf, &mut rng);
            for (v, &a) in omega.iter().enumerate() {
                freq[b][offsets[v] + a] += 1.0;
            }
            energy[b] += g.energy(&omega);
        }
        freq[b].iter_mut().for_each(|x| *x /= per_batch as f64);
        energy[b] /= per_batch as f64;
    }
    let mean_se = |xs: &[f64]| {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
        (mean, math::sqrt(var / k))
    };
    let mut t = Table::new(["vertex", "symbol", "frequency", "stderr", "method", "seed"]);
    for v in 0..g.len() {
        for a in 0..g.radix(v) {
            let column: Vec<f64> = freq.iter().map(|f| f[offsets[v] + a]).collect();
            let (mean, se) = mean_se(&column);
            t.push(vec![
                labels[v].clone().into(),
                g.alphabet(v).symbol(a).into(),
                mean.into(),
                se.into(),
                "glauber".into(),
                seed.into(),
            ]);
        }
    }
    let (e_mean, e_se) = mean_se(&energy);
    Ok(Report::new(json!({
        "quantity": "mean_energy",
        "value": e_mean,
        "stderr": e_se,
        "method": "glauber",
        "seed": seed,
        "recorded_sweeps": per_batch * batches,
    }))
    .with_table(t))
}

fn estimate_json(quantity: &str, e: EntropyEstimate, unit: Unit, seed: Option<u64>) -> Value {
    json!({
        "quantity": quantity,
        "value": unit.of(e.value),
        "stderr": unit.of(e.stderr),
        "method": e.method.as_str(),
        "seed": seed,
        "unit": unit.1,
    })
}

fn entropy(model: &Model, cfg: &RunConfig, unit: Unit) -> Result<Report> {
    let (g, _) = model.finite(cfg.model.ball)?;
    let p = &cfg.params;
    let (est, seed) = if p.method.as_deref() == Some("ti") {
        let seed = seed_of(cfg);
        (gibbs_entropy_ti(&g, &ti_params(p), seed)?, Some(seed))
    } else {
        let budget = p.budget.unwrap();
        let est = match gibbs_entropy_components(&g, budget)? {
            Some(e) => e,
            None => gibbs_entropy_exact_with_budget(&g, budget)?,
        };
        (est, None)
    };
    let mut fields = estimate_json("entropy", est, unit, seed);
    fields["vertices"] = json!(g.len());
    fields["per_vertex"] = json!(unit.of(est.value / g.len().max(1) as f64));
    Ok(Report::new(fields))
}

/// Entropy per vertex of the structure a fixed sofic map induces.
fn fixed_map_run(pot: &ShiftPotential, sigma: &SoficMap, params: &SoficParams, seed: u64) -> Result<EntropyEstimate> {
    let g = sigma.induced_structure(pot)?;
    let budget = math::exp2(params.exact_bits) as usize;
    let total = match gibbs_entropy_components(&g, budget)? {
        Some(e) => e,
        None => gibbs_entropy_ti(&g, &params.ti, seed)?,
    };
    Ok(total.per(sigma.len()))
}

fn mean_of_runs(runs: &[SoficRun]) -> (EntropyEstimate, f64) {
    let k = runs.len() as f64;
    let mean = runs.iter().map(|r| r.estimate.value).sum::<f64>() / k;
    let spread = if runs.len() > 1 {
        math::sqrt(runs.iter().map(|r| (r.estimate.value - mean).powi(2)).sum::<f64>() / (k - 1.0))
    } else {
        0.0
    };
    let se = math::sqrt(runs.iter().map(|r| r.estimate.stderr.powi(2)).sum::<f64>()) / k;
    let method = if runs.iter().all(|r| r.estimate.method == Method::Exact) {
        Method::Exact
    } else {
        Method::Thermodynamic
    };
    (
        EntropyEstimate {
            value: mean,
            stderr: se,
            method,
        },
        spread,
    )
}

fn shift_regime(model: &Model) -> Result<&'static str> {
    match model {
        Model::Ising { .. } => regime(&model.tree()?),
        _ => Ok("not checked"),
    }
}

fn sofic_entropy(model: &Model, cfg: &RunConfig, unit: Unit) -> Result<Report> {
    let pot = model.shift()?;
    let master = seed_of(cfg);
    let params = sofic_params(&cfg.params);
    let regime = shift_regime(model)?;
    let header = ["n", "replicate", "map_seed", "value", "stderr", "method", "seed"];
    let mut t = Table::new(header);

    if let Some(path) = &cfg.model.sofic {
        let file: SoficFile = read_json(path)?;
        let map_seed = file.seed;
        let sigma = file.into_map()?;
        if sigma.rank() != pot.rank() {
            return Err(CliError::Usage("sofic map rank differs from the potential's rank".into()));
        }
        let ti_seed = derive_seed(master, &[sigma.len() as u64]);
        let est = fixed_map_run(&pot, &sigma, &params, ti_seed)?;
        t.push(vec![
            sigma.len().into(),
            0usize.into(),
            map_seed.into(),
            unit.of(est.value).into(),
            unit.of(est.stderr).into(),
            est.method.as_str().into(),
            ti_seed.into(),
        ]);
        let mut fields = estimate_json("sofic_entropy", est, unit, Some(ti_seed));
        fields["n"] = json!(sigma.len());
        fields["regime"] = json!(regime);
        return Ok(Report::new(fields).with_table(t));
    }

    let sizes = cfg.params.sizes.clone().unwrap();
    let seeds = cfg.params.seeds.unwrap();
    let tasks: Vec<(usize, usize)> = sizes.iter().flat_map(|&n| (0..seeds).map(move |i| (n, i))).collect();
    let runs = tasks
        .par_iter()
        .map(|&(n, i)| sofic_run(&pot, n, derive_seed(master, &[n as u64, i as u64]), &params, master))
        .collect::<gibbsent::Result<Vec<_>>>()?;
    for (&(n, i), r) in tasks.iter().zip(&runs) {
        let ti_seed = (r.estimate.method != Method::Exact).then(|| derive_seed(master, &[n as u64, r.seed]));
        t.push(vec![
            n.into(),
            i.into(),
            r.seed.into(),
            unit.of(r.estimate.value).into(),
            unit.of(r.estimate.stderr).into(),
            r.estimate.method.as_str().into(),
            ti_seed.into(),
        ]);
    }
    let per_size: Vec<Value> = runs
        .chunks(seeds)
        .zip(&sizes)
        .map(|(chunk, &n)| {
            let (e, spread) = mean_of_runs(chunk);
            json!({"n": n, "mean": unit.of(e.value), "stderr": unit.of(e.stderr), "spread": unit.of(spread)})
        })
        .collect();
    let largest = sizes.iter().enumerate().max_by_key(|(_, &n)| n).map(|(k, _)| k).unwrap();
    let (est, spread) = mean_of_runs(&runs[largest * seeds..(largest + 1) * seeds]);
    let mut fields = estimate_json("sofic_entropy", est, unit, Some(master));
    fields["n"] = json!(sizes[largest]);
    fields["spread"] = json!(unit.of(spread));
    fields["sizes"] = json!(per_size);
    fields["regime"] = json!(regime);
    Ok(Report::new(fields).with_table(t))
}

fn seward(model: &Model, cfg: &RunConfig, unit: Unit) -> Result<Report> {
    let spec = model.markov()?;
    let master = seed_of(cfg);
    let p = &cfg.params;
    let cond = conditioning(p);
    let radii = p.radius.clone().unwrap();
    let samples = p.samples.unwrap();
    let ests = radii
        .iter()
        .map(|&r| {
            let seed = derive_seed(master, &[r as u64]);
            Ok((seed, seward_bound_with(&spec, &punctured_ball(spec.rank(), r), samples, seed, cond)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(["radius", "window_size", "value", "stderr", "method", "seed", "conditioning"]);
    for (&r, (seed, e)) in radii.iter().zip(&ests) {
        t.push(vec![
            r.into(),
            punctured_ball(spec.rank(), r).len().into(),
            unit.of(e.value).into(),
            unit.of(e.stderr).into(),
            e.method.as_str().into(),
            (*seed).into(),
            cond.as_str().into(),
        ]);
    }
    let (seed, last) = *ests.last().expect("radius list is nonempty");
    let mut fields = estimate_json("seward_bound", last, unit, Some(seed));
    fields["radius"] = json!(radii.last());
    fields["conditioning"] = json!(cond.as_str());
    fields["f_markov"] = json!(unit.of(f_invariant_markov(&spec)));
    fields["regime"] = json!(regime(&model.tree()?)?);
    Ok(Report::new(fields).with_table(t))
}

fn f_invariant(model: &Model, p: &Params, unit: Unit) -> Result<Report> {
    let spec = model.markov()?;
    let closed = match model {
        Model::Ising { beta, m } => Some(unit.of(ising_f(*beta, *m))),
        _ => None,
    };
    if p.method.as_deref() == Some("ball") {
        let values = f_invariant_ball(&spec, p.r_max.unwrap())?;
        let mut t = Table::new(["r", "value"]);
        for (r, &v) in values.iter().enumerate() {
            t.push(vec![r.into(), unit.of(v).into()]);
        }
        return Ok(Report::new(json!({
            "quantity": "f_invariant",
            "value": unit.of(*values.last().unwrap()),
            "method": "ball",
            "closed_form": closed,
            "unit": unit.1,
        }))
        .with_table(t));
    }
    Ok(Report::new(json!({
        "quantity": "f_invariant",
        "value": unit.of(f_invariant_markov(&spec)),
        "method": "markov",
        "closed_form": closed,
        "unit": unit.1,
    })))
}

fn phase(model: &Model, unit: Unit) -> Result<Report> {
    let spec = model.markov()?;
    let (f, nonpositive) = phase_transition_criterion(&spec);
    let root = match model {
        Model::Ising { m, .. } => ising_sign_change(*m),
        _ => None,
    };
    Ok(Report::new(json!({
        "quantity": "f_invariant",
        "value": unit.of(f),
        "f_nonpositive": nonpositive,
        "forces_phase_transition": nonpositive,
        "ising_sign_change_beta": root,
        "unit": unit.1,
    })))
}

pub const SCAN_COLUMNS: [&str; 15] = [
    "beta",
    "b_star",
    "attractive",
    "uniqueness_verdict",
    "f_markov",
    "f_nonpositive",
    "seward_bound",
    "seward_stderr",
    "seward_method",
    "sofic_estimate",
    "sofic_stderr",
    "sofic_spread",
    "sofic_method",
    "regime",
    "seed",
];

fn scan_row(beta: f64, seed: u64, cfg: &RunConfig, unit: Unit) -> Result<Vec<Cell>> {
    let p = &cfg.params;
    let m = p.m.unwrap();
    let pot = ShiftPotential::ising(beta, m);
    let tree = TreePairModel::ising(beta, m);
    let spec = MarkovTreeSpec::ising(beta, m);
    let b_star = dobrushin_shift(&pot)?.b_star;
    let attractive = tree.is_attractive(&SiteOrder::ising())?;
    let verdict = verdict_of(&tree, p.tol.unwrap(), p.r_max.unwrap())?.map_or(Verdict::Undecided, |r| r.verdict);
    let f = f_invariant_markov(&spec);

    let samples = p.samples.unwrap();
    let seward = if samples > 0 {
        let r = *p.radius.as_ref().unwrap().iter().max().unwrap();
        Some(seward_bound_with(&spec, &punctured_ball(m, r), samples, derive_seed(seed, &[0]), conditioning(p))?)
    } else {
        None
    };
    let seeds = p.seeds.unwrap();
    let sofic = if seeds > 0 {
        let n = *p.sizes.as_ref().unwrap().iter().max().unwrap();
        let params = sofic_params(p);
        let runs = (0..seeds)
            .map(|i| sofic_run(&pot, n, derive_seed(seed, &[1, i as u64]), &params, derive_seed(seed, &[2])))
            .collect::<gibbsent::Result<Vec<_>>>()?;
        Some(mean_of_runs(&runs))
    } else {
        None
    };
    Ok(vec![
        beta.into(),
        b_star.into(),
        attractive.into(),
        verdict.as_str().into(),
        unit.of(f).into(),
        (f <= 0.0).into(),
        seward.map(|e| unit.of(e.value)).into(),
        seward.map(|e| unit.of(e.stderr)).into(),
        seward.map(|e| e.method.as_str()).into(),
        sofic.map(|(e, _)| unit.of(e.value)).into(),
        sofic.map(|(e, _)| unit.of(e.stderr)).into(),
        sofic.map(|(_, s)| unit.of(s)).into(),
        sofic.map(|(e, _)| e.method.as_str()).into(),
        if verdict == Verdict::Unique { "unique" } else { OUTSIDE_UGM }.into(),
        seed.into(),
    ])
}

fn ising_scan(cfg: &RunConfig, unit: Unit) -> Result<Report> {
    let master = seed_of(cfg);
    let grid = parse_grid(cfg.params.beta_grid.as_deref().unwrap())?;
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(k, &beta)| scan_row(beta, derive_seed(master, &[k as u64]), cfg, unit))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(SCAN_COLUMNS);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report::new(json!({
        "quantity": "ising_scan",
        "points": grid.len(),
        "m": cfg.params.m,
        "seed": master,
        "unit": unit.1,
    }))
    .with_table(t))
}

fn sofic_gen(cfg: &RunConfig) -> Result<Report> {
    let seed = seed_of(cfg);
    let (m, n) = (cfg.params.m.unwrap(), cfg.params.n.unwrap());
    let sigma = SoficMap::random(m, n, seed)?;
    let good = sigma.good_fraction(&FiniteWindow::ball(m, 2));
    let doc = serde_json::to_value(SoficFile::from_map(&sigma, Some(seed))).expect("sofic file serializes");
    let mut r = Report::new(json!({
        "quantity": "sofic_map",
        "rank": m,
        "n": n,
        "seed": seed,
        "good_fraction_ball2": good,
    }));
    r.document = Some(doc);
    Ok(r)
}
