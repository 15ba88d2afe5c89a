//! Stability bounds and bound-versus-gap reports.
//!
//! Every bound is a weighted sum (or a power of one) of metric inputs with
//! coefficients from [`crate::lipschitz`]. Metric inputs must be
//! nonnegative; all bounds vanish when their inputs do.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt4, to_json_pretty};
use crate::lipschitz::{ConstantTable, EndogenousCoeffs, ExogenousGlobalCoeffs, StagewiseCoeffs};
use crate::metrics::{
    coupled_path_distance, coupled_path_expectation, coupled_wasserstein, filtration_estimate,
    kantorovich_law, nested_distance,
};
use crate::model::{derive_regularity, Growth, ProblemInstance};
use crate::solver::{solve, SolveReport, SolverConfig};
use crate::stochastic::{
    build_exogenous_tree, build_joint_tree, ExogenousProcess, ExogenousStage, QuadratureRule,
    ScenarioTree, TreeSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Value,
    Solution,
}

/// Variant of the global exogenous bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalMode {
    Value,
    ValueFm,
    Solution,
    SolutionFm,
}

impl FromStr for GlobalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "value" => Ok(GlobalMode::Value),
            "value_fm" => Ok(GlobalMode::ValueFm),
            "solution" => Ok(GlobalMode::Solution),
            "solution_fm" => Ok(GlobalMode::SolutionFm),
            _ => Err(Error::InvalidInput(format!("unknown bound mode `{s}`"))),
        }
    }
}

fn check_inputs(what: &str, v: &[f64]) -> Result<()> {
    match v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        Some(x) => Err(Error::InvalidInput(format!(
            "{what} must be finite and nonnegative, got {x}"
        ))),
        None => Ok(()),
    }
}

fn beta_of(growth: Option<Growth>) -> Result<Growth> {
    let g = growth.ok_or(Error::MissingGrowth)?;
    if !(g.beta > 0.0) || !(g.nu > 0.0) {
        return Err(Error::InvalidModulus(g.beta.min(g.nu)));
    }
    Ok(g)
}

/// Bound under perturbations of the endogenous laws; `dk[t]` is
/// `d_K(P_t, P~_t)` for `t = 0..=T`.
pub fn endo_bounds(
    c: &EndogenousCoeffs,
    dk: &[f64],
    mode: BoundMode,
    growth: Option<Growth>,
) -> Result<f64> {
    let t_max = c.h.len() - 1;
    if dk.len() != t_max + 1 {
        return Err(Error::InvalidDimension {
            what: "endogenous distances".into(),
            expected: t_max + 1,
            got: dk.len(),
        });
    }
    check_inputs("d_K", dk)?;
    match mode {
        BoundMode::Value => {
            let head: f64 = (0..t_max).map(|t| c.l_hat[t + 1] * dk[t]).sum();
            Ok(head + c.l_c * dk[t_max])
        }
        BoundMode::Solution => {
            let beta = beta_of(growth)?.beta;
            Ok((0..=t_max)
                .map(|t| {
                    let cross: f64 = ((t + 1)..=t_max).map(|k| c.l_x_tj[k][t]).sum();
                    (c.h[t] / beta + cross) * dk[t]
                })
                .sum())
        }
    }
}

/// Metric inputs of the global exogenous bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GlobalInputs {
    /// `E |xi - xi~|` under a coupling of the two processes.
    pub expected_distance: Option<f64>,
    /// `d_{FM,2T}` of the path laws.
    pub fm_2t: Option<f64>,
    /// `d_{FM,3T+1}` of the path laws.
    pub fm_3t1: Option<f64>,
}

pub fn exo_global_bounds(
    c: &ExogenousGlobalCoeffs,
    m: &GlobalInputs,
    mode: GlobalMode,
    growth: Option<Growth>,
) -> Result<f64> {
    let need = |v: Option<f64>, what: &str| -> Result<f64> {
        let v = v.ok_or_else(|| Error::InvalidInput(format!("missing metric input {what}")))?;
        check_inputs(what, &[v])?;
        Ok(v)
    };
    match mode {
        GlobalMode::Value => Ok(c.l_theta * need(m.expected_distance, "E|xi - xi~|")?),
        GlobalMode::ValueFm => Ok(c.l_theta * need(m.fm_3t1, "d_FM,3T+1")?),
        GlobalMode::Solution | GlobalMode::SolutionFm => {
            let g = beta_of(growth)?;
            let (m1, m2) = if mode == GlobalMode::Solution {
                let e = need(m.expected_distance, "E|xi - xi~|")?;
                (e, e)
            } else {
                (need(m.fm_2t, "d_FM,2T")?, need(m.fm_3t1, "d_FM,3T+1")?)
            };
            let inner = (c.l_theta + c.l_sigma * c.l_x + c.l_sigma) * m2 / g.beta;
            Ok(c.l_x * m1 + inner.powf(1.0 / g.nu))
        }
    }
}

/// Stagewise bound; `cond_dk[t-1]` is the expected Kantorovich distance of
/// the stage-`t` conditional laws.
pub fn exo_stagewise_bounds(
    c: &StagewiseCoeffs,
    g: &ExogenousGlobalCoeffs,
    cond_dk: &[f64],
    mode: BoundMode,
    growth: Option<Growth>,
) -> Result<f64> {
    let t_max = c.l_xi.len() - 1;
    if cond_dk.len() != t_max {
        return Err(Error::InvalidDimension {
            what: "conditional distances".into(),
            expected: t_max,
            got: cond_dk.len(),
        });
    }
    check_inputs("conditional d_K", cond_dk)?;
    match mode {
        BoundMode::Value => Ok((1..=t_max).map(|t| c.l_xi[t] * cond_dk[t - 1]).sum()),
        BoundMode::Solution => {
            let beta = beta_of(growth)?.beta;
            let lx = g.l_x;
            Ok((1..=t_max)
                .map(|t| {
                    let mut prod = 1.0;
                    let mut amp: f64 = 1.0;
                    for k in (t + 1)..=t_max {
                        prod *= c.l_q[k];
                        amp = amp.max(prod);
                    }
                    (c.l_xi[t] / beta + (lx + (lx + 1.0) * g.l_sigma / beta) * amp) * cond_dk[t - 1]
                })
                .sum())
        }
    }
}

/// Inputs of the two comparison bounds from the literature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    /// `L_beta d_Nested^beta` for objectives Hölder of order `beta` in xi.
    Nested {
        lipschitz: f64,
        exponent: f64,
        distance: f64,
    },
    /// `L (W_r + d_Filt)` for linear problems.
    Filtration {
        lipschitz: f64,
        wasserstein: f64,
        filtration: f64,
    },
}

pub fn comparison_bounds(c: &Comparison) -> Result<f64> {
    match *c {
        Comparison::Nested {
            lipschitz,
            exponent,
            distance,
        } => {
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(Error::InvalidExponent(exponent));
            }
            check_inputs("nested distance", &[distance, lipschitz])?;
            Ok(lipschitz * distance.powf(exponent))
        }
        Comparison::Filtration {
            lipschitz,
            wasserstein,
            filtration,
        } => {
            check_inputs("filtration inputs", &[lipschitz, wasserstein, filtration])?;
            Ok(lipschitz * (wasserstein + filtration))
        }
    }
}

/// Histories `xi_1..xi_{t-1}` of `p` with their probabilities.
fn histories(p: &ExogenousProcess, t: usize, n: usize) -> Result<(ScenarioTree, Vec<usize>)> {
    let head = ExogenousProcess {
        stages: p.stages[..t - 1].to_vec(),
    };
    let tree = build_exogenous_tree(&head, &TreeSpec::new(n, QuadratureRule::GaussLegendre))?;
    let leaves = (0..tree.len())
        .filter(|&i| tree.nodes[i].children.is_empty())
        .collect();
    Ok((tree, leaves))
}

/// Atoms per dimension used when a law has to be discretized for a
/// transport computation.
const OT_ATOMS: usize = 20;

/// `E_{xi_[t-1]} d_K(Q_t(.|hist), Q~_t(.|hist))` for `t = 1..=T`, averaged
/// over `n_hist_samples`-point quadrature histories of `p`.
pub fn stagewise_conditional_metric(
    p: &ExogenousProcess,
    q: &ExogenousProcess,
    n_hist_samples: usize,
) -> Result<Vec<f64>> {
    if p.horizon() != q.horizon() {
        return Err(Error::InvalidInput(
            "processes have different horizons".into(),
        ));
    }
    let mut out = Vec::with_capacity(p.horizon());
    for t in 1..=p.horizon() {
        let (sp, sq) = (&p.stages[t - 1], &q.stages[t - 1]);
        let v = match (sp, sq) {
            (ExogenousStage::Marginal { law: a }, ExogenousStage::Marginal { law: b }) => {
                kantorovich_law(a, b, OT_ATOMS)?
            }
            (
                ExogenousStage::AffineShift {
                    weights: wa,
                    innovation: a,
                },
                ExogenousStage::AffineShift {
                    weights: wb,
                    innovation: b,
                },
            ) if wa == wb => kantorovich_law(a, b, OT_ATOMS)?,
            _ => {
                let (tree, leaves) = histories(p, t, n_hist_samples)?;
                let mut acc = 0.0;
                for leaf in leaves {
                    let hist = tree.xi_history(leaf);
                    let a = p.conditional(t, &hist)?;
                    let b = q.conditional(t, &hist)?;
                    acc += tree.path_prob(leaf) * kantorovich_law(&a, &b, OT_ATOMS)?;
                }
                acc
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// `d_{FM,p}` of the path laws bounded through the quantile coupling, with
/// the path norm `max_t |xi_t|_inf`.
pub fn coupled_fortet_mourier(
    p: &ExogenousProcess,
    q: &ExogenousProcess,
    order: f64,
    nodes_per_cell: usize,
) -> Result<f64> {
    if !(order >= 1.0) {
        return Err(Error::InvalidExponent(order));
    }
    let norm = |a: &[Vec<f64>]| {
        a.iter()
            .flat_map(|x| x.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    };
    coupled_path_expectation(p, q, nodes_per_cell, |a, b| {
        let d = a
            .iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max);
        let w = 1f64
            .max(norm(a).powf(order - 1.0))
            .max(norm(b).powf(order - 1.0));
        w * d
    })
}

/// Which gap a bound is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    Value,
    Solution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub value: f64,
    /// Metric inputs in readable form.
    pub metric_input: String,
    pub gap: GapKind,
    /// `None` when the gap it is compared to is unknown.
    pub dominates_gap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInput {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub base: String,
    pub perturbed: String,
    pub value_base: f64,
    pub value_perturbed: f64,
    pub value_gap: f64,
    pub solution_distance: Option<f64>,
    pub solution_note: Option<String>,
    pub metrics: Vec<MetricInput>,
    pub bounds: Vec<BoundEntry>,
    pub verdict: Option<String>,
    pub constants: Option<ConstantTable>,
    pub notes: Vec<String>,
}

/// Slack allowed when checking that a bound dominates a gap.
pub const DOMINANCE_SLACK: f64 = 1e-6;

impl BoundReport {
    pub fn bound(&self, name: &str) -> Option<f64> {
        self.bounds.iter().find(|b| b.name == name).map(|b| b.value)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.value)
    }

    /// Recompute dominance flags and the tightness verdict from the stored
    /// numbers.
    pub fn recompute_verdicts(&mut self) {
        for b in &mut self.bounds {
            let gap = match b.gap {
                GapKind::Value => Some(self.value_gap),
                GapKind::Solution => self.solution_distance,
            };
            b.dominates_gap = gap.map(|g| b.value >= g - DOMINANCE_SLACK);
        }
        let ours = self.bound("stagewise_value");
        let others: Vec<(&str, f64)> = [
            ("nested", "nested_comparison"),
            ("filtration", "filtration_comparison"),
        ]
        .iter()
        .filter_map(|(label, name)| self.bound(name).map(|v| (*label, v)))
        .collect();
        self.verdict = match ours {
            Some(s) if !others.is_empty() => {
                let (label, best) =
                    others
                        .iter()
                        .copied()
                        .fold(("", f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                Some(if s <= best {
                    "stagewise tighter".to_string()
                } else {
                    format!("{label} tighter")
                })
            }
            _ => None,
        };
    }

    pub fn push_bound(&mut self, name: &str, value: f64, metric_input: String, gap: GapKind) {
        self.bounds.push(BoundEntry {
            name: name.to_string(),
            value,
            metric_input,
            gap,
            dominates_gap: None,
        });
    }

    pub fn push_metric(&mut self, name: &str, value: f64) {
        self.metrics.push(MetricInput {
            name: name.to_string(),
            value,
        });
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_pretty(self)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "## {} vs {}\n", self.base, self.perturbed);
        let _ = writeln!(s, "| quantity | value |\n|---|---|");
        let _ = writeln!(s, "| value (base) | {} |", fmt4(self.value_base));
        let _ = writeln!(s, "| value (perturbed) | {} |", fmt4(self.value_perturbed));
        let _ = writeln!(s, "| value gap | {} |", fmt4(self.value_gap));
        match (self.solution_distance, &self.solution_note) {
            (Some(d), _) => {
                let _ = writeln!(s, "| solution distance | {} |", fmt4(d));
            }
            (None, Some(n)) => {
                let _ = writeln!(s, "| solution distance | {n} |");
            }
            _ => {}
        }
        for m in &self.metrics {
            let _ = writeln!(s, "| {} | {} |", m.name, fmt4(m.value));
        }
        let _ = writeln!(
            s,
            "\n| bound | value | metric input | dominates gap |\n|---|---|---|---|"
        );
        for b in &self.bounds {
            let d = match b.dominates_gap {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "n/a",
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} |",
                b.name,
                fmt4(b.value),
                b.metric_input,
                d
            );
        }
        if let Some(v) = &self.verdict {
            let _ = writeln!(s, "\nverdict: {v}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "\nnote: {n}");
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bound_name,value,metric_input,dominates_gap\n");
        for b in &self.bounds {
            let d = b.dominates_gap.map_or("na".to_string(), |d| d.to_string());
            let _ = writeln!(
                s,
                "{},{},\"{}\",{}",
                b.name,
                crate::io::round_sig(b.value),
                b.metric_input.replace('"', "'"),
                d
            );
        }
        s
    }
}

/// Settings of [`bound_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub solver: SolverConfig,
    /// Gauss nodes per quantile cell in coupled path expectations.
    pub coupling_nodes: usize,
    /// Quadrature points per dimension for conditional-law histories.
    pub hist_samples: usize,
    /// `(L_beta, beta)` of the nested-distance comparison, with the atoms
    /// per dimension of the trees it is computed on.
    pub nested: Option<(f64, f64, usize)>,
    /// `(L, r)` of the filtration comparison.
    pub filtration: Option<(f64, f64)>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            solver: SolverConfig::default(),
            coupling_nodes: 6,
            hist_samples: 4,
            nested: None,
            filtration: None,
        }
    }
}

fn same<T: Serialize>(a: &T, b: &T) -> Result<bool> {
    Ok(serde_json::to_value(a)? == serde_json::to_value(b)?)
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt4(*x)).collect();
    format!("({})", parts.join(", "))
}

/// Solver trees and policies, per coordinate for split instances.
fn policy_parts(
    inst: &ProblemInstance,
    rep: &SolveReport,
    spec: &TreeSpec,
) -> Result<Vec<(ScenarioTree, crate::solver::Policy)>> {
    if rep.coordinates.is_empty() {
        let tree = build_joint_tree(&inst.exogenous, &inst.endogenous, spec)?;
        Ok(vec![(tree, rep.policy.clone())])
    } else {
        rep.coordinates
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let sub = inst.coordinate(i)?;
                Ok((
                    build_joint_tree(&sub.exogenous, &sub.endogenous, spec)?,
                    r.policy.clone(),
                ))
            })
            .collect()
    }
}

/// `sum_t E|x_t - x~_t|_inf` over matched decision nodes, coordinates
/// combined by their largest expectation.
fn policy_distance(
    parts_a: &[(ScenarioTree, crate::solver::Policy)],
    parts_b: &[(ScenarioTree, crate::solver::Policy)],
) -> Option<f64> {
    if parts_a.len() != parts_b.len() {
        return None;
    }
    let horizon = parts_a.first()?.0.horizon;
    let mut total = 0.0;
    for t in 0..=horizon {
        let mut worst: f64 = 0.0;
        for ((ta, pa), (tb, pb)) in parts_a.iter().zip(parts_b) {
            if ta.layer_sizes() != tb.layer_sizes() {
                return None;
            }
            let mut e = 0.0;
            for (&node, x) in &pa.decisions {
                let n = &ta.nodes[node];
                let stage = if node == 0 { 0 } else { n.stage };
                if stage != t {
                    continue;
                }
                let y = pb.get(node)?;
                e += ta.path_prob(node) * crate::linalg::inf_dist(x, y);
            }
            worst = worst.max(e);
        }
        total += worst;
    }
    Some(total)
}

/// Solve both instances, compute every applicable metric, coefficient and
/// bound, and compare them with the observed gaps.
pub fn bound_report(
    base: &ProblemInstance,
    pert: &ProblemInstance,
    cfg: &ReportConfig,
) -> Result<BoundReport> {
    base.validate()?;
    pert.validate()?;
    if !same(&base.stages, &pert.stages)?
        || base.initial_state != pert.initial_state
        || base.horizon != pert.horizon
    {
        return Err(Error::InvalidInput(
            "instances must differ only in their distributions".into(),
        ));
    }
    let exo_same = same(&base.exogenous, &pert.exogenous)?;
    let endo_same = same(&base.endogenous, &pert.endogenous)?;

    let rep_a = solve(base, &cfg.solver)?;
    let rep_b = solve(pert, &cfg.solver)?;
    let mut report = BoundReport {
        base: base.name.clone().unwrap_or_else(|| "base".into()),
        perturbed: pert
            .name
            .clone()
            .map_or_else(|| "perturbed".into(), |n| format!("{n} (perturbed)")),
        value_base: rep_a.value,
        value_perturbed: rep_b.value,
        value_gap: (rep_a.value - rep_b.value).abs(),
        solution_distance: None,
        solution_note: None,
        metrics: Vec::new(),
        bounds: Vec::new(),
        verdict: None,
        constants: None,
        notes: Vec::new(),
    };
    if !exo_same && !endo_same {
        report.notes.push(
            "both exogenous and endogenous laws differ; each bound covers one source only".into(),
        );
    }

    let reg = derive_regularity(base)?;
    let growth = reg.growth;
    let table = match ConstantTable::compute(&reg) {
        Ok(t) => Some(t),
        Err(e) => {
            report.notes.push(format!("constants unavailable: {e}"));
            None
        }
    };

    let parts_a = policy_parts(base, &rep_a, &cfg.solver.tree)?;
    let parts_b = policy_parts(pert, &rep_b, &cfg.solver.tree)?;
    if growth.is_some() {
        report.solution_distance = policy_distance(&parts_a, &parts_b);
    }
    if report.solution_distance.is_none() {
        report.solution_note = Some("set-valued, estimate skipped".into());
    }

    // endogenous side
    let dk: Vec<f64> = base
        .endogenous
        .laws
        .iter()
        .zip(&pert.endogenous.laws)
        .map(|(a, b)| kantorovich_law(a, b, OT_ATOMS))
        .collect::<Result<_>>()?;
    for (t, d) in dk.iter().enumerate() {
        report.push_metric(&format!("d_K(P_{t})"), *d);
    }
    // exogenous side
    let cond = stagewise_conditional_metric(&base.exogenous, &pert.exogenous, cfg.hist_samples)?;
    for (t, d) in cond.iter().enumerate() {
        report.push_metric(&format!("E d_K(Q_{})", t + 1), *d);
    }
    let m = coupled_path_distance(&base.exogenous, &pert.exogenous, cfg.coupling_nodes)?;
    report.push_metric("E|xi - xi~|", m);
    let t_max = base.horizon as f64;
    let fm_2t = coupled_fortet_mourier(
        &base.exogenous,
        &pert.exogenous,
        2.0 * t_max,
        cfg.coupling_nodes,
    )?;
    let fm_3t1 = coupled_fortet_mourier(
        &base.exogenous,
        &pert.exogenous,
        3.0 * t_max + 1.0,
        cfg.coupling_nodes,
    )?;
    report.push_metric("d_FM,2T", fm_2t);
    report.push_metric("d_FM,3T+1", fm_3t1);

    // a bound covers one perturbation source; identical instances get all
    let endo_side = !endo_same || exo_same;
    let exo_side = !exo_same || endo_same;
    if let Some(table) = &table {
        if endo_side {
            let dk_s = format!("d_K={}", list(&dk));
            report.push_bound(
                "endogenous_value",
                endo_bounds(&table.endogenous, &dk, BoundMode::Value, None)?,
                dk_s.clone(),
                GapKind::Value,
            );
            if growth.is_some() {
                report.push_bound(
                    "endogenous_solution",
                    endo_bounds(&table.endogenous, &dk, BoundMode::Solution, growth)?,
                    dk_s,
                    GapKind::Solution,
                );
            }
        }
        if exo_side {
            let inputs = GlobalInputs {
                expected_distance: Some(m),
                fm_2t: Some(fm_2t),
                fm_3t1: Some(fm_3t1),
            };
            let g = &table.exogenous_global;
            report.push_bound(
                "exogenous_global_value",
                exo_global_bounds(g, &inputs, GlobalMode::Value, None)?,
                format!("E|xi-xi~|={}", fmt4(m)),
                GapKind::Value,
            );
            report.push_bound(
                "exogenous_global_value_fm",
                exo_global_bounds(g, &inputs, GlobalMode::ValueFm, None)?,
                format!("d_FM,3T+1={}", fmt4(fm_3t1)),
                GapKind::Value,
            );
            if growth.is_some() {
                report.push_bound(
                    "exogenous_global_solution",
                    exo_global_bounds(g, &inputs, GlobalMode::Solution, growth)?,
                    format!("E|xi-xi~|={}", fmt4(m)),
                    GapKind::Solution,
                );
                report.push_bound(
                    "exogenous_global_solution_fm",
                    exo_global_bounds(g, &inputs, GlobalMode::SolutionFm, growth)?,
                    format!("d_FM,2T={}, d_FM,3T+1={}", fmt4(fm_2t), fmt4(fm_3t1)),
                    GapKind::Solution,
                );
            }
            match &table.stagewise {
                Some(sw) => {
                    let cs = format!("E d_K(Q_t)={}", list(&cond));
                    report.push_bound(
                        "stagewise_value",
                        exo_stagewise_bounds(sw, g, &cond, BoundMode::Value, None)?,
                        cs.clone(),
                        GapKind::Value,
                    );
                    if growth.is_some() {
                        report.push_bound(
                            "stagewise_solution",
                            exo_stagewise_bounds(sw, g, &cond, BoundMode::Solution, growth)?,
                            cs,
                            GapKind::Solution,
                        );
                    }
                }
                None => report
                    .notes
                    .push("kernel moduli L_Q unknown; stagewise bounds skipped".into()),
            }
        }
        if growth.is_none() {
            report
                .notes
                .push("no growth condition declared; solution bounds skipped".into());
        }
    }

    if let Some((l, beta, atoms)) = cfg.nested {
        let spec = TreeSpec::new(atoms, QuadratureRule::Midpoint);
        let tp = build_exogenous_tree(&base.exogenous, &spec)?;
        let tq = build_exogenous_tree(&pert.exogenous, &spec)?;
        let d = nested_distance(&tp, &tq)?;
        report.push_metric("d_Nested", d);
        report.push_bound(
            "nested_comparison",
            comparison_bounds(&Comparison::Nested {
                lipschitz: l,
                exponent: beta,
                distance: d,
            })?,
            format!("L={}, beta={}, d_Nested={}", fmt4(l), fmt4(beta), fmt4(d)),
            GapKind::Value,
        );
    }
    if let Some((l, r)) = cfg.filtration {
        let w = coupled_wasserstein(&base.exogenous, &pert.exogenous, r, cfg.coupling_nodes)?;
        let mut stages = vec![0.0f64; base.horizon];
        for ((ta, pa), (tb, pb)) in parts_a.iter().zip(&parts_b) {
            let f = filtration_estimate(pa, pb, ta, tb)?;
            for (s, v) in stages.iter_mut().zip(&f.stages) {
                *s = s.max(*v);
            }
        }
        let filt: f64 = stages.iter().sum();
        for (t, v) in stages.iter().enumerate() {
            report.push_metric(&format!("d_Filt stage {}", t + 1), *v);
        }
        report.push_metric("d_Filt", filt);
        report.push_metric(&format!("W_{r}"), w);
        report.push_bound(
            "filtration_comparison",
            comparison_bounds(&Comparison::Filtration {
                lipschitz: l,
                wasserstein: w,
                filtration: filt,
            })?,
            format!("L={}, W_{}={}, d_Filt={}", fmt4(l), r, fmt4(w), fmt4(filt)),
            GapKind::Value,
        );
    }
    report.constants = table;
    report.recompute_verdicts();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz::endogenous_coeffs;
    use crate::model::Regularity;

    #[test]
    fn endogenous_value_substitution() {
        let c = endogenous_coeffs(&Regularity::uniform(1, 2.0, 1.0, 1.0, 40.0, 10.0)).unwrap();
        let v = endo_bounds(&c, &[0.1, 0.2], BoundMode::Value, None).unwrap();
        assert!((v - 0.85).abs() < 1e-12);
        assert_eq!(
            endo_bounds(&c, &[0.0, 0.0], BoundMode::Value, None).unwrap(),
            0.0
        );
        assert!(matches!(
            endo_bounds(&c, &[0.1, 0.2], BoundMode::Solution, None),
            Err(Error::MissingGrowth)
        ));
    }

    #[test]
    fn global_solution_substitution() {
        let c = ExogenousGlobalCoeffs {
            l_theta: 2.0,
            l_sigma_1: 1.0,
            l_sigma_2: 1.0,
            l_sigma: 1.0,
            l_x: 0.0,
        };
        let m = GlobalInputs {
            expected_distance: Some(0.1),
            ..Default::default()
        };
        let g = Some(Growth { beta: 1.0, nu: 1.0 });
        let v = exo_global_bounds(&c, &m, GlobalMode::Solution, g).unwrap();
        assert!((v - 0.3).abs() < 1e-12);
        assert!((exo_global_bounds(&c, &m, GlobalMode::Value, None).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn comparisons() {
        let n = Comparison::Nested {
            lipschitz: 4.0,
            exponent: 1.0,
            distance: 0.04,
        };
        assert!((comparison_bounds(&n).unwrap() - 0.16).abs() < 1e-12);
        let f = Comparison::Filtration {
            lipschitz: 18.0,
            wasserstein: 0.030,
            filtration: 0.203,
        };
        assert!((comparison_bounds(&f).unwrap() - 4.194).abs() < 1e-9);
        let bad = Comparison::Nested {
            lipschitz: 1.0,
            exponent: 0.0,
            distance: 0.1,
        };
        assert!(matches!(
            comparison_bounds(&bad),
            Err(Error::InvalidExponent(_))
        ));
    }
}
