//! Nested stage minimization on scenario trees.
//!
//! The value at a decision node is found by recursive descent: each trial
//! decision is scored by the expected stage cost plus the optimal values of
//! the child decision nodes. Stage problems are solved by projected
//! coordinate descent with golden-section line searches.

use std::cell::Cell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemInstance, FEAS_TOL};
use crate::stochastic::{build_joint_tree, DiscreteDistribution, NodeKind, ScenarioTree, TreeSpec};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// Residual level treated as feasible inside line searches.
const LINE_FEAS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Width at which golden-section searches stop.
    pub tolerance: f64,
    pub bisection_tolerance: f64,
    pub max_sweeps: usize,
    /// Number of starting points tried for multi-dimensional decisions.
    pub multi_start: usize,
    /// Solve separable instances coordinate by coordinate.
    pub separable: bool,
    pub tree: TreeSpec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-6,
            bisection_tolerance: 1e-12,
            max_sweeps: 100,
            multi_start: 3,
            separable: true,
            tree: TreeSpec::new(3, Default::default()),
        }
    }
}

/// Decision per decision node (the root for stage 0, exogenous nodes after).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub decisions: BTreeMap<usize, Vec<f64>>,
}

impl Policy {
    pub fn get(&self, node: usize) -> Option<&[f64]> {
        self.decisions.get(&node).map(Vec::as_slice)
    }
}

/// Sample of the value function along the optimal trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: usize,
    pub stage: usize,
    pub state: Vec<f64>,
    pub prev_decision: Vec<f64>,
    pub decision: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub stage_minimizations: u64,
    pub objective_evaluations: u64,
    pub tree_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub value: f64,
    pub policy: Policy,
    pub node_values: Vec<NodeRecord>,
    pub stats: SolveStats,
    /// Per-coordinate reports when the instance was split.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coordinates: Vec<SolveReport>,
}

fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    let tie = (a.0 - b.0).abs() <= 1e-12 * (1.0 + a.0.abs().max(b.0.abs()));
    if tie {
        a.1.iter()
            .zip(b.1)
            .find(|(x, y)| x != y)
            .is_some_and(|(x, y)| x < y)
    } else {
        a.0 < b.0
    }
}

/// Minimize a convex objective over `{x in [lower, upper] : residual(x) <= 0}`.
///
/// `starts` are tried in order (deduplicated; only the first is used for
/// one-dimensional decisions). Returns the best value and minimizer.
pub fn stage_minimize<R, F>(
    lower: &[f64],
    upper: &[f64],
    starts: &[Vec<f64>],
    mut residual: R,
    mut objective: F,
    cfg: &SolverConfig,
    stage: usize,
) -> Result<(f64, Vec<f64>)>
where
    R: FnMut(&[f64]) -> Result<f64>,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = lower.len();
    let clamp = |p: &[f64]| -> Vec<f64> {
        p.iter()
            .zip(lower.iter().zip(upper))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect()
    };
    let mut feasible_starts: Vec<Vec<f64>> = Vec::new();
    for s in starts.iter().filter(|s| s.len() == n) {
        let p = clamp(s);
        if feasible_starts.contains(&p) {
            continue;
        }
        if residual(&p)? <= FEAS_TOL {
            feasible_starts.push(p);
        }
    }
    if feasible_starts.is_empty() {
        let centre: Vec<f64> = lower
            .iter()
            .zip(upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        feasible_starts.push(phase_one(lower, upper, centre, &mut residual, cfg, stage)?);
    }
    let limit = if n == 1 { 1 } else { cfg.multi_start.max(1) };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in feasible_starts.into_iter().take(limit) {
        let (v, x) = descend(lower, upper, start, &mut residual, &mut objective, cfg)?;
        if best
            .as_ref()
            .is_none_or(|(bv, bx)| better((v, &x), (*bv, bx)))
        {
            best = Some((v, x));
        }
    }
    Ok(best.expect("at least one start"))
}

fn descend<R, F>(
    lower: &[f64],
    upper: &[f64],
    mut x: Vec<f64>,
    residual: &mut R,
    objective: &mut F,
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)>
where
    R: FnMut(&[f64]) -> Result<f64>,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let mut fx = objective(&x)?;
    for _sweep in 0..cfg.max_sweeps {
        let mut improved = false;
        for i in 0..n {
            let (lo, hi) = feasible_interval(lower[i], upper[i], &mut x, i, residual, cfg)?;
            let (v, tau) = line_search(lo, hi, &mut x, i, objective, cfg)?;
            let mut cand = x.clone();
            cand[i] = tau;
            if better((v, &cand), (fx, &x)) {
                improved |= v < fx - 1e-12 * (1.0 + fx.abs());
                x = cand;
                fx = v;
            }
        }
        if n == 1 || !improved {
            return Ok((fx, x));
        }
    }
    Err(Error::MaxIterations(cfg.max_sweeps))
}

/// Feasible interval of coordinate `i` through the (feasible) point `x`.
fn feasible_interval<R>(
    lo: f64,
    hi: f64,
    x: &mut [f64],
    i: usize,
    residual: &mut R,
    cfg: &SolverConfig,
) -> Result<(f64, f64)>
where
    R: FnMut(&[f64]) -> Result<f64>,
{
    let x0 = x[i];
    let mut probe = |x: &mut [f64], v: f64| -> Result<bool> {
        x[i] = v;
        Ok(residual(x)? <= LINE_FEAS)
    };
    let mut edge = |x: &mut [f64], target: f64| -> Result<f64> {
        if probe(x, target)? {
            return Ok(target);
        }
        let (mut good, mut bad) = (x0, target);
        while (bad - good).abs() > cfg.bisection_tolerance * (1.0 + good.abs()) {
            let mid = 0.5 * (good + bad);
            if probe(x, mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    };
    let a = edge(x, lo)?;
    let b = edge(x, hi)?;
    x[i] = x0;
    Ok((a.min(x0), b.max(x0)))
}

/// Golden-section search on `[a, b]` plus both endpoints; ties go to the
/// smaller coordinate.
fn line_search<F>(
    a: f64,
    b: f64,
    x: &mut [f64],
    i: usize,
    objective: &mut F,
    cfg: &SolverConfig,
) -> Result<(f64, f64)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let x0 = x[i];
    let mut eval = |x: &mut [f64], v: f64| -> Result<f64> {
        x[i] = v;
        objective(x)
    };
    let mut best = (eval(x, a)?, a);
    let take = |v: f64, t: f64, best: &mut (f64, f64)| {
        if better((v, &[t]), (best.0, &[best.1])) {
            *best = (v, t);
        }
    };
    if b > a {
        let fb = eval(x, b)?;
        take(fb, b, &mut best);
        let (mut lo, mut hi) = (a, b);
        let mut c = hi - GOLDEN * (hi - lo);
        let mut d = lo + GOLDEN * (hi - lo);
        let mut fc = eval(x, c)?;
        let mut fd = eval(x, d)?;
        take(fc, c, &mut best);
        take(fd, d, &mut best);
        while hi - lo > cfg.tolerance {
            if fc <= fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - GOLDEN * (hi - lo);
                fc = eval(x, c)?;
                take(fc, c, &mut best);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + GOLDEN * (hi - lo);
                fd = eval(x, d)?;
                take(fd, d, &mut best);
            }
        }
    }
    x[i] = x0;
    Ok(best)
}

/// Find a feasible point by minimizing the largest residual over the box.
fn phase_one<R>(
    lower: &[f64],
    upper: &[f64],
    mut x: Vec<f64>,
    residual: &mut R,
    cfg: &SolverConfig,
    stage: usize,
) -> Result<Vec<f64>>
where
    R: FnMut(&[f64]) -> Result<f64>,
{
    let tight = SolverConfig {
        tolerance: cfg.bisection_tolerance.max(1e-14),
        ..*cfg
    };
    let mut r = residual(&x)?;
    for _ in 0..cfg.max_sweeps {
        let before = r;
        for i in 0..x.len() {
            let (v, t) = line_search(lower[i], upper[i], &mut x, i, residual, &tight)?;
            if v < r {
                x[i] = t;
                r = v;
            }
        }
        if r <= LINE_FEAS || r >= before - 1e-15 {
            break;
        }
    }
    if r <= FEAS_TOL {
        Ok(x)
    } else {
        Err(Error::Infeasible { stage })
    }
}

struct Nested<'a> {
    inst: &'a ProblemInstance,
    tree: &'a ScenarioTree,
    cfg: &'a SolverConfig,
    minimizations: Cell<u64>,
    evaluations: Cell<u64>,
}

impl<'a> Nested<'a> {
    fn new(inst: &'a ProblemInstance, tree: &'a ScenarioTree, cfg: &'a SolverConfig) -> Self {
        Nested {
            inst,
            tree,
            cfg,
            minimizations: Cell::new(0),
            evaluations: Cell::new(0),
        }
    }

    /// Expected cost-to-go at decision node `node` of stage `t` for a trial
    /// decision `x`.
    fn objective(
        &self,
        t: usize,
        node: usize,
        s: &[f64],
        x: &[f64],
        hist: &mut Vec<&'a [f64]>,
    ) -> Result<f64> {
        self.evaluations.set(self.evaluations.get() + 1);
        let st = &self.inst.stages[t];
        let xi_t = hist.last().copied();
        let mut next = Vec::new();
        let mut total = 0.0;
        for &c in &self.tree.nodes[node].children {
            let zn = &self.tree.nodes[c];
            let mut v = st.cost.eval(t, s, x, hist, &zn.value)?;
            if t < self.inst.horizon {
                let tr = st.transition.as_ref().expect("validated");
                tr.eval(
                    t,
                    s,
                    x,
                    if t == 0 { None } else { xi_t },
                    &zn.value,
                    &mut next,
                )?;
                for &g in &zn.children {
                    let gn = &self.tree.nodes[g];
                    hist.push(&gn.value);
                    let r = self.value(t + 1, g, &next, x, hist);
                    hist.pop();
                    v += gn.prob * r?.0;
                }
            }
            total += zn.prob * v;
        }
        Ok(total)
    }

    fn starts(&self, t: usize, x_prev: &[f64], lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
        let mut s = vec![lower
            .iter()
            .zip(upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect::<Vec<_>>()];
        if let Some(p) = &self.inst.stages[t].slater_point {
            s.push(p.clone());
        }
        if x_prev.len() == lower.len() {
            s.push(x_prev.to_vec());
        }
        s
    }

    fn value(
        &self,
        t: usize,
        node: usize,
        s: &[f64],
        x_prev: &[f64],
        hist: &mut Vec<&'a [f64]>,
    ) -> Result<(f64, Vec<f64>)> {
        self.minimizations.set(self.minimizations.get() + 1);
        let st = &self.inst.stages[t];
        let (lower, upper) = st.decision_box().expect("validated");
        let starts = self.starts(t, x_prev, &lower, &upper);
        let frozen: Vec<&[f64]> = hist.clone();
        stage_minimize(
            &lower,
            &upper,
            &starts,
            |x| st.max_residual(t, s, x, x_prev, &frozen),
            |x| self.objective(t, node, s, x, hist),
            self.cfg,
            t,
        )
    }

    fn forward(
        &self,
        t: usize,
        node: usize,
        s: &[f64],
        x_prev: &[f64],
        hist: &mut Vec<&'a [f64]>,
        policy: &mut Policy,
        records: &mut Vec<NodeRecord>,
    ) -> Result<()> {
        let (v, x) = self.value(t, node, s, x_prev, hist)?;
        records.push(NodeRecord {
            node,
            stage: t,
            state: s.to_vec(),
            prev_decision: x_prev.to_vec(),
            decision: x.clone(),
            value: v,
        });
        policy.decisions.insert(node, x.clone());
        if t == self.inst.horizon {
            return Ok(());
        }
        let tr = self.inst.stages[t].transition.as_ref().expect("validated");
        let xi_t = hist.last().copied();
        let mut next = Vec::new();
        for &c in &self.tree.nodes[node].children {
            let zn = &self.tree.nodes[c];
            tr.eval(
                t,
                s,
                &x,
                if t == 0 { None } else { xi_t },
                &zn.value,
                &mut next,
            )?;
            let state = next.clone();
            for &g in &zn.children {
                hist.push(&self.tree.nodes[g].value);
                let r = self.forward(t + 1, g, &state, &x, hist, policy, records);
                hist.pop();
                r?;
            }
        }
        Ok(())
    }
}

fn check_tree(inst: &ProblemInstance, tree: &ScenarioTree) -> Result<()> {
    if tree.horizon != inst.horizon || tree.is_exogenous_only() && inst.horizon > 0 {
        return Err(Error::InvalidTrees(
            "solver needs a joint tree of the instance horizon".into(),
        ));
    }
    Ok(())
}

/// Solve on a given joint tree and record the optimal policy.
pub fn solve_nested(
    inst: &ProblemInstance,
    tree: &ScenarioTree,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    inst.validate()?;
    check_tree(inst, tree)?;
    let nested = Nested::new(inst, tree, cfg);
    let mut policy = Policy::default();
    let mut records = Vec::new();
    let mut hist = Vec::new();
    nested.forward(
        0,
        0,
        &inst.initial_state,
        &[],
        &mut hist,
        &mut policy,
        &mut records,
    )?;
    Ok(SolveReport {
        value: records[0].value,
        policy,
        node_values: records,
        stats: SolveStats {
            stage_minimizations: nested.minimizations.get(),
            objective_evaluations: nested.evaluations.get(),
            tree_nodes: tree.len(),
        },
        coordinates: Vec::new(),
    })
}

/// Optimal value only, without the forward pass.
pub fn optimal_value(
    inst: &ProblemInstance,
    tree: &ScenarioTree,
    cfg: &SolverConfig,
) -> Result<f64> {
    inst.validate()?;
    check_tree(inst, tree)?;
    let nested = Nested::new(inst, tree, cfg);
    Ok(nested
        .value(0, 0, &inst.initial_state, &[], &mut Vec::new())?
        .0)
}

/// Build trees from `cfg.tree` and solve, splitting separable instances
/// into one-dimensional coordinate problems.
pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    inst.validate()?;
    if cfg.separable && inst.is_separable() {
        let n = inst.stages[0].dims.decision;
        let mut parts = Vec::with_capacity(n);
        for i in 0..n {
            let sub = inst.coordinate(i)?;
            let tree = build_joint_tree(&sub.exogenous, &sub.endogenous, &cfg.tree)?;
            parts.push(solve_nested(&sub, &tree, cfg)?);
        }
        let stats = parts
            .iter()
            .fold(SolveStats::default(), |acc, p| SolveStats {
                stage_minimizations: acc.stage_minimizations + p.stats.stage_minimizations,
                objective_evaluations: acc.objective_evaluations + p.stats.objective_evaluations,
                tree_nodes: acc.tree_nodes + p.stats.tree_nodes,
            });
        return Ok(SolveReport {
            value: parts.iter().map(|p| p.value).sum(),
            policy: Policy::default(),
            node_values: Vec::new(),
            stats,
            coordinates: parts,
        });
    }
    let tree = build_joint_tree(&inst.exogenous, &inst.endogenous, &cfg.tree)?;
    solve_nested(inst, &tree, cfg)
}

/// `v_t(s_{t-1}, x_{t-1}, xi_[t], zeta_{t-1})` at the exogenous node `node`
/// of stage `t >= 1`; the state entering stage `t` is produced by the
/// transition out of stage `t - 1`.
pub fn value_function(
    inst: &ProblemInstance,
    tree: &ScenarioTree,
    cfg: &SolverConfig,
    node: usize,
    s_prev: &[f64],
    x_prev: &[f64],
) -> Result<f64> {
    let n = tree
        .nodes
        .get(node)
        .filter(|n| n.kind == NodeKind::Exogenous)
        .ok_or_else(|| Error::InvalidHistory(format!("node {node} is not a decision node")))?;
    let t = n.stage;
    let zeta_node = n.parent.expect("exogenous node has a parent");
    let z = &tree.nodes[zeta_node].value;
    let hist = tree.xi_history(node);
    let xi_prev: &[f64] = if t >= 2 { hist[t - 2] } else { &[] };
    let s = inst.evaluate_transition(t - 1, s_prev, x_prev, xi_prev, z)?;
    let nested = Nested::new(inst, tree, cfg);
    let mut hist = hist;
    Ok(nested.value(t, node, &s, x_prev, &mut hist)?.0)
}

/// Expected total cost of a fixed policy on a tree.
pub fn evaluate_policy(
    inst: &ProblemInstance,
    tree: &ScenarioTree,
    policy: &Policy,
) -> Result<f64> {
    check_tree(inst, tree)?;
    fn go<'a>(
        inst: &ProblemInstance,
        tree: &'a ScenarioTree,
        policy: &Policy,
        t: usize,
        node: usize,
        s: &[f64],
        x_prev: &[f64],
        hist: &mut Vec<&'a [f64]>,
    ) -> Result<f64> {
        let x = policy.get(node).ok_or(Error::MissingDecision(node))?;
        let st = &inst.stages[t];
        let r = st.max_residual(t, s, x, x_prev, hist)?;
        if r > FEAS_TOL {
            return Err(Error::PolicyInfeasible { node, residual: r });
        }
        let xi_t = hist.last().copied();
        let mut total = 0.0;
        let mut next = Vec::new();
        for &c in &tree.nodes[node].children {
            let zn = &tree.nodes[c];
            let mut v = st.cost.eval(t, s, x, hist, &zn.value)?;
            if t < inst.horizon {
                st.transition.as_ref().unwrap().eval(
                    t,
                    s,
                    x,
                    if t == 0 { None } else { xi_t },
                    &zn.value,
                    &mut next,
                )?;
                let state = next.clone();
                for &g in &zn.children {
                    hist.push(&tree.nodes[g].value);
                    let r = go(inst, tree, policy, t + 1, g, &state, x, hist);
                    hist.pop();
                    v += tree.nodes[g].prob * r?;
                }
            }
            total += zn.prob * v;
        }
        Ok(total)
    }
    go(
        inst,
        tree,
        policy,
        0,
        0,
        &inst.initial_state,
        &[],
        &mut Vec::new(),
    )
}

/// What a feedback policy sees at a decision.
#[derive(Debug, Clone, Copy)]
pub struct PolicyInput<'a> {
    pub stage: usize,
    pub state: &'a [f64],
    pub prev_decision: &'a [f64],
    pub xi: &'a [&'a [f64]],
}

/// Expected total cost of a feedback policy, integrating each layer by
/// quadrature on the fly instead of materializing the tree.
pub fn evaluate_feedback_policy<P>(
    inst: &ProblemInstance,
    spec: &TreeSpec,
    policy: P,
) -> Result<f64>
where
    P: Fn(&PolicyInput<'_>) -> Vec<f64>,
{
    inst.validate()?;
    let zeta: Vec<DiscreteDistribution> = inst
        .endogenous
        .laws
        .iter()
        .map(|l| l.discretize(spec.n_per_dim, spec.rule))
        .collect::<Result<_>>()?;
    #[allow(clippy::too_many_arguments)]
    fn go<P: Fn(&PolicyInput<'_>) -> Vec<f64>>(
        inst: &ProblemInstance,
        spec: &TreeSpec,
        zeta: &[DiscreteDistribution],
        policy: &P,
        t: usize,
        s: &[f64],
        x_prev: &[f64],
        hist: &[Vec<f64>],
    ) -> Result<f64> {
        let refs: Vec<&[f64]> = hist.iter().map(Vec::as_slice).collect();
        let x = policy(&PolicyInput {
            stage: t,
            state: s,
            prev_decision: x_prev,
            xi: &refs,
        });
        let st = &inst.stages[t];
        let r = st.max_residual(t, s, &x, x_prev, &refs)?;
        if r > FEAS_TOL {
            return Err(Error::PolicyInfeasible {
                node: t,
                residual: r,
            });
        }
        let xi_t = refs.last().copied();
        let law = if t < inst.horizon {
            Some(
                inst.exogenous
                    .conditional(t + 1, &refs)?
                    .discretize(spec.n_per_dim, spec.rule)?,
            )
        } else {
            None
        };
        let mut total = 0.0;
        let mut next = Vec::new();
        for (z, pz) in zeta[t].iter() {
            let mut v = st.cost.eval(t, s, &x, &refs, z)?;
            if let Some(law) = &law {
                st.transition.as_ref().unwrap().eval(
                    t,
                    s,
                    &x,
                    if t == 0 { None } else { xi_t },
                    z,
                    &mut next,
                )?;
                let state = next.clone();
                for (a, pa) in law.iter() {
                    let mut child = hist.to_vec();
                    child.push(a.to_vec());
                    v += pa * go(inst, spec, zeta, policy, t + 1, &state, &x, &child)?;
                }
            }
            total += pz * v;
        }
        Ok(total)
    }
    go(inst, spec, &zeta, &policy, 0, &inst.initial_state, &[], &[])
}

/// Decisions of a feedback policy at every decision node of a joint tree.
pub fn tabulate_policy<P>(inst: &ProblemInstance, tree: &ScenarioTree, policy: P) -> Result<Policy>
where
    P: Fn(&PolicyInput<'_>) -> Vec<f64>,
{
    check_tree(inst, tree)?;
    #[allow(clippy::too_many_arguments)]
    fn go<'a, P: Fn(&PolicyInput<'_>) -> Vec<f64>>(
        inst: &ProblemInstance,
        tree: &'a ScenarioTree,
        policy: &P,
        t: usize,
        node: usize,
        s: &[f64],
        x_prev: &[f64],
        hist: &mut Vec<&'a [f64]>,
        out: &mut Policy,
    ) -> Result<()> {
        let x = policy(&PolicyInput {
            stage: t,
            state: s,
            prev_decision: x_prev,
            xi: hist,
        });
        out.decisions.insert(node, x.clone());
        if t == inst.horizon {
            return Ok(());
        }
        let tr = inst.stages[t].transition.as_ref().expect("validated");
        let xi_t = hist.last().copied();
        let mut next = Vec::new();
        for &c in &tree.nodes[node].children {
            let zn = &tree.nodes[c];
            tr.eval(
                t,
                s,
                &x,
                if t == 0 { None } else { xi_t },
                &zn.value,
                &mut next,
            )?;
            let state = next.clone();
            for &g in &zn.children {
                hist.push(&tree.nodes[g].value);
                let r = go(inst, tree, policy, t + 1, g, &state, &x, hist, out);
                hist.pop();
                r?;
            }
        }
        Ok(())
    }
    let mut out = Policy::default();
    go(
        inst,
        tree,
        &policy,
        0,
        0,
        &inst.initial_state,
        &[],
        &mut Vec::new(),
        &mut out,
    )?;
    Ok(out)
}

/// Closed-form policy of a built-in example evaluated by 16-point Gauss
/// quadrature per layer on each coordinate.
pub fn analytic_solve(id: &crate::examples::ExampleId, perturbed: bool) -> Result<f64> {
    if !crate::examples::has_analytic_policy(id) {
        return Err(Error::NotApplicable(format!(
            "example {id} has no closed-form policy"
        )));
    }
    let (inst, _) = crate::examples::build_example(id, perturbed)?;
    let spec = TreeSpec::new(16, crate::stochastic::QuadratureRule::GaussLegendre);
    let n = inst.stages[0].dims.decision;
    let mut total = 0.0;
    for i in 0..n {
        let sub = if n == 1 {
            inst.clone()
        } else {
            inst.coordinate(i)?
        };
        total +=
            evaluate_feedback_policy(&sub, &spec, |p| crate::examples::analytic_policy(id, p))?;
    }
    Ok(total)
}
