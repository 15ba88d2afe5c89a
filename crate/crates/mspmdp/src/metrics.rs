//! Probability metrics: Kantorovich, Fortet-Mourier, Wasserstein, nested
//! distance on trees and the filtration-distance estimate.

use std::collections::VecDeque;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inf_dist, inf_norm};
use crate::solver::Policy;
use crate::stochastic::{
    DiscreteDistribution, ExogenousProcess, Law, NodeKind, QuadratureRule, ScenarioTree, UniformBox,
};

/// Ground cost of a transport problem, all in the infinity norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "order", rename_all = "snake_case")]
pub enum GroundCost {
    /// `|x - y|`: the Kantorovich metric.
    InfNorm,
    /// `max{1, |x|^(p-1), |y|^(p-1)} |x - y|`.
    FortetMourier(f64),
    /// `|x - y|^r`; the optimum is returned to the power `1/r`.
    Power(f64),
}

impl GroundCost {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GroundCost::InfNorm => Ok(()),
            GroundCost::FortetMourier(p) | GroundCost::Power(p) if p >= 1.0 && p.is_finite() => {
                Ok(())
            }
            GroundCost::FortetMourier(p) | GroundCost::Power(p) => Err(Error::InvalidExponent(p)),
        }
    }

    pub fn cost(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = inf_dist(x, y);
        match *self {
            GroundCost::InfNorm => d,
            GroundCost::FortetMourier(p) => {
                let w = 1f64
                    .max(inf_norm(x).powf(p - 1.0))
                    .max(inf_norm(y).powf(p - 1.0));
                w * d
            }
            GroundCost::Power(r) => d.powf(r),
        }
    }
}

/// Optimal plan of a transportation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub cost: f64,
    /// `(supply index, demand index, mass)` of the basic cells.
    pub flows: Vec<(usize, usize, f64)>,
}

/// Minimum-cost transport from `supply` to `demand` by the transportation
/// simplex (north-west-corner start, MODI pricing, Bland's rule once
/// degenerate pivots pile up).
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<TransportPlan> {
    if cost.len() != supply.len() || cost.iter().any(|r| r.len() != demand.len()) {
        return Err(Error::InvalidInput(
            "cost matrix does not match the marginals".into(),
        ));
    }
    if supply
        .iter()
        .chain(demand)
        .any(|w| !(w.is_finite() && *w >= 0.0))
    {
        return Err(Error::InvalidInput("marginals must be nonnegative".into()));
    }
    let (sa, sb): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (sa - sb).abs() > 1e-9 * sa.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "unbalanced marginals ({sa} vs {sb})"
        )));
    }
    let rows: Vec<usize> = (0..supply.len()).filter(|&i| supply[i] > 0.0).collect();
    let cols: Vec<usize> = (0..demand.len()).filter(|&j| demand[j] > 0.0).collect();
    if rows.is_empty() || cols.is_empty() {
        return Ok(TransportPlan {
            cost: 0.0,
            flows: Vec::new(),
        });
    }
    let a: Vec<f64> = rows.iter().map(|&i| supply[i]).collect();
    let b: Vec<f64> = cols.iter().map(|&j| demand[j] * sa / sb).collect();
    let c: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| cost[i][j]).collect())
        .collect();
    let (m, n) = (a.len(), b.len());
    let scale = c.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    let eps = 1e-12 * (1.0 + scale);

    let mut flow = vec![0.0; m * n];
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    {
        let (mut ra, mut rb) = (a.clone(), b.clone());
        let (mut i, mut j) = (0, 0);
        loop {
            let q = ra[i].min(rb[j]);
            flow[i * n + j] = q;
            basis.push((i, j));
            ra[i] -= q;
            rb[j] -= q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n];
    let mut bland = false;
    let mut degenerate_run = 0usize;
    let max_iter = 50 * (m + n) * (m + n) + 1000;
    for _ in 0..max_iter {
        for l in adj.iter_mut() {
            l.clear();
        }
        for &(i, j) in &basis {
            adj[i].push(m + j);
            adj[m + j].push(i);
        }
        // potentials on the spanning tree, u_0 = 0
        let mut seen = vec![false; m + n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = queue.pop_front() {
            for &nb in &adj[node] {
                if seen[nb] {
                    continue;
                }
                seen[nb] = true;
                if node < m {
                    v[nb - m] = c[node][nb - m] - u[node];
                } else {
                    u[nb] = c[nb][node - m] - v[node - m];
                }
                queue.push_back(nb);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis must span");

        let mut entering: Option<(usize, usize)> = None;
        let mut best = -eps;
        'price: for i in 0..m {
            for j in 0..n {
                let r = c[i][j] - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'price;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            let total = basis.iter().map(|&(i, j)| flow[i * n + j] * c[i][j]).sum();
            return Ok(TransportPlan {
                cost: total,
                flows: basis
                    .iter()
                    .map(|&(i, j)| (rows[i], cols[j], flow[i * n + j]))
                    .collect(),
            });
        };

        // tree path from row ei to column ej
        let mut parent = vec![usize::MAX; m + n];
        let mut queue = VecDeque::from([ei]);
        parent[ei] = ei;
        while let Some(node) = queue.pop_front() {
            if node == m + ej {
                break;
            }
            for &nb in &adj[node] {
                if parent[nb] == usize::MAX {
                    parent[nb] = node;
                    queue.push_back(nb);
                }
            }
        }
        let mut path = vec![m + ej];
        while *path.last().unwrap() != ei {
            let last = *path.last().unwrap();
            path.push(parent[last]);
        }
        path.reverse();
        // edges along the path alternate -, +, -, ... starting at row ei
        let cell = |p: usize, q: usize| if p < m { (p, q - m) } else { (q, p - m) };
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for k in (0..path.len() - 1).step_by(2) {
            let (i, j) = cell(path[k], path[k + 1]);
            let f = flow[i * n + j];
            let idx = i * n + j;
            if f < theta || (f == theta && idx < leave) {
                theta = f;
                leave = idx;
            }
        }
        for k in 0..path.len() - 1 {
            let (i, j) = cell(path[k], path[k + 1]);
            if k % 2 == 0 {
                flow[i * n + j] -= theta;
            } else {
                flow[i * n + j] += theta;
            }
        }
        flow[ei * n + ej] = theta;
        flow[leave] = 0.0;
        let pos = basis.iter().position(|&(i, j)| i * n + j == leave).unwrap();
        basis[pos] = (ei, ej);
        if theta <= 1e-15 {
            degenerate_run += 1;
            if degenerate_run > m + n {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }
    Err(Error::MaxIterations(max_iter))
}

fn cost_matrix(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    cost: &GroundCost,
) -> Vec<Vec<f64>> {
    p.atoms()
        .iter()
        .map(|x| q.atoms().iter().map(|y| cost.cost(x, y)).collect())
        .collect()
}

/// Transport distance between two discrete laws.
pub fn ot_distance(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    cost: GroundCost,
) -> Result<f64> {
    cost.validate()?;
    if p.dim() != q.dim() {
        return Err(Error::InvalidDimension {
            what: "transport marginals".into(),
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let plan = solve_transport(p.weights(), q.weights(), &cost_matrix(p, q, &cost))?;
    Ok(match cost {
        GroundCost::Power(r) => plan.cost.max(0.0).powf(1.0 / r),
        _ => plan.cost.max(0.0),
    })
}

/// Kantorovich distance of scalar laws, `int |F_P - F_Q|`.
pub fn kantorovich_1d(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.dim() != 1 || q.dim() != 1 {
        return Err(Error::InvalidDimension {
            what: "kantorovich_1d".into(),
            expected: 1,
            got: p.dim().max(q.dim()),
        });
    }
    let mut events: Vec<(f64, f64)> = p
        .iter()
        .map(|(a, w)| (a[0], w))
        .chain(q.iter().map(|(a, w)| (a[0], -w)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut diff = 0.0;
    let mut total = 0.0;
    for k in 0..events.len() {
        diff += events[k].1;
        if k + 1 < events.len() {
            total += diff.abs() * (events[k + 1].0 - events[k].0);
        }
    }
    Ok(total)
}

/// `E |x - T(x)|_inf` for `x ~ U1` and `T` the increasing componentwise
/// affine map of `U1` onto `U2`.
pub fn kantorovich_uniform_affine(u1: &UniformBox, u2: &UniformBox) -> Result<f64> {
    u1.validate()?;
    u2.validate()?;
    if u1.dim() != u2.dim() {
        return Err(Error::NotApplicable(format!(
            "boxes of dimension {} and {} are not affinely related",
            u1.dim(),
            u2.dim()
        )));
    }
    // |T(x)_i - x_i| is |Z_i| with Z_i uniform on [lo_i, hi_i]
    let ends: Vec<(f64, f64)> = (0..u1.dim())
        .map(|i| {
            let (l1, h1, l2, h2) = (u1.lower[i], u1.upper[i], u2.lower[i], u2.upper[i]);
            let (a, b) = (l2 - l1, h2 - h1);
            (a.min(b), a.max(b))
        })
        .collect();
    let cdf = |y: f64| -> f64 {
        ends.iter()
            .map(|&(lo, hi)| {
                if hi - lo <= 1e-300 {
                    if lo.abs() <= y {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ((hi.min(y) - lo.max(-y)).max(0.0)) / (hi - lo)
                }
            })
            .product()
    };
    let mut knots: Vec<f64> = vec![0.0];
    for &(lo, hi) in &ends {
        knots.push(lo.abs());
        knots.push(hi.abs());
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let gl = GaussLegendre::new(NonZeroUsize::new(u1.dim() + 2).unwrap());
    let mut total = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in gl.iter() {
            total += half * wt * (1.0 - cdf(mid + half * x));
        }
    }
    Ok(total)
}

/// Kantorovich distance of two laws: closed form for uniform boxes, exact
/// sweep or simplex for discrete laws, and `atoms_per_dim` midpoint atoms
/// otherwise.
pub fn kantorovich_law(a: &Law, b: &Law, atoms_per_dim: usize) -> Result<f64> {
    match (a, b) {
        (Law::Uniform(u), Law::Uniform(v)) => kantorovich_uniform_affine(u, v),
        (Law::Discrete(p), Law::Discrete(q)) if p.dim() == 1 && q.dim() == 1 => {
            kantorovich_1d(p, q)
        }
        (Law::Discrete(p), Law::Discrete(q)) => ot_distance(p, q, GroundCost::InfNorm),
        _ => {
            let p = a.discretize(atoms_per_dim, QuadratureRule::Midpoint)?;
            let q = b.discretize(atoms_per_dim, QuadratureRule::Midpoint)?;
            ot_distance(&p, &q, GroundCost::InfNorm)
        }
    }
}

/// Nested distance of two exogenous trees with infinity-norm stage costs.
pub fn nested_distance(tp: &ScenarioTree, tq: &ScenarioTree) -> Result<f64> {
    if tp.horizon != tq.horizon {
        return Err(Error::InvalidTrees(format!(
            "horizons differ ({} vs {})",
            tp.horizon, tq.horizon
        )));
    }
    if !tp.is_exogenous_only() || !tq.is_exogenous_only() {
        return Err(Error::InvalidTrees(
            "nested distance needs exogenous-only trees".into(),
        ));
    }
    fn go(tp: &ScenarioTree, tq: &ScenarioTree, i: usize, j: usize) -> Result<f64> {
        let (ci, cj) = (&tp.nodes[i].children, &tq.nodes[j].children);
        match (ci.is_empty(), cj.is_empty()) {
            (true, true) => return Ok(0.0),
            (false, false) => {}
            _ => return Err(Error::InvalidTrees("leaves at different depths".into())),
        }
        let mut cost = vec![vec![0.0; cj.len()]; ci.len()];
        for (a, &x) in ci.iter().enumerate() {
            for (b, &y) in cj.iter().enumerate() {
                cost[a][b] = inf_dist(&tp.nodes[x].value, &tq.nodes[y].value) + go(tp, tq, x, y)?;
            }
        }
        let pa: Vec<f64> = ci.iter().map(|&x| tp.nodes[x].prob).collect();
        let pb: Vec<f64> = cj.iter().map(|&y| tq.nodes[y].prob).collect();
        Ok(solve_transport(&pa, &pb, &cost)?.cost)
    }
    go(tp, tq, 0, 0)
}

/// Stage terms of the filtration-distance estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiltrationEstimate {
    /// `sum_t` of the stage terms (per-coordinate absolute deviations).
    pub total: f64,
    /// Stage terms `t = 1..=T`.
    pub stages: Vec<f64>,
    /// Same estimate with the infinity norm inside the expectation.
    pub inf_norm_total: f64,
}

/// `sum_t max{E|x_t - E x~_t|, E|x~_t - E x_t|}` with decisions read from
/// the policies at the decision nodes of the two joint trees.
pub fn filtration_estimate(
    policy_p: &Policy,
    policy_q: &Policy,
    tree_p: &ScenarioTree,
    tree_q: &ScenarioTree,
) -> Result<FiltrationEstimate> {
    if tree_p.horizon != tree_q.horizon {
        return Err(Error::InvalidInput("trees have different horizons".into()));
    }
    let stage_nodes =
        |tree: &ScenarioTree, policy: &Policy, t: usize| -> Result<Vec<(f64, Vec<f64>)>> {
            tree.nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.kind == NodeKind::Exogenous && n.stage == t)
                .map(|(id, _)| {
                    let x = policy.get(id).ok_or_else(|| {
                        Error::InvalidInput(format!("policy has no decision at node {id}"))
                    })?;
                    Ok((tree.path_prob(id), x.to_vec()))
                })
                .collect()
        };
    let mean = |nodes: &[(f64, Vec<f64>)]| -> Vec<f64> {
        let mut m = vec![0.0; nodes[0].1.len()];
        for (p, x) in nodes {
            for (mi, xi) in m.iter_mut().zip(x) {
                *mi += p * xi;
            }
        }
        m
    };
    let dev = |nodes: &[(f64, Vec<f64>)], m: &[f64]| -> (f64, f64) {
        let mut per = vec![0.0; m.len()];
        let mut inf = 0.0;
        for (p, x) in nodes {
            for (k, (xi, mi)) in x.iter().zip(m).enumerate() {
                per[k] += p * (xi - mi).abs();
            }
            inf += p * inf_dist(x, m);
        }
        (per.into_iter().fold(0.0, f64::max), inf)
    };
    let mut stages = Vec::new();
    let mut inf_total = 0.0;
    for t in 1..=tree_p.horizon {
        let np = stage_nodes(tree_p, policy_p, t)?;
        let nq = stage_nodes(tree_q, policy_q, t)?;
        if np.is_empty() || nq.is_empty() || np[0].1.len() != nq[0].1.len() {
            return Err(Error::InvalidInput(format!(
                "policies do not match at stage {t}"
            )));
        }
        let (mp, mq) = (mean(&np), mean(&nq));
        let (a, ai) = dev(&np, &mq);
        let (b, bi) = dev(&nq, &mp);
        stages.push(a.max(b));
        inf_total += ai.max(bi);
    }
    Ok(FiltrationEstimate {
        total: stages.iter().sum(),
        stages,
        inf_norm_total: inf_total,
    })
}

const JOINT: usize = usize::MAX;

fn cumulative(w: &[f64]) -> Vec<f64> {
    w.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Atom whose cumulative-weight cell contains `u`.
fn atom_at(law: &crate::stochastic::Law, u: f64) -> Result<Vec<f64>> {
    match law {
        crate::stochastic::Law::Discrete(d) => {
            let mut acc = 0.0;
            for (x, w) in d.iter() {
                acc += w;
                if u < acc {
                    return Ok(x.to_vec());
                }
            }
            Ok(d.atoms().last().expect("nonempty law").clone())
        }
        crate::stochastic::Law::Uniform(_) => Err(Error::NotApplicable(
            "joint quantile of a continuous law".into(),
        )),
    }
}

/// `E f(xi, xi~)` under the stagewise quantile coupling: both processes are
/// driven by the same uniforms, one per stage and coordinate. Each uniform
/// is integrated by Gauss-Legendre on the cells between quantile jumps.
/// A stage whose law is discrete in several dimensions uses one uniform
/// that selects whole atoms.
pub fn coupled_path_expectation<F>(
    p: &ExogenousProcess,
    q: &ExogenousProcess,
    nodes_per_cell: usize,
    f: F,
) -> Result<f64>
where
    F: Fn(&[Vec<f64>], &[Vec<f64>]) -> f64,
{
    if p.horizon() != q.horizon() {
        return Err(Error::InvalidInput(
            "processes have different horizons".into(),
        ));
    }
    let unit = crate::stochastic::QuadratureRule::GaussLegendre.unit_nodes(nodes_per_cell)?;
    // per (stage, coordinate): list of (u, weight)
    let mut axes: Vec<(usize, usize, Vec<(f64, f64)>)> = Vec::new();
    for t in 1..=p.horizon() {
        let (sp, sq) = (&p.stages[t - 1], &q.stages[t - 1]);
        if sp.dim() != sq.dim() {
            return Err(Error::InvalidInput(format!("xi_{t} dimensions differ")));
        }
        let law_of = |s: &crate::stochastic::ExogenousStage| -> Result<crate::stochastic::Law> {
            match s {
                crate::stochastic::ExogenousStage::Marginal { law } => Ok(law.clone()),
                crate::stochastic::ExogenousStage::AffineShift { innovation, .. } => {
                    Ok(innovation.clone())
                }
                crate::stochastic::ExogenousStage::Explicit(_) => Err(Error::NotApplicable(
                    "quantile coupling of an explicit kernel".into(),
                )),
            }
        };
        let (lp, lq) = (law_of(sp)?, law_of(sq)?);
        let joint = |l: &crate::stochastic::Law| {
            matches!(l, crate::stochastic::Law::Discrete(d) if d.dim() > 1)
        };
        if joint(&lp) || joint(&lq) {
            // one uniform picks an atom of each law by cumulative weight
            let (dp, dq) = match (&lp, &lq) {
                (crate::stochastic::Law::Discrete(a), crate::stochastic::Law::Discrete(b)) => (a, b),
                _ => {
                    return Err(Error::NotApplicable(
                        "quantile coupling of a joint discrete law with a continuous one".into(),
                    ))
                }
            };
            let mut cuts = vec![0.0, 1.0];
            cuts.extend(cumulative(dp.weights()));
            cuts.extend(cumulative(dq.weights()));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            let mut pts = Vec::new();
            for w in cuts.windows(2) {
                for &(u, wt) in &unit {
                    pts.push((w[0] + u * (w[1] - w[0]), wt * (w[1] - w[0])));
                }
            }
            axes.push((t, JOINT, pts));
            continue;
        }
        for i in 0..sp.dim() {
            let mut cuts = vec![0.0, 1.0];
            cuts.extend(lp.quantile_breaks(i));
            cuts.extend(lq.quantile_breaks(i));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            let mut pts = Vec::new();
            for w in cuts.windows(2) {
                for &(u, wt) in &unit {
                    pts.push((w[0] + u * (w[1] - w[0]), wt * (w[1] - w[0])));
                }
            }
            axes.push((t, i, pts));
        }
    }
    let total_pts: usize = axes.iter().map(|a| a.2.len()).product();
    if total_pts > 50_000_000 {
        return Err(Error::BudgetExceeded {
            needed: total_pts,
            budget: 50_000_000,
        });
    }
    let mut idx = vec![0usize; axes.len()];
    let mut sum = 0.0;
    let mut path_p: Vec<Vec<f64>> = Vec::new();
    let mut path_q: Vec<Vec<f64>> = Vec::new();
    for _ in 0..total_pts {
        let mut w = 1.0;
        path_p.clear();
        path_q.clear();
        let mut k = 0;
        for t in 1..=p.horizon() {
            let hp: Vec<&[f64]> = path_p.iter().map(Vec::as_slice).collect();
            let hq: Vec<&[f64]> = path_q.iter().map(Vec::as_slice).collect();
            let cp = p.conditional(t, &hp)?;
            let cq = q.conditional(t, &hq)?;
            if axes[k].1 == JOINT {
                let (u, wt) = axes[k].2[idx[k]];
                w *= wt;
                path_p.push(atom_at(&cp, u)?);
                path_q.push(atom_at(&cq, u)?);
                k += 1;
                continue;
            }
            let d = cp.dim();
            let mut xp = Vec::with_capacity(d);
            let mut xq = Vec::with_capacity(d);
            for i in 0..d {
                let (u, wt) = axes[k].2[idx[k]];
                debug_assert_eq!((axes[k].0, axes[k].1), (t, i));
                w *= wt;
                xp.push(cp.quantile(i, u)?);
                xq.push(cq.quantile(i, u)?);
                k += 1;
            }
            path_p.push(xp);
            path_q.push(xq);
        }
        sum += w * f(&path_p, &path_q);
        for a in (0..axes.len()).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].2.len() {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(sum)
}

/// `E max_t |xi_t - xi~_t|_inf` under the quantile coupling.
pub fn coupled_path_distance(
    p: &ExogenousProcess,
    q: &ExogenousProcess,
    nodes_per_cell: usize,
) -> Result<f64> {
    coupled_path_expectation(p, q, nodes_per_cell, |a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| inf_dist(x, y))
            .fold(0.0, f64::max)
    })
}

/// `(E sum_{t,i} |xi_{t,i} - xi~_{t,i}|^r)^(1/r)` under the quantile
/// coupling: an upper bound on `W_r` for the l_r path norm.
pub fn coupled_wasserstein(
    p: &ExogenousProcess,
    q: &ExogenousProcess,
    r: f64,
    nodes_per_cell: usize,
) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::InvalidExponent(r));
    }
    let e = coupled_path_expectation(p, q, nodes_per_cell, |a, b| {
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs().powf(r)))
            .sum()
    })?;
    Ok(e.powf(1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(atoms: &[f64], w: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(atoms.iter().map(|a| vec![*a]).collect(), w.to_vec()).unwrap()
    }

    #[test]
    fn half_mass_moves_by_one() {
        let p = d1(&[0.0, 1.0], &[0.5, 0.5]);
        let q = d1(&[0.0, 2.0], &[0.5, 0.5]);
        assert!((ot_distance(&p, &q, GroundCost::InfNorm).unwrap() - 0.5).abs() < 1e-12);
        assert!((kantorovich_1d(&p, &q).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn diracs() {
        let p = d1(&[0.0], &[1.0]);
        let q = d1(&[3.0], &[1.0]);
        assert_eq!(kantorovich_1d(&p, &q).unwrap(), 3.0);
        assert_eq!(ot_distance(&p, &q, GroundCost::Power(2.0)).unwrap(), 3.0);
    }

    #[test]
    fn uniform_affine_fixtures() {
        let a = UniformBox::cube(-2.0, 0.0, 2).unwrap();
        let b = UniformBox::cube(-1.98, 0.0, 2).unwrap();
        assert!((kantorovich_uniform_affine(&a, &b).unwrap() - 1.0 / 75.0).abs() < 1e-15);
        let c = UniformBox::cube(-1.0, 1.0, 2).unwrap();
        let d = UniformBox::cube(-0.99, 0.99, 2).unwrap();
        assert!((kantorovich_uniform_affine(&c, &d).unwrap() - 1.0 / 150.0).abs() < 1e-15);
        let e = UniformBox::cube(-0.98, 1.0, 2).unwrap();
        assert!((kantorovich_uniform_affine(&c, &e).unwrap() - 1.0 / 75.0).abs() < 1e-15);
        assert_eq!(kantorovich_uniform_affine(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn fortet_mourier_weights_large_atoms() {
        let p = d1(&[2.0], &[1.0]);
        let q = d1(&[3.0], &[1.0]);
        let v = ot_distance(&p, &q, GroundCost::FortetMourier(2.0)).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }
}
