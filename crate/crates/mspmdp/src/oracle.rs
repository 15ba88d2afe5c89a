//! Independent brute-force validators for the solver and the transport
//! computations. Both are slow by design and share no code with the
//! routines they check beyond instance evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::GroundCost;
use crate::model::{ProblemInstance, FEAS_TOL};
use crate::solver::{NodeRecord, Policy, SolveReport, SolveStats};
use crate::stochastic::{DiscreteDistribution, ScenarioTree};

/// Grid enumeration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceConfig {
    pub grid_points_per_dim: usize,
    /// Extra rounds that re-grid the two cells around the incumbent.
    pub zoom_rounds: usize,
    /// Cap on the predicted number of stage-cost evaluations.
    pub budget: u64,
}

impl BruteForceConfig {
    pub fn new(grid_points_per_dim: usize) -> Self {
        BruteForceConfig {
            grid_points_per_dim,
            zoom_rounds: 0,
            budget: 1_000_000_000,
        }
    }

    pub fn with_zoom(mut self, rounds: usize) -> Self {
        self.zoom_rounds = rounds;
        self
    }
}

struct Grid<'a> {
    inst: &'a ProblemInstance,
    tree: &'a ScenarioTree,
    cfg: BruteForceConfig,
    evaluations: std::cell::Cell<u64>,
}

fn grid_axis(lo: f64, hi: f64, g: usize) -> Vec<f64> {
    if g <= 1 || hi <= lo {
        return vec![0.5 * (lo + hi)];
    }
    (0..g)
        .map(|k| {
            if k == g - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (g - 1) as f64
            }
        })
        .collect()
}

impl<'a> Grid<'a> {
    fn objective(
        &self,
        t: usize,
        node: usize,
        s: &[f64],
        x: &[f64],
        hist: &mut Vec<&'a [f64]>,
    ) -> Result<f64> {
        let st = &self.inst.stages[t];
        let xi_t = hist.last().copied();
        let mut total = 0.0;
        let mut next = Vec::new();
        for &c in &self.tree.nodes[node].children {
            let zn = &self.tree.nodes[c];
            self.evaluations.set(self.evaluations.get() + 1);
            let mut v = st.cost.eval(t, s, x, hist, &zn.value)?;
            if t < self.inst.horizon {
                st.transition.as_ref().expect("validated").eval(
                    t,
                    s,
                    x,
                    if t == 0 { None } else { xi_t },
                    &zn.value,
                    &mut next,
                )?;
                let state = next.clone();
                for &g in &zn.children {
                    hist.push(&self.tree.nodes[g].value);
                    let r = self.value(t + 1, g, &state, x, hist);
                    hist.pop();
                    v += self.tree.nodes[g].prob * r?.0;
                }
            }
            total += zn.prob * v;
        }
        Ok(total)
    }

    fn value(
        &self,
        t: usize,
        node: usize,
        s: &[f64],
        x_prev: &[f64],
        hist: &mut Vec<&'a [f64]>,
    ) -> Result<(f64, Vec<f64>)> {
        let st = &self.inst.stages[t];
        let (mut lo, mut hi) = st.decision_box().expect("validated");
        let (blo, bhi) = (lo.clone(), hi.clone());
        let n = lo.len();
        let g = self.cfg.grid_points_per_dim.max(1);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..=self.cfg.zoom_rounds {
            let axes: Vec<Vec<f64>> = (0..n).map(|i| grid_axis(lo[i], hi[i], g)).collect();
            let mut idx = vec![0usize; n];
            let mut x = vec![0.0; n];
            loop {
                for i in 0..n {
                    x[i] = axes[i][idx[i]];
                }
                let frozen: Vec<&[f64]> = hist.clone();
                if st.max_residual(t, s, &x, x_prev, &frozen)? <= FEAS_TOL {
                    let v = self.objective(t, node, s, &x, hist)?;
                    let improves = match &best {
                        None => true,
                        Some((b, bx)) => v < *b - 1e-12 || ((v - b).abs() <= 1e-12 && x < *bx),
                    };
                    if improves {
                        best = Some((v, x.clone()));
                    }
                }
                let mut k = n;
                while k > 0 {
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < axes[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX || n == 0 {
                    break;
                }
            }
            let Some((_, bx)) = &best else {
                return Err(Error::Infeasible { stage: t });
            };
            for i in 0..n {
                let h = if g > 1 {
                    (hi[i] - lo[i]) / (g - 1) as f64
                } else {
                    0.0
                };
                lo[i] = (bx[i] - h).max(blo[i]);
                hi[i] = (bx[i] + h).min(bhi[i]);
            }
        }
        best.ok_or(Error::Infeasible { stage: t })
    }

    #[allow(clippy::too_many_arguments)]
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
            for &gch in &zn.children {
                hist.push(&self.tree.nodes[gch].value);
                let r = self.forward(t + 1, gch, &state, &x, hist, policy, records);
                hist.pop();
                r?;
            }
        }
        Ok(())
    }
}

/// Predicted stage-cost evaluations of the value recursion at the root.
fn predicted_work(inst: &ProblemInstance, tree: &ScenarioTree, cfg: &BruteForceConfig) -> u64 {
    let sizes = tree.layer_sizes();
    let mut work: f64 = 0.0;
    for t in (0..=inst.horizon).rev() {
        let n = inst.stages[t].dims.decision as i32;
        let cands = (cfg.grid_points_per_dim.max(1) as f64).powi(n) * (cfg.zoom_rounds + 1) as f64;
        // branching of the zeta layer and of the following xi layer
        let zl = 2 * t;
        let bz = sizes.get(zl + 1).copied().unwrap_or(1) as f64
            / sizes.get(zl).copied().unwrap_or(1).max(1) as f64;
        let bx = if t < inst.horizon {
            sizes.get(zl + 2).copied().unwrap_or(1) as f64
                / sizes.get(zl + 1).copied().unwrap_or(1).max(1) as f64
        } else {
            0.0
        };
        work = cands * bz * (1.0 + bx * work);
    }
    work.min(u64::MAX as f64) as u64
}

/// Exact backward enumeration over uniform decision grids.
pub fn brute_force_solve(
    inst: &ProblemInstance,
    tree: &ScenarioTree,
    cfg: &BruteForceConfig,
) -> Result<SolveReport> {
    inst.validate()?;
    if tree.horizon != inst.horizon || (inst.horizon > 0 && tree.is_exogenous_only()) {
        return Err(Error::InvalidTrees(
            "brute force needs a joint tree of the instance horizon".into(),
        ));
    }
    let needed = predicted_work(inst, tree, cfg);
    if needed > cfg.budget {
        return Err(Error::BudgetExceeded {
            needed: needed.min(usize::MAX as u64) as usize,
            budget: cfg.budget.min(usize::MAX as u64) as usize,
        });
    }
    let grid = Grid {
        inst,
        tree,
        cfg: *cfg,
        evaluations: std::cell::Cell::new(0),
    };
    let mut policy = Policy::default();
    let mut records = Vec::new();
    grid.forward(
        0,
        0,
        &inst.initial_state,
        &[],
        &mut Vec::new(),
        &mut policy,
        &mut records,
    )?;
    Ok(SolveReport {
        value: records[0].value,
        policy,
        node_values: records,
        stats: SolveStats {
            stage_minimizations: 0,
            objective_evaluations: grid.evaluations.get(),
            tree_nodes: tree.len(),
        },
        coordinates: Vec::new(),
    })
}

/// Largest marginal size [`ot_brute_force`] accepts.
pub const OT_BRUTE_MAX: usize = 4;

/// Exact transport optimum by enumerating every spanning tree of the
/// bipartite supply-demand graph and keeping the feasible ones.
pub fn ot_brute_force_matrix(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let (m, n) = (supply.len(), demand.len());
    if m > OT_BRUTE_MAX || n > OT_BRUTE_MAX {
        return Err(Error::BudgetExceeded {
            needed: m.max(n),
            budget: OT_BRUTE_MAX,
        });
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidDistribution("empty marginal".into()));
    }
    if cost.len() != m || cost.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidDimension {
            what: "cost matrix".into(),
            expected: m * n,
            got: cost.iter().map(Vec::len).sum(),
        });
    }
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut choose = (0..k).collect::<Vec<usize>>();
    loop {
        let edges: Vec<(usize, usize)> = choose.iter().map(|&c| cells[c]).collect();
        if let Some(flows) = tree_flows(&edges, supply, demand) {
            if flows.iter().all(|&f| f >= -1e-12) {
                let c: f64 = edges
                    .iter()
                    .zip(&flows)
                    .map(|(&(i, j), f)| f * cost[i][j])
                    .sum();
                best = best.min(c);
            }
        }
        // next k-combination of the cells
        let mut i = k;
        while i > 0 && choose[i - 1] == cells.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        choose[i - 1] += 1;
        for j in i..k {
            choose[j] = choose[j - 1] + 1;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InvalidDistribution(
            "marginals have different mass".into(),
        ))
    }
}

/// Flows on a spanning tree (rows `0..m`, columns `m..m+n`), or `None` if
/// the edges contain a cycle.
fn tree_flows(edges: &[(usize, usize)], supply: &[f64], demand: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = (supply.len(), demand.len());
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a == b {
            return None;
        }
        parent[a] = b;
    }
    let mut rest: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut degree = vec![0usize; m + n];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut flow = vec![f64::NAN; edges.len()];
    let mut done = vec![false; edges.len()];
    for _ in 0..edges.len() {
        let (e, leaf) = edges
            .iter()
            .enumerate()
            .filter(|(e, _)| !done[*e])
            .find_map(|(e, &(i, j))| {
                if degree[i] == 1 {
                    Some((e, i))
                } else if degree[m + j] == 1 {
                    Some((e, m + j))
                } else {
                    None
                }
            })?;
        let (i, j) = edges[e];
        let other = if leaf == i { m + j } else { i };
        let f = rest[leaf];
        flow[e] = f;
        rest[leaf] = 0.0;
        rest[other] -= f;
        degree[i] -= 1;
        degree[m + j] -= 1;
        done[e] = true;
    }
    Some(flow)
}

/// [`ot_brute_force_matrix`] for two discrete laws and a ground cost.
pub fn ot_brute_force(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    cost: GroundCost,
) -> Result<f64> {
    cost.validate()?;
    let c: Vec<Vec<f64>> = p
        .atoms()
        .iter()
        .map(|x| q.atoms().iter().map(|y| cost.cost(x, y)).collect())
        .collect();
    let v = ot_brute_force_matrix(p.weights(), q.weights(), &c)?;
    Ok(match cost {
        GroundCost::Power(r) => v.max(0.0).powf(1.0 / r),
        _ => v.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(atoms: &[f64], w: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(atoms.iter().map(|a| vec![*a]).collect(), w.to_vec()).unwrap()
    }

    #[test]
    fn half_mass_moves() {
        let p = d1(&[0.0, 1.0], &[0.5, 0.5]);
        let q = d1(&[0.0, 2.0], &[0.5, 0.5]);
        assert!((ot_brute_force(&p, &q, GroundCost::InfNorm).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(ot_brute_force(&p, &p, GroundCost::InfNorm).unwrap(), 0.0);
    }

    #[test]
    fn single_coupling() {
        let p = DiscreteDistribution::dirac(vec![1.0, -2.0]).unwrap();
        let q = DiscreteDistribution::dirac(vec![0.5, 1.0]).unwrap();
        assert_eq!(ot_brute_force(&p, &q, GroundCost::InfNorm).unwrap(), 3.0);
    }

    #[test]
    fn size_is_capped() {
        let p = d1(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.2; 5]);
        assert!(matches!(
            ot_brute_force(&p, &p, GroundCost::InfNorm),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
