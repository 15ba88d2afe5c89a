//! Recompute every reference value of a built-in example and compare.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds::{comparison_bounds, exo_stagewise_bounds, stagewise_conditional_metric, BoundMode, Comparison};
use crate::error::{Error, Result};
use crate::examples::{analytic_policy, build_example, ExampleFixture, ExampleId};
use crate::io::{fmt4, to_json_pretty};
use crate::lipschitz::ConstantTable;
use crate::metrics::{coupled_wasserstein, filtration_estimate, nested_distance};
use crate::model::{derive_regularity, ProblemInstance};
use crate::solver::{analytic_solve, solve, tabulate_policy, SolverConfig};
use crate::stochastic::{build_exogenous_tree, build_joint_tree, QuadratureRule, TreeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Shown for comparison only.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub tolerance: f64,
    pub computed: f64,
    pub source: String,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub id: ExampleId,
    pub checks: Vec<Check>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Computed value of a check; panics when absent.
    pub fn computed(&self, name: &str) -> f64 {
        match self.check(name) {
            Some(c) => c.computed,
            None => panic!("no check named `{name}` for {}", self.id),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_pretty(self)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("## example {}\n\n| value | expected | computed | tolerance | source | status |\n|---|---|---|---|---|---|\n", self.id);
        for c in &self.checks {
            let st = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Info => "info",
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                c.name,
                fmt4(c.expected),
                fmt4(c.computed),
                fmt4(c.tolerance),
                c.source,
                st
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("example,name,expected,computed,tolerance,source,status\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:?}",
                self.id,
                c.name,
                crate::io::round_sig(c.expected),
                crate::io::round_sig(c.computed),
                c.tolerance,
                c.source,
                c.status
            );
        }
        s
    }
}

/// Discretization settings of [`reproduce`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub solver: SolverConfig,
    /// Midpoint atoms per dimension of the nested-distance trees.
    pub nested_atoms: usize,
    /// Midpoint atoms per layer of the 1-D trees the closed-form policy is
    /// tabulated on for the filtration estimate.
    pub filtration_atoms: usize,
    /// Gauss nodes per quantile cell in coupled path expectations.
    pub coupling_nodes: usize,
    pub hist_samples: usize,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            solver: SolverConfig {
                tree: TreeSpec::new(3, QuadratureRule::Midpoint),
                ..SolverConfig::default()
            },
            nested_atoms: 6,
            filtration_atoms: 10,
            coupling_nodes: 8,
            hist_samples: 4,
        }
    }
}

/// Stage terms of the filtration estimate for the closed-form policies,
/// maximized over coordinates.
pub fn analytic_filtration(
    id: &ExampleId,
    base: &ProblemInstance,
    pert: &ProblemInstance,
    atoms: usize,
) -> Result<Vec<f64>> {
    let spec = TreeSpec::new(atoms, QuadratureRule::Midpoint);
    let n = base.stages[0].dims.decision;
    let mut stages = vec![0.0f64; base.horizon];
    for i in 0..n {
        let (a, b) = (base.coordinate(i)?, pert.coordinate(i)?);
        let ta = build_joint_tree(&a.exogenous, &a.endogenous, &spec)?;
        let tb = build_joint_tree(&b.exogenous, &b.endogenous, &spec)?;
        let pa = tabulate_policy(&a, &ta, |p| analytic_policy(id, p))?;
        let pb = tabulate_policy(&b, &tb, |p| analytic_policy(id, p))?;
        let f = filtration_estimate(&pa, &pb, &ta, &tb)?;
        for (s, v) in stages.iter_mut().zip(&f.stages) {
            *s = s.max(*v);
        }
    }
    Ok(stages)
}

struct Ctx<'a> {
    fixture: &'a ExampleFixture,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, name: &str, computed: f64) {
        if let Some(f) = self.fixture.get(name) {
            let info = name.ends_with("_reported") && !name.starts_with("stagewise_bound")
                || name.ends_with("_lipschitz");
            let ok = (computed - f.value).abs() <= f.tolerance + 1e-12 * f.value.abs();
            self.checks.push(Check {
                name: name.to_string(),
                expected: f.value,
                tolerance: f.tolerance,
                computed,
                source: f.source.clone(),
                status: if info {
                    CheckStatus::Info
                } else if ok {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
            });
        }
    }

    fn has(&self, name: &str) -> bool {
        self.fixture.get(name).is_some()
    }
}

/// Recompute every fixture value of `id`.
pub fn reproduce(id: &ExampleId, cfg: &ReproduceConfig) -> Result<Reproduction> {
    let (base, fixture) = build_example(id, false)?;
    let (pert, _) = build_example(id, true)?;
    if fixture.values.is_empty() {
        return Err(Error::NotApplicable(format!("example {id} has no reference values")));
    }
    let mut cx = Ctx {
        fixture: &fixture,
        checks: Vec::new(),
    };
    let va = solve(&base, &cfg.solver)?.value;
    let vb = solve(&pert, &cfg.solver)?.value;
    cx.push("value_base", va);
    cx.push("value_perturbed", vb);
    cx.push("gap", (va - vb).abs());
    if cx.has("value_base_closed_form") {
        cx.push("value_base_closed_form", analytic_solve(id, false)?);
    }

    let reg = derive_regularity(&base)?;
    cx.push("rho", reg.rho.unwrap_or(f64::NAN));
    let table = ConstantTable::compute(&reg)?;
    let sw = table
        .stagewise
        .as_ref()
        .ok_or_else(|| Error::NotApplicable("kernel moduli unknown".into()))?;
    let cond = stagewise_conditional_metric(&base.exogenous, &pert.exogenous, cfg.hist_samples)?;
    for t in 1..=base.horizon {
        cx.push(&format!("dk_stage_{t}"), cond[t - 1]);
        cx.push(&format!("l_x_{t}"), sw.l_x[t]);
        cx.push(&format!("l_v_{t}"), sw.l_v[t]);
        cx.push(&format!("l_xi_{t}"), sw.l_xi[t]);
        cx.push(&format!("l_v_{t}_reported"), sw.l_v[t]);
        cx.push(&format!("l_xi_{t}_reported"), sw.l_xi[t]);
    }
    cx.push(
        "stagewise_bound",
        exo_stagewise_bounds(sw, &table.exogenous_global, &cond, BoundMode::Value, None)?,
    );
    if cx.has("stagewise_bound_reported") {
        let v: f64 = (1..=base.horizon)
            .map(|t| fixture.value(&format!("l_xi_{t}_reported")) * cond[t - 1])
            .sum();
        cx.push("stagewise_bound_reported", v);
    }

    if cx.has("nested_distance") {
        let spec = TreeSpec::new(cfg.nested_atoms, QuadratureRule::Midpoint);
        let d = nested_distance(
            &build_exogenous_tree(&base.exogenous, &spec)?,
            &build_exogenous_tree(&pert.exogenous, &spec)?,
        )?;
        cx.push("nested_distance", d);
        let l = fixture.value("nested_lipschitz");
        cx.push("nested_lipschitz", l);
        // evaluated at the reference distance, as in the comparison table
        cx.push(
            "nested_bound",
            comparison_bounds(&Comparison::Nested {
                lipschitz: l,
                exponent: 1.0,
                distance: fixture.value("nested_distance"),
            })?,
        );
    }

    if cx.has("hrs_bound") {
        let w3 = coupled_wasserstein(&base.exogenous, &pert.exogenous, 3.0, cfg.coupling_nodes)?;
        let stages = analytic_filtration(id, &base, &pert, cfg.filtration_atoms)?;
        let filt: f64 = stages.iter().sum();
        cx.push("filtration_stage_1", stages[0]);
        cx.push("filtration", filt);
        cx.push("w3", w3);
        let l = fixture.value("hrs_lipschitz");
        cx.push("hrs_lipschitz", l);
        cx.push(
            "hrs_bound",
            comparison_bounds(&Comparison::Filtration {
                lipschitz: l,
                wasserstein: w3,
                filtration: filt,
            })?,
        );
    }
    let checks = cx.checks;
    Ok(Reproduction { id: *id, checks })
}

/// One line of the bound comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub example: String,
    pub gap: f64,
    pub stagewise: f64,
    pub nested: Option<f64>,
    pub filtration: Option<f64>,
    pub verdict: String,
}

/// Our stagewise bound against the comparison bounds, per example.
pub fn compare_rows(reps: &[Reproduction]) -> Vec<CompareRow> {
    reps.iter()
        .map(|r| {
            let get = |n: &str| r.check(n).map(|c| c.computed);
            let stagewise = get("stagewise_bound_reported").or(get("stagewise_bound")).unwrap_or(f64::NAN);
            let nested = get("nested_bound");
            let filtration = get("hrs_bound");
            let best = nested.into_iter().chain(filtration).fold(f64::INFINITY, f64::min);
            let verdict = if best.is_infinite() {
                "no comparison".to_string()
            } else if stagewise <= best {
                "stagewise tighter".to_string()
            } else {
                "comparison tighter".to_string()
            };
            CompareRow {
                example: r.id.to_string(),
                gap: get("gap").unwrap_or(f64::NAN),
                stagewise,
                nested,
                filtration,
                verdict,
            }
        })
        .collect()
}

pub fn compare_markdown(rows: &[CompareRow]) -> String {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), fmt4);
    let mut s = String::from("| example | true gap | stagewise bound | nested bound | filtration bound | verdict |\n|---|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            r.example,
            fmt4(r.gap),
            fmt4(r.stagewise),
            opt(r.nested),
            opt(r.filtration),
            r.verdict
        );
    }
    s
}
