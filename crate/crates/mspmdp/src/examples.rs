//! Builders for the worked instances and their perturbations, with the
//! reference values each one is checked against.
//!
//! The linear and nonlinear instances share one skeleton: `T = 2`, two
//! coordinates, decisions in `[-5, 5]^2`, identity dynamics
//! `s_{t+1} = s_t + x_t + xi_t + zeta_t` and cost `e.(s_t + x_t + xi_t + zeta_t)`,
//! with `zeta_t ~ U(-2,0)^2`, `xi_1 ~ U(-2,0)^2` and `xi_2 = xi_1 + nu`,
//! `nu ~ U(-1,1)^2`. They differ in the extra stage constraint.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{
    AffineCost, AffineInequality, AffineTransition, BoxConstraint, Constraint, Cost, InventoryCost,
    InventoryTransition, ProblemInstance, PurchaseBudget, QuadraticInequality, RegularityData,
    StageDims, StageSpec, Transition,
};
use crate::solver::PolicyInput;
use crate::stochastic::{
    DiscreteDistribution, EndogenousProcess, ExogenousProcess, ExogenousStage, Law,
};

/// Built-in instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ExampleId {
    /// Scalar inventory control with random prices, demand and delivery
    /// rates. No reference values exist; checks are property based.
    Inventory { horizon: usize },
    /// Box-constrained linear problem; the box is written as
    /// `|x - c|^alpha <= 5^alpha`.
    Linear41 { alpha: u32 },
    /// Linear problem with `-10 x_t + x_{t-1} + s_t + xi_t <= kappa`.
    Linear42a { kappa: f64 },
    /// Linear problem with `x_t - x_{t-1} + s_t + xi_t <= 11`.
    Linear42b,
    /// Nonlinear problem with `x_t^2 - x_{t-1} + s_t + xi_t <= 11`.
    Nonlinear43,
}

pub const DEFAULT_ALPHA: u32 = 10;
pub const DEFAULT_KAPPA: f64 = 11.0;
pub const DEFAULT_INVENTORY_HORIZON: usize = 3;

impl ExampleId {
    pub fn all() -> Vec<ExampleId> {
        vec![
            ExampleId::Linear41 {
                alpha: DEFAULT_ALPHA,
            },
            ExampleId::Linear42a {
                kappa: DEFAULT_KAPPA,
            },
            ExampleId::Linear42b,
            ExampleId::Nonlinear43,
            ExampleId::Inventory {
                horizon: DEFAULT_INVENTORY_HORIZON,
            },
        ]
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleId::Inventory { horizon } if *horizon == DEFAULT_INVENTORY_HORIZON => {
                write!(f, "inventory")
            }
            ExampleId::Inventory { horizon } => write!(f, "inventory:T={horizon}"),
            ExampleId::Linear41 { alpha } if *alpha == DEFAULT_ALPHA => write!(f, "4.1"),
            ExampleId::Linear41 { alpha } => write!(f, "4.1:alpha={alpha}"),
            ExampleId::Linear42a { kappa } if *kappa == DEFAULT_KAPPA => write!(f, "4.2a"),
            ExampleId::Linear42a { kappa } => write!(f, "4.2a:kappa={kappa}"),
            ExampleId::Linear42b => write!(f, "4.2b"),
            ExampleId::Nonlinear43 => write!(f, "4.3"),
        }
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    /// Accepts `4.1`, `4.1:alpha=2`, `4.2a`, `4.2a:kappa=15`, `4.2b`, `4.3`,
    /// `inventory` and `inventory:T=2`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownExample(s.to_string());
        let (base, param) = match s.split_once(':') {
            Some((b, p)) => (b.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let value = |key: &str| -> Result<Option<&str>> {
            match param {
                None => Ok(None),
                Some(p) => match p.split_once('=') {
                    Some((k, v)) if k.trim().eq_ignore_ascii_case(key) => Ok(Some(v.trim())),
                    _ => Err(unknown()),
                },
            }
        };
        match base.to_ascii_lowercase().as_str() {
            "4.1" => {
                let alpha = match value("alpha")? {
                    Some(v) => v.parse().map_err(|_| unknown())?,
                    None => DEFAULT_ALPHA,
                };
                if alpha == 0 || (alpha != 1 && alpha % 2 != 0) {
                    return Err(Error::InvalidExponent(alpha as f64));
                }
                Ok(ExampleId::Linear41 { alpha })
            }
            "4.2a" => {
                let kappa = match value("kappa")? {
                    Some(v) => v.parse().map_err(|_| unknown())?,
                    None => DEFAULT_KAPPA,
                };
                Ok(ExampleId::Linear42a { kappa })
            }
            "4.2b" if param.is_none() => Ok(ExampleId::Linear42b),
            "4.3" if param.is_none() => Ok(ExampleId::Nonlinear43),
            "inventory" => {
                let horizon = match value("t")? {
                    Some(v) => v.parse().map_err(|_| unknown())?,
                    None => DEFAULT_INVENTORY_HORIZON,
                };
                if horizon == 0 {
                    return Err(unknown());
                }
                Ok(ExampleId::Inventory { horizon })
            }
            _ => Err(unknown()),
        }
    }
}

/// One reference value with the tolerance it is checked at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureValue {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// Where the number comes from: a reported figure, a closed form, or a
    /// value derived in this crate.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleFixture {
    pub id: ExampleId,
    pub perturbed: bool,
    pub values: Vec<FixtureValue>,
}

impl ExampleFixture {
    pub fn get(&self, name: &str) -> Option<&FixtureValue> {
        self.values.iter().find(|v| v.name == name)
    }

    /// Value of a named fixture; panics on unknown names.
    pub fn value(&self, name: &str) -> f64 {
        match self.get(name) {
            Some(v) => v.value,
            None => panic!("example {} has no fixture `{name}`", self.id),
        }
    }
}

fn fv(name: &str, value: f64, tolerance: f64, source: &str) -> FixtureValue {
    FixtureValue {
        name: name.to_string(),
        value,
        tolerance,
        source: source.to_string(),
    }
}

const N: usize = 2;
const HALF_WIDTH: f64 = 5.0;

fn uniform(lo: f64, hi: f64) -> Law {
    Law::Uniform(crate::stochastic::UniformBox::cube(lo, hi, N).expect("valid box"))
}

enum Extra {
    None,
    Affine { a: f64, b: f64, kappa: f64 },
    Quadratic,
}

struct LinearSpec {
    exponent: f64,
    extra: Extra,
    slater: Option<Vec<f64>>,
    /// `(xi_1 lower bound, innovation bounds)` of the perturbed law.
    perturbation: (f64, (f64, f64)),
}

fn linear_instance(
    name: String,
    spec: LinearSpec,
    perturbed: bool,
    regularity: RegularityData,
) -> ProblemInstance {
    let horizon: usize = 2;
    let e = vec![1.0; N];
    let eye = Matrix::identity(N);
    let mut stages = Vec::new();
    for t in 0..=horizon {
        let mut a_xi = vec![vec![0.0; N]; t.saturating_sub(1)];
        if t > 0 {
            a_xi.push(e.clone());
        }
        let mut constraints = vec![Constraint::BoxConstraint(BoxConstraint {
            lower: vec![-HALF_WIDTH; N],
            upper: vec![HALF_WIDTH; N],
            exponent: spec.exponent,
        })];
        if t > 0 {
            match spec.extra {
                Extra::None => {}
                Extra::Affine { a, b, kappa } => {
                    constraints.push(Constraint::AffineInequality(AffineInequality {
                        a: Matrix::diag(&[a; N]),
                        b: Matrix::diag(&[b; N]),
                        c: eye.clone(),
                        d: eye.clone(),
                        kappa: vec![kappa; N],
                    }))
                }
                Extra::Quadratic => {
                    constraints.push(Constraint::QuadraticInequality(QuadraticInequality {
                        kappa: vec![11.0; N],
                    }))
                }
            }
        }
        let transition = (t < horizon).then(|| {
            Transition::AffineTransition(AffineTransition {
                m1: eye.clone(),
                m2: eye.clone(),
                n1: (t > 0).then(|| eye.clone()),
                n2: eye.clone(),
                offset: None,
            })
        });
        stages.push(StageSpec {
            dims: StageDims {
                state: N,
                decision: N,
                xi: if t == 0 { 0 } else { N },
                zeta: N,
            },
            cost: Cost::AffineCost(AffineCost {
                a_s: e.clone(),
                a_x: e.clone(),
                a_xi,
                a_z: e.clone(),
                b: 0.0,
            }),
            constraints,
            transition,
            slater_point: if t > 0 { spec.slater.clone() } else { None },
        });
    }
    let (xi1_lo, (nu_lo, nu_hi)) = if perturbed {
        spec.perturbation
    } else {
        (-2.0, (-1.0, 1.0))
    };
    ProblemInstance {
        name: Some(name),
        horizon,
        initial_state: vec![0.0; N],
        stages,
        exogenous: ExogenousProcess {
            stages: vec![
                ExogenousStage::Marginal {
                    law: uniform(xi1_lo, 0.0),
                },
                ExogenousStage::AffineShift {
                    weights: vec![1.0],
                    innovation: uniform(nu_lo, nu_hi),
                },
            ],
        },
        endogenous: EndogenousProcess {
            laws: vec![uniform(-2.0, 0.0); horizon + 1],
        },
        regularity,
        separable: true,
    }
}

fn inventory_instance(horizon: usize, perturbed: bool) -> ProblemInstance {
    const CAPACITY: f64 = 10.0;
    const ORDER_CAP: f64 = 10.0;
    const BUDGET: f64 = 15.0;
    let scalar = |v: f64| Matrix(vec![vec![v]]);
    let mut stages = Vec::new();
    for t in 0..=horizon {
        let transition =
            (t < horizon).then_some(Transition::InventoryTransition(InventoryTransition {
                order_cap: ORDER_CAP,
                demand_cap: 4.0,
            }));
        let stage = if t == 0 {
            StageSpec {
                dims: StageDims {
                    state: 1,
                    decision: 1,
                    xi: 0,
                    zeta: 3,
                },
                cost: Cost::AffineCost(AffineCost {
                    a_s: vec![1.0],
                    a_x: vec![2.0],
                    a_xi: Vec::new(),
                    a_z: vec![0.0; 3],
                    b: 0.0,
                }),
                // price 2 and budget 15 cap the first order at 7.5
                constraints: vec![Constraint::BoxConstraint(BoxConstraint::new(
                    vec![0.0],
                    vec![BUDGET / 2.0],
                ))],
                transition,
                slater_point: None,
            }
        } else {
            StageSpec {
                dims: StageDims {
                    state: 1,
                    decision: 1,
                    xi: 1,
                    zeta: 3,
                },
                cost: Cost::InventoryCost(InventoryCost {
                    holding: 1.0,
                    backorder: 3.0,
                    price_index: 0,
                    price_cap: 4.0,
                    order_cap: ORDER_CAP,
                }),
                constraints: vec![
                    Constraint::BoxConstraint(BoxConstraint::new(vec![0.0], vec![ORDER_CAP])),
                    Constraint::AffineInequality(AffineInequality {
                        a: scalar(1.0),
                        b: scalar(0.0),
                        c: scalar(1.0),
                        d: scalar(0.0),
                        kappa: vec![CAPACITY],
                    }),
                    Constraint::PurchaseBudget(PurchaseBudget {
                        budget: BUDGET,
                        price_index: 0,
                        order_cap: ORDER_CAP,
                    }),
                ],
                transition,
                slater_point: None,
            }
        };
        stages.push(stage);
    }
    let discrete = |atoms: Vec<Vec<f64>>| {
        Law::Discrete(DiscreteDistribution::new(atoms, vec![0.5, 0.5]).expect("valid law"))
    };
    let mut exo = vec![ExogenousStage::Marginal {
        law: discrete(vec![vec![2.0], vec![2.5]]),
    }];
    for t in 2..=horizon {
        let mut weights = vec![0.0; t - 1];
        weights[t - 2] = 1.0;
        exo.push(ExogenousStage::AffineShift {
            weights,
            innovation: discrete(vec![vec![-0.2], vec![0.3]]),
        });
    }
    let (d_lo, d_hi) = if perturbed { (2.2, 3.1) } else { (2.0, 3.0) };
    let zeta = discrete(vec![vec![0.05, 0.0, d_lo], vec![0.05, 0.0, d_hi]]);
    ProblemInstance {
        name: Some(format!("inventory (T={horizon})")),
        horizon,
        initial_state: vec![0.0],
        stages,
        exogenous: ExogenousProcess { stages: exo },
        endogenous: EndogenousProcess {
            laws: vec![zeta; horizon + 1],
        },
        regularity: RegularityData {
            // stock never exceeds 8 after demand, leaving room of 2 under
            // the capacity constraint
            rho: Some(2.0),
            ..Default::default()
        },
        separable: false,
    }
}

/// Closed-form optimal value of the nonlinear instance.
pub fn nonlinear_closed_form() -> f64 {
    let p = |b: f64, e: f64| b.powf(e);
    2.0 * (-24.0
        - 2.0 / 15.0 * (p(15.0, 2.5) - 2.0 * p(13.0, 2.5) + p(11.0, 2.5))
        - 1.0 / 1890.0
            * (2.0 * p(19.0, 4.5) + 2.0 * p(21.0, 4.5) - 3.0 * p(17.0, 4.5) - 3.0 * p(23.0, 4.5)
                + p(15.0, 4.5)
                + p(25.0, 4.5)))
}

fn fixtures(id: &ExampleId, perturbed: bool) -> Vec<FixtureValue> {
    const R: &str = "reported";
    const D: &str = "derived";
    let mut v = Vec::new();
    match *id {
        ExampleId::Linear41 { alpha } => {
            let q = 5f64.powi(alpha as i32);
            v.push(fv("value_base", -78.0, 0.05, R));
            v.push(fv("value_perturbed", -77.92, 0.05, R));
            v.push(fv("gap", 0.08, 1e-6, R));
            v.push(fv("dk_stage_1", 1.0 / 75.0, 1e-12, R));
            v.push(fv("dk_stage_2", 1.0 / 75.0, 1e-12, R));
            v.push(fv("rho", q, 1e-9 * q, R));
            v.push(fv("l_x_1", 10.0 / q, 1e-12, R));
            v.push(fv("l_x_2", 20.0 / q + 200.0 / (q * q), 1e-12, R));
            v.push(fv("l_v_2", 4.0 + 40.0 / q, 1e-12, R));
            v.push(fv("l_xi_1", 6.0 + 100.0 / q + 400.0 / (q * q), 1e-12, R));
            v.push(fv("l_xi_2", 2.0 + 40.0 / q + 400.0 / (q * q), 1e-12, R));
            v.push(fv(
                "stagewise_bound",
                8.0 / 75.0 + 28.0 / (15.0 * q) + 32.0 / (3.0 * q * q),
                1e-9,
                R,
            ));
            v.push(fv("nested_distance", 0.04, 5e-3, R));
            v.push(fv("nested_lipschitz", 4.0, 0.0, R));
            v.push(fv("nested_bound", 0.16, 1e-6, R));
        }
        ExampleId::Linear42a { kappa } => {
            if kappa == DEFAULT_KAPPA {
                v.push(fv("value_base", -62.12, 0.05, R));
                v.push(fv("value_perturbed", -62.0296, 0.05, R));
                v.push(fv("gap", 0.0904, 1e-6, R));
                v.push(fv("rho", 40.0, 1e-9, R));
                v.push(fv("l_x_1", 0.25, 1e-12, R));
                v.push(fv("l_x_2", 0.625, 1e-12, R));
                v.push(fv("l_v_2", 5.0, 1e-12, D));
                v.push(fv("l_xi_1", 35.0 / 4.0, 1e-12, R));
                v.push(fv("l_xi_2", 13.0 / 4.0, 1e-12, R));
                v.push(fv("stagewise_bound", 0.16, 1e-9, R));
                v.push(fv("filtration_stage_1", 1.0 / 15.0, 5e-3, R));
                v.push(fv("filtration", 0.203, 0.02, R));
                v.push(fv("w3", 0.030, 1e-3, R));
                v.push(fv("hrs_lipschitz", 18.0, 0.0, R));
                v.push(fv("hrs_bound", 4.19, 0.25, R));
            }
        }
        ExampleId::Linear42b => {
            v.push(fv("value_base", -78.0, 0.05, R));
            v.push(fv("value_perturbed", -77.92, 0.05, R));
            v.push(fv("gap", 0.08, 1e-6, R));
            v.push(fv("rho", 10.0, 1e-9, R));
            v.push(fv("l_x_1", 1.0, 1e-12, R));
            v.push(fv("l_x_2", 4.0, 1e-12, R));
            v.push(fv("l_v_2_reported", 4.0, 0.0, R));
            v.push(fv("l_v_2", 8.0, 1e-12, D));
            v.push(fv("l_xi_1_reported", 12.0, 0.0, R));
            v.push(fv("l_xi_2_reported", 10.0, 0.0, R));
            v.push(fv("l_xi_1", 20.0, 1e-12, D));
            v.push(fv("l_xi_2", 10.0, 1e-12, D));
            v.push(fv("stagewise_bound_reported", 22.0 / 75.0, 1e-9, R));
            v.push(fv("stagewise_bound", 30.0 / 75.0, 1e-9, D));
            v.push(fv("hrs_lipschitz", 18.0, 0.0, R));
            v.push(fv("hrs_bound", 0.540, 0.02, R));
        }
        ExampleId::Nonlinear43 => {
            v.push(fv("value_base", -71.36, 0.02, R));
            v.push(fv(
                "value_base_closed_form",
                nonlinear_closed_form(),
                1e-6,
                "closed form",
            ));
            v.push(fv("value_perturbed", -71.28, 0.02, R));
            v.push(fv("gap", 0.08, 0.015, R));
            v.push(fv("rho", 5.0, 1e-9, R));
            v.push(fv("dk_stage_1", 1.0 / 75.0, 1e-12, R));
            v.push(fv("dk_stage_2", 1.0 / 150.0, 1e-12, R));
            v.push(fv("l_x_1", 2.0, 1e-12, R));
            v.push(fv("l_x_2", 12.0, 1e-12, R));
            v.push(fv("l_v_1", 84.0, 1e-12, R));
            v.push(fv("l_v_2", 12.0, 1e-12, R));
            v.push(fv("l_xi_1", 42.0, 1e-12, R));
            v.push(fv("l_xi_2", 26.0, 1e-12, R));
            v.push(fv("stagewise_bound", 11.0 / 15.0, 1e-9, R));
        }
        ExampleId::Inventory { .. } => {}
    }
    let _ = perturbed;
    v
}

/// Instance (base or perturbed) and its reference values.
pub fn build_example(id: &ExampleId, perturbed: bool) -> Result<(ProblemInstance, ExampleFixture)> {
    let inst = match *id {
        ExampleId::Linear41 { alpha } => {
            if alpha == 0 || (alpha != 1 && alpha % 2 != 0) {
                return Err(Error::InvalidExponent(alpha as f64));
            }
            linear_instance(
                id.to_string(),
                LinearSpec {
                    exponent: alpha as f64,
                    extra: Extra::None,
                    slater: Some(vec![0.0; N]),
                    perturbation: (-1.98, (-0.98, 1.0)),
                },
                perturbed,
                // the box residual ignores (s, x_prev, xi); the stated
                // constant L_g = 1 is kept for the stagewise coefficients
                RegularityData {
                    l_g: Some(vec![1.0; 3]),
                    ..Default::default()
                },
            )
        }
        ExampleId::Linear42a { kappa } => linear_instance(
            id.to_string(),
            LinearSpec {
                exponent: 1.0,
                extra: Extra::Affine {
                    a: -10.0,
                    b: 1.0,
                    kappa,
                },
                // margin 29 + kappa at nominal parameters
                slater: Some(vec![2.9; N]),
                perturbation: (-1.98, (-0.98, 1.0)),
            },
            perturbed,
            RegularityData::default(),
        ),
        ExampleId::Linear42b => linear_instance(
            id.to_string(),
            LinearSpec {
                exponent: 1.0,
                extra: Extra::Affine {
                    a: 1.0,
                    b: -1.0,
                    kappa: 11.0,
                },
                slater: Some(vec![1.0; N]),
                perturbation: (-1.98, (-0.98, 1.0)),
            },
            perturbed,
            RegularityData::default(),
        ),
        ExampleId::Nonlinear43 => linear_instance(
            id.to_string(),
            LinearSpec {
                exponent: 1.0,
                extra: Extra::Quadratic,
                slater: Some(vec![-(6f64.sqrt()); N]),
                perturbation: (-1.98, (-0.99, 0.99)),
            },
            perturbed,
            RegularityData {
                rho: Some(5.0),
                ..Default::default()
            },
        ),
        ExampleId::Inventory { horizon } => {
            if horizon == 0 {
                return Err(Error::UnknownExample(id.to_string()));
            }
            inventory_instance(horizon, perturbed)
        }
    };
    let fixture = ExampleFixture {
        id: *id,
        perturbed,
        values: fixtures(id, perturbed),
    };
    Ok((inst, fixture))
}

pub fn has_analytic_policy(id: &ExampleId) -> bool {
    !matches!(id, ExampleId::Inventory { .. })
}

/// Optimal feedback policy of an example, coordinate by coordinate.
/// Works on the full instance and on its one-dimensional projections.
///
/// Panics for the inventory instance, which has none.
pub fn analytic_policy(id: &ExampleId, p: &PolicyInput<'_>) -> Vec<f64> {
    let n = p.state.len();
    if p.stage == 0 {
        return vec![-HALF_WIDTH; n];
    }
    let xi = p.xi[p.stage - 1];
    let clamp = |x: f64| x.clamp(-HALF_WIDTH, HALF_WIDTH);
    (0..n)
        .map(|i| {
            let (s, xp, z) = (p.state[i], p.prev_decision[i], xi[i]);
            match *id {
                ExampleId::Linear41 { .. } | ExampleId::Linear42b => -HALF_WIDTH,
                ExampleId::Linear42a { kappa } => clamp((xp + s + z - kappa) / 10.0),
                ExampleId::Nonlinear43 => clamp(-(11.0 + xp - s - z).max(0.0).sqrt()),
                ExampleId::Inventory { .. } => panic!("inventory example has no analytic policy"),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derive_regularity;

    #[test]
    fn ids_round_trip() {
        for id in ExampleId::all() {
            assert_eq!(id.to_string().parse::<ExampleId>().unwrap(), id);
        }
        assert_eq!(
            "4.1:alpha=2".parse::<ExampleId>().unwrap(),
            ExampleId::Linear41 { alpha: 2 }
        );
        assert_eq!(
            "inventory:T=2".parse::<ExampleId>().unwrap(),
            ExampleId::Inventory { horizon: 2 }
        );
        assert!(matches!(
            "4.4".parse::<ExampleId>(),
            Err(Error::UnknownExample(_))
        ));
        assert!("4.1:alpha=3".parse::<ExampleId>().is_err());
    }

    #[test]
    fn derived_rho_matches_stated() {
        for id in [
            ExampleId::Linear41 { alpha: 2 },
            ExampleId::Linear42a { kappa: 11.0 },
            ExampleId::Linear42b,
            ExampleId::Nonlinear43,
        ] {
            let (inst, fx) = build_example(&id, false).unwrap();
            let reg = derive_regularity(&inst).unwrap();
            let rho = reg.rho.unwrap();
            assert!((rho - fx.value("rho")).abs() < 1e-9 * rho, "{id}: {rho}");
            assert_eq!(reg.max_l_c(), 2.0);
            assert_eq!(reg.max_l_s(), 1.0);
            assert_eq!(reg.diameter, 10.0);
        }
    }

    #[test]
    fn closed_form_rounds_to_reported() {
        assert!((nonlinear_closed_form() - -71.36).abs() < 0.02);
    }

    #[test]
    fn instances_validate() {
        for id in ExampleId::all() {
            for p in [false, true] {
                build_example(&id, p).unwrap().0.validate().unwrap();
            }
        }
    }
}
