//! Problem instances: stage costs, constraints, transitions and their
//! regularity constants.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, l1, Matrix};
use crate::stochastic::{EndogenousProcess, ExogenousProcess, ExogenousStage, Law};

/// Residual tolerance used for feasibility checks.
pub const FEAS_TOL: f64 = 1e-9;

/// Arguments handed to a custom evaluator. `xi` is the history
/// `xi_1..xi_t` (empty at stage 0).
#[derive(Debug, Clone, Copy)]
pub struct EvalArgs<'a> {
    pub stage: usize,
    pub state: &'a [f64],
    pub decision: &'a [f64],
    pub prev_decision: &'a [f64],
    pub xi: &'a [&'a [f64]],
    pub zeta: &'a [f64],
}

/// User code behind a [`CustomFamily`]. Writes `out_dim` values into `out`:
/// one value for a cost, one residual per row for a constraint, the next
/// state for a transition.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, args: &EvalArgs<'_>, out: &mut [f64]) -> std::result::Result<(), String>;
}

impl<F> Evaluator for F
where
    F: Fn(&EvalArgs<'_>, &mut [f64]) -> std::result::Result<(), String> + Send + Sync,
{
    fn evaluate(&self, args: &EvalArgs<'_>, out: &mut [f64]) -> std::result::Result<(), String> {
        self(args, out)
    }
}

/// Lipschitz moduli of a custom family, block by block. For constraints
/// only `state`, `prev_decision` and `xi` matter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moduli {
    pub state: f64,
    pub decision: f64,
    pub prev_decision: f64,
    pub xi: f64,
    pub zeta: f64,
}

impl Moduli {
    fn max(&self) -> f64 {
        self.state.max(self.decision).max(self.xi).max(self.zeta)
    }
}

/// Family backed by user code. Serializes its name and moduli only; a
/// reloaded instance has no evaluator attached and fails on evaluation.
#[derive(Clone, Serialize, Deserialize)]
pub struct CustomFamily {
    pub name: String,
    pub out_dim: usize,
    pub moduli: Moduli,
    /// Declared convex in the decision (required by the solver).
    #[serde(default = "yes")]
    pub convex: bool,
    #[serde(skip)]
    pub evaluator: Option<Arc<dyn Evaluator>>,
}

fn yes() -> bool {
    true
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily")
            .field("name", &self.name)
            .field("out_dim", &self.out_dim)
            .field("moduli", &self.moduli)
            .field("attached", &self.evaluator.is_some())
            .finish()
    }
}

impl CustomFamily {
    pub fn new(name: &str, out_dim: usize, moduli: Moduli, evaluator: Arc<dyn Evaluator>) -> Self {
        CustomFamily {
            name: name.into(),
            out_dim,
            moduli,
            convex: true,
            evaluator: Some(evaluator),
        }
    }

    fn call(&self, args: &EvalArgs<'_>, out: &mut [f64]) -> Result<()> {
        let ev = self.evaluator.as_ref().ok_or_else(|| {
            Error::EvaluatorError(format!("`{}` has no attached evaluator", self.name))
        })?;
        ev.evaluate(args, out)
            .map_err(|e| Error::EvaluatorError(format!("`{}`: {e}", self.name)))?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::EvaluatorError(format!(
                "`{}` returned a non-finite value",
                self.name
            )));
        }
        Ok(())
    }
}

/// `a_s.s + a_x.x + sum_k a_xi[k].xi_{k+1} + a_z.zeta + b`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCost {
    pub a_s: Vec<f64>,
    pub a_x: Vec<f64>,
    #[serde(default)]
    pub a_xi: Vec<Vec<f64>>,
    pub a_z: Vec<f64>,
    #[serde(default)]
    pub b: f64,
}

/// `h [s]^+ + p x + l [-s]^+` with the price `p` read from `xi_t`.
/// The caps bound `|p|` and `|x|` for the moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryCost {
    pub holding: f64,
    pub backorder: f64,
    #[serde(default)]
    pub price_index: usize,
    pub price_cap: f64,
    pub order_cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Cost {
    AffineCost(AffineCost),
    InventoryCost(InventoryCost),
    Custom(CustomFamily),
}

/// `|x_i - c_i|^alpha <= h_i^alpha` with `c, h` the centre and half-width of
/// `[lower, upper]`. The exponent only changes the Slater margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxConstraint {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default = "one")]
    pub exponent: f64,
}

fn one() -> f64 {
    1.0
}

impl BoxConstraint {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        BoxConstraint {
            lower,
            upper,
            exponent: 1.0,
        }
    }

    pub fn cube(lo: f64, hi: f64, dim: usize) -> Self {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    fn margin(&self, x: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for ((l, u), xi) in self.lower.iter().zip(&self.upper).zip(x) {
            let c = 0.5 * (l + u);
            let h = 0.5 * (u - l);
            m = m.min(h.powf(self.exponent) - (xi - c).abs().powf(self.exponent));
        }
        m
    }
}

/// `A x_t + B x_{t-1} + C s_t + D xi_t - kappa <= 0`, row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineInequality {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub kappa: Vec<f64>,
}

/// `x_{t,i}^2 - x_{t-1,i} + s_{t,i} + xi_{t,i} - kappa_i <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticInequality {
    pub kappa: Vec<f64>,
}

/// `p_t x - budget <= 0` with `p_t = xi_t[price_index]` and a scalar order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurchaseBudget {
    pub budget: f64,
    #[serde(default)]
    pub price_index: usize,
    pub order_cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Constraint {
    BoxConstraint(BoxConstraint),
    AffineInequality(AffineInequality),
    QuadraticInequality(QuadraticInequality),
    PurchaseBudget(PurchaseBudget),
    Custom(CustomFamily),
}

/// `M1 s + M2 x + N1 xi_t + N2 zeta + offset`. `n1` is absent at stage 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineTransition {
    pub m1: Matrix,
    pub m2: Matrix,
    #[serde(default)]
    pub n1: Option<Matrix>,
    pub n2: Matrix,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

/// `s + (1 - eta) x - (1 - delta) d` with `zeta = (eta, delta, d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryTransition {
    pub order_cap: f64,
    pub demand_cap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Transition {
    AffineTransition(AffineTransition),
    InventoryTransition(InventoryTransition),
    Custom(CustomFamily),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDims {
    pub state: usize,
    pub decision: usize,
    /// Dimension of `xi_t` (0 at stage 0).
    pub xi: usize,
    pub zeta: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageSpec {
    pub dims: StageDims,
    pub cost: Cost,
    pub constraints: Vec<Constraint>,
    /// Transition into the next stage; `None` at the horizon.
    #[serde(default)]
    pub transition: Option<Transition>,
    #[serde(default)]
    pub slater_point: Option<Vec<f64>>,
}

/// First-order (`nu = 1`) or quadratic (`nu = 2`) growth of the objective
/// around its solution set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub beta: f64,
    pub nu: f64,
}

/// Regularity constants. In an instance every field is an optional
/// override; [`derive_regularity`] fills the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegularityData {
    /// `L_{C,t}`, `t = 0..=T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_c: Option<Vec<f64>>,
    /// `L_{S,t}` of the transition out of stage `t`, `t = 0..T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_s: Option<Vec<f64>>,
    /// `L_{g,t}`, `t = 0..=T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_g: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Diameter `A` of the decision sets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<Growth>,
    /// `L_{Q,t}` of the exogenous kernels, `t = 1..=T` stored at index `t-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_q: Option<Vec<f64>>,
}

/// Fully resolved constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub horizon: usize,
    pub l_c: Vec<f64>,
    pub l_s: Vec<f64>,
    pub l_g: Vec<f64>,
    /// `None` when no stage couples its decision set to the past
    /// (every `L_{g,t}` is zero).
    pub rho: Option<f64>,
    pub diameter: f64,
    pub growth: Option<Growth>,
    pub l_q: Option<Vec<f64>>,
}

impl Regularity {
    /// Scalar constants shared by every stage.
    pub fn uniform(horizon: usize, l_c: f64, l_s: f64, l_g: f64, rho: f64, diameter: f64) -> Self {
        Regularity {
            horizon,
            l_c: vec![l_c; horizon + 1],
            l_s: vec![l_s; horizon.max(1)],
            l_g: vec![l_g; horizon + 1],
            rho: Some(rho),
            diameter,
            growth: None,
            l_q: None,
        }
    }

    pub fn max_l_c(&self) -> f64 {
        self.l_c.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_l_s(&self) -> f64 {
        self.l_s.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_l_g(&self) -> f64 {
        self.l_g.iter().copied().fold(0.0, f64::max)
    }

    /// `A L_g / rho` for a given `L_g`.
    pub fn ratio(&self, l_g: f64) -> Result<f64> {
        if l_g == 0.0 {
            return Ok(0.0);
        }
        let rho = self.rho.ok_or(Error::MissingRegularity("rho"))?;
        if !(rho > 0.0) {
            return Err(Error::SlaterViolation { margin: rho });
        }
        Ok(self.diameter * l_g / rho)
    }

    pub fn growth(&self) -> Result<Growth> {
        self.growth.ok_or(Error::MissingGrowth)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(default)]
    pub name: Option<String>,
    pub horizon: usize,
    pub initial_state: Vec<f64>,
    /// Stages `0..=T`.
    pub stages: Vec<StageSpec>,
    pub exogenous: ExogenousProcess,
    pub endogenous: EndogenousProcess,
    #[serde(default)]
    pub regularity: RegularityData,
    /// Declares that coordinates decouple; checked by
    /// [`ProblemInstance::coordinate`] before the solver relies on it.
    #[serde(default)]
    pub separable: bool,
}

fn dim_err(what: impl Into<String>, expected: usize, got: usize) -> Error {
    Error::InvalidDimension {
        what: what.into(),
        expected,
        got,
    }
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(dim_err(what, n, v.len()));
    }
    Ok(())
}

fn check_matrix(what: &str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if !m.is_rectangular() || m.rows() != rows || (rows > 0 && m.cols() != cols) {
        return Err(dim_err(
            format!("{what} ({}x{})", m.rows(), m.cols()),
            rows * cols,
            m.rows() * m.cols(),
        ));
    }
    Ok(())
}

impl Cost {
    #[inline]
    pub(crate) fn eval(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        xi: &[&[f64]],
        z: &[f64],
    ) -> Result<f64> {
        match self {
            Cost::AffineCost(c) => {
                let mut v = dot(&c.a_s, s) + dot(&c.a_x, x) + dot(&c.a_z, z) + c.b;
                for (a, h) in c.a_xi.iter().zip(xi) {
                    v += dot(a, h);
                }
                Ok(v)
            }
            Cost::InventoryCost(c) => {
                let p = xi.last().map_or(0.0, |h| h[c.price_index]);
                let s0 = s[0];
                Ok(c.holding * s0.max(0.0) + p * x[0] + c.backorder * (-s0).max(0.0))
            }
            Cost::Custom(f) => {
                let mut out = [0.0];
                f.call(
                    &EvalArgs {
                        stage: t,
                        state: s,
                        decision: x,
                        prev_decision: &[],
                        xi,
                        zeta: z,
                    },
                    &mut out,
                )?;
                Ok(out[0])
            }
        }
    }

    fn validate(&self, t: usize, d: &StageDims) -> Result<()> {
        match self {
            Cost::AffineCost(c) => {
                check_len("cost a_s", &c.a_s, d.state)?;
                check_len("cost a_x", &c.a_x, d.decision)?;
                check_len("cost a_z", &c.a_z, d.zeta)?;
                if c.a_xi.len() > t {
                    return Err(dim_err("cost a_xi history length", t, c.a_xi.len()));
                }
                Ok(())
            }
            Cost::InventoryCost(c) => {
                if d.state != 1 || d.decision != 1 {
                    return Err(Error::InvalidInput(
                        "inventory cost needs scalar state and order".into(),
                    ));
                }
                if t > 0 && c.price_index >= d.xi {
                    return Err(dim_err("inventory price index", d.xi, c.price_index + 1));
                }
                Ok(())
            }
            Cost::Custom(f) => {
                if f.out_dim != 1 {
                    return Err(dim_err(
                        format!("custom cost `{}` output", f.name),
                        1,
                        f.out_dim,
                    ));
                }
                Ok(())
            }
        }
    }

    fn modulus(&self) -> f64 {
        match self {
            Cost::AffineCost(c) => {
                let xi: f64 = c.a_xi.iter().map(|a| l1(a)).sum();
                l1(&c.a_s).max(l1(&c.a_x)).max(xi).max(l1(&c.a_z))
            }
            Cost::InventoryCost(c) => c.holding.max(c.backorder).max(c.price_cap).max(c.order_cap),
            Cost::Custom(f) => f.moduli.max(),
        }
    }
}

impl Constraint {
    /// Largest residual of this family.
    #[inline]
    pub(crate) fn max_residual(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        x_prev: &[f64],
        xi: &[&[f64]],
    ) -> Result<f64> {
        let mut m = f64::NEG_INFINITY;
        match self {
            Constraint::BoxConstraint(b) => {
                for ((l, u), v) in b.lower.iter().zip(&b.upper).zip(x) {
                    m = m.max(l - v).max(v - u);
                }
            }
            Constraint::AffineInequality(g) => {
                let xi_t = xi.last().copied().unwrap_or(&[]);
                for i in 0..g.kappa.len() {
                    let mut r = g.a.row_dot(i, x) - g.kappa[i];
                    if !x_prev.is_empty() {
                        r += g.b.row_dot(i, x_prev);
                    }
                    r += g.c.row_dot(i, s);
                    if !xi_t.is_empty() {
                        r += g.d.row_dot(i, xi_t);
                    }
                    m = m.max(r);
                }
            }
            Constraint::QuadraticInequality(q) => {
                let xi_t = xi.last().copied().unwrap_or(&[]);
                for i in 0..q.kappa.len() {
                    let xp = x_prev.get(i).copied().unwrap_or(0.0);
                    let e = xi_t.get(i).copied().unwrap_or(0.0);
                    m = m.max(x[i] * x[i] - xp + s[i] + e - q.kappa[i]);
                }
            }
            Constraint::PurchaseBudget(b) => {
                let p = xi.last().map_or(0.0, |h| h[b.price_index]);
                m = p * x[0] - b.budget;
            }
            Constraint::Custom(f) => {
                let mut out = vec![0.0; f.out_dim];
                f.call(
                    &EvalArgs {
                        stage: t,
                        state: s,
                        decision: x,
                        prev_decision: x_prev,
                        xi,
                        zeta: &[],
                    },
                    &mut out,
                )?;
                m = out.into_iter().fold(m, f64::max);
            }
        }
        Ok(m)
    }

    fn validate(&self, t: usize, d: &StageDims, prev_decision: usize) -> Result<()> {
        match self {
            Constraint::BoxConstraint(b) => {
                check_len("box lower", &b.lower, d.decision)?;
                check_len("box upper", &b.upper, d.decision)?;
                if b.lower
                    .iter()
                    .zip(&b.upper)
                    .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
                {
                    return Err(Error::InvalidBox(
                        "bounds must be finite with lower <= upper".into(),
                    ));
                }
                let even =
                    b.exponent >= 2.0 && b.exponent.fract() == 0.0 && b.exponent % 2.0 == 0.0;
                if !(b.exponent == 1.0 || even) {
                    return Err(Error::InvalidExponent(b.exponent));
                }
                Ok(())
            }
            Constraint::AffineInequality(g) => {
                let r = g.kappa.len();
                check_matrix("inequality A", &g.a, r, d.decision)?;
                check_matrix("inequality B", &g.b, r, prev_decision)?;
                check_matrix("inequality C", &g.c, r, d.state)?;
                if t > 0 {
                    check_matrix("inequality D", &g.d, r, d.xi)?;
                }
                Ok(())
            }
            Constraint::QuadraticInequality(q) => {
                let n = q.kappa.len();
                if d.decision != n || d.state != n || (t > 0 && (d.xi != n || prev_decision != n)) {
                    return Err(Error::InvalidInput(
                        "quadratic inequality needs equal decision, state and xi dimensions".into(),
                    ));
                }
                Ok(())
            }
            Constraint::PurchaseBudget(b) => {
                if d.decision != 1 || t == 0 || b.price_index >= d.xi {
                    return Err(Error::InvalidInput(
                        "purchase budget needs a scalar order and a price in xi_t".into(),
                    ));
                }
                Ok(())
            }
            Constraint::Custom(_) => Ok(()),
        }
    }

    /// Modulus in `(s_t, x_{t-1}, xi_t)`.
    fn modulus(&self) -> f64 {
        match self {
            Constraint::BoxConstraint(_) => 0.0,
            Constraint::AffineInequality(g) => (0..g.kappa.len())
                .map(|i| {
                    let d = if g.d.rows() > i { g.d.row_l1(i) } else { 0.0 };
                    g.b.row_l1(i).max(g.c.row_l1(i)).max(d)
                })
                .fold(0.0, f64::max),
            Constraint::QuadraticInequality(_) => 1.0,
            Constraint::PurchaseBudget(b) => b.order_cap,
            Constraint::Custom(f) => f.moduli.state.max(f.moduli.prev_decision).max(f.moduli.xi),
        }
    }
}

impl Transition {
    #[inline]
    pub(crate) fn eval(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        xi_t: Option<&[f64]>,
        z: &[f64],
        out: &mut Vec<f64>,
    ) -> Result<()> {
        out.clear();
        match self {
            Transition::AffineTransition(a) => {
                out.resize(a.m1.rows(), 0.0);
                a.m1.mul_add(s, out);
                a.m2.mul_add(x, out);
                if let (Some(n1), Some(xi)) = (&a.n1, xi_t) {
                    n1.mul_add(xi, out);
                }
                a.n2.mul_add(z, out);
                if let Some(o) = &a.offset {
                    for (v, c) in out.iter_mut().zip(o) {
                        *v += c;
                    }
                }
            }
            Transition::InventoryTransition(_) => {
                let (eta, delta, d) = (z[0], z[1], z[2]);
                out.push(s[0] + (1.0 - eta) * x[0] - (1.0 - delta) * d);
            }
            Transition::Custom(f) => {
                out.resize(f.out_dim, 0.0);
                let hist: Vec<&[f64]> = xi_t.into_iter().collect();
                f.call(
                    &EvalArgs {
                        stage: t,
                        state: s,
                        decision: x,
                        prev_decision: &[],
                        xi: &hist,
                        zeta: z,
                    },
                    out,
                )?;
            }
        }
        Ok(())
    }

    fn out_dim(&self) -> usize {
        match self {
            Transition::AffineTransition(a) => a.m1.rows(),
            Transition::InventoryTransition(_) => 1,
            Transition::Custom(f) => f.out_dim,
        }
    }

    fn validate(&self, t: usize, d: &StageDims, next_state: usize) -> Result<()> {
        match self {
            Transition::AffineTransition(a) => {
                check_matrix("transition M1", &a.m1, next_state, d.state)?;
                check_matrix("transition M2", &a.m2, next_state, d.decision)?;
                check_matrix("transition N2", &a.n2, next_state, d.zeta)?;
                match (&a.n1, t) {
                    (Some(n1), t) if t > 0 => check_matrix("transition N1", n1, next_state, d.xi)?,
                    (Some(n1), _) if n1.rows() > 0 && n1.cols() > 0 => {
                        return Err(Error::InvalidInput(
                            "stage-0 transition cannot read xi".into(),
                        ))
                    }
                    _ => {}
                }
                if let Some(o) = &a.offset {
                    check_len("transition offset", o, next_state)?;
                }
                Ok(())
            }
            Transition::InventoryTransition(_) => {
                if d.state != 1 || d.decision != 1 || d.zeta != 3 || next_state != 1 {
                    return Err(Error::InvalidInput(
                        "inventory transition needs scalar state and order and zeta = (eta, delta, d)".into(),
                    ));
                }
                Ok(())
            }
            Transition::Custom(f) => {
                if f.out_dim != next_state {
                    return Err(dim_err(
                        format!("custom transition `{}`", f.name),
                        next_state,
                        f.out_dim,
                    ));
                }
                Ok(())
            }
        }
    }

    fn modulus(&self) -> f64 {
        match self {
            Transition::AffineTransition(a) => {
                let n1 = a.n1.as_ref().map_or(0.0, Matrix::inf_norm);
                a.m1.inf_norm()
                    .max(a.m2.inf_norm())
                    .max(n1)
                    .max(a.n2.inf_norm())
            }
            Transition::InventoryTransition(i) => 1f64.max(i.order_cap + i.demand_cap + 1.0),
            Transition::Custom(f) => f.moduli.max(),
        }
    }
}

impl StageSpec {
    /// Intersection of the box constraints of this stage.
    pub fn decision_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut out: Option<(Vec<f64>, Vec<f64>)> = None;
        for c in &self.constraints {
            if let Constraint::BoxConstraint(b) = c {
                match &mut out {
                    None => out = Some((b.lower.clone(), b.upper.clone())),
                    Some((l, u)) => {
                        for i in 0..l.len() {
                            l[i] = l[i].max(b.lower[i]);
                            u[i] = u[i].min(b.upper[i]);
                        }
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub(crate) fn max_residual(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        x_prev: &[f64],
        xi: &[&[f64]],
    ) -> Result<f64> {
        let mut m = f64::NEG_INFINITY;
        for c in &self.constraints {
            m = m.max(c.max_residual(t, s, x, x_prev, xi)?);
        }
        Ok(m)
    }

    /// Largest residual over constraints that depend on the past.
    fn coupling_residual(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        x_prev: &[f64],
        xi: &[&[f64]],
    ) -> Result<Option<f64>> {
        let mut m: Option<f64> = None;
        for c in &self.constraints {
            if !matches!(c, Constraint::BoxConstraint(_)) {
                let r = c.max_residual(t, s, x, x_prev, xi)?;
                m = Some(m.map_or(r, |v: f64| v.max(r)));
            }
        }
        Ok(m)
    }
}

impl ProblemInstance {
    pub fn validate(&self) -> Result<()> {
        let t_max = self.horizon;
        if self.stages.len() != t_max + 1 {
            return Err(dim_err("stages", t_max + 1, self.stages.len()));
        }
        if self.exogenous.horizon() != t_max {
            return Err(dim_err("exogenous stages", t_max, self.exogenous.horizon()));
        }
        if self.endogenous.laws.len() != t_max + 1 {
            return Err(dim_err(
                "endogenous laws",
                t_max + 1,
                self.endogenous.laws.len(),
            ));
        }
        check_len(
            "initial state",
            &self.initial_state,
            self.stages[0].dims.state,
        )?;
        for (t, st) in self.stages.iter().enumerate() {
            let d = &st.dims;
            if t == 0 && d.xi != 0 {
                return Err(dim_err("stage-0 xi", 0, d.xi));
            }
            if t > 0 && self.exogenous.stages[t - 1].dim() != d.xi {
                return Err(dim_err(
                    format!("xi_{t}"),
                    d.xi,
                    self.exogenous.stages[t - 1].dim(),
                ));
            }
            if self.endogenous.laws[t].dim() != d.zeta {
                return Err(dim_err(
                    format!("zeta_{t}"),
                    d.zeta,
                    self.endogenous.laws[t].dim(),
                ));
            }
            self.endogenous.laws[t].validate()?;
            st.cost.validate(t, d)?;
            if let Cost::AffineCost(c) = &st.cost {
                for (k, a) in c.a_xi.iter().enumerate() {
                    check_len("cost a_xi", a, self.stages[k + 1].dims.xi)?;
                }
            }
            let prev = if t == 0 {
                0
            } else {
                self.stages[t - 1].dims.decision
            };
            if st.decision_box().is_none() {
                return Err(Error::InvalidBox(format!(
                    "stage {t} has no box constraint"
                )));
            }
            for c in &st.constraints {
                if t == 0 && !matches!(c, Constraint::BoxConstraint(_)) {
                    return Err(Error::InvalidBox(
                        "stage-0 decision set must be a box".into(),
                    ));
                }
                c.validate(t, d, prev)?;
            }
            match (&st.transition, t < t_max) {
                (Some(tr), true) => {
                    tr.validate(t, d, self.stages[t + 1].dims.state)?;
                    if tr.out_dim() != self.stages[t + 1].dims.state {
                        return Err(dim_err(
                            "transition output",
                            self.stages[t + 1].dims.state,
                            tr.out_dim(),
                        ));
                    }
                }
                (None, false) => {}
                (None, true) => {
                    return Err(Error::InvalidInput(format!("stage {t} needs a transition")))
                }
                (Some(_), false) => {
                    return Err(Error::InvalidInput(
                        "the last stage has no transition".into(),
                    ))
                }
            }
            if let Some(p) = &st.slater_point {
                check_len("slater point", p, d.decision)?;
            }
        }
        if let Some(l_q) = &self.regularity.l_q {
            check_len("l_q", l_q, t_max)?;
        }
        Ok(())
    }

    fn check_stage(&self, t: usize) -> Result<&StageSpec> {
        self.stages.get(t).ok_or_else(|| {
            Error::InvalidHistory(format!("stage {t} beyond horizon {}", self.horizon))
        })
    }

    /// `C_t(s, x, xi_[t], zeta)`; `xi` holds `xi_1..xi_t`.
    pub fn evaluate_cost(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        xi: &[&[f64]],
        z: &[f64],
    ) -> Result<f64> {
        let st = self.check_stage(t)?;
        check_len("state", s, st.dims.state)?;
        check_len("decision", x, st.dims.decision)?;
        check_len("zeta", z, st.dims.zeta)?;
        self.check_history(t, xi)?;
        st.cost.eval(t, s, x, xi, z)
    }

    /// `S_t(s, x, xi_t, zeta)`; `xi_t` is ignored at stage 0.
    pub fn evaluate_transition(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        xi_t: &[f64],
        z: &[f64],
    ) -> Result<Vec<f64>> {
        let st = self.check_stage(t)?;
        let tr = st
            .transition
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("stage {t} has no transition")))?;
        check_len("state", s, st.dims.state)?;
        check_len("decision", x, st.dims.decision)?;
        check_len("zeta", z, st.dims.zeta)?;
        let xi = if t == 0 {
            None
        } else {
            check_len("xi", xi_t, st.dims.xi)?;
            Some(xi_t)
        };
        let mut out = Vec::new();
        tr.eval(t, s, x, xi, z, &mut out)?;
        Ok(out)
    }

    /// Residuals of every constraint row; feasible when all are `<= 1e-9`.
    pub fn feasibility_residual(
        &self,
        t: usize,
        s: &[f64],
        x: &[f64],
        x_prev: &[f64],
        xi: &[&[f64]],
    ) -> Result<Vec<f64>> {
        let st = self.check_stage(t)?;
        check_len("state", s, st.dims.state)?;
        check_len("decision", x, st.dims.decision)?;
        if t > 0 {
            check_len(
                "previous decision",
                x_prev,
                self.stages[t - 1].dims.decision,
            )?;
        }
        self.check_history(t, xi)?;
        st.constraints
            .iter()
            .map(|c| c.max_residual(t, s, x, x_prev, xi))
            .collect()
    }

    fn check_history(&self, t: usize, xi: &[&[f64]]) -> Result<()> {
        if xi.len() != t {
            return Err(Error::InvalidHistory(format!(
                "stage {t} needs {t} xi values, got {}",
                xi.len()
            )));
        }
        for (k, h) in xi.iter().enumerate() {
            check_len("xi history", h, self.stages[k + 1].dims.xi)?;
        }
        Ok(())
    }

    /// Whether [`ProblemInstance::coordinate`] applies.
    pub fn is_separable(&self) -> bool {
        let n = self.stages[0].dims.decision;
        self.separable && n > 1 && (0..n).all(|i| self.coordinate(i).is_ok())
    }

    /// One-dimensional subproblem of coordinate `i` for instances whose
    /// data are diagonal and whose laws are products.
    pub fn coordinate(&self, i: usize) -> Result<ProblemInstance> {
        let n = self.stages[0].dims.decision;
        let ns = |why: &str| Error::NotSeparable(why.to_string());
        for st in &self.stages {
            let d = &st.dims;
            if d.state != n || d.decision != n || d.zeta != n || !(d.xi == n || d.xi == 0) {
                return Err(ns("dimensions differ across blocks"));
            }
        }
        if i >= n {
            return Err(dim_err("coordinate", n, i + 1));
        }
        let pick = |v: &[f64]| vec![v[i]];
        let diag = |m: &Matrix| -> Result<Matrix> {
            if m.is_diagonal() {
                Ok(Matrix(vec![vec![m.0[i][i]]]))
            } else {
                Err(ns("non-diagonal matrix"))
            }
        };
        let mut stages = Vec::with_capacity(self.stages.len());
        for st in &self.stages {
            let cost = match &st.cost {
                Cost::AffineCost(c) => Cost::AffineCost(AffineCost {
                    a_s: pick(&c.a_s),
                    a_x: pick(&c.a_x),
                    a_xi: c.a_xi.iter().map(|a| pick(a)).collect(),
                    a_z: pick(&c.a_z),
                    b: if i == 0 { c.b } else { 0.0 },
                }),
                _ => return Err(ns("cost family has no coordinate split")),
            };
            let mut constraints = Vec::new();
            for c in &st.constraints {
                constraints.push(match c {
                    Constraint::BoxConstraint(b) => Constraint::BoxConstraint(BoxConstraint {
                        lower: pick(&b.lower),
                        upper: pick(&b.upper),
                        exponent: b.exponent,
                    }),
                    Constraint::AffineInequality(g) => {
                        if g.kappa.len() != n {
                            return Err(ns("inequality rows do not match coordinates"));
                        }
                        let dm = |m: &Matrix| -> Result<Matrix> {
                            if m.rows() == 0 || m.cols() == 0 {
                                Ok(m.clone())
                            } else {
                                diag(m)
                            }
                        };
                        Constraint::AffineInequality(AffineInequality {
                            a: diag(&g.a)?,
                            b: dm(&g.b)?,
                            c: diag(&g.c)?,
                            d: dm(&g.d)?,
                            kappa: pick(&g.kappa),
                        })
                    }
                    Constraint::QuadraticInequality(q) => {
                        Constraint::QuadraticInequality(QuadraticInequality {
                            kappa: pick(&q.kappa),
                        })
                    }
                    _ => return Err(ns("constraint family has no coordinate split")),
                });
            }
            let transition = match &st.transition {
                None => None,
                Some(Transition::AffineTransition(a)) => {
                    Some(Transition::AffineTransition(AffineTransition {
                        m1: diag(&a.m1)?,
                        m2: diag(&a.m2)?,
                        n1: match &a.n1 {
                            Some(m) if m.rows() > 0 && m.cols() > 0 => Some(diag(m)?),
                            other => other.clone(),
                        },
                        n2: diag(&a.n2)?,
                        offset: a.offset.as_ref().map(|o| pick(o)),
                    }))
                }
                Some(_) => return Err(ns("transition family has no coordinate split")),
            };
            stages.push(StageSpec {
                dims: StageDims {
                    state: 1,
                    decision: 1,
                    xi: st.dims.xi.min(1),
                    zeta: 1,
                },
                cost,
                constraints,
                transition,
                slater_point: st.slater_point.as_ref().map(|p| pick(p)),
            });
        }
        let exo = ExogenousProcess {
            stages: self
                .exogenous
                .stages
                .iter()
                .map(|s| match s {
                    ExogenousStage::Marginal { law } => Ok(ExogenousStage::Marginal {
                        law: law.coordinate(i)?,
                    }),
                    ExogenousStage::AffineShift {
                        weights,
                        innovation,
                    } => Ok(ExogenousStage::AffineShift {
                        weights: weights.clone(),
                        innovation: innovation.coordinate(i)?,
                    }),
                    ExogenousStage::Explicit(_) => Err(ns("explicit kernel")),
                })
                .collect::<Result<_>>()?,
        };
        let endo = EndogenousProcess {
            laws: self
                .endogenous
                .laws
                .iter()
                .map(|l| l.coordinate(i))
                .collect::<Result<Vec<Law>>>()?,
        };
        Ok(ProblemInstance {
            name: self.name.as_ref().map(|n| format!("{n}[{i}]")),
            horizon: self.horizon,
            initial_state: pick(&self.initial_state),
            stages,
            exogenous: exo,
            endogenous: endo,
            regularity: RegularityData::default(),
            separable: false,
        })
    }
}

/// Resolve every regularity constant, taking user overrides first and
/// deriving the rest from the family data.
pub fn derive_regularity(inst: &ProblemInstance) -> Result<Regularity> {
    inst.validate()?;
    let user = &inst.regularity;
    let t_max = inst.horizon;
    let l_c = match &user.l_c {
        Some(v) => {
            check_len("l_c", v, t_max + 1)?;
            v.clone()
        }
        None => inst.stages.iter().map(|s| s.cost.modulus()).collect(),
    };
    let l_s = match &user.l_s {
        Some(v) => {
            check_len("l_s", v, t_max)?;
            v.clone()
        }
        None => inst.stages[..t_max]
            .iter()
            .map(|s| s.transition.as_ref().map_or(0.0, Transition::modulus))
            .collect(),
    };
    let l_g = match &user.l_g {
        Some(v) => {
            check_len("l_g", v, t_max + 1)?;
            v.clone()
        }
        None => inst
            .stages
            .iter()
            .map(|s| {
                s.constraints
                    .iter()
                    .map(Constraint::modulus)
                    .fold(0.0, f64::max)
            })
            .collect(),
    };
    let diameter = match user.diameter {
        Some(a) => a,
        None => inst
            .stages
            .iter()
            .filter_map(StageSpec::decision_box)
            .flat_map(|(l, u)| l.into_iter().zip(u).map(|(a, b)| b - a).collect::<Vec<_>>())
            .fold(0.0, f64::max),
    };
    let rho = match user.rho {
        Some(r) if r > 0.0 => Some(r),
        Some(r) => return Err(Error::SlaterViolation { margin: r }),
        None => slater_margin(inst)?,
    };
    if rho.is_none() && l_g.iter().any(|&g| g > 0.0) {
        return Err(Error::MissingRegularity("rho"));
    }
    let l_q = match &user.l_q {
        Some(v) => Some(v.clone()),
        None => inst.exogenous.kernel_moduli(),
    };
    Ok(Regularity {
        horizon: t_max,
        l_c,
        l_s,
        l_g,
        rho,
        diameter,
        growth: user.growth,
        l_q,
    })
}

/// Smallest Slater margin over stages `1..=T` at the declared points, with
/// nominal zero states, previous decisions and exogenous values.
fn slater_margin(inst: &ProblemInstance) -> Result<Option<f64>> {
    let mut rho: Option<f64> = None;
    for t in 1..=inst.horizon {
        let st = &inst.stages[t];
        let Some(p) = &st.slater_point else { continue };
        let s = vec![0.0; st.dims.state];
        let xp = vec![0.0; inst.stages[t - 1].dims.decision];
        let zeros: Vec<Vec<f64>> = (1..=t).map(|k| vec![0.0; inst.stages[k].dims.xi]).collect();
        let hist: Vec<&[f64]> = zeros.iter().map(Vec::as_slice).collect();
        let margin = match st.coupling_residual(t, &s, p, &xp, &hist)? {
            Some(r) => -r,
            None => st
                .constraints
                .iter()
                .filter_map(|c| match c {
                    Constraint::BoxConstraint(b) => Some(b.margin(p)),
                    _ => None,
                })
                .fold(f64::INFINITY, f64::min),
        };
        if !(margin > 0.0) {
            return Err(Error::SlaterViolation { margin });
        }
        rho = Some(rho.map_or(margin, |r: f64| r.min(margin)));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{DiscreteDistribution, Law};

    fn scalar_instance() -> ProblemInstance {
        let dirac = |v: f64| Law::Discrete(DiscreteDistribution::dirac(vec![v]).unwrap());
        let stage = |t: usize, last: bool| StageSpec {
            dims: StageDims {
                state: 1,
                decision: 1,
                xi: usize::from(t > 0),
                zeta: 1,
            },
            cost: Cost::AffineCost(AffineCost {
                a_s: vec![1.0],
                a_x: vec![2.0],
                a_xi: if t > 0 {
                    vec![vec![0.0]; t - 1]
                        .into_iter()
                        .chain([vec![-3.0]])
                        .collect()
                } else {
                    vec![]
                },
                a_z: vec![0.5],
                b: 0.0,
            }),
            constraints: vec![Constraint::BoxConstraint(BoxConstraint::cube(-1.0, 1.0, 1))],
            transition: (!last).then(|| {
                Transition::AffineTransition(AffineTransition {
                    m1: Matrix::identity(1),
                    m2: Matrix::identity(1),
                    n1: (t > 0).then(|| Matrix::identity(1)),
                    n2: Matrix::identity(1),
                    offset: None,
                })
            }),
            slater_point: Some(vec![0.0]),
        };
        ProblemInstance {
            name: None,
            horizon: 1,
            initial_state: vec![0.0],
            stages: vec![stage(0, false), stage(1, true)],
            exogenous: ExogenousProcess {
                stages: vec![ExogenousStage::Marginal { law: dirac(1.0) }],
            },
            endogenous: EndogenousProcess {
                laws: vec![dirac(0.0), dirac(0.0)],
            },
            regularity: RegularityData::default(),
            separable: false,
        }
    }

    #[test]
    fn affine_cost_and_transition() {
        let inst = scalar_instance();
        inst.validate().unwrap();
        let xi = [2.0];
        let c = inst
            .evaluate_cost(1, &[1.0], &[1.0], &[&xi], &[2.0])
            .unwrap();
        assert_eq!(c, 1.0 + 2.0 - 6.0 + 1.0);
        let s = inst
            .evaluate_transition(0, &[1.0], &[2.0], &[], &[3.0])
            .unwrap();
        assert_eq!(s, vec![6.0]);
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let inst = scalar_instance();
        let err = inst
            .evaluate_cost(0, &[1.0, 2.0], &[1.0], &[], &[0.0])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidDimension { .. }));
    }

    #[test]
    fn derived_constants_of_scalar_instance() {
        let reg = derive_regularity(&scalar_instance()).unwrap();
        assert_eq!(reg.l_c, vec![2.0, 3.0]);
        assert_eq!(reg.l_s, vec![1.0]);
        assert_eq!(reg.l_g, vec![0.0, 0.0]);
        assert_eq!(reg.diameter, 2.0);
        assert_eq!(reg.rho, Some(1.0));
    }

    #[test]
    fn inventory_families() {
        let cost = Cost::InventoryCost(InventoryCost {
            holding: 1.0,
            backorder: 3.0,
            price_index: 0,
            price_cap: 2.0,
            order_cap: 10.0,
        });
        let p = [2.0];
        assert_eq!(
            cost.eval(1, &[2.0], &[1.0], &[&p], &[0.0, 0.0, 1.0])
                .unwrap(),
            4.0
        );
        assert_eq!(
            cost.eval(1, &[-2.0], &[1.0], &[&p], &[0.0, 0.0, 1.0])
                .unwrap(),
            8.0
        );
        let tr = Transition::InventoryTransition(InventoryTransition {
            order_cap: 10.0,
            demand_cap: 5.0,
        });
        let mut out = Vec::new();
        tr.eval(1, &[3.0], &[2.0], Some(&p), &[0.1, 0.0, 1.0], &mut out)
            .unwrap();
        assert!((out[0] - 3.8).abs() < 1e-12);
    }

    #[test]
    fn slater_violation_is_reported() {
        let mut inst = scalar_instance();
        inst.stages[1].slater_point = Some(vec![1.0]);
        assert!(matches!(
            derive_regularity(&inst),
            Err(Error::SlaterViolation { .. })
        ));
    }
}
