//! Exogenous and endogenous laws, discretization and scenario trees.

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of nodes in a materialized tree.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Product of independent uniforms on `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl UniformBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = UniformBox { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// `U(lo, hi)^dim`
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::InvalidDistribution(
                "uniform box needs matching non-empty bounds".into(),
            ));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u))
        {
            return Err(Error::InvalidDistribution(
                "uniform box needs finite bounds with lower < upper".into(),
            ));
        }
        Ok(())
    }
}

/// Finitely supported law. Weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete")]
pub struct DiscreteDistribution {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDiscrete {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl TryFrom<RawDiscrete> for DiscreteDistribution {
    type Error = Error;
    fn try_from(r: RawDiscrete) -> Result<Self> {
        DiscreteDistribution::new(r.atoms, r.weights)
    }
}

impl DiscreteDistribution {
    /// Zero-weight atoms are dropped. Weights must sum to one within 1e-9
    /// and are then renormalized.
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidDistribution(
                "need one weight per atom and at least one atom".into(),
            ));
        }
        let dim = atoms[0].len();
        if dim == 0 || atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidDistribution(
                "atoms of unequal dimension".into(),
            ));
        }
        if atoms.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite atom".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "negative or non-finite weight".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let (atoms, weights): (Vec<_>, Vec<_>) = atoms
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(a, w)| (a, w / total))
            .unzip();
        Ok(DiscreteDistribution { atoms, weights })
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    /// Equal weights on the given atoms.
    pub fn uniform_on(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.atoms
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (a, w) in self.iter() {
            for (mi, ai) in m.iter_mut().zip(a) {
                *mi += w * ai;
            }
        }
        m
    }

    pub fn shifted(&self, by: &[f64]) -> Self {
        DiscreteDistribution {
            atoms: self
                .atoms
                .iter()
                .map(|a| a.iter().zip(by).map(|(x, d)| x + d).collect())
                .collect(),
            weights: self.weights.clone(),
        }
    }

    /// Marginal of coordinate `i`, with equal atoms merged.
    pub fn marginal(&self, i: usize) -> Self {
        let mut pts: Vec<(f64, f64)> = self.iter().map(|(a, w)| (a[i], w)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in pts {
            match atoms.last() {
                Some(last) if last[0] == x => *weights.last_mut().unwrap() += w,
                _ => {
                    atoms.push(vec![x]);
                    weights.push(w);
                }
            }
        }
        DiscreteDistribution { atoms, weights }
    }
}

/// A law on `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    Uniform(UniformBox),
    Discrete(DiscreteDistribution),
}

/// One-dimensional rule used to discretize continuous laws, applied as a
/// tensor product across coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Midpoint,
    #[default]
    GaussLegendre,
}

impl std::str::FromStr for QuadratureRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(QuadratureRule::Midpoint),
            "gauss" | "gauss_legendre" | "gauss-legendre" => Ok(QuadratureRule::GaussLegendre),
            other => Err(Error::InvalidInput(format!(
                "unknown quadrature rule `{other}`"
            ))),
        }
    }
}

impl QuadratureRule {
    /// Nodes and weights on `[0, 1]`.
    pub fn unit_nodes(self, n: usize) -> Result<Vec<(f64, f64)>> {
        let n = NonZeroUsize::new(n)
            .ok_or_else(|| Error::InvalidInput("quadrature needs at least one node".into()))?;
        let n = n.get();
        Ok(match self {
            QuadratureRule::Midpoint => (0..n)
                .map(|k| ((k as f64 + 0.5) / n as f64, 1.0 / n as f64))
                .collect(),
            QuadratureRule::GaussLegendre => {
                if n == 1 {
                    return Ok(vec![(0.5, 1.0)]);
                }
                let q = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
                let mut v: Vec<(f64, f64)> =
                    q.iter().map(|(x, w)| ((x + 1.0) / 2.0, w / 2.0)).collect();
                v.sort_by(|a, b| a.0.total_cmp(&b.0));
                v
            }
        })
    }
}

impl Law {
    pub fn uniform(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Ok(Law::Uniform(UniformBox::new(lower, upper)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Law::Uniform(b) => b.dim(),
            Law::Discrete(d) => d.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Law::Uniform(b) => b.validate(),
            Law::Discrete(_) => Ok(()),
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match self {
            Law::Uniform(b) => b
                .lower
                .iter()
                .zip(&b.upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            Law::Discrete(d) => d.mean(),
        }
    }

    /// Number of atoms `discretize` would produce.
    pub fn atom_count(&self, n_per_dim: usize) -> usize {
        match self {
            Law::Uniform(b) => n_per_dim.saturating_pow(b.dim() as u32),
            Law::Discrete(d) => d.len(),
        }
    }

    /// Tensor-product quadrature for uniform boxes; discrete laws are
    /// returned unchanged.
    pub fn discretize(
        &self,
        n_per_dim: usize,
        rule: QuadratureRule,
    ) -> Result<DiscreteDistribution> {
        match self {
            Law::Discrete(d) => Ok(d.clone()),
            Law::Uniform(b) => {
                let unit = rule.unit_nodes(n_per_dim)?;
                let dim = b.dim();
                let total = unit.len().pow(dim as u32);
                let mut atoms = Vec::with_capacity(total);
                let mut weights = Vec::with_capacity(total);
                let mut idx = vec![0usize; dim];
                for _ in 0..total {
                    let mut a = Vec::with_capacity(dim);
                    let mut w = 1.0;
                    for (i, &k) in idx.iter().enumerate() {
                        let (u, wk) = unit[k];
                        a.push(b.lower[i] + u * (b.upper[i] - b.lower[i]));
                        w *= wk;
                    }
                    atoms.push(a);
                    weights.push(w);
                    // odometer, last coordinate fastest
                    for i in (0..dim).rev() {
                        idx[i] += 1;
                        if idx[i] < unit.len() {
                            break;
                        }
                        idx[i] = 0;
                    }
                }
                let s: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= s);
                DiscreteDistribution::new(atoms, weights)
            }
        }
    }

    pub fn shifted(&self, by: &[f64]) -> Law {
        match self {
            Law::Uniform(b) => Law::Uniform(UniformBox {
                lower: b.lower.iter().zip(by).map(|(x, d)| x + d).collect(),
                upper: b.upper.iter().zip(by).map(|(x, d)| x + d).collect(),
            }),
            Law::Discrete(d) => Law::Discrete(d.shifted(by)),
        }
    }

    /// Law of coordinate `i` when coordinates are independent.
    pub fn coordinate(&self, i: usize) -> Result<Law> {
        match self {
            Law::Uniform(b) => Ok(Law::Uniform(UniformBox {
                lower: vec![b.lower[i]],
                upper: vec![b.upper[i]],
            })),
            Law::Discrete(d) if d.dim() == 1 => Ok(self.clone()),
            Law::Discrete(_) => Err(Error::NotSeparable(
                "multi-dimensional discrete law is not a product".into(),
            )),
        }
    }

    /// Quantile map of coordinate `i` at `u` in `[0, 1]`. Defined for
    /// uniform boxes and one-dimensional discrete laws.
    pub fn quantile(&self, i: usize, u: f64) -> Result<f64> {
        match self {
            Law::Uniform(b) => Ok(b.lower[i] + u * (b.upper[i] - b.lower[i])),
            Law::Discrete(d) if d.dim() == 1 => {
                let mut pts: Vec<(f64, f64)> = d.iter().map(|(a, w)| (a[0], w)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut acc = 0.0;
                for &(x, w) in &pts {
                    acc += w;
                    if u <= acc {
                        return Ok(x);
                    }
                }
                Ok(pts.last().unwrap().0)
            }
            Law::Discrete(_) => Err(Error::NotApplicable(
                "quantile coupling needs a product law".into(),
            )),
        }
    }

    /// Breakpoints in `(0, 1)` where the quantile map of coordinate `i`
    /// jumps.
    pub fn quantile_breaks(&self, i: usize) -> Vec<f64> {
        match self {
            Law::Uniform(_) => Vec::new(),
            Law::Discrete(d) => {
                let m = d.marginal(i);
                let mut acc = 0.0;
                let mut out = Vec::new();
                for w in &m.weights()[..m.len() - 1] {
                    acc += w;
                    out.push(acc);
                }
                out
            }
        }
    }
}

impl From<DiscreteDistribution> for Law {
    fn from(d: DiscreteDistribution) -> Self {
        Law::Discrete(d)
    }
}

impl From<UniformBox> for Law {
    fn from(b: UniformBox) -> Self {
        Law::Uniform(b)
    }
}

/// User-supplied conditional law of `xi_t` given `xi_1..xi_{t-1}`.
pub type KernelFn = Arc<dyn Fn(&[&[f64]]) -> Result<Law> + Send + Sync>;

#[derive(Clone, Serialize, Deserialize)]
pub struct ExplicitKernel {
    pub name: String,
    pub dim: usize,
    #[serde(skip)]
    pub map: Option<KernelFn>,
}

impl fmt::Debug for ExplicitKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitKernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("attached", &self.map.is_some())
            .finish()
    }
}

/// Conditional law of one exogenous stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExogenousStage {
    /// Independent of the past.
    Marginal {
        law: Law,
    },
    /// `xi_t = sum_k weights[k] * xi_{k+1} + innovation`.
    AffineShift {
        weights: Vec<f64>,
        innovation: Law,
    },
    Explicit(ExplicitKernel),
}

impl ExogenousStage {
    pub fn dim(&self) -> usize {
        match self {
            ExogenousStage::Marginal { law } => law.dim(),
            ExogenousStage::AffineShift { innovation, .. } => innovation.dim(),
            ExogenousStage::Explicit(k) => k.dim,
        }
    }

    pub fn conditional(&self, history: &[&[f64]]) -> Result<Law> {
        match self {
            ExogenousStage::Marginal { law } => Ok(law.clone()),
            ExogenousStage::AffineShift {
                weights,
                innovation,
            } => {
                if weights.len() > history.len() {
                    return Err(Error::InvalidHistory(format!(
                        "kernel weighs {} past stages, history has {}",
                        weights.len(),
                        history.len()
                    )));
                }
                let mut shift = vec![0.0; innovation.dim()];
                for (w, h) in weights.iter().zip(history) {
                    if h.len() != shift.len() {
                        return Err(Error::InvalidHistory("history dimension mismatch".into()));
                    }
                    for (s, x) in shift.iter_mut().zip(h.iter()) {
                        *s += w * x;
                    }
                }
                Ok(innovation.shifted(&shift))
            }
            ExogenousStage::Explicit(k) => {
                let map = k.map.as_ref().ok_or_else(|| {
                    Error::EvaluatorError(format!("kernel `{}` has no attached map", k.name))
                })?;
                let law = map(history)?;
                if law.dim() != k.dim {
                    return Err(Error::InvalidDimension {
                        what: format!("kernel `{}`", k.name),
                        expected: k.dim,
                        got: law.dim(),
                    });
                }
                Ok(law)
            }
        }
    }

    /// Atom count of a conditional after discretization, if known without
    /// evaluating the kernel.
    fn atom_count(&self, n_per_dim: usize) -> Option<usize> {
        match self {
            ExogenousStage::Marginal { law } => Some(law.atom_count(n_per_dim)),
            ExogenousStage::AffineShift { innovation, .. } => {
                Some(innovation.atom_count(n_per_dim))
            }
            ExogenousStage::Explicit(_) => None,
        }
    }

    /// Lipschitz modulus of the kernel in Kantorovich distance, when it can
    /// be read off the stage description.
    pub fn kernel_modulus(&self) -> Option<f64> {
        match self {
            ExogenousStage::Marginal { .. } => Some(0.0),
            ExogenousStage::AffineShift { weights, .. } => {
                Some(weights.iter().map(|w| w.abs()).sum())
            }
            ExogenousStage::Explicit(_) => None,
        }
    }
}

/// Exogenous process `xi_1..xi_T`; `stages[t-1]` describes `xi_t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExogenousProcess {
    pub stages: Vec<ExogenousStage>,
}

impl ExogenousProcess {
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    /// Law of `xi_t` (1-based `t`) given `xi_1..xi_{t-1}`.
    pub fn conditional(&self, t: usize, history: &[&[f64]]) -> Result<Law> {
        if t == 0 || t > self.stages.len() {
            return Err(Error::InvalidHistory(format!("stage {t} out of range")));
        }
        if history.len() != t - 1 {
            return Err(Error::InvalidHistory(format!(
                "stage {t} needs {} past values, got {}",
                t - 1,
                history.len()
            )));
        }
        self.stages[t - 1].conditional(history)
    }

    pub fn kernel_moduli(&self) -> Option<Vec<f64>> {
        self.stages
            .iter()
            .map(ExogenousStage::kernel_modulus)
            .collect()
    }
}

/// Laws of `zeta_0..zeta_T`; `laws[t]` is the law of `zeta_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndogenousProcess {
    pub laws: Vec<Law>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Root,
    Exogenous,
    Endogenous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub stage: usize,
    pub kind: NodeKind,
    pub value: Vec<f64>,
    /// Probability conditional on the parent.
    pub prob: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Materialized scenario tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTree {
    pub horizon: usize,
    pub nodes: Vec<TreeNode>,
}

impl ScenarioTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node counts per depth, root first.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut layer = vec![0usize];
        while !layer.is_empty() {
            sizes.push(layer.len());
            layer = layer
                .iter()
                .flat_map(|&i| self.nodes[i].children.iter().copied())
                .collect();
        }
        sizes
    }

    /// Unconditional probability of reaching `id`.
    pub fn path_prob(&self, id: usize) -> f64 {
        let mut p = 1.0;
        let mut cur = Some(id);
        while let Some(i) = cur {
            p *= self.nodes[i].prob;
            cur = self.nodes[i].parent;
        }
        p
    }

    /// Exogenous values on the path to `id`, oldest first.
    pub fn xi_history(&self, id: usize) -> Vec<&[f64]> {
        let mut out = Vec::new();
        let mut cur = Some(id);
        while let Some(i) = cur {
            if self.nodes[i].kind == NodeKind::Exogenous {
                out.push(self.nodes[i].value.as_slice());
            }
            cur = self.nodes[i].parent;
        }
        out.reverse();
        out
    }

    /// Ids of all nodes at a given depth.
    pub fn layer(&self, depth: usize) -> Vec<usize> {
        let mut layer = vec![0usize];
        for _ in 0..depth {
            layer = layer
                .iter()
                .flat_map(|&i| self.nodes[i].children.iter().copied())
                .collect();
        }
        layer
    }

    /// Route of child indices from the root, e.g. `"0/2/1"`.
    pub fn path_label(&self, id: usize) -> String {
        let mut parts = Vec::new();
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            let k = self.nodes[p]
                .children
                .iter()
                .position(|&c| c == cur)
                .unwrap();
            parts.push(k.to_string());
            cur = p;
        }
        parts.reverse();
        if parts.is_empty() {
            "root".into()
        } else {
            parts.join("/")
        }
    }

    /// True when every node has only exogenous children below the root.
    pub fn is_exogenous_only(&self) -> bool {
        self.nodes
            .iter()
            .skip(1)
            .all(|n| n.kind == NodeKind::Exogenous)
    }

    fn push(
        &mut self,
        parent: usize,
        stage: usize,
        kind: NodeKind,
        value: Vec<f64>,
        prob: f64,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            stage,
            kind,
            value,
            prob,
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn new_root(horizon: usize) -> Self {
        ScenarioTree {
            horizon,
            nodes: vec![TreeNode {
                stage: 0,
                kind: NodeKind::Root,
                value: Vec::new(),
                prob: 1.0,
                parent: None,
                children: Vec::new(),
            }],
        }
    }
}

/// How continuous laws are discretized into trees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub n_per_dim: usize,
    pub rule: QuadratureRule,
    pub node_budget: usize,
}

impl TreeSpec {
    pub fn new(n_per_dim: usize, rule: QuadratureRule) -> Self {
        TreeSpec {
            n_per_dim,
            rule,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

fn predicted_size(layer_counts: &[Option<usize>]) -> Option<usize> {
    let mut total: usize = 1;
    let mut width: usize = 1;
    for c in layer_counts {
        width = width.checked_mul((*c)?)?;
        total = total.checked_add(width)?;
    }
    Some(total)
}

/// Tree alternating `zeta_0, xi_1, zeta_1, ..., xi_T, zeta_T` layers.
pub fn build_joint_tree(
    exo: &ExogenousProcess,
    endo: &EndogenousProcess,
    spec: &TreeSpec,
) -> Result<ScenarioTree> {
    let horizon = exo.horizon();
    if endo.laws.len() != horizon + 1 {
        return Err(Error::InvalidDimension {
            what: "endogenous laws".into(),
            expected: horizon + 1,
            got: endo.laws.len(),
        });
    }
    let mut counts = vec![Some(endo.laws[0].atom_count(spec.n_per_dim))];
    for t in 1..=horizon {
        counts.push(exo.stages[t - 1].atom_count(spec.n_per_dim));
        counts.push(Some(endo.laws[t].atom_count(spec.n_per_dim)));
    }
    check_budget(&counts, spec.node_budget)?;

    let zeta: Vec<DiscreteDistribution> = endo
        .laws
        .iter()
        .map(|l| l.discretize(spec.n_per_dim, spec.rule))
        .collect::<Result<_>>()?;

    let mut tree = ScenarioTree::new_root(horizon);
    let mut frontier = vec![0usize];
    for t in 0..=horizon {
        if t > 0 {
            let mut next = Vec::new();
            for &parent in &frontier {
                let law = {
                    let hist = tree.xi_history(parent);
                    exo.conditional(t, &hist)?
                };
                let d = law.discretize(spec.n_per_dim, spec.rule)?;
                for (a, w) in d.iter() {
                    next.push(tree.push(parent, t, NodeKind::Exogenous, a.to_vec(), w));
                }
                if tree.len() > spec.node_budget {
                    return Err(Error::BudgetExceeded {
                        needed: tree.len(),
                        budget: spec.node_budget,
                    });
                }
            }
            frontier = next;
        }
        let mut next = Vec::with_capacity(frontier.len() * zeta[t].len());
        for &parent in &frontier {
            for (a, w) in zeta[t].iter() {
                next.push(tree.push(parent, t, NodeKind::Endogenous, a.to_vec(), w));
            }
        }
        frontier = next;
    }
    Ok(tree)
}

/// Tree of the exogenous process alone: root then `xi_1..xi_T` layers.
pub fn build_exogenous_tree(exo: &ExogenousProcess, spec: &TreeSpec) -> Result<ScenarioTree> {
    let horizon = exo.horizon();
    let counts: Vec<Option<usize>> = exo
        .stages
        .iter()
        .map(|s| s.atom_count(spec.n_per_dim))
        .collect();
    check_budget(&counts, spec.node_budget)?;
    let mut tree = ScenarioTree::new_root(horizon);
    let mut frontier = vec![0usize];
    for t in 1..=horizon {
        let mut next = Vec::new();
        for &parent in &frontier {
            let law = {
                let hist = tree.xi_history(parent);
                exo.conditional(t, &hist)?
            };
            let d = law.discretize(spec.n_per_dim, spec.rule)?;
            for (a, w) in d.iter() {
                next.push(tree.push(parent, t, NodeKind::Exogenous, a.to_vec(), w));
            }
            if tree.len() > spec.node_budget {
                return Err(Error::BudgetExceeded {
                    needed: tree.len(),
                    budget: spec.node_budget,
                });
            }
        }
        frontier = next;
    }
    Ok(tree)
}

fn check_budget(counts: &[Option<usize>], budget: usize) -> Result<()> {
    if counts.iter().all(Option::is_some) {
        match predicted_size(counts) {
            Some(n) if n <= budget => Ok(()),
            Some(n) => Err(Error::BudgetExceeded { needed: n, budget }),
            None => Err(Error::BudgetExceeded {
                needed: usize::MAX,
                budget,
            }),
        }
    } else {
        Ok(())
    }
}

/// Conditional law of `xi_t` given a history, as exposed operation.
pub fn conditional_distribution(
    process: &ExogenousProcess,
    t: usize,
    history: &[&[f64]],
) -> Result<Law> {
    process.conditional(t, history)
}

/// Discretization of a law, as exposed operation.
pub fn discretize(
    law: &Law,
    n_per_dim: usize,
    rule: QuadratureRule,
) -> Result<DiscreteDistribution> {
    law.discretize(n_per_dim, rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_atoms_of_unit_square() {
        let law = Law::uniform(vec![-2.0, -2.0], vec![0.0, 0.0]).unwrap();
        let d = law.discretize(2, QuadratureRule::Midpoint).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.atoms()[0], vec![-1.5, -1.5]);
        assert_eq!(d.atoms()[3], vec![-0.5, -0.5]);
        assert!(d.weights().iter().all(|w| (*w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn gauss_nodes_integrate_cubics() {
        let nodes = QuadratureRule::GaussLegendre.unit_nodes(2).unwrap();
        let v: f64 = nodes.iter().map(|(u, w)| w * u.powi(3)).sum();
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(DiscreteDistribution::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.6]).is_err());
        assert!(
            DiscreteDistribution::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err()
        );
    }

    #[test]
    fn zero_weights_are_dropped() {
        let d = DiscreteDistribution::new(vec![vec![0.0], vec![1.0]], vec![1.0, 0.0]).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn affine_shift_conditional() {
        let stage = ExogenousStage::AffineShift {
            weights: vec![1.0],
            innovation: Law::uniform(vec![-1.0], vec![1.0]).unwrap(),
        };
        let h = [0.5];
        let law = stage.conditional(&[&h]).unwrap();
        assert_eq!(law, Law::uniform(vec![-0.5], vec![1.5]).unwrap());
    }

    #[test]
    fn quantile_of_discrete() {
        let law: Law = DiscreteDistribution::new(vec![vec![2.0], vec![1.0]], vec![0.25, 0.75])
            .unwrap()
            .into();
        assert_eq!(law.quantile(0, 0.5).unwrap(), 1.0);
        assert_eq!(law.quantile(0, 0.9).unwrap(), 2.0);
        assert_eq!(law.quantile_breaks(0), vec![0.75]);
    }
}
