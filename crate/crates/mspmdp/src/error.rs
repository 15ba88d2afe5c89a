use thiserror::Error;

/// Errors raised while building, solving or analysing an instance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: expected dimension {expected}, got {got}")]
    InvalidDimension {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("evaluator failed: {0}")]
    EvaluatorError(String),

    #[error("missing regularity constant `{0}`")]
    MissingRegularity(&'static str),

    #[error("declared Slater point is not strictly feasible (margin {margin})")]
    SlaterViolation { margin: f64 },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("node budget exceeded: tree needs {needed} nodes, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("no feasible decision at stage {stage}")]
    Infeasible { stage: usize },

    #[error("coordinate descent hit the sweep limit ({0} sweeps)")]
    MaxIterations(usize),

    #[error("policy decision at node {node} violates the stage constraints (residual {residual})")]
    PolicyInfeasible { node: usize, residual: f64 },

    #[error("policy has no decision for node {0}")]
    MissingDecision(usize),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("invalid trees: {0}")]
    InvalidTrees(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("growth condition required for solution bounds")]
    MissingGrowth,

    #[error("invalid exponent {0}")]
    InvalidExponent(f64),

    #[error("invalid modulus {0}")]
    InvalidModulus(f64),

    #[error("instance is not separable: {0}")]
    NotSeparable(String),

    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
