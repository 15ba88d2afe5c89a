//! Random small instances shared by the integration suites.
#![allow(dead_code)]

use mspmdp::linalg::Matrix;
use mspmdp::model::*;
use mspmdp::stochastic::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HORIZON: usize = 2;
/// Largest |xi_t| and |zeta_t| produced by the generator.
const XI_MAX: f64 = 1.5;
const S_MAX: f64 = 2.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vec_in(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(lo..hi)).collect()
}

fn two_atoms(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Law {
    let w = r.random_range(0.3..0.7);
    Law::Discrete(DiscreteDistribution::new(vec![vec_in(r, n, lo, hi), vec_in(r, n, lo, hi)], vec![w, 1.0 - w]).unwrap())
}

/// Knobs of [`random_instance`].
#[derive(Clone, Copy)]
pub struct Shape {
    pub dim: usize,
    /// Nonnegative state coefficients everywhere, so `v_t` is nondecreasing
    /// in the previous state.
    pub monotone: bool,
}

/// T = 2 instance with two atoms per layer, affine costs, transitions and
/// coupling constraints inside the box `[-1, 1]^n`, and diagonal data.
pub fn random_instance(r: &mut ChaCha8Rng, shape: Shape) -> ProblemInstance {
    let n = shape.dim;
    let s_lo = if shape.monotone { 0.0 } else { -0.3 };
    let mut stages = Vec::new();
    let mut rho = f64::INFINITY;
    for t in 0..=HORIZON {
        let a_s = vec_in(r, n, if shape.monotone { 0.0 } else { -1.0 }, 1.0);
        let a_xi = (0..t).map(|_| vec_in(r, n, -1.0, 1.0)).collect();
        let cost = Cost::AffineCost(AffineCost {
            a_s,
            a_x: vec_in(r, n, -2.0, 2.0),
            a_xi,
            a_z: vec_in(r, n, -1.0, 1.0),
            b: 0.0,
        });
        let mut constraints = vec![Constraint::BoxConstraint(BoxConstraint::cube(-1.0, 1.0, n))];
        if t > 0 {
            let b = vec_in(r, n, -0.3, 0.3);
            let c = vec_in(r, n, s_lo, 0.3);
            let d = vec_in(r, n, -0.3, 0.3);
            let kappa = vec_in(r, n, 0.2, 1.0);
            // margin at x = -0.9 over the whole reachable range
            for i in 0..n {
                let m = kappa[i] + 0.9 - b[i].abs() - c[i].abs() * S_MAX - d[i].abs() * XI_MAX;
                rho = rho.min(m);
            }
            constraints.push(Constraint::AffineInequality(AffineInequality {
                a: Matrix::identity(n),
                b: Matrix::diag(&b),
                c: Matrix::diag(&c),
                d: Matrix::diag(&d),
                kappa,
            }));
        }
        let transition = (t < HORIZON).then(|| {
            Transition::AffineTransition(AffineTransition {
                m1: Matrix::diag(&vec_in(r, n, s_lo, 0.3)),
                m2: Matrix::diag(&vec_in(r, n, -0.3, 0.3)),
                n1: (t > 0).then(|| Matrix::diag(&vec_in(r, n, -0.2, 0.2))),
                n2: Matrix::diag(&vec_in(r, n, -0.2, 0.2)),
                offset: None,
            })
        });
        stages.push(StageSpec {
            dims: StageDims {
                state: n,
                decision: n,
                xi: if t == 0 { 0 } else { n },
                zeta: n,
            },
            cost,
            constraints,
            transition,
            slater_point: None,
        });
    }
    assert!(rho > 0.0, "generator must keep a Slater margin");
    let exogenous = ExogenousProcess {
        stages: vec![
            ExogenousStage::Marginal {
                law: two_atoms(r, n, -1.0, 1.0),
            },
            ExogenousStage::AffineShift {
                weights: vec![r.random_range(-0.5..0.5)],
                innovation: two_atoms(r, n, -1.0, 1.0),
            },
        ],
    };
    let endogenous = EndogenousProcess {
        laws: (0..=HORIZON).map(|_| two_atoms(r, n, -1.0, 1.0)).collect(),
    };
    let inst = ProblemInstance {
        name: Some("random".into()),
        horizon: HORIZON,
        initial_state: vec![0.0; n],
        stages,
        exogenous,
        endogenous,
        regularity: RegularityData {
            rho: Some(rho),
            ..Default::default()
        },
        separable: false,
    };
    inst.validate().unwrap();
    inst
}

fn shift_law(r: &mut ChaCha8Rng, law: &Law, size: f64) -> Law {
    match law {
        Law::Discrete(d) => {
            let atoms = d
                .atoms()
                .iter()
                .map(|a| a.iter().map(|v| (v + r.random_range(-size..size)).clamp(-1.0, 1.0)).collect())
                .collect();
            Law::Discrete(DiscreteDistribution::new(atoms, d.weights().to_vec()).unwrap())
        }
        Law::Uniform(_) => law.clone(),
    }
}

/// Which distributions a perturbation touches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Source {
    Exogenous,
    Endogenous,
}

/// Copy of `inst` with atoms moved by at most `size`.
pub fn perturb(r: &mut ChaCha8Rng, inst: &ProblemInstance, source: Source, size: f64) -> ProblemInstance {
    let mut out = inst.clone();
    match source {
        Source::Exogenous => {
            for st in &mut out.exogenous.stages {
                match st {
                    ExogenousStage::Marginal { law } => *law = shift_law(r, law, size),
                    ExogenousStage::AffineShift { innovation, .. } => *innovation = shift_law(r, innovation, size),
                    ExogenousStage::Explicit(_) => {}
                }
            }
        }
        Source::Endogenous => {
            for law in &mut out.endogenous.laws {
                *law = shift_law(r, law, size);
            }
        }
    }
    out
}

/// Solver settings of the randomized suites. Diagonal instances have one
/// minimizer basin, so a single start suffices.
pub fn suite_solver() -> mspmdp::solver::SolverConfig {
    mspmdp::solver::SolverConfig {
        tolerance: 1e-5,
        multi_start: 1,
        tree: TreeSpec::new(2, QuadratureRule::Midpoint),
        ..Default::default()
    }
}

pub fn tree_of(inst: &ProblemInstance) -> ScenarioTree {
    build_joint_tree(&inst.exogenous, &inst.endogenous, &TreeSpec::new(2, QuadratureRule::Midpoint)).unwrap()
}

pub fn brute_cfg(dim: usize) -> mspmdp::oracle::BruteForceConfig {
    if dim == 1 {
        mspmdp::oracle::BruteForceConfig::new(9).with_zoom(8)
    } else {
        mspmdp::oracle::BruteForceConfig::new(5).with_zoom(8)
    }
}

pub const EQUIVALENCE_COUNT: usize = 20;
pub const DOMINANCE_COUNT: usize = 20;
pub const TRANSPORT_COUNT: usize = 1000;

/// Instance `k` of the solver-equivalence suite: ten 1-D, then ten 2-D.
pub fn equivalence_instance(k: usize) -> ProblemInstance {
    let dim = if k < EQUIVALENCE_COUNT / 2 { 1 } else { 2 };
    random_instance(&mut rng(100 + k as u64), Shape { dim, monotone: false })
}

/// Pair `k` of the dominance suite; even pairs move exogenous atoms.
pub fn dominance_pair(k: usize) -> (ProblemInstance, ProblemInstance, Source) {
    let mut r = rng(200 + k as u64);
    let base = random_instance(&mut r, Shape { dim: 1, monotone: false });
    let source = if k % 2 == 0 { Source::Exogenous } else { Source::Endogenous };
    let pert = perturb(&mut r, &base, source, 0.1);
    (base, pert, source)
}

/// Transport problem `k`: up to four atoms per side in one or two
/// dimensions.
pub fn transport_problem(k: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    let mut r = rng(300_000 + k as u64);
    let dim = r.random_range(1..=2);
    let law = |r: &mut ChaCha8Rng| {
        let m = r.random_range(1..=4);
        let atoms = (0..m).map(|_| vec_in(r, dim, -2.0, 2.0)).collect();
        let w: Vec<f64> = (0..m).map(|_| r.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        DiscreteDistribution::new(atoms, w.iter().map(|x| x / total).collect()).unwrap()
    };
    (law(&mut r), law(&mut r))
}

/// Brute-force values computed by the `oracle` suite.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleFixtures {
    pub equivalence: Vec<f64>,
    /// `(base, perturbed)` brute-force values of the dominance pairs.
    pub dominance: Vec<(f64, f64)>,
    /// Inventory (T = 2) base and perturbed brute-force values.
    pub inventory: (f64, f64),
    pub transport: Vec<f64>,
}

pub const FIXTURE_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/oracle.json");

pub fn load_fixtures() -> OracleFixtures {
    let text = std::fs::read_to_string(FIXTURE_PATH)
        .expect("oracle fixtures missing; run the oracle suite with MSPMDP_REGEN_FIXTURES=1");
    serde_json::from_str(&text).unwrap()
}

pub fn inventory_pair() -> (ProblemInstance, ProblemInstance) {
    use mspmdp::examples::{build_example, ExampleId};
    let id = ExampleId::Inventory { horizon: 2 };
    (build_example(&id, false).unwrap().0, build_example(&id, true).unwrap().0)
}

pub fn brute_value(inst: &ProblemInstance) -> f64 {
    let dim = inst.stages[0].dims.decision;
    mspmdp::oracle::brute_force_solve(inst, &tree_of(inst), &brute_cfg(dim)).unwrap().value
}
