//! Distances between laws, processes and trees.

use mspmdp::examples::{build_example, ExampleId};
use mspmdp::metrics::*;
use mspmdp::stochastic::*;

fn d1(atoms: &[f64], w: &[f64]) -> DiscreteDistribution {
    DiscreteDistribution::new(atoms.iter().map(|a| vec![*a]).collect(), w.to_vec()).unwrap()
}

fn marginal_process(laws: Vec<Law>) -> ExogenousProcess {
    ExogenousProcess {
        stages: laws.into_iter().map(|law| ExogenousStage::Marginal { law }).collect(),
    }
}

#[test]
fn uniform_kantorovich_matches_quadrature() {
    let a = UniformBox::new(vec![-2.0, 0.0], vec![0.0, 1.0]).unwrap();
    let b = UniformBox::new(vec![-1.9, 0.1], vec![0.05, 1.2]).unwrap();
    let exact = kantorovich_uniform_affine(&a, &b).unwrap();
    let approx = kantorovich_law(&Law::Uniform(a), &Law::Uniform(b), 16).unwrap();
    assert!((exact - approx).abs() < 5e-3, "{exact} vs {approx}");
}

#[test]
fn transport_plan_conserves_mass() {
    let p = d1(&[0.0, 1.0, 3.0], &[0.2, 0.5, 0.3]);
    let q = d1(&[0.5, 2.0], &[0.6, 0.4]);
    let cost: Vec<Vec<f64>> = p.atoms().iter().map(|x| q.atoms().iter().map(|y| (x[0] - y[0]).abs()).collect()).collect();
    let plan = solve_transport(p.weights(), q.weights(), &cost).unwrap();
    for (i, w) in p.weights().iter().enumerate() {
        let out: f64 = plan.flows.iter().filter(|f| f.0 == i).map(|f| f.2).sum();
        assert!((out - w).abs() < 1e-12);
    }
    assert!((plan.cost - kantorovich_1d(&p, &q).unwrap()).abs() < 1e-12);
}

#[test]
fn nested_distance_of_a_tree_with_itself_is_zero() {
    let (inst, _) = build_example(&ExampleId::Linear42a { kappa: 11.0 }, false).unwrap();
    let spec = TreeSpec::new(3, QuadratureRule::Midpoint);
    let t = build_exogenous_tree(&inst.exogenous, &spec).unwrap();
    assert!(nested_distance(&t, &t).unwrap().abs() < 1e-12);
}

#[test]
fn nested_distance_is_symmetric_and_dominates_stage_one() {
    let p = marginal_process(vec![Law::Discrete(d1(&[0.0, 1.0], &[0.5, 0.5])), Law::Discrete(d1(&[0.0], &[1.0]))]);
    let q = marginal_process(vec![Law::Discrete(d1(&[0.2, 1.5], &[0.5, 0.5])), Law::Discrete(d1(&[0.1], &[1.0]))]);
    let spec = TreeSpec::new(2, QuadratureRule::Midpoint);
    let (tp, tq) = (build_exogenous_tree(&p, &spec).unwrap(), build_exogenous_tree(&q, &spec).unwrap());
    let (a, b) = (nested_distance(&tp, &tq).unwrap(), nested_distance(&tq, &tp).unwrap());
    assert!((a - b).abs() < 1e-12);
    let first = kantorovich_1d(&d1(&[0.0, 1.0], &[0.5, 0.5]), &d1(&[0.2, 1.5], &[0.5, 0.5])).unwrap();
    assert!(a >= first - 1e-12, "{a} < {first}");
}

#[test]
fn coupled_wasserstein_of_a_shift() {
    let base = vec![Law::uniform(vec![0.0], vec![1.0]).unwrap(), Law::uniform(vec![-1.0], vec![1.0]).unwrap()];
    let shifted: Vec<Law> = base.iter().map(|l| l.shifted(&[0.25])).collect();
    let (p, q) = (marginal_process(base), marginal_process(shifted));
    for r in [1.0, 3.0] {
        let w = coupled_wasserstein(&p, &q, r, 4).unwrap();
        let want = (2.0 * 0.25f64.powf(r)).powf(1.0 / r);
        assert!((w - want).abs() < 1e-9, "r = {r}: {w} vs {want}");
    }
    assert!((coupled_path_distance(&p, &q, 4).unwrap() - 0.25).abs() < 1e-9);
    assert!(coupled_wasserstein(&p, &q, 0.5, 4).is_err());
}

#[test]
fn invalid_exponents_are_rejected() {
    let p = d1(&[0.0], &[1.0]);
    assert!(ot_distance(&p, &p, GroundCost::Power(0.5)).is_err());
    assert!(ot_distance(&p, &p, GroundCost::FortetMourier(f64::NAN)).is_err());
    let q = DiscreteDistribution::new(vec![vec![0.0, 1.0]], vec![1.0]).unwrap();
    assert!(ot_distance(&p, &q, GroundCost::InfNorm).is_err());
    assert!(kantorovich_1d(&q, &q).is_err());
}
