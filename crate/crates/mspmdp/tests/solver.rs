//! Solver against policy evaluation, closed-form policies and brute force.

mod common;

use common::*;
use mspmdp::error::Error;
use mspmdp::examples::{analytic_policy, build_example, ExampleId};
use mspmdp::oracle::brute_force_solve;
use mspmdp::solver::*;
use mspmdp::stochastic::{build_joint_tree, QuadratureRule, TreeSpec};

fn cfg(atoms: usize) -> SolverConfig {
    SolverConfig {
        tree: TreeSpec::new(atoms, QuadratureRule::Midpoint),
        ..Default::default()
    }
}

#[test]
fn recorded_policy_reproduces_the_value() {
    let (inst, _) = build_example(&ExampleId::Linear42a { kappa: 11.0 }, false).unwrap();
    let sub = inst.coordinate(0).unwrap();
    let tree = build_joint_tree(&sub.exogenous, &sub.endogenous, &cfg(3).tree).unwrap();
    let rep = solve_nested(&sub, &tree, &cfg(3)).unwrap();
    let v = evaluate_policy(&sub, &tree, &rep.policy).unwrap();
    assert!((v - rep.value).abs() < 1e-9, "{v} vs {}", rep.value);
    assert!((optimal_value(&sub, &tree, &cfg(3)).unwrap() - rep.value).abs() < 1e-12);
}

#[test]
fn split_solve_sums_coordinates() {
    let (inst, _) = build_example(&ExampleId::Linear42b, false).unwrap();
    let rep = solve(&inst, &cfg(2)).unwrap();
    assert_eq!(rep.coordinates.len(), 2);
    let sum: f64 = rep.coordinates.iter().map(|c| c.value).sum();
    assert!((sum - rep.value).abs() < 1e-12);
}

#[test]
fn closed_form_policy_is_optimal_on_the_tree() {
    for id in [ExampleId::Linear41 { alpha: 10 }, ExampleId::Linear42a { kappa: 11.0 }] {
        let (inst, _) = build_example(&id, false).unwrap();
        let sub = inst.coordinate(0).unwrap();
        let tree = build_joint_tree(&sub.exogenous, &sub.endogenous, &cfg(3).tree).unwrap();
        let pol = tabulate_policy(&sub, &tree, |p| analytic_policy(&id, p)).unwrap();
        let v_pol = evaluate_policy(&sub, &tree, &pol).unwrap();
        let v_opt = solve_nested(&sub, &tree, &cfg(3)).unwrap().value;
        assert!(v_opt <= v_pol + 1e-6, "{id}: solver {v_opt} above policy {v_pol}");
        assert!(v_pol - v_opt < 1e-3, "{id}: policy {v_pol} far from {v_opt}");
    }
}

#[test]
fn brute_force_never_beats_the_solver_by_much() {
    for k in 0..4 {
        let inst = equivalence_instance(k);
        let tree = tree_of(&inst);
        let v = solve_nested(&inst, &tree, &suite_solver()).unwrap().value;
        let b = brute_force_solve(&inst, &tree, &brute_cfg(1)).unwrap().value;
        assert!(b >= v - 1e-5, "instance {k}: brute force {b} below solver {v}");
        assert!(b - v <= 0.05);
    }
}

#[test]
fn value_function_needs_a_decision_node() {
    let inst = equivalence_instance(0);
    let tree = tree_of(&inst);
    let r = value_function(&inst, &tree, &suite_solver(), 1, &[0.0], &[0.0]);
    assert!(matches!(r, Err(Error::InvalidHistory(_))));
}

#[test]
fn analytic_solve_is_close_to_the_generic_solver_on_43() {
    let a = analytic_solve(&ExampleId::Nonlinear43, false).unwrap();
    let g = solve(&build_example(&ExampleId::Nonlinear43, false).unwrap().0, &cfg(3)).unwrap().value;
    assert!((a - g).abs() < 5e-2, "{a} vs {g}");
}
