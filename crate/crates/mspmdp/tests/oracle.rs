//! Brute-force oracles and their fixture file.
//!
//! `MSPMDP_REGEN_FIXTURES=1 cargo test -p mspmdp --test oracle` recomputes
//! every value; otherwise a sample is recomputed and compared.

mod common;

use common::*;
use mspmdp::examples::{build_example, ExampleId};
use mspmdp::metrics::{ot_distance, GroundCost};
use mspmdp::oracle::{brute_force_solve, ot_brute_force, BruteForceConfig};
use mspmdp::solver::{solve_nested, SolverConfig};
use mspmdp::stochastic::{build_joint_tree, QuadratureRule, TreeSpec};

fn compute_all() -> OracleFixtures {
    let equivalence = (0..EQUIVALENCE_COUNT).map(|k| brute_value(&equivalence_instance(k))).collect();
    let dominance = (0..DOMINANCE_COUNT)
        .map(|k| {
            let (a, b, _) = dominance_pair(k);
            (brute_value(&a), brute_value(&b))
        })
        .collect();
    let (ia, ib) = inventory_pair();
    let transport = (0..TRANSPORT_COUNT)
        .map(|k| {
            let (p, q) = transport_problem(k);
            ot_brute_force(&p, &q, GroundCost::InfNorm).unwrap()
        })
        .collect();
    OracleFixtures {
        equivalence,
        dominance,
        inventory: (brute_value(&ia), brute_value(&ib)),
        transport,
    }
}

#[test]
fn fixtures_match_oracles() {
    if std::env::var("MSPMDP_REGEN_FIXTURES").as_deref() == Ok("1") {
        let fx = compute_all();
        std::fs::create_dir_all(std::path::Path::new(FIXTURE_PATH).parent().unwrap()).unwrap();
        std::fs::write(FIXTURE_PATH, serde_json::to_string_pretty(&fx).unwrap()).unwrap();
        return;
    }
    let fx = load_fixtures();
    assert_eq!(fx.equivalence.len(), EQUIVALENCE_COUNT);
    assert_eq!(fx.dominance.len(), DOMINANCE_COUNT);
    assert_eq!(fx.transport.len(), TRANSPORT_COUNT);
    for k in [0, 3] {
        assert!((brute_value(&equivalence_instance(k)) - fx.equivalence[k]).abs() < 1e-12);
    }
    let (a, _, _) = dominance_pair(1);
    assert!((brute_value(&a) - fx.dominance[1].0).abs() < 1e-12);
    let (ia, _) = inventory_pair();
    assert!((brute_value(&ia) - fx.inventory.0).abs() < 1e-12);
    for k in (0..TRANSPORT_COUNT).step_by(97) {
        let (p, q) = transport_problem(k);
        assert!((ot_brute_force(&p, &q, GroundCost::InfNorm).unwrap() - fx.transport[k]).abs() < 1e-12);
    }
}

#[test]
fn constant_cost_gives_the_constant() {
    let (inst, _) = build_example(&ExampleId::Linear42b, false).unwrap();
    let mut inst = inst.coordinate(0).unwrap();
    for st in &mut inst.stages {
        if let mspmdp::model::Cost::AffineCost(c) = &mut st.cost {
            c.a_s.iter_mut().for_each(|v| *v = 0.0);
            c.a_x.iter_mut().for_each(|v| *v = 0.0);
            c.a_z.iter_mut().for_each(|v| *v = 0.0);
            c.a_xi.iter_mut().flatten().for_each(|v| *v = 0.0);
            c.b = 1.25;
        }
    }
    let tree = build_joint_tree(&inst.exogenous, &inst.endogenous, &TreeSpec::new(2, QuadratureRule::Midpoint)).unwrap();
    for g in [2, 7] {
        let v = brute_force_solve(&inst, &tree, &BruteForceConfig::new(g)).unwrap().value;
        assert!((v - 3.0 * 1.25).abs() < 1e-12, "{v}");
    }
}

#[test]
fn tiny_42a_tree_agrees_with_solver() {
    let (inst, _) = build_example(&ExampleId::Linear42a { kappa: 11.0 }, false).unwrap();
    let sub = inst.coordinate(0).unwrap();
    let tree = build_joint_tree(&sub.exogenous, &sub.endogenous, &TreeSpec::new(2, QuadratureRule::Midpoint)).unwrap();
    let brute = brute_force_solve(&sub, &tree, &BruteForceConfig::new(21).with_zoom(4)).unwrap().value;
    let nested = solve_nested(&sub, &tree, &SolverConfig::default()).unwrap().value;
    assert!((brute - nested).abs() < 0.05, "{brute} vs {nested}");
    // the grid contains only feasible points, so it never beats the solver
    // by more than the solver tolerance
    assert!(brute >= nested - 1e-5);
}

#[test]
fn budget_is_enforced() {
    let (inst, _) = build_example(&ExampleId::Linear42a { kappa: 11.0 }, false).unwrap();
    let tree = build_joint_tree(&inst.exogenous, &inst.endogenous, &TreeSpec::new(2, QuadratureRule::Midpoint)).unwrap();
    let cfg = BruteForceConfig { budget: 1000, ..BruteForceConfig::new(41) };
    assert!(matches!(
        brute_force_solve(&inst, &tree, &cfg),
        Err(mspmdp::Error::BudgetExceeded { .. })
    ));
}

#[test]
fn transport_oracle_agrees_on_a_sample() {
    for k in 0..200 {
        let (p, q) = transport_problem(k);
        let a = ot_distance(&p, &q, GroundCost::InfNorm).unwrap();
        let b = ot_brute_force(&p, &q, GroundCost::InfNorm).unwrap();
        assert!((a - b).abs() < 1e-9, "problem {k}: {a} vs {b}");
    }
}
