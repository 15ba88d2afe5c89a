//! Built-in examples: construction, parsing and reference values.

use mspmdp::error::Error;
use mspmdp::examples::{build_example, ExampleId};
use mspmdp::model::derive_regularity;
use mspmdp::reproduce::{compare_markdown, compare_rows, reproduce, ReproduceConfig};

#[test]
fn ids_parse_back_from_their_names() {
    for id in ExampleId::all() {
        let back: ExampleId = id.to_string().parse().unwrap();
        assert_eq!(back, id);
    }
    let id: ExampleId = "4.1:alpha=2".parse().unwrap();
    assert_eq!(id, ExampleId::Linear41 { alpha: 2 });
    assert!(matches!("4.9".parse::<ExampleId>(), Err(Error::UnknownExample(_))));
}

#[test]
fn perturbed_instances_differ_only_in_distributions() {
    for id in ExampleId::all() {
        let (a, _) = build_example(&id, false).unwrap();
        let (b, _) = build_example(&id, true).unwrap();
        a.validate().unwrap();
        b.validate().unwrap();
        assert_eq!(a.horizon, b.horizon);
        assert_eq!(a.initial_state, b.initial_state);
        let moved = serde_json::to_value(&a.exogenous).unwrap() != serde_json::to_value(&b.exogenous).unwrap()
            || serde_json::to_value(&a.endogenous).unwrap() != serde_json::to_value(&b.endogenous).unwrap();
        assert!(moved, "{id}");
        derive_regularity(&a).unwrap();
    }
}

#[test]
fn slater_margin_of_41_scales_with_alpha() {
    for alpha in [1u32, 4, 10] {
        let (inst, fx) = build_example(&ExampleId::Linear41 { alpha }, false).unwrap();
        let rho = derive_regularity(&inst).unwrap().rho.unwrap();
        assert!((rho - 5f64.powi(alpha as i32)).abs() <= 1e-9 * rho);
        assert!((fx.value("rho") - rho).abs() <= 1e-9 * rho);
    }
}

#[test]
fn inventory_has_no_reference_values() {
    let r = reproduce(&ExampleId::Inventory { horizon: 2 }, &ReproduceConfig::default());
    assert!(matches!(r, Err(Error::NotApplicable(_))));
}

#[test]
fn comparison_table_for_42b() {
    let rep = reproduce(&ExampleId::Linear42b, &ReproduceConfig::default()).unwrap();
    assert!(rep.passed(), "{}", rep.to_markdown());
    let rows = compare_rows(&[rep]);
    assert_eq!(rows[0].example, "4.2b");
    assert!((rows[0].stagewise - 22.0 / 75.0).abs() < 1e-9);
    assert_eq!(rows[0].verdict, "stagewise tighter");
    assert!(compare_markdown(&rows).contains("| 4.2b |"));
}
