//! Randomized invariants of the coefficient recursions, bounds and metrics.

use mspmdp::bounds::{comparison_bounds, endo_bounds, exo_stagewise_bounds, BoundMode, Comparison};
use mspmdp::lipschitz::*;
use mspmdp::metrics::{kantorovich_1d, ot_distance, GroundCost};
use mspmdp::model::Regularity;
use mspmdp::oracle::ot_brute_force;
use mspmdp::stochastic::DiscreteDistribution;
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

prop_compose! {
    fn regularity()(
        t in 1usize..6,
        l_c in 0.0f64..5.0,
        l_s in 0.0f64..2.0,
        l_g in 0.0f64..3.0,
        rho in 0.5f64..20.0,
        diam in 0.1f64..10.0,
    ) -> Regularity {
        Regularity::uniform(t, l_c, l_s, l_g, rho, diam)
    }
}

fn law(dim: usize) -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec((prop::collection::vec(-3.0f64..3.0, dim), 0.05f64..1.0), 1..=4).prop_map(|cells| {
        let total: f64 = cells.iter().map(|c| c.1).sum();
        let (atoms, w): (Vec<_>, Vec<_>) = cells.into_iter().map(|(a, w)| (a, w / total)).unzip();
        DiscreteDistribution::new(atoms, w).unwrap()
    })
}

fn law_triple() -> impl Strategy<Value = (DiscreteDistribution, DiscreteDistribution, DiscreteDistribution)> {
    (1usize..=2).prop_flat_map(|d| (law(d), law(d), law(d)))
}

proptest! {
    #[test]
    fn closed_form_matches_recursion(a in 0.01f64..3.0, l_s in 0.0f64..3.0, t in 1usize..8) {
        prop_assume!((1.0 - a - l_s).abs() > 1e-3);
        let reg = Regularity::uniform(t, 1.0, l_s, a, 1.0, 1.0);
        let fs = feasible_set_constants(&reg).unwrap();
        for k in 1..=t {
            prop_assert!(close(fs.closed_form[k], fs.l_x[k], 1e-8), "t = {k}: {} vs {}", fs.closed_form[k], fs.l_x[k]);
        }
    }

    #[test]
    fn critical_branch_matches_recursion(a in 0.01f64..0.99, t in 1usize..8) {
        let l_s = 1.0 - a;
        let (v, roots, critical) = feasible_set_closed_form(a, l_s, t);
        prop_assert!(critical);
        prop_assert!(roots.is_none());
        let fs = feasible_set_constants(&Regularity::uniform(t, 1.0, l_s, a, 1.0, 1.0)).unwrap();
        prop_assert!(close(v, fs.l_x[t], 1e-9), "{v} vs {}", fs.l_x[t]);
    }

    #[test]
    fn constants_grow_with_moduli(reg in regularity(), bump in 0.01f64..1.0, which in 0usize..4) {
        let mut more = reg.clone();
        match which {
            0 => more.l_c.iter_mut().for_each(|v| *v += bump),
            1 => more.l_s.iter_mut().for_each(|v| *v += bump),
            2 => more.l_g.iter_mut().for_each(|v| *v += bump),
            _ => more.rho = more.rho.map(|r| r / (1.0 + bump)),
        }
        let (a, b) = (ConstantTable::compute(&reg).unwrap(), ConstantTable::compute(&more).unwrap());
        let le = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| *p <= *q * (1.0 + 1e-12) + 1e-12);
        prop_assert!(le(&a.value_function.l, &b.value_function.l));
        prop_assert!(le(&a.feasible_set.l_x, &b.feasible_set.l_x));
        prop_assert!(le(&a.endogenous.h, &b.endogenous.h));
        prop_assert!(le(&a.endogenous.l_hat, &b.endogenous.l_hat));
        prop_assert!(a.exogenous_global.l_theta <= b.exogenous_global.l_theta * (1.0 + 1e-12) + 1e-12);
        let q = vec![0.5; reg.horizon];
        let (sa, sb) = (stagewise_coeffs(&reg, &q).unwrap(), stagewise_coeffs(&more, &q).unwrap());
        prop_assert!(le(&sa.l_xi, &sb.l_xi));
    }

    #[test]
    fn value_constants_vanish_past_the_horizon(reg in regularity()) {
        let vf = value_function_constants(&reg).unwrap();
        prop_assert_eq!(vf.l[reg.horizon + 1], 0.0);
        prop_assert!(vf.l.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn bounds_are_linear_and_vanish(reg in regularity(), scale in 0.0f64..10.0, seed in prop::collection::vec(0.0f64..1.0, 6)) {
        let t = reg.horizon;
        let table = ConstantTable::compute(&reg).unwrap();
        let dk: Vec<f64> = (0..=t).map(|k| seed[k % seed.len()]).collect();
        let scaled: Vec<f64> = dk.iter().map(|v| v * scale).collect();
        let e = |d: &[f64]| endo_bounds(&table.endogenous, d, BoundMode::Value, None).unwrap();
        prop_assert!(close(e(&scaled), scale * e(&dk), 1e-12));
        prop_assert_eq!(e(&vec![0.0; t + 1]), 0.0);
        prop_assert!(e(&dk) >= 0.0);

        let sw = stagewise_coeffs(&reg, &vec![0.5; t]).unwrap();
        let s = |d: &[f64]| exo_stagewise_bounds(&sw, &table.exogenous_global, d, BoundMode::Value, None).unwrap();
        prop_assert!(close(s(&scaled[..t]), scale * s(&dk[..t]), 1e-12));
        prop_assert_eq!(s(&vec![0.0; t]), 0.0);
    }

    #[test]
    fn comparison_bounds_are_monotone(l in 0.0f64..20.0, d in 0.0f64..1.0, extra in 0.0f64..1.0, w in 0.0f64..1.0) {
        let nested = |x| comparison_bounds(&Comparison::Nested { lipschitz: l, exponent: 1.0, distance: x }).unwrap();
        prop_assert!(nested(d) <= nested(d + extra) + 1e-12);
        let filt = |x| comparison_bounds(&Comparison::Filtration { lipschitz: l, wasserstein: w, filtration: x }).unwrap();
        prop_assert!(filt(d) >= 0.0);
        prop_assert!(filt(d) <= filt(d + extra) + 1e-12);
    }

    #[test]
    fn transport_matches_enumeration((p, q, _) in law_triple()) {
        for cost in [GroundCost::InfNorm, GroundCost::FortetMourier(2.0), GroundCost::Power(2.0)] {
            let a = ot_distance(&p, &q, cost).unwrap();
            let b = ot_brute_force(&p, &q, cost).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{cost:?}: {a} vs {b}");
        }
    }

    #[test]
    fn metric_axioms((p, q, r) in law_triple()) {
        for cost in [GroundCost::InfNorm, GroundCost::Power(1.5), GroundCost::Power(3.0)] {
            let d = |a: &DiscreteDistribution, b: &DiscreteDistribution| ot_distance(a, b, cost).unwrap();
            prop_assert!(d(&p, &p) <= 1e-9);
            prop_assert!((d(&p, &q) - d(&q, &p)).abs() <= 1e-9);
            prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-9);
        }
    }

    #[test]
    fn quantile_formula_matches_transport(p in law(1), q in law(1)) {
        let a = kantorovich_1d(&p, &q).unwrap();
        let b = ot_distance(&p, &q, GroundCost::InfNorm).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn translation_costs_its_length(p in law(2), c in prop::collection::vec(-2.0f64..2.0, 2)) {
        let d = ot_distance(&p, &p.shifted(&c), GroundCost::InfNorm).unwrap();
        let len = c[0].abs().max(c[1].abs());
        prop_assert!((d - len).abs() <= 1e-9, "{d} vs {len}");
    }

    #[test]
    fn fortet_mourier_of_order_one_is_kantorovich(p in law(2), q in law(2)) {
        let a = ot_distance(&p, &q, GroundCost::FortetMourier(1.0)).unwrap();
        let b = ot_distance(&p, &q, GroundCost::InfNorm).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }
}
