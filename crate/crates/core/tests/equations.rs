mod common;

use std::collections::BTreeMap;

use holo::equations::{Domains, Equation, EquationSet};
use holo::expr::Expr;
use holo::hologram::VarId;
use proptest::prelude::*;

fn v(i: u32) -> Expr {
    Expr::var(VarId(i))
}

#[test]
fn angle_sum_with_equal_base_and_right_apex() {
    let mut es = EquationSet::new();
    es.add_equations([
        Equation::seed(Expr::add(Expr::add(v(0), v(1)), v(2)), Expr::num(180.0)),
        Equation::seed(v(0), v(1)),
        Equation::seed(v(2), Expr::num(90.0)),
    ]);
    let got = es.solve(&Domains::default());
    assert!((got[&VarId(0)] - 45.0).abs() < 1e-6);
    assert!((got[&VarId(1)] - 45.0).abs() < 1e-6);
}

#[test]
fn square_root_in_positive_domain() {
    let mut es = EquationSet::new();
    es.add_equations([Equation::seed(Expr::pow(v(0), Expr::num(2.0)), Expr::num(25.0))]);
    let mut d = Domains::default();
    d.domains.insert(VarId(0), (0.0, 1e6));
    let got = es.solve(&d);
    assert!((got[&VarId(0)] - 5.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn linear_systems_match_elimination(seed in any::<u64>()) {
        let (eqs, sol) = common::random_linear_system(seed);
        let mut es = EquationSet::new();
        es.add_equations(eqs);
        es.solve(&Domains::default());
        for (i, x) in sol.iter().enumerate() {
            let got = es.value(VarId(i as u32));
            prop_assert!(got.is_some_and(|g| (g - x).abs() < 1e-6), "var {} got {:?} want {}", i, got, x);
        }
    }

    #[test]
    fn bindings_never_change_once_made(seed in any::<u64>(), split in 0usize..6) {
        let (eqs, _) = common::random_linear_system(seed);
        let split = split.min(eqs.len());
        let mut es = EquationSet::new();
        es.add_equations(eqs[..split].to_vec());
        es.solve(&Domains::default());
        let before: BTreeMap<VarId, f64> = es.bindings().clone();
        es.add_equations(eqs[split..].to_vec());
        es.solve(&Domains::default());
        for (k, x) in before {
            prop_assert_eq!(es.value(k), Some(x));
        }
    }

    #[test]
    fn bound_equations_have_small_residuals(seed in any::<u64>()) {
        let (eqs, _) = common::random_linear_system(seed);
        let mut es = EquationSet::new();
        es.add_equations(eqs.clone());
        es.solve(&Domains::default());
        for e in &eqs {
            if e.vars().iter().all(|x| es.value(*x).is_some()) {
                let r = es.residual(e).unwrap();
                prop_assert!(r.abs() < 1e-6, "residual {}", r);
            }
        }
    }
}
