//! Worked examples and the case analysis of both until algorithms.

mod common;

use common::*;
use flycheck_core::checker::Label;
use flycheck_core::oracle::{enumerate, enumerate_for, oracle_check};
use flycheck_core::{
    CheckConfig, CheckError, Engine, ModelSemantics, PathFormula, StateFormula, Value, Verdict,
};

const EPS: f64 = 1e-6;

fn engine(src: &str) -> Engine<'static, flycheck_core::prism::PrismModel> {
    Engine::new(model(src), CheckConfig::default())
}

fn at(m: &impl ModelSemantics, s: i64) -> flycheck_core::StateValuation {
    m.initial_state().with_values(vec![Value::Int(s)].into())
}

fn goal() -> StateFormula {
    StateFormula::atom("goal")
}

fn alive() -> StateFormula {
    StateFormula::not(StateFormula::atom("dead"))
}

#[test]
fn boolean_structure() {
    let mut e = engine(CHAIN);
    let s0 = e.model().initial_state();
    assert!(e.check(&s0, &StateFormula::True).unwrap());
    assert!(!e.check(&s0, &StateFormula::False).unwrap());
    for f in [goal(), alive(), prop("P>0.4 [ X \"goal\" ]")] {
        let v = e.check(&s0, &f).unwrap();
        assert_eq!(e.check(&s0, &StateFormula::not(f.clone())).unwrap(), !v);
    }
}

#[test]
fn next_sums_matching_successors() {
    let mut e = engine(CHAIN);
    let s0 = e.model().initial_state();
    let next = |f| PathFormula::Next(Box::new(f));
    assert_eq!(e.check_path(&s0, &next(StateFormula::True)).unwrap(), 1.0);
    assert_eq!(e.check_path(&s0, &next(StateFormula::False)).unwrap(), 0.0);
    assert_eq!(e.check_path(&s0, &next(goal())).unwrap(), 0.5);
    assert!((e.check_path(&s0, &next(alive())).unwrap() - 0.8).abs() < 1e-15);
}

#[test]
fn record_labels() {
    let mut e = engine(CHAIN);
    let m = model(CHAIN);
    let bu = e.create_bu_record(&at(&m, 1), &alive(), &goal()).unwrap();
    assert_eq!((bu.label, bu.p), (Label::Yes, [1.0; 2]));
    assert!(bu.prec.is_empty());
    let bu = e.create_bu_record(&at(&m, 2), &alive(), &goal()).unwrap();
    assert_eq!((bu.label, bu.p), (Label::No, [0.0; 2]));
    let bu = e.create_bu_record(&at(&m, 0), &alive(), &goal()).unwrap();
    assert_eq!((bu.label, bu.p), (Label::Unknown, [0.0; 2]));

    let uu = e.create_uu_record(&at(&m, 1), &alive(), &goal()).unwrap();
    assert_eq!((uu.label, uu.p_yes, uu.p_no), (Label::Yes, [1.0; 2], [0.0; 2]));
    let uu = e.create_uu_record(&at(&m, 2), &alive(), &goal()).unwrap();
    assert_eq!((uu.label, uu.p_yes, uu.p_no), (Label::No, [0.0; 2], [1.0; 2]));
    let uu = e.create_uu_record(&at(&m, 0), &alive(), &goal()).unwrap();
    assert_eq!((uu.label, uu.p_yes, uu.p_no), (Label::Unknown, [0.0; 2], [0.0; 2]));
}

#[test]
fn bounded_until_cases() {
    let mut e = engine(CHAIN);
    let m = model(CHAIN);
    let s0 = m.initial_state();
    // start state YES / NO
    assert_eq!(e.check_bounded_until(&at(&m, 1), &alive(), 5, &goal()).unwrap(), 1.0);
    assert_eq!(e.check_bounded_until(&at(&m, 2), &alive(), 5, &goal()).unwrap(), 0.0);
    // zero horizon: no YES record can be found
    e.reset_stats();
    assert_eq!(e.check_bounded_until(&s0, &alive(), 0, &goal()).unwrap(), 0.0);
    assert_eq!(e.stats().states_expanded, 0);
    assert_eq!(e.stats().iterations, 0);
    // general case
    assert_eq!(e.check_bounded_until(&s0, &alive(), 1, &goal()).unwrap(), 0.5);
    let p2 = e.check_bounded_until(&s0, &alive(), 2, &goal()).unwrap();
    assert!((p2 - 0.65).abs() < 1e-15, "{p2}");
}

#[test]
fn bounded_until_without_reachable_goal_is_zero() {
    let mut e = engine(CYCLE);
    let s0 = e.model().initial_state();
    e.reset_stats();
    assert_eq!(e.check_bounded_until(&s0, &StateFormula::True, 10, &goal()).unwrap(), 0.0);
    assert_eq!(e.stats().iterations, 0);
    assert!(e.stats().states_expanded > 0);
}

#[test]
fn unbounded_until_cases() {
    let mut e = engine(CHAIN);
    let m = model(CHAIN);
    assert_eq!(e.check_unbounded_until(&at(&m, 1), &alive(), &goal()).unwrap(), 1.0);
    assert_eq!(e.check_unbounded_until(&at(&m, 2), &alive(), &goal()).unwrap(), 0.0);

    // general case: x = 0.5 + 0.3 x
    e.reset_stats();
    let p = e.check_unbounded_until(&m.initial_state(), &alive(), &goal()).unwrap();
    let exact = 5.0 / 7.0;
    assert!(p <= exact + 1e-12 && exact - p <= EPS, "{p}");
    assert!(e.stats().iterations > 0);

    // no goal reachable
    let mut e = engine(CYCLE);
    let s0 = e.model().initial_state();
    e.reset_stats();
    assert_eq!(e.check_unbounded_until(&s0, &StateFormula::True, &goal()).unwrap(), 0.0);
    assert_eq!(e.stats().iterations, 0);

    // nothing can fail: S_no stays empty after closure
    let mut e = engine(RETRY);
    let s0 = e.model().initial_state();
    e.reset_stats();
    assert_eq!(e.check_unbounded_until(&s0, &alive(), &goal()).unwrap(), 1.0);
    assert_eq!(e.stats().iterations, 0);
}

#[test]
fn phi1_only_bottom_component_counts_as_failure() {
    // the trap can reach neither goal nor dead: it is relabeled NO
    let mut e = engine(TRAP);
    let s0 = e.model().initial_state();
    let p = e.check_unbounded_until(&s0, &alive(), &goal()).unwrap();
    assert!((0.25 - p).abs() <= EPS && p <= 0.25 + 1e-12, "{p}");
}

#[test]
fn query_values() {
    let mut e = engine(CHAIN);
    let v = e.evaluate(&flycheck_core::parse_property("P=? [ !\"dead\" U<=2 \"goal\" ]").unwrap()).unwrap();
    assert!(matches!(v, Verdict::Probability(p) if (p - 0.65).abs() < 1e-15));
    let v = e.evaluate(&flycheck_core::parse_property("P=? [ G !\"goal\" ]").unwrap()).unwrap();
    let Verdict::Probability(p) = v else { panic!() };
    assert!((p - 2.0 / 7.0).abs() <= EPS + 1e-12, "{p}");
    let v = e.evaluate(&flycheck_core::parse_property("P>=0.7 [ F \"goal\" ]").unwrap()).unwrap();
    assert_eq!(v, Verdict::Bool(true));
    let nested = prop("\"goal\" | P>=0.5 [ X \"goal\" ]");
    assert!(e.check(&e.model().initial_state(), &nested).unwrap());
}

#[test]
fn nested_query_is_rejected() {
    let mut e = engine(CHAIN);
    let s0 = e.model().initial_state();
    let inner = StateFormula::prob(
        flycheck_core::ProbBound::Query { complement: false },
        PathFormula::Next(Box::new(goal())),
    );
    let f = StateFormula::not(inner);
    assert!(matches!(e.check(&s0, &f), Err(CheckError::QueryInStateFormula(_))));
}

#[test]
fn state_cap_names_the_phase() {
    let m = model(HERMAN3);
    let mut e = Engine::new(
        &m,
        CheckConfig {
            state_cap: 3,
            ..CheckConfig::default()
        },
    );
    let err = e.evaluate(&flycheck_core::parse_property("P=? [ F \"stable\" ]").unwrap()).unwrap_err();
    assert_eq!(
        err,
        CheckError::StateCap {
            phase: "unbounded-until expansion",
            cap: 3
        }
    );
    let err = e
        .evaluate(&flycheck_core::parse_property("P=? [ F<=9 \"stable\" ]").unwrap())
        .unwrap_err();
    assert!(err.to_string().contains("bounded-until expansion"));
}

#[test]
fn invalid_epsilon() {
    let m = model(CHAIN);
    let mut e = Engine::new(
        &m,
        CheckConfig {
            epsilon: 0.0,
            ..CheckConfig::default()
        },
    );
    assert!(matches!(
        e.evaluate(&flycheck_core::parse_property("P=? [ F \"goal\" ]").unwrap()),
        Err(CheckError::InvalidEpsilon(_))
    ));
}

#[test]
fn herman3_stabilizes() {
    let m = model(HERMAN3);
    let mut e = Engine::new(&m, CheckConfig::default());
    assert_eq!(e.stats(), Default::default());
    let f = prop("P>=1 [ F \"stable\" ]");
    assert!(e.check(&m.initial_state(), &f).unwrap());
    // the property needs the whole reachable space
    let reachable = enumerate(&m, 1000).unwrap().len();
    assert_eq!(reachable, 8);
    assert_eq!(e.stats().records_created, reachable as u64);
    // only the two 3-token states are not already stable
    assert_eq!(e.stats().states_expanded, 2);

    let d = enumerate_for(&m, &f, 1000).unwrap();
    assert_eq!(oracle_check(&d, &f).unwrap().count(), 8);
}

#[test]
fn deadlocks_are_counted() {
    let src = "dtmc module m x:[0..2] init 0; [] x<2 -> (x'=x+1); endmodule label \"end\" = x=2;";
    let m = model(src);
    let mut e = Engine::new(&m, CheckConfig::default());
    e.reset_stats();
    // x=2 is expanded once and has no enabled command
    let g = prop("P>=1 [ X P>=1 [ X P>=1 [ X \"end\" ] ] ]");
    assert!(e.check(&m.initial_state(), &g).unwrap());
    assert_eq!(e.stats().deadlocks_patched, 1);
}
