//! A global explicit-state checker, independent of [`crate::checker`].
//!
//! The reachable state space is enumerated up front into a sparse matrix;
//! formulas are then evaluated bottom-up into satisfaction sets, with
//! vector iteration for bounded until and a direct linear solve for
//! unbounded until.

mod linear;
mod random;
mod satset;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use hashbrown::HashMap;
use thiserror::Error;

pub use random::{random_dtmc, random_formula, FormulaShape, RandomDtmc};
pub use satset::SatSet;

use crate::checker::Verdict;
use crate::pctl::{desugar, PathFormula, ProbBound, StateFormula};
use crate::semantics::{canonical_key, AtomId, ModelSemantics, SemanticsError, StateValuation};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("more than {cap} reachable states")]
    StateCap { cap: usize },
    #[error("atom \"{0}\" was not evaluated on the explicit model")]
    MissingAtom(AtomId),
    #[error("`{0}` is a query; it has no truth value inside a formula")]
    QueryInStateFormula(String),
    #[error("singular linear system")]
    Singular,
}

/// The reachable part of a model as an explicit sparse matrix.
#[derive(Clone, Debug)]
pub struct ExplicitDtmc {
    states: Vec<StateValuation>,
    rows: Vec<Vec<(usize, f64)>>,
    atoms: BTreeMap<AtomId, SatSet>,
}

/// Breadth-first enumeration from the initial state; state `i` is the
/// `i`-th state discovered, so the initial state has index 0.
pub fn enumerate<M: ModelSemantics>(model: &M, cap: usize) -> Result<ExplicitDtmc, OracleError> {
    let init = model.initial_state();
    let mut index = HashMap::new();
    index.insert(canonical_key(&init), 0usize);
    let mut states = vec![init];
    let mut rows = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let succ = model.next(&states[i])?;
        let mut row = Vec::with_capacity(succ.len());
        for t in succ {
            let key = canonical_key(&t.target);
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    if states.len() >= cap {
                        return Err(OracleError::StateCap { cap });
                    }
                    let j = states.len();
                    index.insert(key, j);
                    states.push(t.target);
                    queue.push_back(j);
                    j
                }
            };
            row.push((j, t.prob));
        }
        if rows.len() <= i {
            rows.resize_with(i + 1, Vec::new);
        }
        rows[i] = row;
    }
    Ok(ExplicitDtmc {
        states,
        rows,
        atoms: BTreeMap::new(),
    })
}

/// Enumerates `model` and evaluates every atom of `formula` on it.
pub fn enumerate_for<M: ModelSemantics>(
    model: &M,
    formula: &StateFormula,
    cap: usize,
) -> Result<ExplicitDtmc, OracleError> {
    let mut d = enumerate(model, cap)?;
    d.add_atoms(model, &formula.atoms())?;
    Ok(d)
}

impl ExplicitDtmc {
    /// Builds a chain directly from rows and atom sets (used in tests).
    ///
    /// # Panics
    /// If a row is empty, out of range, or does not sum to one.
    pub fn from_rows(
        states: Vec<StateValuation>,
        rows: Vec<Vec<(usize, f64)>>,
        atoms: BTreeMap<AtomId, SatSet>,
    ) -> Self {
        assert_eq!(states.len(), rows.len());
        for row in &rows {
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() <= 1e-9, "row sums to {total}");
            assert!(row.iter().all(|(j, _)| *j < states.len()));
        }
        ExplicitDtmc {
            states,
            rows,
            atoms,
        }
    }

    pub fn add_atoms<M: ModelSemantics>(&mut self, model: &M, atoms: &[AtomId]) -> Result<(), OracleError> {
        for a in atoms {
            if self.atoms.contains_key(a) {
                continue;
            }
            let mut set = SatSet::empty(self.len());
            for (i, s) in self.states.iter().enumerate() {
                if model.lab_eval(s, a)? {
                    set.insert(i);
                }
            }
            self.atoms.insert(a.clone(), set);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateValuation] {
        &self.states
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn atom(&self, a: &AtomId) -> Option<&SatSet> {
        self.atoms.get(a)
    }

    pub fn index_of(&self, s: &StateValuation) -> Option<usize> {
        self.states.iter().position(|t| t == s)
    }

    /// `P · x`.
    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, p)| p * x[j]).sum())
            .collect()
    }

    /// States that reach `target` through `via` states (target included).
    pub fn backward_reach(&self, via: &SatSet, target: &SatSet) -> SatSet {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                preds[j].push(i);
            }
        }
        let mut reached = target.clone();
        let mut queue: VecDeque<usize> = target.iter().collect();
        while let Some(j) = queue.pop_front() {
            for &i in &preds[j] {
                if via.contains(i) && reached.insert(i) {
                    queue.push_back(i);
                }
            }
        }
        reached
    }

    /// `src dst prob` per line.
    pub fn export_transitions(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, p) in row {
                let _ = writeln!(out, "{i} {j} {p}");
            }
        }
        out
    }

    /// `state atom` per line, for every state in every evaluated atom.
    pub fn export_labels(&self) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            for (a, set) in &self.atoms {
                if set.contains(i) {
                    let _ = writeln!(out, "{i} {a}");
                }
            }
        }
        out
    }

    /// The state valuations, one `index valuation` per line.
    pub fn export_states(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.states.iter().enumerate() {
            let _ = writeln!(out, "{i} {s}");
        }
        out
    }
}

/// Satisfaction set of `f` over all states of `d`.
pub fn oracle_check(d: &ExplicitDtmc, f: &StateFormula) -> Result<SatSet, OracleError> {
    let f = desugar(f);
    sat(d, &f)
}

fn sat(d: &ExplicitDtmc, f: &StateFormula) -> Result<SatSet, OracleError> {
    let n = d.len();
    Ok(match f {
        StateFormula::True => SatSet::full(n),
        StateFormula::False => SatSet::empty(n),
        StateFormula::Atom(a) => d.atom(a).cloned().ok_or_else(|| OracleError::MissingAtom(a.clone()))?,
        StateFormula::Not(g) => sat(d, g)?.complement(),
        StateFormula::Or(a, b) => sat(d, a)?.union(&sat(d, b)?),
        StateFormula::And(a, b) => sat(d, a)?.intersection(&sat(d, b)?),
        StateFormula::Implies(a, b) => sat(d, a)?.complement().union(&sat(d, b)?),
        StateFormula::Prob(ProbBound::Query { .. }, _) => {
            return Err(OracleError::QueryInStateFormula(f.to_string()))
        }
        StateFormula::Prob(ProbBound::Compare(cmp, bound), path) => {
            let probs = path_probabilities(d, path)?;
            SatSet::from_fn(n, |i| cmp.holds(probs[i], *bound, 0.0))
        }
    })
}

/// Per-state probability of a (core) path formula.
pub fn path_probabilities(d: &ExplicitDtmc, path: &PathFormula) -> Result<Vec<f64>, OracleError> {
    match path {
        PathFormula::Next(f) => Ok(d.multiply(&sat(d, f)?.indicator())),
        PathFormula::BoundedUntil(a, k, b) => {
            Ok(oracle_bounded_until(d, &sat(d, a)?, &sat(d, b)?, *k))
        }
        PathFormula::Until(a, b) => oracle_unbounded_until(d, &sat(d, a)?, &sat(d, b)?),
        PathFormula::Eventually(..) | PathFormula::Globally(..) => {
            let wrapped = desugar(&StateFormula::prob(
                ProbBound::Query { complement: false },
                path.clone(),
            ));
            let StateFormula::Prob(ProbBound::Query { complement }, inner) = wrapped else {
                unreachable!("desugar keeps the query")
            };
            let probs = path_probabilities(d, &inner)?;
            Ok(if complement {
                probs.into_iter().map(|p| 1.0 - p).collect()
            } else {
                probs
            })
        }
    }
}

/// Evaluates a property at state 0 (the initial state).
pub fn oracle_evaluate(d: &ExplicitDtmc, f: &StateFormula) -> Result<Verdict, OracleError> {
    oracle_evaluate_at(d, 0, f)
}

pub fn oracle_evaluate_at(d: &ExplicitDtmc, state: usize, f: &StateFormula) -> Result<Verdict, OracleError> {
    let f = desugar(f);
    match &f {
        StateFormula::Prob(ProbBound::Query { complement }, path) => {
            let p = path_probabilities(d, path)?[state];
            Ok(Verdict::Probability(if *complement { 1.0 - p } else { p }))
        }
        _ => Ok(Verdict::Bool(sat(d, &f)?.contains(state))),
    }
}

/// `x⁰ = 1[sat2]`, `xⁱ⁺¹ = 1[sat2] + 1[sat1 \ sat2] ⊙ (P · xⁱ)`.
pub fn oracle_bounded_until(d: &ExplicitDtmc, sat1: &SatSet, sat2: &SatSet, k: u32) -> Vec<f64> {
    let base = sat2.indicator();
    let maybe = sat1.difference(sat2);
    let mut x = base.clone();
    for _ in 0..k {
        let px = d.multiply(&x);
        x = (0..d.len())
            .map(|i| if maybe.contains(i) { px[i] } else { base[i] })
            .collect();
    }
    x
}

/// States from which `sat1 U sat2` has probability 0.
pub fn prob0(d: &ExplicitDtmc, sat1: &SatSet, sat2: &SatSet) -> SatSet {
    d.backward_reach(sat1, sat2).complement()
}

/// States from which `sat1 U sat2` has probability 1.
pub fn prob1(d: &ExplicitDtmc, sat1: &SatSet, sat2: &SatSet, prob0: &SatSet) -> SatSet {
    d.backward_reach(&sat1.difference(sat2), prob0).complement()
}

/// Exact `sat1 U sat2` probabilities: precomputed 0/1 sets, then a linear
/// solve on the remaining states.
pub fn oracle_unbounded_until(d: &ExplicitDtmc, sat1: &SatSet, sat2: &SatSet) -> Result<Vec<f64>, OracleError> {
    let zero = prob0(d, sat1, sat2);
    let one = prob1(d, sat1, sat2, &zero);
    let maybe: Vec<usize> = zero.union(&one).complement().iter().collect();
    let mut x = one.indicator();
    if maybe.is_empty() {
        return Ok(x);
    }
    let mut slot = vec![usize::MAX; d.len()];
    for (k, &i) in maybe.iter().enumerate() {
        slot[i] = k;
    }
    let m = maybe.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (k, &i) in maybe.iter().enumerate() {
        a[k][k] = 1.0;
        for &(j, p) in d.row(i) {
            if one.contains(j) {
                b[k] += p;
            } else if slot[j] != usize::MAX {
                a[k][slot[j]] -= p;
            }
        }
    }
    let solution = linear::solve_dense(a, b).ok_or(OracleError::Singular)?;
    for (k, &i) in maybe.iter().enumerate() {
        x[i] = solution[k].clamp(0.0, 1.0);
    }
    Ok(x)
}

impl ExplicitDtmc {
    /// Largest one-step probability of staying inside `set`, over members
    /// of `set`; 0 for an empty set.
    pub fn max_retention(&self, set: &SatSet) -> f64 {
        set.iter()
            .map(|i| {
                self.rows[i]
                    .iter()
                    .filter(|(j, _)| set.contains(*j))
                    .map(|(_, p)| p)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// States reachable from `from` by paths staying in `within`
    /// (`from` itself included if it is in `within`).
    pub fn forward_reach(&self, from: usize, within: &SatSet) -> SatSet {
        let mut seen = SatSet::empty(self.len());
        if !within.contains(from) {
            return seen;
        }
        seen.insert(from);
        let mut queue = VecDeque::from([from]);
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &self.rows[i] {
                if within.contains(j) && seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        seen
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Value;

    /// s0 ->0.5 g, ->0.3 s0, ->0.2 d; g and d absorbing; g ⊨ goal.
    fn gambler() -> ExplicitDtmc {
        let states = (0..3)
            .map(|i| StateValuation::from_entries([("s", Value::Int(i))]).unwrap())
            .collect();
        let rows = vec![
            vec![(0, 0.3), (1, 0.5), (2, 0.2)],
            vec![(1, 1.0)],
            vec![(2, 1.0)],
        ];
        let mut atoms = BTreeMap::new();
        atoms.insert(AtomId::new("goal"), SatSet::from_fn(3, |i| i == 1));
        atoms.insert(AtomId::new("safe"), SatSet::from_fn(3, |i| i == 0));
        ExplicitDtmc::from_rows(states, rows, atoms)
    }

    #[test]
    fn bounded_until_by_hand() {
        let d = gambler();
        let all = SatSet::full(3);
        let goal = d.atom(&AtomId::new("goal")).unwrap().clone();
        assert_eq!(oracle_bounded_until(&d, &all, &goal, 0), [0.0, 1.0, 0.0]);
        assert_eq!(oracle_bounded_until(&d, &all, &goal, 1)[0], 0.5);
        assert!((oracle_bounded_until(&d, &all, &goal, 2)[0] - 0.65).abs() < 1e-15);
        assert_eq!(oracle_bounded_until(&d, &all, &all, 7), [1.0; 3]);
    }

    #[test]
    fn unbounded_until_closed_form() {
        let d = gambler();
        let all = SatSet::full(3);
        let goal = d.atom(&AtomId::new("goal")).unwrap().clone();
        let x = oracle_unbounded_until(&d, &all, &goal).unwrap();
        assert!((x[0] - 5.0 / 7.0).abs() < 1e-12);
        assert_eq!((x[1], x[2]), (1.0, 0.0));
        // unreachable target
        let none = SatSet::empty(3);
        assert_eq!(oracle_unbounded_until(&d, &all, &none).unwrap(), [0.0; 3]);
        // the limit of vector iteration agrees
        let xk = oracle_bounded_until(&d, &all, &goal, 60);
        assert!((xk[0] - x[0]).abs() < 1e-12);
    }

    #[test]
    fn prob1_states_are_exact() {
        // 0 -> {0: .5, 1: .5}; 1 absorbing goal: state 0 reaches goal surely
        let states = (0..2)
            .map(|i| StateValuation::from_entries([("s", Value::Int(i))]).unwrap())
            .collect();
        let d = ExplicitDtmc::from_rows(states, vec![vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)]], BTreeMap::new());
        let goal = SatSet::from_fn(2, |i| i == 1);
        let x = oracle_unbounded_until(&d, &SatSet::full(2), &goal).unwrap();
        assert_eq!(x, [1.0, 1.0]);
    }

    #[test]
    fn satisfaction_sets() {
        let d = gambler();
        assert_eq!(oracle_check(&d, &StateFormula::True).unwrap().count(), 3);
        let goal = StateFormula::atom("goal");
        let not_goal = oracle_check(&d, &StateFormula::not(goal.clone())).unwrap();
        assert_eq!(not_goal, oracle_check(&d, &goal).unwrap().complement());
        let f = crate::pctl::parse_property("P>=0.7 [ F \"goal\" ]").unwrap().formula;
        assert_eq!(oracle_check(&d, &f).unwrap().iter().collect::<Vec<_>>(), [0, 1]);
        let q = crate::pctl::parse_property("P=? [ G !\"goal\" ]").unwrap().formula;
        let Verdict::Probability(p) = oracle_evaluate(&d, &q).unwrap() else { panic!() };
        assert!((p - 2.0 / 7.0).abs() < 1e-12);
        assert!(matches!(
            oracle_check(&d, &StateFormula::atom("nope")),
            Err(OracleError::MissingAtom(_))
        ));
    }

    #[test]
    fn export_formats() {
        let d = gambler();
        assert_eq!(d.export_transitions().lines().next(), Some("0 0 0.3"));
        assert_eq!(d.export_labels(), "0 safe\n1 goal\n");
    }
}
