use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{path_probabilities, ExplicitDtmc};
use crate::pctl::{Comparison, PathFormula, ProbBound, StateFormula};
use crate::semantics::{AtomId, ModelSemantics, SemanticsError, StateValuation, TransitionList, Value};

/// A seeded random chain over states `s = 0..n`, initial state `s = 0`,
/// with atoms `a0, a1, ...`.
#[derive(Clone, Debug)]
pub struct RandomDtmc {
    names: Arc<[String]>,
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<Vec<bool>>,
}

/// Each state gets between 1 and `d` distinct successors (never more than
/// `n`) with normalized uniform weights; each atom holds with probability
/// 1/2 independently per state. With `n = 1` the single state loops.
///
/// # Panics
/// If `n` or `d` is zero.
pub fn random_dtmc(seed: u64, n: usize, d: usize, a: usize) -> RandomDtmc {
    assert!(n >= 1 && d >= 1, "need at least one state and one successor");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let degree = rng.gen_range(1..=d.min(n));
        let mut targets = sample(&mut rng, n, degree).into_vec();
        targets.sort_unstable();
        let weights: Vec<f64> = (0..degree).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        rows.push(targets.into_iter().zip(weights.into_iter().map(|w| w / total)).collect());
        labels.push((0..a).map(|_| rng.gen_bool(0.5)).collect());
    }
    RandomDtmc {
        names: Arc::from([String::from("s")]),
        rows,
        labels,
    }
}

impl RandomDtmc {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn atom_names(&self) -> Vec<String> {
        (0..self.labels.first().map_or(0, Vec::len))
            .map(|i| format!("a{i}"))
            .collect()
    }

    pub fn state(&self, i: usize) -> StateValuation {
        StateValuation::with_names(self.names.clone(), [Value::Int(i as i64)].into())
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    fn index(&self, s: &StateValuation) -> Result<usize, SemanticsError> {
        match s.values() {
            [Value::Int(i)] if s.names() == &self.names && (*i as usize) < self.rows.len() && *i >= 0 => {
                Ok(*i as usize)
            }
            _ => Err(SemanticsError::ForeignState(format!("{s}"))),
        }
    }
}

impl ModelSemantics for RandomDtmc {
    fn initial_state(&self) -> StateValuation {
        self.state(0)
    }

    fn next(&self, s: &StateValuation) -> Result<TransitionList, SemanticsError> {
        let i = self.index(s)?;
        TransitionList::from_weighted(self.rows[i].iter().map(|&(j, p)| (self.state(j), p)))
    }

    fn lab_eval(&self, s: &StateValuation, atom: &AtomId) -> Result<bool, SemanticsError> {
        let i = self.index(s)?;
        atom.name()
            .strip_prefix('a')
            .and_then(|k| k.parse::<usize>().ok())
            .and_then(|k| self.labels[i].get(k).copied())
            .ok_or_else(|| SemanticsError::UnknownLabel(atom.name().into()))
    }
}

/// Shape of generated formulas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormulaShape {
    /// Maximum nesting depth of operators.
    pub depth: usize,
    pub max_horizon: u32,
    /// Minimum distance between a threshold and any state's probability
    /// of a bounded path formula (`X`, `U<=k`).
    pub bounded_margin: f64,
    /// Same for unbounded until, whose on-the-fly value is approximate.
    pub unbounded_margin: f64,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            depth: 3,
            max_horizon: 25,
            bounded_margin: 1e-6,
            unbounded_margin: 1e-5,
        }
    }
}

/// A random formula over `atoms` whose outermost operator is `P`.
///
/// Every threshold is drawn away from the probabilities the oracle
/// computes on `d`, so the verdict does not hinge on rounding.
///
/// # Panics
/// If an atom has not been evaluated on `d`.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    d: &ExplicitDtmc,
    atoms: &[AtomId],
    shape: &FormulaShape,
) -> StateFormula {
    random_prob(rng, d, atoms, shape, shape.depth.max(1))
}

fn random_state<R: Rng + ?Sized>(
    rng: &mut R,
    d: &ExplicitDtmc,
    atoms: &[AtomId],
    shape: &FormulaShape,
    depth: usize,
) -> StateFormula {
    if depth == 0 {
        return match rng.gen_range(0..20) {
            0 => StateFormula::True,
            1 => StateFormula::False,
            _ => StateFormula::Atom(atoms[rng.gen_range(0..atoms.len())].clone()),
        };
    }
    match rng.gen_range(0..7) {
        0 => random_state(rng, d, atoms, shape, 0),
        1 => StateFormula::not(random_state(rng, d, atoms, shape, depth - 1)),
        2 => StateFormula::and(
            random_state(rng, d, atoms, shape, depth - 1),
            random_state(rng, d, atoms, shape, depth - 1),
        ),
        3 => StateFormula::or(
            random_state(rng, d, atoms, shape, depth - 1),
            random_state(rng, d, atoms, shape, depth - 1),
        ),
        _ => random_prob(rng, d, atoms, shape, depth),
    }
}

fn random_prob<R: Rng + ?Sized>(
    rng: &mut R,
    d: &ExplicitDtmc,
    atoms: &[AtomId],
    shape: &FormulaShape,
    depth: usize,
) -> StateFormula {
    let sub = |rng: &mut R| random_state(rng, d, atoms, shape, depth - 1);
    let (path, margin) = match rng.gen_range(0..5) {
        0 => (PathFormula::Next(sub(rng).into()), shape.bounded_margin),
        1 | 2 => {
            let a = sub(rng);
            let k = rng.gen_range(0..=shape.max_horizon);
            (
                PathFormula::BoundedUntil(a.into(), k, sub(rng).into()),
                shape.bounded_margin,
            )
        }
        _ => {
            let a = sub(rng);
            (PathFormula::Until(a.into(), sub(rng).into()), shape.unbounded_margin)
        }
    };
    let probs = path_probabilities(d, &path).expect("atoms evaluated on the explicit model");
    let cmp = [Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge][rng.gen_range(0..4)];
    let clear = |b: f64| probs.iter().all(|p| (p - b).abs() >= margin);
    let mut bound = None;
    for _ in 0..32 {
        // favour thresholds near actual values so both verdicts occur
        let b = if rng.gen_bool(0.5) {
            let p = probs[rng.gen_range(0..probs.len())];
            (p + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0)
        } else {
            rng.gen_range(0.0..=1.0)
        };
        if clear(b) {
            bound = Some(b);
            break;
        }
    }
    let bound = bound.unwrap_or_else(|| widest_gap(&probs));
    StateFormula::prob(ProbBound::Compare(cmp, bound), path)
}

/// Midpoint of the widest gap between consecutive values in `[0, 1]`.
fn widest_gap(probs: &[f64]) -> f64 {
    let mut v: Vec<f64> = probs.iter().copied().chain([0.0, 1.0]).collect();
    v.sort_by(f64::total_cmp);
    v.windows(2)
        .max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])))
        .map_or(0.5, |w| (w[0] + w[1]) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_normalized() {
        let a = random_dtmc(7, 30, 4, 3);
        let b = random_dtmc(7, 30, 4, 3);
        for i in 0..30 {
            assert_eq!(a.row(i), b.row(i));
            let t = a.next(&a.state(i)).unwrap();
            assert!((t.total() - 1.0).abs() <= 1e-9);
            assert!((1..=4).contains(&t.len()));
        }
        assert_ne!(
            (0..30).map(|i| a.row(i).to_vec()).collect::<Vec<_>>(),
            (0..30).map(|i| random_dtmc(8, 30, 4, 3).row(i).to_vec()).collect::<Vec<_>>()
        );
        assert_eq!(a.atom_names(), ["a0", "a1", "a2"]);
    }

    #[test]
    fn single_state_is_absorbing() {
        let m = random_dtmc(1, 1, 4, 2);
        let t = m.next(&m.initial_state()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.items()[0].target, m.initial_state());
        assert_eq!(t.items()[0].prob, 1.0);
    }

    #[test]
    fn generated_thresholds_keep_their_distance() {
        use super::super::{enumerate, oracle_check};
        let m = random_dtmc(3, 40, 3, 3);
        let mut d = enumerate(&m, 1000).unwrap();
        let atoms: Vec<AtomId> = m.atom_names().into_iter().map(AtomId::new).collect();
        d.add_atoms(&m, &atoms).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shape = FormulaShape::default();
        for _ in 0..50 {
            let f = random_formula(&mut rng, &d, &atoms, &shape);
            let StateFormula::Prob(ProbBound::Compare(_, b), path) = &f else {
                panic!("outermost operator must be P: {f}")
            };
            let margin = match path.as_ref() {
                PathFormula::Until(..) => shape.unbounded_margin,
                _ => shape.bounded_margin,
            };
            let probs = path_probabilities(&d, path).unwrap();
            assert!(probs.iter().all(|p| (p - b).abs() >= margin));
            oracle_check(&d, &f).unwrap();
        }
        assert_eq!(widest_gap(&[0.4]), 0.7);
    }

    #[test]
    fn unknown_atoms_are_errors() {
        let m = random_dtmc(1, 3, 2, 2);
        assert!(m.lab_eval(&m.initial_state(), &AtomId::new("a2")).is_err());
        assert!(m.lab_eval(&m.initial_state(), &AtomId::new("b")).is_err());
    }
}
