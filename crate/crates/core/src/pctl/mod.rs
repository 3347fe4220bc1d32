//! PCTL abstract syntax, the property parser, and desugaring of the
//! derived operators (`F`, `G`, `=>`) into the core grammar.

mod parse;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use parse::{parse_property, parse_property_file, PropertyError};

use crate::semantics::AtomId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    /// The comparison obtained by complementing the probability:
    /// `p >= b` iff `1 - p <= 1 - b`.
    pub fn mirrored(self) -> Self {
        match self {
            Comparison::Lt => Comparison::Gt,
            Comparison::Le => Comparison::Ge,
            Comparison::Gt => Comparison::Lt,
            Comparison::Ge => Comparison::Le,
        }
    }

    /// `value ⋈ bound`, with `tolerance` widening the accepted side.
    pub fn holds(self, value: f64, bound: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Lt => value < bound + tolerance,
            Comparison::Le => value <= bound + tolerance,
            Comparison::Gt => value > bound - tolerance,
            Comparison::Ge => value >= bound - tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

/// The `⋈ p` part of a probabilistic operator, or `=?` for a query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbBound {
    Compare(Comparison, f64),
    /// `P=?`. With `complement` set the reported value is one minus the
    /// probability of the path formula (how `P=? [G f]` is answered).
    Query { complement: bool },
}

impl ProbBound {
    pub fn is_query(&self) -> bool {
        matches!(self, ProbBound::Query { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateFormula {
    True,
    False,
    Atom(AtomId),
    Not(Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    /// Removed by [`desugar`].
    Implies(Box<StateFormula>, Box<StateFormula>),
    Prob(ProbBound, Box<PathFormula>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathFormula {
    Next(Box<StateFormula>),
    BoundedUntil(Box<StateFormula>, u32, Box<StateFormula>),
    Until(Box<StateFormula>, Box<StateFormula>),
    /// `F f` / `F<=k f`. Removed by [`desugar`].
    Eventually(Option<u32>, Box<StateFormula>),
    /// `G f` / `G<=k f`. Removed by [`desugar`].
    Globally(Option<u32>, Box<StateFormula>),
}

impl StateFormula {
    pub fn atom(name: &str) -> Self {
        StateFormula::Atom(AtomId::new(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn prob(bound: ProbBound, path: PathFormula) -> Self {
        StateFormula::Prob(bound, Box::new(path))
    }

    /// True if the formula only uses the core grammar plus `And`.
    pub fn is_core(&self) -> bool {
        match self {
            StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
            StateFormula::Not(f) => f.is_core(),
            StateFormula::Or(a, b) | StateFormula::And(a, b) => a.is_core() && b.is_core(),
            StateFormula::Implies(..) => false,
            StateFormula::Prob(_, path) => match path.as_ref() {
                PathFormula::Next(f) => f.is_core(),
                PathFormula::BoundedUntil(a, _, b) | PathFormula::Until(a, b) => {
                    a.is_core() && b.is_core()
                }
                PathFormula::Eventually(..) | PathFormula::Globally(..) => false,
            },
        }
    }

    /// All atoms occurring in the formula, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<AtomId> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<AtomId>) {
        match self {
            StateFormula::True | StateFormula::False => {}
            StateFormula::Atom(a) => out.push(a.clone()),
            StateFormula::Not(f) => f.collect_atoms(out),
            StateFormula::Or(a, b) | StateFormula::And(a, b) | StateFormula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            StateFormula::Prob(_, path) => match path.as_ref() {
                PathFormula::Next(f)
                | PathFormula::Eventually(_, f)
                | PathFormula::Globally(_, f) => f.collect_atoms(out),
                PathFormula::BoundedUntil(a, _, b) | PathFormula::Until(a, b) => {
                    a.collect_atoms(out);
                    b.collect_atoms(out);
                }
            },
        }
    }

    /// Whether a `P=?` occurs anywhere in the formula.
    pub fn contains_query(&self) -> bool {
        match self {
            StateFormula::True | StateFormula::False | StateFormula::Atom(_) => false,
            StateFormula::Not(f) => f.contains_query(),
            StateFormula::Or(a, b) | StateFormula::And(a, b) | StateFormula::Implies(a, b) => {
                a.contains_query() || b.contains_query()
            }
            StateFormula::Prob(bound, path) => {
                bound.is_query()
                    || match path.as_ref() {
                        PathFormula::Next(f)
                        | PathFormula::Eventually(_, f)
                        | PathFormula::Globally(_, f) => f.contains_query(),
                        PathFormula::BoundedUntil(a, _, b) | PathFormula::Until(a, b) => {
                            a.contains_query() || b.contains_query()
                        }
                    }
            }
        }
    }
}

/// A parsed property together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyQuery {
    pub source: String,
    pub formula: StateFormula,
}

impl PropertyQuery {
    pub fn is_query(&self) -> bool {
        matches!(&self.formula, StateFormula::Prob(b, _) if b.is_query())
    }
}

/// Rewrites the derived operators into the core grammar.
///
/// `F f` becomes `true U f`, `G` is handled by complementing the
/// probability bound, and `a => b` becomes `!a | b`.
pub fn desugar(f: &StateFormula) -> StateFormula {
    use StateFormula as S;
    match f {
        S::True => S::True,
        S::False => S::False,
        S::Atom(a) => S::Atom(a.clone()),
        S::Not(g) => S::not(desugar(g)),
        S::Or(a, b) => S::or(desugar(a), desugar(b)),
        S::And(a, b) => S::and(desugar(a), desugar(b)),
        S::Implies(a, b) => S::or(S::not(desugar(a)), desugar(b)),
        S::Prob(bound, path) => match path.as_ref() {
            PathFormula::Globally(k, g) => {
                let bound = match *bound {
                    ProbBound::Compare(cmp, p) => ProbBound::Compare(cmp.mirrored(), 1.0 - p),
                    ProbBound::Query { complement } => ProbBound::Query {
                        complement: !complement,
                    },
                };
                S::prob(bound, eventually(*k, S::not(desugar(g))))
            }
            other => S::prob(*bound, desugar_path(other)),
        },
    }
}

fn eventually(bound: Option<u32>, f: StateFormula) -> PathFormula {
    match bound {
        Some(k) => PathFormula::BoundedUntil(Box::new(StateFormula::True), k, Box::new(f)),
        None => PathFormula::Until(Box::new(StateFormula::True), Box::new(f)),
    }
}

fn desugar_path(path: &PathFormula) -> PathFormula {
    match path {
        PathFormula::Next(f) => PathFormula::Next(Box::new(desugar(f))),
        PathFormula::BoundedUntil(a, k, b) => {
            PathFormula::BoundedUntil(Box::new(desugar(a)), *k, Box::new(desugar(b)))
        }
        PathFormula::Until(a, b) => PathFormula::Until(Box::new(desugar(a)), Box::new(desugar(b))),
        PathFormula::Eventually(k, f) => eventually(*k, desugar(f)),
        // only reachable when a path formula is desugared outside a P operator
        PathFormula::Globally(k, f) => PathFormula::Globally(*k, Box::new(desugar(f))),
    }
}

// Printing. Binding strength, loosest first: `=>` (right associative),
// `|`, `&`, `!`, then atoms, parentheses and `P` operators.

fn level(f: &StateFormula) -> u8 {
    match f {
        StateFormula::Implies(..) => 0,
        StateFormula::Or(..) => 1,
        StateFormula::And(..) => 2,
        StateFormula::Not(_) => 3,
        _ => 4,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, formula: &StateFormula, min: u8) -> fmt::Result {
    if level(formula) < min {
        write!(f, "({formula})")
    } else {
        write!(f, "{formula}")
    }
}

fn write_path(f: &mut fmt::Formatter<'_>, bound: &ProbBound, path: &PathFormula) -> fmt::Result {
    // a complemented query is the desugared form of `G`
    if let ProbBound::Query { complement: true } = bound {
        let horizon_and_body = match path {
            PathFormula::Until(a, b) if **a == StateFormula::True => Some((None, b)),
            PathFormula::BoundedUntil(a, k, b) if **a == StateFormula::True => Some((Some(*k), b)),
            _ => None,
        };
        if let Some((k, StateFormula::Not(body))) = horizon_and_body.map(|(k, b)| (k, b.as_ref()))
        {
            f.write_str("G")?;
            if let Some(k) = k {
                write!(f, "<={k}")?;
            }
            f.write_str(" ")?;
            return write_at(f, body, 3);
        }
    }
    match path {
        PathFormula::Next(g) => {
            f.write_str("X ")?;
            write_at(f, g, 3)
        }
        PathFormula::Until(a, b) => {
            write_at(f, a, 0)?;
            f.write_str(" U ")?;
            write_at(f, b, 0)
        }
        PathFormula::BoundedUntil(a, k, b) => {
            write_at(f, a, 0)?;
            write!(f, " U<={k} ")?;
            write_at(f, b, 0)
        }
        PathFormula::Eventually(k, g) | PathFormula::Globally(k, g) => {
            f.write_str(if matches!(path, PathFormula::Eventually(..)) {
                "F"
            } else {
                "G"
            })?;
            if let Some(k) = k {
                write!(f, "<={k}")?;
            }
            f.write_str(" ")?;
            write_at(f, g, 3)
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::True => f.write_str("true"),
            StateFormula::False => f.write_str("false"),
            StateFormula::Atom(a) if a.is_label() => write!(f, "\"{a}\""),
            StateFormula::Atom(a) => write!(f, "({a})"),
            StateFormula::Not(g) => {
                f.write_str("!")?;
                write_at(f, g, 3)
            }
            StateFormula::Or(a, b) => {
                write_at(f, a, 1)?;
                f.write_str(" | ")?;
                write_at(f, b, 2)
            }
            StateFormula::And(a, b) => {
                write_at(f, a, 2)?;
                f.write_str(" & ")?;
                write_at(f, b, 3)
            }
            StateFormula::Implies(a, b) => {
                write_at(f, a, 1)?;
                f.write_str(" => ")?;
                write_at(f, b, 0)
            }
            StateFormula::Prob(bound, path) => {
                match bound {
                    ProbBound::Compare(cmp, p) => write!(f, "P{}{} [ ", cmp.symbol(), p)?,
                    ProbBound::Query { .. } => f.write_str("P=? [ ")?,
                }
                write_path(f, bound, path)?;
                f.write_str(" ]")
            }
        }
    }
}

impl fmt::Display for PropertyQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn eventually_becomes_true_until() {
        let f = StateFormula::prob(
            ProbBound::Query { complement: false },
            PathFormula::Eventually(None, Box::new(StateFormula::atom("goal"))),
        );
        let expected = StateFormula::prob(
            ProbBound::Query { complement: false },
            PathFormula::Until(Box::new(StateFormula::True), Box::new(StateFormula::atom("goal"))),
        );
        assert_eq!(desugar(&f), expected);
    }

    #[test]
    fn globally_complements_the_bound() {
        let f = StateFormula::prob(
            ProbBound::Compare(Comparison::Ge, 0.9),
            PathFormula::Globally(None, Box::new(StateFormula::atom("safe"))),
        );
        let StateFormula::Prob(ProbBound::Compare(cmp, p), path) = desugar(&f) else {
            panic!("expected a P operator");
        };
        assert_eq!(cmp, Comparison::Le);
        assert!((p - 0.1).abs() < 1e-15);
        assert_eq!(
            *path,
            PathFormula::Until(
                Box::new(StateFormula::True),
                Box::new(StateFormula::not(StateFormula::atom("safe")))
            )
        );
    }

    #[test]
    fn implication_becomes_disjunction() {
        let f = StateFormula::Implies(
            Box::new(StateFormula::atom("a")),
            Box::new(StateFormula::atom("b")),
        );
        assert_eq!(
            desugar(&f),
            StateFormula::or(StateFormula::not(StateFormula::atom("a")), StateFormula::atom("b"))
        );
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let f = StateFormula::and(
            StateFormula::or(StateFormula::atom("a"), StateFormula::atom("b")),
            StateFormula::not(StateFormula::Atom(AtomId::new("x>=2"))),
        );
        assert_eq!(f.to_string(), "(\"a\" | \"b\") & !(x>=2)");
    }

    #[test]
    fn mirrored_comparison_is_consistent() {
        for cmp in [Comparison::Lt, Comparison::Le, Comparison::Gt, Comparison::Ge] {
            for (v, b) in [(0.2, 0.3), (0.3, 0.3), (0.5, 0.3)] {
                assert_eq!(cmp.holds(v, b, 0.0), cmp.mirrored().holds(1.0 - v, 1.0 - b, 0.0));
            }
        }
    }
}
