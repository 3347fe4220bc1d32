//! The on-the-fly engine.
//!
//! Formulas are evaluated top-down from a single state. Until operators
//! build a private [`StateMap`] of records by forward expansion, then push
//! probabilities backward along the recorded predecessor edges. Only the
//! states the verdict depends on are ever generated.

mod bounded;
mod records;
mod unbounded;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

pub use records::{
    backward_closure, BuRecord, HasPrec, Label, RecordId, StateMap, UuRecord,
};

use crate::pctl::{desugar, PathFormula, ProbBound, PropertyQuery, StateFormula};
use crate::semantics::{
    canonical_key, AtomId, ModelSemantics, SemanticsError, StateKey, StateValuation,
    TransitionList,
};

/// Which records the unbounded-until stopping test inspects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConvergenceScope {
    #[default]
    AllRecords,
    InitialOnly,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckConfig {
    /// Accuracy of unbounded until.
    pub epsilon: f64,
    /// Maximum number of records in one until evaluation.
    pub state_cap: usize,
    pub convergence: ConvergenceScope,
    /// Widens `P ⋈ p` threshold comparisons; 0 compares exactly.
    pub bound_tolerance: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            epsilon: 1e-6,
            state_cap: 10_000_000,
            convergence: ConvergenceScope::AllRecords,
            bound_tolerance: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("state cap of {cap} records exceeded during {phase}")]
    StateCap { phase: &'static str, cap: usize },
    #[error("accuracy must be a positive number, got {0}")]
    InvalidEpsilon(f64),
    #[error("`{0}` is a query; it has no truth value inside a formula")]
    QueryInStateFormula(String),
}

/// Counters since construction or the last [`Engine::reset_stats`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckStats {
    /// Calls to the model's successor function.
    pub states_expanded: u64,
    /// Records allocated by until evaluations.
    pub records_created: u64,
    /// Computation-phase iterations of until evaluations.
    pub iterations: u64,
    /// Expanded states without successors (treated as self-loops).
    pub deadlocks_patched: u64,
}

/// Result of a top-level property.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Bool(bool),
    Probability(f64),
}

/// State of an unbounded-until computation phase, handed to an observer.
/// `iteration` 0 is the state right before the first step.
#[derive(Debug)]
pub struct IterationSnapshot<'s> {
    pub iteration: u64,
    pub initial: RecordId,
    /// Slot of `p_yes`/`p_no` holding the current values.
    pub slot: usize,
    pub records: &'s [UuRecord],
}

impl IterationSnapshot<'_> {
    pub fn yes(&self, r: RecordId) -> f64 {
        self.records[r].p_yes[self.slot]
    }

    pub fn no(&self, r: RecordId) -> f64 {
        self.records[r].p_no[self.slot]
    }
}

type NodeId = usize;

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Atom(AtomId),
    Not(NodeId),
    Or(NodeId, NodeId),
    And(NodeId, NodeId),
    Prob(ProbBound, PathNode, String),
}

#[derive(Clone, Copy, Debug)]
enum PathNode {
    Next(NodeId),
    BoundedUntil(NodeId, u32, NodeId),
    Until(NodeId, NodeId),
}

/// Formulas interned by their printed form, so that equal subformulas
/// share memo entries.
#[derive(Default)]
struct FormulaTable {
    nodes: Vec<Node>,
    by_text: BTreeMap<String, NodeId>,
}

impl FormulaTable {
    fn intern(&mut self, f: &StateFormula) -> NodeId {
        if f.is_core() {
            self.intern_core(f)
        } else {
            self.intern_core(&desugar(f))
        }
    }

    fn intern_core(&mut self, f: &StateFormula) -> NodeId {
        let text = f.to_string();
        if let Some(&id) = self.by_text.get(&text) {
            return id;
        }
        let node = match f {
            StateFormula::True => Node::True,
            StateFormula::False => Node::False,
            StateFormula::Atom(a) => Node::Atom(a.clone()),
            StateFormula::Not(g) => Node::Not(self.intern_core(g)),
            StateFormula::Or(a, b) => Node::Or(self.intern_core(a), self.intern_core(b)),
            StateFormula::And(a, b) => Node::And(self.intern_core(a), self.intern_core(b)),
            StateFormula::Implies(..) => unreachable!("desugared"),
            StateFormula::Prob(bound, path) => {
                Node::Prob(*bound, self.intern_path(path), text.clone())
            }
        };
        let id = self.nodes.len();
        self.nodes.push(node);
        self.by_text.insert(text, id);
        id
    }

    fn intern_path(&mut self, p: &PathFormula) -> PathNode {
        match p {
            PathFormula::Next(f) => PathNode::Next(self.intern_core(f)),
            PathFormula::BoundedUntil(a, k, b) => {
                PathNode::BoundedUntil(self.intern_core(a), *k, self.intern_core(b))
            }
            PathFormula::Until(a, b) => PathNode::Until(self.intern_core(a), self.intern_core(b)),
            PathFormula::Eventually(..) | PathFormula::Globally(..) => {
                unreachable!("desugared")
            }
        }
    }

    /// Interns a path formula by wrapping it in a throwaway query.
    fn intern_path_formula(&mut self, p: &PathFormula) -> (PathNode, bool) {
        let wrapped = desugar(&StateFormula::prob(
            ProbBound::Query { complement: false },
            p.clone(),
        ));
        let StateFormula::Prob(ProbBound::Query { complement }, path) = &wrapped else {
            unreachable!("desugar keeps the query")
        };
        (self.intern_path(path), *complement)
    }
}

type Observer<'o> = Box<dyn FnMut(&IterationSnapshot<'_>) + 'o>;

/// Checks PCTL formulas against a model, one state at a time.
///
/// Boolean results are memoized per (state, formula) for the lifetime of
/// the engine; see [`Engine::clear_memo`].
pub struct Engine<'o, M> {
    model: M,
    config: CheckConfig,
    formulas: FormulaTable,
    memo: Vec<HashMap<StateKey, bool>>,
    stats: CheckStats,
    observer: Option<Observer<'o>>,
}

impl<'o, M: ModelSemantics> Engine<'o, M> {
    pub fn new(model: M, config: CheckConfig) -> Self {
        Engine {
            model,
            config,
            formulas: FormulaTable::default(),
            memo: Vec::new(),
            stats: CheckStats::default(),
            observer: None,
        }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn config(&self) -> &CheckConfig {
        &self.config
    }

    pub fn stats(&self) -> CheckStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = CheckStats::default();
    }

    pub fn clear_memo(&mut self) {
        self.memo.iter_mut().for_each(HashMap::clear);
    }

    /// Installs a hook called at every unbounded-until iteration.
    pub fn set_observer(&mut self, observer: impl FnMut(&IterationSnapshot<'_>) + 'o) {
        self.observer = Some(Box::new(observer));
    }

    pub fn clear_observer(&mut self) {
        self.observer = None;
    }

    /// `s ⊨ f`.
    pub fn check(&mut self, s: &StateValuation, f: &StateFormula) -> Result<bool, CheckError> {
        let id = self.formulas.intern(f);
        self.check_node(s, &canonical_key(s), id)
    }

    /// Probability of the paths from `s` satisfying `path`.
    pub fn check_path(&mut self, s: &StateValuation, path: &PathFormula) -> Result<f64, CheckError> {
        let (node, complement) = self.formulas.intern_path_formula(path);
        let p = self.path_node(s, &canonical_key(s), node)?;
        Ok(if complement { 1.0 - p } else { p })
    }

    pub fn check_bounded_until(
        &mut self,
        s: &StateValuation,
        phi1: &StateFormula,
        k: u32,
        phi2: &StateFormula,
    ) -> Result<f64, CheckError> {
        let (a, b) = (self.formulas.intern(phi1), self.formulas.intern(phi2));
        self.bounded_until(s, canonical_key(s), a, k, b)
    }

    pub fn check_unbounded_until(
        &mut self,
        s: &StateValuation,
        phi1: &StateFormula,
        phi2: &StateFormula,
    ) -> Result<f64, CheckError> {
        let (a, b) = (self.formulas.intern(phi1), self.formulas.intern(phi2));
        self.unbounded_until(s, canonical_key(s), a, b)
    }

    /// A fresh bounded-until record for `s`.
    pub fn create_bu_record(
        &mut self,
        s: &StateValuation,
        phi1: &StateFormula,
        phi2: &StateFormula,
    ) -> Result<BuRecord, CheckError> {
        let (a, b) = (self.formulas.intern(phi1), self.formulas.intern(phi2));
        let label = self.label(s, &canonical_key(s), a, b)?;
        Ok(BuRecord::new(s.clone(), label))
    }

    /// A fresh unbounded-until record for `s`.
    pub fn create_uu_record(
        &mut self,
        s: &StateValuation,
        phi1: &StateFormula,
        phi2: &StateFormula,
    ) -> Result<UuRecord, CheckError> {
        let (a, b) = (self.formulas.intern(phi1), self.formulas.intern(phi2));
        let label = self.label(s, &canonical_key(s), a, b)?;
        Ok(UuRecord::new(s.clone(), label))
    }

    /// Evaluates a property at the model's initial state.
    pub fn evaluate(&mut self, query: &PropertyQuery) -> Result<Verdict, CheckError> {
        let s = self.model.initial_state();
        self.evaluate_at(&s, &query.formula)
    }

    /// Evaluates a property (a formula or a top-level `P=?`) at `s`.
    pub fn evaluate_at(
        &mut self,
        s: &StateValuation,
        formula: &StateFormula,
    ) -> Result<Verdict, CheckError> {
        let id = self.formulas.intern(formula);
        let key = canonical_key(s);
        match self.formulas.nodes[id] {
            Node::Prob(ProbBound::Query { complement }, path, _) => {
                let p = self.path_node(s, &key, path)?;
                Ok(Verdict::Probability(if complement { 1.0 - p } else { p }))
            }
            _ => self.check_node(s, &key, id).map(Verdict::Bool),
        }
    }

    fn check_node(&mut self, s: &StateValuation, key: &StateKey, id: NodeId) -> Result<bool, CheckError> {
        let node = match &self.formulas.nodes[id] {
            Node::True => return Ok(true),
            Node::False => return Ok(false),
            Node::Atom(a) => return Ok(self.model.lab_eval(s, a)?),
            n => n.clone(),
        };
        if let Some(v) = self.memo.get(id).and_then(|m| m.get(key)) {
            return Ok(*v);
        }
        let value = match node {
            Node::Not(f) => !self.check_node(s, key, f)?,
            Node::Or(a, b) => self.check_node(s, key, a)? || self.check_node(s, key, b)?,
            Node::And(a, b) => self.check_node(s, key, a)? && self.check_node(s, key, b)?,
            Node::Prob(ProbBound::Compare(cmp, bound), path, _) => {
                let p = self.path_node(s, key, path)?;
                cmp.holds(p, bound, self.config.bound_tolerance)
            }
            Node::Prob(ProbBound::Query { .. }, _, text) => {
                return Err(CheckError::QueryInStateFormula(text))
            }
            Node::True | Node::False | Node::Atom(_) => unreachable!(),
        };
        if self.memo.len() <= id {
            self.memo.resize_with(id + 1, HashMap::new);
        }
        self.memo[id].insert(key.clone(), value);
        Ok(value)
    }

    fn path_node(&mut self, s: &StateValuation, key: &StateKey, path: PathNode) -> Result<f64, CheckError> {
        match path {
            PathNode::Next(f) => {
                let succ = self.successors(s)?;
                let mut total = 0.0;
                for t in &succ {
                    if self.check_node(&t.target, &canonical_key(&t.target), f)? {
                        total += t.prob;
                    }
                }
                Ok(total.min(1.0))
            }
            PathNode::BoundedUntil(a, k, b) => self.bounded_until(s, key.clone(), a, k, b),
            PathNode::Until(a, b) => self.unbounded_until(s, key.clone(), a, b),
        }
    }

    /// YES if `s ⊨ phi2`, NO if `s ⊭ phi1`, else UNKNOWN.
    fn label(&mut self, s: &StateValuation, key: &StateKey, phi1: NodeId, phi2: NodeId) -> Result<Label, CheckError> {
        Ok(if self.check_node(s, key, phi2)? {
            Label::Yes
        } else if !self.check_node(s, key, phi1)? {
            Label::No
        } else {
            Label::Unknown
        })
    }

    fn successors(&mut self, s: &StateValuation) -> Result<TransitionList, CheckError> {
        let succ = self.model.next(s)?;
        self.stats.states_expanded += 1;
        if succ.is_patched_deadlock() {
            self.stats.deadlocks_patched += 1;
        }
        Ok(succ)
    }

    fn admit_record(&mut self, records: usize, phase: &'static str) -> Result<(), CheckError> {
        if records >= self.config.state_cap {
            return Err(CheckError::StateCap {
                phase,
                cap: self.config.state_cap,
            });
        }
        self.stats.records_created += 1;
        Ok(())
    }
}
