//! The interface between a model and the checker.
//!
//! A model is anything that can produce an initial state, the one-step
//! successor distribution of a state, and the truth value of an atomic
//! proposition in a state. States are identified purely by their variable
//! valuation.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Tolerance on the sum of a successor distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A variable value: bounded integer or boolean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// An assignment of values to the model variables, sorted by variable name.
///
/// The name table is shared between all states of a model, so cloning a
/// valuation only copies the values.
#[derive(Clone)]
pub struct StateValuation {
    names: Arc<[String]>,
    values: Box<[Value]>,
}

impl StateValuation {
    /// Builds a valuation from `(name, value)` pairs in any order.
    ///
    /// Returns `None` if a name occurs twice.
    pub fn from_entries<I, S>(entries: I) -> Option<Self>
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, Value)> =
            entries.into_iter().map(|(n, v)| (n.into(), v)).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        let (names, values): (Vec<String>, Vec<Value>) = entries.into_iter().unzip();
        Some(Self {
            names: names.into(),
            values: values.into(),
        })
    }

    /// Builds a valuation over an existing, already sorted name table.
    ///
    /// # Panics
    /// If the lengths differ or `names` is not strictly sorted.
    pub fn with_names(names: Arc<[String]>, values: Box<[Value]>) -> Self {
        assert_eq!(names.len(), values.len(), "one value per variable");
        assert!(
            names.windows(2).all(|w| w[0] < w[1]),
            "variable names must be strictly sorted"
        );
        Self { names, values }
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Value)> + '_ {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(|i| self.values[i])
    }

    /// Same name table, new values.
    pub fn with_values(&self, values: Box<[Value]>) -> Self {
        assert_eq!(values.len(), self.names.len());
        Self {
            names: Arc::clone(&self.names),
            values,
        }
    }
}

impl PartialEq for StateValuation {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
            && (Arc::ptr_eq(&self.names, &other.names) || self.names == other.names)
    }
}

impl Eq for StateValuation {}

impl fmt::Debug for StateValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries()).finish()
    }
}

impl fmt::Display for StateValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (name, value)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{name}={value}")?;
        }
        f.write_str(")")
    }
}

/// Canonical byte encoding of the values of a [`StateValuation`].
///
/// Each value is a tag byte (`0`/`1` for booleans, `2` for integers)
/// followed, for integers, by a zigzag LEB128 varint. The code is
/// prefix-free, so two valuations over the same variables get equal keys
/// iff they are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Box<[u8]>);

impl StateKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Decodes the key back into a valuation over `names`.
    pub fn decode(&self, names: &Arc<[String]>) -> Option<StateValuation> {
        let mut values = Vec::with_capacity(names.len());
        let mut bytes = self.0.iter().copied();
        while let Some(tag) = bytes.next() {
            let value = match tag {
                0 => Value::Bool(false),
                1 => Value::Bool(true),
                2 => {
                    let mut raw: u64 = 0;
                    let mut shift = 0u32;
                    loop {
                        let b = bytes.next()?;
                        if shift >= 64 {
                            return None;
                        }
                        raw |= u64::from(b & 0x7f) << shift;
                        if b & 0x80 == 0 {
                            break;
                        }
                        shift += 7;
                    }
                    Value::Int(((raw >> 1) as i64) ^ -((raw & 1) as i64))
                }
                _ => return None,
            };
            values.push(value);
        }
        (values.len() == names.len())
            .then(|| StateValuation::with_values_unchecked(Arc::clone(names), values.into()))
    }
}

impl StateValuation {
    fn with_values_unchecked(names: Arc<[String]>, values: Box<[Value]>) -> Self {
        Self { names, values }
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey(")?;
        for b in self.0.iter() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

pub fn canonical_key(s: &StateValuation) -> StateKey {
    let mut out = Vec::with_capacity(s.values.len() * 2);
    for value in s.values.iter() {
        match *value {
            Value::Bool(b) => out.push(u8::from(b)),
            Value::Int(v) => {
                out.push(2);
                let mut raw = ((v << 1) ^ (v >> 63)) as u64;
                loop {
                    let b = (raw & 0x7f) as u8;
                    raw >>= 7;
                    if raw == 0 {
                        out.push(b);
                        break;
                    }
                    out.push(b | 0x80);
                }
            }
        }
    }
    StateKey(out.into())
}

/// One successor of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub target: StateValuation,
    pub prob: f64,
}

/// The one-step distribution of a state.
///
/// Built through [`TransitionList::from_weighted`], which merges duplicate
/// targets and orders the entries by [`StateKey`].
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionList {
    items: Vec<Transition>,
    patched_deadlock: bool,
}

impl TransitionList {
    /// Aggregates weighted targets into a distribution.
    ///
    /// Entries with non-positive weight are dropped; the remaining weights
    /// must sum to one within [`NORMALIZATION_TOLERANCE`].
    pub fn from_weighted<I>(targets: I) -> Result<Self, SemanticsError>
    where
        I: IntoIterator<Item = (StateValuation, f64)>,
    {
        let mut keyed: Vec<(StateKey, Transition)> = targets
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(target, prob)| (canonical_key(&target), Transition { target, prob }))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut items: Vec<Transition> = Vec::with_capacity(keyed.len());
        let mut last_key: Option<StateKey> = None;
        for (key, t) in keyed {
            match (&last_key, items.last_mut()) {
                (Some(k), Some(prev)) if *k == key => prev.prob += t.prob,
                _ => {
                    items.push(t);
                    last_key = Some(key);
                }
            }
        }
        let total: f64 = items.iter().map(|t| t.prob).sum();
        if items.is_empty() || (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(SemanticsError::NotNormalized { total });
        }
        Ok(Self {
            items,
            patched_deadlock: false,
        })
    }

    /// The probability-one self-loop used for states without enabled moves.
    pub fn deadlock_self_loop(s: &StateValuation) -> Self {
        Self {
            items: alloc::vec![Transition {
                target: s.clone(),
                prob: 1.0,
            }],
            patched_deadlock: true,
        }
    }

    pub fn items(&self) -> &[Transition] {
        &self.items
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Transition> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// True when the list is a self-loop injected for a deadlocked state.
    pub fn is_patched_deadlock(&self) -> bool {
        self.patched_deadlock
    }

    pub fn total(&self) -> f64 {
        self.items.iter().map(|t| t.prob).sum()
    }
}

impl IntoIterator for TransitionList {
    type Item = Transition;
    type IntoIter = alloc::vec::IntoIter<Transition>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.into_iter()
    }
}

impl<'a> IntoIterator for &'a TransitionList {
    type Item = &'a Transition;
    type IntoIter = core::slice::Iter<'a, Transition>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// Name of an atomic proposition.
///
/// Model labels are plain identifiers. Inline comparisons written in a
/// property (`(x>=2)`) are registered under their normalized expression
/// text, e.g. `x>=2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(String);

impl AtomId {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Whether this atom names a label (an identifier) rather than an
    /// inline comparison.
    pub fn is_label(&self) -> bool {
        let mut chars = self.0.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AtomId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SemanticsError {
    #[error("unknown label \"{0}\"")]
    UnknownLabel(String),
    #[error("command {command}: {message}")]
    Evaluation { command: String, message: String },
    #[error("command {command}: update sets {variable} to {value}, outside its bounds")]
    OutOfBounds {
        command: String,
        variable: String,
        value: i64,
    },
    #[error("successor probabilities sum to {total}, not 1")]
    NotNormalized { total: f64 },
    #[error("state {0} does not belong to this model")]
    ForeignState(String),
}

/// The semantics a model exposes to the checker.
///
/// Implementations must be deterministic: equal inputs give equal outputs.
pub trait ModelSemantics {
    fn initial_state(&self) -> StateValuation;

    /// One-step successor distribution of `s`.
    fn next(&self, s: &StateValuation) -> Result<TransitionList, SemanticsError>;

    /// Truth value of `atom` in `s`.
    fn lab_eval(&self, s: &StateValuation, atom: &AtomId) -> Result<bool, SemanticsError>;
}

impl<M: ModelSemantics + ?Sized> ModelSemantics for &M {
    fn initial_state(&self) -> StateValuation {
        (**self).initial_state()
    }

    fn next(&self, s: &StateValuation) -> Result<TransitionList, SemanticsError> {
        (**self).next(s)
    }

    fn lab_eval(&self, s: &StateValuation, atom: &AtomId) -> Result<bool, SemanticsError> {
        (**self).lab_eval(s, atom)
    }
}
