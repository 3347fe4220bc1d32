//! On-the-fly (local) PCTL model checking for discrete-time Markov chains.
//!
//! The checker is parametric in the model semantics: anything implementing
//! [`ModelSemantics`] (a successor distribution `next` plus an atom
//! evaluator `lab_eval`) can be checked. A PRISM-language subset front-end
//! ([`prism`]) provides one such semantics, and [`oracle`] holds an
//! independent global explicit-state checker used for differential testing.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod checker;
mod lexer;
pub mod oracle;
pub mod pctl;
pub mod prism;
pub mod semantics;

pub use checker::{CheckConfig, CheckError, CheckStats, ConvergenceScope, Engine, Verdict};
pub use lexer::{LexError, Position};
pub use pctl::{parse_property, PathFormula, ProbBound, PropertyQuery, StateFormula};
pub use semantics::{
    canonical_key, AtomId, ModelSemantics, SemanticsError, StateKey, StateValuation, Transition,
    TransitionList, Value,
};
