//! Front-end for a subset of the PRISM modelling language (DTMCs only).
//!
//! Supported: a `dtmc` header, `const` declarations (values may be left
//! open and supplied as overrides), `formula` and `label` definitions,
//! modules with bounded integer and boolean variables, guarded commands
//! with optional action labels, and module renaming. Everything else in
//! PRISM (rewards, `system` blocks, global variables, other model types)
//! is rejected as an unsupported construct.
//!
//! Composition follows the usual DTMC reading of a PRISM file: in each
//! state the enabled command instances (local commands, plus one joint
//! instance per combination of enabled commands on a shared action) are
//! chosen uniformly, and the chosen instance then applies its
//! probabilistic update.

pub mod ast;
mod elaborate;
mod expr;
mod model;
mod parse;
mod print;

use alloc::string::String;

use thiserror::Error;

pub use elaborate::{elaborate, ElaboratedModel, VariableInfo, VariableKind};
pub use expr::Lit;
pub use model::{build_semantics, PrismModel};
pub use parse::{parse_expression, parse_model};

use crate::lexer::{LexError, Position};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Position, message: String },
    #[error("{pos}: unsupported construct: {construct}")]
    Unsupported { pos: Position, construct: String },
    #[error("{pos}: duplicate name `{name}`")]
    Duplicate { pos: Position, name: String },
    #[error("{pos}: unknown identifier `{name}`")]
    UnknownIdentifier { pos: Position, name: String },
    #[error("constant `{name}` has no value (declare one or pass an override)")]
    UnresolvedConstant { name: String },
    #[error("override for `{name}`, which is not a declared constant")]
    UnknownOverride { name: String },
    #[error("{pos}: cyclic definition involving `{name}`")]
    Cycle { pos: Position, name: String },
    #[error("{pos}: type error: {message}")]
    TypeMismatch { pos: Position, message: String },
    #[error("{pos}: {message}")]
    Evaluation { pos: Position, message: String },
    #[error("{pos}: command {command}: update probabilities sum to {sum}, not 1")]
    ProbabilitySum {
        pos: Position,
        command: String,
        sum: f64,
    },
    #[error("{pos}: command {command}: update probability {value} is outside (0,1]")]
    ProbabilityRange {
        pos: Position,
        command: String,
        value: f64,
    },
    #[error("{pos}: initial value {value} of `{variable}` is outside [{low}..{high}]")]
    InitOutOfBounds {
        pos: Position,
        variable: String,
        value: i64,
        low: i64,
        high: i64,
    },
    #[error("{pos}: module `{module}` assigns `{variable}`, which it does not own")]
    ForeignAssignment {
        pos: Position,
        module: String,
        variable: String,
    },
    #[error("{pos}: unknown module `{name}`")]
    UnknownModule { pos: Position, name: String },
    #[error("unknown label \"{0}\"")]
    UnknownLabel(String),
}
