//! Compiled (closed) expressions: constants folded, variables resolved to
//! slots of the state vector.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::ast::{BinaryOp, Builtin, ConstType};
use crate::semantics::Value;

/// A literal value, as used for constants and for expression results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lit {
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl Lit {
    /// Parses a literal as written on the command line: `3`, `0.25`,
    /// `-1`, `true`, `false`.
    pub fn parse(text: &str) -> Option<Lit> {
        let text = text.trim();
        match text {
            "true" => Some(Lit::Bool(true)),
            "false" => Some(Lit::Bool(false)),
            _ => text
                .parse::<i64>()
                .map(Lit::Int)
                .ok()
                .or_else(|| text.parse::<f64>().ok().filter(|v| v.is_finite()).map(Lit::Real)),
        }
    }

    pub fn ty(self) -> ConstType {
        match self {
            Lit::Int(_) => ConstType::Int,
            Lit::Real(_) => ConstType::Double,
            Lit::Bool(_) => ConstType::Bool,
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        match self {
            Lit::Int(v) => Some(v as f64),
            Lit::Real(v) => Some(v),
            Lit::Bool(_) => None,
        }
    }

    pub(crate) fn to_value(self) -> Option<Value> {
        match self {
            Lit::Int(v) => Some(Value::Int(v)),
            Lit::Bool(b) => Some(Value::Bool(b)),
            Lit::Real(_) => None,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(v) => write!(f, "{v}"),
            Lit::Real(v) => write!(f, "{v}"),
            Lit::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<Value> for Lit {
    fn from(v: Value) -> Self {
        match v {
            Value::Int(i) => Lit::Int(i),
            Value::Bool(b) => Lit::Bool(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum CExpr {
    Lit(Lit),
    Var(usize),
    Not(Box<CExpr>),
    Neg(Box<CExpr>),
    Bin(BinaryOp, Box<CExpr>, Box<CExpr>),
    Call(Builtin, Vec<CExpr>),
}

impl CExpr {
    pub fn eval(&self, state: &[Value]) -> Result<Lit, String> {
        match self {
            CExpr::Lit(l) => Ok(*l),
            CExpr::Var(slot) => Ok(Lit::from(state[*slot])),
            CExpr::Not(e) => match e.eval(state)? {
                Lit::Bool(b) => Ok(Lit::Bool(!b)),
                other => Err(format!("`!` applied to {other}")),
            },
            CExpr::Neg(e) => match e.eval(state)? {
                Lit::Int(v) => v
                    .checked_neg()
                    .map(Lit::Int)
                    .ok_or_else(|| String::from("integer overflow")),
                Lit::Real(v) => Ok(Lit::Real(-v)),
                Lit::Bool(_) => Err("`-` applied to a boolean".into()),
            },
            CExpr::Bin(op, a, b) => {
                // short-circuit the boolean connectives
                let l = a.eval(state)?;
                match (op, l) {
                    (BinaryOp::And, Lit::Bool(false)) => return Ok(Lit::Bool(false)),
                    (BinaryOp::Or, Lit::Bool(true)) => return Ok(Lit::Bool(true)),
                    (BinaryOp::Implies, Lit::Bool(false)) => return Ok(Lit::Bool(true)),
                    _ => {}
                }
                apply_binary(*op, l, b.eval(state)?)
            }
            CExpr::Call(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(state))
                    .collect::<Result<Vec<_>, _>>()?;
                let ints: Option<Vec<i64>> = vals
                    .iter()
                    .map(|v| match v {
                        Lit::Int(i) => Some(*i),
                        _ => None,
                    })
                    .collect();
                if let Some(ints) = ints {
                    let pick = if *f == Builtin::Min {
                        ints.iter().min()
                    } else {
                        ints.iter().max()
                    };
                    return Ok(Lit::Int(*pick.expect("at least one argument")));
                }
                let mut acc = num(vals[0])?;
                for v in &vals[1..] {
                    let v = num(*v)?;
                    if (*f == Builtin::Min && v < acc) || (*f == Builtin::Max && v > acc) {
                        acc = v;
                    }
                }
                Ok(Lit::Real(acc))
            }
        }
    }

    pub fn eval_bool(&self, state: &[Value]) -> Result<bool, String> {
        match self.eval(state)? {
            Lit::Bool(b) => Ok(b),
            other => Err(format!("expected a boolean, got {other}")),
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            CExpr::Lit(_) => false,
            CExpr::Var(_) => true,
            CExpr::Not(e) | CExpr::Neg(e) => e.has_vars(),
            CExpr::Bin(_, a, b) => a.has_vars() || b.has_vars(),
            CExpr::Call(_, args) => args.iter().any(CExpr::has_vars),
        }
    }

    /// Whether a double value can arise anywhere in the expression.
    pub fn uses_double(&self) -> bool {
        match self {
            CExpr::Lit(Lit::Real(_)) | CExpr::Bin(BinaryOp::Div, ..) => true,
            CExpr::Lit(_) | CExpr::Var(_) => false,
            CExpr::Not(e) | CExpr::Neg(e) => e.uses_double(),
            CExpr::Bin(_, a, b) => a.uses_double() || b.uses_double(),
            CExpr::Call(_, args) => args.iter().any(CExpr::uses_double),
        }
    }

    /// Replaces every variable-free subtree by its value. Subtrees whose
    /// evaluation fails are kept so the error surfaces when (and if) they
    /// are evaluated.
    pub fn fold(self) -> CExpr {
        let folded = match self {
            CExpr::Not(e) => CExpr::Not(Box::new(e.fold())),
            CExpr::Neg(e) => CExpr::Neg(Box::new(e.fold())),
            CExpr::Bin(op, a, b) => CExpr::Bin(op, Box::new(a.fold()), Box::new(b.fold())),
            CExpr::Call(f, args) => CExpr::Call(f, args.into_iter().map(CExpr::fold).collect()),
            leaf => return leaf,
        };
        if folded.has_vars() {
            return folded;
        }
        match folded.eval(&[]) {
            Ok(l) => CExpr::Lit(l),
            Err(_) => folded,
        }
    }
}

fn num(l: Lit) -> Result<f64, String> {
    l.as_f64()
        .ok_or_else(|| format!("expected a number, got {l}"))
}

fn apply_binary(op: BinaryOp, l: Lit, r: Lit) -> Result<Lit, String> {
    use BinaryOp::*;
    let overflow = || String::from("integer overflow");
    Ok(match op {
        And | Or | Implies | Iff => {
            let (Lit::Bool(a), Lit::Bool(b)) = (l, r) else {
                return Err(format!("`{}` needs booleans, got {l} and {r}", op.symbol()));
            };
            Lit::Bool(match op {
                And => a && b,
                Or => a || b,
                Implies => !a || b,
                _ => a == b,
            })
        }
        Eq | Neq => {
            let same = match (l, r) {
                (Lit::Bool(a), Lit::Bool(b)) => a == b,
                (Lit::Int(a), Lit::Int(b)) => a == b,
                (Lit::Bool(_), _) | (_, Lit::Bool(_)) => {
                    return Err(format!("cannot compare {l} with {r}"))
                }
                _ => num(l)? == num(r)?,
            };
            Lit::Bool(if op == Eq { same } else { !same })
        }
        Lt | Le | Gt | Ge => {
            let ord = match (l, r) {
                (Lit::Int(a), Lit::Int(b)) => a.partial_cmp(&b),
                _ => num(l)?.partial_cmp(&num(r)?),
            }
            .ok_or_else(|| String::from("comparison with NaN"))?;
            Lit::Bool(match op {
                Lt => ord.is_lt(),
                Le => ord.is_le(),
                Gt => ord.is_gt(),
                _ => ord.is_ge(),
            })
        }
        Add | Sub | Mul => match (l, r) {
            (Lit::Int(a), Lit::Int(b)) => Lit::Int(
                match op {
                    Add => a.checked_add(b),
                    Sub => a.checked_sub(b),
                    _ => a.checked_mul(b),
                }
                .ok_or_else(overflow)?,
            ),
            _ => {
                let (a, b) = (num(l)?, num(r)?);
                Lit::Real(match op {
                    Add => a + b,
                    Sub => a - b,
                    _ => a * b,
                })
            }
        },
        Div => {
            let (a, b) = (num(l)?, num(r)?);
            if b == 0.0 {
                return Err("division by zero".into());
            }
            Lit::Real(a / b)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Box<CExpr> {
        Box::new(CExpr::Lit(Lit::Int(v)))
    }

    #[test]
    fn literal_parsing() {
        assert_eq!(Lit::parse("3"), Some(Lit::Int(3)));
        assert_eq!(Lit::parse(" -2 "), Some(Lit::Int(-2)));
        assert_eq!(Lit::parse("0.3"), Some(Lit::Real(0.3)));
        assert_eq!(Lit::parse("true"), Some(Lit::Bool(true)));
        assert_eq!(Lit::parse("x"), None);
    }

    #[test]
    fn folding_and_division() {
        let e = CExpr::Bin(BinaryOp::Sub, lit(1), Box::new(CExpr::Bin(BinaryOp::Div, lit(3), lit(10))));
        assert_eq!(e.fold(), CExpr::Lit(Lit::Real(0.7)));
        let e = CExpr::Bin(BinaryOp::Div, lit(1), lit(0));
        assert!(e.clone().fold().eval(&[]).is_err());
        assert_eq!(e.clone().fold(), e);
    }

    #[test]
    fn min_max_and_overflow() {
        let e = CExpr::Call(Builtin::Max, alloc::vec![CExpr::Var(0), CExpr::Lit(Lit::Int(2))]);
        assert_eq!(e.eval(&[Value::Int(5)]).unwrap(), Lit::Int(5));
        assert_eq!(e.eval(&[Value::Int(-1)]).unwrap(), Lit::Int(2));
        let e = CExpr::Bin(BinaryOp::Add, lit(i64::MAX), lit(1));
        assert!(e.eval(&[]).is_err());
    }

    #[test]
    fn connectives_short_circuit() {
        // the right operand would fail if evaluated
        let bad = Box::new(CExpr::Bin(BinaryOp::Div, lit(1), lit(0)));
        let e = CExpr::Bin(BinaryOp::And, Box::new(CExpr::Lit(Lit::Bool(false))), bad);
        assert_eq!(e.eval(&[]).unwrap(), Lit::Bool(false));
    }
}
