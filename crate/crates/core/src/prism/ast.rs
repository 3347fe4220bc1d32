use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::lexer::Position;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Iff,
    Implies,
    Or,
    And,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Iff => "<=>",
            BinaryOp::Implies => "=>",
            BinaryOp::Or => "|",
            BinaryOp::And => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Neq => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Iff => 0,
            BinaryOp::Implies => 1,
            BinaryOp::Or => 2,
            BinaryOp::And => 3,
            BinaryOp::Eq
            | BinaryOp::Neq
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 5,
            BinaryOp::Add | BinaryOp::Sub => 6,
            BinaryOp::Mul | BinaryOp::Div => 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Min,
    Max,
}

/// Expression as written in the model file.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Real(f64),
    Bool(bool),
    Ident(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
}

impl Expr {
    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Applies `f` to every identifier, bottom-up.
    pub fn map_idents(&self, f: &mut impl FnMut(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Ident(name) => f(name).unwrap_or_else(|| self.clone()),
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => self.clone(),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.map_idents(f))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.map_idents(f)), Box::new(b.map_idents(f)))
            }
            Expr::Call(b, args) => Expr::Call(*b, args.iter().map(|a| a.map_idents(f)).collect()),
        }
    }

    pub fn idents<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Ident(name) => out.push(name),
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => {}
            Expr::Unary(_, e) => e.idents(out),
            Expr::Binary(_, a, b) => {
                a.idents(out);
                b.idents(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.idents(out)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(UnaryOp::Not, _) => 4,
            Expr::Unary(UnaryOp::Neg, _) => 8,
            _ => 9,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Real(v) => {
                if v.is_finite() && *v == (*v as i64) as f64 {
                    write!(f, "{v:.1}")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Ident(name) => f.write_str(name),
            Expr::Unary(UnaryOp::Not, e) => {
                f.write_str("!")?;
                wrap(f, e, 4)
            }
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                wrap(f, e, 9)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                // relations do not chain; implication and iff associate to the right
                let (lmin, rmin) = match op {
                    BinaryOp::Implies | BinaryOp::Iff => (p + 1, p),
                    _ if p == 5 => (p + 1, p + 1),
                    _ => (p, p + 1),
                };
                wrap(f, a, lmin)?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, b, rmin)
            }
            Expr::Call(b, args) => {
                f.write_str(match b {
                    Builtin::Min => "min(",
                    Builtin::Max => "max(",
                })?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstType {
    Int,
    Double,
    Bool,
}

impl fmt::Display for ConstType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstType::Int => "int",
            ConstType::Double => "double",
            ConstType::Bool => "bool",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: ConstType,
    pub value: Option<Expr>,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq)]
pub enum VarType {
    Int { low: Expr, high: Expr },
    Bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
    pub init: Option<Expr>,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateAst {
    pub prob: Expr,
    pub assignments: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommandAst {
    pub action: Option<String>,
    pub guard: Expr,
    pub updates: Vec<UpdateAst>,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleAst {
    pub name: String,
    pub variables: Vec<VarDecl>,
    pub commands: Vec<CommandAst>,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModuleDef {
    Concrete(ModuleAst),
    /// `module name = base [old=new, ...] endmodule`
    Renamed {
        name: String,
        base: String,
        renames: Vec<(String, String)>,
        pos: Position,
    },
}

impl ModuleDef {
    pub fn name(&self) -> &str {
        match self {
            ModuleDef::Concrete(m) => &m.name,
            ModuleDef::Renamed { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedExpr {
    pub name: String,
    pub expr: Expr,
    pub pos: Position,
}

/// A parsed (not yet elaborated) model.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModelAst {
    pub constants: Vec<ConstDecl>,
    pub formulas: Vec<NamedExpr>,
    pub labels: Vec<NamedExpr>,
    pub modules: Vec<ModuleDef>,
}
