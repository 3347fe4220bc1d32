use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::HashSet;

use super::ast::*;
use super::ModelError;
use crate::lexer::{tokenize, Position, Tok, Token};

/// Parses a model in the supported PRISM subset.
pub fn parse_model(text: &str) -> Result<ModelAst, ModelError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, at: 0 };
    let ast = parser.model()?;
    check_duplicates(&ast)?;
    Ok(ast)
}

/// Parses a standalone expression (used for inline property atoms).
pub fn parse_expression(text: &str) -> Result<Expr, ModelError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, at: 0 };
    let e = parser.expr()?;
    if parser.peek() != &Tok::Eof {
        return parser.syntax(format!("unexpected {} after expression", parser.peek()));
    }
    Ok(e)
}

fn check_duplicates(ast: &ModelAst) -> Result<(), ModelError> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut claim = |name: &str, pos: Position| {
        if seen.insert(name.to_string()) {
            Ok(())
        } else {
            Err(ModelError::Duplicate {
                pos,
                name: name.to_string(),
            })
        }
    };
    for c in &ast.constants {
        claim(&c.name, c.pos)?;
    }
    for f in &ast.formulas {
        claim(&f.name, f.pos)?;
    }
    for m in &ast.modules {
        if let ModuleDef::Concrete(m) = m {
            for v in &m.variables {
                claim(&v.name, v.pos)?;
            }
        }
    }
    let mut modules: HashSet<&str> = HashSet::new();
    for m in &ast.modules {
        let pos = match m {
            ModuleDef::Concrete(m) => m.pos,
            ModuleDef::Renamed { pos, .. } => *pos,
        };
        if !modules.insert(m.name()) {
            return Err(ModelError::Duplicate {
                pos,
                name: m.name().to_string(),
            });
        }
    }
    let mut labels: HashSet<&str> = HashSet::new();
    for l in &ast.labels {
        if !labels.insert(&l.name) {
            return Err(ModelError::Duplicate {
                pos: l.pos,
                name: l.name.clone(),
            });
        }
    }
    Ok(())
}

const UNSUPPORTED_HEADERS: &[&str] = &[
    "mdp",
    "ctmc",
    "pta",
    "probabilistic",
    "nondeterministic",
    "stochastic",
    "ctmdp",
    "smg",
];

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Position {
        self.tokens[self.at].pos
    }

    fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.at].tok.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        tok
    }

    fn syntax<T>(&self, message: String) -> Result<T, ModelError> {
        Err(ModelError::Syntax {
            pos: self.pos(),
            message,
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ModelError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.syntax(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), ModelError> {
        if self.is_keyword(word) {
            self.advance();
            Ok(())
        } else {
            self.syntax(format!("expected `{word}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ModelError> {
        match self.peek().clone() {
            Tok::Ident(name) if !is_reserved(&name) => {
                self.advance();
                Ok(name)
            }
            other => self.syntax(format!("expected an identifier, found {other}")),
        }
    }

    fn unsupported<T>(&self, construct: &str) -> Result<T, ModelError> {
        Err(ModelError::Unsupported {
            pos: self.pos(),
            construct: construct.to_string(),
        })
    }

    fn model(&mut self) -> Result<ModelAst, ModelError> {
        match self.peek().clone() {
            Tok::Ident(h) if h == "dtmc" => {
                self.advance();
            }
            Tok::Ident(h) if UNSUPPORTED_HEADERS.contains(&h.as_str()) => {
                return self.unsupported(&format!("`{h}` models (only dtmc is supported)"));
            }
            other => return self.syntax(format!("expected model type `dtmc`, found {other}")),
        }
        let mut ast = ModelAst::default();
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "const" => ast.constants.push(self.constant()?),
                    "formula" => {
                        let pos = self.pos();
                        self.advance();
                        let name = self.ident()?;
                        self.expect(Tok::Eq)?;
                        let expr = self.expr()?;
                        self.expect(Tok::Semi)?;
                        ast.formulas.push(NamedExpr { name, expr, pos });
                    }
                    "label" => {
                        let pos = self.pos();
                        self.advance();
                        let name = match self.advance() {
                            Tok::Str(s) => s,
                            other => {
                                return Err(ModelError::Syntax {
                                    pos,
                                    message: format!("expected a quoted label name, found {other}"),
                                })
                            }
                        };
                        self.expect(Tok::Eq)?;
                        let expr = self.expr()?;
                        self.expect(Tok::Semi)?;
                        ast.labels.push(NamedExpr { name, expr, pos });
                    }
                    "module" => ast.modules.push(self.module()?),
                    "rewards" => return self.unsupported("reward structures"),
                    "system" => return self.unsupported("system ... endsystem composition"),
                    "global" => return self.unsupported("global variables"),
                    "init" => return self.unsupported("init ... endinit blocks"),
                    h if UNSUPPORTED_HEADERS.contains(&h) || h == "dtmc" => {
                        return self.unsupported("a second model type declaration")
                    }
                    _ => return self.syntax(format!("unexpected identifier `{kw}` at top level")),
                },
                other => return self.syntax(format!("unexpected {other} at top level")),
            }
        }
        Ok(ast)
    }

    fn constant(&mut self) -> Result<ConstDecl, ModelError> {
        let pos = self.pos();
        self.expect_keyword("const")?;
        let ty = if self.is_keyword("int") {
            self.advance();
            ConstType::Int
        } else if self.is_keyword("double") {
            self.advance();
            ConstType::Double
        } else if self.is_keyword("bool") {
            self.advance();
            ConstType::Bool
        } else {
            ConstType::Int
        };
        let name = self.ident()?;
        let value = if *self.peek() == Tok::Eq {
            self.advance();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(ConstDecl {
            name,
            ty,
            value,
            pos,
        })
    }

    fn module(&mut self) -> Result<ModuleDef, ModelError> {
        let pos = self.pos();
        self.expect_keyword("module")?;
        let name = self.ident()?;
        if *self.peek() == Tok::Eq {
            self.advance();
            let base = self.ident()?;
            self.expect(Tok::LBracket)?;
            let mut renames = Vec::new();
            loop {
                let from = self.ident()?;
                self.expect(Tok::Eq)?;
                let to = self.ident()?;
                renames.push((from, to));
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket)?;
            self.expect_keyword("endmodule")?;
            return Ok(ModuleDef::Renamed {
                name,
                base,
                renames,
                pos,
            });
        }
        let mut variables = Vec::new();
        let mut commands = Vec::new();
        loop {
            if self.is_keyword("endmodule") {
                self.advance();
                break;
            }
            match self.peek() {
                Tok::LBracket => commands.push(self.command()?),
                Tok::Ident(_) if *self.peek_at(1) == Tok::Colon => {
                    variables.push(self.variable()?)
                }
                Tok::Eof => return self.syntax(format!("module `{name}` is missing `endmodule`")),
                other => {
                    return self.syntax(format!(
                        "expected a variable declaration, a command or `endmodule`, found {other}"
                    ))
                }
            }
        }
        Ok(ModuleDef::Concrete(ModuleAst {
            name,
            variables,
            commands,
            pos,
        }))
    }

    fn variable(&mut self) -> Result<VarDecl, ModelError> {
        let pos = self.pos();
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let ty = if self.is_keyword("bool") {
            self.advance();
            VarType::Bool
        } else if *self.peek() == Tok::LBracket {
            self.advance();
            let low = self.expr()?;
            self.expect(Tok::DotDot)?;
            let high = self.expr()?;
            self.expect(Tok::RBracket)?;
            VarType::Int { low, high }
        } else if self.is_keyword("int") || self.is_keyword("clock") {
            return self.unsupported("unbounded variables");
        } else {
            return self.syntax(format!("expected `[low..high]` or `bool`, found {}", self.peek()));
        };
        let init = if self.is_keyword("init") {
            self.advance();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(VarDecl {
            name,
            ty,
            init,
            pos,
        })
    }

    fn command(&mut self) -> Result<CommandAst, ModelError> {
        let pos = self.pos();
        self.expect(Tok::LBracket)?;
        let action = if *self.peek() == Tok::RBracket {
            None
        } else {
            Some(self.ident()?)
        };
        self.expect(Tok::RBracket)?;
        let guard = self.expr()?;
        self.expect(Tok::Arrow)?;
        let mut updates = Vec::new();
        loop {
            updates.push(self.update()?);
            if *self.peek() == Tok::Plus {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        Ok(CommandAst {
            action,
            guard,
            updates,
            pos,
        })
    }

    fn starts_assignments(&self) -> bool {
        self.is_keyword("true")
            && matches!(self.peek_at(1), Tok::Semi | Tok::Plus)
            || (*self.peek() == Tok::LParen
                && matches!(self.peek_at(1), Tok::Ident(_))
                && *self.peek_at(2) == Tok::Prime)
    }

    fn update(&mut self) -> Result<UpdateAst, ModelError> {
        let prob = if self.starts_assignments() {
            Expr::Int(1)
        } else {
            let p = self.expr()?;
            self.expect(Tok::Colon)?;
            p
        };
        let mut assignments = Vec::new();
        if self.is_keyword("true") {
            self.advance();
        } else {
            loop {
                self.expect(Tok::LParen)?;
                let var = self.ident()?;
                self.expect(Tok::Prime)?;
                self.expect(Tok::Eq)?;
                let value = self.expr()?;
                self.expect(Tok::RParen)?;
                assignments.push((var, value));
                if *self.peek() == Tok::And {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        Ok(UpdateAst { prob, assignments })
    }

    // Expressions, loosest binding first.

    pub(crate) fn expr(&mut self) -> Result<Expr, ModelError> {
        let e = self.binary(0)?;
        if *self.peek() == Tok::Question {
            return self.unsupported("conditional expressions (`? :`)");
        }
        Ok(e)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::Iff => BinaryOp::Iff,
            Tok::Implies => BinaryOp::Implies,
            Tok::Or => BinaryOp::Or,
            Tok::And => BinaryOp::And,
            Tok::Eq => BinaryOp::Eq,
            Tok::Neq => BinaryOp::Neq,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing over binary operators with precedence ≥ `min`.
    fn binary(&mut self, min: u8) -> Result<Expr, ModelError> {
        let mut lhs = if min <= 4 && *self.peek() == Tok::Not {
            self.advance();
            Expr::Unary(UnaryOp::Not, Box::new(self.binary(4)?))
        } else {
            self.unary()?
        };
        while let Some(op) = self.binary_op() {
            let p = op.precedence();
            if p < min {
                break;
            }
            self.advance();
            let rhs = match op {
                BinaryOp::Implies | BinaryOp::Iff => self.binary(p)?,
                _ => self.binary(p + 1)?,
            };
            lhs = Expr::binary(op, lhs, rhs);
            if p == 5 {
                if let Some(next) = self.binary_op() {
                    if next.precedence() == 5 {
                        return self.syntax("comparison operators do not chain".into());
                    }
                }
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        match self.peek() {
            Tok::Minus => {
                self.advance();
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Not => {
                self.advance();
                Ok(Expr::Unary(UnaryOp::Not, Box::new(self.binary(4)?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ModelError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::Int(v))
            }
            Tok::Real(v) => {
                self.advance();
                Ok(Expr::Real(v))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "true" => {
                    self.advance();
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    self.advance();
                    Ok(Expr::Bool(false))
                }
                "min" | "max" if *self.peek_at(1) == Tok::LParen => {
                    self.advance();
                    self.advance();
                    let mut args = alloc::vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.advance();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    let f = if name == "min" { Builtin::Min } else { Builtin::Max };
                    Ok(Expr::Call(f, args))
                }
                _ if *self.peek_at(1) == Tok::LParen => {
                    self.unsupported(&format!("function `{name}` (only min and max are supported)"))
                }
                _ => Ok(Expr::Ident(self.ident()?)),
            },
            other => self.syntax(format!("expected an expression, found {other}")),
        }
    }
}

fn is_reserved(word: &str) -> bool {
    matches!(
        word,
        "true"
            | "false"
            | "module"
            | "endmodule"
            | "const"
            | "formula"
            | "label"
            | "init"
            | "bool"
            | "int"
            | "double"
            | "dtmc"
            | "rewards"
            | "endrewards"
            | "system"
            | "endsystem"
            | "global"
    )
}
