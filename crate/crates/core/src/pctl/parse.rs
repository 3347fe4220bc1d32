use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::{desugar, Comparison, PathFormula, ProbBound, PropertyQuery, StateFormula};
use crate::lexer::{tokenize, LexError, Position, Tok, Token};
use crate::semantics::AtomId;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PropertyError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Position, message: String },
    #[error("{pos}: probability bound {value} is outside [0,1]")]
    BoundOutOfRange { pos: Position, value: f64 },
    #[error("{pos}: step bound must be a non-negative integer")]
    NegativeHorizon { pos: Position },
    #[error("{pos}: P=? is only allowed as the outermost operator")]
    NestedQuery { pos: Position },
}

impl PropertyError {
    fn shift_line(self, offset: u32) -> Self {
        let bump = |mut p: Position| {
            p.line += offset;
            p
        };
        match self {
            PropertyError::Lex(mut e) => {
                e.pos = bump(e.pos);
                PropertyError::Lex(e)
            }
            PropertyError::Syntax { pos, message } => PropertyError::Syntax {
                pos: bump(pos),
                message,
            },
            PropertyError::BoundOutOfRange { pos, value } => PropertyError::BoundOutOfRange {
                pos: bump(pos),
                value,
            },
            PropertyError::NegativeHorizon { pos } => {
                PropertyError::NegativeHorizon { pos: bump(pos) }
            }
            PropertyError::NestedQuery { pos } => PropertyError::NestedQuery { pos: bump(pos) },
        }
    }
}

/// Parses a single property and desugars it.
pub fn parse_property(text: &str) -> Result<PropertyQuery, PropertyError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, at: 0 };
    let formula = parser.top()?;
    parser.expect_eof()?;
    Ok(PropertyQuery {
        source: text.trim().to_string(),
        formula: desugar(&formula),
    })
}

/// Parses a property file: one property per line, `//` comments, blank
/// lines ignored. Error positions refer to lines of the whole file.
pub fn parse_property_file(text: &str) -> Result<Vec<PropertyQuery>, PropertyError> {
    let mut out = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let content = match line.find("//") {
            Some(i) => &line[..i],
            None => line,
        };
        if content.trim().is_empty() {
            continue;
        }
        let query = parse_property(content).map_err(|e| e.shift_line(index as u32))?;
        out.push(query);
    }
    Ok(out)
}

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

    fn error<T>(&self, message: String) -> Result<T, PropertyError> {
        Err(PropertyError::Syntax {
            pos: self.pos(),
            message,
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), PropertyError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected {tok}, found {}", self.peek()))
        }
    }

    fn expect_eof(&self) -> Result<(), PropertyError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            other => self.error(format!("unexpected {other} after property")),
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    /// Outermost formula: the only place `P=?` is accepted.
    fn top(&mut self) -> Result<StateFormula, PropertyError> {
        if self.is_keyword("P") && *self.peek_at(1) == Tok::Eq {
            let f = self.prob_operator(true)?;
            if !matches!(self.peek(), Tok::Eof) {
                return self.error(format!("unexpected {} after P=? [ ... ]", self.peek()));
            }
            return Ok(f);
        }
        self.implies()
    }

    fn implies(&mut self) -> Result<StateFormula, PropertyError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.advance();
            let rhs = self.implies()?;
            return Ok(StateFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<StateFormula, PropertyError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.and()?;
            lhs = StateFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<StateFormula, PropertyError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = StateFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<StateFormula, PropertyError> {
        if *self.peek() == Tok::Not {
            self.advance();
            return Ok(StateFormula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<StateFormula, PropertyError> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "true" => {
                self.advance();
                Ok(StateFormula::True)
            }
            Tok::Ident(w) if w == "false" => {
                self.advance();
                Ok(StateFormula::False)
            }
            Tok::Ident(w) if w == "P" => self.prob_operator(false),
            Tok::Str(label) => {
                let pos = self.pos();
                self.advance();
                let atom = AtomId::new(label);
                if !atom.is_label() {
                    return Err(PropertyError::Syntax {
                        pos,
                        message: format!("\"{atom}\" is not a valid label name"),
                    });
                }
                Ok(StateFormula::Atom(atom))
            }
            Tok::LParen => {
                if let Some(atom) = self.inline_comparison() {
                    return Ok(StateFormula::Atom(atom));
                }
                self.advance();
                let f = self.implies()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            other => self.error(format!("expected a state formula, found {other}")),
        }
    }

    /// `( var op const )`, registered as an atom named `var op const`.
    fn inline_comparison(&mut self) -> Option<AtomId> {
        let Tok::Ident(var) = self.peek_at(1).clone() else {
            return None;
        };
        if matches!(var.as_str(), "true" | "false" | "P") {
            return None;
        }
        let op = match self.peek_at(2) {
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            _ => return None,
        };
        let (rhs, len) = match (self.peek_at(3), self.peek_at(4)) {
            (Tok::Int(v), _) => (v.to_string(), 1),
            (Tok::Ident(c), _) => (c.clone(), 1),
            (Tok::Minus, Tok::Int(v)) => (format!("-{v}"), 2),
            _ => return None,
        };
        if *self.peek_at(3 + len) != Tok::RParen {
            return None;
        }
        for _ in 0..(4 + len) {
            self.advance();
        }
        Some(AtomId::new(format!("{var}{op}{rhs}")))
    }

    fn prob_operator(&mut self, allow_query: bool) -> Result<StateFormula, PropertyError> {
        let start = self.pos();
        self.advance(); // P
        let bound = match self.advance() {
            Tok::Eq => {
                if *self.peek() != Tok::Question {
                    return self.error(format!("expected `?` after `P=`, found {}", self.peek()));
                }
                self.advance();
                if !allow_query {
                    return Err(PropertyError::NestedQuery { pos: start });
                }
                ProbBound::Query { complement: false }
            }
            tok @ (Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge) => {
                let cmp = match tok {
                    Tok::Lt => Comparison::Lt,
                    Tok::Le => Comparison::Le,
                    Tok::Gt => Comparison::Gt,
                    _ => Comparison::Ge,
                };
                let pos = self.pos();
                let negative = if *self.peek() == Tok::Minus {
                    self.advance();
                    true
                } else {
                    false
                };
                let value = match self.advance() {
                    Tok::Int(v) => v as f64,
                    Tok::Real(v) => v,
                    other => {
                        return Err(PropertyError::Syntax {
                            pos,
                            message: format!("expected a probability, found {other}"),
                        })
                    }
                };
                let value = if negative { -value } else { value };
                if !(0.0..=1.0).contains(&value) {
                    return Err(PropertyError::BoundOutOfRange { pos, value });
                }
                ProbBound::Compare(cmp, value)
            }
            other => {
                return Err(PropertyError::Syntax {
                    pos: start,
                    message: format!("expected a comparison or `=?` after `P`, found {other}"),
                })
            }
        };
        self.expect(Tok::LBracket)?;
        let path = self.path()?;
        self.expect(Tok::RBracket)?;
        Ok(StateFormula::prob(bound, path))
    }

    fn horizon(&mut self) -> Result<Option<u32>, PropertyError> {
        if *self.peek() != Tok::Le {
            return Ok(None);
        }
        self.advance();
        let pos = self.pos();
        match self.advance() {
            Tok::Int(k) => u32::try_from(k)
                .map(Some)
                .map_err(|_| PropertyError::NegativeHorizon { pos }),
            Tok::Minus => Err(PropertyError::NegativeHorizon { pos }),
            other => Err(PropertyError::Syntax {
                pos,
                message: format!("expected a step bound, found {other}"),
            }),
        }
    }

    fn path(&mut self) -> Result<PathFormula, PropertyError> {
        for op in ["X", "F", "G"] {
            if self.is_keyword(op) {
                self.advance();
                let bound = if op == "X" { None } else { self.horizon()? };
                let operand = Box::new(self.unary()?);
                return Ok(match op {
                    "X" => PathFormula::Next(operand),
                    "F" => PathFormula::Eventually(bound, operand),
                    _ => PathFormula::Globally(bound, operand),
                });
            }
        }
        let lhs = self.implies()?;
        if !self.is_keyword("U") {
            return self.error(format!("expected `U` in path formula, found {}", self.peek()));
        }
        self.advance();
        let bound = self.horizon()?;
        let rhs = self.implies()?;
        Ok(match bound {
            Some(k) => PathFormula::BoundedUntil(Box::new(lhs), k, Box::new(rhs)),
            None => PathFormula::Until(Box::new(lhs), Box::new(rhs)),
        })
    }
}
