//! Tokenizer shared by the model and property parsers.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// 1-based line/column of a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Position {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Semi,
    Comma,
    DotDot,
    Arrow,
    Prime,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(v) => return write!(f, "integer `{v}`"),
            Tok::Real(v) => return write!(f, "number `{v}`"),
            Tok::Str(s) => return write!(f, "string \"{s}\""),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::DotDot => "`..`",
            Tok::Arrow => "`->`",
            Tok::Prime => "`'`",
            Tok::Eq => "`=`",
            Tok::Neq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Not => "`!`",
            Tok::And => "`&`",
            Tok::Or => "`|`",
            Tok::Implies => "`=>`",
            Tok::Iff => "`<=>`",
            Tok::Question => "`?`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Position,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct LexError {
    pub pos: Position,
    pub message: String,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        ($n:expr) => {{
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Position { line, column: col };
        let peek = chars.get(i + 1).copied();
        if c.is_whitespace() {
            bump!(1);
            continue;
        }
        if c == '/' && peek == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!(1);
            }
            continue;
        }
        if c == '/' && peek == Some('*') {
            bump!(2);
            loop {
                if i >= chars.len() {
                    return Err(LexError {
                        pos,
                        message: "unterminated block comment".into(),
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!(2);
                    break;
                }
                bump!(1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!(1);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && peek.is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!(1);
            }
            // `0..3` is a range, not a real literal
            if i < chars.len()
                && chars[i] == '.'
                && chars.get(i + 1) != Some(&'.')
            {
                real = true;
                bump!(1);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!(1);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    bump!(j - i);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!(1);
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                text.parse().map(Tok::Real).map_err(|_| LexError {
                    pos,
                    message: alloc::format!("malformed number `{text}`"),
                })?
            } else {
                text.parse().map(Tok::Int).map_err(|_| LexError {
                    pos,
                    message: alloc::format!("integer `{text}` out of range"),
                })?
            };
            out.push(Token { tok, pos });
            continue;
        }
        if c == '"' {
            bump!(1);
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(LexError {
                        pos,
                        message: "unterminated string".into(),
                    });
                }
                bump!(1);
            }
            if i >= chars.len() {
                return Err(LexError {
                    pos,
                    message: "unterminated string".into(),
                });
            }
            let text: String = chars[start..i].iter().collect();
            bump!(1);
            out.push(Token {
                tok: Tok::Str(text),
                pos,
            });
            continue;
        }
        let two = |a: char, b: char| c == a && peek == Some(b);
        let (tok, len) = if c == '<' && peek == Some('=') && chars.get(i + 2) == Some(&'>') {
            (Tok::Iff, 3)
        } else if two('-', '>') {
            (Tok::Arrow, 2)
        } else if two('.', '.') {
            (Tok::DotDot, 2)
        } else if two('!', '=') {
            (Tok::Neq, 2)
        } else if two('<', '=') {
            (Tok::Le, 2)
        } else if two('>', '=') {
            (Tok::Ge, 2)
        } else if two('=', '>') {
            (Tok::Implies, 2)
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '\'' => Tok::Prime,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '!' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '?' => Tok::Question,
                other => {
                    return Err(LexError {
                        pos,
                        message: alloc::format!("unexpected character `{other}`"),
                    })
                }
            };
            (tok, 1)
        };
        bump!(len);
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Position { line, column: col },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ranges_and_reals() {
        assert_eq!(
            toks("[0..10] 0.5 1e-3"),
            [
                Tok::LBracket,
                Tok::Int(0),
                Tok::DotDot,
                Tok::Int(10),
                Tok::RBracket,
                Tok::Real(0.5),
                Tok::Real(1e-3),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn multi_char_operators() {
        assert_eq!(
            toks("x'=1 -> <= >= != => <=>"),
            [
                Tok::Ident("x".into()),
                Tok::Prime,
                Tok::Eq,
                Tok::Int(1),
                Tok::Arrow,
                Tok::Le,
                Tok::Ge,
                Tok::Neq,
                Tok::Implies,
                Tok::Iff,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// c\n  \"stable\" /* x */ y").unwrap();
        assert_eq!(t[0].tok, Tok::Str("stable".into()));
        assert_eq!(t[0].pos, Position { line: 2, column: 3 });
        assert_eq!(t[1].tok, Tok::Ident("y".into()));
    }

    #[test]
    fn bad_character() {
        let err = tokenize("x # y").unwrap_err();
        assert_eq!(err.pos, Position { line: 1, column: 3 });
    }
}
