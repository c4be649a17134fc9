//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          // right-associative
//! atom   := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `x<i>`, `y<i>` are coordinates, `xdot<i>`, `ydot<i>` velocity atoms, `t`
//! is time, `sin cos exp log sqrt` are functions and every other identifier
//! is a named parameter.

use thiserror::Error;

use super::canon::parse_decimal;
use super::expr::{Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("index out of range at byte {pos}: `{name}` with dimension {n}")]
    IndexOutOfRange { pos: usize, name: String, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // optional exponent, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push((start, Tok::Num(text[start..i].to_string())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push((start, tok));
            i += c.len_utf8();
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek() {
            let neg = *op == '-';
            self.pos += 1;
            let t = self.term()?;
            terms.push(if neg { -t } else { t });
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek() {
            let div = *op == '/';
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if div { acc * rhs.recip() } else { acc * rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return Err(self.error("unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(s) => parse_decimal(&s).map(Expr::Num).ok_or(ParseError::Syntax {
                pos: at,
                msg: format!("malformed number `{s}`"),
            }),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(self.error(format!("expected `(` after `{name}`")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::func(f, arg));
                }
                self.identifier(at, name)
            }
            Tok::Op(c) => Err(ParseError::Syntax {
                pos: at,
                msg: format!("unexpected operator `{c}`"),
            }),
            Tok::RParen => Err(ParseError::Syntax {
                pos: at,
                msg: "unexpected `)`".into(),
            }),
        }
    }

    fn identifier(&self, at: usize, name: String) -> Result<Expr, ParseError> {
        if name == "t" {
            return Ok(Expr::t());
        }
        let indexed: [(&str, fn(usize) -> Var); 4] = [
            ("xdot", Var::XDot),
            ("ydot", Var::YDot),
            ("x", Var::X),
            ("y", Var::Y),
        ];
        for (prefix, make) in indexed {
            if let Some(digits) = name.strip_prefix(prefix) {
                if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                    let idx: usize = digits.parse().unwrap_or(0);
                    if idx == 0 || idx > self.n {
                        return Err(ParseError::IndexOutOfRange {
                            pos: at,
                            name,
                            n: self.n,
                        });
                    }
                    return Ok(Expr::var(make(idx - 1)));
                }
            }
        }
        Ok(Expr::param(&name))
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("expected `)`")),
        }
    }
}

/// Parses `text` in dimension `n`. The returned tree is not canonicalized.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        n,
    };
    if p.toks.is_empty() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}
