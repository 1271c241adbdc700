//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' int)?
//! base   := 'z'INT | number | 'i' | 'pi' | '(' expr ')' | ('exp' | 'log') '(' expr ')'
//! ```
//!
//! `int` may carry a sign and may be parenthesised. Subtrees made only of
//! literals are folded into a single constant while parsing.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Expr, Node};
use crate::error::ParseError;
use crate::scalar::{cexp, cln, cpowi};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn syntax(pos: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, ch) = bytes[i];
        match ch {
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                out.push((Tok::Plus, pos));
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push((Tok::Minus, pos));
                i += 1;
            }
            '*' | '\u{00d7}' => {
                out.push((Tok::Star, pos));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, pos));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, pos));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, pos));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, pos));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].1.is_ascii_digit() || bytes[i].1 == '.') {
                    i += 1;
                }
                // exponent: e[+-]digits, only when digits actually follow
                if i < bytes.len() && matches!(bytes[i].1, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j].1, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].1.is_ascii_digit() {
                        while j < bytes.len() && bytes[j].1.is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let end = if i < bytes.len() { bytes[i].0 } else { src.len() };
                let text = &src[bytes[start].0..end];
                let v: f64 = text.parse().map_err(|_| syntax(pos, format!("malformed number '{text}'")))?;
                out.push((Tok::Num(v), pos));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].1.is_ascii_alphabetic() {
                    i += 1;
                }
                let end = if i < bytes.len() { bytes[i].0 } else { src.len() };
                let word = &src[bytes[start].0..end];
                if word == "z" {
                    let dstart = i;
                    while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                        i += 1;
                    }
                    if dstart == i {
                        return Err(syntax(pos, "variable 'z' must be followed by an index"));
                    }
                    let dend = if i < bytes.len() { bytes[i].0 } else { src.len() };
                    let idx: usize =
                        src[bytes[dstart].0..dend].parse().map_err(|_| syntax(pos, "variable index out of range"))?;
                    if idx == 0 {
                        return Err(syntax(pos, "variables are numbered from z1; z0 is not in the grammar"));
                    }
                    out.push((Tok::Var(idx), pos));
                } else {
                    out.push((Tok::Ident(word.to_string()), pos));
                }
            }
            other => return Err(syntax(pos, format!("unexpected character '{other}'"))),
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
}

fn fold_binary(op: fn(Box<Node>, Box<Node>) -> Node, a: Node, b: Node) -> Node {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        let node = op(Box::new(Node::Const(*x)), Box::new(Node::Const(*y)));
        let v = match node {
            Node::Add(..) => Some(x + y),
            Node::Sub(..) => Some(x - y),
            Node::Mul(..) => Some(x * y),
            Node::Div(..) if y.norm_sqr() != 0.0 => Some(x / y),
            _ => None,
        };
        if let Some(v) = v {
            return Node::Const(v);
        }
    }
    op(Box::new(a), Box::new(b))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = fold_binary(Node::Add, lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = fold_binary(Node::Sub, lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = fold_binary(Node::Mul, lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = fold_binary(Node::Div, lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                Node::Const(c) => Node::Const(-c),
                other => Node::Neg(Box::new(other)),
            });
        }
        self.factor()
    }

    fn int_exponent(&mut self) -> Result<i32, ParseError> {
        let pos = self.pos();
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let k = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            _ => return Err(syntax(pos, "exponent must be an integer")),
        };
        if paren {
            self.expect(Tok::RParen, "')' after exponent")?;
        }
        Ok(if neg { -k } else { k })
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let k = self.int_exponent()?;
            if let Node::Const(c) = &base {
                if let Some(v) = cpowi(*c, k) {
                    return Ok(Node::Const(v));
                }
            }
            return Ok(Node::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Var(k) => {
                if k > self.n {
                    Err(ParseError::UnknownVariable { pos, index: k, n: self.n })
                } else {
                    Ok(Node::Var(k - 1))
                }
            }
            Tok::Num(v) => Ok(Node::Const(Complex64::new(v, 0.0))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(w) => match w.as_str() {
                "i" => Ok(Node::Const(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Node::Const(Complex64::new(PI, 0.0))),
                "exp" | "log" => {
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    let is_exp = w == "exp";
                    if let Node::Const(c) = &arg {
                        if is_exp {
                            return Ok(Node::Const(cexp(*c)));
                        }
                        if let Some(l) = cln(*c) {
                            return Ok(Node::Const(l));
                        }
                    }
                    Ok(if is_exp { Node::Exp(Box::new(arg)) } else { Node::Log(Box::new(arg)) })
                }
                other => Err(syntax(pos, format!("unknown identifier '{other}'"))),
            },
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, format!("unexpected token {other:?}"))),
        }
    }
}

pub(super) fn parse(src: &str, n: usize) -> Result<Expr, ParseError> {
    if n == 0 {
        return Err(syntax(0, "dimension must be positive"));
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, n };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected trailing token {:?}", p.peek())));
    }
    Ok(Expr { root, n })
}
