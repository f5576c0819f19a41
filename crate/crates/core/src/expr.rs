//! Expression language for declaring chart maps.
//!
//! Grammar (precedence from loosest to tightest):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right-associative
//! atom    := number | 'u1'..'u4' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt | atan
//! ```

use std::fmt;

use crate::error::{GeomError, Result};
use crate::jet::{Elementary, Jet};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based parameter index (`u1` is `Param(0)`).
    Param(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Elementary, Box<Expr>),
}

impl Expr {
    /// Largest parameter index referenced, if any.
    pub fn max_param(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Param(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_param(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_param(), b.max_param()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Param(i) => params[*i],
            Expr::Add(a, b) => a.eval(params) + b.eval(params),
            Expr::Sub(a, b) => a.eval(params) - b.eval(params),
            Expr::Mul(a, b) => a.eval(params) * b.eval(params),
            Expr::Div(a, b) => a.eval(params) / b.eval(params),
            Expr::Neg(a) => -a.eval(params),
            Expr::Pow(a, b) => a.eval(params).powf(b.eval(params)),
            Expr::Call(f, a) => f.eval(a.eval(params)),
        }
    }

    /// Evaluates the expression on jets of the parameters.
    pub fn eval_jet(&self, params: &[Jet]) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(*c, params[0].num_vars(), params[0].order()),
            Expr::Param(i) => params[*i],
            Expr::Add(a, b) => a.eval_jet(params)? + b.eval_jet(params)?,
            Expr::Sub(a, b) => a.eval_jet(params)? - b.eval_jet(params)?,
            Expr::Mul(a, b) => a.eval_jet(params)? * b.eval_jet(params)?,
            Expr::Div(a, b) => a.eval_jet(params)?.checked_div(&b.eval_jet(params)?)?,
            Expr::Neg(a) => -a.eval_jet(params)?,
            Expr::Pow(a, b) => {
                let base = a.eval_jet(params)?;
                match b.as_ref() {
                    Expr::Const(c) => base.powf(*c)?,
                    Expr::Neg(inner) if matches!(inner.as_ref(), Expr::Const(_)) => {
                        let Expr::Const(c) = inner.as_ref() else { unreachable!() };
                        base.powf(-*c)?
                    }
                    _ => (b.eval_jet(params)? * base.ln()?).exp(),
                }
            }
            Expr::Call(f, a) => a.eval_jet(params)?.apply(*f)?,
        })
    }
}

/// Fully parenthesized rendering; re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Param(i) => write!(f, "u{}", i + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, at) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if b.is_ascii_digit() || b == b'.' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut p = self.pos + 1;
                if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                    p += 1;
                }
                if p < bytes.len() && bytes[p].is_ascii_digit() {
                    while p < bytes.len() && bytes[p].is_ascii_digit() {
                        p += 1;
                    }
                    self.pos = p;
                }
            }
            let text = &self.src[start..self.pos];
            return text
                .parse::<f64>()
                .map(|v| (Tok::Num(v), start))
                .map_err(|_| GeomError::Syntax {
                    offset: start,
                    expected: "number".into(),
                });
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(GeomError::Syntax {
            offset: start,
            expected: format!("expression (found unexpected character {ch:?})"),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

const EXPECT_OPERAND: &str = "expression";

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(name, offset),
            _ => Err(GeomError::Syntax {
                offset,
                expected: EXPECT_OPERAND.into(),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.peek() {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            _ => Err(GeomError::Syntax {
                offset: self.offset(),
                expected: "`)` or operator".into(),
            }),
        }
    }

    fn ident(&mut self, name: String, offset: usize) -> Result<Expr> {
        if let Some(f) = Elementary::from_name(&name) {
            if *self.peek() != Tok::LParen {
                return Err(GeomError::Arity {
                    name,
                    offset,
                    expected: 1,
                    found: 0,
                });
            }
            self.bump();
            if *self.peek() == Tok::RParen {
                return Err(GeomError::Arity {
                    name,
                    offset,
                    expected: 1,
                    found: 0,
                });
            }
            let arg = self.expr()?;
            let mut found = 1;
            while *self.peek() == Tok::Comma {
                self.bump();
                self.expr()?;
                found += 1;
            }
            if found != 1 {
                return Err(GeomError::Arity {
                    name,
                    offset,
                    expected: 1,
                    found,
                });
            }
            self.expect_rparen()?;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        match name.as_str() {
            "pi" => Ok(Expr::Const(std::f64::consts::PI)),
            "e" => Ok(Expr::Const(std::f64::consts::E)),
            "u1" => Ok(Expr::Param(0)),
            "u2" => Ok(Expr::Param(1)),
            "u3" => Ok(Expr::Param(2)),
            "u4" => Ok(Expr::Param(3)),
            _ => Err(GeomError::UnknownIdentifier { name, offset }),
        }
    }
}

/// Parses one expression of the chart DSL.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(GeomError::Syntax {
            offset: p.offset(),
            expected: "operator or end of input".into(),
        });
    }
    Ok(e)
}
