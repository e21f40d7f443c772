//! Parser and evaluator for the nonlinearity `omega(rho, g)`.
//!
//! The grammar is a small arithmetic language over the two variables `rho`
//! and `g`, the constants `pi` and `e`, and the calls `sin`, `cos`, `exp`,
//! `log`, `abs`, `sqrt`. Precedence, loosest to tightest:
//!
//! | level | operators | associativity |
//! |-------|-----------|---------------|
//! | 1     | `+` `-`   | left          |
//! | 2     | `*` `/`   | left          |
//! | 3     | unary `-` | prefix        |
//! | 4     | `^`       | right         |
//!
//! so `2^3^2` is `2^(3^2) = 512` and `-2^2` is `-(2^2) = -4`. The parser is
//! a hand-rolled recursive descent over a byte tokenizer, which keeps error
//! offsets exact and the dependency surface empty.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Rho,
    G,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// An expression node. `span` is the byte range in the source it came from;
/// equality is structural and ignores spans so reparsed printouts compare
/// equal to their originals.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: (usize, usize),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a == b,
            (ExprKind::Rho, ExprKind::Rho) => true,
            (ExprKind::G, ExprKind::G) => true,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a == b,
            (ExprKind::Bin(op_a, la, ra), ExprKind::Bin(op_b, lb, rb)) => {
                op_a == op_b && la == lb && ra == rb
            }
            (ExprKind::Call(fa, a), ExprKind::Call(fb, b)) => fa == fb && a == b,
            _ => false,
        }
    }
}

impl Expr {
    fn new(kind: ExprKind, span: (usize, usize)) -> Self {
        Expr { kind, span }
    }

    /// Canonical form with every non-atomic operand parenthesized;
    /// reparsing it yields a structurally identical tree.
    pub fn canonical(&self) -> String {
        match &self.kind {
            ExprKind::Num(v) => format!("{v}"),
            ExprKind::Rho => "rho".to_string(),
            ExprKind::G => "g".to_string(),
            ExprKind::Neg(inner) => format!("-{}", inner.atomized()),
            ExprKind::Bin(op, l, r) => {
                format!("{} {} {}", l.atomized(), op.symbol(), r.atomized())
            }
            ExprKind::Call(f, arg) => format!("{}({})", f.name(), arg.canonical()),
        }
    }

    fn atomized(&self) -> String {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Rho | ExprKind::G | ExprKind::Call(..) => {
                self.canonical()
            }
            _ => format!("({})", self.canonical()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical())
    }
}

/// Syntax error: byte offset, what was expected there, and what was found.
#[derive(Debug, Clone, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

/// Evaluation failure (division by zero, log/sqrt of a negative, non-finite
/// result), tagged with the byte span of the offending node.
#[derive(Debug, Clone, Error)]
#[error("domain error at bytes {}..{}: {message}", span.0, span.1)]
pub struct EvalError {
    pub message: String,
    pub span: (usize, usize),
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
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its byte range in the source.
    fn next(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start, start));
        }
        let b = self.src[self.pos];
        let simple = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((tok, start, self.pos));
        }
        if b.is_ascii_digit() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                self.pos += 1;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
            if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
                let mark = self.pos;
                self.pos += 1;
                if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    // not an exponent after all ("2e" or "2e+"): back off
                    self.pos = mark;
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
            let value: f64 = text.parse().map_err(|_| ParseError {
                offset: start,
                expected: vec!["number"],
                found: format!("{text:?}"),
            })?;
            return Ok((Tok::Num(value), start, self.pos));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
            return Ok((Tok::Ident(text.to_string()), start, self.pos));
        }
        Err(ParseError {
            offset: start,
            expected: vec!["number", "identifier", "operator", "'('", "')'"],
            found: format!("byte 0x{b:02x}"),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize, usize) {
        &self.toks[self.cursor]
    }

    fn bump(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.cursor].clone();
        if self.cursor + 1 < self.toks.len() {
            self.cursor += 1;
        }
        t
    }

    fn err(&self, expected: Vec<&'static str>) -> ParseError {
        let (tok, offset, _) = self.peek();
        ParseError {
            offset: *offset,
            expected,
            found: tok.describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = Expr::new(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().0 {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = Expr::new(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    // unary minus binds looser than '^'
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let (Tok::Minus, start, _) = self.peek() {
            let start = *start;
            self.bump();
            let inner = self.factor()?;
            let span = (start, inner.span.1);
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek().0, Tok::Caret) {
            self.bump();
            // right-associative; the exponent may carry a unary minus
            let exponent = self.factor()?;
            let span = (base.span.0, exponent.span.1);
            return Ok(Expr::new(
                ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().0.clone() {
            Tok::Num(value) => {
                let (_, start, end) = self.bump();
                Ok(Expr::new(ExprKind::Num(value), (start, end)))
            }
            Tok::LParen => {
                let (_, start, _) = self.bump();
                let inner = self.expr()?;
                match self.peek().0 {
                    Tok::RParen => {
                        let (_, _, rp_end) = self.bump();
                        Ok(Expr::new(inner.kind, (start, rp_end)))
                    }
                    _ => Err(self.err(vec!["')'"])),
                }
            }
            Tok::Ident(name) => {
                let (_, start, end) = self.bump();
                if let Some(func) = Func::from_name(&name) {
                    match self.peek().0 {
                        Tok::LParen => {
                            self.bump();
                            let arg = self.expr()?;
                            match self.peek().0 {
                                Tok::RParen => {
                                    let (_, _, rp_end) = self.bump();
                                    Ok(Expr::new(
                                        ExprKind::Call(func, Box::new(arg)),
                                        (start, rp_end),
                                    ))
                                }
                                _ => Err(self.err(vec!["')'"])),
                            }
                        }
                        _ => Err(self.err(vec!["'(' after function name"])),
                    }
                } else {
                    let kind = match name.as_str() {
                        "rho" => ExprKind::Rho,
                        "g" => ExprKind::G,
                        "pi" => ExprKind::Num(std::f64::consts::PI),
                        "e" => ExprKind::Num(std::f64::consts::E),
                        _ => {
                            return Err(ParseError {
                                offset: start,
                                expected: vec![
                                    "rho", "g", "pi", "e", "sin", "cos", "exp", "log", "abs",
                                    "sqrt",
                                ],
                                found: format!("identifier {name:?}"),
                            })
                        }
                    };
                    Ok(Expr::new(kind, (start, end)))
                }
            }
            _ => Err(self.err(vec!["number", "identifier", "'('", "'-'"])),
        }
    }
}

/// Parses a full expression; trailing input is a syntax error.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(src);
    let mut toks = Vec::new();
    loop {
        let (tok, start, end) = lexer.next()?;
        let done = tok == Tok::Eof;
        toks.push((tok, start, end));
        if done {
            break;
        }
    }
    let mut parser = Parser { toks, cursor: 0 };
    let expr = parser.expr()?;
    match parser.peek().0 {
        Tok::Eof => Ok(expr),
        _ => Err(parser.err(vec!["operator", "end of input"])),
    }
}

fn finite(value: f64, what: &str, span: (usize, usize)) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError {
            message: format!("{what} produced a non-finite result"),
            span,
        })
    }
}

/// Evaluates `expr` at the point `(rho, g)`.
pub fn eval(expr: &Expr, rho: f64, g: f64) -> Result<f64, EvalError> {
    let span = expr.span;
    match &expr.kind {
        ExprKind::Num(v) => Ok(*v),
        ExprKind::Rho => Ok(rho),
        ExprKind::G => Ok(g),
        ExprKind::Neg(inner) => Ok(-eval(inner, rho, g)?),
        ExprKind::Bin(op, l, r) => {
            let a = eval(l, rho, g)?;
            let b = eval(r, rho, g)?;
            match op {
                BinOp::Add => finite(a + b, "addition", span),
                BinOp::Sub => finite(a - b, "subtraction", span),
                BinOp::Mul => finite(a * b, "multiplication", span),
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError {
                            message: "division by zero".into(),
                            span,
                        });
                    }
                    finite(a / b, "division", span)
                }
                BinOp::Pow => finite(a.powf(b), "power", span),
            }
        }
        ExprKind::Call(func, arg) => {
            let x = eval(arg, rho, g)?;
            match func {
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Exp => finite(x.exp(), "exp", span),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(EvalError {
                            message: format!("log of non-positive value {x}"),
                            span,
                        });
                    }
                    Ok(x.ln())
                }
                Func::Abs => Ok(x.abs()),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(EvalError {
                            message: format!("sqrt of negative value {x}"),
                            span,
                        });
                    }
                    Ok(x.sqrt())
                }
            }
        }
    }
}
