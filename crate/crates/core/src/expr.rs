//! Expression syntax: parsing, normalization onto the codelist alphabet and
//! lowering to a [`Codelist`].
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := atom ["^" natural]
//! atom   := "(" expr ")" | ("sqrt" | "exp" | "ln") "(" expr ")" | "x" natural | number
//! ```

use std::fmt;

use crate::codelist::{Codelist, Op};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// One-based variable index.
    Var(usize),
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    PowNat(Box<Expr>, u32),
    Recip(Box<Expr>),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    AddConst(Box<Expr>, f64),
    MulByConst(Box<Expr>, f64),
}

impl Expr {
    /// Real evaluation at `x` (`x[0]` is `x1`).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Var(k) => x[k - 1],
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::PowNat(a, m) => a.eval(x).powi(*m as i32),
            Expr::Recip(a) => 1.0 / a.eval(x),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Ln(a) => a.eval(x).ln(),
            Expr::AddConst(a, c) => a.eval(x) + c,
            Expr::MulByConst(a, c) => c * a.eval(x),
        }
    }

    /// Largest variable index referenced, 0 if none.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var(k) => *k,
            Expr::Const(_) => 0,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Neg(a)
            | Expr::PowNat(a, _)
            | Expr::Recip(a)
            | Expr::Sqrt(a)
            | Expr::Exp(a)
            | Expr::Ln(a)
            | Expr::AddConst(a, _)
            | Expr::MulByConst(a, _) => a.max_var(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Expr::Neg(a)
            | Expr::PowNat(a, _)
            | Expr::Recip(a)
            | Expr::Sqrt(a)
            | Expr::Exp(a)
            | Expr::Ln(a)
            | Expr::AddConst(a, _)
            | Expr::MulByConst(a, _) => 1 + a.size(),
        }
    }
}

impl Expr {
    /// Binding strength used when printing: sums 1, products 2, negation 3,
    /// powers 4, atoms 5.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) | Expr::AddConst(..) => 1,
            Expr::Mul(..) | Expr::Div(..) | Expr::Recip(_) | Expr::MulByConst(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::PowNat(..) => 4,
            Expr::Var(_) | Expr::Const(_) | Expr::Sqrt(_) | Expr::Exp(_) | Expr::Ln(_) => 5,
        }
    }
}

struct Operand<'a> {
    e: &'a Expr,
    paren: bool,
}

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.paren {
            write!(f, "({})", self.e)
        } else {
            write!(f, "{}", self.e)
        }
    }
}

/// Infix form with minimal parentheses; parses back to the same tree up to
/// normalization.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        let left = |e| Operand {
            e,
            paren: e.precedence() < p,
        };
        let right = |e| Operand {
            e,
            paren: e.precedence() <= p,
        };
        match self {
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Const(c) if c.is_sign_negative() => write!(f, "-{:?}", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Add(a, b) => write!(f, "{} + {}", left(a), right(b)),
            Expr::Sub(a, b) => write!(f, "{} - {}", left(a), right(b)),
            Expr::Mul(a, b) => write!(f, "{} * {}", left(a), right(b)),
            Expr::Div(a, b) => write!(f, "{} / {}", left(a), right(b)),
            Expr::Neg(a) => write!(f, "-{}", left(a)),
            Expr::PowNat(a, m) => write!(f, "{}^{m}", right(a)),
            Expr::Recip(a) => write!(f, "1.0 / {}", right(a)),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::AddConst(a, c) if c.is_sign_negative() => write!(f, "{} - {:?}", left(a), -c),
            Expr::AddConst(a, c) => write!(f, "{} + {c:?}", left(a)),
            Expr::MulByConst(a, c) => write!(f, "{} * {}", Expr::Const(*c), right(a)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Func(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sqrt,
    Exp,
    Ln,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    /// Source text of every `Num` token, for exponent parsing.
    texts: Vec<String>,
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        position,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Lexer> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut texts = Vec::new();
    let mut p = 0;
    while p < chars.len() {
        let c = chars[p];
        let start = p;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, start));
            texts.push(String::new());
            p += 1;
            continue;
        }
        if c.is_whitespace() {
            p += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            while p < chars.len() && (chars[p].is_ascii_digit() || chars[p] == '.') {
                p += 1;
            }
            if p < chars.len() && (chars[p] == 'e' || chars[p] == 'E') {
                let mut q = p + 1;
                if q < chars.len() && (chars[q] == '+' || chars[q] == '-') {
                    q += 1;
                }
                if q < chars.len() && chars[q].is_ascii_digit() {
                    while q < chars.len() && chars[q].is_ascii_digit() {
                        q += 1;
                    }
                    p = q;
                }
            }
            let text: String = chars[start..p].iter().collect();
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
            if !v.is_finite() {
                return Err(syntax(start, format!("number `{text}` is out of range")));
            }
            toks.push((Tok::Num(v), start));
            texts.push(text);
            continue;
        }
        if c.is_ascii_alphabetic() {
            while p < chars.len() && chars[p].is_ascii_alphanumeric() {
                p += 1;
            }
            let word: String = chars[start..p].iter().collect();
            let tok = match word.as_str() {
                "sqrt" => Tok::Func(Func::Sqrt),
                "exp" => Tok::Func(Func::Exp),
                "ln" => Tok::Func(Func::Ln),
                w => match w.strip_prefix('x').and_then(|d| {
                    (!d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                        .then(|| d.parse::<usize>().ok())
                        .flatten()
                }) {
                    Some(k) => Tok::Var(k),
                    None => return Err(Error::UnknownVariable(word)),
                },
            };
            toks.push((tok, start));
            texts.push(String::new());
            continue;
        }
        return Err(syntax(start, format!("unexpected character `{c}`")));
    }
    toks.push((Tok::End, chars.len()));
    texts.push(String::new());
    Ok(Lexer { toks, texts })
}

struct Parser {
    lexer: Lexer,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Tok {
        self.lexer.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.lexer.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
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
                    let at = self.offset();
                    self.bump();
                    let rhs = self.unary()?;
                    if constant_value(&rhs) == Some(0.0) {
                        return Err(syntax(at, "division by zero"));
                    }
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let idx = self.pos;
        match self.bump() {
            Tok::Num(_) => {
                let text = &self.lexer.texts[idx];
                let m: u32 = text
                    .parse()
                    .map_err(|_| syntax(at, format!("exponent `{text}` is not a natural number")))?;
                Ok(Expr::PowNat(Box::new(base), m))
            }
            _ => Err(syntax(at, "expected a natural exponent after `^`")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Var(k) => {
                if k == 0 || k > self.n {
                    Err(Error::UnknownVariable(format!("x{k}")))
                } else {
                    Ok(Expr::Var(k))
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Func(func) => {
                self.expect(Tok::LParen, "`(` after function name")?;
                let e = Box::new(self.expr()?);
                self.expect(Tok::RParen, "`)`")?;
                Ok(match func {
                    Func::Sqrt => Expr::Sqrt(e),
                    Func::Exp => Expr::Exp(e),
                    Func::Ln => Expr::Ln(e),
                })
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            t => Err(syntax(at, format!("unexpected token {t:?}"))),
        }
    }
}

/// Value of a variable-free subtree, if it is one and folds to a finite number.
fn constant_value(e: &Expr) -> Option<f64> {
    if e.max_var() == 0 {
        let v = e.eval(&[]);
        v.is_finite().then_some(v)
    } else {
        None
    }
}

/// Parses `source` over variables `x1 … xn`.
pub fn parse(source: &str, n: usize) -> Result<Expr> {
    let mut p = Parser {
        lexer: lex(source)?,
        pos: 0,
        n,
    };
    let e = p.expr()?;
    if p.peek() != Tok::End {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

fn fold_error(message: &str) -> Error {
    syntax(0, message)
}

fn finite(v: f64) -> Result<Expr> {
    if v.is_finite() {
        Ok(Expr::Const(v))
    } else {
        Err(fold_error("constant subexpression overflows"))
    }
}

fn add_norm(a: Expr, b: Expr) -> Result<Expr> {
    Ok(match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => finite(x + y)?,
        (a, Expr::Const(c)) | (Expr::Const(c), a) => Expr::AddConst(Box::new(a), c),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    })
}

fn mul_norm(a: Expr, b: Expr) -> Result<Expr> {
    Ok(match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => finite(x * y)?,
        (a, Expr::Const(c)) | (Expr::Const(c), a) => scale_norm(a, c)?,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    })
}

fn scale_norm(a: Expr, c: f64) -> Result<Expr> {
    Ok(match a {
        Expr::Const(x) => finite(c * x)?,
        a => Expr::MulByConst(Box::new(a), c),
    })
}

fn recip_norm(a: Expr) -> Result<Expr> {
    match a {
        Expr::Const(x) if x == 0.0 => Err(fold_error("division by zero")),
        Expr::Const(x) => finite(1.0 / x),
        a => Ok(Expr::Recip(Box::new(a))),
    }
}

/// Rewrites onto the codelist alphabet and folds constant subtrees.
///
/// Subtraction, division and negation are eliminated, constant operands become
/// `AddConst` / `MulByConst`, exponents 0 and 1 are removed. A result that does
/// not depend on any variable is rejected.
pub fn normalize(e: &Expr) -> Result<Expr> {
    match norm(e)? {
        Expr::Const(_) => Err(Error::ConstantExpression),
        e => Ok(e),
    }
}

fn norm(e: &Expr) -> Result<Expr> {
    match e {
        Expr::Var(k) => Ok(Expr::Var(*k)),
        Expr::Const(c) => finite(*c),
        Expr::Add(a, b) => add_norm(norm(a)?, norm(b)?),
        Expr::Sub(a, b) => add_norm(norm(a)?, scale_norm(norm(b)?, -1.0)?),
        Expr::Mul(a, b) => mul_norm(norm(a)?, norm(b)?),
        Expr::Div(a, b) => {
            let (a, b) = (norm(a)?, norm(b)?);
            match (a, b) {
                (_, Expr::Const(y)) if y == 0.0 => Err(fold_error("division by zero")),
                (Expr::Const(x), Expr::Const(y)) => finite(x / y),
                (a, Expr::Const(y)) => scale_norm(a, 1.0 / y),
                (Expr::Const(x), b) if x == 1.0 => recip_norm(b),
                (Expr::Const(x), b) => scale_norm(recip_norm(b)?, x),
                (a, b) => Ok(Expr::Mul(Box::new(a), Box::new(recip_norm(b)?))),
            }
        }
        Expr::Neg(a) => scale_norm(norm(a)?, -1.0),
        Expr::PowNat(a, m) => match (norm(a)?, *m) {
            (_, 0) => Ok(Expr::Const(1.0)),
            (a, 1) => Ok(a),
            (Expr::Const(x), m) => finite(x.powi(m as i32)),
            (a, m) => Ok(Expr::PowNat(Box::new(a), m)),
        },
        Expr::Recip(a) => recip_norm(norm(a)?),
        Expr::Sqrt(a) => match norm(a)? {
            Expr::Const(x) if x < 0.0 => Err(fold_error("square root of a negative constant")),
            Expr::Const(x) => finite(x.sqrt()),
            a => Ok(Expr::Sqrt(Box::new(a))),
        },
        Expr::Exp(a) => match norm(a)? {
            Expr::Const(x) => finite(x.exp()),
            a => Ok(Expr::Exp(Box::new(a))),
        },
        Expr::Ln(a) => match norm(a)? {
            Expr::Const(x) if x <= 0.0 => Err(fold_error("logarithm of a non-positive constant")),
            Expr::Const(x) => finite(x.ln()),
            a => Ok(Expr::Ln(Box::new(a))),
        },
        Expr::AddConst(a, c) => add_norm(norm(a)?, finite(*c)?),
        Expr::MulByConst(a, c) => {
            finite(*c)?;
            scale_norm(norm(a)?, *c)
        }
    }
}

/// Lowers a normalized expression to a codelist over `n` variables, one line
/// per node in post-order.
pub fn lower(e: &Expr, n: usize) -> Result<Codelist> {
    let mut lines = vec![Op::Var; n];
    let out = emit(e, n, &mut lines)?;
    Codelist::with_output(n, lines, out)
}

fn emit(e: &Expr, n: usize, lines: &mut Vec<Op>) -> Result<usize> {
    let op = match e {
        Expr::Var(k) => {
            if *k == 0 || *k > n {
                return Err(Error::UnknownVariable(format!("x{k}")));
            }
            return Ok(k - 1);
        }
        Expr::Add(a, b) => Op::Add(emit(a, n, lines)?, emit(b, n, lines)?),
        Expr::Mul(a, b) => Op::Mul(emit(a, n, lines)?, emit(b, n, lines)?),
        Expr::PowNat(a, m) => Op::PowNat(emit(a, n, lines)?, *m),
        Expr::Recip(a) => Op::Recip(emit(a, n, lines)?),
        Expr::Sqrt(a) => Op::Sqrt(emit(a, n, lines)?),
        Expr::Exp(a) => Op::Exp(emit(a, n, lines)?),
        Expr::Ln(a) => Op::Ln(emit(a, n, lines)?),
        Expr::AddConst(a, c) => Op::AddConst(emit(a, n, lines)?, *c),
        Expr::MulByConst(a, c) => Op::MulByConst(emit(a, n, lines)?, *c),
        Expr::Const(_) => return Err(Error::ConstantExpression),
        Expr::Sub(..) | Expr::Div(..) | Expr::Neg(_) => {
            return Err(syntax(0, "expression must be normalized before lowering"))
        }
    };
    lines.push(op);
    Ok(lines.len() - 1)
}

/// Parses, normalizes and lowers in one step.
pub fn compile(source: &str, n: usize) -> Result<Codelist> {
    lower(&normalize(&parse(source, n)?)?, n)
}
