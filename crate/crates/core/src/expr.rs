//! Closed-form formulas in one integer variable `j`.
//!
//! Grammar (whitespace insensitive, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' factor)?
//! atom   := number | 'j' | 'sqrt' '(' expr ')' | '(' expr ')' | '-' atom
//! ```
//!
//! Numbers are plain decimals with an optional fraction; there is no
//! exponent syntax.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Literal(f64),
    Var,
    Neg(Box<ExprAst>),
    Sqrt(Box<ExprAst>),
    Binary { op: BinOp, lhs: Box<ExprAst>, rhs: Box<ExprAst> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("domain error in `{0}`")]
    DomainError(String),
    #[error("variable value {0} is outside the formula domain j >= 1")]
    VariableOutOfRange(i64),
}

impl ExprAst {
    pub fn binary(op: BinOp, lhs: ExprAst, rhs: ExprAst) -> Self {
        ExprAst::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    /// Evaluates at an integer `j ≥ 1`.
    pub fn eval(&self, j: i64) -> Result<f64, EvalError> {
        if j < 1 {
            return Err(EvalError::VariableOutOfRange(j));
        }
        self.eval_real(j as f64)
    }

    /// Evaluates with the variable bound to an arbitrary real. Used when a
    /// formula describes a function on `[0, 1]` rather than a sequence.
    pub fn eval_real(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            ExprAst::Literal(v) => Ok(*v),
            ExprAst::Var => Ok(x),
            ExprAst::Neg(a) => Ok(-a.eval_real(x)?),
            ExprAst::Sqrt(a) => {
                let v = a.eval_real(x)?;
                if v < 0.0 {
                    Err(EvalError::DomainError(self.to_string()))
                } else {
                    Ok(v.sqrt())
                }
            }
            ExprAst::Binary { op, lhs, rhs } => {
                let (l, r) = (lhs.eval_real(x)?, rhs.eval_real(x)?);
                let out = match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::DivisionByZero(self.to_string()));
                        }
                        l / r
                    }
                    BinOp::Pow => l.powf(r),
                };
                if out.is_finite() {
                    Ok(out)
                } else {
                    Err(EvalError::DomainError(self.to_string()))
                }
            }
        }
    }

    /// Replaces every occurrence of the variable with `inner`.
    pub fn substitute(&self, inner: &ExprAst) -> ExprAst {
        match self {
            ExprAst::Literal(v) => ExprAst::Literal(*v),
            ExprAst::Var => inner.clone(),
            ExprAst::Neg(a) => ExprAst::Neg(Box::new(a.substitute(inner))),
            ExprAst::Sqrt(a) => ExprAst::Sqrt(Box::new(a.substitute(inner))),
            ExprAst::Binary { op, lhs, rhs } => ExprAst::binary(*op, lhs.substitute(inner), rhs.substitute(inner)),
        }
    }
}

/// Canonical, fully parenthesised rendering that re-parses to the same tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Literal(v) => write!(f, "{v}"),
            ExprAst::Var => write!(f, "j"),
            ExprAst::Neg(a) => write!(f, "-({a})"),
            ExprAst::Sqrt(a) => write!(f, "sqrt({a})"),
            ExprAst::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
        }
    }
}

pub fn parse(text: &str) -> Result<ExprAst, SyntaxError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]));
    }
    Ok(ast)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&'static str]) -> SyntaxError {
        SyntaxError { offset: self.pos, expected: expected.to_vec() }
    }

    fn expr(&mut self) -> Result<ExprAst, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = ExprAst::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<ExprAst, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = ExprAst::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<ExprAst, SyntaxError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            Ok(ExprAst::binary(BinOp::Pow, base, self.factor()?))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<ExprAst, SyntaxError> {
        const ATOM: &[&str] = &["number", "'j'", "'sqrt'", "'('", "'-'"];
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(ExprAst::Neg(Box::new(self.atom()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error(&["')'"]));
                }
                Ok(inner)
            }
            Some(b'j') => {
                self.pos += 1;
                Ok(ExprAst::Var)
            }
            Some(b's') => {
                if self.src[self.pos..].starts_with(b"sqrt") {
                    self.pos += 4;
                    if !self.eat(b'(') {
                        return Err(self.error(&["'('"]));
                    }
                    let inner = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.error(&["')'"]));
                    }
                    Ok(ExprAst::Sqrt(Box::new(inner)))
                } else {
                    Err(self.error(ATOM))
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            _ => Err(self.error(ATOM)),
        }
    }

    fn number(&mut self) -> Result<ExprAst, SyntaxError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let whole = digits(self);
        let mut frac = 0;
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            frac = digits(self);
        }
        if whole + frac == 0 {
            self.pos = start;
            return Err(self.error(&["digit"]));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<f64>().map(ExprAst::Literal).map_err(|_| SyntaxError { offset: start, expected: vec!["number"] })
    }
}
