//! Initial-condition expressions in one variable `x`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number | 'x' | 'pi' | var
//!          | ('sin' | 'cos' | 'exp') '(' expr ')'
//!          | 'sum' '(' var ',' int ',' int ',' expr ')'
//!          | '(' expr ')'
//! ```
//!
//! `sum(j, lo, hi, body)` adds `body` for integer `j = lo..=hi`; inside the
//! body only `x` and `j` are in scope.

use std::fmt;

use thiserror::Error;

/// Largest admissible `hi - lo` for a bounded sum.
pub const MAX_SUM_SPAN: i64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("malformed sum at byte {pos}: {msg}")]
    MalformedSum { pos: usize, msg: String },
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    X,
    /// The innermost enclosing sum variable.
    Index,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Sum {
        var: String,
        lo: i64,
        hi: i64,
        body: Box<Node>,
    },
}

/// A parsed expression; immutable and cheap to evaluate repeatedly.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[start];
        if c.is_ascii_digit() || c == b'.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            let text = &self.src[start..end];
            let value = text.parse::<f64>().map_err(|_| ExprError::Syntax {
                pos: start,
                msg: format!("invalid number `{text}`"),
            })?;
            self.pos = end;
            return Ok((Tok::Num(value), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            return Ok((Tok::Ident(self.src[start..end].to_string()), start));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ExprError::Syntax {
            pos: start,
            msg: format!("unexpected character `{ch}`"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: usize,
    /// Sum variable in scope, if any.
    scope: Option<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, pos) = lexer.next()?;
        Ok(Self {
            lexer,
            tok,
            pos,
            scope: None,
        })
    }

    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, pos) = self.lexer.next()?;
        self.tok = tok;
        self.pos = pos;
        Ok(())
    }

    fn expect(&mut self, sym: char) -> Result<(), ExprError> {
        if self.tok == Tok::Sym(sym) {
            self.bump()
        } else {
            Err(self.unexpected(&format!("expected `{sym}`")))
        }
    }

    fn unexpected(&self, what: &str) -> ExprError {
        let found = match &self.tok {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        };
        ExprError::Syntax {
            pos: self.pos,
            msg: format!("{what}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node::Num(v))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.pos;
                self.bump()?;
                match name.as_str() {
                    "x" => Ok(Node::X),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        let f = match name.as_str() {
                            "sin" => Func::Sin,
                            "cos" => Func::Cos,
                            _ => Func::Exp,
                        };
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Node::Call(f, Box::new(arg)))
                    }
                    "sum" => self.sum(at),
                    _ if self.scope.as_deref() == Some(name.as_str()) => Ok(Node::Index),
                    _ => Err(ExprError::UnknownIdentifier { name, pos: at }),
                }
            }
            _ => Err(self.unexpected("expected a value")),
        }
    }

    fn sum(&mut self, at: usize) -> Result<Node, ExprError> {
        let malformed = |pos: usize, msg: &str| ExprError::MalformedSum {
            pos,
            msg: msg.to_string(),
        };
        if self.tok != Tok::Sym('(') {
            return Err(malformed(self.pos, "expected `(` after `sum`"));
        }
        self.bump()?;
        let var = match self.tok.clone() {
            Tok::Ident(v) if !matches!(v.as_str(), "x" | "pi" | "sin" | "cos" | "exp" | "sum") => v,
            _ => return Err(malformed(self.pos, "expected a summation variable")),
        };
        self.bump()?;
        if self.tok != Tok::Sym(',') {
            return Err(malformed(self.pos, "expected `,` after summation variable"));
        }
        self.bump()?;
        let lo = self.integer_bound()?;
        if self.tok != Tok::Sym(',') {
            return Err(malformed(self.pos, "expected `,` after lower bound"));
        }
        self.bump()?;
        let hi = self.integer_bound()?;
        if self.tok != Tok::Sym(',') {
            return Err(malformed(self.pos, "expected `,` after upper bound"));
        }
        self.bump()?;
        if lo > hi {
            return Err(malformed(at, "lower bound exceeds upper bound"));
        }
        if hi - lo > MAX_SUM_SPAN {
            return Err(malformed(at, "summation range too long"));
        }
        let outer = self.scope.replace(var.clone());
        let body = self.expr();
        self.scope = outer;
        let body = body?;
        self.expect(')')?;
        Ok(Node::Sum {
            var,
            lo,
            hi,
            body: Box::new(body),
        })
    }

    fn integer_bound(&mut self) -> Result<i64, ExprError> {
        let pos = self.pos;
        let negative = if self.tok == Tok::Sym('-') {
            self.bump()?;
            true
        } else {
            false
        };
        match self.tok {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() < 1e15 => {
                self.bump()?;
                Ok(if negative { -(v as i64) } else { v as i64 })
            }
            _ => Err(ExprError::MalformedSum {
                pos,
                msg: "summation bounds must be integer literals".to_string(),
            }),
        }
    }
}

/// Parses `source` into an [`Expression`].
pub fn parse(source: &str) -> Result<Expression, ExprError> {
    if source.trim().is_empty() {
        return Err(ExprError::Syntax {
            pos: 0,
            msg: "empty expression".to_string(),
        });
    }
    let mut p = Parser::new(source)?;
    let root = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.unexpected("expected end of input"));
    }
    Ok(Expression { root })
}

fn eval(node: &Node, x: f64, index: f64) -> Result<f64, ExprError> {
    let v = match node {
        Node::Num(v) => *v,
        Node::X => x,
        Node::Index => index,
        Node::Neg(a) => -eval(a, x, index)?,
        Node::Bin(op, a, b) => {
            let a = eval(a, x, index)?;
            let b = eval(b, x, index)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(ExprError::Domain(format!("division by zero at x = {x}")));
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a < 0.0 && b.fract() != 0.0 {
                        return Err(ExprError::Domain(format!(
                            "non-integer power {b} of negative base {a}"
                        )));
                    }
                    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                        a.powi(b as i32)
                    } else {
                        a.powf(b)
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, x, index)?;
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
            }
        }
        Node::Sum { lo, hi, body, .. } => {
            let mut acc = 0.0;
            for j in *lo..=*hi {
                acc += eval(body, x, j as f64)?;
            }
            acc
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Domain(format!("non-finite value at x = {x}")))
    }
}

impl Expression {
    pub fn evaluate(&self, x: f64) -> Result<f64, ExprError> {
        eval(&self.root, x, f64::NAN)
    }
}

/// Evaluates `e` at `x`.
pub fn evaluate(e: &Expression, x: f64) -> Result<f64, ExprError> {
    e.evaluate(x)
}

impl std::str::FromStr for Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn write_node(node: &Node, var: Option<&str>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Num(v) => {
            if *v < 0.0 {
                write!(f, "({v:?})")
            } else {
                write!(f, "{v:?}")
            }
        }
        Node::X => f.write_str("x"),
        Node::Index => f.write_str(var.unwrap_or("j")),
        Node::Neg(a) => {
            f.write_str("(-")?;
            write_node(a, var, f)?;
            f.write_str(")")
        }
        Node::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => '+',
                BinOp::Sub => '-',
                BinOp::Mul => '*',
                BinOp::Div => '/',
                BinOp::Pow => '^',
            };
            f.write_str("(")?;
            write_node(a, var, f)?;
            write!(f, " {sym} ")?;
            write_node(b, var, f)?;
            f.write_str(")")
        }
        Node::Call(func, a) => {
            let name = match func {
                Func::Sin => "sin",
                Func::Cos => "cos",
                Func::Exp => "exp",
            };
            write!(f, "{name}(")?;
            write_node(a, var, f)?;
            f.write_str(")")
        }
        Node::Sum { var: v, lo, hi, body } => {
            write!(f, "sum({v}, {lo}, {hi}, ")?;
            write_node(body, Some(v), f)?;
            f.write_str(")")
        }
    }
}

/// Fully parenthesised form; parses back to an equivalent expression.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, None, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_at(s: &str, x: f64) -> f64 {
        parse(s).unwrap().evaluate(x).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(eval_at("2+3*4", 0.0), 14.0);
        assert_eq!(eval_at("2*3^2", 0.0), 18.0);
        assert_eq!(eval_at("-2^2", 0.0), -4.0);
        assert_eq!(eval_at("2^3^2", 0.0), 512.0);
        assert_eq!(eval_at("2^-1", 0.0), 0.5);
        assert_eq!(eval_at("8/4/2", 0.0), 1.0);
        assert_eq!(eval_at("1 - 2 - 3", 0.0), -4.0);
    }

    #[test]
    fn gray_scott_initial_condition() {
        let v = eval_at("1-0.5*sin(pi*(x+50)/100)^100", 0.0);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fourier_sum_matches_loop() {
        let v = eval_at("0.919145+0.001*sum(j,1,25,cos(2*pi*j*x)/j)", 0.0);
        let harmonic: f64 = (1..=25).map(|j| 1.0 / j as f64).sum();
        assert!((v - (0.919145 + 0.001 * harmonic)).abs() < 1e-15);
        assert!((harmonic - 3.815958).abs() < 1e-6);
    }

    #[test]
    fn simple_evaluations() {
        assert_eq!(eval_at("x^2", -3.0), 9.0);
        assert!((eval_at("cos(2*pi*x)", 1.0) - 1.0).abs() < 1e-15);
        assert!((eval_at("exp(0) + 1e-3 * 2.5E2", 0.0) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let e = parse("1/x").unwrap();
        assert!(matches!(e.evaluate(0.0), Err(ExprError::Domain(_))));
        let e = parse("x^0.5").unwrap();
        assert!(matches!(e.evaluate(-1.0), Err(ExprError::Domain(_))));
        assert_eq!(e.evaluate(4.0).unwrap(), 2.0);
        assert_eq!(parse("x^3").unwrap().evaluate(-2.0).unwrap(), -8.0);
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse("1 + * 2"),
            Err(ExprError::Syntax {
                pos: 4,
                msg: "expected a value, found `*`".into()
            })
        );
        assert!(matches!(parse("(1 + 2"), Err(ExprError::Syntax { pos: 6, .. })));
        assert!(matches!(parse("1 2"), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("3 $ 4"), Err(ExprError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("   "), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse("2*y"),
            Err(ExprError::UnknownIdentifier {
                name: "y".into(),
                pos: 2
            })
        );
        // sum variables are not visible outside their body
        assert!(matches!(
            parse("sum(j,1,2,j) + j"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn malformed_sums() {
        assert!(matches!(parse("sum(j,3,1,j)"), Err(ExprError::MalformedSum { .. })));
        assert!(matches!(parse("sum(j,1.5,3,j)"), Err(ExprError::MalformedSum { .. })));
        assert!(matches!(parse("sum(x,1,3,x)"), Err(ExprError::MalformedSum { .. })));
        assert!(matches!(parse("sum(j,0,20000,j)"), Err(ExprError::MalformedSum { .. })));
        assert!(matches!(parse("sum j"), Err(ExprError::MalformedSum { .. })));
        assert_eq!(eval_at("sum(k,-2,2,k^2)", 0.0), 10.0);
    }

    #[test]
    fn nested_sums_scope_their_own_variable() {
        assert_eq!(eval_at("sum(i,1,3,sum(j,1,2,j))", 0.0), 9.0);
        assert!(matches!(
            parse("sum(i,1,3,sum(j,1,2,i))"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn display_reparses() {
        let src = "0.5 - -x^2*sin(pi*x)/3 + sum(j,1,4,cos(j*x)/j)";
        let e = parse(src).unwrap();
        let again = parse(&e.to_string()).unwrap();
        for x in [-1.3, 0.0, 0.7, 2.0] {
            assert_eq!(e.evaluate(x).unwrap(), again.evaluate(x).unwrap());
        }
    }
}
