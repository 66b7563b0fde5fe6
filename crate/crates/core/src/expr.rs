//! Infix expressions in the single variable `lambda`.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := power (('*' | '/') power)*
//! power   := unary ('^' power)?          right-associative
//! unary   := '-' unary | atom
//! atom    := number | 'lambda' | 'pi' | 'e' | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-2^2` is `4`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    NegativeSqrt(f64),
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Tan, Func::Sqrt, Func::Exp, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
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

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Lambda,
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0, len: text.len() };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some((tok, off)) => Err(ExprError::Syntax { offset: off, message: format!("unexpected {tok}") }),
        }
    }

    pub fn eval(&self, lambda: f64) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Num(x) => *x,
            Expr::Lambda => lambda,
            Expr::Pi => std::f64::consts::PI,
            Expr::E => std::f64::consts::E,
            Expr::Neg(a) => -a.eval(lambda)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(lambda)?, b.eval(lambda)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(ExprError::DivisionByZero);
                        }
                        x / y
                    }
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(lambda)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(ExprError::NegativeSqrt(x));
                        }
                        x.sqrt()
                    }
                    Func::Exp => x.exp(),
                    Func::Abs => x.abs(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite)
        }
    }
}

/// Fully parenthesized rendering; parsing it back yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Lambda => f.write_str("lambda"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(x) => write!(f, "number {x}"),
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Op(c) => write!(f, "`{c}`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((Token::Op(b as char), i));
                i += 1;
            }
            b'(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
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
                let lit = &text[start..i];
                let x: f64 = lit.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                out.push((Token::Num(x), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax { offset: i, message: format!("unexpected character `{ch}`") });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<(&Token, usize)> {
        self.tokens.get(self.pos).map(|(t, o)| (t, *o))
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.len, |(_, o)| o)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some((Token::Op(c), _)) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while let Some(c) = self.eat_op(&['+', '-']) {
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.power()?;
        while let Some(c) = self.eat_op(&['*', '/']) {
            let rhs = self.power()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.power()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.peek() {
            Some((Token::RParen, _)) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ExprError::Syntax { offset: self.offset(), message: "expected `)`".into() }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        let Some((tok, _)) = self.peek() else {
            return Err(ExprError::Syntax { offset, message: "unexpected end of input".into() });
        };
        let tok = tok.clone();
        self.pos += 1;
        match tok {
            Token::Num(x) => Ok(Expr::Num(x)),
            Token::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "lambda" => Ok(Expr::Lambda),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                _ => {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ExprError::UnknownIdentifier { name, offset });
                    };
                    match self.peek() {
                        Some((Token::LParen, _)) => self.pos += 1,
                        _ => {
                            return Err(ExprError::Syntax {
                                offset: self.offset(),
                                message: format!("expected `(` after `{name}`"),
                            })
                        }
                    }
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            other => Err(ExprError::Syntax { offset, message: format!("unexpected {other}") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(s: &str, lambda: f64) -> f64 {
        Expr::parse(s).unwrap().eval(lambda).unwrap()
    }

    #[test]
    fn documented_examples() {
        assert!((eval("0.5 + 0.5*lambda", 1.0) - 1.0).abs() < 1e-15);
        assert!((eval("sin(pi/3)*lambda", 2.0) - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("1 + 2*3", 0.0), 7.0);
        assert_eq!(eval("-2^2", 0.0), 4.0);
        assert_eq!(eval("2*-3", 0.0), -6.0);
        assert_eq!(eval("8/2/2", 0.0), 2.0);
        assert_eq!(eval("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert!((eval("e", 0.0) - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(eval("abs(-lambda)", 3.0), 3.0);
        assert_eq!(eval("1.5e1", 0.0), 15.0);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            Expr::parse("1 + foo").unwrap_err(),
            ExprError::UnknownIdentifier { name: "foo".into(), offset: 4 }
        );
        assert!(matches!(Expr::parse("(1 + 2"), Err(ExprError::Syntax { offset: 6, .. })));
        assert!(matches!(Expr::parse("1 +"), Err(ExprError::Syntax { offset: 3, .. })));
        assert!(matches!(Expr::parse("1 $ 2"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(Expr::parse("sin 1"), Err(ExprError::Syntax { .. })));
        assert!(matches!(Expr::parse("1 2"), Err(ExprError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(Expr::parse("1/lambda").unwrap().eval(0.0), Err(ExprError::DivisionByZero));
        assert!(matches!(Expr::parse("sqrt(lambda)").unwrap().eval(-1.0), Err(ExprError::NegativeSqrt(_))));
        assert_eq!(Expr::parse("exp(1000)").unwrap().eval(0.0), Err(ExprError::NonFinite));
    }

    #[test]
    fn display_round_trip() {
        let e = Expr::parse("-(lambda - 1)^2 * sin(pi/4) + 3e-7").unwrap();
        assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
    }
}
