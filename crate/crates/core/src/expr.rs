//! Expression trees over the two chart parameters, with a small infix
//! grammar, minimal-paren pretty printing and jet evaluation.
//!
//! Grammar:
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' factor)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' atom
//! ```
//! Identifiers: `u`, `v` (aliases `x`, `y`), the constant `pi`, and the
//! functions `sin`, `cos`, `exp`, `log`, `sqrt`, `abs`.

use std::fmt;

use crate::jet::{JetFault, Taylor4};

/// One of the two chart parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression AST.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Unary(UnaryFn, Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

/// Parse failure with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdent { offset: usize, name: String },
}

/// Evaluation failure carrying the offending subexpression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{fault} in `{subexpr}` at ({u}, {v})")]
pub struct EvalError {
    pub fault: JetFault,
    pub subexpr: String,
    pub u: f64,
    pub v: f64,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

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

    fn next(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                    let mark = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = mark;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                return Ok(Some((Tok::Num(value), start)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok(Some((Tok::Ident(text.to_string()), start)));
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.peek().map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump().ok_or_else(|| ParseError::Syntax {
            offset: self.end,
            message: "unexpected end of input".into(),
        })?;
        match tok {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.atom()?))),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, o)) => Err(ParseError::Syntax {
                        offset: o,
                        message: "expected `)`".into(),
                    }),
                    None => Err(ParseError::Syntax {
                        offset: self.end,
                        message: "unclosed parenthesis".into(),
                    }),
                }
            }
            Tok::Ident(name) => {
                if let Some((Tok::LParen, _)) = self.peek() {
                    let func = match name.as_str() {
                        "sin" => UnaryFn::Sin,
                        "cos" => UnaryFn::Cos,
                        "exp" => UnaryFn::Exp,
                        "log" => UnaryFn::Log,
                        "sqrt" => UnaryFn::Sqrt,
                        "abs" => UnaryFn::Abs,
                        _ => return Err(ParseError::UnknownIdent { offset, name }),
                    };
                    self.bump();
                    let arg = self.expr()?;
                    match self.bump() {
                        Some((Tok::RParen, _)) => Ok(Expr::Unary(func, Box::new(arg))),
                        Some((_, o)) => Err(ParseError::Syntax {
                            offset: o,
                            message: "expected `)` after function argument".into(),
                        }),
                        None => Err(ParseError::Syntax {
                            offset: self.end,
                            message: "unclosed function call".into(),
                        }),
                    }
                } else {
                    match name.as_str() {
                        "u" | "x" => Ok(Expr::Var(Var::U)),
                        "v" | "y" => Ok(Expr::Var(Var::V)),
                        "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                        _ => Err(ParseError::UnknownIdent { offset, name }),
                    }
                }
            }
            other => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parse an infix expression into an AST.
pub fn parse_expression(source: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(source);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let end = source.len();
    let mut parser = Parser { toks, idx: 0, end };
    let expr = parser.expr()?;
    if let Some((tok, offset)) = parser.peek() {
        return Err(ParseError::Syntax {
            offset: *offset,
            message: format!("trailing input starting with {tok:?}"),
        });
    }
    Ok(expr)
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Precedence levels: 1 additive, 2 multiplicative, 3 power, 4 atom.
fn print_prec(e: &Expr, out: &mut String, min_prec: u8) {
    let prec = match e {
        Expr::Num(x) => {
            if *x < 0.0 {
                3 // negative literal prints like a negation
            } else {
                4
            }
        }
        Expr::Var(_) | Expr::Unary(..) => 4,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 3,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
    };
    let need_paren = prec < min_prec;
    if need_paren {
        out.push('(');
    }
    match e {
        Expr::Num(x) => {
            // {:?} prints the shortest representation that round-trips the f64
            out.push_str(&format!("{x:?}"));
        }
        Expr::Var(Var::U) => out.push('u'),
        Expr::Var(Var::V) => out.push('v'),
        Expr::Unary(f, a) => {
            out.push_str(f.name());
            out.push('(');
            print_prec(a, out, 0);
            out.push(')');
        }
        Expr::Neg(a) => {
            out.push('-');
            print_prec(a, out, 4);
        }
        Expr::Bin(op, l, r) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => ("+", 1, 2),
                BinOp::Sub => ("-", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                // right-associative: the base must be an atom-or-parenthesized
                BinOp::Pow => ("^", 4, 3),
            };
            print_prec(l, out, lp);
            out.push_str(sym);
            print_prec(r, out, rp);
        }
    }
    if need_paren {
        out.push(')');
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        print_prec(self, &mut s, 0);
        f.write_str(&s)
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl Expr {
    /// Evaluate the order-4 jet of the expression at (u, v).
    pub fn eval_jet(&self, u: f64, v: f64) -> Result<Taylor4, EvalError> {
        self.jet_inner(Taylor4::variable_u(u), Taylor4::variable_v(v), u, v)
    }

    fn jet_inner(&self, ju: Taylor4, jv: Taylor4, u: f64, v: f64) -> Result<Taylor4, EvalError> {
        let fail = |fault: JetFault| EvalError {
            fault,
            subexpr: self.to_string(),
            u,
            v,
        };
        match self {
            Expr::Num(x) => Ok(Taylor4::constant(*x)),
            Expr::Var(Var::U) => Ok(ju),
            Expr::Var(Var::V) => Ok(jv),
            Expr::Neg(a) => Ok(-a.jet_inner(ju, jv, u, v)?),
            Expr::Unary(f, a) => {
                let x = a.jet_inner(ju, jv, u, v)?;
                match f {
                    UnaryFn::Sin => Ok(x.sin()),
                    UnaryFn::Cos => Ok(x.cos()),
                    UnaryFn::Exp => Ok(x.exp()),
                    UnaryFn::Log => x.ln().map_err(fail),
                    UnaryFn::Sqrt => x.sqrt().map_err(fail),
                    UnaryFn::Abs => x.abs().map_err(fail),
                }
            }
            Expr::Bin(op, l, r) => {
                let a = l.jet_inner(ju, jv, u, v)?;
                let b = r.jet_inner(ju, jv, u, v)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => Ok(a.mul_trunc(&b.recip().map_err(fail)?)),
                    BinOp::Pow => match &**r {
                        // constant exponent: use the dedicated power rules
                        Expr::Num(e) => a.powf(*e).map_err(fail),
                        Expr::Neg(inner) => {
                            if let Expr::Num(e) = &**inner {
                                a.powf(-*e).map_err(fail)
                            } else {
                                pow_general(a, b).map_err(fail)
                            }
                        }
                        _ => pow_general(a, b).map_err(fail),
                    },
                }
            }
        }
    }

    /// Plain scalar evaluation (same domain rules as the jet path).
    pub fn eval(&self, u: f64, v: f64) -> Result<f64, EvalError> {
        let fail = |fault: JetFault| EvalError {
            fault,
            subexpr: self.to_string(),
            u,
            v,
        };
        match self {
            Expr::Num(x) => Ok(*x),
            Expr::Var(Var::U) => Ok(u),
            Expr::Var(Var::V) => Ok(v),
            Expr::Neg(a) => Ok(-a.eval(u, v)?),
            Expr::Unary(f, a) => {
                let x = a.eval(u, v)?;
                match f {
                    UnaryFn::Sin => Ok(x.sin()),
                    UnaryFn::Cos => Ok(x.cos()),
                    UnaryFn::Exp => Ok(x.exp()),
                    UnaryFn::Log => {
                        if x <= 0.0 {
                            Err(fail(JetFault::LogNonPositive))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    UnaryFn::Sqrt => {
                        if x < 0.0 {
                            Err(fail(JetFault::SqrtNonPositive))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    UnaryFn::Abs => Ok(x.abs()),
                }
            }
            Expr::Bin(op, l, r) => {
                let a = l.eval(u, v)?;
                let b = r.eval(u, v)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(fail(JetFault::DivisionByZero))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => {
                        if b.fract() == 0.0 {
                            Ok(a.powi(b as i32))
                        } else if a <= 0.0 {
                            Err(fail(JetFault::FractionalPowNonPositiveBase))
                        } else {
                            Ok(a.powf(b))
                        }
                    }
                }
            }
        }
    }

    /// True when the expression contains an `abs` node (non-smooth grammar
    /// element; jets through it are rejected where the argument vanishes).
    pub fn contains_abs(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Unary(f, a) => *f == UnaryFn::Abs || a.contains_abs(),
            Expr::Neg(a) => a.contains_abs(),
            Expr::Bin(_, l, r) => l.contains_abs() || r.contains_abs(),
        }
    }

    /// Substitute u <-> v, used for orientation-reversal constructions.
    pub fn swap_vars(&self) -> Expr {
        match self {
            Expr::Num(x) => Expr::Num(*x),
            Expr::Var(Var::U) => Expr::Var(Var::V),
            Expr::Var(Var::V) => Expr::Var(Var::U),
            Expr::Unary(f, a) => Expr::Unary(*f, Box::new(a.swap_vars())),
            Expr::Neg(a) => Expr::Neg(Box::new(a.swap_vars())),
            Expr::Bin(op, l, r) => {
                Expr::Bin(*op, Box::new(l.swap_vars()), Box::new(r.swap_vars()))
            }
        }
    }
}

/// General power with a non-constant exponent: a^b = exp(b * log a).
fn pow_general(a: Taylor4, b: Taylor4) -> Result<Taylor4, JetFault> {
    Ok((b * a.ln()?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_variables() {
        let e = parse_expression("u*v").unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Var(Var::U)),
                Box::new(Expr::Var(Var::V))
            )
        );
    }

    #[test]
    fn trig_product_evaluates() {
        let e = parse_expression("sin(u)*cos(v)").unwrap();
        assert_eq!(e.eval(0.0, 0.0).unwrap(), 0.0);
        assert!((e.eval(1.0, 0.5).unwrap() - 1.0f64.sin() * 0.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn log_power_formula_parses_and_evaluates() {
        let e = parse_expression("x*y*(log(x^2+y^2+0.01)/log(0.01))^0.3").unwrap();
        // both logs are negative on the disk of radius 1/2, the ratio positive
        let val = e.eval(0.2, 0.1).unwrap();
        let arg = 0.2f64 * 0.2 + 0.1 * 0.1 + 0.01;
        let expected = 0.2 * 0.1 * (arg.ln() / (0.01f64.ln())).powf(0.3);
        assert!((val - expected).abs() < 1e-15);
        // jet at the origin: value 0, d2/dxdy = 1
        let jet = e.eval_jet(0.0, 0.0).unwrap();
        assert!(jet.value().abs() < 1e-15);
        assert!((jet.partial(1, 1) - 1.0).abs() < 1e-12);
        assert!(jet.partial(1, 0).abs() < 1e-15);
        assert!(jet.partial(2, 0).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("1+2*3^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0).unwrap(), 19.0);
        // power is right-associative: 2^3^2 = 2^9
        let p = parse_expression("2^3^2").unwrap();
        assert_eq!(p.eval(0.0, 0.0).unwrap(), 512.0);
        // unary minus binds at atom level: -2^2 = (-2)^2
        let m = parse_expression("-2^2").unwrap();
        assert_eq!(m.eval(0.0, 0.0).unwrap(), 4.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_expression("u + * v") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_expression("u + w") {
            Err(ParseError::UnknownIdent { offset, name }) => {
                assert_eq!(offset, 4);
                assert_eq!(name, "w");
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse_expression("sinh(u)") {
            Err(ParseError::UnknownIdent { name, .. }) => assert_eq!(name, "sinh"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn eval_error_names_subexpression() {
        let e = parse_expression("u + log(v - 1)").unwrap();
        let err = e.eval(0.5, 0.5).unwrap_err();
        assert_eq!(err.fault, JetFault::LogNonPositive);
        assert_eq!(err.subexpr, "log(v-1.0)");
    }

    #[test]
    fn print_parse_round_trip_on_samples() {
        for src in [
            "u*v",
            "sin(u)*cos(v)",
            "x*y*(log(x^2+y^2+0.01)/log(0.01))^0.3",
            "-(u+v)^2",
            "u-(v-1)",
            "u/(v*v)/2",
            "(u+v)*(u-v)",
            "2^u^v",
        ] {
            let ast = parse_expression(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse_expression(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(reparsed, ast, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn pi_is_a_literal() {
        let e = parse_expression("sin(pi/2)").unwrap();
        assert!((e.eval(0.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }
}
