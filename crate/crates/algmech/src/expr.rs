//! A small arithmetic-expression language for scalar fields in config files:
//! +, −, ×, ÷, ^ (right-associative), unary minus, sin/cos/sinh/cosh/tanh/exp,
//! numeric literals and identifiers bound to coordinate labels or parameters.
//!
//! Precedence: ^  >  unary −  >  × ÷  >  + −.

use std::collections::BTreeMap;
use std::fmt;

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

    /// (left, right) binding powers; Pow is right-associative.
    fn binding(self) -> (u8, u8) {
        match self {
            BinOp::Add | BinOp::Sub => (1, 2),
            BinOp::Mul | BinOp::Div => (3, 4),
            BinOp::Pow => (9, 8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Exp => v.exp(),
        }
    }
}

/// Parsed arithmetic tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Number(f64),
    Var(String),
    Neg(Box<Expression>),
    Bin(BinOp, Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

/// Position-annotated syntax or binding error (1-based line:column).
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

fn lex(src: &str) -> Result<Lexer, ExprError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |i: &mut usize, col: &mut usize| {
            *i += 1;
            *col += 1;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(&mut i, &mut col),
            '+' | '-' | '*' | '/' | '^' => {
                toks.push((Tok::Op(c), tline, tcol));
                advance(&mut i, &mut col);
            }
            '(' => {
                toks.push((Tok::LParen, tline, tcol));
                advance(&mut i, &mut col);
            }
            ')' => {
                toks.push((Tok::RParen, tline, tcol));
                advance(&mut i, &mut col);
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    advance(&mut i, &mut col);
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while i < j {
                            advance(&mut i, &mut col);
                        }
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            advance(&mut i, &mut col);
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| ExprError {
                    line: tline,
                    column: tcol,
                    message: format!("malformed number '{text}'"),
                })?;
                toks.push((Tok::Num(v), tline, tcol));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    advance(&mut i, &mut col);
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), tline, tcol));
            }
            other => {
                return Err(ExprError {
                    line: tline,
                    column: tcol,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(Lexer {
        toks,
        pos: 0,
        end: (line, col),
    })
}

impl Lexer {
    fn peek(&self) -> Option<&(Tok, usize, usize)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(Tok, usize, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|(_, l, c)| (*l, *c)).unwrap_or(self.end)
    }

    fn err(&self, message: impl Into<String>) -> ExprError {
        let (line, column) = self.here();
        ExprError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Parse with standard precedence; errors carry line:column.
pub fn parse_expression(src: &str) -> Result<Expression, ExprError> {
    let mut lx = lex(src)?;
    let e = parse_bp(&mut lx, 0)?;
    if let Some((t, l, c)) = lx.peek() {
        return Err(ExprError {
            line: *l,
            column: *c,
            message: format!("unexpected trailing token {t:?}"),
        });
    }
    Ok(e)
}

const UNARY_MINUS_BP: u8 = 6;

fn parse_bp(lx: &mut Lexer, min_bp: u8) -> Result<Expression, ExprError> {
    let mut lhs = match lx.next() {
        None => return Err(lx.err("expected an operand, found end of input")),
        Some((Tok::Num(v), _, _)) => Expression::Number(v),
        Some((Tok::Ident(name), l, c)) => {
            if let Some(f) = Func::from_name(&name) {
                match lx.next() {
                    Some((Tok::LParen, _, _)) => {
                        let arg = parse_bp(lx, 0)?;
                        match lx.next() {
                            Some((Tok::RParen, _, _)) => Expression::Call(f, Box::new(arg)),
                            _ => return Err(lx.err("expected ')'")),
                        }
                    }
                    _ => {
                        return Err(ExprError {
                            line: l,
                            column: c + name.len(),
                            message: format!("function '{name}' requires parentheses"),
                        })
                    }
                }
            } else {
                Expression::Var(name)
            }
        }
        Some((Tok::Op('-'), _, _)) => {
            let operand = parse_bp(lx, UNARY_MINUS_BP)?;
            Expression::Neg(Box::new(operand))
        }
        Some((Tok::Op('+'), _, _)) => parse_bp(lx, UNARY_MINUS_BP)?,
        Some((Tok::LParen, _, _)) => {
            let e = parse_bp(lx, 0)?;
            match lx.next() {
                Some((Tok::RParen, _, _)) => e,
                _ => return Err(lx.err("expected ')'")),
            }
        }
        Some((t, l, c)) => {
            return Err(ExprError {
                line: l,
                column: c,
                message: format!("unexpected token {t:?}"),
            })
        }
    };
    while let Some((Tok::Op(c), _, _)) = lx.peek() {
        let op = match c {
            '+' => BinOp::Add,
            '-' => BinOp::Sub,
            '*' => BinOp::Mul,
            '/' => BinOp::Div,
            '^' => BinOp::Pow,
            _ => unreachable!(),
        };
        let (lbp, rbp) = op.binding();
        if lbp < min_bp {
            break;
        }
        lx.next();
        let rhs = parse_bp(lx, rbp)?;
        lhs = Expression::Bin(op, Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

impl Expression {
    /// Variables referenced anywhere in the tree, deduplicated and sorted.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expression::Number(_) => {}
            Expression::Var(v) => out.push(v.clone()),
            Expression::Neg(e) => e.collect_vars(out),
            Expression::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expression::Call(_, a) => a.collect_vars(out),
        }
    }

    /// Reject variables not bound to a coordinate label or a parameter.
    pub fn check_bindings(
        &self,
        coords: &[String],
        params: &BTreeMap<String, f64>,
    ) -> Result<(), ExprError> {
        for v in self.variables() {
            if !coords.contains(&v) && !params.contains_key(&v) {
                let mut bound: Vec<String> = coords.to_vec();
                bound.extend(params.keys().cloned());
                return Err(ExprError {
                    line: 1,
                    column: 1,
                    message: format!(
                        "unknown identifier '{v}'; bound variables: {}",
                        bound.join(", ")
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        Ok(match self {
            Expression::Number(v) => *v,
            Expression::Var(name) => env(name).ok_or_else(|| ExprError {
                line: 1,
                column: 1,
                message: format!("unknown identifier '{name}'"),
            })?,
            Expression::Neg(e) => -e.eval(env)?,
            Expression::Bin(op, a, b) => {
                let (x, y) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expression::Call(f, a) => f.apply(a.eval(env)?),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Number(_) | Expression::Var(_) | Expression::Call(..) => 10,
            Expression::Neg(_) => UNARY_MINUS_BP,
            Expression::Bin(op, ..) => op.binding().0,
        }
    }
}

/// Printer; `parse_expression(print(e))` evaluates identically to `e`.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Number(v) => write!(f, "{v}"),
            Expression::Var(name) => write!(f, "{name}"),
            Expression::Neg(e) => {
                if e.precedence() < UNARY_MINUS_BP {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expression::Bin(op, a, b) => {
                let (lbp, rbp) = op.binding();
                if a.precedence() < lbp {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() < rbp {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expression::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
