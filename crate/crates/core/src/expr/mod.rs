//! A small expression language for conformal factors, immersion components
//! and weight functions.
//!
//! ```text
//! expr     := term (("+"|"-") term)*
//! term     := factor (("*"|"/") factor)*
//! factor   := atom ("^" exponent)? | "-" factor
//! atom     := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! exponent := NUMBER | "(" "-"? NUMBER ("/" NUMBER)? ")"
//! ```
//!
//! `x1`..`x9` and `z` are variables; any other identifier that is not a
//! function name is a parameter, bound late through [`Params`].

mod eval;
mod parse;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;

pub use eval::Bindings;
pub use parse::parse;

use crate::scalar::Elementary;
use crate::Rational;

/// Late-bound real parameters.
pub type Params = BTreeMap<String, f64>;

/// Highest `x` index the grammar recognises.
pub const MAX_X: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// `x1`..`x9` (1-based, as written).
    X(u8),
    /// `z`, the last ambient coordinate.
    Z,
}

impl Var {
    /// Coordinate slot in a space of `n` coordinates where `z` is the last one.
    pub fn slot(self, n: usize) -> Option<usize> {
        match self {
            Var::X(i) if (i as usize) < n => Some(i as usize - 1),
            Var::X(_) => None,
            Var::Z => n.checked_sub(1),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Z => f.write_str("z"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Unary(Elementary, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Rational),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.into())
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn unary(f: Elementary, e: Expr) -> Expr {
        Expr::Unary(f, Box::new(e))
    }

    pub fn pow(base: Expr, r: Rational) -> Expr {
        Expr::Pow(Box::new(base), r)
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(*v);
            }
        });
        out
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => {}
            Expr::Neg(e) | Expr::Unary(_, e) | Expr::Pow(e, _) => e.walk(visit),
            Expr::Binary(_, l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
        }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: Rational) -> fmt::Result {
    if *r.denom() == 1 && *r.numer() >= 0 {
        write!(f, "{}", r.numer())
    } else if *r.denom() == 1 {
        write!(f, "({})", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

/// Fully parenthesised form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Unary(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l}{}{r})", op.symbol()),
            Expr::Pow(b, r) => {
                write!(f, "({b})^")?;
                write_rational(f, *r)
            }
        }
    }
}
