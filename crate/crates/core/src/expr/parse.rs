use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{BinOp, Expr, Var, MAX_X};
use crate::error::Error;
use crate::scalar::Elementary;
use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, Error> {
        let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = if c.is_ascii_digit() || c == b'.' {
                lx.number()?
            } else if c.is_ascii_alphabetic() || c == b'_' {
                while lx.pos < lx.src.len() && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_') {
                    lx.pos += 1;
                }
                Tok::Ident(text[start..lx.pos].to_string())
            } else if b"+-*/^()".contains(&c) {
                lx.pos += 1;
                Tok::Sym(c as char)
            } else {
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{}`", c as char) });
            };
            out.push((tok, start));
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> Result<Tok, Error> {
        let start = self.pos;
        let mut n = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += self.digits();
        }
        if n == 0 {
            return Err(Error::Syntax { pos: start, msg: "malformed number".into() });
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                // `2e` is a number followed by an identifier starting with e
                self.pos = save;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(Tok::Num(text.to_string()))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, Error> {
    if text.trim().is_empty() {
        return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks: Lexer::tokens(text)?, i: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(Error::Syntax { pos: p.pos(), msg: format!("unexpected token {t:?}") }),
    }
}

fn parse_var(name: &str) -> Option<Var> {
    if name == "z" {
        return Some(Var::Z);
    }
    let digits = name.strip_prefix('x')?;
    if digits.len() != 1 {
        return None;
    }
    let i: u8 = digits.parse().ok()?;
    (1..=MAX_X).contains(&i).then_some(Var::X(i))
}

fn exact_decimal(text: &str) -> Option<Rational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if !(int.bytes().chain(frac.bytes())).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut num: i64 = 0;
    for b in int.bytes().chain(frac.bytes()) {
        num = num.checked_mul(10)?.checked_add((b - b'0') as i64)?;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    Some(Rational::new(num, den))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), Error> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.pos(), msg: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    fn factor(&mut self) -> Result<Expr, Error> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::neg(self.factor()?));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let r = self.exponent()?;
            return Ok(Expr::pow(base, r));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational, Error> {
        let pos = self.pos();
        let bad = || Error::MalformedExponent { pos };
        match self.bump() {
            Tok::Num(s) => exact_decimal(&s).ok_or_else(bad),
            Tok::Sym('(') => {
                let negative = if *self.peek() == Tok::Sym('-') {
                    self.bump();
                    true
                } else {
                    false
                };
                let Tok::Num(n) = self.bump() else { return Err(bad()) };
                let mut r = exact_decimal(&n).ok_or_else(bad)?;
                if *self.peek() == Tok::Sym('/') {
                    self.bump();
                    let Tok::Num(d) = self.bump() else { return Err(bad()) };
                    let d = exact_decimal(&d).ok_or_else(bad)?;
                    if d == Rational::from_integer(0) {
                        return Err(bad());
                    }
                    r /= d;
                }
                if *self.peek() != Tok::Sym(')') {
                    return Err(bad());
                }
                self.bump();
                Ok(if negative { -r } else { r })
            }
            _ => Err(bad()),
        }
    }

    fn atom(&mut self) -> Result<Expr, Error> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) => {
                s.parse::<f64>().map(Expr::Const).map_err(|_| Error::Syntax { pos, msg: format!("bad number `{s}`") })
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::Sym('(') {
                    let f = Elementary::from_name(&name).ok_or(Error::UnknownFunction { pos, name: name.clone() })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::unary(f, arg));
                }
                Ok(match parse_var(&name) {
                    Some(v) => Expr::Var(v),
                    None => Expr::Param(name),
                })
            }
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            t => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    #[test]
    fn grammar_shape() {
        let e = parse("1/(c1*z+c2)").unwrap();
        let expect = Expr::binary(
            BinOp::Div,
            c(1.0),
            Expr::binary(BinOp::Add, Expr::binary(BinOp::Mul, Expr::param("c1"), Expr::Var(Var::Z)), Expr::param("c2")),
        );
        assert_eq!(e, expect);
    }

    #[test]
    fn rational_exponents_are_exact() {
        assert_eq!(parse("z^(-1)").unwrap(), Expr::pow(Expr::Var(Var::Z), Rational::new(-1, 1)));
        assert_eq!(parse("z^(3/13)").unwrap(), Expr::pow(Expr::Var(Var::Z), Rational::new(3, 13)));
        assert_eq!(parse("z^0.5").unwrap(), Expr::pow(Expr::Var(Var::Z), Rational::new(1, 2)));
        assert_eq!(parse("x2^3").unwrap(), Expr::pow(Expr::Var(Var::X(2)), Rational::new(3, 1)));
    }

    #[test]
    fn unresolved_parameters_parse() {
        let e = parse("2*r^3").unwrap();
        assert!(e.parameters().contains("r"));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse("-z^2").unwrap(), Expr::neg(Expr::pow(Expr::Var(Var::Z), Rational::from_integer(2))));
        assert!(parse("2*-z").is_ok());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1 +"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("foo(z)"), Err(Error::UnknownFunction { pos: 0, .. })));
        assert!(matches!(parse("z^y"), Err(Error::MalformedExponent { pos: 2 })));
        assert!(matches!(parse("z^(1/0)"), Err(Error::MalformedExponent { .. })));
        assert!(matches!(parse("z^(1e3)"), Err(Error::MalformedExponent { .. })));
        assert!(matches!(parse("(z"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("z $ 2"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("z^2^3"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn variables_and_parameters() {
        let e = parse("x1 + x9 + x10 + z + k").unwrap();
        let vars: Vec<_> = e.variables().into_iter().collect();
        assert_eq!(vars, [Var::X(1), Var::X(9), Var::Z]);
        let ps: Vec<_> = e.parameters().into_iter().collect();
        assert_eq!(ps, ["k".to_string(), "x10".to_string()]);
    }

    #[test]
    fn print_then_parse_is_stable() {
        for s in [
            "1/(c1*z+c2)",
            "-z^2 + 3.25*atan(z/r) - exp(-x1)",
            "(x1+x2+z+C)^(3/13)",
            "sqrt(1+x1^2)^(-7/29)*abs(x2-0.5)",
            "2e-3*z^(-1)",
        ] {
            let a = parse(s).unwrap();
            let b = parse(&a.to_string()).unwrap();
            assert_eq!(a, b, "{s} -> {a}");
        }
    }
}
