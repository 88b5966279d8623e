use alloc::string::ToString;

use super::{BinOp, Expr, Params, Var, MAX_X};
use crate::error::{Error, MathError};
use crate::scalar::Scalar;

const SLOTS: usize = MAX_X as usize + 1;

fn slot(v: Var) -> usize {
    match v {
        Var::X(i) => i as usize - 1,
        Var::Z => SLOTS - 1,
    }
}

/// Variable and parameter values for one evaluation.
///
/// `proto` fixes the shape of constants (a jet layout, or nothing for `f64`).
#[derive(Debug, Clone)]
pub struct Bindings<'a, S> {
    vars: [Option<S>; SLOTS],
    params: &'a Params,
    proto: S,
}

impl<'a, S: Scalar> Bindings<'a, S> {
    pub fn new(proto: S, params: &'a Params) -> Self {
        Bindings { vars: Default::default(), params, proto }
    }

    /// `x1..x(n-1)` and `z` bound to `coords` in order.
    pub fn ambient(coords: &[S], params: &'a Params) -> Result<Self, Error> {
        let n = coords.len();
        if !(2..=SLOTS).contains(&n) {
            return Err(Error::Dimension { expected: 2, found: n });
        }
        let mut b = Bindings::new(coords[0].lift(0.0), params);
        for (i, c) in coords[..n - 1].iter().enumerate() {
            b.set(Var::X(i as u8 + 1), c.clone());
        }
        b.set(Var::Z, coords[n - 1].clone());
        Ok(b)
    }

    /// `x1..xm` bound to chart coordinates; `z` left unbound.
    pub fn chart(coords: &[S], params: &'a Params) -> Result<Self, Error> {
        let m = coords.len();
        if m == 0 || m > MAX_X as usize {
            return Err(Error::Dimension { expected: 1, found: m });
        }
        let mut b = Bindings::new(coords[0].lift(0.0), params);
        for (i, c) in coords.iter().enumerate() {
            b.set(Var::X(i as u8 + 1), c.clone());
        }
        Ok(b)
    }

    pub fn set(&mut self, v: Var, value: S) {
        self.vars[slot(v)] = Some(value);
    }

    pub fn with(mut self, v: Var, value: S) -> Self {
        self.set(v, value);
        self
    }

    pub fn get(&self, v: Var) -> Option<&S> {
        self.vars[slot(v)].as_ref()
    }

    pub fn params(&self) -> &Params {
        self.params
    }
}

impl Expr {
    /// Evaluates over any [`Scalar`]. Domain failures name the offending subexpression.
    pub fn eval<S: Scalar>(&self, b: &Bindings<'_, S>) -> Result<S, Error> {
        let wrap = |e: &Expr, source: MathError| Error::Eval { expr: e.to_string(), source };
        Ok(match self {
            Expr::Const(c) => b.proto.lift(*c),
            Expr::Var(v) => b.get(*v).cloned().ok_or(Error::UnboundVariable(*v))?,
            Expr::Param(p) => {
                let v = b.params.get(p).ok_or_else(|| Error::UnboundParameter(p.clone()))?;
                b.proto.lift(*v)
            }
            Expr::Neg(e) => e.eval(b)?.neg(),
            Expr::Unary(f, e) => e.eval(b)?.apply(*f).map_err(|m| wrap(self, m))?,
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(b)?, r.eval(b)?);
                match op {
                    BinOp::Add => l.add(&r),
                    BinOp::Sub => l.sub(&r),
                    BinOp::Mul => l.mul(&r),
                    BinOp::Div => l.div(&r).map_err(|m| wrap(self, m))?,
                }
            }
            Expr::Pow(e, r) => e.eval(b)?.pow_rational(*r).map_err(|m| wrap(self, m))?,
        })
    }

    /// Real value at an ambient point (`x1..x(n-1), z`).
    pub fn eval_ambient(&self, point: &[f64], params: &Params) -> Result<f64, Error> {
        self.eval(&Bindings::ambient(point, params)?)
    }

    /// Substitutes parameter values as constants, leaving the rest untouched.
    pub fn bind_params(&self, params: &Params) -> Expr {
        match self {
            Expr::Param(p) => match params.get(p) {
                Some(v) => Expr::Const(*v),
                None => self.clone(),
            },
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.bind_params(params)),
            Expr::Unary(f, e) => Expr::unary(*f, e.bind_params(params)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.bind_params(params), r.bind_params(params)),
            Expr::Pow(e, r) => Expr::pow(e.bind_params(params), *r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::jet::JetSpace;

    fn params(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn real_eval() {
        let p = params(&[("C", 10.0)]);
        let e = parse("(x1+x2+z+C)^(3/13)").unwrap();
        let v = e.eval_ambient(&[1.0, 1.0, 1.0], &p).unwrap();
        assert!((v - libm::pow(13.0, 3.0 / 13.0)).abs() < 1e-14);
        assert!((v - 1.807_439_838_6).abs() < 1e-10);
    }

    #[test]
    fn jet_value_matches_real() {
        let p = params(&[("r", 0.7)]);
        let e = parse("exp(-x1)*atan(z/r) + sqrt(1+x1^2)^(-7/29)").unwrap();
        let pt = [0.3, 1.2];
        let space = JetSpace::new(2, 3).unwrap();
        let seeds = space.seeds(&pt).unwrap();
        let j = e.eval(&Bindings::ambient(&seeds, &p).unwrap()).unwrap();
        let r = e.eval_ambient(&pt, &p).unwrap();
        assert!((j.value() - r).abs() < 1e-14);
    }

    #[test]
    fn errors_are_reported() {
        let p = Params::new();
        let e = parse("1 + ln(z - 2)").unwrap();
        match e.eval_ambient(&[0.0, 1.0], &p) {
            Err(Error::Eval { expr, source: MathError::Domain { func: "ln", .. } }) => {
                assert_eq!(expr, "ln((z-2))")
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("k*z").unwrap().eval_ambient(&[0.0, 1.0], &p),
            Err(Error::UnboundParameter(k)) if k == "k"
        ));
        assert!(matches!(parse("x3").unwrap().eval_ambient(&[0.0, 1.0], &p), Err(Error::UnboundVariable(Var::X(3)))));
        assert!(matches!(
            parse("1/(z-1)").unwrap().eval_ambient(&[0.0, 1.0], &p),
            Err(Error::Eval { source: MathError::SingularDivision { .. }, .. })
        ));
    }

    #[test]
    fn bind_params_keeps_value() {
        let p = params(&[("k", 2.0)]);
        let e = parse("k*z + q").unwrap();
        let b = e.bind_params(&p);
        assert_eq!(b.parameters().into_iter().collect::<alloc::vec::Vec<_>>(), ["q"]);
        let p2 = params(&[("q", 1.0)]);
        assert_eq!(b.eval_ambient(&[0.0, 3.0], &p2).unwrap(), 7.0);
    }
}
