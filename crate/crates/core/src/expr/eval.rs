use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use thiserror::Error;

use super::{Expr, FuncApp, Kernel, Node, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value for `{0}`")]
    Unbound(String),
    #[error("unknown function or formal integral cannot be evaluated")]
    Opaque,
    #[error("value outside the domain")]
    Domain,
}

/// Numeric values for symbols and, optionally, for unknown-function applications.
#[derive(Clone, Debug, Default)]
pub struct Point {
    pub symbols: BTreeMap<Symbol, f64>,
    pub functions: BTreeMap<FuncApp, f64>,
}

impl Point {
    pub fn set(&mut self, s: &Symbol, v: f64) {
        self.symbols.insert(s.clone(), v);
    }
}

pub fn eval(e: &Expr, at: &Point) -> Result<f64, EvalError> {
    let v = match e.node() {
        Node::Num(q) => q.to_f64().ok_or(EvalError::Domain)?,
        Node::Sym(s) => *at.symbols.get(s).ok_or_else(|| EvalError::Unbound(s.name().to_string()))?,
        Node::Add(ts) => ts.iter().map(|t| eval(t, at)).sum::<Result<f64, _>>()?,
        Node::Mul(ts) => ts.iter().map(|t| eval(t, at)).product::<Result<f64, _>>()?,
        Node::Pow(b, n) => {
            let b = eval(b, at)?;
            if b == 0.0 && *n < 0 {
                return Err(EvalError::Domain);
            }
            b.powi(i32::try_from(*n).map_err(|_| EvalError::Domain)?)
        }
        Node::Kernel(k, a) => {
            let a = eval(a, at)?;
            match k {
                Kernel::Exp => a.exp(),
                Kernel::Log if a <= 0.0 => return Err(EvalError::Domain),
                Kernel::Log => a.ln(),
                Kernel::Sin => a.sin(),
                Kernel::Cos => a.cos(),
                Kernel::Sinh => a.sinh(),
                Kernel::Cosh => a.cosh(),
            }
        }
        Node::Func(f) => *at.functions.get(f).ok_or(EvalError::Opaque)?,
        Node::Integral(..) => return Err(EvalError::Opaque),
    };
    if v.is_finite() { Ok(v) } else { Err(EvalError::Domain) }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Workspace};
    use super::*;

    #[test]
    fn evaluates_with_domain_checks() {
        let ws = Workspace::new(&["x"], &["u"], 1).unwrap();
        let mut p = Point::default();
        p.set(ws.x(0), 2.0);
        p.set(ws.u(0), 0.5);
        let v = eval(&parse("x^2*exp(u) - log(x)/u", &ws).unwrap(), &p).unwrap();
        assert!((v - (4.0 * 0.5f64.exp() - 2.0f64.ln() / 0.5)).abs() < 1e-12);
        p.set(ws.x(0), -1.0);
        assert_eq!(eval(&parse("log(x)", &ws).unwrap(), &p), Err(EvalError::Domain));
        let empty = Point::default();
        assert_eq!(eval(&parse("u", &ws).unwrap(), &empty), Err(EvalError::Unbound("u".into())));
    }
}
