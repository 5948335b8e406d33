use std::collections::BTreeMap;

use super::{diff, normalize, Expr, Node, Symbol};
use crate::error::{Error, Result};

pub type Bindings = BTreeMap<Symbol, Expr>;

/// Simultaneous substitution followed by normalization.
pub fn substitute(e: &Expr, bindings: &Bindings) -> Result<Expr> {
    for (s, r) in bindings {
        if bindings.keys().any(|b| r.contains_symbol(b)) {
            return Err(Error::CyclicBinding(s.name().to_string()));
        }
    }
    if bindings.is_empty() {
        return normalize(e);
    }
    normalize(&replace(e, &|node| match node {
        Node::Sym(s) => Ok(bindings.get(s).cloned()),
        Node::Func(fa) => match fa.args.iter().find(|a| bindings.contains_key(a)) {
            Some(a) => Err(Error::InvalidArgument(format!(
                "cannot substitute for `{a}`: it is an argument of the unknown function `{}`",
                fa.name
            ))),
            None => Ok(None),
        },
        Node::Integral(_, x) if bindings.contains_key(x) => Err(Error::InvalidArgument(format!(
            "cannot substitute for the integration variable `{x}`"
        ))),
        _ => Ok(None),
    })?)
}

/// Replaces unknown functions by explicit expressions in their arguments; formal
/// derivatives become derivatives of the replacement.
pub fn substitute_functions(e: &Expr, bindings: &BTreeMap<String, Expr>) -> Result<Expr> {
    normalize(&replace(e, &|node| match node {
        Node::Func(fa) => match bindings.get(&*fa.name) {
            Some(r) => {
                let mut out = normalize(r)?;
                for (a, &k) in fa.args.iter().zip(&fa.orders) {
                    for _ in 0..k {
                        out = diff(&out, a)?;
                    }
                }
                Ok(Some(out))
            }
            None => Ok(None),
        },
        _ => Ok(None),
    })?)
}

/// Bottom-up rebuild; `f` may replace a node outright.
pub(crate) fn replace(e: &Expr, f: &dyn Fn(&Node) -> Result<Option<Expr>>) -> Result<Expr> {
    if let Some(r) = f(e.node())? {
        return Ok(r);
    }
    Ok(match e.node() {
        Node::Num(_) | Node::Sym(_) | Node::Func(_) => e.clone(),
        Node::Add(ts) => Expr::add(ts.iter().map(|t| replace(t, f)).collect::<Result<_>>()?),
        Node::Mul(ts) => Expr::mul(ts.iter().map(|t| replace(t, f)).collect::<Result<_>>()?),
        Node::Pow(b, n) => replace(b, f)?.pow(*n),
        Node::Kernel(k, a) => Expr::kernel(*k, replace(a, f)?),
        Node::Integral(g, x) => Expr::integral(replace(g, f)?, x),
    })
}
