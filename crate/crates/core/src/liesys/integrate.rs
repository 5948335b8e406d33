//! Antiderivatives for polynomial, exponential and trigonometric integrands.
//!
//! Anything else is returned as a formal `integrate(f, x)` node and flagged.

use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::canon::Mono;
use crate::expr::{diff, is_zero, normalize, Expr, Frac, Kernel, Node, Poly, Rational, Symbol};

#[derive(Clone, Debug, PartialEq)]
pub struct Integrated {
    pub value: Expr,
    /// False when a formal integral node was emitted.
    pub elementary: bool,
}

impl Integrated {
    fn formal(f: Expr, x: &Symbol) -> Self {
        Integrated { value: Expr::integral(f, x), elementary: false }
    }
}

/// `(a, b)` with `e = a*x + b` and `a` free of `x`.
fn linear_in(e: &Expr, x: &Symbol) -> Result<Option<(Expr, Expr)>> {
    let a = diff(e, x)?;
    if a.contains_symbol(x) {
        return Ok(None);
    }
    let b = normalize(&(e - &a * Expr::sym(x)))?;
    Ok(Some((a, b)))
}

/// Antiderivative in `x` of `x^n * exp(a x + b)`, `a` nonzero and `n >= 0`.
fn x_pow_exp(n: u32, a: &Expr, e: &Expr, x: &Symbol) -> Expr {
    let xs = Expr::sym(x);
    let mut terms = Vec::new();
    let mut falling = Rational::one();
    for k in 0..=n {
        let sign = if k % 2 == 0 { Rational::one() } else { -Rational::one() };
        terms.push(Expr::rational(sign * &falling) * xs.pow((n - k) as i64) * a.pow(-(k as i64) - 1));
        falling *= Rational::from_integer((n - k).into());
    }
    Expr::add(terms) * e
}

/// Antiderivative of `x^n * sin(a x + b)` (or `cos`) by repeated parts.
fn x_pow_trig(n: u32, sin: bool, a: &Expr, arg: &Expr, x: &Symbol) -> Expr {
    let xs = Expr::sym(x);
    let (s, c) = (Expr::sin(arg.clone()), Expr::cos(arg.clone()));
    let lead = if sin { -(xs.pow(n as i64) * c) / a } else { xs.pow(n as i64) * s / a };
    if n == 0 {
        return lead;
    }
    let rest = Expr::int(n as i64) / a * x_pow_trig(n - 1, !sin, a, arg, x);
    if sin {
        lead + rest
    } else {
        lead - rest
    }
}

/// One canonical term `c * m`, or `None` when it is outside the supported shapes.
fn term(m: &Mono, c: &Rational, x: &Symbol) -> Result<Option<Expr>> {
    let xs = Expr::sym(x);
    let mut n: i32 = 0;
    let mut constant = Vec::new();
    let mut trig: Option<(bool, Expr)> = None;
    let mut lowered: Option<Expr> = None;
    for (a, k) in m.atoms() {
        if !a.contains_symbol(x) {
            constant.push((a.clone(), *k));
        } else if a.as_sym() == Some(x) {
            n = *k;
        } else if let (Node::Kernel(kind @ (Kernel::Sin | Kernel::Cos), arg), 1, None) = (a.node(), k, &trig) {
            trig = Some((*kind == Kernel::Sin, arg.clone()));
        } else if let (Node::Func(f), 1, None) = (a.node(), k, &lowered) {
            // d/dx of an unknown function integrates back to the function
            let Some(slot) = f.args.iter().position(|s| s == x).filter(|&i| f.orders[i] > 0) else {
                return Ok(None);
            };
            let mut f = f.clone();
            f.orders[slot] -= 1;
            lowered = Some(Expr::new(Node::Func(f)));
        } else {
            return Ok(None);
        }
    }
    let k = Mono::from_parts(constant, vec![]).to_expr(c);
    let e = if m.exps().is_empty() { Expr::one() } else { Expr::exp(m.exp_arg().to_expr()) };
    let a_exp = if m.exps().is_empty() {
        Expr::zero()
    } else {
        match linear_in(&m.exp_arg().to_expr(), x)? {
            Some((a, _)) => a,
            None => return Ok(None),
        }
    };
    let exp_free = is_zero(&a_exp).is_zero();
    let xn = xs.pow(n as i64);
    if let Some(f) = lowered {
        return Ok((n == 0 && trig.is_none() && m.exps().is_empty()).then(|| k * f));
    }
    let body = match (trig, exp_free) {
        (None, true) if n == -1 => Expr::log(xs),
        (None, true) => xn * xs.clone() / Expr::int(n as i64 + 1),
        (None, false) if n >= 0 => x_pow_exp(n as u32, &a_exp, &Expr::one(), x),
        (Some((sin, arg)), true) if n >= 0 => match linear_in(&arg, x)? {
            Some((a, _)) if !is_zero(&a).is_zero() => x_pow_trig(n as u32, sin, &a, &arg, x),
            _ => return Ok(None),
        },
        _ => return Ok(None),
    };
    Ok(Some(k * e * body))
}

/// Antiderivative of `f` in `x`, elementary where possible.
pub fn integrate(f: &Expr, x: &Symbol) -> Result<Integrated> {
    let f = normalize(f)?;
    if !f.contains_symbol(x) {
        return Ok(Integrated { value: normalize(&(f * Expr::sym(x)))?, elementary: true });
    }
    let frac = Frac::from_expr(&f)?;
    if frac.den().keys().any(|s| s.to_expr().contains_symbol(x)) {
        return Ok(Integrated::formal(f, x));
    }
    let scale = frac.den_only().to_expr();
    let mut parts = Vec::new();
    let mut leftover = Poly::zero();
    for (m, c) in frac.num().terms() {
        match term(m, c, x)? {
            Some(t) => parts.push(t),
            None => leftover.add_term(m.clone(), c.clone()),
        }
    }
    let mut elementary = true;
    if !leftover.is_zero() {
        parts.push(Expr::integral(leftover.to_expr(), x));
        elementary = false;
    }
    Ok(Integrated { value: normalize(&(Expr::add(parts) * scale))?, elementary })
}

/// A potential `P` with `dP/dx_i = grad[i]`, built slot by slot.
///
/// The gradient must be closed; a slot whose remainder still depends on an earlier
/// variable is reported as an error.
pub fn potential(grad: &[Expr], xs: &[Symbol]) -> Result<Integrated> {
    if grad.len() != xs.len() {
        return Err(Error::InvalidArgument(format!("{} components for {} variables", grad.len(), xs.len())));
    }
    let mut p = Expr::zero();
    let mut elementary = true;
    for (i, (g, x)) in grad.iter().zip(xs).enumerate() {
        let rest = normalize(&(g - diff(&p, x)?))?;
        if rest.is_zero_literal() {
            continue;
        }
        if let Some(prev) = xs[..i].iter().find(|s| !is_zero(&diff(&rest, s).unwrap_or_else(|_| Expr::one())).is_zero()) {
            if !rest.is_opaque() {
                return Err(Error::PreconditionFailed(format!("gradient is not closed: remainder {rest} depends on {prev}")));
            }
        }
        let r = integrate(&rest, x)?;
        elementary &= r.elementary;
        p = normalize(&(p + r.value))?;
    }
    Ok(Integrated { value: p, elementary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Workspace};

    fn check(src: &str, ws: &Workspace) -> Integrated {
        let x = ws.x(0).clone();
        let f = parse(src, ws).unwrap();
        let r = integrate(&f, &x).unwrap();
        if r.elementary {
            let back = diff(&r.value, &x).unwrap();
            assert!(is_zero(&(back - &f)).is_zero(), "d/dx {} != {src}", r.value);
        }
        r
    }

    #[test]
    fn elementary_shapes() {
        let mut ws = Workspace::new(&["x", "y"], &["u"], 2).unwrap();
        let args = ws.independent().to_vec();
        ws.add_function("f", &args).unwrap();
        for src in [
            "3*x^2 + y",
            "1/x + x^-3",
            "x^2*exp(2*x + y)",
            "exp(-x/2)",
            "x*sin(3*x + 1)",
            "x^2*cos(x)",
            "exp(x)*cos(y)",
            "y/(1 + y^2)",
            "3*diff(f(x, y), x)*y",
        ] {
            assert!(check(src, &ws).elementary, "{src}");
        }
        assert_eq!(check("7", &ws).value, parse("7*x", &ws).unwrap());
        assert_eq!(check("1/x", &ws).value, parse("log(x)", &ws).unwrap());
    }

    #[test]
    fn formal_fallback() {
        let ws = Workspace::new(&["x"], &["u"], 2).unwrap();
        let r = check("exp(x^2) + x", &ws);
        assert!(!r.elementary);
        assert!(r.value.is_opaque());
        let x = ws.x(0).clone();
        let back = diff(&r.value, &x).unwrap();
        assert!(is_zero(&(back - parse("exp(x^2) + x", &ws).unwrap())).is_zero());
        assert!(!check("1/(1 + x^2)", &ws).elementary);
    }

    #[test]
    fn potentials() {
        let ws = Workspace::new(&["x", "y"], &["u"], 2).unwrap();
        let xs = ws.independent().to_vec();
        let grad = [parse("2*x*y + exp(x)", &ws).unwrap(), parse("x^2 + cos(y)", &ws).unwrap()];
        let p = potential(&grad, &xs).unwrap();
        assert!(p.elementary);
        for (g, x) in grad.iter().zip(&xs) {
            assert!(is_zero(&(diff(&p.value, x).unwrap() - g)).is_zero());
        }
        let open = [parse("y", &ws).unwrap(), parse("-x", &ws).unwrap()];
        assert!(matches!(potential(&open, &xs), Err(Error::PreconditionFailed(_))));
    }
}
