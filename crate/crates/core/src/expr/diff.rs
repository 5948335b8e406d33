use super::canon::apply_kernel;
use super::{normalize, ri, Expr, Frac, Kernel, Node, Symbol};
use crate::error::Result;

/// Partial derivative `∂e/∂s`, every jet coordinate being an independent symbol.
pub fn diff(e: &Expr, s: &Symbol) -> Result<Expr> {
    let n = normalize(e)?;
    Ok(diff_frac(&n, s)?.to_expr())
}

/// Derivative of an already normalized expression, kept in canonical form.
pub(crate) fn diff_frac(e: &Expr, s: &Symbol) -> Result<Frac> {
    if !e.contains_symbol(s) {
        return Ok(Frac::zero());
    }
    Ok(match e.node() {
        Node::Num(_) => Frac::zero(),
        Node::Sym(t) => {
            if t == s {
                Frac::one()
            } else {
                Frac::zero()
            }
        }
        Node::Add(ts) => {
            let mut acc = Frac::zero();
            for t in ts {
                acc = acc.add(&diff_frac(t, s)?);
            }
            acc
        }
        Node::Mul(fs) => {
            let parts: Vec<Frac> = fs.iter().map(Frac::from_expr).collect::<Result<_>>()?;
            let mut acc = Frac::zero();
            for (i, f) in fs.iter().enumerate() {
                let df = diff_frac(f, s)?;
                if df.is_zero() {
                    continue;
                }
                let rest = parts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .fold(Frac::one(), |p, (_, g)| p.mul(g));
                acc = acc.add(&rest.mul(&df));
            }
            acc
        }
        Node::Pow(b, n) => {
            let db = diff_frac(b, s)?;
            let base = Frac::from_expr(b)?;
            base.pow(n - 1)?.mul(&db).scale(&ri(*n))
        }
        Node::Kernel(k, a) => {
            let da = diff_frac(a, s)?;
            let arg = Frac::from_expr(a)?;
            let outer = match k {
                Kernel::Exp => apply_kernel(Kernel::Exp, &arg)?,
                Kernel::Log => arg.inv()?,
                Kernel::Sin => apply_kernel(Kernel::Cos, &arg)?,
                Kernel::Cos => apply_kernel(Kernel::Sin, &arg)?.neg(),
                Kernel::Sinh => apply_kernel(Kernel::Cosh, &arg)?,
                Kernel::Cosh => apply_kernel(Kernel::Sinh, &arg)?,
            };
            outer.mul(&da)
        }
        Node::Func(fa) => match fa.args.iter().position(|a| a == s) {
            Some(i) => {
                let mut d = fa.clone();
                d.orders[i] += 1;
                Frac::atom(Expr::new(Node::Func(d)))
            }
            None => Frac::zero(),
        },
        Node::Integral(f, x) => {
            if x == s {
                Frac::from_expr(f)?
            } else {
                let df = diff_frac(f, s)?;
                Frac::from_expr(&Expr::integral(df.to_expr(), x))?
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Workspace};
    use super::*;

    fn ws() -> Workspace {
        let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let args = ws.independent().to_vec();
        ws.add_function("a", &args).unwrap();
        ws
    }

    #[test]
    fn basic_rules() {
        let ws = ws();
        let x1 = ws.x(0).clone();
        let u = ws.u(0).clone();
        let p = |s: &str| parse(s, &ws).unwrap();
        assert_eq!(diff(&p("u_{x1}*x1"), &x1).unwrap(), p("u_{x1}"));
        assert_eq!(diff(&p("exp(u/2)"), &u).unwrap(), p("exp(u/2)/2"));
        assert_eq!(diff(&p("a(x1,x2)"), &x1).unwrap().to_string(), "diff(a(x1,x2),x1)");
        assert_eq!(diff(&p("log(x1^2 + 1)"), &x1).unwrap(), p("2*x1/(x1^2+1)"));
        assert_eq!(diff(&p("cos(u)"), &u).unwrap(), p("-sin(u)"));
        assert_eq!(diff(&p("integrate(a(x1,x2), x1)"), &x1).unwrap(), p("a(x1,x2)"));
        assert!(diff(&p("u_{x2}"), &x1).unwrap().is_zero_literal());
    }

    #[test]
    fn mixed_partials_of_unknowns_are_symmetric() {
        let ws = ws();
        let p = |s: &str| parse(s, &ws).unwrap();
        assert_eq!(p("diff(a(x1,x2),x1,x2)"), p("diff(a(x1,x2),x2,x1)"));
    }
}
