use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{Expr, Node, Rational};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Product,
    Power,
}

pub(crate) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    let mut s = String::new();
    render(&mut s, e, Prec::Sum);
    f.write_str(&s)
}

fn render(out: &mut String, e: &Expr, ctx: Prec) {
    match e.node() {
        Node::Num(q) => render_num(out, q, ctx),
        Node::Sym(s) => out.push_str(s.name()),
        Node::Add(ts) => {
            let wrap = ctx > Prec::Sum;
            if wrap {
                out.push('(');
            }
            for (i, t) in ts.iter().enumerate() {
                let mut piece = String::new();
                render(&mut piece, t, Prec::Sum);
                if i == 0 {
                    out.push_str(&piece);
                } else if let Some(rest) = piece.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                } else {
                    out.push_str(" + ");
                    out.push_str(&piece);
                }
            }
            if wrap {
                out.push(')');
            }
        }
        Node::Mul(_) | Node::Pow(..) => render_product(out, e, ctx),
        Node::Kernel(k, a) => {
            out.push_str(k.name());
            out.push('(');
            render(out, a, Prec::Sum);
            out.push(')');
        }
        Node::Func(fa) => {
            let call = format!(
                "{}({})",
                fa.name,
                fa.args.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
            );
            if fa.is_derivative() {
                out.push_str("diff(");
                out.push_str(&call);
                for (a, &k) in fa.args.iter().zip(&fa.orders) {
                    for _ in 0..k {
                        out.push(',');
                        out.push_str(a.name());
                    }
                }
                out.push(')');
            } else {
                out.push_str(&call);
            }
        }
        Node::Integral(g, x) => {
            out.push_str("integrate(");
            render(out, g, Prec::Sum);
            out.push(',');
            out.push_str(x.name());
            out.push(')');
        }
    }
}

fn render_num(out: &mut String, q: &Rational, ctx: Prec) {
    let plain = q.is_integer() && !(q.is_negative() && ctx == Prec::Power);
    if plain {
        write!(out, "{}", q.numer()).unwrap();
    } else if ctx == Prec::Sum && !q.is_integer() {
        write!(out, "{}/{}", q.numer(), q.denom()).unwrap();
    } else {
        write!(out, "({q})").unwrap();
    }
}

/// Products print as `sign numerator / denominator`, with negative powers moved below the bar.
fn render_product(out: &mut String, e: &Expr, ctx: Prec) {
    let factors: Vec<&Expr> = match e.node() {
        Node::Mul(fs) => fs.iter().collect(),
        _ => vec![e],
    };
    let mut coef = Rational::one();
    let mut upper: Vec<String> = Vec::new();
    let mut lower: Vec<String> = Vec::new();
    for f in factors {
        match f.node() {
            Node::Num(q) => coef *= q,
            Node::Pow(b, n) if *n < 0 => lower.push(power(b, -n)),
            Node::Pow(b, n) => upper.push(power(b, *n)),
            _ => {
                let mut s = String::new();
                render(&mut s, f, Prec::Product);
                upper.push(s);
            }
        }
    }
    let negative = coef.is_negative();
    let coef = coef.abs();
    if !coef.numer().is_one() || upper.is_empty() {
        upper.insert(0, coef.numer().to_string());
    }
    if !coef.denom().is_one() {
        lower.insert(0, coef.denom().to_string());
    }
    let mut body = upper.join("*");
    if !lower.is_empty() {
        body.push('/');
        if lower.len() == 1 {
            body.push_str(&lower[0]);
        } else {
            write!(body, "({})", lower.join("*")).unwrap();
        }
    }
    let wrap = ctx == Prec::Power || (negative && ctx == Prec::Product);
    if wrap {
        out.push('(');
    }
    if negative {
        out.push('-');
    }
    out.push_str(&body);
    if wrap {
        out.push(')');
    }
}

fn power(base: &Expr, n: i64) -> String {
    let mut s = String::new();
    render(&mut s, base, Prec::Power);
    if n != 1 {
        write!(s, "^{n}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::{normalize, rat, Symbol, SymbolKind};
    use super::*;

    fn u() -> Expr {
        Expr::sym(&Symbol::new("u", SymbolKind::Dependent(0)))
    }

    fn x() -> Expr {
        Expr::sym(&Symbol::new("x1", SymbolKind::Independent(0)))
    }

    #[test]
    fn renders_signs_and_fractions() {
        let e = normalize(&(x() - Expr::int(2) * u().pow(3))).unwrap();
        assert_eq!(e.to_string(), "-2*u^3 + x1");
        let e = normalize(&(-Expr::one() / (x() + u()))).unwrap();
        assert_eq!(e.to_string(), "-1/(u + x1)");
        let e = normalize(&(Expr::rational(rat(1, 2)) * Expr::exp(-u() / Expr::int(2)))).unwrap();
        assert_eq!(e.to_string(), "exp(-u/2)/2");
    }

    #[test]
    fn renders_powers_of_negative_numbers_unambiguously() {
        let e = Expr::new(Node::Pow(Expr::int(-2), 3));
        assert_eq!(e.to_string(), "(-2)^3");
    }
}
