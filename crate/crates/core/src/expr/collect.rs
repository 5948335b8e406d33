use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::canon::{ExpKey, Mono};
use super::diff::diff_frac;
use super::subst::replace;
use super::{normalize, rat, Expr, Frac, Kernel, Node, Poly, Rational, Symbol};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// Polynomials of total degree at most `degree`.
    Polynomial { degree: u32 },
    /// `exp(k u / 2)` with `|k| <= kmax`.
    Exponential { kmax: u32 },
    /// `1, cos(n u), sin(n u)` with `n <= nmax`.
    Trigonometric { nmax: u32 },
    /// `1, exp(-u), exp(u)`.
    Hyperbolic,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::Polynomial { degree } => write!(f, "polynomial(degree {degree})"),
            FamilyKind::Exponential { kmax } => write!(f, "exponential(kmax {kmax})"),
            FamilyKind::Trigonometric { nmax } => write!(f, "trigonometric(nmax {nmax})"),
            FamilyKind::Hyperbolic => write!(f, "hyperbolic"),
        }
    }
}

/// A family of functions of the dependent variables with an explicit finite basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzFamily {
    kind: FamilyKind,
    vars: Vec<Symbol>,
    basis: Vec<Expr>,
}

impl AnsatzFamily {
    /// Builds the basis and checks it is closed under `∂/∂u^α`.
    pub fn new(kind: FamilyKind, vars: &[Symbol]) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument("an ansatz family needs at least one variable".into()));
        }
        let basis = match kind {
            FamilyKind::Polynomial { degree } => polynomial_basis(vars, degree),
            FamilyKind::Exponential { kmax } => exponential_basis(vars, kmax as i64, rat(1, 2)),
            FamilyKind::Hyperbolic => exponential_basis(vars, 1, Rational::one()),
            FamilyKind::Trigonometric { nmax } => trigonometric_basis(vars, nmax as i64),
        };
        let family = AnsatzFamily { kind, vars: vars.to_vec(), basis };
        family.check_closed()?;
        Ok(family)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn basis(&self) -> &[Expr] {
        &self.basis
    }

    fn check_closed(&self) -> Result<()> {
        for b in &self.basis {
            for v in &self.vars {
                let d = diff_frac(b, v)?.to_expr();
                let parts = collect(&d, self)?;
                if let Some(m) = parts.keys().find(|m| !self.basis.contains(m)) {
                    return Err(Error::FamilyNotClosed(format!("d({b})/d{v} produces {m}")));
                }
            }
        }
        Ok(())
    }
}

fn polynomial_basis(vars: &[Symbol], degree: u32) -> Vec<Expr> {
    let mut out = Vec::new();
    for d in (0..=degree).rev() {
        let mut level = Vec::new();
        exponent_vectors(vars.len(), d, &mut vec![0; vars.len()], 0, &mut level);
        for ks in level.into_iter().rev() {
            let factors = vars.iter().zip(&ks).filter(|(_, k)| **k > 0).map(|(v, k)| Expr::sym(v).pow(*k as i64));
            out.push(normalize(&Expr::mul(factors.collect())).unwrap());
        }
    }
    out
}

fn exponent_vectors(n: usize, total: u32, cur: &mut Vec<u32>, slot: usize, out: &mut Vec<Vec<u32>>) {
    if slot + 1 == n {
        cur[slot] = total;
        out.push(cur.clone());
        return;
    }
    for k in 0..=total {
        cur[slot] = k;
        exponent_vectors(n, total - k, cur, slot + 1, out);
    }
}

/// Signed steps in the order `0, -1, 1, -2, 2, ...`.
fn signed_steps(max: i64) -> Vec<i64> {
    let mut v = vec![0];
    for k in 1..=max {
        v.push(-k);
        v.push(k);
    }
    v
}

fn exponential_basis(vars: &[Symbol], kmax: i64, step: Rational) -> Vec<Expr> {
    let mut combos: Vec<Vec<i64>> = vec![vec![]];
    for _ in vars {
        combos = combos
            .into_iter()
            .flat_map(|c| signed_steps(kmax).into_iter().map(move |k| [c.clone(), vec![k]].concat()))
            .collect();
    }
    combos
        .into_iter()
        .map(|ks| {
            let arg = vars
                .iter()
                .zip(&ks)
                .map(|(v, k)| Expr::rational(&step * Rational::from_integer(BigInt::from(*k))) * Expr::sym(v));
            normalize(&Expr::exp(Expr::add(arg.collect()))).unwrap()
        })
        .collect()
}

fn trigonometric_basis(vars: &[Symbol], nmax: i64) -> Vec<Expr> {
    let mut harmonics: Vec<Vec<i64>> = vec![vec![]];
    for _ in vars {
        harmonics = harmonics
            .into_iter()
            .flat_map(|c| signed_steps(nmax).into_iter().map(move |k| [c.clone(), vec![k]].concat()))
            .collect();
    }
    let mut out = vec![Expr::one()];
    for n in harmonics.into_iter().filter(|n| canonical_harmonic(n)) {
        out.push(harmonic_expr(vars, &n, false));
        out.push(harmonic_expr(vars, &n, true));
    }
    out
}

fn canonical_harmonic(n: &[i64]) -> bool {
    n.iter().find(|k| **k != 0).is_some_and(|k| *k > 0)
}

fn harmonic_expr(vars: &[Symbol], n: &[i64], sin: bool) -> Expr {
    let arg = Expr::add(vars.iter().zip(n).map(|(v, k)| Expr::int(*k) * Expr::sym(v)).collect());
    normalize(&if sin { Expr::sin(arg) } else { Expr::cos(arg) }).unwrap()
}

/// Splits `e = Σ coeff(m) * m` over the family's basis monomials, with coefficients free of the variables.
pub fn collect(e: &Expr, family: &AnsatzFamily) -> Result<BTreeMap<Expr, Expr>> {
    let vars = family.vars();
    let e = match family.kind {
        FamilyKind::Exponential { .. } | FamilyKind::Hyperbolic => hyperbolic_to_exp(e, vars)?,
        _ => normalize(e)?,
    };
    let f = Frac::from_expr(&e)?;
    let mentions = |x: &Expr| vars.iter().any(|v| x.contains_symbol(v));
    for s in f.den().keys() {
        let s = s.to_expr();
        if mentions(&s) {
            return Err(Error::NotInFamily(format!("denominator {s} depends on the variables")));
        }
    }
    let mut acc: BTreeMap<Expr, Poly> = BTreeMap::new();
    for (m, c) in f.num().terms() {
        for (key, coeff) in split_term(m, c, family)? {
            let p = acc.entry(key).or_default();
            for (cm, cc) in coeff.terms() {
                p.add_term(cm.clone(), cc.clone());
            }
        }
    }
    let scale = f.den_only();
    Ok(acc
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| (k, Frac::from_poly(p).mul(&scale).to_expr()))
        .collect())
}

fn hyperbolic_to_exp(e: &Expr, vars: &[Symbol]) -> Result<Expr> {
    let e = normalize(e)?;
    let half = Expr::rational(rat(1, 2));
    normalize(&replace(&e, &|node| match node {
        Node::Kernel(k @ (Kernel::Sinh | Kernel::Cosh), a) if vars.iter().any(|v| a.contains_symbol(v)) => {
            let sign = if *k == Kernel::Sinh { -1 } else { 1 };
            Ok(Some(&half * (Expr::exp(a.clone()) + Expr::int(sign) * Expr::exp(-a.clone()))))
        }
        _ => Ok(None),
    })?)
}

fn not_in_family(m: &Mono, c: &Rational, family: &AnsatzFamily) -> Error {
    Error::NotInFamily(format!("{} against the {} family", m.to_expr(c), family.kind))
}

fn split_term(m: &Mono, c: &Rational, family: &AnsatzFamily) -> Result<Vec<(Expr, Poly)>> {
    let vars = family.vars();
    let mentions = |x: &Expr| vars.iter().any(|v| x.contains_symbol(v));
    let key_mentions = |k: &ExpKey| match k {
        ExpKey::Mono(km) => mentions(&km.to_expr(&Rational::one())),
        ExpKey::Frac(f) => mentions(&f.to_expr()),
    };
    let bad = || not_in_family(m, c, family);
    let mut rest_atoms = Vec::new();
    let mut rest_exps = Vec::new();
    match family.kind {
        FamilyKind::Polynomial { .. } => {
            let mut key = Vec::new();
            for (a, e) in m.atoms() {
                if a.as_sym().is_some_and(|s| vars.contains(s)) {
                    if *e < 0 {
                        return Err(bad());
                    }
                    key.push((a.clone(), *e));
                } else if mentions(a) {
                    return Err(bad());
                } else {
                    rest_atoms.push((a.clone(), *e));
                }
            }
            if m.exps().iter().any(|(k, _)| key_mentions(k)) {
                return Err(bad());
            }
            rest_exps.extend(m.exps().iter().cloned());
            let key = Mono::from_parts(key, vec![]).to_expr(&Rational::one());
            Ok(vec![(key, Poly::term(Mono::from_parts(rest_atoms, rest_exps), c.clone()))])
        }
        FamilyKind::Exponential { .. } | FamilyKind::Hyperbolic => {
            let step = if family.kind == FamilyKind::Hyperbolic { Rational::one() } else { rat(1, 2) };
            for (a, e) in m.atoms() {
                if mentions(a) {
                    return Err(bad());
                }
                rest_atoms.push((a.clone(), *e));
            }
            let mut key = Vec::new();
            for (k, q) in m.exps() {
                if !key_mentions(k) {
                    rest_exps.push((k.clone(), q.clone()));
                    continue;
                }
                let ExpKey::Mono(km) = k else { return Err(bad()) };
                let is_var = matches!(km.atoms(), [(a, 1)] if a.as_sym().is_some_and(|s| vars.contains(s)))
                    && km.exps().is_empty();
                if !is_var || !(q / &step).is_integer() {
                    return Err(bad());
                }
                key.push((k.clone(), q.clone()));
            }
            let key = Mono::from_parts(vec![], key).to_expr(&Rational::one());
            Ok(vec![(key, Poly::term(Mono::from_parts(rest_atoms, rest_exps), c.clone()))])
        }
        FamilyKind::Trigonometric { .. } => {
            if m.exps().iter().any(|(k, _)| key_mentions(k)) {
                return Err(bad());
            }
            rest_exps.extend(m.exps().iter().cloned());
            let mut series = TrigSeries::one(vars.len());
            for (a, e) in m.atoms() {
                if !mentions(a) {
                    rest_atoms.push((a.clone(), *e));
                    continue;
                }
                let factor = match a.node() {
                    Node::Kernel(k @ (Kernel::Sin | Kernel::Cos), arg) if *e > 0 => {
                        TrigSeries::of_kernel(*k == Kernel::Sin, arg, vars).ok_or_else(bad)?
                    }
                    _ => return Err(bad()),
                };
                for _ in 0..*e {
                    series = series.mul(&factor);
                }
            }
            let base = Frac::from_poly(Poly::term(Mono::from_parts(rest_atoms, rest_exps), c.clone()));
            Ok(series
                .terms
                .into_iter()
                .map(|((n, sin), coef)| {
                    let key = if n.iter().all(|k| *k == 0) { Expr::one() } else { harmonic_expr(vars, &n, sin) };
                    (key, frac_poly(&base.mul(&coef)))
                })
                .collect())
        }
    }
}

/// The numerator of a denominator-free fraction.
fn frac_poly(f: &Frac) -> Poly {
    debug_assert!(f.den().is_empty());
    f.num().clone()
}

/// `Σ coef * {cos|sin}(n · u)` with canonical harmonics.
#[derive(Clone, Debug)]
struct TrigSeries {
    terms: BTreeMap<(Vec<i64>, bool), Frac>,
}

impl TrigSeries {
    fn one(q: usize) -> Self {
        TrigSeries { terms: [((vec![0; q], false), Frac::one())].into() }
    }

    fn add(&mut self, n: Vec<i64>, sin: bool, c: Frac) {
        let (n, sign) = if canonical_harmonic(&n) || n.iter().all(|k| *k == 0) {
            (n, 1)
        } else {
            (n.iter().map(|k| -k).collect(), if sin { -1 } else { 1 })
        };
        if sin && n.iter().all(|k| *k == 0) {
            return;
        }
        let c = if sign < 0 { c.neg() } else { c };
        let entry = self.terms.entry((n, sin)).or_insert_with(Frac::zero);
        *entry = entry.add(&c);
    }

    /// `sin(arg)` or `cos(arg)` with `arg = n · u + r`, `n` integral and `r` free of `u`.
    fn of_kernel(sin: bool, arg: &Expr, vars: &[Symbol]) -> Option<TrigSeries> {
        let a = Frac::from_expr(arg).ok()?;
        let mut n = Vec::with_capacity(vars.len());
        let mut r = a.clone();
        for v in vars {
            let k = diff_frac(arg, v).ok()?.constant_value()?;
            if !k.is_integer() {
                return None;
            }
            r = r.sub(&Frac::from_poly(Poly::term(Mono::atom(Expr::sym(v)), k.clone())));
            n.push(k.to_integer().to_i64()?);
        }
        let r_expr = r.to_expr();
        if vars.iter().any(|v| r_expr.contains_symbol(v)) {
            return None;
        }
        let cos_r = Frac::from_expr(&Expr::cos(r_expr.clone())).ok()?;
        let sin_r = Frac::from_expr(&Expr::sin(r_expr)).ok()?;
        let mut s = TrigSeries { terms: BTreeMap::new() };
        if sin {
            s.add(n.clone(), true, cos_r);
            s.add(n, false, sin_r);
        } else {
            s.add(n.clone(), false, cos_r);
            s.add(n, true, sin_r.neg());
        }
        s.terms.retain(|_, c| !c.is_zero());
        Some(s)
    }

    fn mul(&self, o: &TrigSeries) -> TrigSeries {
        let half = Rational::new(One::one(), BigInt::from(2));
        let mut out = TrigSeries { terms: BTreeMap::new() };
        for ((m, sa), ca) in &self.terms {
            for ((n, sb), cb) in &o.terms {
                let c = ca.mul(cb).scale(&half);
                let diff: Vec<i64> = m.iter().zip(n).map(|(a, b)| a - b).collect();
                let sum: Vec<i64> = m.iter().zip(n).map(|(a, b)| a + b).collect();
                match (sa, sb) {
                    (false, false) => {
                        out.add(diff, false, c.clone());
                        out.add(sum, false, c);
                    }
                    (true, true) => {
                        out.add(diff, false, c.clone());
                        out.add(sum, false, c.neg());
                    }
                    (true, false) => {
                        out.add(sum, true, c.clone());
                        out.add(diff, true, c);
                    }
                    (false, true) => {
                        out.add(sum, true, c.clone());
                        out.add(diff, true, c.neg());
                    }
                }
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Workspace};
    use super::*;

    fn ws() -> Workspace {
        let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let args = ws.independent().to_vec();
        for f in ["a2", "a1", "b2", "b1", "H", "e2r", "e2i"] {
            ws.add_function(f, &args).unwrap();
        }
        ws
    }

    #[test]
    fn bases() {
        let ws = ws();
        let u = [ws.u(0).clone()];
        let poly = AnsatzFamily::new(FamilyKind::Polynomial { degree: 2 }, &u).unwrap();
        let names: Vec<String> = poly.basis().iter().map(|b| b.to_string()).collect();
        assert_eq!(names, ["u^2", "u", "1"]);
        let ex = AnsatzFamily::new(FamilyKind::Exponential { kmax: 1 }, &u).unwrap();
        let names: Vec<String> = ex.basis().iter().map(|b| b.to_string()).collect();
        assert_eq!(names, ["1", "exp(-u/2)", "exp(u/2)"]);
        let ex2 = AnsatzFamily::new(FamilyKind::Exponential { kmax: 2 }, &u).unwrap();
        assert_eq!(ex2.basis().len(), 5);
        let tr = AnsatzFamily::new(FamilyKind::Trigonometric { nmax: 1 }, &u).unwrap();
        assert_eq!(tr.basis().len(), 3);
    }

    #[test]
    fn polynomial_collection() {
        let ws = ws();
        let fam = AnsatzFamily::new(FamilyKind::Polynomial { degree: 2 }, &[ws.u(0).clone()]).unwrap();
        let e = parse("2*a2(x1,x2)*b2(x1,x2)*u^3 + (2*b2(x1,x2)*a1(x1,x2) + b1(x1,x2)*a2(x1,x2) + diff(b2(x1,x2),x1))*u^2", &ws).unwrap();
        let parts = collect(&e, &fam).unwrap();
        assert_eq!(parts.len(), 2);
        let u3 = parse("u^3", &ws).unwrap();
        assert_eq!(parts[&u3], parse("2*a2(x1,x2)*b2(x1,x2)", &ws).unwrap());
        assert!(collect(&Expr::zero(), &fam).unwrap().is_empty());
        assert!(matches!(collect(&parse("log(u)", &ws).unwrap(), &fam), Err(Error::NotInFamily(_))));
    }

    #[test]
    fn exponential_collection() {
        let ws = ws();
        let fam = AnsatzFamily::new(FamilyKind::Exponential { kmax: 1 }, &[ws.u(0).clone()]).unwrap();
        let e = parse("(e2r(x1,x2)^2 + e2i(x1,x2)^2 + H(x1,x2)^2)/2*exp(u)", &ws).unwrap();
        let parts = collect(&e, &fam).unwrap();
        assert_eq!(parts.len(), 1);
        let k = parse("exp(u)", &ws).unwrap();
        assert_eq!(parts[&k], parse("(H(x1,x2)^2 + e2r(x1,x2)^2 + e2i(x1,x2)^2)/2", &ws).unwrap());
        let e = parse("sinh(u) + x1*exp(u/2)*exp(x1)", &ws).unwrap();
        let parts = collect(&e, &fam).unwrap();
        assert_eq!(parts.len(), 3);
    }

    #[test]
    fn trigonometric_collection_linearizes_products() {
        let ws = ws();
        let fam = AnsatzFamily::new(FamilyKind::Trigonometric { nmax: 2 }, &[ws.u(0).clone()]).unwrap();
        let e = parse("sin(u)*cos(u) + cos(u)^2 + sin(u + x1)", &ws).unwrap();
        let parts = collect(&e, &fam).unwrap();
        let p = |s: &str| parse(s, &ws).unwrap();
        assert_eq!(parts[&p("sin(2*u)")], p("1/2"));
        assert_eq!(parts[&p("cos(2*u)")], p("1/2"));
        assert_eq!(parts[&p("1")], p("1/2"));
        assert_eq!(parts[&p("sin(u)")], p("cos(x1)"));
        assert_eq!(parts[&p("cos(u)")], p("sin(x1)"));
    }
}
