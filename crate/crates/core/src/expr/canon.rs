//! Canonical form.
//!
//! A normalized expression is a fraction `N / (S_1^k_1 ... S_r^k_r)` where the
//! numerator `N` is a Laurent polynomial over *atoms* (symbols, unknown
//! functions, formal integrals, and `log/sin/cos/sinh/cosh` of normalized
//! arguments) with at most one merged `exp(...)` factor per monomial, and each
//! `S_i` is a primitive sum: no monomial content, leading coefficient 1.
//!
//! Exponentials are stored split by generator: `exp(c_1 m_1 + c_2 m_2)` keeps
//! `(m_1, c_1), (m_2, c_2)`, which turns monomials into elements of a totally
//! ordered abelian group. That order is compatible with multiplication, so exact
//! division by a sum can run the usual leading-term algorithm.
//!
//! Positive powers of sums are always expanded. Rules applied to kernels:
//! `exp(a) exp(b) = exp(a + b)`, `exp(n log g) = g^n` for integer `n`,
//! `log(exp a) = a`, `log` splits over products (formally, for positive
//! content), `sin/sinh` are odd and `cos/cosh` even in their argument.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Kernel, Node, Rational};
use crate::error::{Error, Result};

/// Key of an exponential generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum ExpKey {
    /// A monomial with coefficient 1 (the arg was a Laurent polynomial).
    Mono(Mono),
    /// A whole fraction with leading coefficient 1 (the arg had a denominator).
    Frac(Box<Frac>),
}

impl ExpKey {
    fn as_frac(&self) -> Frac {
        match self {
            ExpKey::Mono(m) => Frac::from_poly(Poly::term(m.clone(), Rational::one())),
            ExpKey::Frac(f) => (**f).clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub(crate) struct Mono {
    atoms: Vec<(Expr, i32)>,
    exps: Vec<(ExpKey, Rational)>,
}

fn merge<K: Ord + Clone, V: Clone>(
    a: &[(K, V)],
    b: &[(K, V)],
    add: impl Fn(&V, &V) -> V,
    is_zero: impl Fn(&V) -> bool,
) -> Vec<(K, V)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some((ka, _)), Some((kb, _))) => ka.cmp(kb),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let v = add(&a[i].1, &b[j].1);
                if !is_zero(&v) {
                    out.push((a[i].0.clone(), v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn lex<K: Ord, V: Ord>(a: &[(K, V)], b: &[(K, V)], zero: &V) -> Ordering {
    let (mut i, mut j) = (0, 0);
    loop {
        let c = match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some((_, va)), None) => return va.cmp(zero),
            (None, Some((_, vb))) => return zero.cmp(vb),
            (Some((ka, va)), Some((kb, vb))) => match ka.cmp(kb) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    va.cmp(vb)
                }
                Ordering::Less => {
                    i += 1;
                    va.cmp(zero)
                }
                Ordering::Greater => {
                    j += 1;
                    zero.cmp(vb)
                }
            },
        };
        if c != Ordering::Equal {
            return c;
        }
    }
}

fn min_merge<K: Ord + Clone, V: Ord + Clone>(a: &[(K, V)], b: &[(K, V)], zero: &V) -> Vec<(K, V)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some((ka, _)), Some((kb, _))) => ka.cmp(kb),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        let (k, v) = match ord {
            Ordering::Less => {
                i += 1;
                (&a[i - 1].0, std::cmp::min(&a[i - 1].1, zero))
            }
            Ordering::Greater => {
                j += 1;
                (&b[j - 1].0, std::cmp::min(&b[j - 1].1, zero))
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
                (&a[i - 1].0, std::cmp::min(&a[i - 1].1, &b[j - 1].1))
            }
        };
        if v != zero {
            out.push((k.clone(), v.clone()));
        }
    }
    out
}

impl Mono {
    pub fn one() -> Self {
        Mono::default()
    }

    pub fn atom(e: Expr) -> Self {
        Mono { atoms: vec![(e, 1)], exps: vec![] }
    }

    /// Builds a monomial from sorted, zero-free parts taken from other canonical monomials.
    pub fn from_parts(atoms: Vec<(Expr, i32)>, exps: Vec<(ExpKey, Rational)>) -> Self {
        Mono { atoms, exps }
    }

    pub fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.exps.is_empty()
    }

    pub fn atoms(&self) -> &[(Expr, i32)] {
        &self.atoms
    }

    pub fn exps(&self) -> &[(ExpKey, Rational)] {
        &self.exps
    }

    fn mul_raw(&self, o: &Mono) -> Mono {
        if o.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return o.clone();
        }
        Mono {
            atoms: merge(&self.atoms, &o.atoms, |a, b| a + b, |v| *v == 0),
            exps: merge(&self.exps, &o.exps, |a, b| a + b, Rational::is_zero),
        }
    }

    fn inv(&self) -> Mono {
        Mono {
            atoms: self.atoms.iter().map(|(a, e)| (a.clone(), -e)).collect(),
            exps: self.exps.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    fn min_with(&self, o: &Mono) -> Mono {
        Mono {
            atoms: min_merge(&self.atoms, &o.atoms, &0),
            exps: min_merge(&self.exps, &o.exps, &Rational::zero()),
        }
    }

    /// The monomial without its exponential part.
    pub fn atom_part(&self) -> Mono {
        Mono { atoms: self.atoms.clone(), exps: vec![] }
    }

    /// `g` when this monomial is exactly `log(g)`.
    fn as_single_log(&self) -> Option<&Expr> {
        match (self.atoms.as_slice(), self.exps.is_empty()) {
            ([(a, 1)], true) => match a.node() {
                Node::Kernel(Kernel::Log, g) => Some(g),
                _ => None,
            },
            _ => None,
        }
    }

    fn needs_fix(&self) -> bool {
        if self.exps.len() > 1 && self.exps.iter().any(|(k, _)| matches!(k, ExpKey::Frac(_))) {
            return true;
        }
        self.exps.iter().any(|(k, c)| {
            c.is_integer() && matches!(k, ExpKey::Mono(m) if m.as_single_log().is_some())
        })
    }

    /// The argument of the merged exponential, as a fraction.
    pub fn exp_arg(&self) -> Frac {
        if let [(ExpKey::Frac(f), c)] = self.exps.as_slice() {
            return f.scale(c);
        }
        if self.exps.iter().any(|(k, _)| matches!(k, ExpKey::Frac(_))) {
            return self.exps.iter().fold(Frac::zero(), |acc, (k, c)| acc.add(&k.as_frac().scale(c)));
        }
        let mut p = Poly::zero();
        for (k, c) in &self.exps {
            if let ExpKey::Mono(m) = k {
                p.add_term(m.clone(), c.clone());
            }
        }
        Frac::from_poly(p)
    }

    pub fn factors(&self, coef: &Rational) -> Vec<Expr> {
        let mut out = Vec::with_capacity(self.atoms.len() + 2);
        if !coef.is_one() {
            out.push(Expr::rational(coef.clone()));
        }
        for (a, e) in &self.atoms {
            out.push(if *e == 1 { a.clone() } else { a.pow(*e as i64) });
        }
        if !self.exps.is_empty() {
            out.push(Expr::exp(self.exp_arg().to_expr()));
        }
        out
    }

    pub fn to_expr(&self, coef: &Rational) -> Expr {
        Expr::mul(self.factors(coef))
    }
}

impl Ord for Mono {
    /// A total order compatible with multiplication: lexicographic on atom
    /// exponents, then on exponential exponents.
    fn cmp(&self, o: &Self) -> Ordering {
        lex(&self.atoms, &o.atoms, &0)
            .then_with(|| lex(&self.exps, &o.exps, &Rational::zero()))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Laurent polynomial over atoms with exponential units. Arithmetic here is raw
/// group-ring arithmetic; [`Frac`] re-canonicalizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Mono, Rational>,
}

/// Upper bound on leading-term steps in one exact division attempt.
const DIVISION_STEP_LIMIT: usize = 20_000;

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::term(Mono::one(), Rational::one())
    }

    pub fn term(m: Mono, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn trailing(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    fn mul_term(&self, m: &Mono, c: &Rational) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, v)| (k.mul_raw(m), v * c)).collect() }
    }

    fn mul(&self, o: &Poly) -> Poly {
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul_raw(mb), ca * cb);
            }
        }
        out
    }

    fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / s`, if `s` divides `self` in the group ring.
    fn div_exact(&self, s: &Poly) -> Option<Poly> {
        let (lt_m, lt_c) = s.leading()?;
        let (tr_m, _) = s.trailing()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let lt_inv = lt_m.inv();
        let floor = self.trailing()?.0.mul_raw(&tr_m.inv());
        let mut rem = self.clone();
        let mut q = Poly::zero();
        let mut steps = 0;
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.mul_raw(&lt_inv);
            if qm < floor || steps >= DIVISION_STEP_LIMIT {
                return None;
            }
            let qc = rc / lt_c;
            rem = rem.add(&s.mul_term(&qm, &-&qc));
            q.add_term(qm, qc);
            steps += 1;
        }
        Some(q)
    }

    /// `self = c * m * p` with `p` free of monomial content and leading coefficient 1.
    pub fn content(&self) -> (Rational, Mono, Poly) {
        let mut keys = self.terms.keys();
        let Some(first) = keys.next() else {
            return (Rational::zero(), Mono::one(), Poly::zero());
        };
        let m = keys.fold(first.clone(), |acc, k| acc.min_with(k));
        let minv = m.inv();
        let lc = self.leading().unwrap().1.clone();
        let inv_lc = lc.recip();
        let p = Poly {
            terms: self.terms.iter().map(|(k, c)| (k.mul_raw(&minv), c * &inv_lc)).collect(),
        };
        (lc, m, p)
    }

    pub fn to_expr(&self) -> Expr {
        Expr::add(self.terms.iter().rev().map(|(m, c)| m.to_expr(c)).collect())
    }
}

/// A canonical fraction; see the module docs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub(crate) struct Frac {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

fn expand_den(den: &BTreeMap<Poly, u32>) -> Poly {
    den.iter().fold(Poly::one(), |acc, (s, k)| acc.mul(&s.pow(*k)))
}

fn cofactor(lcm: &BTreeMap<Poly, u32>, part: &BTreeMap<Poly, u32>) -> Poly {
    lcm.iter().fold(Poly::one(), |acc, (s, k)| {
        let have = part.get(s).copied().unwrap_or(0);
        if *k > have { acc.mul(&s.pow(k - have)) } else { acc }
    })
}

impl Frac {
    pub fn zero() -> Self {
        Frac::default()
    }

    pub fn one() -> Self {
        Frac::from_poly(Poly::one())
    }

    pub fn constant(q: Rational) -> Self {
        Frac::from_poly(Poly::term(Mono::one(), q))
    }

    pub fn atom(e: Expr) -> Self {
        Frac::from_poly(Poly::term(Mono::atom(e), Rational::one()))
    }

    /// Wraps a polynomial whose monomials are already canonical.
    pub fn from_poly(p: Poly) -> Self {
        Frac { num: p, den: BTreeMap::new() }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &BTreeMap<Poly, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `1 / den`.
    pub fn den_only(&self) -> Frac {
        Frac { num: Poly::one(), den: self.den.clone() }
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_empty() { self.num.constant_value() } else { None }
    }

    /// Leading numerator coefficient; its sign is the sign used for parity rules.
    pub fn lc(&self) -> Option<&Rational> {
        self.num.leading().map(|(_, c)| c)
    }

    pub fn neg(&self) -> Frac {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn scale(&self, q: &Rational) -> Frac {
        if q.is_zero() {
            return Frac::zero();
        }
        Frac { num: self.num.scale(q), den: self.den.clone() }
    }

    pub fn add(&self, o: &Frac) -> Frac {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let f = Frac { num: self.num.add(&o.num), den: self.den.clone() };
            return if f.den.is_empty() { f } else { f.reduce() };
        }
        let mut lcm = self.den.clone();
        for (s, k) in &o.den {
            let e = lcm.entry(s.clone()).or_insert(0);
            *e = (*e).max(*k);
        }
        let a = self.num.mul(&cofactor(&lcm, &self.den));
        let b = o.num.mul(&cofactor(&lcm, &o.den));
        Frac { num: a.add(&b), den: lcm }.fixup().reduce()
    }

    pub fn sub(&self, o: &Frac) -> Frac {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Frac) -> Frac {
        if self.is_zero() || o.is_zero() {
            return Frac::zero();
        }
        let num = self.num.mul(&o.num);
        let mut den = self.den.clone();
        for (s, k) in &o.den {
            *den.entry(s.clone()).or_insert(0) += k;
        }
        let simple = den.is_empty();
        let f = Frac { num, den }.fixup();
        if simple && f.den.is_empty() { f } else { f.reduce() }
    }

    pub fn inv(&self) -> Result<Frac> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (c, m, p) = self.num.content();
        let unit = Poly::term(m.inv(), c.recip());
        let num = expand_den(&self.den).mul(&unit);
        let mut den = BTreeMap::new();
        if p.len() > 1 {
            den.insert(p, 1);
        }
        Ok(Frac { num, den }.fixup().reduce())
    }

    pub fn pow(&self, n: i64) -> Result<Frac> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = Frac::one();
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Cancels denominator factors that divide the numerator exactly.
    fn reduce(mut self) -> Frac {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let keys: Vec<Poly> = self.den.keys().cloned().collect();
        for s in keys {
            while let Some(k) = self.den.get(&s).copied() {
                match self.num.div_exact(&s) {
                    Some(q) => {
                        self.num = q;
                        if k == 1 {
                            self.den.remove(&s);
                        } else {
                            self.den.insert(s.clone(), k - 1);
                        }
                    }
                    None => break,
                }
            }
        }
        self
    }

    /// Re-canonicalizes numerator monomials whose exponential part stopped being canonical.
    fn fixup(self) -> Frac {
        if !self.num.terms.keys().any(Mono::needs_fix) {
            return self;
        }
        let mut good = Poly::zero();
        let mut bad = Frac::zero();
        for (m, c) in self.num.terms {
            if m.needs_fix() {
                let atoms = Frac::from_poly(Poly::term(m.atom_part(), c));
                let e = exp_of_frac(&m.exp_arg()).expect("log arguments are nonzero");
                bad = bad.add(&atoms.mul(&e));
            } else {
                good.add_term(m, c);
            }
        }
        let den_only = Frac { num: Poly::one(), den: self.den.clone() };
        Frac { num: good, den: self.den }.reduce().add(&bad.mul(&den_only))
    }

    pub fn from_expr(e: &Expr) -> Result<Frac> {
        Ok(match e.node() {
            Node::Num(q) => Frac::constant(q.clone()),
            Node::Sym(_) | Node::Func(_) => Frac::atom(e.clone()),
            Node::Integral(f, x) => {
                let g = Frac::from_expr(f)?;
                if g.is_zero() {
                    Frac::zero()
                } else {
                    Frac::atom(Expr::integral(g.to_expr(), x))
                }
            }
            Node::Add(ts) => {
                let mut acc = Frac::zero();
                for t in ts {
                    acc = acc.add(&Frac::from_expr(t)?);
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = Frac::one();
                for f in fs {
                    acc = acc.mul(&Frac::from_expr(f)?);
                }
                acc
            }
            Node::Pow(b, n) => match b.node() {
                Node::Pow(c, m) => Frac::from_expr(&c.pow(m * n))?,
                Node::Mul(fs) if *n < 0 => {
                    let mut acc = Frac::one();
                    for f in fs {
                        acc = acc.mul(&Frac::from_expr(&f.pow(*n))?);
                    }
                    acc
                }
                _ => Frac::from_expr(b)?.pow(*n)?,
            },
            Node::Kernel(k, a) => apply_kernel(*k, &Frac::from_expr(a)?)?,
        })
    }

    pub fn to_expr(&self) -> Expr {
        if self.num.is_zero() {
            return Expr::zero();
        }
        let mut factors = if self.num.len() == 1 {
            let (m, c) = self.num.terms.iter().next().unwrap();
            m.factors(c)
        } else {
            vec![self.num.to_expr()]
        };
        for (s, k) in &self.den {
            factors.push(s.to_expr().pow(-(*k as i64)));
        }
        Expr::mul(factors)
    }
}

/// Applies a kernel to a canonical argument.
pub(crate) fn apply_kernel(k: Kernel, a: &Frac) -> Result<Frac> {
    let negative = a.lc().is_some_and(|c| c.is_negative());
    match k {
        Kernel::Exp => exp_of_frac(a),
        Kernel::Log => log_of_frac(a),
        Kernel::Sin | Kernel::Sinh => {
            if a.is_zero() {
                Ok(Frac::zero())
            } else if negative {
                Ok(Frac::atom(Expr::kernel(k, a.neg().to_expr())).neg())
            } else {
                Ok(Frac::atom(Expr::kernel(k, a.to_expr())))
            }
        }
        Kernel::Cos | Kernel::Cosh => {
            if a.is_zero() {
                Ok(Frac::one())
            } else {
                let arg = if negative { a.neg() } else { a.clone() };
                Ok(Frac::atom(Expr::kernel(k, arg.to_expr())))
            }
        }
    }
}

fn exp_of_frac(a: &Frac) -> Result<Frac> {
    if a.is_zero() {
        return Ok(Frac::one());
    }
    if !a.den.is_empty() {
        let lc = a.lc().unwrap().clone();
        let key = a.scale(&lc.recip());
        let m = Mono { atoms: vec![], exps: vec![(ExpKey::Frac(Box::new(key)), lc)] };
        return Ok(Frac::from_poly(Poly::term(m, Rational::one())));
    }
    let mut gens = Vec::new();
    let mut extra = Frac::one();
    for (m, c) in a.num.terms() {
        if c.is_integer() {
            if let (Some(g), Some(n)) = (m.as_single_log(), c.to_integer().to_i64()) {
                extra = extra.mul(&Frac::from_expr(g)?.pow(n)?);
                continue;
            }
        }
        gens.push((ExpKey::Mono(m.clone()), c.clone()));
    }
    gens.sort_by(|x, y| x.0.cmp(&y.0));
    let base = Frac::from_poly(Poly::term(Mono { atoms: vec![], exps: gens }, Rational::one()));
    Ok(base.mul(&extra))
}

fn log_of_frac(a: &Frac) -> Result<Frac> {
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let (c, m, p) = a.num.content();
    if c.is_negative() {
        return Ok(Frac::atom(Expr::log(a.to_expr())));
    }
    let mut acc = log_rational(&c);
    for (atom, e) in &m.atoms {
        acc = acc.add(&Frac::atom(Expr::log(atom.clone())).scale(&Rational::from_integer(BigInt::from(*e))));
    }
    for (key, q) in &m.exps {
        acc = acc.add(&key.as_frac().scale(q));
    }
    if !p.is_one() {
        acc = acc.add(&Frac::atom(Expr::log(p.to_expr())));
    }
    for (s, k) in &a.den {
        acc = acc.sub(&Frac::atom(Expr::log(s.to_expr())).scale(&Rational::from_integer(BigInt::from(*k))));
    }
    Ok(acc)
}

/// Trial-division bound for splitting `log` of rational constants into primes.
const PRIME_TRIAL_LIMIT: u64 = 10_000;

fn factor_u64(mut n: u64) -> Vec<(u64, i64)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= PRIME_TRIAL_LIMIT && p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn log_rational(c: &Rational) -> Frac {
    let mut acc = Frac::zero();
    let parts = [(c.numer(), 1i64), (c.denom(), -1i64)];
    for (n, sign) in parts {
        match n.to_u64() {
            Some(v) => {
                for (p, e) in factor_u64(v) {
                    let atom = Frac::atom(Expr::log(Expr::int(p as i64)));
                    acc = acc.add(&atom.scale(&Rational::from_integer(BigInt::from(e * sign))));
                }
            }
            None => {
                let atom = Frac::atom(Expr::log(Expr::rational(Rational::from_integer(n.clone()))));
                acc = acc.add(&atom.scale(&Rational::from_integer(BigInt::from(sign))));
            }
        }
    }
    acc
}

/// Canonical form of `e`.
pub fn normalize(e: &Expr) -> Result<Expr> {
    Ok(Frac::from_expr(e)?.to_expr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rat, Symbol, SymbolKind};

    fn x() -> Expr {
        Expr::sym(&Symbol::new("x", SymbolKind::Independent(0)))
    }

    fn u() -> Expr {
        Expr::sym(&Symbol::new("u", SymbolKind::Dependent(0)))
    }

    fn n(e: Expr) -> Expr {
        normalize(&e).unwrap()
    }

    #[test]
    fn folds_constants_and_identities() {
        assert_eq!(n(Expr::int(2) * (Expr::int(3) * u())), n(Expr::int(6) * u()));
        assert_eq!(n(Expr::int(0) * u() + x()), x());
        let e = (u() + Expr::one()).pow(2) - u().pow(2) - Expr::int(2) * u() - Expr::one();
        assert!(n(e).is_zero_literal());
    }

    #[test]
    fn merges_exponentials() {
        let half = Expr::rational(rat(1, 2));
        let e = Expr::exp(&half * &u()) * Expr::exp(-(&half * &u()));
        assert!(n(e).is_one_literal());
        let e = Expr::exp(Expr::log(x()) * Expr::int(2));
        assert_eq!(n(e), n(x().pow(2)));
        let e = Expr::exp(&half * Expr::log(x())) * Expr::exp(&half * Expr::log(x()));
        assert_eq!(n(e), x());
    }

    #[test]
    fn log_of_exp_and_products() {
        assert_eq!(n(Expr::log(Expr::exp(u()))), u());
        let e = Expr::log(x() * x()) - Expr::int(2) * Expr::log(x());
        assert!(n(e).is_zero_literal());
        let e = Expr::exp(Expr::log(Expr::int(4)) / Expr::int(2));
        assert_eq!(n(e), Expr::int(2));
    }

    #[test]
    fn parity_rules_and_no_pythagoras() {
        assert_eq!(n(Expr::sin(-u())), n(-Expr::sin(u())));
        assert_eq!(n(Expr::cos(-u())), n(Expr::cos(u())));
        let e = Expr::sin(u()).pow(2) + Expr::cos(u()).pow(2);
        assert!(!n(e).is_constant());
    }

    #[test]
    fn rational_functions_cancel() {
        let s = x() + u();
        let e = (s.pow(2)) / (&x() + &u());
        assert_eq!(n(e), n(x() + u()));
        let e = (x().pow(2) - Expr::one()) / (x() - Expr::one());
        assert_eq!(n(e), n(x() + Expr::one()));
        let e = Expr::one() / (x() + Expr::one()) - Expr::one() / (x() + Expr::one());
        assert!(n(e).is_zero_literal());
        let e = Expr::exp(Expr::int(2) * u()) - Expr::one();
        let e = e / (Expr::exp(u()) + Expr::one());
        assert_eq!(n(e), n(Expr::exp(u()) - Expr::one()));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(normalize(&Expr::zero().pow(-1)), Err(Error::DivisionByZero));
        assert_eq!(normalize(&(u() - u()).pow(-2)), Err(Error::DivisionByZero));
    }

    #[test]
    fn normalize_is_idempotent_on_mixed_forms() {
        let e = Expr::exp(x() / u()) * (u().pow(2) + Expr::one()) / (x() + Expr::exp(u() / Expr::int(2)))
            + Expr::log(Expr::int(12) * x() / (u() + Expr::one()).pow(2))
            + Expr::exp(x() / (x() + Expr::one())) * Expr::exp(x());
        let once = n(e);
        assert_eq!(n(once.clone()), once);
    }
}
