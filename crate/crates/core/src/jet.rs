//! Total derivatives, prolongation and contact contractions on `J^n`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::condsym::NormalFormSystem;
use crate::error::{Error, Result};
use crate::expr::diff::diff_frac;
use crate::expr::{normalize, substitute, Bindings, Expr, Frac, Symbol, Workspace};
use crate::multiindex::MultiIndex;
use crate::par::Exec;

/// `Y = sum xi^i d/dx^i + sum phi^a d/du^a` with coefficients on `J^0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    xi: Vec<Expr>,
    phi: Vec<Expr>,
}

impl VectorField {
    pub fn new(xi: Vec<Expr>, phi: Vec<Expr>) -> Result<Self> {
        let xi = xi.iter().map(normalize).collect::<Result<Vec<_>>>()?;
        let phi = phi.iter().map(normalize).collect::<Result<Vec<_>>>()?;
        if let Some(c) = xi.iter().chain(&phi).find(|c| c.contains_jets()) {
            return Err(Error::InvalidArgument(format!("vector field coefficient `{c}` depends on jets")));
        }
        Ok(VectorField { xi, phi })
    }

    /// Parses coefficient strings in `ws`.
    pub fn parse(ws: &Workspace, xi: &[&str], phi: &[&str]) -> Result<Self> {
        if xi.len() != ws.p() || phi.len() != ws.q() {
            return Err(Error::InvalidArgument(format!(
                "expected {} xi and {} phi coefficients, got {} and {}",
                ws.p(),
                ws.q(),
                xi.len(),
                phi.len()
            )));
        }
        let xi = xi.iter().map(|s| crate::expr::parse(s, ws)).collect::<Result<_>>()?;
        let phi = phi.iter().map(|s| crate::expr::parse(s, ws)).collect::<Result<_>>()?;
        VectorField::new(xi, phi)
    }

    pub fn zero(ws: &Workspace) -> Self {
        VectorField { xi: vec![Expr::zero(); ws.p()], phi: vec![Expr::zero(); ws.q()] }
    }

    pub fn xi(&self) -> &[Expr] {
        &self.xi
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn is_zero_literal(&self) -> bool {
        self.xi.iter().chain(&self.phi).all(Expr::is_zero_literal)
    }

    /// All coefficients, `xi` first.
    pub fn coefficients(&self) -> impl Iterator<Item = &Expr> {
        self.xi.iter().chain(&self.phi)
    }

    /// `Y(f)` for `f` on `J^0`; jet coordinates in `f` are held fixed.
    pub fn apply(&self, f: &Expr, ws: &Workspace) -> Result<Expr> {
        Ok(self.apply_frac(&normalize(f)?, ws)?.to_expr())
    }

    pub(crate) fn apply_frac(&self, f: &Expr, ws: &Workspace) -> Result<Frac> {
        let mut acc = Frac::zero();
        let vars = ws.independent().iter().zip(&self.xi).chain(ws.dependent().iter().zip(&self.phi));
        for (s, c) in vars {
            if c.is_zero_literal() || !f.contains_symbol(s) {
                continue;
            }
            acc = acc.add(&Frac::from_expr(c)?.mul(&diff_frac(f, s)?));
        }
        Ok(acc)
    }

    pub fn scale(&self, g: &Expr) -> Result<Self> {
        let m = |c: &Expr| normalize(&(g * c));
        Ok(VectorField {
            xi: self.xi.iter().map(m).collect::<Result<_>>()?,
            phi: self.phi.iter().map(m).collect::<Result<_>>()?,
        })
    }

    pub fn add(&self, o: &VectorField) -> Result<Self> {
        let s = |a: &[Expr], b: &[Expr]| a.iter().zip(b).map(|(x, y)| normalize(&(x + y))).collect::<Result<Vec<_>>>();
        Ok(VectorField { xi: s(&self.xi, &o.xi)?, phi: s(&self.phi, &o.phi)? })
    }

    pub fn sub(&self, o: &VectorField) -> Result<Self> {
        self.add(&o.scale(&Expr::int(-1))?)
    }

    /// Renders with the coordinate names of `ws`, e.g. `d_x1 + u^2*d_u`.
    pub fn display<'a>(&'a self, ws: &'a Workspace) -> impl fmt::Display + 'a {
        FieldDisplay { field: self, ws }
    }
}

struct FieldDisplay<'a> {
    field: &'a VectorField,
    ws: &'a Workspace,
}

impl fmt::Display for FieldDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.ws.independent().iter().chain(self.ws.dependent());
        let mut first = true;
        for (s, c) in names.zip(self.field.coefficients()) {
            if c.is_zero_literal() {
                continue;
            }
            let text = c.to_string();
            let (neg, body) = match text.strip_prefix('-') {
                Some(rest) if !matches!(c.node(), crate::expr::Node::Add(_)) => (true, rest.to_string()),
                _ => (false, text),
            };
            let sep = match (first, neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let coef = if body == "1" {
                String::new()
            } else if matches!(c.node(), crate::expr::Node::Add(_)) {
                format!("({body})*")
            } else {
                format!("{body}*")
            };
            write!(f, "{sep}{coef}d_{}", s.name())?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Jet coordinate of `K` to be differentiated along slot `i`, respecting the limits.
fn raised(ws: &Workspace, s: &Symbol, i: usize, limit: u32) -> Result<Option<Symbol>> {
    let Some((alpha, k)) = s.jet_data(ws.p()) else { return Ok(None) };
    let k = k.increment(i);
    if k.order() > limit {
        return Err(Error::HardJetLimitExceeded { order: k.order(), limit });
    }
    Ok(Some(ws.jet(alpha, &k)))
}

/// `D_i f` for normalized `f`, allowing jet coordinates up to order `limit`.
pub(crate) fn total_derivative_frac(f: &Expr, i: usize, ws: &Workspace, limit: u32) -> Result<Frac> {
    if i >= ws.p() {
        return Err(Error::InvalidArgument(format!("slot {i} out of range for p = {}", ws.p())));
    }
    let mut acc = diff_frac(f, ws.x(i))?;
    for s in f.free_symbols() {
        let Some(up) = raised(ws, &s, i, limit)? else { continue };
        let d = diff_frac(f, &s)?;
        if !d.is_zero() {
            acc = acc.add(&Frac::atom(Expr::sym(&up)).mul(&d));
        }
    }
    Ok(acc)
}

fn warn_above_cap(ws: &Workspace, order: u32) {
    if order > ws.jet_cap() {
        log::warn!("jet order {order} exceeds the working cap {}; raising it", ws.jet_cap());
    }
}

/// `D_i e = de/dx_i + sum u^a_{K,i} de/du^a_K` (slot `i` is zero-based).
pub fn total_derivative(e: &Expr, i: usize, ws: &Workspace) -> Result<Expr> {
    let f = normalize(e)?;
    let out = total_derivative_frac(&f, i, ws, ws.hard_limit())?.to_expr();
    warn_above_cap(ws, out.jet_order());
    Ok(out)
}

/// `D_K = D_1^{k_1} ... D_p^{k_p}`; the identity when `|K| = 0`.
pub fn total_derivative_multi(e: &Expr, k: &MultiIndex, ws: &Workspace) -> Result<Expr> {
    let mut f = normalize(e)?;
    for i in k.slots() {
        f = total_derivative_frac(&f, i, ws, ws.hard_limit())?.to_expr();
    }
    warn_above_cap(ws, f.jet_order());
    Ok(f)
}

/// `Q^a = phi^a - sum xi^i u^a_i`.
pub fn characteristic(y: &VectorField, ws: &Workspace) -> Result<Vec<Expr>> {
    (0..ws.q())
        .map(|a| {
            let mut q = y.phi[a].clone();
            for (i, xi) in y.xi.iter().enumerate() {
                q = q - xi * &ws.jet_expr(a, &MultiIndex::unit(ws.p(), i));
            }
            normalize(&q)
        })
        .collect()
}

/// `j^n Y`: the base field plus `psi^a_K` for `1 <= |K| <= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProlongedVectorField {
    base: VectorField,
    order: u32,
    psi: BTreeMap<(usize, MultiIndex), Expr>,
}

impl ProlongedVectorField {
    pub fn base(&self) -> &VectorField {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `psi^a_K`; for `|K| = 0` this is `phi^a`.
    pub fn psi(&self, alpha: usize, k: &MultiIndex) -> Option<&Expr> {
        if k.is_zero() {
            return self.base.phi.get(alpha);
        }
        self.psi.get(&(alpha, k.clone()))
    }

    pub fn psi_table(&self) -> &BTreeMap<(usize, MultiIndex), Expr> {
        &self.psi
    }

    /// `j^nY(f)` for `f` of jet order at most `n`.
    pub fn apply(&self, f: &Expr, ws: &Workspace) -> Result<Expr> {
        let f = normalize(f)?;
        if f.jet_order() > self.order {
            return Err(Error::InvalidArgument(format!(
                "expression has jet order {} but the field is prolonged to order {}",
                f.jet_order(),
                self.order
            )));
        }
        let mut acc = self.base.apply_frac(&f, ws)?;
        for s in f.free_symbols() {
            if !s.is_jet() {
                continue;
            }
            let (alpha, k) = s.jet_data(ws.p()).expect("jet symbol");
            let psi = &self.psi[&(alpha, k)];
            if !psi.is_zero_literal() {
                acc = acc.add(&Frac::from_expr(psi)?.mul(&diff_frac(&f, &s)?));
            }
        }
        Ok(acc.to_expr())
    }
}

pub fn prolong(y: &VectorField, n: u32, ws: &Workspace) -> Result<ProlongedVectorField> {
    prolong_with(y, n, ws, Exec::default())
}

/// Prolongation with an explicit execution mode; each dependent variable is independent work.
pub fn prolong_with(y: &VectorField, n: u32, ws: &Workspace, exec: Exec) -> Result<ProlongedVectorField> {
    if n == 0 {
        return Err(Error::InvalidArgument("prolongation order must be at least 1".into()));
    }
    if n + 1 > ws.hard_limit() {
        return Err(Error::HardJetLimitExceeded { order: n + 1, limit: ws.hard_limit() });
    }
    warn_above_cap(ws, n);
    let q = characteristic(y, ws)?;
    let p = ws.p();
    let alphas: Vec<usize> = (0..ws.q()).collect();
    let tables = exec.try_map(&alphas, |&a| {
        let mut dq: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
        dq.insert(MultiIndex::zero(p), q[a].clone());
        let mut out = Vec::new();
        for k in MultiIndex::all_up_to(p, 1, n) {
            let i = k.first_nonzero_slot().expect("nonzero index");
            let prev = &dq[&k.decrement(i).expect("slot is nonzero")];
            let d = total_derivative_frac(prev, i, ws, n + 1)?;
            let mut psi = d.clone();
            for (j, xi) in y.xi.iter().enumerate() {
                if !xi.is_zero_literal() {
                    psi = psi.add(&Frac::from_expr(xi)?.mul(&Frac::atom(ws.jet_expr(a, &k.increment(j)))));
                }
            }
            let psi = psi.to_expr();
            if psi.jet_order() > n {
                return Err(Error::HardJetLimitExceeded { order: psi.jet_order(), limit: n });
            }
            out.push(((a, k.clone()), psi));
            dq.insert(k, d.to_expr());
        }
        Ok(out)
    })?;
    Ok(ProlongedVectorField { base: y.clone(), order: n, psi: tables.into_iter().flatten().collect() })
}

/// Identifies the basic contact form `theta^a_K = du^a_K - sum u^a_{K,i} dx^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContactFormId {
    pub alpha: usize,
    pub k: MultiIndex,
}

impl ContactFormId {
    pub fn new(alpha: usize, k: MultiIndex) -> Self {
        ContactFormId { alpha, k }
    }
}

/// `i_{j^nY} theta^a_K = psi^a_K - sum u^a_{K,i} xi^i`, defined for `|K| <= n - 1`.
pub fn contract_contact(py: &ProlongedVectorField, id: &ContactFormId, ws: &Workspace) -> Result<Expr> {
    if id.k.order() + 1 > py.order {
        return Err(Error::PreconditionFailed(format!(
            "contact form of order {} needs a prolongation of order at least {}, have {}",
            id.k.order(),
            id.k.order() + 1,
            py.order
        )));
    }
    let psi = py
        .psi(id.alpha, &id.k)
        .ok_or_else(|| Error::InvalidArgument(format!("no dependent variable with index {}", id.alpha)))?;
    let mut acc = psi.clone();
    for (i, xi) in py.base.xi.iter().enumerate() {
        acc = acc - xi * &ws.jet_expr(id.alpha, &id.k.increment(i));
    }
    normalize(&acc)
}

/// Value of `u^a_K` on the section of a normal form, obtained by applying
/// `Z_{i_1}, ..., Z_{i_r}` to `phi^a_{i_0}` for the slot sequence `slots`.
fn restrict_along(alpha: usize, slots: &[usize], nf: &NormalFormSystem, ws: &Workspace) -> Result<Expr> {
    let mut f = nf.rhs(alpha, slots[0]).clone();
    for &i in &slots[1..] {
        f = nf.z_apply_frac(i, &f, ws)?.to_expr();
    }
    Ok(f)
}

/// Replaces every jet coordinate by its value on the section `u^a_i = phi^a_i`.
pub fn restrict_to_section(e: &Expr, nf: &NormalFormSystem, ws: &Workspace) -> Result<Expr> {
    let e = normalize(e)?;
    let mut cache: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    let mut bindings = Bindings::new();
    let jets: BTreeSet<Symbol> = e.free_symbols().into_iter().filter(Symbol::is_jet).collect();
    for s in jets {
        let (alpha, k) = s.jet_data(ws.p()).expect("jet symbol");
        let v = section_value(alpha, &k, nf, ws, &mut cache)?;
        bindings.insert(s, v);
    }
    substitute(&e, &bindings)
}

/// `u^a_K` on the section, built by peeling the first nonzero slot of `K` outermost.
fn section_value(
    alpha: usize,
    k: &MultiIndex,
    nf: &NormalFormSystem,
    ws: &Workspace,
    cache: &mut BTreeMap<(usize, MultiIndex), Expr>,
) -> Result<Expr> {
    if let Some(v) = cache.get(&(alpha, k.clone())) {
        return Ok(v.clone());
    }
    let i = k.first_nonzero_slot().expect("order at least one");
    let rest = k.decrement(i).expect("slot is nonzero");
    let v = if rest.is_zero() {
        nf.rhs(alpha, i).clone()
    } else {
        let inner = section_value(alpha, &rest, nf, ws, cache)?;
        nf.z_apply_frac(i, &inner, ws)?.to_expr()
    };
    cache.insert((alpha, k.clone()), v.clone());
    Ok(v)
}

/// Upper bound on the slot orderings tried by [`restriction_variants`].
pub const VARIANT_CAP: usize = 64;

/// The distinct values of `u^a_K` on the section over different orders of
/// differentiation; a single value when the normal form is compatible.
pub fn restriction_variants(alpha: usize, k: &MultiIndex, nf: &NormalFormSystem, ws: &Workspace) -> Result<Vec<Expr>> {
    if k.is_zero() {
        return Ok(vec![ws.u_expr(alpha)]);
    }
    let mut orders = Vec::new();
    permutations(&mut k.slots(), 0, &mut BTreeSet::new(), &mut orders);
    let mut out: Vec<Expr> = Vec::new();
    for slots in orders {
        let v = restrict_along(alpha, &slots, nf, ws)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

fn permutations(items: &mut Vec<usize>, at: usize, seen: &mut BTreeSet<Vec<usize>>, out: &mut Vec<Vec<usize>>) {
    if out.len() >= VARIANT_CAP {
        return;
    }
    if at == items.len() {
        if seen.insert(items.clone()) {
            out.push(items.clone());
        }
        return;
    }
    for j in at..items.len() {
        items.swap(at, j);
        permutations(items, at + 1, seen, out);
        items.swap(at, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn ws2() -> Workspace {
        Workspace::new(&["x1", "x2"], &["u"], 2).unwrap()
    }

    fn ws1() -> Workspace {
        Workspace::new(&["x"], &["u"], 2).unwrap()
    }

    #[test]
    fn total_derivatives() {
        let ws = ws2();
        let p = |s: &str| parse(s, &ws).unwrap();
        assert_eq!(total_derivative(&p("u"), 0, &ws).unwrap(), p("u_{x1}"));
        assert_eq!(total_derivative(&p("u^2"), 0, &ws).unwrap(), p("2*u*u_{x1}"));
        assert_eq!(total_derivative(&p("x2*u^2"), 1, &ws).unwrap(), p("u^2 + 2*x2*u*u_{x2}"));
        let k = MultiIndex::from_counts(vec![1, 1]);
        assert_eq!(total_derivative_multi(&p("u"), &k, &ws).unwrap(), p("u_{x1,x2}"));
        assert_eq!(total_derivative_multi(&p("u^3"), &MultiIndex::zero(2), &ws).unwrap(), p("u^3"));
    }

    #[test]
    fn hard_limit_is_enforced() {
        let ws = Workspace::new(&["x"], &["u"], 1).unwrap();
        let p = |s: &str| parse(s, &ws).unwrap();
        let k = MultiIndex::from_counts(vec![3]);
        assert!(total_derivative_multi(&p("u"), &k, &ws).is_ok());
        let k = MultiIndex::from_counts(vec![4]);
        assert_eq!(
            total_derivative_multi(&p("u"), &k, &ws),
            Err(Error::HardJetLimitExceeded { order: 4, limit: 3 })
        );
    }

    #[test]
    fn characteristics() {
        let ws = ws2();
        let p = |s: &str| parse(s, &ws).unwrap();
        let y = VectorField::parse(&ws, &["1", "0"], &["1"]).unwrap();
        assert_eq!(characteristic(&y, &ws).unwrap(), vec![p("1 - u_{x1}")]);
        let y = VectorField::parse(&ws, &["1", "0"], &["u^2"]).unwrap();
        assert_eq!(characteristic(&y, &ws).unwrap(), vec![p("u^2 - u_{x1}")]);
        let y = VectorField::parse(&ws, &["0", "0"], &["1"]).unwrap();
        assert_eq!(characteristic(&y, &ws).unwrap(), vec![p("1")]);
    }

    #[test]
    fn prolongations() {
        let ws = ws1();
        let p = |s: &str| parse(s, &ws).unwrap();
        let y = VectorField::parse(&ws, &["0"], &["u"]).unwrap();
        let py = prolong(&y, 2, &ws).unwrap();
        assert_eq!(py.psi(0, &MultiIndex::unit(1, 0)).unwrap(), &p("u_{x}"));
        assert_eq!(py.psi(0, &MultiIndex::from_counts(vec![2])).unwrap(), &p("u_{x,x}"));
        let t = VectorField::parse(&ws, &["1"], &["0"]).unwrap();
        let pt = prolong(&t, 2, &ws).unwrap();
        assert!(pt.psi_table().values().all(Expr::is_zero_literal));
        let s = VectorField::parse(&ws, &["x"], &["0"]).unwrap();
        let ps = prolong(&s, 2, &ws).unwrap();
        assert_eq!(ps.psi(0, &MultiIndex::unit(1, 0)).unwrap(), &p("-u_{x}"));
        assert_eq!(ps.psi(0, &MultiIndex::from_counts(vec![2])).unwrap(), &p("-2*u_{x,x}"));
    }

    #[test]
    fn contact_contractions() {
        let ws = Workspace::new(&["x", "t"], &["u"], 2).unwrap();
        let p = |s: &str| parse(s, &ws).unwrap();
        let y = VectorField::parse(&ws, &["1", "0"], &["1"]).unwrap();
        let py = prolong(&y, 1, &ws).unwrap();
        let id = ContactFormId::new(0, MultiIndex::zero(2));
        assert_eq!(contract_contact(&py, &id, &ws).unwrap(), p("1 - u_{x}"));
        let z = VectorField::parse(&ws, &["0", "1"], &["x"]).unwrap();
        let pz = prolong(&z, 1, &ws).unwrap();
        assert_eq!(contract_contact(&pz, &id, &ws).unwrap(), p("x - u_{t}"));
        let high = ContactFormId::new(0, MultiIndex::unit(2, 0));
        assert!(matches!(contract_contact(&pz, &high, &ws), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn restriction() {
        let ws = ws2();
        let p = |s: &str| parse(s, &ws).unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["u^2", "u^2"]]).unwrap();
        assert!(restrict_to_section(&p("u_{x1,x2} - 2*u^3"), &nf, &ws).unwrap().is_zero_literal());
        assert_eq!(restrict_to_section(&p("u_{x1}"), &nf, &ws).unwrap(), p("u^2"));
        let nf = NormalFormSystem::parse(&ws, &[&["x2", "0"]]).unwrap();
        assert!(restrict_to_section(&p("u_{x1,x1}"), &nf, &ws).unwrap().is_zero_literal());
    }

    #[test]
    fn incompatible_sections_have_several_variants() {
        let ws = Workspace::new(&["x", "t"], &["u"], 2).unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["1", "x"]]).unwrap();
        let k = MultiIndex::from_counts(vec![1, 1]);
        let vs = restriction_variants(0, &k, &nf, &ws).unwrap();
        assert_eq!(vs.len(), 2);
        let nf = NormalFormSystem::parse(&ws, &[&["u^2", "u^2"]]).unwrap();
        assert_eq!(restriction_variants(0, &k, &nf, &ws).unwrap().len(), 1);
    }

    #[test]
    fn field_display() {
        let ws = ws2();
        let y = VectorField::parse(&ws, &["1", "0"], &["u^2"]).unwrap();
        assert_eq!(y.display(&ws).to_string(), "d_x1 + u^2*d_u");
        let y = VectorField::parse(&ws, &["0", "-1"], &["u + 1"]).unwrap();
        assert_eq!(y.display(&ws).to_string(), "-d_x2 + (u + 1)*d_u");
    }
}
