use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{compatibility_residuals_with, monic, NormalFormSystem, PdeSystem};
use crate::error::{Error, Result};
use crate::expr::{
    collect, normalize, substitute, substitute_functions, AnsatzFamily, Bindings, Expr, FamilyKind, Symbol, Workspace,
};
use crate::jet::{restrict_to_section, restriction_variants, VARIANT_CAP};
use crate::par::Exec;

/// One unknown coefficient function `a^a_{jK}(x)` of an ansatz.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzCoefficient {
    pub name: String,
    pub slot: usize,
    pub alpha: usize,
    /// The basis function it multiplies.
    pub monomial: Expr,
    /// The application `name(x...)`.
    pub function: Expr,
}

/// A normal form whose right-hand sides are family expansions with unknown coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzSystem {
    family: AnsatzFamily,
    workspace: Workspace,
    coefficients: Vec<AnsatzCoefficient>,
    nf: NormalFormSystem,
}

impl AnsatzSystem {
    pub fn family(&self) -> &AnsatzFamily {
        &self.family
    }

    /// The input workspace extended by the coefficient functions.
    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn coefficients(&self) -> &[AnsatzCoefficient] {
        &self.coefficients
    }

    pub fn normal_form(&self) -> &NormalFormSystem {
        &self.nf
    }

    /// The normal form with coefficient functions replaced by the given expressions.
    pub fn instantiate(&self, values: &BTreeMap<String, Expr>) -> Result<NormalFormSystem> {
        let phi = self
            .nf
            .rows()
            .iter()
            .map(|row| row.iter().map(|e| substitute_functions(e, values)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        NormalFormSystem::new(&self.workspace, phi)
    }
}

fn slot_letter(slot: usize) -> char {
    (b'a' + (slot % 26) as u8) as char
}

/// Expands every `phi^a_j` over the family basis with fresh coefficient functions of `x`.
///
/// Names are the slot letter (`a`, `b`, ...) followed by the degree for a scalar
/// polynomial family and by the basis index otherwise, e.g. `a2, a1, a0, b2, ...`.
pub fn build_ansatz(family: &AnsatzFamily, ws: &Workspace) -> Result<AnsatzSystem> {
    let mut workspace = ws.clone();
    let args = ws.independent().to_vec();
    let scalar_poly = matches!(family.kind(), FamilyKind::Polynomial { .. }) && ws.q() == 1;
    let mut coefficients = Vec::new();
    let mut phi = vec![vec![Expr::zero(); ws.p()]; ws.q()];
    for (slot, letter) in (0..ws.p()).map(|j| (j, slot_letter(j))) {
        for (alpha, row) in phi.iter_mut().enumerate() {
            let mut terms = Vec::new();
            for (idx, m) in family.basis().iter().enumerate() {
                let label = if scalar_poly { degree_of(m).to_string() } else { idx.to_string() };
                let base = if ws.q() == 1 { format!("{letter}{label}") } else { format!("{letter}{label}_{}", alpha + 1) };
                let name = workspace.fresh_name(&base);
                let function = workspace.add_function(&name, &args)?;
                terms.push(&function * m);
                coefficients.push(AnsatzCoefficient { name, slot, alpha, monomial: m.clone(), function });
            }
            row[slot] = normalize(&Expr::add(terms))?;
        }
    }
    let nf = NormalFormSystem::new(&workspace, phi)?;
    Ok(AnsatzSystem { family: family.clone(), workspace, coefficients, nf })
}

fn degree_of(m: &Expr) -> usize {
    use crate::expr::Node;
    match m.node() {
        Node::Num(_) => 0,
        Node::Sym(_) => 1,
        Node::Pow(b, n) => degree_of(b) * (*n).max(0) as usize,
        Node::Mul(fs) => fs.iter().map(degree_of).sum(),
        _ => 0,
    }
}

/// The real form of `d u = sum eta_k b_k` with `d = (d_x1 - i d_x2)/2` for complex `eta_k`.
///
/// Each `eta_k` is stored as the pair `eta{k}_re`, `eta{k}_im`, which gives
/// `u_x1 = 2 sum Re(eta_k) b_k` and `u_x2 = -2 sum Im(eta_k) b_k`.
pub fn build_complex_ansatz(family: &AnsatzFamily, ws: &Workspace) -> Result<AnsatzSystem> {
    if ws.p() != 2 || ws.q() != 1 {
        return Err(Error::InvalidArgument("the complex ansatz needs two independent and one dependent variable".into()));
    }
    let mut workspace = ws.clone();
    let args = ws.independent().to_vec();
    let mut coefficients = Vec::new();
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for (k, m) in family.basis().iter().enumerate() {
        for (slot, part) in ["re", "im"].iter().enumerate() {
            let name = workspace.fresh_name(&format!("eta{k}_{part}"));
            let function = workspace.add_function(&name, &args)?;
            if slot == 0 { &mut re } else { &mut im }.push(&function * m);
            coefficients.push(AnsatzCoefficient { name, slot, alpha: 0, monomial: m.clone(), function });
        }
    }
    let phi1 = normalize(&(Expr::int(2) * Expr::add(re)))?;
    let phi2 = normalize(&(Expr::int(-2) * Expr::add(im)))?;
    let nf = NormalFormSystem::new(&workspace, vec![vec![phi1, phi2]])?;
    Ok(AnsatzSystem { family: family.clone(), workspace, coefficients, nf })
}

/// Where a determining equation came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Origin {
    /// Compatibility of slots `j < k` for dependent `alpha`.
    Compatibility { alpha: usize, j: usize, k: usize },
    /// Equation `mu`, restricted along ordering variant `variant` (0 is the canonical one).
    Pde { mu: usize, variant: usize },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Compatibility { alpha, j, k } => write!(f, "compatibility (u{}, x{}, x{})", alpha + 1, j + 1, k + 1),
            Origin::Pde { mu, variant } => write!(f, "equation {} (variant {variant})", mu + 1),
        }
    }
}

/// The coefficient of one basis function in a collected residual, to be set to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminingEquation {
    pub origin: Origin,
    pub monomial: Expr,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub compatibility_eqs: Vec<DeterminingEquation>,
    pub pde_eqs: Vec<DeterminingEquation>,
    /// Each `Delta^mu` on the section, canonical ordering.
    pub restricted: Vec<Expr>,
}

impl DeterminingSystem {
    pub fn equations(&self) -> impl Iterator<Item = &DeterminingEquation> {
        self.pde_eqs.iter().chain(&self.compatibility_eqs)
    }

    /// `restricted[mu] - sum coefficient * monomial` over the canonical equations of `mu`.
    pub fn reassembly_residual(&self, mu: usize) -> Result<Expr> {
        let parts: Vec<Expr> = self
            .pde_eqs
            .iter()
            .filter(|e| e.origin == Origin::Pde { mu, variant: 0 })
            .map(|e| &e.expr * &e.monomial)
            .collect();
        normalize(&(&self.restricted[mu] - Expr::add(parts)))
    }
}

/// Restrictions of `delta` to the section for each combination of differentiation orders.
fn restricted_variants(delta: &Expr, nf: &NormalFormSystem, ws: &Workspace) -> Result<Vec<Expr>> {
    let canonical = restrict_to_section(delta, nf, ws)?;
    let jets: BTreeSet<Symbol> = delta.free_symbols().into_iter().filter(Symbol::is_jet).collect();
    let mut choices: Vec<Bindings> = vec![Bindings::new()];
    for s in jets {
        let (alpha, k) = s.jet_data(ws.p()).expect("jet symbol");
        let values = restriction_variants(alpha, &k, nf, ws)?;
        let mut next = Vec::new();
        'outer: for b in &choices {
            for v in &values {
                if next.len() == VARIANT_CAP {
                    break 'outer;
                }
                let mut b = b.clone();
                b.insert(s.clone(), v.clone());
                next.push(b);
            }
        }
        choices = next;
    }
    let mut out = vec![canonical];
    for b in choices {
        let v = substitute(delta, &b)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

fn collected(e: &Expr, family: &AnsatzFamily, origin: Origin, context: &str) -> Result<Vec<DeterminingEquation>> {
    let parts = collect(e, family).map_err(|err| match err {
        Error::NotInFamily(m) => Error::NotInFamily(format!("{context}: {m} (residual {e})")),
        other => other,
    })?;
    let position = |m: &Expr| family.basis().iter().position(|b| b == m).unwrap_or(usize::MAX);
    let mut eqs: Vec<DeterminingEquation> = parts
        .into_iter()
        .map(|(monomial, expr)| DeterminingEquation { origin: origin.clone(), monomial, expr })
        .collect();
    eqs.sort_by(|a, b| (position(&a.monomial), &a.monomial).cmp(&(position(&b.monomial), &b.monomial)));
    Ok(eqs)
}

pub fn determining_system(pde: &PdeSystem, ansatz: &AnsatzSystem) -> Result<DeterminingSystem> {
    determining_system_with(pde, ansatz, Exec::default())
}

pub fn determining_system_with(pde: &PdeSystem, ansatz: &AnsatzSystem, exec: Exec) -> Result<DeterminingSystem> {
    let ws = &ansatz.workspace;
    let family = &ansatz.family;
    let mut compatibility_eqs = Vec::new();
    for r in compatibility_residuals_with(&ansatz.nf, ws, exec)? {
        let origin = Origin::Compatibility { alpha: r.alpha, j: r.j, k: r.k };
        compatibility_eqs.extend(collected(&r.residual, family, origin, "compatibility residual")?);
    }
    let per_mu = exec.try_map(&pde.deltas().iter().enumerate().collect::<Vec<_>>(), |&(mu, delta)| {
        let variants = restricted_variants(delta, &ansatz.nf, ws)?;
        let mut eqs: Vec<DeterminingEquation> = Vec::new();
        let mut seen: BTreeSet<Expr> = BTreeSet::new();
        for (variant, v) in variants.iter().enumerate() {
            let context = format!("equation {} on the section", mu + 1);
            for eq in collected(v, family, Origin::Pde { mu, variant }, &context)? {
                if seen.insert(monic(&eq.expr)?) {
                    eqs.push(eq);
                }
            }
        }
        Ok((variants[0].clone(), eqs))
    })?;
    let mut restricted = Vec::new();
    let mut pde_eqs = Vec::new();
    for (r, eqs) in per_mu {
        restricted.push(r);
        pde_eqs.extend(eqs);
    }
    Ok(DeterminingSystem { compatibility_eqs, pde_eqs, restricted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn wave() -> (Workspace, PdeSystem, AnsatzSystem) {
        let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        for c in ["c0", "c1", "c2", "c3"] {
            ws.add_parameter(c).unwrap();
        }
        let pde = PdeSystem::parse(&ws, &["u_{x1,x2} = c0 + c1*u + c2*u^2 + c3*u^3"]).unwrap();
        let fam = AnsatzFamily::new(FamilyKind::Polynomial { degree: 2 }, &[ws.u(0).clone()]).unwrap();
        let ans = build_ansatz(&fam, &ws).unwrap();
        (ws, pde, ans)
    }

    #[test]
    fn ansatz_names() {
        let (_, _, ans) = wave();
        let names: Vec<&str> = ans.coefficients().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["a2", "a1", "a0", "b2", "b1", "b0"]);
        let ws = ans.workspace();
        assert_eq!(ans.normal_form().rhs(0, 0), &parse("a2(x1,x2)*u^2 + a1(x1,x2)*u + a0(x1,x2)", ws).unwrap());

        let ws0 = Workspace::new(&["x1", "x2"], &["u", "v"], 2).unwrap();
        let fam = AnsatzFamily::new(FamilyKind::Polynomial { degree: 0 }, ws0.dependent()).unwrap();
        assert_eq!(build_ansatz(&fam, &ws0).unwrap().coefficients().len(), 4);
    }

    #[test]
    fn wave_determining_system() {
        let (_, pde, ans) = wave();
        let det = determining_system(&pde, &ans).unwrap();
        let ws = ans.workspace();
        let p = |s: &str| monic(&parse(s, ws).unwrap()).unwrap();
        let got: BTreeSet<Expr> = det.pde_eqs.iter().map(|e| monic(&e.expr).unwrap()).collect();
        let f = |s: &str| s.replace("a2", "a2(x1,x2)").replace("a1", "a1(x1,x2)").replace("a0", "a0(x1,x2)")
            .replace("b2", "b2(x1,x2)").replace("b1", "b1(x1,x2)").replace("b0", "b0(x1,x2)");
        let want: BTreeSet<Expr> = [
            "2*a2*b2 - c3",
            "2*b2*a1 + b1*a2 + diff(b2,x1) - c2",
            "2*b2*a0 + b1*a1 + diff(b1,x1) - c1",
            "a0*b1 + diff(b0,x1) - c0",
            "2*a2*b1 + a1*b2 + diff(a2,x2) - c2",
            "2*a2*b0 + a1*b1 + diff(a1,x2) - c1",
            "a1*b0 + diff(a0,x2) - c0",
        ]
        .iter()
        .map(|s| p(&f(s)))
        .collect();
        assert_eq!(got, want);
        assert_eq!(det.compatibility_eqs.len(), 3);
        assert!(det.reassembly_residual(0).unwrap().is_zero_literal());
    }

    #[test]
    fn tautological_constraint_has_no_pde_equations() {
        let (_, _, ans) = wave();
        let ws = ans.workspace();
        let pde = PdeSystem::parse(ws, &["u_{x1} = a2(x1,x2)*u^2 + a1(x1,x2)*u + a0(x1,x2)"]).unwrap();
        assert!(determining_system(&pde, &ans).unwrap().pde_eqs.is_empty());
    }

    #[test]
    fn terms_outside_the_family_are_reported() {
        let (_, _, ans) = wave();
        let pde = PdeSystem::parse(ans.workspace(), &["u_{x1,x2} = exp(u)"]).unwrap();
        assert!(matches!(determining_system(&pde, &ans), Err(Error::NotInFamily(_))));
    }
}
