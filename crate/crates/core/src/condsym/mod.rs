//! Characteristic systems, normal forms, determining systems and conditional-symmetry checks.

mod ansatz;
mod verify;

use std::collections::BTreeMap;

pub use ansatz::{
    build_ansatz, build_complex_ansatz, determining_system, determining_system_with, AnsatzCoefficient, AnsatzSystem,
    DeterminingEquation, DeterminingSystem, Origin,
};
pub use verify::{
    verify_conditional_symmetry, verify_solution, Check, Equations, RouteOutcome, SolutionCheck, SymmetryOptions,
    SymmetryReport, SymmetryVerdict, DIRECT_ROUTE, RECTIFIED_ROUTE,
};

use crate::error::{Error, Result};
use crate::expr::{normalize, parse, Expr, Frac, Workspace};
use crate::geometry::VectorFieldFamily;
use crate::jet::{characteristic, total_derivative_multi, VectorField};
use crate::multiindex::MultiIndex;
use crate::par::Exec;

/// A complete first-order system `u^a_i = phi^a_i(x, u)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormSystem {
    phi: Vec<Vec<Expr>>,
    fields: Vec<VectorField>,
}

impl NormalFormSystem {
    /// `phi[a][i]` is the right-hand side for `u^a_{x_i}`.
    pub fn new(ws: &Workspace, phi: Vec<Vec<Expr>>) -> Result<Self> {
        if phi.len() != ws.q() || phi.iter().any(|row| row.len() != ws.p()) {
            return Err(Error::InvalidArgument(format!("a normal form needs {} rows of {} entries", ws.q(), ws.p())));
        }
        let phi: Vec<Vec<Expr>> =
            phi.iter().map(|row| row.iter().map(normalize).collect::<Result<_>>()).collect::<Result<_>>()?;
        let fields = (0..ws.p())
            .map(|i| {
                let xi = (0..ws.p()).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect();
                VectorField::new(xi, phi.iter().map(|row| row[i].clone()).collect())
            })
            .collect::<Result<_>>()?;
        Ok(NormalFormSystem { phi, fields })
    }

    /// Parses one row of right-hand sides per dependent variable.
    pub fn parse(ws: &Workspace, rows: &[&[&str]]) -> Result<Self> {
        let phi = rows.iter().map(|row| row.iter().map(|s| parse(s, ws)).collect::<Result<_>>()).collect::<Result<_>>()?;
        NormalFormSystem::new(ws, phi)
    }

    pub fn rhs(&self, alpha: usize, i: usize) -> &Expr {
        &self.phi[alpha][i]
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.phi
    }

    /// `Z_j = d/dx^j + sum phi^a_j d/du^a`.
    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub(crate) fn z_apply_frac(&self, i: usize, f: &Expr, ws: &Workspace) -> Result<Frac> {
        self.fields[i].apply_frac(f, ws)
    }

    /// The constraints `u^a_i - phi^a_i`, ordered by `(a, i)`.
    pub fn constraints(&self, ws: &Workspace) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        for (a, row) in self.phi.iter().enumerate() {
            for (i, f) in row.iter().enumerate() {
                out.push(normalize(&(Expr::sym(&ws.d1(a, i)) - f))?);
            }
        }
        Ok(out)
    }

    pub fn family(&self) -> Result<VectorFieldFamily> {
        VectorFieldFamily::new(self.fields.clone())
    }
}

/// `Z_k(phi^a_j) - Z_j(phi^a_k)` for one dependent variable and slots `j < k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityResidual {
    pub alpha: usize,
    pub j: usize,
    pub k: usize,
    pub residual: Expr,
}

pub fn compatibility_residuals(nf: &NormalFormSystem, ws: &Workspace) -> Result<Vec<CompatibilityResidual>> {
    compatibility_residuals_with(nf, ws, Exec::default())
}

pub fn compatibility_residuals_with(nf: &NormalFormSystem, ws: &Workspace, exec: Exec) -> Result<Vec<CompatibilityResidual>> {
    let mut slots = Vec::new();
    for alpha in 0..ws.q() {
        for j in 0..ws.p() {
            for k in j + 1..ws.p() {
                slots.push((alpha, j, k));
            }
        }
    }
    exec.try_map(&slots, |&(alpha, j, k)| {
        let a = nf.z_apply_frac(k, nf.rhs(alpha, j), ws)?;
        let b = nf.z_apply_frac(j, nf.rhs(alpha, k), ws)?;
        Ok(CompatibilityResidual { alpha, j, k, residual: a.sub(&b).to_expr() })
    })
}

/// The equations `Delta^mu = 0` of a PDE system, stored as left-hand sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdeSystem {
    deltas: Vec<Expr>,
}

impl PdeSystem {
    pub fn new(ws: &Workspace, deltas: Vec<Expr>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::InvalidArgument("a PDE system needs at least one equation".into()));
        }
        let deltas = deltas.iter().map(normalize).collect::<Result<Vec<_>>>()?;
        if let Some(d) = deltas.iter().find(|d| d.is_constant()) {
            return Err(Error::InvalidArgument(format!("equation `{d} = 0` is constant")));
        }
        if let Some(d) = deltas.iter().find(|d| d.jet_order() > ws.jet_cap()) {
            return Err(Error::InvalidArgument(format!(
                "equation `{d} = 0` has order {} above the cap {}",
                d.jet_order(),
                ws.jet_cap()
            )));
        }
        Ok(PdeSystem { deltas })
    }

    /// Parses `lhs = rhs` (or a bare left-hand side) per equation.
    pub fn parse(ws: &Workspace, equations: &[&str]) -> Result<Self> {
        let deltas = equations
            .iter()
            .map(|eq| match eq.split_once('=') {
                Some((l, r)) => Ok(parse(l, ws)? - parse(r, ws)?),
                None => parse(eq, ws),
            })
            .collect::<Result<_>>()?;
        PdeSystem::new(ws, deltas)
    }

    pub fn deltas(&self) -> &[Expr] {
        &self.deltas
    }

    /// Highest jet order among the equations.
    pub fn order(&self) -> u32 {
        self.deltas.iter().map(Expr::jet_order).max().unwrap_or(0)
    }
}

/// `D_K Q^a_{Y_j}` for every member `j`, dependent `a` and `|K| <= n - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicSystem {
    pub order: u32,
    pub residuals: BTreeMap<(usize, usize, MultiIndex), Expr>,
}

impl CharacteristicSystem {
    /// True when some residual is a nonzero constant, so the zero set is empty.
    pub fn is_inconsistent(&self) -> bool {
        self.residuals.values().any(|r| r.is_constant() && !r.is_zero_literal())
    }

    pub fn equations(&self) -> impl Iterator<Item = &Expr> {
        self.residuals.values()
    }
}

pub fn characteristic_system(f: &VectorFieldFamily, n: u32, ws: &Workspace) -> Result<CharacteristicSystem> {
    characteristic_system_with(f, n, ws, Exec::default())
}

pub fn characteristic_system_with(f: &VectorFieldFamily, n: u32, ws: &Workspace, exec: Exec) -> Result<CharacteristicSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("the characteristic system needs order at least 1".into()));
    }
    let mut ks = vec![MultiIndex::zero(ws.p())];
    ks.extend(MultiIndex::all_up_to(ws.p(), 1, n - 1));
    let per_member = exec.try_map(f.members(), |y| -> Result<Vec<(usize, MultiIndex, Expr)>> {
        let q = characteristic(y, ws)?;
        let mut out = Vec::new();
        for (a, qa) in q.iter().enumerate() {
            for k in &ks {
                out.push((a, k.clone(), total_derivative_multi(qa, k, ws)?));
            }
        }
        Ok(out)
    })?;
    let mut residuals = BTreeMap::new();
    for (j, rows) in per_member.into_iter().enumerate() {
        for (a, k, r) in rows {
            residuals.insert((j, a, k), r);
        }
    }
    Ok(CharacteristicSystem { order: n, residuals })
}

/// Scales an equation so its leading rational coefficient is one.
pub fn monic(e: &Expr) -> Result<Expr> {
    let f = Frac::from_expr(e)?;
    let Some(lc) = f.num().leading().map(|(_, c)| c.clone()) else { return Ok(Expr::zero()) };
    Ok(f.num().scale(&num_traits::Inv::inv(lc)).to_expr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{is_abelian, Tri};

    #[test]
    fn characteristic_systems() {
        let ws = Workspace::new(&["x", "t"], &["u"], 2).unwrap();
        let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["1"]), (&["0", "1"], &["x"])]).unwrap();
        let cs = characteristic_system(&f, 1, &ws).unwrap();
        let got: Vec<Expr> = cs.equations().cloned().collect();
        let p = |s: &str| parse(s, &ws).unwrap();
        assert_eq!(got, vec![p("1 - u_{x}"), p("x - u_{t}")]);
        assert!(!cs.is_inconsistent());

        let g = VectorFieldFamily::parse(&ws, &[(&["0", "0"], &["1"])]).unwrap();
        assert!(characteristic_system(&g, 1, &ws).unwrap().is_inconsistent());

        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let z = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u^2"]), (&["0", "1"], &["u^2"])]).unwrap();
        let cs = characteristic_system(&z, 2, &ws).unwrap();
        assert_eq!(cs.residuals.len(), 6);
        let d1 = total_derivative_multi(&parse("u^2 - u_{x1}", &ws).unwrap(), &MultiIndex::unit(2, 0), &ws).unwrap();
        assert_eq!(cs.residuals[&(0, 0, MultiIndex::unit(2, 0))], d1);
    }

    #[test]
    fn compatibility() {
        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["u^2", "u^2"]]).unwrap();
        let r = compatibility_residuals(&nf, &ws).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].residual.is_zero_literal());
        assert_eq!(is_abelian(&nf.family().unwrap(), &ws).unwrap(), Tri::Yes);

        let ws = Workspace::new(&["x", "t"], &["u"], 2).unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["1", "x"]]).unwrap();
        let r = compatibility_residuals(&nf, &ws).unwrap();
        assert_eq!(r[0].residual, Expr::int(-1));
        assert_eq!(is_abelian(&nf.family().unwrap(), &ws).unwrap(), Tri::No);

        let ws = Workspace::new(&["x"], &["u"], 2).unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["u^3"]]).unwrap();
        assert!(compatibility_residuals(&nf, &ws).unwrap().is_empty());
        assert_eq!(nf.constraints(&ws).unwrap(), vec![parse("u_{x} - u^3", &ws).unwrap()]);
    }

    #[test]
    fn pde_parsing() {
        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let pde = PdeSystem::parse(&ws, &["u_{x1,x2} = 2*u^3"]).unwrap();
        assert_eq!(pde.deltas()[0], parse("u_{x1,x2} - 2*u^3", &ws).unwrap());
        assert_eq!(pde.order(), 2);
        assert!(PdeSystem::parse(&ws, &["u = u + 1"]).is_err());
        assert!(PdeSystem::parse(&ws, &[]).is_err());
        assert_eq!(monic(&parse("4*u - 2*x1", &ws).unwrap()).unwrap(), monic(&parse("x1 - 2*u", &ws).unwrap()).unwrap());
    }
}
