//! PDE Lie systems: Vessiot-Guldberg algebras, Riccati shape and the solvable scalar case.

mod integrate;
mod solve;

use std::collections::BTreeMap;

use num_traits::{One, Zero};

pub use integrate::{integrate, potential, Integrated};
pub use solve::{solve_solvable_q1, LieSolution, SolveOptions, Transform};

use crate::condsym::{compatibility_residuals, NormalFormSystem};
use crate::error::{Error, Result};
use crate::expr::canon::Mono;
use crate::expr::{
    collect, is_zero, normalize, AnsatzFamily, Expr, FamilyKind, Frac, Poly, Rational, Symbol, Verdict, Workspace,
};
use crate::geometry::lie_bracket;
use crate::jet::VectorField;
use crate::linalg::{express_in, independent_of};
use crate::par::Exec;

/// Default bound on the dimension explored by [`vg_closure`].
pub const DEFAULT_CAP: usize = 10;

/// A finite-dimensional Lie algebra of fields on `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct VGAlgebra {
    pub generators: Vec<VectorField>,
    /// `c[b][d][g]` with `[X_b, X_d] = sum_g c[b][d][g] X_g`.
    pub structure_constants: Vec<Vec<Vec<Rational>>>,
    /// Bracket rounds run before the span stopped growing.
    pub closure_depth: usize,
}

impl VGAlgebra {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|b| (0..n).all(|d| (0..n).all(|g| self.structure_constants[b][d][g] == -&self.structure_constants[d][b][g])))
    }

    /// Jacobi identity on the structure constants, checked exactly.
    pub fn satisfies_jacobi(&self) -> bool {
        let n = self.dim();
        let c = &self.structure_constants;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    for g in 0..n {
                        let mut s = Rational::zero();
                        for e in 0..n {
                            s += &c[a][b][e] * &c[e][d][g] + &c[b][d][e] * &c[e][a][g] + &c[d][a][e] * &c[e][b][g];
                        }
                        if !s.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// `u_{x_j} = sum_b coefficients[j][b] X_b` over a Vessiot-Guldberg algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeLieSystem {
    pub nf: NormalFormSystem,
    pub vg: VGAlgebra,
    pub coefficients: Vec<Vec<Expr>>,
}

impl PdeLieSystem {
    /// `sum_b coefficients[j][b] X_b - Z_j` per slot; all zero for a valid decomposition.
    pub fn decomposition_residuals(&self, ws: &Workspace) -> Result<Vec<Expr>> {
        let mut out = Vec::new();
        for (j, row) in self.coefficients.iter().enumerate() {
            for alpha in 0..ws.q() {
                let terms: Vec<Expr> = row.iter().zip(&self.vg.generators).map(|(b, x)| b * &x.phi()[alpha]).collect();
                out.push(normalize(&(Expr::add(terms) - self.nf.rhs(alpha, j)))?);
            }
        }
        Ok(out)
    }
}

/// Splits `e` into `sum x_part * u_part` with each part free of the other variables.
fn separate(e: &Expr, us: &[Symbol]) -> Result<Vec<(Expr, Expr)>> {
    let on_u = |x: &Expr| us.iter().any(|u| x.contains_symbol(u));
    let on_x = |x: &Expr| x.free_symbols().iter().any(Symbol::is_independent);
    let mixed = |x: &Expr| on_u(x) && on_x(x);
    let f = Frac::from_expr(e)?;
    let (mut x_den, mut u_den) = (Expr::one(), Expr::one());
    for (s, k) in f.den() {
        let s = s.to_expr();
        if mixed(&s) {
            return Err(Error::NotSeparable(format!("denominator factor {s}")));
        }
        let p = s.pow(*k as i64);
        if on_u(&s) {
            u_den = u_den * p
        } else {
            x_den = x_den * p
        }
    }
    let mut out = Vec::new();
    for (m, c) in f.num().terms() {
        let (mut xa, mut ua) = (vec![], vec![]);
        for (a, k) in m.atoms() {
            if mixed(a) {
                return Err(Error::NotSeparable(format!("factor {a}")));
            }
            if on_u(a) {
                ua.push((a.clone(), *k))
            } else {
                xa.push((a.clone(), *k))
            }
        }
        let (mut xe, mut ue) = (vec![], vec![]);
        if !m.exps().is_empty() {
            let arg = m.exp_arg();
            let scale = arg.den_only();
            for (am, ac) in arg.num().terms() {
                let piece = Frac::from_poly(Poly::term(am.clone(), ac.clone())).mul(&scale).to_expr();
                if mixed(&piece) {
                    return Err(Error::NotSeparable(format!("exponential of {}", arg.to_expr())));
                }
                if on_u(&piece) {
                    ue.push(piece)
                } else {
                    xe.push(piece)
                }
            }
        }
        let xp = Mono::from_parts(xa, vec![]).to_expr(c) * Expr::exp(Expr::add(xe)) / &x_den;
        let up = Mono::from_parts(ua, vec![]).to_expr(&Rational::one()) * Expr::exp(Expr::add(ue)) / &u_den;
        out.push((normalize(&xp)?, normalize(&up)?));
    }
    Ok(out)
}

/// Coordinates of a `u`-only field in the monomial basis: `(alpha, monomial) -> coefficient`.
fn field_vector(x: &VectorField, us: &[Symbol]) -> Result<BTreeMap<(usize, Expr), Rational>> {
    let mut out = BTreeMap::new();
    for (alpha, c) in x.phi().iter().enumerate() {
        for (m, coef) in expand_u(c, us)? {
            *out.entry((alpha, m)).or_insert_with(Rational::zero) += coef;
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Expands a function of `u` over monomials with rational coefficients, linearizing
/// trigonometric products when the expression is purely trigonometric.
fn expand_u(e: &Expr, us: &[Symbol]) -> Result<Vec<(Expr, Rational)>> {
    let trig = AnsatzFamily::new(FamilyKind::Trigonometric { nmax: 0 }, us)?;
    if let Ok(parts) = collect(e, &trig) {
        if let Some(v) = parts.iter().map(|(m, c)| c.as_num().map(|q| (m.clone(), q.clone()))).collect::<Option<Vec<_>>>() {
            return Ok(v);
        }
    }
    let f = Frac::from_expr(e)?;
    let den = f.den_only();
    f.num()
        .terms()
        .map(|(m, c)| {
            let key = Frac::from_poly(Poly::term(m.clone(), Rational::one())).mul(&den).to_expr();
            if key.free_symbols().iter().any(|s| !us.contains(s)) {
                return Err(Error::NotSeparable(format!("{key} is not a function of the dependent variables")));
            }
            Ok((key, c.clone()))
        })
        .collect()
}

struct Span {
    keys: Vec<(usize, Expr)>,
    rows: Vec<Vec<Rational>>,
}

impl Span {
    fn row(&mut self, v: &BTreeMap<(usize, Expr), Rational>) -> Vec<Rational> {
        for k in v.keys() {
            if !self.keys.contains(k) {
                self.keys.push(k.clone());
                for r in &mut self.rows {
                    r.push(Rational::zero());
                }
            }
        }
        self.keys.iter().map(|k| v.get(k).cloned().unwrap_or_else(Rational::zero)).collect()
    }
}

/// Builds the PDE Lie system structure of a normal form: separates each right-hand
/// side into `x`-coefficients times `u`-fields and closes the fields under brackets.
pub fn pde_lie_system(nf: &NormalFormSystem, ws: &Workspace, cap: usize) -> Result<PdeLieSystem> {
    pde_lie_system_with(nf, ws, cap, Exec::default())
}

pub fn pde_lie_system_with(nf: &NormalFormSystem, ws: &Workspace, cap: usize, exec: Exec) -> Result<PdeLieSystem> {
    if let Some(r) = compatibility_residuals(nf, ws)?.into_iter().find(|r| is_zero(&r.residual) == Verdict::NonZero) {
        return Err(Error::PreconditionFailed(format!("compatibility: residual {} is nonzero", r.residual)));
    }
    let us = ws.dependent();
    // terms[j] = [(x-coefficient, field)]
    // Terms sharing an x-coefficient (up to a rational factor) form one field.
    let mut terms: Vec<Vec<(Expr, VectorField)>> = Vec::new();
    for j in 0..ws.p() {
        let mut groups: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        for alpha in 0..ws.q() {
            for (xp, up) in separate(nf.rhs(alpha, j), us)? {
                let lc = Frac::from_expr(&xp)?.lc().cloned().unwrap_or_else(Rational::one);
                let key = normalize(&(xp / Expr::rational(lc.clone())))?;
                let phi = groups.entry(key).or_insert_with(|| vec![Expr::zero(); ws.q()]);
                phi[alpha] = &phi[alpha] + Expr::rational(lc) * up;
            }
        }
        let mut row = Vec::new();
        for (xp, phi) in groups {
            let phi = phi.iter().map(normalize).collect::<Result<Vec<_>>>()?;
            row.push((xp, VectorField::new(vec![Expr::zero(); ws.p()], phi)?));
        }
        terms.push(row);
    }
    let mut span = Span { keys: vec![], rows: vec![] };
    let mut generators: Vec<VectorField> = Vec::new();
    let admit = |x: &VectorField, span: &mut Span, generators: &mut Vec<VectorField>| -> Result<bool> {
        let v = field_vector(x, us)?;
        let row = span.row(&v);
        if independent_of(&span.rows, &row) {
            span.rows.push(row);
            generators.push(x.clone());
            if generators.len() > cap {
                return Err(Error::CapExceeded(cap));
            }
            return Ok(true);
        }
        Ok(false)
    };
    for (_, x) in terms.iter().flatten() {
        admit(x, &mut span, &mut generators)?;
    }
    let mut depth = 0;
    let mut done = 0;
    loop {
        let n = generators.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(_, b)| b >= done).collect();
        if pairs.is_empty() {
            break;
        }
        depth += 1;
        let brackets = exec.try_map(&pairs, |&(a, b)| lie_bracket(&generators[a], &generators[b], ws))?;
        done = n;
        let mut grew = false;
        for br in &brackets {
            if !br.is_zero_literal() {
                grew |= admit(br, &mut span, &mut generators)?;
            }
        }
        if !grew {
            break;
        }
    }
    let coords = |x: &VectorField, span: &mut Span| -> Result<Vec<Rational>> {
        let v = field_vector(x, us)?;
        let row = span.row(&v);
        express_in(&span.rows, &row).ok_or_else(|| Error::NotSeparable(format!("{} left the closed span", x.display(ws))))
    };
    let n = generators.len();
    let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let br = lie_bracket(&generators[a], &generators[b], ws)?;
            let k = coords(&br, &mut span)?;
            for g in 0..n {
                c[b][a][g] = -&k[g];
                c[a][b][g] = k[g].clone();
            }
        }
    }
    let mut coefficients = Vec::new();
    for row in &terms {
        let mut b = vec![Expr::zero(); n];
        for (xp, x) in row {
            for (g, k) in coords(x, &mut span)?.iter().enumerate() {
                if !k.is_zero() {
                    b[g] = &b[g] + Expr::rational(k.clone()) * xp;
                }
            }
        }
        coefficients.push(b.iter().map(normalize).collect::<Result<_>>()?);
    }
    let vg = VGAlgebra { generators, structure_constants: c, closure_depth: depth };
    Ok(PdeLieSystem { nf: nf.clone(), vg, coefficients })
}

/// The Vessiot-Guldberg algebra of a normal form, or [`Error::CapExceeded`].
pub fn vg_closure(nf: &NormalFormSystem, ws: &Workspace, cap: usize) -> Result<VGAlgebra> {
    Ok(pde_lie_system(nf, ws, cap)?.vg)
}

/// Blocks of `u_{x_j} = A_j + B_j u + C_j u + u (D_j u)` with `u` a column vector.
///
/// The linear terms `B_j u` and `C_j u` cannot be told apart from the right-hand
/// side, so the whole linear part is stored in `B_j` and every `C_j` is zero.
/// The quadratic coupling `u (D_j u)` only needs a row vector, kept in `d[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiData {
    pub a: Vec<Vec<Expr>>,
    pub b: Vec<Vec<Vec<Expr>>>,
    pub c: Vec<Vec<Vec<Expr>>>,
    pub d: Vec<Vec<Expr>>,
}

impl RiccatiData {
    /// `A_j + B_j u + C_j u + u (D_j u)` for component `alpha`.
    pub fn rhs(&self, alpha: usize, j: usize, ws: &Workspace) -> Expr {
        let u: Vec<Expr> = (0..ws.q()).map(|b| ws.u_expr(b)).collect();
        let mut terms = vec![self.a[j][alpha].clone()];
        for (beta, ub) in u.iter().enumerate() {
            terms.push((&self.b[j][alpha][beta] + &self.c[j][alpha][beta]) * ub);
        }
        let du = Expr::add(self.d[j].iter().zip(&u).map(|(d, ub)| d * ub).collect());
        terms.push(&u[alpha] * du);
        Expr::add(terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RiccatiShape {
    Riccati(RiccatiData),
    /// The first term that breaks the shape.
    NotRiccati(String),
}

impl RiccatiShape {
    pub fn data(&self) -> Option<&RiccatiData> {
        match self {
            RiccatiShape::Riccati(d) => Some(d),
            RiccatiShape::NotRiccati(_) => None,
        }
    }
}

/// Exponents of the dependent variables in a basis monomial of the polynomial family.
fn degrees(m: &Expr, us: &[Symbol]) -> Result<Vec<u32>> {
    let f = Frac::from_expr(m)?;
    let (mono, _) = f.num().leading().ok_or_else(|| Error::InvalidArgument("zero monomial".into()))?;
    Ok(us
        .iter()
        .map(|u| mono.atoms().iter().find(|(a, _)| a.as_sym() == Some(u)).map_or(0, |(_, k)| *k as u32))
        .collect())
}

pub fn recognize_riccati(sys: &PdeLieSystem, ws: &Workspace) -> Result<RiccatiShape> {
    let us = ws.dependent();
    let (p, q) = (ws.p(), ws.q());
    let family = AnsatzFamily::new(FamilyKind::Polynomial { degree: 2 }, us)?;
    let (mut a, mut b, mut d) = (vec![], vec![], vec![]);
    for j in 0..p {
        let mut aj = vec![Expr::zero(); q];
        let mut bj = vec![vec![Expr::zero(); q]; q];
        let mut quad: Vec<BTreeMap<usize, Expr>> = vec![BTreeMap::new(); q];
        for (alpha, qa) in quad.iter_mut().enumerate() {
            let parts = match collect(sys.nf.rhs(alpha, j), &family) {
                Ok(p) => p,
                Err(Error::NotInFamily(m)) => return Ok(RiccatiShape::NotRiccati(m)),
                Err(e) => return Err(e),
            };
            for (m, coef) in parts {
                let ex = degrees(&m, us)?;
                match ex.iter().sum::<u32>() {
                    0 => aj[alpha] = coef,
                    1 => bj[alpha][ex.iter().position(|&e| e == 1).unwrap()] = coef,
                    _ if ex[alpha] == 0 => {
                        return Ok(RiccatiShape::NotRiccati(format!("{coef}*{m} in component {} lacks u{}", alpha + 1, alpha + 1)));
                    }
                    _ => {
                        let mut other = ex;
                        other[alpha] -= 1;
                        qa.insert(other.iter().position(|&e| e == 1).unwrap(), coef);
                    }
                }
            }
        }
        // Every component carries the same quadratic row: u^a (sum_b D_b u^b).
        let mut dj = vec![Expr::zero(); q];
        for qa in &quad {
            for (beta, c) in qa {
                dj[*beta] = c.clone();
            }
        }
        for (alpha, qa) in quad.iter().enumerate() {
            for (beta, want) in dj.iter().enumerate() {
                let have = qa.get(&beta).cloned().unwrap_or_else(Expr::zero);
                if !is_zero(&(&have - want)).is_zero() {
                    return Ok(RiccatiShape::NotRiccati(format!(
                        "component {} has {have} where the coupling needs {want} for u{}*u{}",
                        alpha + 1,
                        alpha + 1,
                        beta + 1
                    )));
                }
            }
        }
        a.push(aj);
        b.push(bj);
        d.push(dj);
    }
    let c = vec![vec![vec![Expr::zero(); q]; q]; p];
    Ok(RiccatiShape::Riccati(RiccatiData { a, b, c, d }))
}
