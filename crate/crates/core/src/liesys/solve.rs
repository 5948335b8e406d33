//! Integration of scalar PDE Lie systems whose algebra becomes affine in a new variable.

use std::fmt;

use crate::condsym::{verify_solution, Equations, SolutionCheck};
use crate::error::{Error, Result};
use crate::expr::{diff, is_zero, normalize, substitute, Bindings, Expr, Symbol, Verdict, Workspace, DEFAULT_SEED};

use super::integrate::potential;
use super::PdeLieSystem;

/// A registered change of variable `w = T(u)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    Identity,
    /// `w = exp(u/2)`
    ExpHalf,
    /// `w = exp(-u/2)`
    ExpMinusHalf,
    /// `w = exp((u - g)/2)`
    GaugedExpHalf(Expr),
    /// `w = exp(-(u - g)/2)`
    GaugedExpMinusHalf(Expr),
}

impl Transform {
    fn shift(&self) -> Expr {
        match self {
            Transform::GaugedExpHalf(g) | Transform::GaugedExpMinusHalf(g) => g.clone(),
            _ => Expr::zero(),
        }
    }

    fn sign(&self) -> i64 {
        match self {
            Transform::ExpMinusHalf | Transform::GaugedExpMinusHalf(_) => -1,
            _ => 1,
        }
    }

    /// `T(u)`
    pub fn forward(&self, u: &Expr) -> Expr {
        match self {
            Transform::Identity => u.clone(),
            _ => Expr::exp(Expr::frac(self.sign(), 2) * (u - self.shift())),
        }
    }

    /// `T^{-1}(w)`
    pub fn inverse(&self, w: &Expr) -> Expr {
        match self {
            Transform::Identity => w.clone(),
            _ => self.shift() + Expr::int(2 * self.sign()) * Expr::log(w.clone()),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Identity => write!(f, "w = u"),
            Transform::ExpHalf => write!(f, "w = exp(u/2)"),
            Transform::ExpMinusHalf => write!(f, "w = exp(-u/2)"),
            Transform::GaugedExpHalf(g) => write!(f, "w = exp((u - ({g}))/2)"),
            Transform::GaugedExpMinusHalf(g) => write!(f, "w = exp(-(u - ({g}))/2)"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Particular solution used by the gauged catalog entries.
    pub gauge: Option<Expr>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct LieSolution {
    pub transform: Transform,
    /// Homogeneous factor `w_H`.
    pub w_h: Expr,
    /// Particular factor `w_N`, so that `w = w_H (w_N + lambda)`.
    pub w_n: Expr,
    pub w: Expr,
    pub u: Expr,
    pub lambda: Symbol,
    /// Input workspace plus the parameter `lambda`.
    pub workspace: Workspace,
    /// False when some antiderivative stayed formal.
    pub elementary: bool,
    pub checks: Vec<SolutionCheck>,
    pub verdict: Verdict,
}

/// `w_{x_j} = alpha_j w + beta_j` after the change of variable, if it is affine.
fn affine_form(sys: &PdeLieSystem, t: &Transform, ws: &Workspace) -> Result<Option<(Vec<Expr>, Vec<Expr>)>> {
    let u = ws.u(0);
    let ue = ws.u_expr(0);
    let tu = normalize(&t.forward(&ue))?;
    let dt = diff(&tu, u)?;
    let at_zero: Bindings = [(u.clone(), Expr::zero())].into();
    let (mut alpha, mut beta) = (vec![], vec![]);
    for j in 0..ws.p() {
        let r = normalize(&(&dt * sys.nf.rhs(0, j) + diff(&tu, ws.x(j))?))?;
        let a = normalize(&(diff(&r, u)? / &dt))?;
        if !is_zero(&diff(&a, u)?).is_zero() {
            return Ok(None);
        }
        let b = normalize(&(&r - &a * &tu))?;
        if !is_zero(&diff(&b, u)?).is_zero() {
            return Ok(None);
        }
        alpha.push(normalize(&substitute(&a, &at_zero)?)?);
        beta.push(normalize(&substitute(&b, &at_zero)?)?);
    }
    Ok(Some((alpha, beta)))
}

/// Integrates a compatible scalar system `u_{x_j} = phi_j(x, u)` whose algebra is
/// affine after one of the catalog substitutions, as `w = w_H (w_N + lambda)`.
pub fn solve_solvable_q1(sys: &PdeLieSystem, ws: &Workspace, opts: &SolveOptions) -> Result<LieSolution> {
    if ws.q() != 1 {
        return Err(Error::NotSolvableShape(format!("needs one dependent variable, found {}", ws.q())));
    }
    // a supplied gauge is tried first
    let mut catalog = match &opts.gauge {
        Some(g) => vec![Transform::GaugedExpHalf(g.clone()), Transform::GaugedExpMinusHalf(g.clone())],
        None => vec![],
    };
    catalog.extend([Transform::Identity, Transform::ExpHalf, Transform::ExpMinusHalf]);
    let mut found = None;
    for t in catalog {
        if let Some(ab) = affine_form(sys, &t, ws)? {
            found = Some((t, ab));
            break;
        }
    }
    let Some((transform, (alpha, beta))) = found else {
        return Err(Error::NotSolvableShape("no catalog change of variable makes the algebra affine".into()));
    };
    let xs = ws.independent();
    let log_h = potential(&alpha, xs)?;
    let w_h = normalize(&Expr::exp(log_h.value.clone()))?;
    let inhom: Vec<Expr> = beta.iter().map(|b| normalize(&(b / &w_h))).collect::<Result<_>>()?;
    let n = potential(&inhom, xs)?;
    let w_n = n.value;

    let mut workspace = ws.clone();
    let lambda = workspace.add_parameter(&ws.fresh_name("lambda"))?;
    let w = normalize(&(&w_h * (&w_n + Expr::sym(&lambda))))?;
    let u = normalize(&transform.inverse(&w))?;
    let elementary = log_h.elementary && n.elementary;

    let candidate: Bindings = [(ws.u(0).clone(), u.clone())].into();
    let seed = opts.seed.unwrap_or(DEFAULT_SEED);
    let checks = verify_solution(&[Equations::NormalForm(&sys.nf)], &candidate, &workspace, seed)?;
    let verdict = Verdict::all(checks.iter().map(|c| c.verdict));
    Ok(LieSolution { transform, w_h, w_n, w, u, lambda, workspace, elementary, checks, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condsym::NormalFormSystem;
    use crate::expr::parse;
    use crate::liesys::{pde_lie_system, DEFAULT_CAP};

    fn solve(ws: &Workspace, rows: &[&[&str]], gauge: Option<&str>) -> LieSolution {
        let nf = NormalFormSystem::parse(ws, rows).unwrap();
        let sys = pde_lie_system(&nf, ws, DEFAULT_CAP).unwrap();
        let opts = SolveOptions { gauge: gauge.map(|g| parse(g, ws).unwrap()), seed: None };
        solve_solvable_q1(&sys, ws, &opts).unwrap()
    }

    #[test]
    fn homogeneous() {
        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let s = solve(&ws, &[&["2*u", "-3*u"]], None);
        assert_eq!(s.transform, Transform::Identity);
        assert!(s.elementary && s.verdict.is_zero(), "{:?}", s.checks);
        let want = parse("lambda*exp(2*x1 - 3*x2)", &s.workspace).unwrap();
        assert!(is_zero(&(&s.u - want)).is_zero(), "{}", s.u);
    }

    #[test]
    fn liouville_reduction() {
        let ws = Workspace::new(&["t", "x1", "x2"], &["u"], 2).unwrap();
        // u_p = t + log(2 x1) + log(2 x2), w = exp(t) + x1^2 + x2^2
        let rows: &[&[&str]] = &[&[
            "1 - 2*exp(t)*exp((u - t - log(2*x1) - log(2*x2))/2)",
            "1/x1 - 4*x1*exp((u - t - log(2*x1) - log(2*x2))/2)",
            "1/x2 - 4*x2*exp((u - t - log(2*x1) - log(2*x2))/2)",
        ]];
        let s = solve(&ws, rows, Some("t + log(2*x1) + log(2*x2)"));
        assert!(s.elementary && s.verdict.is_zero(), "{:?}", s.checks);
        // exp((u_p - u)/2) = w + c*lambda for a constant c
        let e = normalize(&parse("exp((t + log(2*x1) + log(2*x2))/2)", &s.workspace).unwrap()).unwrap();
        let e = normalize(&(e * Expr::exp(-s.u.clone() / Expr::int(2)))).unwrap();
        let c = diff(&e, &s.lambda).unwrap();
        assert!(c.is_constant() && !c.is_zero_literal(), "{c}");
        let w = parse("exp(t) + x1^2 + x2^2", &s.workspace).unwrap();
        assert!(is_zero(&(e - c * Expr::sym(&s.lambda) - w)).is_zero(), "{}", s.u);
    }

    #[test]
    fn exponential_gauss_codazzi_instance() {
        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let s = solve(&ws, &[&["exp(x1)*cos(x2)*exp(-u/2)", "-exp(x1)*sin(x2)*exp(-u/2)"]], None);
        assert_eq!(s.transform, Transform::ExpHalf);
        assert!(s.elementary && s.verdict.is_zero(), "{:?}", s.checks);
        let want = parse("exp(x1)*cos(x2)/2 + lambda", &s.workspace).unwrap();
        assert!(is_zero(&(&s.w - want)).is_zero(), "{}", s.w);
    }

    #[test]
    fn unsolvable() {
        let ws = Workspace::new(&["x"], &["u"], 2).unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["u^2 + x"]]).unwrap();
        let sys = pde_lie_system(&nf, &ws, DEFAULT_CAP).unwrap();
        let err = solve_solvable_q1(&sys, &ws, &SolveOptions::default());
        assert!(matches!(err, Err(Error::NotSolvableShape(_))));
    }
}
