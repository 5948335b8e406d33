use std::collections::BTreeSet;
use std::fmt;

use super::{characteristic_system, NormalFormSystem, PdeSystem};
use crate::error::{Error, Result};
use crate::expr::{diff, is_zero_with, normalize, substitute, Bindings, Expr, Symbol, Verdict, Workspace, ZeroTest, DEFAULT_SEED};
use crate::geometry::{rectify_with_seed, VectorFieldFamily};
use crate::jet::{prolong, restrict_to_section};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryVerdict {
    Yes,
    No,
    Unknown,
    /// The constraints and the equations have no common point.
    Unsatisfiable,
}

impl fmt::Display for SymmetryVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryVerdict::Yes => "Yes",
            SymmetryVerdict::No => "No",
            SymmetryVerdict::Unknown => "Unknown",
            SymmetryVerdict::Unsatisfiable => "Unsatisfiable",
        })
    }
}

fn combined(verdicts: impl IntoIterator<Item = Verdict>) -> SymmetryVerdict {
    match Verdict::all(verdicts) {
        Verdict::Zero { .. } => SymmetryVerdict::Yes,
        Verdict::NonZero => SymmetryVerdict::No,
        Verdict::Unknown => SymmetryVerdict::Unknown,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetryOptions {
    /// Jet order; defaults to the order of the equations (at least 1).
    pub order: Option<u32>,
    pub seed: u64,
    /// Skip rectification and check tangency directly.
    pub force_direct: bool,
}

impl Default for SymmetryOptions {
    fn default() -> Self {
        SymmetryOptions { order: None, seed: DEFAULT_SEED, force_direct: false }
    }
}

/// One zero test performed while verifying.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub residual: Expr,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteOutcome {
    pub verdict: SymmetryVerdict,
    pub checks: Vec<Check>,
    /// Why the route could not reach a verdict.
    pub error: Option<String>,
}

impl RouteOutcome {
    fn failed(e: &Error) -> Self {
        RouteOutcome { verdict: SymmetryVerdict::Unknown, checks: vec![], error: Some(e.to_string()) }
    }
}

pub const RECTIFIED_ROUTE: &str = "rectified-section restriction";
pub const DIRECT_ROUTE: &str = "direct tangency";

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub verdict: SymmetryVerdict,
    /// The route whose result was used for the verdict.
    pub justification: Option<&'static str>,
    pub rectified: Option<NormalFormSystem>,
    pub rectified_route: Option<RouteOutcome>,
    pub direct_route: Option<RouteOutcome>,
    pub notes: Vec<String>,
    pub seed: u64,
}

/// Decides whether the family spans conditional symmetries of the equations.
///
/// The rectified route restricts each equation to the section of the rectified
/// normal form; when it does not give Yes, the direct route reduces `j^n Y(Delta)`
/// modulo the characteristic system and the equations.
pub fn verify_conditional_symmetry(
    pde: &PdeSystem,
    f: &VectorFieldFamily,
    ws: &Workspace,
    opts: SymmetryOptions,
) -> Result<SymmetryReport> {
    let n = opts.order.unwrap_or(pde.order().max(1));
    if n < pde.order() || n == 0 {
        return Err(Error::InvalidArgument(format!("order {n} is below the order {} of the equations", pde.order())));
    }
    let mut report = SymmetryReport {
        verdict: SymmetryVerdict::Unknown,
        justification: None,
        rectified: None,
        rectified_route: None,
        direct_route: None,
        notes: vec![],
        seed: opts.seed,
    };
    if !opts.force_direct {
        let outcome = match rectified_route(pde, f, ws, opts.seed) {
            Ok((nf, outcome)) => {
                report.rectified = Some(nf);
                outcome
            }
            Err(e) => RouteOutcome::failed(&e),
        };
        let yes = outcome.verdict == SymmetryVerdict::Yes;
        report.rectified_route = Some(outcome);
        if yes {
            report.verdict = SymmetryVerdict::Yes;
            report.justification = Some(RECTIFIED_ROUTE);
            return Ok(report);
        }
    }
    match direct_route(pde, f, ws, n, opts.seed) {
        Ok(outcome) => {
            report.verdict = outcome.verdict;
            report.justification = Some(DIRECT_ROUTE);
            if let Some(a) = report.rectified_route.as_ref().filter(|a| a.error.is_none() && a.verdict != outcome.verdict) {
                report.notes.push(format!("routes disagree: {RECTIFIED_ROUTE} gave {}, {DIRECT_ROUTE} gave {}", a.verdict, outcome.verdict));
            }
            report.direct_route = Some(outcome);
        }
        Err(e) => {
            let a = report.rectified_route.as_ref().filter(|a| a.error.is_none());
            let Some(a) = a else { return Err(e) };
            report.verdict = a.verdict;
            report.justification = Some(RECTIFIED_ROUTE);
            report.notes.push(format!("{DIRECT_ROUTE} unavailable: {e}"));
            report.direct_route = Some(RouteOutcome::failed(&e));
        }
    }
    Ok(report)
}

fn rectified_route(pde: &PdeSystem, f: &VectorFieldFamily, ws: &Workspace, seed: u64) -> Result<(NormalFormSystem, RouteOutcome)> {
    let nf = rectify_with_seed(f, ws, seed)?;
    let cfg = ZeroTest::with_seed(seed);
    let mut checks = Vec::new();
    for (mu, delta) in pde.deltas().iter().enumerate() {
        let residual = restrict_to_section(delta, &nf, ws)?;
        let verdict = is_zero_with(&residual, &cfg);
        checks.push(Check { label: format!("equation {} on the section", mu + 1), residual, verdict });
    }
    let verdict = combined(checks.iter().map(|c| c.verdict));
    Ok((nf, RouteOutcome { verdict, checks, error: None }))
}

/// Jet bindings built by solving equations for their leading jet.
struct Reducer {
    bindings: Bindings,
    cfg: ZeroTest,
}

enum Absorbed {
    Consistent,
    Contradiction(Expr),
}

impl Reducer {
    fn reduce(&self, e: &Expr) -> Result<Expr> {
        substitute(e, &self.bindings)
    }

    fn leading_jets(&self, e: &Expr) -> Vec<Symbol> {
        let mut jets: Vec<Symbol> = e.free_symbols().into_iter().filter(Symbol::is_jet).collect();
        jets.sort_by(|a, b| b.jet_order().cmp(&a.jet_order()).then_with(|| a.cmp(b)));
        jets
    }

    fn absorb(&mut self, eq: &Expr) -> Result<Absorbed> {
        let r = self.reduce(eq)?;
        if r.is_zero_literal() {
            return Ok(Absorbed::Consistent);
        }
        let jets = self.leading_jets(&r);
        if jets.is_empty() {
            return match is_zero_with(&r, &self.cfg) {
                Verdict::Zero { .. } => Ok(Absorbed::Consistent),
                _ if r.is_constant() => Ok(Absorbed::Contradiction(r)),
                _ => Err(Error::ReductionIncomplete(format!("relation `{r} = 0` has no jet to solve for"))),
            };
        }
        for s in jets {
            let c = diff(&r, &s)?;
            if c.is_zero_literal() || c.contains_symbol(&s) {
                continue;
            }
            let value = normalize(&(Expr::sym(&s) - &r / &c))?;
            if value.contains_symbol(&s) {
                continue;
            }
            let single: Bindings = [(s.clone(), value.clone())].into_iter().collect();
            for v in self.bindings.values_mut() {
                *v = substitute(v, &single)?;
            }
            self.bindings.insert(s, value);
            return Ok(Absorbed::Consistent);
        }
        Err(Error::ReductionIncomplete(format!("`{r} = 0` is not linear in any of its jets")))
    }
}

fn direct_route(pde: &PdeSystem, f: &VectorFieldFamily, ws: &Workspace, n: u32, seed: u64) -> Result<RouteOutcome> {
    let cs = characteristic_system(f, n, ws)?;
    let cfg = ZeroTest::with_seed(seed);
    let mut red = Reducer { bindings: Bindings::new(), cfg };
    let constraints: Vec<(String, &Expr)> = cs
        .residuals
        .iter()
        .map(|((j, a, k), e)| (format!("characteristic residual (Y{}, u{}, {:?})", j + 1, a + 1, k.counts()), e))
        .chain(pde.deltas().iter().enumerate().map(|(mu, d)| (format!("equation {}", mu + 1), d)))
        .collect();
    for (label, eq) in &constraints {
        if let Absorbed::Contradiction(r) = red.absorb(eq)? {
            let check = Check { label: format!("{label} reduces to a nonzero constant"), residual: r, verdict: Verdict::NonZero };
            return Ok(RouteOutcome { verdict: SymmetryVerdict::Unsatisfiable, checks: vec![check], error: None });
        }
    }
    let mut checks = Vec::new();
    for (j, y) in f.members().iter().enumerate() {
        let py = prolong(y, n, ws)?;
        for (label, eq) in &constraints {
            let residual = red.reduce(&py.apply(eq, ws)?)?;
            let verdict = is_zero_with(&residual, &cfg);
            checks.push(Check { label: format!("j^{n}Y{} applied to {label}", j + 1), residual, verdict });
        }
    }
    Ok(RouteOutcome { verdict: combined(checks.iter().map(|c| c.verdict)), checks, error: None })
}

/// A set of equations a candidate solution is checked against.
#[derive(Clone, Copy, Debug)]
pub enum Equations<'a> {
    Pde(&'a PdeSystem),
    NormalForm(&'a NormalFormSystem),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionCheck {
    pub label: String,
    pub residual: Expr,
    pub verdict: Verdict,
}

/// Substitutes `u^a -> candidate[u^a]` and every jet by the matching partial derivative.
pub fn verify_solution(
    systems: &[Equations<'_>],
    candidate: &Bindings,
    ws: &Workspace,
    seed: u64,
) -> Result<Vec<SolutionCheck>> {
    for (s, e) in candidate {
        if !s.is_dependent() {
            return Err(Error::InvalidArgument(format!("`{s}` is not a dependent variable")));
        }
        if e.contains_jets() {
            return Err(Error::InvalidArgument(format!("candidate for `{s}` contains jets")));
        }
    }
    let cfg = ZeroTest::with_seed(seed);
    let mut labelled: Vec<(String, Expr)> = Vec::new();
    for (idx, system) in systems.iter().enumerate() {
        match system {
            Equations::Pde(p) => {
                for (mu, d) in p.deltas().iter().enumerate() {
                    labelled.push((format!("system {} equation {}", idx + 1, mu + 1), d.clone()));
                }
            }
            Equations::NormalForm(nf) => {
                for (c, e) in nf.constraints(ws)?.into_iter().enumerate() {
                    let (a, i) = (c / ws.p(), c % ws.p());
                    labelled.push((format!("system {} constraint {}", idx + 1, ws.d1(a, i)), e));
                }
            }
        }
    }
    labelled
        .into_iter()
        .map(|(label, e)| {
            let residual = substitute_solution(&e, candidate, ws)?;
            let verdict = is_zero_with(&residual, &cfg);
            Ok(SolutionCheck { label, residual, verdict })
        })
        .collect()
}

fn substitute_solution(e: &Expr, candidate: &Bindings, ws: &Workspace) -> Result<Expr> {
    let jets: BTreeSet<Symbol> = e.free_symbols().into_iter().filter(Symbol::is_jet).collect();
    let mut bindings = candidate.clone();
    for s in jets {
        let (alpha, k) = s.jet_data(ws.p()).expect("jet symbol");
        let Some(mut v) = candidate.get(ws.u(alpha)).cloned() else { continue };
        for i in k.slots() {
            v = diff(&v, ws.x(i))?;
        }
        bindings.insert(s, v);
    }
    substitute(e, &bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn wave() -> (Workspace, PdeSystem) {
        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let pde = PdeSystem::parse(&ws, &["u_{x1,x2} = 2*u^3"]).unwrap();
        (ws, pde)
    }

    #[test]
    fn wave_symmetries() {
        let (ws, pde) = wave();
        let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u^2"]), (&["0", "1"], &["u^2"])]).unwrap();
        let r = verify_conditional_symmetry(&pde, &f, &ws, SymmetryOptions::default()).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::Yes);
        assert_eq!(r.justification, Some(RECTIFIED_ROUTE));

        let forced = SymmetryOptions { force_direct: true, ..SymmetryOptions::default() };
        let r = verify_conditional_symmetry(&pde, &f, &ws, forced).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::Yes);
        assert_eq!(r.justification, Some(DIRECT_ROUTE));

        let g = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u^2"]), (&["0", "exp(x2/u)"], &["u^2*exp(x2/u)"])]).unwrap();
        let r = verify_conditional_symmetry(&pde, &g, &ws, SymmetryOptions::default()).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::Yes);
        let r = verify_conditional_symmetry(&pde, &g, &ws, forced).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::Yes);
    }

    #[test]
    fn non_symmetries_are_rejected() {
        let (ws, pde) = wave();
        let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u"]), (&["0", "1"], &["u"])]).unwrap();
        let r = verify_conditional_symmetry(&pde, &f, &ws, SymmetryOptions::default()).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::No);
        assert!(r.rectified_route.is_some() && r.direct_route.is_some());
    }

    #[test]
    fn empty_intersection() {
        let ws = Workspace::new(&["x", "t"], &["u"], 2).unwrap();
        let pde = PdeSystem::parse(&ws, &["u_{x} = 0", "u_{t} = 0"]).unwrap();
        let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["1"]), (&["0", "1"], &["u"])]).unwrap();
        let r = verify_conditional_symmetry(&pde, &f, &ws, SymmetryOptions::default()).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::Unsatisfiable);
        let a = r.rectified_route.unwrap();
        assert!(a.error.unwrap().contains("involutivity"));
    }

    #[test]
    fn solutions() {
        let (ws, pde) = wave();
        let mut ws = ws;
        let lambda = ws.add_parameter("lambda").unwrap();
        let nf = NormalFormSystem::parse(&ws, &[&["u^2", "u^2"]]).unwrap();
        let cand: Bindings = [(ws.u(0).clone(), parse("-1/(x1 + x2 + lambda)", &ws).unwrap())].into_iter().collect();
        let checks = verify_solution(&[Equations::NormalForm(&nf), Equations::Pde(&pde)], &cand, &ws, DEFAULT_SEED).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.verdict == Verdict::Zero { probabilistic: false }), "{checks:?}");
        let zero: Bindings = [(ws.u(0).clone(), Expr::zero())].into_iter().collect();
        assert!(verify_solution(&[Equations::Pde(&pde)], &zero, &ws, DEFAULT_SEED).unwrap()[0].verdict.is_zero());
        let wrong: Bindings = [(ws.u(0).clone(), Expr::sym(&lambda))].into_iter().collect();
        assert_eq!(verify_solution(&[Equations::Pde(&pde)], &wrong, &ws, DEFAULT_SEED).unwrap()[0].verdict, Verdict::NonZero);
    }
}
