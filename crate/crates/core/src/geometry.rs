//! Vector fields on `J^0`: brackets, rank, projection, involutivity and rectification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::condsym::NormalFormSystem;
use crate::error::{Error, Result};
use crate::expr::zero::{frac_is_zero, random_point, sample_value};
use crate::expr::{eval, Expr, Frac, Point, Symbol, Verdict, Workspace, ZeroTest, DEFAULT_SEED};
use crate::jet::{ProlongedVectorField, VectorField};
use crate::linalg;
use crate::par::Exec;

/// Three-valued answer for structural checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl Tri {
    pub fn from_verdict(v: Verdict) -> Tri {
        match v {
            Verdict::Zero { .. } => Tri::Yes,
            Verdict::NonZero => Tri::No,
            Verdict::Unknown => Tri::Unknown,
        }
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Yes => "Yes",
            Tri::No => "No",
            Tri::Unknown => "Unknown",
        })
    }
}

/// An ordered, nonempty list of vector fields on one workspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFieldFamily {
    members: Vec<VectorField>,
}

impl VectorFieldFamily {
    pub fn new(members: Vec<VectorField>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidArgument("a vector field family needs at least one member".into()));
        };
        let shape = (first.xi().len(), first.phi().len());
        if members.iter().any(|m| (m.xi().len(), m.phi().len()) != shape) {
            return Err(Error::InvalidArgument("family members live on different workspaces".into()));
        }
        Ok(VectorFieldFamily { members })
    }

    /// Parses `(xi, phi)` coefficient strings for each member.
    pub fn parse(ws: &Workspace, members: &[(&[&str], &[&str])]) -> Result<Self> {
        VectorFieldFamily::new(members.iter().map(|(xi, phi)| VectorField::parse(ws, xi, phi)).collect::<Result<_>>()?)
    }

    pub fn members(&self) -> &[VectorField] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `[Y, Z]` with coefficients `Y(zeta^c) - Z(eta^c)` for every coordinate.
pub fn lie_bracket(y: &VectorField, z: &VectorField, ws: &Workspace) -> Result<VectorField> {
    let coef = |a: &Expr, b: &Expr| -> Result<Expr> { Ok(y.apply_frac(a, ws)?.sub(&z.apply_frac(b, ws)?).to_expr()) };
    let xi = y.xi().iter().zip(z.xi()).map(|(yc, zc)| coef(zc, yc)).collect::<Result<_>>()?;
    let phi = y.phi().iter().zip(z.phi()).map(|(yc, zc)| coef(zc, yc)).collect::<Result<_>>()?;
    VectorField::new(xi, phi)
}

/// Coordinates of `J^n` in a fixed order: `x`, `u`, then `u^a_K` by `(a, K)`.
pub fn jet_coordinates(ws: &Workspace, n: u32) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = ws.independent().iter().chain(ws.dependent()).cloned().collect();
    for a in 0..ws.q() {
        for k in crate::multiindex::MultiIndex::all_up_to(ws.p(), 1, n) {
            out.push(ws.jet(a, &k));
        }
    }
    out
}

/// Coefficients of a prolonged field along [`jet_coordinates`].
pub fn prolonged_coefficients(py: &ProlongedVectorField, ws: &Workspace) -> Vec<Expr> {
    let mut out: Vec<Expr> = py.base().coefficients().cloned().collect();
    for a in 0..ws.q() {
        for k in crate::multiindex::MultiIndex::all_up_to(ws.p(), 1, py.order()) {
            out.push(py.psi(a, &k).cloned().unwrap_or_else(Expr::zero));
        }
    }
    out
}

/// Bracket of two prolonged fields as fields on `J^n`, along [`jet_coordinates`].
pub fn prolonged_bracket(a: &ProlongedVectorField, b: &ProlongedVectorField, ws: &Workspace) -> Result<Vec<Expr>> {
    let ca = prolonged_coefficients(a, ws);
    let cb = prolonged_coefficients(b, ws);
    ca.iter().zip(&cb).map(|(x, y)| crate::expr::normalize(&(a.apply(y, ws)? - b.apply(x, ws)?))).collect()
}

fn coefficient_matrix(f: &VectorFieldFamily, xi_only: bool) -> Vec<Vec<Expr>> {
    f.members
        .iter()
        .map(|m| if xi_only { m.xi().to_vec() } else { m.coefficients().cloned().collect() })
        .collect()
}

/// A random specialization of every symbol and unknown-function application in `exprs`.
fn specialization(exprs: &[&Expr], rng: &mut ChaCha8Rng) -> Point {
    let symbols: BTreeSet<Symbol> = exprs.iter().flat_map(|e| e.free_symbols()).collect();
    let symbols: Vec<Symbol> = symbols.into_iter().collect();
    let mut at = random_point(&symbols, rng);
    for e in exprs {
        for fa in e.function_apps() {
            at.functions.entry(fa).or_insert_with(|| sample_value(rng));
        }
    }
    at
}

const TRIALS: usize = 3;
const ATTEMPTS: usize = 24;
const RANK_TOL: f64 = 1e-9;

/// Numeric samples of a matrix of expressions at random points where all entries evaluate.
fn sample_matrices(m: &[Vec<Expr>], count: usize, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    let entries: Vec<&Expr> = m.iter().flatten().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < ATTEMPTS {
        tries += 1;
        let at = specialization(&entries, &mut rng);
        let vals: std::result::Result<Vec<Vec<f64>>, _> =
            m.iter().map(|row| row.iter().map(|e| eval(e, &at)).collect()).collect();
        if let Ok(v) = vals {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::SpecializationFailed("coefficients are undefined at every sampled point".into()));
    }
    Ok(out)
}

/// Generic rank with the per-trial ranks and notes on where it drops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub rank: usize,
    pub trials: Vec<usize>,
    pub notes: Vec<String>,
}

fn rank_of(m: &[Vec<Expr>], seed: u64, label: &str) -> Result<RankReport> {
    if m.first().is_none_or(|r| r.is_empty()) {
        return Ok(RankReport { rank: 0, trials: vec![0; TRIALS], notes: vec![] });
    }
    let samples = sample_matrices(m, TRIALS, seed)?;
    let trials: Vec<usize> = samples.iter().map(|s| linalg::rank_f64(s, RANK_TOL)).collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &trials {
        *counts.entry(*r).or_default() += 1;
    }
    let rank = counts.iter().max_by_key(|(r, c)| (**c, **r)).map(|(r, _)| *r).unwrap_or(0);
    let mut notes = Vec::new();
    if counts.len() > 1 {
        notes.push(format!("{label} sampled ranks disagree: {trials:?}"));
    }
    if let Some(note) = degeneracy_note(m, rank, label)? {
        notes.push(note);
    }
    Ok(RankReport { rank, trials, notes })
}

/// Limits on the symbolic minor search used for degeneracy notes.
const MAX_MINORS: usize = 24;
const MAX_MINOR_SIZE: usize = 4;

/// Describes where all maximal minors vanish, when that locus is proper and computable.
fn degeneracy_note(m: &[Vec<Expr>], rank: usize, label: &str) -> Result<Option<String>> {
    if rank == 0 || rank > MAX_MINOR_SIZE {
        return Ok(None);
    }
    let rows = linalg::combinations(m.len(), rank);
    let cols = linalg::combinations(m[0].len(), rank);
    if rows.len() * cols.len() > MAX_MINORS {
        return Ok(None);
    }
    let mut minors: Vec<Expr> = Vec::new();
    for r in &rows {
        for c in &cols {
            let sub: Vec<Vec<Frac>> =
                r.iter().map(|&i| c.iter().map(|&j| Frac::from_expr(&m[i][j])).collect::<Result<_>>()).collect::<Result<_>>()?;
            let d = linalg::det(&sub)?;
            if d.is_zero() {
                continue;
            }
            if d.constant_value().is_some() || !d.den().is_empty() && d.num().constant_value().is_some() {
                return Ok(None);
            }
            let lc = d.lc().cloned().expect("nonzero");
            let e = d.scale(&lc.recip()).num().to_expr();
            if !minors.contains(&e) {
                minors.push(e);
            }
        }
    }
    // Minors that never vanish (pure exponentials) leave no degeneracy locus.
    if minors.is_empty() || minors.iter().any(never_vanishes) {
        return Ok(None);
    }
    let locus: Vec<String> = minors.iter().map(|e| format!("{e} = 0")).collect();
    Ok(Some(if locus.len() == 1 {
        format!("{label} rank drops on {}", locus[0])
    } else {
        format!("{label} rank drops where {}", locus.join(" and "))
    }))
}

fn never_vanishes(e: &Expr) -> bool {
    use crate::expr::{Kernel, Node};
    match e.node() {
        Node::Num(q) => !num_traits::Zero::is_zero(q),
        Node::Kernel(Kernel::Exp | Kernel::Cosh, _) => true,
        Node::Mul(fs) => fs.iter().all(never_vanishes),
        Node::Pow(b, _) => never_vanishes(b),
        _ => false,
    }
}

/// Rank of the `l x (p+q)` coefficient matrix at generic points.
pub fn generic_rank(f: &VectorFieldFamily, seed: u64) -> Result<RankReport> {
    let m = coefficient_matrix(f, false);
    let mut full = rank_of(&m, seed, "rank")?;
    let xi = rank_of(&coefficient_matrix(f, true), seed, "xi-block")?;
    full.notes.extend(xi.notes);
    Ok(full)
}

/// Whether the xi-block has generic rank `p`, with notes on where it drops.
pub fn projects_onto_tx(f: &VectorFieldFamily, seed: u64) -> Result<(bool, Vec<String>)> {
    let xi = coefficient_matrix(f, true);
    let p = xi[0].len();
    let r = rank_of(&xi, seed, "xi-block")?;
    Ok((r.rank == p, r.notes))
}

/// Indices chosen greedily (in order) so that the sampled rank grows with each one.
fn greedy_independent(rows: &[Vec<f64>], limit: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..rows.len() {
        if chosen.len() == limit {
            break;
        }
        let mut trial: Vec<Vec<f64>> = chosen.iter().map(|&j| rows[j].clone()).collect();
        trial.push(rows[i].clone());
        if linalg::rank_f64(&trial, RANK_TOL) == trial.len() {
            chosen.push(i);
        }
    }
    chosen
}

fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..m.first().map_or(0, Vec::len)).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// Outcome of the involutivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct InvolutionReport {
    pub involutive: Tri,
    /// Members spanning the distribution, as indices into the family.
    pub generators: Vec<usize>,
    /// `[Y_j, Y_k] = sum f^m V_m` for `j < k`, coefficients over `generators`.
    pub structure_functions: Option<BTreeMap<(usize, usize), Vec<Expr>>>,
    /// Minors divided by during the solve; assumed nonvanishing.
    pub assumptions: Vec<Expr>,
    /// First pair whose bracket left the span, with the offending residual.
    pub escape: Option<((usize, usize), VectorField)>,
}

pub fn is_involutive(f: &VectorFieldFamily, ws: &Workspace, seed: u64) -> Result<InvolutionReport> {
    is_involutive_with(f, ws, seed, Exec::default())
}

pub fn is_involutive_with(f: &VectorFieldFamily, ws: &Workspace, seed: u64, exec: Exec) -> Result<InvolutionReport> {
    let m = coefficient_matrix(f, false);
    let sample = sample_matrices(&m, 1, seed)?.remove(0);
    let rank = generic_rank(f, seed)?.rank;
    let generators = greedy_independent(&sample, rank);
    let sub: Vec<Vec<f64>> = generators.iter().map(|&i| sample[i].clone()).collect();
    let cols = greedy_independent(&transpose(&sub), rank);
    // a[c][m] = coefficient of generator m along coordinate cols[c]
    let a: Vec<Vec<Frac>> = cols
        .iter()
        .map(|&c| generators.iter().map(|&g| Frac::from_expr(&m[g][c])).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let assumption = linalg::det(&a)?.to_expr();
    let pairs: Vec<(usize, usize)> =
        (0..f.len()).flat_map(|j| (j + 1..f.len()).map(move |k| (j, k))).collect();
    let outcomes = exec.try_map(&pairs, |&(j, k)| -> Result<(Verdict, Vec<Expr>, VectorField)> {
        let b = lie_bracket(&f.members[j], &f.members[k], ws)?;
        let bc: Vec<Expr> = b.coefficients().cloned().collect();
        let rhs: Vec<Vec<Frac>> = cols.iter().map(|&c| Ok(vec![Frac::from_expr(&bc[c])?])).collect::<Result<_>>()?;
        let Some(sol) = linalg::solve(&a, &rhs)? else {
            return Ok((Verdict::Unknown, vec![], b));
        };
        let coeffs: Vec<Frac> = sol.into_iter().map(|mut r| r.remove(0)).collect();
        let mut residual = b.clone();
        for (fm, &g) in coeffs.iter().zip(&generators) {
            residual = residual.sub(&f.members[g].scale(&fm.to_expr())?)?;
        }
        let v = Verdict::all(
            residual.coefficients().map(|c| Frac::from_expr(c).map(|fc| frac_is_zero(&fc, &ZeroTest::with_seed(seed)))).collect::<Result<Vec<_>>>()?,
        );
        Ok((v, coeffs.iter().map(Frac::to_expr).collect(), residual))
    })?;
    let verdict = Verdict::all(outcomes.iter().map(|o| o.0));
    let escape = pairs
        .iter()
        .zip(&outcomes)
        .find(|(_, o)| o.0 == Verdict::NonZero)
        .map(|(pair, o)| (*pair, o.2.clone()));
    let involutive = Tri::from_verdict(verdict);
    let structure_functions = (involutive == Tri::Yes)
        .then(|| pairs.iter().zip(outcomes).map(|(pair, o)| (*pair, o.1)).collect());
    let assumptions = if assumption.is_constant() { vec![] } else { vec![assumption] };
    Ok(InvolutionReport { involutive, generators, structure_functions, assumptions, escape })
}

/// Yes iff every pairwise bracket vanishes.
pub fn is_abelian(f: &VectorFieldFamily, ws: &Workspace) -> Result<Tri> {
    let mut verdicts = Vec::new();
    for j in 0..f.len() {
        for k in j + 1..f.len() {
            let b = lie_bracket(&f.members[j], &f.members[k], ws)?;
            for c in b.coefficients() {
                verdicts.push(crate::expr::is_zero(c));
            }
        }
    }
    Ok(Tri::from_verdict(Verdict::all(verdicts)))
}

/// Everything known about the distribution spanned by a family.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionReport {
    pub generic_rank: usize,
    pub projects_onto_tx: bool,
    pub involutive: Tri,
    pub abelian: Tri,
    pub structure_functions: Option<BTreeMap<(usize, usize), Vec<Expr>>>,
    pub generators: Vec<usize>,
    pub assumptions: Vec<Expr>,
    pub degeneracy_notes: Vec<String>,
    pub seed: u64,
}

pub fn analyze_distribution(f: &VectorFieldFamily, ws: &Workspace, seed: u64) -> Result<DistributionReport> {
    let rank = generic_rank(f, seed)?;
    let (projects, _) = projects_onto_tx(f, seed)?;
    let inv = is_involutive(f, ws, seed)?;
    let abelian = is_abelian(f, ws)?;
    let abelian = if abelian == Tri::No && inv.involutive == Tri::Unknown { Tri::No } else { abelian };
    let involutive = if abelian == Tri::Yes { Tri::Yes } else { inv.involutive };
    Ok(DistributionReport {
        generic_rank: rank.rank,
        projects_onto_tx: projects,
        involutive,
        abelian,
        structure_functions: inv.structure_functions,
        generators: inv.generators,
        assumptions: inv.assumptions,
        degeneracy_notes: rank.notes,
        seed,
    })
}

/// The rectified basis `Z_k = d/dx^k + sum phi^a_k d/du^a` spanning the same distribution.
pub fn rectify(f: &VectorFieldFamily, ws: &Workspace) -> Result<NormalFormSystem> {
    rectify_with_seed(f, ws, DEFAULT_SEED)
}

pub fn rectify_with_seed(f: &VectorFieldFamily, ws: &Workspace, seed: u64) -> Result<NormalFormSystem> {
    let p = ws.p();
    let rank = generic_rank(f, seed)?;
    if rank.rank != p {
        return Err(Error::PreconditionFailed(format!("rank: generic rank is {}, expected {p}", rank.rank)));
    }
    let (projects, _) = projects_onto_tx(f, seed)?;
    if !projects {
        return Err(Error::PreconditionFailed("projection: the distribution does not project onto TX".into()));
    }
    let inv = is_involutive(f, ws, seed)?;
    if inv.involutive != Tri::Yes {
        let detail = match &inv.escape {
            Some(((j, k), r)) => format!(" ([Y{}, Y{}] leaves the span by {})", j + 1, k + 1, r.display(ws)),
            None => String::new(),
        };
        return Err(Error::PreconditionFailed(format!("involutivity: {}{detail}", inv.involutive)));
    }
    let xi = coefficient_matrix(f, true);
    let sample = sample_matrices(&xi, 1, seed)?.remove(0);
    for subset in linalg::combinations(f.len(), p) {
        let numeric: Vec<Vec<f64>> = subset.iter().map(|&i| sample[i].clone()).collect();
        if linalg::rank_f64(&numeric, RANK_TOL) < p {
            continue;
        }
        let x: Vec<Vec<Frac>> = subset
            .iter()
            .map(|&i| xi[i].iter().map(Frac::from_expr).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let Some(c) = linalg::solve(&x, &linalg::identity(p))? else { continue };
        let mut phi = vec![vec![Expr::zero(); p]; ws.q()];
        for (k, row) in c.iter().enumerate() {
            for (a, slot) in phi.iter_mut().enumerate() {
                let mut acc = Frac::zero();
                for (ck, &i) in row.iter().zip(&subset) {
                    acc = acc.add(&ck.mul(&Frac::from_expr(&f.members[i].phi()[a])?));
                }
                slot[k] = acc.to_expr();
            }
        }
        return NormalFormSystem::new(ws, phi);
    }
    Err(Error::SingularXi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::jet::prolong;

    fn wave() -> Workspace {
        Workspace::new(&["x1", "x2"], &["u"], 2).unwrap()
    }

    fn xt() -> Workspace {
        Workspace::new(&["x", "t"], &["u"], 2).unwrap()
    }

    #[test]
    fn brackets() {
        let ws = xt();
        let y = VectorField::parse(&ws, &["1", "0"], &["1"]).unwrap();
        let z = VectorField::parse(&ws, &["0", "1"], &["x"]).unwrap();
        let b = lie_bracket(&y, &z, &ws).unwrap();
        assert_eq!(b, VectorField::parse(&ws, &["0", "0"], &["1"]).unwrap());
        assert!(lie_bracket(&y, &y, &ws).unwrap().is_zero_literal());
    }

    #[test]
    fn bracket_of_the_rescaled_pair() {
        let ws = wave();
        let y1 = VectorField::parse(&ws, &["1", "0"], &["u^2"]).unwrap();
        let y2 = VectorField::parse(&ws, &["0", "exp(x2/u)"], &["u^2*exp(x2/u)"]).unwrap();
        let b = lie_bracket(&y1, &y2, &ws).unwrap();
        let x2 = parse("x2", &ws).unwrap();
        assert_eq!(b, y2.scale(&-x2).unwrap());
    }

    #[test]
    fn ranks_and_projection() {
        let ws = xt();
        let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["1"]), (&["0", "1"], &["x"])]).unwrap();
        assert_eq!(generic_rank(&f, DEFAULT_SEED).unwrap().rank, 2);
        assert!(projects_onto_tx(&f, DEFAULT_SEED).unwrap().0);
        let g = VectorFieldFamily::parse(&ws, &[(&["0", "0"], &["1"]), (&["0", "0"], &["2"])]).unwrap();
        assert_eq!(generic_rank(&g, DEFAULT_SEED).unwrap().rank, 1);
        assert!(!projects_onto_tx(&g, DEFAULT_SEED).unwrap().0);
    }

    #[test]
    fn degenerate_projection_is_reported() {
        let ws = Workspace::new(&["x"], &["u"], 1).unwrap();
        let f = VectorFieldFamily::parse(&ws, &[(&["x"], &["1"])]).unwrap();
        let r = generic_rank(&f, DEFAULT_SEED).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.notes, vec!["xi-block rank drops on x = 0".to_string()]);
        let (projects, notes) = projects_onto_tx(&f, DEFAULT_SEED).unwrap();
        assert!(projects);
        assert_eq!(notes, vec!["xi-block rank drops on x = 0".to_string()]);
    }

    #[test]
    fn involutivity() {
        let ws = xt();
        let f = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["1"]), (&["0", "1"], &["x"])]).unwrap();
        let r = is_involutive(&f, &ws, DEFAULT_SEED).unwrap();
        assert_eq!(r.involutive, Tri::No);
        assert_eq!(r.escape.unwrap().0, (0, 1));
        assert_eq!(is_abelian(&f, &ws).unwrap(), Tri::No);

        let ws = wave();
        let g = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u^2"]), (&["0", "exp(x2/u)"], &["u^2*exp(x2/u)"])]).unwrap();
        let r = is_involutive(&g, &ws, DEFAULT_SEED).unwrap();
        assert_eq!(r.involutive, Tri::Yes);
        let sf = r.structure_functions.unwrap();
        assert_eq!(sf[&(0, 1)], vec![Expr::zero(), parse("-x2", &ws).unwrap()]);

        let h = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u^2"]), (&["0", "1"], &["u^2"])]).unwrap();
        assert_eq!(is_abelian(&h, &ws).unwrap(), Tri::Yes);
        let single = VectorFieldFamily::parse(&ws, &[(&["1", "x1"], &["u"])]).unwrap();
        assert_eq!(is_involutive(&single, &ws, DEFAULT_SEED).unwrap().involutive, Tri::Yes);
        assert_eq!(is_abelian(&single, &ws).unwrap(), Tri::Yes);
    }

    #[test]
    fn rectification() {
        let ws = Workspace::new(&["t", "x"], &["u"], 2).unwrap();
        let f = VectorFieldFamily::parse(&ws, &[(&["exp(-t)", "exp(-x)"], &["2"]), (&["exp(-t)", "0"], &["1"])]).unwrap();
        let nf = rectify(&f, &ws).unwrap();
        assert_eq!(nf.rhs(0, 0), &parse("exp(t)", &ws).unwrap());
        assert_eq!(nf.rhs(0, 1), &parse("exp(x)", &ws).unwrap());

        let already = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["u"]), (&["0", "1"], &["x*u"])]).unwrap();
        let nf = rectify(&already, &ws).unwrap();
        assert_eq!(nf.rhs(0, 0), &parse("u", &ws).unwrap());
        assert_eq!(nf.rhs(0, 1), &parse("x*u", &ws).unwrap());

        let ws = xt();
        let bad = VectorFieldFamily::parse(&ws, &[(&["1", "0"], &["1"]), (&["0", "1"], &["x"])]).unwrap();
        match rectify(&bad, &ws) {
            Err(Error::PreconditionFailed(m)) => assert!(m.starts_with("involutivity"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn prolongation_respects_brackets() {
        let ws = wave();
        let y = VectorField::parse(&ws, &["x2", "u"], &["x1*u^2"]).unwrap();
        let z = VectorField::parse(&ws, &["1", "x1*u"], &["exp(u)"]).unwrap();
        let lhs = prolonged_coefficients(&prolong(&lie_bracket(&y, &z, &ws).unwrap(), 2, &ws).unwrap(), &ws);
        let rhs = prolonged_bracket(&prolong(&y, 2, &ws).unwrap(), &prolong(&z, 2, &ws).unwrap(), &ws).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!(crate::expr::is_zero(&(a - b)).is_zero(), "{a} vs {b}");
        }
    }
}
