//! Command dispatch.

use std::fmt;

use clap::ValueEnum;
use jetsym::condsym::{
    build_ansatz, build_complex_ansatz, characteristic_system, compatibility_residuals, determining_system,
    verify_conditional_symmetry, verify_solution, Equations, NormalFormSystem, PdeSystem, RouteOutcome, SymmetryOptions,
};
use jetsym::expr::{is_zero_with, rat, Verdict, Workspace, ZeroTest, DEFAULT_SEED};
use jetsym::geometry::{analyze_distribution, rectify_with_seed, VectorFieldFamily};
use jetsym::liesys::{
    pde_lie_system, recognize_riccati, solve_solvable_q1, PdeLieSystem, RiccatiShape, SolveOptions, DEFAULT_CAP,
};
use jetsym::Error;

use crate::error::{CliError, Context};
use crate::problem::{Options, ProblemFile};
use crate::report::{hex, CheckReport, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    AnalyzeDistribution,
    Charsys,
    Compatibility,
    DeriveDetermining,
    VerifySymmetry,
    VerifySolution,
    SolveLiesys,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::AnalyzeDistribution,
        Command::Charsys,
        Command::Compatibility,
        Command::DeriveDetermining,
        Command::VerifySymmetry,
        Command::VerifySolution,
        Command::SolveLiesys,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::AnalyzeDistribution => "analyze-distribution",
            Command::Charsys => "charsys",
            Command::Compatibility => "compatibility",
            Command::DeriveDetermining => "derive-determining",
            Command::VerifySymmetry => "verify-symmetry",
            Command::VerifySolution => "verify-solution",
            Command::SolveLiesys => "solve-liesys",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Problem options overridden by command-line flags.
struct Settings {
    order: Option<u32>,
    seed: u64,
    cap: usize,
    force_direct: bool,
}

impl Settings {
    fn merge(file: &Options, flags: &Options) -> Self {
        Settings {
            order: flags.order.or(file.order),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            cap: flags.cap.or(file.cap).unwrap_or(DEFAULT_CAP),
            force_direct: flags.force_direct.or(file.force_direct).unwrap_or(false),
        }
    }
}

/// Runs one command; failures become a report with status `error`.
pub fn run(command: Command, problem: &ProblemFile, flags: &Options) -> Report {
    let s = Settings::merge(&problem.options, flags);
    let mut report = Report::new(command.name(), &problem.path.display().to_string(), s.seed);
    let res = match command {
        Command::AnalyzeDistribution => analyze(problem, &s, &mut report),
        Command::Charsys => charsys(problem, &s, &mut report),
        Command::Compatibility => compatibility(problem, &s, &mut report),
        Command::DeriveDetermining => derive(problem, &s, &mut report),
        Command::VerifySymmetry => symmetry(problem, &s, &mut report),
        Command::VerifySolution => solution(problem, &s, &mut report),
        Command::SolveLiesys => liesys(problem, &s, &mut report),
    };
    if let Err(e) = res {
        report.error = Some(e.to_string());
    }
    report.settle();
    report
}

fn fields<'a>(p: &'a ProblemFile, command: Command) -> Result<&'a VectorFieldFamily, CliError> {
    p.fields.as_ref().map(|f| &f.1).ok_or(CliError::Missing { command: command.name(), what: "a [fields] section" })
}

fn pde(p: &ProblemFile, command: Command) -> Result<&PdeSystem, CliError> {
    p.pde.as_ref().ok_or(CliError::Missing { command: command.name(), what: "a [pde] section" })
}

fn nf_lines(nf: &NormalFormSystem, ws: &Workspace) -> Vec<String> {
    let mut out = Vec::new();
    for (a, row) in nf.rows().iter().enumerate() {
        for (i, rhs) in row.iter().enumerate() {
            out.push(format!("{} = {rhs}", ws.d1(a, i)));
        }
    }
    out
}

/// True when every `xi` block is literally the identity.
fn already_rectified(f: &VectorFieldFamily, ws: &Workspace) -> bool {
    f.len() == ws.p()
        && f.members().iter().enumerate().all(|(j, y)| {
            y.xi().iter().enumerate().all(|(k, c)| if j == k { c.is_one_literal() } else { c.is_zero_literal() })
        })
}

/// `[normal_form]` if given, else the fields read as (or rectified to) a normal form.
fn normal_form(p: &ProblemFile, command: Command, seed: u64, report: &mut Report) -> Result<NormalFormSystem, CliError> {
    if let Some(nf) = &p.normal_form {
        return Ok(nf.clone());
    }
    let f = p.fields.as_ref().map(|f| &f.1).ok_or(CliError::Missing {
        command: command.name(),
        what: "a [normal_form] or [fields] section",
    })?;
    let ws = &p.workspace;
    if already_rectified(f, ws) {
        let rows = (0..ws.q()).map(|a| f.members().iter().map(|y| y.phi()[a].clone()).collect()).collect();
        return NormalFormSystem::new(ws, rows).context("fields as a normal form");
    }
    let nf = rectify_with_seed(f, ws, seed).context("rectify")?;
    report.notes.push("normal form obtained by rectifying [fields]".into());
    Ok(nf)
}

fn analyze(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    let f = fields(p, Command::AnalyzeDistribution)?;
    let ws = &p.workspace;
    let d = analyze_distribution(f, ws, s.seed).context("analyze-distribution")?;
    let names = &p.fields.as_ref().unwrap().0;
    let mut lines = vec![
        format!("generic rank: {}", d.generic_rank),
        format!("projects onto TX: {}", d.projects_onto_tx),
        format!("abelian: {}", d.abelian),
        format!("generators: {}", d.generators.iter().map(|&g| names[g].as_str()).collect::<Vec<_>>().join(", ")),
    ];
    if let Some(sf) = &d.structure_functions {
        for ((j, k), coeffs) in sf {
            let terms: Vec<String> =
                coeffs.iter().zip(&d.generators).map(|(c, &g)| format!("({c})*{}", names[g])).collect();
            lines.push(format!("[{}, {}] = {}", names[*j], names[*k], terms.join(" + ")));
        }
    }
    report.section("distribution", lines);
    report.assumptions.extend(d.assumptions.iter().map(|a| format!("{a} != 0")));
    report.notes.extend(d.degeneracy_notes.iter().cloned());
    report.checks.push(CheckReport::tri("involutive", d.involutive));
    match rectify_with_seed(f, ws, s.seed) {
        Ok(nf) => report.section("rectified normal form", nf_lines(&nf, ws)),
        Err(e) => report.notes.push(format!("rectify: {e}")),
    }
    Ok(())
}

fn charsys(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    let f = fields(p, Command::Charsys)?;
    let n = s.order.unwrap_or(2);
    let cs = characteristic_system(f, n, &p.workspace).context("charsys")?;
    report.section(format!("characteristic system (order {n})"), cs.equations().map(|e| format!("{e} = 0")).collect());
    report.checks.push(CheckReport::flag("characteristic system", !cs.is_inconsistent(), "Consistent", "Inconsistent"));
    Ok(())
}

fn compatibility(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    let ws = &p.workspace;
    let nf = normal_form(p, Command::Compatibility, s.seed, report)?;
    report.section("normal form", nf_lines(&nf, ws));
    let cfg = ZeroTest::with_seed(s.seed);
    for r in compatibility_residuals(&nf, ws).context("compatibility")? {
        let v = is_zero_with(&r.residual, &cfg);
        let label = format!("compatibility ({}, {}, {})", ws.u(r.alpha), ws.x(r.j), ws.x(r.k));
        let mut c = CheckReport::zero_test(label, v, s.seed);
        if v != (Verdict::Zero { probabilistic: false }) {
            c = c.with_detail(format!("residual: {}", r.residual));
        }
        report.checks.push(c);
    }
    Ok(())
}

fn derive(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    let raw = p.raw_pde.as_ref().ok_or(CliError::Missing { command: "derive-determining", what: "a [pde] section" })?;
    let spec = p.ansatz.as_ref().ok_or(CliError::Missing { command: "derive-determining", what: "an [ansatz] section" })?;
    let ans = if spec.complex {
        build_complex_ansatz(&spec.family, &p.workspace)
    } else {
        build_ansatz(&spec.family, &p.workspace)
    }
    .context("ansatz")?;
    let aws = ans.workspace();
    let pde = PdeSystem::new(aws, raw.deltas().to_vec()).context("equations in the ansatz workspace")?;
    let det = determining_system(&pde, &ans).context("derive-determining")?;
    report.section("ansatz", nf_lines(ans.normal_form(), aws));
    let line = |e: &jetsym::condsym::DeterminingEquation| format!("{} = 0    [{}, coefficient of {}]", e.expr, e.origin, e.monomial);
    report.section(format!("equation conditions ({})", det.pde_eqs.len()), det.pde_eqs.iter().map(line).collect());
    report.section(
        format!("compatibility conditions ({})", det.compatibility_eqs.len()),
        det.compatibility_eqs.iter().map(line).collect(),
    );
    let cfg = ZeroTest::with_seed(s.seed);
    for mu in 0..pde.deltas().len() {
        let r = det.reassembly_residual(mu).context("reassembly")?;
        report.checks.push(CheckReport::zero_test(format!("equation {} reassembles", mu + 1), is_zero_with(&r, &cfg), s.seed));
    }
    if !p.bindings.is_empty() {
        report.notes.push("[bindings] left symbolic for derive-determining".into());
    }
    Ok(())
}

fn route_lines(o: &RouteOutcome) -> Vec<String> {
    let mut lines = vec![format!("verdict: {}", o.verdict)];
    if let Some(e) = &o.error {
        lines.push(format!("unavailable: {e}"));
    }
    lines.extend(o.checks.iter().map(|c| format!("{}: {} (residual {})", c.label, c.verdict, c.residual)));
    lines
}

fn symmetry(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    let pde = pde(p, Command::VerifySymmetry)?;
    let f = fields(p, Command::VerifySymmetry)?;
    let ws = &p.workspace;
    let opts = SymmetryOptions { order: s.order, seed: s.seed, force_direct: s.force_direct };
    let r = verify_conditional_symmetry(pde, f, ws, opts).context("verify-symmetry")?;
    if let Some(nf) = &r.rectified {
        report.section("rectified normal form", nf_lines(nf, ws));
    }
    let used = match r.justification {
        Some(j) if j == jetsym::condsym::DIRECT_ROUTE => r.direct_route.as_ref(),
        _ => r.rectified_route.as_ref(),
    };
    if let Some(o) = &r.rectified_route {
        report.section(jetsym::condsym::RECTIFIED_ROUTE, route_lines(o));
    }
    if let Some(o) = &r.direct_route {
        report.section(jetsym::condsym::DIRECT_ROUTE, route_lines(o));
    }
    let mut c = CheckReport::symmetry("conditional symmetry", r.verdict);
    c.justification = r.justification.map(str::to_string);
    let sampled = used.is_some_and(|o| {
        o.checks.iter().any(|c| matches!(c.verdict, Verdict::Zero { probabilistic: true } | Verdict::Unknown))
    });
    c.seed = sampled.then(|| hex(r.seed));
    report.checks.push(c);
    report.notes.extend(r.notes);
    Ok(())
}

fn solution(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    if p.candidates.is_empty() {
        return Err(CliError::Missing { command: "verify-solution", what: "a [candidates] section" });
    }
    let ws = &p.workspace;
    let nf = if p.normal_form.is_some() || p.fields.is_some() {
        Some(normal_form(p, Command::VerifySolution, s.seed, report)?)
    } else {
        None
    };
    let mut systems = Vec::new();
    let mut names = Vec::new();
    if let Some(pde) = &p.pde {
        systems.push(Equations::Pde(pde));
        names.push("equations");
    }
    if let Some(nf) = &nf {
        systems.push(Equations::NormalForm(nf));
        names.push("normal form");
    }
    if systems.is_empty() {
        return Err(CliError::Missing { command: "verify-solution", what: "equations or a normal form" });
    }
    report.section("candidate", p.candidates.iter().map(|(u, e)| format!("{u} = {e}")).collect());
    let checks = verify_solution(&systems, &p.candidates, ws, s.seed).context("verify-solution")?;
    for c in checks {
        let label = names.iter().enumerate().fold(c.label.clone(), |l, (i, n)| l.replace(&format!("system {}", i + 1), n));
        let mut r = CheckReport::zero_test(label, c.verdict, s.seed);
        if !c.verdict.is_zero() {
            r = r.with_detail(format!("residual: {}", c.residual));
        }
        report.checks.push(r);
    }
    Ok(())
}

fn algebra_lines(sys: &PdeLieSystem, ws: &Workspace) -> Vec<String> {
    let vg = &sys.vg;
    let mut lines: Vec<String> =
        vg.generators.iter().enumerate().map(|(b, x)| format!("X{} = {}", b + 1, x.display(ws))).collect();
    lines.push(format!("dimension {}, closure depth {}", vg.dim(), vg.closure_depth));
    for b in 0..vg.dim() {
        for d in b + 1..vg.dim() {
            let terms: Vec<String> = vg.structure_constants[b][d]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != rat(0, 1))
                .map(|(g, c)| format!("({c})*X{}", g + 1))
                .collect();
            if !terms.is_empty() {
                lines.push(format!("[X{}, X{}] = {}", b + 1, d + 1, terms.join(" + ")));
            }
        }
    }
    for (j, row) in sys.coefficients.iter().enumerate() {
        let terms: Vec<String> = row.iter().enumerate().map(|(b, c)| format!("({c})*X{}", b + 1)).collect();
        lines.push(format!("Z{} = {}", j + 1, if terms.is_empty() { "0".into() } else { terms.join(" + ") }));
    }
    lines
}

fn liesys(p: &ProblemFile, s: &Settings, report: &mut Report) -> Result<(), CliError> {
    let ws = &p.workspace;
    let nf = normal_form(p, Command::SolveLiesys, s.seed, report)?;
    report.section("normal form", nf_lines(&nf, ws));
    let sys = match pde_lie_system(&nf, ws, s.cap) {
        Ok(sys) => sys,
        Err(Error::PreconditionFailed(m)) => {
            report.checks.push(CheckReport::flag("compatible", false, "Yes", "No").with_detail(m));
            return Ok(());
        }
        Err(e @ (Error::CapExceeded(_) | Error::NotSeparable(_))) => {
            report.checks.push(CheckReport::unknown("finite Vessiot-Guldberg algebra", e.to_string()));
            return Ok(());
        }
        Err(e) => return Err(e).context("solve-liesys"),
    };
    report.section("Vessiot-Guldberg algebra", algebra_lines(&sys, ws));
    report.checks.push(CheckReport::flag("structure constants antisymmetric", sys.vg.is_antisymmetric(), "Yes", "No"));
    report.checks.push(CheckReport::flag("Jacobi identity", sys.vg.satisfies_jacobi(), "Yes", "No"));
    let cfg = ZeroTest::with_seed(s.seed);
    for (j, r) in sys.decomposition_residuals(ws).context("decomposition")?.iter().enumerate() {
        report.checks.push(CheckReport::zero_test(format!("decomposition of Z{}", j + 1), is_zero_with(r, &cfg), s.seed));
    }
    match recognize_riccati(&sys, ws).context("riccati")? {
        RiccatiShape::Riccati(d) => {
            let mut lines = vec!["matrix Riccati shape".to_string()];
            for j in 0..ws.p() {
                for a in 0..ws.q() {
                    lines.push(format!("{}: {}", ws.d1(a, j), d.rhs(a, j, ws)));
                }
            }
            report.section("Riccati form", lines);
        }
        RiccatiShape::NotRiccati(why) => report.section("Riccati form", vec![format!("not of Riccati shape: {why}")]),
    }
    if ws.q() != 1 {
        return Ok(());
    }
    let opts = SolveOptions { gauge: p.options.gauge.clone(), seed: Some(s.seed) };
    match solve_solvable_q1(&sys, ws, &opts) {
        Ok(sol) => {
            report.section(
                "solution",
                vec![
                    format!("{}", sol.transform),
                    format!("w_H = {}", sol.w_h),
                    format!("w_N = {}", sol.w_n),
                    format!("w = {}", sol.w),
                    format!("u = {}", sol.u),
                ],
            );
            if !sol.elementary {
                report.checks.push(CheckReport::unknown("elementary integration", "an antiderivative stayed formal"));
            }
            for c in &sol.checks {
                let label = c.label.replace("system 1", "solution against the normal form");
                report.checks.push(CheckReport::zero_test(label, c.verdict, s.seed));
            }
        }
        Err(Error::NotSolvableShape(m)) => report.notes.push(format!("no closed-form solution: {m}")),
        Err(e) => return Err(e).context("solve"),
    }
    Ok(())
}
