use std::collections::BTreeSet;

use jetsym::condsym::{
    build_complex_ansatz, determining_system, monic, verify_solution, Equations, NormalFormSystem, PdeSystem,
};
use jetsym::expr::{parse, AnsatzFamily, Bindings, Expr, FamilyKind, Verdict, Workspace, DEFAULT_SEED};
use jetsym::liesys::{pde_lie_system, solve_solvable_q1, SolveOptions, Transform, DEFAULT_CAP};

fn expand(s: &str) -> String {
    let mut out = s.to_string();
    for k in 0..3 {
        out = out.replace(&format!("r{k}"), &format!("eta{k}_re(x1,x2)")).replace(&format!("s{k}"), &format!("eta{k}_im(x1,x2)"));
    }
    out.replace("Hf", "H(x1,x2)").replace("Qr", "Qr(x1,x2)").replace("Qi", "Qi(x1,x2)")
}

#[test]
fn gauss_codazzi_conditions() {
    let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
    let args = ws.independent().to_vec();
    for f in ["H", "Qr", "Qi"] {
        ws.add_function(f, &args).unwrap();
    }
    let family = AnsatzFamily::new(FamilyKind::Exponential { kmax: 1 }, ws.dependent()).unwrap();
    let ans = build_complex_ansatz(&family, &ws).unwrap();
    let aws = ans.workspace();
    let pde = PdeSystem::parse(aws, &["(u_{x1,x1} + u_{x2,x2})/4 + H(x1,x2)^2*exp(u)/2 - 2*(Qr(x1,x2)^2 + Qi(x1,x2)^2)*exp(-u)"])
        .unwrap();
    let det = determining_system(&pde, &ans).unwrap();
    let p = |s: &str| monic(&parse(&expand(s), aws).unwrap()).unwrap();

    let got: BTreeSet<Expr> = det.pde_eqs.iter().map(|e| monic(&e.expr).unwrap()).collect();
    let want: BTreeSet<Expr> = [
        "(diff(r0,x1) - diff(s0,x2))/2",
        "(diff(r1,x1) - diff(s1,x2))/2 - (r0*r1 + s0*s1)/2",
        "(diff(r2,x1) - diff(s2,x2))/2 + (r0*r2 + s0*s2)/2",
        "Hf^2 + r2^2 + s2^2",
        "r1^2 + s1^2 + 4*(Qr^2 + Qi^2)",
    ]
    .iter()
    .map(|s| p(s))
    .collect();
    assert_eq!(got, want);

    let got: BTreeSet<Expr> = det.compatibility_eqs.iter().map(|e| monic(&e.expr).unwrap()).collect();
    let want: BTreeSet<Expr> = [
        "(diff(s0,x1) + diff(r0,x2))/2 + s2*r1 - r2*s1",
        "(diff(s1,x1) + diff(r1,x2))/2 - (r0*s1 - r1*s0)/2",
        "(diff(s2,x1) + diff(r2,x2))/2 + (r0*s2 - s0*r2)/2",
    ]
    .iter()
    .map(|s| p(s))
    .collect();
    assert_eq!(got, want);
}

#[test]
fn gauss_codazzi_integration() {
    // eta0 = 0, alpha(z) = exp(z)
    let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
    let nf = NormalFormSystem::parse(&ws, &[&["exp(x1)*cos(x2)*exp(-u/2)", "-exp(x1)*sin(x2)*exp(-u/2)"]]).unwrap();
    let sys = pde_lie_system(&nf, &ws, DEFAULT_CAP).unwrap();
    assert_eq!(sys.vg.dim(), 1);
    let s = solve_solvable_q1(&sys, &ws, &SolveOptions::default()).unwrap();
    assert_eq!(s.transform, Transform::ExpHalf);
    assert!(s.elementary);
    assert!(s.checks.iter().all(|c| c.verdict == Verdict::Zero { probabilistic: false }), "{:?}", s.checks);
}

fn liouville_ws(extra: &[&str]) -> Workspace {
    let mut ws = Workspace::new(&["t", "x1", "x2"], &["u"], 3).unwrap();
    let t = ws.x(0).clone();
    for f in extra {
        ws.add_function(f, &[t.clone()]).unwrap();
    }
    ws.add_parameter("lambda").unwrap();
    ws
}

const GLE: &str = "u_{t,x1,x1} + u_{t,x2,x2} - (u_{x1}*u_{t,x1} + u_{x2}*u_{t,x2})";

fn dc3(ws: &Workspace, up: &str, w: &str, factor: &str) -> NormalFormSystem {
    let row: Vec<Expr> = ["t", "x1", "x2"]
        .iter()
        .map(|x| {
            let src = format!("diff({up},{x}) + {factor}*diff({w},{x})*exp((u - ({up}))/2)");
            parse(&src, ws).unwrap()
        })
        .collect();
    NormalFormSystem::new(ws, vec![row]).unwrap()
}

fn check(ws: &Workspace, nf: &NormalFormSystem, u: &str) -> Vec<Verdict> {
    let pde = PdeSystem::parse(ws, &[GLE]).unwrap();
    let cand: Bindings = [(ws.u(0).clone(), parse(u, ws).unwrap())].into();
    verify_solution(&[Equations::Pde(&pde), Equations::NormalForm(nf)], &cand, ws, DEFAULT_SEED)
        .unwrap()
        .into_iter()
        .map(|c| c.verdict)
        .collect()
}

#[test]
fn liouville_harmonic_instance() {
    let ws = liouville_ws(&["h"]);
    let nf = dc3(&ws, "h(t)", "x1^2 - x2^2", "-2");
    let v = check(&ws, &nf, "h(t) - 2*log(x1^2 - x2^2 + lambda)");
    assert_eq!(v.len(), 4);
    assert!(v.iter().all(|v| v.is_zero()), "{v:?}");

    let literal = dc3(&ws, "h(t)", "x1^2 - x2^2", "1");
    let v = check(&ws, &literal, "h(t) - 2*log(x1^2 - x2^2 + lambda)");
    assert!(v.contains(&Verdict::NonZero), "{v:?}");
}

#[test]
fn liouville_multi_mode_instance() {
    let ws = liouville_ws(&[]);
    let up = "t + log(2*x1) + log(2*x2)";
    let w = "exp(t) + x1^2 + x2^2";
    let nf = dc3(&ws, up, w, "-2");
    let u = "log(exp(t)*(2*x1)*(2*x2)/(exp(t) + x1^2 + x2^2 + lambda)^2)";
    let v = check(&ws, &nf, u);
    assert!(v.iter().all(|v| v.is_zero()), "{v:?}");
}
