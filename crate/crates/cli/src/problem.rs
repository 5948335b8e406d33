//! Problem files: a line-oriented, sectioned text format.
//!
//! ```text
//! # comment
//! [variables]
//! independent = x1, x2
//! dependent = u
//! parameters = lambda
//! functions = H(x1, x2)
//!
//! [pde]
//! "u_{x1,x2} = 2*u^3"
//!
//! [fields]
//! Y1 = "1", "0" | "u^2"
//!
//! [normal_form]
//! u_{x1} = "u^2"
//!
//! [ansatz]
//! family = polynomial(2)
//! complex = false
//!
//! [candidates]
//! u = "-1/(x1 + x2 + lambda)"
//!
//! [bindings]
//! c3 = "2"
//!
//! [options]
//! order = 2
//! seed = 0x1E755E3D
//! format = text
//! cap = 10
//! gauge = "h(t)"
//! force_direct = false
//! ```
//!
//! `[bindings]` specializes parameters for every command except
//! `derive-determining`, which keeps them symbolic.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use jetsym::condsym::{NormalFormSystem, PdeSystem};
use jetsym::expr::{parse, substitute, AnsatzFamily, Bindings, Expr, FamilyKind, Symbol, Workspace};
use jetsym::geometry::VectorFieldFamily;
use jetsym::jet::VectorField;

use crate::error::CliError;

const SECTIONS: &[&str] = &["variables", "pde", "fields", "normal_form", "ansatz", "candidates", "bindings", "options"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text or json)")),
        }
    }
}

/// Settings from `[options]`; command-line flags override them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Options {
    pub order: Option<u32>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub cap: Option<usize>,
    pub gauge: Option<Expr>,
    pub force_direct: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub complex: bool,
}

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub path: PathBuf,
    pub workspace: Workspace,
    /// Equations exactly as written, parameters symbolic.
    pub raw_pde: Option<PdeSystem>,
    pub pde: Option<PdeSystem>,
    pub fields: Option<(Vec<String>, VectorFieldFamily)>,
    pub normal_form: Option<NormalFormSystem>,
    pub ansatz: Option<AnsatzSpec>,
    pub candidates: Bindings,
    pub bindings: Bindings,
    pub options: Options,
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    key: Option<String>,
    value: String,
}

fn schema(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Schema { path: path.to_path_buf(), line, message: message.into() }
}

/// Splits `"a", "b, c"` into its quoted items.
fn quoted_list(path: &Path, line: usize, s: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('"') else {
            return Err(schema(path, line, format!("expected a quoted expression at `{rest}`")));
        };
        let Some(end) = body.find('"') else {
            return Err(schema(path, line, "unterminated quoted expression"));
        };
        out.push(body[..end].to_string());
        rest = body[end + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err(schema(path, line, "trailing comma"));
            }
        } else if !rest.is_empty() {
            return Err(schema(path, line, format!("unexpected text `{rest}`")));
        }
    }
    Ok(out)
}

fn single_quoted(path: &Path, e: &Entry) -> Result<String, CliError> {
    match quoted_list(path, e.line, &e.value)?.as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(schema(path, e.line, "expected exactly one quoted expression")),
    }
}

fn names(s: &str) -> Vec<String> {
    s.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect()
}

/// Drops a `#` comment that starts outside quotes.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn sections(path: &Path, text: &str) -> Result<BTreeMap<String, Vec<Entry>>, CliError> {
    let mut out: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = strip_comment(raw).trim();
        if t.is_empty() || t.starts_with(';') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(schema(path, line, format!("unknown section [{name}]")));
            }
            if out.contains_key(&name) {
                return Err(schema(path, line, format!("section [{name}] appears twice")));
            }
            out.insert(name.clone(), Vec::new());
            current = Some(name);
            continue;
        }
        let Some(section) = &current else {
            return Err(schema(path, line, "content before the first section"));
        };
        let entry = if t.starts_with('"') {
            Entry { line, key: None, value: t.to_string() }
        } else {
            let Some((k, v)) = t.split_once('=') else {
                return Err(schema(path, line, "expected `key = value` or a quoted expression"));
            };
            Entry { line, key: Some(k.trim().to_string()), value: v.trim().to_string() }
        };
        out.get_mut(section).unwrap().push(entry);
    }
    Ok(out)
}

fn expr_at(path: &Path, line: usize, src: &str, ws: &Workspace) -> Result<Expr, CliError> {
    parse(src, ws).map_err(|e| CliError::Expression { path: path.to_path_buf(), line, source: e })
}

fn core_at(path: &Path, line: usize) -> impl Fn(jetsym::Error) -> CliError + '_ {
    move |e| CliError::Expression { path: path.to_path_buf(), line, source: e }
}

fn parse_family(path: &Path, line: usize, s: &str, ws: &Workspace) -> Result<AnsatzFamily, CliError> {
    let s = s.trim();
    let (name, arg) = match s.split_once('(') {
        Some((n, rest)) => {
            let a = rest.strip_suffix(')').ok_or_else(|| schema(path, line, "missing `)` in family"))?;
            let v: u32 = a.trim().parse().map_err(|_| schema(path, line, format!("bad family parameter `{a}`")))?;
            (n.trim(), Some(v))
        }
        None => (s, None),
    };
    let kind = match (name, arg) {
        ("polynomial", Some(d)) => FamilyKind::Polynomial { degree: d },
        ("exponential", Some(k)) => FamilyKind::Exponential { kmax: k },
        ("trigonometric", Some(n)) => FamilyKind::Trigonometric { nmax: n },
        ("hyperbolic", None) => FamilyKind::Hyperbolic,
        _ => return Err(schema(path, line, format!("unknown ansatz family `{s}`"))),
    };
    AnsatzFamily::new(kind, ws.dependent()).map_err(core_at(path, line))
}

fn parse_bool(path: &Path, line: usize, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(schema(path, line, format!("expected true or false, got `{v}`"))),
    }
}

pub fn parse_seed(s: &str) -> Option<u64> {
    let t = s.trim();
    let hex = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u64::from_str_radix(&hex.replace('_', ""), 16).ok()
}

fn workspace(path: &Path, entries: &[Entry], jet_cap: u32) -> Result<Workspace, CliError> {
    let mut lists: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for e in entries {
        let key = e.key.as_deref().ok_or_else(|| schema(path, e.line, "expected `key = value`"))?;
        if !["independent", "dependent", "parameters", "functions"].contains(&key) {
            return Err(schema(path, e.line, format!("unknown key `{key}` in [variables]")));
        }
        lists.insert(key, (e.line, e.value.clone()));
    }
    let get = |k: &str| lists.get(k).map(|(l, v)| (*l, v.clone()));
    let (line, indep) = get("independent").ok_or_else(|| schema(path, 0, "[variables] needs `independent`"))?;
    let (_, dep) = get("dependent").ok_or_else(|| schema(path, line, "[variables] needs `dependent`"))?;
    let indep = names(&indep);
    let dep = names(&dep);
    let iv: Vec<&str> = indep.iter().map(String::as_str).collect();
    let dv: Vec<&str> = dep.iter().map(String::as_str).collect();
    let mut ws = Workspace::new(&iv, &dv, jet_cap).map_err(core_at(path, line))?;
    if let Some((line, ps)) = get("parameters") {
        for p in names(&ps) {
            ws.add_parameter(&p).map_err(core_at(path, line))?;
        }
    }
    if let Some((line, fs)) = get("functions") {
        let mut rest = fs.as_str();
        while !rest.trim().is_empty() {
            let open = rest.find('(').ok_or_else(|| schema(path, line, "function declarations look like `h(t)`"))?;
            let close = rest.find(')').ok_or_else(|| schema(path, line, "missing `)` in function declaration"))?;
            let name = rest[..open].trim().trim_start_matches(',').trim();
            let mut args: Vec<Symbol> = Vec::new();
            for a in names(&rest[open + 1..close]) {
                let s = ws.lookup(&a).filter(Symbol::is_independent);
                args.push(s.ok_or_else(|| schema(path, line, format!("`{a}` is not an independent variable")))?);
            }
            ws.add_function(name, &args).map_err(core_at(path, line))?;
            rest = &rest[close + 1..];
        }
    }
    Ok(ws)
}

/// Reads and validates a problem file.
pub fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_problem(path, &text)
}

pub fn parse_problem(path: &Path, text: &str) -> Result<ProblemFile, CliError> {
    let secs = sections(path, text)?;
    let empty = Vec::new();
    let sec = |n: &str| secs.get(n).unwrap_or(&empty);

    let mut options = Options::default();
    let mut gauge_src = None;
    for e in sec("options") {
        let key = e.key.as_deref().ok_or_else(|| schema(path, e.line, "expected `key = value`"))?;
        let v = e.value.as_str();
        match key {
            "order" => options.order = Some(v.parse().map_err(|_| schema(path, e.line, format!("bad order `{v}`")))?),
            "seed" => options.seed = Some(parse_seed(v).ok_or_else(|| schema(path, e.line, format!("bad hex seed `{v}`")))?),
            "format" => options.format = Some(v.parse().map_err(|m: String| schema(path, e.line, m))?),
            "cap" => options.cap = Some(v.parse().map_err(|_| schema(path, e.line, format!("bad cap `{v}`")))?),
            "gauge" => gauge_src = Some(e.clone()),
            "force_direct" => options.force_direct = Some(parse_bool(path, e.line, v)?),
            other => return Err(schema(path, e.line, format!("unknown option `{other}`"))),
        }
    }

    let vars = secs.get("variables").ok_or_else(|| schema(path, 0, "missing [variables] section"))?;
    let ws = workspace(path, vars, options.order.unwrap_or(2).max(2))?;

    let mut bindings = Bindings::new();
    for e in sec("bindings") {
        let key = e.key.as_deref().ok_or_else(|| schema(path, e.line, "expected `parameter = \"value\"`"))?;
        let s = ws.lookup(key).filter(|s| !s.is_independent() && !s.is_dependent() && !s.is_jet());
        let s = s.ok_or_else(|| schema(path, e.line, format!("`{key}` is not a declared parameter")))?;
        bindings.insert(s, expr_at(path, e.line, &single_quoted(path, e)?, &ws)?);
    }
    let bind = |x: Expr, line: usize| -> Result<Expr, CliError> {
        if bindings.is_empty() {
            Ok(x)
        } else {
            substitute(&x, &bindings).map_err(core_at(path, line))
        }
    };

    if let Some(e) = gauge_src {
        options.gauge = Some(bind(expr_at(path, e.line, &single_quoted(path, &e)?, &ws)?, e.line)?);
    }

    let (mut raw, mut bound) = (Vec::new(), Vec::new());
    for e in sec("pde") {
        if e.key.is_some() {
            return Err(schema(path, e.line, "[pde] lines are quoted equations"));
        }
        for src in quoted_list(path, e.line, &e.value)? {
            let d = match src.split_once('=') {
                Some((l, r)) => expr_at(path, e.line, l, &ws)? - expr_at(path, e.line, r, &ws)?,
                None => expr_at(path, e.line, &src, &ws)?,
            };
            bound.push(bind(d.clone(), e.line)?);
            raw.push(d);
        }
    }
    let first_line = sec("pde").first().map_or(0, |e| e.line);
    let (raw_pde, pde) = if raw.is_empty() {
        (None, None)
    } else {
        (
            Some(PdeSystem::new(&ws, raw).map_err(core_at(path, first_line))?),
            Some(PdeSystem::new(&ws, bound).map_err(core_at(path, first_line))?),
        )
    };

    let mut field_names = Vec::new();
    let mut members = Vec::new();
    for e in sec("fields") {
        let name = e.key.clone().ok_or_else(|| schema(path, e.line, "fields look like `Y1 = \"xi\", ... | \"phi\", ...`"))?;
        let (xi, phi) = e.value.split_once('|').ok_or_else(|| schema(path, e.line, "missing `|` between xi and phi"))?;
        let xi = quoted_list(path, e.line, xi)?;
        let phi = quoted_list(path, e.line, phi)?;
        if xi.len() != ws.p() || phi.len() != ws.q() {
            return Err(schema(path, e.line, format!("expected {} xi and {} phi coefficients", ws.p(), ws.q())));
        }
        let xi = xi.iter().map(|s| bind(expr_at(path, e.line, s, &ws)?, e.line)).collect::<Result<_, _>>()?;
        let phi = phi.iter().map(|s| bind(expr_at(path, e.line, s, &ws)?, e.line)).collect::<Result<_, _>>()?;
        members.push(VectorField::new(xi, phi).map_err(core_at(path, e.line))?);
        field_names.push(name);
    }
    let fields = if members.is_empty() {
        None
    } else {
        let line = sec("fields")[0].line;
        Some((field_names, VectorFieldFamily::new(members).map_err(core_at(path, line))?))
    };

    let normal_form = if sec("normal_form").is_empty() {
        None
    } else {
        let mut phi: Vec<Vec<Option<Expr>>> = vec![vec![None; ws.p()]; ws.q()];
        for e in sec("normal_form") {
            let key = e.key.as_deref().ok_or_else(|| schema(path, e.line, "expected `u_{x} = \"rhs\"`"))?;
            let sym = parse(key, &ws).ok().and_then(|e| e.as_sym().cloned());
            let jet = sym.and_then(|s| s.jet_data(ws.p())).filter(|(_, k)| k.order() == 1);
            let (alpha, k) = jet.ok_or_else(|| schema(path, e.line, format!("`{key}` is not a first-order jet")))?;
            let slot = k.counts().iter().position(|&c| c == 1).unwrap();
            if phi[alpha][slot].is_some() {
                return Err(schema(path, e.line, format!("`{key}` given twice")));
            }
            phi[alpha][slot] = Some(bind(expr_at(path, e.line, &single_quoted(path, e)?, &ws)?, e.line)?);
        }
        let line = sec("normal_form")[0].line;
        let rows = phi
            .into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| schema(path, line, "[normal_form] must give every first-order derivative"))?;
        Some(NormalFormSystem::new(&ws, rows).map_err(core_at(path, line))?)
    };

    let ansatz = if sec("ansatz").is_empty() {
        None
    } else {
        let (mut family, mut complex) = (None, false);
        for e in sec("ansatz") {
            match e.key.as_deref() {
                Some("family") => family = Some(parse_family(path, e.line, &e.value, &ws)?),
                Some("complex") => complex = parse_bool(path, e.line, &e.value)?,
                _ => return Err(schema(path, e.line, "[ansatz] takes `family` and `complex`")),
            }
        }
        let line = sec("ansatz")[0].line;
        Some(AnsatzSpec { family: family.ok_or_else(|| schema(path, line, "[ansatz] needs `family`"))?, complex })
    };

    let mut candidates = Bindings::new();
    for e in sec("candidates") {
        let key = e.key.as_deref().ok_or_else(|| schema(path, e.line, "expected `u = \"expr\"`"))?;
        let s = ws.lookup(key).filter(Symbol::is_dependent);
        let s = s.ok_or_else(|| schema(path, e.line, format!("`{key}` is not a dependent variable")))?;
        candidates.insert(s, bind(expr_at(path, e.line, &single_quoted(path, e)?, &ws)?, e.line)?);
    }

    Ok(ProblemFile {
        path: path.to_path_buf(),
        workspace: ws,
        raw_pde,
        pde,
        fields,
        normal_form,
        ansatz,
        candidates,
        bindings,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<ProblemFile, CliError> {
        parse_problem(Path::new("t.jetsym"), text)
    }

    #[test]
    fn fields_only_problem() {
        let p = load("[variables]\nindependent = x, t # coordinates\ndependent = u\n[fields]\nY1 = \"1\", \"0\" | \"1\"  # first\nY2 = \"0\", \"1\" | \"x\"\n").unwrap();
        assert!(p.pde.is_none());
        assert_eq!(p.fields.unwrap().1.len(), 2);
    }

    #[test]
    fn schema_errors_carry_lines() {
        let err = load("[variables]\nindependent = x\ndependent = u\n[pde]\n\"u_{x} = \"\n").unwrap_err();
        assert!(matches!(err, CliError::Expression { line: 5, .. }), "{err:?}");
        let err = load("[variables]\nindependent = x\ndependent = u\n[colors]\n").unwrap_err();
        assert!(matches!(err, CliError::Schema { line: 4, .. }), "{err:?}");
        let err = load("[variables]\nindependent = x\n").unwrap_err();
        assert!(matches!(err, CliError::Schema { .. }));
        let err = load("[variables]\nindependent = x\ndependent = u\n[fields]\nY = \"1\" | \"1\", \"2\"\n").unwrap_err();
        assert!(matches!(err, CliError::Schema { line: 5, .. }));
    }

    #[test]
    fn bindings_and_options() {
        let p = load(
            "[variables]\nindependent = x1, x2\ndependent = u\nparameters = c\nfunctions = h(x1)\n\
             [pde]\n\"u_{x1,x2} = c*u^3 + h(x1)\"\n[bindings]\nc = \"2\"\n[options]\nseed = 0xABC\nformat = json\n",
        )
        .unwrap();
        assert_eq!(p.options.seed, Some(0xABC));
        assert_eq!(p.options.format, Some(Format::Json));
        let ws = &p.workspace;
        assert_eq!(p.pde.unwrap().deltas()[0], jetsym::expr::normalize(&parse("u_{x1,x2} - 2*u^3 - h(x1)", ws).unwrap()).unwrap());
        assert!(p.raw_pde.unwrap().deltas()[0].contains_symbol(&ws.lookup("c").unwrap()));
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0x1E75_5E3D"), Some(0x1E75_5E3D));
        assert_eq!(parse_seed("ff"), Some(255));
        assert_eq!(parse_seed("0xzz"), None);
    }
}
