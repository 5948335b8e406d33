use std::collections::BTreeMap;

use super::{Expr, Symbol, SymbolKind};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;

/// Coordinate chart for `J^n` over `X x U`: `p` independent variables, `q`
/// dependent variables, a working jet-order cap and the registered parameters
/// and unknown functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workspace {
    independent: Vec<Symbol>,
    dependent: Vec<Symbol>,
    jet_cap: u32,
    hard_limit: u32,
    parameters: Vec<Symbol>,
    functions: BTreeMap<String, Vec<Symbol>>,
}

/// How far above the working cap total derivatives may go before failing.
const HARD_LIMIT_MARGIN: u32 = 2;

impl Workspace {
    pub fn new(independent: &[&str], dependent: &[&str], jet_cap: u32) -> Result<Self> {
        if independent.is_empty() || dependent.is_empty() {
            return Err(Error::Workspace("need at least one independent and one dependent variable".into()));
        }
        if jet_cap == 0 {
            return Err(Error::Workspace("jet order cap must be at least 1".into()));
        }
        let mut ws = Workspace {
            independent: Vec::new(),
            dependent: Vec::new(),
            jet_cap,
            hard_limit: jet_cap + HARD_LIMIT_MARGIN,
            parameters: Vec::new(),
            functions: BTreeMap::new(),
        };
        for (i, name) in independent.iter().enumerate() {
            ws.check_fresh(name)?;
            ws.independent.push(Symbol::new(name, SymbolKind::Independent(i)));
        }
        for (a, name) in dependent.iter().enumerate() {
            ws.check_fresh(name)?;
            ws.dependent.push(Symbol::new(name, SymbolKind::Dependent(a)));
        }
        Ok(ws)
    }

    fn check_fresh(&self, name: &str) -> Result<()> {
        if !is_identifier(name) {
            return Err(Error::Workspace(format!("`{name}` is not a valid identifier")));
        }
        if super::Kernel::from_name(name).is_some() || name == "diff" || name == "integrate" {
            return Err(Error::Workspace(format!("`{name}` is reserved")));
        }
        if self.lookup(name).is_some() || self.functions.contains_key(name) {
            return Err(Error::Workspace(format!("`{name}` is already registered")));
        }
        Ok(())
    }

    pub fn add_parameter(&mut self, name: &str) -> Result<Symbol> {
        self.check_fresh(name)?;
        let s = Symbol::new(name, SymbolKind::Parameter);
        self.parameters.push(s.clone());
        Ok(s)
    }

    /// Registers an unknown function of the given independent variables.
    pub fn add_function(&mut self, name: &str, args: &[Symbol]) -> Result<Expr> {
        self.check_fresh(name)?;
        for a in args {
            if !self.independent.contains(a) && !self.parameters.contains(a) {
                return Err(Error::Workspace(format!(
                    "argument `{a}` of `{name}` must be an independent variable"
                )));
            }
        }
        self.functions.insert(name.to_string(), args.to_vec());
        Ok(Expr::func(name, args))
    }

    pub fn p(&self) -> usize {
        self.independent.len()
    }

    pub fn q(&self) -> usize {
        self.dependent.len()
    }

    pub fn jet_cap(&self) -> u32 {
        self.jet_cap
    }

    pub fn hard_limit(&self) -> u32 {
        self.hard_limit
    }

    pub fn with_jet_cap(mut self, cap: u32) -> Self {
        self.jet_cap = cap.max(1);
        self.hard_limit = self.jet_cap + HARD_LIMIT_MARGIN;
        self
    }

    pub fn independent(&self) -> &[Symbol] {
        &self.independent
    }

    pub fn dependent(&self) -> &[Symbol] {
        &self.dependent
    }

    pub fn parameters(&self) -> &[Symbol] {
        &self.parameters
    }

    pub fn functions(&self) -> &BTreeMap<String, Vec<Symbol>> {
        &self.functions
    }

    pub fn x(&self, i: usize) -> &Symbol {
        &self.independent[i]
    }

    pub fn u(&self, alpha: usize) -> &Symbol {
        &self.dependent[alpha]
    }

    pub fn x_expr(&self, i: usize) -> Expr {
        Expr::sym(&self.independent[i])
    }

    pub fn u_expr(&self, alpha: usize) -> Expr {
        Expr::sym(&self.dependent[alpha])
    }

    /// The jet coordinate `u^alpha_K`; for `|K| = 0` this is the dependent symbol itself.
    pub fn jet(&self, alpha: usize, k: &MultiIndex) -> Symbol {
        if k.is_zero() {
            return self.dependent[alpha].clone();
        }
        let subs: Vec<&str> = k.slots().into_iter().map(|i| self.independent[i].name()).collect();
        let name = format!("{}_{{{}}}", self.dependent[alpha].name(), subs.join(","));
        Symbol::new(&name, SymbolKind::Jet(alpha, k.clone()))
    }

    pub fn jet_expr(&self, alpha: usize, k: &MultiIndex) -> Expr {
        Expr::sym(&self.jet(alpha, k))
    }

    /// First-order jet `u^alpha_{x_i}`.
    pub fn d1(&self, alpha: usize, i: usize) -> Symbol {
        self.jet(alpha, &MultiIndex::unit(self.p(), i))
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.independent
            .iter()
            .chain(&self.dependent)
            .chain(&self.parameters)
            .find(|s| s.name() == name)
            .cloned()
    }

    pub fn function_args(&self, name: &str) -> Option<&[Symbol]> {
        self.functions.get(name).map(Vec::as_slice)
    }

    pub fn slot_of(&self, s: &Symbol) -> Option<usize> {
        match s.kind() {
            SymbolKind::Independent(i) => Some(*i),
            _ => None,
        }
    }

    /// A name not yet used in this workspace, built from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if self.check_fresh(base).is_ok() {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| self.check_fresh(n).is_ok())
            .unwrap()
    }

}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    let rest: Vec<char> = chars.collect();
    for (i, c) in rest.iter().enumerate() {
        if !(c.is_ascii_alphanumeric() || *c == '_') {
            return false;
        }
        if *c == '_' && rest.get(i + 1) == Some(&'{') {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_names_and_identity_at_order_zero() {
        let ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let k = MultiIndex::from_counts(vec![2, 1]);
        assert_eq!(ws.jet(0, &k).name(), "u_{x1,x1,x2}");
        assert_eq!(ws.jet(0, &MultiIndex::zero(2)), ws.u(0).clone());
    }

    #[test]
    fn names_are_unique() {
        let mut ws = Workspace::new(&["x"], &["u"], 1).unwrap();
        assert!(ws.add_parameter("u").is_err());
        assert!(ws.add_parameter("exp").is_err());
        ws.add_parameter("lambda").unwrap();
        let x = ws.x(0).clone();
        ws.add_function("a", &[x]).unwrap();
        assert!(ws.add_parameter("a").is_err());
        assert!(Workspace::new(&[], &["u"], 1).is_err());
        assert!(Workspace::new(&["x"], &["u"], 0).is_err());
    }
}
