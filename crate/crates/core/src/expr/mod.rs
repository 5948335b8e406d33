//! Symbolic expression IR.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Construction through the
//! operators and helper constructors is purely syntactic; [`normalize`] maps any
//! tree to its canonical form (see [`canon`]). All operations return fresh values
//! and `Expr` is `Send + Sync`, so callers may share expressions across threads.

pub(crate) mod canon;
mod collect;
pub(crate) mod diff;
mod eval;
mod parse;
mod print;
pub(crate) mod subst;
mod workspace;
pub(crate) mod zero;

use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::multiindex::MultiIndex;

pub use canon::normalize;
pub use collect::{collect, AnsatzFamily, FamilyKind};
pub use diff::diff;
pub use eval::{eval, EvalError, Point};
pub use parse::parse;
pub use subst::{substitute, substitute_functions, Bindings};
pub use workspace::Workspace;
pub use zero::{is_zero, is_zero_with, ZeroTest, Verdict, DEFAULT_SEED};

pub(crate) use canon::{Frac, Poly};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// What a symbol stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Independent(usize),
    Dependent(usize),
    /// Jet coordinate `u^alpha_K` with `|K| >= 1`.
    Jet(usize, MultiIndex),
    Parameter,
}

impl SymbolKind {
    fn rank(&self) -> (u8, std::cmp::Reverse<u32>, usize) {
        match self {
            SymbolKind::Jet(a, k) => (0, std::cmp::Reverse(k.order()), *a),
            SymbolKind::Dependent(a) => (1, std::cmp::Reverse(0), *a),
            SymbolKind::Independent(i) => (2, std::cmp::Reverse(0), *i),
            SymbolKind::Parameter => (3, std::cmp::Reverse(0), 0),
        }
    }
}

impl Ord for SymbolKind {
    /// Canonical order: jets (higher order first), dependent, independent, parameters.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank()).then_with(|| match (self, other) {
            (SymbolKind::Jet(_, k), SymbolKind::Jet(_, l)) => k.cmp(l),
            _ => std::cmp::Ordering::Equal,
        })
    }
}

impl PartialOrd for SymbolKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    kind: SymbolKind,
    name: Arc<str>,
}

impl Symbol {
    pub(crate) fn new(name: &str, kind: SymbolKind) -> Self {
        Symbol { kind, name: Arc::from(name) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    pub fn is_independent(&self) -> bool {
        matches!(self.kind, SymbolKind::Independent(_))
    }

    pub fn is_dependent(&self) -> bool {
        matches!(self.kind, SymbolKind::Dependent(_))
    }

    pub fn is_jet(&self) -> bool {
        matches!(self.kind, SymbolKind::Jet(..))
    }

    /// `(alpha, K)` for dependent variables (`K = 0`) and jet coordinates.
    pub fn jet_data(&self, p: usize) -> Option<(usize, MultiIndex)> {
        match &self.kind {
            SymbolKind::Dependent(a) => Some((*a, MultiIndex::zero(p))),
            SymbolKind::Jet(a, k) => Some((*a, k.clone())),
            _ => None,
        }
    }

    pub fn jet_order(&self) -> u32 {
        match &self.kind {
            SymbolKind::Jet(_, k) => k.order(),
            _ => 0,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Log => "log",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Sinh => "sinh",
            Kernel::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Kernel> {
        Some(match name {
            "exp" => Kernel::Exp,
            "log" => Kernel::Log,
            "sin" => Kernel::Sin,
            "cos" => Kernel::Cos,
            "sinh" => Kernel::Sinh,
            "cosh" => Kernel::Cosh,
            _ => return None,
        })
    }
}

/// An unknown function `f(args)` or one of its formal partial derivatives.
/// `orders[k]` counts differentiations in `args[k]`; mixed partials are symmetric.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncApp {
    pub name: Arc<str>,
    pub args: Vec<Symbol>,
    pub orders: Vec<u32>,
}

impl FuncApp {
    pub fn is_derivative(&self) -> bool {
        self.orders.iter().any(|&o| o > 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, i64),
    Kernel(Kernel, Expr),
    Func(FuncApp),
    /// Formal antiderivative `integrate(f, x)`.
    Integral(Expr, Symbol),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn zero() -> Self {
        Expr::new(Node::Num(Rational::zero()))
    }

    pub fn one() -> Self {
        Expr::new(Node::Num(Rational::one()))
    }

    pub fn int(n: i64) -> Self {
        Expr::new(Node::Num(Rational::from_integer(BigInt::from(n))))
    }

    pub fn rational(q: Rational) -> Self {
        Expr::new(Node::Num(q))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::rational(rat(n, d))
    }

    pub fn sym(s: &Symbol) -> Self {
        Expr::new(Node::Sym(s.clone()))
    }

    pub fn add(terms: Vec<Expr>) -> Self {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::new(Node::Add(terms)),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Self {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::new(Node::Mul(factors)),
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        Expr::new(Node::Pow(self.clone(), n))
    }

    pub fn kernel(k: Kernel, arg: Expr) -> Self {
        Expr::new(Node::Kernel(k, arg))
    }

    pub fn exp(arg: Expr) -> Self {
        Expr::kernel(Kernel::Exp, arg)
    }

    pub fn log(arg: Expr) -> Self {
        Expr::kernel(Kernel::Log, arg)
    }

    pub fn sin(arg: Expr) -> Self {
        Expr::kernel(Kernel::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Self {
        Expr::kernel(Kernel::Cos, arg)
    }

    pub fn func(name: &str, args: &[Symbol]) -> Self {
        Expr::new(Node::Func(FuncApp {
            name: Arc::from(name),
            args: args.to_vec(),
            orders: vec![0; args.len()],
        }))
    }

    pub fn integral(f: Expr, x: &Symbol) -> Self {
        Expr::new(Node::Integral(f, x.clone()))
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    /// Literal zero. Meaningful as a zero test only on normalized expressions.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_one())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.node(), Node::Num(_))
    }

    pub fn is_negative_number(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_negative())
    }

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::Sym(_) | Node::Func(_) => vec![],
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
            Node::Pow(b, _) => vec![b],
            Node::Kernel(_, a) => vec![a],
            Node::Integral(f, _) => vec![f],
        }
    }

    pub fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn free_symbols(&self) -> std::collections::BTreeSet<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<Symbol>) {
        match self.node() {
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Func(f) => {
                out.extend(f.args.iter().cloned());
            }
            Node::Integral(f, x) => {
                f.collect_symbols(out);
                out.insert(x.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_symbols(out);
                }
            }
        }
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.any(&|e| match e.node() {
            Node::Sym(t) => t == s,
            Node::Func(f) => f.args.contains(s),
            Node::Integral(_, x) => x == s,
            _ => false,
        })
    }

    /// True when unknown functions or formal integrals occur, which blocks numeric sampling.
    pub fn is_opaque(&self) -> bool {
        self.any(&|e| matches!(e.node(), Node::Func(_) | Node::Integral(..)))
    }

    pub fn contains_jets(&self) -> bool {
        self.any(&|e| matches!(e.node(), Node::Sym(s) if s.is_jet()))
    }

    /// Highest jet order among free symbols.
    pub fn jet_order(&self) -> u32 {
        self.free_symbols().iter().map(Symbol::jet_order).max().unwrap_or(0)
    }

    /// Unknown-function applications (including formal derivatives) occurring in `self`.
    pub fn function_apps(&self) -> std::collections::BTreeSet<FuncApp> {
        let mut out = std::collections::BTreeSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if let Node::Func(f) = e.node() {
                out.insert(f.clone());
            }
            stack.extend(e.children());
        }
        out
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Self {
        Expr::sym(s)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Self {
        Expr::rational(q)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add(vec![a, Expr::mul(vec![Expr::int(-1), b])]));
binop!(Mul, mul, |a, b| Expr::mul(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul(vec![a, b.pow(-1)]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self)
    }
}

/// Numerically sized constant check used by several modules: `Some(q)` when the
/// normalized expression is a rational number.
pub fn constant_value(e: &Expr) -> Option<Rational> {
    e.as_num().cloned()
}

/// Integer as an exact rational.
pub fn ri(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
