use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eval, Expr, Frac, Point, Symbol};

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x1E75_5E3D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// `probabilistic` is false when the canonical form is literally 0.
    Zero { probabilistic: bool },
    NonZero,
    Unknown,
}

impl Verdict {
    pub fn is_zero(self) -> bool {
        matches!(self, Verdict::Zero { .. })
    }

    /// Conjunction over several checks: any NonZero wins, then any Unknown.
    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Zero { probabilistic: false };
        for v in vs {
            out = match (out, v) {
                (Verdict::NonZero, _) | (_, Verdict::NonZero) => Verdict::NonZero,
                (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
                (Verdict::Zero { probabilistic: a }, Verdict::Zero { probabilistic: b }) => {
                    Verdict::Zero { probabilistic: a || b }
                }
            };
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Zero { probabilistic: false } => "Zero",
            Verdict::Zero { probabilistic: true } => "Zero (probabilistic)",
            Verdict::NonZero => "NonZero",
            Verdict::Unknown => "Unknown",
        })
    }
}

/// Sampling parameters for the numeric fallback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTest {
    pub samples: usize,
    pub seed: u64,
    pub rel_tol: f64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { samples: 8, seed: DEFAULT_SEED, rel_tol: 1e-9 }
    }
}

impl ZeroTest {
    pub fn with_seed(seed: u64) -> Self {
        ZeroTest { seed, ..Self::default() }
    }
}

pub fn is_zero(e: &Expr) -> Verdict {
    is_zero_with(e, &ZeroTest::default())
}

pub fn is_zero_with(e: &Expr, cfg: &ZeroTest) -> Verdict {
    match Frac::from_expr(e) {
        Ok(f) => frac_is_zero(&f, cfg),
        Err(_) => Verdict::Unknown,
    }
}

pub(crate) fn frac_is_zero(f: &Frac, cfg: &ZeroTest) -> Verdict {
    if f.is_zero() {
        return Verdict::Zero { probabilistic: false };
    }
    let terms: Vec<Expr> = f.num().terms().map(|(m, c)| m.to_expr(c)).collect();
    if terms.iter().any(Expr::is_opaque) {
        return Verdict::Unknown;
    }
    if f.constant_value().is_some() {
        return Verdict::NonZero;
    }
    let symbols: Vec<Symbol> = terms.iter().flat_map(|t| t.free_symbols()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut good = 0;
    let mut attempts = 0;
    while good < cfg.samples && attempts < cfg.samples * 6 {
        attempts += 1;
        let at = random_point(&symbols, &mut rng);
        let values: Option<Vec<f64>> = terms.iter().map(|t| eval(t, &at).ok()).collect();
        let Some(values) = values else { continue };
        let residual: f64 = values.iter().sum();
        let scale: f64 = values.iter().map(|v| v.abs()).sum();
        if !residual.is_finite() || !scale.is_finite() {
            continue;
        }
        if residual.abs() > cfg.rel_tol * scale {
            return Verdict::NonZero;
        }
        good += 1;
    }
    if good == 0 { Verdict::Unknown } else { Verdict::Zero { probabilistic: true } }
}

/// Positive rational sample in `[1/4, 3]`.
pub(crate) fn sample_value(rng: &mut impl Rng) -> f64 {
    const DENOMS: [u32; 4] = [7, 11, 13, 16];
    let q = DENOMS[rng.gen_range(0..DENOMS.len())];
    let lo = q.div_ceil(4);
    let p = rng.gen_range(lo..=3 * q);
    p as f64 / q as f64
}

pub(crate) fn random_point(symbols: &[Symbol], rng: &mut impl Rng) -> Point {
    let mut at = Point::default();
    for s in symbols {
        at.set(s, sample_value(rng));
    }
    at
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Workspace};
    use super::*;

    fn ws() -> Workspace {
        let mut ws = Workspace::new(&["x1", "x2"], &["u"], 2).unwrap();
        let args = ws.independent().to_vec();
        ws.add_function("a", &args).unwrap();
        ws
    }

    #[test]
    fn verdicts() {
        let ws = ws();
        let p = |s: &str| parse(s, &ws).unwrap();
        assert_eq!(is_zero(&p("exp(u)*exp(-u) - 1")), Verdict::Zero { probabilistic: false });
        assert_eq!(is_zero(&p("u_{x1} - u_{x2}")), Verdict::NonZero);
        assert!(is_zero(&p("diff(a(x1,x2),x1) - diff(a(x1,x2),x1)")).is_zero());
        assert_eq!(is_zero(&p("diff(a(x1,x2),x1)")), Verdict::Unknown);
        assert_eq!(is_zero(&p("3")), Verdict::NonZero);
    }

    #[test]
    fn sampling_catches_identities_the_normal_form_keeps() {
        let ws = ws();
        let e = parse("sin(u)^2 + cos(u)^2 - 1", &ws).unwrap();
        assert!(!e.is_zero_literal());
        assert_eq!(is_zero(&e), Verdict::Zero { probabilistic: true });
        let e = parse("sin(u)^2 + cos(u)^2 - 1 + 10^-6*u", &ws).unwrap();
        assert_eq!(is_zero(&e), Verdict::NonZero);
    }

    #[test]
    fn combination_prefers_negative() {
        let z = Verdict::Zero { probabilistic: false };
        assert_eq!(Verdict::all([z, Verdict::Unknown, Verdict::NonZero]), Verdict::NonZero);
        assert_eq!(Verdict::all([z, Verdict::Unknown]), Verdict::Unknown);
        assert_eq!(Verdict::all([]), z);
    }
}
