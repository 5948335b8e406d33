//! Seeded generators for property tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::condsym::NormalFormSystem;
use crate::error::Result;
use crate::expr::{normalize, AnsatzFamily, Expr, Workspace};
use crate::jet::VectorField;
use crate::multiindex::MultiIndex;

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Nonzero integer in `[-k, k]`.
    pub fn nonzero(&mut self, k: i64) -> i64 {
        loop {
            let v = self.rng.gen_range(-k..=k);
            if v != 0 {
                return v;
            }
        }
    }

    /// Random polynomial in `vars` of total degree at most `degree`, never zero.
    pub fn poly(&mut self, vars: &[Expr], degree: u32) -> Expr {
        let mut terms = Vec::new();
        for _ in 0..self.rng.gen_range(1..=3) {
            let d = self.rng.gen_range(0..=degree);
            let mut factors = vec![Expr::int(self.nonzero(3))];
            for _ in 0..d {
                if !vars.is_empty() {
                    factors.push(vars[self.rng.gen_range(0..vars.len())].clone());
                }
            }
            terms.push(Expr::mul(factors));
        }
        Expr::add(terms)
    }

    /// Random expression over the base coordinates and first-order jets.
    pub fn expr(&mut self, ws: &Workspace, depth: u32) -> Expr {
        let mut leaves: Vec<Expr> = ws.independent().iter().chain(ws.dependent()).map(Expr::sym).collect();
        for a in 0..ws.q() {
            for i in 0..ws.p() {
                leaves.push(ws.jet_expr(a, &MultiIndex::unit(ws.p(), i)));
            }
        }
        self.tree(&leaves, depth)
    }

    fn tree(&mut self, leaves: &[Expr], depth: u32) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return if self.rng.gen_bool(0.8) {
                leaves[self.rng.gen_range(0..leaves.len())].clone()
            } else {
                Expr::int(self.nonzero(4))
            };
        }
        match self.rng.gen_range(0..6) {
            0 => self.tree(leaves, depth - 1) + self.tree(leaves, depth - 1),
            1 | 2 => self.tree(leaves, depth - 1) * self.tree(leaves, depth - 1),
            3 => Expr::exp(self.tree(leaves, depth - 1) / Expr::int(self.nonzero(3))),
            4 => Expr::sin(self.tree(leaves, depth - 1)),
            _ => self.tree(leaves, depth - 1).pow(self.rng.gen_range(2..=3)),
        }
    }

    /// Field with polynomial coefficients of degree at most `degree` in `(x, u)`.
    pub fn field(&mut self, ws: &Workspace, degree: u32) -> Result<VectorField> {
        let vars = base_vars(ws);
        let coef = |g: &mut Gen| if g.rng.gen_bool(0.3) { Expr::zero() } else { g.poly(&vars, degree) };
        let xi = (0..ws.p()).map(|_| coef(self)).collect();
        let phi = (0..ws.q()).map(|_| coef(self)).collect();
        VectorField::new(xi, phi)
    }

    /// `u_{x_j} = f_{x_j}(x) g(u)`: compatible, with commuting `Z_j`.
    pub fn abelian_normal_form(&mut self, ws: &Workspace) -> Result<NormalFormSystem> {
        let xs: Vec<Expr> = ws.independent().iter().map(Expr::sym).collect();
        let us: Vec<Expr> = ws.dependent().iter().map(Expr::sym).collect();
        let mut rows = Vec::new();
        for _ in 0..ws.q() {
            let f = self.poly(&xs, 2);
            let g = self.poly(&us, 1);
            let row = ws
                .independent()
                .iter()
                .map(|x| normalize(&(crate::expr::diff(&f, x)? * &g)))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        NormalFormSystem::new(ws, rows)
    }

    /// Normal form with random right-hand sides of degree at most 2.
    pub fn generic_normal_form(&mut self, ws: &Workspace) -> Result<NormalFormSystem> {
        let vars = base_vars(ws);
        let rows = (0..ws.q()).map(|_| (0..ws.p()).map(|_| self.poly(&vars, 2)).collect()).collect();
        NormalFormSystem::new(ws, rows)
    }

    /// `sum_k c_k(x) b_k` over the family basis with polynomial coefficients in `x`.
    pub fn family_member(&mut self, family: &AnsatzFamily, ws: &Workspace) -> Expr {
        let xs: Vec<Expr> = ws.independent().iter().map(Expr::sym).collect();
        let mut terms = Vec::new();
        for b in family.basis() {
            if self.rng.gen_bool(0.7) {
                terms.push(self.poly(&xs, 2) * b);
            }
        }
        Expr::add(terms)
    }

    /// Matrix Riccati right-hand sides `A + B u + u (D u)` with polynomial coefficients in `x`.
    pub fn riccati_normal_form(&mut self, ws: &Workspace) -> Result<NormalFormSystem> {
        let xs: Vec<Expr> = ws.independent().iter().map(Expr::sym).collect();
        let us: Vec<Expr> = ws.dependent().iter().map(Expr::sym).collect();
        let q = ws.q();
        let mut rows = vec![Vec::new(); q];
        for _ in 0..ws.p() {
            let c = |g: &mut Gen| if g.rng.gen_bool(0.3) { Expr::zero() } else { g.poly(&xs, 1) };
            let d: Vec<Expr> = (0..q).map(|_| c(self)).collect();
            let du = Expr::add(d.iter().zip(&us).map(|(d, u)| d * u).collect());
            for (a, row) in rows.iter_mut().enumerate() {
                let mut terms = vec![c(self), &us[a] * &du];
                for u in &us {
                    terms.push(c(self) * u);
                }
                row.push(normalize(&Expr::add(terms))?);
            }
        }
        NormalFormSystem::new(ws, rows)
    }

    /// A point with coordinates in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}

fn base_vars(ws: &Workspace) -> Vec<Expr> {
    ws.independent().iter().chain(ws.dependent()).map(Expr::sym).collect()
}
