//! Finite-dimensional quotients `P/I` of a power series ring by an
//! `m`-primary ideal, computed on jets.
//!
//! For a degree `D`, the span of all monomial multiples of the generators,
//! truncated below `D + 1`, is compared against the degree-`D` monomials. If
//! every one of them lies in `I + m^(D+1)`, then `m^D ⊆ I` by Nakayama and
//! `P/I` is the finite quotient of the polynomials of degree `< D` by the
//! truncated span. Nothing about the answer depends on further precision.

use std::collections::HashMap;

use num_traits::Zero;

use crate::field::{FieldSpec, Scalar};
use crate::linalg::{zero_vector, Subspace, Vector};
use crate::series::{Ctx, Monomial, TruncatedSeries};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("no certifying degree up to {limit}; raise the precision")]
    PrecisionInsufficient { limit: u32 },
    #[error("series known only below degree {have}, degree {need} required")]
    SeriesTooShort { have: u32, need: u32 },
}

/// Monomials of degree `< d`, highest first, with their column indices.
#[derive(Clone, Debug)]
struct MonomialIndex {
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialIndex {
    fn new(nvars: usize, d: u32) -> Self {
        let mut monomials = Monomial::all_below(nvars, d);
        monomials.reverse();
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        MonomialIndex { monomials, index }
    }

    fn len(&self) -> usize {
        self.monomials.len()
    }

    /// Coefficient vector of the terms of `s` below the index degree.
    fn vectorize(&self, s: &TruncatedSeries) -> Vector {
        let mut v = zero_vector(self.len());
        for (m, c) in s.terms() {
            if let Some(&i) = self.index.get(m) {
                v[i] = c.clone();
            }
        }
        v
    }

    fn vectorize_product(&self, field: FieldSpec, mono: &Monomial, s: &TruncatedSeries) -> Vector {
        let mut v = zero_vector(self.len());
        for (m, c) in s.terms() {
            if let Some(&i) = self.index.get(&mono.mul(m)) {
                v[i] = field.add(&v[i], c);
            }
        }
        v
    }
}

/// A certified finite quotient `P/I`.
#[derive(Clone, Debug)]
pub struct JetQuotient {
    ctx: Ctx,
    degree: u32,
    columns: MonomialIndex,
    ideal: Subspace,
    basis: Vec<usize>,
}

fn known_below(s: &TruncatedSeries) -> u32 {
    if s.is_exact() {
        u32::MAX
    } else {
        s.precision()
    }
}

fn truncated_span(ctx: &Ctx, gens: &[TruncatedSeries], d: u32) -> (MonomialIndex, Subspace) {
    let field = ctx.field();
    let cols = MonomialIndex::new(ctx.nvars(), d);
    let mut span = Subspace::new(field, cols.len());
    for g in gens {
        let ord = match g.jet_order().order.finite() {
            Some(o) => o,
            None => continue,
        };
        if ord >= d {
            continue;
        }
        for mono in Monomial::all_below(ctx.nvars(), d - ord) {
            span.insert(cols.vectorize_product(field, &mono, g));
        }
    }
    (cols, span)
}

impl JetQuotient {
    /// Searches `D = 1..=max_degree` for a certifying degree.
    pub fn new(ctx: &Ctx, gens: &[TruncatedSeries], max_degree: u32) -> Result<Self, JetError> {
        let avail = gens.iter().map(known_below).min().unwrap_or(u32::MAX);
        for d in 1..=max_degree {
            if d + 1 > avail {
                return Err(JetError::PrecisionInsufficient { limit: d.saturating_sub(1) });
            }
            if let Some(q) = Self::try_degree(ctx, gens, d) {
                return Ok(q);
            }
        }
        Err(JetError::PrecisionInsufficient { limit: max_degree })
    }

    /// Attempts certification at exactly degree `d`.
    pub fn try_degree(ctx: &Ctx, gens: &[TruncatedSeries], d: u32) -> Option<Self> {
        let (cols_hi, span_hi) = truncated_span(ctx, gens, d + 1);
        let top = Monomial::all_of_degree(ctx.nvars(), d);
        let certified = top.iter().all(|m| {
            let mut v = zero_vector(cols_hi.len());
            v[cols_hi.index[m]] = num_traits::One::one();
            span_hi.contains(&v)
        });
        if !certified {
            return None;
        }
        let (columns, ideal) = truncated_span(ctx, gens, d);
        let basis = ideal.free_columns();
        Some(JetQuotient { ctx: ctx.clone(), degree: d, columns, ideal, basis })
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn field(&self) -> FieldSpec {
        self.ctx.field()
    }

    /// Certified degree: `m^D ⊆ I`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_monomials(&self) -> Vec<Monomial> {
        self.basis.iter().map(|&c| self.columns.monomials[c].clone()).collect()
    }

    /// Coordinates of `s` modulo `I` in the standard monomial basis.
    pub fn reduce(&self, s: &TruncatedSeries) -> Result<Vector, JetError> {
        if known_below(s) < self.degree {
            return Err(JetError::SeriesTooShort { have: s.precision(), need: self.degree });
        }
        let v = self.ideal.reduce(&self.columns.vectorize(s));
        Ok(self.basis.iter().map(|&c| v[c].clone()).collect())
    }

    pub fn contains(&self, s: &TruncatedSeries) -> Result<bool, JetError> {
        Ok(self.reduce(s)?.iter().all(Zero::is_zero))
    }

    pub fn to_series(&self, coords: &[Scalar]) -> TruncatedSeries {
        let terms = self
            .basis
            .iter()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&col, c)| (self.columns.monomials[col].clone(), c.clone()));
        TruncatedSeries::from_terms(&self.ctx, self.degree.max(1), terms.collect::<Vec<_>>(), true)
    }

    pub fn multiply(&self, a: &[Scalar], b: &[Scalar]) -> Vector {
        let field = self.field();
        let mut v = zero_vector(self.columns.len());
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let mi = &self.columns.monomials[self.basis[i]];
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let m = mi.mul(&self.columns.monomials[self.basis[j]]);
                if let Some(&c) = self.columns.index.get(&m) {
                    v[c] = field.add(&v[c], &field.mul(ai, bj));
                }
            }
        }
        let v = self.ideal.reduce(&v);
        self.basis.iter().map(|&c| v[c].clone()).collect()
    }

    /// Coordinates of `mono * s` for a monomial multiplier.
    pub fn reduce_product(&self, mono: &Monomial, s: &TruncatedSeries) -> Result<Vector, JetError> {
        if known_below(s) < self.degree {
            return Err(JetError::SeriesTooShort { have: s.precision(), need: self.degree });
        }
        let v = self.ideal.reduce(&self.columns.vectorize_product(self.field(), mono, s));
        Ok(self.basis.iter().map(|&c| v[c].clone()).collect())
    }
}

/// `dim_k P/I`, certified.
pub fn colength(ctx: &Ctx, gens: &[TruncatedSeries], max_degree: u32) -> Result<usize, JetError> {
    JetQuotient::new(ctx, gens, max_degree).map(|q| q.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_in;
    use crate::series::SeriesContext;

    fn ctx() -> Ctx {
        SeriesContext::new(["x", "y"], FieldSpec::rationals())
    }

    fn p(c: &Ctx, t: &str) -> TruncatedSeries {
        parse_in(t, c, 30).unwrap()
    }

    #[test]
    fn monomial_ideal_colength() {
        let c = ctx();
        let q = JetQuotient::new(&c, &[p(&c, "x^2"), p(&c, "y^3")], 20).unwrap();
        assert_eq!(q.dim(), 6);
        assert_eq!(q.degree(), 4);
    }

    #[test]
    fn membership() {
        let c = ctx();
        let gens = [p(&c, "x^3"), p(&c, "x^2*y"), p(&c, "y^2"), p(&c, "y^3")];
        let q = JetQuotient::new(&c, &gens, 20).unwrap();
        assert!(!q.contains(&p(&c, "x*y")).unwrap());
        assert!(q.contains(&p(&c, "x^2*y + 3*y^2 - x^5")).unwrap());
    }

    #[test]
    fn non_primary_ideal_fails() {
        let c = ctx();
        let err = JetQuotient::new(&c, &[p(&c, "x^2"), p(&c, "x*y")], 10).unwrap_err();
        assert_eq!(err, JetError::PrecisionInsufficient { limit: 10 });
    }

    #[test]
    fn products_reduce() {
        let c = ctx();
        let q = JetQuotient::new(&c, &[p(&c, "x^2 - y^3"), p(&c, "x*y")], 20).unwrap();
        let x = q.reduce(&p(&c, "x")).unwrap();
        let xx = q.multiply(&x, &x);
        assert_eq!(xx, q.reduce(&p(&c, "y^3")).unwrap());
    }
}
