//! Matrices over a power series ring, matrix factorizations, the double
//! branched cover lift and presentation minimization.

use std::collections::BTreeMap;
use std::fmt;

use crate::parse::{parse_in, ParseError};
use crate::series::{Ctx, SeriesContext, SeriesError, TruncatedSeries};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("entries live in different rings")]
    MixedContext,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("variable {0} is already in use")]
    VariableCollision(String),
    #[error(transparent)]
    Series(SeriesError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl From<SeriesError> for MatrixError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::MixedContext => MatrixError::MixedContext,
            SeriesError::VariableCollision(v) => MatrixError::VariableCollision(v),
            e => MatrixError::Series(e),
        }
    }
}

/// Equality of ring elements: exact comparison for polynomials, agreement
/// below the smaller precision otherwise.
pub fn same_element(a: &TruncatedSeries, b: &TruncatedSeries) -> bool {
    if a.is_exact() && b.is_exact() {
        a.equals_exactly(b)
    } else {
        a.agrees_with(b)
    }
}

/// Dense row-major matrix of series over one context.
#[derive(Clone, Debug)]
pub struct SeriesMatrix {
    ctx: Ctx,
    precision: u32,
    rows: usize,
    cols: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn from_rows(ctx: &Ctx, precision: u32, rows: Vec<Vec<TruncatedSeries>>) -> Result<Self, MatrixError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(MatrixError::ShapeMismatch("ragged rows".into()));
        }
        let entries: Vec<TruncatedSeries> = rows.into_iter().flatten().collect();
        if entries.iter().any(|e| **e.ctx() != **ctx) {
            return Err(MatrixError::MixedContext);
        }
        Ok(SeriesMatrix { ctx: ctx.clone(), precision, rows: nrows, cols: ncols, entries })
    }

    pub fn zeros(ctx: &Ctx, precision: u32, rows: usize, cols: usize) -> Self {
        let entries = vec![TruncatedSeries::zero(ctx, precision); rows * cols];
        SeriesMatrix { ctx: ctx.clone(), precision, rows, cols, entries }
    }

    /// `c * I_n`.
    pub fn scalar(c: &TruncatedSeries, n: usize) -> Self {
        let mut m = SeriesMatrix::zeros(c.ctx(), c.precision(), n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn identity(ctx: &Ctx, precision: u32, n: usize) -> Self {
        SeriesMatrix::scalar(&TruncatedSeries::one(ctx, precision), n)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TruncatedSeries) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &TruncatedSeries> {
        self.entries.iter()
    }

    pub fn row(&self, i: usize) -> &[TruncatedSeries] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(TruncatedSeries::is_exact)
    }

    pub fn map(&self, f: impl Fn(&TruncatedSeries) -> Result<TruncatedSeries, MatrixError>) -> Result<Self, MatrixError> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(SeriesMatrix { entries, ..self.clone() })
    }

    pub fn neg(&self) -> Self {
        self.map(|e| Ok(e.neg())).expect("negation is total")
    }

    pub fn mul(&self, other: &SeriesMatrix) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let precision = self.precision.min(other.precision);
        let mut out = SeriesMatrix::zeros(&self.ctx, precision, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = TruncatedSeries::zero(&self.ctx, precision);
                for k in 0..self.cols {
                    acc = acc.poly_add(&self.get(i, k).poly_mul(other.get(k, j))?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &SeriesMatrix) -> Result<Self, MatrixError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(MatrixError::ShapeMismatch("sum of differently shaped matrices".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.poly_add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SeriesMatrix { entries, precision: self.precision.min(other.precision), ..self.clone() })
    }

    /// Entrywise [`same_element`].
    pub fn same_as(&self, other: &SeriesMatrix) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self.entries.iter().zip(&other.entries).all(|(a, b)| same_element(a, b))
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<TruncatedSeries, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::ShapeMismatch("determinant of a non-square matrix".into()));
        }
        let cols: Vec<usize> = (0..self.cols).collect();
        self.minor(0, &cols)
    }

    fn minor(&self, row: usize, cols: &[usize]) -> Result<TruncatedSeries, MatrixError> {
        if cols.is_empty() {
            return Ok(TruncatedSeries::one(&self.ctx, self.precision));
        }
        let mut acc = TruncatedSeries::zero(&self.ctx, self.precision);
        for (k, &c) in cols.iter().enumerate() {
            let a = self.get(row, c);
            if a.is_exact_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a.poly_mul(&self.minor(row + 1, &rest)?)?;
            acc = if k % 2 == 0 { acc.poly_add(&term)? } else { acc.poly_sub(&term)? };
        }
        Ok(acc)
    }

    /// `[[a, b], [c, d]]` from four blocks.
    pub fn block(a: &SeriesMatrix, b: &SeriesMatrix, c: &SeriesMatrix, d: &SeriesMatrix) -> Result<Self, MatrixError> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(MatrixError::ShapeMismatch("incompatible blocks".into()));
        }
        let mut rows = Vec::with_capacity(a.rows + c.rows);
        for (top, bottom) in [(a, b), (c, d)] {
            for i in 0..top.rows {
                let mut r = top.row(i).to_vec();
                r.extend_from_slice(bottom.row(i));
                rows.push(r);
            }
        }
        let precision = [a, b, c, d].iter().map(|m| m.precision).min().unwrap_or(a.precision);
        SeriesMatrix::from_rows(&a.ctx, precision, rows)
    }

    /// Moves every entry to another context, mapping variables by name.
    pub fn change_context(&self, target: &Ctx) -> Result<Self, MatrixError> {
        let mut m = self.map(|e| Ok(e.change_context(target)?))?;
        m.ctx = target.clone();
        Ok(m)
    }

    /// Removes row `r` and column `c`.
    fn without(&self, r: usize, c: usize) -> Self {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                entries.push(self.get(i, j).clone());
            }
        }
        SeriesMatrix { entries, rows: self.rows - 1, cols: self.cols - 1, ..self.clone() }
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn to_text(&self) -> String {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|e| e.to_poly_string()).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn parse(text: &str, ctx: &Ctx, precision: u32) -> Result<Self, MatrixError> {
        let rows = text
            .split(';')
            .map(|r| r.split(',').map(|e| parse_in(e, ctx, precision)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        SeriesMatrix::from_rows(ctx, precision, rows)
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_text())
    }
}

/// `phi * psi = psi * phi = f * I`.
#[derive(Clone, Debug)]
pub struct MatrixFactorization {
    pub f: TruncatedSeries,
    pub phi: SeriesMatrix,
    pub psi: SeriesMatrix,
}

impl MatrixFactorization {
    pub fn new(f: TruncatedSeries, phi: SeriesMatrix, psi: SeriesMatrix) -> Result<Self, MatrixError> {
        if !phi.is_square() || !psi.is_square() || phi.nrows() != psi.nrows() {
            return Err(MatrixError::ShapeMismatch("factors must be square of equal size".into()));
        }
        if **phi.ctx() != **f.ctx() || **psi.ctx() != **f.ctx() {
            return Err(MatrixError::MixedContext);
        }
        Ok(MatrixFactorization { f, phi, psi })
    }

    pub fn size(&self) -> usize {
        self.phi.nrows()
    }

    pub fn ctx(&self) -> &Ctx {
        self.f.ctx()
    }

    /// `det(phi) * det(psi) = f^n` below precision.
    pub fn determinant_identity(&self) -> Result<bool, MatrixError> {
        let lhs = self.phi.det()?.poly_mul(&self.psi.det()?)?;
        let mut rhs = TruncatedSeries::one(self.ctx(), self.f.precision());
        for _ in 0..self.size() {
            rhs = rhs.poly_mul(&self.f)?;
        }
        Ok(same_element(&lhs, &rhs))
    }
}

/// Whether both product identities hold (exactly for polynomial entries,
/// below precision otherwise).
pub fn verify_mf(mf: &MatrixFactorization) -> Result<bool, MatrixError> {
    let n = mf.size();
    let target = SeriesMatrix::scalar(&mf.f, n);
    Ok(mf.phi.mul(&mf.psi)?.same_as(&target) && mf.psi.mul(&mf.phi)?.same_as(&target))
}

/// The factorization `([[phi, -z], [z, psi]], [[psi, z], [-z, phi]])` of
/// `f + z^2` over the variables of `mf` plus `z`.
pub fn knorrer_lift(mf: &MatrixFactorization, z: &str) -> Result<MatrixFactorization, MatrixError> {
    let ctx = mf.ctx();
    if ctx.index_of(z).is_some() {
        return Err(MatrixError::VariableCollision(z.to_string()));
    }
    let mut vars = ctx.vars().to_vec();
    vars.push(z.to_string());
    let lifted = SeriesContext::new(vars, ctx.field());
    let zi = lifted.nvars() - 1;
    let f = mf.f.change_context(&lifted)?;
    let phi = mf.phi.change_context(&lifted)?;
    let psi = mf.psi.change_context(&lifted)?;
    let p = f.precision();
    let zs = TruncatedSeries::var(&lifted, zi, p);
    let zi_mat = SeriesMatrix::scalar(&zs, mf.size());
    let big_phi = SeriesMatrix::block(&phi, &zi_mat.neg(), &zi_mat, &psi)?;
    let big_psi = SeriesMatrix::block(&psi, &zi_mat, &zi_mat.neg(), &phi)?;
    let f2 = f.poly_add(&zs.poly_mul(&zs)?)?;
    MatrixFactorization::new(f2, big_phi, big_psi)
}

/// A matrix whose cokernel is a module over `k[[vars]]/(ring_equation)`.
#[derive(Clone, Debug)]
pub struct PresentationMatrix {
    pub ring_equation: TruncatedSeries,
    pub matrix: SeriesMatrix,
    pub minimized: bool,
}

impl PresentationMatrix {
    pub fn new(ring_equation: TruncatedSeries, matrix: SeriesMatrix) -> Self {
        PresentationMatrix { ring_equation, matrix, minimized: false }
    }

    /// Number of generators of the cokernel; exact once minimized.
    pub fn nu(&self) -> usize {
        self.matrix.nrows()
    }

    /// Columns that vanish in the quotient ring, i.e. relations that are
    /// multiples of the ring equation.
    pub fn trivial_columns(&self) -> Vec<usize> {
        (0..self.matrix.ncols())
            .filter(|&j| {
                (0..self.matrix.nrows()).all(|i| {
                    let e = self.matrix.get(i, j);
                    e.is_exact_zero() || e.divide_exact(&self.ring_equation).is_some()
                })
            })
            .collect()
    }

    /// Whether the cokernel is free: minimized and every relation trivial.
    pub fn presents_free_module(&self) -> bool {
        self.minimized && self.trivial_columns().len() == self.matrix.ncols()
    }
}

/// Restricts a factorization of `f + z^2` to `z = 0`, presenting `N/zN`
/// over `k[[V]]/(f)`.
pub fn reduce_mod_z(mf: &MatrixFactorization, z: &str) -> Result<PresentationMatrix, MatrixError> {
    let ctx = mf.ctx();
    let zi = ctx.index_of(z).ok_or_else(|| MatrixError::ShapeMismatch(format!("{z} is not a variable")))?;
    let p = mf.f.precision();
    let zs = TruncatedSeries::var(ctx, zi, p);
    let f = mf.f.poly_sub(&zs.poly_mul(&zs)?)?;
    if f.involves(zi) {
        return Err(MatrixError::ShapeMismatch(format!("equation is not of the form f + {z}^2")));
    }
    let vars: Vec<String> = ctx.vars().iter().filter(|v| v.as_str() != z).cloned().collect();
    let base = SeriesContext::new(vars, ctx.field());
    let zero = BTreeMap::from([(zi, TruncatedSeries::zero(ctx, p))]);
    let phi = mf.phi.map(|e| Ok(e.substitute(&zero)?))?.change_context(&base)?;
    Ok(PresentationMatrix::new(f.change_context(&base)?, phi))
}

/// Eliminates unit entries, leftmost column first, uppermost row within it.
/// Also returns `c` with `det(input) = c * det(output)` for square input.
pub fn minimize_presentation_tracked(p: &PresentationMatrix) -> Result<(PresentationMatrix, TruncatedSeries), MatrixError> {
    let mut m = p.matrix.clone();
    let mut factor = TruncatedSeries::one(m.ctx(), m.precision());
    'outer: loop {
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if !m.get(r, c).is_unit() {
                    continue;
                }
                let u = m.get(r, c).clone();
                let u_inv = u.invert_unit()?;
                let mut next = m.without(r, c);
                for (ni, i) in (0..m.nrows()).filter(|&i| i != r).enumerate() {
                    let a_ic = m.get(i, c);
                    if a_ic.is_exact_zero() {
                        continue;
                    }
                    let coef = a_ic.poly_mul(&u_inv)?;
                    for (nj, j) in (0..m.ncols()).filter(|&j| j != c).enumerate() {
                        let upd = next.get(ni, nj).poly_sub(&coef.poly_mul(m.get(r, j))?)?;
                        next.set(ni, nj, upd);
                    }
                }
                let signed = if (r + c) % 2 == 0 { u } else { u.neg() };
                factor = factor.poly_mul(&signed)?;
                m = next;
                continue 'outer;
            }
        }
        break;
    }
    Ok((PresentationMatrix { ring_equation: p.ring_equation.clone(), matrix: m, minimized: true }, factor))
}

pub fn minimize_presentation(p: &PresentationMatrix) -> Result<PresentationMatrix, MatrixError> {
    minimize_presentation_tracked(p).map(|(m, _)| m)
}
