//! Exact truncated multivariate power series.
//!
//! A [`TruncatedSeries`] stores every coefficient of total degree below its
//! precision `N`. Coefficients are kept in a map ordered by total degree
//! first, so degreewise iteration walks the map in order. Values coming from
//! polynomials carry `exact = true`, meaning the omitted terms are genuinely
//! zero; such values may be re-read at any higher precision.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::field::{scalar_to_string, FieldSpec, Scalar};

/// Exponent vector, ordered by total degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars].into_boxed_slice())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial::new(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(self.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// All monomials in `nvars` variables of total degree exactly `d`.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; nvars];
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i + 1 == cur.len() {
                cur[i] = left;
                out.push(Monomial::new(cur.clone()));
                return;
            }
            for a in (0..=left).rev() {
                cur[i] = a;
                rec(i + 1, left - a, cur, out);
            }
            cur[i] = 0;
        }
        if nvars == 0 {
            if d == 0 {
                out.push(Monomial::new(vec![]));
            }
            return out;
        }
        rec(0, d, &mut cur, &mut out);
        out.sort();
        out
    }

    /// All monomials of total degree below `d`, in graded order.
    pub fn all_below(nvars: usize, d: u32) -> Vec<Monomial> {
        (0..d).flat_map(|k| Monomial::all_of_degree(nvars, k)).collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Variables and coefficient field shared by a family of series.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct SeriesContext {
    vars: Vec<String>,
    field: FieldSpec,
}

pub type Ctx = Arc<SeriesContext>;

impl SeriesContext {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = S>, field: FieldSpec) -> Ctx {
        Arc::new(SeriesContext { vars: vars.into_iter().map(Into::into).collect(), field })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("operands live over different variables or fields")]
    MixedContext,
    #[error("series has zero constant term and is not a unit")]
    NotAUnit,
    #[error("substitution for {0} has a nonzero constant term")]
    NonLocalSubstitution(String),
    #[error("series vanishes identically on the {0}-axis")]
    NotRegular(String),
    #[error("precision {precision} is insufficient: {reason}")]
    PrecisionInsufficient { precision: u32, reason: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} is already in use")]
    VariableCollision(String),
}

/// Order of a series: the least total degree carrying a nonzero coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Finite(u32),
    /// The exact zero polynomial.
    Infinite,
    /// Every known coefficient is zero, but the value is not known to be zero.
    AbovePrecision,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct JetOrder {
    pub order: Order,
    pub leading_form: TruncatedSeries,
}

#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    ctx: Ctx,
    precision: u32,
    terms: BTreeMap<Monomial, Scalar>,
    exact: bool,
}

/// Unit and distinguished polynomial coefficients of a Weierstrass
/// preparation `f = unit * (y^e + b_1 y^(e-1) + ... + b_e)`.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub var: usize,
    pub unit: TruncatedSeries,
    pub coefficients: Vec<TruncatedSeries>,
    pub degree: u32,
}

impl WeierstrassData {
    /// `y^e + b_1 y^(e-1) + ... + b_e`.
    pub fn polynomial(&self) -> TruncatedSeries {
        let y = self.unit.var_series(self.var);
        let e = self.degree;
        let mut p = y.pow(e);
        for (i, b) in self.coefficients.iter().enumerate() {
            let k = e - 1 - i as u32;
            p = p.add(&b.mul(&y.pow(k)).expect("shared context")).expect("shared context");
        }
        p
    }

    pub fn reconstruct(&self) -> TruncatedSeries {
        self.unit.mul(&self.polynomial()).expect("shared context")
    }
}

impl TruncatedSeries {
    pub fn zero(ctx: &Ctx, precision: u32) -> Self {
        TruncatedSeries { ctx: ctx.clone(), precision: precision.max(1), terms: BTreeMap::new(), exact: true }
    }

    pub fn constant(ctx: &Ctx, c: Scalar, precision: u32) -> Self {
        let c = ctx.field.reduce(&c).expect("constant must be representable");
        let mut s = Self::zero(ctx, precision);
        if !c.is_zero() {
            s.terms.insert(Monomial::one(ctx.nvars()), c);
        }
        s
    }

    pub fn one(ctx: &Ctx, precision: u32) -> Self {
        Self::constant(ctx, Scalar::one(), precision)
    }

    pub fn var(ctx: &Ctx, i: usize, precision: u32) -> Self {
        Self::from_terms(ctx, precision, vec![(Monomial::var(ctx.nvars(), i), Scalar::one())], true)
    }

    pub fn var_named(ctx: &Ctx, name: &str, precision: u32) -> Result<Self, SeriesError> {
        let i = ctx.index_of(name).ok_or_else(|| SeriesError::UnknownVariable(name.to_string()))?;
        Ok(Self::var(ctx, i, precision))
    }

    /// Builds a series from terms; duplicate monomials are summed and terms
    /// at or above the precision are dropped (clearing `exact` if any was
    /// nonzero).
    pub fn from_terms(
        ctx: &Ctx,
        precision: u32,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
        exact: bool,
    ) -> Self {
        let field = ctx.field;
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.exps().len(), ctx.nvars());
            let e = acc.entry(m).or_insert_with(Scalar::zero);
            *e = field.add(e, &c);
        }
        Self::from_accumulated(ctx, precision.max(1), acc, exact)
    }

    fn from_accumulated(ctx: &Ctx, precision: u32, acc: HashMap<Monomial, Scalar>, exact: bool) -> Self {
        let mut exact = exact;
        let mut terms = BTreeMap::new();
        for (m, c) in acc {
            if c.is_zero() {
                continue;
            }
            if m.degree() >= precision {
                exact = false;
            } else {
                terms.insert(m, c);
            }
        }
        TruncatedSeries { ctx: ctx.clone(), precision, terms, exact }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn field(&self) -> FieldSpec {
        self.ctx.field
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Scalar {
        self.terms.get(&Monomial::new(exps.to_vec())).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Monomial::one(self.ctx.nvars())).cloned().unwrap_or_else(Scalar::zero)
    }

    /// No nonzero coefficient below the precision.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact && self.terms.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        !self.constant_term().is_zero()
    }

    /// Exact constant (including zero).
    pub fn is_exact_constant(&self) -> bool {
        self.exact && self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Highest total degree present, for polynomials.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Degree in variable `i` among stored terms.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exps()[i]).max().unwrap_or(0)
    }

    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.exps()[i] > 0)
    }

    pub fn var_series(&self, i: usize) -> TruncatedSeries {
        TruncatedSeries::var(&self.ctx, i, self.precision)
    }

    fn check_ctx(&self, other: &TruncatedSeries) -> Result<(), SeriesError> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(SeriesError::MixedContext)
        }
    }

    /// Changes the precision. Lowering drops terms; raising is only
    /// meaningful for exact values and is ignored otherwise.
    pub fn with_precision(&self, n: u32) -> TruncatedSeries {
        let n = n.max(1);
        if n >= self.precision {
            let mut s = self.clone();
            if self.exact {
                s.precision = n;
            }
            return s;
        }
        let mut exact = self.exact;
        let terms: BTreeMap<_, _> = self
            .terms
            .iter()
            .filter(|(m, _)| {
                let keep = m.degree() < n;
                if !keep {
                    exact = false;
                }
                keep
            })
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        TruncatedSeries { ctx: self.ctx.clone(), precision: n, terms, exact }
    }

    /// Marks a value as inexact (used when only a jet is meaningful).
    pub fn as_inexact(&self) -> TruncatedSeries {
        let mut s = self.clone();
        s.exact = false;
        s
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_ctx(other)?;
        let n = self.precision.min(other.precision);
        let a = self.with_precision(n);
        let b = other.with_precision(n);
        let field = self.ctx.field;
        let mut terms = a.terms;
        for (m, c) in b.terms {
            match terms.get_mut(&m) {
                Some(v) => {
                    *v = field.add(v, &c);
                    if v.is_zero() {
                        terms.remove(&m);
                    }
                }
                None => {
                    terms.insert(m, c);
                }
            }
        }
        Ok(TruncatedSeries { ctx: self.ctx.clone(), precision: n, terms, exact: a.exact && b.exact })
    }

    pub fn neg(&self) -> TruncatedSeries {
        let field = self.ctx.field;
        let mut s = self.clone();
        for c in s.terms.values_mut() {
            *c = field.neg(c);
        }
        s
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> TruncatedSeries {
        let field = self.ctx.field;
        let c = field.reduce(c).expect("scalar must be representable");
        if c.is_zero() {
            let mut z = TruncatedSeries::zero(&self.ctx, self.precision);
            z.exact = self.exact;
            return z;
        }
        let mut s = self.clone();
        for v in s.terms.values_mut() {
            *v = field.mul(v, &c);
        }
        s
    }

    /// Product, truncated at the smaller precision; exact iff both factors
    /// are exact and no nonzero term was dropped.
    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.check_ctx(other)?;
        let n = self.precision.min(other.precision);
        let both_exact = self.exact && other.exact;
        let field = self.ctx.field;
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        let rhs: Vec<(&Monomial, &Scalar, u32)> = other.terms.iter().map(|(m, c)| (m, c, m.degree())).collect();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if !both_exact && da >= n {
                break;
            }
            for (mb, cb, db) in &rhs {
                if !both_exact && da + db >= n {
                    break;
                }
                let m = ma.mul(mb);
                let v = field.mul(ca, cb);
                let e = acc.entry(m).or_insert_with(Scalar::zero);
                *e = field.add(e, &v);
            }
        }
        Ok(Self::from_accumulated(&self.ctx, n, acc, both_exact))
    }

    /// Like [`mul`](Self::mul), but exact factors keep every term of the
    /// product, raising the precision as needed.
    pub fn poly_mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        if self.exact && other.exact {
            let n = self.exact_room(other, self.total_degree().unwrap_or(0) + other.total_degree().unwrap_or(0));
            return self.with_precision(n).mul(&other.with_precision(n));
        }
        self.mul(other)
    }

    /// Like [`add`](Self::add), keeping exact sums exact.
    pub fn poly_add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        if self.exact && other.exact {
            let n = self.exact_room(other, 0);
            return self.with_precision(n).add(&other.with_precision(n));
        }
        self.add(other)
    }

    pub fn poly_sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries, SeriesError> {
        self.poly_add(&other.neg())
    }

    fn exact_room(&self, other: &TruncatedSeries, degree: u32) -> u32 {
        self.precision.max(other.precision).max(degree + 1)
    }

    pub fn pow(&self, e: u32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(&self.ctx, self.precision);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same context");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same context");
            }
        }
        acc
    }

    /// Multiplicative inverse of a unit, known below the precision.
    pub fn invert_unit(&self) -> Result<TruncatedSeries, SeriesError> {
        let field = self.ctx.field;
        let c0 = self.constant_term();
        let c0_inv = field.inv(&c0).ok_or(SeriesError::NotAUnit)?;
        if self.is_exact_constant() {
            return Ok(TruncatedSeries::constant(&self.ctx, c0_inv, self.precision));
        }
        let n = self.precision;
        // a = c0 (1 - t) with ord t >= 1; 1/a = c0^-1 (1 + t + t^2 + ...).
        let one = TruncatedSeries::one(&self.ctx, n);
        let t = one.sub(&self.scale(&c0_inv))?.as_inexact();
        let mut r = one.clone().as_inexact();
        for _ in 1..n {
            r = one.add(&t.mul(&r)?)?;
        }
        let mut r = r.scale(&c0_inv);
        r.exact = false;
        Ok(r)
    }

    /// Formal partial derivative. Inexact inputs lose one degree of
    /// precision.
    pub fn partial(&self, i: usize) -> TruncatedSeries {
        let field = self.ctx.field;
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let k = m.exps()[i];
            if k == 0 {
                continue;
            }
            let mut e = m.exps().to_vec();
            e[i] -= 1;
            terms.push((Monomial::new(e), field.mul(c, &field.from_i64(k as i64))));
        }
        let n = if self.exact { self.precision } else { self.precision.saturating_sub(1).max(1) };
        Self::from_terms(&self.ctx, n, terms, self.exact)
    }

    /// The homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> TruncatedSeries {
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Self::from_terms(&self.ctx, self.precision, terms, true)
    }

    pub fn jet_order(&self) -> JetOrder {
        match self.terms.keys().next() {
            Some(m) => {
                let d = m.degree();
                JetOrder { order: Order::Finite(d), leading_form: self.homogeneous_part(d) }
            }
            None => JetOrder {
                order: if self.exact { Order::Infinite } else { Order::AbovePrecision },
                leading_form: TruncatedSeries::zero(&self.ctx, self.precision),
            },
        }
    }

    /// Composition with a local substitution; unmentioned variables map to
    /// themselves.
    pub fn substitute(&self, images: &BTreeMap<usize, TruncatedSeries>) -> Result<TruncatedSeries, SeriesError> {
        let nv = self.ctx.nvars();
        let mut n = self.precision;
        let mut all_exact = self.exact;
        let mut imgs: Vec<TruncatedSeries> = Vec::with_capacity(nv);
        for i in 0..nv {
            match images.get(&i) {
                Some(img) => {
                    self.check_ctx(img)?;
                    if !img.constant_term().is_zero() {
                        return Err(SeriesError::NonLocalSubstitution(self.ctx.vars[i].clone()));
                    }
                    n = n.min(img.precision);
                    all_exact &= img.exact;
                    imgs.push(img.clone());
                }
                None => imgs.push(TruncatedSeries::var(&self.ctx, i, self.precision)),
            }
        }
        // Exact inputs are composed at full degree so exactness is decided
        // honestly; otherwise everything lives below n.
        let work_prec = if all_exact {
            let bound: u32 = self
                .terms
                .keys()
                .map(|m| {
                    m.exps()
                        .iter()
                        .zip(imgs.iter())
                        .map(|(&k, img)| k * img.total_degree().unwrap_or(0).max(1))
                        .sum::<u32>()
                })
                .max()
                .unwrap_or(0);
            bound.max(n) + 1
        } else {
            n
        };
        let imgs: Vec<TruncatedSeries> = imgs.iter().map(|s| s.with_precision(work_prec)).collect();
        let mut powers: Vec<Vec<TruncatedSeries>> = imgs
            .iter()
            .map(|s| vec![TruncatedSeries::one(&self.ctx, work_prec), s.clone()])
            .collect();
        let mut acc = TruncatedSeries::zero(&self.ctx, work_prec);
        for (m, c) in &self.terms {
            if !all_exact && m.degree() >= n {
                break;
            }
            let mut t = TruncatedSeries::constant(&self.ctx, c.clone(), work_prec);
            for (i, &k) in m.exps().iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&imgs[i])?;
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][k as usize])?;
            }
            acc = acc.add(&t)?;
        }
        let mut out = acc.with_precision(n);
        out.exact &= all_exact;
        Ok(out)
    }

    pub fn substitute_named(&self, images: &[(&str, TruncatedSeries)]) -> Result<TruncatedSeries, SeriesError> {
        let mut map = BTreeMap::new();
        for (name, img) in images {
            let i = self.ctx.index_of(name).ok_or_else(|| SeriesError::UnknownVariable(name.to_string()))?;
            map.insert(i, img.clone());
        }
        self.substitute(&map)
    }

    /// Coefficients of `y^j` where `y` is variable `i`: returns `c_j` with
    /// `self = sum_j c_j y^j`, each `c_j` free of `y`. Precision of `c_j` is
    /// `N - j` (as a series in the remaining variables).
    pub fn expand_in(&self, i: usize) -> Vec<TruncatedSeries> {
        let deg = self.degree_in(i) as usize;
        let mut buckets: Vec<Vec<(Monomial, Scalar)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let mut e = m.exps().to_vec();
            let k = e[i] as usize;
            e[i] = 0;
            buckets[k].push((Monomial::new(e), c.clone()));
        }
        buckets
            .into_iter()
            .enumerate()
            .map(|(j, t)| {
                let n = self.precision.saturating_sub(j as u32).max(1);
                Self::from_terms(&self.ctx, n, t, self.exact)
            })
            .collect()
    }

    /// `true` iff both agree on every degree below the smaller precision.
    pub fn agrees_with(&self, other: &TruncatedSeries) -> bool {
        if self.check_ctx(other).is_err() {
            return false;
        }
        let n = self.precision.min(other.precision);
        let a = self.with_precision(n);
        let b = other.with_precision(n);
        a.terms == b.terms
    }

    /// Same ring element as polynomials: exact on both sides and equal terms.
    pub fn equals_exactly(&self, other: &TruncatedSeries) -> bool {
        self.exact && other.exact && self.check_ctx(other).is_ok() && self.terms == other.terms
    }

    /// Weierstrass preparation with respect to variable `i`.
    pub fn weierstrass_prepare(&self, i: usize) -> Result<WeierstrassData, SeriesError> {
        let nv = self.ctx.nvars();
        let name = self.ctx.vars[i].clone();
        let n = self.precision;
        // Order of f(0, ..., 0, y).
        let e = self
            .terms
            .keys()
            .filter(|m| m.exps().iter().enumerate().all(|(j, &k)| j == i || k == 0))
            .map(|m| m.exps()[i])
            .min();
        let e = match e {
            Some(e) => e,
            None if self.exact => return Err(SeriesError::NotRegular(name)),
            None => {
                return Err(SeriesError::PrecisionInsufficient {
                    precision: n,
                    reason: format!("no pure {name}-power term below precision"),
                })
            }
        };
        if e == 0 {
            // Already a unit: f = f * 1.
            return Ok(WeierstrassData { var: i, unit: self.clone(), coefficients: vec![], degree: 0 });
        }
        let (low, high) = self.split_at_var_power(i, e);
        let v_inv = high.invert_unit()?;
        let y_e = TruncatedSeries::var(&self.ctx, i, n).pow(e);
        let mut g = y_e.clone();
        let mut q = TruncatedSeries::zero(&self.ctx, n);
        let mut r = TruncatedSeries::zero(&self.ctx, n);
        for _ in 0..=n {
            let (g_low, h) = g.split_at_var_power(i, e);
            r = r.add(&g_low)?;
            if h.is_zero() {
                break;
            }
            let q1 = h.mul(&v_inv)?;
            q = q.add(&q1)?;
            g = q1.mul(&low)?.neg();
        }
        let unit = q.invert_unit()?;
        let r_parts = r.expand_in(i);
        let mut coefficients = Vec::with_capacity(e as usize);
        for k in 1..=e {
            let j = (e - k) as usize;
            let c = r_parts
                .get(j)
                .cloned()
                .unwrap_or_else(|| TruncatedSeries::zero(&self.ctx, n))
                .with_precision(n)
                .neg();
            coefficients.push(c);
        }
        if self.exact && r.exact {
            debug_assert!(coefficients.iter().all(|b| b.constant_term().is_zero()) || nv == 1);
            return Ok(WeierstrassData { var: i, unit, coefficients, degree: e });
        }
        // Give y the weight rho = min(1, ord(b_k) / k) so that the Weierstrass
        // polynomial has weighted order rho * e. Dividing a change of f in
        // degree n by it moves the unit in weighted order rho * (n - e) and
        // b_k in weighted order rho * (n - e + k); total degree is at least
        // the weighted order.
        let (mut num, mut den) = (1u64, 1u64);
        for (k, b) in (1..=e).zip(&coefficients) {
            if let Some(o) = b.jet_order().order.finite() {
                if u64::from(o) * den < num * u64::from(k) {
                    (num, den) = (u64::from(o), u64::from(k));
                }
            }
        }
        let honest = |m: u32| ((num * u64::from(m) + den - 1) / den) as u32;
        let unit = unit.with_precision(honest(n.saturating_sub(e))).as_inexact();
        let coefficients = (1..=e)
            .zip(coefficients)
            .map(|(k, b)| b.with_precision(honest(n.saturating_sub(e) + k)).as_inexact())
            .collect::<Vec<_>>();
        debug_assert!(coefficients.iter().all(|b| b.constant_term().is_zero()) || nv == 1);
        Ok(WeierstrassData { var: i, unit, coefficients, degree: e })
    }

    /// Splits `self = low + y^e * high` with `low` of `y`-degree below `e`.
    fn split_at_var_power(&self, i: usize, e: u32) -> (TruncatedSeries, TruncatedSeries) {
        let mut low = Vec::new();
        let mut high = Vec::new();
        for (m, c) in &self.terms {
            if m.exps()[i] < e {
                low.push((m.clone(), c.clone()));
            } else {
                let mut ex = m.exps().to_vec();
                ex[i] -= e;
                high.push((Monomial::new(ex), c.clone()));
            }
        }
        (
            Self::from_terms(&self.ctx, self.precision, low, self.exact),
            Self::from_terms(&self.ctx, self.precision, high, self.exact),
        )
    }

    /// Polynomial quotient `self / d` when both are exact and `d` divides
    /// `self`; `None` otherwise.
    pub fn divide_exact(&self, d: &TruncatedSeries) -> Option<TruncatedSeries> {
        if !self.exact || !d.exact || self.check_ctx(d).is_err() {
            return None;
        }
        let field = self.ctx.field;
        let (lm, lc) = d.terms.iter().next_back()?;
        let lc_inv = field.inv(lc)?;
        let mut rem = self.terms.clone();
        let mut quot: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        while let Some((m, c)) = rem.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            if !lm.divides(&m) {
                return None;
            }
            let qm = lm.quotient_of(&m);
            let qc = field.mul(&c, &lc_inv);
            for (dm, dc) in &d.terms {
                let t = qm.mul(dm);
                let v = field.sub(rem.get(&t).unwrap_or(&Scalar::zero()), &field.mul(&qc, dc));
                if v.is_zero() {
                    rem.remove(&t);
                } else {
                    rem.insert(t, v);
                }
            }
            quot.insert(qm, qc);
        }
        Some(TruncatedSeries { ctx: self.ctx.clone(), precision: self.precision, terms: quot, exact: true })
    }

    /// Re-expresses the series over another context, mapping variables by
    /// name. Fails if a used variable is absent from the target.
    pub fn change_context(&self, target: &Ctx) -> Result<TruncatedSeries, SeriesError> {
        if target.field != self.ctx.field {
            return Err(SeriesError::MixedContext);
        }
        let mut map = Vec::with_capacity(self.ctx.nvars());
        for (j, v) in self.ctx.vars.iter().enumerate() {
            let used = self.involves(j);
            match target.index_of(v) {
                Some(t) => map.push(Some(t)),
                None if !used => map.push(None),
                None => return Err(SeriesError::UnknownVariable(v.clone())),
            }
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; target.nvars()];
            for (j, &k) in m.exps().iter().enumerate() {
                if let Some(t) = map[j] {
                    e[t] += k;
                }
            }
            (Monomial::new(e), c.clone())
        });
        Ok(Self::from_terms(target, self.precision, terms.collect::<Vec<_>>(), self.exact))
    }

    /// Polynomial-grammar text for the stored terms.
    pub fn to_poly_string(&self) -> String {
        let field = self.ctx.field;
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let c = field.signed_repr(c);
            let neg = c < Scalar::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = Vec::new();
            if !mag.is_one() || m.degree() == 0 {
                factors.push(scalar_to_string(&mag));
            }
            for (j, &k) in m.exps().iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(self.ctx.vars[j].clone()),
                    _ => factors.push(format!("{}^{}", self.ctx.vars[j], k)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly_string())?;
        if !self.exact {
            write!(f, " + O({})", self.precision)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_series;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn p(text: &str, vars: &[&str], n: u32) -> TruncatedSeries {
        parse_series(text, vars, q(), n).unwrap()
    }

    #[test]
    fn monomial_product() {
        let y = p("y", &["x", "y"], 8);
        let xy = p("x*y", &["x", "y"], 8);
        let prod = y.mul(&xy).unwrap();
        assert!(prod.equals_exactly(&p("x*y^2", &["x", "y"], 8)));
    }

    #[test]
    fn telescoping_product() {
        let a = p("1+x+x^2+x^3", &["x"], 4).as_inexact();
        let b = p("1-x", &["x"], 4);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.to_poly_string(), "1");
        assert!(!prod.is_exact());
    }

    #[test]
    fn truncation_clears_exactness() {
        let a = p("x^2", &["x"], 3);
        let prod = a.mul(&a).unwrap();
        assert!(prod.is_zero());
        assert!(!prod.is_exact());
    }

    #[test]
    fn mixed_context_rejected() {
        let a = p("x", &["x"], 3);
        let b = p("x", &["x", "y"], 3);
        assert_eq!(a.mul(&b).unwrap_err(), SeriesError::MixedContext);
        let c = parse_series("x", &["x"], FieldSpec::prime(5).unwrap(), 3).unwrap();
        assert_eq!(a.add(&c).unwrap_err(), SeriesError::MixedContext);
    }

    #[test]
    fn geometric_inverse() {
        let a = p("1+x", &["x"], 4);
        let inv = a.invert_unit().unwrap();
        assert_eq!(inv.to_poly_string(), "1 - x + x^2 - x^3");
        assert!(!inv.is_exact());
        let two = p("2", &["x"], 4);
        let half = two.invert_unit().unwrap();
        assert_eq!(half.to_poly_string(), "1/2");
        assert!(half.is_exact());
        assert_eq!(p("x", &["x"], 4).invert_unit().unwrap_err(), SeriesError::NotAUnit);
    }

    #[test]
    fn substitution_examples() {
        let f = p("x*y^2", &["x", "y"], 8);
        let g = f.substitute_named(&[("y", p("y+x", &["x", "y"], 8))]).unwrap();
        assert!(g.equals_exactly(&p("x*y^2 + 2*x^2*y + x^3", &["x", "y"], 8)));
        let v3 = ["x", "y", "z"];
        let f = p("x*y^2 + z^2", &v3, 8);
        let g = f.substitute_named(&[("z", p("0", &v3, 8))]).unwrap();
        assert!(g.equals_exactly(&p("x*y^2", &v3, 8)));
        let err = f.substitute_named(&[("x", p("1", &v3, 8))]).unwrap_err();
        assert_eq!(err, SeriesError::NonLocalSubstitution("x".into()));
    }

    #[test]
    fn jet_order_examples() {
        let f = p("x^2*y + y^5", &["x", "y"], 8);
        let j = f.jet_order();
        assert_eq!(j.order, Order::Finite(3));
        assert_eq!(j.leading_form.to_poly_string(), "x^2*y");
        assert_eq!(p("0", &["x"], 5).jet_order().order, Order::Infinite);
        assert_eq!(p("0", &["x"], 5).as_inexact().jet_order().order, Order::AbovePrecision);
        let g = p("x2^2 + x0^3", &["x0", "x1", "x2"], 8);
        let j = g.jet_order();
        assert_eq!(j.order, Order::Finite(2));
        assert_eq!(j.leading_form.to_poly_string(), "x2^2");
    }

    #[test]
    fn weierstrass_examples() {
        let v = ["x", "y"];
        let f = p("y^2 + x^3", &v, 10);
        let w = f.weierstrass_prepare(1).unwrap();
        assert_eq!(w.degree, 2);
        assert_eq!(w.unit.to_poly_string(), "1");
        assert!(w.coefficients[0].is_zero());
        assert_eq!(w.coefficients[1].to_poly_string(), "x^3");

        let f = p("(1+x)*(y^2 + x^3)", &v, 10);
        let w = f.weierstrass_prepare(1).unwrap();
        assert!(w.unit.agrees_with(&p("1+x", &v, 10)));
        assert!(w.coefficients[0].is_zero());
        assert!(w.coefficients[1].agrees_with(&p("x^3", &v, 10)));
        assert!(w.reconstruct().agrees_with(&f));

        let f = p("x*y", &v, 10);
        assert_eq!(f.weierstrass_prepare(1).unwrap_err(), SeriesError::NotRegular("y".into()));
    }

    #[test]
    fn weierstrass_nontrivial_unit() {
        let v = ["x", "y"];
        let f = p("y^2 + x*y^3 + x^2*y + x^3 + y^4", &v, 12);
        let w = f.weierstrass_prepare(1).unwrap();
        assert!(w.reconstruct().agrees_with(&f));
        assert!(w.unit.is_unit());
        assert!(w.coefficients.iter().all(|b| b.constant_term().is_zero() && !b.involves(1)));
    }

    #[test]
    fn change_context_embeds() {
        let f = p("x*y", &["x", "y"], 6);
        let ctx = SeriesContext::new(["x", "y", "z"], q());
        let g = f.change_context(&ctx).unwrap();
        assert_eq!(g.to_poly_string(), "x*y");
        let small = SeriesContext::new(["x"], q());
        assert!(f.change_context(&small).is_err());
    }

    #[test]
    fn display_uses_grammar() {
        let f = p("-x + 1/2*y^3 - 3", &["x", "y"], 6);
        assert_eq!(f.to_poly_string(), "-3 - x + 1/2*y^3");
        let back = p(&f.to_poly_string(), &["x", "y"], 6);
        assert!(back.equals_exactly(&f));
    }
}
