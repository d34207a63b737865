//! Finite-dimensional associative algebras given by structure constants,
//! with radicals and idempotent searches used to decide locality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bivariate::{u_degree, u_divrem, u_mul, u_sub, UPoly};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{axpy, is_zero_vector, nullspace, unit_vector, zero_vector, Subspace, Vector};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("the span is not closed under multiplication")]
    NotClosed,
    #[error("the span does not contain the identity")]
    MissingIdentity,
}

/// `table[i][j]` is the product of basis elements `i` and `j`.
#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    field: FieldSpec,
    table: Vec<Vec<Vector>>,
    one: Vector,
}

impl FiniteAlgebra {
    pub fn new(field: FieldSpec, table: Vec<Vec<Vector>>, one: Vector) -> Self {
        FiniteAlgebra { field, table, one }
    }

    /// The subalgebra spanned by `span` inside an ambient algebra given by
    /// its multiplication. The basis is the echelon basis of `span`.
    pub fn from_span(
        field: FieldSpec,
        span: &Subspace,
        ambient_one: &[Scalar],
        ambient_mul: impl Fn(&[Scalar], &[Scalar]) -> Vector,
    ) -> Result<Self, AlgebraError> {
        Self::from_quotient(field, span, &Subspace::new(field, span.ncols()), ambient_one, ambient_mul)
    }

    /// `(span + ideal) / ideal` for a two-sided ideal of the ambient algebra.
    /// Basis elements are reduced modulo `ideal`.
    pub fn from_quotient(
        field: FieldSpec,
        span: &Subspace,
        ideal: &Subspace,
        ambient_one: &[Scalar],
        ambient_mul: impl Fn(&[Scalar], &[Scalar]) -> Vector,
    ) -> Result<Self, AlgebraError> {
        let reduced = Subspace::spanned_by(field, span.ncols(), span.basis().map(|v| ideal.reduce(v)));
        let basis: Vec<Vector> = reduced.basis().cloned().collect();
        let coords = |v: &[Scalar]| reduced.coordinates(&ideal.reduce(v));
        let mut table = Vec::with_capacity(basis.len());
        for a in &basis {
            let mut row = Vec::with_capacity(basis.len());
            for b in &basis {
                row.push(coords(&ambient_mul(a, b)).ok_or(AlgebraError::NotClosed)?);
            }
            table.push(row);
        }
        let one = coords(ambient_one).ok_or(AlgebraError::MissingIdentity)?;
        Ok(FiniteAlgebra { field, table, one })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.table.len()
    }

    pub fn one(&self) -> &Vector {
        &self.one
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &Vector {
        &self.table[i][j]
    }

    pub fn mul(&self, a: &[Scalar], b: &[Scalar]) -> Vector {
        let mut out = zero_vector(self.dim());
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                axpy(self.field, &mut out, &self.field.mul(ai, bj), &self.table[i][j]);
            }
        }
        out
    }

    pub fn pow(&self, a: &[Scalar], e: u64) -> Vector {
        let mut acc = self.one.clone();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.table[i][j] == self.table[j][i]))
    }

    pub fn is_associative(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                (0..n).all(|k| {
                    let l = self.mul(&self.table[i][j], &unit_vector(n, k));
                    let r = self.mul(&unit_vector(n, i), &self.table[j][k]);
                    l == r
                })
            })
        })
    }

    pub fn is_idempotent(&self, e: &[Scalar]) -> bool {
        self.mul(e, e) == e
    }

    pub fn is_trivial_idempotent(&self, e: &[Scalar]) -> bool {
        is_zero_vector(e) || e == self.one.as_slice()
    }

    /// `{a : tr(L_{ab}) = 0 for all b}`. Equals the radical in
    /// characteristic zero and contains it in general.
    pub fn trace_form_kernel(&self) -> Subspace {
        let n = self.dim();
        let traces: Vec<Scalar> = (0..n)
            .map(|l| (0..n).fold(Scalar::zero(), |acc, i| self.field.add(&acc, &self.table[l][i][i])))
            .collect();
        let gram: Vec<Vector> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.table[i][j]
                            .iter()
                            .zip(&traces)
                            .fold(Scalar::zero(), |acc, (c, t)| self.field.add(&acc, &self.field.mul(c, t)))
                    })
                    .collect()
            })
            .collect();
        Subspace::spanned_by(self.field, n, nullspace(self.field, &gram, n))
    }

    /// Kernel of an iterated Frobenius; the nilradical of a commutative
    /// algebra over `F_p`.
    pub fn frobenius_kernel(&self) -> Subspace {
        let n = self.dim();
        let p = self.field.characteristic();
        let mut q = p;
        while (q as usize) < n.max(2) {
            q *= p;
        }
        let images: Vec<Vector> = (0..n).map(|i| self.pow(&unit_vector(n, i), q)).collect();
        // Rows of the matrix of b ↦ b^q are the coordinates of images, so
        // the kernel solves sum_i c_i images[i] = 0.
        let rows: Vec<Vector> = (0..n).map(|r| images.iter().map(|img| img[r].clone()).collect()).collect();
        Subspace::spanned_by(self.field, n, nullspace(self.field, &rows, n))
    }

    /// Whether a subspace is a nilpotent two-sided ideal.
    pub fn is_nilpotent_ideal(&self, s: &Subspace) -> bool {
        let n = self.dim();
        let gens: Vec<Vector> = s.basis().cloned().collect();
        for g in &gens {
            for i in 0..n {
                let e = unit_vector(n, i);
                if !s.contains(&self.mul(g, &e)) || !s.contains(&self.mul(&e, g)) {
                    return false;
                }
            }
        }
        let mut power = gens.clone();
        for _ in 0..=n {
            if power.is_empty() {
                return true;
            }
            let next = Subspace::spanned_by(
                self.field,
                n,
                power.iter().flat_map(|a| gens.iter().map(move |b| (a, b))).map(|(a, b)| self.mul(a, b)),
            );
            if next.dim() >= power.len() && next.dim() > 0 {
                return false;
            }
            power = next.basis().cloned().collect();
        }
        power.is_empty()
    }

    /// The radical, when it can be certified: the trace kernel in
    /// characteristic zero, the Frobenius kernel for commutative algebras
    /// over `F_p`, otherwise the trace kernel if it is a nilpotent ideal.
    pub fn radical(&self) -> Option<Subspace> {
        let p = self.field.characteristic();
        if p == 0 {
            return Some(self.trace_form_kernel());
        }
        if self.is_commutative() {
            return Some(self.frobenius_kernel());
        }
        let k = self.trace_form_kernel();
        self.is_nilpotent_ideal(&k).then_some(k)
    }

    /// Monic minimal polynomial of `a`.
    pub fn min_poly(&self, a: &[Scalar]) -> UPoly {
        let n = self.dim();
        let mut powers = Subspace::new(self.field, n);
        let mut stored: Vec<Vector> = Vec::new();
        let mut cur = self.one.clone();
        loop {
            if let Some(c) = solve_in_span(self.field, &stored, &cur, &powers) {
                let mut poly: UPoly = c.iter().map(|x| self.field.neg(x)).collect();
                poly.push(Scalar::one());
                return poly;
            }
            powers.insert(cur.clone());
            stored.push(cur.clone());
            cur = self.mul(&cur, a);
        }
    }

    pub fn eval_poly(&self, poly: &[Scalar], a: &[Scalar]) -> Vector {
        let mut acc = zero_vector(self.dim());
        for c in poly.iter().rev() {
            acc = self.mul(&acc, a);
            axpy(self.field, &mut acc, c, &self.one);
        }
        acc
    }

    /// A nontrivial idempotent in `k[a]`, found by splitting the minimal
    /// polynomial at a root in `k`.
    pub fn idempotent_from(&self, a: &[Scalar]) -> Option<Vector> {
        let mu = self.min_poly(a);
        for r in roots(self.field, &mu) {
            let lin = vec![self.field.neg(&r), Scalar::one()];
            let mut g: UPoly = vec![Scalar::one()];
            let mut h = mu.clone();
            loop {
                let (q, rem) = u_divrem(self.field, &h, &lin);
                if u_degree(&rem).is_some() {
                    break;
                }
                h = q;
                g = u_mul(self.field, &g, &lin);
            }
            if u_degree(&h).unwrap_or(0) == 0 {
                continue;
            }
            let (_, _, t) = u_ext_gcd(self.field, &g, &h);
            let e = self.eval_poly(&u_mul(self.field, &t, &h), a);
            if self.is_idempotent(&e) && !self.is_trivial_idempotent(&e) {
                return Some(e);
            }
        }
        None
    }

    /// Every element of an algebra over `F_p`, tested for idempotence.
    /// `None` over `Q` or when `p^dim` exceeds `cap`.
    pub fn exhaustive_idempotent(&self, cap: u64) -> Option<Option<Vector>> {
        let elems = self.field.elements()?;
        let p = elems.len() as u64;
        let n = self.dim() as u32;
        let total = p.checked_pow(n).filter(|&t| t <= cap)?;
        for idx in 0..total {
            let mut k = idx;
            let v: Vector = (0..n)
                .map(|_| {
                    let d = (k % p) as usize;
                    k /= p;
                    elems[d].clone()
                })
                .collect();
            if self.is_idempotent(&v) && !self.is_trivial_idempotent(&v) {
                return Some(Some(v));
            }
        }
        Some(None)
    }

    pub fn random_element(&self, rng: &mut ChaCha8Rng) -> Vector {
        (0..self.dim()).map(|_| self.field.from_i64(rng.gen_range(-4..=4))).collect()
    }
}

fn solve_in_span(field: FieldSpec, stored: &[Vector], target: &[Scalar], span: &Subspace) -> Option<Vector> {
    if !span.contains(target) {
        return None;
    }
    let n = stored.len();
    let rows: Vec<Vector> = (0..target.len()).map(|r| stored.iter().map(|s| s[r].clone()).collect()).collect();
    crate::linalg::solve(field, &rows, target, n)
}

/// `(g, s, t)` with `s a + t b = g`, `g` monic.
pub fn u_ext_gcd(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> (UPoly, UPoly, UPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1): (UPoly, UPoly) = (vec![Scalar::one()], vec![]);
    let (mut t0, mut t1): (UPoly, UPoly) = (vec![], vec![Scalar::one()]);
    while u_degree(&r1).is_some() {
        let (q, r) = u_divrem(field, &r0, &r1);
        let s2 = u_sub(field, &s0, &u_mul(field, &q, &s1));
        let t2 = u_sub(field, &t0, &u_mul(field, &q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let d = u_degree(&r0).expect("not both zero");
    let inv = field.inv(&r0[d]).expect("nonzero");
    let scale = |p: &UPoly| p.iter().map(|c| field.mul(c, &inv)).collect::<UPoly>();
    (scale(&r0), scale(&s0), scale(&t0))
}

/// Roots in the prime field or in `Q` (rational root test, skipped when the
/// integers involved are too large to factor by trial division).
pub fn roots(field: FieldSpec, poly: &[Scalar]) -> Vec<Scalar> {
    let eval = |x: &Scalar| poly.iter().rev().fold(Scalar::zero(), |acc, c| field.add(&field.mul(&acc, x), c));
    if let Some(elems) = field.elements() {
        if elems.len() > 100_000 {
            return vec![];
        }
        return elems.into_iter().filter(|x| eval(x).is_zero()).collect();
    }
    let lcm = poly.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = poly.iter().map(|c| (c * Scalar::from_integer(lcm.clone())).to_integer()).collect();
    let Some(low) = ints.iter().position(|c| !c.is_zero()) else { return vec![] };
    let mut out = Vec::new();
    if low > 0 {
        out.push(Scalar::zero());
    }
    let (Some(c0), Some(cn)) = (ints[low].abs().to_u64(), ints.last().and_then(|c| c.abs().to_u64())) else {
        return out;
    };
    const LIMIT: u64 = 1_000_000_000_000;
    if c0 > LIMIT || cn > LIMIT {
        return out;
    }
    for d in divisors(c0) {
        for e in divisors(cn) {
            for sign in [1i64, -1] {
                let x = Scalar::new(BigInt::from(d) * sign, BigInt::from(e));
                if !out.contains(&x) && eval(&x).is_zero() {
                    out.push(x);
                }
            }
        }
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

#[derive(Clone, Debug, PartialEq)]
pub enum Locality {
    Local,
    /// A nontrivial idempotent was found.
    NotLocal(Vector),
    Inconclusive(String),
}

/// Decides whether the algebra is local, i.e. has no idempotents besides
/// 0 and 1.
pub fn decide_locality(alg: &FiniteAlgebra, seed: u64, exhaustive_cap: u64) -> Locality {
    if alg.dim() <= 1 {
        return Locality::Local;
    }
    if let Some(rad) = alg.radical() {
        if alg.dim() - rad.dim() == 1 {
            return Locality::Local;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..48 {
        let a = alg.random_element(&mut rng);
        if let Some(e) = alg.idempotent_from(&a) {
            return Locality::NotLocal(e);
        }
    }
    if let Some(found) = alg.exhaustive_idempotent(exhaustive_cap) {
        return found.map_or(Locality::Local, Locality::NotLocal);
    }
    Locality::Inconclusive("semisimple quotient has dimension above one and no idempotent was found".into())
}
