//! Polynomials in `k[x][y]` and their greatest common divisors.
//!
//! Used by the exact reducedness test: a polynomial germ is non-reduced
//! exactly when `gcd(f, f_x, f_y)` vanishes at the origin.

use num_traits::Zero;

use crate::field::{FieldSpec, Scalar};
use crate::series::{Ctx, Monomial, TruncatedSeries};

/// Univariate polynomial, coefficients in increasing degree, no trailing zeros.
pub type UPoly = Vec<Scalar>;

fn trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn u_degree(p: &[Scalar]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn u_add(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> UPoly {
    let n = a.len().max(b.len());
    let z = Scalar::zero();
    trim((0..n).map(|i| field.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect())
}

pub fn u_sub(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> UPoly {
    let nb: UPoly = b.iter().map(|c| field.neg(c)).collect();
    u_add(field, a, &nb)
}

pub fn u_mul(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = field.add(&out[i + j], &field.mul(ai, bj));
        }
    }
    trim(out)
}

/// Quotient and remainder; `b` must be nonzero.
pub fn u_divrem(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> (UPoly, UPoly) {
    let db = u_degree(b).expect("division by zero polynomial");
    let inv = field.inv(&b[db]).expect("nonzero");
    let mut r = trim(a.to_vec());
    let mut q = vec![Scalar::zero(); r.len().saturating_sub(db)];
    while let Some(dr) = u_degree(&r) {
        if dr < db {
            break;
        }
        let c = field.mul(&r[dr], &inv);
        let shift = dr - db;
        for (k, bk) in b.iter().enumerate().take(db + 1) {
            r[shift + k] = field.sub(&r[shift + k], &field.mul(&c, bk));
        }
        q[shift] = c;
        r = trim(r);
    }
    (trim(q), r)
}

fn u_monic(field: FieldSpec, a: UPoly) -> UPoly {
    match u_degree(&a) {
        None => vec![],
        Some(d) => {
            let inv = field.inv(&a[d]).expect("nonzero");
            a.iter().map(|c| field.mul(c, &inv)).collect()
        }
    }
}

/// Monic gcd (zero if both inputs are zero).
pub fn u_gcd(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> UPoly {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = u_divrem(field, &a, &b);
        a = b;
        b = r;
    }
    u_monic(field, a)
}

/// Element of `k[x][y]`: entry `j` is the coefficient of `y^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly {
    field: FieldSpec,
    coeffs: Vec<UPoly>,
}

impl BiPoly {
    pub fn new(field: FieldSpec, coeffs: Vec<UPoly>) -> Self {
        let mut coeffs: Vec<UPoly> = coeffs.into_iter().map(trim).collect();
        while coeffs.last().is_some_and(|c| c.is_empty()) {
            coeffs.pop();
        }
        BiPoly { field, coeffs }
    }

    /// From a series in two variables, read as `(x, y) = (var 0, var 1)`.
    pub fn from_series(f: &TruncatedSeries) -> Self {
        assert_eq!(f.ctx().nvars(), 2, "bivariate input expected");
        let mut coeffs: Vec<UPoly> = Vec::new();
        for (m, c) in f.terms() {
            let (i, j) = (m.exps()[0] as usize, m.exps()[1] as usize);
            if coeffs.len() <= j {
                coeffs.resize(j + 1, Vec::new());
            }
            if coeffs[j].len() <= i {
                coeffs[j].resize(i + 1, Scalar::zero());
            }
            coeffs[j][i] = c.clone();
        }
        BiPoly::new(f.field(), coeffs)
    }

    pub fn to_series(&self, ctx: &Ctx, precision: u32) -> TruncatedSeries {
        let mut terms = Vec::new();
        for (j, cj) in self.coeffs.iter().enumerate() {
            for (i, c) in cj.iter().enumerate() {
                if !c.is_zero() {
                    terms.push((Monomial::new(vec![i as u32, j as u32]), c.clone()));
                }
            }
        }
        TruncatedSeries::from_terms(ctx, precision, terms, true)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn y_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn value_at_origin(&self) -> Scalar {
        self.coeffs.first().and_then(|c| c.first()).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn content(&self) -> UPoly {
        self.coeffs.iter().fold(Vec::new(), |g, c| u_gcd(self.field, &g, c))
    }

    fn map_coeffs(&self, f: impl Fn(&UPoly) -> UPoly) -> BiPoly {
        BiPoly::new(self.field, self.coeffs.iter().map(f).collect())
    }

    pub fn primitive_part(&self) -> BiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        self.map_coeffs(|a| u_divrem(self.field, a, &c).0)
    }

    pub fn scale(&self, c: &[Scalar]) -> BiPoly {
        self.map_coeffs(|a| u_mul(self.field, a, c))
    }

    fn sub(&self, other: &BiPoly) -> BiPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let e = Vec::new();
        BiPoly::new(
            self.field,
            (0..n)
                .map(|j| u_sub(self.field, self.coeffs.get(j).unwrap_or(&e), other.coeffs.get(j).unwrap_or(&e)))
                .collect(),
        )
    }

    fn shift_y(&self, k: usize) -> BiPoly {
        let mut coeffs = vec![Vec::new(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        BiPoly::new(self.field, coeffs)
    }

    /// Pseudo-remainder of `self` by `b` with respect to `y`.
    pub fn pseudo_rem(&self, b: &BiPoly) -> BiPoly {
        let db = b.y_degree().expect("nonzero divisor");
        let lb = b.coeffs[db].clone();
        let mut r = self.clone();
        while let Some(dr) = r.y_degree() {
            if dr < db {
                break;
            }
            let lr = r.coeffs[dr].clone();
            r = r.scale(&lb).sub(&b.scale(&lr).shift_y(dr - db));
        }
        r
    }

    /// Normalizes so that the leading coefficient has a monic leading term.
    fn normalized(&self) -> BiPoly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lc) => {
                let d = u_degree(lc).expect("trimmed");
                let inv = self.field.inv(&lc[d]).expect("nonzero");
                self.scale(&[inv])
            }
        }
    }

    pub fn gcd(&self, other: &BiPoly) -> BiPoly {
        if self.is_zero() {
            return other.normalized();
        }
        if other.is_zero() {
            return self.normalized();
        }
        let c = u_gcd(self.field, &self.content(), &other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.y_degree() < b.y_degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            if b.y_degree() == Some(0) {
                return BiPoly::new(self.field, vec![c]);
            }
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                return b.scale(&c).normalized();
            }
            a = b;
            b = r.primitive_part();
        }
    }
}

/// `gcd(f, f_x, f_y)` for a polynomial in two variables.
pub fn singular_gcd(f: &TruncatedSeries) -> BiPoly {
    let p = BiPoly::from_series(f);
    let fx = BiPoly::from_series(&f.partial(0));
    let fy = BiPoly::from_series(&f.partial(1));
    p.gcd(&fx).gcd(&fy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_series;

    fn bp(t: &str, field: FieldSpec) -> BiPoly {
        BiPoly::from_series(&parse_series(t, &["x", "y"], field, 40).unwrap())
    }

    #[test]
    fn univariate_gcd() {
        let q = FieldSpec::rationals();
        let a: UPoly = [-1, 0, 1].iter().map(|&c| q.from_i64(c)).collect();
        let b: UPoly = [1, 2, 1].iter().map(|&c| q.from_i64(c)).collect();
        assert_eq!(u_gcd(q, &a, &b), vec![q.one(), q.one()]);
    }

    #[test]
    fn bivariate_gcd_recovers_common_factor() {
        let q = FieldSpec::rationals();
        let g = bp("(y^2 - x^3)*(x + y)", q).gcd(&bp("(y^2 - x^3)*(x - y + 1)", q));
        assert_eq!(g, bp("y^2 - x^3", q).normalized());
        let one = bp("x*y + 1", q).gcd(&bp("x + y", q));
        assert_eq!(one.y_degree(), Some(0));
    }

    #[test]
    fn content_is_kept() {
        let q = FieldSpec::rationals();
        let g = bp("x^2*y + x^2", q).gcd(&bp("x*y^2 - x", q));
        assert_eq!(g, bp("x*y + x", q).normalized());
    }

    #[test]
    fn singular_locus_gcd() {
        let q = FieldSpec::rationals();
        let f = parse_series("x*y^2", &["x", "y"], q, 40).unwrap();
        assert!(singular_gcd(&f).value_at_origin().is_zero());
        let f = parse_series("y^2 - x^3", &["x", "y"], q, 40).unwrap();
        assert!(!singular_gcd(&f).value_at_origin().is_zero());
        let f3 = FieldSpec::prime(3).unwrap();
        let f = parse_series("x^3 + y^3", &["x", "y"], f3, 40).unwrap();
        assert!(singular_gcd(&f).value_at_origin().is_zero());
    }
}
