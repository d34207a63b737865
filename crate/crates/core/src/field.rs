//! Coefficient fields: the rationals and prime fields `F_p`.
//!
//! Every coefficient is carried as a [`Scalar`] (an arbitrary-precision
//! rational). Over `F_p` scalars are kept in canonical form, an integer in
//! `0..p`, so that equality of scalars is equality of field elements.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Scalar = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Rationals,
    PrimeField,
}

/// The coefficient field `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    kind: FieldKind,
    characteristic: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("denominator vanishes in characteristic {0}")]
    ZeroDenominator(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    pub fn rationals() -> Self {
        FieldSpec { kind: FieldKind::Rationals, characteristic: 0 }
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec { kind: FieldKind::PrimeField, characteristic: p })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn is_rationals(&self) -> bool {
        self.kind == FieldKind::Rationals
    }

    fn modulus(&self) -> BigInt {
        BigInt::from(self.characteristic)
    }

    /// Brings an arbitrary rational into canonical form for this field.
    pub fn reduce(&self, q: &Scalar) -> Result<Scalar, FieldError> {
        match self.kind {
            FieldKind::Rationals => Ok(q.clone()),
            FieldKind::PrimeField => {
                let p = self.modulus();
                let den = q.denom().mod_floor(&p);
                if den.is_zero() {
                    return Err(FieldError::ZeroDenominator(self.characteristic));
                }
                let num = q.numer().mod_floor(&p);
                let inv = mod_inverse(&den, &p);
                Ok(Scalar::from_integer((num * inv).mod_floor(&p)))
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        self.reduce(&Scalar::from_integer(BigInt::from(n)))
            .expect("integers never have a vanishing denominator")
    }

    pub fn from_bigint(&self, n: BigInt) -> Scalar {
        self.reduce(&Scalar::from_integer(n)).expect("integer")
    }

    pub fn zero(&self) -> Scalar {
        Scalar::zero()
    }

    pub fn one(&self) -> Scalar {
        Scalar::one()
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.canon(a + b)
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.canon(a - b)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.canon(a * b)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.canon(-a)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        match self.kind {
            FieldKind::Rationals => Some(a.recip()),
            FieldKind::PrimeField => {
                let p = self.modulus();
                Some(Scalar::from_integer(mod_inverse(a.numer(), &p)))
            }
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        self.inv(b).map(|ib| self.mul(a, &ib))
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// All elements of a prime field, in order `0..p`. `None` over `Q`.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        match self.kind {
            FieldKind::Rationals => None,
            FieldKind::PrimeField => Some(
                (0..self.characteristic)
                    .map(|i| Scalar::from_integer(BigInt::from(i)))
                    .collect(),
            ),
        }
    }

    /// Whether an integer is zero in this field.
    pub fn integer_vanishes(&self, n: u64) -> bool {
        self.characteristic != 0 && n % self.characteristic == 0
    }

    fn canon(&self, q: Scalar) -> Scalar {
        match self.kind {
            FieldKind::Rationals => q,
            FieldKind::PrimeField => {
                // Operands are canonical integers, so q is an integer.
                debug_assert!(q.is_integer());
                Scalar::from_integer(q.numer().mod_floor(&self.modulus()))
            }
        }
    }

    /// Renders a scalar; prime field elements use the symmetric range so
    /// that `p - 1` prints as `-1`.
    pub fn signed_repr(&self, a: &Scalar) -> Scalar {
        match self.kind {
            FieldKind::Rationals => a.clone(),
            FieldKind::PrimeField => {
                let p = self.modulus();
                let n = a.numer().clone();
                if n.clone() * 2 > p {
                    Scalar::from_integer(n - p)
                } else {
                    a.clone()
                }
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Rationals => write!(f, "Q"),
            FieldKind::PrimeField => write!(f, "Fp:{}", self.characteristic),
        }
    }
}

fn mod_inverse(a: &BigInt, p: &BigInt) -> BigInt {
    let e = a.extended_gcd(p);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(p)
}

/// Formats a scalar as `n` or `n/d`.
pub fn scalar_to_string(a: &Scalar) -> String {
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

pub fn scalar_abs_is_one(a: &Scalar) -> bool {
    a.abs().is_one()
}

pub fn scalar_to_u64(a: &Scalar) -> Option<u64> {
    if a.is_integer() {
        a.numer().to_u64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_canonical_forms() {
        let f7 = FieldSpec::prime(7).unwrap();
        let half = f7.reduce(&Scalar::new(1.into(), 2.into())).unwrap();
        assert_eq!(half, Scalar::from_integer(4.into()));
        assert_eq!(f7.mul(&half, &f7.from_i64(2)), f7.one());
        assert_eq!(f7.from_i64(-1), Scalar::from_integer(6.into()));
        assert_eq!(f7.signed_repr(&f7.from_i64(-1)), Scalar::from_integer((-1).into()));
        assert!(f7.reduce(&Scalar::new(1.into(), 14.into())).is_err());
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert_eq!(FieldSpec::prime(9), Err(FieldError::NotPrime(9)));
        assert!(FieldSpec::prime(2).is_ok());
    }

    #[test]
    fn inverses() {
        let q = FieldSpec::rationals();
        assert_eq!(q.inv(&q.from_i64(2)), Some(Scalar::new(1.into(), 2.into())));
        assert_eq!(q.inv(&q.zero()), None);
        let f5 = FieldSpec::prime(5).unwrap();
        for a in 1..5 {
            let x = f5.from_i64(a);
            assert_eq!(f5.mul(&x, &f5.inv(&x).unwrap()), f5.one());
        }
    }
}
