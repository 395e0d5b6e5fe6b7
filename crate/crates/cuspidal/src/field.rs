//! Exact scalars over the ground field: arbitrary-precision rationals or a
//! prime field with a session-fixed modulus.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Ground field descriptor, fixed once per computation session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    /// The rational numbers.
    Rational,
    /// The integers modulo a prime.
    Prime(u64),
}

impl Field {
    /// Validates the descriptor; prime moduli must actually be prime.
    pub fn validate(self) -> Result<Field> {
        match self {
            Field::Rational => Ok(self),
            Field::Prime(p) => {
                if is_prime_u64(p) {
                    Ok(self)
                } else {
                    Err(Error::NonPrimeModulus(p))
                }
            }
        }
    }

    pub fn zero(self) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::zero()),
            Field::Prime(p) => Scalar::Fp { value: 0, modulus: p },
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::one()),
            Field::Prime(p) => Scalar::Fp { value: 1 % p, modulus: p },
        }
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { value: r, modulus: p }
            }
        }
    }

    /// Parses the exact string format: `-3/7` or `5` over the rationals,
    /// a decimal residue over a prime field.
    pub fn parse_scalar(self, s: &str) -> Result<Scalar> {
        let s = s.trim();
        match self {
            Field::Rational => {
                let r = BigRational::from_str(s)
                    .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))?;
                Ok(Scalar::Rational(r))
            }
            Field::Prime(p) => {
                let neg = s.starts_with('-');
                let digits = if neg { &s[1..] } else { s };
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::Parse(format!("bad residue {s:?}")));
                }
                let mut v: u64 = 0;
                for b in digits.bytes() {
                    v = ((v as u128 * 10 + (b - b'0') as u128) % p as u128) as u64;
                }
                let v = if neg { (p - v) % p } else { v };
                Ok(Scalar::Fp { value: v, modulus: p })
            }
        }
    }
}

/// An element of the session ground field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Fp { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Fp { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Fp { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Fp { value, modulus } => *value == 1 % *modulus,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    None
                } else {
                    Some(Scalar::Rational(r.recip()))
                }
            }
            Scalar::Fp { value, modulus } => {
                if *value == 0 {
                    None
                } else {
                    Some(Scalar::Fp {
                        value: mod_pow(*value, *modulus - 2, *modulus),
                        modulus: *modulus,
                    })
                }
            }
        }
    }

    /// Exact division; panics on zero divisor (callers check pivots first).
    pub fn div(&self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv().expect("division by zero scalar")
    }

    fn check_same_field(&self, rhs: &Scalar) {
        assert_eq!(
            self.field(),
            rhs.field(),
            "scalar arithmetic across different ground fields"
        );
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => write!(f, "{r}"),
            Scalar::Fp { value, .. } => write!(f, "{value}"),
        }
    }
}

fn mod_pow(base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = base as u128 % p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt, $fp:expr) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.check_same_field(rhs);
                match (self, rhs) {
                    (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a $op b),
                    (Scalar::Fp { value: a, modulus: p }, Scalar::Fp { value: b, .. }) => {
                        Scalar::Fp { value: $fp(*a, *b, *p), modulus: *p }
                    }
                    _ => unreachable!(),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +, |a: u64, b: u64, p: u64| ((a as u128 + b as u128) % p as u128) as u64);
scalar_binop!(Sub, sub, -, |a: u64, b: u64, p: u64| ((a as u128 + p as u128 - b as u128) % p as u128) as u64);
scalar_binop!(Mul, mul, *, |a: u64, b: u64, p: u64| (a as u128 * b as u128 % p as u128) as u64);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Fp { value, modulus } => Scalar::Fp {
                value: (*modulus - *value % *modulus) % *modulus,
                modulus: *modulus,
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

/// Reduced magnitude estimate used only for pivot tie-breaking over the
/// rationals: smaller numerators and denominators make better pivots.
pub fn pivot_weight(s: &Scalar) -> u64 {
    match s {
        Scalar::Rational(r) => r.numer().abs().bits() + r.denom().bits(),
        Scalar::Fp { .. } => 1,
    }
}
