//! The local model of an ordinary cusp: the subring R = k + t^2 k[[t]] of
//! the full series ring, its maximal ideal m = t^2 k[[t]], and the
//! one-dimensional quotient of the normalization by R. Everything is a
//! thin predicate layer over truncated series; the t^1 coefficient is the
//! whole story.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::series::PSeries;

/// Session configuration: ground field and working precision, shared by
/// every series in a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    pub field: Field,
    pub precision: usize,
}

/// Serializable form of the field descriptor.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldDesc {
    Q,
    Fp { p: u64 },
}

impl FieldDesc {
    pub fn to_field(&self) -> Result<Field> {
        match self {
            FieldDesc::Q => Ok(Field::Rational),
            FieldDesc::Fp { p } => Field::Prime(*p).validate(),
        }
    }

    pub fn of(field: Field) -> Self {
        match field {
            Field::Rational => FieldDesc::Q,
            Field::Prime(p) => FieldDesc::Fp { p },
        }
    }
}

impl Context {
    pub fn new(field: Field, precision: usize) -> Result<Self> {
        field.validate()?;
        if precision < 4 {
            return Err(Error::PrecisionTooLow { required: 4, actual: precision });
        }
        Ok(Context { field, precision })
    }

    pub fn zero(&self) -> PSeries {
        PSeries::zero(self.field, self.precision)
    }

    pub fn one(&self) -> PSeries {
        PSeries::one(self.field, self.precision)
    }

    pub fn monomial(&self, exp: usize, c: Scalar) -> PSeries {
        PSeries::monomial(self.field, self.precision, exp, c)
    }

    pub fn series(&self, ints: &[i64]) -> PSeries {
        PSeries::from_ints(self.field, self.precision, ints)
    }

    pub fn with_precision(&self, precision: usize) -> Self {
        Context { field: self.field, precision }
    }
}

/// Membership in R: no t^1 term.
pub fn in_subring(f: &PSeries) -> bool {
    f.coeff(1).is_zero()
}

/// The class of f in the quotient of the normalization by R, expressed in
/// the distinguished generator (the class of t): just the t^1 coefficient.
pub fn quotient_class(f: &PSeries) -> Scalar {
    f.coeff(1).clone()
}

/// Membership in the maximal ideal m of R: valuation at least 2.
pub fn in_max_ideal(f: &PSeries) -> bool {
    match f.val() {
        None => true,
        Some(v) => v >= 2,
    }
}

/// The identification of m with the full series ring: x maps to t^2 x.
/// On coefficient windows this is a bijection from exponents 0..=N-2 onto
/// the ideal slots 2..=N.
pub fn ideal_from_series(x: &PSeries) -> PSeries {
    x.shift_up(2)
}

/// Inverse of `ideal_from_series` on elements of m.
pub fn series_from_ideal(f: &PSeries) -> Result<PSeries> {
    if !in_max_ideal(f) {
        return Err(Error::ValuationDrop { num: f.val().unwrap_or(0), den: 2 });
    }
    f.shift_down(2)
}
