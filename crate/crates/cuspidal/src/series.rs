//! Truncated power series in the local parameter t, with a session-wide
//! precision N. A series is its coefficient vector for exponents 0..=N;
//! every product is truncated back to the same window. Truncation is the
//! only lossy step in the whole crate and N is carried explicitly.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PSeries {
    coeffs: Vec<Scalar>,
    field: Field,
}

impl PSeries {
    pub fn zero(field: Field, precision: usize) -> Self {
        PSeries {
            coeffs: vec![field.zero(); precision + 1],
            field,
        }
    }

    pub fn one(field: Field, precision: usize) -> Self {
        Self::monomial(field, precision, 0, field.one())
    }

    /// c * t^exp, truncated away entirely if exp exceeds the precision.
    pub fn monomial(field: Field, precision: usize, exp: usize, c: Scalar) -> Self {
        let mut s = Self::zero(field, precision);
        if exp <= precision {
            s.coeffs[exp] = c;
        }
        s
    }

    /// Builds a series from the coefficients for exponents 0, 1, 2, ...
    /// Shorter inputs are padded with zeros, longer inputs are rejected.
    pub fn from_coeffs(field: Field, precision: usize, coeffs: Vec<Scalar>) -> Result<Self> {
        if coeffs.len() > precision + 1 {
            return Err(Error::PrecisionMismatch(coeffs.len() - 1, precision));
        }
        let mut full = coeffs;
        for c in &full {
            if c.field() != field {
                return Err(Error::FieldMismatch);
            }
        }
        full.resize(precision + 1, field.zero());
        Ok(PSeries { coeffs: full, field })
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(field: Field, precision: usize, ints: &[i64]) -> Self {
        let coeffs = ints.iter().map(|&n| field.from_i64(n)).collect();
        Self::from_coeffs(field, precision, coeffs).expect("within precision")
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeff(&self, exp: usize) -> &Scalar {
        &self.coeffs[exp]
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Order of vanishing at t = 0. `None` encodes +infinity (the zero
    /// series at this precision).
    pub fn val(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch);
        }
        if self.coeffs.len() != rhs.coeffs.len() {
            return Err(Error::PrecisionMismatch(self.precision(), rhs.precision()));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(PSeries { coeffs, field: self.field })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(PSeries { coeffs, field: self.field })
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let n = self.coeffs.len();
        let mut coeffs = vec![self.field.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += &(a * b);
            }
        }
        Ok(PSeries { coeffs, field: self.field })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        PSeries { coeffs, field: self.field }
    }

    /// Multiplication by t^k; top coefficients fall off the window.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![self.field.zero(); n];
        for i in 0..n.saturating_sub(k) {
            coeffs[i + k] = self.coeffs[i].clone();
        }
        PSeries { coeffs, field: self.field }
    }

    /// Division by t^k for a series of valuation >= k. The k top slots of
    /// the result are filled with zeros, which is exactly the truncated
    /// model of the quotient.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > 0 {
            match self.val() {
                Some(v) if v < k => {
                    return Err(Error::ValuationDrop { num: v, den: k });
                }
                _ => {}
            }
        }
        let n = self.coeffs.len();
        let mut coeffs = vec![self.field.zero(); n];
        for i in k..n {
            coeffs[i - k] = self.coeffs[i].clone();
        }
        Ok(PSeries { coeffs, field: self.field })
    }

    /// Multiplicative inverse of a unit (nonzero constant term).
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.coeffs[0].inv().ok_or(Error::NonUnit)?;
        let n = self.coeffs.len();
        let mut coeffs = vec![self.field.zero(); n];
        coeffs[0] = c0.clone();
        for k in 1..n {
            let mut acc = self.field.zero();
            for i in 1..=k {
                if self.coeffs[i].is_zero() {
                    continue;
                }
                acc += &(&self.coeffs[i] * &coeffs[k - i]);
            }
            coeffs[k] = -&(&c0 * &acc);
        }
        Ok(PSeries { coeffs, field: self.field })
    }

    /// Exact division f / g in the truncated model: requires
    /// val(f) >= val(g); peels off t^val(g) and multiplies by the inverse
    /// of the remaining unit.
    pub fn divide_by(&self, g: &Self) -> Result<Self> {
        self.check_compatible(g)?;
        let vg = g.val().ok_or(Error::NonUnit)?;
        if self.is_zero() {
            return Ok(Self::zero(self.field, self.precision()));
        }
        let unit = g.shift_down(vg)?.invert()?;
        self.shift_down(vg)?.try_mul(&unit)
    }

    /// The same coefficients read at a different precision. Widening pads
    /// with zeros, narrowing drops the tail; both are honest re-truncations
    /// of polynomial input data.
    pub fn re_truncate(&self, precision: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(precision + 1, self.field.zero());
        PSeries { coeffs, field: self.field }
    }
}

impl fmt::Display for PSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{i}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(t^{})", self.coeffs.len())
    }
}

macro_rules! series_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&PSeries> for &PSeries {
            type Output = PSeries;
            fn $method(self, rhs: &PSeries) -> PSeries {
                self.$checked(rhs).expect("series operands incompatible")
            }
        }
    };
}

series_binop!(Add, add, try_add);
series_binop!(Sub, sub, try_sub);
series_binop!(Mul, mul, try_mul);

impl Neg for &PSeries {
    type Output = PSeries;
    fn neg(self) -> PSeries {
        PSeries {
            coeffs: self.coeffs().iter().map(|c| -c).collect(),
            field: self.field(),
        }
    }
}
