//! Dense exact matrices over the ground field with Gaussian elimination.
//! Everything downstream (residue computations, membership solves, kernel
//! searches) reduces to the routines in this file, so they are kept small
//! and deterministic: identical input produces identical pivot choices.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::field::{pivot_weight, Field, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KMatrix {
    rows: usize,
    cols: usize,
    elems: Vec<Scalar>,
    field: Field,
}

impl KMatrix {
    pub fn zero(rows: usize, cols: usize, field: Field) -> Self {
        KMatrix {
            rows,
            cols,
            elems: vec![field.zero(); rows * cols],
            field,
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let mut m = Self::zero(n, n, field);
        for i in 0..n {
            *m.at_mut(i, i) = field.one();
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut elems = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimMismatch(r, c, 1, row.len()));
            }
            for x in row {
                if x.field() != field {
                    return Err(Error::FieldMismatch);
                }
                elems.push(x);
            }
        }
        Ok(KMatrix { rows: r, cols: c, elems, field })
    }

    pub fn from_cols(field: Field, cols: Vec<Vec<Scalar>>) -> Result<Self> {
        Ok(Self::from_rows(field, cols)?.transpose())
    }

    pub fn from_ints(field: Field, rows: &[&[i64]]) -> Self {
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&n| field.from_i64(n)).collect())
            .collect();
        Self::from_rows(field, data).expect("rectangular integer data")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.elems[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.elems[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.elems[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zero(self.cols, self.rows, self.field);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *m.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        m
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols || self.field != other.field {
            return Err(Error::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        Ok(KMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            elems,
            field: self.field,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.field != other.field {
            return Err(Error::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut m = Self::zero(self.rows, self.cols + other.cols, self.field);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *m.at_mut(r, c) = self.at(r, c).clone();
            }
            for c in 0..other.cols {
                *m.at_mut(r, self.cols + c) = other.at(r, c).clone();
            }
        }
        Ok(m)
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = self.field.zero();
                for c in 0..self.cols {
                    let a = self.at(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc += &(a * &v[c]);
                    }
                }
                acc
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.elems.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    /// Pivot choice within a column favors entries with small numerator
    /// and denominator, which keeps rational growth tame; ties break to
    /// the lowest row index, so the form is deterministic.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut target = 0usize;
        for col in 0..self.cols {
            if target == self.rows {
                break;
            }
            let mut best: Option<(usize, u64)> = None;
            for r in target..self.rows {
                let x = self.at(r, col);
                if x.is_zero() {
                    continue;
                }
                let w = pivot_weight(x);
                if best.map_or(true, |(_, bw)| w < bw) {
                    best = Some((r, w));
                }
            }
            let Some((prow, _)) = best else { continue };
            self.swap_rows(target, prow);
            let inv = self.at(target, col).inv().expect("nonzero pivot");
            for c in col..self.cols {
                let x = self.at(target, c).clone();
                if !x.is_zero() {
                    *self.at_mut(target, c) = &x * &inv;
                }
            }
            for r in 0..self.rows {
                if r == target {
                    continue;
                }
                let factor = self.at(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let x = self.at(target, c).clone();
                    if !x.is_zero() {
                        let sub = &x * &factor;
                        *self.at_mut(r, c) -= &sub;
                    }
                }
            }
            pivots.push(col);
            target += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel. For each non-pivot column j there is one
    /// basis vector with a 1 in slot j; the zero matrix therefore yields
    /// the standard basis and a full-rank matrix yields the empty list.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (red, pivots) = self.rref();
        let mut basis = Vec::new();
        let mut pit = pivots.iter().peekable();
        let mut pivot_of_col = vec![None; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            pivot_of_col[c] = Some(i);
        }
        for j in 0..self.cols {
            if pit.peek() == Some(&&j) {
                pit.next();
                continue;
            }
            let mut v = vec![self.field.zero(); self.cols];
            v[j] = self.field.one();
            for (c, slot) in pivot_of_col.iter().enumerate() {
                if let Some(i) = slot {
                    v[c] = -red.at(*i, j);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solves self * x = b, returning any solution if one exists.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows, "rhs length mismatch");
        let rhs = KMatrix::from_cols(self.field, vec![b.to_vec()]).expect("column");
        let aug = self.hstack(&rhs).expect("same row count");
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = red.at(i, self.cols).clone();
        }
        Some(x)
    }

    /// Solves self * X = B column by column; None if any column fails.
    pub fn solve_matrix(&self, b: &KMatrix) -> Option<KMatrix> {
        if b.rows != self.rows {
            return None;
        }
        let mut cols = Vec::with_capacity(b.cols);
        for j in 0..b.cols {
            cols.push(self.solve(&b.col(j))?);
        }
        Some(KMatrix::from_cols(self.field, cols).expect("rectangular"))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = self.clone();
        for (x, y) in out.elems.iter_mut().zip(&other.elems) {
            *x += y;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        let aug = self.hstack(&Self::identity(self.rows, self.field))?;
        let (red, pivots) = aug.rref();
        // the identity block keeps the row rank full, so singularity shows
        // up as a pivot escaping into it
        if pivots.len() < self.rows || pivots.iter().any(|&p| p >= self.cols) {
            return Err(Error::Singular);
        }
        let mut inv = Self::zero(self.rows, self.cols, self.field);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *inv.at_mut(r, c) = red.at(r, self.cols + c).clone();
            }
        }
        Ok(inv)
    }

    /// Reduced column echelon form together with the pivot rows: the
    /// canonical basis of the column span used for subspace comparisons.
    pub fn column_echelon(&self) -> (Self, Vec<usize>) {
        let (red, pivots) = self.transpose().rref();
        let kept = red
            .elems
            .chunks(red.cols)
            .take(pivots.len())
            .map(|r| r.to_vec())
            .collect();
        let m = KMatrix::from_rows(self.field, kept).expect("rectangular");
        (m.transpose(), pivots)
    }

    pub fn is_reduced_column_echelon(&self) -> bool {
        let (ech, pivots) = self.column_echelon();
        pivots.len() == self.cols && ech == *self
    }
}

impl Mul<&KMatrix> for &KMatrix {
    type Output = KMatrix;
    fn mul(self, rhs: &KMatrix) -> KMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = KMatrix::zero(self.rows, rhs.cols, self.field);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.at(k, c);
                    if !b.is_zero() {
                        *out.at_mut(r, c) += &(a * b);
                    }
                }
            }
        }
        out
    }
}

/// Incrementally maintained row space, used for greedy independence
/// selection and cheap rank growth queries.
#[derive(Debug, Clone)]
pub struct RowSpan {
    dim: usize,
    field: Field,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl RowSpan {
    pub fn new(dim: usize, field: Field) -> Self {
        RowSpan { dim, field, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces v against the current span; returns the remainder.
    fn reduce(&self, mut v: Vec<Scalar>) -> Vec<Scalar> {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &(&f * y);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v.to_vec()).iter().all(Scalar::is_zero)
    }

    /// Remainder of v after reduction, as an owned vector.
    pub fn residual(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.reduce(v.to_vec())
    }

    /// Inserts v if independent of the span; returns true when the rank grew.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim);
        debug_assert!(v.iter().all(|s| s.field() == self.field));
        let red = self.reduce(v.to_vec());
        let Some(p) = red.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = red[p].inv().expect("nonzero");
        let norm: Vec<Scalar> = red.iter().map(|c| c * &inv).collect();
        for (row, &rp) in self.rows.iter_mut().zip(&self.pivots) {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&norm) {
                if !y.is_zero() {
                    *x -= &(&f * y);
                }
            }
            debug_assert!(rp != p);
        }
        self.rows.push(norm);
        self.pivots.push(p);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q: Field = Field::Rational;

    #[test]
    fn kernel_of_zero_matrix_is_standard_basis() {
        let z = KMatrix::zero(2, 2, Q);
        let k = z.kernel_basis();
        assert_eq!(k.len(), 2);
        assert_eq!(k[0], vec![Q.one(), Q.zero()]);
        assert_eq!(k[1], vec![Q.zero(), Q.one()]);
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = KMatrix::from_ints(Q, &[&[1, 1], &[1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        // proportional to (1, -1)
        assert_eq!(&k[0][0] + &k[0][1], Q.zero());
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn rref_idempotent() {
        let m = KMatrix::from_ints(Q, &[&[2, 4, 1], &[1, 2, 0], &[3, 6, 2]]);
        let (r1, p1) = m.rref();
        let (r2, p2) = r1.rref();
        assert_eq!(r1, r2);
        assert_eq!(p1, p2);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = KMatrix::from_ints(Q, &[&[2, 1], &[7, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, KMatrix::identity(2, Q));
        let s = KMatrix::from_ints(Q, &[&[1, 2], &[2, 4]]);
        assert_eq!(s.inverse(), Err(Error::Singular));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = KMatrix::from_ints(Q, &[&[1, 2], &[2, 4]]);
        let b = vec![Q.from_i64(3), Q.from_i64(6)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
        let bad = vec![Q.from_i64(3), Q.from_i64(7)];
        assert!(m.solve(&bad).is_none());
    }

    #[test]
    fn column_echelon_is_canonical() {
        let m = KMatrix::from_ints(Q, &[&[2, 2], &[2, 2], &[0, 4]]);
        let (ech, pivot_rows) = m.column_echelon();
        assert_eq!(ech, KMatrix::from_ints(Q, &[&[1, 0], &[1, 0], &[0, 1]]));
        assert_eq!(pivot_rows, vec![0, 2]);
        assert!(ech.is_reduced_column_echelon());
    }

    #[test]
    fn row_span_greedy() {
        let mut span = RowSpan::new(3, Q);
        assert!(span.insert(&[Q.from_i64(1), Q.from_i64(1), Q.zero()]));
        assert!(!span.insert(&[Q.from_i64(2), Q.from_i64(2), Q.zero()]));
        assert!(span.insert(&[Q.zero(), Q.from_i64(5), Q.zero()]));
        assert!(span.contains(&[Q.from_i64(7), Q.from_i64(3), Q.zero()]));
        assert!(!span.contains(&[Q.zero(), Q.zero(), Q.one()]));
        assert_eq!(span.rank(), 2);
    }

    fn small_matrix(r: usize, c: usize) -> impl Strategy<Value = KMatrix> {
        proptest::collection::vec(-5i64..=5, r * c).prop_map(move |v| {
            let rows = v.chunks(c).map(|ch| ch.to_vec()).collect::<Vec<_>>();
            KMatrix::from_ints(Q, &rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>())
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in small_matrix(3, 4)) {
            let k = m.kernel_basis();
            prop_assert_eq!(m.rank() + k.len(), 4);
            for v in &k {
                prop_assert!(m.apply(v).iter().all(Scalar::is_zero));
            }
        }

        #[test]
        fn rank_bounded_by_dims(m in small_matrix(3, 5)) {
            prop_assert!(m.rank() <= 3);
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }
    }
}
