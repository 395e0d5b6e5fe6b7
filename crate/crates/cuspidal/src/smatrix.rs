//! Linear algebra over the truncated series ring. Column operations here
//! are exact ring arithmetic; the pivoting strategy (global minimum
//! valuation, ties to the lowest row then the lowest column) is fixed so
//! that every run of the reduction is reproducible.

use crate::error::{Error, Result};
use crate::matrix::KMatrix;
use crate::ring::Context;
use crate::series::PSeries;

/// Dense matrix of truncated series, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    rows: usize,
    cols: usize,
    elems: Vec<PSeries>,
    ctx: Context,
}

impl SMatrix {
    pub fn zero(ctx: Context, rows: usize, cols: usize) -> Self {
        SMatrix {
            rows,
            cols,
            elems: vec![ctx.zero(); rows * cols],
            ctx,
        }
    }

    pub fn identity(ctx: Context, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ctx.one();
        }
        m
    }

    pub fn from_cols(ctx: Context, cols: Vec<Vec<PSeries>>) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zero(ctx, r, c);
        for (j, col) in cols.into_iter().enumerate() {
            if col.len() != r {
                return Err(Error::DimMismatch(r, c, col.len(), 1));
            }
            for (i, x) in col.into_iter().enumerate() {
                if x.field() != ctx.field || x.precision() != ctx.precision {
                    return Err(Error::FieldMismatch);
                }
                *m.at_mut(i, j) = x;
            }
        }
        Ok(m)
    }

    /// Lifts a scalar matrix to constant series.
    pub fn from_kmatrix(ctx: Context, k: &KMatrix) -> Self {
        let mut m = Self::zero(ctx, k.rows(), k.cols());
        for i in 0..k.rows() {
            for j in 0..k.cols() {
                *m.at_mut(i, j) = ctx.monomial(0, k.at(i, j).clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> Context {
        self.ctx
    }

    pub fn at(&self, r: usize, c: usize) -> &PSeries {
        &self.elems[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut PSeries {
        &mut self.elems[r * self.cols + c]
    }

    pub fn col(&self, c: usize) -> Vec<PSeries> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<PSeries>> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    /// Coefficient matrix of t^exp across all entries.
    pub fn coeff_matrix(&self, exp: usize) -> KMatrix {
        let rows = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.at(r, c).coeff(exp).clone())
                    .collect()
            })
            .collect();
        KMatrix::from_rows(self.ctx.field, rows).expect("rectangular")
    }

    pub fn apply(&self, v: &[PSeries]) -> Vec<PSeries> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = self.ctx.zero();
                for c in 0..self.cols {
                    let a = self.at(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc = acc.try_add(&a.try_mul(&v[c]).expect("compatible"))
                            .expect("compatible");
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, rhs: &SMatrix) -> SMatrix {
        assert_eq!(self.cols, rhs.rows, "series matrix product mismatch");
        let mut out = Self::zero(self.ctx, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.at(k, c);
                    if !b.is_zero() {
                        let prod = a.try_mul(b).expect("compatible");
                        let cur = out.at(r, c).try_add(&prod).expect("compatible");
                        *out.at_mut(r, c) = cur;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &SMatrix) -> Result<SMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        let mut out = self.clone();
        for (x, y) in out.elems.iter_mut().zip(&other.elems) {
            *x = x.try_add(y)?;
        }
        Ok(out)
    }

    pub fn scale_series(&self, s: &PSeries) -> SMatrix {
        let mut out = self.clone();
        for e in &mut out.elems {
            *e = e.try_mul(s).expect("compatible");
        }
        out
    }

    /// Inverse of a matrix that is invertible over the series ring, i.e.
    /// whose determinant is a unit. Gauss-Jordan with unit pivots only;
    /// no valuation is ever peeled off, so no precision is lost.
    pub fn inverse(&self) -> Result<SMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut work = self.clone();
        let mut inv = Self::identity(self.ctx, n);
        for col in 0..n {
            let prow = (col..n)
                .find(|&r| work.at(r, col).val() == Some(0))
                .ok_or(Error::SingularSeriesMatrix)?;
            for c in 0..n {
                work.elems.swap(col * n + c, prow * n + c);
                inv.elems.swap(col * n + c, prow * n + c);
            }
            let u = work.at(col, col).invert().expect("unit pivot");
            for c in 0..n {
                *work.at_mut(col, c) = work.at(col, c).try_mul(&u).expect("compatible");
                *inv.at_mut(col, c) = inv.at(col, c).try_mul(&u).expect("compatible");
            }
            for r in 0..n {
                if r == col || work.at(r, col).is_zero() {
                    continue;
                }
                let f = work.at(r, col).clone();
                for c in 0..n {
                    let sub = f.try_mul(work.at(col, c)).expect("compatible");
                    *work.at_mut(r, c) = work.at(r, c).try_sub(&sub).expect("compatible");
                    let sub = f.try_mul(inv.at(col, c)).expect("compatible");
                    *inv.at_mut(r, c) = inv.at(r, c).try_sub(&sub).expect("compatible");
                }
            }
        }
        Ok(inv)
    }
}

/// Triangular generating data for the span of a set of columns over the
/// full series ring: column j of `basis` vanishes at the pivot rows of
/// columns 0..j and has exact valuation `pivot_vals[j]` at `pivot_rows[j]`.
#[derive(Debug, Clone)]
pub struct Saturation {
    pub basis: Vec<Vec<PSeries>>,
    pub pivot_rows: Vec<usize>,
    pub pivot_vals: Vec<usize>,
    ctx: Context,
    dim: usize,
}

impl Saturation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest pivot valuation: the order of the elementary divisors.
    pub fn max_pivot_val(&self) -> usize {
        self.pivot_vals.iter().copied().max().unwrap_or(0)
    }

    /// Coordinates of v with respect to the triangular basis, by forward
    /// substitution. Fails if v is not in the span at this precision.
    pub fn coords(&self, v: &[PSeries]) -> Result<Vec<PSeries>> {
        assert_eq!(v.len(), self.dim, "ambient dimension mismatch");
        let mut residual = v.to_vec();
        let mut out = Vec::with_capacity(self.basis.len());
        for (j, bcol) in self.basis.iter().enumerate() {
            let prow = self.pivot_rows[j];
            let e = &residual[prow];
            if e.is_zero() {
                out.push(self.ctx.zero());
                continue;
            }
            let q = e
                .divide_by(&bcol[prow])
                .map_err(|_| Error::OutsideSaturation)?;
            for i in 0..self.dim {
                let sub = q.try_mul(&bcol[i]).expect("compatible");
                residual[i] = residual[i].try_sub(&sub).expect("compatible");
            }
            out.push(q);
        }
        if residual.iter().any(|x| !x.is_zero()) {
            return Err(Error::OutsideSaturation);
        }
        Ok(out)
    }

    /// Reassembles an ambient vector from coordinates.
    pub fn combine(&self, coords: &[PSeries]) -> Vec<PSeries> {
        assert_eq!(coords.len(), self.basis.len());
        let mut out = vec![self.ctx.zero(); self.dim];
        for (q, bcol) in coords.iter().zip(&self.basis) {
            for i in 0..self.dim {
                let add = q.try_mul(&bcol[i]).expect("compatible");
                out[i] = out[i].try_add(&add).expect("compatible");
            }
        }
        out
    }
}

/// Column reduction of a set of vectors over the truncated series ring,
/// producing a free triangular basis of their span. The column count may
/// exceed the rank; surviving columns beyond the ambient rank must reduce
/// to zero, and fewer than `rank` pivots means the span is degenerate.
pub fn saturate(ctx: Context, rank: usize, cols: &[Vec<PSeries>]) -> Result<Saturation> {
    let mut work: Vec<Vec<PSeries>> = cols.to_vec();
    for col in &work {
        assert_eq!(col.len(), rank, "column length mismatch");
    }
    let mut used = vec![false; rank];
    let mut basis = Vec::with_capacity(rank);
    let mut pivot_rows = Vec::with_capacity(rank);
    let mut pivot_vals = Vec::with_capacity(rank);
    for _ in 0..rank {
        let mut best: Option<(usize, usize, usize)> = None;
        for (ci, col) in work.iter().enumerate() {
            for (ri, used_row) in used.iter().enumerate() {
                if *used_row {
                    continue;
                }
                if let Some(v) = col[ri].val() {
                    let cand = (v, ri, ci);
                    if best.map_or(true, |b| cand < b) {
                        best = Some(cand);
                    }
                }
            }
        }
        let Some((v, prow, pci)) = best else {
            return Err(Error::RankDeficient);
        };
        let pcol = work.remove(pci);
        for col in work.iter_mut() {
            if col[prow].is_zero() {
                continue;
            }
            let q = col[prow].divide_by(&pcol[prow]).expect("minimal valuation pivot");
            for i in 0..rank {
                if pcol[i].is_zero() {
                    continue;
                }
                let sub = q.try_mul(&pcol[i]).expect("compatible");
                col[i] = col[i].try_sub(&sub).expect("compatible");
            }
        }
        used[prow] = true;
        pivot_rows.push(prow);
        pivot_vals.push(v);
        basis.push(pcol);
    }
    for col in &work {
        assert!(
            col.iter().all(PSeries::is_zero),
            "column reduction left a nonzero remainder"
        );
    }
    Ok(Saturation { basis, pivot_rows, pivot_vals, ctx, dim: rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn ctx() -> Context {
        Context::new(Field::Rational, 12).unwrap()
    }

    fn vec2(c: Context, a: &[i64], b: &[i64]) -> Vec<PSeries> {
        vec![c.series(a), c.series(b)]
    }

    #[test]
    fn saturation_of_mixed_column_set() {
        let c = ctx();
        let cols = vec![
            vec2(c, &[1], &[0, 1]),
            vec2(c, &[0, 0, 1], &[]),
            vec2(c, &[0, 0, 0, 1], &[]),
        ];
        let sat = saturate(c, 2, &cols).unwrap();
        assert_eq!(sat.pivot_rows, vec![0, 1]);
        assert_eq!(sat.pivot_vals, vec![0, 3]);
        // coordinates of an element of the span
        let coords = sat.coords(&vec2(c, &[0, 0, 0, 1], &[])).unwrap();
        assert_eq!(sat.combine(&coords), vec2(c, &[0, 0, 0, 1], &[]));
        // something outside: (t, 0) has the wrong second component
        assert_eq!(
            sat.coords(&vec2(c, &[0, 1], &[])),
            Err(Error::OutsideSaturation)
        );
    }

    #[test]
    fn rank_deficiency_detected() {
        let c = ctx();
        let cols = vec![vec2(c, &[1], &[]), vec2(c, &[2], &[])];
        assert!(matches!(saturate(c, 2, &cols), Err(Error::RankDeficient)));
    }

    #[test]
    fn proportional_columns_collapse() {
        let c = ctx();
        // second generator is t times the first
        let cols = vec![vec2(c, &[0, 0, 1], &[1]), vec2(c, &[0, 0, 0, 1], &[0, 1])];
        assert!(matches!(saturate(c, 2, &cols), Err(Error::RankDeficient)));
    }

    #[test]
    fn series_inverse_roundtrip() {
        let c = ctx();
        let m = SMatrix::from_cols(
            c,
            vec![vec2(c, &[1], &[0, 0, 1]), vec2(c, &[0, 1], &[1])],
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        assert_eq!(prod, SMatrix::identity(c, 2));
    }

    #[test]
    fn non_unit_determinant_rejected() {
        let c = ctx();
        let m = SMatrix::from_cols(
            c,
            vec![vec2(c, &[0, 1], &[]), vec2(c, &[], &[0, 1])],
        )
        .unwrap();
        assert!(matches!(m.inverse(), Err(Error::SingularSeriesMatrix)));
    }
}
