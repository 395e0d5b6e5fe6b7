//! Finitely generated torsion-free modules over the cusp ring, presented
//! as lattices: submodules of the free module over the normalization that
//! span it rationally. The central computation splits any such module into
//! a free part and a part pulled back from the normalization, exposing the
//! two numerical invariants (a, b).

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::{KMatrix, RowSpan};
use crate::ring::{in_subring, quotient_class, Context};
use crate::series::PSeries;
use crate::smatrix::{saturate, SMatrix, Saturation};

/// Scalar matrix applied to a vector of series, entry by entry.
pub fn kmatrix_apply_series(k: &KMatrix, v: &[PSeries], ctx: Context) -> Vec<PSeries> {
    assert_eq!(k.cols(), v.len(), "dimension mismatch");
    (0..k.rows())
        .map(|i| {
            let mut acc = ctx.zero();
            for (j, s) in v.iter().enumerate() {
                let c = k.at(i, j);
                if !c.is_zero() && !s.is_zero() {
                    acc = acc.try_add(&s.scale(c)).expect("compatible");
                }
            }
            acc
        })
        .collect()
}

/// A lattice: the span over the cusp ring of finitely many vectors of
/// truncated series, required to span the ambient free module over the
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    ctx: Context,
    rank: usize,
    gens: Vec<Vec<PSeries>>,
}

impl Lattice {
    pub fn new(ctx: Context, rank: usize, gens: Vec<Vec<PSeries>>) -> Result<Self> {
        assert!(rank >= 1, "ambient rank must be positive");
        if gens.is_empty() {
            return Err(Error::RankDeficient);
        }
        let mut val_max = 0usize;
        for g in &gens {
            if g.len() != rank {
                return Err(Error::DimMismatch(rank, 1, g.len(), 1));
            }
            for e in g {
                if e.field() != ctx.field || e.precision() != ctx.precision {
                    return Err(Error::FieldMismatch);
                }
                if let Some(v) = e.val() {
                    val_max = val_max.max(v);
                }
            }
        }
        if ctx.precision < val_max + 4 {
            return Err(Error::PrecisionTooLow {
                required: val_max + 4,
                actual: ctx.precision,
            });
        }
        let lat = Lattice { ctx, rank, gens };
        lat.saturation()?;
        Ok(lat)
    }

    pub fn ctx(&self) -> Context {
        self.ctx
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[Vec<PSeries>] {
        &self.gens
    }

    /// Triangular basis of the span over the full series ring.
    pub fn saturation(&self) -> Result<Saturation> {
        saturate(self.ctx, self.rank, &self.gens)
    }

    /// The same generator data read at a different working precision.
    /// Meaningful when the generators are polynomial, which is how all
    /// sampled instances are produced.
    pub fn re_truncated(&self, precision: usize) -> Result<Lattice> {
        let ctx = self.ctx.with_precision(precision);
        let gens = self
            .gens
            .iter()
            .map(|g| g.iter().map(|e| e.re_truncate(precision)).collect())
            .collect();
        Lattice::new(ctx, self.rank, gens)
    }

    /// Selects generators whose residues modulo t times the saturation
    /// form a basis, greedily in generator order. The selected vectors are
    /// a free basis of the saturation that consists of lattice elements.
    pub fn nakayama_basis(&self) -> Result<(Vec<usize>, Saturation)> {
        let sat = self.saturation()?;
        let mut chosen = Vec::with_capacity(self.rank);
        let mut span = RowSpan::new(self.rank, self.ctx.field);
        for (i, g) in self.gens.iter().enumerate() {
            if chosen.len() == self.rank {
                break;
            }
            let coords = sat.coords(g).expect("generator lies in its own span");
            let residue: Vec<Scalar> = coords.iter().map(|c| c.coeff(0).clone()).collect();
            if span.insert(&residue) {
                chosen.push(i);
            }
        }
        if chosen.len() < self.rank {
            return Err(Error::RankDeficient);
        }
        Ok((chosen, sat))
    }

    /// Rewrites the lattice in the coordinates of its nakayama basis. In
    /// the new coordinates the lattice sits between the free module over
    /// the cusp ring and the free module over the normalization.
    pub fn standard_form(&self) -> Result<StandardForm> {
        let (nak_indices, sat) = self.nakayama_basis()?;
        let ctx = self.ctx;
        let nak_cols: Vec<Vec<PSeries>> = nak_indices
            .iter()
            .map(|&i| self.gens[i].clone())
            .collect();
        let cmat = SMatrix::from_cols(
            ctx,
            nak_cols
                .iter()
                .map(|n| sat.coords(n).expect("nakayama vector is in the span"))
                .collect(),
        )?;
        let cmat_inv = cmat.inverse().map_err(|_| Error::RankDeficient)?;
        let std_gens: Vec<Vec<PSeries>> = self
            .gens
            .iter()
            .map(|g| {
                let c = sat.coords(g).expect("generator lies in its own span");
                cmat_inv.apply(&c)
            })
            .collect();
        let lattice = Lattice {
            ctx,
            rank: self.rank,
            gens: std_gens,
        };
        Ok(StandardForm {
            lattice,
            nak_indices,
            nak_cols: SMatrix::from_cols(ctx, nak_cols)?,
            sat,
            cmat_inv,
        })
    }

    /// The full decomposition: standard form, image of the residue map,
    /// completed basis, and the coordinate split verified on generators.
    pub fn decompose(&self) -> Result<Decomposition> {
        let standard = self.standard_form()?;
        let r = self.rank;
        let field = self.ctx.field;
        // canonical basis of the image of the residue map
        let residue_rows: Vec<Vec<Scalar>> = standard
            .lattice
            .gens
            .iter()
            .map(|g| g.iter().map(quotient_class).collect())
            .collect();
        let (ech, _) = KMatrix::from_rows(field, residue_rows)?.rref();
        let mut sat_vectors: Vec<Vec<Scalar>> = Vec::new();
        let mut span = RowSpan::new(r, field);
        for i in 0..ech.rows() {
            let row = ech.row(i).to_vec();
            if row.iter().all(Scalar::is_zero) {
                break;
            }
            span.insert(&row);
            sat_vectors.push(row);
        }
        let b = sat_vectors.len();
        // complete with identity columns, scanned in index order
        let mut free_vectors: Vec<Vec<Scalar>> = Vec::new();
        for j in 0..r {
            let mut e = vec![field.zero(); r];
            e[j] = field.one();
            if span.insert(&e) {
                free_vectors.push(e);
            }
        }
        let a = free_vectors.len();
        assert_eq!(a + b, r, "basis completion must fill the ambient space");
        let mut cols = free_vectors.clone();
        cols.extend(sat_vectors.iter().cloned());
        let basis_change = KMatrix::from_cols(field, cols)?;
        let binv = basis_change.inverse().expect("completed basis is invertible");
        // split coordinates of every standard generator; the first a of
        // them must avoid the forbidden t^1 term
        let mut cramer = Vec::with_capacity(standard.lattice.gens.len());
        for (i, g) in standard.lattice.gens.iter().enumerate() {
            let coords = kmatrix_apply_series(&binv, g, self.ctx);
            if coords.iter().take(a).any(|c| !in_subring(c)) {
                return Err(Error::SplitVerification(i));
            }
            cramer.push(coords);
        }
        Ok(Decomposition {
            free_rank: a,
            sat_rank: b,
            free_vectors,
            sat_vectors,
            basis_change,
            cramer,
            standard,
        })
    }

    /// Number of module generators: the dimension of the fiber modulo the
    /// maximal ideal, computed by residue linear algebra on coefficient
    /// vectors. Always equals a + 2b.
    pub fn min_generators(&self) -> usize {
        let mut span = self.ideal_span();
        let mut count = 0usize;
        for g in &self.gens {
            if span.insert(&coeff_vector(g)) {
                count += 1;
            }
        }
        count
    }

    /// Row span of all multiples of the generators by the maximal ideal.
    fn ideal_span(&self) -> RowSpan {
        let n = self.ctx.precision;
        let mut span = RowSpan::new(self.rank * (n + 1), self.ctx.field);
        for g in &self.gens {
            for j in 2..=n {
                let shifted: Vec<PSeries> = g.iter().map(|e| e.shift_up(j)).collect();
                span.insert(&coeff_vector(&shifted));
            }
        }
        span
    }

    /// Precomputed span of the lattice as a vector space over the ground
    /// field, for repeated membership queries.
    pub fn span_table(&self) -> SpanTable {
        let n = self.ctx.precision;
        let mut span = RowSpan::new(self.rank * (n + 1), self.ctx.field);
        for g in &self.gens {
            span.insert(&coeff_vector(g));
            for j in 2..=n {
                let shifted: Vec<PSeries> = g.iter().map(|e| e.shift_up(j)).collect();
                span.insert(&coeff_vector(&shifted));
            }
        }
        SpanTable { span, rank: self.rank, ctx: self.ctx }
    }

    pub fn contains(&self, v: &[PSeries]) -> bool {
        self.span_table().contains(v)
    }

    /// Equality as submodules of the ambient free module.
    pub fn same_span(&self, other: &Lattice) -> Result<bool> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mine = self.span_table();
        let theirs = other.span_table();
        Ok(other.gens.iter().all(|g| mine.contains(g))
            && self.gens.iter().all(|g| theirs.contains(g)))
    }

    /// Isomorphism test through the normal forms, with an explicit
    /// isomorphism as witness when the invariants agree.
    pub fn iso_check(&self, other: &Lattice) -> Result<IsoCheck> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let d1 = self.decompose()?;
        let d2 = other.decompose()?;
        if d1.free_rank != d2.free_rank || d1.sat_rank != d2.sat_rank {
            return Ok(IsoCheck { isomorphic: false, witness: None });
        }
        let kmap = &d2.basis_change * &d1.basis_change.inverse().expect("invertible");
        let kmap_inv = kmap.inverse().expect("invertible");
        Ok(IsoCheck {
            isomorphic: true,
            witness: Some(LatticeIso {
                source: d1,
                target: d2,
                kmap,
                kmap_inv,
            }),
        })
    }
}

fn coeff_vector(v: &[PSeries]) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(v.len() * (v[0].precision() + 1));
    for s in v {
        out.extend(s.coeffs().iter().cloned());
    }
    out
}

/// Membership table: the lattice as a span of coefficient vectors.
pub struct SpanTable {
    span: RowSpan,
    rank: usize,
    ctx: Context,
}

impl SpanTable {
    pub fn contains(&self, v: &[PSeries]) -> bool {
        assert_eq!(v.len(), self.rank, "ambient rank mismatch");
        assert!(v
            .iter()
            .all(|s| s.precision() == self.ctx.precision && s.field() == self.ctx.field));
        self.span.contains(&coeff_vector(v))
    }
}

/// A lattice rewritten in the coordinates of its nakayama basis, with the
/// coordinate changes recorded for round trips.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub lattice: Lattice,
    pub nak_indices: Vec<usize>,
    nak_cols: SMatrix,
    sat: Saturation,
    cmat_inv: SMatrix,
}

impl StandardForm {
    /// Coordinates of an ambient vector in the nakayama basis. Errs when
    /// the vector is outside the span of the saturation.
    pub fn to_std(&self, v: &[PSeries]) -> Result<Vec<PSeries>> {
        let c = self.sat.coords(v)?;
        Ok(self.cmat_inv.apply(&c))
    }

    /// Original coordinates of a vector given in the nakayama basis.
    pub fn from_std(&self, w: &[PSeries]) -> Vec<PSeries> {
        self.nak_cols.apply(w)
    }
}

/// The outcome of the classification: the lattice is the direct sum of
/// `free_rank` copies of the cusp ring and `sat_rank` copies of its
/// maximal ideal. The basis vectors live in the standard-form coordinates.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub free_rank: usize,
    pub sat_rank: usize,
    pub free_vectors: Vec<Vec<Scalar>>,
    pub sat_vectors: Vec<Vec<Scalar>>,
    pub basis_change: KMatrix,
    pub cramer: Vec<Vec<PSeries>>,
    pub standard: StandardForm,
}

impl Decomposition {
    pub fn invariants(&self) -> (usize, usize) {
        (self.free_rank, self.sat_rank)
    }
}

pub struct IsoCheck {
    pub isomorphic: bool,
    pub witness: Option<LatticeIso>,
}

/// Explicit isomorphism assembled from the two normal forms: source
/// coordinates to standard form, a scalar change of basis, then out
/// through the target's standard form.
pub struct LatticeIso {
    pub source: Decomposition,
    pub target: Decomposition,
    kmap: KMatrix,
    kmap_inv: KMatrix,
}

impl LatticeIso {
    pub fn apply(&self, v: &[PSeries]) -> Result<Vec<PSeries>> {
        let ctx = self.source.standard.lattice.ctx;
        let w = self.source.standard.to_std(v)?;
        let w = kmatrix_apply_series(&self.kmap, &w, ctx);
        Ok(self.target.standard.from_std(&w))
    }

    pub fn apply_inverse(&self, v: &[PSeries]) -> Result<Vec<PSeries>> {
        let ctx = self.target.standard.lattice.ctx;
        let w = self.target.standard.to_std(v)?;
        let w = kmatrix_apply_series(&self.kmap_inv, &w, ctx);
        Ok(self.source.standard.from_std(&w))
    }
}
