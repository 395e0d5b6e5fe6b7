//! The extension datum behind a torsion-free stalk: a linear map from the
//! fiber of the free quotient into the doubled fiber space W, together
//! with a lift recording higher-order tails. The pushout of this datum
//! against the maximal-ideal inclusion realizes the stalk as a lattice,
//! and the kernel of the stacked coefficient matrix detects torsion.

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::lattice::{kmatrix_apply_series, Decomposition, Lattice};
use crate::matrix::KMatrix;
use crate::ring::Context;
use crate::series::PSeries;
use crate::smatrix::SMatrix;

/// The classifying map of an extension of a free stalk by an ideal power:
/// columns give the images of the fiber basis in W, split into the
/// constant components A, the first-order components B, and optional
/// higher tails H. Column i encodes the lift u_i = (A + Bt + Ht^2)e_i.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMap {
    ctx: Context,
    a: usize,
    r: usize,
    amat: KMatrix,
    bmat: KMatrix,
    hmat: Option<SMatrix>,
}

impl PhiMap {
    pub fn new(
        ctx: Context,
        amat: KMatrix,
        bmat: KMatrix,
        hmat: Option<SMatrix>,
    ) -> Result<Self> {
        let r = amat.rows();
        let a = amat.cols();
        assert!(r >= 1, "ambient rank must be positive");
        if bmat.rows() != r || bmat.cols() != a {
            return Err(Error::DimMismatch(r, a, bmat.rows(), bmat.cols()));
        }
        if amat.field() != ctx.field || bmat.field() != ctx.field {
            return Err(Error::FieldMismatch);
        }
        if let Some(h) = &hmat {
            if h.rows() != r || h.cols() != a {
                return Err(Error::DimMismatch(r, a, h.rows(), h.cols()));
            }
            if h.ctx() != ctx {
                return Err(Error::FieldMismatch);
            }
        }
        Ok(PhiMap { ctx, a, r, amat, bmat, hmat })
    }

    pub fn zero_tails(ctx: Context, amat: KMatrix, bmat: KMatrix) -> Result<Self> {
        Self::new(ctx, amat, bmat, None)
    }

    pub fn ctx(&self) -> Context {
        self.ctx
    }

    pub fn fiber_dim(&self) -> usize {
        self.a
    }

    pub fn ambient_rank(&self) -> usize {
        self.r
    }

    pub fn a_matrix(&self) -> &KMatrix {
        &self.amat
    }

    pub fn b_matrix(&self) -> &KMatrix {
        &self.bmat
    }

    pub fn h_matrix(&self) -> Option<&SMatrix> {
        self.hmat.as_ref()
    }

    /// The stacked 2r x a coefficient matrix [A; B] that determines the
    /// map into W.
    pub fn stacked(&self) -> KMatrix {
        self.amat.vstack(&self.bmat).expect("same width")
    }

    /// Injectivity of the classifying map, by rank of the stack.
    pub fn is_injective(&self) -> bool {
        self.stacked().rank() == self.a
    }

    /// The lift vectors u_i, one per fiber basis vector.
    pub fn lift_columns(&self) -> Vec<Vec<PSeries>> {
        let ctx = self.ctx;
        (0..self.a)
            .map(|i| {
                (0..self.r)
                    .map(|j| {
                        let mut s = ctx.monomial(0, self.amat.at(j, i).clone());
                        let b = self.bmat.at(j, i);
                        if !b.is_zero() {
                            s = s.try_add(&ctx.monomial(1, b.clone())).expect("compatible");
                        }
                        if let Some(h) = &self.hmat {
                            let tail = h.at(j, i);
                            if !tail.is_zero() {
                                s = s.try_add(&tail.shift_up(2)).expect("compatible");
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    /// Realizes the pushout of this datum against the ideal inclusion.
    /// Torsion-free inputs produce a lattice; a non-injective map instead
    /// records a torsion witness. Both are legal outcomes.
    pub fn pushout(&self) -> Result<PushoutPresentation> {
        if self.ctx.precision < 6 {
            return Err(Error::PrecisionTooLow {
                required: 6,
                actual: self.ctx.precision,
            });
        }
        if let Some(witness) = self.torsion_search() {
            return Ok(PushoutPresentation {
                phi: self.clone(),
                lattice: None,
                torsion: Some(witness),
            });
        }
        let ctx = self.ctx;
        let mut gens = self.lift_columns();
        for j in 0..self.r {
            for e in [2usize, 3] {
                let mut v = vec![ctx.zero(); self.r];
                v[j] = ctx.monomial(e, ctx.field.one());
                gens.push(v);
            }
        }
        let lattice = Lattice::new(ctx, self.r, gens)?;
        Ok(PushoutPresentation {
            phi: self.clone(),
            lattice: Some(lattice),
            torsion: None,
        })
    }

    /// Searches for a class killed by the maximal ideal: any kernel vector
    /// v of the stack lifts to the witness (v, -t^2 H v), which both t^2
    /// and t^3 annihilate in the presentation.
    pub fn torsion_search(&self) -> Option<TorsionWitness> {
        let kernel = self.stacked().kernel_basis();
        let v = kernel.into_iter().next()?;
        let ctx = self.ctx;
        let ideal_part = match &self.hmat {
            None => vec![ctx.zero(); self.r],
            Some(h) => {
                let hv = h.apply(&constant_vector(ctx, &v));
                hv.into_iter().map(|s| -&s.shift_up(2)).collect()
            }
        };
        Some(TorsionWitness { constant_part: v, ideal_part })
    }

    /// The same data re-read at a different working precision.
    pub fn re_truncated(&self, precision: usize) -> Result<PhiMap> {
        let ctx = self.ctx.with_precision(precision);
        let hmat = match &self.hmat {
            None => None,
            Some(h) => {
                let cols = h
                    .columns()
                    .into_iter()
                    .map(|c| c.iter().map(|s| s.re_truncate(precision)).collect())
                    .collect();
                Some(SMatrix::from_cols(ctx, cols)?)
            }
        };
        PhiMap::new(ctx, self.amat.clone(), self.bmat.clone(), hmat)
    }
}

fn constant_vector(ctx: Context, v: &[Scalar]) -> Vec<PSeries> {
    v.iter().map(|c| ctx.monomial(0, c.clone())).collect()
}

/// A pushout outcome: the defining datum, the realized lattice when the
/// result is torsion-free, and the witness otherwise. Exactly one of
/// `lattice` and `torsion` is present.
#[derive(Debug, Clone)]
pub struct PushoutPresentation {
    pub phi: PhiMap,
    pub lattice: Option<Lattice>,
    pub torsion: Option<TorsionWitness>,
}

/// A nonzero class of the presentation annihilated by the maximal ideal:
/// constant part in the free summand, tail in the ideal summand.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionWitness {
    pub constant_part: Vec<Scalar>,
    pub ideal_part: Vec<PSeries>,
}

/// The doubled fiber space: dimension 2r with basis tagged by degree
/// (constant or first order) and section index. Stored as labels, never
/// assembled by a generic tensor routine.
#[derive(Debug, Clone, PartialEq)]
pub struct WSpace {
    pub r: usize,
    pub labels: Vec<WLabel>,
}

/// Basis label: degree 0 is the class of 1, degree 1 the class of t,
/// paired with the index of the trivializing section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WLabel {
    pub degree: u8,
    pub section: usize,
}

impl WSpace {
    pub fn new(r: usize) -> Self {
        assert!(r >= 1);
        let mut labels = Vec::with_capacity(2 * r);
        for section in 0..r {
            labels.push(WLabel { degree: 0, section });
        }
        for section in 0..r {
            labels.push(WLabel { degree: 1, section });
        }
        WSpace { r, labels }
    }

    pub fn dim(&self) -> usize {
        2 * self.r
    }
}

/// The identification of W with the fiber sum: constant labels map to the
/// plain fiber, first-order labels to the twisted fiber through the local
/// generator of the dualizing sheaf. In the fixed bases on both sides the
/// matrix is the identity relabeling.
pub fn mu(field: Field, r: usize) -> (WSpace, KMatrix) {
    (WSpace::new(r), KMatrix::identity(2 * r, field))
}

/// The extension datum read off a lattice in its normal form: the free
/// summand contributes the identity block, everything else vanishes. All
/// the reconstruction content lives in the recorded coordinate changes.
#[derive(Debug, Clone)]
pub struct ExtractedPhi {
    pub phi: PhiMap,
    pub decomposition: Decomposition,
}

pub fn extract_phi(m: &Lattice) -> Result<ExtractedPhi> {
    let decomposition = m.decompose()?;
    let ctx = m.ctx();
    let r = m.rank();
    let a = decomposition.free_rank;
    let mut amat = KMatrix::zero(r, a, ctx.field);
    for i in 0..a {
        *amat.at_mut(i, i) = ctx.field.one();
    }
    let bmat = KMatrix::zero(r, a, ctx.field);
    let phi = PhiMap::new(ctx, amat, bmat, None)?;
    Ok(ExtractedPhi { phi, decomposition })
}

impl ExtractedPhi {
    fn ctx(&self) -> Context {
        self.decomposition.standard.lattice.ctx()
    }

    fn free_rank(&self) -> usize {
        self.decomposition.free_rank
    }

    /// From presentation coordinates (free summand plain, ideal summand
    /// carried through the shift identification) back to the ambient
    /// coordinates of the original lattice.
    pub fn transport(&self, v: &[PSeries]) -> Result<Vec<PSeries>> {
        let a = self.free_rank();
        let mut split = Vec::with_capacity(v.len());
        for (j, s) in v.iter().enumerate() {
            if j < a {
                split.push(s.clone());
            } else {
                split.push(s.shift_down(2)?);
            }
        }
        let std = kmatrix_apply_series(&self.decomposition.basis_change, &split, self.ctx());
        Ok(self.decomposition.standard.from_std(&std))
    }

    /// Ambient coordinates to presentation coordinates. The shift back up
    /// loses the two highest-order terms, which the guard digits absorb.
    pub fn transport_inverse(&self, v: &[PSeries]) -> Result<Vec<PSeries>> {
        let a = self.free_rank();
        let std = self.decomposition.standard.to_std(v)?;
        let binv = self
            .decomposition
            .basis_change
            .inverse()
            .expect("completed basis is invertible");
        let split = kmatrix_apply_series(&binv, &std, self.ctx());
        Ok(split
            .into_iter()
            .enumerate()
            .map(|(j, s)| if j < a { s } else { s.shift_up(2) })
            .collect())
    }

    /// Rebuilds the original submodule from the normal form: the free
    /// basis vectors plus, per ideal summand, the spanning pair that
    /// generates the full shifted line. Equals the input lattice as a
    /// span, not merely up to isomorphism.
    pub fn reconstruct(&self) -> Result<Lattice> {
        let ctx = self.ctx();
        let d = &self.decomposition;
        let r = d.standard.lattice.rank();
        let a = d.free_rank;
        let mut gens = Vec::new();
        for i in 0..r {
            let mut split = vec![ctx.zero(); r];
            split[i] = ctx.one();
            let std = kmatrix_apply_series(&d.basis_change, &split, ctx);
            gens.push(d.standard.from_std(&std));
            if i >= a {
                split[i] = ctx.monomial(1, ctx.field.one());
                let std = kmatrix_apply_series(&d.basis_change, &split, ctx);
                gens.push(d.standard.from_std(&std));
            }
        }
        Lattice::new(ctx, r, gens)
    }
}

/// Modifies the lift of a classifying map by a homomorphism from the free
/// summand into the kernel subsheaf. The columns of psi are the section
/// coordinates of the images through the shift identification, so the
/// actual change to each lift column is t^2 times a psi column: the class
/// matrices never move, only the tails absorb the modification, and the
/// realized module is unchanged.
pub fn lift_class_normalize(phi: &PhiMap, psi: &SMatrix) -> Result<PhiMap> {
    let (r, a) = (phi.ambient_rank(), phi.fiber_dim());
    if psi.rows() != r || psi.cols() != a {
        return Err(Error::DimMismatch(r, a, psi.rows(), psi.cols()));
    }
    if psi.ctx() != phi.ctx() {
        return Err(Error::FieldMismatch);
    }
    let ctx = phi.ctx();
    let mut hmat = psi.clone();
    if let Some(h) = phi.h_matrix() {
        hmat = hmat.add(h)?;
    }
    let all_zero = (0..r).all(|j| (0..a).all(|i| hmat.at(j, i).is_zero()));
    PhiMap::new(
        ctx,
        phi.a_matrix().clone(),
        phi.b_matrix().clone(),
        if all_zero { None } else { Some(hmat) },
    )
}
