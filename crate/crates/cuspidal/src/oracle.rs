//! Brute-force verifiers and seeded instance generators. The verifiers
//! re-derive answers from raw coefficient data with their own assembly
//! code; they share the exact-arithmetic substrate with the main pipeline
//! but none of its algorithms. Disagreements are findings, not bugs to
//! paper over.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::extension::PhiMap;
use crate::field::{Field, Scalar};
use crate::lattice::Lattice;
use crate::matrix::{KMatrix, RowSpan};
use crate::ring::Context;
use crate::series::PSeries;
use crate::smatrix::SMatrix;

/// Outcome of one oracle comparison, serializable as a JSON line.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub check: String,
    pub seed: u64,
    pub index: u64,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl OracleReport {
    pub fn agree(check: &str, seed: u64, index: u64) -> Self {
        OracleReport { check: check.into(), seed, index, verdict: true, witness: None }
    }

    pub fn disagree(check: &str, seed: u64, index: u64, witness: String) -> Self {
        OracleReport { check: check.into(), seed, index, verdict: false, witness: Some(witness) }
    }
}

/// Coefficient row of t^shift times a vector of series, assembled by hand
/// from raw coefficients.
fn shifted_coeff_row(gen: &[PSeries], shift: usize, precision: usize) -> Vec<Scalar> {
    let field = gen[0].field();
    let width = precision + 1;
    let mut row = vec![field.zero(); gen.len() * width];
    for (coord, s) in gen.iter().enumerate() {
        for (e, c) in s.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if e + shift <= precision {
                row[coord * width + e + shift] = c.clone();
            }
        }
    }
    row
}

/// Exponents of the monomial basis of the cusp ring up to the precision:
/// everything except exponent one.
fn subring_exponents(precision: usize) -> impl Iterator<Item = usize> {
    std::iter::once(0).chain(2..=precision)
}

/// Minimal generator count by direct residue linear algebra: the rank of
/// all ring multiples of the generators minus the rank of the maximal
/// ideal multiples. Never consults the decomposition pipeline.
pub fn oracle_min_generators(m: &Lattice) -> usize {
    let n = m.ctx().precision;
    let field = m.ctx().field;
    let mut ideal_rows = Vec::new();
    let mut full_rows = Vec::new();
    for g in m.generators() {
        for j in subring_exponents(n) {
            let row = shifted_coeff_row(g, j, n);
            if j >= 2 {
                ideal_rows.push(row.clone());
            }
            full_rows.push(row);
        }
    }
    let full = KMatrix::from_rows(field, full_rows).expect("rectangular").rank();
    let ideal = KMatrix::from_rows(field, ideal_rows).expect("rectangular").rank();
    full - ideal
}

/// Torsion witness found by brute force over the truncated presentation:
/// sets up the space of candidate classes with constant free part and
/// ideal tail, reduces their t^2 and t^3 multiples against the raw
/// relation span, and looks for a kernel element with nonzero free part.
/// Reads only the raw coefficient data of the map.
pub fn oracle_torsion(phi: &PhiMap) -> Option<(Vec<Scalar>, Vec<PSeries>)> {
    let ctx = phi.ctx();
    let (a, r, n) = (phi.fiber_dim(), phi.ambient_rank(), ctx.precision);
    if a == 0 {
        return None;
    }
    let field = ctx.field;
    let width = n + 1;
    let dim = (a + r) * width;
    // raw lift vectors, assembled entry by entry
    let lifts: Vec<Vec<PSeries>> = (0..a)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut coeffs = vec![field.zero(); width];
                    coeffs[0] = phi.a_matrix().at(j, i).clone();
                    coeffs[1] = phi.b_matrix().at(j, i).clone();
                    if let Some(h) = phi.h_matrix() {
                        for (e, c) in h.at(j, i).coeffs().iter().enumerate() {
                            if e + 2 <= n {
                                coeffs[e + 2] = &coeffs[e + 2] + c;
                            }
                        }
                    }
                    PSeries::from_coeffs(field, n, coeffs).expect("sized")
                })
                .collect()
        })
        .collect();
    // relation span: ring multiples of (t^k e_i, -t^k u_i) for k = 2, 3
    let mut rel = RowSpan::new(dim, field);
    for (i, u) in lifts.iter().enumerate() {
        for k in [2usize, 3] {
            let mut parts: Vec<PSeries> = vec![ctx.zero(); a];
            parts[i] = ctx.monomial(k, field.one());
            let mut tail: Vec<PSeries> = u.iter().map(|s| -&s.shift_up(k)).collect();
            parts.append(&mut tail);
            for j in subring_exponents(n) {
                rel.insert(&shifted_coeff_row(&parts, j, n));
            }
        }
    }
    // candidate basis: constant free parts, then each ideal-tail monomial
    let mut candidates: Vec<Vec<Scalar>> = Vec::new();
    for k in 0..a {
        let mut v = vec![field.zero(); dim];
        v[k * width] = field.one();
        candidates.push(v);
    }
    for coord in 0..r {
        for e in 2..=n {
            let mut v = vec![field.zero(); dim];
            v[(a + coord) * width + e] = field.one();
            candidates.push(v);
        }
    }
    // constraint: both t^2 and t^3 multiples must land in the relations
    let mut constraint_cols = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let mut col = Vec::with_capacity(2 * dim);
        for shift in [2usize, 3] {
            let mut shifted = vec![field.zero(); dim];
            for (idx, x) in c.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let (block, e) = (idx / width, idx % width);
                if e + shift <= n {
                    shifted[block * width + e + shift] = x.clone();
                }
            }
            col.extend(rel.residual(&shifted));
        }
        constraint_cols.push(col);
    }
    let constraint = KMatrix::from_cols(field, constraint_cols).expect("rectangular");
    for sol in constraint.kernel_basis() {
        let v: Vec<Scalar> = sol[..a].to_vec();
        if v.iter().all(Scalar::is_zero) {
            continue;
        }
        // canonical tail for the found direction
        let tail: Vec<PSeries> = (0..r)
            .map(|j| {
                let mut acc = ctx.zero();
                for (i, u) in lifts.iter().enumerate() {
                    if !v[i].is_zero() {
                        let mut coeffs = vec![field.zero(); width];
                        for (e, c) in u[j].coeffs().iter().enumerate() {
                            if e >= 2 {
                                coeffs[e] = c * &v[i];
                            }
                        }
                        let part = PSeries::from_coeffs(field, n, coeffs).expect("sized");
                        acc = acc.try_sub(&part).expect("compatible");
                    }
                }
                acc
            })
            .collect();
        return Some((v, tail));
    }
    None
}

/// Reruns a lattice decomposition at the given precisions and reports
/// whether the discrete outputs coincide.
pub fn stable_decompose(m: &Lattice, precisions: &[usize]) -> Result<bool> {
    let mut seen = None;
    for &p in precisions {
        let d = m.re_truncated(p)?.decompose()?;
        let out = (d.free_rank, d.sat_rank);
        match seen {
            None => seen = Some(out),
            Some(prev) if prev != out => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// Reruns the torsion verdict at the given precisions.
pub fn stable_torsion(phi: &PhiMap, precisions: &[usize]) -> Result<bool> {
    let mut seen = None;
    for &p in precisions {
        let out = phi.re_truncated(p)?.torsion_search().is_some();
        match seen {
            None => seen = Some(out),
            Some(prev) if prev != out => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// Deterministic per-instance stream: instances can be generated in any
/// order or in parallel without changing their contents.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Small random scalar: a ratio of integers in [-9, 9] with nonzero
/// denominator, reduced in the field.
pub fn random_scalar(field: Field, rng: &mut ChaCha8Rng) -> Scalar {
    let num = rng.random_range(-9i64..=9);
    let den = rng.random_range(1i64..=9);
    field.from_i64(num).div(&field.from_i64(den))
}

fn random_nonzero_scalar(field: Field, rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let s = random_scalar(field, rng);
        if !s.is_zero() {
            return s;
        }
    }
}

/// Random polynomial series with valuation at least `min_val` and degree
/// at most `max_deg`, possibly zero when `allow_zero` is set.
pub fn random_series(
    ctx: Context,
    min_val: usize,
    max_deg: usize,
    allow_zero: bool,
    rng: &mut ChaCha8Rng,
) -> PSeries {
    if allow_zero && rng.random_range(0..4) == 0 {
        return ctx.zero();
    }
    let val = rng.random_range(min_val..=max_deg);
    let mut coeffs = vec![ctx.field.zero(); ctx.precision + 1];
    coeffs[val] = random_nonzero_scalar(ctx.field, rng);
    for e in (val + 1)..=max_deg {
        if rng.random_range(0..2) == 0 {
            coeffs[e] = random_scalar(ctx.field, rng);
        }
    }
    PSeries::from_coeffs(ctx.field, ctx.precision, coeffs).expect("sized")
}

/// Random element of the cusp ring: no first-order term.
pub fn random_subring_series(ctx: Context, max_deg: usize, rng: &mut ChaCha8Rng) -> PSeries {
    let mut s = random_series(ctx, 0, max_deg, true, rng);
    if !s.coeff(1).is_zero() {
        let fix = ctx.monomial(1, -s.coeff(1));
        s = s.try_add(&fix).expect("compatible");
    }
    s
}

/// Random unit of the cusp ring: nonzero constant term, no first-order
/// term.
pub fn random_subring_unit(ctx: Context, rng: &mut ChaCha8Rng) -> PSeries {
    let mut s = random_subring_series(ctx, 4, rng);
    if s.coeff(0).is_zero() {
        s = s
            .try_add(&ctx.monomial(0, random_nonzero_scalar(ctx.field, rng)))
            .expect("compatible");
    }
    s
}

/// Random invertible constant matrix by rejection.
pub fn random_invertible(field: Field, n: usize, rng: &mut ChaCha8Rng) -> KMatrix {
    if n == 0 {
        return KMatrix::zero(0, 0, field);
    }
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| random_scalar(field, rng)).collect())
            .collect();
        let m = KMatrix::from_rows(field, rows).expect("square");
        if m.inverse().is_ok() {
            return m;
        }
    }
}

/// A lattice with the requested invariants, built from the standard model
/// and scrambled by unit scalings, generator mixing, and an ambient
/// constant change of basis. Covers every stratum by construction.
pub fn planted_lattice(
    ctx: Context,
    free_rank: usize,
    sat_rank: usize,
    rng: &mut ChaCha8Rng,
) -> Lattice {
    let r = free_rank + sat_rank;
    assert!(r >= 1);
    let mut gens: Vec<Vec<PSeries>> = Vec::new();
    for i in 0..r {
        let mut e = vec![ctx.zero(); r];
        e[i] = ctx.one();
        gens.push(e);
        if i >= free_rank {
            let mut te = vec![ctx.zero(); r];
            te[i] = ctx.monomial(1, ctx.field.one());
            gens.push(te);
        }
    }
    // unit scalings and cross-mixing by ring elements
    for g in gens.iter_mut() {
        let u = random_subring_unit(ctx, rng);
        for e in g.iter_mut() {
            *e = e.try_mul(&u).expect("compatible");
        }
    }
    let count = gens.len();
    for _ in 0..count {
        let src = rng.random_range(0..count);
        let dst = rng.random_range(0..count);
        if src == dst {
            continue;
        }
        let f = random_subring_series(ctx, 4, rng);
        let add: Vec<PSeries> = gens[dst]
            .iter()
            .zip(&gens[src])
            .map(|(x, y)| x.try_add(&y.try_mul(&f).expect("compatible")).expect("compatible"))
            .collect();
        gens[dst] = add;
    }
    // ambient constant change of basis preserves the invariants
    let q = random_invertible(ctx.field, r, rng);
    let gens = gens
        .iter()
        .map(|g| crate::lattice::kmatrix_apply_series(&q, g, ctx))
        .collect();
    Lattice::new(ctx, r, gens).expect("planted lattices are valid")
}

/// Random lattice: either raw random generators retried until they span,
/// or a scrambled planted normal form. The mix keeps every (a, b) stratum
/// reachable while exercising arbitrary presentations.
pub fn random_lattice(ctx: Context, max_rank: usize, rng: &mut ChaCha8Rng) -> Lattice {
    let r = rng.random_range(1..=max_rank);
    random_lattice_ranked(ctx, r, rng)
}

/// Random lattice of a prescribed ambient rank.
pub fn random_lattice_ranked(ctx: Context, r: usize, rng: &mut ChaCha8Rng) -> Lattice {
    if rng.random_range(0..3) == 2 {
        let a = rng.random_range(0..=r);
        return planted_lattice(ctx, a, r - a, rng);
    }
    for _ in 0..32 {
        let count = r + rng.random_range(0..=2);
        let gens: Vec<Vec<PSeries>> = (0..count)
            .map(|_| {
                (0..r)
                    .map(|_| random_series(ctx, 0, 4, true, rng))
                    .collect()
            })
            .collect();
        if let Ok(l) = Lattice::new(ctx, r, gens) {
            return l;
        }
    }
    let a = rng.random_range(0..=r);
    planted_lattice(ctx, a, r - a, rng)
}

/// One random generating-set move that provably preserves the module:
/// permute, scale by a ring unit, or add a ring multiple of another
/// generator. Ambient changes of basis are excluded here, those change
/// the submodule while preserving its class.
pub fn transform_generators(m: &Lattice, rng: &mut ChaCha8Rng) -> Lattice {
    let ctx = m.ctx();
    let mut gens = m.generators().to_vec();
    match rng.random_range(0..3) {
        0 => {
            let i = rng.random_range(0..gens.len());
            let j = rng.random_range(0..gens.len());
            gens.swap(i, j);
        }
        1 => {
            let i = rng.random_range(0..gens.len());
            let u = random_subring_unit(ctx, rng);
            gens[i] = gens[i]
                .iter()
                .map(|e| e.try_mul(&u).expect("compatible"))
                .collect();
        }
        _ => {
            let i = rng.random_range(0..gens.len());
            let j = rng.random_range(0..gens.len());
            if i != j {
                let f = random_subring_series(ctx, 4, rng);
                gens[i] = gens[i]
                    .iter()
                    .zip(&gens[j])
                    .map(|(x, y)| {
                        x.try_add(&y.try_mul(&f).expect("compatible")).expect("compatible")
                    })
                    .collect();
            }
        }
    }
    Lattice::new(ctx, m.rank(), gens).expect("transformed generators still span")
}

/// Random attachment map with a fiber dimension up to the ambient rank.
/// Every other draw plants a kernel vector so that both torsion verdicts
/// are exercised.
pub fn random_phi(ctx: Context, max_rank: usize, rng: &mut ChaCha8Rng) -> PhiMap {
    let r = rng.random_range(1..=max_rank);
    let a = rng.random_range(0..=r);
    let field = ctx.field;
    let mut amat = KMatrix::zero(r, a, field);
    let mut bmat = KMatrix::zero(r, a, field);
    for i in 0..r {
        for j in 0..a {
            if rng.random_range(0..3) > 0 {
                *amat.at_mut(i, j) = random_scalar(field, rng);
            }
            if rng.random_range(0..3) > 0 {
                *bmat.at_mut(i, j) = random_scalar(field, rng);
            }
        }
    }
    if a > 0 && rng.random_range(0..2) == 0 {
        // plant a kernel vector: make the last column a combination
        let mut v = vec![field.zero(); a - 1];
        for x in v.iter_mut() {
            *x = random_scalar(field, rng);
        }
        for i in 0..r {
            let mut acc_a = field.zero();
            let mut acc_b = field.zero();
            for (j, c) in v.iter().enumerate() {
                acc_a += &(amat.at(i, j) * c);
                acc_b += &(bmat.at(i, j) * c);
            }
            *amat.at_mut(i, a - 1) = -&acc_a;
            *bmat.at_mut(i, a - 1) = -&acc_b;
        }
    }
    let hmat = if a > 0 && rng.random_range(0..2) == 0 {
        let cols = (0..a)
            .map(|_| {
                (0..r)
                    .map(|_| random_series(ctx, 0, 3, true, rng))
                    .collect()
            })
            .collect();
        Some(SMatrix::from_cols(ctx, cols).expect("sized"))
    } else {
        None
    };
    PhiMap::new(ctx, amat, bmat, hmat).expect("dimensions agree")
}

/// Random subspace presented in reduced column echelon form, full column
/// rank by rejection.
pub fn random_echelon_subspace(
    field: Field,
    dim: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> KMatrix {
    if cols == 0 {
        return KMatrix::zero(dim, 0, field);
    }
    loop {
        let rows = (0..dim)
            .map(|_| (0..cols).map(|_| random_scalar(field, rng)).collect())
            .collect();
        let m = KMatrix::from_rows(field, rows).expect("rectangular");
        let (ech, piv) = m.column_echelon();
        if piv.len() == cols {
            return ech;
        }
    }
}

/// Random lift modification for a map: a series matrix standing for a
/// homomorphism from the free summand into the ideal part.
pub fn random_psi(ctx: Context, phi: &PhiMap, rng: &mut ChaCha8Rng) -> SMatrix {
    let mut psi = SMatrix::zero(ctx, phi.ambient_rank(), phi.fiber_dim());
    for i in 0..phi.ambient_rank() {
        for j in 0..phi.fiber_dim() {
            *psi.at_mut(i, j) = random_series(ctx, 0, 4, true, rng);
        }
    }
    psi
}

/// Basis of the space of lattice morphisms given by polynomial series
/// matrices of bounded degree: one exact kernel computation over the
/// coefficient unknowns.
pub fn hom_space_basis(src: &Lattice, dst: &Lattice, max_deg: usize) -> Vec<SMatrix> {
    let ctx = src.ctx();
    let n = ctx.precision;
    let field = ctx.field;
    let (rs, rd) = (src.rank(), dst.rank());
    let width = n + 1;
    // span of the target lattice as raw coefficient rows
    let mut span = RowSpan::new(rd * width, field);
    for g in dst.generators() {
        for j in subring_exponents(n) {
            span.insert(&shifted_coeff_row(g, j, n));
        }
    }
    // one residual column per unknown coefficient of the matrix
    let unknowns: Vec<(usize, usize, usize)> = (0..rd)
        .flat_map(|i| (0..rs).flat_map(move |j| (0..=max_deg).map(move |e| (i, j, e))))
        .collect();
    let mut cols = Vec::with_capacity(unknowns.len());
    for &(i, j, e) in &unknowns {
        let mut col = Vec::new();
        for g in src.generators() {
            // image of g under the single-entry matrix t^e at (i, j)
            let mut img = vec![field.zero(); rd * width];
            for (ge, c) in g[j].coeffs().iter().enumerate() {
                if !c.is_zero() && ge + e <= n {
                    img[i * width + ge + e] = c.clone();
                }
            }
            col.extend(span.residual(&img));
        }
        cols.push(col);
    }
    let constraint = KMatrix::from_cols(field, cols).expect("rectangular");
    constraint
        .kernel_basis()
        .into_iter()
        .map(|sol| {
            let mut g = SMatrix::zero(ctx, rd, rs);
            for (k, &(i, j, e)) in unknowns.iter().enumerate() {
                if !sol[k].is_zero() {
                    *g.at_mut(i, j) = g
                        .at(i, j)
                        .try_add(&ctx.monomial(e, sol[k].clone()))
                        .expect("compatible");
                }
            }
            g
        })
        .collect()
}

/// Random combination of a morphism-space basis with small coefficients.
pub fn random_morphism(
    basis: &[SMatrix],
    rd: usize,
    rs: usize,
    ctx: Context,
    rng: &mut ChaCha8Rng,
) -> SMatrix {
    let mut g = SMatrix::zero(ctx, rd, rs);
    for b in basis {
        if rng.random_range(0..3) == 0 {
            let c = random_scalar(ctx.field, rng);
            if !c.is_zero() {
                g = g.add(&b.scale_series(&ctx.monomial(0, c))).expect("same shape");
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    const Q: Field = Field::Rational;

    fn ctx() -> Context {
        Context::new(Q, 12).unwrap()
    }

    fn lat(c: Context, rank: usize, gens: &[&[&[i64]]]) -> Lattice {
        let g = gens
            .iter()
            .map(|v| v.iter().map(|s| c.series(s)).collect())
            .collect();
        Lattice::new(c, rank, g).unwrap()
    }

    #[test]
    fn generator_counts_on_basic_shapes() {
        let c = ctx();
        assert_eq!(oracle_min_generators(&lat(c, 1, &[&[&[1]]])), 1);
        assert_eq!(
            oracle_min_generators(&lat(c, 1, &[&[&[0, 0, 1]], &[&[0, 0, 0, 1]]])),
            2
        );
        let mixed = lat(
            c,
            2,
            &[
                &[&[1], &[0, 1]],
                &[&[0, 0, 1], &[]],
                &[&[0, 0, 0, 1], &[]],
            ],
        );
        assert_eq!(oracle_min_generators(&mixed), 3);
    }

    #[test]
    fn torsion_oracle_on_pinned_maps() {
        let c = ctx();
        let zero = PhiMap::zero_tails(
            c,
            KMatrix::from_ints(Q, &[&[0]]),
            KMatrix::from_ints(Q, &[&[0]]),
        )
        .unwrap();
        let (v, tail) = oracle_torsion(&zero).unwrap();
        assert!(!v[0].is_zero());
        assert!(tail[0].is_zero());
        let unit = PhiMap::zero_tails(
            c,
            KMatrix::from_ints(Q, &[&[1]]),
            KMatrix::from_ints(Q, &[&[0]]),
        )
        .unwrap();
        assert!(oracle_torsion(&unit).is_none());
        let collapsed = PhiMap::zero_tails(
            c,
            KMatrix::from_ints(Q, &[&[1, 1]]),
            KMatrix::from_ints(Q, &[&[0, 0]]),
        )
        .unwrap();
        let (v, _) = oracle_torsion(&collapsed).unwrap();
        let ratio = v[0].clone();
        assert!(!ratio.is_zero());
        assert_eq!(v[1], -&ratio);
    }

    #[test]
    fn torsion_oracle_records_lift_tails() {
        let c = ctx();
        let h = SMatrix::from_cols(c, vec![vec![c.series(&[5])]]).unwrap();
        let p = PhiMap::new(
            c,
            KMatrix::from_ints(Q, &[&[0]]),
            KMatrix::from_ints(Q, &[&[0]]),
            Some(h),
        )
        .unwrap();
        let (v, tail) = oracle_torsion(&p).unwrap();
        // tail = -t^2 * 5 * v
        let expected = c.series(&[0, 0, -5]).scale(&v[0]);
        assert_eq!(tail[0], expected);
    }

    #[test]
    fn torsion_oracle_agrees_with_the_criterion() {
        let c = ctx();
        for i in 0..60 {
            let mut rng = instance_rng(99, i);
            let p = random_phi(c, 3, &mut rng);
            let brute = oracle_torsion(&p).is_some();
            assert_eq!(brute, !p.is_injective(), "instance {i}");
            assert_eq!(brute, p.torsion_search().is_some(), "instance {i}");
        }
    }

    #[test]
    fn generator_oracle_agrees_with_decompose() {
        let c = ctx();
        for i in 0..40 {
            let mut rng = instance_rng(7, i);
            let m = random_lattice(c, 4, &mut rng);
            let d = m.decompose().unwrap();
            assert_eq!(
                oracle_min_generators(&m),
                d.free_rank + 2 * d.sat_rank,
                "instance {i}"
            );
            assert_eq!(d.free_rank + d.sat_rank, m.rank(), "instance {i}");
        }
    }

    #[test]
    fn planted_lattices_hit_their_stratum() {
        let c = ctx();
        for (idx, (a, b)) in [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1)]
            .into_iter()
            .enumerate()
        {
            let mut rng = instance_rng(11, idx as u64);
            let m = planted_lattice(c, a, b, &mut rng);
            assert_eq!(m.decompose().unwrap().invariants(), (a, b));
        }
    }

    #[test]
    fn generator_moves_preserve_the_span() {
        let c = ctx();
        let mut rng = instance_rng(3, 0);
        let m = random_lattice(c, 3, &mut rng);
        let mut current = m.clone();
        for _ in 0..6 {
            current = transform_generators(&current, &mut rng);
        }
        assert!(current.same_span(&m).unwrap());
    }

    #[test]
    fn stability_of_the_basic_shapes() {
        let c = Context::new(Q, 8).unwrap();
        let m = Lattice::new(c, 1, vec![vec![c.series(&[0, 0, 1])], vec![c.series(&[0, 0, 0, 1])]])
            .unwrap();
        assert!(stable_decompose(&m, &[7, 8, 9]).unwrap());
        let c = ctx();
        let mut rng = instance_rng(21, 4);
        let p = random_phi(c, 3, &mut rng);
        assert!(stable_torsion(&p, &[10, 12, 14]).unwrap());
    }

    #[test]
    fn hom_space_contains_the_obvious_morphisms() {
        let c = ctx();
        let m = lat(c, 1, &[&[&[1]]]);
        let basis = hom_space_basis(&m, &m, 3);
        // the ring in degree <= 3: constants, t^2, t^3
        assert_eq!(basis.len(), 3);
        let table = m.span_table();
        for b in &basis {
            for g in m.generators() {
                assert!(table.contains(&b.apply(g)));
            }
        }
        let mut rng = instance_rng(5, 1);
        let g = random_morphism(&basis, 1, 1, c, &mut rng);
        for gen in m.generators() {
            assert!(table.contains(&g.apply(gen)));
        }
    }
}
