//! JSON document formats. Scalars travel as exact strings ("3/7", "5"),
//! series as coefficient arrays indexed from exponent zero with trailing
//! zeros allowed, never longer than precision plus one. Unknown fields
//! are rejected everywhere. Field order is fixed, so equal inputs always
//! serialize to equal bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{PhiMap, TorsionWitness};
use crate::field::Scalar;
use crate::lattice::{Decomposition, Lattice};
use crate::matrix::KMatrix;
use crate::ring::{Context, FieldDesc};
use crate::series::PSeries;
use crate::smatrix::SMatrix;
use crate::triples::{
    BundleData, CuspTriple, DegreeConvention, SheafModel, Triple,
};

pub const SCHEMA: &str = "cusp-sheaf/1";

/// Envelope around every input payload.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub schema: String,
    pub field: FieldDesc,
    pub precision: usize,
    pub payload: Payload,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    Lattice(LatticeDoc),
    PhiMap(PhiMapDoc),
    Triple(TripleDoc),
    SheafModel(SheafModelDoc),
    Morphism(MorphismDoc),
}

impl Document {
    pub fn new(ctx: Context, payload: Payload) -> Self {
        Document {
            schema: SCHEMA.to_string(),
            field: FieldDesc::of(ctx.field),
            precision: ctx.precision,
            payload,
        }
    }

    pub fn parse(text: &str) -> Result<Document> {
        let d: Document =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad document: {e}")))?;
        if d.schema != SCHEMA {
            return Err(Error::Document(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                d.schema
            )));
        }
        Ok(d)
    }

    pub fn context(&self) -> Result<Context> {
        Context::new(self.field.to_field()?, self.precision)
    }
}

// scalar and series string forms

fn scalar_str(s: &Scalar) -> String {
    s.to_string()
}

fn series_strs(s: &PSeries) -> Vec<String> {
    let coeffs = s.coeffs();
    let last = coeffs.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    coeffs[..last].iter().map(scalar_str).collect()
}

fn series_of_strs(ctx: Context, strs: &[String]) -> Result<PSeries> {
    if strs.len() > ctx.precision + 1 {
        return Err(Error::Document(format!(
            "series has {} coefficients but precision {} allows at most {}",
            strs.len(),
            ctx.precision,
            ctx.precision + 1
        )));
    }
    let mut coeffs = vec![ctx.field.zero(); ctx.precision + 1];
    for (i, s) in strs.iter().enumerate() {
        coeffs[i] = ctx.field.parse_scalar(s)?;
    }
    PSeries::from_coeffs(ctx.field, ctx.precision, coeffs)
}

fn kmatrix_strs(m: &KMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| scalar_str(m.at(i, j))).collect())
        .collect()
}

fn kmatrix_of_strs(ctx: Context, rows: &[Vec<String>], cols_hint: usize) -> Result<KMatrix> {
    let cols = rows.first().map_or(cols_hint, Vec::len);
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != cols {
            return Err(Error::Document("ragged matrix rows".into()));
        }
        parsed.push(
            row.iter()
                .map(|s| ctx.field.parse_scalar(s))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if parsed.is_empty() {
        return Ok(KMatrix::zero(0, cols_hint, ctx.field));
    }
    KMatrix::from_rows(ctx.field, parsed)
}

fn smatrix_strs(m: &SMatrix) -> Vec<Vec<Vec<String>>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| series_strs(m.at(i, j))).collect())
        .collect()
}

fn smatrix_of_strs(ctx: Context, rows: &[Vec<Vec<String>>], shape: (usize, usize)) -> Result<SMatrix> {
    let (r, c) = if rows.is_empty() {
        shape
    } else {
        (rows.len(), rows[0].len())
    };
    let mut out = SMatrix::zero(ctx, r, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::Document("ragged series matrix rows".into()));
        }
        for (j, entry) in row.iter().enumerate() {
            *out.at_mut(i, j) = series_of_strs(ctx, entry)?;
        }
    }
    Ok(out)
}

/// Lattice payload: generators as vectors of series.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeDoc {
    pub rank: usize,
    pub generators: Vec<Vec<Vec<String>>>,
}

impl LatticeDoc {
    pub fn of(m: &Lattice) -> Self {
        LatticeDoc {
            rank: m.rank(),
            generators: m
                .generators()
                .iter()
                .map(|g| g.iter().map(series_strs).collect())
                .collect(),
        }
    }

    pub fn to_lattice(&self, ctx: Context) -> Result<Lattice> {
        let mut gens = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            if g.len() != self.rank {
                return Err(Error::Document(format!(
                    "generator has {} coordinates, rank is {}",
                    g.len(),
                    self.rank
                )));
            }
            gens.push(
                g.iter()
                    .map(|s| series_of_strs(ctx, s))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Lattice::new(ctx, self.rank, gens)
    }
}

/// Attachment map payload: constant and first-order parts as scalar
/// matrices, optional higher tail as a series matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhiMapDoc {
    pub ambient_rank: usize,
    pub fiber_dim: usize,
    pub a_matrix: Vec<Vec<String>>,
    pub b_matrix: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_matrix: Option<Vec<Vec<Vec<String>>>>,
}

impl PhiMapDoc {
    pub fn of(p: &PhiMap) -> Self {
        PhiMapDoc {
            ambient_rank: p.ambient_rank(),
            fiber_dim: p.fiber_dim(),
            a_matrix: kmatrix_strs(p.a_matrix()),
            b_matrix: kmatrix_strs(p.b_matrix()),
            h_matrix: p.h_matrix().map(smatrix_strs),
        }
    }

    pub fn to_phi(&self, ctx: Context) -> Result<PhiMap> {
        let shape_err = |name: &str| {
            Error::Document(format!(
                "{name} does not match declared shape {}x{}",
                self.ambient_rank, self.fiber_dim
            ))
        };
        let amat = kmatrix_of_strs(ctx, &self.a_matrix, self.fiber_dim)?;
        if amat.rows() != self.ambient_rank || amat.cols() != self.fiber_dim {
            return Err(shape_err("a_matrix"));
        }
        let bmat = kmatrix_of_strs(ctx, &self.b_matrix, self.fiber_dim)?;
        if bmat.rows() != self.ambient_rank || bmat.cols() != self.fiber_dim {
            return Err(shape_err("b_matrix"));
        }
        let hmat = match &self.h_matrix {
            None => None,
            Some(rows) => {
                let h = smatrix_of_strs(ctx, rows, (self.ambient_rank, self.fiber_dim))?;
                if h.rows() != self.ambient_rank || h.cols() != self.fiber_dim {
                    return Err(shape_err("h_matrix"));
                }
                Some(h)
            }
        };
        PhiMap::new(ctx, amat, bmat, hmat)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub rank: usize,
    pub degree: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitting_type: Option<Vec<i64>>,
    pub trivializations: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CuspTripleDoc {
    pub fiber_dim: usize,
    pub v: Vec<Vec<String>>,
    pub sigma: Vec<Vec<String>>,
}

/// Triple payload: bundle data plus per-cusp subspace and gluing matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TripleDoc {
    pub bundle: BundleDoc,
    pub cusps: Vec<CuspTripleDoc>,
}

impl TripleDoc {
    pub fn of(t: &Triple) -> Self {
        TripleDoc {
            bundle: BundleDoc {
                rank: t.bundle.rank,
                degree: t.bundle.degree,
                splitting_type: t.bundle.splitting_type.clone(),
                trivializations: t.bundle.trivializations.iter().map(kmatrix_strs).collect(),
            },
            cusps: t
                .cusps
                .iter()
                .map(|c| CuspTripleDoc {
                    fiber_dim: c.fiber_dim,
                    v: kmatrix_strs(&c.vmat),
                    sigma: kmatrix_strs(&c.sigma),
                })
                .collect(),
        }
    }

    pub fn to_triple(&self, ctx: Context) -> Result<Triple> {
        let shape_err = |name: String, rows: usize, cols: usize| {
            Error::Document(format!("{name} does not match expected shape {rows}x{cols}"))
        };
        let r = self.bundle.rank;
        let mut trivializations = Vec::with_capacity(self.bundle.trivializations.len());
        for (i, m) in self.bundle.trivializations.iter().enumerate() {
            let t = kmatrix_of_strs(ctx, m, r)?;
            if t.rows() != r || t.cols() != r {
                return Err(shape_err(format!("bundle.trivializations[{i}]"), r, r));
            }
            trivializations.push(t);
        }
        let bundle = BundleData::new(
            self.bundle.rank,
            self.bundle.degree,
            self.bundle.splitting_type.clone(),
            trivializations,
        )?;
        let mut cusps = Vec::with_capacity(self.cusps.len());
        for (i, c) in self.cusps.iter().enumerate() {
            let vmat = kmatrix_of_strs(ctx, &c.v, c.fiber_dim)?;
            if vmat.rows() != 2 * r || vmat.cols() != c.fiber_dim {
                return Err(shape_err(format!("cusps[{i}].v"), 2 * r, c.fiber_dim));
            }
            let sigma = kmatrix_of_strs(ctx, &c.sigma, c.fiber_dim)?;
            if sigma.rows() != c.fiber_dim || sigma.cols() != c.fiber_dim {
                return Err(shape_err(format!("cusps[{i}].sigma"), c.fiber_dim, c.fiber_dim));
            }
            cusps.push(CuspTriple {
                fiber_dim: c.fiber_dim,
                vmat,
                sigma,
            });
        }
        let t = Triple { bundle, cusps };
        t.validate()?;
        Ok(t)
    }
}

/// Sheaf model payload: global rank and degree with one attachment map
/// per cusp. The derived fields are emitted on output and accepted but
/// recomputed on input.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SheafModelDoc {
    pub rank: usize,
    pub degree: i64,
    pub cusps: Vec<PhiMapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_degree: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semirank_diagnostic: Option<String>,
}

impl SheafModelDoc {
    pub fn of(s: &SheafModel) -> Self {
        SheafModelDoc {
            rank: s.rank,
            degree: s.degree,
            cusps: s.cusps.iter().map(PhiMapDoc::of).collect(),
            e_degree: Some(s.e_degree),
            semirank_diagnostic: None,
        }
    }

    pub fn to_model(&self, ctx: Context, convention: DegreeConvention) -> Result<SheafModel> {
        let cusps = self
            .cusps
            .iter()
            .map(|c| c.to_phi(ctx))
            .collect::<Result<Vec<_>>>()?;
        SheafModel::new(self.rank, self.degree, cusps, convention)
    }
}

/// Morphism payload: source and target models with one series matrix per
/// cusp.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub src: SheafModelDoc,
    pub dst: SheafModelDoc,
    pub matrices: Vec<Vec<Vec<Vec<String>>>>,
}

impl MorphismDoc {
    pub fn matrices_of(ms: &[SMatrix]) -> Vec<Vec<Vec<Vec<String>>>> {
        ms.iter().map(smatrix_strs).collect()
    }

    pub fn to_matrices(&self, ctx: Context, rd: usize, rs: usize) -> Result<Vec<SMatrix>> {
        self.matrices
            .iter()
            .map(|m| {
                let g = smatrix_of_strs(ctx, m, (rd, rs))?;
                if g.rows() != rd || g.cols() != rs {
                    return Err(Error::Document(format!(
                        "morphism matrix is {}x{}, models need {rd}x{rs}",
                        g.rows(),
                        g.cols()
                    )));
                }
                Ok(g)
            })
            .collect()
    }
}

// output-only report shapes

/// Decomposition report: the two invariants, the split basis, and the
/// division transcript showing each generator's coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub schema: String,
    pub field: FieldDesc,
    pub precision: usize,
    pub a: usize,
    pub b: usize,
    pub free_vectors: Vec<Vec<String>>,
    pub saturated_vectors: Vec<Vec<String>>,
    pub basis_change: Vec<Vec<String>>,
    pub verification: Vec<Vec<Vec<String>>>,
}

impl DecompositionReport {
    pub fn of(ctx: Context, d: &Decomposition) -> Self {
        let consts = |vs: &[Vec<Scalar>]| vs.iter().map(|v| v.iter().map(scalar_str).collect()).collect();
        DecompositionReport {
            schema: SCHEMA.to_string(),
            field: FieldDesc::of(ctx.field),
            precision: ctx.precision,
            a: d.free_rank,
            b: d.sat_rank,
            free_vectors: consts(&d.free_vectors),
            saturated_vectors: consts(&d.sat_vectors),
            basis_change: kmatrix_strs(&d.basis_change),
            verification: d
                .cramer
                .iter()
                .map(|v| v.iter().map(series_strs).collect())
                .collect(),
        }
    }
}

/// Torsion verdict with the annihilated class when one exists.
#[derive(Debug, Clone, Serialize)]
pub struct TorsionReport {
    pub schema: String,
    pub torsion_free: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TorsionWitnessDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionWitnessDoc {
    pub constant_part: Vec<String>,
    pub ideal_part: Vec<Vec<String>>,
}

impl TorsionReport {
    pub fn of(w: Option<&TorsionWitness>) -> Self {
        TorsionReport {
            schema: SCHEMA.to_string(),
            torsion_free: w.is_none(),
            witness: w.map(|w| TorsionWitnessDoc {
                constant_part: w.constant_part.iter().map(scalar_str).collect(),
                ideal_part: w.ideal_part.iter().map(series_strs).collect(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::oracle::{instance_rng, random_lattice, random_phi};
    use crate::triples::to_triple;

    fn ctx() -> Context {
        Context::new(Field::Rational, 12).unwrap()
    }

    #[test]
    fn lattice_documents_round_trip() {
        let c = ctx();
        for i in 0..10 {
            let mut rng = instance_rng(31, i);
            let m = random_lattice(c, 3, &mut rng);
            let doc = Document::new(c, Payload::Lattice(LatticeDoc::of(&m)));
            let text = serde_json::to_string_pretty(&doc).unwrap();
            let parsed = Document::parse(&text).unwrap();
            assert_eq!(parsed, doc);
            let Payload::Lattice(ld) = &parsed.payload else { panic!("wrong kind") };
            let m2 = ld.to_lattice(parsed.context().unwrap()).unwrap();
            assert_eq!(m2.generators(), m.generators());
        }
    }

    #[test]
    fn phi_documents_round_trip_both_fields() {
        for field in [Field::Rational, Field::Prime(10007)] {
            let c = Context::new(field, 12).unwrap();
            for i in 0..10 {
                let mut rng = instance_rng(32, i);
                let p = random_phi(c, 3, &mut rng);
                let doc = Document::new(c, Payload::PhiMap(PhiMapDoc::of(&p)));
                let text = serde_json::to_string(&doc).unwrap();
                let parsed = Document::parse(&text).unwrap();
                assert_eq!(parsed, doc);
                let Payload::PhiMap(pd) = &parsed.payload else { panic!("wrong kind") };
                let p2 = pd.to_phi(c).unwrap();
                assert_eq!(p2.a_matrix(), p.a_matrix());
                assert_eq!(p2.b_matrix(), p.b_matrix());
                assert_eq!(p2.h_matrix(), p.h_matrix());
            }
        }
    }

    #[test]
    fn triple_documents_round_trip() {
        let c = ctx();
        let mut rng = instance_rng(33, 0);
        let m = random_lattice(c, 3, &mut rng);
        let e = crate::extension::extract_phi(&m).unwrap();
        let s = SheafModel::new(m.rank(), 2, vec![e.phi], DegreeConvention::Proof).unwrap();
        let t = to_triple(&s).unwrap();
        let doc = Document::new(c, Payload::Triple(TripleDoc::of(&t)));
        let text = serde_json::to_string(&doc).unwrap();
        let parsed = Document::parse(&text).unwrap();
        assert_eq!(parsed, doc);
        let Payload::Triple(td) = &parsed.payload else { panic!("wrong kind") };
        let t2 = td.to_triple(c).unwrap();
        assert_eq!(t2, t);
    }

    #[test]
    fn triple_shape_errors_name_the_field() {
        let c = ctx();
        let mut rng = instance_rng(33, 1);
        let (rank, phi) = loop {
            let m = random_lattice(c, 2, &mut rng);
            let e = crate::extension::extract_phi(&m).unwrap();
            if e.phi.fiber_dim() > 0 {
                break (m.rank(), e.phi);
            }
        };
        let s = SheafModel::new(rank, 0, vec![phi], DegreeConvention::Proof).unwrap();
        let good = TripleDoc::of(&to_triple(&s).unwrap());
        let msg = |d: &TripleDoc| match d.to_triple(c) {
            Err(Error::Document(m)) => m,
            other => panic!("expected a document error, got {other:?}"),
        };
        let mut bad = good.clone();
        bad.bundle.trivializations[0].pop();
        assert!(msg(&bad).contains("bundle.trivializations[0]"));
        let mut bad = good.clone();
        bad.cusps[0].v.pop();
        assert!(msg(&bad).contains("cusps[0].v"));
        let mut bad = good.clone();
        bad.cusps[0].sigma.push(vec!["0".into(); good.cusps[0].fiber_dim]);
        assert!(msg(&bad).contains("cusps[0].sigma"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"schema":"cusp-sheaf/1","field":{"type":"q"},"precision":12,
            "payload":{"kind":"lattice","data":{"rank":1,"generators":[[["1"]]],"extra":3}}}"#;
        assert!(Document::parse(text).is_err());
        let text = r#"{"schema":"cusp-sheaf/1","field":{"type":"q"},"precision":12,"bogus":1,
            "payload":{"kind":"lattice","data":{"rank":1,"generators":[[["1"]]]}}}"#;
        assert!(Document::parse(text).is_err());
    }

    #[test]
    fn schema_and_lengths_are_checked() {
        let text = r#"{"schema":"cusp-sheaf/0","field":{"type":"q"},"precision":12,
            "payload":{"kind":"lattice","data":{"rank":1,"generators":[[["1"]]]}}}"#;
        assert!(matches!(Document::parse(text), Err(Error::Document(_))));
        let c = Context::new(Field::Rational, 4).unwrap();
        let too_long = vec!["1".to_string(); 6];
        assert!(series_of_strs(c, &too_long).is_err());
        assert!(series_of_strs(c, &["1/0".to_string()]).is_err());
    }

    #[test]
    fn scalars_serialize_as_exact_strings() {
        let c = ctx();
        let third = Field::Rational.from_i64(1).div(&Field::Rational.from_i64(3));
        let s = PSeries::from_coeffs(
            Field::Rational,
            12,
            {
                let mut v = vec![Field::Rational.zero(); 13];
                v[0] = third;
                v[4] = Field::Rational.from_i64(-2);
                v
            },
        )
        .unwrap();
        assert_eq!(series_strs(&s), vec!["1/3", "0", "0", "0", "-2"]);
        let back = series_of_strs(c, &series_strs(&s)).unwrap();
        assert_eq!(back, s);
    }
}
