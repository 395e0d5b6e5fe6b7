//! Command-line interface: batch classification and verification over
//! JSON documents. One document per invocation, read from a path or
//! standard input; results go to standard output. Exit codes: 1 for
//! parse errors, 2 for invariant violations, 3 for unmet mathematical
//! preconditions. FAIL verdicts are results, not errors, and exit 0.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cuspidal::doc::{Document, Payload, SheafModelDoc, TorsionReport, TripleDoc, SCHEMA};
use cuspidal::doc::DecompositionReport;
use cuspidal::error::{Error, ErrorKind, Result};
use cuspidal::extension::PhiMap;
use cuspidal::field::Field;
use cuspidal::ring::{Context, FieldDesc};
use cuspidal::selftest::run_all;
use cuspidal::smatrix::SMatrix;
use cuspidal::triples::{
    from_triple, functor_on_morphism, morphism_from_triple, roundtrip_object, semirank_diagnostic,
    to_triple, DegreeConvention, SemirankClass, SheafModel, TripleMorphism,
};

#[derive(Parser)]
#[command(name = "cuspidal", version, about = "exact sheaf calculator for cuspidal curves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split a lattice document into free and ideal summands
    Decompose(InputArgs),
    /// Compare declared fiber dimensions with realized free ranks
    Semirank(InputArgs),
    /// Decide whether an attachment map yields a torsion-free module
    TorsionCheck(InputArgs),
    /// Convert a sheaf model document into a triple document
    ToTriple(InputArgs),
    /// Convert a triple document into a sheaf model document
    FromTriple(InputArgs),
    /// Round-trip a lattice through the triple category and compare
    Roundtrip(RoundtripArgs),
    /// Push a morphism through the functor and reconstruct it
    MorphismRoundtrip(InputArgs),
    /// Run the randomized verification suites
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct InputArgs {
    /// input document path, or - for standard input
    input: Option<PathBuf>,
    /// re-truncate the input to this precision before computing
    #[arg(long)]
    precision: Option<usize>,
    /// assert the document's ground field: q or fp:P
    #[arg(long)]
    field: Option<String>,
    /// use the theorem statement's degree formula instead of the proof's
    #[arg(long)]
    theorem_degree: bool,
    /// compact single-line JSON output
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RoundtripArgs {
    #[command(flatten)]
    io: InputArgs,
    /// sheaf degree assigned to the lattice document
    #[arg(long, default_value_t = 0)]
    degree: i64,
}

#[derive(Args)]
struct SelftestArgs {
    /// seed for the instance streams
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// instances per suite
    #[arg(long, default_value_t = 25)]
    cases: usize,
    /// restrict to one ground field: q or fp:P (default runs both)
    #[arg(long)]
    field: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Parse => ExitCode::from(1),
                ErrorKind::Invariant => ExitCode::from(2),
                ErrorKind::Precondition => ExitCode::from(3),
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Decompose(io) => cmd_decompose(&io),
        Cmd::Semirank(io) => cmd_semirank(&io),
        Cmd::TorsionCheck(io) => cmd_torsion_check(&io),
        Cmd::ToTriple(io) => cmd_to_triple(&io),
        Cmd::FromTriple(io) => cmd_from_triple(&io),
        Cmd::Roundtrip(args) => cmd_roundtrip(&args),
        Cmd::MorphismRoundtrip(io) => cmd_morphism_roundtrip(&io),
        Cmd::Selftest(args) => cmd_selftest(&args),
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| Error::Parse(format!("cannot read {p:?}: {e}")))
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::Parse(format!("cannot read standard input: {e}")))?;
            Ok(buf)
        }
    }
}

fn parse_field_flag(s: &str) -> Result<FieldDesc> {
    if s == "q" {
        return Ok(FieldDesc::Q);
    }
    if let Some(p) = s.strip_prefix("fp:") {
        let p: u64 = p
            .parse()
            .map_err(|e| Error::Parse(format!("bad field flag {s:?}: {e}")))?;
        return Ok(FieldDesc::Fp { p });
    }
    Err(Error::Parse(format!(
        "bad field flag {s:?}, expected q or fp:P"
    )))
}

/// Parses the document, checks the field assertion, and returns it with
/// its native context. Precision overrides happen object by object.
fn load(io: &InputArgs) -> Result<(Document, Context)> {
    let text = read_input(&io.input)?;
    let doc = Document::parse(&text)?;
    if let Some(flag) = &io.field {
        let expected = parse_field_flag(flag)?;
        if expected != doc.field {
            return Err(Error::Parse(format!(
                "document field {:?} does not match --field {flag}",
                doc.field
            )));
        }
    }
    let ctx = doc.context()?;
    Ok((doc, ctx))
}

fn convention(io: &InputArgs) -> DegreeConvention {
    if io.theorem_degree {
        DegreeConvention::Theorem
    } else {
        DegreeConvention::Proof
    }
}

/// Writes one line to stdout. A closed pipe ends the process quietly so
/// piping into head or jq never produces a panic, any other write failure
/// is a hard error.
fn print_line(text: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{text}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write to stdout: {e}");
        std::process::exit(1);
    }
}

fn emit<T: Serialize>(io: &InputArgs, value: &T) -> Result<()> {
    let text = if io.json {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    }
    .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    print_line(&text);
    Ok(())
}

fn wrong_kind(cmd: &str, want: &str) -> Error {
    Error::Document(format!("{cmd} expects a {want} document"))
}

fn retruncated_phi(p: &PhiMap, precision: Option<usize>) -> Result<PhiMap> {
    match precision {
        Some(n) => p.re_truncated(n),
        None => Ok(p.clone()),
    }
}

fn retruncated_model(
    doc: &SheafModelDoc,
    ctx: Context,
    precision: Option<usize>,
    conv: DegreeConvention,
) -> Result<(SheafModel, Context)> {
    let model = doc.to_model(ctx, conv)?;
    match precision {
        None => Ok((model, ctx)),
        Some(n) => {
            let cusps = model
                .cusps
                .iter()
                .map(|p| p.re_truncated(n))
                .collect::<Result<Vec<_>>>()?;
            let model = SheafModel::new(model.rank, model.degree, cusps, conv)?;
            let c = model.ctx();
            Ok((model, c))
        }
    }
}

fn cmd_decompose(io: &InputArgs) -> Result<ExitCode> {
    let (doc, ctx) = load(io)?;
    let Payload::Lattice(ld) = &doc.payload else {
        return Err(wrong_kind("decompose", "lattice"));
    };
    let mut m = ld.to_lattice(ctx)?;
    if let Some(n) = io.precision {
        m = m.re_truncated(n)?;
    }
    let d = m.decompose()?;
    emit(io, &DecompositionReport::of(m.ctx(), &d))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SemirankCuspReport {
    expected: usize,
    observed: usize,
    class: &'static str,
}

#[derive(Serialize)]
struct SemirankReport {
    schema: String,
    verdict: &'static str,
    cusps: Vec<SemirankCuspReport>,
}

fn class_name(c: SemirankClass) -> &'static str {
    match c {
        SemirankClass::Match => "match",
        SemirankClass::DeficientFiberProjection => "deficient_fiber_projection",
        SemirankClass::Unclassified => "unclassified",
    }
}

fn semirank_cusps(phis: &[PhiMap]) -> Result<Vec<SemirankCuspReport>> {
    phis.iter()
        .map(|p| {
            let d = semirank_diagnostic(p)?;
            Ok(SemirankCuspReport {
                expected: d.expected,
                observed: d.observed,
                class: class_name(d.class),
            })
        })
        .collect()
}

fn cmd_semirank(io: &InputArgs) -> Result<ExitCode> {
    let (doc, ctx) = load(io)?;
    let conv = convention(io);
    let phis: Vec<PhiMap> = match &doc.payload {
        Payload::PhiMap(pd) => vec![retruncated_phi(&pd.to_phi(ctx)?, io.precision)?],
        Payload::SheafModel(sd) => retruncated_model(sd, ctx, io.precision, conv)?.0.cusps,
        Payload::Triple(td) => {
            let t = td.to_triple(ctx)?;
            let s = from_triple(&t, ctx, conv)?;
            s.cusps
                .iter()
                .map(|p| retruncated_phi(p, io.precision))
                .collect::<Result<Vec<_>>>()?
        }
        _ => return Err(wrong_kind("semirank", "phi_map, sheaf_model, or triple")),
    };
    let cusps = semirank_cusps(&phis)?;
    let verdict = if cusps.iter().all(|c| c.class == "match") {
        "match"
    } else {
        "mismatch"
    };
    emit(io, &SemirankReport { schema: SCHEMA.to_string(), verdict, cusps })?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_torsion_check(io: &InputArgs) -> Result<ExitCode> {
    let (doc, ctx) = load(io)?;
    let Payload::PhiMap(pd) = &doc.payload else {
        return Err(wrong_kind("torsion-check", "phi_map"));
    };
    let p = retruncated_phi(&pd.to_phi(ctx)?, io.precision)?;
    let witness = p.torsion_search();
    emit(io, &TorsionReport::of(witness.as_ref()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_to_triple(io: &InputArgs) -> Result<ExitCode> {
    let (doc, ctx) = load(io)?;
    let Payload::SheafModel(sd) = &doc.payload else {
        return Err(wrong_kind("to-triple", "sheaf_model"));
    };
    let (model, ctx) = retruncated_model(sd, ctx, io.precision, convention(io))?;
    let t = to_triple(&model)?;
    emit(io, &Document::new(ctx, Payload::Triple(TripleDoc::of(&t))))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_from_triple(io: &InputArgs) -> Result<ExitCode> {
    let (doc, mut ctx) = load(io)?;
    let Payload::Triple(td) = &doc.payload else {
        return Err(wrong_kind("from-triple", "triple"));
    };
    if let Some(n) = io.precision {
        ctx = Context::new(ctx.field, n)?;
    }
    let t = td.to_triple(ctx)?;
    let model = from_triple(&t, ctx, convention(io))?;
    let mut out = SheafModelDoc::of(&model);
    let mismatch = model
        .cusps
        .iter()
        .map(semirank_diagnostic)
        .collect::<Result<Vec<_>>>()?
        .iter()
        .any(|d| d.class != SemirankClass::Match);
    out.semirank_diagnostic = Some(if mismatch { "mismatch" } else { "match" }.to_string());
    emit(io, &Document::new(ctx, Payload::SheafModel(out)))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RoundtripReport {
    schema: String,
    verdict: &'static str,
    start_a: usize,
    start_b: usize,
    end_a: usize,
    end_b: usize,
    isomorphic: bool,
    degree_match: bool,
    degree: i64,
    convention: &'static str,
}

fn cmd_roundtrip(args: &RoundtripArgs) -> Result<ExitCode> {
    let io = &args.io;
    let (doc, ctx) = load(io)?;
    let Payload::Lattice(ld) = &doc.payload else {
        return Err(wrong_kind("roundtrip", "lattice"));
    };
    let mut m = ld.to_lattice(ctx)?;
    if let Some(n) = io.precision {
        m = m.re_truncated(n)?;
    }
    let conv = convention(io);
    let rt = roundtrip_object(&m, args.degree, conv)?;
    let report = RoundtripReport {
        schema: SCHEMA.to_string(),
        verdict: if rt.pass { "PASS" } else { "FAIL" },
        start_a: rt.start.0,
        start_b: rt.start.1,
        end_a: rt.end.0,
        end_b: rt.end.1,
        isomorphic: rt.isomorphic,
        degree_match: rt.degree_match,
        degree: args.degree,
        convention: match conv {
            DegreeConvention::Proof => "proof",
            DegreeConvention::Theorem => "theorem",
        },
    };
    emit(io, &report)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MorphismCuspReport {
    subspace_mapped: bool,
    square_commutes: bool,
}

#[derive(Serialize)]
struct MorphismRoundtripReport {
    schema: String,
    verdict: &'static str,
    functor_pass: bool,
    globals_identical: bool,
    fiber_reproduced: bool,
    cusps: Vec<MorphismCuspReport>,
}

fn cmd_morphism_roundtrip(io: &InputArgs) -> Result<ExitCode> {
    let (doc, ctx) = load(io)?;
    let Payload::Morphism(md) = &doc.payload else {
        return Err(wrong_kind("morphism-roundtrip", "morphism"));
    };
    let conv = convention(io);
    let (src, _) = retruncated_model(&md.src, ctx, io.precision, conv)?;
    let (dst, _) = retruncated_model(&md.dst, ctx, io.precision, conv)?;
    let mut gs: Vec<SMatrix> = md.to_matrices(ctx, dst.rank, src.rank)?;
    if let Some(n) = io.precision {
        for g in gs.iter_mut() {
            let mut out = SMatrix::zero(src.ctx().with_precision(n), g.rows(), g.cols());
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    *out.at_mut(i, j) = g.at(i, j).re_truncate(n);
                }
            }
            *g = out;
        }
    }
    let rep = functor_on_morphism(&gs, &src, &dst)?;
    let back = morphism_from_triple(&rep.morphism, &src, &dst)?;
    let globals_identical = back == gs;
    let stripped = TripleMorphism { cusps: rep.morphism.cusps.clone(), globals: None };
    let rebuilt = morphism_from_triple(&stripped, &src, &dst)?;
    let rep2 = functor_on_morphism(&rebuilt, &src, &dst)?;
    let fiber_reproduced = rep2.morphism.cusps == rep.morphism.cusps;
    let pass = rep.pass && globals_identical && fiber_reproduced;
    let report = MorphismRoundtripReport {
        schema: SCHEMA.to_string(),
        verdict: if pass { "PASS" } else { "FAIL" },
        functor_pass: rep.pass,
        globals_identical,
        fiber_reproduced,
        cusps: rep
            .checks
            .iter()
            .map(|c| MorphismCuspReport {
                subspace_mapped: c.v_containment,
                square_commutes: c.square_commutes,
            })
            .collect(),
    };
    emit(io, &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: &SelftestArgs) -> Result<ExitCode> {
    let fields: Vec<Field> = match &args.field {
        Some(flag) => vec![parse_field_flag(flag)?.to_field()?],
        None => vec![Field::Rational, Field::Prime(10007)],
    };
    let mut all_pass = true;
    for field in fields {
        let out = run_all(field, args.seed, args.cases);
        for r in &out.reports {
            let line = serde_json::to_string(r)
                .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
            print_line(&line);
        }
        let failures = out.reports.iter().filter(|r| !r.verdict).count();
        eprintln!(
            "selftest field={field:?} seed={} cases={} reports={} disagreements={failures}",
            args.seed,
            args.cases,
            out.reports.len()
        );
        all_pass &= out.pass;
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
