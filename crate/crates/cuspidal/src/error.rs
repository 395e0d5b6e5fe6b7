use thiserror::Error;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input that never reached the math (bad JSON, unknown
    /// fields, unparseable scalars, wrong schema string).
    Parse,
    /// Structurally well-formed input that violates a declared invariant
    /// of its type (mismatched dimensions, singular sigma, non-echelon
    /// subspace basis, non-prime modulus, inconsistent field tags).
    Invariant,
    /// Input that is valid data but outside the mathematical domain of
    /// the requested operation (rank-deficient lattice, non-unit series
    /// inversion, torsion source, insufficient precision).
    Precondition,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("field mismatch: operands live over different ground fields")]
    FieldMismatch,
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(usize, usize),
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("series has positive valuation, no inverse")]
    NonUnit,
    #[error("division of series with valuation {num} by series with valuation {den}")]
    ValuationDrop { num: usize, den: usize },
    #[error("matrix dimensions {0}x{1} and {2}x{3} are incompatible")]
    DimMismatch(usize, usize, usize, usize),
    #[error("matrix is singular over the series ring")]
    SingularSeriesMatrix,
    #[error("square matrix required, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("generators span a submodule of rank below the ambient rank")]
    RankDeficient,
    #[error("precision {actual} is too low, need at least {required}")]
    PrecisionTooLow { required: usize, actual: usize },
    #[error("lattice is not in standard form: e_{0} is missing from the span")]
    NotStandardForm(usize),
    #[error("vector does not lie in the saturation of the lattice")]
    OutsideSaturation,
    #[error("internal split verification failed on generator {0}")]
    SplitVerification(usize),
    #[error("lattice ranks {0} and {1} differ")]
    RankMismatch(usize, usize),
    #[error("attachment map is not injective, the pushout has torsion")]
    TorsionSource,
    #[error("semirank {a} exceeds ambient rank {r}")]
    SemirankRange { a: usize, r: usize },
    #[error("subspace basis is rank-deficient")]
    DegenerateSubspace,
    #[error("subspace basis is not in reduced column echelon form")]
    NotEchelon,
    #[error("sigma matrix is singular")]
    SingularSigma,
    #[error("trivialization matrix is singular")]
    SingularTrivialization,
    #[error("splitting type sums to {sum}, expected degree {degree}")]
    SplittingTypeSum { sum: i64, degree: i64 },
    #[error("morphism does not map the source lattice into the target lattice")]
    NotAMorphism,
    #[error("fiber data is inconsistent with the supplied series matrix")]
    FiberMismatch,
    #[error("triple morphism violates subspace containment at cusp {0}")]
    ContainmentFailure(usize),
    #[error("triple morphism does not commute with sigma at cusp {0}")]
    SquareFailure(usize),
    #[error("cusp counts {0} and {1} differ")]
    CuspCountMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid document: {0}")]
    Document(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Parse(_) => ErrorKind::Parse,
            FieldMismatch | PrecisionMismatch(..) | NonPrimeModulus(_) | DimMismatch(..)
            | NotSquare(..) | SemirankRange { .. } | DegenerateSubspace | NotEchelon
            | SingularSigma | SingularTrivialization | SplittingTypeSum { .. }
            | CuspCountMismatch(..) | Document(_) => ErrorKind::Invariant,
            NonUnit | ValuationDrop { .. } | SingularSeriesMatrix | Singular | RankDeficient
            | PrecisionTooLow { .. } | NotStandardForm(_) | OutsideSaturation
            | SplitVerification(_) | RankMismatch(..) | TorsionSource | NotAMorphism
            | FiberMismatch | ContainmentFailure(_) | SquareFailure(_) => {
                ErrorKind::Precondition
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
