use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures surfaced by the numerical modules.
///
/// The display strings are stable: the CLI prints them verbatim and the C
/// ABI maps each variant onto a status code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty lattice")]
    EmptyLattice,
    #[error("degenerate partition: {0}")]
    DegeneratePartition(String),
    #[error("non-generic site {site} (distance {distance:.3e} from a cone boundary)")]
    NonGenericSite { site: usize, distance: f64 },
    #[error("gapless parameters: {0}")]
    GaplessParameters(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("unresolvable zero modes: {0}")]
    UnresolvableZeroModes(String),
    #[error("gapless: {0}")]
    Gapless(String),
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("oracle too large: {0} vectors (at most 12)")]
    OracleTooLarge(usize),
    #[error("even copies unsupported: N = {0}")]
    EvenCopies(usize),
    #[error("non-Hermitian anomaly: imaginary residual {0:.3e}")]
    NonHermitianAnomaly(f64),
    #[error("branch ambiguity; reduce alpha ({0})")]
    BranchAmbiguity(String),
    #[error("unconverged: nu = {nu:.6} is {distance:.3e} from the nearest integer")]
    Unconverged { nu: f64, distance: f64 },
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
