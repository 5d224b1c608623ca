use cyclo::KernelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("axiom violated: {name} at {witness:?}")]
    AxiomViolation { name: String, witness: Vec<usize> },
    #[error("backend is not unimodular")]
    NonUnimodular,
    #[error("backend is not factorizable")]
    NotFactorizable,
    #[error("{what} solution space has dimension {dim}, expected 1")]
    NotOneDimensional { what: String, dim: usize },
    #[error("field Q(zeta_N) does not split the algebra: {0}")]
    FieldNotSplitting(String),
    #[error("morphism is not idempotent")]
    NotIdempotent,
    #[error("object is not projective: {0}")]
    NotProjective(String),
    #[error("not an intertwiner: {0}")]
    NotIntertwiner(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("interface mismatch at slice {slice}: {msg}")]
    InterfaceMismatch { slice: usize, msg: String },
    #[error("diagram is not closed")]
    NotClosed,
    #[error("edge {0} is not labeled by a projective object")]
    EdgeNotProjective(usize),
    #[error("edge {0} is not blue")]
    EdgeNotBlue(usize),
    #[error("diagram is not admissible{0}")]
    NotAdmissible(String),
    #[error("red component is not closed")]
    OpenRedComponent,
    #[error("coupon {0:?} has no bound morphism")]
    UnboundCoupon(String),
    #[error("modified trace solution space has dimension {0}, expected 1")]
    NonUniqueTrace(usize),
    #[error("stabilization coefficient vanishes")]
    ZeroStabilization,
    #[error("square root of {0} is not in the field")]
    RootNotInField(String),
    #[error("manifest constants inconsistent: {0}")]
    BadConstants(String),
    #[error("S-transformation is not invertible")]
    SNotInvertible,
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("no factorization of the idempotent through End(G*) x End(G x V)")]
    NoFactorization,
    #[error("diagram is not a red link: {0}")]
    NotALink(String),
    #[error("subspace is not Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("no projective label among the marked points")]
    NoProjectiveLabel,
    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Io { .. } | Error::Parse(_) | Error::Syntax { .. } | Error::UnknownLabel(_) => 1,
            Error::NotAdmissible(_) | Error::NoProjectiveLabel | Error::EdgeNotProjective(_) => 2,
            Error::AxiomViolation { .. } | Error::NonUnimodular | Error::NotFactorizable | Error::FieldNotSplitting(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
