use std::fmt;

use thiserror::Error;

/// Measurement branch of the source qubit: projection onto `|π⟩` or `|π⊥⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Plus => f.write_str("+"),
            Branch::Minus => f.write_str("-"),
        }
    }
}

/// Which branches failed when a feed-forward plan cannot be built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpossibleBranches {
    One(Branch),
    Both,
}

impl fmt::Display for ImpossibleBranches {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpossibleBranches::One(b) => write!(f, "branch {b}"),
            ImpossibleBranches::Both => f.write_str("both branches"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("{what} = {value} is out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("conditional states are linearly dependent (|det| = {det:e}); no filter can separate them")]
    LinearDependence { det: f64 },

    #[error("transfer impossible on {0}: conditional states are linearly dependent")]
    BranchImpossible(ImpossibleBranches),

    #[error("coupling too weak for the unfiltered protocol: T_V = {tv_squared} must be < 1/2")]
    TooWeakCoupling { tv_squared: f64 },

    #[error("process matrix has zero trace")]
    ZeroTrace,

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(&'static str),

    #[error("invalid scenario: feed-forward requires the fixed filter")]
    InvalidScenario,

    #[error("tomography design is not informationally complete")]
    SingularDesign,

    #[error("no evaluated angle admits a transfer plan")]
    AllBranchesDegenerate,

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: f64, range: &'static str) -> Self {
        Error::OutOfRange { what, value, range }
    }
}
