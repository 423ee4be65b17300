use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Requested basis would exceed the dimension safety cap.
    DimensionCap { dim: u128, cap: usize },
    /// Mode index outside `0..modes`.
    InvalidMode { mode: usize, modes: usize },
    /// Operands live on different bases.
    BasisMismatch,
    /// Vector or matrix has the wrong size.
    DimensionMismatch { expected: usize, found: usize },
    /// State or density matrix is not normalized within tolerance.
    NotNormalized { norm: f64 },
    /// Matrix failed the Hermiticity check.
    NotHermitian { deviation: f64 },
    /// A sector label or model parameter violates its precondition.
    InvalidArgument(&'static str),
    /// Structure value vanished inside a sector (HP dressing undefined).
    StructureSingularity { level: usize },
    /// Stationary-point scan came back empty.
    NoStationaryPoint,
    /// Flow left the admissible momentum range.
    FlowOutOfRange { p: f64, lo: f64, hi: f64 },
    /// Truncated state lost too much norm above the cutoff.
    Leakage { leakage: f64, threshold: f64 },
    /// Time grid has no points.
    EmptyGrid,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionCap { dim, cap } => {
                write!(f, "basis dimension {dim} exceeds safety cap {cap}")
            }
            Error::InvalidMode { mode, modes } => {
                write!(f, "mode index {mode} out of range for {modes} modes")
            }
            Error::BasisMismatch => write!(f, "operands are defined on different bases"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotNormalized { norm } => write!(f, "state not normalized (norm {norm})"),
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (max deviation {deviation:e})")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::StructureSingularity { level } => {
                write!(f, "structure value vanishes inside sector at level {level}")
            }
            Error::NoStationaryPoint => write!(f, "no stationary point found"),
            Error::FlowOutOfRange { p, lo, hi } => {
                write!(f, "flow momentum {p} left admissible range [{lo}, {hi}]; refine dt")
            }
            Error::Leakage { leakage, threshold } => {
                write!(f, "truncation leakage {leakage:e} above threshold {threshold:e}")
            }
            Error::EmptyGrid => write!(f, "time grid is empty"),
        }
    }
}

impl core::error::Error for Error {}
