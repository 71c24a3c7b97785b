use thiserror::Error;

/// Every failure the library reports. `code()` gives the stable tag printed by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} outside 1..=3")]
    InvalidDimension(usize),
    #[error("axis {axis} has odd size {size}")]
    OddSize { axis: usize, size: usize },
    #[error("axis {axis} has size {size} below the minimum of 8")]
    TooFewPoints { axis: usize, size: usize },
    #[error("axis {axis} has non-positive half width {half_width}")]
    BadHalfWidth { axis: usize, half_width: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("multiplier produced an imaginary residue of {residue:e} (relative)")]
    NonRealResult { residue: f64 },
    #[error("field has non-zero mean {mean:e}")]
    NonZeroMean { mean: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid (alpha, beta): {0}")]
    InvalidKParams(String),
    #[error("threshold undefined at zero speed")]
    ZeroSpeed,
    #[error("identity {what} violated: relative mismatch {mismatch:e}")]
    IdentityViolation { what: &'static str, mismatch: f64 },
    #[error("cross-check {what} failed: relative mismatch {mismatch:e}")]
    CrossCheckMismatch { what: &'static str, mismatch: f64 },
    #[error("no convergence after {max_iter} iterations (last residual {last_residual:e})")]
    NoConvergence { max_iter: usize, last_residual: f64 },
    #[error("iteration collapsed to zero after {iters} iterations")]
    DivergedToZero { iters: usize },
    #[error("iteration blew up after {iters} iterations")]
    DivergedToInf { iters: usize },
    #[error("continuation stuck at speed {at:?} (last good {last_good:?}): {cause}")]
    ContinuationStuck { at: Vec<f64>, last_good: Option<Vec<f64>>, cause: String },
    #[error("decay tail falls below the sampling floor")]
    TailBelowFloor,
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{0}")]
    MissingKey(String),
    #[error("{0}")]
    UnknownKey(String),
    #[error("{path}: {msg}")]
    RangeViolation { path: String, msg: String },
    #[error("{path}: cannot parse {value:?}")]
    ParseValue { path: String, value: String },
    #[error("bad magic bytes in field file")]
    BadMagic,
    #[error("field file version {0} unsupported")]
    VersionMismatch(u16),
    #[error("field file payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("field file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("field file header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("output directory locked: {0}")]
    Locked(String),
    #[error("injected fault: {0}")]
    InjectedFault(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidDimension(_) => "INVALID_DIMENSION",
            OddSize { .. } => "ODD_SIZE",
            TooFewPoints { .. } => "TOO_FEW_POINTS",
            BadHalfWidth { .. } => "BAD_HALF_WIDTH",
            LengthMismatch { .. } => "LENGTH_MISMATCH",
            GridMismatch => "GRID_MISMATCH",
            NonFinite { .. } => "NON_FINITE",
            NonRealResult { .. } => "NON_REAL_RESULT",
            NonZeroMean { .. } => "NON_ZERO_MEAN",
            InvalidParams(_) => "INVALID_PARAMS",
            InvalidKParams(_) => "INVALID_KPARAMS",
            ZeroSpeed => "ZERO_SPEED",
            IdentityViolation { .. } => "IDENTITY_VIOLATION",
            CrossCheckMismatch { .. } => "CROSS_CHECK_MISMATCH",
            NoConvergence { .. } => "NO_CONVERGENCE",
            DivergedToZero { .. } => "DIVERGED_TO_ZERO",
            DivergedToInf { .. } => "DIVERGED_TO_INF",
            ContinuationStuck { .. } => "CONTINUATION_STUCK",
            TailBelowFloor => "TAIL_BELOW_FLOOR",
            NonFiniteState { .. } => "NON_FINITE_STATE",
            Precondition(_) => "PRECONDITION",
            MissingKey(_) => "MISSING_KEY",
            UnknownKey(_) => "UNKNOWN_KEY",
            RangeViolation { .. } => "RANGE_VIOLATION",
            ParseValue { .. } => "PARSE_VALUE",
            BadMagic => "BAD_MAGIC",
            VersionMismatch(_) => "VERSION_MISMATCH",
            TruncatedPayload { .. } => "TRUNCATED_PAYLOAD",
            TrailingBytes(_) => "TRAILING_BYTES",
            HeaderMismatch(_) => "HEADER_MISMATCH",
            Locked(_) => "LOCKED",
            InjectedFault(_) => "INJECTED_FAULT",
            Io(_) => "IO",
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        use Error::*;
        matches!(
            self,
            NonFinite { .. }
                | NonRealResult { .. }
                | IdentityViolation { .. }
                | CrossCheckMismatch { .. }
                | NoConvergence { .. }
                | DivergedToZero { .. }
                | DivergedToInf { .. }
                | ContinuationStuck { .. }
                | TailBelowFloor
                | NonFiniteState { .. }
                | InjectedFault(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
