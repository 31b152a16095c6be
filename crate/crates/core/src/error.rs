use thiserror::Error;

/// Coarse classification used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Solver,
}

#[derive(Debug, Error)]
pub enum Error {
    // Price / scenario ingestion. Rows are 1-based file lines (the header is
    // line 1), columns are 1-based fields.
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row at line {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("duplicate date at line {row}")]
    DuplicateDate { row: usize },
    #[error("dates not strictly increasing at line {row}")]
    NonIncreasingDate { row: usize },
    #[error("non-numeric value at line {row}, column {col}")]
    NonNumeric { row: usize, col: usize },
    #[error("missing cell at line {row}, column {col}")]
    MissingCell { row: usize, col: usize },
    #[error("non-positive price at line {row}, column {col}")]
    NonPositivePrice { row: usize, col: usize },
    #[error("need at least {needed} data rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("invalid scenario set: {0}")]
    InvalidScenarios(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid risk specification: {0}")]
    InvalidRiskSpec(String),
    #[error("risk functional needs at least {needed} scenarios, have {found}")]
    TooFewScenarios { needed: usize, found: usize },

    #[error("invalid constraint set: {0}")]
    InvalidConstraints(String),
    #[error("no {side} mass to scale")]
    EmptySide { side: Side },
    #[error("{side} side cannot reach its budget within the bounds")]
    NonConvergent { side: Side },
    #[error("cannot average an empty list of portfolios")]
    EmptyPortfolioList,

    #[error("no feasible sample after {retries} redraws")]
    UnsatisfiableSupport { retries: usize },
    #[error("invalid sampler configuration: {0}")]
    InvalidSampler(String),

    #[error("invalid search configuration: {0}")]
    InvalidSearch(String),
    #[error("start portfolio is infeasible: {0}")]
    InfeasibleStart(String),
    #[error("no portfolio meets the return floor: {0}")]
    NoFeasiblePortfolio(String),
    #[error("stage with eps = {eps} hit the cap of {cap} iterations")]
    IterationCapExceeded { eps: f64, cap: usize },

    #[error("grid enumeration would visit about {estimated:.3e} candidates (limit {limit:.0e})")]
    BudgetExceeded { estimated: f64, limit: f64 },
    #[error("invalid grid request: {0}")]
    InvalidGrid(String),
    #[error("invalid LP model: {0}")]
    InvalidModel(String),
    #[error("baseline did not reach optimality: {0}")]
    BaselineFailed(String),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid portfolio file at line {row}: {reason}")]
    PortfolioFile { row: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Long,
    Short,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Long => f.write_str("long"),
            Side::Short => f.write_str("short"),
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Io { .. }
            | MalformedRow { .. }
            | DuplicateDate { .. }
            | NonIncreasingDate { .. }
            | NonNumeric { .. }
            | MissingCell { .. }
            | NonPositivePrice { .. }
            | TooFewRows { .. }
            | InvalidScenarios(_)
            | PortfolioFile { .. } => ErrorClass::Data,
            InvalidRiskSpec(_)
            | InvalidConstraints(_)
            | InvalidSampler(_)
            | InvalidSearch(_)
            | InvalidGrid(_)
            | Config(_) => ErrorClass::Config,
            DimensionMismatch { .. }
            | TooFewScenarios { .. }
            | EmptySide { .. }
            | NonConvergent { .. }
            | EmptyPortfolioList
            | UnsatisfiableSupport { .. }
            | InfeasibleStart(_)
            | NoFeasiblePortfolio(_)
            | IterationCapExceeded { .. }
            | BudgetExceeded { .. }
            | InvalidModel(_)
            | BaselineFailed(_) => ErrorClass::Solver,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
