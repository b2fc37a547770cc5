//! Error types shared across the library.

use thiserror::Error;

/// Errors raised while constructing or evaluating networks and kernels.
#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("architecture needs at least one layer function (got {0} widths)")]
    TooFewLayers(usize),
    #[error("layer widths must be positive, width {index} is zero")]
    ZeroWidth { index: usize },
    #[error("layer {layer}: expected {expected} values, got {got}")]
    LayerMismatch {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("input has dimension {got}, architecture expects {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("packed parameter vector has length {got}, architecture expects {expected}")]
    PackedLen { expected: usize, got: usize },
    #[error("output component {component} out of range for output dimension {output_dim}")]
    Component { component: usize, output_dim: usize },
    #[error("decay exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
}

/// Errors from the sup-norm machinery.
#[derive(Debug, Error)]
pub enum SupNormError {
    #[error(
        "certified bounds unavailable: decay exponent {exponent} is below depth+1 = {required}"
    )]
    CertificationUnavailable { exponent: f64, required: f64 },
    #[error("probe {index} is not certified inside the unit ball (analytic upper {upper})")]
    RejectedProbe { index: usize, upper: f64 },
    #[error("combination needs at least one term")]
    EmptyCombination,
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Errors from sign-vector enumeration.
#[derive(Debug, Error)]
pub enum SignsError {
    #[error("sign entries must be -1, 0 or +1 (got {0})")]
    BadEntry(i8),
    #[error("enumeration over {m} points needs 3^{m} = {cost} verdicts, above the cap of {cap}")]
    CapExceeded { m: usize, cost: u64, cap: usize },
    #[error(transparent)]
    SupNorm(#[from] SupNormError),
}

/// Errors from the representer pipeline.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dataset row {index} has input dimension {got}, expected {expected}")]
    InputWidth {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("dataset row {index} has output dimension {got}, expected {expected}")]
    OutputWidth {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("rows {first} and {second} share an input but disagree on the output")]
    InconsistentDuplicate { first: usize, second: usize },
    #[error("gram matrix is singular (zero pivot at row {row})")]
    SingularGram { row: usize },
    #[error("gram matrix is ill-conditioned: condition estimate {cond:.3e} exceeds {limit:.1e}")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("gram matrix must be square (got {rows} rows, {cols} cols)")]
    NotSquare { rows: usize, cols: usize },
    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientLen { expected: usize, got: usize },
    #[error("no point produced a usable anchor; nothing to solve\n{details}")]
    NoAnchors { details: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    SupNorm(#[from] SupNormError),
    #[error(transparent)]
    Signs(#[from] SignsError),
    #[error(transparent)]
    Reg(#[from] RegError),
}

/// Errors from the regularization sweep.
#[derive(Debug, Error)]
pub enum RegError {
    #[error("diagonal entry {index} is not positive ({value}); orthant form is degenerate")]
    DegenerateDiagonal { index: usize, value: f64 },
    #[error("lambda0 must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("sign vector has length {got}, coefficients have length {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Errors from configuration and dataset files.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("report parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dataset must set exactly one of `path` or `inline`")]
    DatasetSource,
    #[error("dataset csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset header mismatch: expected `{expected}`, got `{got}`")]
    Header { expected: String, got: String },
    #[error("dataset row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("dataset row {row}, column {column}: bad number `{text}`")]
    BadNumber {
        row: usize,
        column: usize,
        text: String,
    },
    #[error("config field {field}: {reason}")]
    Invalid {
        field: &'static str,
        reason: String,
    },
    #[error("report schema version {got} is not supported (expected {expected})")]
    SchemaVersion { expected: u32, got: u32 },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
