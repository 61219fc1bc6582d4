use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not normal: ||MM* - M*M|| = {residual:e}")]
    NotNormal { residual: f64 },
    #[error("matrix is not Hermitian: ||M - M*|| = {residual:e}")]
    NotHermitian { residual: f64 },
    #[error("operator is zero within tolerance (norm {norm:e})")]
    ZeroOperator { norm: f64 },
    #[error("not a projector: {reason}")]
    NotProjector { reason: String },
    #[error("not a density operator: {reason}")]
    NotDensity { reason: String },
    #[error("value {value} is not an eigenvalue of the observable")]
    UnknownEigenvalue { value: f64 },
    #[error("conditioning on an event of probability {mass:e}")]
    ConditioningOnNull { mass: f64 },
    #[error("projector family is not pairwise orthogonal: items {i} and {j} overlap by {residual:e}")]
    NotOrthogonalFamily { i: usize, j: usize, residual: f64 },
    #[error("observable `{0}` is not registered")]
    UnregisteredObservable(String),
    #[error("`{a}` and `{b}` do not commute (||[A,B]|| = {norm:e})")]
    NotCommuting { a: String, b: String, norm: f64 },
    #[error("family is not pairwise commuting: members {i} and {j} (||[A,B]|| = {norm:e})")]
    NotCommutingFamily { i: usize, j: usize, norm: f64 },
    #[error("order relation A <= B fails for `{a}` <= `{b}`")]
    OrderViolation { a: String, b: String },
    #[error("dimension {dim} is too small; the result assumes dim H >= 3")]
    DimensionTooSmall { dim: usize },
    #[error("assignment search space {size} exceeds the limit {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
    #[error("feasibility is numerically ambiguous: certified margin {margin:e} below {threshold:e}")]
    NumericalAmbiguity { margin: f64, threshold: f64 },
    #[error("`{label}` is not dichotomic (eigenvalue {eigenvalue} is not +1 or -1)")]
    NotDichotomic { label: String, eigenvalue: f64 },
    #[error("local observables `{a}` and `{b}` do not commute (||[A,B]|| = {norm:e})")]
    CrossTalk { a: String, b: String, norm: f64 },
    #[error("wrong scenario shape: {0}")]
    WrongScenarioShape(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("scenario has admissible assignments but no state")]
    MissingState,
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}
