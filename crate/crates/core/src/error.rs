use thiserror::Error;

/// Failure to turn expression text into a [`crate::ScalarField`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

/// Domain errors raised while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of non-positive value {0}")]
    LogOfNonPositive(f64),
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("square root is not differentiable at zero")]
    SqrtAtZero,
    #[error("point has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension must be odd and at least 3, got {0}")]
    BadDimension(usize),
    #[error("{what}: expected {expected} entries, found {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("frame index {index} out of range for {dim} frame directions")]
    FrameIndex { index: usize, dim: usize },
    #[error("coordinate {coord} = {value} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain {
        coord: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("avoid expression #{index} vanishes at the point (|value| = {value:e})")]
    AvoidedPoint { index: usize, value: f64 },
    #[error("no admissible sample found after {0} redraws")]
    SamplingExhausted(usize),
    #[error("frame metric is not symmetric (|g_ab - g_ba| = {0:e})")]
    AsymmetricMetric(f64),
    #[error("frame metric is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("frame metric is singular")]
    SingularMetric,
    #[error("transition Jacobian is singular (condition number {0:e})")]
    SingularJacobian(f64),
    #[error("tensor grid valence does not match: {0}")]
    Valence(String),
    #[error("quasi-Sasakian criteria disagree at sample {sample}: {detail}")]
    InconsistentCriteria { sample: usize, detail: String },
}
