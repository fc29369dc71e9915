use thiserror::Error;

use crate::dsl::DslError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} is outside the chart domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },
    #[error("degenerate metric: leading minor {index} is {value:e}")]
    DegenerateMetric { index: usize, value: f64 },
    #[error("degenerate plane: |X|^2|Y|^2 - <X,Y>^2 = {0:e}")]
    DegeneratePlane(f64),
    #[error("vector field is not unit: |xi| = {0}")]
    NotUnit(f64),
    #[error("metric components g[{0}][{1}] and g[{1}][{0}] differ")]
    NotSymmetric(usize, usize),
    #[error("input vectors are linearly dependent")]
    DependentInput,
    #[error("bundle tangents have different base points")]
    BaseMismatch,
    #[error("operator is not self-adjoint on the orthogonal complement of xi (asymmetry {0:e})")]
    NotSelfAdjoint(f64),
    #[error("kernel of the shape operator is ambiguous (dimension {0}, xi orthogonal to it)")]
    AmbiguousKernel(usize),
    #[error("orthogonal distribution of xi is not integrable (residual {0:e})")]
    NotIntegrable(f64),
    #[error("field is not geodesic (|nabla_xi xi| = {0:e})")]
    NotGeodesic(f64),
    #[error(
        "shape operator and Jacobi operator are not simultaneously diagonal \
         (shape order {shape_order:?}, Jacobi order {jacobi_order:?}, off-diagonal {offdiag:e})"
    )]
    FrameMismatch { shape_order: Vec<usize>, jacobi_order: Vec<usize>, offdiag: f64 },
    #[error("leaf is not totally umbilic (principal curvature spread {0:e})")]
    NotUmbilic(f64),
    #[error("umbilicity condition has a pole at k^2 = 1 (k = {0})")]
    UmbilicityPole(f64),
    #[error("pole at k^2=1 (k = {0})")]
    Pole(f64),
    #[error("implicit solution is undefined at k = 0")]
    ZeroCurvature,
    #[error("trajectory left its branch near k^2=1 at u = {u}, k = {k}")]
    BranchExit { u: f64, k: f64 },
    #[error("branch error: {0}")]
    Branch(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("metric is not of the form du^2 + g^2 dv^2: {0}")]
    Form(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("scenario error: {0}")]
    Scenario(String),
}

impl Error {
    /// Stable variant name for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "Domain",
            Error::DegenerateMetric { .. } => "DegenerateMetric",
            Error::DegeneratePlane(_) => "DegeneratePlane",
            Error::NotUnit(_) => "NotUnit",
            Error::NotSymmetric(..) => "NotSymmetric",
            Error::DependentInput => "DependentInput",
            Error::BaseMismatch => "BaseMismatch",
            Error::NotSelfAdjoint(_) => "NotSelfAdjoint",
            Error::AmbiguousKernel(_) => "AmbiguousKernel",
            Error::NotIntegrable(_) => "NotIntegrable",
            Error::NotGeodesic(_) => "NotGeodesic",
            Error::FrameMismatch { .. } => "FrameMismatch",
            Error::NotUmbilic(_) => "NotUmbilic",
            Error::UmbilicityPole(_) => "UmbilicityPole",
            Error::Pole(_) => "Pole",
            Error::ZeroCurvature => "ZeroCurvature",
            Error::BranchExit { .. } => "BranchExit",
            Error::Branch(_) => "Branch",
            Error::Sampling(_) => "Sampling",
            Error::Form(_) => "Form",
            Error::Dimension { .. } => "Dimension",
            Error::Integration(_) => "Integration",
            Error::Dsl(_) => "Dsl",
            Error::Scenario(_) => "Scenario",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
