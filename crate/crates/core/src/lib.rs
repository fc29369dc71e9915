//! Unit vector fields viewed as submanifolds of the unit tangent bundle with
//! the Sasaki metric: chart geometry, the second fundamental form of the
//! image, the classified rotational family and its verification suites.

pub mod bundle;
pub mod classified;
pub mod dsl;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod manifold;
pub mod ode;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod scenario;
pub mod verify;

pub use bundle::{BundlePoint, BundleTangent};
pub use classified::{ClassifiedSurface, Mesh, ProfilePoint};
pub use error::{Error, Result};
pub use field::{FieldGeometry, UnitField};
pub use geometry::{Classification, FrameMode, LeafData, OmegaTensor};
pub use jet::DerivativeMode;
pub use manifold::{ChartMetric, ChartPoint, JacobiOperator, TangentVector};
pub use ode::{OdeOptions, Stop, Trajectory};
pub use report::{Report, Summary};
pub use scenario::{CustomSpec, Scenario};
pub use verify::{Check, Suite};
