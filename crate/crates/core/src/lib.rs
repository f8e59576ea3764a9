//! Exact-jet curvature engine for twisted, GRW and RW space-times, with a
//! suite of numerical identity checks for the Weyl tensor, its electric part
//! and the traceless tensor `Γ` built from them.
//!
//! The layers, bottom up:
//! - [`jet`]: third-order forward-mode jets,
//! - [`tensor`]: dense component tensors with explicit variance,
//! - [`models`]: the metric catalog,
//! - [`curvature`]: Christoffel → Riemann → Weyl → covariant derivatives,
//! - [`identities`]: residual checks and their registry,
//! - [`runner`]: configuration, reports and exit codes.

pub mod curvature;
pub mod error;
pub mod expr;
pub mod identities;
pub mod jet;
pub mod models;
pub mod runner;
pub mod tensor;

pub use curvature::{build_bundle, CurvatureBundle};
pub use error::{Error, Result};
pub use jet::Jet3;
pub use models::{ChartPoint, MetricModel, ModelClass};
pub use tensor::{TensorValue, Variance};
