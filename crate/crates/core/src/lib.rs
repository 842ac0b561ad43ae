//! Exact geometry and uncertainty of binary confusion matrices.

pub mod api;
pub mod contours;
pub mod distribution;
pub mod error;
pub mod geometry;
pub mod json;
pub mod matrix;
pub mod metrics;
pub mod surd;
pub mod uncertainty;
pub mod value;

pub use error::{Error, Result};
pub use matrix::{make_matrix, rates, ConfusionMatrix, Rates};
pub use metrics::{decision_benefit, eval_balanced, eval_metric, BenefitMatrix, MetricId, MetricInfo};
pub use value::MetricValue;
