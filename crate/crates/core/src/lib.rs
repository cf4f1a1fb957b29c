//! Regularized planar offsets of Cartesian curves `y = g(x)` and reconstruction
//! of the generator from an offset.
//!
//! The workflow has three steps. A generator spline is fitted to samples with
//! a penalty on slopes and second differences ([`tp_spline`]). An offset spline
//! is built at distance `τ` on either side as the minimum bending energy spline
//! through offset points with matching tangents ([`op_spline`]). Tangent
//! scalings are computed ([`refinement`]) and the generator is reconstructed by
//! offsetting back ([`bi_offset`]). [`pipeline`] runs the whole experiment and
//! [`output`] writes CSV and SVG artifacts.

pub mod basis;
pub mod bi_offset;
pub mod curve;
pub mod datasets;
pub mod error;
pub mod geometry;
pub mod interpolation;
mod nelder_mead;
pub mod op_spline;
pub mod output;
pub mod pipeline;
pub mod refinement;
pub mod solvers;
pub mod tp_spline;

pub use basis::{KnotVector, SplineModel};
pub use curve::Curve;
pub use error::{Error, Result};
pub use geometry::Side;
pub use op_spline::OffsetSpec;
pub use pipeline::{run_pipeline, ExperimentReport, PipelineConfig};
pub use tp_spline::{Dataset, RegularizationParams};
