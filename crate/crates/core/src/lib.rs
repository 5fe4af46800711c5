//! Planar last passage models with a defect line.
//!
//! * Poisson last passage (Ulam's problem) with extra points on a diagonal.
//! * Exponential directed last passage on `{0..n}^2` with a slowed diagonal.
//! * TASEP from step initial condition with a slow bond.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod error;
pub mod geometry;
pub mod lattice;
pub mod point_process;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod tasep;
pub mod ulam;

pub use error::{Error, Result};
pub use rng::{Purpose, Stream, StreamKey};
pub use scalar::Scalar;

pub type PlanarPoint = geometry::PlanarPoint<f64>;
pub type IncreasingPath = geometry::IncreasingPath<f64>;
pub type Region = point_process::Region<f64>;
pub type PointCloud = point_process::PointCloud<f64>;
pub type LisResult = ulam::LisResult<f64>;
pub type ReinforcedConfiguration = ulam::ReinforcedConfiguration<f64>;
pub type LatticeWeights = lattice::LatticeWeights<f64>;
pub type PassageTable = lattice::PassageTable<f64>;
pub type TasepState = tasep::TasepState<f64>;
pub type CurrentEstimate = tasep::CurrentEstimate<f64>;
pub type SampleSeries = stats::SampleSeries<f64>;
pub type ScalingEstimate = stats::ScalingEstimate<f64>;
