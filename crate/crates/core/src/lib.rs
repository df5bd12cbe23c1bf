//! Location-aware beamforming for a uniform linear array mounted on a
//! high-speed train.
//!
//! The crate covers the directivity/beamwidth tradeoff of the array, the
//! probability that a location-selected beam still covers the base station
//! under Gaussian positioning error, the search for the largest beam count
//! that keeps that probability above a threshold, the offline phase codebook,
//! and a rail traversal simulator that selects beams from position fixes.

pub mod array_model;
pub mod beam_optimizer;
pub mod cli;
pub mod codebook;
pub mod error;
pub mod error_model;
pub mod rail_geometry;
pub mod report;
pub mod traversal;

pub use array_model::{ArrayConfig, ArrayType, BeamGrid};
pub use beam_optimizer::{search_beam_count, OptimizerResult};
pub use codebook::PhaseMapper;
pub use error::{Error, Result};
pub use error_model::PositioningErrorModel;
pub use rail_geometry::{BeamWindow, DeploymentGeometry};
pub use traversal::{TraversalConfig, TraversalEvent};
