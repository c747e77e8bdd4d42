//! Simultaneous static/moving segmentation and ego-motion estimation from
//! raw automotive radar point clouds.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod ego;
pub mod error;
pub mod eval;
pub mod io;
pub mod instance;
pub mod labels;
pub mod lap;
pub mod metrics;
pub mod network;
pub mod point;
pub mod sim;
pub mod svg;
pub mod trajectory;

pub use error::{Error, Result, SolverError};
pub use point::{
    EgoMotionState, FrameWindow, GroundTruthLabels, PointClass, PointWeights, RadarExtrinsics, RadarFrame,
    RadarMotion, RadarPoint,
};
