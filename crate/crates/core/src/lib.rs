//! Salient object detection by fusing seven saliency maps into a binary
//! segmentation, plus the mask-driven manipulations and the bounding-box
//! evaluation harness built on it.

pub mod config;
pub mod error;
pub mod evaluation;
pub mod imgcore;
pub mod manipulate;
pub mod saliency;
pub mod segmentation;

pub use config::RunConfig;
pub use error::{Error, Result};
