//! Compiles per-sketch UI component detections into App Inventor project
//! archives (`.aia`), and evaluates detections against ground truth.
//!
//! Pipeline: [`detection`] ingestion, [`dedup`] overlap elimination,
//! [`layout`] arrangement inference, [`codegen`] emission and packaging.
//! [`metrics`] and [`preview`] work on the same detection model.

pub mod codegen;
pub mod dedup;
pub mod detection;
pub mod error;
pub mod layout;
pub mod metrics;
pub mod pipeline;
pub mod preview;

pub use error::{Error, Result};
