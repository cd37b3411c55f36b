//! Outage probability and goodput for multiuser MISO downlink beamforming
//! with Gaussian channel-estimation error.

pub mod beamform;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod goodput;
pub mod indefinite;
pub mod quadform;
pub mod special;

pub use error::{Error, Result};
