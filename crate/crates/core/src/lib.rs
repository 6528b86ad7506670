//! Color event-camera simulation and reconstruction.
//!
//! The crate covers both directions of the color event pipeline:
//!
//! * [`simulator`] turns a sequence of linear RGB frames into a color event
//!   stream by sampling each frame through an RGBG Bayer filter and running a
//!   per-pixel contrast-threshold event generator on the mosaic.
//! * [`filters`], [`colorpipe`] and [`representation`] turn event streams back
//!   into images: an asynchronous per-pixel high-pass filter, a windowed
//!   integration baseline, bilinear demosaicing, a quarter-resolution channel
//!   pipeline and voxel-grid tensors for learned reconstructors.
//!
//! [`io`] holds the on-disk formats and [`cli`] the `cevt` command-line tool.

pub mod cli;
pub mod colorpipe;
pub mod config;
pub mod error;
pub mod event;
pub mod filters;
pub mod io;
pub mod parallel;
pub mod representation;
pub mod simulator;
pub mod synthetic;

pub use error::{Error, Result};
pub use event::{BayerPattern, ColorChannel, Event, EventStream, Frame, Polarity};
