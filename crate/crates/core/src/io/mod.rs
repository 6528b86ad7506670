//! File formats: event streams, pixmap frame sequences and voxel tensors.

pub mod events;
pub mod frames;
pub mod voxel;

pub use events::{detect_format, read_events, write_events, EventFormat, ReadOptions};
pub use frames::{read_frames, read_pnm, write_frames, write_pnm};
pub use voxel::{read_voxel_grid, write_voxel_grid};
