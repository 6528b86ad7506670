//! Event batches rendered as spatio-temporal voxel grids, the tensor input of
//! learned event-to-video reconstructors.

use crate::error::{Error, Result};
use crate::event::{Event, EventStream};

pub const DEFAULT_BINS: usize = 5;

/// `bins x height x width` grid of polarity mass.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub bins: usize,
    pub width: usize,
    pub height: usize,
    pub t_start: u64,
    /// Equal to `t_start` only for a batch of simultaneous events.
    pub t_end: u64,
    pub values: Vec<f32>,
}

impl VoxelGrid {
    pub fn get(&self, bin: usize, x: usize, y: usize) -> f32 {
        self.values[(bin * self.height + y) * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v)).sum()
    }
}

/// Temporal bin weights of one event: up to two `(bin, weight)` pairs.
///
/// With normalized time `t* = (t - t_start) / (t_end - t_start) * (bins - 1)`
/// the event feeds bins `floor(t*)` and `floor(t*) + 1` with weights
/// `1 - |b - t*|`. A zero-length batch puts everything in the last bin.
pub fn temporal_weights(t: u64, t_start: u64, t_end: u64, bins: usize) -> [(usize, f64); 2] {
    if t_end == t_start {
        return [(bins - 1, 1.0), (bins - 1, 0.0)];
    }
    let tn = (t - t_start) as f64 / (t_end - t_start) as f64 * (bins - 1) as f64;
    let lo = (tn.floor() as usize).min(bins - 1);
    let w_lo = 1.0 - (tn - lo as f64);
    let hi = (lo + 1).min(bins - 1);
    if hi == lo {
        [(lo, w_lo), (lo, 0.0)]
    } else {
        [(lo, w_lo), (hi, 1.0 - w_lo)]
    }
}

/// Deposit a time-ordered batch into a `bins`-deep voxel grid.
pub fn voxelize(batch: &[Event], bins: usize, width: usize, height: usize) -> Result<VoxelGrid> {
    if bins == 0 {
        return Err(Error::invalid("voxel grids need at least one bin"));
    }
    let (first, last) = match (batch.first(), batch.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::invalid("cannot voxelize an empty batch")),
    };
    let (t_start, t_end) = (first.t, last.t);
    let mut values = vec![0.0f64; bins * width * height];
    for (i, e) in batch.iter().enumerate() {
        if e.x as usize >= width || e.y as usize >= height {
            return Err(Error::invalid(format!(
                "event {i} at ({}, {}) outside {width}x{height} grid",
                e.x, e.y
            )));
        }
        if e.t < t_start || e.t > t_end {
            return Err(Error::invalid(format!("event {i} is out of time order")));
        }
        let sign = e.polarity.as_f64();
        for (b, w) in temporal_weights(e.t, t_start, t_end, bins) {
            if w > 0.0 {
                values[(b * height + e.y as usize) * width + e.x as usize] += sign * w;
            }
        }
    }
    Ok(VoxelGrid {
        bins,
        width,
        height,
        t_start,
        t_end,
        values: values.into_iter().map(|v| v as f32).collect(),
    })
}

/// Consecutive non-overlapping batches of exactly `batch_size` events, plus
/// the incomplete tail.
pub fn batch_events(events: &[Event], batch_size: usize) -> Result<(Vec<&[Event]>, &[Event])> {
    if batch_size == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let chunks = events.chunks_exact(batch_size);
    let tail = chunks.remainder();
    Ok((chunks.collect(), tail))
}

/// Voxelize every full batch of a stream.
pub fn voxelize_stream(
    stream: &EventStream,
    batch_size: usize,
    bins: usize,
) -> Result<Vec<VoxelGrid>> {
    let (batches, _) = batch_events(stream.events(), batch_size)?;
    batches
        .into_iter()
        .map(|b| voxelize(b, bins, stream.width() as usize, stream.height() as usize))
        .collect()
}
