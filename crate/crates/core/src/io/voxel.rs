//! Voxel-grid tensor files.
//!
//! ```text
//! header  36 bytes  magic "CEVTVOX\0" | bins u32 | height u32 | width u32 | t_start u64 | t_end u64
//! body              bins * height * width f32, bin-major then row-major
//! ```
//! All fields little-endian.

use std::path::Path;

use crate::error::{Error, Result};
use crate::representation::VoxelGrid;

pub const VOXEL_MAGIC: &[u8; 8] = b"CEVTVOX\0";
pub const VOXEL_HEADER_LEN: usize = 36;

pub fn encode_voxel_grid(grid: &VoxelGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(VOXEL_HEADER_LEN + 4 * grid.values.len());
    out.extend_from_slice(VOXEL_MAGIC);
    for v in [grid.bins, grid.height, grid.width] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.t_start.to_le_bytes());
    out.extend_from_slice(&grid.t_end.to_le_bytes());
    for v in &grid.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_voxel_grid(bytes: &[u8], path: &Path) -> Result<VoxelGrid> {
    let bad = |msg: String| Error::Format {
        path: path.into(),
        msg,
    };
    if bytes.len() < VOXEL_HEADER_LEN || &bytes[..8] != VOXEL_MAGIC {
        return Err(bad("not a voxel grid file".into()));
    }
    let u32_at =
        |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let (bins, height, width) = (u32_at(8), u32_at(12), u32_at(16));
    let (t_start, t_end) = (u64_at(20), u64_at(28));
    let body = &bytes[VOXEL_HEADER_LEN..];
    let n = bins * height * width;
    if body.len() != 4 * n {
        return Err(bad(format!(
            "expected {} data bytes, found {}",
            4 * n,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok(VoxelGrid {
        bins,
        width,
        height,
        t_start,
        t_end,
        values,
    })
}

pub fn write_voxel_grid(grid: &VoxelGrid, path: &Path) -> Result<()> {
    std::fs::write(path, encode_voxel_grid(grid)).map_err(|e| Error::io(path, e))
}

pub fn read_voxel_grid(path: &Path) -> Result<VoxelGrid> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_voxel_grid(&bytes, path)
}
