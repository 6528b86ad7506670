//! Binary portable pixmaps (P5 gray, P6 RGB) and frame sequences.
//!
//! A sequence is a set of images plus a timestamps file with one integer
//! microsecond value per line. Sample values are scaled by `1 / maxval` on
//! read; writes are 8-bit.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::event::Frame;

pub const TIMESTAMPS_FILE: &str = "timestamps.txt";

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    let bad = |msg: &str| Error::Format {
        path: path.into(),
        msg: msg.to_string(),
    };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(bad("not a portable pixmap"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header value out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("malformed header"));
    }
    let maxval = fields[2];
    if maxval == 0 || maxval > 65535 {
        return Err(bad(&format!("unsupported depth: maxval {maxval}")));
    }
    Ok(Header {
        magic,
        width: fields[0] as usize,
        height: fields[1] as usize,
        maxval: maxval as u32,
        data_start: pos + 1,
    })
}

/// Decode a P5 or P6 image.
pub fn decode_pnm(bytes: &[u8], path: &Path, t: u64) -> Result<Frame> {
    let h = parse_header(bytes, path)?;
    let channels = match &h.magic {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(Error::Format {
                path: path.into(),
                msg: format!("unsupported pixmap type {}", String::from_utf8_lossy(other)),
            })
        }
    };
    let n = h.width * h.height * channels;
    let wide = h.maxval > 255;
    let need = n * if wide { 2 } else { 1 };
    let data = &bytes[h.data_start.min(bytes.len())..];
    if data.len() < need {
        return Err(Error::Format {
            path: path.into(),
            msg: format!("truncated pixel data: {} of {need} bytes", data.len()),
        });
    }
    let scale = 1.0 / f64::from(h.maxval);
    let pixels: Vec<f64> = if wide {
        data[..need]
            .chunks_exact(2)
            .map(|b| f64::from(u16::from_be_bytes([b[0], b[1]]).min(h.maxval as u16)) * scale)
            .collect()
    } else {
        data[..need]
            .iter()
            .map(|&b| f64::from(u32::from(b).min(h.maxval)) * scale)
            .collect()
    };
    Frame::new(h.width, h.height, channels, t, pixels)
}

/// 8-bit quantization of a `[0, 1]` value.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Encode as 8-bit P5 (1 channel) or P6 (3 channels).
pub fn encode_pnm(frame: &Frame) -> Vec<u8> {
    let magic = if frame.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend(frame.pixels().iter().map(|&v| quantize(v)));
    out
}

pub fn read_pnm(path: &Path, t: u64) -> Result<Frame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes, path, t)
}

pub fn write_pnm(frame: &Frame, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pnm(frame)).map_err(|e| Error::io(path, e))
}

pub fn read_timestamps(path: &Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out: Vec<u64> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let t: u64 = s.parse().map_err(|_| Error::Parse {
            path: path.into(),
            line: i + 1,
            msg: format!("expected integer microseconds, got `{s}`"),
        })?;
        if let Some(&prev) = out.last() {
            if t <= prev {
                return Err(Error::Parse {
                    path: path.into(),
                    line: i + 1,
                    msg: format!("timestamps must increase: {t} after {prev}"),
                });
            }
        }
        out.push(t);
    }
    Ok(out)
}

fn is_pixmap(p: &Path) -> bool {
    matches!(
        p.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("ppm" | "pgm" | "pnm")
    )
}

/// Image paths of a sequence: the pixmaps of a directory in name order, or
/// the lines of a list file (relative entries resolve against its directory).
pub fn list_images(source: &Path) -> Result<Vec<PathBuf>> {
    if source.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(source)
            .map_err(|e| Error::io(source, e))?
            .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(source, e)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.is_file() && is_pixmap(p))
            .collect();
        paths.sort();
        Ok(paths)
    } else {
        let text = std::fs::read_to_string(source).map_err(|e| Error::io(source, e))?;
        let base = source.parent().unwrap_or(Path::new("."));
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect())
    }
}

pub fn read_frames(source: &Path, timestamps: &Path) -> Result<Vec<Frame>> {
    let paths = list_images(source)?;
    let ts = read_timestamps(timestamps)?;
    if paths.len() != ts.len() {
        return Err(Error::invalid(format!(
            "{} image(s) in {} but {} timestamp(s) in {}",
            paths.len(),
            source.display(),
            ts.len(),
            timestamps.display()
        )));
    }
    paths.iter().zip(ts).map(|(p, t)| read_pnm(p, t)).collect()
}

/// Write `frame_NNNNN.ppm|pgm` files and a timestamps file into `dir`.
/// Returns the paths written.
pub fn write_frames(dir: &Path, frames: &[Frame]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(frames.len() + 1);
    let mut stamps = String::new();
    for (i, f) in frames.iter().enumerate() {
        let ext = if f.channels() == 1 { "pgm" } else { "ppm" };
        let path = dir.join(format!("frame_{i:05}.{ext}"));
        write_pnm(f, &path)?;
        written.push(path);
        stamps.push_str(&format!("{}\n", f.t));
    }
    let ts_path = dir.join(TIMESTAMPS_FILE);
    std::fs::write(&ts_path, stamps).map_err(|e| Error::io(&ts_path, e))?;
    written.push(ts_path);
    Ok(written)
}
