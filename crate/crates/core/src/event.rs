//! Value types shared by every stage: events, frames and the Bayer geometry.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sign of a brightness change. `Off` sorts before `On`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Off,
    On,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Off => -1,
            Polarity::On => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.sign())
    }

    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Polarity::On),
            -1 => Some(Polarity::Off),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Off => Polarity::On,
            Polarity::On => Polarity::Off,
        }
    }
}

/// One brightness-change record.
///
/// The derived ordering compares `(t, y, x, polarity)` in that order, which
/// is the total order every stream in this crate is kept in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    /// Microseconds since the stream origin.
    pub t: u64,
    pub y: u16,
    pub x: u16,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(t: u64, x: u16, y: u16, polarity: Polarity) -> Self {
        Event { t, y, x, polarity }
    }
}

/// Color filter site within a 2x2 Bayer tile.
///
/// `G1` is the green site sharing a row with red, `G2` the one sharing a row
/// with blue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColorChannel {
    R,
    G1,
    G2,
    B,
}

impl ColorChannel {
    pub const ALL: [ColorChannel; 4] = [
        ColorChannel::R,
        ColorChannel::G1,
        ColorChannel::G2,
        ColorChannel::B,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Index of the RGB component this site samples.
    pub fn rgb_index(self) -> usize {
        match self {
            ColorChannel::R => 0,
            ColorChannel::G1 | ColorChannel::G2 => 1,
            ColorChannel::B => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorChannel::R => "R",
            ColorChannel::G1 => "G1",
            ColorChannel::G2 => "G2",
            ColorChannel::B => "B",
        }
    }
}

impl fmt::Display for ColorChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An RGBG 2x2 color filter array.
///
/// The canonical tile has `R G1` on row 0 and `G2 B` on row 1. Other sensor
/// phases are the canonical tile shifted by one column and/or one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BayerPattern {
    dx: u8,
    dy: u8,
}

impl Default for BayerPattern {
    fn default() -> Self {
        BayerPattern::RGGB
    }
}

impl BayerPattern {
    pub const RGGB: BayerPattern = BayerPattern { dx: 0, dy: 0 };
    pub const GRBG: BayerPattern = BayerPattern { dx: 1, dy: 0 };
    pub const GBRG: BayerPattern = BayerPattern { dx: 0, dy: 1 };
    pub const BGGR: BayerPattern = BayerPattern { dx: 1, dy: 1 };

    const CANONICAL: [[ColorChannel; 2]; 2] = [
        [ColorChannel::R, ColorChannel::G1],
        [ColorChannel::G2, ColorChannel::B],
    ];

    /// Canonical tile shifted so that pixel `(0, 0)` reads canonical
    /// position `(dx mod 2, dy mod 2)`.
    pub fn with_phase(dx: u32, dy: u32) -> Self {
        BayerPattern {
            dx: (dx % 2) as u8,
            dy: (dy % 2) as u8,
        }
    }

    /// Phase code `dx + 2 * dy` used by the binary event format.
    pub fn phase_code(self) -> u8 {
        self.dx + 2 * self.dy
    }

    pub fn from_phase_code(code: u8) -> Option<Self> {
        (code < 4).then(|| BayerPattern::with_phase(u32::from(code % 2), u32::from(code / 2)))
    }

    pub fn channel_of(&self, x: usize, y: usize) -> ColorChannel {
        let cx = (x + self.dx as usize) % 2;
        let cy = (y + self.dy as usize) % 2;
        Self::CANONICAL[cy][cx]
    }

    /// The 2x2 tile as `[row][column]`.
    pub fn tile(&self) -> [[ColorChannel; 2]; 2] {
        [
            [self.channel_of(0, 0), self.channel_of(1, 0)],
            [self.channel_of(0, 1), self.channel_of(1, 1)],
        ]
    }

    /// Position `(column, row)` of `channel` inside the tile at the origin.
    pub fn site_offset(&self, channel: ColorChannel) -> (usize, usize) {
        for sy in 0..2 {
            for sx in 0..2 {
                if self.channel_of(sx, sy) == channel {
                    return (sx, sy);
                }
            }
        }
        unreachable!("every channel occurs once in the tile")
    }

    /// Split a full-resolution address into its channel and quarter-resolution
    /// coordinates.
    pub fn to_quarter(&self, x: usize, y: usize) -> (ColorChannel, usize, usize) {
        (self.channel_of(x, y), x / 2, y / 2)
    }

    pub fn name(&self) -> &'static str {
        match (self.dx, self.dy) {
            (0, 0) => "rggb",
            (1, 0) => "grbg",
            (0, 1) => "gbrg",
            _ => "bggr",
        }
    }
}

impl fmt::Display for BayerPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BayerPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rggb" | "0" => Ok(BayerPattern::RGGB),
            "grbg" | "1" => Ok(BayerPattern::GRBG),
            "gbrg" | "2" => Ok(BayerPattern::GBRG),
            "bggr" | "3" => Ok(BayerPattern::BGGR),
            other => Err(Error::invalid(format!(
                "unknown bayer phase `{other}` (expected rggb, grbg, gbrg or bggr)"
            ))),
        }
    }
}

/// Channel and quarter-resolution coordinates of `(x, y)` under the canonical
/// pattern.
pub fn to_quarter(x: usize, y: usize) -> (ColorChannel, usize, usize) {
    BayerPattern::default().to_quarter(x, y)
}

/// A timestamped row-major image with interleaved channels.
///
/// Input frames hold linear intensities in `[0, 1]`; reconstructions reuse
/// the type for log-intensity estimates, which may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    /// Microseconds.
    pub t: u64,
    pixels: Vec<f64>,
}

impl Frame {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        t: u64,
        pixels: Vec<f64>,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "frames have 1 or 3 channels, got {channels}"
            )));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::SizeMismatch(format!(
                "{}x{}x{} frame needs {} values, got {}",
                width,
                height,
                channels,
                width * height * channels,
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite pixel value at index {i}"
            )));
        }
        Ok(Frame {
            width,
            height,
            channels,
            t,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize, t: u64) -> Self {
        assert!(channels == 1 || channels == 3);
        Frame {
            width,
            height,
            channels,
            t,
            pixels: vec![0.0; width * height * channels],
        }
    }

    pub fn filled(width: usize, height: usize, channels: usize, t: u64, value: f64) -> Self {
        let mut f = Frame::zeros(width, height, channels, t);
        f.pixels.fill(value);
        f
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        t: u64,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Frame {
            width,
            height,
            channels: 1,
            t,
            pixels,
        }
    }

    pub fn from_rgb_fn(
        width: usize,
        height: usize,
        t: u64,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Frame {
            width,
            height,
            channels: 3,
            t,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.pixels[(y * self.width + x) * self.channels + c] = v;
    }

    /// Single-channel copy of channel `c`.
    pub fn plane(&self, c: usize) -> Frame {
        assert!(c < self.channels);
        let pixels = self
            .pixels
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect();
        Frame {
            width: self.width,
            height: self.height,
            channels: 1,
            t: self.t,
            pixels,
        }
    }

    /// Interleave three single-channel planes into an RGB frame.
    pub fn from_planes(r: &Frame, g: &Frame, b: &Frame) -> Result<Frame> {
        for p in [r, g, b] {
            if p.channels != 1 || p.width != r.width || p.height != r.height {
                return Err(Error::SizeMismatch(format!(
                    "planes must be equal-size single-channel frames ({}x{} vs {}x{}x{})",
                    r.width, r.height, p.width, p.height, p.channels
                )));
            }
        }
        let mut pixels = Vec::with_capacity(r.pixels.len() * 3);
        for i in 0..r.pixels.len() {
            pixels.extend_from_slice(&[r.pixels[i], g.pixels[i], b.pixels[i]]);
        }
        Ok(Frame {
            width: r.width,
            height: r.height,
            channels: 3,
            t: r.t,
            pixels,
        })
    }

    /// Check that all values are linear intensities (finite and non-negative).
    pub fn check_intensity(&self) -> Result<()> {
        match self.pixels.iter().position(|v| *v < 0.0) {
            Some(i) => Err(Error::invalid(format!(
                "negative intensity {} at index {i} of frame t={}",
                self.pixels[i], self.t
            ))),
            None => Ok(()),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// A sensor-sized, totally ordered sequence of events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    width: u16,
    height: u16,
    pattern: BayerPattern,
    events: Vec<Event>,
}

impl EventStream {
    /// Build a stream, rejecting out-of-bounds or out-of-order events.
    pub fn new(width: u16, height: u16, pattern: BayerPattern, events: Vec<Event>) -> Result<Self> {
        let stream = EventStream {
            width,
            height,
            pattern,
            events,
        };
        stream.check_bounds()?;
        if let Some(i) = stream.events.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::invalid(format!(
                "events out of order at index {}: {:?} after {:?}",
                i + 1,
                stream.events[i + 1],
                stream.events[i]
            )));
        }
        Ok(stream)
    }

    /// Build a stream from events in any order.
    pub fn from_unsorted(
        width: u16,
        height: u16,
        pattern: BayerPattern,
        mut events: Vec<Event>,
    ) -> Result<Self> {
        events.sort_unstable();
        EventStream::new(width, height, pattern, events)
    }

    pub fn empty(width: u16, height: u16, pattern: BayerPattern) -> Self {
        EventStream {
            width,
            height,
            pattern,
            events: Vec::new(),
        }
    }

    fn check_bounds(&self) -> Result<()> {
        match self
            .events
            .iter()
            .position(|e| e.x >= self.width || e.y >= self.height)
        {
            Some(i) => Err(Error::invalid(format!(
                "event {i} at ({}, {}) outside {}x{} sensor",
                self.events[i].x, self.events[i].y, self.width, self.height
            ))),
            None => Ok(()),
        }
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pattern(&self) -> BayerPattern {
        self.pattern
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `(first, last)` timestamps, or `None` for an empty stream.
    pub fn time_span(&self) -> Option<(u64, u64)> {
        Some((self.events.first()?.t, self.events.last()?.t))
    }

    pub fn channel_of(&self, e: &Event) -> ColorChannel {
        self.pattern.channel_of(e.x as usize, e.y as usize)
    }

    /// Same stream with every polarity negated.
    pub fn flipped(&self) -> EventStream {
        let events = self
            .events
            .iter()
            .map(|e| Event {
                polarity: e.polarity.flipped(),
                ..*e
            })
            .collect();
        EventStream::from_unsorted(self.width, self.height, self.pattern, events)
            .expect("flipping polarity keeps events in bounds")
    }
}
