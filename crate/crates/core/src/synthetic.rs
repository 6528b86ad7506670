//! Synthetic RGB scenes for demos and end-to-end checks.

use crate::event::Frame;

/// A diagonal colored sinusoid drifting along +x.
///
/// Each RGB component is `0.5 + amplitude * sin(2 pi (x + y / 2 - v t) / period + phase_c)`
/// with the three phases a third of a turn apart.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftingGradient {
    pub width: usize,
    pub height: usize,
    /// Spatial period in pixels.
    pub period: f64,
    /// Drift speed in pixels per second.
    pub speed: f64,
    pub amplitude: f64,
}

impl DriftingGradient {
    pub fn new(width: usize, height: usize) -> Self {
        DriftingGradient {
            width,
            height,
            period: width as f64,
            speed: width as f64 / 2.0,
            amplitude: 0.4,
        }
    }

    pub fn intensity(&self, x: usize, y: usize, t_us: u64) -> [f64; 3] {
        let t = t_us as f64 * 1e-6;
        let arg =
            2.0 * std::f64::consts::PI * (x as f64 + 0.5 * y as f64 - self.speed * t) / self.period;
        let third = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| 0.5 + self.amplitude * (arg + k * third).sin())
    }

    pub fn frame(&self, t_us: u64) -> Frame {
        Frame::from_rgb_fn(self.width, self.height, t_us, |x, y| {
            self.intensity(x, y, t_us)
        })
    }

    /// `count` frames evenly spaced over `[0, duration_us]`.
    pub fn frames(&self, count: usize, duration_us: u64) -> Vec<Frame> {
        assert!(count >= 2, "a sequence needs at least two frames");
        (0..count)
            .map(|k| self.frame(duration_us * k as u64 / (count as u64 - 1)))
            .collect()
    }
}
