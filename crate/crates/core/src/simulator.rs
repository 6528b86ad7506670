//! Color event simulation from RGB frame sequences.
//!
//! Every frame is first sampled through the Bayer filter, giving one mosaic
//! intensity per pixel. Each pixel then runs an independent contrast-threshold
//! generator: log intensity is interpolated linearly between consecutive
//! frames and an event is emitted whenever it moves a full threshold away
//! from the pixel's reference level.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{BayerPattern, Event, EventStream, Frame, Polarity};

/// Crossing times closer than this to an integer microsecond snap up to it.
const SNAP_US: f64 = 1e-6;

/// Lower bound for per-pixel thresholds drawn with jitter.
const MIN_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Positive contrast threshold in log-intensity units.
    pub c_pos: f64,
    /// Negative contrast threshold in log-intensity units, stored positive.
    pub c_neg: f64,
    /// Minimum spacing of emitted events at one pixel.
    pub refractory_us: u64,
    pub log_eps: f64,
    /// Standard deviation of per-pixel threshold jitter. Zero disables it.
    pub threshold_sigma: f64,
    /// Seed for the threshold jitter.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            c_pos: 0.15,
            c_neg: 0.15,
            refractory_us: 0,
            log_eps: 1e-3,
            threshold_sigma: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("c_pos", self.c_pos)?;
        positive("c_neg", self.c_neg)?;
        positive("log_eps", self.log_eps)?;
        if !(self.threshold_sigma.is_finite() && self.threshold_sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "threshold_sigma must be non-negative, got {}",
                self.threshold_sigma
            )));
        }
        Ok(())
    }

    pub fn safe_log(&self, v: f64) -> Result<f64> {
        safe_log(v, self.log_eps)
    }
}

/// `ln(v + log_eps)` for a linear intensity `v >= 0`.
pub fn safe_log(v: f64, log_eps: f64) -> Result<f64> {
    if v < 0.0 || v.is_nan() {
        return Err(Error::invalid(format!(
            "intensity must be non-negative, got {v}"
        )));
    }
    Ok((v + log_eps).ln())
}

/// Memory of one simulated pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSimState {
    /// Log intensity at the last crossing, or at initialization.
    pub ref_log: f64,
    /// Time of the last emitted (not suppressed) event.
    pub last_event_t: Option<u64>,
    pub last_log: f64,
    pub last_t: u64,
}

impl PixelSimState {
    pub fn new(log: f64, t: u64) -> Self {
        PixelSimState {
            ref_log: log,
            last_event_t: None,
            last_log: log,
            last_t: t,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Thresholds {
    pos: f64,
    neg: f64,
}

/// Advance one pixel to `(new_t, new_log)`, emitting every threshold crossing
/// of the linearly interpolated log intensity.
///
/// Crossings inside the refractory period still move the reference level but
/// produce no event.
pub fn simulate_pixel_interval(
    state: PixelSimState,
    new_log: f64,
    new_t: u64,
    cfg: &SimConfig,
    x: u16,
    y: u16,
) -> Result<(Vec<Event>, PixelSimState)> {
    cfg.validate()?;
    if new_t <= state.last_t {
        return Err(Error::TimeReversal {
            last: state.last_t,
            now: new_t,
        });
    }
    let mut state = state;
    let mut out = Vec::new();
    let th = Thresholds {
        pos: cfg.c_pos,
        neg: cfg.c_neg,
    };
    advance(&mut state, new_log, new_t, th, cfg.refractory_us, |t, p| {
        out.push(Event::new(t, x, y, p))
    });
    Ok((out, state))
}

fn advance(
    state: &mut PixelSimState,
    new_log: f64,
    new_t: u64,
    th: Thresholds,
    refractory_us: u64,
    mut emit: impl FnMut(u64, Polarity),
) {
    let dlog = new_log - state.last_log;
    let dt = (new_t - state.last_t) as f64;
    let (step, polarity) = if dlog > 0.0 {
        (th.pos, Polarity::On)
    } else {
        (-th.neg, Polarity::Off)
    };
    if dlog != 0.0 {
        let ref0 = state.ref_log;
        let mut k = 1.0;
        loop {
            let level = ref0 + k * step;
            let crossed = if dlog > 0.0 {
                level <= new_log
            } else {
                level >= new_log
            };
            if !crossed {
                break;
            }
            let offset = ((level - state.last_log) * dt / dlog + SNAP_US)
                .floor()
                .clamp(0.0, dt);
            let t = state.last_t + offset as u64;
            state.ref_log = level;
            let suppressed = matches!(state.last_event_t, Some(last) if t - last < refractory_us);
            if !suppressed {
                emit(t, polarity);
                state.last_event_t = Some(t);
            }
            k += 1.0;
        }
    }
    state.last_log = new_log;
    state.last_t = new_t;
}

/// Sample an RGB frame through the Bayer filter.
pub fn mosaic(frame: &Frame, pattern: BayerPattern) -> Result<Frame> {
    if frame.channels() != 3 {
        return Err(Error::invalid(format!(
            "mosaic needs an RGB frame, got {} channel(s)",
            frame.channels()
        )));
    }
    Ok(Frame::from_fn(
        frame.width(),
        frame.height(),
        frame.t,
        |x, y| frame.get(x, y, pattern.channel_of(x, y).rgb_index()),
    ))
}

fn check_sequence(frames: &[Frame]) -> Result<()> {
    if frames.len() < 2 {
        return Err(Error::invalid(format!(
            "simulation needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    let first = &frames[0];
    if first.width() > u16::MAX as usize || first.height() > u16::MAX as usize {
        return Err(Error::invalid("sensor larger than 65535 pixels per side"));
    }
    for (i, f) in frames.iter().enumerate() {
        if f.channels() != 3 {
            return Err(Error::invalid(format!("frame {i} is not RGB")));
        }
        if f.width() != first.width() || f.height() != first.height() {
            return Err(Error::SizeMismatch(format!(
                "frame {i} is {}x{}, frame 0 is {}x{}",
                f.width(),
                f.height(),
                first.width(),
                first.height()
            )));
        }
        f.check_intensity()?;
        if i > 0 && f.t <= frames[i - 1].t {
            return Err(Error::invalid(format!(
                "frame timestamps must increase strictly: frame {i} at {} us after {} us",
                f.t,
                frames[i - 1].t
            )));
        }
    }
    Ok(())
}

fn pixel_thresholds(cfg: &SimConfig, n: usize) -> Vec<Thresholds> {
    let base = Thresholds {
        pos: cfg.c_pos,
        neg: cfg.c_neg,
    };
    if cfg.threshold_sigma == 0.0 {
        return vec![base; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let jitter = Normal::new(0.0, cfg.threshold_sigma).expect("sigma validated");
    (0..n)
        .map(|_| Thresholds {
            pos: (base.pos + jitter.sample(&mut rng)).max(MIN_THRESHOLD),
            neg: (base.neg + jitter.sample(&mut rng)).max(MIN_THRESHOLD),
        })
        .collect()
}

/// Simulate a color event stream from an RGB frame sequence.
///
/// Frame 0 initializes every pixel and produces no events. Rows are simulated
/// in parallel and merged into the canonical `(t, y, x, polarity)` order, so
/// the output does not depend on the worker count.
pub fn simulate(frames: &[Frame], pattern: BayerPattern, cfg: &SimConfig) -> Result<EventStream> {
    cfg.validate()?;
    check_sequence(frames)?;
    let (width, height) = (frames[0].width(), frames[0].height());

    let logs: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            let m = mosaic(f, pattern)?;
            m.pixels()
                .iter()
                .map(|&v| cfg.safe_log(v))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let times: Vec<u64> = frames.iter().map(|f| f.t).collect();
    let thresholds = pixel_thresholds(cfg, width * height);

    let rows: Vec<Vec<Event>> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut row = Vec::new();
            for x in 0..width {
                let i = y * width + x;
                let mut state = PixelSimState::new(logs[0][i], times[0]);
                for (log, &t) in logs.iter().zip(&times).skip(1) {
                    advance(
                        &mut state,
                        log[i],
                        t,
                        thresholds[i],
                        cfg.refractory_us,
                        |t, p| row.push(Event::new(t, x as u16, y as u16, p)),
                    );
                }
            }
            row
        })
        .collect();

    let mut events: Vec<Event> = rows.into_iter().flatten().collect();
    events.sort_unstable();
    EventStream::new(width as u16, height as u16, pattern, events)
}
