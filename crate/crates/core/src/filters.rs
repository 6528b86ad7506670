//! Per-pixel continuous-time reconstruction and the bilateral post-filter.
//!
//! The high-pass filter keeps one log-intensity estimate per pixel. Every
//! event adds `±contrast_step`; between events the estimate decays toward
//! zero at rate `cutoff + cutoff_per_event * rate`, where `rate` is a moving
//! average of the pixel's own event rate. Pixels never interact, so the
//! output keeps the Bayer mosaic intact.
//!
//! The integration baseline sums `±contrast_step` over fixed-size event
//! windows into a persistent image, optionally fading it between windows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{Event, EventStream, Frame};

/// Time constant of the per-pixel event-rate average, in seconds.
pub const RATE_TAU_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HfParams {
    /// Base cutoff gain (1/s).
    pub cutoff: f64,
    /// Cutoff gain per unit of event rate (1/s per event/s).
    pub cutoff_per_event: f64,
    /// Log-intensity step per event.
    pub contrast_step: f64,
}

impl Default for HfParams {
    fn default() -> Self {
        HfParams {
            cutoff: 0.06,
            cutoff_per_event: 0.06,
            contrast_step: 0.15,
        }
    }
}

impl HfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff.is_finite() && self.cutoff >= 0.0) {
            return Err(Error::invalid(format!(
                "hf cutoff must be >= 0, got {}",
                self.cutoff
            )));
        }
        if !(self.cutoff_per_event.is_finite() && self.cutoff_per_event >= 0.0) {
            return Err(Error::invalid(format!(
                "hf cutoff_per_event must be >= 0, got {}",
                self.cutoff_per_event
            )));
        }
        if !(self.contrast_step.is_finite() && self.contrast_step > 0.0) {
            return Err(Error::invalid(format!(
                "hf contrast_step must be > 0, got {}",
                self.contrast_step
            )));
        }
        Ok(())
    }
}

/// High-pass filter state of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HighPassState {
    /// Log-intensity estimate at `last_t`.
    pub value: f64,
    /// Microseconds.
    pub last_t: u64,
    /// Moving-average event rate in events/s.
    pub rate: f64,
}

impl HighPassState {
    pub fn effective_cutoff(&self, p: &HfParams) -> f64 {
        p.cutoff + p.cutoff_per_event * self.rate
    }
}

fn seconds(from: u64, to: u64) -> f64 {
    (to - from) as f64 * 1e-6
}

/// Fold one event into a pixel's filter state.
pub fn hf_update(state: HighPassState, event: &Event, p: &HfParams) -> Result<HighPassState> {
    if event.t < state.last_t {
        return Err(Error::TimeReversal {
            last: state.last_t,
            now: event.t,
        });
    }
    Ok(update_unchecked(state, event.t, event.polarity.as_f64(), p))
}

#[inline]
fn update_unchecked(state: HighPassState, t: u64, sign: f64, p: &HfParams) -> HighPassState {
    let dt = seconds(state.last_t, t);
    let alpha = state.effective_cutoff(p);
    HighPassState {
        value: state.value * (-alpha * dt).exp() + sign * p.contrast_step,
        last_t: t,
        rate: state.rate * (-dt / RATE_TAU_S).exp() + 1.0 / RATE_TAU_S,
    }
}

/// Read a pixel's estimate at time `t` without changing its state.
pub fn hf_sample(state: &HighPassState, t: u64, p: &HfParams) -> Result<f64> {
    if t < state.last_t {
        return Err(Error::TimeReversal {
            last: state.last_t,
            now: t,
        });
    }
    Ok(sample_unchecked(state, t, p))
}

#[inline]
fn sample_unchecked(state: &HighPassState, t: u64, p: &HfParams) -> f64 {
    state.value * (-state.effective_cutoff(p) * seconds(state.last_t, t)).exp()
}

fn check_sorted(sample_ts: &[u64]) -> Result<()> {
    match sample_ts.windows(2).position(|w| w[0] > w[1]) {
        Some(i) => Err(Error::invalid(format!(
            "sample times must be ascending: {} after {}",
            sample_ts[i + 1],
            sample_ts[i]
        ))),
        None => Ok(()),
    }
}

/// Events of each pixel as `(t, sign)`, row-major by pixel.
struct PixelEvents {
    offsets: Vec<usize>,
    items: Vec<(u64, f64)>,
}

impl PixelEvents {
    fn new(events: &EventStream) -> Self {
        let width = events.width() as usize;
        let n = width * events.height() as usize;
        let mut offsets = vec![0usize; n + 1];
        for e in events.events() {
            offsets[e.y as usize * width + e.x as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut items = vec![(0u64, 0.0f64); events.len()];
        for e in events.events() {
            let i = e.y as usize * width + e.x as usize;
            items[cursor[i]] = (e.t, e.polarity.as_f64());
            cursor[i] += 1;
        }
        PixelEvents { offsets, items }
    }

    fn pixel(&self, i: usize) -> &[(u64, f64)] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Run a per-pixel fold over every pixel and collect one frame per sample
/// time. `run` receives a pixel's events and writes one value per sample.
fn per_pixel_frames(
    events: &EventStream,
    sample_ts: &[u64],
    run: impl Fn(&[(u64, f64)], &mut [f64]) + Sync,
) -> Vec<Frame> {
    let width = events.width() as usize;
    let height = events.height() as usize;
    let by_pixel = PixelEvents::new(events);
    let ns = sample_ts.len();

    let rows: Vec<Vec<f64>> = (0..height)
        .into_par_iter()
        .map(|y| {
            // Layout: [pixel][sample].
            let mut row = vec![0.0; width * ns];
            for x in 0..width {
                run(
                    by_pixel.pixel(y * width + x),
                    &mut row[x * ns..(x + 1) * ns],
                );
            }
            row
        })
        .collect();

    sample_ts
        .iter()
        .enumerate()
        .map(|(k, &t)| Frame::from_fn(width, height, t, |x, y| rows[y][x * ns + k]))
        .collect()
}

/// High-pass reconstruction of the raw mosaic at each sample time.
///
/// Every pixel starts at value 0 with rate 0. Events stamped exactly at a
/// sample time are included in that sample.
pub fn hf_reconstruct(events: &EventStream, sample_ts: &[u64], p: &HfParams) -> Result<Vec<Frame>> {
    p.validate()?;
    check_sorted(sample_ts)?;
    Ok(per_pixel_frames(events, sample_ts, |evs, out| {
        let mut state = HighPassState::default();
        let mut j = 0;
        for (slot, &s) in out.iter_mut().zip(sample_ts) {
            while j < evs.len() && evs[j].0 <= s {
                state = update_unchecked(state, evs[j].0, evs[j].1, p);
                j += 1;
            }
            *slot = if s >= state.last_t {
                sample_unchecked(&state, s, p)
            } else {
                state.value
            };
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationParams {
    /// Events per output frame.
    pub window_events: usize,
    /// Log-intensity step per event.
    pub contrast_step: f64,
    /// Factor applied to the accumulator before each window, in `[0, 1]`.
    pub decay: f64,
}

impl Default for IntegrationParams {
    fn default() -> Self {
        IntegrationParams {
            window_events: 1000,
            contrast_step: 0.15,
            decay: 1.0,
        }
    }
}

impl IntegrationParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_events == 0 {
            return Err(Error::invalid(
                "integration window must hold at least 1 event",
            ));
        }
        if !(self.contrast_step.is_finite() && self.contrast_step > 0.0) {
            return Err(Error::invalid(format!(
                "integration contrast_step must be > 0, got {}",
                self.contrast_step
            )));
        }
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::invalid(format!(
                "decay must lie in [0, 1], got {}",
                self.decay
            )));
        }
        Ok(())
    }
}

/// One frame per complete window of `window_events` events, stamped with the
/// window's last event. An incomplete tail window is not emitted.
pub fn integrate_windows(events: &EventStream, p: &IntegrationParams) -> Result<Vec<Frame>> {
    p.validate()?;
    let width = events.width() as usize;
    let height = events.height() as usize;
    let mut acc = vec![0.0; width * height];
    let mut frames = Vec::with_capacity(events.len() / p.window_events);
    for window in events.events().chunks_exact(p.window_events) {
        if p.decay != 1.0 {
            acc.iter_mut().for_each(|v| *v *= p.decay);
        }
        for e in window {
            acc[e.y as usize * width + e.x as usize] += e.polarity.as_f64() * p.contrast_step;
        }
        let t = window.last().expect("windows are non-empty").t;
        frames.push(Frame::new(width, height, 1, t, acc.clone())?);
    }
    Ok(frames)
}

/// Accumulator state at arbitrary sample times, including partially filled
/// windows. The decay factor is applied at each window boundary, as in
/// [`integrate_windows`].
pub fn integrate_at(
    events: &EventStream,
    sample_ts: &[u64],
    p: &IntegrationParams,
) -> Result<Vec<Frame>> {
    p.validate()?;
    check_sorted(sample_ts)?;
    let width = events.width() as usize;
    let mut acc = vec![0.0; width * events.height() as usize];
    let evs = events.events();
    let mut frames = Vec::with_capacity(sample_ts.len());
    let mut j = 0;
    for &s in sample_ts {
        while j < evs.len() && evs[j].t <= s {
            if j % p.window_events == 0 && p.decay != 1.0 {
                acc.iter_mut().for_each(|v| *v *= p.decay);
            }
            let e = &evs[j];
            acc[e.y as usize * width + e.x as usize] += e.polarity.as_f64() * p.contrast_step;
            j += 1;
        }
        frames.push(Frame::new(
            width,
            events.height() as usize,
            1,
            s,
            acc.clone(),
        )?);
    }
    Ok(frames)
}

/// An events-to-frames method usable by the color pipelines.
pub trait Reconstructor: Sync {
    fn reconstruct(&self, events: &EventStream, sample_ts: &[u64]) -> Result<Vec<Frame>>;
}

impl Reconstructor for HfParams {
    fn reconstruct(&self, events: &EventStream, sample_ts: &[u64]) -> Result<Vec<Frame>> {
        hf_reconstruct(events, sample_ts, self)
    }
}

impl Reconstructor for IntegrationParams {
    fn reconstruct(&self, events: &EventStream, sample_ts: &[u64]) -> Result<Vec<Frame>> {
        integrate_at(events, sample_ts, self)
    }
}

pub const BILATERAL_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct BilateralParams {
    pub sigma_spatial: f64,
    /// Range kernel width. `None` uses a quarter of each channel's value range.
    pub sigma_range: Option<f64>,
}

impl Default for BilateralParams {
    fn default() -> Self {
        BilateralParams {
            sigma_spatial: 1.0,
            sigma_range: None,
        }
    }
}

impl BilateralParams {
    /// Filter every channel of `img`, resolving the default range sigma per
    /// channel. Constant channels are returned unchanged.
    pub fn apply(&self, img: &Frame) -> Result<Frame> {
        let mut out = img.clone();
        for c in 0..img.channels() {
            let plane = img.plane(c);
            let sigma_range = match self.sigma_range {
                Some(s) => s,
                None => {
                    let (lo, hi) = plane.min_max();
                    if hi <= lo {
                        continue;
                    }
                    0.25 * (hi - lo)
                }
            };
            let filtered = bilateral_5x5(&plane, self.sigma_spatial, sigma_range)?;
            for (i, v) in filtered.pixels().iter().enumerate() {
                out.pixels_mut()[i * img.channels() + c] = *v;
            }
        }
        Ok(out)
    }
}

/// 5x5 bilateral filter applied to each channel independently.
///
/// Neighbors outside the image are dropped and the remaining weights
/// renormalized.
pub fn bilateral_5x5(img: &Frame, sigma_spatial: f64, sigma_range: f64) -> Result<Frame> {
    if sigma_spatial.is_nan() || sigma_range.is_nan() || sigma_spatial <= 0.0 || sigma_range <= 0.0
    {
        return Err(Error::invalid(format!(
            "bilateral sigmas must be positive (spatial {sigma_spatial}, range {sigma_range})"
        )));
    }
    const SIZE: usize = 2 * BILATERAL_RADIUS + 1;
    let r = BILATERAL_RADIUS as isize;
    let mut spatial = [[0.0f64; SIZE]; SIZE];
    for (dy, row) in spatial.iter_mut().enumerate() {
        for (dx, w) in row.iter_mut().enumerate() {
            let d2 = ((dx as isize - r).pow(2) + (dy as isize - r).pow(2)) as f64;
            *w = (-d2 / (2.0 * sigma_spatial * sigma_spatial)).exp();
        }
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());

    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = vec![0.0; w * ch];
            for x in 0..w {
                for c in 0..ch {
                    let center = img.get(x, y, c);
                    let (mut num, mut den) = (0.0, 0.0);
                    for (ky, srow) in spatial.iter().enumerate() {
                        let ny = y as isize + ky as isize - r;
                        if ny < 0 || ny >= h as isize {
                            continue;
                        }
                        for (kx, ws) in srow.iter().enumerate() {
                            let nx = x as isize + kx as isize - r;
                            if nx < 0 || nx >= w as isize {
                                continue;
                            }
                            let v = img.get(nx as usize, ny as usize, c);
                            let z = (v - center) / sigma_range;
                            let wt = ws * (-0.5 * z * z).exp();
                            num += wt * v;
                            den += wt;
                        }
                    }
                    row[x * ch + c] = num / den;
                }
            }
            row
        })
        .collect();
    Frame::new(w, h, ch, img.t, rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{BayerPattern, Polarity};
    use proptest::prelude::*;

    fn ev(t: u64, x: u16, y: u16, on: bool) -> Event {
        Event::new(t, x, y, if on { Polarity::On } else { Polarity::Off })
    }

    #[test]
    fn first_event_sets_contrast_step() {
        let p = HfParams::default();
        let s = hf_update(HighPassState::default(), &ev(0, 0, 0, true), &p).unwrap();
        assert_eq!(s.value, p.contrast_step);
        assert_eq!(s.rate, 1.0 / RATE_TAU_S);
    }

    #[test]
    fn sample_decays_exponentially() {
        let p = HfParams {
            cutoff: 0.5,
            cutoff_per_event: 0.0,
            contrast_step: 0.1,
        };
        let s = HighPassState {
            value: 1.0,
            last_t: 1_000,
            rate: 42.0,
        };
        let dt_us = (1.0 / 0.5 * 1e6) as u64;
        let v = hf_sample(&s, 1_000 + dt_us, &p).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(hf_sample(&s, 1_000, &p).unwrap(), 1.0);
        assert!(hf_sample(&s, 999, &p).is_err());
    }

    #[test]
    fn zero_cutoff_holds_value() {
        let p = HfParams {
            cutoff: 0.0,
            cutoff_per_event: 0.0,
            contrast_step: 0.1,
        };
        let s = HighPassState {
            value: 0.7,
            last_t: 0,
            rate: 3.0,
        };
        assert_eq!(hf_sample(&s, 123_456_789, &p).unwrap(), 0.7);
    }

    #[test]
    fn ten_second_decay_at_default_gain() {
        let p = HfParams {
            cutoff_per_event: 0.0,
            ..HfParams::default()
        };
        let s = HighPassState {
            value: 2.0,
            last_t: 0,
            rate: 0.0,
        };
        let v = hf_sample(&s, 10_000_000, &p).unwrap();
        assert!((v - 2.0 * (-0.6f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn update_rejects_time_reversal() {
        let s = HighPassState {
            value: 0.0,
            last_t: 10,
            rate: 0.0,
        };
        assert!(hf_update(s, &ev(9, 0, 0, true), &HfParams::default()).is_err());
    }

    #[test]
    fn hf_reconstruct_basics() {
        let p = HfParams::default();
        let empty = EventStream::empty(4, 4, BayerPattern::default());
        let frames = hf_reconstruct(&empty, &[0, 10, 20], &p).unwrap();
        assert_eq!(frames.len(), 3);
        assert!(frames.iter().all(|f| f.pixels().iter().all(|&v| v == 0.0)));

        let all: Vec<Event> = (0..4)
            .flat_map(|y| (0..4).map(move |x| ev(0, x, y, true)))
            .collect();
        let s = EventStream::from_unsorted(4, 4, BayerPattern::default(), all).unwrap();
        let frames = hf_reconstruct(&s, &[0], &p).unwrap();
        assert!(frames[0].pixels().iter().all(|&v| v == p.contrast_step));

        assert!(hf_reconstruct(&s, &[5, 1], &p).is_err());
    }

    #[test]
    fn integrate_windows_examples() {
        let p = IntegrationParams::default();
        let pat = BayerPattern::default();
        let same: Vec<Event> = (0..1000).map(|i| ev(i, 3, 3, true)).collect();
        let s = EventStream::new(8, 8, pat, same).unwrap();
        let frames = integrate_windows(&s, &p).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].t, 999);
        for y in 0..8 {
            for x in 0..8 {
                let want = if (x, y) == (3, 3) {
                    1000.0 * p.contrast_step
                } else {
                    0.0
                };
                assert!((frames[0].get(x, y, 0) - want).abs() < 1e-9);
            }
        }

        let alt: Vec<Event> = (0..1000).map(|i| ev(i, 1, 1, i % 2 == 0)).collect();
        let s = EventStream::new(4, 4, pat, alt).unwrap();
        let frames = integrate_windows(&s, &p).unwrap();
        assert_eq!(frames[0].get(1, 1, 0), 0.0);

        let many: Vec<Event> = (0..2500).map(|i| ev(i, (i % 4) as u16, 0, true)).collect();
        let s = EventStream::new(4, 1, pat, many).unwrap();
        assert_eq!(integrate_windows(&s, &p).unwrap().len(), 2);

        let bad = IntegrationParams {
            window_events: 0,
            ..p
        };
        assert!(integrate_windows(&s, &bad).is_err());
    }

    #[test]
    fn decay_fades_between_windows() {
        let p = IntegrationParams {
            window_events: 2,
            contrast_step: 1.0,
            decay: 0.5,
        };
        let evs: Vec<Event> = (0..4).map(|i| ev(i, 0, 0, true)).collect();
        let s = EventStream::new(1, 1, BayerPattern::default(), evs).unwrap();
        let frames = integrate_windows(&s, &p).unwrap();
        assert_eq!(frames[0].get(0, 0, 0), 2.0);
        assert_eq!(frames[1].get(0, 0, 0), 3.0);
        let sampled = integrate_at(&s, &[1, 3], &p).unwrap();
        assert_eq!(sampled[0], frames[0]);
        assert_eq!(sampled[1], frames[1]);
    }

    #[test]
    fn bilateral_constant_image() {
        let img = Frame::filled(7, 6, 1, 0, 0.42);
        let out = bilateral_5x5(&img, 1.0, 0.1).unwrap();
        assert!(out.pixels().iter().all(|&v| (v - 0.42).abs() < 1e-15));
        assert!(bilateral_5x5(&img, 0.0, 0.1).is_err());
        assert!(bilateral_5x5(&img, 1.0, -1.0).is_err());
        assert_eq!(BilateralParams::default().apply(&img).unwrap(), img);
    }

    /// Direct 5x5 Gaussian convolution with normalized weights.
    fn gaussian_blur_oracle(img: &Frame, x: usize, y: usize, sigma: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let w = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                num += w * img.get((x as i64 + dx) as usize, (y as i64 + dy) as usize, 0);
                den += w;
            }
        }
        num / den
    }

    #[test]
    fn wide_range_kernel_is_gaussian_blur() {
        let img = Frame::from_fn(9, 9, 0, |x, y| ((x * 7 + y * 13) % 11) as f64 / 10.0);
        let out = bilateral_5x5(&img, 1.0, 1e9).unwrap();
        for y in 2..7 {
            for x in 2..7 {
                let want = gaussian_blur_oracle(&img, x, y, 1.0);
                assert!((out.get(x, y, 0) - want).abs() < 1e-12, "({x},{y})");
            }
        }
    }

    #[test]
    fn step_edge_is_preserved() {
        let img = Frame::from_fn(8, 8, 0, |x, _| if x < 4 { 0.0 } else { 1.0 });
        let out = bilateral_5x5(&img, 1.0, 0.05).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert!((out.get(x, y, 0) - img.get(x, y, 0)).abs() < 0.01);
            }
        }
    }

    #[test]
    fn bilateral_runs_per_channel() {
        let img = Frame::from_rgb_fn(6, 6, 0, |x, y| [x as f64, y as f64, 0.5]);
        let out = bilateral_5x5(&img, 1.0, 0.3).unwrap();
        for c in 0..3 {
            let plane = bilateral_5x5(&img.plane(c), 1.0, 0.3).unwrap();
            assert_eq!(out.plane(c), plane);
        }
    }

    #[test]
    fn tiny_value_range_stays_finite() {
        // Long decays leave estimates near 1e-200; the squared range would underflow.
        let img = Frame::from_fn(6, 6, 0, |x, y| (x + y) as f64 * 1e-200);
        let out = BilateralParams::default().apply(&img).unwrap();
        assert!(out.pixels().iter().all(|v| v.is_finite()));
    }

    fn train(seed: u64, n: usize) -> Vec<Event> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0;
        (0..n)
            .map(|_| {
                t += rng.random_range(0..5_000);
                ev(t, 0, 0, rng.random_bool(0.5))
            })
            .collect()
    }

    fn run(events: &[Event], p: &HfParams, at: u64) -> f64 {
        let s = events
            .iter()
            .try_fold(HighPassState::default(), |s, e| hf_update(s, e, p))
            .unwrap();
        hf_sample(&s, at, p).unwrap()
    }

    proptest! {
        #[test]
        fn time_shift_invariance(seed in 0u64..1000, shift in 0u64..10_000_000) {
            let p = HfParams::default();
            let evs = train(seed, 50);
            let end = evs.last().unwrap().t + 12_345;
            let shifted: Vec<Event> = evs.iter().map(|e| Event { t: e.t + shift, ..*e }).collect();
            let a = run(&evs, &p, end);
            let b = run(&shifted, &p, end + shift);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn linear_in_polarity_without_rate_term(seed in 0u64..1000) {
            let p = HfParams { cutoff: 0.8, cutoff_per_event: 0.0, contrast_step: 0.2 };
            let a = train(seed, 40);
            let b = train(seed + 7_777, 40);
            let end = a.last().unwrap().t.max(b.last().unwrap().t) + 1;
            let mut both: Vec<Event> = a.iter().chain(&b).copied().collect();
            both.sort();
            let sum = run(&a, &p, end) + run(&b, &p, end);
            prop_assert!((run(&both, &p, end) - sum).abs() < 1e-9);
        }

        #[test]
        fn zero_cutoff_is_naive_integration(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let evs: Vec<Event> = (0..300)
                .map(|_| ev(rng.random_range(0..100_000), rng.random_range(0..4), rng.random_range(0..4), rng.random_bool(0.5)))
                .collect();
            let s = EventStream::from_unsorted(4, 4, BayerPattern::default(), evs.clone()).unwrap();
            let p = HfParams { cutoff: 0.0, cutoff_per_event: 0.0, contrast_step: 0.25 };
            let f = &hf_reconstruct(&s, &[100_000], &p).unwrap()[0];
            for y in 0..4u16 {
                for x in 0..4u16 {
                    let net: i64 = evs.iter().filter(|e| e.x == x && e.y == y).map(|e| i64::from(e.polarity.sign())).sum();
                    prop_assert!((f.get(x as usize, y as usize, 0) - 0.25 * net as f64).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn window_order_does_not_matter(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            use rand::seq::SliceRandom;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut evs: Vec<Event> = (0..100)
                .map(|i| ev(i, rng.random_range(0..3), rng.random_range(0..3), rng.random_bool(0.5)))
                .collect();
            let p = IntegrationParams { window_events: 100, contrast_step: 0.5, decay: 1.0 };
            let a = integrate_windows(&EventStream::new(3, 3, BayerPattern::default(), evs.clone()).unwrap(), &p).unwrap();
            // Reassign timestamps after shuffling so the stream stays ordered.
            evs.shuffle(&mut rng);
            let relabeled: Vec<Event> = evs.iter().enumerate().map(|(i, e)| Event { t: i as u64, ..*e }).collect();
            let b = integrate_windows(&EventStream::new(3, 3, BayerPattern::default(), relabeled).unwrap(), &p).unwrap();
            prop_assert_eq!(a[0].pixels(), b[0].pixels());
        }

        #[test]
        fn bilateral_is_convex(vals in proptest::collection::vec(-5.0f64..5.0, 36), sr in 0.01f64..10.0) {
            let img = Frame::new(6, 6, 1, 0, vals).unwrap();
            let (lo, hi) = img.min_max();
            let out = bilateral_5x5(&img, 1.0, sr).unwrap();
            for &v in out.pixels() {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
