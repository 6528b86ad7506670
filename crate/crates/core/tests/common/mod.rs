//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use cevt_core::filters::RATE_TAU_S;
use cevt_core::simulator::SimConfig;
use cevt_core::{BayerPattern, Event, EventStream, Frame, Polarity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth random RGB sequence: a few low-frequency drifting sinusoids per
/// channel, kept inside `[0.05, 0.95]`.
pub fn smooth_random_frames(seed: u64, w: usize, h: usize, n: usize, dt_us: u64) -> Vec<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (kx, ky, omega, phase, amplitude) per component per channel.
    let waves: Vec<Vec<[f64; 5]>> = (0..3)
        .map(|_| {
            (0..3)
                .map(|_| {
                    [
                        rng.random_range(-0.4..0.4),
                        rng.random_range(-0.4..0.4),
                        rng.random_range(-60.0..60.0),
                        rng.random_range(0.0..std::f64::consts::TAU),
                        rng.random_range(0.08..0.14),
                    ]
                })
                .collect()
        })
        .collect();
    (0..n)
        .map(|k| {
            let t_us = k as u64 * dt_us;
            let t = t_us as f64 * 1e-6;
            Frame::from_rgb_fn(w, h, t_us, |x, y| {
                let mut px = [0.0; 3];
                for (c, v) in px.iter_mut().enumerate() {
                    let s: f64 = waves[c]
                        .iter()
                        .map(|[kx, ky, om, ph, a]| {
                            a * (kx * x as f64 + ky * y as f64 + om * t + ph).sin()
                        })
                        .sum();
                    *v = (0.5 + s).clamp(0.05, 0.95);
                }
                px
            })
        })
        .collect()
}

/// Canonical tile lookup, written out independently of `BayerPattern`.
fn rgb_component(pattern: BayerPattern, x: usize, y: usize) -> usize {
    // Canonical: row 0 = R G, row 1 = G B, shifted by the phase.
    let code = pattern.phase_code() as usize;
    let (cx, cy) = ((x + code % 2) % 2, (y + code / 2) % 2);
    match (cx, cy) {
        (0, 0) => 0,
        (1, 1) => 2,
        _ => 1,
    }
}

/// One-pixel, one-microsecond-step event generator. Each step samples the
/// linearly interpolated log intensity and fires for every level it has
/// passed; the event is stamped at the floor of the crossing time, found as
/// the step where the level was first reached.
pub fn brute_force_pixel(
    logs: &[(u64, f64)],
    c_pos: f64,
    c_neg: f64,
    refractory_us: u64,
    mut emit: impl FnMut(u64, Polarity),
) {
    let mut reference = logs[0].1;
    let mut last_event: Option<u64> = None;
    for pair in logs.windows(2) {
        let ((t0, l0), (t1, l1)) = (pair[0], pair[1]);
        let dt = (t1 - t0) as f64;
        let slope = (l1 - l0) / dt;
        let tol = slope.abs() * 1e-6;
        let value = |s: u64| l0 + (l1 - l0) * (s - t0) as f64 / dt;
        for s in t0 + 1..=t1 {
            let v = value(s);
            loop {
                let (level, polarity) = if slope > 0.0 {
                    (reference + c_pos, Polarity::On)
                } else if slope < 0.0 {
                    (reference - c_neg, Polarity::Off)
                } else {
                    break;
                };
                let reached = if slope > 0.0 {
                    v >= level - tol
                } else {
                    v <= level + tol
                };
                // The last level only counts if the endpoint really reaches it.
                let beyond_end = if slope > 0.0 { level > l1 } else { level < l1 };
                if !reached || beyond_end {
                    break;
                }
                let t = if (v - level).abs() <= tol { s } else { s - 1 };
                reference = level;
                let blocked = matches!(last_event, Some(le) if t - le < refractory_us);
                if !blocked {
                    emit(t, polarity);
                    last_event = Some(t);
                }
            }
        }
    }
}

/// Pixel-at-a-time reference simulator, sorted at the end.
pub fn brute_force_simulate(
    frames: &[Frame],
    pattern: BayerPattern,
    cfg: &SimConfig,
) -> Vec<Event> {
    let (w, h) = (frames[0].width(), frames[0].height());
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let c = rgb_component(pattern, x, y);
            let logs: Vec<(u64, f64)> = frames
                .iter()
                .map(|f| (f.t, (f.get(x, y, c) + cfg.log_eps).ln()))
                .collect();
            brute_force_pixel(&logs, cfg.c_pos, cfg.c_neg, cfg.refractory_us, |t, p| {
                out.push(Event::new(t, x as u16, y as u16, p))
            });
        }
    }
    out.sort();
    out
}

/// Fine-step integration of the high-pass ODE for one pixel.
///
/// Between events `dL/dt = -alpha L` with `alpha` fixed at the value set by
/// the last event, and `dr/dt = -r / tau`; both advanced with classical RK4 at
/// 1 us steps. Events add `sign * c` to `L` and `1 / tau` to `r`. Returns the
/// estimate after every event and at `sample_at`.
pub fn hf_ode_oracle(
    events: &[(u64, f64)],
    cutoff: f64,
    cutoff_per_event: f64,
    c: f64,
    sample_at: u64,
) -> (Vec<f64>, f64) {
    let h = 1e-6;
    let rk4 = |y: f64, k: f64| {
        // dy/dt = -k y
        let f = |y: f64| -k * y;
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let (mut l, mut r, mut alpha) = (0.0f64, 0.0f64, cutoff);
    let mut t = 0u64;
    let mut after = Vec::with_capacity(events.len());
    for &(te, sign) in events {
        while t < te {
            l = rk4(l, alpha);
            r = rk4(r, 1.0 / RATE_TAU_S);
            t += 1;
        }
        l += sign * c;
        r += 1.0 / RATE_TAU_S;
        alpha = cutoff + cutoff_per_event * r;
        after.push(l);
    }
    while t < sample_at {
        l = rk4(l, alpha);
        t += 1;
    }
    (after, l)
}

pub fn random_events(seed: u64, n: usize, w: u16, h: u16, t_max: u64) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = if rng.random_bool(0.5) {
                Polarity::On
            } else {
                Polarity::Off
            };
            Event::new(
                rng.random_range(0..t_max),
                rng.random_range(0..w),
                rng.random_range(0..h),
                p,
            )
        })
        .collect()
}

pub fn random_stream(seed: u64, n: usize, w: u16, h: u16, t_max: u64) -> EventStream {
    EventStream::from_unsorted(
        w,
        h,
        BayerPattern::default(),
        random_events(seed, n, w, h, t_max),
    )
    .unwrap()
}

/// Pearson correlation of two equally long samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
