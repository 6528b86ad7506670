//! From single-channel reconstructions to RGB.
//!
//! Two routes are supported. Per-pixel methods keep the mosaic intact, so
//! their output is demosaiced directly. Methods that smooth spatially are run
//! once per Bayer channel at quarter resolution; the four results are
//! upsampled, shifted into registration and fused (the two greens averaged).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::event::{BayerPattern, ColorChannel, Event, EventStream, Frame};
use crate::filters::{hf_reconstruct, BilateralParams, HfParams, Reconstructor};

/// Per-channel quarter-resolution sub-streams, indexed by [`ColorChannel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelStreams {
    streams: [EventStream; 4],
}

impl ChannelStreams {
    pub fn get(&self, channel: ColorChannel) -> &EventStream {
        &self.streams[channel.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ColorChannel, &EventStream)> {
        ColorChannel::ALL.into_iter().zip(self.streams.iter())
    }

    pub fn total_len(&self) -> usize {
        self.streams.iter().map(EventStream::len).sum()
    }
}

/// Ceiling-divided quarter-resolution size of a sensor.
pub fn quarter_size(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(2), height.div_ceil(2))
}

/// Route every event to its Bayer channel and re-address it on the
/// channel's quarter-resolution grid.
pub fn split_by_channel(events: &EventStream) -> ChannelStreams {
    let pattern = events.pattern();
    let (qw, qh) = quarter_size(events.width() as usize, events.height() as usize);
    let mut parts: [Vec<Event>; 4] = Default::default();
    for e in events.events() {
        let (c, qx, qy) = pattern.to_quarter(e.x as usize, e.y as usize);
        parts[c.index()].push(Event::new(e.t, qx as u16, qy as u16, e.polarity));
    }
    // Within one channel the parity of x and y is fixed, so halving the
    // coordinates keeps the canonical order.
    let streams = parts.map(|evs| {
        EventStream::new(qw as u16, qh as u16, pattern, evs)
            .expect("quarter addresses stay ordered and in bounds")
    });
    ChannelStreams { streams }
}

/// Catmull-Rom cubic convolution kernel (a = -0.5).
pub fn catmull_rom(s: f64) -> f64 {
    const A: f64 = -0.5;
    let s = s.abs();
    if s <= 1.0 {
        (A + 2.0) * s * s * s - (A + 3.0) * s * s + 1.0
    } else if s < 2.0 {
        A * s * s * s - 5.0 * A * s * s + 8.0 * A * s - 4.0 * A
    } else {
        0.0
    }
}

/// Integer-factor bicubic upsampling.
///
/// Output pixel `X` samples the input at `X / factor`, so every input pixel
/// reappears exactly at `factor * x`. Out-of-range taps clamp to the edge.
pub fn upsample_bicubic(img: &Frame, factor: usize) -> Result<Frame> {
    if factor == 0 {
        return Err(Error::invalid("upsampling factor must be at least 1"));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (ow, oh) = (w * factor, h * factor);
    if w == 0 || h == 0 {
        return Frame::new(ow, oh, ch, img.t, Vec::new());
    }

    let taps = |out_len: usize, in_len: usize| -> Vec<([usize; 4], [f64; 4])> {
        (0..out_len)
            .map(|o| {
                let base = o / factor;
                let frac = (o % factor) as f64 / factor as f64;
                let mut idx = [0usize; 4];
                let mut wts = [0.0; 4];
                for k in 0..4 {
                    let i = base as isize + k as isize - 1;
                    idx[k] = i.clamp(0, in_len as isize - 1) as usize;
                    wts[k] = catmull_rom(frac - (k as f64 - 1.0));
                }
                (idx, wts)
            })
            .collect()
    };
    let xt = taps(ow, w);
    let yt = taps(oh, h);

    // Horizontal pass.
    let mut tmp = vec![0.0; ow * h * ch];
    for y in 0..h {
        for (ox, (idx, wts)) in xt.iter().enumerate() {
            for c in 0..ch {
                tmp[(y * ow + ox) * ch + c] = (0..4).map(|k| wts[k] * img.get(idx[k], y, c)).sum();
            }
        }
    }
    // Vertical pass.
    let mut out = vec![0.0; ow * oh * ch];
    for (oy, (idx, wts)) in yt.iter().enumerate() {
        for ox in 0..ow {
            for c in 0..ch {
                out[(oy * ow + ox) * ch + c] = (0..4)
                    .map(|k| wts[k] * tmp[(idx[k] * ow + ox) * ch + c])
                    .sum();
            }
        }
    }
    Frame::new(ow, oh, ch, img.t, out)
}

/// Top-left `width x height` window of `img`.
pub fn crop(img: &Frame, width: usize, height: usize) -> Frame {
    assert!(width <= img.width() && height <= img.height());
    let ch = img.channels();
    let mut pixels = Vec::with_capacity(width * height * ch);
    for y in 0..height {
        let start = y * img.width() * ch;
        pixels.extend_from_slice(&img.pixels()[start..start + width * ch]);
    }
    Frame::new(width, height, ch, img.t, pixels).expect("crop keeps a consistent shape")
}

/// Translate `img` by `(dx, dy)` pixels: `out(x, y) = img(x - dx, y - dy)`,
/// with vacated pixels replicated from the nearest edge.
pub fn translate(img: &Frame, dx: isize, dy: isize) -> Frame {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = img.clone();
    for y in 0..h {
        let sy = (y as isize - dy).clamp(0, h as isize - 1) as usize;
        for x in 0..w {
            let sx = (x as isize - dx).clamp(0, w as isize - 1) as usize;
            for c in 0..ch {
                out.set(x, y, c, img.get(sx, sy, c));
            }
        }
    }
    out
}

fn check_same_size(frames: &[&Frame]) -> Result<()> {
    let first = frames[0];
    for f in &frames[1..] {
        if !f.same_shape(first) {
            return Err(Error::SizeMismatch(format!(
                "channel frames differ: {}x{}x{} vs {}x{}x{}",
                first.width(),
                first.height(),
                first.channels(),
                f.width(),
                f.height(),
                f.channels()
            )));
        }
    }
    Ok(())
}

/// Shift each full-resolution channel by the negation of its site offset in
/// the Bayer tile, bringing all four onto the tile-origin grid.
pub fn align_channels(
    r: &Frame,
    g1: &Frame,
    g2: &Frame,
    b: &Frame,
    pattern: BayerPattern,
) -> Result<[Frame; 4]> {
    check_same_size(&[r, g1, g2, b])?;
    let shift = |f: &Frame, c: ColorChannel| {
        let (sx, sy) = pattern.site_offset(c);
        translate(f, -(sx as isize), -(sy as isize))
    };
    Ok([
        shift(r, ColorChannel::R),
        shift(g1, ColorChannel::G1),
        shift(g2, ColorChannel::G2),
        shift(b, ColorChannel::B),
    ])
}

/// Stack aligned channels into RGB, averaging the two greens.
pub fn fuse_rgb(r: &Frame, g1: &Frame, g2: &Frame, b: &Frame) -> Result<Frame> {
    check_same_size(&[r, g1, g2, b])?;
    if r.channels() != 1 {
        return Err(Error::invalid("fuse_rgb expects single-channel frames"));
    }
    let g: Vec<f64> = g1
        .pixels()
        .iter()
        .zip(g2.pixels())
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    let g = Frame::new(r.width(), r.height(), 1, r.t, g)?;
    Frame::from_planes(r, &g, b)
}

/// Mirror an out-of-range index about the edge pixel. Keeps Bayer parity.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// Bilinear Bayer demosaicing.
///
/// Each missing color is the mean of the nearest sites carrying it: the two
/// horizontal or vertical neighbors, or the four cardinal or diagonal ones.
/// Sensed values pass through unchanged. Borders mirror about the edge pixel
/// so neighbors keep their color.
pub fn demosaic_bilinear(mosaic: &Frame, pattern: BayerPattern) -> Result<Frame> {
    if mosaic.channels() != 1 {
        return Err(Error::invalid("demosaicing needs a single-channel mosaic"));
    }
    let (w, h) = (mosaic.width(), mosaic.height());
    if w < 2 || h < 2 {
        return Err(Error::invalid(format!(
            "mosaic must be at least 2x2, got {w}x{h}"
        )));
    }
    let at = |x: usize, y: usize, dx: isize, dy: isize| {
        mosaic.get(reflect(x as isize + dx, w), reflect(y as isize + dy, h), 0)
    };
    let cross = |x, y| (at(x, y, -1, 0) + at(x, y, 1, 0) + at(x, y, 0, -1) + at(x, y, 0, 1)) / 4.0;
    let diag = |x, y| (at(x, y, -1, -1) + at(x, y, 1, -1) + at(x, y, -1, 1) + at(x, y, 1, 1)) / 4.0;
    let horiz = |x, y| (at(x, y, -1, 0) + at(x, y, 1, 0)) / 2.0;
    let vert = |x, y| (at(x, y, 0, -1) + at(x, y, 0, 1)) / 2.0;

    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = Vec::with_capacity(w * 3);
            for x in 0..w {
                let v = mosaic.get(x, y, 0);
                let rgb = match pattern.channel_of(x, y) {
                    ColorChannel::R => [v, cross(x, y), diag(x, y)],
                    ColorChannel::B => [diag(x, y), cross(x, y), v],
                    ColorChannel::G1 => [horiz(x, y), v, vert(x, y)],
                    ColorChannel::G2 => [vert(x, y), v, horiz(x, y)],
                };
                row.extend_from_slice(&rgb);
            }
            row
        })
        .collect();
    Frame::new(w, h, 3, mosaic.t, rows.concat())
}

/// Bring four quarter-resolution channel frames back to a full-resolution
/// RGB frame: upsample, crop to the sensor, align, fuse.
pub fn combine_quarter(
    channels: [&Frame; 4],
    width: usize,
    height: usize,
    pattern: BayerPattern,
) -> Result<Frame> {
    let up: Vec<Frame> = channels
        .iter()
        .map(|f| Ok(crop(&upsample_bicubic(f, 2)?, width, height)))
        .collect::<Result<_>>()?;
    let [r, g1, g2, b] = align_channels(&up[0], &up[1], &up[2], &up[3], pattern)?;
    fuse_rgb(&r, &g1, &g2, &b)
}

/// Color reconstruction through independent quarter-resolution channels.
pub fn reconstruct_color_quarter(
    events: &EventStream,
    reconstructor: &dyn Reconstructor,
    sample_ts: &[u64],
) -> Result<Vec<Frame>> {
    let split = split_by_channel(events);
    let per_channel: Vec<Vec<Frame>> = ColorChannel::ALL
        .par_iter()
        .map(|&c| reconstructor.reconstruct(split.get(c), sample_ts))
        .collect::<Result<_>>()?;
    let (w, h) = (events.width() as usize, events.height() as usize);
    (0..sample_ts.len())
        .map(|k| {
            combine_quarter(
                [
                    &per_channel[0][k],
                    &per_channel[1][k],
                    &per_channel[2][k],
                    &per_channel[3][k],
                ],
                w,
                h,
                events.pattern(),
            )
        })
        .collect()
}

/// Color reconstruction that keeps the mosaic: high-pass filter on the raw
/// events, bilinear demosaicing, then the bilateral filter per channel.
/// Output stays in the log domain; see [`tone_map`].
pub fn reconstruct_color_demosaic(
    events: &EventStream,
    hf: &HfParams,
    bilateral: Option<&BilateralParams>,
    sample_ts: &[u64],
) -> Result<Vec<Frame>> {
    hf_reconstruct(events, sample_ts, hf)?
        .iter()
        .map(|m| {
            let rgb = demosaic_bilinear(m, events.pattern())?;
            match bilateral {
                Some(b) => b.apply(&rgb),
                None => Ok(rgb),
            }
        })
        .collect()
}

/// Map a log-domain reconstruction to displayable `[0, 1]` values:
/// `exp(value)` rescaled by the frame's own minimum and maximum. A constant
/// frame maps to 0.
pub fn tone_map(frame: &Frame) -> Frame {
    let lin: Vec<f64> = frame.pixels().iter().map(|v| v.exp()).collect();
    let (lo, hi) = lin
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let pixels = lin
        .iter()
        .map(|&v| {
            if span > 0.0 && span.is_finite() {
                (v - lo) / span
            } else {
                0.0
            }
        })
        .collect();
    Frame::new(
        frame.width(),
        frame.height(),
        frame.channels(),
        frame.t,
        pixels,
    )
    .expect("tone mapping keeps the shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Polarity;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(w: usize, h: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_fn(w, h, 0, |_, _| rng.random::<f64>())
    }

    #[test]
    fn split_examples() {
        let p = BayerPattern::default();
        let s = EventStream::new(
            8,
            8,
            p,
            vec![
                Event::new(1, 0, 0, Polarity::On),
                Event::new(2, 5, 3, Polarity::Off),
            ],
        )
        .unwrap();
        let c = split_by_channel(&s);
        assert_eq!(
            c.get(ColorChannel::R).events(),
            &[Event::new(1, 0, 0, Polarity::On)]
        );
        assert_eq!(
            c.get(ColorChannel::B).events(),
            &[Event::new(2, 2, 1, Polarity::Off)]
        );
        assert!(c.get(ColorChannel::G1).is_empty() && c.get(ColorChannel::G2).is_empty());
        assert_eq!(c.get(ColorChannel::R).width(), 4);
    }

    #[test]
    fn odd_sensor_uses_ceiling_quarters() {
        assert_eq!(quarter_size(5, 3), (3, 2));
        let p = BayerPattern::default();
        let s = EventStream::new(5, 3, p, vec![Event::new(0, 4, 2, Polarity::On)]).unwrap();
        let c = split_by_channel(&s);
        assert_eq!(
            c.get(ColorChannel::R).events()[0],
            Event::new(0, 2, 1, Polarity::On)
        );
        assert_eq!(
            (
                c.get(ColorChannel::B).width(),
                c.get(ColorChannel::B).height()
            ),
            (3, 2)
        );
    }

    #[test]
    fn upsample_constant_and_ramp() {
        let c = Frame::filled(3, 4, 1, 9, 0.7);
        let u = upsample_bicubic(&c, 2).unwrap();
        assert_eq!((u.width(), u.height(), u.t), (6, 8, 9));
        assert!(u.pixels().iter().all(|&v| (v - 0.7).abs() < 1e-12));

        let ramp = Frame::from_fn(8, 8, 0, |x, y| 0.5 * x as f64 + 0.25 * y as f64);
        let u = upsample_bicubic(&ramp, 2).unwrap();
        // Interior only: every tap from floor(X/2) - 1 to floor(X/2) + 2 in range.
        for y in 2..12 {
            for x in 2..12 {
                let want = 0.5 * (x as f64 / 2.0) + 0.25 * (y as f64 / 2.0);
                assert!((u.get(x, y, 0) - want).abs() < 1e-12, "({x},{y})");
            }
        }
    }

    /// Direct evaluation of the clamped cubic convolution sum over every
    /// source pixel.
    fn bicubic_oracle(img: &Frame, x: usize, y: usize) -> f64 {
        let (sx, sy) = (x as f64 / 2.0, y as f64 / 2.0);
        let mut acc = 0.0;
        for j in -3isize..img.height() as isize + 3 {
            let wy = catmull_rom(sy - j as f64);
            if wy == 0.0 {
                continue;
            }
            for i in -3isize..img.width() as isize + 3 {
                let wx = catmull_rom(sx - i as f64);
                if wx == 0.0 {
                    continue;
                }
                let cx = i.clamp(0, img.width() as isize - 1) as usize;
                let cy = j.clamp(0, img.height() as isize - 1) as usize;
                acc += wx * wy * img.get(cx, cy, 0);
            }
        }
        acc
    }

    #[test]
    fn upsample_matches_convolution_oracle() {
        let img = random_frame(4, 4, 11);
        let u = upsample_bicubic(&img, 2).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert!((u.get(x, y, 0) - bicubic_oracle(&img, x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_values() {
        assert_eq!(catmull_rom(0.0), 1.0);
        assert_eq!(catmull_rom(1.0), 0.0);
        assert_eq!(catmull_rom(0.5), 0.5625);
        assert_eq!(catmull_rom(1.5), -0.0625);
        assert_eq!(catmull_rom(2.0), 0.0);
    }

    #[test]
    fn align_examples() {
        let p = BayerPattern::default();
        let impulse = |x, y| {
            Frame::from_fn(
                10,
                10,
                0,
                move |i, j| if (i, j) == (x, y) { 1.0 } else { 0.0 },
            )
        };
        let r = impulse(5, 5);
        let b = impulse(5, 5);
        let [r2, _, _, b2] = align_channels(&r, &r, &r, &b, p).unwrap();
        assert_eq!(r2, r);
        assert_eq!(b2, impulse(4, 4));

        // Same scene point seen at each channel's own site in tile (2, 2).
        let [ar, ag1, ag2, ab] = align_channels(
            &impulse(4, 4),
            &impulse(5, 4),
            &impulse(4, 5),
            &impulse(5, 5),
            p,
        )
        .unwrap();
        for f in [&ag1, &ag2, &ab] {
            assert_eq!(f, &ar);
        }
        assert_eq!(ar, impulse(4, 4));

        let small = Frame::zeros(9, 10, 1, 0);
        assert!(align_channels(&r, &small, &r, &r, p).is_err());
    }

    #[test]
    fn align_inverts_away_from_border() {
        let p = BayerPattern::default();
        let img = random_frame(9, 7, 3);
        let [_, _, _, b] = align_channels(&img, &img, &img, &img, p).unwrap();
        let back = translate(&b, 1, 1);
        for y in 1..6 {
            for x in 1..8 {
                assert_eq!(back.get(x, y, 0), img.get(x, y, 0));
            }
        }
    }

    #[test]
    fn fuse_examples() {
        let a = random_frame(5, 4, 1);
        let rgb = fuse_rgb(&a, &a, &a, &a).unwrap();
        assert_eq!(rgb.plane(1), a);

        let z = Frame::zeros(3, 3, 1, 0);
        let o = Frame::filled(3, 3, 1, 0, 1.0);
        let rgb = fuse_rgb(&z, &z, &o, &z).unwrap();
        assert!(rgb.plane(1).pixels().iter().all(|&v| v == 0.5));

        let g1 = random_frame(6, 6, 2);
        let g2 = random_frame(6, 6, 3);
        assert!(fuse_rgb(&z, &g1, &g2, &z).is_err());
        let r = random_frame(6, 6, 4);
        let rgb = fuse_rgb(&r, &g1, &g2, &r).unwrap();
        for i in 0..36 {
            assert_eq!(
                rgb.pixels()[i * 3 + 1],
                (g1.pixels()[i] + g2.pixels()[i]) / 2.0
            );
            assert_eq!(rgb.pixels()[i * 3], r.pixels()[i]);
        }
        assert_eq!(fuse_rgb(&r, &g2, &g1, &r).unwrap(), rgb);
    }

    /// Mean of every same-color site in the 3x3 neighborhood, for each
    /// missing color; sensed colors taken as-is.
    fn demosaic_oracle(m: &Frame, p: BayerPattern, x: usize, y: usize) -> [f64; 3] {
        let own = p.channel_of(x, y).rgb_index();
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            if k == own {
                *slot = m.get(x, y, 0);
                continue;
            }
            let (mut sum, mut n) = (0.0, 0);
            for ny in y.saturating_sub(1)..=(y + 1).min(m.height() - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(m.width() - 1) {
                    if p.channel_of(nx, ny).rgb_index() == k {
                        sum += m.get(nx, ny, 0);
                        n += 1;
                    }
                }
            }
            *slot = sum / n as f64;
        }
        out
    }

    #[test]
    fn demosaic_matches_neighbor_oracle() {
        for code in 0..4 {
            let p = BayerPattern::from_phase_code(code).unwrap();
            let m = random_frame(6, 6, 40 + u64::from(code));
            let rgb = demosaic_bilinear(&m, p).unwrap();
            for y in 1..5 {
                for x in 1..5 {
                    let want = demosaic_oracle(&m, p, x, y);
                    for (c, w) in want.iter().enumerate() {
                        assert!((rgb.get(x, y, c) - w).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn demosaic_pure_red_scene() {
        let p = BayerPattern::default();
        let m = Frame::from_fn(6, 6, 0, |x, y| {
            if p.channel_of(x, y) == ColorChannel::R {
                0.8
            } else {
                0.0
            }
        });
        let rgb = demosaic_bilinear(&m, p).unwrap();
        for y in 1..5 {
            for x in 1..5 {
                assert_eq!(
                    [rgb.get(x, y, 0), rgb.get(x, y, 1), rgb.get(x, y, 2)],
                    [0.8, 0.0, 0.0]
                );
            }
        }
    }

    #[test]
    fn demosaic_constant_and_errors() {
        let m = Frame::filled(5, 7, 1, 0, 0.3);
        let rgb = demosaic_bilinear(&m, BayerPattern::GBRG).unwrap();
        assert!(rgb.pixels().iter().all(|&v| (v - 0.3).abs() < 1e-15));
        assert!(demosaic_bilinear(&Frame::zeros(1, 4, 1, 0), BayerPattern::default()).is_err());
        assert!(demosaic_bilinear(&Frame::zeros(4, 4, 3, 0), BayerPattern::default()).is_err());
    }

    #[test]
    fn quarter_pipeline_empty_and_red_only() {
        let p = BayerPattern::default();
        let hf = HfParams::default();
        let empty = EventStream::empty(8, 6, p);
        let out = reconstruct_color_quarter(&empty, &hf, &[0, 100]).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out
            .iter()
            .all(|f| f.channels() == 3 && f.pixels().iter().all(|&v| v == 0.0)));

        let evs = vec![
            Event::new(10, 2, 2, Polarity::On),
            Event::new(20, 4, 0, Polarity::Off),
        ];
        let s = EventStream::new(8, 6, p, evs).unwrap();
        let out = reconstruct_color_quarter(&s, &hf, &[50]).unwrap();
        assert!(out[0].plane(1).pixels().iter().all(|&v| v == 0.0));
        assert!(out[0].plane(2).pixels().iter().all(|&v| v == 0.0));
        assert!(out[0].plane(0).pixels().iter().any(|&v| v != 0.0));
    }

    #[test]
    fn tone_map_range() {
        let f = Frame::from_fn(4, 1, 0, |x, _| x as f64 - 1.5);
        let t = tone_map(&f);
        let (lo, hi) = t.min_max();
        assert_eq!((lo, hi), (0.0, 1.0));
        assert!(tone_map(&Frame::zeros(3, 3, 3, 0))
            .pixels()
            .iter()
            .all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn split_conserves_events(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let evs: Vec<Event> = (0..200)
                .map(|_| Event::new(rng.random_range(0..1000), rng.random_range(0..9), rng.random_range(0..7),
                    if rng.random_bool(0.5) { Polarity::On } else { Polarity::Off }))
                .collect();
            let s = EventStream::from_unsorted(9, 7, BayerPattern::default(), evs).unwrap();
            let c = split_by_channel(&s);
            prop_assert_eq!(c.total_len(), s.len());
            let mut a: Vec<(u64, Polarity)> = s.events().iter().map(|e| (e.t, e.polarity)).collect();
            let mut b: Vec<(u64, Polarity)> = c.iter().flat_map(|(_, st)| st.events().iter().map(|e| (e.t, e.polarity))).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn demosaic_keeps_sensed_sites(seed in 0u64..500, w in 2usize..12, h in 2usize..12, code in 0u8..4) {
            let p = BayerPattern::from_phase_code(code).unwrap();
            let m = random_frame(w, h, seed);
            let rgb = demosaic_bilinear(&m, p).unwrap();
            for y in 0..h {
                for x in 0..w {
                    prop_assert_eq!(rgb.get(x, y, p.channel_of(x, y).rgb_index()), m.get(x, y, 0));
                }
            }
        }
    }
}
