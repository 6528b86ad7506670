//! Browser-independent state behind the demo page.

use cevt_core::colorpipe::{reconstruct_color_demosaic, reconstruct_color_quarter, tone_map};
use cevt_core::filters::{BilateralParams, HfParams, IntegrationParams};
use cevt_core::simulator::{simulate, SimConfig};
use cevt_core::synthetic::DriftingGradient;
use cevt_core::{BayerPattern, ColorChannel, Error, EventStream, Frame, Polarity, Result};

/// A simulated drifting-gradient clip and the events it produced.
pub struct DemoSession {
    scene: DriftingGradient,
    duration_us: u64,
    log_eps: f64,
    stream: EventStream,
}

impl DemoSession {
    pub fn new(
        width: usize,
        height: usize,
        frames: usize,
        duration_us: u64,
        threshold: f64,
    ) -> Result<Self> {
        if width < 2 || height < 2 || width > 512 || height > 512 {
            return Err(Error::InvalidInput(format!(
                "demo size must be 2..=512, got {width}x{height}"
            )));
        }
        if frames < 2 || duration_us == 0 {
            return Err(Error::InvalidInput(
                "need at least two frames over a positive duration".into(),
            ));
        }
        let scene = DriftingGradient::new(width, height);
        let cfg = SimConfig {
            c_pos: threshold,
            c_neg: threshold,
            ..SimConfig::default()
        };
        let stream = simulate(&scene.frames(frames, duration_us), BayerPattern::RGGB, &cfg)?;
        Ok(DemoSession {
            scene,
            duration_us,
            log_eps: cfg.log_eps,
            stream,
        })
    }

    pub fn width(&self) -> usize {
        self.scene.width
    }

    pub fn height(&self) -> usize {
        self.scene.height
    }

    pub fn duration_us(&self) -> u64 {
        self.duration_us
    }

    pub fn stream(&self) -> &EventStream {
        &self.stream
    }

    fn clamp_t(&self, t_us: u64) -> u64 {
        t_us.min(self.duration_us)
    }

    /// The scene itself at `t_us`.
    pub fn ground_truth_rgba(&self, t_us: u64) -> Vec<u8> {
        rgba(&self.scene.frame(self.clamp_t(t_us)))
    }

    /// Events in `[t_us - window_us, t_us]` on gray: ON sites brighten
    /// toward their filter color, OFF sites darken.
    pub fn events_rgba(&self, t_us: u64, window_us: u64) -> Vec<u8> {
        let t1 = self.clamp_t(t_us);
        let t0 = t1.saturating_sub(window_us);
        let (w, h) = (self.width(), self.height());
        let mut net = vec![0i32; w * h];
        for e in self
            .stream
            .events()
            .iter()
            .filter(|e| (t0..=t1).contains(&e.t))
        {
            net[e.y as usize * w + e.x as usize] += i32::from(e.polarity.sign());
        }
        let pattern = self.stream.pattern();
        let mut out = Vec::with_capacity(4 * w * h);
        for (i, &n) in net.iter().enumerate() {
            let mut px = [110u8; 3];
            if n != 0 {
                let c = pattern.channel_of(i % w, i / w).rgb_index();
                let level = (60 * n.unsigned_abs()).min(145) as u8;
                if n > 0 {
                    px[c] = 110 + level;
                } else {
                    px = px.map(|v| v - level.min(100));
                }
            }
            out.extend_from_slice(&[px[0], px[1], px[2], 255]);
        }
        out
    }

    /// High-pass reconstruction on the mosaic, demosaiced, optionally
    /// bilateral-filtered, tone-mapped.
    pub fn hf_rgba(
        &self,
        t_us: u64,
        cutoff: f64,
        cutoff_per_event: f64,
        bilateral: bool,
    ) -> Result<Vec<u8>> {
        let hf = HfParams {
            cutoff,
            cutoff_per_event,
            ..HfParams::default()
        };
        let b = BilateralParams::default();
        let frames = reconstruct_color_demosaic(
            &self.stream,
            &hf,
            bilateral.then_some(&b),
            &[self.clamp_t(t_us)],
        )?;
        Ok(rgba(&tone_map(&frames[0])))
    }

    /// Windowed integration on the four quarter-resolution channels.
    pub fn quarter_rgba(&self, t_us: u64, window_events: usize, decay: f64) -> Result<Vec<u8>> {
        let p = IntegrationParams {
            window_events,
            decay,
            ..IntegrationParams::default()
        };
        let frames = reconstruct_color_quarter(&self.stream, &p, &[self.clamp_t(t_us)])?;
        Ok(rgba(&tone_map(&frames[0])))
    }

    /// Ground-truth log frame at `t_us`, for comparing against reconstructions.
    pub fn ground_truth_log(&self, t_us: u64) -> Frame {
        let mut f = self.scene.frame(self.clamp_t(t_us));
        for v in f.pixels_mut() {
            *v = (*v + self.log_eps).ln();
        }
        f
    }

    pub fn stats_text(&self) -> String {
        let evs = self.stream.events();
        let on = evs.iter().filter(|e| e.polarity == Polarity::On).count();
        let mut per = [0usize; 4];
        for e in evs {
            per[self.stream.channel_of(e).index()] += 1;
        }
        let mut s = format!(
            "{} events ({} on, {} off) over {} us",
            evs.len(),
            on,
            evs.len() - on,
            self.duration_us
        );
        for c in ColorChannel::ALL {
            s.push_str(&format!("\n{c}: {}", per[c.index()]));
        }
        s
    }
}

/// Interleaved RGBA bytes of a `[0, 1]` RGB frame.
pub fn rgba(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * frame.width() * frame.height());
    for px in frame.pixels().chunks_exact(frame.channels()) {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        match px {
            [g] => out.extend_from_slice(&[q(*g), q(*g), q(*g), 255]),
            [r, g, b] => out.extend_from_slice(&[q(*r), q(*g), q(*b), 255]),
            _ => unreachable!("frames have one or three channels"),
        }
    }
    out
}
