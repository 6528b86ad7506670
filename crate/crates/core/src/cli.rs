//! The `cevt` command-line tool.
//!
//! Flags override config-file values, which override built-in defaults.
//! Failures print one line, `error: <code>: <detail>`, and remove any output
//! files the command had already written.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::colorpipe::{
    demosaic_bilinear, reconstruct_color_demosaic, reconstruct_color_quarter, tone_map,
};
use crate::config::{parse_config, Config};
use crate::error::{Error, Result};
use crate::event::{BayerPattern, ColorChannel, EventStream, Frame, Polarity};
use crate::filters::{BilateralParams, BILATERAL_RADIUS};
use crate::io::{self, EventFormat, ReadOptions};
use crate::representation::voxelize_stream;
use crate::simulator::simulate;

#[derive(Debug, Parser)]
#[command(
    name = "cevt",
    version,
    about = "Color event camera simulation and reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate color events from an RGB frame sequence
    Simulate(SimulateArgs),
    /// Reconstruct color frames from an event file
    Reconstruct(ReconstructArgs),
    /// Write voxel-grid tensors for fixed-size event batches
    Voxelize(VoxelizeArgs),
    /// Bilinear demosaicing of a single mosaic image
    Demosaic(DemosaicArgs),
    /// Print event stream statistics
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Binary,
    Text,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory of PPM frames, or a file listing them
    #[arg(long)]
    pub frames: PathBuf,
    /// One integer microsecond timestamp per frame
    #[arg(long)]
    pub timestamps: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub c_pos: Option<f64>,
    #[arg(long)]
    pub c_neg: Option<f64>,
    #[arg(long)]
    pub refractory_us: Option<u64>,
    #[arg(long)]
    pub bayer_phase: Option<String>,
    #[arg(long, value_enum, default_value = "binary")]
    pub format: OutFormat,
}

/// Options for reading an event file. Geometry and phase only apply to text
/// files; binary files carry their own.
#[derive(Debug, Args)]
pub struct EventInput {
    #[arg(long)]
    pub events: PathBuf,
    /// Sort out-of-order input instead of rejecting it
    #[arg(long)]
    pub sort: bool,
    #[arg(long)]
    pub width: Option<u16>,
    #[arg(long)]
    pub height: Option<u16>,
    #[arg(long)]
    pub bayer_phase: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Hf,
    Integrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorPath {
    MosaicDemosaic,
    Quarter,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: EventInput,
    #[arg(long, value_enum, default_value = "hf")]
    pub method: Method,
    /// Default: mosaic-demosaic for hf, quarter for integrate
    #[arg(long, value_enum)]
    pub color: Option<ColorPath>,
    /// Sample uniformly over the stream's time span; otherwise one frame per
    /// integration window of events
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VoxelizeArgs {
    #[command(flatten)]
    pub input: EventInput,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Re-read every written grid and check its mass
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemosaicArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub bayer_phase: Option<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: EventInput,
}

/// Files written so far by a command; deleted unless the command succeeds.
#[derive(Default)]
struct Outputs {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn track(&mut self, p: impl Into<PathBuf>) {
        self.paths.push(p.into());
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.paths {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(Config::default()),
    }
}

fn parse_phase(flag: Option<&str>, fallback: BayerPattern) -> Result<BayerPattern> {
    flag.map_or(Ok(fallback), str::parse)
}

fn out_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

pub fn load_events(input: &EventInput, fallback_pattern: BayerPattern) -> Result<EventStream> {
    let format = io::detect_format(&input.events)?;
    let geometry = match (input.width, input.height) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => None,
        _ => {
            return Err(Error::invalid(
                "--width and --height must be given together",
            ))
        }
    };
    let opts = ReadOptions {
        sort: input.sort,
        geometry,
        pattern: parse_phase(input.bayer_phase.as_deref(), fallback_pattern)?,
    };
    io::read_events(&input.events, format, &opts)
}

/// Summary counts of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamStats {
    pub total: usize,
    pub duration_us: u64,
    pub on: usize,
    pub off: usize,
    /// Indexed by [`ColorChannel::index`].
    pub per_channel: [usize; 4],
    /// Largest event count in any 10 ms window, as events per second.
    pub peak_rate_10ms: f64,
}

pub const PEAK_WINDOW_US: u64 = 10_000;

pub fn stream_stats(stream: &EventStream) -> StreamStats {
    let evs = stream.events();
    let mut per_channel = [0usize; 4];
    let mut on = 0;
    for e in evs {
        per_channel[stream.channel_of(e).index()] += 1;
        on += usize::from(e.polarity == Polarity::On);
    }
    let mut peak = 0;
    let mut lo = 0;
    for hi in 0..evs.len() {
        while evs[hi].t - evs[lo].t >= PEAK_WINDOW_US {
            lo += 1;
        }
        peak = peak.max(hi + 1 - lo);
    }
    StreamStats {
        total: evs.len(),
        duration_us: stream.time_span().map_or(0, |(a, b)| b - a),
        on,
        off: evs.len() - on,
        per_channel,
        peak_rate_10ms: peak as f64 * 1e6 / PEAK_WINDOW_US as f64,
    }
}

/// Sample times for a reconstruction.
///
/// With `fps`, `n = max(1, round(span * fps))` times spaced evenly up to and
/// including the last event. Without it, the timestamp closing every full
/// window of `window_events`. Both fall back to a single sample at the end of
/// the stream when they would otherwise be empty.
pub fn sample_times(
    stream: &EventStream,
    fps: Option<f64>,
    window_events: usize,
) -> Result<Vec<u64>> {
    let (t0, t1) = stream.time_span().unwrap_or((0, 0));
    let times = match fps {
        Some(f) if !(f.is_finite() && f > 0.0) => {
            return Err(Error::invalid(format!("--fps must be positive, got {f}")));
        }
        Some(f) => {
            let span = t1 - t0;
            let n = ((span as f64 * 1e-6 * f).round() as u64).max(1);
            (1..=n)
                .map(|k| t0 + ((span as u128 * k as u128) / n as u128) as u64)
                .collect()
        }
        None => stream
            .events()
            .chunks_exact(window_events.max(1))
            .map(|w| w[w.len() - 1].t)
            .collect::<Vec<_>>(),
    };
    Ok(if times.is_empty() { vec![t1] } else { times })
}

fn run_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(v) = a.c_pos {
        cfg.sim.c_pos = v;
    }
    if let Some(v) = a.c_neg {
        cfg.sim.c_neg = v;
    }
    if let Some(v) = a.refractory_us {
        cfg.sim.refractory_us = v;
    }
    let pattern = parse_phase(a.bayer_phase.as_deref(), cfg.pattern)?;
    if !a.timestamps.is_file() {
        return Err(Error::io(
            &a.timestamps,
            std::io::Error::new(std::io::ErrorKind::NotFound, "timestamps file not found"),
        ));
    }
    let frames = io::read_frames(&a.frames, &a.timestamps)?;
    let stream = simulate(&frames, pattern, &cfg.sim)?;

    let mut outputs = Outputs::default();
    outputs.track(&a.out);
    let format = match a.format {
        OutFormat::Binary => EventFormat::Binary,
        OutFormat::Text => EventFormat::Text,
    };
    io::write_events(&stream, &a.out, format)?;

    let stats = stream_stats(&stream);
    let rate = if stats.duration_us > 0 {
        stats.total as f64 / (stats.duration_us as f64 * 1e-6)
    } else {
        0.0
    };
    writeln!(out, "{} events", stats.total).map_err(out_err)?;
    writeln!(out, "duration: {} us", stats.duration_us).map_err(out_err)?;
    writeln!(out, "mean rate: {rate:.1} ev/s").map_err(out_err)?;
    writeln!(out, "bayer phase: {pattern}").map_err(out_err)?;
    outputs.commit();
    Ok(())
}

fn echo_bilateral(b: &BilateralParams) -> String {
    let size = 2 * BILATERAL_RADIUS + 1;
    let range = b
        .sigma_range
        .map_or("auto".to_string(), |s| format!("{s:?}"));
    format!(
        "bilateral = {size}x{size} sigma_spatial = {:?} sigma_range = {range}",
        b.sigma_spatial
    )
}

fn run_reconstruct(a: &ReconstructArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let color = a.color.unwrap_or(match a.method {
        Method::Hf => ColorPath::MosaicDemosaic,
        Method::Integrate => ColorPath::Quarter,
    });
    if (a.method, color) == (Method::Integrate, ColorPath::MosaicDemosaic) {
        return Err(Error::invalid(
            "method `integrate` smooths across the mosaic; use --color quarter",
        ));
    }
    let stream = load_events(&a.input, cfg.pattern)?;
    let ts = sample_times(&stream, a.fps, cfg.integration.window_events)?;

    let method_name = match a.method {
        Method::Hf => "hf",
        Method::Integrate => "integrate",
    };
    let color_name = match color {
        ColorPath::MosaicDemosaic => "mosaic-demosaic",
        ColorPath::Quarter => "quarter",
    };
    writeln!(out, "method: {method_name}").map_err(out_err)?;
    writeln!(out, "color: {color_name}").map_err(out_err)?;
    match a.method {
        Method::Hf => {
            writeln!(out, "hf.cutoff = {:?}", cfg.hf.cutoff).map_err(out_err)?;
            writeln!(out, "hf.cutoff_per_event = {:?}", cfg.hf.cutoff_per_event)
                .map_err(out_err)?;
            writeln!(out, "hf.contrast_step = {:?}", cfg.hf.contrast_step).map_err(out_err)?;
            writeln!(out, "{}", echo_bilateral(&cfg.bilateral)).map_err(out_err)?;
        }
        Method::Integrate => {
            writeln!(out, "mr.window_events = {}", cfg.integration.window_events)
                .map_err(out_err)?;
            writeln!(
                out,
                "mr.contrast_step = {:?}",
                cfg.integration.contrast_step
            )
            .map_err(out_err)?;
            writeln!(out, "mr.decay = {:?}", cfg.integration.decay).map_err(out_err)?;
        }
    }

    let frames: Vec<Frame> = match (a.method, color) {
        (Method::Hf, ColorPath::MosaicDemosaic) => {
            reconstruct_color_demosaic(&stream, &cfg.hf, Some(&cfg.bilateral), &ts)?
        }
        (Method::Hf, ColorPath::Quarter) => reconstruct_color_quarter(&stream, &cfg.hf, &ts)?
            .iter()
            .map(|f| cfg.bilateral.apply(f))
            .collect::<Result<_>>()?,
        (Method::Integrate, _) => reconstruct_color_quarter(&stream, &cfg.integration, &ts)?,
    };
    let display: Vec<Frame> = frames.iter().map(tone_map).collect();

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut outputs = Outputs::default();
    let mut stamps = String::new();
    for (i, f) in display.iter().enumerate() {
        let p = a.out.join(format!("frame_{i:05}.ppm"));
        outputs.track(&p);
        io::write_pnm(f, &p)?;
        stamps.push_str(&format!("{}\n", f.t));
    }
    let ts_path = a.out.join(io::frames::TIMESTAMPS_FILE);
    outputs.track(&ts_path);
    std::fs::write(&ts_path, stamps).map_err(|e| Error::io(&ts_path, e))?;
    writeln!(out, "frames: {}", display.len()).map_err(out_err)?;
    outputs.commit();
    Ok(())
}

fn run_voxelize(a: &VoxelizeArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let batch = a.batch.unwrap_or(cfg.voxel_batch);
    let bins = a.bins.unwrap_or(cfg.voxel_bins);
    if batch < 1 {
        return Err(Error::invalid("--batch must be at least 1"));
    }
    if bins < 1 {
        return Err(Error::invalid("--bins must be at least 1"));
    }
    let stream = load_events(&a.input, cfg.pattern)?;
    writeln!(out, "bins = {bins}").map_err(out_err)?;
    writeln!(out, "batch = {batch}").map_err(out_err)?;
    let grids = voxelize_stream(&stream, batch, bins)?;

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut outputs = Outputs::default();
    let mut paths = Vec::with_capacity(grids.len());
    for (i, g) in grids.iter().enumerate() {
        let p = a.out.join(format!("voxel_{i:05}.bin"));
        outputs.track(&p);
        io::write_voxel_grid(g, &p)?;
        paths.push(p);
    }
    writeln!(out, "grids: {}", grids.len()).map_err(out_err)?;
    if a.verify {
        for (i, p) in paths.iter().enumerate() {
            let g = io::read_voxel_grid(p)?;
            let batch_events = &stream.events()[i * batch..(i + 1) * batch];
            let want: i64 = batch_events
                .iter()
                .map(|e| i64::from(e.polarity.sign()))
                .sum();
            let tol = 1e-6 * batch as f64;
            if (g.sum() - want as f64).abs() > tol {
                return Err(Error::invalid(format!(
                    "{}: grid sum {} differs from polarity sum {want}",
                    p.display(),
                    g.sum()
                )));
            }
        }
        writeln!(out, "verified: {} grids", paths.len()).map_err(out_err)?;
    }
    outputs.commit();
    Ok(())
}

fn run_demosaic(a: &DemosaicArgs, out: &mut dyn Write) -> Result<()> {
    let pattern = parse_phase(a.bayer_phase.as_deref(), BayerPattern::default())?;
    let bytes = std::fs::read(&a.input).map_err(|e| Error::io(&a.input, e))?;
    if !bytes.starts_with(b"P5") {
        return Err(Error::Format {
            path: a.input.clone(),
            msg: "expected a binary PGM (P5) mosaic".into(),
        });
    }
    let mosaic = io::frames::decode_pnm(&bytes, &a.input, 0)?;
    let rgb = demosaic_bilinear(&mosaic, pattern)?;
    let mut outputs = Outputs::default();
    outputs.track(&a.out);
    io::write_pnm(&rgb, &a.out)?;
    writeln!(
        out,
        "demosaiced {}x{} ({pattern})",
        rgb.width(),
        rgb.height()
    )
    .map_err(out_err)?;
    outputs.commit();
    Ok(())
}

fn run_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let stream = load_events(&a.input, BayerPattern::default())?;
    let s = stream_stats(&stream);
    let mut text = format!(
        "events: {}\nduration: {} us\non: {}\noff: {}\n",
        s.total, s.duration_us, s.on, s.off
    );
    for c in ColorChannel::ALL {
        let n = s.per_channel[c.index()];
        let pct = if s.total > 0 {
            100.0 * n as f64 / s.total as f64
        } else {
            0.0
        };
        text.push_str(&format!("{c}: {n} ({pct:.2}%)\n"));
    }
    text.push_str(&format!(
        "peak rate (10 ms): {:.1} ev/s\n",
        s.peak_rate_10ms
    ));
    out.write_all(text.as_bytes()).map_err(out_err)
}

pub fn run_command(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a, out),
        Command::Reconstruct(a) => run_reconstruct(a, out),
        Command::Voxelize(a) => run_voxelize(a, out),
        Command::Demosaic(a) => run_demosaic(a, out),
        Command::Stats(a) => run_stats(a, out),
    }
}

/// Exit status for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 2,
        _ => 1,
    }
}

/// Parse arguments, run inside a pool sized by `CEVT_THREADS`, and return
/// the process exit status. Diagnostics go to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let first = e.to_string();
            let line = first
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            let _ = writeln!(err, "error: usage: {line}");
            return 2;
        }
    };
    let mut buffer = Vec::new();
    let result = crate::parallel::threads_from_env()
        .and_then(crate::parallel::thread_pool)
        .and_then(|pool| pool.install(|| run_command(&cli, &mut buffer)));
    let _ = out.write_all(&buffer);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "error: {}: {detail}", e.code());
            exit_code(&e)
        }
    }
}
