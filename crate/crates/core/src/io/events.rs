//! Event stream files.
//!
//! Text: one `t x y p` line per event, `p` in `{0, 1}`. Timestamps are integer
//! microseconds, or seconds when the first event line has a fractional
//! timestamp. Blank lines and `#` lines are skipped.
//!
//! Binary (little-endian):
//!
//! ```text
//! header  16 bytes  magic "CEVTEVT\0" | version u16 | width u16 | height u16 | phase u8 | reserved u8
//! record  13 bytes  t u64 | x u16 | y u16 | polarity i8 (+1 / -1)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::event::{BayerPattern, Event, EventStream, Polarity};

pub const EVENT_MAGIC: &[u8; 8] = b"CEVTEVT\0";
pub const EVENT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Text,
    Binary,
}

impl std::str::FromStr for EventFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(EventFormat::Text),
            "binary" | "bin" => Ok(EventFormat::Binary),
            other => Err(Error::invalid(format!("unknown event format `{other}`"))),
        }
    }
}

/// How to interpret a file beyond what the file itself records.
#[derive(Debug, Clone, Default)]
pub struct ReadOptions {
    /// Sort out-of-order input instead of rejecting it.
    pub sort: bool,
    /// Sensor size for text input. When absent it is inferred from the
    /// largest coordinates, rounded up to whole Bayer tiles.
    pub geometry: Option<(u16, u16)>,
    /// Bayer phase for text input.
    pub pattern: BayerPattern,
}

/// Binary if the file starts with the event magic, text otherwise.
pub fn detect_format(path: &Path) -> Result<EventFormat> {
    use std::io::Read;
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 8];
    let mut got = 0;
    while got < magic.len() {
        let n = f.read(&mut magic[got..]).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        got += n;
    }
    Ok(if got == 8 && &magic == EVENT_MAGIC {
        EventFormat::Binary
    } else {
        EventFormat::Text
    })
}

pub fn read_events(path: &Path, format: EventFormat, opts: &ReadOptions) -> Result<EventStream> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        EventFormat::Binary => decode_binary(&bytes, path, opts.sort),
        EventFormat::Text => {
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::Format {
                path: path.into(),
                msg: "text event file is not UTF-8".into(),
            })?;
            parse_text(text, path, opts)
        }
    }
}

pub fn write_events(stream: &EventStream, path: &Path, format: EventFormat) -> Result<()> {
    let bytes = match format {
        EventFormat::Binary => encode_binary(stream),
        EventFormat::Text => encode_text(stream).into_bytes(),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_binary(stream: &EventStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * stream.len());
    out.extend_from_slice(EVENT_MAGIC);
    out.extend_from_slice(&EVENT_VERSION.to_le_bytes());
    out.extend_from_slice(&stream.width().to_le_bytes());
    out.extend_from_slice(&stream.height().to_le_bytes());
    out.push(stream.pattern().phase_code());
    out.push(0);
    for e in stream.events() {
        out.extend_from_slice(&e.t.to_le_bytes());
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.push(e.polarity.sign() as u8);
    }
    out
}

fn finish(
    width: u16,
    height: u16,
    pattern: BayerPattern,
    mut events: Vec<Event>,
    sort: bool,
    path: &Path,
    position: impl Fn(usize) -> String,
) -> Result<EventStream> {
    if let Some(i) = events.iter().position(|e| e.x >= width || e.y >= height) {
        return Err(Error::Format {
            path: path.into(),
            msg: format!(
                "{}: coordinate ({}, {}) outside {}x{} sensor",
                position(i),
                events[i].x,
                events[i].y,
                width,
                height
            ),
        });
    }
    if sort {
        events.sort_unstable();
    } else if let Some(i) = events.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::Format {
            path: path.into(),
            msg: format!(
                "{}: event out of (t, y, x, polarity) order (use --sort)",
                position(i + 1)
            ),
        });
    }
    EventStream::new(width, height, pattern, events)
}

pub fn decode_binary(bytes: &[u8], path: &Path, sort: bool) -> Result<EventStream> {
    let bad = |msg: String| Error::Format {
        path: path.into(),
        msg,
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != EVENT_MAGIC {
        return Err(bad("not a binary event file (bad magic)".into()));
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let version = u16_at(8);
    if version != EVENT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let (width, height) = (u16_at(10), u16_at(12));
    let pattern = BayerPattern::from_phase_code(bytes[14])
        .ok_or_else(|| bad(format!("invalid bayer phase {}", bytes[14])))?;
    let body = &bytes[HEADER_LEN..];
    if !body.len().is_multiple_of(RECORD_LEN) {
        return Err(bad(format!(
            "truncated file: {} trailing bytes after {} records",
            body.len() % RECORD_LEN,
            body.len() / RECORD_LEN
        )));
    }
    let events = body
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(i, r)| {
            let t = u64::from_le_bytes(r[..8].try_into().expect("8 bytes"));
            let x = u16::from_le_bytes([r[8], r[9]]);
            let y = u16::from_le_bytes([r[10], r[11]]);
            let polarity = Polarity::from_sign(r[12] as i8)
                .ok_or_else(|| bad(format!("record {i}: invalid polarity byte {}", r[12])))?;
            Ok(Event::new(t, x, y, polarity))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(width, height, pattern, events, sort, path, |i| {
        format!("record {i}")
    })
}

pub fn encode_text(stream: &EventStream) -> String {
    let mut out = String::with_capacity(stream.len() * 16);
    for e in stream.events() {
        let p = u8::from(e.polarity == Polarity::On);
        writeln!(out, "{} {} {} {}", e.t, e.x, e.y, p).expect("writing to a String");
    }
    out
}

fn parse_seconds(tok: &str) -> Option<u64> {
    let s: f64 = tok.parse().ok()?;
    (s.is_finite() && s >= 0.0).then(|| (s * 1e6).round() as u64)
}

pub fn parse_text(text: &str, path: &Path, opts: &ReadOptions) -> Result<EventStream> {
    let mut events = Vec::new();
    let mut lines_of = Vec::new();
    let mut seconds: Option<bool> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.into(),
            line,
            msg,
        };
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(err(format!(
                "expected `t x y p`, got {} field(s)",
                toks.len()
            )));
        }
        let in_seconds = *seconds.get_or_insert_with(|| toks[0].contains(['.', 'e', 'E']));
        let t = if in_seconds {
            parse_seconds(toks[0])
        } else {
            toks[0].parse().ok()
        }
        .ok_or_else(|| err(format!("bad timestamp `{}`", toks[0])))?;
        let x: u16 = toks[1]
            .parse()
            .map_err(|_| err(format!("bad x `{}`", toks[1])))?;
        let y: u16 = toks[2]
            .parse()
            .map_err(|_| err(format!("bad y `{}`", toks[2])))?;
        let polarity = match toks[3] {
            "1" => Polarity::On,
            "0" => Polarity::Off,
            other => return Err(err(format!("polarity must be 0 or 1, got `{other}`"))),
        };
        events.push(Event::new(t, x, y, polarity));
        lines_of.push(line);
    }
    let (width, height) = match opts.geometry {
        Some(g) => g,
        None => {
            let round_up = |m: u16| (m.saturating_add(2) & !1).max(2);
            let mx = events.iter().map(|e| e.x).max().unwrap_or(0);
            let my = events.iter().map(|e| e.y).max().unwrap_or(0);
            (round_up(mx), round_up(my))
        }
    };
    finish(width, height, opts.pattern, events, opts.sort, path, |i| {
        format!("line {}", lines_of[i])
    })
}
