//! Reading and writing gray-level images, iteration traces and intensity
//! profiles.
//!
//! Supported image formats are PGM (`P2` ASCII and `P5` binary, maxval up to
//! 65535) and 8/16-bit grayscale PNG. The modulus of a loaded image is
//! `maxval + 1` for PGM and `2^bit_depth` for PNG.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::error::RingError;
use crate::meanshift::{IterationTrace, StopReason, TraceEntry};
use crate::ring::RingImage;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("malformed pixel data at byte {offset}: {reason}")]
    MalformedPixel { offset: usize, reason: String },

    #[error("pixel ({x}, {y}) has value {value}, exceeding maxval {maxval}")]
    PixelOutOfRange {
        x: usize,
        y: usize,
        value: u32,
        maxval: u32,
    },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("modulus {modulus} cannot be stored as {format}")]
    FormatMismatch { modulus: u32, format: ImageFormat },

    #[error("PNG decoding failed: {0}")]
    PngDecode(#[from] png::DecodingError),

    #[error("PNG encoding failed: {0}")]
    PngEncode(#[from] png::EncodingError),

    #[error("point ({x}, {y}) lies outside the {width}x{height} image")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("malformed trace CSV at line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },

    #[error(transparent)]
    Ring(#[from] RingError),

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<ImageIoError>,
    },
}

pub type IoResult<T> = std::result::Result<T, ImageIoError>;

impl ImageIoError {
    fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (ImageIoError::Io { .. } | ImageIoError::InFile { .. }) => e,
            other => ImageIoError::InFile {
                path: path.to_path_buf(),
                source: Box::new(other),
            },
        }
    }

    /// The underlying error without file context.
    pub fn root(&self) -> &ImageIoError {
        match self {
            ImageIoError::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageFormat {
    /// Plain `P2` PGM.
    PgmAscii,
    /// Raw `P5` PGM; two big-endian bytes per sample when maxval > 255.
    PgmBinary,
    /// Grayscale PNG, 8-bit for modulus 256 and 16-bit for modulus 65536.
    Png,
}

impl std::fmt::Display for ImageFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ImageFormat::PgmAscii => "PGM (P2)",
            ImageFormat::PgmBinary => "PGM (P5)",
            ImageFormat::Png => "grayscale PNG",
        })
    }
}

impl ImageFormat {
    /// Guess from the file extension: `.png` is PNG, anything else binary PGM.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::PgmBinary,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ImageIoError + '_ {
    move |source| ImageIoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads a PGM or grayscale PNG, detecting the format from its signature.
pub fn load_image(path: impl AsRef<Path>) -> IoResult<RingImage> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    decode_image(&bytes).map_err(|e| e.in_file(path))
}

pub fn decode_image(bytes: &[u8]) -> IoResult<RingImage> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else {
        Err(ImageIoError::Unsupported(
            "expected a PGM (P2/P5) or PNG signature".into(),
        ))
    }
}

/// Writes `image` in `format`; fails if the modulus does not fit the format.
pub fn save_image(image: &RingImage, path: impl AsRef<Path>, format: ImageFormat) -> IoResult<()> {
    let path = path.as_ref();
    let bytes = encode_image(image, format).map_err(|e| e.in_file(path))?;
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn encode_image(image: &RingImage, format: ImageFormat) -> IoResult<Vec<u8>> {
    match format {
        ImageFormat::PgmAscii | ImageFormat::PgmBinary => encode_pgm(image, format),
        ImageFormat::Png => encode_png(image),
    }
}

// ---------------------------------------------------------------------------
// PGM

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    // Next whitespace-delimited decimal token, with its starting offset.
    fn number(&mut self) -> Option<(usize, Result<u64, &'a [u8]>)> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let token = &self.bytes[start..self.pos];
        let parsed = std::str::from_utf8(token)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or(token);
        Some((start, parsed))
    }

    fn header_field(&mut self, name: &str) -> IoResult<u64> {
        match self.number() {
            Some((_, Ok(v))) => Ok(v),
            Some((offset, Err(token))) => Err(ImageIoError::MalformedHeader {
                offset,
                reason: format!("invalid {name} {:?}", String::from_utf8_lossy(token)),
            }),
            None => Err(ImageIoError::MalformedHeader {
                offset: self.pos,
                reason: format!("missing {name}"),
            }),
        }
    }
}

pub fn decode_pgm(bytes: &[u8]) -> IoResult<RingImage> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => {
            return Err(ImageIoError::MalformedHeader {
                offset: 0,
                reason: "expected magic number P2 or P5".into(),
            })
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(ImageIoError::MalformedHeader {
            offset: 2,
            reason: "expected whitespace after magic number".into(),
        });
    }
    let width = cur.header_field("width")?;
    let height = cur.header_field("height")?;
    let maxval_offset = cur.pos;
    let maxval = cur.header_field("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageIoError::MalformedHeader {
            offset: maxval_offset,
            reason: format!("image dimensions {width}x{height} must be positive"),
        });
    }
    if !(1..=65535).contains(&maxval) {
        return Err(ImageIoError::MalformedHeader {
            offset: maxval_offset,
            reason: format!("maxval {maxval} outside 1..=65535"),
        });
    }
    let (width, height, maxval) = (width as usize, height as usize, maxval as u32);
    let count = width
        .checked_mul(height)
        .ok_or_else(|| ImageIoError::MalformedHeader {
            offset: maxval_offset,
            reason: "image dimensions overflow".into(),
        })?;

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(ImageIoError::MalformedHeader {
                offset: cur.pos,
                reason: "expected a single whitespace byte before raster data".into(),
            });
        }
        let start = cur.pos + 1;
        let sample_bytes = if maxval > 255 { 2 } else { 1 };
        let needed = count * sample_bytes;
        let raster =
            bytes
                .get(start..start + needed)
                .ok_or_else(|| ImageIoError::MalformedPixel {
                    offset: bytes.len(),
                    reason: format!(
                        "raster truncated: expected {needed} bytes, found {}",
                        bytes.len().saturating_sub(start)
                    ),
                })?;
        let mut pixels = Vec::with_capacity(count);
        for (i, chunk) in raster.chunks_exact(sample_bytes).enumerate() {
            let value = match *chunk {
                [b] => u32::from(b),
                [hi, lo] => u32::from(u16::from_be_bytes([hi, lo])),
                _ => unreachable!(),
            };
            check_sample(value, maxval, i, width)?;
            pixels.push(value);
        }
        pixels
    } else {
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            match cur.number() {
                Some((_, Ok(v))) => {
                    let value = u32::try_from(v).unwrap_or(u32::MAX);
                    check_sample(value, maxval, i, width)?;
                    pixels.push(value);
                }
                Some((offset, Err(token))) => {
                    return Err(ImageIoError::MalformedPixel {
                        offset,
                        reason: format!("invalid sample {:?}", String::from_utf8_lossy(token)),
                    })
                }
                None => {
                    return Err(ImageIoError::MalformedPixel {
                        offset: cur.pos,
                        reason: format!("expected {count} samples, found {i}"),
                    })
                }
            }
        }
        pixels
    };
    Ok(RingImage::new(width, height, maxval + 1, pixels)?)
}

fn check_sample(value: u32, maxval: u32, index: usize, width: usize) -> IoResult<()> {
    if value > maxval {
        return Err(ImageIoError::PixelOutOfRange {
            x: index % width,
            y: index / width,
            value,
            maxval,
        });
    }
    Ok(())
}

fn encode_pgm(image: &RingImage, format: ImageFormat) -> IoResult<Vec<u8>> {
    if image.modulus() > 65536 {
        return Err(ImageIoError::FormatMismatch {
            modulus: image.modulus(),
            format,
        });
    }
    let maxval = image.modulus() - 1;
    let (magic, binary) = match format {
        ImageFormat::PgmAscii => ("P2", false),
        _ => ("P5", true),
    };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", image.width(), image.height()).into_bytes();
    if binary {
        if maxval > 255 {
            for &v in image.pixels() {
                out.extend_from_slice(&(v as u16).to_be_bytes());
            }
        } else {
            out.extend(image.pixels().iter().map(|&v| v as u8));
        }
    } else {
        let mut text = String::new();
        for row in image.pixels().chunks(image.width()) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    text.push(' ');
                }
                write!(text, "{v}").unwrap();
            }
            text.push('\n');
        }
        out.extend_from_slice(text.as_bytes());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// PNG

fn decode_png(bytes: &[u8]) -> IoResult<RingImage> {
    let mut decoder = png::Decoder::new(io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale {
        return Err(ImageIoError::Unsupported(format!(
            "PNG color type {:?} is not single-channel grayscale",
            info.color_type
        )));
    }
    let bit_depth = info.bit_depth;
    if !matches!(bit_depth, png::BitDepth::Eight | png::BitDepth::Sixteen) {
        return Err(ImageIoError::Unsupported(format!(
            "PNG bit depth {bit_depth:?}; only 8 and 16 are supported"
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![
        0u8;
        reader.output_buffer_size().ok_or_else(|| {
            ImageIoError::Unsupported("PNG image too large".into())
        })?
    ];
    let frame = reader.next_frame(&mut buf)?;
    let data = &buf[..frame.buffer_size()];
    let (modulus, pixels): (u32, Vec<u32>) = match bit_depth {
        png::BitDepth::Eight => (256, data.iter().map(|&b| u32::from(b)).collect()),
        _ => (
            65536,
            data.chunks_exact(2)
                .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
                .collect(),
        ),
    };
    Ok(RingImage::new(width, height, modulus, pixels)?)
}

fn encode_png(image: &RingImage) -> IoResult<Vec<u8>> {
    let (depth, data): (png::BitDepth, Vec<u8>) = match image.modulus() {
        256 => (
            png::BitDepth::Eight,
            image.pixels().iter().map(|&v| v as u8).collect(),
        ),
        65536 => (
            png::BitDepth::Sixteen,
            image
                .pixels()
                .iter()
                .flat_map(|&v| (v as u16).to_be_bytes())
                .collect(),
        ),
        modulus => {
            return Err(ImageIoError::FormatMismatch {
                modulus,
                format: ImageFormat::Png,
            })
        }
    };
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(depth);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&data)?;
        writer.finish()?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Traces

pub const TRACE_HEADER: &str = "k,criterion_value,entropy_after";

/// Renders a trace as CSV. Floats use the shortest representation that
/// parses back to the same `f64`.
pub fn format_trace_csv(trace: &IterationTrace) -> IoResult<String> {
    if trace.entries.is_empty() {
        return Err(ImageIoError::EmptyTrace);
    }
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for e in &trace.entries {
        writeln!(out, "{},{},{}", e.k, e.criterion_value, e.entropy_after).unwrap();
    }
    writeln!(out, "# stopped: {}", trace.stopped_reason).unwrap();
    Ok(out)
}

pub fn write_trace_csv(trace: &IterationTrace, path: impl AsRef<Path>) -> IoResult<()> {
    let path = path.as_ref();
    let text = format_trace_csv(trace).map_err(|e| e.in_file(path))?;
    std::fs::write(path, text).map_err(io_err(path))
}

/// Parses the output of [`format_trace_csv`].
pub fn parse_trace_csv(text: &str) -> IoResult<IterationTrace> {
    let bad = |line: usize, reason: String| ImageIoError::MalformedTrace { line, reason };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, TRACE_HEADER)) => {}
        _ => return Err(bad(1, format!("expected header {TRACE_HEADER:?}"))),
    }
    let mut entries = Vec::new();
    let mut stopped = None;
    for (no, line) in lines {
        if let Some(reason) = line.strip_prefix("# stopped: ") {
            stopped = Some(reason.trim().parse().map_err(|e| bad(no, e))?);
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [k, value, ent] = fields[..] else {
            return Err(bad(
                no,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        };
        entries.push(TraceEntry {
            k: k.parse().map_err(|e| bad(no, format!("k: {e}")))?,
            criterion_value: value
                .parse()
                .map_err(|e| bad(no, format!("criterion_value: {e}")))?,
            entropy_after: ent
                .parse()
                .map_err(|e| bad(no, format!("entropy_after: {e}")))?,
        });
    }
    let stopped_reason: StopReason =
        stopped.ok_or_else(|| bad(text.lines().count(), "missing stop comment".into()))?;
    if entries.is_empty() {
        return Err(ImageIoError::EmptyTrace);
    }
    Ok(IterationTrace {
        entries,
        stopped_reason,
    })
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> IoResult<IterationTrace> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_trace_csv(&text).map_err(|e| e.in_file(path))
}

// ---------------------------------------------------------------------------
// Profiles

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileSample {
    pub t: usize,
    pub value: u32,
}

/// Gray values sampled along a rasterized line segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileLine {
    pub start: (usize, usize),
    pub end: (usize, usize),
    pub samples: Vec<ProfileSample>,
}

impl ProfileLine {
    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        self.samples.iter().map(|s| s.value)
    }
}

/// Integer Bresenham rasterization from `start` to `end`, both inclusive.
pub fn bresenham(start: (usize, usize), end: (usize, usize)) -> Vec<(usize, usize)> {
    let (mut x, mut y) = (start.0 as i64, start.1 as i64);
    let (x1, y1) = (end.0 as i64, end.1 as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut points = Vec::with_capacity(dx.max(-dy) as usize + 1);
    loop {
        points.push((x as usize, y as usize));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    points
}

pub fn extract_profile(
    image: &RingImage,
    start: (usize, usize),
    end: (usize, usize),
) -> IoResult<ProfileLine> {
    for (x, y) in [start, end] {
        if x >= image.width() || y >= image.height() {
            return Err(ImageIoError::OutOfBounds {
                x,
                y,
                width: image.width(),
                height: image.height(),
            });
        }
    }
    let samples = bresenham(start, end)
        .into_iter()
        .enumerate()
        .map(|(t, (x, y))| ProfileSample {
            t,
            value: image.get(x, y),
        })
        .collect();
    Ok(ProfileLine {
        start,
        end,
        samples,
    })
}

pub fn write_profile_csv(profile: &ProfileLine, path: impl AsRef<Path>) -> IoResult<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    (|| {
        writeln!(w, "t,value")?;
        for s in &profile.samples {
            writeln!(w, "{},{}", s.t, s.value)?;
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

/// Reads back a `t,value` profile CSV as values in order.
pub fn read_profile_csv(path: impl AsRef<Path>) -> IoResult<Vec<u32>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut values = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(io_err(path))?;
        let value = line
            .split(',')
            .nth(1)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| {
                ImageIoError::MalformedTrace {
                    line: i + 1,
                    reason: format!("bad profile row {line:?}"),
                }
                .in_file(path)
            })?;
        values.push(value);
    }
    Ok(values)
}
