//! RIFF/WAVE reading and writing for 16-bit PCM and 32-bit float data.
//!
//! Files are written with a plain 16-byte `fmt ` chunk (format code 1 or 3)
//! followed by the `data` chunk. Reading also accepts
//! `WAVE_FORMAT_EXTENSIBLE` headers wrapping either encoding and skips
//! unknown chunks.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::signal::{AudioSignal, SignalError};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;
const PCM16_SCALE: f64 = 32768.0;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("malformed wav container: {0}")]
    Malformed(String),
    #[error("unsupported wav encoding: format code {format}, {bits} bits per sample")]
    Unsupported { format: u16, bits: u16 },
    #[error("truncated wav data: {0}")]
    Truncated(String),
    #[error("invalid channel layout: {0}")]
    Layout(String),
    #[error("invalid samples: {0}")]
    Samples(#[from] SignalError),
    #[error("wav i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    Pcm16,
    Float32,
}

impl Encoding {
    fn format_code(self) -> u16 {
        match self {
            Encoding::Pcm16 => FORMAT_PCM,
            Encoding::Float32 => FORMAT_FLOAT,
        }
    }

    fn bytes_per_sample(self) -> usize {
        match self {
            Encoding::Pcm16 => 2,
            Encoding::Float32 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavDescriptor {
    pub sample_rate: u32,
    pub channels: u16,
    pub encoding: Encoding,
    pub frames: usize,
}

impl WavDescriptor {
    /// Descriptor matching a set of equally long channels.
    pub fn for_signals(signals: &[AudioSignal], encoding: Encoding) -> Self {
        Self {
            sample_rate: signals.first().map_or(1, AudioSignal::sample_rate),
            channels: signals.len() as u16,
            encoding,
            frames: signals.first().map_or(0, AudioSignal::len),
        }
    }
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<(Vec<AudioSignal>, WavDescriptor), WavError> {
    decode_wav(&fs::read(path)?)
}

/// Decodes a complete wav file, one signal per channel.
pub fn decode_wav(bytes: &[u8]) -> Result<(Vec<AudioSignal>, WavDescriptor), WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::Malformed("missing RIFF/WAVE header".into()));
    }
    let mut fmt: Option<(u16, u16, u32, u16, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = le_u32(bytes, pos + 4) as usize;
        let body = pos + 8;
        if id == b"data" {
            if fmt.is_none() {
                return Err(WavError::Malformed("data chunk precedes fmt chunk".into()));
            }
            if body + size > bytes.len() {
                return Err(WavError::Truncated(format!(
                    "data chunk declares {size} bytes, {} present",
                    bytes.len() - body
                )));
            }
            data = Some(&bytes[body..body + size]);
            break;
        }
        if body + size > bytes.len() {
            return Err(WavError::Malformed(format!(
                "chunk {:?} overruns the file",
                String::from_utf8_lossy(id)
            )));
        }
        if id == b"fmt " {
            if size < 16 {
                return Err(WavError::Malformed(format!("fmt chunk of {size} bytes")));
            }
            let mut format = le_u16(bytes, body);
            let channels = le_u16(bytes, body + 2);
            let rate = le_u32(bytes, body + 4);
            let block_align = le_u16(bytes, body + 12);
            let bits = le_u16(bytes, body + 14);
            if format == FORMAT_EXTENSIBLE {
                if size < 40 {
                    return Err(WavError::Malformed("short extensible fmt chunk".into()));
                }
                // first two bytes of the sub-format GUID carry the format code
                format = le_u16(bytes, body + 24);
            }
            fmt = Some((format, channels, rate, block_align, bits));
        }
        pos = body + size + (size & 1);
    }
    let Some((format, channels, sample_rate, block_align, bits)) = fmt else {
        return Err(WavError::Malformed("no fmt chunk".into()));
    };
    let Some(data) = data else {
        return Err(WavError::Malformed("no data chunk".into()));
    };
    let encoding = match (format, bits) {
        (FORMAT_PCM, 16) => Encoding::Pcm16,
        (FORMAT_FLOAT, 32) => Encoding::Float32,
        _ => return Err(WavError::Unsupported { format, bits }),
    };
    if channels == 0 || sample_rate == 0 {
        return Err(WavError::Malformed(format!(
            "{channels} channels at {sample_rate} Hz"
        )));
    }
    let frame_bytes = usize::from(channels) * encoding.bytes_per_sample();
    if usize::from(block_align) != frame_bytes {
        return Err(WavError::Malformed(format!(
            "block align {block_align}, expected {frame_bytes}"
        )));
    }
    if data.len() % frame_bytes != 0 {
        return Err(WavError::Truncated(format!(
            "{} data bytes is not a whole number of {frame_bytes}-byte frames",
            data.len()
        )));
    }
    let frames = data.len() / frame_bytes;
    let mut channel_samples = vec![Vec::with_capacity(frames); usize::from(channels)];
    let width = encoding.bytes_per_sample();
    for (i, chunk) in data.chunks_exact(width).enumerate() {
        let v = match encoding {
            Encoding::Pcm16 => f64::from(i16::from_le_bytes([chunk[0], chunk[1]])) / PCM16_SCALE,
            Encoding::Float32 => f64::from(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]])),
        };
        channel_samples[i % usize::from(channels)].push(v);
    }
    let signals = channel_samples
        .into_iter()
        .map(|s| AudioSignal::new(s, sample_rate))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((
        signals,
        WavDescriptor {
            sample_rate,
            channels,
            encoding,
            frames,
        },
    ))
}

/// Rounds half away from zero and saturates to the 16-bit range.
pub fn quantize_pcm16(v: f64) -> i16 {
    (v * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

pub fn write_wav(signals: &[AudioSignal], descriptor: &WavDescriptor, path: impl AsRef<Path>) -> Result<(), WavError> {
    let bytes = encode_wav(signals, descriptor)?;
    fs::write(path, bytes)?;
    Ok(())
}

/// Encodes channels into a wav file image. Samples outside [-1, 1] are
/// clamped when writing 16-bit PCM.
pub fn encode_wav(signals: &[AudioSignal], descriptor: &WavDescriptor) -> Result<Vec<u8>, WavError> {
    if signals.is_empty() || signals.len() != usize::from(descriptor.channels) {
        return Err(WavError::Layout(format!(
            "{} signals for {} channels",
            signals.len(),
            descriptor.channels
        )));
    }
    let frames = signals[0].len();
    if signals.iter().any(|s| s.len() != frames) {
        return Err(WavError::Layout("channels differ in length".into()));
    }
    if signals.iter().any(|s| s.sample_rate() != descriptor.sample_rate) {
        return Err(WavError::Layout("sample rate differs from the descriptor".into()));
    }
    let encoding = descriptor.encoding;
    let width = encoding.bytes_per_sample();
    let frame_bytes = signals.len() * width;
    let data_len = frames * frame_bytes;
    let riff_len = 4 + (8 + 16) + (8 + data_len + (data_len & 1));
    if riff_len > u32::MAX as usize {
        return Err(WavError::Layout("data exceeds the 4 GiB RIFF limit".into()));
    }

    let mut out = Vec::with_capacity(8 + riff_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&encoding.format_code().to_le_bytes());
    out.extend_from_slice(&descriptor.channels.to_le_bytes());
    out.extend_from_slice(&descriptor.sample_rate.to_le_bytes());
    out.extend_from_slice(&(descriptor.sample_rate * frame_bytes as u32).to_le_bytes());
    out.extend_from_slice(&(frame_bytes as u16).to_le_bytes());
    out.extend_from_slice(&(width as u16 * 8).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    let mut clamped = 0usize;
    for n in 0..frames {
        for s in signals {
            let v = s.samples()[n];
            match encoding {
                Encoding::Pcm16 => {
                    if v.abs() > 1.0 {
                        clamped += 1;
                    }
                    out.extend_from_slice(&quantize_pcm16(v).to_le_bytes());
                }
                Encoding::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            }
        }
    }
    if data_len & 1 == 1 {
        out.push(0);
    }
    if clamped > 0 {
        log::warn!("clamped {clamped} samples outside [-1, 1] while writing 16-bit pcm");
    }
    Ok(out)
}
