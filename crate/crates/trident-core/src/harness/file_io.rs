//! Checksummed little-endian binary formats for pipeline artifacts.
//!
//! Two formats share the same framing (4-byte magic, `u32` version, payload,
//! trailing CRC-32 of every preceding byte):
//!
//! **`TRDC` — time-range-Doppler cubes.** After the magic and version come
//! `T`, `M`, `N` as `u32`, then `T·M·N` IEEE-754 32-bit values in
//! `[t][m][n]` order (`n` fastest), then the checksum. File size is
//! `20 + 4·T·M·N + 4` bytes. Values are stored in 32-bit precision; a cube
//! whose values already carry only that precision round-trips bitwise.
//! Spectrograms reuse the format with `T = 1` (rows as `M`, columns as `N`).
//!
//! **`RAWS` — raw dechirped baseband recordings.** After the magic and
//! version come the radar parameters (`carrier_hz`, `bandwidth_hz`,
//! `chirp_duration_s`, `sample_rate_hz` as `f64`; `samples_per_chirp`,
//! `chirps_per_frame`, `frames`, `antenna_count`, `antenna_id` as `u32`),
//! then `M·N·T` complex samples as interleaved `f64` (re, im) pairs, then
//! the checksum. Samples keep full double precision so that re-processing a
//! stored recording reproduces the exact cubes of the original run.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::rdp::TrdCube;
use crate::sim::{RadarParams, RawSignal};

const CUBE_MAGIC: &[u8; 4] = b"TRDC";
const RAW_MAGIC: &[u8; 4] = b"RAWS";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes; expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("checksum mismatch; the file is corrupted")]
    ChecksumMismatch,
    #[error("file is truncated")]
    Truncated,
    #[error("file has trailing bytes past the declared payload")]
    TrailingBytes,
    #[error("inconsistent dimensions: {0}")]
    BadDimensions(String),
}

// ---------------------------------------------------------------------------
// shared framing helpers
// ---------------------------------------------------------------------------

fn new_frame(magic: &[u8; 4], capacity: usize) -> Vec<u8> {
    let mut buf = Vec::with_capacity(capacity);
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf
}

fn finish_frame(mut buf: Vec<u8>, path: &Path) -> Result<(), FormatError> {
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    fs::write(path, buf)?;
    Ok(())
}

/// Verifies the trailing CRC and magic/version framing; returns the payload
/// after the 8 framing bytes.
fn open_frame<'a>(buf: &'a [u8], magic: &'static [u8; 4]) -> Result<&'a [u8], FormatError> {
    if buf.len() < 12 {
        return Err(FormatError::Truncated);
    }
    let (body, crc_bytes) = buf.split_at(buf.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().expect("4-byte split"));
    if crc32fast::hash(body) != stored {
        return Err(FormatError::ChecksumMismatch);
    }
    if &body[..4] != magic {
        return Err(FormatError::BadMagic {
            expected: std::str::from_utf8(magic).expect("ascii magic"),
        });
    }
    let version = u32::from_le_bytes(body[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    Ok(&body[8..])
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, at: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.at + n > self.buf.len() {
            return Err(FormatError::Truncated);
        }
        let slice = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn usize32(&mut self) -> Result<usize, FormatError> {
        Ok(self.u32()? as usize)
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn done(&self) -> Result<(), FormatError> {
        if self.at == self.buf.len() {
            Ok(())
        } else {
            Err(FormatError::TrailingBytes)
        }
    }
}

fn push_u32(buf: &mut Vec<u8>, v: usize) -> Result<(), FormatError> {
    let narrowed =
        u32::try_from(v).map_err(|_| FormatError::BadDimensions(format!("{v} exceeds u32")))?;
    buf.extend_from_slice(&narrowed.to_le_bytes());
    Ok(())
}

// ---------------------------------------------------------------------------
// TRDC cubes
// ---------------------------------------------------------------------------

/// Writes `cube` to `path` in the `TRDC` format (values narrowed to f32).
pub fn write_cube(path: &Path, cube: &TrdCube) -> Result<(), FormatError> {
    let mut buf = new_frame(CUBE_MAGIC, 24 + 4 * cube.values().len());
    push_u32(&mut buf, cube.t)?;
    push_u32(&mut buf, cube.m)?;
    push_u32(&mut buf, cube.n)?;
    for &v in cube.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    finish_frame(buf, path)
}

/// Reads a `TRDC` file back into a cube, verifying framing and checksum.
pub fn read_cube(path: &Path) -> Result<TrdCube, FormatError> {
    let buf = fs::read(path)?;
    let payload = open_frame(&buf, CUBE_MAGIC)?;
    let mut cursor = Cursor::new(payload);
    let t = cursor.usize32()?;
    let m = cursor.usize32()?;
    let n = cursor.usize32()?;
    let count = t
        .checked_mul(m)
        .and_then(|tm| tm.checked_mul(n))
        .ok_or_else(|| FormatError::BadDimensions(format!("{t}x{m}x{n} overflows")))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let bytes: [u8; 4] = cursor.take(4)?.try_into().expect("4 bytes");
        data.push(f32::from_le_bytes(bytes) as f64);
    }
    cursor.done()?;
    Ok(TrdCube::from_vec(t, m, n, data))
}

// ---------------------------------------------------------------------------
// RAWS recordings
// ---------------------------------------------------------------------------

/// Writes a raw baseband recording to `path` in the `RAWS` format.
pub fn write_raw_signal(path: &Path, raw: &RawSignal) -> Result<(), FormatError> {
    let p = &raw.params;
    if raw.samples.len() != p.total_samples() {
        return Err(FormatError::BadDimensions(format!(
            "recording holds {} samples but the parameters imply {}",
            raw.samples.len(),
            p.total_samples()
        )));
    }
    let mut buf = new_frame(RAW_MAGIC, 8 + 4 * 8 + 5 * 4 + 16 * raw.samples.len() + 4);
    for v in [p.carrier_hz, p.bandwidth_hz, p.chirp_duration_s, p.sample_rate_hz] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    push_u32(&mut buf, p.samples_per_chirp)?;
    push_u32(&mut buf, p.chirps_per_frame)?;
    push_u32(&mut buf, p.frames)?;
    push_u32(&mut buf, p.antenna_count)?;
    push_u32(&mut buf, raw.antenna_id)?;
    for sample in &raw.samples {
        buf.extend_from_slice(&sample.re.to_le_bytes());
        buf.extend_from_slice(&sample.im.to_le_bytes());
    }
    finish_frame(buf, path)
}

/// Reads a `RAWS` file back into a recording, bit-exactly.
pub fn read_raw_signal(path: &Path) -> Result<RawSignal, FormatError> {
    let buf = fs::read(path)?;
    let payload = open_frame(&buf, RAW_MAGIC)?;
    let mut cursor = Cursor::new(payload);
    let carrier_hz = cursor.f64()?;
    let bandwidth_hz = cursor.f64()?;
    let chirp_duration_s = cursor.f64()?;
    let sample_rate_hz = cursor.f64()?;
    let samples_per_chirp = cursor.usize32()?;
    let chirps_per_frame = cursor.usize32()?;
    let frames = cursor.usize32()?;
    let antenna_count = cursor.usize32()?;
    let antenna_id = cursor.usize32()?;
    let params = RadarParams {
        carrier_hz,
        bandwidth_hz,
        chirp_duration_s,
        samples_per_chirp,
        chirps_per_frame,
        frames,
        sample_rate_hz,
        antenna_count,
    };
    if antenna_id >= antenna_count {
        return Err(FormatError::BadDimensions(format!(
            "antenna id {antenna_id} out of range for {antenna_count} antennas"
        )));
    }
    let count = params.total_samples();
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let re = cursor.f64()?;
        let im = cursor.f64()?;
        samples.push(Complex64::new(re, im));
    }
    cursor.done()?;
    Ok(RawSignal { samples, params, antenna_id })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
