//! On-disk persistence: prime bitmaps and JSON-lines report logs.
//!
//! Bitmap file layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//!      0     4  magic "HLPB"
//!      4     4  format version (= 1)
//!      8     8  limit
//!     16     8  FNV-1a 64 checksum of the payload
//!     24     -  payload: ceil(limit/8) bytes, integer n at byte
//!               floor((n-1)/8), bit (n-1) mod 8; final partial byte
//!               zero-padded
//! ```
//!
//! Writers go through a temp file and an atomic rename, so a concurrent
//! reader never observes a partial file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::averages::VerificationReport;
use crate::error::{Error, Result};
use crate::sieve::PrimeBitmap;

pub const MAGIC: [u8; 4] = *b"HLPB";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

/// Environment variable consulted for the cache directory when no explicit
/// flag is given.
pub const CACHE_DIR_ENV: &str = "HLAV_CACHE_DIR";

fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &byte in data {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn payload_bytes(pb: &PrimeBitmap) -> Vec<u8> {
    let len = pb.limit().div_ceil(8) as usize;
    let mut bytes = Vec::with_capacity(len);
    for word in pb.words() {
        bytes.extend_from_slice(&word.to_le_bytes());
    }
    bytes.truncate(len);
    bytes
}

/// Write the bitmap to `path` in the format above.
pub fn save_bitmap(pb: &PrimeBitmap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let payload = payload_bytes(pb);
    let mut bytes = Vec::with_capacity(HEADER_LEN + payload.len());
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&pb.limit().to_le_bytes());
    bytes.extend_from_slice(&fnv1a64(&payload).to_le_bytes());
    bytes.extend_from_slice(&payload);

    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, &bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Read a bitmap back, validating magic, version, length, and checksum.
pub fn load_bitmap(path: impl AsRef<Path>) -> Result<PrimeBitmap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() >= 4 && bytes[0..4] != MAGIC {
        return Err(Error::CorruptMagic {
            path: path.to_path_buf(),
            found: [bytes[0], bytes[1], bytes[2], bytes[3]],
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            section: "header",
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.to_path_buf(),
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let limit = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let stored = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if limit == 0 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            section: "payload",
            expected: 1,
            found: 0,
        });
    }

    let expected_len = limit.div_ceil(8);
    let payload = &bytes[HEADER_LEN..];
    if (payload.len() as u64) < expected_len {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            section: "payload",
            expected: expected_len,
            found: payload.len() as u64,
        });
    }
    let payload = &payload[..expected_len as usize];
    let computed = fnv1a64(payload);
    if computed != stored {
        return Err(Error::ChecksumMismatch {
            path: path.to_path_buf(),
            stored,
            computed,
        });
    }

    let num_words = limit.div_ceil(64) as usize;
    let mut words = vec![0u64; num_words];
    for (i, chunk) in payload.chunks(8).enumerate() {
        let mut buf = [0u8; 8];
        buf[..chunk.len()].copy_from_slice(chunk);
        words[i] = u64::from_le_bytes(buf);
    }
    Ok(PrimeBitmap::from_words(limit, words))
}

/// Resolve the cache directory: explicit flag, then `HLAV_CACHE_DIR`, then
/// the platform cache location (`$XDG_CACHE_HOME` or `~/.cache`), then the
/// system temp dir.
pub fn resolve_cache_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(xdg).join("hlav");
    }
    if let Some(home) = std::env::var_os("HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(home).join(".cache").join("hlav");
    }
    std::env::temp_dir().join("hlav")
}

/// Cache filename for a bitmap, keyed by its limit.
pub fn bitmap_cache_path(dir: &Path, limit: u64) -> PathBuf {
    dir.join(format!("primes_{limit}.hlpb"))
}

/// Append reports to a JSON-lines log, one object per line. Creates the file
/// (and parent directories) on first use.
pub fn append_reports(path: impl AsRef<Path>, reports: &[VerificationReport]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
    }
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_err(path, e))?;
    for report in reports {
        let line = serde_json::to_string(report)
            .map_err(|e| io_err(path, std::io::Error::other(e)))?;
        writeln!(file, "{line}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}
