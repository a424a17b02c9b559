//! DTF1 tensor files.
//!
//! Layout, all little-endian: the magic `DTF1`, a `u32` order `N`, `N`
//! `u64` extents, then the entries as `f64` in row-major order (last index
//! fastest). Masks are DTF1 tensors holding only `0.0` and `1.0`.

use std::fs;
use std::path::{Path, PathBuf};

use tenscomp::tensor::MAX_ORDER;
use tenscomp::{DenseTensor, IndexSet};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"DTF1";

#[derive(Debug, Error)]
pub enum Dtf1Error {
    #[error("bad magic {found:?} at byte 0 (expected \"DTF1\")")]
    BadMagic { found: Vec<u8> },

    #[error("truncated at byte {offset}: {what} needs {needed} bytes, {available} left")]
    Truncated {
        offset: usize,
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("extent at byte {offset} makes the element count overflow")]
    ExtentOverflow { offset: usize },

    #[error("invalid header at byte {offset}: {reason}")]
    InvalidHeader { offset: usize, reason: String },

    #[error("{extra} trailing bytes after the payload, starting at byte {offset}")]
    TrailingBytes { offset: usize, extra: usize },

    #[error("mask entry at byte {offset} is {value}, expected 0 or 1")]
    BadMaskValue { offset: usize, value: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], Dtf1Error> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return Err(Dtf1Error::Truncated {
                offset: self.pos,
                what,
                needed: n,
                available,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
}

/// Canonical DTF1 bytes of `t`.
pub fn encode(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * t.order() + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &e in t.shape() {
        out.extend_from_slice(&(e as u64).to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DenseTensor, Dtf1Error> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Dtf1Error::BadMagic { found: magic.to_vec() });
    }
    let order_at = r.pos;
    let order = u32::from_le_bytes(r.take(4, "order")?.try_into().unwrap()) as usize;
    if order == 0 || order > MAX_ORDER {
        return Err(Dtf1Error::InvalidHeader {
            offset: order_at,
            reason: format!("order {order} outside 1..={MAX_ORDER}"),
        });
    }
    let mut shape = Vec::with_capacity(order);
    let mut count: usize = 1;
    for _ in 0..order {
        let at = r.pos;
        let e = u64::from_le_bytes(r.take(8, "extent")?.try_into().unwrap());
        if e == 0 {
            return Err(Dtf1Error::InvalidHeader {
                offset: at,
                reason: "zero extent".into(),
            });
        }
        let e = usize::try_from(e).map_err(|_| Dtf1Error::ExtentOverflow { offset: at })?;
        count = count
            .checked_mul(e)
            .filter(|c| c.checked_mul(8).is_some())
            .ok_or(Dtf1Error::ExtentOverflow { offset: at })?;
        shape.push(e);
    }
    let payload = r.take(count * 8, "payload")?;
    if r.pos != bytes.len() {
        return Err(Dtf1Error::TrailingBytes {
            offset: r.pos,
            extra: bytes.len() - r.pos,
        });
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DenseTensor::new(shape, data).expect("shape validated above"))
}

pub fn load_tensor(path: &Path) -> Result<DenseTensor, Dtf1Error> {
    let bytes = fs::read(path).map_err(|source| Dtf1Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}

pub fn save_tensor(t: &DenseTensor, path: &Path) -> Result<(), Dtf1Error> {
    fs::write(path, encode(t)).map_err(|source| Dtf1Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_mask(path: &Path) -> Result<IndexSet, Dtf1Error> {
    let t = load_tensor(path)?;
    let header = 8 + 8 * t.order();
    if let Some((k, &value)) = t.data().iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
        return Err(Dtf1Error::BadMaskValue {
            offset: header + 8 * k,
            value,
        });
    }
    Ok(IndexSet::from_indicator(&t).expect("entries checked above"))
}

pub fn save_mask(mask: &IndexSet, path: &Path) -> Result<(), Dtf1Error> {
    save_tensor(&mask.to_indicator(), path)
}
