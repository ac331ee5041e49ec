//! Messages that cross the client/server boundary.
//!
//! Mask upload: `u32` little-endian bit count `n`, then `⌈n/8⌉` payload
//! bytes packed LSB-first. Probability broadcast: `n` little-endian `f32`.

use crate::error::{Error, Result};
use crate::trainer::{BinaryMask, ProbVector};

pub const MASK_PREFIX_BYTES: usize = 4;

pub fn encode_mask(mask: &BinaryMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(MASK_PREFIX_BYTES + mask.as_bytes().len());
    out.extend_from_slice(&(mask.len() as u32).to_le_bytes());
    out.extend_from_slice(mask.as_bytes());
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    if bytes.len() < MASK_PREFIX_BYTES {
        return Err(Error::Format("mask message shorter than its length prefix".into()));
    }
    let (prefix, payload) = bytes.split_at(MASK_PREFIX_BYTES);
    let len = u32::from_le_bytes(prefix.try_into().unwrap()) as usize;
    BinaryMask::from_bytes(len, payload.to_vec())
}

pub fn encode_probs(p: &ProbVector) -> Vec<u8> {
    p.as_slice().iter().flat_map(|&x| (x as f32).to_le_bytes()).collect()
}

pub fn decode_probs(bytes: &[u8]) -> Result<ProbVector> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::Format(format!(
            "broadcast of {} bytes is not a whole number of f32",
            bytes.len()
        )));
    }
    let p = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    ProbVector::new(p)
}
