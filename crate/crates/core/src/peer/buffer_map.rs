//! Buffer maps and their wire encoding.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! offset 0   u64  start_seq
//! offset 8   u32  bit_count
//! offset 12  ceil(bit_count / 8) bytes of payload
//! ```
//!
//! Bit `i` of the payload is `(payload[i / 8] >> (i % 8)) & 1` and covers
//! `start_seq + i`; 1 means the chunk is held. Pad bits in the last byte
//! are zero.

use thiserror::Error;

use crate::Seq;

const HEADER_LEN: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BufferMapError {
    #[error("buffer map truncated: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("buffer map has {extra} unexpected trailing bytes")]
    TrailingBytes { extra: usize },
    #[error("buffer map pad bits are not zero")]
    DirtyPadding,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BufferMap {
    start_seq: Seq,
    bits: Vec<bool>,
}

impl BufferMap {
    pub fn new(start_seq: Seq, bits: Vec<bool>) -> Self {
        BufferMap { start_seq, bits }
    }

    /// Map covering `[start_seq, start_seq + len)` with the given seqs set.
    pub fn from_held(start_seq: Seq, len: usize, held: impl IntoIterator<Item = Seq>) -> Self {
        let mut bits = vec![false; len];
        for seq in held {
            if let Some(i) = seq.checked_sub(start_seq) {
                if let Some(b) = bits.get_mut(i as usize) {
                    *b = true;
                }
            }
        }
        BufferMap { start_seq, bits }
    }

    pub fn start_seq(&self) -> Seq {
        self.start_seq
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// False for seqs outside the covered range.
    pub fn holds(&self, seq: Seq) -> bool {
        seq.checked_sub(self.start_seq)
            .and_then(|i| self.bits.get(usize::try_from(i).ok()?))
            .copied()
            .unwrap_or(false)
    }

    pub fn held(&self) -> impl Iterator<Item = Seq> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| self.start_seq + i as Seq)
    }

    pub fn encode(&self) -> Vec<u8> {
        let payload_len = self.bits.len().div_ceil(8);
        let mut out = Vec::with_capacity(HEADER_LEN + payload_len);
        out.extend_from_slice(&self.start_seq.to_le_bytes());
        out.extend_from_slice(&(self.bits.len() as u32).to_le_bytes());
        out.resize(HEADER_LEN + payload_len, 0);
        for (i, _) in self.bits.iter().enumerate().filter(|(_, b)| **b) {
            out[HEADER_LEN + i / 8] |= 1 << (i % 8);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, BufferMapError> {
        if bytes.len() < HEADER_LEN {
            return Err(BufferMapError::Truncated {
                needed: HEADER_LEN,
                got: bytes.len(),
            });
        }
        let start_seq = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes"));
        let bit_count = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let needed = HEADER_LEN + bit_count.div_ceil(8);
        if bytes.len() < needed {
            return Err(BufferMapError::Truncated {
                needed,
                got: bytes.len(),
            });
        }
        if bytes.len() > needed {
            return Err(BufferMapError::TrailingBytes {
                extra: bytes.len() - needed,
            });
        }
        let payload = &bytes[HEADER_LEN..];
        if bit_count % 8 != 0 {
            let last = payload[payload.len() - 1];
            if last >> (bit_count % 8) != 0 {
                return Err(BufferMapError::DirtyPadding);
            }
        }
        let bits = (0..bit_count)
            .map(|i| (payload[i / 8] >> (i % 8)) & 1 == 1)
            .collect();
        Ok(BufferMap { start_seq, bits })
    }
}
