//! On-disk compressed-row format.
//!
//! All multi-byte header fields are little-endian:
//!
//! ```text
//! offset size field
//!      0    4 magic "NBQC"
//!      4    2 version (u16) = 1
//!      6    1 d (u8)
//!      7    1 d_v (u8)
//!      8    2 d_c (u16)
//!     10    8 hn (u64)
//!     18    8 r (u64)
//!     26    8 seed (u64)
//!     34    1 rng_id (u8)
//! ```
//!
//! The body has three sections, each starting on a byte boundary:
//!
//! 1. `hn·d_v` nonzero symbols, `ceil(d/8)` bytes each;
//! 2. `hn·d_v` column indices, bit-packed at `ceil(log2(hn))` bits each;
//! 3. `r + 1` row pointers, bit-packed at `bitlen(d_v·hn)` bits each.
//!
//! Bit-packed integers are written least-significant bit first into
//! consecutive bytes, also starting from the least-significant bit; the last
//! byte of a section is zero-padded.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::code::LdpcCode;

pub const MAGIC: &[u8; 4] = b"NBQC";
pub const VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 35;

/// Bits needed for any value in 0..=max (at least 1).
pub fn bit_length(max: u64) -> u32 {
    (u64::BITS - max.leading_zeros()).max(1)
}

pub fn column_index_bits(hn: usize) -> u32 {
    bit_length(hn.saturating_sub(1) as u64)
}

pub fn row_pointer_bits(hn: usize, d_v: u32) -> u32 {
    bit_length(hn as u64 * u64::from(d_v))
}

pub fn symbol_bytes(d: u32) -> usize {
    d.div_ceil(8) as usize
}

/// Exact encoded size in bytes.
pub fn encoded_len(code: &LdpcCode) -> usize {
    let nnz = code.nnz();
    HEADER_BYTES
        + nnz * symbol_bytes(code.d)
        + (nnz * column_index_bits(code.hn) as usize).div_ceil(8)
        + ((code.r + 1) * row_pointer_bits(code.hn, code.d_v) as usize).div_ceil(8)
}

struct BitWriter<'a> {
    out: &'a mut Vec<u8>,
    acc: u128,
    filled: u32,
}

impl<'a> BitWriter<'a> {
    fn new(out: &'a mut Vec<u8>) -> Self {
        Self { out, acc: 0, filled: 0 }
    }

    fn put(&mut self, value: u64, width: u32) {
        debug_assert!(width == 64 || value >> width == 0);
        self.acc |= u128::from(value) << self.filled;
        self.filled += width;
        while self.filled >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.filled -= 8;
        }
    }

    fn finish(self) {
        if self.filled > 0 {
            self.out.push(self.acc as u8);
        }
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u128,
    filled: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, acc: 0, filled: 0 }
    }

    fn get(&mut self, width: u32) -> Result<u64> {
        while self.filled < width {
            let byte = *self
                .data
                .get(self.pos)
                .ok_or_else(|| Error::Format("bit-packed section truncated".into()))?;
            self.acc |= u128::from(byte) << self.filled;
            self.pos += 1;
            self.filled += 8;
        }
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        let v = self.acc as u64 & mask;
        self.acc >>= width;
        self.filled -= width;
        Ok(v)
    }
}

pub fn encode_crs(code: &LdpcCode) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_len(code));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(code.d as u8);
    out.push(code.d_v as u8);
    out.extend_from_slice(&(code.d_c as u16).to_le_bytes());
    out.extend_from_slice(&(code.hn as u64).to_le_bytes());
    out.extend_from_slice(&(code.r as u64).to_le_bytes());
    out.extend_from_slice(&code.seed.to_le_bytes());
    out.push(code.rng_id);

    let sb = symbol_bytes(code.d);
    for &v in &code.values {
        out.push(v);
        out.extend(std::iter::repeat_n(0u8, sb - 1));
    }

    let width = column_index_bits(code.hn);
    let mut w = BitWriter::new(&mut out);
    for &c in &code.col_indices {
        w.put(u64::from(c), width);
    }
    w.finish();

    let width = row_pointer_bits(code.hn, code.d_v);
    let mut w = BitWriter::new(&mut out);
    for &p in &code.row_pointers {
        w.put(p, width);
    }
    w.finish();
    out
}

fn take<'a>(data: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if data.len() < n {
        return Err(Error::Format(format!("expected {n} more bytes, found {}", data.len())));
    }
    let (head, tail) = data.split_at(n);
    *data = tail;
    Ok(head)
}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b.try_into().expect("8-byte field"))
}

pub fn decode_crs(bytes: &[u8]) -> Result<LdpcCode> {
    let mut data = bytes;
    if take(&mut data, 4)? != MAGIC {
        return Err(Error::Format("bad magic (expected NBQC)".into()));
    }
    let version = u16::from_le_bytes(take(&mut data, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = u32::from(take(&mut data, 1)?[0]);
    let d_v = u32::from(take(&mut data, 1)?[0]);
    let d_c = u32::from(u16::from_le_bytes(take(&mut data, 2)?.try_into().unwrap()));
    let hn = le_u64(take(&mut data, 8)?) as usize;
    let r = le_u64(take(&mut data, 8)?) as usize;
    let seed = le_u64(take(&mut data, 8)?);
    let rng_id = take(&mut data, 1)?[0];

    if !(1..=8).contains(&d) || d_v == 0 || d_c == 0 || hn == 0 {
        return Err(Error::Format(format!("invalid header (d={d}, d_v={d_v}, d_c={d_c}, hn={hn})")));
    }
    let nnz = hn
        .checked_mul(d_v as usize)
        .ok_or_else(|| Error::Format("hn·d_v overflows".into()))?;
    if r.checked_mul(d_c as usize) != Some(nnz) {
        return Err(Error::Format(format!("r·d_c = {r}·{d_c} does not equal hn·d_v = {nnz}")));
    }

    let sb = symbol_bytes(d);
    let raw = take(&mut data, nnz * sb)?;
    let values: Vec<u8> = raw.chunks(sb).map(|c| c[0]).collect();
    if let Some(v) = values.iter().find(|&&v| v == 0 || u32::from(v) >> d != 0) {
        return Err(Error::Format(format!("stored symbol {v} is not a nonzero element of GF(2^{d})")));
    }

    let width = column_index_bits(hn);
    let section = take(&mut data, (nnz * width as usize).div_ceil(8))?;
    let mut rd = BitReader::new(section);
    let col_indices = (0..nnz)
        .map(|_| {
            let c = rd.get(width)?;
            if c as usize >= hn {
                return Err(Error::Format(format!("column index {c} ≥ hn = {hn}")));
            }
            Ok(c as u32)
        })
        .collect::<Result<Vec<_>>>()?;

    let width = row_pointer_bits(hn, d_v);
    let section = take(&mut data, ((r + 1) * width as usize).div_ceil(8))?;
    let mut rd = BitReader::new(section);
    let row_pointers = (0..=r).map(|_| rd.get(width)).collect::<Result<Vec<_>>>()?;
    if row_pointers.first() != Some(&0)
        || row_pointers.last() != Some(&(nnz as u64))
        || row_pointers.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::Format("row pointers are not a monotone 0..nnz sequence".into()));
    }
    if !data.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", data.len())));
    }

    Ok(LdpcCode {
        d,
        d_v,
        d_c,
        hn,
        r,
        seed,
        rng_id,
        values,
        col_indices,
        row_pointers,
    })
}

/// Writes the CRS file and returns its size in bytes.
pub fn serialize_crs(code: &LdpcCode, path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    let bytes = encode_crs(code);
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(&bytes).map_err(io)?;
    file.flush().map_err(io)?;
    Ok(bytes.len() as u64)
}

pub fn read_crs(path: impl AsRef<Path>) -> Result<LdpcCode> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    decode_crs(&bytes)
}
