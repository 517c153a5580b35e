//! Regular non-binary LDPC parity-check matrices in compressed-row form.

use crate::error::{domain, Error, Result};

use super::gf::GaloisField;
use super::rng::CodeRng;

/// Upper bound on local swap passes spent removing length-4 cycles.
pub const FOUR_CYCLE_PASSES: usize = 100;

/// Parity-check matrix with hn columns (message nodes) and r rows (checks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    pub(crate) d: u32,
    pub(crate) d_v: u32,
    pub(crate) d_c: u32,
    pub(crate) hn: usize,
    pub(crate) r: usize,
    pub(crate) seed: u64,
    pub(crate) rng_id: u8,
    pub(crate) values: Vec<u8>,
    pub(crate) col_indices: Vec<u32>,
    pub(crate) row_pointers: Vec<u64>,
}

impl LdpcCode {
    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn d_v(&self) -> u32 {
        self.d_v
    }
    pub fn d_c(&self) -> u32 {
        self.d_c
    }
    pub fn n_cols(&self) -> usize {
        self.hn
    }
    pub fn n_rows(&self) -> usize {
        self.r
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn rng_id(&self) -> u8 {
        self.rng_id
    }
    pub fn values(&self) -> &[u8] {
        &self.values
    }
    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }
    pub fn row_pointers(&self) -> &[u64] {
        &self.row_pointers
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (column, value) pairs of row `j`.
    pub fn row(&self, j: usize) -> impl Iterator<Item = (usize, u8)> + '_ {
        let (a, b) = (self.row_pointers[j] as usize, self.row_pointers[j + 1] as usize);
        self.col_indices[a..b]
            .iter()
            .zip(&self.values[a..b])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.row_pointers.windows(2).map(|w| (w[1] - w[0]) as usize).collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.hn];
        for &c in &self.col_indices {
            w[c as usize] += 1;
        }
        w
    }

    /// R_synd = r / hn.
    pub fn syndrome_rate(&self) -> f64 {
        self.r as f64 / self.hn as f64
    }

    /// R_code = 1 − r / hn.
    pub fn code_rate(&self) -> f64 {
        1.0 - self.syndrome_rate()
    }

    /// Syndrome alphabet size log₂|M| = d·r in bits.
    pub fn syndrome_bits(&self) -> u64 {
        u64::from(self.d) * self.r as u64
    }

    /// Dense row-major copy; only sensible for small codes.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut dense = vec![vec![0u8; self.hn]; self.r];
        for (j, row) in dense.iter_mut().enumerate() {
            for (c, v) in self.row(j) {
                row[c] = v;
            }
        }
        dense
    }

    /// Number of column pairs sharing two or more checks.
    pub fn four_cycles(&self) -> usize {
        let mut cols_of_row: Vec<Vec<u32>> = vec![Vec::new(); self.r];
        for j in 0..self.r {
            cols_of_row[j].extend(self.row(j).map(|(c, _)| c as u32));
        }
        let mut rows_of_col: Vec<Vec<u32>> = vec![Vec::new(); self.hn];
        for (j, cols) in cols_of_row.iter().enumerate() {
            for &c in cols {
                rows_of_col[c as usize].push(j as u32);
            }
        }
        let mut pairs = pair_keys(rows_of_col.iter().map(|r| r.as_slice()));
        pairs.sort_unstable();
        pairs.windows(2).filter(|w| w[0].0 == w[1].0).count()
    }
}

fn pair_keys<'a>(columns: impl Iterator<Item = &'a [u32]>) -> Vec<((u32, u32), u32)> {
    let mut out = Vec::new();
    for (c, rows) in columns.enumerate() {
        for i in 0..rows.len() {
            for k in i + 1..rows.len() {
                let (a, b) = (rows[i].min(rows[k]), rows[i].max(rows[k]));
                out.push(((a, b), c as u32));
            }
        }
    }
    out
}

/// Largest hn' ≤ hn with hn'·d_v divisible by d_c.
pub fn feasible_hn(hn: usize, d_v: u32, d_c: u32) -> usize {
    let step = (d_c / gcd(d_v, d_c)) as usize;
    hn - hn % step
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_params(hn: usize, d: u32, d_v: u32, d_c: u32) -> Result<()> {
    if !(1..=8).contains(&d) {
        return Err(domain(format!("symbol width d = {d} must lie in 1..=8")));
    }
    if d_v < 2 {
        return Err(domain(format!("column weight d_v = {d_v} must be at least 2")));
    }
    if d_v >= d_c {
        return Err(domain(format!("column weight d_v = {d_v} must be below row weight d_c = {d_c}")));
    }
    if d_v > u32::from(u8::MAX) || d_c > u32::from(u16::MAX) {
        return Err(domain("weights exceed the file-format limits (d_v ≤ 255, d_c ≤ 65535)"));
    }
    if hn > u32::MAX as usize {
        return Err(domain(format!("hn = {hn} exceeds the supported 2^32 columns")));
    }
    if !(hn as u64 * u64::from(d_v)).is_multiple_of(u64::from(d_c)) {
        return Err(Error::Divisibility {
            hn,
            d_v: d_v as usize,
            d_c: d_c as usize,
            suggested: feasible_hn(hn, d_v, d_c),
        });
    }
    let r = hn * d_v as usize / d_c as usize;
    if hn < d_c as usize || r < d_v as usize {
        return Err(domain(format!(
            "hn = {hn} is too small for weights (d_v, d_c) = ({d_v}, {d_c})"
        )));
    }
    Ok(())
}

/// Regular (d_v, d_c) code with hn columns over GF(2^d).
///
/// Every column meets d_v distinct checks and every check d_c distinct
/// columns. Sockets are shuffled into rows, repeated (row, column) edges are
/// swapped away, and up to [`FOUR_CYCLE_PASSES`] swap passes break
/// length-4 cycles. Nonzero entries are uniform over 1..2^d.
pub fn generate_regular_ldpc(hn: usize, d: u32, d_v: u32, d_c: u32, seed: u64) -> Result<LdpcCode> {
    check_params(hn, d, d_v, d_c)?;
    let dv = d_v as usize;
    let r = hn * dv / d_c as usize;
    let mut rng = CodeRng::new(seed);

    // slots[c·d_v + i] is the row of the i-th edge of column c.
    let mut slots: Vec<u32> = (0..hn * dv).map(|i| (i / d_c as usize) as u32).collect();
    rng.shuffle(&mut slots);
    repair_repeated_edges(&mut slots, dv, &mut rng)?;
    reduce_four_cycles(&mut slots, dv, &mut rng);

    let mut row_pointers = vec![0u64; r + 1];
    for &row in &slots {
        row_pointers[row as usize + 1] += 1;
    }
    for j in 0..r {
        row_pointers[j + 1] += row_pointers[j];
    }
    let mut fill: Vec<u64> = row_pointers[..r].to_vec();
    let mut col_indices = vec![0u32; slots.len()];
    for (i, &row) in slots.iter().enumerate() {
        let at = &mut fill[row as usize];
        col_indices[*at as usize] = (i / dv) as u32;
        *at += 1;
    }
    let nonzero = (1u64 << d) - 1;
    let values = (0..slots.len()).map(|_| 1 + rng.below(nonzero) as u8).collect();

    Ok(LdpcCode {
        d,
        d_v,
        d_c,
        hn,
        r,
        seed,
        rng_id: super::rng::RNG_ID,
        values,
        col_indices,
        row_pointers,
    })
}

/// Trims hn to the nearest feasible size first; returns the code and the
/// number of dropped columns.
pub fn generate_regular_ldpc_trimmed(
    hn: usize,
    d: u32,
    d_v: u32,
    d_c: u32,
    seed: u64,
) -> Result<(LdpcCode, usize)> {
    if d_v == 0 || d_c == 0 {
        return Err(domain("weights must be positive"));
    }
    let trimmed = feasible_hn(hn, d_v, d_c);
    Ok((generate_regular_ldpc(trimmed, d, d_v, d_c, seed)?, hn - trimmed))
}

fn column_holds(slots: &[u32], dv: usize, col: usize, row: u32, skip: usize) -> bool {
    (col * dv..(col + 1) * dv).any(|s| s != skip && slots[s] == row)
}

/// Swapping slots a and b keeps both columns free of repeated rows.
fn swap_ok(slots: &[u32], dv: usize, a: usize, b: usize) -> bool {
    let (ca, cb) = (a / dv, b / dv);
    ca != cb
        && slots[a] != slots[b]
        && !column_holds(slots, dv, ca, slots[b], a)
        && !column_holds(slots, dv, cb, slots[a], b)
}

fn repair_repeated_edges(slots: &mut [u32], dv: usize, rng: &mut CodeRng) -> Result<()> {
    const ATTEMPTS: usize = 100_000;
    let cols = slots.len() / dv;
    for col in 0..cols {
        for i in col * dv..(col + 1) * dv {
            if !(col * dv..i).any(|s| slots[s] == slots[i]) {
                continue;
            }
            let mut fixed = false;
            for _ in 0..ATTEMPTS {
                let t = rng.below(slots.len() as u64) as usize;
                if swap_ok(slots, dv, i, t) {
                    slots.swap(i, t);
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                return Err(Error::Infeasible(format!(
                    "could not place column {col} without repeated edges"
                )));
            }
        }
    }
    Ok(())
}

fn reduce_four_cycles(slots: &mut [u32], dv: usize, rng: &mut CodeRng) {
    for _ in 0..FOUR_CYCLE_PASSES {
        let mut pairs = pair_keys(slots.chunks(dv));
        pairs.sort_unstable();
        let mut offenders: Vec<usize> = pairs
            .windows(2)
            .filter(|w| w[0].0 == w[1].0)
            .map(|w| w[1].1 as usize)
            .collect();
        if offenders.is_empty() {
            return;
        }
        offenders.dedup();
        for col in offenders {
            let a = col * dv + rng.below(dv as u64) as usize;
            let b = rng.below(slots.len() as u64) as usize;
            if swap_ok(slots, dv, a, b) {
                slots.swap(a, b);
            }
        }
    }
}

/// s = H·k over GF(2^d).
pub fn syndrome(code: &LdpcCode, field: &GaloisField, key: &[u8]) -> Result<Vec<u8>> {
    if key.len() != code.hn {
        return Err(Error::LengthMismatch { expected: code.hn, got: key.len() });
    }
    if field.d() != code.d {
        return Err(domain(format!(
            "field GF(2^{}) does not match code symbols GF(2^{})",
            field.d(),
            code.d
        )));
    }
    if let Some((i, &k)) = key.iter().enumerate().find(|(_, &k)| !field.contains(k)) {
        return Err(domain(format!("key symbol {k} at {i} exceeds GF(2^{})", code.d)));
    }
    Ok((0..code.r)
        .map(|j| code.row(j).fold(0u8, |acc, (c, v)| acc ^ field.mul(v, key[c])))
        .collect())
}
