//! Non-binary LDPC construction, syndromes and storage accounting.

mod code;
mod crs;
mod gf;
mod rng;
mod storage;

pub use code::{
    feasible_hn, generate_regular_ldpc, generate_regular_ldpc_trimmed, syndrome, LdpcCode,
    FOUR_CYCLE_PASSES,
};
pub use crs::{
    bit_length, column_index_bits, decode_crs, encode_crs, encoded_len, read_crs, row_pointer_bits,
    serialize_crs, symbol_bytes, HEADER_BYTES, MAGIC, VERSION,
};
pub use gf::{gf_ops, GaloisField, PRIMITIVE_POLYNOMIALS};
pub use rng::{CodeRng, RNG_ID};
pub use storage::{
    ceil_log2, dense_storage_bits, design_rate, predicted_storage, sparse_storage_bits,
    StorageReport, BITS_PER_GB, BITS_PER_MB,
};
