//! Shared domain types: labeled data, distributions over example indices,
//! hint list functions and seeded random streams.

mod dataset;
mod distribution;
mod list;
mod stream;

pub use dataset::{Alphabet, Dataset, Instance, Label, LabeledExample};
pub use distribution::{sample_iid, ExampleDistribution};
pub(crate) use list::dedup_ordered;
pub use list::{ListFunction, ListId, ListKind, ListRule};
pub use stream::RandomStream;

/// 64-bit FNV-1a, used for stable fingerprints and stream derivation.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Fingerprint of a label sequence (a hypothesis' predict table).
pub fn fingerprint(labels: &[Label]) -> u64 {
    let mut bytes = Vec::with_capacity(labels.len() * 4);
    for l in labels {
        bytes.extend_from_slice(&l.0.to_le_bytes());
    }
    fnv1a(&bytes)
}
