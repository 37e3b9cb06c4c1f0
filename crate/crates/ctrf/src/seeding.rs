//! Deterministic seed derivation.
//!
//! Every unit of parallel work (a tree inside a forest, a replication inside a
//! sweep cell) gets its own RNG seeded from the master seed and the unit's
//! coordinates. Results are then a pure function of the configuration, no
//! matter how the scheduler interleaves the work.

/// One step of the splitmix64 sequence; a strong 64-bit mixer.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a coordinate path.
///
/// Each tag is folded into the splitmix64 stream, so `derive_seed(s, &[a, b])`
/// and `derive_seed(s, &[b, a])` differ, as do paths of different lengths.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0xff51_afd7_ed55_8ccd);
        out = splitmix64(&mut state);
    }
    out
}

/// Encodes an `f64` coordinate (an inclusion rate, a reserve) as a tag.
pub fn tag_f64(value: f64) -> u64 {
    value.to_bits()
}

/// FNV-1a over a byte string; used to fingerprint configurations.
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
