//! Small, platform-stable hash primitives.
//!
//! Everything persisted or compared across runs must hash identically on every
//! toolchain, so the std `Hasher` (whose algorithm is unspecified) is not used.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over raw bytes, salted with `seed`.
pub fn fnv1a64(bytes: &[u8], seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ splitmix64(seed);
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// One step of the SplitMix64 finaliser; a good bijective 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Well-mixed hash of a string.
pub fn hash_str(s: &str, seed: u64) -> u64 {
    splitmix64(fnv1a64(s.as_bytes(), seed))
}
