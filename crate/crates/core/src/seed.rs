//! Splittable seed derivation: every random stream in the crate descends from
//! one user-supplied 64-bit seed through `derive`, so parallel workers and
//! reruns see identical streams.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a sequence of salts.
pub fn derive(master: u64, salts: &[u64]) -> u64 {
    let mut s = mix(master);
    for &salt in salts {
        s = mix(s ^ mix(salt));
    }
    s
}
