//! Stable seed derivation. Every random stream in the crate is keyed off a
//! master seed through these functions, so results do not depend on
//! evaluation order or thread scheduling.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `master`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed for a named subsystem (FNV-1a over the label, then mixed).
pub fn derive_named(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    derive_seed(master, &[h])
}
