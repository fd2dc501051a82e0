//! Keyed, counter-based pseudorandomness.
//!
//! Everything here is a pure function of its inputs: a context of token ids
//! is hashed together with a secret key into a [`ContextSeed`], and a seed is
//! expanded into as many uniforms, Gaussians or permutations as a caller needs
//! by indexing into it. There is no generator state to thread around, so the
//! same `(seed, index)` always yields the same value on every platform.

use std::fmt;

use crate::error::{invalid, Result};

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// The splitmix64 output function, including its additive step.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Watermark secret key, 1 to 64 bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SecretKey(Vec<u8>);

impl SecretKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return invalid("secret key must not be empty");
        }
        if bytes.len() > 64 {
            return invalid(format!("secret key has {} bytes, at most 64 allowed", bytes.len()));
        }
        Ok(Self(bytes))
    }

    /// Eight little-endian bytes of `value`. Used for keys derived from seeds.
    pub fn from_u64(value: u64) -> Self {
        Self(value.to_le_bytes().to_vec())
    }

    pub fn from_hex(hex: &str) -> Result<Self> {
        let hex = hex.trim().trim_start_matches("0x");
        if hex.len() % 2 != 0 {
            return invalid(format!("hex key {hex:?} has odd length"));
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&hex[i..i + 2], 16))
            .collect::<std::result::Result<Vec<u8>, _>>()
            .map_err(|e| crate::Error::InvalidArgument(format!("bad hex key: {e}")))?;
        Self::new(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Lowercase hex, accepted back by [`from_hex`](Self::from_hex).
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecretKey({} bytes)", self.0.len())
    }
}

/// Seed of the pseudorandom variable attached to one position of the text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextSeed(pub u64);

/// Hash `key ∥ context` into a seed.
///
/// The byte string is the key followed by every token id as a little-endian
/// `u32`, zero-padded to a multiple of eight bytes. Each 8-byte block `b`
/// (little-endian) updates `state ← mix64(state ^ b)`, starting from zero.
pub fn derive_seed(key: &SecretKey, context: &[u32]) -> Result<ContextSeed> {
    if context.is_empty() {
        return invalid("context window must hold at least one token");
    }
    Ok(derive_seed_unchecked(key, context))
}

pub(crate) fn derive_seed_unchecked(key: &SecretKey, context: &[u32]) -> ContextSeed {
    let mut state = 0u64;
    let mut block = [0u8; 8];
    let mut fill = 0usize;
    let absorb = |byte: u8, block: &mut [u8; 8], fill: &mut usize, state: &mut u64| {
        block[*fill] = byte;
        *fill += 1;
        if *fill == 8 {
            *state = mix64(*state ^ u64::from_le_bytes(*block));
            *block = [0u8; 8];
            *fill = 0;
        }
    };
    for &b in key.as_bytes() {
        absorb(b, &mut block, &mut fill, &mut state);
    }
    for &token in context {
        for b in token.to_le_bytes() {
            absorb(b, &mut block, &mut fill, &mut state);
        }
    }
    if fill > 0 {
        state = mix64(state ^ u64::from_le_bytes(block));
    }
    ContextSeed(state)
}

/// The `index`-th uniform of a seed, on the 53-bit grid in `[0, 1)`.
#[inline]
pub fn uniform(seed: ContextSeed, index: u64) -> f64 {
    let bits = mix64(seed.0 ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    (bits >> 11) as f64 * TWO_POW_NEG_53
}

/// Raw 53-bit integer behind [`uniform`]; orders identically.
#[inline]
pub(crate) fn uniform_bits(seed: ContextSeed, index: u64) -> u64 {
    mix64(seed.0 ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)) >> 11
}

/// Standard normal via the cosine branch of Box–Muller on uniforms
/// `2·index` and `2·index + 1`.
#[inline]
pub fn gaussian(seed: ContextSeed, index: u64) -> f64 {
    let mut u1 = uniform(seed, 2 * index);
    let u2 = uniform(seed, 2 * index + 1);
    if u1 == 0.0 {
        u1 = TWO_POW_NEG_53;
    }
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Fisher–Yates shuffle of `0..size` driven by `uniform(seed, 0..size-1)`.
///
/// Draw `c` picks the partner for slot `size - 1 - c`.
pub fn permutation(seed: ContextSeed, size: usize) -> Result<Vec<u32>> {
    if size == 0 {
        return invalid("permutation size must be at least 1");
    }
    let mut perm = Vec::with_capacity(size);
    permutation_into(seed, size, &mut perm);
    Ok(perm)
}

pub(crate) fn permutation_into(seed: ContextSeed, size: usize, perm: &mut Vec<u32>) {
    perm.clear();
    perm.extend(0..size as u32);
    for (draw, slot) in (1..size).rev().enumerate() {
        let u = uniform(seed, draw as u64);
        let j = ((u * (slot + 1) as f64) as usize).min(slot);
        perm.swap(slot, j);
    }
}

/// Child seed for an independent stream, e.g. per trial or per batch.
#[inline]
pub fn stream(master: u64, index: u64) -> ContextSeed {
    ContextSeed(mix64(master ^ index))
}
