//! Keyed bijections standing in for ideal random permutations of `{0..2^m}`.
//!
//! A sketch needs `k` independent permutations that every party can rebuild
//! from a seed. Each indexed permutation is a balanced Feistel network whose
//! round keys derive from `(master_seed, index)` through a 64-bit mixing
//! function. Odd widths are handled by cycle-walking the next even width:
//! re-apply the permutation until the value lands back inside the domain,
//! which preserves bijectivity on the subdomain.
//!
//! Being a bijection (rather than a plain hash) keeps minwise semantics
//! exact: no two elements collide, so tiny-universe tests can be compared
//! against exact enumeration.

use crate::error::{Error, Result};

/// Feistel round count.
const ROUNDS: usize = 4;

/// 64-bit finalizer used for round keys and round functions.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splitmix-style stream over a state word.
#[inline]
pub(crate) fn mix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    mix64(*state)
}

/// Derives an independent 64-bit seed from a master seed and a stream index;
/// used for per-replication and per-permutation keying.
pub fn derive_seed(master_seed: u64, stream: u64) -> u64 {
    mix64(master_seed ^ mix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// A seeded family of `count` permutations of `{0..2^m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationFamily {
    domain_bits: u32,
    master_seed: u64,
    count: u32,
}

impl PermutationFamily {
    /// `domain_bits` must lie in `1..=64`; `count` must be at least 1.
    pub fn new(domain_bits: u32, master_seed: u64, count: u32) -> Result<Self> {
        if domain_bits == 0 || domain_bits > 64 {
            return Err(Error::Domain("domain bits must lie in 1..=64"));
        }
        if count == 0 {
            return Err(Error::Domain("a family needs at least one permutation"));
        }
        Ok(Self { domain_bits, master_seed, count })
    }

    /// Width `m` of the universe `{0..2^m}`.
    pub fn domain_bits(&self) -> u32 {
        self.domain_bits
    }

    /// Seed the family derives everything from.
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Number of permutations.
    pub fn count(&self) -> u32 {
        self.count
    }

    /// `2^m` as a u128 (the universe size can exceed u64 range at m = 64).
    pub fn domain_size(&self) -> u128 {
        1u128 << self.domain_bits
    }

    /// Whether `x` lies inside the universe.
    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        self.domain_bits == 64 || x >> self.domain_bits == 0
    }

    /// Materializes the round keys of permutation `index` for repeated use.
    pub fn instance(&self, index: u32) -> Result<Permutation> {
        if index >= self.count {
            return Err(Error::Domain("permutation index out of range"));
        }
        let width = self.domain_bits + (self.domain_bits & 1);
        let half = width / 2;
        let mut state = derive_seed(self.master_seed, u64::from(index));
        let mut keys = [0u64; ROUNDS];
        for key in &mut keys {
            *key = mix_next(&mut state);
        }
        Ok(Permutation {
            domain_bits: self.domain_bits,
            half,
            half_mask: (1u64 << half) - 1,
            keys,
        })
    }

    /// Image of `x` under permutation `index`.
    pub fn permute(&self, index: u32, x: u64) -> Result<u64> {
        if !self.contains(x) {
            return Err(Error::Domain("value outside the universe"));
        }
        Ok(self.instance(index)?.permute(x))
    }

    /// Preimage of `y` under permutation `index`.
    pub fn invert(&self, index: u32, y: u64) -> Result<u64> {
        if !self.contains(y) {
            return Err(Error::Domain("value outside the universe"));
        }
        Ok(self.instance(index)?.invert(y))
    }
}

/// One keyed permutation with materialized round keys.
///
/// `permute` and `invert` assume their argument lies in the universe; the
/// checked entry points on [`PermutationFamily`] enforce it, and bulk callers
/// validate their inputs once up front.
#[derive(Debug, Clone, Copy)]
pub struct Permutation {
    domain_bits: u32,
    half: u32,
    half_mask: u64,
    keys: [u64; ROUNDS],
}

impl Permutation {
    #[inline]
    fn in_domain(&self, x: u64) -> bool {
        self.domain_bits == 64 || x >> self.domain_bits == 0
    }

    #[inline]
    fn feistel(&self, x: u64) -> u64 {
        let mut l = (x >> self.half) & self.half_mask;
        let mut r = x & self.half_mask;
        for &key in &self.keys {
            let f = mix64(r ^ key) & self.half_mask;
            let next_l = r;
            r = l ^ f;
            l = next_l;
        }
        (l << self.half) | r
    }

    #[inline]
    fn feistel_inverse(&self, y: u64) -> u64 {
        let mut l = (y >> self.half) & self.half_mask;
        let mut r = y & self.half_mask;
        for &key in self.keys.iter().rev() {
            let f = mix64(l ^ key) & self.half_mask;
            let next_r = l;
            l = r ^ f;
            r = next_r;
        }
        (l << self.half) | r
    }

    /// Image of `x`; walks cycles of the widened network for odd widths.
    #[inline]
    pub fn permute(&self, x: u64) -> u64 {
        debug_assert!(self.in_domain(x));
        let mut y = self.feistel(x);
        while !self.in_domain(y) {
            y = self.feistel(y);
        }
        y
    }

    /// Preimage of `y`; the backward cycle walk of [`Permutation::permute`].
    #[inline]
    pub fn invert(&self, y: u64) -> u64 {
        debug_assert!(self.in_domain(y));
        let mut x = self.feistel_inverse(y);
        while !self.in_domain(x) {
            x = self.feistel_inverse(x);
        }
        x
    }
}
