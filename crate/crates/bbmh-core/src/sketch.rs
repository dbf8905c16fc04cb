//! Sketch construction: k permutation minima per set, optionally truncated
//! to the lowest b bits of each minimum.
//!
//! Layout contract for packed sketches: sample `t` occupies bit positions
//! `t*b .. (t+1)*b`, least significant bit first; bit position `u` lives in
//! byte `u / 8` at bit `u % 8`; trailing pad bits of the final byte are zero.
//! Serialization, match counting and the estimators all assume this layout,
//! so it is pinned by tests against a naive reference.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::permute::PermutationFamily;

/// Writes `width` low bits of `v` at `bit_offset` (LSB-first stream order).
pub(crate) fn set_bits(packed: &mut [u8], bit_offset: usize, width: u32, v: u64) {
    for i in 0..width as usize {
        if v >> i & 1 == 1 {
            let pos = bit_offset + i;
            packed[pos >> 3] |= 1 << (pos & 7);
        }
    }
}

/// Reads `width` bits at `bit_offset` (LSB-first stream order).
pub(crate) fn get_bits(packed: &[u8], bit_offset: usize, width: u32) -> u64 {
    let mut v = 0u64;
    for i in 0..width as usize {
        let pos = bit_offset + i;
        if packed[pos >> 3] >> (pos & 7) & 1 == 1 {
            v |= 1 << i;
        }
    }
    v
}

/// Bytes needed for `k` samples of `b` bits.
pub(crate) fn packed_len(k: u32, b: u32) -> usize {
    ((k as usize) * (b as usize)).div_ceil(8)
}

/// Loads byte `8*w ..` of `packed` as a zero-extended little-endian word.
#[inline]
fn load_word(packed: &[u8], w: usize) -> u64 {
    let start = w * 8;
    if start + 8 <= packed.len() {
        let mut buf = [0u8; 8];
        buf.copy_from_slice(&packed[start..start + 8]);
        u64::from_le_bytes(buf)
    } else {
        let mut buf = [0u8; 8];
        buf[..packed.len() - start].copy_from_slice(&packed[start..]);
        u64::from_le_bytes(buf)
    }
}

/// Repeating mask with the lowest bit of each `b`-bit group set.
fn group_lsb_pattern(b: u32) -> u64 {
    let mut m = 0u64;
    let mut pos = 0;
    while pos < 64 {
        m |= 1u64 << pos;
        pos += b as usize;
    }
    m
}

/// Counts samples on which two packed streams agree, word-at-a-time for the
/// group sizes that tile a 64-bit word.
fn swar_match_count(a: &[u8], b: &[u8], k: usize, bits: u32) -> u64 {
    let per_word = 64 / bits as usize;
    let pattern = group_lsb_pattern(bits);
    let mut matched = 0u64;
    let mut remaining = k;
    let mut w = 0;
    while remaining > 0 {
        let groups = remaining.min(per_word);
        let mut x = load_word(a, w) ^ load_word(b, w);
        // OR-fold every group onto its lowest bit: the bit survives iff the
        // group's samples differ anywhere.
        let mut shift = bits / 2;
        while shift > 0 {
            x |= x >> shift;
            shift /= 2;
        }
        let valid = if groups == per_word {
            pattern
        } else {
            pattern & ((1u64 << (groups * bits as usize)) - 1)
        };
        matched += groups as u64 - u64::from((x & valid).count_ones());
        remaining -= groups;
        w += 1;
    }
    matched
}

/// Sample-by-sample fallback for group sizes that do not tile a word.
fn generic_match_count(a: &[u8], b: &[u8], k: usize, bits: u32) -> u64 {
    (0..k)
        .filter(|&t| get_bits(a, t * bits as usize, bits) == get_bits(b, t * bits as usize, bits))
        .count() as u64
}

/// Number of positions `t < k` where the `b`-bit groups of `a` and `b` agree.
pub(crate) fn packed_match_count(a: &[u8], b: &[u8], k: u32, bits: u32) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    match bits {
        1 | 2 | 4 | 8 | 16 | 32 | 64 => swar_match_count(a, b, k as usize, bits),
        _ => generic_match_count(a, b, k as usize, bits),
    }
}

/// Full-width sketch: the raw minimum of each permuted set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinwiseSketch {
    pub(crate) domain_bits: u32,
    pub(crate) seed: u64,
    pub(crate) f: u64,
    pub(crate) mins: Vec<u64>,
}

/// Truncated sketch keeping the lowest `b` bits of each minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BbitSketch {
    pub(crate) domain_bits: u32,
    pub(crate) seed: u64,
    pub(crate) k: u32,
    pub(crate) b: u32,
    pub(crate) f: u64,
    pub(crate) packed: Vec<u8>,
}

/// One-bit-per-two-permutations sketch: adjacent 1-bit samples XOR-folded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfBitSketch {
    pub(crate) domain_bits: u32,
    pub(crate) seed: u64,
    pub(crate) k: u32,
    pub(crate) f: u64,
    pub(crate) packed: Vec<u8>,
}

/// Any sketch variant, for storage and dispatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sketch {
    /// Full-width minima.
    Minwise(MinwiseSketch),
    /// Lowest-b-bits sketch.
    Bbit(BbitSketch),
    /// XOR-folded one-bit sketch.
    Half(HalfBitSketch),
}

impl MinwiseSketch {
    /// Sketches the set `elements` (duplicates welcome, order free) under
    /// every permutation of `family`.
    pub fn build(family: &PermutationFamily, elements: &[u64]) -> Result<Self> {
        let mut elems: Vec<u64> = elements.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if elems.is_empty() {
            return Err(Error::Domain("cannot sketch an empty set"));
        }
        if !elems.iter().all(|&x| family.contains(x)) {
            return Err(Error::Domain("set element outside the universe"));
        }
        Self::from_distinct(family, &elems)
    }

    /// Sketches the union of half-open intervals. The result is identical to
    /// [`MinwiseSketch::build`] on the materialized union; for dense sets it
    /// instead walks preimages of 0, 1, 2, ... under each inverse permutation
    /// until one lands in the union, which costs about `2^m / f` steps per
    /// permutation instead of `f`.
    pub fn build_from_ranges(family: &PermutationFamily, ranges: &[Range<u64>]) -> Result<Self> {
        let mut spans: Vec<(u64, u64)> = Vec::new();
        for r in ranges {
            if r.start >= r.end {
                continue;
            }
            if !family.contains(r.end - 1) {
                return Err(Error::Domain("interval extends outside the universe"));
            }
            spans.push((r.start, r.end));
        }
        spans.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::new();
        for (start, end) in spans {
            match merged.last_mut() {
                Some(last) if start <= last.1 => last.1 = last.1.max(end),
                _ => merged.push((start, end)),
            }
        }
        if merged.is_empty() {
            return Err(Error::Domain("cannot sketch an empty set"));
        }
        let f: u128 = merged.iter().map(|&(s, e)| u128::from(e - s)).sum();

        // Inverse scanning wins once the expected scan length 2^m / f drops
        // below the f forward evaluations of a direct build.
        if f * f <= family.domain_size() {
            let mut elems = Vec::with_capacity(f as usize);
            for &(s, e) in &merged {
                elems.extend(s..e);
            }
            return Self::from_distinct(family, &elems);
        }

        let count = family.count();
        let mut mins = Vec::with_capacity(count as usize);
        for index in 0..count {
            let perm = family.instance(index)?;
            let mut y = 0u64;
            loop {
                let x = perm.invert(y);
                if merged.iter().any(|&(s, e)| s <= x && x < e) {
                    break;
                }
                y += 1;
            }
            mins.push(y);
        }
        Ok(Self {
            domain_bits: family.domain_bits(),
            seed: family.master_seed(),
            f: f as u64,
            mins,
        })
    }

    /// `elems` must be sorted, distinct, in-domain and non-empty.
    fn from_distinct(family: &PermutationFamily, elems: &[u64]) -> Result<Self> {
        let count = family.count();
        let mut mins = Vec::with_capacity(count as usize);
        for index in 0..count {
            let perm = family.instance(index)?;
            let min = elems.iter().map(|&x| perm.permute(x)).min().expect("non-empty");
            mins.push(min);
        }
        Ok(Self {
            domain_bits: family.domain_bits(),
            seed: family.master_seed(),
            f: elems.len() as u64,
            mins,
        })
    }

    /// Universe width in bits.
    pub fn domain_bits(&self) -> u32 {
        self.domain_bits
    }

    /// Seed of the permutation family that produced the sketch.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Size of the sketched set.
    pub fn f(&self) -> u64 {
        self.f
    }

    /// Number of samples.
    pub fn k(&self) -> u32 {
        self.mins.len() as u32
    }

    /// The stored minima, one per permutation.
    pub fn mins(&self) -> &[u64] {
        &self.mins
    }

    /// The sketch made of the first `k` samples only. Sample `t` depends on
    /// nothing but permutation `t`, so a prefix of a large sketch is exactly
    /// the sketch a smaller family would have produced; simulation sweeps
    /// over `k` exploit this to hash once per replication.
    pub fn prefix(&self, k: u32) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::Domain("prefix length must lie in 1..=k"));
        }
        Ok(Self {
            domain_bits: self.domain_bits,
            seed: self.seed,
            f: self.f,
            mins: self.mins[..k as usize].to_vec(),
        })
    }

    /// Truncates every minimum to its lowest `b` bits, `1 <= b <= m`.
    pub fn lowest_bits(&self, b: u32) -> Result<BbitSketch> {
        if b == 0 || b > self.domain_bits {
            return Err(Error::Domain("bit width must lie in 1..=m"));
        }
        let k = self.k();
        let mut packed = vec![0u8; packed_len(k, b)];
        let mask = if b == 64 { u64::MAX } else { (1u64 << b) - 1 };
        for (t, &min) in self.mins.iter().enumerate() {
            set_bits(&mut packed, t * b as usize, b, min & mask);
        }
        Ok(BbitSketch {
            domain_bits: self.domain_bits,
            seed: self.seed,
            k,
            b,
            f: self.f,
            packed,
        })
    }
}

impl BbitSketch {
    /// Universe width in bits.
    pub fn domain_bits(&self) -> u32 {
        self.domain_bits
    }

    /// Seed of the permutation family that produced the sketch.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Size of the sketched set.
    pub fn f(&self) -> u64 {
        self.f
    }

    /// Number of samples.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Bits kept per sample.
    pub fn b(&self) -> u32 {
        self.b
    }

    /// Packed sample stream.
    pub fn packed(&self) -> &[u8] {
        &self.packed
    }

    /// Sample `t` as a `b`-bit value.
    pub fn sample(&self, t: u32) -> u64 {
        assert!(t < self.k, "sample index out of range");
        get_bits(&self.packed, t as usize * self.b as usize, self.b)
    }

    /// Number of samples agreeing with `other` (layouts must match).
    pub(crate) fn match_count(&self, other: &Self) -> u64 {
        packed_match_count(&self.packed, &other.packed, self.k, self.b)
    }

    /// Folds adjacent 1-bit samples by XOR, halving storage. Requires `b = 1`
    /// and an even sample count; the result has `k/2` samples.
    pub fn xor_combine(&self) -> Result<HalfBitSketch> {
        if self.b != 1 {
            return Err(Error::Incompatible("xor folding applies to 1-bit sketches"));
        }
        if !self.k.is_multiple_of(2) {
            return Err(Error::Incompatible("xor folding needs an even sample count"));
        }
        let half_k = self.k / 2;
        let mut packed = vec![0u8; packed_len(half_k, 1)];
        for t in 0..half_k as usize {
            let bit = get_bits(&self.packed, 2 * t, 1) ^ get_bits(&self.packed, 2 * t + 1, 1);
            set_bits(&mut packed, t, 1, bit);
        }
        Ok(HalfBitSketch {
            domain_bits: self.domain_bits,
            seed: self.seed,
            k: half_k,
            f: self.f,
            packed,
        })
    }
}

impl HalfBitSketch {
    /// Universe width in bits.
    pub fn domain_bits(&self) -> u32 {
        self.domain_bits
    }

    /// Seed of the permutation family that produced the sketch.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Size of the sketched set.
    pub fn f(&self) -> u64 {
        self.f
    }

    /// Number of folded samples (each consumed two permutations).
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Packed sample stream.
    pub fn packed(&self) -> &[u8] {
        &self.packed
    }

    /// Folded bit `t`.
    pub fn bit(&self, t: u32) -> bool {
        assert!(t < self.k, "sample index out of range");
        get_bits(&self.packed, t as usize, 1) == 1
    }

    /// Number of folded bits agreeing with `other`.
    pub(crate) fn match_count(&self, other: &Self) -> u64 {
        packed_match_count(&self.packed, &other.packed, self.k, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permute::mix_next;

    fn family(m: u32, seed: u64, k: u32) -> PermutationFamily {
        PermutationFamily::new(m, seed, k).unwrap()
    }

    #[test]
    fn build_rejects_bad_input() {
        let fam = family(8, 1, 4);
        assert!(MinwiseSketch::build(&fam, &[]).is_err());
        assert!(MinwiseSketch::build(&fam, &[256]).is_err());
    }

    #[test]
    fn duplicates_do_not_change_the_sketch() {
        let fam = family(10, 3, 8);
        let a = MinwiseSketch::build(&fam, &[5, 9, 700]).unwrap();
        let b = MinwiseSketch::build(&fam, &[700, 5, 9, 5, 700]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.f(), 3);
    }

    #[test]
    fn range_builder_matches_direct_build_on_both_strategies() {
        // f*f <= 2^m forces the direct path, f*f > 2^m the inverse scan.
        for (m, ranges) in [
            (16u32, vec![10u64..50, 40..60, 1000..1003]),
            (12, vec![0u64..600, 700..2100]),
        ] {
            let fam = family(m, 0xabc, 16);
            let elems: Vec<u64> = ranges.iter().cloned().flatten().collect();
            let direct = MinwiseSketch::build(&fam, &elems).unwrap();
            let scanned = MinwiseSketch::build_from_ranges(&fam, &ranges).unwrap();
            assert_eq!(direct, scanned, "m={m}");
        }
    }

    #[test]
    fn range_builder_rejects_empty_and_oversized() {
        let fam = family(8, 0, 2);
        assert!(MinwiseSketch::build_from_ranges(&fam, &[]).is_err());
        assert!(MinwiseSketch::build_from_ranges(&fam, core::slice::from_ref(&(5..5))).is_err());
        assert!(
            MinwiseSketch::build_from_ranges(&fam, core::slice::from_ref(&(250..300))).is_err()
        );
    }

    #[test]
    fn prefix_equals_a_smaller_family() {
        let big = family(16, 123, 24);
        let small = family(16, 123, 10);
        let elems = [7u64, 19, 512, 40_000];
        let full = MinwiseSketch::build(&big, &elems).unwrap();
        let direct = MinwiseSketch::build(&small, &elems).unwrap();
        assert_eq!(full.prefix(10).unwrap(), direct);
        assert!(full.prefix(0).is_err());
        assert!(full.prefix(25).is_err());
    }

    #[test]
    fn lowest_bits_keeps_the_low_end_of_each_minimum() {
        let fam = family(16, 77, 32);
        let sketch = MinwiseSketch::build(&fam, &[1, 2, 3, 500, 6000]).unwrap();
        for b in [1u32, 3, 8, 13, 16] {
            let truncated = sketch.lowest_bits(b).unwrap();
            assert_eq!(truncated.k(), 32);
            assert_eq!(truncated.packed().len(), packed_len(32, b));
            let mask = (1u64 << b) - 1;
            for (t, &min) in sketch.mins().iter().enumerate() {
                assert_eq!(truncated.sample(t as u32), min & mask, "b={b} t={t}");
            }
        }
        assert!(sketch.lowest_bits(0).is_err());
        assert!(sketch.lowest_bits(17).is_err());
    }

    #[test]
    fn full_width_truncation_is_lossless() {
        let fam = family(64, 9, 16);
        let sketch = MinwiseSketch::build(&fam, &[u64::MAX, 0, 1 << 63]).unwrap();
        let truncated = sketch.lowest_bits(64).unwrap();
        for (t, &min) in sketch.mins().iter().enumerate() {
            assert_eq!(truncated.sample(t as u32), min);
        }
    }

    #[test]
    fn bit_roundtrip_against_layout_contract() {
        let mut packed = vec![0u8; 16];
        let values = [0b101u64, 0b010, 0b111, 0b000, 0b110];
        for (t, &v) in values.iter().enumerate() {
            set_bits(&mut packed, t * 3, 3, v);
        }
        for (t, &v) in values.iter().enumerate() {
            assert_eq!(get_bits(&packed, t * 3, 3), v);
        }
        // Sample 0 = 0b101 occupies bits 0..3 of byte 0, LSB first; sample 1
        // = 0b010 occupies bits 3..6.
        assert_eq!(packed[0] & 0b0011_1111, 0b0001_0101);
    }

    #[test]
    fn match_count_fast_paths_agree_with_naive_counting() {
        let mut state = 0xd1ce_u64;
        for bits in [1u32, 2, 3, 4, 5, 6, 7, 8, 9, 16, 32, 64] {
            for k in [1u32, 7, 63, 64, 65, 200] {
                let len = packed_len(k, bits);
                let mut a = vec![0u8; len];
                let mut b = vec![0u8; len];
                for t in 0..k as usize {
                    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
                    set_bits(&mut a, t * bits as usize, bits, mix_next(&mut state) & mask);
                    // Bias towards agreement so both outcomes occur often.
                    let v = if mix_next(&mut state).is_multiple_of(2) {
                        get_bits(&a, t * bits as usize, bits)
                    } else {
                        mix_next(&mut state) & mask
                    };
                    set_bits(&mut b, t * bits as usize, bits, v);
                }
                let naive = generic_match_count(&a, &b, k as usize, bits);
                assert_eq!(packed_match_count(&a, &b, k, bits), naive, "b={bits} k={k}");
            }
        }
    }

    #[test]
    fn xor_combine_folds_adjacent_bits() {
        let fam = family(16, 5, 10);
        let sketch = MinwiseSketch::build(&fam, &[4, 99, 1234]).unwrap();
        let one_bit = sketch.lowest_bits(1).unwrap();
        let half = one_bit.xor_combine().unwrap();
        assert_eq!(half.k(), 5);
        for t in 0..5u32 {
            let expect = (one_bit.sample(2 * t) ^ one_bit.sample(2 * t + 1)) == 1;
            assert_eq!(half.bit(t), expect);
        }
    }

    #[test]
    fn xor_combine_rejects_wrong_shapes() {
        let fam = family(16, 5, 9);
        let sketch = MinwiseSketch::build(&fam, &[4, 99]).unwrap();
        assert!(sketch.lowest_bits(1).unwrap().xor_combine().is_err());
        assert!(sketch.lowest_bits(2).unwrap().xor_combine().is_err());
    }
}
