//! Exact finite-universe ground truth for the joint distribution of two minima.
//!
//! Throw the union of two sets (sizes `f1`, `f2`, intersection `a`) uniformly
//! into `D` slots and look at the smallest slot of each set, `z1` and `z2`.
//! This module computes that joint distribution three ways:
//!
//! - [`exact_joint_pmf`]: closed-form binomial expressions, exact rationals;
//! - [`enumerate_permutations`]: brute force over all `D!` permutations
//!   (`D ≤ 8`), exact rationals;
//! - [`approx_joint_pmf`]: the geometric large-`D` approximation in floats.
//!
//! [`exact_match_probability`] aggregates the pmf over pairs whose lowest `b`
//! bits agree, which is the quantity the closed-form theory approximates; the
//! float variant streams row recurrences so universes up to the cap stay cheap.

use alloc::vec;
use alloc::vec::Vec;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Largest universe accepted by [`SetPairConfig::new`]; binomial coefficients
/// stay tractable below it.
pub const DEFAULT_UNIVERSE_CAP: u64 = 1 << 20;

/// Universe size ≤ 8 admits full permutation enumeration (8! = 40320).
pub const ENUMERATION_CAP: u64 = 8;

/// A pair of sets described only by the counts that the minima distribution
/// depends on: universe size `D`, cardinalities `f1`, `f2`, intersection `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetPairConfig {
    d: u64,
    f1: u64,
    f2: u64,
    a: u64,
}

impl SetPairConfig {
    /// Validates `0 ≤ a ≤ min(f1, f2)`, `f1, f2 ≥ 1`, `f1 + f2 − a ≤ D`, and
    /// the universe cap.
    pub fn new(d: u64, f1: u64, f2: u64, a: u64) -> Result<Self> {
        Self::with_cap(d, f1, f2, a, DEFAULT_UNIVERSE_CAP)
    }

    /// Like [`SetPairConfig::new`] with a caller-chosen universe cap.
    pub fn with_cap(d: u64, f1: u64, f2: u64, a: u64, cap: u64) -> Result<Self> {
        if d == 0 || d > cap {
            return Err(Error::Domain("universe size must be in 1..=cap"));
        }
        if f1 == 0 || f2 == 0 {
            return Err(Error::Domain("set cardinalities must be at least 1"));
        }
        if a > f1.min(f2) {
            return Err(Error::Infeasible("intersection exceeds a set cardinality"));
        }
        if f1 + f2 - a > d {
            return Err(Error::Infeasible("union exceeds universe size"));
        }
        Ok(Self { d, f1, f2, a })
    }

    /// Nearest integer realization of target ratios `r1 = f1/D`, `r2 = f2/D`
    /// and resemblance `R = a/(f1+f2−a)`; cardinalities are clamped to at
    /// least 1 and the intersection to the feasible range.
    pub fn from_ratios(d: u64, r1: f64, r2: f64, resemblance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r1) || !(0.0..=1.0).contains(&r2) {
            return Err(Error::Domain("ratios must lie in [0,1]"));
        }
        if !(0.0..=1.0).contains(&resemblance) {
            return Err(Error::Domain("resemblance must lie in [0,1]"));
        }
        let df = d as f64;
        let f1 = (crate::fmath::round(r1 * df) as u64).clamp(1, d);
        let f2 = (crate::fmath::round(r2 * df) as u64).clamp(1, d);
        let target = resemblance / (1.0 + resemblance) * (f1 + f2) as f64;
        let a = (crate::fmath::round(target) as u64).min(f1.min(f2));
        Self::new(d, f1, f2, a)
    }

    /// Universe size `D`.
    pub fn d(&self) -> u64 {
        self.d
    }

    /// `|S1|`.
    pub fn f1(&self) -> u64 {
        self.f1
    }

    /// `|S2|`.
    pub fn f2(&self) -> u64 {
        self.f2
    }

    /// `|S1 ∩ S2|`.
    pub fn a(&self) -> u64 {
        self.a
    }

    /// `|S1 ∪ S2| = f1 + f2 − a`.
    pub fn union(&self) -> u64 {
        self.f1 + self.f2 - self.a
    }

    /// `r1 = f1/D`.
    pub fn r1(&self) -> f64 {
        self.f1 as f64 / self.d as f64
    }

    /// `r2 = f2/D`.
    pub fn r2(&self) -> f64 {
        self.f2 as f64 / self.d as f64
    }

    /// `s = a/D`.
    pub fn s(&self) -> f64 {
        self.a as f64 / self.d as f64
    }

    /// Exact resemblance `R = a/(f1+f2−a)` of any realizing pair.
    pub fn resemblance(&self) -> f64 {
        self.a as f64 / self.union() as f64
    }
}

/// One entry of the joint distribution: `p = Pr(z1 = i, z2 = j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPmfEntry {
    /// Value taken by the first minimum.
    pub i: u64,
    /// Value taken by the second minimum.
    pub j: u64,
    /// Exact probability.
    pub p: BigRational,
}

/// `C(n, k)` with out-of-range arguments mapping to 0, as the case analysis
/// requires for boundary terms.
fn binom(n: i64, k: i64) -> BigUint {
    if k < 0 || n < 0 || k > n {
        return BigUint::zero();
    }
    num_integer::binomial(BigUint::from(n as u64), BigUint::from(k as u64))
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `Pr(z1 = i, z2 = j)` for the configured pair.
///
/// Three branches: `i < j` is the two-case binomial count (larger minimum
/// position held by an exclusive element, or adjacent to the intersection);
/// `i > j` is the same count with the two sets' roles swapped; `i = j` places
/// the union's minimum at `i` and inside the intersection. Each branch is
/// validated against [`enumerate_permutations`] in the test suite.
pub fn exact_joint_pmf(cfg: &SetPairConfig, i: u64, j: u64) -> Result<BigRational> {
    if i >= cfg.d || j >= cfg.d {
        return Err(Error::Domain("pmf index outside the universe"));
    }
    let d = cfg.d as i64;
    let (f1, f2, a) = (cfg.f1 as i64, cfg.f2 as i64, cfg.a as i64);
    let u = f1 + f2 - a;
    let (i, j) = (i as i64, j as i64);

    if i == j {
        if a == 0 {
            return Ok(BigRational::zero());
        }
        // Union minimum at slot i, and that slot belongs to the intersection.
        let num = BigUint::from(a as u64) * binom(d - i - 1, u - 1);
        let den = BigUint::from(u as u64) * binom(d, u);
        return Ok(ratio(num, den));
    }

    let p3 = binom(d, a) * binom(d - a, f1 - a) * binom(d - f1, f2 - a);
    let (p1, p2) = if i < j {
        let tail = binom(d - i - 1 - f2, f1 - a - 1);
        (
            binom(d - j - 1, a) * binom(d - j - 1 - a, f2 - a - 1) * tail.clone(),
            binom(d - j - 1, a - 1) * binom(d - j - a, f2 - a) * tail,
        )
    } else {
        let tail = binom(d - j - 1 - f1, f2 - a - 1);
        (
            binom(d - i - 1, a) * binom(d - i - 1 - a, f1 - a - 1) * tail.clone(),
            binom(d - i - 1, a - 1) * binom(d - i - a, f1 - a) * tail,
        )
    };
    Ok(ratio(p1 + p2, p3))
}

/// Large-universe approximation of the off-diagonal pmf:
/// `r2(r1−s)(1−r2)^{j−i−1}(1−(r1+r2−s))^i` for `i < j`, roles swapped for
/// `i > j`.
pub fn approx_joint_pmf(r1: f64, r2: f64, s: f64, i: u64, j: u64) -> Result<f64> {
    if i == j {
        return Err(Error::Domain("approximation is defined off-diagonal only"));
    }
    if s > r1.min(r2) {
        return Err(Error::Domain("intersection ratio exceeds a set ratio"));
    }
    let union = r1 + r2 - s;
    let (lo, hi, r_hi) = if i < j { (i, j, r2) } else { (j, i, r1) };
    let gap = (hi - lo - 1) as i32;
    Ok(r_hi
        * (r1 + r2 - r_hi - s)
        * crate::fmath::powi(1.0 - r_hi, gap)
        * crate::fmath::powi(1.0 - union, lo as i32))
}

/// Full joint distribution of `(z1, z2)` by iterating every permutation of
/// `{0..D}`. Returns all `D × D` entries in row-major order so callers can
/// compare entry-wise, including structural zeros.
pub fn enumerate_permutations(d: u64, s1: &[u64], s2: &[u64]) -> Result<Vec<JointPmfEntry>> {
    if d == 0 || d > ENUMERATION_CAP {
        return Err(Error::Domain("enumeration serves universes of size 1..=8"));
    }
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::Domain("sets must be non-empty"));
    }
    if s1.iter().chain(s2).any(|&x| x >= d) {
        return Err(Error::Domain("set element outside the universe"));
    }
    let dedup = |s: &[u64]| -> Vec<usize> {
        let mut v: Vec<usize> = s.iter().map(|&x| x as usize).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (s1, s2) = (dedup(s1), dedup(s2));

    let n = d as usize;
    let mut counts = vec![0u64; n * n];
    let mut total = 0u64;
    for perm in (0..n).permutations(n) {
        let z1 = s1.iter().map(|&x| perm[x]).min().expect("non-empty");
        let z2 = s2.iter().map(|&x| perm[x]).min().expect("non-empty");
        counts[z1 * n + z2] += 1;
        total += 1;
    }

    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(JointPmfEntry {
                i: i as u64,
                j: j as u64,
                p: ratio(BigUint::from(counts[i * n + j]), BigUint::from(total)),
            });
        }
    }
    Ok(out)
}

/// Whether the lowest `b` bits of `i` and `j` agree.
fn low_bits_match(i: u64, j: u64, b: u32) -> bool {
    if b >= 64 {
        i == j
    } else {
        (i ^ j) & ((1u64 << b) - 1) == 0
    }
}

/// Exact probability that the lowest `b` bits of `z1` and `z2` agree, as a
/// rational. Sums the full `D × D` pmf grid; intended for small universes
/// (the normalization suite uses `D ≤ 64`). For large universes use
/// [`exact_match_probability_f64`].
pub fn exact_match_probability(cfg: &SetPairConfig, b: u32) -> Result<BigRational> {
    if b == 0 {
        return Err(Error::Domain("bit width must be at least 1"));
    }
    let mut sum = BigRational::zero();
    for i in 0..cfg.d {
        for j in 0..cfg.d {
            if low_bits_match(i, j, b) {
                sum += exact_joint_pmf(cfg, i, j)?;
            }
        }
    }
    Ok(sum)
}

/// Relative tail threshold for the streaming float evaluation: a row or the
/// row sequence stops once the next term falls below this fraction of the
/// mass accumulated so far. Terms decay geometrically, so the neglected tail
/// is bounded by a small multiple of this threshold.
const STREAM_TAIL: f64 = 1e-18;

/// Float evaluation of [`exact_match_probability`] that streams the pmf
/// through its row recurrences instead of materializing binomials. Exact up
/// to f64 rounding and the documented tail truncation; practical at any
/// universe size the cap admits.
pub fn exact_match_probability_f64(cfg: &SetPairConfig, b: u32) -> Result<f64> {
    if b == 0 {
        return Err(Error::Domain("bit width must be at least 1"));
    }
    let d = cfg.d as f64;
    let u = cfg.union() as f64;
    let mut total = 0.0f64;

    // Diagonal: Pr(i,i) starts at a/D and carries ratio (D−i−u)/(D−i−1).
    if cfg.a > 0 {
        let mut term = cfg.a as f64 / d;
        let mut i = 0u64;
        loop {
            total += term;
            if i + 1 >= cfg.d {
                break;
            }
            term *= (d - i as f64 - u) / (d - i as f64 - 1.0);
            if term <= 0.0 || term < STREAM_TAIL * total {
                break;
            }
            i += 1;
        }
    }

    // Off-diagonal mass exists only when the step can stay inside the grid.
    if b < 64 && (1u64 << b) < cfg.d {
        let step = 1u64 << b;
        total += off_diagonal_stream(cfg.d, cfg.f1, cfg.f2, cfg.a, step, total);
        total += off_diagonal_stream(cfg.d, cfg.f2, cfg.f1, cfg.a, step, total);
    }
    Ok(total)
}

/// Mass of the branch where the `fa`-set's minimum sits at the smaller slot
/// `i` and the `fb`-set's at `j > i`, restricted to `j − i` divisible by
/// `step`. Row starts carry ratio `(D−u−i)/(D−i−2)`; within a row the term
/// carries `(D−fb−j)/(D−j−1)`.
fn off_diagonal_stream(d: u64, fa: u64, fb: u64, a: u64, step: u64, base_mass: f64) -> f64 {
    if fa == a {
        return 0.0; // the fa-set is contained in the other; its min is never strictly smaller
    }
    let df = d as f64;
    let u = (fa + fb - a) as f64;
    let mut sum = 0.0f64;
    let mut row = fb as f64 * (fa - a) as f64 / df / (df - 1.0); // Pr(i=0, j=1)
    let mut i = 0u64;
    loop {
        let mut term = row;
        let mut j = i + 1;
        loop {
            if (j - i).is_multiple_of(step) {
                sum += term;
            }
            if j + 1 >= d {
                break;
            }
            term *= (df - fb as f64 - j as f64) / (df - j as f64 - 1.0);
            if term <= 0.0 || term < STREAM_TAIL * (base_mass + sum) {
                break;
            }
            j += 1;
        }
        if i + 2 >= d {
            break;
        }
        row *= (df - u - i as f64) / (df - i as f64 - 2.0);
        if row <= 0.0 || row < STREAM_TAIL * (base_mass + sum) {
            break;
        }
        i += 1;
    }
    sum
}
