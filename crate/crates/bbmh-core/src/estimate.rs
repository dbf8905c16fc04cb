//! Resemblance estimators over pairs of sketches.
//!
//! All estimators require the two sketches to come from the same permutation
//! family (seed, universe width, sample count, and bit width where relevant);
//! mismatches are reported as errors rather than silently producing noise.
//!
//! The truncated estimators need the universe size and the two set sizes to
//! form their collision corrections; set sizes travel inside the sketches,
//! the universe size is passed explicitly (use [`universe_size`] for the
//! full `2^m` universe).

use crate::error::{Error, Result};
use crate::fmath;
use crate::sketch::{BbitSketch, HalfBitSketch, MinwiseSketch};
use crate::theory;

/// Which estimator produced an [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Full-width sample comparison.
    Minwise {
        /// Universe width, which is also the stored bits per sample.
        domain_bits: u32,
    },
    /// Collision-corrected comparison of b-bit samples.
    Bbit {
        /// Bits kept per sample.
        b: u32,
    },
    /// Collision-corrected comparison of xor-folded bits, half a bit of
    /// storage per underlying permutation.
    Half,
}

impl EstimatorKind {
    /// Bits of storage per stored sample.
    pub fn bits_per_sample(&self) -> u32 {
        match self {
            EstimatorKind::Minwise { domain_bits } => *domain_bits,
            EstimatorKind::Bbit { b } => *b,
            EstimatorKind::Half => 1,
        }
    }
}

/// An estimator output, keeping the raw value alongside a clamped one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Raw estimator output; unbiased but may fall outside `[0, 1]`.
    pub value: f64,
    /// `value` clamped to `[0, 1]` for consumers that need a resemblance.
    pub clamped: f64,
    /// Samples the estimate averaged over.
    pub k: u32,
    /// Which estimator ran.
    pub kind: EstimatorKind,
    /// True when the xor-folded discriminant `2*T - 1` fell below zero and
    /// was truncated; the estimate carries little information in that regime.
    pub truncated: bool,
}

/// The universe size `2^m` for a given width.
pub fn universe_size(domain_bits: u32) -> u128 {
    1u128 << domain_bits
}

fn check_family(
    seed_a: u64,
    seed_b: u64,
    m_a: u32,
    m_b: u32,
    k_a: u32,
    k_b: u32,
) -> Result<()> {
    if seed_a != seed_b {
        return Err(Error::Incompatible("sketches come from different seeds"));
    }
    if m_a != m_b {
        return Err(Error::Incompatible("sketches cover different universes"));
    }
    if k_a != k_b {
        return Err(Error::Incompatible("sketches have different sample counts"));
    }
    Ok(())
}

fn ratios(f_a: u64, f_b: u64, domain_bits: u32, universe: u128) -> Result<(f64, f64)> {
    if universe == 0 {
        return Err(Error::Domain("universe size must be positive"));
    }
    if universe > universe_size(domain_bits) {
        return Err(Error::Domain("universe larger than the sketch domain"));
    }
    if u128::from(f_a) > universe || u128::from(f_b) > universe {
        return Err(Error::Domain("set size exceeds the universe"));
    }
    let d = universe as f64;
    Ok((f_a as f64 / d, f_b as f64 / d))
}

/// Fraction of samples on which two full-width sketches agree; this is the
/// classic estimator and is already in `[0, 1]`.
pub fn estimate_minwise(a: &MinwiseSketch, b: &MinwiseSketch) -> Result<Estimate> {
    check_family(a.seed(), b.seed(), a.domain_bits(), b.domain_bits(), a.k(), b.k())?;
    let matches = a
        .mins()
        .iter()
        .zip(b.mins())
        .filter(|(x, y)| x == y)
        .count() as f64;
    let value = matches / f64::from(a.k());
    Ok(Estimate {
        value,
        clamped: value,
        k: a.k(),
        kind: EstimatorKind::Minwise { domain_bits: a.domain_bits() },
        truncated: false,
    })
}

/// Raw fraction of agreeing b-bit samples, before collision correction.
pub fn match_fraction(a: &BbitSketch, b: &BbitSketch) -> Result<f64> {
    check_family(a.seed(), b.seed(), a.domain_bits(), b.domain_bits(), a.k(), b.k())?;
    if a.b() != b.b() {
        return Err(Error::Incompatible("sketches keep different bits per sample"));
    }
    Ok(a.match_count(b) as f64 / f64::from(a.k()))
}

/// Unbiased resemblance estimate from b-bit sketches: the raw match fraction
/// shifted and scaled by the accidental-collision terms for sets of the
/// given sizes inside `universe`.
pub fn estimate_bbit(a: &BbitSketch, b: &BbitSketch, universe: u128) -> Result<Estimate> {
    let e = match_fraction(a, b)?;
    let (r1, r2) = ratios(a.f(), b.f(), a.domain_bits(), universe)?;
    let c = theory::c_factors(r1, r2, a.b())?;
    let value = (e - c.c1) / (1.0 - c.c2);
    Ok(Estimate {
        value,
        clamped: value.clamp(0.0, 1.0),
        k: a.k(),
        kind: EstimatorKind::Bbit { b: a.b() },
        truncated: false,
    })
}

/// Resemblance estimate from xor-folded sketches. The agreement probability
/// of a folded bit is quadratic in the one-bit agreement probability, so the
/// estimator inverts `2*T - 1` through a square root; when sampling noise
/// drives that discriminant negative it is truncated to zero and the
/// estimate is flagged.
pub fn estimate_half(a: &HalfBitSketch, b: &HalfBitSketch, universe: u128) -> Result<Estimate> {
    check_family(a.seed(), b.seed(), a.domain_bits(), b.domain_bits(), a.k(), b.k())?;
    let (r1, r2) = ratios(a.f(), b.f(), a.domain_bits(), universe)?;
    let c = theory::c_factors(r1, r2, 1)?;
    let t_hat = a.match_count(b) as f64 / f64::from(a.k());
    let disc = 2.0 * t_hat - 1.0;
    let truncated = disc < 0.0;
    let value = (fmath::sqrt(disc.max(0.0)) + 1.0 - 2.0 * c.c1) / (2.0 - 2.0 * c.c2);
    Ok(Estimate {
        value,
        clamped: value.clamp(0.0, 1.0),
        k: a.k(),
        kind: EstimatorKind::Half,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permute::PermutationFamily;
    use alloc::vec;
    use alloc::vec::Vec;

    fn family(m: u32, seed: u64, k: u32) -> PermutationFamily {
        PermutationFamily::new(m, seed, k).unwrap()
    }

    #[test]
    fn identical_sets_estimate_one() {
        let fam = family(16, 11, 64);
        let s = MinwiseSketch::build(&fam, &[1, 5, 9, 1000]).unwrap();
        let est = estimate_minwise(&s, &s.clone()).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.kind.bits_per_sample(), 16);

        let b = s.lowest_bits(4).unwrap();
        let est = estimate_bbit(&b, &b.clone(), universe_size(16)).unwrap();
        // Matching samples everywhere puts the corrected estimate at
        // (1 - c1) / (1 - c2) which exceeds 1 slightly for finite sets.
        assert!(est.value >= 1.0);
        assert_eq!(est.clamped, 1.0);
    }

    #[test]
    fn estimators_roughly_track_a_planted_overlap() {
        // |S1| = |S2| = 200 with 150 shared: R = 150 / 250 = 0.6.
        let fam = family(20, 0xcafe, 600);
        let s1: Vec<u64> = (0..200u64).collect();
        let s2: Vec<u64> = (50..250u64).collect();
        let m1 = MinwiseSketch::build(&fam, &s1).unwrap();
        let m2 = MinwiseSketch::build(&fam, &s2).unwrap();
        let d = universe_size(20);

        let est = estimate_minwise(&m1, &m2).unwrap();
        assert!((est.value - 0.6).abs() < 0.08, "minwise {}", est.value);

        for b in [1u32, 2, 4, 8] {
            let est = estimate_bbit(
                &m1.lowest_bits(b).unwrap(),
                &m2.lowest_bits(b).unwrap(),
                d,
            )
            .unwrap();
            assert!((est.value - 0.6).abs() < 0.2, "b={b} {}", est.value);
        }

        let h1 = m1.lowest_bits(1).unwrap().xor_combine().unwrap();
        let h2 = m2.lowest_bits(1).unwrap().xor_combine().unwrap();
        let est = estimate_half(&h1, &h2, d).unwrap();
        assert!((est.value - 0.6).abs() < 0.25, "half {}", est.value);
    }

    #[test]
    fn full_width_truncation_reproduces_the_classic_estimate() {
        let fam = family(64, 0xfade, 128);
        let mut s1: Vec<u64> = (0..1500u64).map(|i| i.wrapping_mul(0x9E37_79B9)).collect();
        let s2: Vec<u64> = s1.iter().map(|&x| x ^ 1).collect();
        s1.truncate(1200);
        let m1 = MinwiseSketch::build(&fam, &s1).unwrap();
        let m2 = MinwiseSketch::build(&fam, &s2).unwrap();
        let classic = estimate_minwise(&m1, &m2).unwrap();
        let truncated = estimate_bbit(
            &m1.lowest_bits(64).unwrap(),
            &m2.lowest_bits(64).unwrap(),
            universe_size(64),
        )
        .unwrap();
        assert_eq!(classic.value.to_bits(), truncated.value.to_bits());
    }

    #[test]
    fn raw_value_can_leave_the_unit_interval_but_clamp_cannot() {
        // All-zero against all-one packed bits: zero agreement, so the
        // collision correction pushes the raw estimate below zero.
        let a = BbitSketch {
            domain_bits: 16,
            seed: 1,
            k: 40,
            b: 1,
            f: 3000,
            packed: vec![0x00; 5],
        };
        let b = BbitSketch { packed: vec![0xFF; 5], ..a.clone() };
        let est = estimate_bbit(&a, &b, universe_size(16)).unwrap();
        assert!(est.value < 0.0);
        assert_eq!(est.clamped, 0.0);
    }

    #[test]
    fn folded_discriminant_truncates_below_half_agreement() {
        let a = HalfBitSketch {
            domain_bits: 16,
            seed: 1,
            k: 16,
            f: 2000,
            packed: vec![0x00, 0x00],
        };
        let b = HalfBitSketch { packed: vec![0xFF, 0xFF], ..a.clone() };
        let est = estimate_half(&a, &b, universe_size(16)).unwrap();
        assert!(est.truncated);
        assert!(est.value <= 0.51);

        let est = estimate_half(&a, &a.clone(), universe_size(16)).unwrap();
        assert!(!est.truncated);
        assert!(est.value >= 0.99);
    }

    #[test]
    fn family_mismatches_are_rejected() {
        let s = MinwiseSketch::build(&family(16, 1, 8), &[1, 2]).unwrap();
        let other_seed = MinwiseSketch::build(&family(16, 2, 8), &[1, 2]).unwrap();
        let other_k = MinwiseSketch::build(&family(16, 1, 9), &[1, 2]).unwrap();
        let other_m = MinwiseSketch::build(&family(20, 1, 8), &[1, 2]).unwrap();
        assert!(estimate_minwise(&s, &other_seed).is_err());
        assert!(estimate_minwise(&s, &other_k).is_err());
        assert!(estimate_minwise(&s, &other_m).is_err());

        let b4 = s.lowest_bits(4).unwrap();
        let b5 = s.lowest_bits(5).unwrap();
        assert!(match_fraction(&b4, &b5).is_err());
        assert!(estimate_bbit(&b4, &b5, universe_size(16)).is_err());
    }

    #[test]
    fn universe_arguments_are_validated() {
        let fam = family(16, 1, 8);
        let s = MinwiseSketch::build(&fam, &(0..100u64).collect::<Vec<_>>()).unwrap();
        let b = s.lowest_bits(2).unwrap();
        assert!(estimate_bbit(&b, &b.clone(), 0).is_err());
        assert!(estimate_bbit(&b, &b.clone(), 50).is_err());
        assert!(estimate_bbit(&b, &b.clone(), universe_size(17)).is_err());
        assert!(estimate_bbit(&b, &b.clone(), universe_size(16)).is_ok());
        // A smaller effective universe is fine when the sets fit inside it.
        assert!(estimate_bbit(&b, &b.clone(), 1 << 10).is_ok());
    }
}
