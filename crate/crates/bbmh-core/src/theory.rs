//! Closed-form accuracy theory for b-bit minwise sketches.
//!
//! Storing only the lowest `b` bits of each minwise value makes accidental
//! low-bit agreement possible, so the raw match probability `E_b` mixes the
//! true resemblance `R` with correction terms driven by how densely the two
//! sets fill the universe (`r1 = f1/D`, `r2 = f2/D`):
//!
//! ```text
//! A_{j,b} = r_j (1−r_j)^{2^b−1} / (1 − (1−r_j)^{2^b})
//! C_{1,b} = A_{1,b}·r2/(r1+r2) + A_{2,b}·r1/(r1+r2)
//! C_{2,b} = A_{1,b}·r1/(r1+r2) + A_{2,b}·r2/(r1+r2)
//! E_b     = C_{1,b} + (1 − C_{2,b})·R
//! ```
//!
//! Inverting `E_b` yields the unbiased estimator implemented in
//! [`crate::estimate`]; its variance, the storage factor `B(b) = b·Var·k`,
//! and the ratios of storage factors quantify the space savings of small `b`.
//! The half-bit XOR scheme gets its own variance and crossover analysis.
//! Everything here is plain f64 evaluation; exactness lives in
//! [`crate::oracle`].

use crate::error::{Error, Result};
use crate::fmath;

/// Parameter bundle every closed form is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    resemblance: f64,
    r1: f64,
    r2: f64,
    b: u32,
    k: u64,
}

/// Feasibility slack absorbing float rounding in `R ≤ min(r1,r2)/max(r1,r2)`.
const FEASIBILITY_EPS: f64 = 1e-12;

impl TheoryParams {
    /// Validates ranges and the realizability constraint
    /// `R ≤ min(r1,r2)/max(r1,r2)` (an intersection can be at most as large
    /// as the smaller set, which bounds the resemblance of any realizing
    /// pair).
    pub fn new(resemblance: f64, r1: f64, r2: f64, b: u32, k: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&resemblance) {
            return Err(Error::Domain("resemblance must lie in [0,1]"));
        }
        if !(0.0..=1.0).contains(&r1) || !(0.0..=1.0).contains(&r2) {
            return Err(Error::Domain("set ratios must lie in [0,1]"));
        }
        if r1 + r2 == 0.0 {
            return Err(Error::Domain("at least one set ratio must be positive"));
        }
        if b == 0 {
            return Err(Error::Domain("bit width must be at least 1"));
        }
        if k == 0 {
            return Err(Error::Domain("sample count must be at least 1"));
        }
        let ratio = r1.min(r2) / r1.max(r2);
        if resemblance > ratio + FEASIBILITY_EPS {
            return Err(Error::Infeasible(
                "resemblance exceeds the cardinality ratio of the sets",
            ));
        }
        Ok(Self { resemblance, r1, r2, b, k })
    }

    /// Resemblance `R`.
    pub fn resemblance(&self) -> f64 {
        self.resemblance
    }

    /// `r1 = f1/D`.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// `r2 = f2/D`.
    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// Bits per sample.
    pub fn b(&self) -> u32 {
        self.b
    }

    /// Sample count.
    pub fn k(&self) -> u64 {
        self.k
    }

    fn with_b(&self, b: u32) -> Self {
        Self { b, ..*self }
    }
}

/// The correction factors of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFactors {
    /// `A_{1,b}`, in `[0, 2^{-b}]`.
    pub a1: f64,
    /// `A_{2,b}`, in `[0, 2^{-b}]`.
    pub a2: f64,
    /// `C_{1,b}`, the additive correction.
    pub c1: f64,
    /// `C_{2,b}`, the slope correction.
    pub c2: f64,
}

/// `A_{j,b} = r(1−r)^{2^b−1}/(1−(1−r)^{2^b})`, with the continuity limits
/// `2^{-b}` at `r = 0` and `0` at `r = 1`.
///
/// Evaluated as `r·exp((2^b−1)·ln(1−r)) / −expm1(2^b·ln(1−r))`: the
/// `ln_1p`/`exp_m1` route keeps full precision where `r·2^b` is small. The
/// naive denominator `1−(1−r)^(2^b)` cancels to noise there and collapses to
/// an outright division by zero once `r` drops below one ulp of 1, which is
/// the normal regime for document-sized sets in a 64-bit universe.
pub fn a_factor(r: f64, b: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain("ratio must lie in [0,1]"));
    }
    if b == 0 {
        return Err(Error::Domain("bit width must be at least 1"));
    }
    if r == 0.0 {
        return Ok(fmath::powi(0.5, b as i32));
    }
    if r == 1.0 {
        return Ok(0.0);
    }
    let n = fmath::powi(2.0, b as i32);
    let log_survive = fmath::ln_1p(-r);
    let numer = r * fmath::exp((n - 1.0) * log_survive);
    let denom = -fmath::exp_m1(n * log_survive);
    Ok(numer / denom)
}

/// Both `A` factors and the `C` factors they combine into.
pub fn c_factors(r1: f64, r2: f64, b: u32) -> Result<CFactors> {
    if r1 + r2 <= 0.0 {
        return Err(Error::Domain("weights undefined for r1 = r2 = 0"));
    }
    let a1 = a_factor(r1, b)?;
    let a2 = a_factor(r2, b)?;
    let w = r1 + r2;
    Ok(CFactors {
        a1,
        a2,
        c1: a1 * (r2 / w) + a2 * (r1 / w),
        c2: a1 * (r1 / w) + a2 * (r2 / w),
    })
}

fn c_factors_of(p: &TheoryParams) -> CFactors {
    c_factors(p.r1, p.r2, p.b).expect("TheoryParams guarantees r1 + r2 > 0 and b ≥ 1")
}

/// Match probability `E_b = C_{1,b} + (1 − C_{2,b})·R` of one b-bit sample.
pub fn match_probability(p: &TheoryParams) -> f64 {
    let c = c_factors_of(p);
    let e = c.c1 + (1.0 - c.c2) * p.resemblance;
    debug_assert!((-1e-12..=1.0 + 1e-12).contains(&e));
    e
}

/// Variance of the plain minwise estimator: `R(1−R)/k`.
pub fn variance_minwise(resemblance: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&resemblance) {
        return Err(Error::Domain("resemblance must lie in [0,1]"));
    }
    if k == 0 {
        return Err(Error::Domain("sample count must be at least 1"));
    }
    Ok(resemblance * (1.0 - resemblance) / k as f64)
}

/// Variance of the unbiased b-bit estimator:
/// `E_b(1−E_b) / ((1−C_{2,b})²·k)`. Converges to [`variance_minwise`] as `b`
/// grows.
pub fn variance_bbit(p: &TheoryParams) -> f64 {
    let c = c_factors_of(p);
    let e = c.c1 + (1.0 - c.c2) * p.resemblance;
    debug_assert!(c.c2 < 1.0);
    e * (1.0 - e) / ((1.0 - c.c2) * (1.0 - c.c2)) / p.k as f64
}

/// Storage factor `B(b) = b · Var(R̂_b) · k`; the `k` dependence cancels, so
/// this is evaluated directly from `E_b`.
pub fn storage_factor(p: &TheoryParams) -> f64 {
    let c = c_factors_of(p);
    let e = c.c1 + (1.0 - c.c2) * p.resemblance;
    p.b as f64 * e * (1.0 - e) / ((1.0 - c.c2) * (1.0 - c.c2))
}

/// Storage improvement `B(b1)/B(b2)` at the parameter point (the `b` carried
/// by `p` is ignored in favor of `b1` and `b2`).
///
/// At `R = 1` both storage factors vanish; use
/// [`improvement_ratio_at_unit_resemblance`] for that removable singularity.
pub fn improvement_ratio(b1: u32, b2: u32, p: &TheoryParams) -> Result<f64> {
    if b1 == 0 || b2 == 0 {
        return Err(Error::Domain("bit widths must be at least 1"));
    }
    if p.resemblance == 1.0 {
        return Err(Error::Domain(
            "storage factors vanish at R = 1; use the unit-resemblance limit",
        ));
    }
    Ok(storage_factor(&p.with_b(b1)) / storage_factor(&p.with_b(b2)))
}

/// Limit of [`improvement_ratio`] as `R → 1` (which forces `r1 = r2 = r`):
/// `(b1/b2)·(1 − A_{1,b2})/(1 − A_{1,b1})`.
pub fn improvement_ratio_at_unit_resemblance(b1: u32, b2: u32, r: f64) -> Result<f64> {
    let a_b1 = a_factor(r, b1)?;
    let a_b2 = a_factor(r, b2)?;
    if b1 == 0 || b2 == 0 {
        return Err(Error::Domain("bit widths must be at least 1"));
    }
    Ok(b1 as f64 / b2 as f64 * ((1.0 - a_b2) / (1.0 - a_b1)))
}

/// Closed-form improvement `B(b1)/B(1) = b1·R/(R + 1 − r1)` for `r1 = r2`
/// and `b1 ≥ 32` (where `A_{1,b1}` has vanished).
pub fn closed_form_improvement(b1: u32, resemblance: f64, r1: f64) -> Result<f64> {
    if b1 < 32 {
        return Err(Error::Domain("closed form assumes b1 ≥ 32"));
    }
    if !(0.0..=1.0).contains(&resemblance) || !(0.0..=1.0).contains(&r1) {
        return Err(Error::Domain("resemblance and ratio must lie in [0,1]"));
    }
    let den = resemblance + 1.0 - r1;
    if den == 0.0 {
        return Err(Error::Domain("degenerate point R = 0, r1 = 1"));
    }
    Ok(b1 as f64 * resemblance / den)
}

/// XOR-match probability of the half-bit scheme: `T = E_1² + (1−E_1)²`,
/// always in `[0.5, 1]`.
pub fn t_probability(e1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e1) {
        return Err(Error::Domain("probability must lie in [0,1]"));
    }
    Ok(e1 * e1 + (1.0 - e1) * (1.0 - e1))
}

/// Delta-method variance of the half-bit estimator:
/// `T(1−T) / (4(1−C_{2,1})²(2T−1)·k)`, with `T` evaluated at this point's
/// one-bit match probability. Requires `p.b == 1`.
///
/// Errors when `T ≤ 0.5`: the quadratic inversion has no slope there and the
/// estimator carries no information. The discriminant is evaluated as
/// `2T−1 = (2E_1−1)²` (an algebraic identity), which stays meaningful near
/// `E_1 = 1/2` where forming `T` first would cancel to rounding noise.
pub fn variance_half(p: &TheoryParams) -> Result<f64> {
    if p.b != 1 {
        return Err(Error::Domain("half-bit variance is defined on b = 1 parameters"));
    }
    let c = c_factors_of(p);
    let e1 = c.c1 + (1.0 - c.c2) * p.resemblance;
    let t = t_probability(e1)?;
    let slope = 2.0 * e1 - 1.0;
    let disc = slope * slope;
    if disc <= 0.0 {
        return Err(Error::Domain(
            "half-bit estimator is uninformative where T <= 1/2",
        ));
    }
    let om = 1.0 - c.c2;
    Ok(t * (1.0 - t) / (4.0 * om * om * disc) / p.k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64, r1: f64, r2: f64, b: u32, k: u64) -> TheoryParams {
        TheoryParams::new(r, r1, r2, b, k).unwrap()
    }

    #[test]
    fn a_factor_limits() {
        assert_eq!(a_factor(0.0, 2).unwrap(), 0.25);
        assert_eq!(a_factor(1.0, 3).unwrap(), 0.0);
        assert!((a_factor(0.5, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn a_factor_rejects_bad_input() {
        assert!(a_factor(-0.1, 1).is_err());
        assert!(a_factor(1.1, 1).is_err());
        assert!(a_factor(0.5, 0).is_err());
    }

    #[test]
    fn a_factor_huge_b_underflows_cleanly() {
        let a = a_factor(1e-8, 64).unwrap();
        assert!((0.0..1e-12).contains(&a), "a = {a}");
    }

    #[test]
    fn c_factors_symmetry_and_limit() {
        let c = c_factors(0.5, 0.5, 1).unwrap();
        assert!((c.c1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.c1, c.c2);
        assert_eq!(c.a1, c.a2);

        let c = c_factors(1e-12, 1e-12, 1).unwrap();
        assert!((c.c1 - 0.5).abs() < 1e-9);

        assert!(c_factors(0.0, 0.0, 1).is_err());
    }

    #[test]
    fn c_factor_ordering_for_asymmetric_sets() {
        // Larger set ⇒ smaller A factor, which puts more weight on c1.
        let c = c_factors(0.570, 0.554, 1).unwrap();
        assert!(c.c1 > 0.0 && c.c1 < 0.5);
        assert!(c.c2 > 0.0 && c.c2 < 0.5);
        assert!(c.c1 >= c.c2);
    }

    #[test]
    fn match_probability_endpoints() {
        let p = params(1.0, 0.3, 0.3, 2, 1);
        assert!((match_probability(&p) - 1.0).abs() < 1e-15);

        let p = params(0.0, 1e-12, 1e-12, 1, 1);
        assert!((match_probability(&p) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn minwise_variance_values() {
        assert_eq!(variance_minwise(0.5, 100).unwrap(), 0.0025);
        assert_eq!(variance_minwise(1.0, 7).unwrap(), 0.0);
        assert!((variance_minwise(0.925, 500).unwrap() - 1.3875e-4).abs() < 1e-18);
        assert!(variance_minwise(0.5, 0).is_err());
    }

    #[test]
    fn bbit_variance_converges_to_minwise() {
        for &(r, r1, r2) in &[(0.5, 0.1, 0.1), (0.925, 0.0145, 0.0143), (0.2, 0.6, 0.3)] {
            let p = params(r, r1, r2, 32, 10);
            let vb = variance_bbit(&p);
            let vm = variance_minwise(r, 10).unwrap();
            assert!((vb - vm).abs() < 1e-8, "abs gap {}", (vb - vm).abs());
            assert!((vb - vm).abs() <= 1e-6 * vm.max(1e-300), "rel gap");
        }
    }

    #[test]
    fn one_bit_variance_tripling_at_sparse_half_resemblance() {
        let p = params(0.5, 1e-10, 1e-10, 1, 1);
        let ratio = variance_bbit(&p) / variance_minwise(0.5, 1).unwrap();
        assert!((ratio - 3.0).abs() < 1e-6, "ratio {ratio}");
    }

    #[test]
    fn storage_factor_is_k_free() {
        let p1 = params(0.4, 0.2, 0.3, 2, 1);
        let p1000 = params(0.4, 0.2, 0.3, 2, 1000);
        assert_eq!(storage_factor(&p1), storage_factor(&p1000));
    }

    #[test]
    fn storage_factor_limits() {
        let p = params(1.0, 0.3, 0.3, 1, 1);
        assert!(storage_factor(&p).abs() < 1e-15);

        let p = params(0.5, 1e-10, 1e-10, 1, 1);
        assert!((storage_factor(&p) - 0.75).abs() < 1e-6);
    }

    #[test]
    fn improvement_ratio_spot_values() {
        // KONG/HONG and OF/AND rows of the reference table.
        let p = params(0.925, 0.0145, 0.0143, 1, 1);
        let r = improvement_ratio(32, 1, &p).unwrap();
        assert!((r - 15.5).abs() <= 0.05, "B(32)/B(1) = {r}");

        let p = params(0.771, 0.570, 0.554, 1, 1);
        let r = improvement_ratio(64, 1, &p).unwrap();
        assert!((r - 40.8).abs() <= 0.1, "B(64)/B(1) = {r}");

        assert_eq!(improvement_ratio(3, 3, &p).unwrap(), 1.0);
    }

    #[test]
    fn improvement_ratio_unit_resemblance_branch() {
        let p = params(1.0, 0.3, 0.3, 1, 1);
        assert!(improvement_ratio(32, 1, &p).is_err());

        // The limit branch agrees with the closed form at r1 = 1.
        let lim = improvement_ratio_at_unit_resemblance(64, 1, 1.0).unwrap();
        assert!((lim - 64.0).abs() < 1e-12);

        // Continuity: approaching R = 1 approaches the limit branch.
        let p = params(0.999999, 0.25, 0.25, 1, 1);
        let near = improvement_ratio(32, 1, &p).unwrap();
        let lim = improvement_ratio_at_unit_resemblance(32, 1, 0.25).unwrap();
        assert!((near - lim).abs() < 1e-3, "{near} vs {lim}");
    }

    #[test]
    fn closed_form_headline_factors() {
        assert!((closed_form_improvement(64, 0.5, 0.0).unwrap() - 64.0 / 3.0).abs() < 1e-12);
        assert!((closed_form_improvement(32, 0.5, 0.0).unwrap() - 32.0 / 3.0).abs() < 1e-12);
        assert!((closed_form_improvement(64, 1.0, 1.0).unwrap() - 64.0).abs() < 1e-12);
        assert!(closed_form_improvement(16, 0.5, 0.0).is_err());
    }

    #[test]
    fn t_probability_values() {
        assert_eq!(t_probability(1.0).unwrap(), 1.0);
        assert_eq!(t_probability(0.5).unwrap(), 0.5);
        assert_eq!(t_probability(0.75).unwrap(), 0.625);
        for e in [0.0, 0.2, 0.35, 0.8] {
            assert_eq!(t_probability(e).unwrap(), t_probability(1.0 - e).unwrap());
        }
    }

    #[test]
    fn half_variance_doubling_near_unit_resemblance() {
        let p = params(0.99, 0.5, 0.5, 1, 1);
        let ratio = variance_bbit(&p) / variance_half(&p).unwrap();
        assert!((1.8..=2.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn half_variance_crossover_brackets_constant() {
        let diff = |r: f64| {
            let p = params(r, 1e-9, 1e-9, 1, 1);
            variance_bbit(&p) - variance_half(&p).unwrap()
        };
        assert!(diff(0.55) < 0.0);
        assert!(diff(0.60) > 0.0);

        // Bisect the sign change; it must land within 0.001 of 0.5774.
        let (mut lo, mut hi) = (0.55f64, 0.60f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if diff(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 0.5774).abs() <= 1e-3, "crossover at {root}");
    }

    #[test]
    fn half_variance_uninformative_at_zero_resemblance() {
        // Sparse enough that floats collapse C1 to exactly 1/2: the
        // discriminant 2T-1 = (2*C1-1)^2 hits zero and inversion fails.
        let p = params(0.0, 1e-18, 1e-18, 1, 1);
        assert!(variance_half(&p).is_err());
        // Slightly denser, the discriminant is (r/(2-r))^2 > 0 and the
        // variance is finite but astronomical.
        let p = params(0.0, 1e-9, 1e-9, 1, 1);
        assert!(variance_half(&p).unwrap() > 1e12);
        let p = params(0.4, 0.2, 0.2, 2, 1);
        assert!(variance_half(&p).is_err(), "requires b = 1 semantics");
    }

    #[test]
    fn params_validation() {
        assert!(TheoryParams::new(0.8, 0.1, 0.5, 1, 1).is_err()); // R > min/max
        assert!(TheoryParams::new(0.5, 0.0, 0.0, 1, 1).is_err());
        assert!(TheoryParams::new(0.5, 0.3, 0.3, 0, 1).is_err());
        assert!(TheoryParams::new(0.5, 0.3, 0.3, 1, 0).is_err());
        assert!(TheoryParams::new(1.1, 0.3, 0.3, 1, 1).is_err());
        assert!(TheoryParams::new(0.2, 0.1, 0.5, 1, 1).is_ok());
    }
}
