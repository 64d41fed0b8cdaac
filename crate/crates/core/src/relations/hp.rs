//! Rigorous fixed-point evaluation of Σ ±n_i^{1/k}.
//!
//! Each root is taken as ⌊n^{1/k}·2^P⌋ with exact big-integer arithmetic,
//! so the true value lies in a known interval of width (#terms)·2^{−P}.
//! With P = 192 the evaluation carries about 57 significant decimal digits
//! of absolute precision.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

pub const FRACTION_BITS: u64 = 192;

/// Enclosure `[value − radius, value + radius]` of a linear form in roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub value: f64,
    pub radius: f64,
}

impl Enclosure {
    /// True when zero lies outside the enclosure.
    pub fn excludes_zero(&self) -> bool {
        self.value.abs() > self.radius
    }

    pub fn magnitude(&self) -> f64 {
        self.value.abs()
    }
}

fn scaled_root(n: u64, k: u32) -> BigUint {
    let shifted = BigUint::from(n) << (FRACTION_BITS * k as u64);
    if k == 2 {
        shifted.sqrt()
    } else {
        shifted.nth_root(k)
    }
}

/// Evaluates Σ_i sign_i · n_i^{1/k} for `(n, positive)` terms.
pub fn evaluate(terms: &[(u64, bool)], k: u32) -> Enclosure {
    let mut total: BigInt = BigInt::zero();
    let mut plus = 0i64;
    let mut minus = 0i64;
    for &(n, positive) in terms {
        let r = BigInt::from_biguint(Sign::Plus, scaled_root(n, k));
        if positive {
            total += r;
            plus += 1;
        } else {
            total -= r;
            minus += 1;
        }
    }
    // Each floor undershoots by [0, 1): true·2^P ∈ [total − minus, total + plus].
    let centre: BigInt = total * 2 + BigInt::from(plus - minus);
    let scale = 2f64.powi(-(FRACTION_BITS as i32) - 1);
    let value = centre.to_f64().unwrap_or(f64::NAN) * scale;
    let radius = (plus + minus) as f64 * 2f64.powi(-(FRACTION_BITS as i32) - 1);
    Enclosure { value, radius }
}

/// Signed terms of a form: the first `plus` entries positive, the rest negative.
pub fn form_terms(tuple: &[u64], plus: usize) -> Vec<(u64, bool)> {
    tuple.iter().enumerate().map(|(i, &n)| (n, i < plus)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_relation_encloses_zero() {
        // √1 + √9 − √4 − √4 = 0
        let e = evaluate(&[(1, true), (9, true), (4, false), (4, false)], 2);
        assert!(!e.excludes_zero());
        assert!(e.value.abs() <= e.radius);
        assert!(e.radius < 1e-50);
    }

    #[test]
    fn tiny_gap_resolved() {
        // √100 − √99 = 1/(√100 + √99)
        let e = evaluate(&[(100, true), (99, false)], 2);
        let want = 1.0 / (10.0 + 99f64.sqrt());
        assert!(e.excludes_zero());
        assert!((e.value - want).abs() < 1e-16);
    }

    #[test]
    fn cube_roots() {
        // 2·∛8 − ∛64 = 0 ; ∛2 ≈ 1.2599210498948732
        let z = evaluate(&[(8, true), (8, true), (64, false)], 3);
        assert!(!z.excludes_zero());
        let c = evaluate(&[(2, true)], 3);
        assert!((c.value - 1.259_921_049_894_873_2).abs() < 1e-15);
    }

    #[test]
    fn resolves_below_double_precision() {
        // √(10^12+1) − √(10^12) − 1/(2·10^6) ≈ −1.25e-19, invisible in doubles
        let a = 1_000_000_000_001u64;
        let e = evaluate(&[(a, true), (1_000_000_000_000, false)], 2);
        let diff = e.value - 5e-7;
        assert!((diff + 1.25e-19).abs() < 1e-21, "diff {diff}");
    }
}
