//! Partial sums of the series constants C₁, C₂, C₄, C₇ and the main-term
//! coefficients of the moments of Δ.
//!
//! C₂, C₄ and C₇ are sums of ∏ d(nᵢ) nᵢ^{−3/4} over exact square-root
//! relations of signature (2,2), (6,2) and (4,4); they are evaluated by the
//! kernel-class dynamic programme of [`crate::relations::kernel_class_sum`].
//! C₁ is summed directly over (α, β, h).

use std::f64::consts::PI;

use serde::Serialize;

use crate::divisor::{divisor_count_trial, DivisorTable};
use crate::error::{LabError, Result};
use crate::numeric::{zeta, CompensatedSum};
use crate::relations::{k_free_up_to, kernel_class_sum};

/// Largest cutoff accepted (divisor table memory).
pub const MAX_CUTOFF: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConstantName {
    C1,
    C2,
    C4,
    C7,
    #[serde(rename = "c2_closed")]
    C2Closed,
}

impl std::fmt::Display for ConstantName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstantName::C1 => "C1",
            ConstantName::C2 => "C2",
            ConstantName::C4 => "C4",
            ConstantName::C7 => "C7",
            ConstantName::C2Closed => "c2_closed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub name: ConstantName,
    /// Every variable of the summed relations is at most this cutoff.
    pub cutoff: u64,
    pub partial_sum: f64,
    /// |partial(Y) − partial(Y/2)|.
    pub tail_indicator: f64,
    /// Intercept a of the least-squares fit a + b·Y^{−1/2} over Y/4, Y/2, Y.
    pub extrapolated: f64,
}

fn check_cutoff(y: u64) -> Result<()> {
    if y == 0 {
        return Err(LabError::argument("cutoff Y must be at least 1"));
    }
    if y > MAX_CUTOFF {
        return Err(LabError::budget(format!("constant cutoff Y = {y}"), y as u128, MAX_CUTOFF as u128)
            .with_hint("lower the cutoff"));
    }
    Ok(())
}

/// d(n)·n^{−3/4} for n in [1, y].
fn weights(y: u64) -> Result<Vec<f64>> {
    let table = DivisorTable::build(1, y + 1)?;
    Ok((1..=y).map(|n| table.d(n) as f64 * (n as f64).powf(-0.75)).collect())
}

/// Intercept of the least-squares line through (Y^{−1/2}, partial).
pub fn extrapolate(points: &[(u64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0).map(|&(y, v)| ((y as f64).powf(-0.5), v)).collect();
    match pts.len() {
        0 => f64::NAN,
        1 => pts[0].1,
        _ => {
            let n = pts.len() as f64;
            let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
            mv - sxy / sxx * mt
        }
    }
}

fn estimate(name: ConstantName, y: u64, partial: impl Fn(u64) -> Result<f64>) -> Result<ConstantEstimate> {
    check_cutoff(y)?;
    let full = partial(y)?;
    let half = if y >= 2 { partial(y / 2)? } else { 0.0 };
    let quarter = if y >= 4 { partial(y / 4)? } else { 0.0 };
    Ok(ConstantEstimate {
        name,
        cutoff: y,
        partial_sum: full,
        tail_indicator: (full - half).abs(),
        extrapolated: extrapolate(&[(y / 4, quarter), (y / 2, half), (y, full)]),
    })
}

fn relation_partial(plus: usize, minus: usize) -> impl Fn(u64) -> Result<f64> {
    move |y| {
        if y == 0 {
            return Ok(0.0);
        }
        let w = weights(y)?;
        Ok(kernel_class_sum(plus, minus, y, &w))
    }
}

/// One term of C₁: (αβ(α+β))^{−3/2} h^{−9/4} d(α²h) d(β²h) d((α+β)²h).
pub fn c1_term(alpha: u64, beta: u64, h: u64) -> f64 {
    let s = alpha + beta;
    let d = |n: u64| divisor_count_trial(n) as f64;
    ((alpha * beta * s) as f64).powf(-1.5)
        * (h as f64).powf(-2.25)
        * d(alpha * alpha * h)
        * d(beta * beta * h)
        * d(s * s * h)
}

/// C₁ partial sums over terms whose largest argument (α+β)²h is at most
/// each of the given ascending cutoffs.
fn c1_partials(cutoffs: &[u64]) -> Result<Vec<f64>> {
    let y = *cutoffs.last().expect("at least one cutoff");
    let table = DivisorTable::build(1, y + 1)?;
    let mut sums = vec![CompensatedSum::new(); cutoffs.len()];
    for h in k_free_up_to(y / 4, 2) {
        let smax = ((y / h) as f64).sqrt() as u64 + 1;
        let hw = (h as f64).powf(-2.25);
        for s in 2..=smax {
            let top = s * s * h;
            if top > y {
                break;
            }
            let slot = cutoffs.partition_point(|&c| c < top);
            let ds = table.d(top) as f64;
            for alpha in 1..s {
                let beta = s - alpha;
                let t = ((alpha * beta * s) as f64).powf(-1.5)
                    * hw
                    * table.d(alpha * alpha * h) as f64
                    * table.d(beta * beta * h) as f64
                    * ds;
                sums[slot].add(t);
            }
        }
    }
    let mut acc = CompensatedSum::new();
    Ok(sums
        .iter()
        .map(|s| {
            acc.merge(s);
            acc.value()
        })
        .collect())
}

/// C₁ summed over (α, β, h), h squarefree, with (α+β)²h ≤ Y: every
/// argument of the three divisor factors is at most Y.
pub fn partial_c1(y: u64) -> Result<ConstantEstimate> {
    check_cutoff(y)?;
    let cuts = [(y / 4).max(1), (y / 2).max(1), y];
    let p = c1_partials(&cuts)?;
    let quarter = if y >= 4 { p[0] } else { 0.0 };
    let half = if y >= 2 { p[1] } else { 0.0 };
    Ok(ConstantEstimate {
        name: ConstantName::C1,
        cutoff: y,
        partial_sum: p[2],
        tail_indicator: (p[2] - half).abs(),
        extrapolated: extrapolate(&[(y / 4, quarter), (y / 2, half), (y, p[2])]),
    })
}

/// C₂: √n + √m = √k + √l.
pub fn partial_c2(y: u64) -> Result<ConstantEstimate> {
    estimate(ConstantName::C2, y, relation_partial(2, 2))
}

/// C₄: six roots on one side, two on the other.
pub fn partial_c4(y: u64) -> Result<ConstantEstimate> {
    estimate(ConstantName::C4, y, relation_partial(6, 2))
}

/// C₇: four roots on each side.
pub fn partial_c7(y: u64) -> Result<ConstantEstimate> {
    estimate(ConstantName::C7, y, relation_partial(4, 4))
}

/// ζ(3/2)⁴ / (6π² ζ(3)).
pub fn c2_closed() -> ConstantEstimate {
    let z = zeta(1.5);
    let value = z.powi(4) / (6.0 * PI * PI * zeta(3.0));
    ConstantEstimate {
        name: ConstantName::C2Closed,
        cutoff: 0,
        partial_sum: value,
        tail_indicator: 0.0,
        extrapolated: value,
    }
}

/// (35c₇ − 28c₄) / (2048π⁸).
pub fn eighth_coefficient(c4: f64, c7: f64) -> f64 {
    (35.0 * c7 - 28.0 * c4) / (2048.0 * PI.powi(8))
}

/// (π√2)^{−8} (35c₇/128 − 7c₄/32), the same coefficient written through
/// the mean value of the eighth power of the truncated sum.
pub fn eighth_coefficient_from_mean(c4: f64, c7: f64) -> f64 {
    (PI * std::f64::consts::SQRT_2).powi(-8) * (35.0 * c7 / 128.0 - 7.0 * c4 / 32.0)
}

/// Constant estimates feeding the moment main terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesConstants {
    pub c1: ConstantEstimate,
    pub c2: ConstantEstimate,
    pub c4: ConstantEstimate,
    pub c7: ConstantEstimate,
}

impl SeriesConstants {
    /// C₁, C₂ at `low_cutoff`; C₄, C₇ at `high_cutoff`.
    pub fn compute(low_cutoff: u64, high_cutoff: u64) -> Result<Self> {
        Ok(Self {
            c1: partial_c1(low_cutoff)?,
            c2: partial_c2(low_cutoff)?,
            c4: partial_c4(high_cutoff)?,
            c7: partial_c7(high_cutoff)?,
        })
    }

    /// Cutoff of the estimates used by the k-th moment (0 when none).
    pub fn cutoff_for(&self, k: u32) -> u64 {
        match k {
            3 => self.c1.cutoff,
            4 => self.c2.cutoff,
            8 => self.c4.cutoff.max(self.c7.cutoff),
            _ => 0,
        }
    }
}

/// Coefficient c of the main term of ∫Δᵏ: X/4, c·X^{3/2}, c·X^{7/4}, c·X²,
/// and c·∫_2^X x² dx for k = 8. Extrapolated constant values are used.
pub fn main_term_coefficient(k: u32, constants: &SeriesConstants) -> Result<f64> {
    match k {
        1 => Ok(0.25),
        2 => Ok(c2_closed().partial_sum),
        3 => Ok(3.0 * constants.c1.extrapolated / (28.0 * PI.powi(3))),
        4 => Ok(3.0 * constants.c2.extrapolated / (64.0 * PI.powi(4))),
        8 => Ok(eighth_coefficient(constants.c4.extrapolated, constants.c7.extrapolated)),
        _ => Err(LabError::argument(format!("no main-term coefficient for k = {k}; supported 1, 2, 3, 4, 8"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{float_filtered_solutions, RelationSignature};

    fn brute(plus: usize, minus: usize, y: u64) -> f64 {
        let w = weights(y).unwrap();
        let sig = RelationSignature::new(plus, minus).unwrap();
        float_filtered_solutions(sig, y, 1e-9)
            .iter()
            .map(|t| t.iter().map(|&n| w[n as usize - 1]).product::<f64>())
            .collect::<CompensatedSum>()
            .value()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn trivial_cutoffs() {
        assert_eq!(partial_c2(1).unwrap().partial_sum, 1.0);
        assert_eq!(partial_c7(1).unwrap().partial_sum, 1.0);
        assert_eq!(partial_c4(1).unwrap().partial_sum, 0.0);
        assert!(partial_c2(0).is_err());
    }

    #[test]
    fn first_c1_term() {
        assert!(rel(c1_term(1, 1, 1), 3.0 * 2f64.powf(-1.5)) < 1e-15);
        assert_eq!(partial_c1(3).unwrap().partial_sum, 0.0);
        assert!(rel(partial_c1(4).unwrap().partial_sum, 3.0 * 2f64.powf(-1.5)) < 1e-15);
    }

    #[test]
    fn c1_matches_direct_triple_loop() {
        let y = 400u64;
        let mut acc = CompensatedSum::new();
        for h in 1..=y {
            if k_free_up_to(h, 2).last() != Some(&h) {
                continue;
            }
            for a in 1..=y {
                for b in 1..=y {
                    if (a + b) * (a + b) * h <= y {
                        acc.add(c1_term(a, b, h));
                    }
                }
            }
        }
        assert!(rel(partial_c1(y).unwrap().partial_sum, acc.value()) < 1e-13);
    }

    #[test]
    fn kernel_sums_match_float_filtered_brute_force() {
        for y in [4, 8, 12] {
            assert!(rel(partial_c2(y).unwrap().partial_sum, brute(2, 2, y)) < 1e-12, "C2 Y={y}");
            assert!(rel(partial_c7(y).unwrap().partial_sum, brute(4, 4, y)) < 1e-12, "C7 Y={y}");
        }
        assert_eq!(partial_c4(4).unwrap().partial_sum, 0.0);
        assert_eq!(brute(6, 2, 4), 0.0);
        assert!(rel(partial_c4(9).unwrap().partial_sum, brute(6, 2, 9)) < 1e-12, "C4 Y=9");
    }

    #[test]
    fn c4_at_nine_contains_ones_against_nines() {
        // (1,1,1,1,1,1; 9,9): 6 = 3 + 3, weight (d(9)·9^{−3/4})² = 9·9^{−3/2} = 1/3
        let below = partial_c4(8).unwrap().partial_sum;
        let at = partial_c4(9).unwrap().partial_sum;
        assert!(at - below >= 1.0 / 3.0 - 1e-15);
    }

    #[test]
    fn c2_exceeds_diagonal_sub_sum() {
        let y = 1000;
        let w = weights(y).unwrap();
        let mut diag = CompensatedSum::new();
        for n in 1..=y as usize {
            for m in 1..=y as usize {
                if n != m {
                    diag.add(2.0 * (w[n - 1] * w[m - 1]).powi(2));
                }
            }
        }
        assert!(partial_c2(y).unwrap().partial_sum > diag.value());
    }

    #[test]
    fn partial_sums_nondecreasing() {
        let mut last = [0.0; 4];
        for y in [1u64, 2, 5, 16, 40, 64] {
            let now = [
                partial_c1(y).unwrap().partial_sum,
                partial_c2(y).unwrap().partial_sum,
                partial_c4(y).unwrap().partial_sum,
                partial_c7(y).unwrap().partial_sum,
            ];
            for i in 0..4 {
                assert!(now[i] >= last[i], "constant {i} at Y = {y}");
            }
            last = now;
        }
    }

    #[test]
    fn tail_indicator_shrinks() {
        // the tail carries a log³ factor, so the decrease starts late
        let t: Vec<f64> =
            [1024u64, 4096, 16384, 65536].iter().map(|&y| partial_c2(y).unwrap().tail_indicator).collect();
        assert!(t.windows(2).all(|w| w[0] > w[1]), "{t:?}");
        let t1: Vec<f64> = [64u64, 256, 1024].iter().map(|&y| partial_c1(y).unwrap().tail_indicator).collect();
        assert!(t1[0] > t1[2], "{t1:?}");
    }

    #[test]
    fn second_moment_coefficient() {
        let c = c2_closed().partial_sum;
        assert!((c - 0.654_283_977_508_845_6).abs() < 1e-12);
    }

    #[test]
    fn coefficient_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let c4: f64 = rng.gen_range(0.0..10.0);
            let c7: f64 = rng.gen_range(c4..20.0);
            let a = eighth_coefficient(c4, c7);
            let b = eighth_coefficient_from_mean(c4, c7);
            assert!(rel(a, b) < 1e-14);
        }
    }

    #[test]
    fn coefficients_by_moment() {
        let s = SeriesConstants::compute(64, 16).unwrap();
        assert_eq!(main_term_coefficient(1, &s).unwrap(), 0.25);
        assert!(main_term_coefficient(5, &s).is_err());
        assert!(main_term_coefficient(8, &s).unwrap() > 0.0);
        assert_eq!(s.cutoff_for(8), 16);
    }

    #[test]
    fn extrapolation_recovers_limit() {
        let pts: Vec<(u64, f64)> = [100u64, 200, 400].iter().map(|&y| (y, 2.0 - 3.0 / (y as f64).sqrt())).collect();
        assert!((extrapolate(&pts) - 2.0).abs() < 1e-12);
    }
}
