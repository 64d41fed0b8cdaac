//! Exponential sums S(x, N, k) = Σ_{N<n≤2N} e(x n^{1/k}) and their eighth
//! moment over x.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numeric::{ordered_reduce, CompensatedSum, DoubleDouble};

/// Minimum grid points per unit change of the fastest phase.
pub const POINTS_PER_TURN: f64 = 4.0;

/// Samples per block; each block reseeds its phases in double-double.
const BLOCK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpSumSample {
    pub x: f64,
    pub n: u64,
    pub root: u32,
    pub re: f64,
    pub im: f64,
}

impl ExpSumSample {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

/// n^{1/k} in double-double: a double estimate refined by one Newton step.
pub fn root_dd(n: u64, k: u32) -> DoubleDouble {
    let y0 = (n as f64).powf(1.0 / k as f64);
    let y = DoubleDouble::from_f64(y0);
    let mut p = DoubleDouble::ONE;
    for _ in 0..k - 1 {
        p = p * y;
    }
    // y − (y^k − n)/(k y^{k−1})
    let resid = p * y - DoubleDouble::from_u128(n as u128);
    y - resid / p.mul_f64(k as f64)
}

/// e(t) for a phase given in turns, reduced mod 1 in double-double.
#[inline]
fn unit(turns: DoubleDouble) -> Complex64 {
    let (s, c) = (TAU * turns.fract()).sin_cos();
    Complex64::new(c, s)
}

fn check(n: u64, k: u32) -> Result<()> {
    if n < 2 {
        return Err(LabError::argument(format!("N must be at least 2, got {n}")));
    }
    if k < 2 {
        return Err(LabError::argument(format!("root exponent k must be at least 2, got {k}")));
    }
    if n > 1 << 40 {
        return Err(LabError::range(format!("N = {n} is beyond direct summation")));
    }
    Ok(())
}

/// Direct summation over n ∈ (N, 2N].
pub fn eval_s(x: f64, n: u64, k: u32) -> Result<ExpSumSample> {
    check(n, k)?;
    let xd = DoubleDouble::from_f64(x);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for m in n + 1..=2 * n {
        let z = unit(xd * root_dd(m, k));
        re.add(z.re);
        im.add(z.im);
    }
    Ok(ExpSumSample { x, n, root: k, re: re.value(), im: im.value() })
}

/// S on the grid x_j = x0 + j·h, j < count. Each term is advanced by a
/// fixed rotation e(h n^{1/k}) from a double-double seed.
fn s_on_grid(x0: f64, h: f64, count: usize, roots: &[DoubleDouble]) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); count];
    let x0d = DoubleDouble::from_f64(x0);
    let hd = DoubleDouble::from_f64(h);
    for &r in roots {
        let mut z = unit(x0d * r);
        let step = unit(hd * r);
        for slot in acc.iter_mut() {
            *slot += z;
            z *= step;
        }
    }
    acc
}

/// ∫|S|⁸ estimate over `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EighthMoment {
    pub lo: f64,
    pub hi: f64,
    pub n: u64,
    pub root: u32,
    /// Grid points actually used (at least the requested count).
    pub samples: u64,
    pub integral: f64,
    /// U·N⁴ + N^{8−1/k} with U = lo.
    pub bound: f64,
    pub ratio: f64,
}

/// Grid points needed for [`POINTS_PER_TURN`] per unit of x(2N)^{1/k}.
pub fn required_samples(width: f64, n: u64, k: u32) -> u64 {
    let rate = ((2 * n) as f64).powf(1.0 / k as f64);
    (POINTS_PER_TURN * width * rate).ceil() as u64
}

/// Midpoint rule for ∫_lo^hi |S(x, N, k)|⁸ dx.
pub fn integrate_power8(lo: f64, hi: f64, n: u64, k: u32, samples: u64) -> Result<EighthMoment> {
    check(n, k)?;
    if samples < 16 {
        return Err(LabError::argument(format!("at least 16 samples required, got {samples}")));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(LabError::argument(format!("integration range [{lo}, {hi}] is empty")));
    }
    let count = samples.max(required_samples(hi - lo, n, k));
    let h = (hi - lo) / count as f64;
    let roots: Vec<DoubleDouble> = (n + 1..=2 * n).map(|m| root_dd(m, k)).collect();
    let blocks = count.div_ceil(BLOCK as u64);
    let parts: Vec<CompensatedSum> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK as u64;
            let len = (count - start).min(BLOCK as u64) as usize;
            let x0 = lo + (start as f64 + 0.5) * h;
            let mut sum = CompensatedSum::new();
            for s in s_on_grid(x0, h, len, &roots) {
                sum.add(s.norm_sqr().powi(4));
            }
            sum
        })
        .collect();
    let integral = ordered_reduce(&parts).value() * h;
    let nf = n as f64;
    let bound = lo * nf.powi(4) + nf.powf(8.0 - 1.0 / k as f64);
    Ok(EighthMoment { lo, hi, n, root: k, samples: count, integral, bound, ratio: integral / bound })
}

/// ∫_U^{2U} |S(x, N, k)|⁸ dx with its ratio to U·N⁴ + N^{8−1/k}.
pub fn moment8_s(u: f64, n: u64, k: u32, samples: u64) -> Result<EighthMoment> {
    if !(u > 0.0) {
        return Err(LabError::argument(format!("U must be positive, got {u}")));
    }
    integrate_power8(u, 2.0 * u, n, k, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_phase_counts_terms() {
        let s = eval_s(0.0, 37, 3).unwrap();
        assert_eq!(s.re, 37.0);
        assert_eq!(s.im, 0.0);
    }

    #[test]
    fn two_term_case() {
        // n ∈ {3, 4}: e(√3) + e(2)
        let s = eval_s(1.0, 2, 2).unwrap();
        let t = TAU * 3f64.sqrt();
        assert!((s.re - (t.cos() + 1.0)).abs() < 1e-14);
        assert!((s.im - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn bounded_by_term_count_and_conjugate_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: f64 = rng.gen_range(-1e4..1e4);
            let n = rng.gen_range(2..300);
            let k = rng.gen_range(2..5);
            let a = eval_s(x, n, k).unwrap();
            let b = eval_s(-x, n, k).unwrap();
            assert!(a.modulus() <= n as f64 + 1e-9);
            assert!((a.re - b.re).abs() < 1e-10 && (a.im + b.im).abs() < 1e-10);
        }
    }

    #[test]
    fn roots_are_accurate() {
        let r = root_dd(1_000_000_007, 2);
        let sq = r * r;
        assert!((sq - DoubleDouble::from_u128(1_000_000_007)).to_f64().abs() < 1e-20);
        let c = root_dd(27_000_000_001, 3);
        assert!((c * c * c - DoubleDouble::from_u128(27_000_000_001)).to_f64().abs() < 1e-16);
    }

    #[test]
    fn rotated_grid_matches_direct_sums() {
        let (n, k) = (50u64, 2u32);
        let roots: Vec<DoubleDouble> = (n + 1..=2 * n).map(|m| root_dd(m, k)).collect();
        let grid = s_on_grid(1234.5, 0.013, 2000, &roots);
        for j in [0usize, 1, 999, 1999] {
            let d = eval_s(1234.5 + j as f64 * 0.013, n, k).unwrap().value();
            assert!((grid[j] - d).norm() < 1e-9, "j = {j}");
        }
    }

    #[test]
    fn trivial_bound_and_additivity() {
        let (u, n, k) = (200.0, 16u64, 2u32);
        let whole = moment8_s(u, n, k, 16).unwrap();
        assert!(whole.integral <= u * (n as f64).powi(8));
        assert!(whole.samples >= required_samples(u, n, k));
        let left = integrate_power8(u, 1.5 * u, n, k, whole.samples / 2).unwrap();
        let right = integrate_power8(1.5 * u, 2.0 * u, n, k, whole.samples / 2).unwrap();
        let sum = left.integral + right.integral;
        assert!(((sum - whole.integral) / whole.integral).abs() < 1e-3);
        assert!(moment8_s(u, n, k, 8).is_err());
    }

    #[test]
    fn ratio_settles_as_u_grows() {
        // U·N⁴ dominates N^{8−1/k} once U ≫ N^{7/2} ≈ 1448
        let n = 8u64;
        let r: Vec<f64> = [2e4, 2e5, 2e6].iter().map(|&u| moment8_s(u, n, 2, 16).unwrap().ratio).collect();
        let spread = r.iter().cloned().fold(0.0, f64::max) / r.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.5, "{r:?}");
    }
}
