//! Truncated Voronoi expansion of Δ(x) and its residual.
//!
//! Σ_Y(x) = x^{1/4} Σ_{n≤Y} d(n) n^{−3/4} cos(4π√(nx) − π/4), and
//! Δ(x) ≈ Σ_Y(x) / (π√2). The residual R_Y(x) = Δ(x) − Σ_Y(x)/(π√2).

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::bessel;
use crate::divisor::{delta_at, DivisorTable};
use crate::error::{LabError, Result};
use crate::numeric::{CompensatedSum, DoubleDouble};

/// Above this value of n·x the phase √(nx) is formed in double-double.
const DD_PHASE_THRESHOLD: f64 = (1u64 << 40) as f64;

/// 1 / (π√2).
pub const VORONOI_NORM: f64 = 1.0 / (PI * SQRT_2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedSum {
    pub x: f64,
    pub cutoff: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub x: f64,
    pub cutoff: u64,
    pub value: f64,
}

/// Precomputed coefficients d(n) n^{−3/4} and √n for n ≤ `max_cutoff`.
#[derive(Debug, Clone)]
pub struct VoronoiSeries {
    coeff: Vec<f64>,
    sqrt_n: Vec<DoubleDouble>,
    divisors: Vec<u32>,
}

impl VoronoiSeries {
    pub fn new(max_cutoff: u64) -> Result<Self> {
        if max_cutoff == 0 {
            return Ok(Self { coeff: Vec::new(), sqrt_n: Vec::new(), divisors: Vec::new() });
        }
        let table = DivisorTable::build_with_limit(1, max_cutoff, max_cutoff)?;
        let divisors = table.values().to_vec();
        let coeff = divisors
            .iter()
            .enumerate()
            .map(|(i, &d)| d as f64 * ((i + 1) as f64).powf(-0.75))
            .collect();
        let sqrt_n = (1..=max_cutoff).map(|n| DoubleDouble::from_f64(n as f64).sqrt()).collect();
        Ok(Self { coeff, sqrt_n, divisors })
    }

    pub fn max_cutoff(&self) -> u64 {
        self.coeff.len() as u64
    }

    fn check_cutoff(&self, cutoff: u64) -> Result<()> {
        if cutoff > self.max_cutoff() {
            return Err(LabError::argument(format!(
                "cutoff {cutoff} exceeds the precomputed range {}",
                self.max_cutoff()
            )));
        }
        Ok(())
    }

    /// cos(4π√(nx) − π/4) for the 1-based index `n`.
    #[inline]
    fn phase_cos(&self, n: usize, x: f64, sqrt_x: f64, sqrt_x_dd: DoubleDouble) -> f64 {
        if (n as f64) * x > DD_PHASE_THRESHOLD {
            // 4π s − π/4 = 2π (2s − 1/8)
            let s = self.sqrt_n[n - 1] * sqrt_x_dd;
            let turns = (s.mul_f64(2.0) + (-0.125)).fract();
            (2.0 * PI * turns).cos()
        } else {
            let s = self.sqrt_n[n - 1].hi * sqrt_x;
            (4.0 * PI * s - 0.25 * PI).cos()
        }
    }

    /// Partial sums Σ_Y(x) for each of the ascending `cutoffs`, in one pass.
    pub fn truncated_sums(&self, x: f64, cutoffs: &[u64]) -> Result<Vec<f64>> {
        if !(x >= 1.0) {
            return Err(LabError::argument(format!("truncated sum needs x >= 1, got {x}")));
        }
        if cutoffs.windows(2).any(|w| w[0] > w[1]) {
            return Err(LabError::argument("cutoffs must be ascending"));
        }
        if let Some(&last) = cutoffs.last() {
            self.check_cutoff(last)?;
        }
        let sqrt_x = x.sqrt();
        let sqrt_x_dd = DoubleDouble::from_f64(x).sqrt();
        let scale = x.powf(0.25);
        let mut out = Vec::with_capacity(cutoffs.len());
        let mut acc = CompensatedSum::new();
        let mut n = 1usize;
        for &cut in cutoffs {
            while (n as u64) <= cut {
                acc.add(self.coeff[n - 1] * self.phase_cos(n, x, sqrt_x, sqrt_x_dd));
                n += 1;
            }
            out.push(scale * acc.value());
        }
        Ok(out)
    }

    pub fn truncated_sum(&self, x: f64, cutoff: u64) -> Result<TruncatedSum> {
        let value = self.truncated_sums(x, &[cutoff])?[0];
        Ok(TruncatedSum { x, cutoff, value })
    }

    /// x^{1/4} Σ_{n≤Y} d(n) n^{−3/4}, the trivial bound on |Σ_Y(x)|.
    pub fn amplitude_bound(&self, x: f64, cutoff: u64) -> f64 {
        x.powf(0.25) * self.coeff[..cutoff as usize].iter().sum::<f64>()
    }

    pub fn residual(&self, x: f64, cutoff: u64) -> Result<ResidualSample> {
        let delta = delta_at(x)?.delta;
        let sum = self.truncated_sum(x, cutoff)?.value;
        Ok(ResidualSample { x, cutoff, value: delta - VORONOI_NORM * sum })
    }

    /// The n-th term of the Bessel form of Δ,
    /// −(2√x/π)(d(n)/√n)(K₁(z) + (π/2)Y₁(z)) with z = 4π√(nx).
    pub fn bessel_term(&self, x: f64, n: u64) -> Result<f64> {
        self.check_cutoff(n)?;
        if n == 0 || !(x >= 1.0) {
            return Err(LabError::argument("bessel term needs n >= 1 and x >= 1"));
        }
        Ok(bessel_tail_term(x, n, self.divisors[n as usize - 1]))
    }
}

/// −(2√x/π)(d/√n)(K₁(4π√(nx)) + (π/2)Y₁(4π√(nx))) for a given d = d(n).
pub fn bessel_tail_term(x: f64, n: u64, d: u32) -> f64 {
    let s = (DoubleDouble::from_f64(n as f64) * DoubleDouble::from_f64(x)).sqrt();
    let z = 4.0 * PI * s.to_f64();
    // z / 2π = 2√(nx)
    let turns = s.mul_f64(2.0);
    let k = bessel::k1(z);
    let y = bessel::y1_with_turns(z, turns);
    -(2.0 * x.sqrt() / PI) * (d as f64 / (n as f64).sqrt()) * (k + 0.5 * PI * y)
}

/// Voronoi cosine summand for comparison with [`bessel_tail_term`]:
/// (π√2)^{−1} x^{1/4} d n^{−3/4} cos(4π√(nx) − π/4).
pub fn cosine_term(x: f64, n: u64, d: u32) -> f64 {
    let s = (DoubleDouble::from_f64(n as f64) * DoubleDouble::from_f64(x)).sqrt();
    let turns = (s.mul_f64(2.0) + (-0.125)).fract();
    VORONOI_NORM * x.powf(0.25) * d as f64 * (n as f64).powf(-0.75) * (2.0 * PI * turns).cos()
}

/// Stratified sample points in `[lo, lo + width)`: the midpoint of one unit
/// interval per stratum, so no point sits on a jump of D.
pub fn stratified_midpoints(lo: f64, width: f64, samples: u64) -> Vec<f64> {
    let step = width / samples as f64;
    (0..samples)
        .map(|i| (lo + (i as f64 + 0.5) * step).floor() + 0.5)
        .collect()
}

/// Mean of R_Y² over `[x0, x0 + h)` for every cutoff in `cutoffs`.
pub fn residual_mean_squares(
    series: &VoronoiSeries,
    x0: f64,
    h: f64,
    cutoffs: &[u64],
    samples: u64,
) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(LabError::argument("sample_count must be at least 1"));
    }
    if !(x0 >= 2.0) || !(h > 0.0) {
        return Err(LabError::argument(format!("need X >= 2 and H > 0, got X = {x0}, H = {h}")));
    }
    let points = stratified_midpoints(x0, h, samples);
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&x| -> Result<Vec<f64>> {
            let delta = delta_at(x)?.delta;
            let sums = series.truncated_sums(x, cutoffs)?;
            Ok(sums.into_iter().map(|s| (delta - VORONOI_NORM * s).powi(2)).collect())
        })
        .collect::<Result<_>>()?;
    let mut accs = vec![CompensatedSum::new(); cutoffs.len()];
    for row in &per_point {
        for (acc, v) in accs.iter_mut().zip(row) {
            acc.add(*v);
        }
    }
    Ok(accs.iter().map(|a| a.value() / samples as f64).collect())
}

/// Stratified estimate of (1/H)∫_X^{X+H} R_Y(x)² dx.
pub fn residual_mean_square(x0: f64, h: f64, cutoff: u64, samples: u64) -> Result<f64> {
    if samples == 0 {
        return Err(LabError::argument("sample_count must be at least 1"));
    }
    let series = VoronoiSeries::new(cutoff)?;
    Ok(residual_mean_squares(&series, x0, h, &[cutoff], samples)?[0])
}
