//! Exact divisor counts, the summatory function D(x) and the error term
//! Δ(x) = D(x) − x ln x − (2γ − 1)x.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numeric::{euler_gamma_dd, DoubleDouble, EULER_GAMMA};

/// Default segment length of the divisor sieve.
pub const DEFAULT_BLOCK: u64 = 1 << 22;

/// Largest integer accepted by the sieve and the streaming prefix sums.
/// D(x) stays below 2^64 far beyond this.
pub const MAX_ARGUMENT: u64 = 1 << 50;

/// Threshold above which x·ln x is evaluated in double-double arithmetic.
const DD_THRESHOLD: f64 = (1u64 << 40) as f64;

/// 2γ − 1.
pub const LINEAR_COEFF: f64 = 2.0 * EULER_GAMMA - 1.0;

/// Exact d(n) for a contiguous range `[lo, lo + len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    lo: u64,
    values: Vec<u32>,
}

impl DivisorTable {
    /// Sieves d(n) for `n` in `[lo, hi]`, limited to [`DEFAULT_BLOCK`] entries.
    pub fn build(lo: u64, hi: u64) -> Result<Self> {
        Self::build_with_limit(lo, hi, DEFAULT_BLOCK)
    }

    pub fn build_with_limit(lo: u64, hi: u64, max_len: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(LabError::range(format!("divisor table needs 1 <= lo <= hi, got [{lo}, {hi}]")));
        }
        if hi > MAX_ARGUMENT {
            return Err(LabError::range(format!("hi = {hi} exceeds the supported bound {MAX_ARGUMENT}")));
        }
        let len = hi - lo + 1;
        if len > max_len {
            return Err(LabError::range(format!("range length {len} exceeds block size {max_len}")));
        }
        let mut values = vec![0u32; len as usize];
        let root = hi.isqrt();
        for i in 1..=root {
            // pairs (i, j) with i <= j and lo <= i*j <= hi
            let first = lo.div_ceil(i).max(i);
            let last = hi / i;
            if first > last {
                continue;
            }
            let mut n = i * first;
            if first == i {
                values[(n - lo) as usize] += 1;
                n += i;
            }
            while n <= hi {
                values[(n - lo) as usize] += 2;
                n += i;
            }
        }
        Ok(Self { lo, values })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    /// Last integer covered (inclusive).
    pub fn hi(&self) -> u64 {
        self.lo + self.values.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, n: u64) -> Option<u32> {
        n.checked_sub(self.lo).and_then(|i| self.values.get(i as usize).copied())
    }

    /// `d(n)` for `n >= lo`; panics outside the table.
    pub fn d(&self, n: u64) -> u32 {
        self.values[(n - self.lo) as usize]
    }
}

/// d(n) by trial division, for cross-checks.
pub fn divisor_count_trial(n: u64) -> u32 {
    assert!(n >= 1);
    let mut count = 0;
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            count += if i * i == n { 1 } else { 2 };
        }
        i += 1;
    }
    count
}

/// Exact D(x) = Σ_{n≤x} d(n) by the hyperbola identity
/// D(x) = 2 Σ_{n≤√x} ⌊x/n⌋ − ⌊√x⌋².
pub fn hyperbola_d(x: u64) -> u128 {
    if x == 0 {
        return 0;
    }
    let r = x.isqrt();
    let mut s: u128 = 0;
    for n in 1..=r {
        s += (x / n) as u128;
    }
    2 * s - (r as u128) * (r as u128)
}

/// One point of Δ with its exact integer D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaSample {
    pub x: f64,
    #[serde(rename = "D")]
    pub summatory: u128,
    pub delta: f64,
}

/// `x ln x + (2γ − 1) x`, the smooth part of D.
#[inline]
pub fn main_part(x: f64) -> f64 {
    if x > DD_THRESHOLD {
        main_part_dd(x).to_f64()
    } else {
        x * (x.ln() + LINEAR_COEFF)
    }
}

/// [`main_part`] in double-double.
pub fn main_part_dd(x: f64) -> DoubleDouble {
    let xd = DoubleDouble::from_f64(x);
    let coeff = euler_gamma_dd().mul_f64(2.0) + (-1.0);
    xd * (xd.ln() + coeff)
}

/// Δ on the smooth branch where D has the constant value `d_value`.
#[inline]
pub fn delta_branch(d_value: f64, x: f64) -> f64 {
    d_value - main_part(x)
}

/// Δ(x) with D(x) taken as D(⌊x⌋), so Δ is right-continuous.
pub fn delta_at(x: f64) -> Result<DeltaSample> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(LabError::argument(format!("delta_at needs finite x >= 1, got {x}")));
    }
    if x > MAX_ARGUMENT as f64 {
        return Err(LabError::range(format!("x = {x} exceeds {MAX_ARGUMENT}")));
    }
    let m = x.floor() as u64;
    let summatory = hyperbola_d(m);
    let delta = if x > DD_THRESHOLD {
        (DoubleDouble::from_u128(summatory) - main_part_dd(x)).to_f64()
    } else {
        summatory as f64 - main_part(x)
    };
    Ok(DeltaSample { x, summatory, delta })
}

/// lim_{y→m⁻} Δ(y) for integer m ≥ 2.
pub fn delta_left_limit(m: u64) -> f64 {
    hyperbola_d(m - 1) as f64 - main_part(m as f64)
}

/// Streaming access to D(m) on consecutive unit intervals `[m, m+1)`.
///
/// The range is split into fixed blocks of `block_size` integers; each block
/// sieves its own divisor table and seeds its prefix sum from one hyperbola
/// evaluation, so blocks are independent and may run concurrently.
#[derive(Debug, Clone, Copy)]
pub struct DeltaStream {
    lo: u64,
    hi: u64,
    block_size: u64,
}

impl DeltaStream {
    /// Intervals `[m, m+1)` for `lo <= m < hi`.
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(LabError::range(format!("stream needs 1 <= lo <= hi, got [{lo}, {hi})")));
        }
        if hi > MAX_ARGUMENT {
            return Err(LabError::range(format!("hi = {hi} exceeds {MAX_ARGUMENT}")));
        }
        Ok(Self { lo, hi, block_size: DEFAULT_BLOCK })
    }

    pub fn with_block_size(mut self, block_size: u64) -> Self {
        assert!(block_size >= 1);
        self.block_size = block_size;
        self
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    /// Half-open block ranges in ascending order.
    pub fn blocks(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut start = self.lo;
        while start < self.hi {
            let end = (start + self.block_size).min(self.hi);
            out.push((start, end));
            start = end;
        }
        out
    }

    /// D(m) for `m` in `[start, end)`.
    pub fn block_values(start: u64, end: u64) -> Result<Vec<u64>> {
        if start >= end {
            return Ok(Vec::new());
        }
        let table = DivisorTable::build_with_limit(start, end - 1, end - start)?;
        let mut running = hyperbola_d(start - 1) as u64;
        Ok(table
            .values()
            .iter()
            .map(|&d| {
                running += d as u64;
                running
            })
            .collect())
    }

    /// Visits every interval in ascending order with its constant D(m).
    pub fn for_each<F: FnMut(u64, u64)>(&self, mut visitor: F) -> Result<()> {
        for (start, end) in self.blocks() {
            let values = Self::block_values(start, end)?;
            for (i, d) in values.into_iter().enumerate() {
                visitor(start + i as u64, d);
            }
        }
        Ok(())
    }

    /// Maps each block in parallel; results come back in block order.
    pub fn par_map_blocks<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &[u64]) -> T + Sync,
    {
        self.blocks()
            .into_par_iter()
            .map(|(start, end)| Self::block_values(start, end).map(|v| f(start, &v)))
            .collect()
    }
}

/// Visits `[m, m+1)` for `lo <= m < hi` with the exact D(m).
pub fn stream_delta<F: FnMut(u64, u64)>(lo: u64, hi: u64, visitor: F) -> Result<()> {
    DeltaStream::new(lo, hi)?.for_each(visitor)
}
