//! Linear forms in square roots (and k-th roots):
//! Σ_{i≤p} n_i^{1/k} − Σ_{j≤q} m_j^{1/k}.
//!
//! Exact zeros are decided by grouping variables by their k-th-power-free
//! kernel h: n = a^k·h gives n^{1/k} = a·h^{1/k}, and the roots h^{1/k} of
//! distinct kernels are linearly independent over the rationals, so the form
//! vanishes exactly when the integer parts balance kernel by kernel. Near
//! solutions are counted by a meet-in-the-middle sweep in doubles, with
//! candidates near zero re-evaluated in 192-bit fixed point.

mod exact;
pub mod hp;
mod kernel;
mod search;

use serde::Serialize;

use crate::error::{LabError, Result};

pub use exact::{
    count_exact_solutions, exact_relation_solutions, float_filtered_solutions, is_exact_zero, kernel_class_sum,
    ExactSolutions,
};
pub use kernel::{
    k_free_up_to, kernel_decompose, kernel_table, mobius, KernelForm, KernelSieve, DEFAULT_SIEVE_BOUND,
    DEFAULT_TRIAL_BUDGET,
};
pub use search::{min_gap, near_solution_count, MinGap};

/// Largest number of variables handled.
pub const MAX_ARITY: usize = 8;

/// Form with `plus` positive and `minus` negative roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RelationSignature {
    pub plus: usize,
    pub minus: usize,
}

impl RelationSignature {
    pub fn new(plus: usize, minus: usize) -> Result<Self> {
        if plus == 0 {
            return Err(LabError::argument("signature needs at least one positive term"));
        }
        let arity = plus + minus;
        if !(2..=MAX_ARITY).contains(&arity) {
            return Err(LabError::argument(format!(
                "signature ({plus},{minus}) has {arity} variables; supported 2..={MAX_ARITY}"
            )));
        }
        Ok(Self { plus, minus })
    }

    pub fn arity(&self) -> usize {
        self.plus + self.minus
    }

    /// Exponent e of the gap floor max(n_i)^{−e}: (2^{v−1} − 1)/2 for v
    /// variables (7/2 for four, 127/2 for eight).
    pub fn gap_exponent(&self) -> f64 {
        ((1u64 << (self.arity() - 1)) - 1) as f64 / 2.0
    }
}

impl std::fmt::Display for RelationSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.plus, self.minus)
    }
}

/// Work limits for enumeration and meet-in-the-middle searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBudget {
    /// Entries per side of a meet-in-the-middle split.
    pub max_side_entries: u64,
    /// Tuples visited by explicit enumeration.
    pub max_enumeration: u128,
    /// Near-zero candidates re-evaluated in high precision.
    pub max_certifications: u128,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_side_entries: 1 << 25, max_enumeration: 1 << 32, max_certifications: 1 << 22 }
    }
}

/// Count query: per-variable inclusive ranges and a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationQuery {
    pub signature: RelationSignature,
    pub ranges: Vec<(u64, u64)>,
    pub delta: f64,
    /// Root exponent k (2 for square roots).
    pub root: u32,
}

impl RelationQuery {
    pub fn new(signature: RelationSignature, ranges: Vec<(u64, u64)>, delta: f64) -> Result<Self> {
        if ranges.len() != signature.arity() {
            return Err(LabError::argument(format!(
                "signature {signature} needs {} ranges, got {}",
                signature.arity(),
                ranges.len()
            )));
        }
        if let Some(&(lo, hi)) = ranges.iter().find(|&&(lo, hi)| lo == 0 || lo > hi) {
            return Err(LabError::argument(format!("range [{lo}, {hi}] must satisfy 1 <= lo <= hi")));
        }
        if delta.is_nan() || delta < 0.0 {
            return Err(LabError::argument(format!("delta must be >= 0, got {delta}")));
        }
        Ok(Self { signature, ranges, delta, root: 2 })
    }

    /// All variables over `[lo, hi]`.
    pub fn uniform(signature: RelationSignature, lo: u64, hi: u64, delta: f64) -> Result<Self> {
        Self::new(signature, vec![(lo, hi); signature.arity()], delta)
    }

    pub fn with_root(mut self, root: u32) -> Result<Self> {
        if root < 2 {
            return Err(LabError::argument("root exponent must be at least 2"));
        }
        self.root = root;
        Ok(self)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let mut q = self.clone();
        if delta.is_nan() || delta < 0.0 {
            return Err(LabError::argument(format!("delta must be >= 0, got {delta}")));
        }
        q.delta = delta;
        Ok(q)
    }

    /// Number of tuples in the box.
    pub fn space_size(&self) -> u128 {
        self.ranges.iter().map(|&(lo, hi)| (hi - lo + 1) as u128).product()
    }

    pub fn max_value(&self) -> u64 {
        self.ranges.iter().map(|r| r.1).max().unwrap_or(1)
    }
}

/// Result of [`near_solution_count`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCount {
    pub query: RelationQuery,
    /// Tuples with 0 < |form| < delta, or exact solutions when delta = 0.
    pub count: u128,
    pub exact_solutions: u128,
    /// Smallest nonzero |form| in the box, if any nonzero value exists.
    pub min_nonzero_gap: Option<f64>,
}
