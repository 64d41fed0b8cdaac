/// Neumaier-compensated accumulator.
///
/// The running error term is carried alongside the sum, so long streams of
/// small contributions (per-interval integrals, per-term series values) keep
/// close to full double precision. Two accumulators can be merged, which is
/// how block-parallel reductions are combined in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator into this one, keeping both error terms.
    #[inline]
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of a slice, in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

/// Combines per-block partial sums in index order.
///
/// Callers produce `parts` with an ordered parallel collect, so the result is
/// independent of how many worker threads computed the blocks.
pub fn ordered_reduce(parts: &[CompensatedSum]) -> CompensatedSum {
    let mut total = CompensatedSum::new();
    for p in parts {
        total.merge(p);
    }
    total
}
