use std::collections::VecDeque;

use super::kernel::{k_free_up_to, kernel_table, KernelSieve, DEFAULT_SIEVE_BOUND};
use super::{RelationSignature, SearchBudget};
use crate::error::{LabError, Result};
use crate::numeric::CompensatedSum;

/// Largest `a` with `a^k <= x`.
pub(crate) fn iroot_floor(x: u64, k: u32) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut a = (x as f64).powf(1.0 / k as f64).round() as u64;
    while a > 0 && a.checked_pow(k).is_none_or(|p| p > x) {
        a -= 1;
    }
    while (a + 1).checked_pow(k).is_some_and(|p| p <= x) {
        a += 1;
    }
    a
}

/// Multipliers `a` with `a^k·h ∈ [lo, hi]`, as an inclusive interval.
pub(crate) fn kernel_interval(h: u64, lo: u64, hi: u64, k: u32) -> Option<(u64, u64)> {
    let a_hi = iroot_floor(hi / h, k);
    // smallest a with a^k·h >= lo
    let need = lo.div_ceil(h);
    let mut a_lo = iroot_floor(need, k);
    if a_lo.checked_pow(k).is_none_or(|p| p < need) {
        a_lo += 1;
    }
    let a_lo = a_lo.max(1);
    (a_lo <= a_hi).then_some((a_lo, a_hi))
}

/// Exact zero test of Σ_{i<plus} n_i^{1/k} − Σ_{i≥plus} n_i^{1/k} using the
/// kernel table (`table[n−1] = (h, a)` with n = a^k h).
pub fn is_exact_zero(tuple: &[u64], plus: usize, table: &[(u64, u64)]) -> bool {
    let mut parts: [(u64, i64); super::MAX_ARITY] = [(0, 0); super::MAX_ARITY];
    for (i, &n) in tuple.iter().enumerate() {
        let (h, a) = table[n as usize - 1];
        parts[i] = (h, if i < plus { a as i64 } else { -(a as i64) });
    }
    let parts = &mut parts[..tuple.len()];
    parts.sort_unstable_by_key(|p| p.0);
    let mut i = 0;
    while i < parts.len() {
        let h = parts[i].0;
        let mut s = 0i64;
        while i < parts.len() && parts[i].0 == h {
            s += parts[i].1;
            i += 1;
        }
        if s != 0 {
            return false;
        }
    }
    true
}

/// Counting polynomial `Σ c_i x^{offset+i}`.
#[derive(Clone)]
struct Poly {
    offset: u64,
    coeffs: Vec<u128>,
}

impl Poly {
    /// Product with `x^lo + … + x^hi`, as a sliding window sum.
    fn times_interval(&self, lo: u64, hi: u64) -> Poly {
        let width = (hi - lo + 1) as usize;
        let n = self.coeffs.len() + width - 1;
        let mut out = Vec::with_capacity(n);
        let mut window = 0u128;
        for i in 0..n {
            if i < self.coeffs.len() {
                window += self.coeffs[i];
            }
            if i >= width {
                window -= self.coeffs[i - width];
            }
            out.push(window);
        }
        Poly { offset: self.offset + lo, coeffs: out }
    }

    /// Σ_s [x^s]self · [x^s]other.
    fn dot(&self, other: &Poly) -> u128 {
        let lo = self.offset.max(other.offset);
        let hi = (self.offset + self.coeffs.len() as u64).min(other.offset + other.coeffs.len() as u64);
        (lo..hi)
            .map(|s| self.coeffs[(s - self.offset) as usize] * other.coeffs[(s - other.offset) as usize])
            .sum()
    }
}

/// Counting polynomials of the multiplier sum for every subset of the given
/// positions, each position restricted to its interval.
fn subset_polys(intervals: &[Option<(u64, u64)>], members: &[usize]) -> Vec<Option<Poly>> {
    let m = members.len();
    let mut polys: Vec<Option<Poly>> = vec![None; 1 << m];
    polys[0] = Some(Poly { offset: 0, coeffs: vec![1] });
    for sub in 1usize..(1 << m) {
        let low = sub.trailing_zeros() as usize;
        let rest = sub & (sub - 1);
        let (Some(prev), Some((lo, hi))) = (&polys[rest], intervals[members[low]]) else {
            continue;
        };
        polys[sub] = Some(prev.times_interval(lo, hi));
    }
    polys
}

/// Kernels that can occur in the ranges. Narrow ranges of large values are
/// decomposed directly; otherwise every k-free integer up to the maximum.
fn candidate_kernels(ranges: &[(u64, u64)], k: u32) -> Result<Vec<u64>> {
    let max_hi = ranges.iter().map(|r| r.1).max().unwrap_or(1);
    let total: u64 = ranges.iter().map(|&(lo, hi)| hi - lo + 1).sum();
    if total.saturating_mul(8) >= max_hi {
        return Ok(k_free_up_to(max_hi, k));
    }
    let sieve = KernelSieve::new(max_hi.min(DEFAULT_SIEVE_BOUND));
    let mut out = Vec::with_capacity(total as usize);
    for &(lo, hi) in ranges {
        for n in lo..=hi {
            out.push(sieve.decompose_root(n, k)?.h);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Exact number of tuples (one value per range) on which the form with the
/// first `plus` positions positive vanishes. Dynamic programme over kernel
/// classes: each kernel claims a subset of still-unassigned positions with
/// at least one position on each side, and the multiplier sums must agree.
pub fn count_exact_solutions(ranges: &[(u64, u64)], plus: usize, k: u32) -> Result<u128> {
    let v = ranges.len();
    if plus == 0 || plus >= v {
        return Ok(0);
    }
    let full = (1usize << v) - 1;
    let left_mask = (1usize << plus) - 1;
    let mut dp = vec![0u128; 1 << v];
    dp[0] = 1;
    for h in candidate_kernels(ranges, k)? {
        let intervals: Vec<Option<(u64, u64)>> =
            ranges.iter().map(|&(lo, hi)| kernel_interval(h, lo, hi, k)).collect();
        let left: Vec<usize> = (0..plus).filter(|&i| intervals[i].is_some()).collect();
        let right: Vec<usize> = (plus..v).filter(|&i| intervals[i].is_some()).collect();
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let lp = subset_polys(&intervals, &left);
        let rp = subset_polys(&intervals, &right);
        // F(S) for S given as (left-subset, right-subset) bitmasks
        let mut weight = vec![0u128; 1 << v];
        let mut active = 0usize;
        for ls in 1..lp.len() {
            let Some(pl) = &lp[ls] else { continue };
            let lmask: usize = left.iter().enumerate().filter(|(b, _)| ls >> b & 1 == 1).map(|(_, &i)| 1 << i).sum();
            for rs in 1..rp.len() {
                let Some(pr) = &rp[rs] else { continue };
                let rmask: usize =
                    right.iter().enumerate().filter(|(b, _)| rs >> b & 1 == 1).map(|(_, &i)| 1 << i).sum();
                let f = pl.dot(pr);
                if f > 0 {
                    weight[lmask | rmask] = f;
                    active |= lmask | rmask;
                }
            }
        }
        let mut next = dp.clone();
        for mask in 0..=full {
            let base = dp[mask];
            if base == 0 {
                continue;
            }
            let free = full & !mask & active;
            let mut sub = free;
            while sub > 0 {
                if sub & left_mask != 0 && sub & !left_mask != 0 {
                    let w = weight[sub];
                    if w > 0 {
                        next[mask | sub] += base * w;
                    }
                }
                sub = (sub - 1) & free;
            }
        }
        dp = next;
    }
    Ok(dp[full])
}

fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn convolve_f64(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Σ over exact solutions in `[1, y]^{plus+minus}` of ∏ weight(n_i).
///
/// `weight[n−1]` is the weight of value n. All positions share one range,
/// so the dynamic programme only tracks how many positions on each side are
/// assigned; the number of ways to pick them is a product of binomials.
pub fn kernel_class_sum(plus: usize, minus: usize, y: u64, weight: &[f64]) -> f64 {
    assert!(weight.len() as u64 >= y, "weights must cover 1..=y");
    if plus == 0 || minus == 0 || y == 0 {
        return 0.0;
    }
    let width = minus + 1;
    let mut dp = vec![0.0; (plus + 1) * width];
    dp[0] = 1.0;
    for h in k_free_up_to(y, 2) {
        let amax = super::exact::iroot_floor(y / h, 2) as usize;
        if amax == 0 {
            continue;
        }
        let mut w = vec![0.0; amax + 1];
        for (a, slot) in w.iter_mut().enumerate().skip(1) {
            *slot = weight[(a * a) * h as usize - 1];
        }
        let top = plus.max(minus);
        let mut powers: Vec<Vec<f64>> = vec![vec![1.0]];
        for p in 1..=top {
            let next = convolve_f64(&powers[p - 1], &w);
            powers.push(next);
        }
        let mut next = vec![CompensatedSum::new(); dp.len()];
        for i in 0..=plus {
            for j in 0..=minus {
                let base = dp[i * width + j];
                if base == 0.0 {
                    continue;
                }
                next[i * width + j].add(base);
                for p in 1..=plus - i {
                    for q in 1..=minus - j {
                        let f: f64 = powers[p].iter().zip(&powers[q]).map(|(x, y)| x * y).sum();
                        if f == 0.0 {
                            continue;
                        }
                        let ways = binomial(plus - i, p) * binomial(minus - j, q);
                        next[(i + p) * width + (j + q)].add(base * ways * f);
                    }
                }
            }
        }
        dp = next.iter().map(|c| c.value()).collect();
    }
    dp[plus * width + minus]
}

/// Streams the exact solutions of a signature over `[1, y]^v`.
///
/// Left tuples are enumerated in lexicographic order; for each, the
/// per-kernel multiplier sums are computed and every right tuple that
/// reproduces them kernel by kernel is emitted.
pub struct ExactSolutions {
    signature: RelationSignature,
    y: u64,
    table: Vec<(u64, u64)>,
    left: Vec<u64>,
    done: bool,
    pending: VecDeque<Vec<u64>>,
}

pub fn exact_relation_solutions(
    signature: RelationSignature,
    y: u64,
    budget: &SearchBudget,
) -> Result<ExactSolutions> {
    if y == 0 {
        return Err(LabError::argument("Y must be at least 1"));
    }
    let left_space = (y as u128).checked_pow(signature.plus as u32).unwrap_or(u128::MAX);
    if left_space > budget.max_enumeration {
        return Err(LabError::budget(
            format!("exact enumeration of signature {signature} at Y = {y}"),
            left_space,
            budget.max_enumeration,
        ));
    }
    Ok(ExactSolutions {
        signature,
        y,
        table: kernel_table(y, 2),
        left: vec![1; signature.plus],
        done: signature.minus == 0,
        pending: VecDeque::new(),
    })
}

impl ExactSolutions {
    fn advance_left(&mut self) {
        for slot in self.left.iter_mut().rev() {
            if *slot < self.y {
                *slot += 1;
                return;
            }
            *slot = 1;
        }
        self.done = true;
    }

    fn fill_pending(&mut self) {
        let mut classes: Vec<(u64, u64)> = Vec::new();
        for &n in &self.left {
            let (h, a) = self.table[n as usize - 1];
            match classes.iter_mut().find(|c| c.0 == h) {
                Some(c) => c.1 += a,
                None => classes.push((h, a)),
            }
        }
        classes.sort_unstable();
        if classes.len() > self.signature.minus {
            return;
        }
        let mut remaining: Vec<u64> = classes.iter().map(|c| c.1).collect();
        let mut right = Vec::with_capacity(self.signature.minus);
        let mut out = Vec::new();
        complete_right(&classes, &mut remaining, &mut right, self.signature.minus, self.y, &mut out);
        for r in out {
            let mut t = self.left.clone();
            t.extend(r);
            self.pending.push_back(t);
        }
    }
}

fn complete_right(
    classes: &[(u64, u64)],
    remaining: &mut [u64],
    right: &mut Vec<u64>,
    slots: usize,
    y: u64,
    out: &mut Vec<Vec<u64>>,
) {
    let open = remaining.iter().filter(|&&r| r > 0).count();
    let left_slots = slots - right.len();
    if open > left_slots {
        return;
    }
    if left_slots == 0 {
        if open == 0 {
            out.push(right.clone());
        }
        return;
    }
    for (c, &(h, _)) in classes.iter().enumerate() {
        if remaining[c] == 0 {
            continue;
        }
        let amax = iroot_floor(y / h, 2).min(remaining[c]);
        for a in 1..=amax {
            remaining[c] -= a;
            right.push(a * a * h);
            complete_right(classes, remaining, right, slots, y, out);
            right.pop();
            remaining[c] += a;
        }
    }
}

impl Iterator for ExactSolutions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        loop {
            if let Some(t) = self.pending.pop_front() {
                return Some(t);
            }
            if self.done {
                return None;
            }
            self.fill_pending();
            self.advance_left();
        }
    }
}

/// Independent oracle: solutions found by matching sorted double-precision
/// side sums within `tolerance`, with no kernel arithmetic involved.
pub fn float_filtered_solutions(signature: RelationSignature, y: u64, tolerance: f64) -> Vec<Vec<u64>> {
    fn side(len: usize, y: u64) -> Vec<(f64, Vec<u64>)> {
        let mut out = Vec::new();
        let mut t = vec![1u64; len];
        loop {
            out.push((t.iter().map(|&n| (n as f64).sqrt()).sum(), t.clone()));
            let mut i = len;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if t[i] < y {
                    t[i] += 1;
                    break;
                }
                t[i] = 1;
            }
        }
    }
    if signature.minus == 0 {
        return Vec::new();
    }
    let left = side(signature.plus, y);
    let mut right = side(signature.minus, y);
    right.sort_by(|a, b| a.0.total_cmp(&b.0));
    let keys: Vec<f64> = right.iter().map(|r| r.0).collect();
    let mut out = Vec::new();
    for (v, lt) in &left {
        let start = keys.partition_point(|&k| k < v - tolerance);
        for (k, rt) in right[start..].iter() {
            if *k > v + tolerance {
                break;
            }
            let mut t = lt.clone();
            t.extend_from_slice(rt);
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(p: usize, q: usize) -> RelationSignature {
        RelationSignature::new(p, q).unwrap()
    }

    #[test]
    fn integer_roots() {
        assert_eq!(iroot_floor(99, 2), 9);
        assert_eq!(iroot_floor(100, 2), 10);
        assert_eq!(iroot_floor(63, 3), 3);
        assert_eq!(iroot_floor(64, 3), 4);
        assert_eq!(iroot_floor(u64::MAX, 2), 4_294_967_295);
        assert_eq!(kernel_interval(2, 1, 50, 2), Some((1, 5)));
        assert_eq!(kernel_interval(2, 9, 50, 2), Some((3, 5)));
        assert_eq!(kernel_interval(3, 13, 26, 2), None);
    }

    #[test]
    fn one_one_solutions_are_the_diagonal() {
        let sols: Vec<_> = exact_relation_solutions(sig(1, 1), 30, &SearchBudget::default()).unwrap().collect();
        assert_eq!(sols.len(), 30);
        assert!(sols.iter().all(|t| t[0] == t[1]));
        assert_eq!(count_exact_solutions(&[(1, 30), (1, 30)], 1, 2).unwrap(), 30);
    }

    #[test]
    fn two_two_small_boxes() {
        let y4: Vec<_> = exact_relation_solutions(sig(2, 2), 4, &SearchBudget::default()).unwrap().collect();
        assert_eq!(y4.len(), 28);
        assert_eq!(count_exact_solutions(&[(1, 4); 4], 2, 2).unwrap(), 28);
        let y9: Vec<_> = exact_relation_solutions(sig(2, 2), 9, &SearchBudget::default()).unwrap().collect();
        assert!(y9.contains(&vec![1, 9, 4, 4]));
        assert_eq!(count_exact_solutions(&[(1, 9); 4], 2, 2).unwrap(), y9.len() as u128);
    }

    #[test]
    fn kernel_enumeration_matches_float_oracle() {
        for (p, q, y) in [(2, 2, 12), (3, 1, 12), (3, 2, 10), (3, 3, 8), (4, 2, 7)] {
            let s = sig(p, q);
            let mut a: Vec<_> = exact_relation_solutions(s, y, &SearchBudget::default()).unwrap().collect();
            let mut b = float_filtered_solutions(s, y, 1e-9);
            a.sort();
            b.sort();
            assert_eq!(a, b, "signature {s}, Y = {y}");
            assert_eq!(count_exact_solutions(&vec![(1, y); p + q], p, 2).unwrap(), a.len() as u128);
        }
    }

    #[test]
    fn no_solutions_without_negative_side() {
        let mut it = exact_relation_solutions(sig(2, 0), 10, &SearchBudget::default()).unwrap();
        assert!(it.next().is_none());
        assert_eq!(count_exact_solutions(&[(1, 5), (1, 5)], 2, 2).unwrap(), 0);
    }

    #[test]
    fn enumeration_budget_enforced() {
        let tight = SearchBudget { max_side_entries: 10, max_enumeration: 1000, ..SearchBudget::default() };
        let err = exact_relation_solutions(sig(4, 4), 100, &tight).err().unwrap();
        assert!(err.is_budget());
    }

    #[test]
    fn uneven_ranges_and_cube_roots() {
        // brute force over a small mixed box
        let ranges = [(1u64, 20u64), (5, 17), (2, 30)];
        let table = kernel_table(30, 2);
        let mut brute = 0u128;
        for a in 1..=20 {
            for b in 5..=17 {
                for c in 2..=30 {
                    if is_exact_zero(&[a, b, c], 2, &table) {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(count_exact_solutions(&ranges, 2, 2).unwrap(), brute);
        assert!(brute > 0);
        // ∛a + ∛b = ∛c over [1, 200]
        let table3 = kernel_table(200, 3);
        let mut brute3 = 0u128;
        for a in 1..=200u64 {
            for b in 1..=200u64 {
                for c in 1..=200u64 {
                    if is_exact_zero(&[a, b, c], 2, &table3) {
                        brute3 += 1;
                    }
                }
            }
        }
        assert_eq!(count_exact_solutions(&[(1, 200); 3], 2, 3).unwrap(), brute3);
    }

    #[test]
    fn weighted_sum_matches_explicit_enumeration() {
        let y = 9u64;
        let weight: Vec<f64> = (1..=y).map(|n| 1.0 / (n as f64 + 0.5)).collect();
        for (p, q) in [(2, 2), (3, 1), (2, 3)] {
            let explicit: f64 = exact_relation_solutions(sig(p, q), y, &SearchBudget::default())
                .unwrap()
                .map(|t| t.iter().map(|&n| weight[n as usize - 1]).product::<f64>())
                .sum();
            let dp = kernel_class_sum(p, q, y, &weight);
            assert!((explicit - dp).abs() < 1e-13 * explicit, "({p},{q}): {explicit} vs {dp}");
        }
    }
}
