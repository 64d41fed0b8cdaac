use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use super::exact::count_exact_solutions;
use super::hp::{evaluate, form_terms};
use super::kernel::{KernelSieve, DEFAULT_SIEVE_BOUND};
use super::{RelationCount, RelationQuery, RelationSignature, SearchBudget};
use crate::error::{LabError, Result};

/// Float values at or below this are treated as possible exact zeros and
/// settled by kernel arithmetic or the high-precision evaluator.
pub const FLOAT_ZERO_WINDOW: f64 = 1e-9;

/// Nearest float candidates re-evaluated in high precision for the minimum.
const GAP_CANDIDATES: usize = 64;

const CHUNK: usize = 1 << 14;

/// Smallest nonzero |form| over `[1, Y]^v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinGap {
    pub signature: RelationSignature,
    pub y: u64,
    pub gap: f64,
    /// Tuple attaining the gap, positive positions first.
    pub witness: Vec<u64>,
    /// Radius of the high-precision enclosure of the gap.
    pub radius: f64,
    /// e in the floor Y^{−e}.
    pub exponent: f64,
    /// gap · Y^e.
    pub empirical_constant: f64,
}

/// Signed root values of one half of the variables, in odometer order
/// (last position fastest).
struct Side {
    lens: Vec<u64>,
    los: Vec<u64>,
    keys: Vec<f64>,
    codes: Vec<u32>,
}

impl Side {
    fn build(ranges: &[(u64, u64)], signs: &[bool], root: u32, sort: bool) -> Self {
        let mut keys = vec![0.0f64];
        for (&(lo, hi), &positive) in ranges.iter().zip(signs) {
            let roots: Vec<f64> = (lo..=hi)
                .map(|n| {
                    let r = if root == 2 { (n as f64).sqrt() } else { (n as f64).powf(1.0 / root as f64) };
                    if positive {
                        r
                    } else {
                        -r
                    }
                })
                .collect();
            let mut next = Vec::with_capacity(keys.len() * roots.len());
            for &k in &keys {
                next.extend(roots.iter().map(|&r| k + r));
            }
            keys = next;
        }
        let mut codes: Vec<u32> = (0..keys.len() as u32).collect();
        if sort {
            codes.sort_by(|&a, &b| keys[a as usize].total_cmp(&keys[b as usize]).then(a.cmp(&b)));
            keys = codes.iter().map(|&c| keys[c as usize]).collect();
        }
        Self {
            lens: ranges.iter().map(|&(lo, hi)| hi - lo + 1).collect(),
            los: ranges.iter().map(|r| r.0).collect(),
            keys,
            codes,
        }
    }

    fn decode(&self, code: u32, out: &mut Vec<u64>) {
        let mut c = code as u64;
        let start = out.len();
        for (&len, &lo) in self.lens.iter().zip(&self.los).rev() {
            out.push(lo + c % len);
            c /= len;
        }
        out[start..].reverse();
    }

    /// Entries with key in the open interval (x − w, x + w).
    fn window(&self, x: f64, w: f64) -> (usize, usize) {
        let lo = self.keys.partition_point(|&k| k <= x - w);
        let hi = self.keys.partition_point(|&k| k < x + w);
        (lo, hi.max(lo))
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    a: u32,
    b: u32,
}

impl Candidate {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(self.a.cmp(&other.a)).then(self.b.cmp(&other.b))
    }
}

/// Keeps the `cap` smallest candidates.
fn keep_smallest(list: &mut Vec<Candidate>, cap: usize) {
    if list.len() > 2 * cap {
        list.sort_by(Candidate::cmp_key);
        list.truncate(cap);
    }
}

struct Split {
    plus: usize,
    a: Side,
    b: Side,
}

impl Split {
    fn new(query: &RelationQuery, budget: &SearchBudget) -> Result<Self> {
        let v = query.ranges.len();
        let m = v.div_ceil(2);
        let limit = budget.max_side_entries.min(u32::MAX as u64) as u128;
        for (label, part) in [("first", &query.ranges[..m]), ("second", &query.ranges[m..])] {
            let size: u128 = part.iter().map(|&(lo, hi)| (hi - lo + 1) as u128).product();
            if size > limit {
                return Err(LabError::budget(
                    format!("meet-in-the-middle {label} half of signature {}", query.signature),
                    size,
                    limit,
                )
                .with_hint("raise max_side_entries or shrink the ranges"));
            }
        }
        let signs: Vec<bool> = (0..v).map(|i| i < query.signature.plus).collect();
        Ok(Self {
            plus: query.signature.plus,
            a: Side::build(&query.ranges[..m], &signs[..m], query.root, false),
            b: Side::build(&query.ranges[m..], &signs[m..], query.root, true),
        })
    }

    fn tuple(&self, a: u32, b: u32) -> Vec<u64> {
        let mut t = Vec::with_capacity(self.a.lens.len() + self.b.lens.len());
        self.a.decode(a, &mut t);
        self.b.decode(self.b.codes[b as usize], &mut t);
        t
    }

    /// Number of tuples whose float value lies in (−w, w).
    fn window_count(&self, w: f64) -> u128 {
        self.a
            .keys
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|&x| {
                        let (lo, hi) = self.b.window(-x, w);
                        (hi - lo) as u128
                    })
                    .sum::<u128>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }
}

/// Float-window tuples that are not exact zeros, each with its enclosure
/// value, plus the nearest non-window candidates for the minimum gap.
struct Sweep {
    tiny: Vec<(Vec<u64>, f64, f64)>,
    nearest: Vec<Candidate>,
}

fn sweep(split: &Split, root: u32, sieve: &KernelSieve) -> Result<Sweep> {
    let plus = split.plus;
    let chunks: Vec<Result<Sweep>> = split
        .a
        .keys
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut out = Sweep { tiny: Vec::new(), nearest: Vec::new() };
            let keys = &split.b.keys;
            for (off, &x) in chunk.iter().enumerate() {
                let a = (ci * CHUNK + off) as u32;
                let (lo, hi) = split.b.window(-x, FLOAT_ZERO_WINDOW);
                for j in lo..hi {
                    let t = split.tuple(a, j as u32);
                    if exact_zero(&t, plus, root, sieve)? {
                        continue;
                    }
                    let e = evaluate(&form_terms(&t, plus), root);
                    out.tiny.push((t, e.magnitude(), e.radius));
                }
                if hi < keys.len() {
                    out.nearest.push(Candidate { value: (x + keys[hi]).abs(), a, b: hi as u32 });
                }
                if lo > 0 {
                    out.nearest.push(Candidate { value: (x + keys[lo - 1]).abs(), a, b: (lo - 1) as u32 });
                }
                keep_smallest(&mut out.nearest, GAP_CANDIDATES);
            }
            Ok(out)
        })
        .collect();
    let mut all = Sweep { tiny: Vec::new(), nearest: Vec::new() };
    for c in chunks {
        let c = c?;
        all.tiny.extend(c.tiny);
        all.nearest.extend(c.nearest);
        keep_smallest(&mut all.nearest, GAP_CANDIDATES);
    }
    all.nearest.sort_by(Candidate::cmp_key);
    all.nearest.truncate(GAP_CANDIDATES);
    Ok(all)
}

/// Kernel-by-kernel zero test for values of any size.
fn exact_zero(tuple: &[u64], plus: usize, root: u32, sieve: &KernelSieve) -> Result<bool> {
    let mut parts = Vec::with_capacity(tuple.len());
    for (i, &n) in tuple.iter().enumerate() {
        let f = sieve.decompose_root(n, root)?;
        parts.push((f.h, if i < plus { f.a as i128 } else { -(f.a as i128) }));
    }
    parts.sort_unstable_by_key(|p| p.0);
    Ok(parts.chunk_by(|x, y| x.0 == y.0).all(|g| g.iter().map(|p| p.1).sum::<i128>() == 0))
}

/// Smallest certified nonzero gap among the sweep results.
fn best_gap(split: &Split, sweep: &Sweep, root: u32) -> Option<(Vec<u64>, f64, f64)> {
    let mut best: Option<(Vec<u64>, f64, f64)> = None;
    let mut consider = |t: Vec<u64>, v: f64, r: f64| {
        let better = match &best {
            None => true,
            Some((bt, bv, _)) => v < *bv || (v == *bv && t < *bt),
        };
        if better {
            best = Some((t, v, r));
        }
    };
    for (t, v, r) in &sweep.tiny {
        consider(t.clone(), *v, *r);
    }
    for c in &sweep.nearest {
        let t = split.tuple(c.a, c.b);
        let e = evaluate(&form_terms(&t, split.plus), root);
        consider(t, e.magnitude(), e.radius);
    }
    best
}

fn sieve_for(query: &RelationQuery) -> KernelSieve {
    KernelSieve::new(query.max_value().min(DEFAULT_SIEVE_BOUND))
}

/// Counts tuples in the query box with 0 < |form| < δ.
///
/// δ = 0 counts exact solutions and δ = ∞ counts every tuple that is not an
/// exact solution. In between, the float window count W(δ) of a
/// meet-in-the-middle sweep is corrected by the exact solution count E;
/// below [`FLOAT_ZERO_WINDOW`] every window tuple is settled individually.
pub fn near_solution_count(query: &RelationQuery, budget: &SearchBudget) -> Result<RelationCount> {
    let plus = query.signature.plus;
    let exact = count_exact_solutions(&query.ranges, plus, query.root)?;
    let space = query.space_size();
    let split = Split::new(query, budget);
    let split = match split {
        Ok(s) => s,
        Err(_) if query.delta == 0.0 || query.delta.is_infinite() => {
            let count = if query.delta == 0.0 { exact } else { space - exact };
            return Ok(RelationCount { query: query.clone(), count, exact_solutions: exact, min_nonzero_gap: None });
        }
        Err(e) => return Err(e),
    };
    let window = split.window_count(FLOAT_ZERO_WINDOW);
    let settled = if window <= budget.max_certifications {
        Some(sweep(&split, query.root, &sieve_for(query))?)
    } else {
        None
    };
    let min_nonzero_gap = settled.as_ref().and_then(|s| best_gap(&split, s, query.root)).map(|g| g.1);
    let count = if query.delta == 0.0 {
        exact
    } else if query.delta.is_infinite() {
        space - exact
    } else if query.delta > FLOAT_ZERO_WINDOW {
        let w = split.window_count(query.delta);
        w.checked_sub(exact).ok_or_else(|| {
            LabError::range(format!("float window count {w} below exact count {exact}; values too large for doubles"))
        })?
    } else if window == exact {
        0
    } else {
        let Some(s) = &settled else {
            return Err(LabError::budget("certification of sub-threshold candidates", window, budget.max_certifications)
                .with_hint("raise max_certifications"));
        };
        s.tiny.iter().filter(|(_, v, _)| *v < query.delta).count() as u128
    };
    Ok(RelationCount { query: query.clone(), count, exact_solutions: exact, min_nonzero_gap })
}

/// Smallest nonzero |Σ√n_i − Σ√m_j| over `[1, Y]^v`, certified in high
/// precision, with the empirical constant gap · Y^e.
pub fn min_gap(signature: RelationSignature, y: u64, budget: &SearchBudget) -> Result<MinGap> {
    if y < 2 {
        return Err(LabError::argument("minimum gap needs Y >= 2"));
    }
    let query = RelationQuery::uniform(signature, 1, y, 0.0)?;
    let split = Split::new(&query, budget)?;
    let window = split.window_count(FLOAT_ZERO_WINDOW);
    if window > budget.max_certifications {
        return Err(LabError::budget("near-zero candidates of minimum gap search", window, budget.max_certifications)
            .with_hint("raise max_certifications"));
    }
    let s = sweep(&split, 2, &sieve_for(&query))?;
    let (witness, gap, radius) =
        best_gap(&split, &s, 2).ok_or_else(|| LabError::range(format!("no nonzero value of {signature} on [1, {y}]")))?;
    let exponent = signature.gap_exponent();
    Ok(MinGap {
        signature,
        y,
        gap,
        witness,
        radius,
        exponent,
        empirical_constant: gap * (y as f64).powf(exponent),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::kernel_table;
    use crate::relations::is_exact_zero;

    fn sig(p: usize, q: usize) -> RelationSignature {
        RelationSignature::new(p, q).unwrap()
    }

    fn brute(query: &RelationQuery) -> (u128, f64) {
        let v = query.ranges.len();
        let plus = query.signature.plus;
        let table = kernel_table(query.max_value(), 2);
        let mut t: Vec<u64> = query.ranges.iter().map(|r| r.0).collect();
        let mut count = 0u128;
        let mut gap = f64::INFINITY;
        loop {
            if !is_exact_zero(&t, plus, &table) {
                let e = evaluate(&form_terms(&t, plus), 2);
                let val = e.magnitude();
                gap = gap.min(val);
                if query.delta == 0.0 {
                } else if val < query.delta {
                    count += 1;
                }
            } else if query.delta == 0.0 {
                count += 1;
            }
            let mut i = v;
            loop {
                if i == 0 {
                    return (count, gap);
                }
                i -= 1;
                if t[i] < query.ranges[i].1 {
                    t[i] += 1;
                    break;
                }
                t[i] = query.ranges[i].0;
            }
        }
    }

    #[test]
    fn counts_match_brute_force() {
        let budget = SearchBudget::default();
        for (s, y) in [(sig(2, 2), 15), (sig(3, 1), 12), (sig(2, 3), 8), (sig(1, 1), 50)] {
            for delta in [0.0, 1e-3, 0.01, 0.1, 0.5, f64::INFINITY] {
                let q = RelationQuery::uniform(s, 1, y, delta).unwrap();
                let got = near_solution_count(&q, &budget).unwrap();
                let (want, gap) = brute(&q);
                assert_eq!(got.count, want, "{s} Y={y} delta={delta}");
                assert_eq!(got.min_nonzero_gap, Some(gap));
            }
        }
    }

    #[test]
    fn mixed_ranges_match_brute_force() {
        let s = sig(2, 2);
        let q = RelationQuery::new(s, vec![(3, 20), (1, 9), (10, 18), (2, 25)], 0.05).unwrap();
        let got = near_solution_count(&q, &SearchBudget::default()).unwrap();
        assert_eq!(got.count, brute(&q).0);
    }

    #[test]
    fn sub_threshold_delta_is_certified() {
        // √(n+1) − √n ≈ 1/(2√n): with n near 10^10 the gaps sit near 5e-6,
        // so δ below the float window must count nothing here
        let s = sig(1, 1);
        let q = RelationQuery::new(s, vec![(10_000_000_000, 10_000_000_050); 2], 1e-12).unwrap();
        let got = near_solution_count(&q, &SearchBudget::default()).unwrap();
        assert_eq!(got.count, 0);
        assert_eq!(got.exact_solutions, 51);
    }

    #[test]
    fn tiny_nonzero_values_are_found() {
        // √a + √b − √c − √d with a + b = c + d and ab ≈ cd gives values far
        // below 1e-9 once the entries are near 10^12
        let s = sig(2, 2);
        let base = 1_000_000_000_000u64;
        let ranges = vec![(base, base), (base + 2, base + 2), (base + 1, base + 1), (base + 1, base + 1)];
        let exact_value = evaluate(&form_terms(&[base, base + 2, base + 1, base + 1], 2), 2).magnitude();
        assert!(exact_value < 1e-9 && exact_value > 0.0);
        let q = RelationQuery::new(s, ranges.clone(), exact_value * 2.0).unwrap();
        assert_eq!(near_solution_count(&q, &SearchBudget::default()).unwrap().count, 1);
        let q = RelationQuery::new(s, ranges, exact_value / 2.0).unwrap();
        assert_eq!(near_solution_count(&q, &SearchBudget::default()).unwrap().count, 0);
    }

    #[test]
    fn min_gap_matches_brute_force() {
        for (s, y) in [(sig(2, 2), 20), (sig(3, 1), 10), (sig(2, 1), 30)] {
            let g = min_gap(s, y, &SearchBudget::default()).unwrap();
            let q = RelationQuery::uniform(s, 1, y, 0.0).unwrap();
            let (_, gap) = brute(&q);
            assert_eq!(g.gap, gap, "{s} Y={y}");
            let e = evaluate(&form_terms(&g.witness, s.plus), 2);
            assert_eq!(e.magnitude(), g.gap);
            assert!(e.excludes_zero());
            assert_eq!(g.empirical_constant, g.gap * (y as f64).powf(s.gap_exponent()));
        }
    }

    #[test]
    fn side_budget_reported() {
        let tight = SearchBudget { max_side_entries: 100, ..SearchBudget::default() };
        let q = RelationQuery::uniform(sig(2, 2), 1, 50, 0.1).unwrap();
        assert!(near_solution_count(&q, &tight).unwrap_err().is_budget());
        // exact counts do not need the sweep
        let q0 = q.with_delta(0.0).unwrap();
        let r = near_solution_count(&q0, &tight).unwrap();
        assert_eq!(r.count, count_exact_solutions(&q0.ranges, 2, 2).unwrap());
        assert!(min_gap(sig(2, 2), 50, &tight).unwrap_err().is_budget());
    }
}
