//! Reproducible checks of the laboratory against known results.
//!
//! Each criterion produces a pass/fail verdict, a one-line summary and the
//! numbers it was judged on. Criteria 1 to 12 are independent computations;
//! criterion 13 compares two complete runs made with different thread
//! counts.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{eighth_coefficient, eighth_coefficient_from_mean, SeriesConstants};
use crate::divisor::{delta_at, hyperbola_d, DivisorTable};
use crate::error::{LabError, Result};
use crate::expsum::moment8_s;
use crate::moment::{abs_moment_profile, integrate_powers, moment_profile, MomentResult, Power};
use crate::numeric::loglog_slope;
use crate::relations::{
    count_exact_solutions, exact_relation_solutions, float_filtered_solutions, min_gap, near_solution_count,
    RelationQuery, RelationSignature, SearchBudget,
};
use crate::voronoi::{residual_mean_squares, VoronoiSeries};

/// Checkpoints of the full-range moments.
pub const MOMENT_CHECKPOINTS: [f64; 3] = [1e5, 1e6, 1e7];
/// Cutoff of Ĉ₁ and Ĉ₂.
pub const LOW_CUTOFF: u64 = 10_000;
/// Largest cutoff of Ĉ₄ and Ĉ₇; the fit also uses a half and a quarter of it.
pub const HIGH_CUTOFF: u64 = 256;
/// Sample points of each Voronoi mean square.
pub const VORONOI_SAMPLES: u64 = 20_000;
/// Thread counts compared by the determinism check.
pub const THREAD_COUNTS: [usize; 2] = [1, 8];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub observations: Vec<Observation>,
    /// Wall time; excluded from comparisons.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `criterion  3 PASS first moment: ...`
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("criterion {:>2} {verdict} {}: {}", self.id, self.title, self.summary)
    }
}

pub const TITLES: [&str; 13] = [
    "hyperbola vs sieve",
    "pointwise delta",
    "first moment",
    "second moment",
    "third and fourth moments",
    "eighth moment",
    "coefficient identity",
    "voronoi truncation",
    "gap constants",
    "counting bounds",
    "exponential-sum moment",
    "absolute-moment slopes",
    "determinism",
];

/// Ids run by [`run_suite`]; 13 is assembled by [`determinism`].
pub const SUITE_IDS: [u8; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Default)]
struct Record {
    obs: Vec<Observation>,
}

impl Record {
    fn push(&mut self, label: impl Into<String>, value: f64) {
        self.obs.push(Observation { label: label.into(), value });
    }
}

/// Work shared between criteria: constants and the full-range moment pass.
#[derive(Default)]
pub struct Suite {
    constants: OnceLock<std::result::Result<SeriesConstants, LabError>>,
    moments: OnceLock<std::result::Result<Vec<MomentResult>, LabError>>,
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    fn constants(&self) -> Result<SeriesConstants> {
        self.constants.get_or_init(|| SeriesConstants::compute(LOW_CUTOFF, HIGH_CUTOFF)).clone()
    }

    fn moment(&self, k: u32, x: f64) -> Result<MomentResult> {
        let all = self
            .moments
            .get_or_init(|| {
                let c = self.constants()?;
                moment_profile(&[1, 2, 3, 4, 8], &MOMENT_CHECKPOINTS, &c)
            })
            .as_ref()
            .map_err(Clone::clone)?;
        all.iter()
            .find(|r| r.exponent == k as f64 && r.hi == x)
            .cloned()
            .ok_or_else(|| LabError::argument(format!("moment k = {k} at X = {x} not in the shared pass")))
    }

    pub fn run(&self, id: u8) -> CriterionOutcome {
        let title = title(id);
        let start = Instant::now();
        let mut rec = Record::default();
        let verdict = match id {
            1 => hyperbola_exactness(&mut rec),
            2 => pointwise_delta(&mut rec),
            3 => self.first_moment(&mut rec),
            4 => self.second_moment(&mut rec),
            5 => self.third_fourth(&mut rec),
            6 => self.eighth(&mut rec),
            7 => coefficient_identity(&mut rec),
            8 => voronoi_truncation(&mut rec),
            9 => gap_constants(&mut rec),
            10 => counting_bounds(&mut rec),
            11 => expsum_moment(&mut rec),
            12 => self.slopes(&mut rec),
            _ => Err(LabError::argument(format!("criterion {id} is not part of the suite"))),
        };
        let (passed, summary) = match verdict {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        CriterionOutcome { id, title, passed, summary, observations: rec.obs, seconds: start.elapsed().as_secs_f64() }
    }

    fn first_moment(&self, rec: &mut Record) -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for x in MOMENT_CHECKPOINTS {
            let r = self.moment(1, x)?;
            let err = (r.integral - x / 4.0).abs();
            let allowed = 20.0 * x.powf(0.75);
            rec.push(format!("integral@{x:e}"), r.integral);
            rec.push(format!("scaled_error@{x:e}"), err / x.powf(0.75));
            ok &= err <= allowed;
            parts.push(format!("X={x:e} |err|/X^(3/4)={:.3}", err / x.powf(0.75)));
        }
        Ok((ok, format!("{} (limit 20)", parts.join(", "))))
    }

    fn second_moment(&self, rec: &mut Record) -> Result<(bool, String)> {
        // the checkpoints integrate from 2; add the piece over [1, 2]
        let head = integrate_powers(1.0, 2.0, &[Power::Signed(2)])?[0];
        let coeff = crate::constants::main_term_coefficient(2, &self.constants()?)?;
        let mut devs = Vec::new();
        for x in MOMENT_CHECKPOINTS {
            let r = self.moment(2, x)?;
            let ratio = (r.integral + head) / x.powf(1.5);
            let dev = ratio / coeff - 1.0;
            rec.push(format!("normalised@{x:e}"), ratio);
            devs.push(dev);
        }
        rec.push("coefficient", coeff);
        let last = devs[devs.len() - 1];
        let ok = last.abs() <= 0.10 && last.abs() < devs[0].abs();
        Ok((ok, format!("coefficient {coeff:.6}, deviation {:+.4} at 1e5, {last:+.4} at 1e7 (limit 0.10, shrinking)", devs[0])))
    }

    fn third_fourth(&self, rec: &mut Record) -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for k in [3u32, 4] {
            let mut devs = Vec::new();
            for x in MOMENT_CHECKPOINTS {
                let r = self.moment(k, x)?;
                let dev = r.relative_deviation.ok_or_else(|| LabError::range("missing main term"))?;
                rec.push(format!("k{k}_integral@{x:e}"), r.integral);
                rec.push(format!("k{k}_deviation@{x:e}"), dev);
                devs.push(dev);
            }
            let (first, last) = (devs[0], devs[devs.len() - 1]);
            let good = last.abs() <= 0.25 && last.abs() < first.abs();
            ok &= good;
            parts.push(format!("k={k} deviation {first:+.3} -> {last:+.3}"));
        }
        let c = self.constants()?;
        rec.push("c1", c.c1.extrapolated);
        rec.push("c2", c.c2.extrapolated);
        Ok((ok, format!("{} (limit 0.25 at 1e7, shrinking)", parts.join(", "))))
    }

    fn eighth(&self, rec: &mut Record) -> Result<(bool, String)> {
        let mut ratios = Vec::new();
        for x in MOMENT_CHECKPOINTS {
            let r = self.moment(8, x)?;
            let ratio = r.integral / r.main_term;
            rec.push(format!("integral@{x:e}"), r.integral);
            rec.push(format!("ratio@{x:e}"), ratio);
            ratios.push(ratio);
        }
        let c = self.constants()?;
        rec.push("c4", c.c4.extrapolated);
        rec.push("c7", c.c7.extrapolated);
        let (first, last) = (ratios[0], ratios[ratios.len() - 1]);
        let ok = (0.5..=2.0).contains(&last) && (last - 1.0).abs() < (first - 1.0).abs();
        Ok((ok, format!("ratio {first:.3} at 1e5, {last:.3} at 1e7 (want [0.5, 2] and closer to 1)")))
    }

    fn slopes(&self, rec: &mut Record) -> Result<(bool, String)> {
        let xs = [1e4, 1e5, 1e6];
        let exps = [35.0 / 4.0, 267.0 / 27.0];
        let c = self.constants()?;
        let rows = abs_moment_profile(&exps, &xs, &c)?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (j, &a) in exps.iter().enumerate() {
            let ys: Vec<f64> = (0..xs.len()).map(|i| rows[i * exps.len() + j].integral).collect();
            let slope = loglog_slope(&xs, &ys);
            let limit = 1.0 + a / 4.0 + 0.05;
            rec.push(format!("slope_A{a:.6}"), slope);
            ok &= slope <= limit;
            parts.push(format!("A={a:.4} slope {slope:.4} (limit {limit:.4})"));
        }
        Ok((ok, parts.join(", ")))
    }
}

pub fn title(id: u8) -> &'static str {
    TITLES.get(id.wrapping_sub(1) as usize).copied().unwrap_or("unknown")
}

/// Runs the given criteria in order with shared intermediate results.
pub fn run_suite(ids: &[u8]) -> Vec<CriterionOutcome> {
    let suite = Suite::new();
    ids.iter().map(|&id| suite.run(id)).collect()
}

/// [`run_suite`] inside a dedicated pool of `threads` workers.
pub fn run_suite_with_threads(ids: &[u8], threads: usize) -> Result<Vec<CriterionOutcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::argument(format!("cannot build a pool of {threads} threads: {e}")))?;
    Ok(pool.install(|| run_suite(ids)))
}

/// Distance in units in the last place; equal values (and equal NaNs) are 0.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a.to_bits() == b.to_bits() || a == b {
        return 0;
    }
    if a.is_nan() || b.is_nan() || a.signum() != b.signum() {
        return u64::MAX;
    }
    a.to_bits().abs_diff(b.to_bits())
}

/// Compares two runs value by value (at most one ulp apart) and verdict by
/// verdict.
pub fn determinism(first: &[CriterionOutcome], second: &[CriterionOutcome], threads: (usize, usize)) -> CriterionOutcome {
    let mut rec = Record::default();
    let mut worst = 0u64;
    let mut mismatch = Vec::new();
    if first.len() != second.len() {
        mismatch.push(format!("{} vs {} criteria", first.len(), second.len()));
    }
    for (a, b) in first.iter().zip(second) {
        if a.id != b.id || a.passed != b.passed || a.observations.len() != b.observations.len() {
            mismatch.push(format!("criterion {}", a.id));
            continue;
        }
        for (x, y) in a.observations.iter().zip(&b.observations) {
            let d = ulp_distance(x.value, y.value);
            worst = worst.max(d);
            if x.label != y.label || d > 1 {
                mismatch.push(format!("{}:{}", a.id, x.label));
            }
        }
    }
    rec.push("max_ulp", worst as f64);
    let passed = mismatch.is_empty();
    let summary = if passed {
        format!("{} and {} threads agree, max distance {worst} ulp", threads.0, threads.1)
    } else {
        format!("{} and {} threads differ at {}", threads.0, threads.1, mismatch.join(", "))
    };
    CriterionOutcome { id: 13, title: title(13), passed, summary, observations: rec.obs, seconds: 0.0 }
}

fn hyperbola_exactness(rec: &mut Record) -> Result<(bool, String)> {
    const X: u64 = 1_000_000;
    let start = Instant::now();
    let table = DivisorTable::build(1, X)?;
    let mut prefix: u128 = 0;
    let mut bad = None;
    for x in 1..=X {
        prefix += table.d(x) as u128;
        if hyperbola_d(x) != prefix {
            bad = Some(x);
            break;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rec.push("D(1e6)", prefix as f64);
    let ok = bad.is_none() && secs < 60.0;
    let summary = match bad {
        Some(x) => format!("mismatch at x = {x}"),
        None => format!("D(x) agrees for every x <= 1e6, D(1e6) = {prefix}, {secs:.1} s (limit 60 s)"),
    };
    Ok((ok, summary))
}

fn pointwise_delta(rec: &mut Record) -> Result<(bool, String)> {
    let direct: u128 = (1..=100u128).map(|k| 100 / k).sum();
    let s = delta_at(100.0)?;
    rec.push("D(100)", s.summatory as f64);
    rec.push("delta(100)", s.delta);
    let ok = s.summatory == direct && direct == 482 && (s.delta - 6.0399).abs() <= 1e-3;
    Ok((ok, format!("D(100) = {} (direct {direct}), delta(100) = {:.6} (want 6.0399 +- 1e-3)", s.summatory, s.delta)))
}

fn coefficient_identity(rec: &mut Record) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c4: f64 = rng.gen_range(0.0..1e6);
        let c7: f64 = rng.gen_range(c4..1e8);
        let a = eighth_coefficient(c4, c7);
        let b = eighth_coefficient_from_mean(c4, c7);
        worst = worst.max(((a - b) / b).abs());
    }
    rec.push("max_relative_error", worst);
    Ok((worst <= 1e-14, format!("max relative error {worst:.2e} over 100 draws (limit 1e-14)")))
}

fn voronoi_truncation(rec: &mut Record) -> Result<(bool, String)> {
    let cutoffs = [100u64, 1000, 1600, 16000];
    let series = VoronoiSeries::new(16000)?;
    let ms = residual_mean_squares(&series, 1e5, 1e5, &cutoffs, VORONOI_SAMPLES)?;
    for (y, m) in cutoffs.iter().zip(&ms) {
        rec.push(format!("mean_square@{y}"), *m);
    }
    let r100 = ms[0] / ms[2];
    let r1000 = ms[1] / ms[3];
    rec.push("ratio@100", r100);
    rec.push("ratio@1000", r1000);
    let ok = (2.0..=8.0).contains(&r100) && (2.0..=8.0).contains(&r1000);
    Ok((ok, format!("MS(Y)/MS(16Y) = {r100:.3} at Y=100, {r1000:.3} at Y=1000 (want [2, 8])")))
}

fn gap_constants(rec: &mut Record) -> Result<(bool, String)> {
    let budget = SearchBudget::default();
    let cases: [((usize, usize), [u64; 2]); 5] = [
        ((2, 2), [50, 100]),
        ((4, 4), [6, 12]),
        ((5, 3), [6, 12]),
        ((6, 2), [6, 12]),
        ((7, 1), [6, 12]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for ((p, q), ys) in cases {
        let sig = RelationSignature::new(p, q)?;
        let mut consts = Vec::new();
        for y in ys {
            let g = min_gap(sig, y, &budget)?;
            rec.push(format!("gap{sig}@{y}"), g.gap);
            rec.push(format!("constant{sig}@{y}"), g.empirical_constant);
            consts.push(g.empirical_constant);
        }
        let spread = consts[1] / consts[0];
        let good = consts.iter().all(|&c| c > 0.0 && c.is_finite()) && (0.1..=10.0).contains(&spread);
        ok &= good;
        parts.push(format!("{sig} C(2Y)/C(Y) = {spread:.3e}"));
    }
    Ok((ok, format!("{} (want positive, within x10)", parts.join(", "))))
}

/// A counting shape: signature, the threshold for (size, δ), and the bound.
struct Shape {
    name: &'static str,
    signatures: &'static [(usize, usize)],
    deltas: [f64; 3],
    threshold: fn(f64, f64) -> f64,
    bound: fn(f64, f64) -> f64,
}

const SHAPES: [Shape; 3] = [
    Shape {
        name: "four-root",
        signatures: &[(2, 2)],
        deltas: [1e-3, 1e-2, 1e-1],
        threshold: |k, d| d * k.sqrt(),
        bound: |k, d| k.powi(4) * (d + k.powf(-1.5)),
    },
    Shape {
        name: "eight-root",
        signatures: &[(4, 4), (5, 3)],
        deltas: [1e-4, 1e-3, 1e-2],
        threshold: |l, d| d * l.sqrt(),
        bound: |l, d| (d * l * l + l.sqrt()) * l.powi(6),
    },
    Shape {
        name: "eight-root absolute",
        signatures: &[(4, 4), (5, 3)],
        deltas: [1e-5, 1e-4, 1e-3],
        threshold: |_, d| d,
        bound: |n, d| (d.powf(0.125) * n.powf(15.0 / 16.0) + n.powf(0.25)).powi(8),
    },
];

fn counting_bounds(rec: &mut Record) -> Result<(bool, String)> {
    let budget = SearchBudget::default();
    let sizes = [16u64, 32];
    let mut monotone = true;
    let mut worst: f64 = 1.0;
    let mut stable = true;
    for shape in &SHAPES {
        for &(p, q) in shape.signatures {
            let sig = RelationSignature::new(p, q)?;
            let mut fits = Vec::new();
            for &k in &sizes {
                let base = RelationQuery::uniform(sig, k + 1, 2 * k, 0.0)?;
                let mut prev = 0u128;
                let mut row = Vec::new();
                for &d in &shape.deltas {
                    let count = near_solution_count(&base.with_delta((shape.threshold)(k as f64, d))?, &budget)?.count;
                    monotone &= count >= prev;
                    prev = count;
                    rec.push(format!("{}{sig}@{k}:{d:e}", shape.name), count as f64);
                    row.push(count as f64 / (shape.bound)(k as f64, d));
                }
                fits.push(row);
            }
            for (a, b) in fits[0].iter().zip(&fits[1]) {
                if *a == 0.0 && *b == 0.0 {
                    continue;
                }
                let r = if *a == 0.0 || *b == 0.0 { f64::INFINITY } else { (a / b).max(b / a) };
                worst = worst.max(r);
                stable &= r <= 8.0;
            }
        }
    }
    rec.push("worst_fit_ratio", worst);
    let (agree, checked) = exact_vs_float(rec)?;
    let ok = monotone && stable && agree;
    Ok((
        ok,
        format!(
            "monotone in delta: {monotone}, worst constant ratio across doubling {worst:.3} (limit 8), \
             exact = float-filtered on {checked} signatures: {agree}"
        ),
    ))
}

fn exact_vs_float(rec: &mut Record) -> Result<(bool, usize)> {
    let cases: [(usize, usize, u64); 8] =
        [(1, 1, 12), (2, 1, 12), (2, 2, 12), (3, 1, 12), (3, 2, 12), (3, 3, 12), (4, 4, 8), (5, 3, 8)];
    let budget = SearchBudget::default();
    let mut agree = true;
    for (p, q, y) in cases {
        let sig = RelationSignature::new(p, q)?;
        let mut exact: Vec<Vec<u64>> = exact_relation_solutions(sig, y, &budget)?.collect();
        let mut float = float_filtered_solutions(sig, y, 1e-9);
        exact.sort();
        float.sort();
        let counted = count_exact_solutions(&vec![(1, y); p + q], p, 2)?;
        rec.push(format!("exact_solutions{sig}@{y}"), exact.len() as f64);
        agree &= exact == float && counted == exact.len() as u128;
    }
    Ok((agree, cases.len()))
}

fn expsum_moment(rec: &mut Record) -> Result<(bool, String)> {
    let mut ratios = Vec::new();
    for n in [64u64, 128, 256] {
        for u in [n as f64, (n * n) as f64] {
            let m = moment8_s(u, n, 2, 16)?;
            rec.push(format!("ratio@N{n}U{u}"), m.ratio);
            ratios.push(m.ratio);
        }
    }
    let fit = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    rec.push("fitted_constant", fit);
    Ok((max <= 8.0 * fit, format!("fitted constant {fit:.4}, largest ratio {max:.4} (limit 8x fit)")))
}
