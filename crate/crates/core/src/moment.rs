//! Moments ∫Δᵏ and ∫|Δ|^A over long ranges and short windows.
//!
//! On each unit interval `[m, m+1)` the summatory function is the constant
//! D(m), so Δ is analytic there and an order-8 Gauss–Legendre rule per
//! interval integrates it to near machine precision. Intervals are streamed
//! in fixed blocks; each block keeps compensated sums and the blocks are
//! combined in index order, so the result does not depend on the thread
//! count.

use serde::Serialize;

use crate::constants::{main_term_coefficient, SeriesConstants};
use crate::divisor::{main_part_dd, DeltaStream, LINEAR_COEFF};
use crate::error::{LabError, Result};
use crate::numeric::{ordered_reduce, CompensatedSum, DoubleDouble, GaussLegendre, EULER_GAMMA};

/// Block length of the moment stream.
pub const MOMENT_BLOCK: u64 = 1 << 16;

/// Lower limit of the full-range moments.
pub const MOMENT_START: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentResult {
    /// k, or A for absolute moments.
    pub exponent: f64,
    pub lo: f64,
    pub hi: f64,
    pub integral: f64,
    /// Zero when no main term is known.
    pub main_term: f64,
    /// (integral − main_term) / main_term; absent without a main term.
    pub relative_deviation: Option<f64>,
    /// Cutoff of the constant estimates behind the main term (0 if none).
    pub constants_cutoff: u64,
    pub warning: Option<String>,
}

impl MomentResult {
    fn new(exponent: f64, lo: f64, hi: f64, integral: f64, main_term: f64, cutoff: u64) -> Self {
        let relative_deviation = (main_term != 0.0).then(|| (integral - main_term) / main_term);
        Self {
            exponent,
            lo,
            hi,
            integral,
            main_term,
            relative_deviation,
            constants_cutoff: cutoff,
            warning: None,
        }
    }
}

/// Integrand power: Δᵏ or |Δ|^A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Power {
    Signed(u32),
    Absolute(f64),
}

impl Power {
    #[inline]
    fn apply(self, delta: f64) -> f64 {
        match self {
            Power::Signed(k) => delta.powi(k as i32),
            Power::Absolute(a) => delta.abs().powf(a),
        }
    }
}

/// Δ on `[m, m+1)` written about the left end to avoid cancellation:
/// Δ(m+t) = c₀ − t(ln m + 2γ − 1) − (m+t)·ln(1 + t/m), c₀ = D(m) − m ln m − (2γ−1)m.
#[derive(Debug, Clone, Copy)]
struct Branch {
    m: f64,
    c0: f64,
    slope: f64,
}

impl Branch {
    fn new(m: u64, d_value: u64) -> Self {
        let mf = m as f64;
        let c0 = (DoubleDouble::from_u128(d_value as u128) - main_part_dd(mf)).to_f64();
        let slope = (DoubleDouble::from_f64(mf).ln() + LINEAR_COEFF).to_f64();
        Self { m: mf, c0, slope }
    }

    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let t = x - self.m;
        self.c0 - (t * self.slope + x * (t / self.m).ln_1p())
    }

    /// Zero inside `(a, b)` given Δ(a) > 0 > Δ(b); the branch is strictly
    /// decreasing with derivative −(ln x + 2γ).
    fn zero(&self, a: f64, b: f64) -> f64 {
        let mut lo = a;
        let mut hi = b;
        let mut x = 0.5 * (a + b);
        for _ in 0..60 {
            let f = self.eval(x);
            if f > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let step = f / (x.ln() + 2.0 * EULER_GAMMA);
            let next = x + step;
            x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if step.abs() < 1e-15 * x || hi - lo < 1e-15 * x {
                break;
            }
        }
        x
    }
}

/// Adds ∫_a^b of each power of the branch.
fn integrate_piece(rule: &GaussLegendre, branch: &Branch, a: f64, b: f64, powers: &[Power], sums: &mut [CompensatedSum]) {
    let split = powers.iter().any(|p| matches!(p, Power::Absolute(_)));
    if split && branch.eval(a) > 0.0 && branch.eval(b) < 0.0 {
        let z = branch.zero(a, b);
        if z > a && z < b {
            integrate_plain(rule, branch, a, z, powers, sums);
            integrate_plain(rule, branch, z, b, powers, sums);
            return;
        }
    }
    integrate_plain(rule, branch, a, b, powers, sums);
}

fn integrate_plain(rule: &GaussLegendre, branch: &Branch, a: f64, b: f64, powers: &[Power], sums: &mut [CompensatedSum]) {
    let mut acc = [0.0f64; 16];
    for (x, w) in rule.mapped(a, b) {
        let delta = branch.eval(x);
        for (slot, p) in acc.iter_mut().zip(powers) {
            *slot += w * p.apply(delta);
        }
    }
    for (s, v) in sums.iter_mut().zip(acc) {
        s.add(v);
    }
}

/// ∫_lo^hi of each power of Δ, streamed block by block.
pub fn integrate_powers(lo: f64, hi: f64, powers: &[Power]) -> Result<Vec<f64>> {
    integrate_powers_with_block(lo, hi, powers, MOMENT_BLOCK)
}

pub fn integrate_powers_with_block(lo: f64, hi: f64, powers: &[Power], block: u64) -> Result<Vec<f64>> {
    if !(lo >= 1.0 && hi.is_finite()) || hi < lo {
        return Err(LabError::argument(format!("integration range [{lo}, {hi}] must satisfy 1 <= lo <= hi")));
    }
    if powers.len() > 16 {
        return Err(LabError::argument("at most 16 powers per pass"));
    }
    if powers.iter().any(|p| matches!(p, Power::Absolute(a) if !(*a > 0.0))) {
        return Err(LabError::argument("absolute-moment exponent must be positive"));
    }
    if hi == lo {
        return Ok(vec![0.0; powers.len()]);
    }
    let first = lo.floor() as u64;
    let last = hi.ceil() as u64;
    let rule = GaussLegendre::order8();
    let stream = DeltaStream::new(first, last)?.with_block_size(block);
    let parts = stream.par_map_blocks(|start, values| {
        let mut sums = vec![CompensatedSum::new(); powers.len()];
        for (i, &d) in values.iter().enumerate() {
            let m = start + i as u64;
            let a = (m as f64).max(lo);
            let b = ((m + 1) as f64).min(hi);
            if b > a {
                integrate_piece(rule, &Branch::new(m, d), a, b, powers, &mut sums);
            }
        }
        sums
    })?;
    Ok((0..powers.len())
        .map(|j| {
            let column: Vec<CompensatedSum> = parts.iter().map(|p| p[j]).collect();
            ordered_reduce(&column).value()
        })
        .collect())
}

/// Main term of ∫_2^X Δᵏ: X/4, c₂X^{3/2}, 3C₁X^{7/4}/(28π³), 3C₂X²/(64π⁴)
/// and (35C₇−28C₄)/(2048π⁸)·(X³−8)/3; zero for k = 5, 6, 7.
pub fn main_term(k: u32, x: f64, constants: &SeriesConstants) -> Result<f64> {
    let c = match k {
        1..=4 | 8 => main_term_coefficient(k, constants)?,
        5..=7 => return Ok(0.0),
        _ => return Err(LabError::argument(format!("moment order k = {k} outside 1..=8"))),
    };
    Ok(match k {
        1 => c * x,
        8 => c * (x.powi(3) - 8.0) / 3.0,
        _ => c * x.powf(1.0 + k as f64 / 4.0),
    })
}

/// Main term over the window [X, X+H].
pub fn window_main_term(k: u32, x: f64, h: f64, constants: &SeriesConstants) -> Result<f64> {
    Ok(match k {
        8 => main_term_coefficient(8, constants)? / 3.0 * ((x + h).powi(3) - x.powi(3)),
        _ => main_term(k, x + h, constants)? - main_term(k, x, constants)?,
    })
}

fn check_order(k: u32) -> Result<()> {
    if (1..=8).contains(&k) {
        Ok(())
    } else {
        Err(LabError::argument(format!("moment order k = {k} outside 1..=8")))
    }
}

fn check_end(x: f64) -> Result<()> {
    if x >= MOMENT_START && x.is_finite() {
        Ok(())
    } else {
        Err(LabError::argument(format!("X must be finite and >= 2, got {x}")))
    }
}

/// ∫_2^X Δᵏ with its main term.
pub fn moment(k: u32, x: f64, constants: &SeriesConstants) -> Result<MomentResult> {
    Ok(moment_profile(&[k], &[x], constants)?.remove(0))
}

/// ∫_2^X Δᵏ for every k and every checkpoint X in one streaming pass.
/// Results are ordered by checkpoint, then by k.
pub fn moment_profile(ks: &[u32], checkpoints: &[f64], constants: &SeriesConstants) -> Result<Vec<MomentResult>> {
    for &k in ks {
        check_order(k)?;
    }
    let mut sorted: Vec<f64> = checkpoints.to_vec();
    for &x in &sorted {
        check_end(x)?;
    }
    sorted.sort_by(f64::total_cmp);
    let powers: Vec<Power> = ks.iter().map(|&k| Power::Signed(k)).collect();
    let mut running = vec![CompensatedSum::new(); ks.len()];
    let mut prev = MOMENT_START;
    let mut at = Vec::with_capacity(sorted.len());
    for &x in &sorted {
        let seg = integrate_powers(prev, x, &powers)?;
        for (r, v) in running.iter_mut().zip(seg) {
            r.add(v);
        }
        at.push((x, running.iter().map(|r| r.value()).collect::<Vec<f64>>()));
        prev = x;
    }
    let mut out = Vec::new();
    for &x in checkpoints {
        let (_, values) = at.iter().find(|(cx, _)| *cx == x).expect("checkpoint present");
        for (&k, &integral) in ks.iter().zip(values) {
            out.push(MomentResult::new(
                k as f64,
                MOMENT_START,
                x,
                integral,
                main_term(k, x, constants)?,
                constants.cutoff_for(k),
            ));
        }
    }
    Ok(out)
}

/// ∫_2^X |Δ|^A. Intervals are split at the zero of Δ so the quadrature
/// never straddles the kink of |Δ|. Even integer A is delegated to
/// [`moment`].
pub fn abs_moment(a: f64, x: f64, constants: &SeriesConstants) -> Result<MomentResult> {
    Ok(abs_moment_profile(&[a], &[x], constants)?.remove(0))
}

/// Absolute moments for several exponents and checkpoints, ordered by
/// checkpoint, then exponent.
pub fn abs_moment_profile(exps: &[f64], checkpoints: &[f64], constants: &SeriesConstants) -> Result<Vec<MomentResult>> {
    if let Some(a) = exps.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(LabError::argument(format!("absolute-moment exponent must be positive, got {a}")));
    }
    let mut out = Vec::new();
    for &x in checkpoints {
        check_end(x)?;
        for &a in exps {
            let even = a.fract() == 0.0 && a <= 8.0 && (a as u32) % 2 == 0;
            if even {
                let mut r = moment(a as u32, x, constants)?;
                r.main_term = 0.0;
                r.relative_deviation = None;
                r.constants_cutoff = 0;
                out.push(r);
            } else {
                let v = integrate_powers(MOMENT_START, x, &[Power::Absolute(a)])?[0];
                out.push(MomentResult::new(a, MOMENT_START, x, v, 0.0, 0));
            }
        }
    }
    Ok(out)
}

/// Short interval [X, X+H] with the admissibility flag
/// X^{7/32+δ} ≤ H ≤ X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowSpec {
    pub x: f64,
    pub h: f64,
    pub delta: f64,
}

impl WindowSpec {
    pub fn new(x: f64, h: f64, delta: f64) -> Result<Self> {
        if !(x >= MOMENT_START && h > 0.0 && x.is_finite() && h.is_finite()) {
            return Err(LabError::argument(format!("window needs X >= 2 and H > 0, got X = {x}, H = {h}")));
        }
        Ok(Self { x, h, delta })
    }

    pub fn lower_limit(&self) -> f64 {
        self.x.powf(7.0 / 32.0 + self.delta)
    }

    pub fn admissible(&self) -> bool {
        self.lower_limit() <= self.h && self.h <= self.x
    }
}

/// ∫_X^{X+H} Δᵏ with the short-interval main term; an inadmissible window
/// is still computed and carries a warning.
pub fn window_moment(spec: &WindowSpec, k: u32, constants: &SeriesConstants) -> Result<MomentResult> {
    check_order(k)?;
    let hi = spec.x + spec.h;
    let integral = integrate_powers(spec.x, hi, &[Power::Signed(k)])?[0];
    let main = if (5..=7).contains(&k) { 0.0 } else { window_main_term(k, spec.x, spec.h, constants)? };
    let mut r = MomentResult::new(k as f64, spec.x, hi, integral, main, constants.cutoff_for(k));
    if !spec.admissible() {
        r.warning = Some(format!(
            "window outside X^(7/32+{}) = {:.6e} <= H <= X (H = {:.6e}, X = {:.6e})",
            spec.delta,
            spec.lower_limit(),
            spec.h,
            spec.x
        ));
    }
    Ok(r)
}
