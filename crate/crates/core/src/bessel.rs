//! Order-one Bessel functions J₁, Y₁ and K₁.
//!
//! Below [`ASYMPTOTIC_THRESHOLD`] the ascending series are summed in
//! double-double arithmetic (the alternating and cancelling terms reach 1e8
//! in magnitude at the threshold). Above it the Hankel large-argument
//! expansions are used with at least eight terms, truncated at the smallest
//! term; at z > 20 this gives better than 13 significant digits.

use std::f64::consts::PI;

use crate::numeric::{euler_gamma_dd, DoubleDouble};

pub const ASYMPTOTIC_THRESHOLD: f64 = 20.0;

const MIN_TERMS: usize = 8;
const MAX_TERMS: usize = 40;

/// Series of J₁ and the ψ-weighted companion sum shared by Y₁ and K₁.
///
/// Returns `(Σ sₖ tₖ, Σ sₖ tₖ (ψ(k+1) + ψ(k+2)))` with
/// `tₖ = (z/2)^{2k+1} / (k! (k+1)!)` and `sₖ = (±1)^k`.
fn ascending_series(z: f64, alternating: bool) -> (DoubleDouble, DoubleDouble) {
    let half = DoubleDouble::from_f64(z).mul_f64(0.5);
    let step = if alternating { -(half * half) } else { half * half };
    let gamma = euler_gamma_dd();
    let mut term = half;
    // ψ(1) = −γ, ψ(2) = 1 − γ
    let mut psi_k1 = -gamma;
    let mut psi_k2 = DoubleDouble::ONE - gamma;
    let mut plain = DoubleDouble::ZERO;
    let mut weighted = DoubleDouble::ZERO;
    for k in 0..200u32 {
        plain = plain + term;
        weighted = weighted + term * (psi_k1 + psi_k2);
        let kf = k as f64;
        term = term * step / DoubleDouble::from_f64((kf + 1.0) * (kf + 2.0));
        psi_k1 = psi_k1 + DoubleDouble::ONE / DoubleDouble::from_f64(kf + 1.0);
        psi_k2 = psi_k2 + DoubleDouble::ONE / DoubleDouble::from_f64(kf + 2.0);
        if term.hi.abs() < 1e-34 * plain.hi.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    (plain, weighted)
}

/// Hankel coefficient a_k(1) = ∏_{i=1}^{k} (4 − (2i−1)²) / (k! 8^k).
fn hankel_terms() -> [f64; MAX_TERMS] {
    let mut a = [0.0; MAX_TERMS];
    a[0] = 1.0;
    for k in 1..MAX_TERMS {
        let odd = (2 * k - 1) as f64;
        a[k] = a[k - 1] * (4.0 - odd * odd) / (k as f64 * 8.0);
    }
    a
}

/// P(z), Q(z) of the Hankel expansion for order one.
fn hankel_pq(z: f64) -> (f64, f64) {
    let a = hankel_terms();
    let mut p = 0.0;
    let mut q = 0.0;
    let mut zpow = 1.0;
    let mut last = f64::INFINITY;
    for (k, &ak) in a.iter().enumerate() {
        let t = ak * zpow;
        if k >= MIN_TERMS && t.abs() >= last {
            break;
        }
        last = t.abs();
        match k % 4 {
            0 => p += t,
            1 => q += t,
            2 => p -= t,
            _ => q -= t,
        }
        zpow /= z;
    }
    (p, q)
}

pub fn j1(z: f64) -> f64 {
    if z < 0.0 {
        return -j1(-z);
    }
    if z <= ASYMPTOTIC_THRESHOLD {
        ascending_series(z, true).0.to_f64()
    } else {
        let (p, q) = hankel_pq(z);
        let chi = z - 0.75 * PI;
        (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Y₁(z) for z > 0.
pub fn y1(z: f64) -> f64 {
    assert!(z > 0.0, "Y1 is evaluated for positive arguments only");
    if z <= ASYMPTOTIC_THRESHOLD {
        y1_series(z)
    } else {
        let turns = DoubleDouble::from_f64(z) / crate::numeric::PI_DD.mul_f64(2.0);
        y1_asymptotic(z, turns)
    }
}

/// Y₁ for large z with the phase supplied as `z / 2π` in double-double,
/// so that arguments in the millions keep their fractional turn exactly.
pub fn y1_with_turns(z: f64, turns: DoubleDouble) -> f64 {
    if z <= ASYMPTOTIC_THRESHOLD {
        y1_series(z)
    } else {
        y1_asymptotic(z, turns)
    }
}

fn y1_series(z: f64) -> f64 {
    let (j, weighted) = ascending_series(z, true);
    let half = DoubleDouble::from_f64(z).mul_f64(0.5);
    let pi = crate::numeric::PI_DD;
    let two_over_pi = DoubleDouble::from_f64(2.0) / pi;
    let v = two_over_pi * half.ln() * j - two_over_pi / DoubleDouble::from_f64(z) - weighted / pi;
    v.to_f64()
}

fn y1_asymptotic(z: f64, turns: DoubleDouble) -> f64 {
    let (p, q) = hankel_pq(z);
    // χ = z − 3π/4, in turns: z/2π − 3/8
    let f = (turns + (-0.375)).fract();
    let angle = 2.0 * PI * f;
    (2.0 / (PI * z)).sqrt() * (p * angle.sin() + q * angle.cos())
}

/// K₁(z) for z > 0; underflows to zero past z ≈ 700.
pub fn k1(z: f64) -> f64 {
    assert!(z > 0.0, "K1 is evaluated for positive arguments only");
    if z <= ASYMPTOTIC_THRESHOLD {
        let (i, weighted) = ascending_series(z, false);
        let zd = DoubleDouble::from_f64(z);
        let half = zd.mul_f64(0.5);
        let v = DoubleDouble::ONE / zd + half.ln() * i - weighted.mul_f64(0.5);
        v.to_f64()
    } else {
        let a = hankel_terms();
        let mut s = 0.0;
        let mut zpow = 1.0;
        let mut last = f64::INFINITY;
        for (k, &ak) in a.iter().enumerate() {
            let t = ak * zpow;
            if k >= MIN_TERMS && t.abs() >= last {
                break;
            }
            last = t.abs();
            s += t;
            zpow /= z;
        }
        (PI / (2.0 * z)).sqrt() * (-z).exp() * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // reference values from a 30-digit evaluation
    const Y1_REF: [(f64, f64); 9] = [
        (0.5, -1.471472392670243),
        (1.0, -0.7812128213002887),
        (5.0, 0.14786314339122683),
        (10.0, 0.24901542420695388),
        (19.5, -0.1795645668963179),
        (20.5, -0.11187909834450974),
        (30.0, 0.08442557066174723),
        (100.0, -0.020372312002759792),
        (1000.25, -0.022841189398253216),
    ];

    #[test]
    fn y1_matches_reference() {
        for (z, want) in Y1_REF {
            let got = y1(z);
            assert!(rel(got, want) < 1e-11, "Y1({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn k1_matches_reference() {
        let cases = [
            (0.5, 1.656441120003301),
            (1.0, 0.6019072301972346),
            (5.0, 0.004044613445452165),
            (10.0, 1.8648773453825585e-05),
            (19.5, 9.82758775436381e-10),
            (20.5, 3.522934478711248e-10),
            (30.0, 2.1677320018915495e-14),
            (100.0, 4.6798537356369095e-45),
        ];
        for (z, want) in cases {
            let got = k1(z);
            assert!(rel(got, want) < 1e-11, "K1({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn j1_matches_reference() {
        let cases = [
            (1.0, 0.4400505857449335),
            (10.0, 0.04347274616886144),
            (20.5, 0.13625468819339573),
            (1000.25, 0.010711720806184072),
        ];
        for (z, want) in cases {
            assert!(rel(j1(z), want) < 1e-11, "J1({z})");
        }
    }

    #[test]
    fn k1_negligible_against_y1_amplitude() {
        let z = 101.0;
        let amp = (2.0 / (PI * z)).sqrt();
        assert!(k1(z) / amp < 1e-30);
    }

    #[test]
    fn explicit_turns_agree_with_plain_phase() {
        let z = 12345.678;
        let turns = DoubleDouble::from_f64(z) / crate::numeric::PI_DD.mul_f64(2.0);
        assert!((y1_with_turns(z, turns) - y1(z)).abs() < 1e-15);
    }
}
