//! Floating-point building blocks shared by the compute modules.

mod dd;
mod quad;
mod sum;
mod zeta;

pub use dd::{DoubleDouble, LN_2, PI as PI_DD};
pub use quad::GaussLegendre;
pub use sum::{compensated_sum, ordered_reduce, CompensatedSum};
pub use zeta::zeta;

/// Euler–Mascheroni constant, 30 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;
/// Residual of [`EULER_GAMMA`] after rounding to a double.
pub const EULER_GAMMA_LO: f64 = -4.942_915_152_430_645e-18;

pub fn euler_gamma_dd() -> DoubleDouble {
    DoubleDouble::new(EULER_GAMMA, EULER_GAMMA_LO)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1e3, 1e4, 1e5];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.75)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.75).abs() < 1e-12);
    }
}
