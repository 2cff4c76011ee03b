//! Log-gamma, digamma, trigamma and the log-moments of chi-square variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Arguments below this are shifted upward by recurrence before the asymptotic series.
const ASYMPTOTIC_CUTOFF: f64 = 10.0;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} requires a positive finite argument, got {x}")))
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x
        return Ok(log_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}

/// `ψ(x) = d/dx ln Γ(x)`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_CUTOFF {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    Ok(shift + x.ln() - 0.5 * inv - series)
}

/// `ψ′(x)`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_CUTOFF {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail: B2/x³ + B4/x⁵ + … with B2 = 1/6, B4 = −1/30, …
    let tail = inv2
        * inv
        * (1.0 / 6.0
            - inv2
                * (1.0 / 30.0
                    - inv2
                        * (1.0 / 42.0
                            - inv2
                                * (1.0 / 30.0
                                    - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    Ok(shift + inv + 0.5 * inv2 + tail)
}

/// Mean and variance of `log X` for `X ~ χ²_ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareLogMoments {
    pub dof: f64,
    pub mean_log: f64,
    pub var_log: f64,
}

/// `E[log χ²_ν] = log 2 + ψ(ν/2)` and `Var[log χ²_ν] = ψ′(ν/2)`.
pub fn chisq_log_moments(dof: f64) -> Result<ChiSquareLogMoments> {
    check_positive("chisq_log_moments", dof)?;
    Ok(ChiSquareLogMoments {
        dof,
        mean_log: std::f64::consts::LN_2 + digamma(0.5 * dof)?,
        var_log: trigamma(0.5 * dof)?,
    })
}
