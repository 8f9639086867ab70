//! Special functions needed by the GTS exponent and its parameter derivatives.
//!
//! Gamma and digamma come from `statrs` (Lanczos with reflection below 1/2);
//! trigamma is not provided there and is implemented here by upward
//! recurrence into the asymptotic regime.

use std::f64::consts::PI;

use crate::error::{domain, Result};

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x), rejecting the poles at non-positive integers.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || is_pole(x) {
        return Err(domain(format!("gamma function pole or non-finite argument at {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || is_pole(x) {
        return Err(domain(format!("digamma pole or non-finite argument at {x}")));
    }
    Ok(statrs::function::gamma::digamma(x))
}

/// ψ'(x), the trigamma function.
pub fn trigamma(x: f64) -> Result<f64> {
    if !x.is_finite() || is_pole(x) {
        return Err(domain(format!("trigamma pole or non-finite argument at {x}")));
    }
    if x < 0.5 {
        // reflection: ψ'(1 - x) + ψ'(x) = π² / sin²(πx)
        let s = (PI * x).sin();
        return Ok(PI * PI / (s * s) - trigamma_positive(1.0 - x));
    }
    Ok(trigamma_positive(x))
}

fn trigamma_positive(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // ψ'(x) ~ 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0
            + inv * 0.5
            + inv2
                * (1.0 / 6.0
                    + inv2
                        * (-1.0 / 30.0
                            + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * (5.0 / 66.0))))));
    acc + series
}
