//! Composite closed Newton-Cotes integration of order 12.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GtsError, Result};

/// Panel order; each panel has `ORDER + 1` equispaced nodes.
pub const ORDER: usize = 12;

/// Default subinterval count, 5000 panels of 12.
pub const DEFAULT_SUBINTERVALS: usize = 5000 * ORDER;

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Closed Newton-Cotes weights for nodes `0, 1, …, q` on a unit step, so
/// that `Σ w_j f(j) ≈ ∫₀^q f`. Each weight is the integral of the
/// Lagrange basis polynomial, evaluated in exact integer arithmetic and
/// rounded once.
pub fn newton_cotes_weights(q: usize) -> Result<[f64; ORDER + 1]> {
    if q != ORDER {
        return Err(GtsError::UnsupportedOrder(q));
    }
    // lcm(1..=13), clears the 1/(p+1) denominators of the antiderivative
    const LCM: i128 = 360_360;
    let qi = q as i128;
    let mut out = [0.0; ORDER + 1];
    for (j, w) in out.iter_mut().enumerate() {
        // coefficients of Π_{m≠j} (t − m), lowest degree first
        let mut poly: Vec<i128> = vec![1];
        let mut denom: i128 = 1;
        for m in 0..=q {
            if m == j {
                continue;
            }
            let mut next = vec![0i128; poly.len() + 1];
            for (p, &c) in poly.iter().enumerate() {
                next[p + 1] += c;
                next[p] -= c * m as i128;
            }
            poly = next;
            denom *= j as i128 - m as i128;
        }
        let mut num: i128 = 0;
        let mut qpow = qi;
        for (p, &c) in poly.iter().enumerate() {
            num += c * qpow * (LCM / (p as i128 + 1));
            qpow *= qi;
        }
        let mut den = denom * LCM;
        let g = gcd(num, den);
        num /= g;
        den /= g;
        *w = num as f64 / den as f64;
    }
    Ok(out)
}

/// Composite rule on `[a, b]` with `n` subintervals (a multiple of 12).
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    weights: [f64; ORDER + 1],
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(GtsError::InvalidRule(format!("need finite a < b, got [{a}, {b}]")));
        }
        if n == 0 || n % ORDER != 0 {
            return Err(GtsError::InvalidRule(format!(
                "n = {n} must be a positive multiple of {ORDER}"
            )));
        }
        Ok(CompositeRule {
            a,
            b,
            n,
            weights: newton_cotes_weights(ORDER)?,
        })
    }

    /// The pricing default: [0, 20] with 60000 subintervals.
    pub fn pricing_default() -> Self {
        Self::new(0.0, 20.0, DEFAULT_SUBINTERVALS).expect("static rule")
    }

    pub fn order(&self) -> usize {
        ORDER
    }

    pub fn weights(&self) -> &[f64; ORDER + 1] {
        &self.weights
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn panels(&self) -> usize {
        self.n / ORDER
    }

    pub fn with_interval(&self, a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, self.n)
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    /// Per-panel node offsets and step-scaled weights; panel `p` starts at
    /// `a + p·12·h`.
    pub fn panel_weights(&self) -> [f64; ORDER + 1] {
        let h = self.step();
        self.weights.map(|w| w * h)
    }

    /// ∫_a^b f. Panels are summed in parallel and combined in panel order
    /// with compensated summation, so the result does not depend on the
    /// thread count.
    pub fn integrate<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        let h = self.step();
        let partial: Vec<Result<Complex64>> = (0..self.panels())
            .into_par_iter()
            .map(|p| {
                let mut acc = Kahan::default();
                for (j, w) in self.weights.iter().enumerate() {
                    let x = self.node(p * ORDER + j);
                    let v = f(x);
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(GtsError::NonFiniteIntegrand { node: x });
                    }
                    acc.add(v * *w);
                }
                Ok(acc.total())
            })
            .collect();
        let mut acc = Kahan::default();
        for p in partial {
            acc.add(p?);
        }
        Ok(acc.total() * h)
    }

    /// Real-valued convenience wrapper.
    pub fn integrate_real<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        Ok(self.integrate(|x| Complex64::new(f(x), 0.0))?.re)
    }
}

#[derive(Default)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    fn add(&mut self, v: Complex64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(&self) -> Complex64 {
        self.sum
    }
}
