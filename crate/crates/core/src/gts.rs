//! The Generalized Tempered Stable law and its Lévy process.
//!
//! A GTS variable is `Y = μ + X₊ − X₋` where `X±` are one-sided tempered
//! stable variables. The Lévy density is
//!
//! ```text
//! ν(x) = α₊ e^{−λ₊ x} / x^{1+β₊}      x > 0
//!        α₋ e^{−λ₋|x|} / |x|^{1+β₋}   x < 0
//! ```
//!
//! and the characteristic exponent (principal branch powers) is
//!
//! ```text
//! Ψ(ξ) = iμξ + α₊Γ(−β₊)((λ₊ − iξ)^{β₊} − λ₊^{β₊}) + α₋Γ(−β₋)((λ₋ + iξ)^{β₋} − λ₋^{β₋})
//! ```
//!
//! so that `E[e^{iξY_t}] = e^{tΨ(ξ)}`. Everything in this module is a pure
//! function of immutable parameter values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, GtsError, Result};
use crate::special::gamma;

/// Bookkeeping tag for the units the parameters are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Returns in percent, time in trading days (the fitting convention).
    #[default]
    PercentDaily,
    /// Returns as decimal log returns, time in years (the pricing convention).
    DecimalAnnual,
    /// Any other amplitude/time scaling.
    Rescaled,
}

/// The seven GTS parameters `(μ, β₊, β₋, α₊, α₋, λ₊, λ₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtsParams {
    pub mu: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    #[serde(default)]
    pub unit: Unit,
}

/// Finite or infinite activity of the jump part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activity {
    FiniteActivity,
    InfiniteActivity,
}

/// Total mass of the Lévy measure together with its activity class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyMass {
    pub mass: f64,
    pub activity: Activity,
}

/// First four cumulants of `Y₁`, `kappa[0]` being κ₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub kappa: [f64; 4],
}

impl CumulantSet {
    pub fn mean(&self) -> f64 {
        self.kappa[0]
    }

    pub fn variance(&self) -> f64 {
        self.kappa[1]
    }

    pub fn skewness(&self) -> f64 {
        self.kappa[2] / self.kappa[1].powf(1.5)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.kappa[3] / (self.kappa[1] * self.kappa[1])
    }
}

impl GtsParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mu: f64,
        beta_plus: f64,
        beta_minus: f64,
        alpha_plus: f64,
        alpha_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
        unit: Unit,
    ) -> Result<Self> {
        let p = GtsParams {
            mu,
            beta_plus,
            beta_minus,
            alpha_plus,
            alpha_minus,
            lambda_plus,
            lambda_minus,
            unit,
        };
        p.validate()?;
        Ok(p)
    }

    /// Maximum-likelihood fit to daily S&P 500 returns (percent units),
    /// January 2010 to June 2023.
    pub const fn sp500() -> Self {
        GtsParams {
            mu: -0.693477,
            beta_plus: 0.682290,
            beta_minus: 0.242579,
            alpha_plus: 0.458582,
            alpha_minus: 0.414443,
            lambda_plus: 0.822222,
            lambda_minus: 0.727607,
            unit: Unit::PercentDaily,
        }
    }

    /// Parameters in the fixed order used by calibration vectors.
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.mu,
            self.beta_plus,
            self.beta_minus,
            self.alpha_plus,
            self.alpha_minus,
            self.lambda_plus,
            self.lambda_minus,
        ]
    }

    pub fn from_array(v: [f64; 7], unit: Unit) -> Self {
        GtsParams {
            mu: v[0],
            beta_plus: v[1],
            beta_minus: v[2],
            alpha_plus: v[3],
            alpha_minus: v[4],
            lambda_plus: v[5],
            lambda_minus: v[6],
            unit,
        }
    }

    /// Structural invariants: finite values, nonnegative intensities and
    /// decay rates, stability indexes below 2.
    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) {
            return Err(domain("GTS parameters must be finite"));
        }
        if self.alpha_plus < 0.0 || self.alpha_minus < 0.0 {
            return Err(domain("alpha_plus and alpha_minus must be >= 0"));
        }
        if self.lambda_plus < 0.0 || self.lambda_minus < 0.0 {
            return Err(domain("lambda_plus and lambda_minus must be >= 0"));
        }
        if self.beta_plus >= 2.0 || self.beta_minus >= 2.0 {
            return Err(domain("stability indexes must be < 2"));
        }
        Ok(())
    }

    /// Stricter checks for anything that evaluates Ψ: β± in (0, 1) whenever
    /// the corresponding intensity is positive, and strictly positive decay.
    pub fn validate_for_pricing(&self) -> Result<()> {
        self.validate()?;
        for (name, alpha, beta, lambda) in [
            ("plus", self.alpha_plus, self.beta_plus, self.lambda_plus),
            ("minus", self.alpha_minus, self.beta_minus, self.lambda_minus),
        ] {
            if alpha == 0.0 {
                continue;
            }
            if !(0.0..=1.0).contains(&beta) {
                return Err(domain(format!("beta_{name} = {beta} outside [0, 1]")));
            }
            if beta == 0.0 || beta == 1.0 {
                return Err(domain(format!(
                    "beta_{name} = {beta} hits a pole of Gamma(-beta)"
                )));
            }
            if lambda <= 0.0 {
                return Err(domain(format!("lambda_{name} must be > 0")));
            }
        }
        Ok(())
    }

    /// Lévy density ν(x) for x ≠ 0.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(domain("Levy density is singular at the origin"));
        }
        let (alpha, beta, lambda) = if x > 0.0 {
            (self.alpha_plus, self.beta_plus, self.lambda_plus)
        } else {
            (self.alpha_minus, self.beta_minus, self.lambda_minus)
        };
        if alpha == 0.0 {
            return Ok(0.0);
        }
        let ax = x.abs();
        Ok(alpha * (-lambda * ax).exp() / ax.powf(1.0 + beta))
    }

    /// Total Lévy mass. A side with zero intensity carries no mass.
    pub fn total_levy_mass(&self) -> Result<LevyMass> {
        let side = |alpha: f64, beta: f64, lambda: f64| -> Result<f64> {
            if alpha == 0.0 {
                Ok(0.0)
            } else if beta >= 0.0 {
                Ok(f64::INFINITY)
            } else {
                Ok(alpha * lambda.powf(beta) * gamma(-beta)?)
            }
        };
        let mass = side(self.alpha_plus, self.beta_plus, self.lambda_plus)?
            + side(self.alpha_minus, self.beta_minus, self.lambda_minus)?;
        let activity = if mass.is_finite() {
            Activity::FiniteActivity
        } else {
            Activity::InfiniteActivity
        };
        Ok(LevyMass { mass, activity })
    }

    /// Ψ(ξ) for complex ξ on the principal branch.
    pub fn characteristic_exponent(&self, xi: Complex64) -> Result<Complex64> {
        let ex = Exponent::new(self)?;
        let plus = Complex64::new(self.lambda_plus, 0.0) - Complex64::i() * xi;
        let minus = Complex64::new(self.lambda_minus, 0.0) + Complex64::i() * xi;
        for (name, z, alpha) in [
            ("lambda_plus - i xi", plus, self.alpha_plus),
            ("lambda_minus + i xi", minus, self.alpha_minus),
        ] {
            if alpha != 0.0 && z.im == 0.0 && z.re <= 0.0 {
                return Err(domain(format!("{name} = {z} lies on the branch cut")));
            }
        }
        Ok(ex.eval(xi))
    }

    /// log M(h, 1) = Ψ(−ih), real for −λ₋ < h < λ₊.
    pub fn log_mgf(&self, h: f64) -> Result<f64> {
        if !(h > -self.lambda_minus && h < self.lambda_plus) {
            return Err(domain(format!(
                "MGF argument {h} outside ({}, {})",
                -self.lambda_minus, self.lambda_plus
            )));
        }
        Ok(Exponent::new(self)?.log_mgf(h))
    }

    /// M(h, t) = e^{tΨ(−ih)}.
    pub fn mgf(&self, h: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("time must be positive"));
        }
        Ok((t * self.log_mgf(h)?).exp())
    }

    /// Ψ_h(z) = Ψ(−i(h + z)) − Ψ(−ih), the exponent of the MGF of `Y₁` under
    /// the Esscher measure with parameter h.
    pub fn esscher_exponent(&self, h: f64, z: f64) -> Result<f64> {
        Ok(self.log_mgf(h + z)? - self.log_mgf(h)?)
    }

    /// The Esscher transform keeps the GTS family and moves the decay rates:
    /// λ₊ → λ₊ − h, λ₋ → λ₋ + h.
    pub fn esscher_shift(&self, h: f64) -> Result<GtsParams> {
        if !(h > -self.lambda_minus && h < self.lambda_plus) {
            return Err(domain(format!(
                "Esscher parameter {h} outside ({}, {})",
                -self.lambda_minus, self.lambda_plus
            )));
        }
        Ok(GtsParams {
            lambda_plus: self.lambda_plus - h,
            lambda_minus: self.lambda_minus + h,
            ..*self
        })
    }

    /// n-th cumulant of `Y₁`, n in 1..=4.
    pub fn cumulant(&self, n: u32) -> Result<f64> {
        if !(1..=4).contains(&n) {
            return Err(domain(format!("cumulant order {n} not in 1..=4")));
        }
        let nf = f64::from(n);
        let side = |alpha: f64, beta: f64, lambda: f64| -> Result<f64> {
            if alpha == 0.0 {
                return Ok(0.0);
            }
            if beta >= nf {
                return Err(domain(format!("cumulant {n} requires beta < {n}")));
            }
            if lambda <= 0.0 {
                return Err(domain("cumulants require lambda > 0"));
            }
            Ok(alpha * gamma(nf - beta)? * lambda.powf(beta - nf))
        };
        let plus = side(self.alpha_plus, self.beta_plus, self.lambda_plus)?;
        let minus = side(self.alpha_minus, self.beta_minus, self.lambda_minus)?;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let drift = if n == 1 { self.mu } else { 0.0 };
        Ok(drift + plus + sign * minus)
    }

    pub fn cumulants(&self) -> Result<CumulantSet> {
        Ok(CumulantSet {
            kappa: [
                self.cumulant(1)?,
                self.cumulant(2)?,
                self.cumulant(3)?,
                self.cumulant(4)?,
            ],
        })
    }

    /// Amplitude scaling `Y → cY` followed by time scaling `t → s t`.
    pub fn rescale(&self, amplitude_c: f64, time_factor_s: f64) -> GtsParams {
        let c = amplitude_c;
        let s = time_factor_s;
        if c == 1.0 && s == 1.0 {
            return *self;
        }
        let unit = if self.unit == Unit::PercentDaily && c == 0.01 {
            Unit::DecimalAnnual
        } else {
            Unit::Rescaled
        };
        GtsParams {
            mu: s * c * self.mu,
            beta_plus: self.beta_plus,
            beta_minus: self.beta_minus,
            alpha_plus: s * self.alpha_plus * c.powf(self.beta_plus),
            alpha_minus: s * self.alpha_minus * c.powf(self.beta_minus),
            lambda_plus: self.lambda_plus / c,
            lambda_minus: self.lambda_minus / c,
            unit,
        }
    }

    /// Percent-per-day parameters to decimal-per-year parameters.
    pub fn to_decimal_annual(&self, days_per_year: f64) -> Result<GtsParams> {
        match self.unit {
            Unit::DecimalAnnual => Ok(*self),
            Unit::PercentDaily => Ok(self.rescale(0.01, days_per_year)),
            Unit::Rescaled => Err(domain(
                "cannot convert parameters with an unknown unit to decimal-annual",
            )),
        }
    }

    /// Annualized volatility √(D κ₂) expressed as a decimal.
    pub fn annualized_volatility(&self, days_per_year: f64) -> Result<f64> {
        let k2 = self.cumulant(2)?;
        match self.unit {
            Unit::PercentDaily => Ok((days_per_year * k2).sqrt() / 100.0),
            Unit::DecimalAnnual => Ok(k2.sqrt()),
            Unit::Rescaled => Err(domain("annualized volatility needs a known unit")),
        }
    }
}

/// Precomputed evaluator for Ψ used in hot loops (transform grids,
/// quadrature). Construction validates; evaluation is infallible.
#[derive(Debug, Clone, Copy)]
pub struct Exponent {
    mu: f64,
    beta_plus: f64,
    beta_minus: f64,
    coef_plus: f64,
    coef_minus: f64,
    lambda_plus: f64,
    lambda_minus: f64,
    base_plus: f64,
    base_minus: f64,
}

impl Exponent {
    pub fn new(params: &GtsParams) -> Result<Self> {
        params.validate()?;
        let side = |alpha: f64, beta: f64, lambda: f64, name: &str| -> Result<(f64, f64)> {
            if alpha == 0.0 {
                return Ok((0.0, 0.0));
            }
            if beta >= 0.0 && beta == beta.floor() {
                return Err(domain(format!(
                    "beta_{name} = {beta} is a non-negative integer (Gamma(-beta) pole)"
                )));
            }
            Ok((alpha * gamma(-beta)?, lambda.powf(beta)))
        };
        let (coef_plus, base_plus) =
            side(params.alpha_plus, params.beta_plus, params.lambda_plus, "plus")?;
        let (coef_minus, base_minus) =
            side(params.alpha_minus, params.beta_minus, params.lambda_minus, "minus")?;
        Ok(Exponent {
            mu: params.mu,
            beta_plus: params.beta_plus,
            beta_minus: params.beta_minus,
            coef_plus,
            coef_minus,
            lambda_plus: params.lambda_plus,
            lambda_minus: params.lambda_minus,
            base_plus,
            base_minus,
        })
    }

    #[inline]
    pub fn eval(&self, xi: Complex64) -> Complex64 {
        let i = Complex64::i();
        let mut out = i * self.mu * xi;
        if self.coef_plus != 0.0 {
            let z = Complex64::new(self.lambda_plus, 0.0) - i * xi;
            out += self.coef_plus * (z.powf(self.beta_plus) - self.base_plus);
        }
        if self.coef_minus != 0.0 {
            let z = Complex64::new(self.lambda_minus, 0.0) + i * xi;
            out += self.coef_minus * (z.powf(self.beta_minus) - self.base_minus);
        }
        out
    }

    /// Ψ(−ih) without the domain check.
    #[inline]
    pub fn log_mgf(&self, h: f64) -> f64 {
        let mut out = self.mu * h;
        if self.coef_plus != 0.0 {
            out += self.coef_plus * ((self.lambda_plus - h).powf(self.beta_plus) - self.base_plus);
        }
        if self.coef_minus != 0.0 {
            out +=
                self.coef_minus * ((self.lambda_minus + h).powf(self.beta_minus) - self.base_minus);
        }
        out
    }
}

/// Risk-neutral measure obtained by the Esscher transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsscherSolution {
    pub h_star: f64,
    pub risk_free_rate: f64,
    /// Parameters under the Esscher measure h*.
    pub shifted: GtsParams,
}

impl EsscherSolution {
    /// Parameters under the h* + 1 measure (the share measure).
    pub fn share_measure(&self) -> Result<GtsParams> {
        if self.shifted.lambda_plus <= 1.0 {
            return Err(GtsError::InvalidMeasure {
                lambda_plus: self.shifted.lambda_plus,
            });
        }
        self.shifted.esscher_shift(1.0)
    }
}

/// Admissible interval for h* and the range of Ψ_h(1) over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsscherBracket {
    pub h_low: f64,
    pub h_high: f64,
    pub rate_low: f64,
    pub rate_high: f64,
}

pub fn esscher_bracket(params: &GtsParams) -> Result<EsscherBracket> {
    params.validate_for_pricing()?;
    let eps = 1e-8 * (params.lambda_plus + params.lambda_minus);
    let h_low = -params.lambda_minus + eps;
    let h_high = params.lambda_plus - 1.0 - eps;
    if h_high <= h_low {
        return Err(GtsError::InvalidMeasure {
            lambda_plus: params.lambda_plus + params.lambda_minus,
        });
    }
    let ex = Exponent::new(params)?;
    let f = |h: f64| ex.log_mgf(h + 1.0) - ex.log_mgf(h);
    Ok(EsscherBracket {
        h_low,
        h_high,
        rate_low: f(h_low),
        rate_high: f(h_high),
    })
}

/// Solve Ψ_h(1) = r for the Esscher parameter h*.
///
/// Ψ_h(1) is strictly increasing in h, so a sign-changing bracket over the
/// admissible interval always exists when r is in range. Illinois-modified
/// regula falsi with a bisection fallback.
pub fn solve_esscher(params: &GtsParams, rate: f64) -> Result<EsscherSolution> {
    let bracket = esscher_bracket(params)?;
    if !(rate >= bracket.rate_low && rate <= bracket.rate_high) {
        return Err(GtsError::NoSolution {
            rate,
            low: bracket.rate_low,
            high: bracket.rate_high,
        });
    }
    let ex = Exponent::new(params)?;
    let f = |h: f64| ex.log_mgf(h + 1.0) - ex.log_mgf(h) - rate;

    let (mut a, mut b) = (bracket.h_low, bracket.h_high);
    let (mut fa, mut fb) = (bracket.rate_low - rate, bracket.rate_high - rate);
    let mut h = if fa.abs() < fb.abs() { a } else { b };
    let mut fh = if fa.abs() < fb.abs() { fa } else { fb };
    let mut side = 0i8;
    for iter in 0..400 {
        if fh.abs() < 1e-13 || (b - a) <= 4.0 * f64::EPSILON * h.abs().max(1.0) {
            break;
        }
        let mut m = (a * fb - b * fa) / (fb - fa);
        if !(m > a && m < b) || iter % 4 == 3 {
            m = 0.5 * (a + b);
        }
        let fm = f(m);
        if fm < 0.0 {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        h = m;
        fh = fm;
    }
    let shifted = params.esscher_shift(h)?;
    if shifted.lambda_plus <= 1.0 {
        return Err(GtsError::InvalidMeasure {
            lambda_plus: shifted.lambda_plus,
        });
    }
    Ok(EsscherSolution {
        h_star: h,
        risk_free_rate: rate,
        shifted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn symmetric() -> GtsParams {
        GtsParams::new(0.0, 0.4, 0.4, 0.7, 0.7, 1.3, 1.3, Unit::PercentDaily).unwrap()
    }

    #[test]
    fn levy_density_examples() {
        let p = GtsParams::sp500();
        let v = p.levy_density(1.0).unwrap();
        // α₊ e^{−λ₊}
        assert_relative_eq!(v, 0.201_525_740_926_740_1, max_relative = 1e-12);
        let s = symmetric();
        for x in [0.01, 0.3, 2.0, 7.5] {
            assert_eq!(s.levy_density(x).unwrap(), s.levy_density(-x).unwrap());
        }
        let zero = GtsParams {
            alpha_plus: 0.0,
            ..p
        };
        assert_eq!(zero.levy_density(0.5).unwrap(), 0.0);
        assert!(p.levy_density(0.0).is_err());
    }

    #[test]
    fn levy_mass_classification() {
        let m = GtsParams::sp500().total_levy_mass().unwrap();
        assert!(m.mass.is_infinite());
        assert_eq!(m.activity, Activity::InfiniteActivity);

        let fin = GtsParams {
            mu: 0.0,
            beta_plus: -0.5,
            beta_minus: -0.5,
            alpha_plus: 1.0,
            alpha_minus: 1.0,
            lambda_plus: 1.0,
            lambda_minus: 1.0,
            unit: Unit::PercentDaily,
        };
        let m = fin.total_levy_mass().unwrap();
        assert_relative_eq!(m.mass, 2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        assert_eq!(m.activity, Activity::FiniteActivity);

        let empty = GtsParams {
            alpha_plus: 0.0,
            alpha_minus: 0.0,
            ..fin
        };
        let m = empty.total_levy_mass().unwrap();
        assert_eq!(m.mass, 0.0);
        assert_eq!(m.activity, Activity::FiniteActivity);
    }

    #[test]
    fn exponent_basic_properties() {
        let p = GtsParams::sp500();
        assert_eq!(p.characteristic_exponent(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let s = symmetric();
        for xi in [0.1, 1.0, 3.0, 25.0] {
            let v = s.characteristic_exponent(Complex64::new(xi, 0.0)).unwrap();
            assert!(v.im.abs() < 1e-14 * v.re.abs().max(1.0));
        }
        for xi in [0.2, 1.7, 40.0] {
            let a = p.characteristic_exponent(Complex64::new(xi, 0.0)).unwrap();
            let b = p.characteristic_exponent(Complex64::new(-xi, 0.0)).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-13);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-13);
            assert!(a.re <= 0.0);
        }
    }

    #[test]
    fn exponent_rejects_poles_and_branch_cut() {
        let p = GtsParams {
            beta_plus: 1.0,
            ..GtsParams::sp500()
        };
        assert!(p.characteristic_exponent(Complex64::new(1.0, 0.0)).is_err());
        let q = GtsParams::sp500();
        // ξ = −2iλ₊ puts λ₊ − iξ = −λ₊ on the cut
        let xi = Complex64::new(0.0, -2.0 * q.lambda_plus);
        assert!(q.characteristic_exponent(xi).is_err());
    }

    #[test]
    fn mgf_examples() {
        let p = GtsParams::sp500();
        assert_eq!(p.mgf(0.0, 3.0).unwrap(), 1.0);
        let m1 = p.mgf(0.1, 1.0).unwrap();
        let m2 = p.mgf(0.1, 2.0).unwrap();
        assert_relative_eq!(m2, m1 * m1, max_relative = 1e-14);
        assert!(p.mgf(0.9, 1.0).is_err());
        assert!(p.mgf(-0.8, 1.0).is_err());
    }

    #[test]
    fn esscher_exponent_reductions() {
        let p = GtsParams::sp500();
        assert_eq!(p.esscher_exponent(0.2, 0.0).unwrap(), 0.0);
        let a = p.esscher_exponent(0.0, 0.3).unwrap();
        assert_relative_eq!(a, p.mgf(0.3, 1.0).unwrap().ln(), max_relative = 1e-13);
        // explicit form with shifted decay rates
        let h = 0.15;
        let z = 0.4;
        let g = p.esscher_shift(h).unwrap();
        let explicit = p.mu * z
            + p.alpha_plus
                * gamma(-p.beta_plus).unwrap()
                * ((g.lambda_plus - z).powf(p.beta_plus) - g.lambda_plus.powf(p.beta_plus))
            + p.alpha_minus
                * gamma(-p.beta_minus).unwrap()
                * ((g.lambda_minus + z).powf(p.beta_minus) - g.lambda_minus.powf(p.beta_minus));
        assert_relative_eq!(p.esscher_exponent(h, z).unwrap(), explicit, max_relative = 1e-12);
    }

    #[test]
    fn esscher_shift_examples() {
        let p = GtsParams::sp500();
        assert_eq!(p.esscher_shift(0.0).unwrap(), p);
        let s = p.esscher_shift(0.1).unwrap();
        assert_relative_eq!(s.lambda_plus, 0.722222, max_relative = 1e-12);
        assert_relative_eq!(s.lambda_minus, 0.827607, max_relative = 1e-12);
        let back = s.esscher_shift(-0.1).unwrap();
        assert_relative_eq!(back.lambda_plus, p.lambda_plus, max_relative = 1e-14);
        assert_relative_eq!(back.lambda_minus, p.lambda_minus, max_relative = 1e-14);
        for z in [-0.5, -0.2, 0.0, 0.3, 0.6] {
            let lhs = s.mgf(z, 1.0).unwrap();
            let rhs = p.mgf(0.1 + z, 1.0).unwrap() / p.mgf(0.1, 1.0).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
        assert!(p.esscher_shift(0.9).is_err());
    }

    #[test]
    fn thin_tails_have_no_valid_measure() {
        // λ₊ + λ₋ ≤ 1 leaves no h with λ₊ − h > 1 and λ₋ + h > 0
        let p = GtsParams::new(0.0, 0.5, 0.5, 0.4, 0.4, 0.3, 0.5, Unit::PercentDaily).unwrap();
        let err = solve_esscher(&p, 0.06).unwrap_err();
        assert!(matches!(err, GtsError::InvalidMeasure { .. }));
        // raw daily S&P params do admit a measure, with λ̃₊ above 1
        let sol = solve_esscher(&GtsParams::sp500(), 0.06).unwrap();
        assert!(sol.shifted.lambda_plus > 1.0);
    }

    #[test]
    fn solve_esscher_round_trip() {
        let p = GtsParams::sp500().to_decimal_annual(360.0).unwrap();
        for h0 in [-60.0, -10.0, -2.0, 0.0, 5.0, 40.0] {
            let r = p.esscher_exponent(h0, 1.0).unwrap();
            let sol = solve_esscher(&p, r).unwrap();
            assert!((sol.h_star - h0).abs() < 1e-9, "h0 = {h0}, got {}", sol.h_star);
            let back = p.esscher_exponent(sol.h_star, 1.0).unwrap();
            assert!((back - r).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_esscher_out_of_range() {
        let p = GtsParams::sp500().to_decimal_annual(360.0).unwrap();
        let b = esscher_bracket(&p).unwrap();
        let err = solve_esscher(&p, b.rate_high + 1.0).unwrap_err();
        assert!(matches!(err, GtsError::NoSolution { .. }));
    }

    #[test]
    fn symmetric_drift_gives_zero_h() {
        let mut p = GtsParams::new(0.0, 0.5, 0.5, 30.0, 30.0, 60.0, 60.0, Unit::DecimalAnnual).unwrap();
        let r = 0.05;
        let g_p = gamma(-p.beta_plus).unwrap();
        let g_m = gamma(-p.beta_minus).unwrap();
        p.mu = r
            - p.alpha_plus * g_p * ((p.lambda_plus - 1.0).powf(p.beta_plus) - p.lambda_plus.powf(p.beta_plus))
            - p.alpha_minus
                * g_m
                * ((p.lambda_minus + 1.0).powf(p.beta_minus) - p.lambda_minus.powf(p.beta_minus));
        let sol = solve_esscher(&p, r).unwrap();
        assert!(sol.h_star.abs() < 1e-9);
    }

    #[test]
    fn cumulants_match_finite_differences() {
        let p = GtsParams::sp500();
        let ex = Exponent::new(&p).unwrap();
        let h = 1e-2;
        let f = |x: f64| ex.log_mgf(x);
        // five-point stencils
        let d1 = (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
        let d2 = (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h))
            / (12.0 * h * h);
        let d3 = (-f(-2.0 * h) + 2.0 * f(-h) - 2.0 * f(h) + f(2.0 * h)) / (2.0 * h.powi(3));
        let d4 = (f(-2.0 * h) - 4.0 * f(-h) + 6.0 * f(0.0) - 4.0 * f(h) + f(2.0 * h)) / h.powi(4);
        assert_relative_eq!(p.cumulant(1).unwrap(), d1, max_relative = 1e-6);
        assert_relative_eq!(p.cumulant(2).unwrap(), d2, max_relative = 1e-5);
        assert_relative_eq!(p.cumulant(3).unwrap(), d3, max_relative = 1e-3);
        assert_relative_eq!(p.cumulant(4).unwrap(), d4, max_relative = 1e-3);
        // the stated check: plain central difference with step 1e-4
        let h = 1e-4;
        let c2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert_relative_eq!(p.cumulant(2).unwrap(), c2, max_relative = 1e-5);
    }

    #[test]
    fn cumulant_edge_cases() {
        let s = symmetric();
        assert!(s.cumulant(1).unwrap().abs() < 1e-15);
        assert!(s.cumulant(3).unwrap().abs() < 1e-15);
        let drift = GtsParams {
            alpha_plus: 0.0,
            alpha_minus: 0.0,
            ..GtsParams::sp500()
        };
        assert_eq!(drift.cumulant(1).unwrap(), drift.mu);
        assert_eq!(drift.cumulant(2).unwrap(), 0.0);
        assert!(GtsParams::sp500().cumulant(5).is_err());
    }

    #[test]
    fn rescale_examples() {
        let p = GtsParams::sp500();
        assert_eq!(p.rescale(1.0, 1.0), p);
        let r = p.rescale(0.01, 365.0);
        assert_eq!(r.unit, Unit::DecimalAnnual);
        assert_relative_eq!(r.lambda_plus, 82.2222, max_relative = 1e-12);
        assert_relative_eq!(r.lambda_minus, 72.7607, max_relative = 1e-12);
        assert_relative_eq!(r.alpha_plus, 365.0 * 0.458582 * 0.01f64.powf(0.682290), max_relative = 1e-14);
        // α₊ independently: 365 · 0.458582 · e^{0.68229 ln 0.01}
        assert_relative_eq!(r.alpha_plus, 7.229_859_681_481_174, max_relative = 1e-12);

        let (c, s) = (0.03, 17.0);
        let q = p.rescale(c, s);
        for xi in [-4.0, -0.5, 0.0, 0.7, 3.0, 12.0] {
            let lhs = q.characteristic_exponent(Complex64::new(xi, 0.0)).unwrap();
            let rhs = s * p.characteristic_exponent(Complex64::new(c * xi, 0.0)).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn annualized_volatility_from_cumulants() {
        let p = GtsParams::sp500();
        let v = p.annualized_volatility(360.0).unwrap();
        assert!((v - 0.2077).abs() < 5e-5, "{v}");
        let d = p.to_decimal_annual(360.0).unwrap();
        assert_relative_eq!(d.annualized_volatility(360.0).unwrap(), v, max_relative = 1e-12);
    }
}
