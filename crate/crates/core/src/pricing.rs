//! European call pricing: Black-Scholes, the extended formula built from
//! two Esscher-measure CDFs, and the generalized contour-integral formula.
//! Also the payoff-reconstruction experiment used to choose the contour
//! shift `q`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, GtsError, Result};
use crate::gts::{EsscherSolution, Exponent, GtsParams};
use crate::quadrature::{CompositeRule, ORDER};
use crate::transform::{cdf_grid, FrftConfig, TransformGrid};

/// Spot level of the S&P 500 pricing example.
pub const TABLE_SPOT: f64 = 4437.86;
pub const DEFAULT_RATE: f64 = 0.06;
/// σ* as printed; see [`BsParams::from_params`] for the cumulant-derived value.
pub const PRINTED_SIGMA_STAR: f64 = 0.2077;
pub const TABLE_MATURITIES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_Q: f64 = -3.0;

/// Moneyness rows k = S/K from 1.65 down to 0.55 in steps of 0.05.
pub fn table_moneyness() -> Vec<f64> {
    (0..23).map(|i| (165 - 5 * i) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    BlackScholes,
    GtsExtended,
    GtsGeneralized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingRequest {
    pub spot: f64,
    pub strike: f64,
    pub tau: f64,
    pub rate: f64,
    pub riskneutral: EsscherSolution,
    pub engine: Engine,
}

impl PricingRequest {
    pub fn new(
        spot: f64,
        strike: f64,
        tau: f64,
        rate: f64,
        riskneutral: EsscherSolution,
        engine: Engine,
    ) -> Result<Self> {
        let req = PricingRequest {
            spot,
            strike,
            tau,
            rate,
            riskneutral,
            engine,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("spot", self.spot), ("strike", self.strike), ("tau", self.tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !self.rate.is_finite() {
            return Err(domain("rate must be finite"));
        }
        Ok(())
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    /// k = S/K.
    pub fn moneyness(&self) -> f64 {
        self.spot / self.strike
    }

    /// log(K/S), the CDF query point of the extended formula.
    pub fn log_strike(&self) -> f64 {
        (self.strike / self.spot).ln()
    }

    fn expect(&self, engine: Engine) -> Result<()> {
        self.validate()?;
        if self.engine != engine {
            return Err(domain(format!(
                "request is for {:?}, not {:?}",
                self.engine, engine
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsParams {
    pub sigma_star: f64,
}

impl BsParams {
    pub fn new(sigma_star: f64) -> Result<Self> {
        if !(sigma_star > 0.0 && sigma_star.is_finite()) {
            return Err(domain(format!("sigma_star must be positive, got {sigma_star}")));
        }
        Ok(BsParams { sigma_star })
    }

    pub fn printed() -> Self {
        BsParams {
            sigma_star: PRINTED_SIGMA_STAR,
        }
    }

    /// σ* = √(D·κ₂)/100 from percent-daily parameters.
    pub fn from_params(params: &GtsParams, days_per_year: f64) -> Result<Self> {
        Self::new(params.annualized_volatility(days_per_year)?)
    }
}

/// S·N(d₁) − K e^{−rτ} N(d₂).
pub fn black_scholes_call(spot: f64, strike: f64, tau: f64, rate: f64, sigma: f64) -> f64 {
    let n = Normal::standard();
    let sq = sigma * tau.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * tau) / sq;
    let d2 = d1 - sq;
    spot * n.cdf(d1) - strike * (-rate * tau).exp() * n.cdf(d2)
}

pub fn bs_price(req: &PricingRequest, bs: &BsParams) -> Result<f64> {
    req.expect(Engine::BlackScholes)?;
    BsParams::new(bs.sigma_star)?;
    Ok(black_scholes_call(req.spot, req.strike, req.tau, req.rate, bs.sigma_star))
}

/// Extended-formula pricer for one maturity: CDF grids of `Y_τ` under the
/// h* and h*+1 measures, reusable across strikes.
#[derive(Debug, Clone)]
pub struct ExtendedPricer {
    tau: f64,
    risk_neutral: TransformGrid,
    share: TransformGrid,
}

impl ExtendedPricer {
    /// `log_strikes` are the log(K/S) values the grids must cover; points
    /// more than 40 standard deviations out are left to the flat tails.
    pub fn new(rn: &EsscherSolution, tau: f64, log_strikes: &[f64]) -> Result<Self> {
        let share = rn.share_measure()?;
        let build = |p: &GtsParams| -> Result<TransformGrid> {
            let m = p.cumulant(1)? * tau;
            let sd = (p.cumulant(2)? * tau).sqrt();
            let cover: Vec<f64> = log_strikes
                .iter()
                .copied()
                .filter(|x| (x - m).abs() <= 40.0 * sd)
                .collect();
            let cfg = FrftConfig::auto_covering(p, tau, &cover)?;
            cdf_grid(p, tau, &cfg)
        };
        Ok(ExtendedPricer {
            tau,
            risk_neutral: build(&rn.shifted)?,
            share: build(&share)?,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// (1 − F_{h*+1}(x), 1 − F_{h*}(x)) at x = log(K/S).
    pub fn survival_terms(&self, log_strike: f64) -> Result<(f64, f64)> {
        let sf = |g: &TransformGrid| -> Result<f64> {
            let (lo, hi) = g.span();
            Ok(1.0 - g.query(log_strike.clamp(lo, hi))?)
        };
        Ok((sf(&self.share)?, sf(&self.risk_neutral)?))
    }

    pub fn call(&self, spot: f64, strike: f64, rate: f64) -> Result<f64> {
        let (s1, s0) = self.survival_terms((strike / spot).ln())?;
        Ok(spot * s1 - strike * (-rate * self.tau).exp() * s0)
    }
}

pub fn gts_call_extended(req: &PricingRequest) -> Result<f64> {
    req.expect(Engine::GtsExtended)?;
    ExtendedPricer::new(&req.riskneutral, req.tau, &[req.log_strike()])?.call(
        req.spot,
        req.strike,
        req.rate,
    )
}

/// Integrand envelope target for the automatic extension of `b`.
pub const TAIL_BOUND: f64 = 1e-10;
const MAX_EXTENSIONS: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ContourConfig {
    pub q: f64,
    pub rule: CompositeRule,
    /// Double the upper limit until the integrand envelope there is
    /// below [`TAIL_BOUND`].
    pub auto_extend: bool,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            q: DEFAULT_Q,
            rule: CompositeRule::pricing_default(),
            auto_extend: true,
        }
    }
}

impl ContourConfig {
    pub fn with_q(q: f64) -> Result<Self> {
        let c = ContourConfig {
            q,
            ..Default::default()
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q < -1.0) {
            return Err(domain(format!("contour shift q = {} must be below -1", self.q)));
        }
        Ok(())
    }
}

/// Outcome of a generalized-formula evaluation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPrice {
    pub price: f64,
    pub upper_limit: f64,
    pub imaginary_residual: f64,
}

pub fn gts_call_generalized(req: &PricingRequest, contour: &ContourConfig) -> Result<f64> {
    Ok(gts_call_generalized_detail(req, contour)?.price)
}

pub fn gts_call_generalized_detail(
    req: &PricingRequest,
    contour: &ContourConfig,
) -> Result<ContourPrice> {
    req.expect(Engine::GtsGeneralized)?;
    contour.validate()?;
    let params = &req.riskneutral.shifted;
    if contour.q <= -params.lambda_plus {
        return Err(domain(format!(
            "contour shift q = {} leaves the strip of analyticity (needs q > {})",
            contour.q, -params.lambda_plus
        )));
    }
    let ex = Exponent::new(params)?;
    let (x, tau, rate, q) = (req.spot.ln() - req.strike.ln(), req.tau, req.rate, contour.q);
    let i = Complex64::i();
    let g = |a: f64| {
        let xi = Complex64::new(a, q);
        (i * xi * x - tau * (rate - ex.eval(xi))).exp() / (i * xi * (i * xi - 1.0))
    };

    let mut rule = contour.rule.clone();
    if contour.auto_extend {
        let envelope = |b: f64| req.strike / PI * b * g(b).norm();
        let mut doublings = 0;
        while envelope(rule.b) > TAIL_BOUND {
            doublings += 1;
            if doublings > MAX_EXTENSIONS {
                return Err(GtsError::Truncation(format!(
                    "contour integrand still {:e} at b = {}",
                    envelope(rule.b),
                    rule.b
                )));
            }
            rule = rule.with_interval(rule.a, 2.0 * rule.b)?;
        }
    }
    let upper = rule.integrate(g)?;
    let lower = rule.with_interval(-rule.b, -rule.a)?.integrate(g)?;
    let price = req.strike / PI * upper.re;
    let residual = req.strike / (2.0 * PI) * (upper + lower).im.abs();
    let bound = 1e-6 * price.abs().max(1.0);
    if residual > bound {
        return Err(GtsError::Contour { residual, bound });
    }
    Ok(ContourPrice {
        price,
        upper_limit: rule.b,
        imaginary_residual: residual,
    })
}

/// Pricing settings shared by all engines.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingContext {
    pub bs: BsParams,
    pub contour: ContourConfig,
}

pub fn price(req: &PricingRequest, ctx: &PricingContext) -> Result<f64> {
    match req.engine {
        Engine::BlackScholes => bs_price(req, &ctx.bs),
        Engine::GtsExtended => gts_call_extended(req),
        Engine::GtsGeneralized => gts_call_generalized(req, &ctx.contour),
    }
}

/// Sampling of the payoff reconstruction: `points` equally spaced values
/// on `[−half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for XGrid {
    fn default() -> Self {
        XGrid {
            half_width: 2.0,
            points: 401,
        }
    }
}

impl XGrid {
    pub fn xs(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        let step = 2.0 * self.half_width / (self.points - 1) as f64;
        (0..self.points)
            .map(|j| -self.half_width + j as f64 * step)
            .collect()
    }
}

/// Rule used for the payoff experiment: [0, 3000] with 10008 subintervals.
pub fn payoff_rule() -> CompositeRule {
    CompositeRule::new(0.0, 3000.0, 834 * ORDER).expect("static rule")
}

/// Payoff transform sampled on a rule for one (k, q), reusable across x.
struct PayoffSpectrum {
    k: f64,
    q: f64,
    starts: Vec<f64>,
    step: f64,
    coef: Vec<[Complex64; ORDER + 1]>,
}

impl PayoffSpectrum {
    fn new(k: f64, q: f64, rule: &CompositeRule) -> Result<Self> {
        if !(q < -1.0) {
            return Err(domain(format!("q = {q} must be below -1")));
        }
        if !(k > 0.0) {
            return Err(domain(format!("k = {k} must be positive")));
        }
        let w = rule.panel_weights();
        let step = rule.step();
        let i = Complex64::i();
        let starts: Vec<f64> = (0..rule.panels()).map(|p| rule.node(p * ORDER)).collect();
        let coef = starts
            .iter()
            .map(|&s0| {
                let mut c = [Complex64::new(0.0, 0.0); ORDER + 1];
                for (j, cj) in c.iter_mut().enumerate() {
                    let y = Complex64::new(s0 + j as f64 * step, q);
                    *cj = w[j] * k / (i * y * (i * y - 1.0));
                }
                c
            })
            .collect();
        Ok(PayoffSpectrum {
            k,
            q,
            starts,
            step,
            coef,
        })
    }

    fn eval(&self, x: f64) -> f64 {
        let d = x - self.k.ln();
        let rot = Complex64::from_polar(1.0, self.step * d);
        let mut sum = Complex64::new(0.0, 0.0);
        for (s0, c) in self.starts.iter().zip(&self.coef) {
            let mut e = Complex64::from_polar(1.0, s0 * d);
            for cj in c {
                sum += cj * e;
                e *= rot;
            }
        }
        (-self.q * d).exp() * sum.re / PI
    }
}

/// ǧ(x, k): the inverse transform of the damped payoff along Im(y) = q,
/// approximating (e^x − k)⁺.
pub fn payoff_inverse_fourier(x: f64, k: f64, q: f64, rule: &CompositeRule) -> Result<f64> {
    Ok(PayoffSpectrum::new(k, q, rule)?.eval(x))
}

/// ER(k, q): RMS gap between (e^x − k)⁺ and its reconstruction on `grid`.
pub fn payoff_error(k: f64, q: f64, grid: &XGrid, rule: &CompositeRule) -> Result<f64> {
    let spec = PayoffSpectrum::new(k, q, rule)?;
    let xs = grid.xs();
    let sq: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            let e = (x.exp() - k).max(0.0) - spec.eval(x);
            e * e
        })
        .collect();
    Ok((sq.iter().sum::<f64>() / xs.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOptimum {
    pub q: f64,
    pub er: f64,
    /// The scan minimum lies strictly inside the range.
    pub interior: bool,
}

/// Scan of ER over `q_range` at spacing `scan_step`, refined by
/// golden-section search around the best scan point.
pub fn optimal_q(
    k: f64,
    q_range: (f64, f64),
    scan_step: f64,
    grid: &XGrid,
    rule: &CompositeRule,
) -> Result<QOptimum> {
    let (lo, hi) = q_range;
    if !(lo < hi && hi < -1.0 && scan_step > 0.0) {
        return Err(domain(format!(
            "q range ({lo}, {hi}) must be increasing and below -1 with a positive step"
        )));
    }
    let n = ((hi - lo) / scan_step).round() as usize;
    let qs: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + i as f64 * scan_step })
        .collect();
    let ers = qs
        .iter()
        .map(|&q| payoff_error(k, q, grid, rule))
        .collect::<Result<Vec<f64>>>()?;
    let best = (0..ers.len())
        .min_by(|&a, &b| ers[a].total_cmp(&ers[b]))
        .expect("nonempty scan");
    if best == 0 || best == qs.len() - 1 {
        return Ok(QOptimum {
            q: qs[best],
            er: ers[best],
            interior: false,
        });
    }
    let f = |q: f64| payoff_error(k, q, grid, rule);
    let (mut a, mut b) = (qs[best - 1], qs[best + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let (q, er) = if fc < fd { (c, fc) } else { (d, fd) };
    let (q, er) = if er < ers[best] { (q, er) } else { (qs[best], ers[best]) };
    Ok(QOptimum {
        q,
        er,
        interior: true,
    })
}

/// Which engines a table evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineSet {
    pub black_scholes: bool,
    pub extended: bool,
    pub generalized: bool,
}

impl EngineSet {
    pub const ALL: EngineSet = EngineSet {
        black_scholes: true,
        extended: true,
        generalized: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub spot: f64,
    pub rate: f64,
    pub riskneutral: EsscherSolution,
    pub bs: BsParams,
    pub contour: ContourConfig,
    pub moneyness: Vec<f64>,
    pub maturities: Vec<f64>,
    pub engines: EngineSet,
}

/// One (k, τ) cell; each engine result is absent when not requested.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceCell {
    pub k: f64,
    pub tau: f64,
    pub strike: f64,
    pub bsm: Option<Result<f64>>,
    pub extended: Option<Result<f64>>,
    pub generalized: Option<Result<f64>>,
}

impl PriceCell {
    /// GTS (extended) minus Black-Scholes.
    pub fn error(&self) -> Option<Result<f64>> {
        match (&self.extended, &self.bsm) {
            (Some(Ok(g)), Some(Ok(b))) => Some(Ok(g - b)),
            (Some(Err(e)), _) | (_, Some(Err(e))) => Some(Err(e.clone())),
            _ => None,
        }
    }

    pub fn failures(&self) -> Vec<&GtsError> {
        [&self.bsm, &self.extended, &self.generalized]
            .into_iter()
            .filter_map(|r| r.as_ref().and_then(|r| r.as_ref().err()))
            .collect()
    }
}

fn annotate(k: f64, tau: f64, e: GtsError) -> GtsError {
    match e {
        GtsError::Cell { .. } => e,
        other => GtsError::Cell {
            k,
            tau,
            source: Box::new(other),
        },
    }
}

/// Prices every (k, τ) cell, k-major. Cell failures are recorded in the
/// cell; only an unusable spec is an error.
pub fn price_table(spec: &TableSpec) -> Result<Vec<PriceCell>> {
    if spec.moneyness.is_empty() || spec.maturities.is_empty() {
        return Err(domain("moneyness and maturity grids must be nonempty"));
    }
    if !(spec.spot > 0.0) || spec.moneyness.iter().any(|&k| !(k > 0.0)) {
        return Err(domain("spot and moneyness values must be positive"));
    }
    let log_strikes: Vec<f64> = spec.moneyness.iter().map(|k| -k.ln()).collect();
    let pricers: Vec<Option<Result<ExtendedPricer>>> = spec
        .maturities
        .par_iter()
        .map(|&tau| {
            spec.engines
                .extended
                .then(|| ExtendedPricer::new(&spec.riskneutral, tau, &log_strikes))
        })
        .collect();
    let cells: Vec<(f64, usize)> = spec
        .moneyness
        .iter()
        .flat_map(|&k| (0..spec.maturities.len()).map(move |t| (k, t)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(k, t)| {
            let tau = spec.maturities[t];
            let strike = spec.spot / k;
            let wrap = |r: Result<f64>| r.map_err(|e| annotate(k, tau, e));
            let req = PricingRequest::new(
                spec.spot,
                strike,
                tau,
                spec.rate,
                spec.riskneutral,
                Engine::BlackScholes,
            );
            let run = |engine: Engine| -> Result<f64> {
                let req = req.clone()?.with_engine(engine);
                match engine {
                    Engine::BlackScholes => bs_price(&req, &spec.bs),
                    Engine::GtsExtended => match &pricers[t] {
                        Some(Ok(p)) => p.call(spec.spot, strike, spec.rate),
                        Some(Err(e)) => Err(e.clone()),
                        None => unreachable!("extended engine disabled"),
                    },
                    Engine::GtsGeneralized => gts_call_generalized(&req, &spec.contour),
                }
            };
            PriceCell {
                k,
                tau,
                strike,
                bsm: spec
                    .engines
                    .black_scholes
                    .then(|| wrap(run(Engine::BlackScholes))),
                extended: spec.engines.extended.then(|| wrap(run(Engine::GtsExtended))),
                generalized: spec
                    .engines
                    .generalized
                    .then(|| wrap(run(Engine::GtsGeneralized))),
            }
        })
        .collect())
}

/// Error(k, τ) = extended GTS price − Black-Scholes price; rows follow
/// `k_grid`, columns `tau_grid`.
pub fn error_surface(
    spot: f64,
    rate: f64,
    riskneutral: &EsscherSolution,
    bs: &BsParams,
    k_grid: &[f64],
    tau_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let spec = TableSpec {
        spot,
        rate,
        riskneutral: *riskneutral,
        bs: *bs,
        contour: ContourConfig::default(),
        moneyness: k_grid.to_vec(),
        maturities: tau_grid.to_vec(),
        engines: EngineSet {
            black_scholes: true,
            extended: true,
            generalized: false,
        },
    };
    let cells = price_table(&spec)?;
    cells
        .chunks(tau_grid.len())
        .map(|row| {
            row.iter()
                .map(|c| c.error().expect("both engines requested"))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}
