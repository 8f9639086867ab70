//! Maximum-likelihood fitting of GTS parameters to a return series.
//!
//! Densities and their first and second parameter derivatives are all
//! obtained by Fourier inversion on one fixed grid: the derivative of the
//! density is the inverse transform of `φ·∂Ψ`, the second derivative that
//! of `φ·(∂Ψ∂Ψ + ∂²Ψ)`. Parameters are ordered
//! `(μ, β₊, β₋, α₊, α₋, λ₊, λ₋)`.

use std::path::Path;

use nalgebra::{SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, GtsError, Result};
use crate::gts::{Exponent, GtsParams, Unit};
use crate::special::{digamma, gamma, trigamma};
use crate::transform::{cdf_grid, check_edge, FrftConfig, GridGeometry};

pub const N_PARAMS: usize = 7;
pub const PARAM_NAMES: [&str; N_PARAMS] = [
    "mu",
    "beta_plus",
    "beta_minus",
    "alpha_plus",
    "alpha_minus",
    "lambda_plus",
    "lambda_minus",
];
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 200;
const DENSITY_FLOOR: f64 = 1e-300;

type Vector = SVector<f64, N_PARAMS>;
type Matrix = SMatrix<f64, N_PARAMS, N_PARAMS>;

/// Fixed inversion geometry for a data set. Keeping it fixed while the
/// parameters move makes the likelihood a smooth function of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodGrid {
    pub geometry: GridGeometry,
}

impl LikelihoodGrid {
    /// Sized from `params` (decay and tails) and widened over the data.
    pub fn for_data(params: &GtsParams, data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(GtsError::EmptySeries);
        }
        let (lo, hi) = data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(domain("return series contains non-finite values"));
        }
        let cfg = FrftConfig::auto_covering(params, 1.0, &[lo, hi])?;
        // extra frequency headroom so nearby parameter values stay decayed
        let cfg = FrftConfig {
            n_points: cfg.n_points * 2,
            freq_step: cfg.freq_step,
            space_step: cfg.space_step,
        };
        Ok(LikelihoodGrid {
            geometry: GridGeometry::centered(cfg, params.cumulant(1)?),
        })
    }

    fn weights(&self, data: &[f64]) -> Result<Vec<(usize, f64)>> {
        let (lo, hi) = self.geometry.span();
        let dx = self.geometry.config.space_step;
        let last = self.geometry.config.n_points - 1;
        data.iter()
            .enumerate()
            .map(|(index, &value)| {
                if !(value >= lo && value <= hi) {
                    return Err(GtsError::DataOutOfRange { index, value, lo, hi });
                }
                let pos = (value - lo) / dx;
                let k = (pos.floor() as usize).min(last - 1);
                Ok((k, pos - k as f64))
            })
            .collect()
    }
}

fn interp(values: &[Complex64], w: &[(usize, f64)]) -> Vec<f64> {
    w.iter()
        .map(|&(k, t)| values[k].re + t * (values[k + 1].re - values[k].re))
        .collect()
}

/// Derivatives of Ψ(u) in each parameter, first and second order.
struct ExponentDerivatives {
    sides: [Side; 2],
}

#[derive(Clone, Copy)]
struct Side {
    alpha: f64,
    beta: f64,
    lambda: f64,
    g: f64,
    g1: f64,
    g2: f64,
    sign: f64,
}

struct SideTerms {
    d_beta: Complex64,
    d_alpha: Complex64,
    d_lambda: Complex64,
    bb: Complex64,
    ba: Complex64,
    bl: Complex64,
    al: Complex64,
    ll: Complex64,
}

impl Side {
    fn new(alpha: f64, beta: f64, lambda: f64, sign: f64) -> Result<Self> {
        let g = gamma(-beta)?;
        let psi = digamma(-beta)?;
        let psi1 = trigamma(-beta)?;
        Ok(Side {
            alpha,
            beta,
            lambda,
            g,
            g1: -g * psi,
            g2: g * (psi * psi + psi1),
            sign,
        })
    }

    fn terms(&self, u: f64) -> SideTerms {
        let (a, b, l) = (self.alpha, self.beta, self.lambda);
        let big = Complex64::new(l, -self.sign * u);
        let ln_a = big.ln();
        let ln_l = l.ln();
        let ab = (ln_a * b).exp();
        let lb = l.powf(b);
        let t = ab - lb;
        let t_log = ab * ln_a - lb * ln_l;
        let t_log2 = ab * ln_a * ln_a - lb * ln_l * ln_l;
        let p1 = ab / big - lb / l;
        let p1_log = ab / big * ln_a - lb / l * ln_l;
        let p2 = ab / (big * big) - lb / (l * l);
        let d_alpha = self.g * t;
        let ba = self.g1 * t + self.g * t_log;
        let al = self.g * b * p1;
        SideTerms {
            d_beta: a * ba,
            d_alpha,
            d_lambda: a * al,
            bb: a * (self.g2 * t + 2.0 * self.g1 * t_log + self.g * t_log2),
            ba,
            bl: a * (self.g1 * b * p1 + self.g * (p1 + b * p1_log)),
            al,
            ll: a * self.g * b * (b - 1.0) * p2,
        }
    }
}

impl ExponentDerivatives {
    fn new(p: &GtsParams) -> Result<Self> {
        Ok(ExponentDerivatives {
            sides: [
                Side::new(p.alpha_plus, p.beta_plus, p.lambda_plus, 1.0)?,
                Side::new(p.alpha_minus, p.beta_minus, p.lambda_minus, -1.0)?,
            ],
        })
    }

    /// (∂Ψ, ∂²Ψ) at real u.
    fn eval(&self, u: f64) -> ([Complex64; N_PARAMS], [[Complex64; N_PARAMS]; N_PARAMS]) {
        let zero = Complex64::new(0.0, 0.0);
        let mut d = [zero; N_PARAMS];
        let mut dd = [[zero; N_PARAMS]; N_PARAMS];
        d[0] = Complex64::new(0.0, u);
        for (s, side) in self.sides.iter().enumerate() {
            let t = side.terms(u);
            let (ib, ia, il) = (1 + s, 3 + s, 5 + s);
            d[ib] = t.d_beta;
            d[ia] = t.d_alpha;
            d[il] = t.d_lambda;
            for (i, j, v) in [
                (ib, ib, t.bb),
                (ib, ia, t.ba),
                (ib, il, t.bl),
                (ia, il, t.al),
                (il, il, t.ll),
            ] {
                dd[i][j] = v;
                dd[j][i] = v;
            }
        }
        (d, dd)
    }
}

fn check_params(params: &GtsParams) -> Result<()> {
    params.validate()?;
    for b in [params.beta_plus, params.beta_minus] {
        if !(b > 0.0 && b < 1.0) {
            return Err(domain(format!("fitting needs beta in (0, 1), got {b}")));
        }
    }
    for v in [params.alpha_plus, params.alpha_minus, params.lambda_plus, params.lambda_minus] {
        if !(v > 0.0) {
            return Err(domain("fitting needs positive alpha and lambda"));
        }
    }
    Ok(())
}

fn log_sum(f: &[f64]) -> f64 {
    f.iter().map(|v| v.max(DENSITY_FLOOR).ln()).sum()
}

/// Σ log f(yᵢ) on a fixed grid.
pub fn log_likelihood_on(grid: &LikelihoodGrid, params: &GtsParams, data: &[f64]) -> Result<f64> {
    check_params(params)?;
    let ex = Exponent::new(params)?;
    check_edge(&ex, 1.0, &grid.geometry)?;
    let w = grid.weights(data)?;
    let dens = grid
        .geometry
        .invert(|u| ex.eval(Complex64::new(u, 0.0)).exp());
    Ok(log_sum(&interp(&dens, &w)))
}

/// Σ log f(yᵢ; params) for percent-daily returns, at τ = 1.
pub fn log_likelihood(params: &GtsParams, data: &[f64]) -> Result<f64> {
    let grid = LikelihoodGrid::for_data(params, data)?;
    log_likelihood_on(&grid, params, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub log_ml: f64,
    pub gradient: [f64; N_PARAMS],
    pub hessian: [[f64; N_PARAMS]; N_PARAMS],
    pub max_eigen: f64,
}

impl Score {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

pub fn score_and_hessian_on(
    grid: &LikelihoodGrid,
    params: &GtsParams,
    data: &[f64],
) -> Result<Score> {
    check_params(params)?;
    let ex = Exponent::new(params)?;
    check_edge(&ex, 1.0, &grid.geometry)?;
    let w = grid.weights(data)?;
    let der = ExponentDerivatives::new(params)?;
    let geom = &grid.geometry;
    let n = geom.config.n_points;

    // spectra: 0 = φ, 1..=7 first derivatives, then upper-triangle second
    let pairs: Vec<(usize, usize)> = (0..N_PARAMS)
        .flat_map(|i| (i..N_PARAMS).map(move |j| (i, j)))
        .collect();
    let n_spec = 1 + N_PARAMS + pairs.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let u = geom.frequency(j);
            let phi = ex.eval(Complex64::new(u, 0.0)).exp();
            let (d, dd) = der.eval(u);
            let mut row = Vec::with_capacity(n_spec);
            row.push(phi);
            row.extend(d.iter().map(|v| phi * v));
            row.extend(pairs.iter().map(|&(a, b)| phi * (d[a] * d[b] + dd[a][b])));
            row
        })
        .collect();
    let values: Vec<Vec<f64>> = (0..n_spec)
        .into_par_iter()
        .map(|s| {
            let samples: Vec<Complex64> = rows.iter().map(|r| r[s]).collect();
            interp(&geom.invert_samples(&samples), &w)
        })
        .collect();

    let f = &values[0];
    let mut gradient = [0.0; N_PARAMS];
    let mut hessian = [[0.0; N_PARAMS]; N_PARAMS];
    for (i, g) in gradient.iter_mut().enumerate() {
        *g = f
            .iter()
            .zip(&values[1 + i])
            .map(|(f, fi)| fi / f.max(DENSITY_FLOOR))
            .sum();
    }
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let fab = &values[1 + N_PARAMS + p];
        let v: f64 = (0..f.len())
            .map(|i| {
                let fi = f[i].max(DENSITY_FLOOR);
                fab[i] / fi - values[1 + a][i] * values[1 + b][i] / (fi * fi)
            })
            .sum();
        hessian[a][b] = v;
        hessian[b][a] = v;
    }
    let h = Matrix::from_fn(|i, j| hessian[i][j]);
    let max_eigen = SymmetricEigen::new(h).eigenvalues.max();
    Ok(Score {
        log_ml: log_sum(f),
        gradient,
        hessian,
        max_eigen,
    })
}

pub fn score_and_hessian(params: &GtsParams, data: &[f64]) -> Result<Score> {
    let grid = LikelihoodGrid::for_data(params, data)?;
    score_and_hessian_on(&grid, params, data)
}

/// One row of a fit trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitState {
    pub iteration: usize,
    pub params: GtsParams,
    pub log_ml: f64,
    pub grad_norm: f64,
    pub max_eigen: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step along the search direction increased the likelihood.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub trajectory: Vec<FitState>,
    pub stop: StopReason,
}

impl FitOutcome {
    pub fn last(&self) -> &FitState {
        self.trajectory.last().expect("trajectory is never empty")
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

fn project(v: &Vector, unit: Unit) -> GtsParams {
    let eps = 1e-6;
    let mut a = [0.0; N_PARAMS];
    for i in 0..N_PARAMS {
        a[i] = match i {
            0 => v[0],
            1 | 2 => v[i].clamp(eps, 1.0 - eps),
            _ => v[i].max(1e-8),
        };
    }
    GtsParams::from_array(a, unit)
}

fn to_vector(p: &GtsParams) -> Vector {
    Vector::from_column_slice(&p.to_array())
}

/// Damped Newton ascent: the Newton step when the Hessian is negative
/// definite, a shifted Newton step otherwise, each shortened by halving
/// until the log-likelihood increases.
pub fn fit(data: &[f64], init: &GtsParams, tol: f64, max_iter: usize) -> Result<FitOutcome> {
    check_params(init)?;
    let mut grid = LikelihoodGrid::for_data(init, data)?;
    let mut current = *init;
    let mut score = score_and_hessian_on(&grid, &current, data)?;
    if !score.log_ml.is_finite() {
        return Err(GtsError::NonFinite { iteration: 0 });
    }
    let mut trajectory = Vec::new();
    let mut iteration = 0;
    loop {
        trajectory.push(FitState {
            iteration,
            params: current,
            log_ml: score.log_ml,
            grad_norm: score.grad_norm(),
            max_eigen: score.max_eigen,
        });
        if score.grad_norm() < tol && score.max_eigen < 0.0 {
            return Ok(FitOutcome {
                trajectory,
                stop: StopReason::Converged,
            });
        }
        if iteration >= max_iter {
            return Ok(FitOutcome {
                trajectory,
                stop: StopReason::MaxIterations,
            });
        }
        let g = Vector::from_column_slice(&score.gradient);
        let h = Matrix::from_fn(|i, j| score.hessian[i][j]);
        // Newton step when −H is positive definite; otherwise shift −H by
        // twice the largest eigenvalue so the step is still an ascent
        let shift = if score.max_eigen < 0.0 {
            0.0
        } else {
            2.0 * score.max_eigen + 1e-8 * h.norm().max(1.0)
        };
        let step = (Matrix::identity() * shift - h)
            .cholesky()
            .map(|c| c.solve(&g))
            .filter(|d| d.dot(&g) > 0.0);
        let (dir, mut t) = match step {
            Some(d) => (d, 1.0),
            None => (g, 1.0 / g.norm().max(1e-300)),
        };
        let base = to_vector(&current);
        let mut accepted = None;
        for _ in 0..60 {
            let cand = project(&(base + dir * t), current.unit);
            match log_likelihood_on(&grid, &cand, data) {
                Ok(ll) if ll.is_finite() && ll > score.log_ml => {
                    accepted = Some(cand);
                    break;
                }
                _ => t *= 0.5,
            }
        }
        let Some(next) = accepted else {
            return Ok(FitOutcome {
                trajectory,
                stop: StopReason::Stalled,
            });
        };
        iteration += 1;
        current = next;
        score = match score_and_hessian_on(&grid, &current, data) {
            Ok(s) => s,
            Err(GtsError::Truncation(_)) => {
                grid = LikelihoodGrid::for_data(&current, data)?;
                score_and_hessian_on(&grid, &current, data)?
            }
            Err(e) => return Err(e),
        };
        if !score.log_ml.is_finite() {
            return Err(GtsError::NonFinite { iteration });
        }
    }
}

/// Symmetric starting point matching the sample mean and variance.
pub fn initial_guess(data: &[f64]) -> Result<GtsParams> {
    if data.len() < 2 {
        return Err(GtsError::EmptySeries);
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(domain("constant series has no variance"));
    }
    let beta = 0.5;
    let lambda = 1.0 / var.sqrt();
    // κ₂ = 2 α Γ(2 − β) λ^{β − 2}
    let alpha = var / (2.0 * gamma(2.0 - beta)? * lambda.powf(beta - 2.0));
    GtsParams::new(mean, beta, beta, alpha, alpha, lambda, lambda, Unit::PercentDaily)
}

/// Deterministic sample y_i = F⁻¹((i − 1/2)/n) of `Y_1`.
pub fn quantile_sample(params: &GtsParams, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GtsError::EmptySeries);
    }
    let cfg = FrftConfig::auto(params, 1.0)?;
    let c = cdf_grid(params, 1.0, &cfg)?;
    (1..=n)
        .map(|i| c.quantile((i as f64 - 0.5) / n as f64))
        .collect()
}

/// Writes the trajectory as CSV, one row per iteration.
pub fn write_trajectory(path: impl AsRef<Path>, states: &[FitState]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| GtsError::Io(e.to_string()))?;
    let mut header = vec!["iteration"];
    header.extend(PARAM_NAMES);
    header.extend(["log_ml", "grad_norm", "max_eigen"]);
    w.write_record(&header).map_err(|e| GtsError::Io(e.to_string()))?;
    for s in states {
        let mut row = vec![s.iteration.to_string()];
        row.extend(s.params.to_array().iter().map(|v| format!("{v:.10}")));
        row.push(format!("{:.6}", s.log_ml));
        row.push(format!("{:.6e}", s.grad_norm));
        row.push(format!("{:.6}", s.max_eigen));
        w.write_record(&row).map_err(|e| GtsError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
