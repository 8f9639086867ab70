//! Fourier inversion of the GTS characteristic function.
//!
//! Densities and CDFs of `Y_τ` are recovered on a uniform spatial grid from
//! the characteristic function `φ(u) = e^{τΨ(u)}`:
//!
//! ```text
//! f(x) = (1/2π) ∫ e^{−iux} φ(u) du
//! F(x) = 1/2 − (1/2π) PV∫ e^{−iux} φ(u) / (iu) du
//! ```
//!
//! The frequency grid is the half-shifted midpoint grid
//! `u_j = (j − N/2 + 1/2)·Δu`, which is symmetric about zero and has no node
//! at `u = 0`; the principal value of the CDF integral is then the plain
//! discrete sum. All N outputs are produced at once by a fractional FFT
//! with exponent `δ = Δu·Δx / 2π`.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{domain, GtsError, Result};
use crate::gts::{Exponent, GtsParams};

/// Characteristic-function magnitude required at the frequency-grid edge.
pub const EDGE_DECAY: f64 = 1e-12;
/// Largest single correction the CDF monotonicity pass may apply.
pub const MAX_REPAIR: f64 = 1e-6;
/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 1 << 14;
/// Default half-width of the spatial grid in standard deviations.
pub const DEFAULT_HALF_WIDTH_SD: f64 = 12.0;
/// Minimum half-width in units of the tail scale 1/λ.
pub const TAIL_DECAYS: f64 = 25.0;

/// Fractional DFT `G_k = Σ_j x_j e^{−2πi·j·k·δ}`, k = 0..N−1, by Bluestein's
/// chirp convolution in O(N log N).
pub fn frft(input: &[Complex64], delta: f64) -> Vec<Complex64> {
    let n = input.len();
    if n == 0 {
        return Vec::new();
    }
    let m = (2 * n - 1).next_power_of_two();
    let chirp = |j: usize| {
        let jf = j as f64;
        let t = (delta * jf * jf) % 2.0;
        Complex64::from_polar(1.0, -PI * t)
    };
    let chirps: Vec<Complex64> = (0..n).map(chirp).collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for (j, (x, c)) in input.iter().zip(&chirps).enumerate() {
        a[j] = x * c;
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirps[0].conj();
    for j in 1..n {
        b[j] = chirps[j].conj();
        b[m - j] = chirps[j].conj();
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * scale * chirps[k]).collect()
}

/// Discretization of the inversion: N points, frequency step Δu and
/// spatial step Δx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrftConfig {
    pub n_points: usize,
    pub freq_step: f64,
    pub space_step: f64,
}

impl FrftConfig {
    pub fn delta(&self) -> f64 {
        self.freq_step * self.space_step / (2.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 64 || !self.n_points.is_power_of_two() {
            return Err(domain(format!(
                "n_points = {} must be a power of two >= 64",
                self.n_points
            )));
        }
        if !(self.freq_step > 0.0 && self.space_step > 0.0) {
            return Err(domain("frequency and space steps must be positive"));
        }
        Ok(())
    }

    /// Largest frequency on the grid.
    pub fn max_frequency(&self) -> f64 {
        (self.n_points as f64 / 2.0 - 0.5) * self.freq_step
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.n_points as f64 * self.space_step
    }

    /// Decay-driven sizing for `Y_τ` under `params`: span κ₁τ ± 12√(κ₂τ),
    /// widened to 25/λ on a side whose exponential tail is slower, and a
    /// frequency range wide enough that |φ| has fallen below the
    /// edge tolerance.
    pub fn auto(params: &GtsParams, tau: f64) -> Result<Self> {
        Self::auto_covering(params, tau, &[])
    }

    /// As [`FrftConfig::auto`], widened so every point in `cover` sits
    /// inside the spatial span with some margin.
    pub fn auto_covering(params: &GtsParams, tau: f64, cover: &[f64]) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(domain("tau must be positive"));
        }
        let mean = params.cumulant(1)? * tau;
        let sd = (params.cumulant(2)? * tau).sqrt();
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(domain("degenerate distribution: zero variance"));
        }
        let mut half = DEFAULT_HALF_WIDTH_SD * sd;
        for (alpha, lambda) in [
            (params.alpha_plus, params.lambda_plus),
            (params.alpha_minus, params.lambda_minus),
        ] {
            if alpha > 0.0 && lambda > 0.0 {
                half = half.max(TAIL_DECAYS / lambda);
            }
        }
        for &x in cover {
            half = half.max(1.2 * (x - mean).abs() + 2.0 * sd);
        }
        let ex = Exponent::new(params)?;
        let umax = decay_frequency(&ex, tau, 1.0 / sd)?;
        let mut n = DEFAULT_POINTS;
        // keep the spatial period 2π/Δu at least four half-widths
        while 2.0 * umax / n as f64 > PI / (2.0 * half) {
            n *= 2;
            if n > 1 << 22 {
                return Err(GtsError::Truncation(
                    "grid would need more than 2^22 points".into(),
                ));
            }
        }
        Ok(FrftConfig {
            n_points: n,
            freq_step: 2.0 * umax / n as f64,
            space_step: 2.0 * half / n as f64,
        })
    }
}

/// Smallest frequency (from a geometric search) where |e^{τΨ(±u)}| is
/// below a tenth of the edge tolerance.
pub(crate) fn decay_frequency(ex: &Exponent, tau: f64, start: f64) -> Result<f64> {
    let mag = |u: f64| {
        let a = (tau * ex.eval(Complex64::new(u, 0.0)).re).exp();
        let b = (tau * ex.eval(Complex64::new(-u, 0.0)).re).exp();
        a.max(b)
    };
    let mut u = start.max(1e-6);
    while mag(u) > 0.1 * EDGE_DECAY {
        u *= 1.25;
        if u > 1e9 {
            return Err(GtsError::Truncation(
                "characteristic function does not decay".into(),
            ));
        }
    }
    Ok(u)
}

/// Uniform spatial grid placement: `x_k = x0 + k·Δx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub config: FrftConfig,
    pub x0: f64,
}

impl GridGeometry {
    pub fn centered(config: FrftConfig, center: f64) -> Self {
        GridGeometry {
            config,
            x0: center - config.half_width(),
        }
    }

    pub fn frequency(&self, j: usize) -> f64 {
        (j as f64 - self.config.n_points as f64 / 2.0 + 0.5) * self.config.freq_step
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.config.space_step
    }

    /// (1/2π) Σ_j e^{−i u_j x_k} s(u_j) Δu for every grid point x_k.
    pub fn invert<S>(&self, spectrum: S) -> Vec<Complex64>
    where
        S: Fn(f64) -> Complex64 + Sync,
    {
        let samples: Vec<Complex64> = (0..self.config.n_points)
            .into_par_iter()
            .map(|j| spectrum(self.frequency(j)))
            .collect();
        self.invert_samples(&samples)
    }

    /// As [`GridGeometry::invert`] with the spectrum already sampled at
    /// the frequency nodes.
    pub fn invert_samples(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let n = self.config.n_points;
        assert_eq!(samples.len(), n, "one sample per frequency node");
        let du = self.config.freq_step;
        let dx = self.config.space_step;
        let u0 = self.frequency(0);
        let input: Vec<Complex64> = samples
            .iter()
            .enumerate()
            .map(|(j, s)| s * Complex64::from_polar(1.0, -self.frequency(j) * self.x0))
            .collect();
        let g = frft(&input, self.config.delta());
        let scale = du / (2.0 * PI);
        g.into_iter()
            .enumerate()
            .map(|(k, v)| v * Complex64::from_polar(scale, -u0 * k as f64 * dx))
            .collect()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.x0, self.x(self.config.n_points - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    Density,
    Cdf,
}

/// Density or CDF values on a uniform grid, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformGrid {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    kind: GridKind,
    params_fingerprint: u64,
}

impl TransformGrid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn fingerprint(&self) -> u64 {
        self.params_fingerprint
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| self.x(k))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn span(&self) -> (f64, f64) {
        (self.x0, self.x(self.values.len() - 1))
    }

    /// Linear interpolation; densities clamped at 0, CDFs to [0, 1].
    pub fn query(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(GtsError::OutOfRange { x, lo, hi });
        }
        let pos = (x - self.x0) / self.dx;
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let w = pos - k as f64;
        let v = if w == 0.0 {
            self.values[k]
        } else {
            self.values[k] + w * (self.values[k + 1] - self.values[k])
        };
        Ok(match self.kind {
            GridKind::Density => v.max(0.0),
            GridKind::Cdf => v.clamp(0.0, 1.0),
        })
    }

    /// Inverse of a CDF grid by linear interpolation.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if self.kind != GridKind::Cdf {
            return Err(domain("quantile requires a CDF grid"));
        }
        let first = self.values[0];
        let last = self.values[self.values.len() - 1];
        if !(p > first && p < last) {
            return Err(domain(format!(
                "probability {p} outside the grid's CDF range ({first}, {last})"
            )));
        }
        let k = self.values.partition_point(|&v| v < p);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        let w = if v1 > v0 { (p - v0) / (v1 - v0) } else { 0.0 };
        Ok(self.x(k - 1) + w * self.dx)
    }
}

impl TransformGrid {
    /// Every `stride`-th node, keeping the first.
    pub fn downsample(&self, stride: usize) -> TransformGrid {
        let stride = stride.max(1);
        TransformGrid {
            x0: self.x0,
            dx: self.dx * stride as f64,
            values: self.values.iter().step_by(stride).copied().collect(),
            kind: self.kind,
            params_fingerprint: self.params_fingerprint,
        }
    }

    /// Writes `x,value` rows with a header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["x", "value"]).map_err(csv_err)?;
        for (x, v) in self.xs().zip(&self.values) {
            w.write_record([format!("{x:.17e}"), format!("{v:.17e}")])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a grid written by [`TransformGrid::write_csv`]. The abscissae
    /// must be uniform.
    pub fn read_csv(path: impl AsRef<Path>, kind: GridKind) -> Result<TransformGrid> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let field = |j: usize| -> Result<f64> {
                rec.get(j)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| GtsError::Parse {
                        line: i + 2,
                        message: format!("column {j} is not a number"),
                    })
            };
            xs.push(field(0)?);
            values.push(field(1)?);
        }
        if xs.len() < 2 {
            return Err(GtsError::EmptySeries);
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        for (k, &x) in xs.iter().enumerate() {
            if (x - (xs[0] + k as f64 * dx)).abs() > 1e-9 * dx.abs().max(1.0) {
                return Err(GtsError::Parse {
                    line: k + 2,
                    message: "abscissae are not uniform".into(),
                });
            }
        }
        Ok(TransformGrid {
            x0: xs[0],
            dx,
            values,
            kind,
            params_fingerprint: 0,
        })
    }
}

fn csv_err(e: csv::Error) -> GtsError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => GtsError::Io(io.to_string()),
        other => GtsError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn fingerprint(params: &GtsParams, tau: f64, config: &FrftConfig, kind: GridKind) -> u64 {
    let mut h = DefaultHasher::new();
    for v in params.to_array() {
        v.to_bits().hash(&mut h);
    }
    tau.to_bits().hash(&mut h);
    config.n_points.hash(&mut h);
    config.freq_step.to_bits().hash(&mut h);
    config.space_step.to_bits().hash(&mut h);
    kind.hash(&mut h);
    h.finish()
}

pub(crate) fn check_edge(ex: &Exponent, tau: f64, geom: &GridGeometry) -> Result<()> {
    let edge = geom.config.max_frequency();
    for u in [edge, -edge] {
        let m = (tau * ex.eval(Complex64::new(u, 0.0)).re).exp();
        if m > EDGE_DECAY {
            return Err(GtsError::Truncation(format!(
                "|phi| = {m:e} at frequency edge {u} exceeds {EDGE_DECAY:e}; widen the frequency grid"
            )));
        }
    }
    Ok(())
}

fn prepare(params: &GtsParams, tau: f64, config: &FrftConfig) -> Result<(Exponent, GridGeometry)> {
    if !(tau > 0.0) {
        return Err(domain("tau must be positive"));
    }
    config.validate()?;
    let ex = Exponent::new(params)?;
    let center = params.cumulant(1)? * tau;
    let geom = GridGeometry::centered(*config, center);
    check_edge(&ex, tau, &geom)?;
    Ok((ex, geom))
}

/// Density of `Y_τ` on a grid centred at κ₁τ.
pub fn density_grid(params: &GtsParams, tau: f64, config: &FrftConfig) -> Result<TransformGrid> {
    let (ex, geom) = prepare(params, tau, config)?;
    density_on(&ex, tau, &geom, fingerprint(params, tau, config, GridKind::Density))
}

pub(crate) fn density_on(
    ex: &Exponent,
    tau: f64,
    geom: &GridGeometry,
    fingerprint: u64,
) -> Result<TransformGrid> {
    let values: Vec<f64> = geom
        .invert(|u| (tau * ex.eval(Complex64::new(u, 0.0))).exp())
        .into_iter()
        .map(|v| v.re)
        .collect();
    if let Some(&worst) = values.iter().min_by(|a, b| a.total_cmp(b)) {
        if worst < -1e-9 {
            return Err(GtsError::Truncation(format!(
                "density ringing {worst:e} below tolerance"
            )));
        }
    }
    Ok(TransformGrid {
        x0: geom.x0,
        dx: geom.config.space_step,
        values,
        kind: GridKind::Density,
        params_fingerprint: fingerprint,
    })
}

/// CDF of `Y_τ` on a grid centred at κ₁τ, repaired to be nondecreasing.
pub fn cdf_grid(params: &GtsParams, tau: f64, config: &FrftConfig) -> Result<TransformGrid> {
    let (ex, geom) = prepare(params, tau, config)?;
    let raw = geom.invert(|u| {
        let phi = (tau * ex.eval(Complex64::new(u, 0.0))).exp();
        phi / Complex64::new(0.0, u)
    });
    let mut values = Vec::with_capacity(raw.len());
    let mut running = f64::NEG_INFINITY;
    for v in raw {
        let f = 0.5 - v.re;
        if f < running {
            if running - f > MAX_REPAIR {
                return Err(GtsError::Truncation(format!(
                    "CDF monotonicity repair of {:e} exceeds {MAX_REPAIR:e}",
                    running - f
                )));
            }
        } else {
            running = f;
        }
        values.push(running.clamp(0.0, 1.0));
    }
    Ok(TransformGrid {
        x0: geom.x0,
        dx: config.space_step,
        values,
        kind: GridKind::Cdf,
        params_fingerprint: fingerprint(params, tau, config, GridKind::Cdf),
    })
}
