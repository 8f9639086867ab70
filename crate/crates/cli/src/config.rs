use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gts_pricing::pricing::{
    table_moneyness, DEFAULT_Q, DEFAULT_RATE, TABLE_MATURITIES, TABLE_SPOT,
};
use gts_pricing::quadrature::DEFAULT_SUBINTERVALS;
use gts_pricing::GtsParams;
use serde::{Deserialize, Serialize};

/// Where the GTS parameters come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSource {
    Inline(GtsParams),
    /// `"sp500"`, `"fit"`, or a path to a parameter file.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    Bs,
    Extended,
    Generalized,
    #[default]
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSettings {
    pub q: f64,
    pub upper_limit: f64,
    pub subintervals: usize,
    pub auto_extend: bool,
}

impl Default for ContourSettings {
    fn default() -> Self {
        ContourSettings {
            q: DEFAULT_Q,
            upper_limit: 20.0,
            subintervals: DEFAULT_SUBINTERVALS,
            auto_extend: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcalibSettings {
    pub q_low: f64,
    pub q_high: f64,
    pub scan_step: f64,
    /// Spacing of the ER(k, q) curve written for plotting.
    pub curve_step: f64,
    pub half_width: f64,
    pub points: usize,
    pub rule_upper: f64,
    pub rule_subintervals: usize,
    /// Extra contours whose payoff reconstructions are written next to
    /// the optimal one.
    pub compare_q: Vec<f64>,
    pub sample_points: usize,
}

impl Default for QcalibSettings {
    fn default() -> Self {
        QcalibSettings {
            q_low: -8.0,
            q_high: -1.05,
            scan_step: 0.05,
            curve_step: 0.25,
            half_width: 2.0,
            points: 401,
            rule_upper: 3000.0,
            rule_subintervals: 10008,
            compare_q: vec![-2.0],
            sample_points: 81,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySettings {
    pub maturities: Vec<f64>,
    /// Keep every `stride`-th grid node.
    pub stride: usize,
    /// Use the risk-neutral parameters instead of the physical ones.
    pub riskneutral: bool,
}

impl Default for DensitySettings {
    fn default() -> Self {
        DensitySettings {
            maturities: vec![1.0 / 12.0, 0.25, 0.5],
            stride: 16,
            riskneutral: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsscherSettings {
    pub rate_max: f64,
    pub rate_points: usize,
    pub h_points: usize,
}

impl Default for EsscherSettings {
    fn default() -> Self {
        EsscherSettings {
            rate_max: 0.10,
            rate_points: 41,
            h_points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rate: f64,
    pub spot: f64,
    /// Black-Scholes volatility; derived from the GTS variance when unset.
    pub sigma_star: Option<f64>,
    pub days_per_year: u32,
    pub moneyness_grid: Vec<f64>,
    pub maturity_grid: Vec<f64>,
    pub engine: EngineChoice,
    /// Single-quote mode for `price` when both are set.
    pub strike: Option<f64>,
    pub tau: Option<f64>,
    pub out: PathBuf,
    pub data: Option<PathBuf>,
    pub date_column: String,
    pub close_column: String,
    pub tol: f64,
    pub max_iter: usize,
    pub params: ParamsSource,
    pub contour: ContourSettings,
    pub qcalib: QcalibSettings,
    pub density: DensitySettings,
    pub esscher: EsscherSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rate: DEFAULT_RATE,
            spot: TABLE_SPOT,
            sigma_star: None,
            days_per_year: 360,
            moneyness_grid: table_moneyness(),
            maturity_grid: TABLE_MATURITIES.to_vec(),
            engine: EngineChoice::All,
            strike: None,
            tau: None,
            out: PathBuf::from("out"),
            data: None,
            date_column: "Date".into(),
            close_column: "Adj Close".into(),
            tol: gts_pricing::calibration::DEFAULT_TOL,
            max_iter: gts_pricing::calibration::DEFAULT_MAX_ITER,
            params: ParamsSource::Named("sp500".into()),
            contour: ContourSettings::default(),
            qcalib: QcalibSettings::default(),
            density: DensitySettings::default(),
            esscher: EsscherSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.to_toml()?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn days(&self) -> f64 {
        self.days_per_year as f64
    }

    pub fn check_grids(&self) -> anyhow::Result<()> {
        if self.moneyness_grid.is_empty() {
            bail!(crate::Usage("moneyness grid is empty".into()));
        }
        if self.maturity_grid.is_empty() {
            bail!(crate::Usage("maturity grid is empty".into()));
        }
        Ok(())
    }
}

pub fn read_params(path: &Path) -> anyhow::Result<GtsParams> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading parameters {}", path.display()))?;
    let p: GtsParams =
        toml::from_str(&text).with_context(|| format!("parsing parameters {}", path.display()))?;
    p.validate()?;
    Ok(p)
}

pub fn write_params(path: &Path, params: &GtsParams) -> anyhow::Result<()> {
    std::fs::write(path, toml::to_string(params)?)
        .with_context(|| format!("writing {}", path.display()))
}
