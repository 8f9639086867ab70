use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use gts_pricing::calibration::{self, StopReason};
use gts_pricing::gts::esscher_bracket;
use gts_pricing::market_data::{self, Schema};
use gts_pricing::pricing::{
    self, BsParams, ContourConfig, Engine, EngineSet, PriceCell, PricingContext, PricingRequest,
    TableSpec, XGrid,
};
use gts_pricing::quadrature::CompositeRule;
use gts_pricing::transform::{density_grid, FrftConfig};
use gts_pricing::{solve_esscher, EsscherSolution, GtsParams};
use rayon::prelude::*;

use crate::config::{read_params, write_params, EngineChoice, ParamsSource, RunConfig};
use crate::Usage;

fn out_dir(cfg: &RunConfig) -> anyhow::Result<&Path> {
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    Ok(&cfg.out)
}

fn save(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Every command records the configuration it actually ran with.
fn save_effective(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    cfg.write(&dir.join("effective_config.toml"))
}

struct Fitted {
    returns: market_data::ReturnSeries,
    outcome: calibration::FitOutcome,
}

fn run_fit(cfg: &RunConfig) -> anyhow::Result<Fitted> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| Usage("fitting needs a price file (--data)".into()))?;
    let schema = Schema {
        date_column: cfg.date_column.clone(),
        close_column: cfg.close_column.clone(),
    };
    let loaded = market_data::load_prices(path, &schema)?;
    if loaded.dropped > 0 {
        eprintln!("dropped {} rows without a close", loaded.dropped);
    }
    let returns = market_data::log_returns(&loaded.series)?;
    let init = calibration::initial_guess(&returns.returns)?;
    let outcome = calibration::fit(&returns.returns, &init, cfg.tol, cfg.max_iter)?;
    Ok(Fitted { returns, outcome })
}

fn physical_params(cfg: &RunConfig) -> anyhow::Result<GtsParams> {
    match &cfg.params {
        ParamsSource::Inline(p) => {
            p.validate()?;
            Ok(*p)
        }
        ParamsSource::Named(name) if name == "sp500" => Ok(GtsParams::sp500()),
        ParamsSource::Named(name) if name == "fit" => Ok(run_fit(cfg)?.outcome.last().params),
        ParamsSource::Named(path) => read_params(Path::new(path)),
    }
}

struct Measures {
    riskneutral: EsscherSolution,
    bs: BsParams,
}

fn measures(cfg: &RunConfig) -> anyhow::Result<Measures> {
    let physical = physical_params(cfg)?;
    let annual = physical.to_decimal_annual(cfg.days())?;
    let riskneutral = solve_esscher(&annual, cfg.rate)?;
    let bs = match cfg.sigma_star {
        Some(s) => BsParams::new(s)?,
        None => BsParams::from_params(&physical, cfg.days())?,
    };
    Ok(Measures { riskneutral, bs })
}

fn contour(cfg: &RunConfig) -> anyhow::Result<ContourConfig> {
    let c = &cfg.contour;
    let config = ContourConfig {
        q: c.q,
        rule: CompositeRule::new(0.0, c.upper_limit, c.subintervals)?,
        auto_extend: c.auto_extend,
    };
    config.validate()?;
    Ok(config)
}

fn engines(choice: EngineChoice) -> EngineSet {
    match choice {
        EngineChoice::Bs => EngineSet {
            black_scholes: true,
            extended: false,
            generalized: false,
        },
        EngineChoice::Extended => EngineSet {
            black_scholes: false,
            extended: true,
            generalized: false,
        },
        EngineChoice::Generalized => EngineSet {
            black_scholes: false,
            extended: false,
            generalized: true,
        },
        EngineChoice::All => EngineSet::ALL,
    }
}

pub fn fit(cfg: &RunConfig) -> anyhow::Result<()> {
    let Fitted { returns, outcome } = run_fit(cfg)?;
    let dir = out_dir(cfg)?;
    let summary = market_data::summary(&returns.returns, cfg.days())?;
    market_data::write_returns(dir.join("returns.csv"), &returns)?;
    calibration::write_trajectory(dir.join("trajectory.csv"), &outcome.trajectory)?;
    let last = outcome.last();
    write_params(&dir.join("params.toml"), &last.params)?;
    save_effective(cfg, dir)?;
    println!(
        "observations {} annualized volatility {:.6}",
        summary.count, summary.annualized_volatility
    );
    println!(
        "iterations {} log_ml {:.6} grad_norm {:.3e} max_eigen {:.3e}",
        last.iteration, last.log_ml, last.grad_norm, last.max_eigen
    );
    match outcome.stop {
        StopReason::Converged => println!("converged"),
        other => println!("stopped without convergence: {other:?}"),
    }
    Ok(())
}

pub fn esscher(cfg: &RunConfig) -> anyhow::Result<()> {
    let physical = physical_params(cfg)?;
    let annual = physical.to_decimal_annual(cfg.days())?;
    let sol = solve_esscher(&annual, cfg.rate)?;
    let dir = out_dir(cfg)?;
    let s = &sol.shifted;
    save(
        dir,
        "esscher.csv",
        &format!(
            "rate,h_star,lambda_plus,lambda_minus\n{},{},{},{}\n",
            cfg.rate, sol.h_star, s.lambda_plus, s.lambda_minus
        ),
    )?;
    std::fs::write(dir.join("riskneutral.toml"), toml::to_string(&sol)?)?;

    let e = &cfg.esscher;
    if e.h_points < 2 || e.rate_points < 2 {
        bail!(Usage("esscher sweeps need at least two points".into()));
    }
    let bracket = esscher_bracket(&annual)?;
    let mut curve = String::from("h,psi_h_1\n");
    for i in 0..e.h_points {
        let h =
            bracket.h_low + (bracket.h_high - bracket.h_low) * i as f64 / (e.h_points - 1) as f64;
        writeln!(curve, "{h},{}", annual.esscher_exponent(h, 1.0)?)?;
    }
    save(dir, "psi_h.csv", &curve)?;
    let mut sweep = String::from("rate,h_star\n");
    for i in 0..e.rate_points {
        let r = e.rate_max * i as f64 / (e.rate_points - 1) as f64;
        writeln!(sweep, "{r},{}", solve_esscher(&annual, r)?.h_star)?;
    }
    save(dir, "h_star_vs_rate.csv", &sweep)?;
    save_effective(cfg, dir)?;
    println!("h_star {:.6}", sol.h_star);
    println!(
        "lambda_plus {:.6} lambda_minus {:.6}",
        s.lambda_plus, s.lambda_minus
    );
    Ok(())
}

fn opt(v: &Option<gts_pricing::Result<f64>>, digits: Option<usize>) -> String {
    match (v, digits) {
        (Some(Ok(x)), Some(d)) => format!("{x:.d$}"),
        (Some(Ok(x)), None) => format!("{x}"),
        (Some(Err(_)), _) => "NA".into(),
        (None, _) => String::new(),
    }
}

fn table_csv(cells: &[PriceCell], digits: Option<usize>) -> String {
    let mut s = String::from("k,tau,bsm,gts_extended,gts_generalized,error,note\n");
    for c in cells {
        let note = c
            .failures()
            .iter()
            .map(|e| e.to_string().replace([',', '\n'], ";"))
            .collect::<Vec<_>>()
            .join(" | ");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.k,
            c.tau,
            opt(&c.bsm, digits),
            opt(&c.extended, digits),
            opt(&c.generalized, digits),
            opt(&c.error(), digits),
            note
        );
    }
    s
}

pub fn price(cfg: &RunConfig) -> anyhow::Result<()> {
    let single = match (cfg.strike, cfg.tau) {
        (Some(k), Some(t)) => Some((k, t)),
        (None, None) => None,
        _ => bail!(Usage("a single quote needs both --strike and --tau".into())),
    };
    if single.is_none() {
        cfg.check_grids()?;
    }
    let m = measures(cfg)?;
    let contour = contour(cfg)?;
    let set = engines(cfg.engine);
    let dir = out_dir(cfg)?;

    if let Some((strike, tau)) = single {
        let ctx = PricingContext { bs: m.bs, contour };
        let req = PricingRequest::new(
            cfg.spot,
            strike,
            tau,
            cfg.rate,
            m.riskneutral,
            Engine::BlackScholes,
        )?;
        let mut s = String::from("engine,price\n");
        for (on, engine, name) in [
            (set.black_scholes, Engine::BlackScholes, "bsm"),
            (set.extended, Engine::GtsExtended, "gts_extended"),
            (set.generalized, Engine::GtsGeneralized, "gts_generalized"),
        ] {
            if on {
                let p = pricing::price(&req.with_engine(engine), &ctx)?;
                writeln!(s, "{name},{p}")?;
                println!("{name} {p:.4}");
            }
        }
        save(dir, "quote.csv", &s)?;
        save_effective(cfg, dir)?;
        return Ok(());
    }

    let spec = TableSpec {
        spot: cfg.spot,
        rate: cfg.rate,
        riskneutral: m.riskneutral,
        bs: m.bs,
        contour,
        moneyness: cfg.moneyness_grid.clone(),
        maturities: cfg.maturity_grid.clone(),
        engines: set,
    };
    let cells = pricing::price_table(&spec)?;
    save(dir, "table.csv", &table_csv(&cells, Some(2)))?;
    save(dir, "table_full.csv", &table_csv(&cells, None))?;
    save_effective(cfg, dir)?;
    let failed: Vec<_> = cells.iter().flat_map(|c| c.failures()).collect();
    for f in &failed {
        eprintln!("{f}");
    }
    println!(
        "h_star {:.6} sigma_star {:.7} cells {} failures {}",
        m.riskneutral.h_star,
        m.bs.sigma_star,
        cells.len(),
        failed.len()
    );
    Ok(())
}

pub fn surface(cfg: &RunConfig) -> anyhow::Result<()> {
    cfg.check_grids()?;
    let m = measures(cfg)?;
    let rows = pricing::error_surface(
        cfg.spot,
        cfg.rate,
        &m.riskneutral,
        &m.bs,
        &cfg.moneyness_grid,
        &cfg.maturity_grid,
    )?;
    let dir = out_dir(cfg)?;
    let mut s = String::from("k,tau,error\n");
    for (k, row) in cfg.moneyness_grid.iter().zip(&rows) {
        for (tau, e) in cfg.maturity_grid.iter().zip(row) {
            writeln!(s, "{k},{tau},{e}")?;
        }
    }
    save(dir, "surface.csv", &s)?;
    save_effective(cfg, dir)?;
    println!(
        "cells {}",
        cfg.moneyness_grid.len() * cfg.maturity_grid.len()
    );
    Ok(())
}

pub fn qcalib(cfg: &RunConfig) -> anyhow::Result<()> {
    if cfg.moneyness_grid.is_empty() {
        bail!(Usage("moneyness grid is empty".into()));
    }
    let qc = &cfg.qcalib;
    let rule = CompositeRule::new(0.0, qc.rule_upper, qc.rule_subintervals)?;
    let grid = XGrid {
        half_width: qc.half_width,
        points: qc.points,
    };
    if grid.points == 0 || !(qc.curve_step > 0.0) || qc.sample_points < 2 {
        bail!(Usage("qcalib needs positive point counts and steps".into()));
    }
    let optima = cfg
        .moneyness_grid
        .iter()
        .map(|&k| pricing::optimal_q(k, (qc.q_low, qc.q_high), qc.scan_step, &grid, &rule))
        .collect::<gts_pricing::Result<Vec<_>>>()?;

    let n_curve = ((qc.q_high - qc.q_low) / qc.curve_step).floor() as usize;
    let curve_qs: Vec<f64> = (0..=n_curve)
        .map(|i| qc.q_low + i as f64 * qc.curve_step)
        .collect();
    let jobs: Vec<(f64, f64)> = cfg
        .moneyness_grid
        .iter()
        .flat_map(|&k| curve_qs.iter().map(move |&q| (k, q)))
        .collect();
    let curve = jobs
        .par_iter()
        .map(|&(k, q)| pricing::payoff_error(k, q, &grid, &rule))
        .collect::<gts_pricing::Result<Vec<f64>>>()?;

    let dir = out_dir(cfg)?;
    let mut s = String::from("k,q_opt,er_min,interior\n");
    for (k, o) in cfg.moneyness_grid.iter().zip(&optima) {
        writeln!(s, "{k},{},{},{}", o.q, o.er, o.interior)?;
    }
    save(dir, "qcalib.csv", &s)?;

    let mut s = String::from("k,q,er\n");
    for ((k, q), er) in jobs.iter().zip(&curve) {
        writeln!(s, "{k},{q},{er}")?;
    }
    save(dir, "er_curve.csv", &s)?;

    let xs: Vec<f64> = (0..qc.sample_points)
        .map(|j| -qc.half_width + 2.0 * qc.half_width * j as f64 / (qc.sample_points - 1) as f64)
        .collect();
    let mut s = String::from("k,q,x,payoff,reconstruction\n");
    for (&k, o) in cfg.moneyness_grid.iter().zip(&optima) {
        for &q in std::iter::once(&o.q).chain(&qc.compare_q) {
            let rec = xs
                .par_iter()
                .map(|&x| pricing::payoff_inverse_fourier(x, k, q, &rule))
                .collect::<gts_pricing::Result<Vec<f64>>>()?;
            for (x, r) in xs.iter().zip(rec) {
                writeln!(s, "{k},{q},{x},{},{r}", (x.exp() - k).max(0.0))?;
            }
        }
    }
    save(dir, "reconstruction.csv", &s)?;
    save_effective(cfg, dir)?;
    for (k, o) in cfg.moneyness_grid.iter().zip(&optima) {
        println!("k {k} q_opt {:.4} er_min {:.3e}", o.q, o.er);
    }
    Ok(())
}

pub fn density(cfg: &RunConfig) -> anyhow::Result<()> {
    let d = &cfg.density;
    if d.maturities.is_empty() || d.stride == 0 {
        bail!(Usage(
            "density needs maturities and a positive stride".into()
        ));
    }
    let params = if d.riskneutral {
        measures(cfg)?.riskneutral.shifted
    } else {
        physical_params(cfg)?
    };
    let mut s = String::from("tau,x,density\n");
    for &tau in &d.maturities {
        let config = FrftConfig::auto(&params, tau)?;
        let grid = density_grid(&params, tau, &config)
            .map_err(|e| anyhow!(e))
            .with_context(|| format!("density at tau = {tau}"))?
            .downsample(d.stride);
        for (x, v) in grid.xs().zip(grid.values()) {
            writeln!(s, "{tau},{x},{v}")?;
        }
    }
    let dir = out_dir(cfg)?;
    save(dir, "density.csv", &s)?;
    save_effective(cfg, dir)?;
    println!("maturities {}", d.maturities.len());
    Ok(())
}
