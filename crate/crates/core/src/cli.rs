//! Experiment harness behind the `hypam` binary.
//!
//! Configuration is a flat TOML table ([`RunConfig`]); every key has a default
//! and can be overridden by an environment variable `HYPAM_<KEY>` (upper case),
//! and `--seed` / `--out` override the file and environment. A previous run's
//! `<cmd>.manifest.json` is also accepted as `--config`.
//!
//! Each subcommand writes `<out>/<cmd>.csv` and `<out>/<cmd>.manifest.json`.
//! Exit status: 0 success, 2 constraint violation, 3 budget exceeded, 1 other.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fkmc::{self, FkMode, LocalizedSpec, PlantedPeak};
use crate::gaussfield::{self, cluster_constants, make_spec, BumpShape, CovarianceSpec};
use crate::heatkernel::{self, CalibrationGrid};
use crate::hypbm::{self, ExitMode};
use crate::hypgeo::HPoint;
use crate::rng;
use crate::stats::{linear_fit, MeanVar};
use crate::varopt::{self, ModelParams};

pub const ENV_PREFIX: &str = "HYPAM_";

/// Resolved run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: usize,
    pub sigma2: f64,
    pub r0: f64,
    /// `poly<N>` (N ≥ 3) or `exp`.
    pub kernel: String,
    pub t: f64,
    pub dt: f64,
    pub n_paths: usize,
    /// `quenched` or `annealed`.
    pub mode: String,
    pub seed: u64,
    pub out: String,
    pub site_cap: usize,

    pub delta: f64,
    pub eta: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// Defaults to `1.1·μ₀`.
    pub mu: Option<f64>,
    pub k0: f64,
    pub c_hat: f64,

    pub r_list: Vec<f64>,
    pub spacing: f64,
    pub n_reps: usize,
    pub mus: Vec<f64>,
    pub region_radius: f64,

    /// `plain` or `tilted`.
    pub exit_mode: String,
    pub exit_r_list: Vec<f64>,
    pub exit_t: f64,

    pub bridge_distance: f64,
    pub bridge_delta: f64,
    pub s_list: Vec<f64>,
    pub steps: usize,

    pub energy_k_star: f64,
    pub energy_delta: f64,
    pub energy_eta: f64,
    pub zeta: f64,
    pub n_trials: usize,

    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub rho_max: f64,
    pub n_rho: usize,
    pub ratio_cap: f64,

    pub eps: f64,
    pub tube: f64,
    pub peak_distance: f64,
    pub peak_radius: f64,
    pub peak_height: f64,

    pub budget_t: f64,
    pub budget_t_list: Vec<f64>,
    pub n_geometries: usize,
    pub max_route_len: usize,
    pub n_labels: usize,

    pub tail_eta: f64,
    pub tail_n_list: Vec<usize>,
    pub tail_t_list: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 2,
            sigma2: 1.0,
            r0: 1.0,
            kernel: "poly3".into(),
            t: 1.0,
            dt: 0.01,
            n_paths: 1000,
            mode: "quenched".into(),
            seed: 1,
            out: "out".into(),
            site_cap: 20_000,
            delta: 15.0,
            eta: 1.36,
            lambda: 0.01,
            alpha: 0.1,
            mu: None,
            k0: 16.0,
            c_hat: 1.0,
            r_list: vec![1.0, 2.0],
            spacing: 0.25,
            n_reps: 50,
            mus: vec![1.0, 1.5, 2.0],
            region_radius: 3.0,
            exit_mode: "tilted".into(),
            exit_r_list: vec![8.0, 10.0, 12.0],
            exit_t: 2.0,
            bridge_distance: 1.0,
            bridge_delta: 0.8,
            s_list: vec![0.4, 0.2, 0.1, 0.05],
            steps: 50,
            energy_k_star: 1.0,
            energy_delta: 0.5,
            energy_eta: 0.02,
            zeta: 0.001,
            n_trials: 16,
            t_min: 0.1,
            t_max: 10.0,
            n_t: 25,
            rho_max: 20.0,
            n_rho: 81,
            ratio_cap: 100.0,
            eps: 0.2,
            tube: 1.0,
            peak_distance: 1.0,
            peak_radius: 1.0,
            peak_height: 2.0,
            budget_t: 20.0,
            budget_t_list: vec![10.0, 20.0, 40.0],
            n_geometries: 1000,
            max_route_len: 6,
            n_labels: 3,
            tail_eta: 0.3,
            tail_n_list: vec![1, 2, 4, 8],
            tail_t_list: vec![10.0, 20.0, 40.0],
        }
    }
}

impl RunConfig {
    /// Parse a TOML document, or the `config` object of a JSON manifest.
    pub fn parse(text: &str, json_manifest: bool) -> Result<Self> {
        if json_manifest {
            let v: Value = serde_json::from_str(text)?;
            let c = v.get("config").cloned().ok_or_else(|| Error::Config("manifest has no `config` object".into()))?;
            return serde_json::from_value(c).map_err(|e| Error::Config(format!("manifest config: {e}")));
        }
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Defaults ← file ← `HYPAM_<KEY>` environment variables.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let is_json = p.extension().is_some_and(|e| e == "json");
                let cfg = Self::parse(&text, is_json)?;
                toml::Table::try_from(&cfg).map_err(|e| Error::Config(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        let keys = toml::Table::try_from(Self::default()).map_err(|e| Error::Config(e.to_string()))?;
        for key in keys.keys().map(String::as_str).chain(["mu"]) {
            let var = format!("{ENV_PREFIX}{}", key.to_uppercase());
            if let Ok(raw) = std::env::var(&var) {
                let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                    .ok()
                    .and_then(|mut t| t.remove("v"))
                    .unwrap_or(toml::Value::String(raw.clone()));
                table.insert(key.to_string(), value);
            }
        }
        let text = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("environment override: {e}")))
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.d, self.sigma2)
    }

    pub fn mu(&self) -> Result<f64> {
        Ok(self.mu.unwrap_or(1.1 * self.params()?.mu0()))
    }

    pub fn spec(&self) -> Result<Arc<CovarianceSpec>> {
        Ok(Arc::new(make_spec(self.sigma2, self.r0, BumpShape::parse(&self.kernel)?, self.d)?))
    }

    pub fn fk_mode(&self) -> Result<FkMode> {
        match self.mode.as_str() {
            "quenched" => Ok(FkMode::Quenched),
            "annealed" => Ok(FkMode::Annealed),
            m => Err(Error::Config(format!("mode = '{m}' (quenched|annealed)"))),
        }
    }

    fn exit_mode(&self) -> Result<ExitMode> {
        match self.exit_mode.as_str() {
            "plain" => Ok(ExitMode::Plain),
            "tilted" => Ok(ExitMode::Tilted),
            m => Err(Error::Config(format!("exit_mode = '{m}' (plain|tilted)"))),
        }
    }

    /// Checks shared by all subcommands.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("d = {} must be at least 2", self.d)));
        }
        if !(self.dt > 0.0) || !(self.t >= 0.0) || self.n_paths == 0 {
            return Err(Error::Config(format!("t = {}, dt = {}, n_paths = {}", self.t, self.dt, self.n_paths)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} must lie in (0,1)", self.alpha)));
        }
        let (_, eta_delta) = cluster_constants(self.delta, self.d, self.k0, self.c_hat)?;
        if !(self.lambda > 0.0 && self.lambda < self.eta && self.eta < eta_delta) {
            return Err(Error::ConstraintViolation(format!(
                "eta_cond: need 0 < lambda < eta < eta_delta, got lambda = {}, eta = {}, eta_delta = {eta_delta}",
                self.lambda, self.eta
            )));
        }
        let p = self.params()?;
        if self.mu()? < p.mu0() {
            return Err(Error::Config(format!("mu = {} below mu0 = {}", self.mu()?, p.mu0())));
        }
        self.fk_mode()?;
        self.exit_mode()?;
        BumpShape::parse(&self.kernel)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form optimum of the variational functional, cross-checked numerically.
    Optimize,
    /// Exact scans of the field maximum over balls.
    FieldMaxScan,
    /// Islands and clusters of one field realization.
    Clusters,
    /// Radial law of large numbers for hyperbolic Brownian motion.
    RadialCheck,
    /// Exit probabilities of large balls and their Gaussian-tail fit.
    ExitCheck,
    /// Brownian-bridge deviation probabilities against bridge duration.
    BridgeLdp,
    /// Minimum path energy against the deviation lower bound.
    EnergyBound,
    /// Heat-kernel comparison constants.
    HkCalibrate,
    /// Feynman-Kac estimate of u(t,o).
    Fk,
    /// Localized (optimal-scenario) Feynman-Kac lower estimate.
    FkLocalized,
    /// Route-budget fuzz over synthetic route geometries.
    RouteBudget,
    /// Long-route tail integrals and exponents.
    LongRouteTail,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Optimize => "optimize",
            Command::FieldMaxScan => "field-max-scan",
            Command::Clusters => "clusters",
            Command::RadialCheck => "radial-check",
            Command::ExitCheck => "exit-check",
            Command::BridgeLdp => "bridge-ldp",
            Command::EnergyBound => "energy-bound",
            Command::HkCalibrate => "hk-calibrate",
            Command::Fk => "fk",
            Command::FkLocalized => "fk-localized",
            Command::RouteBudget => "route-budget",
            Command::LongRouteTail => "long-route-tail",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hypam", version, about = "Parabolic Anderson model on hyperbolic space: experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config, or a previous run's manifest JSON.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// CSV table; cells are pre-formatted (`f64` uses shortest round-trip decimal).
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(";")
}

/// Result of one subcommand before it is written out.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: Table,
    pub summary: Value,
}

const DESK_NOTE: &str = "desk-scale run: inequality and consistency checks with trend reports; \
the t^(5/3) long-time limit is not reached at these times";

/// Run a subcommand on a validated config.
pub fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Output> {
    cfg.validate()?;
    match cmd {
        Command::Optimize => run_optimize(cfg),
        Command::FieldMaxScan => run_max_scan(cfg),
        Command::Clusters => run_clusters(cfg),
        Command::RadialCheck => run_radial(cfg),
        Command::ExitCheck => run_exit(cfg),
        Command::BridgeLdp => run_bridge(cfg),
        Command::EnergyBound => run_energy(cfg),
        Command::HkCalibrate => run_hk(cfg),
        Command::Fk => run_fk(cfg),
        Command::FkLocalized => run_fk_localized(cfg),
        Command::RouteBudget => run_route_budget(cfg),
        Command::LongRouteTail => run_long_tail(cfg),
    }
}

fn run_optimize(cfg: &RunConfig) -> Result<Output> {
    let sol = varopt::optimize_f(&cfg.params()?)?;
    let mut t = Table::new(&["eps_star", "k_star", "l_star", "numeric_eps", "numeric_k", "numeric_value", "grid_gap"]);
    t.push(vec![
        f(sol.eps_star),
        f(sol.k_star),
        f(sol.l_star),
        f(sol.numeric.0),
        f(sol.numeric.1),
        f(sol.numeric.2),
        f(sol.grid_gap),
    ]);
    let summary = json!({
        "eps_star": sol.eps_star,
        "K_star": sol.k_star,
        "L_star": sol.l_star,
        "checks": {
            "grid_gap": sol.grid_gap,
            "gradient_norm": sol.gradient_norm,
            "numeric": { "eps": sol.numeric.0, "K": sol.numeric.1, "value": sol.numeric.2 },
        },
    });
    Ok(Output { table: t, summary })
}

fn run_max_scan(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.spec()?;
    let rows = gaussfield::max_scan(&spec, &cfg.r_list, cfg.spacing, cfg.n_reps, &cfg.mus, cfg.seed, cfg.site_cap)?;
    let mut t = Table::new(&["r", "n_sites", "n_reps", "mean_max", "se_max", "max_max", "mus", "exceed"]);
    for r in &rows {
        t.push(vec![
            f(r.r),
            r.n_sites.to_string(),
            r.n_reps.to_string(),
            f(r.mean_max),
            f(r.se_max),
            f(r.max_max),
            join(&r.mus),
            join(&r.exceed),
        ]);
    }
    let all: Vec<f64> = rows.iter().flat_map(|r| r.maxima.iter().copied()).collect();
    let e_hat = MeanVar::of(&all).mean;
    let lambdas: Vec<f64> = (1..=6).map(|k| e_hat + 0.5 * k as f64 * cfg.sigma2.sqrt()).collect();
    let borell = gaussfield::borell_check(&rows.last().map(|r| r.maxima.clone()).unwrap_or_default(), cfg.sigma2, &lambdas);
    Ok(Output { table: t, summary: json!({ "rows": rows, "borell": borell }) })
}

fn run_clusters(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.spec()?;
    let sites = gaussfield::extremes::scan_sites(
        cfg.d,
        cfg.region_radius,
        cfg.spacing,
        rng::child_seed(cfg.seed, rng::tag::PACKING, 0),
        cfg.site_cap,
    )?;
    let field = gaussfield::sample_field(&spec, &sites, rng::child_seed(cfg.seed, rng::tag::FIELD, 0))?;
    let islands = gaussfield::detect_islands(&field, cfg.delta, cfg.t, cfg.spacing)?;
    let clusters = gaussfield::build_clusters(&islands, &field.sites, cfg.eta, cfg.t)?;
    let mut t = Table::new(&["cluster_id", "n_islands", "n_sites", "diameter", "center"]);
    for c in &clusters.clusters {
        t.push(vec![c.id.to_string(), c.islands.len().to_string(), c.points.len().to_string(), f(c.diameter), join(&c.center.coords)]);
    }
    let mut summary = clusters.report_json();
    summary["n_sites"] = json!(field.len());
    summary["n_islands"] = json!(islands.len());
    summary["threshold"] = json!(islands.threshold);
    Ok(Output { table: t, summary })
}

fn run_radial(cfg: &RunConfig) -> Result<Output> {
    let radii = hypbm::radial::radial_endpoints(cfg.d, cfg.t, cfg.dt, 0.0, cfg.n_paths, cfg.seed)?;
    let mut t = Table::new(&["path_id", "r_t"]);
    for (i, r) in radii.iter().enumerate() {
        t.push(vec![i.to_string(), f(*r)]);
    }
    let mv = MeanVar::of(&radii);
    let scale = (cfg.d as f64 - 1.0) * cfg.t;
    Ok(Output {
        table: t,
        summary: json!({ "mean_r": mv.mean, "se_r": mv.se(), "ratio": mv.mean / scale, "ratio_se": mv.se() / scale }),
    })
}

fn run_exit(cfg: &RunConfig) -> Result<Output> {
    let rows = hypbm::exit_stats(cfg.d, &cfg.exit_r_list, cfg.exit_t, cfg.dt, cfg.n_paths, cfg.exit_mode()?, cfg.seed)?;
    let mut t = Table::new(&["r", "t", "p_hat", "ci_lo", "ci_hi", "se", "hits", "n", "tilt"]);
    for r in &rows {
        t.push(vec![f(r.r), f(r.t), f(r.p_hat), f(r.ci_lo), f(r.ci_hi), f(r.se), r.hits.to_string(), r.n.to_string(), f(r.tilt)]);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.p_hat > 0.0).map(|r| (r.r * r.r / r.t, r.p_hat.ln())).unzip();
    let fit = if xs.len() >= 2 { Some(linear_fit(&xs, &ys)) } else { None };
    Ok(Output { table: t, summary: json!({ "rows": rows, "fit": fit }) })
}

fn run_bridge(cfg: &RunConfig) -> Result<Output> {
    let x = HPoint::origin(cfg.d);
    let mut dir = vec![0.0; cfg.d];
    dir[0] = 1.0;
    let y = HPoint::polar(cfg.bridge_distance, &dir);
    let fit = hypbm::bridge_ldp_decay(&x, &y, cfg.bridge_delta, &cfg.s_list, cfg.n_paths, cfg.steps, cfg.seed)?;
    let mut t = Table::new(&["s", "hits", "n", "p_hat", "upper", "steps"]);
    for r in &fit.rows {
        t.push(vec![f(r.s), r.hits.to_string(), r.n.to_string(), f(r.p_hat), f(r.upper), r.steps.to_string()]);
    }
    Ok(Output { table: t, summary: serde_json::to_value(&fit)? })
}

fn run_energy(cfg: &RunConfig) -> Result<Output> {
    let r = hypbm::energy_excess_check(
        cfg.energy_k_star,
        cfg.energy_delta,
        cfg.energy_eta,
        cfg.zeta,
        cfg.d,
        cfg.n_trials,
        cfg.seed,
    )?;
    let mut t = Table::new(&["k_star", "delta", "eta", "zeta", "min_energy", "bound", "margin", "argmin_v", "argmin_phi"]);
    t.push(vec![f(r.k_star), f(r.delta), f(r.eta), f(r.zeta), f(r.min_energy), f(r.bound), f(r.margin), f(r.argmin_v), f(r.argmin_phi)]);
    Ok(Output { table: t, summary: serde_json::to_value(&r)? })
}

fn run_hk(cfg: &RunConfig) -> Result<Output> {
    let grid = CalibrationGrid { t_min: cfg.t_min, t_max: cfg.t_max, n_t: cfg.n_t, rho_max: cfg.rho_max, n_rho: cfg.n_rho };
    let cal = heatkernel::calibrate(cfg.d, &grid, cfg.ratio_cap)?;
    let mut t = Table::new(&["t", "rho", "ln_p", "ln_q", "ratio"]);
    for (tt, rho) in grid.points() {
        let lp = heatkernel::ln_exact_kernel(cfg.d, tt, rho)?;
        let lq = heatkernel::ln_comparison_fn(tt, rho, cfg.d);
        t.push(vec![f(tt), f(rho), f(lp), f(lq), f((lp - lq).exp())]);
    }
    Ok(Output { table: t, summary: serde_json::to_value(&cal)? })
}

fn fk_table(est: &fkmc::FkEstimate, words: &[String]) -> Table {
    let mut t = Table::new(&["path_id", "log_weight", "accepted", "route_word"]);
    for (i, (w, a)) in est.log_weights.iter().zip(&est.accepted).enumerate() {
        t.push(vec![i.to_string(), f(*w), a.to_string(), words.get(i).cloned().unwrap_or_default()]);
    }
    t
}

fn fk_summary(mode: &str, est: &fkmc::FkEstimate, cfg: &RunConfig) -> Value {
    json!({
        "mode": mode,
        "t": est.t,
        "dt": est.dt,
        "n_paths": est.n_paths,
        "mean": est.mean,
        "se": est.se,
        "log_mean": est.log_mean,
        "variance": est.variance,
        "n_accepted": est.n_accepted,
        "params": { "d": cfg.d, "sigma2": cfg.sigma2, "r0": cfg.r0, "kernel": cfg.kernel, "seed": cfg.seed },
        "note": DESK_NOTE,
    })
}

fn run_fk(cfg: &RunConfig) -> Result<Output> {
    let spec = cfg.spec()?;
    match cfg.fk_mode()? {
        FkMode::Annealed => {
            let est = fkmc::fk_annealed(&spec, cfg.t, cfg.dt, cfg.n_paths, cfg.seed)?;
            Ok(Output { table: fk_table(&est, &[]), summary: fk_summary("annealed", &est, cfg) })
        }
        FkMode::Quenched => {
            let (est, lazy) = fkmc::fk_quenched(&spec, cfg.t, cfg.dt, cfg.n_paths, cfg.seed, cfg.site_cap)?;
            // Routes over the clusters of the realized field.
            let mut words = Vec::new();
            let mut summary = fk_summary("quenched", &est, cfg);
            if cfg.t > 0.0 {
                let islands = gaussfield::detect_islands(&lazy.field, cfg.delta, cfg.t, lazy.snap)?;
                let clusters = gaussfield::build_clusters(&islands, &lazy.field.sites, cfg.lambda, cfg.t)?;
                for i in 0..cfg.n_paths {
                    let tr = fkmc::fk_path(cfg.d, cfg.t, cfg.dt, cfg.seed, i as u64)?;
                    words.push(fkmc::route_extract(&tr, &clusters, cfg.lambda, cfg.t).word_string());
                }
                summary["field_sites"] = json!(lazy.field.len());
                summary["n_clusters"] = json!(clusters.len());
            }
            Ok(Output { table: fk_table(&est, &words), summary })
        }
    }
}

fn run_fk_localized(cfg: &RunConfig) -> Result<Output> {
    let mut dir = vec![0.0; cfg.d];
    dir[0] = 1.0;
    let center = HPoint::polar(cfg.peak_distance, &dir);
    let mut peak = PlantedPeak { center: center.clone(), height: cfg.peak_height, radius: cfg.peak_radius };
    let spec = LocalizedSpec { eps: cfg.eps, tube: cfg.tube, peak_center: center, peak_radius: cfg.peak_radius };
    let loc = fkmc::fk_localized_lower(&mut peak, cfg.d, cfg.t, cfg.dt, cfg.n_paths, cfg.seed, &spec)?;
    let full = fkmc::fk_estimate(&mut peak, cfg.d, cfg.t, cfg.dt, cfg.n_paths, cfg.seed)?;
    let mut summary = fk_summary("localized", &loc, cfg);
    summary["unrestricted"] = json!({ "mean": full.mean, "se": full.se, "log_mean": full.log_mean });
    summary["accept_upper"] = json!(loc.accept_upper);
    Ok(Output { table: fk_table(&loc, &[]), summary })
}

fn run_route_budget(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.params()?;
    let (alpha, mu) = (cfg.alpha, cfg.mu()?);
    let rc = varopt::route_constants_checked(cfg.eta, cfg.lambda, cfg.delta, cfg.k0, &p, cfg.c_hat, alpha, mu)?;
    let mut g = rng::stream(cfg.seed, rng::tag::FUZZ, 0);
    let mut t = Table::new(&[
        "geometry_id", "m", "m_bar", "k_star", "log_j", "log_staying", "log_bound", "main_term", "error_term", "violation",
    ]);
    let (mut violations, mut finite) = (0usize, 0usize);
    for i in 0..cfg.n_geometries {
        let geo = fkmc::random_geometry(cfg.budget_t, &rc, cfg.max_route_len, cfg.n_labels, &mut g);
        let b = fkmc::route_budget(&geo, cfg.budget_t, alpha, mu, &p, &rc)?;
        let bad = b.log_staying > b.log_bound;
        violations += bad as usize;
        finite += b.log_j.is_finite() as usize;
        t.push(vec![
            i.to_string(),
            b.m.to_string(),
            b.m_bar.to_string(),
            f(geo.k_star),
            f(b.log_j),
            f(b.log_staying),
            f(b.log_bound),
            f(b.main_term),
            f(b.error_term),
            bad.to_string(),
        ]);
    }
    // J and F along the time list on a fixed scaled geometry.
    let trend: Vec<Value> = cfg
        .budget_t_list
        .iter()
        .map(|&tt| {
            let geo = scaled_geometry(tt, cfg.k0);
            match fkmc::route_budget(&geo, tt, alpha, mu, &p, &rc) {
                Ok(b) => json!({ "t": tt, "log_j": b.log_j, "log_f": b.log_f }),
                Err(e) => json!({ "t": tt, "error": e.to_string() }),
            }
        })
        .collect();
    Ok(Output {
        table: t,
        summary: json!({
            "t": cfg.budget_t,
            "n_geometries": cfg.n_geometries,
            "violations": violations,
            "finite_j": finite,
            "route_constants": rc,
            "trend": trend,
            "note": DESK_NOTE,
        }),
    })
}

/// Two-letter route `ab` entered at `0.98·K₀t^{4/3}`, furthest point in `a`, `K* = K₀`.
pub fn scaled_geometry(t: f64, k0: f64) -> fkmc::RouteGeometry {
    let t43 = t.powf(4.0 / 3.0);
    fkmc::RouteGeometry { labels: vec![0, 1], gaps: vec![0.98 * k0 * t43, 0.5 * k0 * t43], far: 1, k_star: k0 }
}

fn run_long_tail(cfg: &RunConfig) -> Result<Output> {
    let p = cfg.params()?;
    let mut t = Table::new(&["eta", "n", "t", "log_f", "log_f_closed", "exponent_coef", "log_bound", "split"]);
    let mut rows = Vec::new();
    for &n in &cfg.tail_n_list {
        for &tt in &cfg.tail_t_list {
            let r = fkmc::long_route_tail(cfg.tail_eta, n, tt, &p, cfg.k0)?;
            t.push(vec![f(r.eta), n.to_string(), f(tt), f(r.log_f), f(r.log_f_closed), f(r.exponent_coef), f(r.log_bound), r.split.to_string()]);
            rows.push(r);
        }
    }
    let n_eta = varopt::n_eta(cfg.tail_eta, p.mu0(), cfg.k0);
    Ok(Output { table: t, summary: json!({ "rows": rows, "n_eta": n_eta }) })
}

/// Write `<out>/<cmd>.csv` and `<out>/<cmd>.manifest.json`.
pub fn write_outputs(cmd: Command, cfg: &RunConfig, out: &Output) -> Result<(PathBuf, PathBuf)> {
    let dir = PathBuf::from(&cfg.out);
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}.csv", cmd.name()));
    let man_path = dir.join(format!("{}.manifest.json", cmd.name()));
    out.table.write(&csv_path)?;
    let manifest = json!({
        "subcommand": cmd.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "csv": csv_path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "summary": out.summary,
    });
    fs::write(&man_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok((csv_path, man_path))
}

fn run_cli(cli: &Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.to_string_lossy().into_owned();
    }
    if let Some(n) = cli.threads {
        // Only the first call can configure the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let out = dispatch(cli.command, &cfg)?;
    let (csv_path, man_path) = write_outputs(cli.command, &cfg, &out)?;
    println!("{}\n{}", csv_path.display(), man_path.display());
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                ErrorKind::InvalidSubcommand => {
                    let name = e
                        .get(clap::error::ContextKind::InvalidSubcommand)
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    let err = Error::UnknownSubcommand(name);
                    eprintln!("error: {err}");
                    err.exit_code()
                }
                _ => {
                    let _ = e.print();
                    1
                }
            };
        }
    };
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
