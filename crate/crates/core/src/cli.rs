//! Command-line front end.
//!
//! Jobs are described by a single JSON document (file or stdin), optionally
//! patched with repeatable `--set key=value` flags, and run as one of four
//! subcommands: `solve` (one point), `scan` (a parameter sweep), `converge`
//! (truncation-order study at one point) and `stability` (Hurwitz map over
//! a 1D or 2D grid). Results are emitted as RFC-4180 CSV, or as JSON with
//! run metadata under `--json`.
//!
//! Exit codes: 0 success, 1 config error, 2 instability at a requested
//! single point, 3 numerical failure.

use crate::crosscheck::{default_settle_periods, time_domain_probe, CrosscheckError};
use crate::floquet::{FloquetError, FloquetSystem, Truncation};
use crate::gaussian::{
    steady_state, to_decibels, Covariance, GaussianError, PeriodicSystem, StaticSystem,
};
use crate::models::{
    cooling_lab_frame, cooling_periodic, levitated_periodic, two_tone_periodic, CoolingParams,
    LevitatedParams, TwoToneParams,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unstable system: {0}")]
    Unstable(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Unstable(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 3,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn numerical_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cooling,
    TwoTone,
    Levitated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lab,
    Rwa,
    #[default]
    Floquet,
    TimeDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "n_f")]
    Occupation,
    #[serde(rename = "V_sq")]
    SqueezedVariance,
    #[serde(rename = "V_asq")]
    AntisqueezedVariance,
    #[serde(rename = "V_sq_db")]
    SqueezedDecibels,
    #[serde(rename = "V_asq_db")]
    AntisqueezedDecibels,
    #[serde(rename = "ratio")]
    VarianceRatio,
    #[serde(rename = "spectral_abscissa")]
    SpectralAbscissa,
    #[serde(rename = "stable")]
    Stable,
}

impl Observable {
    fn column_name(self) -> &'static str {
        match self {
            Observable::Occupation => "n_f",
            Observable::SqueezedVariance => "V_sq",
            Observable::AntisqueezedVariance => "V_asq",
            Observable::SqueezedDecibels => "V_sq_db",
            Observable::AntisqueezedDecibels => "V_asq_db",
            Observable::VarianceRatio => "ratio",
            Observable::SpectralAbscissa => "spectral_abscissa",
            Observable::Stable => "stable",
        }
    }

    /// Observables computed from the covariance; `stable` and
    /// `spectral_abscissa` are emitted as dedicated trailing columns.
    fn is_value(self) -> bool {
        !matches!(self, Observable::Stable | Observable::SpectralAbscissa)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), CliError> {
        if self.points == 0 {
            return Err(config_err("sweep needs at least one point"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(config_err("sweep bounds must be finite"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(config_err("log-scale sweep bounds must be positive"));
        }
        Ok(())
    }

    /// Endpoint-inclusive grid; the last point is `stop` exactly.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        self.validate()?;
        let n = self.points;
        if n == 1 {
            return Ok(vec![self.start]);
        }
        let steps = (n - 1) as f64;
        let ratio = self.stop / self.start;
        Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    self.stop
                } else {
                    let f = i as f64 / steps;
                    match self.scale {
                        Scale::Linear => self.start + (self.stop - self.start) * f,
                        Scale::Log => self.start * ratio.powf(f),
                    }
                }
            })
            .collect())
    }
}

/// Typed parameter record of the configured model.
#[derive(Debug, Clone, Copy)]
pub enum ModelParams {
    Cooling(CoolingParams),
    TwoTone(TwoToneParams),
    Levitated(LevitatedParams),
}

impl ModelParams {
    fn from_value(kind: ModelKind, value: Value) -> Result<Self, CliError> {
        let parsed = match kind {
            ModelKind::Cooling => serde_json::from_value(value).map(ModelParams::Cooling),
            ModelKind::TwoTone => serde_json::from_value(value).map(ModelParams::TwoTone),
            ModelKind::Levitated => serde_json::from_value(value).map(ModelParams::Levitated),
        };
        parsed.map_err(|e| config_err(format!("params: {e}")))
    }

    fn to_value(self) -> Value {
        match self {
            ModelParams::Cooling(p) => serde_json::to_value(p),
            ModelParams::TwoTone(p) => serde_json::to_value(p),
            ModelParams::Levitated(p) => serde_json::to_value(p),
        }
        .expect("parameter records serialize")
    }

    fn validate(&self) -> Result<(), CliError> {
        match self {
            ModelParams::Cooling(p) => p.validate(),
            ModelParams::TwoTone(p) => p.validate(),
            ModelParams::Levitated(p) => p.validate(),
        }
        .map_err(config_err)
    }

    /// Overwrites one named parameter; sweep plumbing.
    pub fn set(&mut self, field: &str, value: f64) -> Result<(), CliError> {
        let slot = match self {
            ModelParams::Cooling(p) => match field {
                "g" => &mut p.g,
                "kappa" => &mut p.kappa,
                "gamma" => &mut p.gamma,
                "nbar" => &mut p.nbar,
                "delta" => &mut p.delta,
                _ => {
                    return Err(config_err(format!(
                        "cooling has no parameter '{field}' (expected g, kappa, gamma, nbar or delta)"
                    )))
                }
            },
            ModelParams::TwoTone(p) => match field {
                "g_minus" => &mut p.g_minus,
                "g_plus" => &mut p.g_plus,
                "kappa" => &mut p.kappa,
                "gamma" => &mut p.gamma,
                "nbar" => &mut p.nbar,
                _ => {
                    return Err(config_err(format!(
                        "two_tone has no parameter '{field}' (expected g_minus, g_plus, kappa, gamma or nbar)"
                    )))
                }
            },
            ModelParams::Levitated(p) => match field {
                "g" => &mut p.g,
                "alpha" => &mut p.alpha,
                "kappa" => &mut p.kappa,
                "gamma" => &mut p.gamma,
                "nbar" => &mut p.nbar,
                _ => {
                    return Err(config_err(format!(
                        "levitated has no parameter '{field}' (expected g, alpha, kappa, gamma or nbar)"
                    )))
                }
            },
        };
        *slot = value;
        Ok(())
    }

    fn has_field(&self, field: &str) -> bool {
        let mut probe = *self;
        probe.set(field, 0.0).is_ok()
    }

    fn gamma(&self) -> f64 {
        match self {
            ModelParams::Cooling(p) => p.gamma,
            ModelParams::TwoTone(p) => p.gamma,
            ModelParams::Levitated(p) => p.gamma,
        }
    }

    /// Truncation order covering the stored harmonics plus one guard order.
    fn default_truncation(&self) -> usize {
        match self {
            ModelParams::Cooling(_) => 1,
            ModelParams::TwoTone(_) => 2,
            ModelParams::Levitated(_) => 3,
        }
    }

    fn periodic(&self) -> PeriodicSystem {
        match self {
            ModelParams::Cooling(p) => cooling_periodic(p),
            ModelParams::TwoTone(p) => two_tone_periodic(p),
            ModelParams::Levitated(p) => levitated_periodic(p),
        }
    }
}

fn default_observables() -> Vec<Observable> {
    vec![Observable::Occupation]
}

fn default_k_max() -> usize {
    6
}

fn default_rtol() -> f64 {
    1e-3
}

fn default_samples() -> usize {
    16
}

/// On-disk shape of a job description; `params` stays untyped until the
/// model is known.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelKind,
    params: Value,
    #[serde(default)]
    method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep2: Option<SweepSpec>,
    #[serde(default = "default_observables")]
    observables: Vec<Observable>,
    #[serde(default = "default_k_max")]
    k_max: usize,
    #[serde(default = "default_rtol")]
    rtol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    settle_periods: Option<usize>,
    #[serde(default = "default_samples")]
    samples: usize,
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub method: Method,
    pub truncation: Option<usize>,
    pub sweep: Option<SweepSpec>,
    pub sweep2: Option<SweepSpec>,
    pub observables: Vec<Observable>,
    pub k_max: usize,
    pub rtol: f64,
    pub settle_periods: Option<usize>,
    pub samples: usize,
}

impl JobConfig {
    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_value(value).map_err(|e| config_err(e.to_string()))?;
        let params = ModelParams::from_value(raw.model, raw.params)?;
        let cfg = JobConfig {
            model: raw.model,
            params,
            method: raw.method,
            truncation: raw.truncation,
            sweep: raw.sweep,
            sweep2: raw.sweep2,
            observables: raw.observables,
            k_max: raw.k_max,
            rtol: raw.rtol,
            settle_periods: raw.settle_periods,
            samples: raw.samples,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        if self.method == Method::Lab && self.model != ModelKind::Cooling {
            return Err(config_err(
                "method 'lab' is only defined for the cooling model",
            ));
        }
        for (name, sweep) in [("sweep", &self.sweep), ("sweep2", &self.sweep2)] {
            if let Some(s) = sweep {
                s.validate()?;
                if !self.params.has_field(&s.variable) {
                    return Err(config_err(format!(
                        "{name} variable '{}' is not a parameter of this model",
                        s.variable
                    )));
                }
            }
        }
        if let (Some(a), Some(b)) = (&self.sweep, &self.sweep2) {
            if a.variable == b.variable {
                return Err(config_err("sweep and sweep2 must use different variables"));
            }
        }
        if self.sweep2.is_some() && self.sweep.is_none() {
            return Err(config_err("sweep2 requires sweep"));
        }
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(config_err(format!(
                "rtol must be positive and finite, got {}",
                self.rtol
            )));
        }
        if self.samples == 0 {
            return Err(config_err("samples must be at least 1"));
        }
        Ok(())
    }

    /// Resolved truncation order for sector-embedding solves.
    pub fn effective_truncation(&self) -> usize {
        self.truncation
            .unwrap_or_else(|| self.params.default_truncation())
    }

    /// Re-serializes the effective config; parsing the result yields an
    /// equivalent job.
    pub fn echo(&self) -> Value {
        serde_json::to_value(RawConfig {
            model: self.model,
            params: self.params.to_value(),
            method: self.method,
            truncation: self.truncation,
            sweep: self.sweep.clone(),
            sweep2: self.sweep2.clone(),
            observables: self.observables.clone(),
            k_max: self.k_max,
            rtol: self.rtol,
            settle_periods: self.settle_periods,
            samples: self.samples,
        })
        .expect("config serializes")
    }
}

/// One table cell; `Empty` renders as an empty CSV field or JSON null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => format!("{v}"),
            Cell::Bool(v) => format!("{v}"),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(v)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(v),
            Cell::Bool(v) => Value::from(v),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub config: Value,
    pub workers: usize,
    pub wall_time_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub onset: Option<f64>,
}

impl Metadata {
    fn new(cfg: &JobConfig) -> Self {
        Metadata {
            config: cfg.echo(),
            workers: 1,
            wall_time_ms: 0,
            truncation: None,
            max_residual: None,
            converged: None,
            converged_at: None,
            onset: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Metadata,
}

/// Outcome of one solver invocation at one parameter point.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub stable: bool,
    pub spectral_abscissa: f64,
    pub covariance: Option<Covariance>,
    pub residual: Option<f64>,
}

impl PointEval {
    fn unstable(spectral_abscissa: f64) -> Self {
        PointEval {
            stable: false,
            spectral_abscissa,
            covariance: None,
            residual: None,
        }
    }
}

fn lab_system(params: &ModelParams) -> Result<StaticSystem, CliError> {
    match params {
        ModelParams::Cooling(p) => Ok(cooling_lab_frame(p)),
        _ => Err(config_err(
            "method 'lab' is only defined for the cooling model",
        )),
    }
}

fn static_eval(sys: &StaticSystem) -> Result<PointEval, CliError> {
    let abscissa = sys.spectral_abscissa().map_err(numerical_err)?;
    if abscissa >= 0.0 {
        return Ok(PointEval::unstable(abscissa));
    }
    let cov = match steady_state(sys) {
        Ok(cov) => cov,
        Err(GaussianError::Unstable { spectral_abscissa }) => {
            return Ok(PointEval::unstable(spectral_abscissa))
        }
        Err(e) => return Err(numerical_err(e)),
    };
    let residual =
        (sys.drift() * cov.gamma() + cov.gamma() * sys.drift().transpose() + sys.diffusion())
            .norm();
    Ok(PointEval {
        stable: true,
        spectral_abscissa: abscissa,
        covariance: Some(cov),
        residual: Some(residual),
    })
}

/// Runs the configured method at one parameter point.
pub fn evaluate_point(cfg: &JobConfig, params: &ModelParams) -> Result<PointEval, CliError> {
    params.validate()?;
    match cfg.method {
        Method::Lab => static_eval(&lab_system(params)?),
        Method::Rwa => static_eval(&params.periodic().static_part()),
        Method::Floquet => {
            let fs = FloquetSystem::build(&params.periodic(), Truncation::new(cfg.effective_truncation()));
            let abscissa = fs.spectral_abscissa().map_err(numerical_err)?;
            if abscissa >= 0.0 {
                return Ok(PointEval::unstable(abscissa));
            }
            match fs.solve_steady() {
                Ok(fc) => Ok(PointEval {
                    stable: true,
                    spectral_abscissa: abscissa,
                    covariance: Some(fc.dc_covariance().map_err(numerical_err)?),
                    residual: Some(fc.residual_norm()),
                }),
                Err(FloquetError::Unstable {
                    spectral_abscissa, ..
                }) => Ok(PointEval::unstable(spectral_abscissa)),
                Err(e) => Err(numerical_err(e)),
            }
        }
        Method::TimeDomain => {
            let sys = params.periodic();
            let periods = cfg
                .settle_periods
                .unwrap_or_else(|| default_settle_periods(params.gamma(), sys.period()));
            let guard = FloquetSystem::build(&sys, Truncation::new(sys.max_harmonic() + 1));
            let abscissa = guard.spectral_abscissa().map_err(numerical_err)?;
            match time_domain_probe(&sys, periods, cfg.samples) {
                Ok(probe) => Ok(PointEval {
                    stable: true,
                    spectral_abscissa: abscissa,
                    covariance: Some(probe.average_covariance().map_err(numerical_err)?),
                    residual: None,
                }),
                Err(CrosscheckError::Floquet(FloquetError::Unstable {
                    spectral_abscissa, ..
                })) => Ok(PointEval::unstable(spectral_abscissa)),
                Err(e) => Err(numerical_err(e)),
            }
        }
    }
}

/// Hurwitz verdict plus spectral abscissa, without solving for the
/// covariance.
fn verdict_point(cfg: &JobConfig, params: &ModelParams) -> Result<(bool, f64), CliError> {
    params.validate()?;
    let abscissa = match cfg.method {
        Method::Lab => lab_system(params)?.spectral_abscissa().map_err(numerical_err)?,
        Method::Rwa => params
            .periodic()
            .static_part()
            .spectral_abscissa()
            .map_err(numerical_err)?,
        Method::Floquet => {
            FloquetSystem::build(&params.periodic(), Truncation::new(cfg.effective_truncation()))
                .spectral_abscissa()
                .map_err(numerical_err)?
        }
        Method::TimeDomain => {
            return Err(config_err(
                "stability maps need method 'lab', 'rwa' or 'floquet'",
            ))
        }
    };
    Ok((abscissa < 0.0, abscissa))
}

fn compute_observable(obs: Observable, cov: &Covariance) -> Result<f64, CliError> {
    let value = match obs {
        Observable::Occupation => cov.occupation(1).map_err(numerical_err)?,
        Observable::SqueezedVariance => cov.squeezing_variances(1).map_err(numerical_err)?.0,
        Observable::AntisqueezedVariance => cov.squeezing_variances(1).map_err(numerical_err)?.1,
        Observable::SqueezedDecibels => {
            let (v_sq, _) = cov.squeezing_variances(1).map_err(numerical_err)?;
            to_decibels(v_sq).map_err(numerical_err)?
        }
        Observable::AntisqueezedDecibels => {
            // Reported as decibels above vacuum, so antisqueezing is positive.
            let (_, v_asq) = cov.squeezing_variances(1).map_err(numerical_err)?;
            -to_decibels(v_asq).map_err(numerical_err)?
        }
        Observable::VarianceRatio => {
            let (v_sq, v_asq) = cov.squeezing_variances(1).map_err(numerical_err)?;
            v_sq / v_asq
        }
        Observable::Stable | Observable::SpectralAbscissa => {
            unreachable!("flag observables are dedicated columns")
        }
    };
    Ok(value)
}

fn value_observables(cfg: &JobConfig) -> Vec<Observable> {
    cfg.observables
        .iter()
        .copied()
        .filter(|o| o.is_value())
        .collect()
}

fn wants_abscissa(cfg: &JobConfig) -> bool {
    cfg.observables.contains(&Observable::SpectralAbscissa)
}

/// Column layout shared by all commands: sweep variables first, then the
/// covariance observables in config order, then `stable`, then
/// `spectral_abscissa` when requested.
fn table_columns(cfg: &JobConfig, prefix: &[&str]) -> Vec<String> {
    let mut cols: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    cols.extend(value_observables(cfg).iter().map(|o| o.column_name().to_string()));
    cols.push("stable".into());
    if wants_abscissa(cfg) {
        cols.push("spectral_abscissa".into());
    }
    cols
}

fn eval_row(cfg: &JobConfig, prefix: Vec<Cell>, eval: &PointEval) -> Result<Vec<Cell>, CliError> {
    let mut row = prefix;
    for obs in value_observables(cfg) {
        row.push(match &eval.covariance {
            Some(cov) => Cell::Float(compute_observable(obs, cov)?),
            None => Cell::Empty,
        });
    }
    row.push(Cell::Bool(eval.stable));
    if wants_abscissa(cfg) {
        row.push(Cell::Float(eval.spectral_abscissa));
    }
    Ok(row)
}

fn max_residual(evals: &[PointEval]) -> Option<f64> {
    evals
        .iter()
        .filter_map(|e| e.residual)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
}

fn parallel_map<I, T, F>(workers: usize, items: &[I], f: F) -> Result<Vec<T>, CliError>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T, CliError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| numerical_err(format!("cannot build worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// Single-point solve. Exit code 2 when the point is unstable.
pub fn cmd_solve(cfg: &JobConfig) -> Result<(ResultTable, i32), CliError> {
    if cfg.sweep.is_some() || cfg.sweep2.is_some() {
        return Err(config_err("solve takes no sweep; use scan"));
    }
    let eval = evaluate_point(cfg, &cfg.params)?;
    let mut metadata = Metadata::new(cfg);
    if cfg.method == Method::Floquet {
        metadata.truncation = Some(cfg.effective_truncation());
    }
    metadata.max_residual = eval.residual;
    let table = ResultTable {
        columns: table_columns(cfg, &[]),
        rows: vec![eval_row(cfg, Vec::new(), &eval)?],
        metadata,
    };
    let exit = if eval.stable { 0 } else { 2 };
    Ok((table, exit))
}

/// Sweep over one parameter. Rows are emitted in grid order regardless of
/// the worker count; unstable points carry the flag, not an error.
pub fn cmd_scan(cfg: &JobConfig, workers: usize) -> Result<(ResultTable, i32), CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| config_err("scan requires a sweep"))?;
    if cfg.sweep2.is_some() {
        return Err(config_err("sweep2 is only valid for stability"));
    }
    let grid = sweep.grid()?;
    let evals = parallel_map(workers, &grid, |&v| {
        let mut params = cfg.params;
        params.set(&sweep.variable, v)?;
        evaluate_point(cfg, &params)
    })?;
    let mut rows = Vec::with_capacity(grid.len());
    for (v, eval) in grid.iter().zip(&evals) {
        rows.push(eval_row(cfg, vec![Cell::Float(*v)], eval)?);
    }
    let mut metadata = Metadata::new(cfg);
    if cfg.method == Method::Floquet {
        metadata.truncation = Some(cfg.effective_truncation());
    }
    metadata.max_residual = max_residual(&evals);
    Ok((
        ResultTable {
            columns: table_columns(cfg, &[sweep.variable.as_str()]),
            rows,
            metadata,
        },
        0,
    ))
}

/// Truncation-order study at a single parameter point: one row per order
/// `K = 0..=k_max`, convergence verdict in the metadata. The first
/// covariance observable in the config drives the convergence rule, which
/// matches `floquet::converge`: stop at the first `K` with
/// `|v(K) - v(K-1)| <= rtol * |v(K)|`, both orders stable.
pub fn cmd_converge(cfg: &JobConfig) -> Result<(ResultTable, i32), CliError> {
    if cfg.method != Method::Floquet {
        return Err(config_err("converge requires method 'floquet'"));
    }
    if cfg.sweep.is_some() || cfg.sweep2.is_some() {
        return Err(config_err("converge takes no sweep"));
    }
    if cfg.k_max < 1 {
        return Err(config_err("k_max must be at least 1"));
    }
    let target = *value_observables(cfg)
        .first()
        .ok_or_else(|| config_err("converge needs at least one covariance observable"))?;

    let mut rows = Vec::with_capacity(cfg.k_max + 1);
    let mut targets: Vec<Option<f64>> = Vec::with_capacity(cfg.k_max + 1);
    let mut evals = Vec::with_capacity(cfg.k_max + 1);
    for k in 0..=cfg.k_max {
        let mut sub = cfg.clone();
        sub.truncation = Some(k);
        let eval = evaluate_point(&sub, &cfg.params)?;
        targets.push(match &eval.covariance {
            Some(cov) => Some(compute_observable(target, cov)?),
            None => None,
        });
        rows.push(eval_row(cfg, vec![Cell::Int(k as u64)], &eval)?);
        evals.push(eval);
    }
    let converged_at = (1..targets.len()).find(|&k| {
        matches!(
            (targets[k - 1], targets[k]),
            (Some(prev), Some(cur)) if (cur - prev).abs() <= cfg.rtol * cur.abs()
        )
    });

    let mut columns = vec!["K".to_string()];
    columns.extend(table_columns(cfg, &[]));
    let mut metadata = Metadata::new(cfg);
    metadata.max_residual = max_residual(&evals);
    metadata.converged = Some(converged_at.is_some());
    metadata.converged_at = converged_at;
    Ok((
        ResultTable {
            columns,
            rows,
            metadata,
        },
        0,
    ))
}

fn bisect_onset<F>(mut lo: f64, mut hi: f64, lo_stable: bool, verdict: F) -> Result<f64, CliError>
where
    F: Fn(f64) -> Result<bool, CliError>,
{
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while (hi - lo).abs() > 1e-4 * scale {
        let mid = 0.5 * (lo + hi);
        if verdict(mid)? == lo_stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hurwitz map over a 1D or 2D parameter grid. For 1D sweeps the first
/// stability flip along the grid is refined by bisection to 1e-4 relative
/// and reported in the metadata.
pub fn cmd_stability(cfg: &JobConfig, workers: usize) -> Result<(ResultTable, i32), CliError> {
    if !matches!(cfg.method, Method::Lab | Method::Rwa | Method::Floquet) {
        return Err(config_err(
            "stability maps need method 'lab', 'rwa' or 'floquet'",
        ));
    }
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| config_err("stability requires a sweep"))?;
    let grid = sweep.grid()?;

    let mut metadata = Metadata::new(cfg);
    if cfg.method == Method::Floquet {
        metadata.truncation = Some(cfg.effective_truncation());
    }

    let (columns, rows) = if let Some(sweep2) = &cfg.sweep2 {
        let grid2 = sweep2.grid()?;
        let pairs: Vec<(f64, f64)> = grid
            .iter()
            .flat_map(|&a| grid2.iter().map(move |&b| (a, b)))
            .collect();
        let verdicts = parallel_map(workers, &pairs, |&(a, b)| {
            let mut params = cfg.params;
            params.set(&sweep.variable, a)?;
            params.set(&sweep2.variable, b)?;
            verdict_point(cfg, &params)
        })?;
        let rows = pairs
            .iter()
            .zip(&verdicts)
            .map(|(&(a, b), &(stable, abscissa))| {
                vec![
                    Cell::Float(a),
                    Cell::Float(b),
                    Cell::Bool(stable),
                    Cell::Float(abscissa),
                ]
            })
            .collect();
        let columns = vec![
            sweep.variable.clone(),
            sweep2.variable.clone(),
            "stable".to_string(),
            "spectral_abscissa".to_string(),
        ];
        (columns, rows)
    } else {
        let verdicts = parallel_map(workers, &grid, |&v| {
            let mut params = cfg.params;
            params.set(&sweep.variable, v)?;
            verdict_point(cfg, &params)
        })?;
        if let Some(flip) = (1..verdicts.len()).find(|&i| verdicts[i].0 != verdicts[i - 1].0) {
            metadata.onset = Some(bisect_onset(
                grid[flip - 1],
                grid[flip],
                verdicts[flip - 1].0,
                |v| {
                    let mut params = cfg.params;
                    params.set(&sweep.variable, v)?;
                    Ok(verdict_point(cfg, &params)?.0)
                },
            )?);
        }
        let rows = grid
            .iter()
            .zip(&verdicts)
            .map(|(&v, &(stable, abscissa))| {
                vec![Cell::Float(v), Cell::Bool(stable), Cell::Float(abscissa)]
            })
            .collect();
        let columns = vec![
            sweep.variable.clone(),
            "stable".to_string(),
            "spectral_abscissa".to_string(),
        ];
        (columns, rows)
    };

    Ok((
        ResultTable {
            columns,
            rows,
            metadata,
        },
        0,
    ))
}

/// CSV bytes: header row plus one record per row, RFC-4180 quoting, floats
/// in shortest round-trip form. No metadata, so output is byte-identical
/// for identical configs regardless of worker count.
pub fn render_csv(table: &ResultTable) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(&table.columns)
        .map_err(numerical_err)?;
    for row in &table.rows {
        writer
            .write_record(row.iter().map(Cell::render))
            .map_err(numerical_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| numerical_err(format!("csv flush: {e}")))
}

/// JSON bytes: same tabular content plus run metadata.
pub fn render_json(table: &ResultTable) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| Value::from(row.iter().map(|c| c.to_json()).collect::<Vec<_>>()))
        .collect();
    let doc = serde_json::json!({
        "columns": table.columns,
        "rows": rows,
        "metadata": table.metadata,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(numerical_err)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Parser)]
#[command(
    name = "floqlyap",
    version,
    about = "Steady-state covariance solver for periodically driven linear Gaussian systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a single parameter point and print its observables.
    Solve(JobArgs),
    /// Sweep one parameter and print one row per grid point.
    Scan(JobArgs),
    /// Re-solve one point at truncation orders 0..=k_max.
    Converge(JobArgs),
    /// Map Hurwitz stability over a 1D or 2D parameter grid.
    Stability(JobArgs),
}

#[derive(Debug, Args)]
struct JobArgs {
    /// JSON job description; read from stdin when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config field, e.g. --set params.g=0.3 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write output to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit JSON with metadata instead of CSV.
    #[arg(long)]
    json: bool,
    /// Worker threads for sweeps; falls back to FLOQUET_WORKERS, then to
    /// the available parallelism.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

fn load_config_value(path: &Option<PathBuf>) -> Result<Value, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| config_err(format!("cannot read config from stdin: {e}")))?;
            buf
        }
    };
    serde_json::from_str(&text).map_err(|e| config_err(format!("config is not valid JSON: {e}")))
}

/// Applies one `--set key=value` patch to the raw config. Dotted keys
/// descend into (and create) nested objects; values parse as JSON scalars
/// with a bare-string fallback.
pub fn apply_set(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("--set expects KEY=VALUE, got '{spec}'")))?;
    if path.is_empty() {
        return Err(config_err(format!("--set expects a key, got '{spec}'")));
    }
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = path.split('.').collect();
    let (last, parents) = segments.split_last().expect("split on non-empty path");
    let mut cursor = root;
    for (i, seg) in parents.iter().enumerate() {
        let obj = cursor.as_object_mut().ok_or_else(|| {
            config_err(format!(
                "--set path '{path}': '{}' is not an object",
                segments[..=i].join(".")
            ))
        })?;
        cursor = obj
            .entry(seg.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    cursor
        .as_object_mut()
        .ok_or_else(|| {
            config_err(format!(
                "--set path '{path}': parent of '{last}' is not an object"
            ))
        })?
        .insert(last.to_string(), value);
    Ok(())
}

fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
    let workers = match flag {
        Some(n) => n,
        None => match std::env::var("FLOQUET_WORKERS") {
            Ok(s) => s
                .parse::<usize>()
                .map_err(|_| config_err(format!("FLOQUET_WORKERS must be an integer, got '{s}'")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if workers == 0 {
        return Err(config_err("worker count must be at least 1"));
    }
    Ok(workers)
}

fn write_output(bytes: &[u8], out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let args = match &cli.command {
        Command::Solve(a) | Command::Scan(a) | Command::Converge(a) | Command::Stability(a) => a,
    };
    let mut value = load_config_value(&args.config)?;
    for spec in &args.set {
        apply_set(&mut value, spec)?;
    }
    let cfg = JobConfig::from_value(value)?;
    let workers = resolve_workers(args.workers)?;
    let start = Instant::now();
    let (mut table, exit) = match &cli.command {
        Command::Solve(_) => cmd_solve(&cfg)?,
        Command::Scan(_) => cmd_scan(&cfg, workers)?,
        Command::Converge(_) => cmd_converge(&cfg)?,
        Command::Stability(_) => cmd_stability(&cfg, workers)?,
    };
    table.metadata.workers = workers;
    table.metadata.wall_time_ms = start.elapsed().as_millis();
    let bytes = if args.json {
        render_json(&table)?
    } else {
        render_csv(&table)?
    };
    write_output(&bytes, &args.out)?;
    Ok(exit)
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; they are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
