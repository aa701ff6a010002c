//! Independent cross-checks for the sector-embedding solver.
//!
//! Three routes to the same physics back each other up: the cooling model
//! has an exact lab-frame algebraic solution, every model has a
//! single-sector (rotating-wave) solve, and any stable model can be
//! integrated directly in the time domain until its covariance becomes
//! periodic. Only rotation-invariant scalars (mechanical occupation) are
//! compared across frames; frame-dependent quantities are reported as is.

use crate::floquet::{FloquetError, FloquetSystem, Truncation};
use crate::gaussian::{
    steady_state, Covariance, GaussianError, ModeLayout, PeriodicSystem, StaticSystem,
};
use crate::linalg::{default_periodic_step, integrate_lyapunov, LinalgError, Mat};
use crate::models::{cooling_lab_frame, cooling_periodic, cooling_rwa, CoolingParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrosscheckError {
    #[error("invalid argument: {0}")]
    BadArgument(String),
    #[error(
        "covariance not periodic after {periods} periods (relative change {residual:.3e})"
    )]
    NotSettled { periods: usize, residual: f64 },
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Swept parameter of the cooling comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoolingSweep {
    Kappa,
    G,
}

impl CoolingSweep {
    pub fn name(self) -> &'static str {
        match self {
            CoolingSweep::Kappa => "kappa",
            CoolingSweep::G => "g",
        }
    }

    fn apply(self, base: &CoolingParams, value: f64) -> CoolingParams {
        let mut p = *base;
        match self {
            CoolingSweep::Kappa => p.kappa = value,
            CoolingSweep::G => p.g = value,
        }
        p
    }
}

/// One method's verdict at one grid point: either a mechanical occupation
/// or an instability flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodPoint {
    pub stable: bool,
    pub value: Option<f64>,
}

impl MethodPoint {
    fn stable(value: f64) -> Self {
        Self {
            stable: true,
            value: Some(value),
        }
    }

    fn unstable() -> Self {
        Self {
            stable: false,
            value: None,
        }
    }
}

/// Index of the first grid point a method flags unstable.
pub fn first_unstable_index(points: &[MethodPoint]) -> Option<usize> {
    points.iter().position(|p| !p.stable)
}

/// Mechanical occupations of the cooling model along one parameter grid,
/// computed by three routes.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub variable: &'static str,
    pub grid: Vec<f64>,
    pub lab: Vec<MethodPoint>,
    pub rwa: Vec<MethodPoint>,
    pub floquet: Vec<MethodPoint>,
    /// Max of |floquet - lab| / |lab| over points where both are stable;
    /// `None` when no point qualifies.
    pub max_rel_discrepancy: Option<f64>,
}

fn occupation_of(cov: &Covariance) -> Result<f64, GaussianError> {
    cov.occupation(1)
}

fn static_point(sys: &StaticSystem) -> Result<MethodPoint, CrosscheckError> {
    match steady_state(sys) {
        Ok(cov) => Ok(MethodPoint::stable(occupation_of(&cov)?)),
        Err(GaussianError::Unstable { .. }) => Ok(MethodPoint::unstable()),
        Err(e) => Err(e.into()),
    }
}

fn floquet_point(sys: &PeriodicSystem, truncation: Truncation) -> Result<MethodPoint, CrosscheckError> {
    match FloquetSystem::build(sys, truncation).solve_steady() {
        Ok(cov) => Ok(MethodPoint::stable(occupation_of(&cov.dc_covariance()?)?)),
        Err(FloquetError::Unstable { .. }) => Ok(MethodPoint::unstable()),
        Err(e) => Err(e.into()),
    }
}

/// Runs the cooling model along `grid`, solving the full lab-frame drift,
/// the rotating-wave drift, and the one-harmonic sector embedding at each
/// point. Instability is a per-point verdict, not an error.
pub fn compare_cooling(
    base: &CoolingParams,
    sweep: CoolingSweep,
    grid: &[f64],
) -> Result<ComparisonReport, CrosscheckError> {
    let mut lab = Vec::with_capacity(grid.len());
    let mut rwa = Vec::with_capacity(grid.len());
    let mut floquet = Vec::with_capacity(grid.len());
    for &value in grid {
        let p = sweep.apply(base, value);
        p.validate().map_err(CrosscheckError::BadArgument)?;
        lab.push(static_point(&cooling_lab_frame(&p))?);
        rwa.push(static_point(&cooling_rwa(&p))?);
        floquet.push(floquet_point(&cooling_periodic(&p), Truncation::new(1))?);
    }
    let max_rel_discrepancy = lab
        .iter()
        .zip(&floquet)
        .filter_map(|(l, f)| match (l.value, f.value) {
            (Some(l), Some(f)) => Some((f - l).abs() / l.abs()),
            _ => None,
        })
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    Ok(ComparisonReport {
        variable: sweep.name(),
        grid: grid.to_vec(),
        lab,
        rwa,
        floquet,
        max_rel_discrepancy,
    })
}

/// Strips all drive harmonics from `sys` and solves the sector embedding
/// at order `k` and at order 0. With nothing coupling the sectors the dc
/// blocks must coincide; the returned max-abs entry difference measures
/// pure embedding overhead.
pub fn rwa_equivalence(sys: &PeriodicSystem, k: usize) -> Result<f64, CrosscheckError> {
    let stripped = sys.with_zeroed_harmonics();
    let full = FloquetSystem::build(&stripped, Truncation::new(k)).solve_steady()?;
    let rwa = FloquetSystem::build(&stripped, Truncation::new(0)).solve_steady()?;
    Ok((full.dc_covariance()?.gamma() - rwa.dc_covariance()?.gamma()).amax())
}

/// Max-abs dc-block difference between the order-`k` solve with harmonics
/// kept and the order-0 solve. Nonzero whenever the counterrotating terms
/// matter.
pub fn counterrotating_shift(sys: &PeriodicSystem, k: usize) -> Result<f64, CrosscheckError> {
    let full = FloquetSystem::build(sys, Truncation::new(k)).solve_steady()?;
    let rwa = FloquetSystem::build(sys, Truncation::new(0)).solve_steady()?;
    Ok((full.dc_covariance()?.gamma() - rwa.dc_covariance()?.gamma()).amax())
}

/// Periodic steady state found by direct time integration: covariance
/// samples over one period plus their average.
#[derive(Debug, Clone)]
pub struct PeriodicSteadyState {
    layout: ModeLayout,
    times: Vec<f64>,
    samples: Vec<Mat>,
    average: Mat,
    periods_used: usize,
}

impl PeriodicSteadyState {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Mat] {
        &self.samples
    }

    pub fn average(&self) -> &Mat {
        &self.average
    }

    /// Periods integrated before the periodicity criterion was met.
    pub fn periods_used(&self) -> usize {
        self.periods_used
    }

    pub fn sample_covariance(&self, i: usize) -> Result<Covariance, CrosscheckError> {
        let gamma = self.samples.get(i).ok_or_else(|| {
            CrosscheckError::BadArgument(format!(
                "sample index {i} out of range (have {})",
                self.samples.len()
            ))
        })?;
        Ok(Covariance::new(self.layout, gamma.clone())?)
    }

    pub fn average_covariance(&self) -> Result<Covariance, CrosscheckError> {
        Ok(Covariance::new(self.layout, self.average.clone())?)
    }
}

/// How many periods the slowest (mechanical) decay needs to flush the
/// transient, with a generous margin and a hard cap.
pub fn default_settle_periods(gamma: f64, period: f64) -> usize {
    let scale = 1.0 / (gamma * period);
    let periods = 50.0 * scale.max(1.0);
    periods.min(1e6).ceil() as usize
}

/// Integrates the covariance equation of motion from vacuum until the
/// state one period apart stops changing (relative Frobenius change below
/// 1e-8), then samples `n_samples` uniform times across one period.
///
/// Stability is checked first on the sector embedding one order above the
/// stored harmonics; unstable systems are rejected rather than integrated
/// toward the overflow guard.
pub fn time_domain_probe(
    sys: &PeriodicSystem,
    n_periods_settle: usize,
    n_samples: usize,
) -> Result<PeriodicSteadyState, CrosscheckError> {
    if n_periods_settle == 0 || n_samples == 0 {
        return Err(CrosscheckError::BadArgument(
            "need at least one settling period and one sample".into(),
        ));
    }
    let guard_order = sys.max_harmonic() + 1;
    let embedded = FloquetSystem::build(sys, Truncation::new(guard_order));
    let abscissa = embedded.spectral_abscissa()?;
    if abscissa >= 0.0 {
        return Err(FloquetError::Unstable {
            max_harmonic: guard_order,
            spectral_abscissa: abscissa,
        }
        .into());
    }

    let tau = sys.period();
    let dt = default_periodic_step(tau);
    let dim = sys.layout().dim();
    let diffusion = sys.diffusion().clone();
    let mut gamma = Mat::identity(dim, dim);
    let mut periods_used = 0;
    let mut residual = f64::INFINITY;
    let mut settled = false;
    for period in 0..n_periods_settle {
        let trajectory = integrate_lyapunov(
            |s| sys.drift_at(s),
            &diffusion,
            &gamma,
            tau,
            dt,
            usize::MAX,
        )?;
        let end = trajectory.last().expect("trajectory has samples").1.clone();
        residual = (&end - &gamma).norm() / end.norm();
        gamma = end;
        periods_used = period + 1;
        if residual <= 1e-8 {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(CrosscheckError::NotSettled {
            periods: periods_used,
            residual,
        });
    }

    let seg = tau / n_samples as f64;
    let mut times = Vec::with_capacity(n_samples);
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t0 = seg * i as f64;
        times.push(t0);
        samples.push(gamma.clone());
        let trajectory = integrate_lyapunov(
            |s| sys.drift_at(t0 + s),
            &diffusion,
            &gamma,
            seg,
            dt,
            usize::MAX,
        )?;
        gamma = trajectory.last().expect("trajectory has samples").1.clone();
    }
    let mut average = Mat::zeros(dim, dim);
    for s in &samples {
        average += s;
    }
    average /= n_samples as f64;

    Ok(PeriodicSteadyState {
        layout: *sys.layout(),
        times,
        samples,
        average,
        periods_used,
    })
}
