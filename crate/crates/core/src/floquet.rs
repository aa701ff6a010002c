//! Harmonic-sector embedding of periodically driven linear systems.
//!
//! A `tau`-periodic drift is expanded over the drive harmonics and the
//! covariance over sectors `(dc, cos 1, sin 1, ..., cos K, sin K)` up to a
//! truncation order `K`. In that basis the periodic steady state solves one
//! time-independent Lyapunov equation for the stacked sector covariance; the
//! dc sector is the period-averaged covariance, and off-diagonal sectors
//! carry the oscillating components.

use crate::gaussian::{Covariance, GaussianError, ModeLayout, PeriodicSystem};
use crate::linalg::{self, LinalgError, Mat};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FloquetError {
    #[error("drift is not Hurwitz at truncation {max_harmonic} (spectral abscissa {spectral_abscissa:.6e})")]
    Unstable {
        max_harmonic: usize,
        spectral_abscissa: f64,
    },
    #[error("zone index {zone:?} out of range for truncation {max_harmonic}")]
    IndexOutOfRange {
        zone: ZoneIndex,
        max_harmonic: usize,
    },
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One harmonic sector: the static component or a cosine/sine component of
/// harmonic `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneIndex {
    Dc,
    Cos(usize),
    Sin(usize),
}

/// Truncation order: harmonics `1..=max_harmonic` are kept, giving
/// `2 * max_harmonic + 1` sectors. Order zero is the rotating-wave
/// approximation (dc sector only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    max_harmonic: usize,
}

impl Truncation {
    pub fn new(max_harmonic: usize) -> Self {
        Self { max_harmonic }
    }

    pub fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    pub fn zone_count(&self) -> usize {
        2 * self.max_harmonic + 1
    }

    /// Sectors in storage order: dc, cos 1, sin 1, cos 2, sin 2, ...
    pub fn zones(&self) -> impl Iterator<Item = ZoneIndex> {
        let k = self.max_harmonic;
        std::iter::once(ZoneIndex::Dc).chain((1..=k).flat_map(|n| {
            [ZoneIndex::Cos(n), ZoneIndex::Sin(n)]
        }))
    }

    /// Position of a sector in storage order, if it is within truncation.
    pub fn block_index(&self, zone: ZoneIndex) -> Option<usize> {
        match zone {
            ZoneIndex::Dc => Some(0),
            ZoneIndex::Cos(n) if n >= 1 && n <= self.max_harmonic => Some(2 * n - 1),
            ZoneIndex::Sin(n) if n >= 1 && n <= self.max_harmonic => Some(2 * n),
            _ => None,
        }
    }
}

/// Assembles the sector-space drift matrix of a periodic system at the given
/// truncation. Harmonics above the system's highest stored harmonic, and all
/// non-positive indices appearing in the sector coupling rule, are zero.
pub fn build_drift(sys: &PeriodicSystem, truncation: Truncation) -> Mat {
    let dim = sys.layout().dim();
    let zones: Vec<ZoneIndex> = truncation.zones().collect();
    let mut drift = Mat::zeros(dim * zones.len(), dim * zones.len());
    for (bi, &zr) in zones.iter().enumerate() {
        for (bj, &zc) in zones.iter().enumerate() {
            let block = drift_block(sys, zr, zc);
            drift.view_mut((bi * dim, bj * dim), (dim, dim)).copy_from(&block);
        }
    }
    drift
}

/// One sector-coupling block of the embedded drift.
fn drift_block(sys: &PeriodicSystem, row: ZoneIndex, col: ZoneIndex) -> Mat {
    use ZoneIndex::*;
    let dim = sys.layout().dim();
    let omega = sys.base_frequency();
    let zero = || Mat::zeros(dim, dim);
    // Accumulates `sum_i sign_i * H(index_i)` over harmonic lookups, where
    // out-of-range indices contribute nothing.
    let combine = |terms: &[(Option<&Mat>, f64)]| -> Mat {
        let mut s = zero();
        for (h, sign) in terms {
            if let Some(h) = h {
                if *sign >= 0.0 {
                    s += *h;
                } else {
                    s -= *h;
                }
            }
        }
        s
    };
    let (n, k) = match (row, col) {
        (Dc, Dc) => return sys.a0().clone(),
        (Dc, Cos(k)) => return sys.cos_harmonic(k as i64).cloned().unwrap_or_else(zero),
        (Dc, Sin(k)) => return sys.sin_harmonic(k as i64).cloned().unwrap_or_else(zero),
        (Cos(n), Dc) => return sys.cos_harmonic(n as i64).cloned().unwrap_or_else(zero),
        (Sin(n), Dc) => return sys.sin_harmonic(n as i64).cloned().unwrap_or_else(zero),
        (Cos(n), Cos(k)) | (Cos(n), Sin(k)) | (Sin(n), Cos(k)) | (Sin(n), Sin(k)) => {
            (n as i64, k as i64)
        }
    };
    let (sum, diff_kn, diff_nk) = (n + k, k - n, n - k);
    match (row, col) {
        (Cos(_), Cos(_)) => {
            let base = if n == k { sys.a0().clone() } else { zero() };
            let s = combine(&[
                (sys.cos_harmonic(sum), 1.0),
                (sys.cos_harmonic(diff_kn), 1.0),
                (sys.cos_harmonic(diff_nk), 1.0),
            ]);
            base + s * FRAC_1_SQRT_2
        }
        (Cos(_), Sin(_)) => {
            let base = if n == k {
                Mat::identity(dim, dim) * (-(n as f64) * omega)
            } else {
                zero()
            };
            let s = combine(&[
                (sys.sin_harmonic(sum), 1.0),
                (sys.sin_harmonic(diff_kn), 1.0),
                (sys.sin_harmonic(diff_nk), -1.0),
            ]);
            base + s * FRAC_1_SQRT_2
        }
        (Sin(_), Cos(_)) => {
            let base = if n == k {
                Mat::identity(dim, dim) * (n as f64 * omega)
            } else {
                zero()
            };
            let s = combine(&[
                (sys.sin_harmonic(sum), 1.0),
                (sys.sin_harmonic(diff_kn), -1.0),
                (sys.sin_harmonic(diff_nk), 1.0),
            ]);
            base + s * FRAC_1_SQRT_2
        }
        (Sin(_), Sin(_)) => {
            let base = if n == k { sys.a0().clone() } else { zero() };
            let s = combine(&[
                (sys.cos_harmonic(sum), -1.0),
                (sys.cos_harmonic(diff_kn), 1.0),
                (sys.cos_harmonic(diff_nk), 1.0),
            ]);
            base + s * FRAC_1_SQRT_2
        }
        _ => unreachable!("dc cases returned above"),
    }
}

/// Sector-space diffusion: the physical diffusion replicated down the block
/// diagonal, one copy per sector.
pub fn build_diffusion(n: &Mat, truncation: Truncation) -> Mat {
    let dim = n.nrows();
    let zones = truncation.zone_count();
    let mut nf = Mat::zeros(dim * zones, dim * zones);
    for z in 0..zones {
        nf.view_mut((z * dim, z * dim), (dim, dim)).copy_from(n);
    }
    nf
}

/// A periodic system embedded in sector space at a fixed truncation.
#[derive(Debug, Clone)]
pub struct FloquetSystem {
    layout: ModeLayout,
    truncation: Truncation,
    base_frequency: f64,
    drift: Mat,
    diffusion: Mat,
}

impl FloquetSystem {
    pub fn build(sys: &PeriodicSystem, truncation: Truncation) -> Self {
        Self {
            layout: *sys.layout(),
            truncation,
            base_frequency: sys.base_frequency(),
            drift: build_drift(sys, truncation),
            diffusion: build_diffusion(sys.diffusion(), truncation),
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn drift(&self) -> &Mat {
        &self.drift
    }

    pub fn diffusion(&self) -> &Mat {
        &self.diffusion
    }

    pub fn spectral_abscissa(&self) -> Result<f64, FloquetError> {
        Ok(linalg::spectral_abscissa(&self.drift)?)
    }

    pub fn is_stable(&self) -> Result<bool, FloquetError> {
        Ok(self.spectral_abscissa()? < 0.0)
    }

    /// Solves the sector-space Lyapunov equation for the periodic steady
    /// state. The embedded drift must be Hurwitz.
    pub fn solve_steady(&self) -> Result<FloquetCovariance, FloquetError> {
        let abscissa = self.spectral_abscissa()?;
        if abscissa >= 0.0 {
            return Err(FloquetError::Unstable {
                max_harmonic: self.truncation.max_harmonic(),
                spectral_abscissa: abscissa,
            });
        }
        let sol = linalg::solve_lyapunov(&self.drift, &self.diffusion)?;
        Ok(FloquetCovariance {
            layout: self.layout,
            truncation: self.truncation,
            gamma: sol.gamma,
            residual_norm: sol.residual_norm,
        })
    }
}

/// Stacked sector covariance of the periodic steady state.
#[derive(Debug, Clone)]
pub struct FloquetCovariance {
    layout: ModeLayout,
    truncation: Truncation,
    gamma: Mat,
    residual_norm: f64,
}

impl FloquetCovariance {
    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Full sector-space covariance matrix.
    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    /// Cross-covariance block between two sectors.
    pub fn zone_block(&self, row: ZoneIndex, col: ZoneIndex) -> Result<Mat, FloquetError> {
        let dim = self.layout.dim();
        let max_harmonic = self.truncation.max_harmonic();
        let bi = self
            .truncation
            .block_index(row)
            .ok_or(FloquetError::IndexOutOfRange { zone: row, max_harmonic })?;
        let bj = self
            .truncation
            .block_index(col)
            .ok_or(FloquetError::IndexOutOfRange { zone: col, max_harmonic })?;
        Ok(self.gamma.view((bi * dim, bj * dim), (dim, dim)).clone_owned())
    }

    /// The dc sector as a covariance: the period-averaged state.
    pub fn dc_covariance(&self) -> Result<Covariance, FloquetError> {
        Ok(Covariance::new(
            self.layout,
            self.zone_block(ZoneIndex::Dc, ZoneIndex::Dc)?,
        )?)
    }
}

/// One truncation step of a convergence study. `value` is absent when the
/// embedded drift was not Hurwitz at that order.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceEntry {
    pub max_harmonic: usize,
    pub stable: bool,
    pub value: Option<f64>,
}

/// Result of scanning truncation orders until an observable settles.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub entries: Vec<ConvergenceEntry>,
    /// First order `K >= 1` whose observable differs from order `K - 1` by
    /// at most `rtol` in relative terms; `None` if the scan hit `k_max`
    /// without settling.
    pub converged_at: Option<usize>,
}

/// Solves the system at truncations `K = 0, 1, ...` and stops at the first
/// `K` where `|obs(K) - obs(K-1)| <= rtol * |obs(K)|`. Instability at a
/// given order is recorded in its entry rather than aborting the study;
/// consecutive orders can only attest convergence when both are stable.
pub fn converge<F>(
    sys: &PeriodicSystem,
    observable: F,
    k_max: usize,
    rtol: f64,
) -> Result<ConvergenceStudy, FloquetError>
where
    F: Fn(&FloquetCovariance) -> f64,
{
    if k_max < 1 {
        return Err(FloquetError::BadArgument(
            "k_max must be at least 1".into(),
        ));
    }
    if !(rtol > 0.0 && rtol.is_finite()) {
        return Err(FloquetError::BadArgument(format!(
            "rtol must be positive and finite, got {rtol}"
        )));
    }
    let mut entries: Vec<ConvergenceEntry> = Vec::with_capacity(k_max + 1);
    let mut converged_at = None;
    for k in 0..=k_max {
        let fs = FloquetSystem::build(sys, Truncation::new(k));
        let entry = match fs.solve_steady() {
            Ok(fc) => ConvergenceEntry {
                max_harmonic: k,
                stable: true,
                value: Some(observable(&fc)),
            },
            Err(FloquetError::Unstable { .. }) => ConvergenceEntry {
                max_harmonic: k,
                stable: false,
                value: None,
            },
            Err(e) => return Err(e),
        };
        entries.push(entry);
        if k >= 1 {
            if let (Some(prev), Some(cur)) = (entries[k - 1].value, entries[k].value) {
                if (cur - prev).abs() <= rtol * cur.abs() {
                    converged_at = Some(k);
                    break;
                }
            }
        }
    }
    Ok(ConvergenceStudy {
        entries,
        converged_at,
    })
}
