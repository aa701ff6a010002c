//! Gaussian-state descriptions of linear open systems.
//!
//! Quadratures are ordered `(q_1, p_1, q_2, p_2, ...)` and normalized so the
//! vacuum covariance is the identity. Diffusion matrices are the symmetrized
//! input-noise correlators in the same convention; a thermal bath at mean
//! occupation `nbar` with coupling rate `gamma` contributes
//! `2 gamma (2 nbar + 1)` on its diagonal.

use crate::linalg::{self, LinalgError, Mat, SYMMETRY_RTOL};
use nalgebra::Matrix2;
use thiserror::Error;

/// Absolute eigenvalue slack accepted in positivity tests.
pub const PHYSICALITY_ATOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("drift is not Hurwitz (spectral abscissa {spectral_abscissa:.6e})")]
    Unstable { spectral_abscissa: f64 },
    #[error("covariance is not physical: {0}")]
    NonPhysical(String),
    #[error("argument out of domain: {0}")]
    DomainError(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Number of bosonic modes and the induced quadrature ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLayout {
    n_modes: usize,
}

impl ModeLayout {
    pub fn new(n_modes: usize) -> Result<Self, GaussianError> {
        if n_modes == 0 {
            return Err(GaussianError::InvalidSystem(
                "layout needs at least one mode".into(),
            ));
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Quadrature-space dimension, twice the mode count.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    fn check_mode(&self, mode: usize) -> Result<usize, GaussianError> {
        if mode >= self.n_modes {
            return Err(GaussianError::ModeOutOfRange {
                mode,
                n_modes: self.n_modes,
            });
        }
        Ok(2 * mode)
    }
}

/// Block-diagonal symplectic form: `[[0, 1], [-1, 0]]` per mode.
pub fn symplectic_form(layout: &ModeLayout) -> Mat {
    let mut s = Mat::zeros(layout.dim(), layout.dim());
    for m in 0..layout.n_modes() {
        s[(2 * m, 2 * m + 1)] = 1.0;
        s[(2 * m + 1, 2 * m)] = -1.0;
    }
    s
}

fn check_system_matrices(layout: &ModeLayout, drift: &Mat, diffusion: &Mat) -> Result<(), GaussianError> {
    let d = layout.dim();
    for (name, m) in [("drift", drift), ("diffusion", diffusion)] {
        if m.nrows() != d || m.ncols() != d {
            return Err(GaussianError::DimensionMismatch(format!(
                "{name} is {}x{}, layout requires {d}x{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.iter().all(|x| x.is_finite()) {
            return Err(GaussianError::InvalidSystem(format!(
                "{name} has non-finite entries"
            )));
        }
    }
    let scale = diffusion.norm().max(f64::MIN_POSITIVE);
    if 0.5 * (diffusion - diffusion.transpose()).norm() > SYMMETRY_RTOL * scale {
        return Err(GaussianError::InvalidSystem(
            "diffusion must be symmetric".into(),
        ));
    }
    let min_eig = diffusion
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -PHYSICALITY_ATOL * scale.max(1.0) {
        return Err(GaussianError::InvalidSystem(format!(
            "diffusion must be positive semidefinite (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Time-independent linear system `dGamma/dt = A Gamma + Gamma A^T + N`.
#[derive(Debug, Clone)]
pub struct StaticSystem {
    layout: ModeLayout,
    drift: Mat,
    diffusion: Mat,
}

impl StaticSystem {
    pub fn new(layout: ModeLayout, drift: Mat, diffusion: Mat) -> Result<Self, GaussianError> {
        check_system_matrices(&layout, &drift, &diffusion)?;
        Ok(Self {
            layout,
            drift,
            diffusion,
        })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn drift(&self) -> &Mat {
        &self.drift
    }

    pub fn diffusion(&self) -> &Mat {
        &self.diffusion
    }

    pub fn spectral_abscissa(&self) -> Result<f64, GaussianError> {
        Ok(linalg::spectral_abscissa(&self.drift)?)
    }
}

/// Solves for the steady-state covariance of a static system.
///
/// Fails with [`GaussianError::Unstable`] when the drift is not Hurwitz; no
/// steady state exists there and the caller must treat the point as unstable
/// rather than read a number out of it.
pub fn steady_state(sys: &StaticSystem) -> Result<Covariance, GaussianError> {
    let abscissa = sys.spectral_abscissa()?;
    if abscissa >= 0.0 {
        return Err(GaussianError::Unstable {
            spectral_abscissa: abscissa,
        });
    }
    let sol = linalg::solve_lyapunov(&sys.drift, &sys.diffusion)?;
    Covariance::new(sys.layout, sol.gamma)
}

/// Drift with one fundamental drive tone and a finite set of harmonics:
///
/// ```text
/// A(t) = A0 + sqrt(2) * sum_n [ Ac_n cos(n w t) + As_n sin(n w t) ]
/// ```
///
/// Cosine and sine lists are stored dense and zero-padded to a common
/// length, so harmonic `n` lives at index `n - 1` of both.
#[derive(Debug, Clone)]
pub struct PeriodicSystem {
    layout: ModeLayout,
    base_frequency: f64,
    a0: Mat,
    cos_harmonics: Vec<Mat>,
    sin_harmonics: Vec<Mat>,
    diffusion: Mat,
}

impl PeriodicSystem {
    pub fn new(
        layout: ModeLayout,
        base_frequency: f64,
        a0: Mat,
        mut cos_harmonics: Vec<Mat>,
        mut sin_harmonics: Vec<Mat>,
        diffusion: Mat,
    ) -> Result<Self, GaussianError> {
        check_system_matrices(&layout, &a0, &diffusion)?;
        if !(base_frequency > 0.0 && base_frequency.is_finite()) {
            return Err(GaussianError::InvalidSystem(format!(
                "base frequency must be positive, got {base_frequency}"
            )));
        }
        let d = layout.dim();
        for (name, list) in [("cos", &cos_harmonics), ("sin", &sin_harmonics)] {
            for (i, m) in list.iter().enumerate() {
                if m.nrows() != d || m.ncols() != d {
                    return Err(GaussianError::DimensionMismatch(format!(
                        "{name} harmonic {} is {}x{}, layout requires {d}x{d}",
                        i + 1,
                        m.nrows(),
                        m.ncols()
                    )));
                }
                if !m.iter().all(|x| x.is_finite()) {
                    return Err(GaussianError::InvalidSystem(format!(
                        "{name} harmonic {} has non-finite entries",
                        i + 1
                    )));
                }
            }
        }
        let m = cos_harmonics.len().max(sin_harmonics.len());
        cos_harmonics.resize(m, Mat::zeros(d, d));
        sin_harmonics.resize(m, Mat::zeros(d, d));
        Ok(Self {
            layout,
            base_frequency,
            a0,
            cos_harmonics,
            sin_harmonics,
            diffusion,
        })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.base_frequency
    }

    pub fn a0(&self) -> &Mat {
        &self.a0
    }

    pub fn cos_harmonics(&self) -> &[Mat] {
        &self.cos_harmonics
    }

    pub fn sin_harmonics(&self) -> &[Mat] {
        &self.sin_harmonics
    }

    pub fn diffusion(&self) -> &Mat {
        &self.diffusion
    }

    /// Highest stored harmonic index `M`.
    pub fn max_harmonic(&self) -> usize {
        self.cos_harmonics.len()
    }

    /// Signed-index harmonic lookup; indices outside `1..=M` are zero.
    pub(crate) fn cos_harmonic(&self, n: i64) -> Option<&Mat> {
        (n >= 1)
            .then(|| self.cos_harmonics.get(n as usize - 1))
            .flatten()
    }

    pub(crate) fn sin_harmonic(&self, n: i64) -> Option<&Mat> {
        (n >= 1)
            .then(|| self.sin_harmonics.get(n as usize - 1))
            .flatten()
    }

    /// Instantaneous drift `A(t)`.
    pub fn drift_at(&self, t: f64) -> Mat {
        let mut a = self.a0.clone();
        let sqrt2 = std::f64::consts::SQRT_2;
        for (i, (c, s)) in self
            .cos_harmonics
            .iter()
            .zip(self.sin_harmonics.iter())
            .enumerate()
        {
            let phase = (i as f64 + 1.0) * self.base_frequency * t;
            a += c * (sqrt2 * phase.cos());
            a += s * (sqrt2 * phase.sin());
        }
        a
    }

    /// The zero-harmonic part `(A0, N)` as a static system. Solving it is
    /// the rotating-wave approximation of the driven problem.
    pub fn static_part(&self) -> StaticSystem {
        StaticSystem {
            layout: self.layout,
            drift: self.a0.clone(),
            diffusion: self.diffusion.clone(),
        }
    }

    /// Copy with every harmonic zeroed; used to check that the harmonic
    /// machinery collapses to the static solution when the drive is absent.
    pub fn with_zeroed_harmonics(&self) -> PeriodicSystem {
        let d = self.layout.dim();
        let m = self.max_harmonic();
        PeriodicSystem {
            layout: self.layout,
            base_frequency: self.base_frequency,
            a0: self.a0.clone(),
            cos_harmonics: vec![Mat::zeros(d, d); m],
            sin_harmonics: vec![Mat::zeros(d, d); m],
            diffusion: self.diffusion.clone(),
        }
    }
}

/// Symmetric quadrature covariance matrix with its mode layout.
#[derive(Debug, Clone)]
pub struct Covariance {
    layout: ModeLayout,
    gamma: Mat,
}

impl Covariance {
    pub fn new(layout: ModeLayout, gamma: Mat) -> Result<Self, GaussianError> {
        let d = layout.dim();
        if gamma.nrows() != d || gamma.ncols() != d {
            return Err(GaussianError::DimensionMismatch(format!(
                "covariance is {}x{}, layout requires {d}x{d}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        if !gamma.iter().all(|x| x.is_finite()) {
            return Err(GaussianError::NonPhysical("non-finite entries".into()));
        }
        let scale = gamma.norm().max(f64::MIN_POSITIVE);
        if 0.5 * (&gamma - gamma.transpose()).norm() > SYMMETRY_RTOL * scale {
            return Err(GaussianError::NonPhysical("not symmetric".into()));
        }
        Ok(Self {
            layout,
            gamma: (&gamma + gamma.transpose()) * 0.5,
        })
    }

    /// Vacuum state: identity covariance.
    pub fn vacuum(layout: ModeLayout) -> Self {
        Self {
            gamma: Mat::identity(layout.dim(), layout.dim()),
            layout,
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    /// The 2x2 single-mode block of `mode`.
    pub fn mode_block(&self, mode: usize) -> Result<Matrix2<f64>, GaussianError> {
        let off = self.layout.check_mode(mode)?;
        Ok(self.gamma.fixed_view::<2, 2>(off, off).into_owned())
    }

    /// Mean thermal occupation of `mode`: `(Var q + Var p - 2) / 4`.
    ///
    /// Values in `[-1e-9, 0)` are rounding noise of the vacuum and clamp to
    /// zero; anything lower is rejected as unphysical.
    pub fn occupation(&self, mode: usize) -> Result<f64, GaussianError> {
        let b = self.mode_block(mode)?;
        let n = (b[(0, 0)] + b[(1, 1)] - 2.0) / 4.0;
        if n < -PHYSICALITY_ATOL {
            return Err(GaussianError::NonPhysical(format!(
                "occupation {n:.3e} below vacuum"
            )));
        }
        Ok(n.max(0.0))
    }

    /// Extremal quadrature variances of `mode` over all phase-space
    /// directions: the eigenvalues of its 2x2 block, returned as
    /// `(smallest, largest)`. Values below 1 indicate squeezing.
    pub fn squeezing_variances(&self, mode: usize) -> Result<(f64, f64), GaussianError> {
        let b = self.mode_block(mode)?;
        let mean = 0.5 * (b[(0, 0)] + b[(1, 1)]);
        let radius = (0.25 * (b[(0, 0)] - b[(1, 1)]).powi(2) + b[(0, 1)] * b[(1, 0)]).sqrt();
        let (v_min, v_max) = (mean - radius, mean + radius);
        if !(v_min > 0.0 && v_min.is_finite()) {
            return Err(GaussianError::NonPhysical(format!(
                "minimal variance {v_min:.3e} is not positive"
            )));
        }
        Ok((v_min, v_max))
    }

    /// Uncertainty-principle test: `Gamma + i sigma >= 0` within
    /// [`PHYSICALITY_ATOL`]. Evaluated on the real symmetric embedding
    /// `[[Gamma, -sigma], [sigma, Gamma]]`, whose spectrum doubles that of
    /// the Hermitian matrix `Gamma + i sigma`.
    pub fn is_physical(&self) -> bool {
        let d = self.layout.dim();
        let sigma = symplectic_form(&self.layout);
        let mut h = Mat::zeros(2 * d, 2 * d);
        h.view_mut((0, 0), (d, d)).copy_from(&self.gamma);
        h.view_mut((d, d), (d, d)).copy_from(&self.gamma);
        h.view_mut((0, d), (d, d)).copy_from(&(-&sigma));
        h.view_mut((d, 0), (d, d)).copy_from(&sigma);
        let min_eig = h
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        min_eig >= -PHYSICALITY_ATOL
    }
}

/// Variance to decibels relative to vacuum: `-10 log10(V)`. Positive values
/// mean squeezing below the vacuum level.
pub fn to_decibels(variance: f64) -> Result<f64, GaussianError> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(GaussianError::DomainError(format!(
            "variance must be positive and finite, got {variance}"
        )));
    }
    Ok(-10.0 * variance.log10())
}
