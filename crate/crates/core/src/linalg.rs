//! Dense real-matrix kernels.
//!
//! - algebraic Lyapunov solves `A X + X A^T + N = 0` (Schur-based with a
//!   Kronecker-vectorization route kept as an independent cross-check)
//! - Hurwitz stability tests by two routes that must agree
//! - fixed-step RK4 integration of the differential Lyapunov equation

use nalgebra::{Complex, DMatrix, DVector, Schur};
use thiserror::Error;

/// Working matrix type for the whole crate.
pub type Mat = DMatrix<f64>;

/// Relative asymmetry beyond which a "symmetric" matrix is treated as broken.
pub const SYMMETRY_RTOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("Lyapunov system is singular: drift eigenvalue pair sums to ~0 (min |l_i + l_j| = {min_pair_sum:.3e})")]
    SingularSystem { min_pair_sum: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("trajectory diverged at t = {t:.6e} (|Gamma|_F = {norm:.3e})")]
    Divergence { t: f64, norm: f64 },
}

/// Solution of `A Gamma + Gamma A^T + N = 0`.
#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    /// Symmetrized solution matrix.
    pub gamma: Mat,
    /// Frobenius norm of `A Gamma + Gamma A^T + N`, recomputed from the
    /// returned `gamma` rather than taken from solver internals.
    pub residual_norm: f64,
    /// Whether the drift is Hurwitz (all eigenvalues strictly left of the
    /// imaginary axis).
    pub stable: bool,
    /// Largest real part over the drift eigenvalues.
    pub spectral_abscissa: f64,
}

fn ensure_finite(m: &Mat) -> Result<(), LinalgError> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

fn ensure_square_pair(a: &Mat, n: &Mat) -> Result<usize, LinalgError> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(LinalgError::DimensionMismatch(format!(
            "drift must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n.nrows() != a.nrows() || n.ncols() != a.ncols() {
        return Err(LinalgError::DimensionMismatch(format!(
            "diffusion is {}x{} but drift is {}x{}",
            n.nrows(),
            n.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

fn ensure_symmetric(m: &Mat) -> Result<(), LinalgError> {
    let asym = relative_asymmetry(m);
    if asym > SYMMETRY_RTOL {
        return Err(LinalgError::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

fn relative_asymmetry(m: &Mat) -> f64 {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    0.5 * (m - m.transpose()).norm() / scale
}

fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn schur_of(a: &Mat) -> Result<Schur<f64, nalgebra::Dyn>, LinalgError> {
    let max_iter = 100 * a.nrows() + 1000;
    Schur::try_new(a.clone(), f64::EPSILON, max_iter)
        .ok_or_else(|| LinalgError::NumericalFailure("Schur iteration did not converge".into()))
}

/// Eigenvalues of a square real matrix.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex<f64>>, LinalgError> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected square non-empty matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a)?;
    Ok(schur_of(a)?.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part over the eigenvalues of `a`.
pub fn spectral_abscissa(a: &Mat) -> Result<f64, LinalgError> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Strict Hurwitz test via the spectral abscissa. An eigenvalue exactly on
/// the imaginary axis counts as unstable.
pub fn is_hurwitz(a: &Mat) -> Result<bool, LinalgError> {
    Ok(spectral_abscissa(a)? < 0.0)
}

/// Hurwitz test by the Lyapunov criterion: `A` is Hurwitz iff
/// `A X + X A^T + I = 0` has a positive-definite solution. Kept as an
/// independent route against [`is_hurwitz`]; the two must agree.
pub fn is_hurwitz_via_lyapunov(a: &Mat) -> Result<bool, LinalgError> {
    let d = a.nrows();
    match solve_lyapunov(a, &Mat::identity(d, d)) {
        Ok(sol) => {
            let min_eig = sol
                .gamma
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            Ok(min_eig > 0.0)
        }
        // A marginal drift makes the Lyapunov operator singular; that is a
        // definite "not Hurwitz", not a failure.
        Err(LinalgError::SingularSystem { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Solves `A Gamma + Gamma A^T + N = 0` for symmetric `N`.
///
/// Uses the real Schur form of `A` with quasi-triangular back-substitution
/// and one step of iterative refinement when needed. Residuals are always
/// recomputed from the returned matrix.
pub fn solve_lyapunov(a: &Mat, n: &Mat) -> Result<LyapunovSolution, LinalgError> {
    let d = ensure_square_pair(a, n)?;
    ensure_finite(a)?;
    ensure_finite(n)?;
    ensure_symmetric(n)?;

    let schur = schur_of(a)?;
    let eigs: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    let abscissa = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let eig_scale = eigs.iter().map(|l| l.norm()).fold(1.0_f64, f64::max);
    let min_pair_sum = min_eigenvalue_pair_sum(&eigs);
    if min_pair_sum <= 1e-12 * eig_scale {
        return Err(LinalgError::SingularSystem { min_pair_sum });
    }

    let (q, t) = schur.unpack();
    let blocks = diagonal_blocks(&t)?;

    let mut gamma = lyap_from_factors(&q, &t, &blocks, n)?;
    let tol = 1e-10 * n.norm().max(1.0);
    let mut residual = lyapunov_residual(a, &gamma, n);
    for _ in 0..3 {
        if residual.norm() <= 0.05 * tol {
            break;
        }
        let delta = lyap_from_factors(&q, &t, &blocks, &symmetrize(&residual))?;
        gamma += delta;
        gamma = symmetrize(&gamma);
        residual = lyapunov_residual(a, &gamma, n);
    }
    let residual_norm = residual.norm();
    if residual_norm > tol {
        return if min_pair_sum <= 1e-8 * eig_scale {
            Err(LinalgError::SingularSystem { min_pair_sum })
        } else {
            Err(LinalgError::NumericalFailure(format!(
                "Lyapunov residual {residual_norm:.3e} exceeds tolerance {tol:.3e} for dim {d}"
            )))
        };
    }

    Ok(LyapunovSolution {
        gamma,
        residual_norm,
        stable: abscissa < 0.0,
        spectral_abscissa: abscissa,
    })
}

/// Baseline Lyapunov solve by Kronecker vectorization and dense LU:
/// `(I (x) A + A (x) I) vec(Gamma) = -vec(N)`.
///
/// O(d^6), so only sensible for small systems; retained as an independent
/// oracle for [`solve_lyapunov`].
pub fn solve_lyapunov_kron(a: &Mat, n: &Mat) -> Result<LyapunovSolution, LinalgError> {
    let d = ensure_square_pair(a, n)?;
    ensure_finite(a)?;
    ensure_finite(n)?;
    ensure_symmetric(n)?;

    let id = Mat::identity(d, d);
    let m = id.kronecker(a) + a.kronecker(&id);
    let rhs = -DVector::from_column_slice(n.as_slice());
    let lu = m.lu();
    let x = lu.solve(&rhs).ok_or(LinalgError::SingularSystem {
        min_pair_sum: 0.0,
    })?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::SingularSystem { min_pair_sum: 0.0 });
    }
    let gamma = checked_symmetrize(&Mat::from_column_slice(d, d, x.as_slice()))?;
    let residual_norm = lyapunov_residual(a, &gamma, n).norm();
    let abscissa = spectral_abscissa(a)?;
    Ok(LyapunovSolution {
        gamma,
        residual_norm,
        stable: abscissa < 0.0,
        spectral_abscissa: abscissa,
    })
}

fn min_eigenvalue_pair_sum(eigs: &[Complex<f64>]) -> f64 {
    let mut min = f64::INFINITY;
    for (i, li) in eigs.iter().enumerate() {
        for lj in &eigs[i..] {
            min = min.min((li + lj).norm());
        }
    }
    min
}

/// Symmetrizes a solution, rejecting matrices whose asymmetry signals a
/// solver breakdown rather than rounding noise.
fn checked_symmetrize(g: &Mat) -> Result<Mat, LinalgError> {
    let asym = relative_asymmetry(g);
    if asym > SYMMETRY_RTOL {
        return Err(LinalgError::NumericalFailure(format!(
            "solution asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.1e}"
        )));
    }
    Ok(symmetrize(g))
}

fn lyapunov_residual(a: &Mat, gamma: &Mat, n: &Mat) -> Mat {
    a * gamma + gamma * a.transpose() + n
}

/// Solves `A X + X A^T + N = 0` given the Schur factors `A = Q T Q^T`.
fn lyap_from_factors(
    q: &Mat,
    t: &Mat,
    blocks: &[(usize, usize)],
    n: &Mat,
) -> Result<Mat, LinalgError> {
    let c = -(q.transpose() * n * q);
    let y = solve_quasi_triangular(t, &c, blocks)?;
    checked_symmetrize(&(q * y * q.transpose()))
}

/// Diagonal block partition of a real Schur form: 1x1 blocks for real
/// eigenvalues, 2x2 blocks for complex pairs.
fn diagonal_blocks(t: &Mat) -> Result<Vec<(usize, usize)>, LinalgError> {
    let d = t.nrows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < d {
        if i + 1 < d && t[(i + 1, i)] != 0.0 {
            if i + 2 < d && t[(i + 2, i + 1)] != 0.0 {
                return Err(LinalgError::NumericalFailure(
                    "Schur form is not quasi-triangular".into(),
                ));
            }
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    Ok(blocks)
}

/// Back-substitution for `T Y + Y T^T = C` with quasi-upper-triangular `T`
/// and symmetric `C`. Processes block columns right to left and, within a
/// column, block rows bottom up; the mirror blocks follow by symmetry.
fn solve_quasi_triangular(
    t: &Mat,
    c: &Mat,
    blocks: &[(usize, usize)],
) -> Result<Mat, LinalgError> {
    let d = t.nrows();
    let nb = blocks.len();
    let mut y = Mat::zeros(d, d);
    for jb in (0..nb).rev() {
        let (j0, js) = blocks[jb];
        for ib in (0..=jb).rev() {
            let (i0, is) = blocks[ib];
            let mut rhs = c.view((i0, j0), (is, js)).clone_owned();
            for &(k0, ks) in &blocks[ib + 1..] {
                rhs -= t.view((i0, k0), (is, ks)) * y.view((k0, j0), (ks, js));
            }
            for &(l0, ls) in &blocks[jb + 1..] {
                rhs -= y.view((i0, l0), (is, ls)) * t.view((j0, l0), (js, ls)).transpose();
            }
            let x = solve_small_sylvester(
                &t.view((i0, i0), (is, is)).clone_owned(),
                &t.view((j0, j0), (js, js)).clone_owned(),
                &rhs,
            )?;
            y.view_mut((i0, j0), (is, js)).copy_from(&x);
            if ib != jb {
                y.view_mut((j0, i0), (js, is)).copy_from(&x.transpose());
            }
        }
    }
    Ok(y)
}

/// Direct solve of the at-most-2x2 block equation `T1 X + X T2^T = R`.
fn solve_small_sylvester(t1: &Mat, t2: &Mat, r: &Mat) -> Result<Mat, LinalgError> {
    let p = t1.nrows();
    let q = t2.nrows();
    let m = Mat::identity(q, q).kronecker(t1) + t2.kronecker(&Mat::identity(p, p));
    let rhs = DVector::from_column_slice(r.as_slice());
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or(LinalgError::SingularSystem { min_pair_sum: 0.0 })?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::SingularSystem { min_pair_sum: 0.0 });
    }
    Ok(Mat::from_column_slice(p, q, x.as_slice()))
}

/// Default fixed step for integrating one period of a driven system.
pub fn default_periodic_step(period: f64) -> f64 {
    period / 2000.0
}

/// Default fixed step for a constant drift, scaled to its largest entry.
pub fn default_constant_step(a: &Mat) -> f64 {
    1.0 / (100.0 * a.amax().max(f64::MIN_POSITIVE))
}

/// Integrates `dGamma/dt = A(t) Gamma + Gamma A(t)^T + N` with classical RK4
/// at fixed step `dt`, returning `(t, Gamma)` samples every `sample_stride`
/// steps (the initial and final states are always included).
///
/// The trajectory is aborted with [`LinalgError::Divergence`] once its norm
/// exceeds `1e12 * max(1, |N|_F, |Gamma0|_F)`; steady states of stable
/// systems stay far below that guard.
pub fn integrate_lyapunov<F>(
    mut drift_at: F,
    n: &Mat,
    gamma0: &Mat,
    t_end: f64,
    dt: f64,
    sample_stride: usize,
) -> Result<Vec<(f64, Mat)>, LinalgError>
where
    F: FnMut(f64) -> Mat,
{
    let d = ensure_square_pair(gamma0, n)?;
    ensure_finite(gamma0)?;
    ensure_finite(n)?;
    ensure_symmetric(n)?;
    ensure_symmetric(gamma0)?;
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(LinalgError::DimensionMismatch(format!(
            "invalid integration horizon t_end = {t_end}, dt = {dt}"
        )));
    }

    let mut g = symmetrize(gamma0);
    let mut samples = vec![(0.0, g.clone())];
    if t_end == 0.0 {
        return Ok(samples);
    }
    let n_steps = ((t_end / dt).round() as usize).max(1);
    let h = t_end / n_steps as f64;
    let stride = sample_stride.max(1);
    let guard = 1e12 * n.norm().max(gamma0.norm()).max(1.0);

    let rhs = |a: &Mat, g: &Mat| a * g + g * a.transpose() + n;
    for k in 0..n_steps {
        let t = h * k as f64;
        let a1 = drift_at(t);
        let a2 = drift_at(t + 0.5 * h);
        let a3 = drift_at(t + h);
        if a1.nrows() != d || a1.ncols() != d {
            return Err(LinalgError::DimensionMismatch(format!(
                "drift callback returned {}x{}, state is {d}x{d}",
                a1.nrows(),
                a1.ncols()
            )));
        }
        let k1 = rhs(&a1, &g);
        let k2 = rhs(&a2, &(&g + &k1 * (0.5 * h)));
        let k3 = rhs(&a2, &(&g + &k2 * (0.5 * h)));
        let k4 = rhs(&a3, &(&g + &k3 * h));
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let norm = g.norm();
        if !norm.is_finite() || norm > guard {
            return Err(LinalgError::Divergence { t: t + h, norm });
        }
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            samples.push((h * (k + 1) as f64, symmetrize(&g)));
        }
    }
    Ok(samples)
}
