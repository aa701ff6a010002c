//! Steady-state covariances of periodically driven linear Gaussian systems.
//!
//! The state of a linear (quadratic-Hamiltonian) open system with Gaussian
//! noise is fully described by the covariance matrix of its quadratures. For
//! a drift matrix `A` and diffusion matrix `N` the covariance obeys
//!
//! ```text
//! dGamma/dt = A(t) Gamma + Gamma A(t)^T + N
//! ```
//!
//! For constant `A` the steady state is an algebraic Lyapunov equation. For
//! `tau`-periodic `A(t)` this crate expands drift and covariance in harmonics
//! of the drive and solves one enlarged time-independent Lyapunov equation
//! whose unknown stacks the Fourier components of the periodic steady state.
//!
//! Modules:
//!
//! - [`linalg`]: Lyapunov solvers, Hurwitz tests, fixed-step integration
//! - [`gaussian`]: mode layouts, static/periodic systems, covariance observables
//! - [`floquet`]: harmonic-sector embedding, truncation, convergence studies
//! - [`models`]: driven optomechanical model builders
//! - [`crosscheck`]: independent routes to the same numbers (frame changes,
//!   truncation equivalences, brute-force time integration)
//! - [`cli`]: config-driven sweep/stability/convergence runner

pub mod cli;
pub mod crosscheck;
pub mod floquet;
pub mod gaussian;
pub mod linalg;
pub mod models;

pub use linalg::Mat;
