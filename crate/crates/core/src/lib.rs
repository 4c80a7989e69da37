//! Simulation and numerics for branching Brownian motion in the Dirichlet
//! half-plane and the associated KPP traveling waves.
//!
//! The crate has two halves that are built to check each other:
//!
//! * **Probabilistic**: an event-driven simulator for binary branching
//!   Brownian motion in the plane with exact (Brownian-bridge) killing on
//!   the boundary `{y = 0}` ([`bbm`]), the additive/derivative/shaved
//!   martingale functionals evaluated on population snapshots
//!   ([`martingales`]), and Monte Carlo estimators of the waves as Laplace
//!   transforms of martingale limits ([`wave_mc`]).
//! * **Analytic**: ODE solvers for the one-dimensional steady state and
//!   traveling waves ([`waves_1d`]), an explicit finite-difference marcher
//!   for the two-dimensional wave in the moving frame ([`pde_2d`]),
//!   quantitative asymptotic checks ([`asymptotics`]), and a quarter-plane
//!   potential-theory toolkit ([`potential`]).
//!
//! Everything is deterministic for a fixed seed: replica and per-particle
//! RNG streams are derived by counter-based mixing, so results are
//! independent of scheduling and thread count.
//!
//! The crate is `no_std`-compatible (`alloc` required); the default `std`
//! feature enables `std` float intrinsics and the optional `parallel`
//! feature enables row-parallel stencil sweeps.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::too_many_arguments)]

extern crate alloc;

pub mod asymptotics;
pub mod bbm;
pub mod martingales;
pub mod pde_2d;
pub mod potential;
pub mod runner;
pub mod seed;
pub mod stats;
pub mod wave_mc;
pub mod waves_1d;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;

/// The minimal wave speed `c* = sqrt(2)`.
pub const C_STAR: f64 = core::f64::consts::SQRT_2;
