//! Numerical laboratory for a mass-conserving stochastic perturbation of the
//! one-dimensional discrete nonlinear Schrödinger equation (DNLS).
//!
//! The crate is organised around the mass sphere
//! `S_m^n = { ψ ∈ ℂⁿ : (1/n) Σ |ψ(x)|² = m }`:
//!
//! * [`lattice`]: fields on the discrete torus, energies, Laplacian, FFT.
//! * [`elliptic`]: Jacobi elliptic functions and the continuous dnoidal soliton.
//! * [`variational`]: discrete solitons, i.e. minimizers of `H_n` on the sphere.
//! * [`analysis`]: piecewise-linear interpolation, `H̃¹` distances, discrete
//!   Gagliardo–Nirenberg machinery.
//! * [`sampling`]: uniform/Gibbs sampling on the sphere and large-deviation
//!   estimators.
//! * [`sde`]: the exactly mass-conserving splitting integrator.
//! * [`hypo`]: numerical Hörmander rank checks.

pub mod analysis;
pub mod elliptic;
pub mod error;
pub mod hypo;
pub mod lattice;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod sde;
pub mod sum;
pub mod variational;

pub use error::{Error, Result};
pub use lattice::{EnergyBreakdown, GibbsSpec, LatticeField, Nonlinearity};
