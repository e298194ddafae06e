//! Numerical laboratory for lattice Gaussian interface models.
//!
//! The field of interest is the centred Gaussian field on `Z^d` whose
//! covariance is the inverse of the precision operator `J = q(eps*I - Delta)`,
//! where `Delta` is the (normalized) discrete Laplacian and `q` is a
//! polynomial with lowest degree `k >= 1`. The free field is `q(r) = r`;
//! `q(r) = r^2` is the membrane model. This crate provides:
//!
//! * exact application of the lattice operators and the Hamiltonian
//!   quadratic form ([`lattice`]),
//! * Fourier-side machinery: torus Green's functions, infinite-lattice
//!   Green's functions by quadrature, the decay constant of the Green's
//!   function, and exact spectral sampling ([`spectral`]),
//! * conditional Gaussian laws on boxes, single-site resampling kernels and
//!   (hard-wall) Gibbs dynamics ([`conditional`]),
//! * the k-th order capacity of the unit cube, both as a discretized
//!   obstacle problem and through the dual quadratic forms of a Riesz-type
//!   kernel operator ([`capacity`]),
//! * seeded, persistent experiment drivers for hard-wall probabilities,
//!   decay-rate tables, conditioned interface heights and inverse-positivity
//!   scans ([`experiments`]).

pub mod capacity;
pub mod conditional;
pub mod experiments;
pub mod fft;
pub mod lattice;
pub mod rng;
pub mod solve;
pub mod spectral;
pub mod table;

pub use lattice::{LatticeField, ModelSpec, QPolynomial, TorusGrid};
