//! Symbolic–numeric toolkit for the Lie symmetry structure of non-stationary
//! planar ideal plasticity.
//!
//! The library encodes the plane-strain ideal-plasticity system — Saint-Venant
//! equilibrium with inertial terms, the stress–velocity coherence relation,
//! and incompressibility — together with its point-symmetry algebra:
//!
//! * [`symexpr`] — exact expression trees, differentiation, probabilistic
//!   zero-testing;
//! * [`vfield`] — vector fields on (t, x, y, u, v, σ, θ), Lie brackets, the
//!   commutation table of the F = 0 algebra and the friction-force algebras;
//! * [`prolong`] — first prolongation of a generator and the on-manifold
//!   infinitesimal symmetry criterion for the governing system;
//! * [`adjoint`] — adjoint action by truncated BCH series and closed forms;
//! * [`classify`] — representatives of the subalgebra classification and the
//!   normal-form reduction of one-dimensional subalgebras;
//! * [`solutions`] — invariant (symmetry-reduced) exact solutions, residual
//!   checks, and flow-field export.

pub mod adjoint;
pub mod classify;
pub mod cli;
pub mod prolong;
pub mod solutions;
pub mod symexpr;
pub mod vfield;
