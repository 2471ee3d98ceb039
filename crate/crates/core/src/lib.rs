//! Construction engine and verification laboratory for minimal subshifts of
//! `P^G` with prescribed mean topological dimension.
//!
//! The pipeline runs bottom-up:
//!
//! * [`group`]: the lattices `Z` and `Z^2`, their spiral enumeration and the
//!   finite-set calculus (boundaries, invariance, syndetic windows).
//! * [`tiling`]: finite tilings behind a resolver, with window-level checks
//!   for partition, syndetic centers, irreducibility and (prime) congruence.
//! * [`schedule`]: generated nested interval/rectangle tiling hierarchies.
//! * [`polyhedron`]: the unit cube and its nested finite nets.
//! * [`construction`]: the hierarchical star/hash word construction, planned
//!   level by level and evaluated pointwise with big-integer arithmetic.
//! * [`analysis`]: densities, free sets, dimension bound estimates and
//!   minimality diagnostics.
//! * [`cli`]: the `subshift` command line front end.
//!
//! All densities are exact rationals; nothing in the core uses floating point.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod construction;
pub mod error;
pub mod group;
pub mod polyhedron;
pub mod report;
pub mod schedule;
pub mod tiling;

pub use error::{Error, Result};

pub type Int = num::BigInt;
pub type Rational = num::BigRational;
