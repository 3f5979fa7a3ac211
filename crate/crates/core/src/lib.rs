//! A computational laboratory for amenability of bounded-geometry extended
//! metric spaces and the operator algebras they generate.
//!
//! The crate works on finite *windows* of metric spaces (paths, grids, free
//! group balls, box spaces of finite quotients, explicit distance tables) and provides:
//!
//! * boundary and isoperimetric machinery ([`space`], [`folner`]): R-boundaries,
//!   Folner set search with exact rational certificates;
//! * partial translations and the doubling dichotomy ([`translations`]):
//!   composition algebra, max-flow doubling certificates with exact Hall
//!   deficiency witnesses, greedy three-coloring, approximate-mean defects;
//! * sparse finite-propagation operators ([`operator`]): exact rational
//!   *-algebra arithmetic, Hilbert-Schmidt and certified operator-norm bounds,
//!   commutator edge identities, diagonal conditional expectation and traces;
//! * operator-level amenability diagnostics ([`diagnostics`]): Folner
//!   projection defects, u.c.p. compression defect chains, exact
//!   dimension-ratio checks, isometry relation verification and
//!   properly-infinite witnesses.
//!
//! All certificates are exact (arbitrary-precision rationals) and re-checkable;
//! floating point appears only in norm estimates, which carry certified
//! directional bounds.

pub mod diagnostics;
pub mod flow;
pub mod folner;
pub mod num;
pub mod operator;
pub mod pointset;
pub mod rank;
pub mod sampling;
pub mod space;
pub mod symbolic;
pub mod translations;

pub use num::{Rat, Scalar};
pub use pointset::PointSet;
pub use space::{BoundaryKind, BoundaryMode, SpaceDescriptor, SpaceWindow};
