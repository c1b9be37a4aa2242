//! Singular-locus stratification and closed geodesics on flat developable
//! orbifolds `ℝⁿ/Γ`.
//!
//! The crate is layered:
//!
//! * [`geom`] holds Euclidean isometries, affine subspaces and straight segments.
//! * [`group`] enumerates a discrete group `Γ`, computes isotropy groups and
//!   subgroup data for finite groups.
//! * [`strata`] stratifies the quotient by singular dimension.
//! * [`geodesic`] represents orbifold geodesics as pairs `(c̃, γ)` and builds
//!   closed ones.
//! * [`scenarios`] reads model files, ships the example catalog and writes reports.

pub mod geom;
pub mod group;
pub mod geodesic;
pub mod strata;
pub mod scenarios;
