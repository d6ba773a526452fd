//! Fibers of branched coverings over planar puncture configurations.
//!
//! A covering of the disc branched over a set of punctures restricts to an
//! honest covering away from the branch set; the fiber over a branch point is
//! recovered as the inverse limit of fibers over a shrinking system of
//! punctured discs.  This crate computes truncations of that limit for
//! coverings described combinatorially — cosets of free-factor subgroups for
//! the universal cover, cosets in a finite quotient group otherwise — and
//! classifies the limit (discrete, Cantor-like, or not locally compact)
//! from the sizes of the bonding fibers.  A companion numeric kernel checks
//! the developing-map geometry of the BTZ model space, the motivating
//! example of a branch locus with parabolic holonomy.

pub mod btz;
pub mod cover;
pub mod fiber;
pub mod group;
pub mod homotopy;
pub mod word;

pub use btz::{BtzError, CylPoint, Isometry, MinkowskiPoint};
pub use cover::{CapSettings, CoverError, CoverSpec, CoverSystem, PunctureConfig};
pub use fiber::{FiberError, FiberSize, FiberVerdict, Label, LevelSystem, Thread};
pub use group::{FiniteGroup, GroupError, QuotientSpec};
pub use word::{GeneratorSet, Word};

/// Library version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
