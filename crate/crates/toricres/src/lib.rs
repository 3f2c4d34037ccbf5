//! Exact Newton polyhedra, normal fans and their upward subdivisions, toric
//! chart pullbacks, and the singularity invariants `inv`/`inv2` checked across
//! one resolution step.

pub mod cone;
pub mod exactmath;
pub mod fan;
pub mod polytope;
pub mod upward;
pub mod newton;
pub mod toric;
pub mod driver;
