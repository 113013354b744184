//! Murray–von Neumann comparison of trivial multiples against sums of Bott
//! line bundles over products of 2-spheres, finite-stage bookkeeping for an
//! AH tower built from such bundles, and self-checking certificates that
//! multiples of the tower's multiplier projection are not properly infinite.
//!
//! Modules:
//!
//! - [`projection`]: formal projections and their compressed normal form
//! - [`comparison`]: `m·e ⪯ Q` via maximum matching, plus exhaustive and
//!   closed-form oracles
//! - [`euler`]: square-free polynomial cross-check of the matching route
//! - [`tower`]: stage data, connecting-map counts and the enclosure of `R`
//! - [`certificate`] and [`trace`]: the two verifications built on top

pub mod certificate;
pub mod comparison;
pub mod error;
pub mod euler;
pub mod interval;
pub mod matching;
pub mod projection;
pub mod serde_big;
pub mod tower;
pub mod trace;

pub use certificate::{
    choose_threshold, obstruction_for, stable_matrix_obstruction, verify_not_properly_infinite, Certificate,
    ObstructionChain,
};
pub use comparison::{
    brute_force_max_trivial, closed_form_max_trivial, is_trivial_subequivalent, max_trivial_multiple, DeficiencyWitness,
};
pub use error::{Error, Result};
pub use interval::RationalInterval;
pub use projection::{
    CoordinateAllocator, CoordinateId, DisjointFamilySummary, FamilyGroup, FormalProjection, IndexSet,
};
pub use tower::{KSequence, MapCounts, StageData, Tower, TowerParams};
pub use trace::{trace_growth, TraceGrowthReport, TraceMode};
