//! Poincaré series, Patterson-Sullivan measures and conformality checks.

pub mod ahlfors;
pub mod measure;
pub mod poincare;
pub mod ps;
pub mod rn;

pub use ahlfors::{ahlfors_regularity, hausdorff_dimension_relation, AhlforsOptions, AhlforsReport, BallSample};
pub use measure::{word_from_text, word_to_text, Atom, AtomicMeasure, Location, Provenance};
pub use poincare::{critical_exponent, critical_exponent_graded, poincare_partial, CriticalExponent, PoincareEvaluation};
pub use ps::{boundary_measure, level_measure, node_at, ps_measure, BoundaryMeasure};
pub use rn::{radon_nikodym_check, BranchPair, RadonNikodymReport, RatioRow};
