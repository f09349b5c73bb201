//! Annulus counting, entropy and pressure estimation.

pub mod estimate;
pub mod source;

pub use estimate::{
    annulus, annulus_series, check_growth_sandwich, check_submultiplicativity, default_width, dual_entropy_check,
    entropy_estimate, estimate_from_series, growth_fit, partition_sum, pressure_estimate, usable_n_max, AnnulusEntry,
    AnnulusSeries, DualEntropy, GrowthEstimate, Multiplicativity, SandwichReport, MIN_ANNULI,
};
pub use source::{GradedSource, Potential};
