//! Subshifts of finite type: Perron data, word cones, cylinder measures and
//! cocycle projection.

pub mod cocycle;
pub mod cone;
pub mod measures;
pub mod points;
pub mod system;

pub use cocycle::{
    periodic_orbits, project_cocycle, reference_cycle, Condition, Coordinates, FutureCertificate, HolderData,
    LivsicReport, OrbitRow, ProjectedCocycle, ProjectionOptions, TwoSidedPotential, WindowPotential,
};
pub use cone::{symbol_weight_cocycle, word_cone, SymbolicCone, WordGenerator, LEVEL};
pub use measures::{
    conformal_cylinder_measure, conformal_measure_atoms, parry_two_sided, prepend_pairs, product_bowen, ProductBowen,
};
pub use points::{holonomy_bracket, TwoSidedPoint};
pub use system::{pf_data, strongly_connected_components, PerronData, SftSystem, DEFAULT_EIGEN_TOL};
