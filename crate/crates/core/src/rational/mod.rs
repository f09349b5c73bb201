//! Hyperbolic rational maps: evaluation, inverse images, preimage cones and
//! the measures and exponents built on them.

pub mod analysis;
pub mod cone;
pub mod map;
pub mod poly;
pub mod system;

pub use analysis::{
    backward_orbit, branch_derivative_ratios, brolin_lyubich, brolin_lyubich_hierarchy, distortion_check, dual_cocycle,
    dual_cocycle_from_orbits, julia_dimension, pushforward, sample_level, shadow_orbit, BranchRatio, BranchRatioReport, DistortionReport,
    DualCocycle,
};
pub use cone::{build_preimage_cone, derivative_cocycle, level_cone, PreimageGenerator, DERIVATIVE, LEVEL};
pub use map::{Preimages, RationalMap};
pub use poly::Polynomial;
pub use system::{
    CertificateParams, CertificateReport, CriticalOrbit, OrbitOutcome, RationalMapSystem, DEFAULT_ROOT_TOL,
};
