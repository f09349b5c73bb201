//! Graded cones, log-scales and the hyperbolic metric machinery built on them.

pub mod cone;
pub mod hyperbolicity;
pub mod logscale;

pub use cone::{
    Budget, CocycleKind, ConeGenerator, ConeNode, FrontierNode, GradedCone, IncrementRule, Payload, QuasiCocycleSpec,
    MAX_CONE_NODES,
};
pub use hyperbolicity::{
    busemann_increment, estimate_delta_hyperbolicity, estimate_delta_hyperbolicity_with, BusemannIncrement,
    DeltaEstimate,
};
pub use logscale::{
    gromov_product, logscale_from_cone, max_admissible_alpha, metric_from_logscale, DistanceTable, LogScaleTable,
    SynthesizedMetric,
};
