//! Preimage trees of a seed point, graded by level and by the derivative
//! cocycle `ln|f'(child)|`.

use std::sync::Arc;

use num_complex::Complex64;

use super::map::RationalMap;
use super::system::RationalMapSystem;
use crate::error::{Error, Result};
use crate::graph::{Budget, CocycleKind, ConeGenerator, GradedCone, Payload, QuasiCocycleSpec, MAX_CONE_NODES};

pub const LEVEL: usize = 0;
pub const DERIVATIVE: usize = 1;

/// Residual allowed between `f(child)` and its parent, in root tolerances.
pub const RESIDUAL_FACTOR: f64 = 10.0;

pub struct PreimageGenerator<'a> {
    map: &'a RationalMap,
    tol: f64,
}

impl<'a> PreimageGenerator<'a> {
    pub fn new(system: &'a RationalMapSystem) -> Self {
        PreimageGenerator {
            map: system.map(),
            tol: system.root_tol(),
        }
    }
}

impl ConeGenerator for PreimageGenerator<'_> {
    fn children(&self, node: usize, parent: &Payload) -> Result<Vec<Payload>> {
        let w = parent.point().ok_or_else(|| Error::Expansion {
            node,
            reason: "preimage cone node without a point payload".into(),
        })?;
        let pre = self.map.preimages(w, self.tol).map_err(|e| Error::Expansion {
            node,
            reason: e.to_string(),
        })?;
        if pre.any_multiple() {
            return Err(Error::Expansion {
                node,
                reason: format!("{w} is a critical value: preimages collide"),
            });
        }
        let bound = RESIDUAL_FACTOR * self.tol * (1.0 + w.norm());
        if pre.max_residual > bound {
            return Err(Error::Expansion {
                node,
                reason: format!("preimage residual {:e} exceeds {bound:e}", pre.max_residual),
            });
        }
        Ok(pre.roots.into_iter().map(Payload::Point).collect())
    }
}

/// `ln|f'(child)|` on each edge.
pub fn derivative_cocycle(map: &RationalMap) -> QuasiCocycleSpec {
    let map = Arc::new(map.clone());
    QuasiCocycleSpec::new(
        "derivative",
        0.0,
        CocycleKind::Derivative,
        Arc::new(move |_, child: &Payload| {
            child
                .point()
                .and_then(|z| map.derivative(z).ok())
                .map_or(f64::NAN, |d: Complex64| d.norm().ln())
        }),
    )
}

/// Breadth-first preimage tree of the seed, with the level cocycle at
/// index [`LEVEL`] and the derivative cocycle at [`DERIVATIVE`].
pub fn build_preimage_cone(system: &RationalMapSystem, budget: Budget) -> Result<GradedCone> {
    system.require_certificate()?;
    GradedCone::grow(
        Payload::Point(system.seed()),
        vec![QuasiCocycleSpec::level(), derivative_cocycle(system.map())],
        &PreimageGenerator::new(system),
        budget,
        MAX_CONE_NODES,
    )
}

pub fn level_cone(system: &RationalMapSystem, depth: u32) -> Result<GradedCone> {
    build_preimage_cone(
        system,
        Budget {
            cocycle: LEVEL,
            limit: depth as f64,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_map_depth_two() {
        let s = RationalMapSystem::quadratic(0.0).unwrap();
        let c = level_cone(&s, 2).unwrap();
        assert_eq!(c.len(), 7);
        for leaf in c.level(2) {
            assert!((c.grading(leaf, DERIVATIVE) - 4f64.ln()).abs() < 1e-14);
        }
        let pts: Vec<Complex64> = c.level(1).map(|i| c.nodes()[i].payload.point().unwrap()).collect();
        assert!((pts[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((pts[1] + Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn critical_seed_fails_at_the_root() {
        let s = RationalMapSystem::quadratic(0.0).unwrap().with_seed(Complex64::new(0.0, 0.0));
        assert!(matches!(level_cone(&s, 2), Err(Error::Expansion { node: 0, .. })));
    }

    #[test]
    fn basilica_residuals_and_accumulation() {
        let s = RationalMapSystem::quadratic(-1.0).unwrap();
        let c = level_cone(&s, 3).unwrap();
        assert_eq!(c.len(), 15);
        let f = s.map();
        for i in 1..c.len() {
            let n = &c.nodes()[i];
            let parent = c.nodes()[n.parent.unwrap()].payload.point().unwrap();
            let z = n.payload.point().unwrap();
            assert!((f.evaluate(z).unwrap() - parent).norm() <= RESIDUAL_FACTOR * s.root_tol());
            let direct = f.derivative(z).unwrap().norm().ln();
            assert!((c.edge_increment(i, DERIVATIVE).unwrap() - direct).abs() <= 1e-12);
        }
        // the derivative grading of a node is ln|(f^n)'| by the chain rule
        for leaf in c.level(3) {
            let mut z = c.nodes()[leaf].payload.point().unwrap();
            let mut d = Complex64::new(1.0, 0.0);
            for _ in 0..3 {
                d *= f.derivative(z).unwrap();
                z = f.evaluate(z).unwrap();
            }
            assert!((c.grading(leaf, DERIVATIVE) - d.norm().ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn uncertified_systems_are_refused() {
        let s = RationalMapSystem::quadratic(-0.75).unwrap();
        assert!(level_cone(&s, 2).is_err());
    }
}
