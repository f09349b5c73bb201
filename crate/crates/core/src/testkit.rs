//! Small cones shared by unit tests.

use crate::graph::{Budget, ConeGenerator, GradedCone, Payload, QuasiCocycleSpec, MAX_CONE_NODES};
use crate::sft::{word_cone, SftSystem};
use crate::Result;

/// Full k-ary tree with words as payloads.
pub(crate) struct FullTree(pub u8);

impl ConeGenerator for FullTree {
    fn children(&self, _: usize, parent: &Payload) -> Result<Vec<Payload>> {
        let w = parent.word().unwrap();
        Ok((0..self.0)
            .map(|b| {
                let mut v = w.to_vec();
                v.push(b);
                Payload::Word(v)
            })
            .collect())
    }
}

pub(crate) fn full_cone(k: u8, depth: u32) -> GradedCone {
    GradedCone::grow(
        Payload::Word(vec![]),
        vec![QuasiCocycleSpec::level()],
        &FullTree(k),
        Budget {
            cocycle: 0,
            limit: depth as f64,
        },
        MAX_CONE_NODES,
    )
    .unwrap()
}

pub(crate) fn binary_cone(depth: u32) -> GradedCone {
    full_cone(2, depth)
}

pub(crate) fn golden_word_cone(depth: u32) -> GradedCone {
    word_cone(&SftSystem::golden_mean(), depth, &[]).unwrap()
}
