//! Finite windows of two-sided sequences and the local product bracket.

use serde::{Deserialize, Serialize};

use super::system::SftSystem;
use crate::error::{input, Error, Result};

/// Coordinates `-past.len()..0` from `past` and `0..future.len()` from
/// `future`; the seam symbol is `future[0]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoSidedPoint {
    past: Vec<u8>,
    future: Vec<u8>,
}

impl TwoSidedPoint {
    pub fn new(sft: &SftSystem, past: Vec<u8>, future: Vec<u8>) -> Result<Self> {
        if future.is_empty() {
            return input("a two-sided point needs at least the seam symbol");
        }
        let mut all = past.clone();
        all.extend_from_slice(&future);
        sft.check_admissible(&all)?;
        Ok(TwoSidedPoint { past, future })
    }

    pub fn past(&self) -> &[u8] {
        &self.past
    }

    pub fn future(&self) -> &[u8] {
        &self.future
    }

    pub fn seam(&self) -> u8 {
        self.future[0]
    }

    /// Symbol at coordinate `i`, if the window covers it.
    pub fn at(&self, i: i64) -> Option<u8> {
        if i >= 0 {
            self.future.get(i as usize).copied()
        } else {
            let back = (-i) as usize;
            (back <= self.past.len()).then(|| self.past[self.past.len() - back])
        }
    }

    /// The left shift: coordinate `i` of the result is coordinate `i + 1`.
    pub fn shift(&self) -> Result<Self> {
        if self.future.len() < 2 {
            return input("shift would leave the point without a seam symbol");
        }
        let mut past = self.past.clone();
        past.push(self.future[0]);
        Ok(TwoSidedPoint {
            past,
            future: self.future[1..].to_vec(),
        })
    }
}

/// `[x, y]`: the past of `x` joined to the future of `y`.
pub fn holonomy_bracket(x: &TwoSidedPoint, y: &TwoSidedPoint) -> Result<TwoSidedPoint> {
    if x.seam() != y.seam() {
        return Err(Error::OutsideChart {
            left: x.seam(),
            right: y.seam(),
        });
    }
    Ok(TwoSidedPoint {
        past: x.past.clone(),
        future: y.future.clone(),
    })
}
