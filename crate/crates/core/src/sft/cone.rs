//! Word cones of a subshift: the root is the empty word and children append
//! one admissible symbol.

use std::sync::Arc;

use crate::error::{input, Result};
use crate::graph::{Budget, CocycleKind, ConeGenerator, GradedCone, Payload, QuasiCocycleSpec, MAX_CONE_NODES};
use crate::growth::{GradedSource, Potential};

use super::system::SftSystem;

/// Index of the level cocycle in every symbolic cone.
pub const LEVEL: usize = 0;

pub struct WordGenerator<'a> {
    sft: &'a SftSystem,
}

impl<'a> WordGenerator<'a> {
    pub fn new(sft: &'a SftSystem) -> Self {
        WordGenerator { sft }
    }
}

impl ConeGenerator for WordGenerator<'_> {
    fn children(&self, _node: usize, parent: &Payload) -> Result<Vec<Payload>> {
        let w = parent
            .word()
            .ok_or_else(|| crate::Error::Input("word cone node without a word payload".into()))?;
        Ok((0..self.sft.alphabet() as u8)
            .filter(|&b| w.last().is_none_or(|&a| self.sft.allows(a, b)))
            .map(|b| {
                let mut v = Vec::with_capacity(w.len() + 1);
                v.extend_from_slice(w);
                v.push(b);
                Payload::Word(v)
            })
            .collect())
    }
}

/// Custom cocycle adding `weights[b]` on each edge that appends symbol `b`.
pub fn symbol_weight_cocycle(name: &str, weights: Vec<f64>) -> QuasiCocycleSpec {
    QuasiCocycleSpec::new(
        name,
        0.0,
        CocycleKind::Custom,
        Arc::new(move |_, child| {
            let w = child.word().expect("word payload");
            weights[*w.last().expect("non-root child") as usize]
        }),
    )
}

/// Explicit word cone through `depth`, graded by level and then by each
/// per-symbol weight vector in `weights`.
pub fn word_cone(sft: &SftSystem, depth: u32, weights: &[Vec<f64>]) -> Result<GradedCone> {
    let mut specs = vec![QuasiCocycleSpec::level()];
    for (i, w) in weights.iter().enumerate() {
        if w.len() != sft.alphabet() {
            return input(format!("weight vector {i} has {} entries, alphabet has {}", w.len(), sft.alphabet()));
        }
        specs.push(symbol_weight_cocycle(&format!("weight{i}"), w.clone()));
    }
    GradedCone::grow(
        Payload::Word(vec![]),
        specs,
        &WordGenerator::new(sft),
        Budget {
            cocycle: LEVEL,
            limit: depth as f64,
        },
        MAX_CONE_NODES,
    )
}

/// The word cone of a subshift with nodes merged by last symbol.
///
/// Counts and weights are propagated through the transition matrix, so
/// annuli of the level cocycle are exact at any depth without materializing
/// the exponentially many words.
#[derive(Clone, Debug)]
pub struct SymbolicCone {
    sft: SftSystem,
    weights: Vec<Vec<f64>>,
    max_depth: u32,
}

impl SymbolicCone {
    pub fn new(sft: SftSystem, max_depth: u32) -> Self {
        SymbolicCone {
            sft,
            weights: Vec::new(),
            max_depth,
        }
    }

    /// Registers per-symbol weight cocycles (indices 1, 2, ...).
    pub fn with_weights(sft: SftSystem, max_depth: u32, weights: Vec<Vec<f64>>) -> Result<Self> {
        for (i, w) in weights.iter().enumerate() {
            if w.len() != sft.alphabet() {
                return input(format!("weight vector {i} has {} entries, alphabet has {}", w.len(), sft.alphabet()));
            }
        }
        Ok(SymbolicCone {
            sft,
            weights,
            max_depth,
        })
    }

    pub fn sft(&self) -> &SftSystem {
        &self.sft
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    fn step_factors(&self, psi: &Potential) -> Vec<f64> {
        (0..self.sft.alphabet())
            .map(|b| {
                let mut e = 0.0;
                for &(i, c) in psi.terms() {
                    e += c * if i == LEVEL { 1.0 } else { self.weights[i - 1][b] };
                }
                e.exp()
            })
            .collect()
    }

    /// Per-depth `(count, sum e^psi)` for depths `0..=depth`.
    pub fn level_sums(&self, psi: &Potential, depth: u32) -> Result<Vec<(u64, f64)>> {
        psi.check(self.cocycle_count())?;
        let k = self.sft.alphabet();
        let a = self.sft.matrix();
        let f = self.step_factors(psi);
        let mut out = vec![(1u64, 1.0)];
        if depth == 0 {
            return Ok(out);
        }
        let mut cnt: Vec<u128> = vec![1; k];
        let mut wt: Vec<f64> = f.clone();
        out.push((sat(cnt.iter().sum()), wt.iter().sum()));
        for _ in 1..depth {
            let mut c2 = vec![0u128; k];
            let mut w2 = vec![0.0; k];
            for i in 0..k {
                for j in 0..k {
                    if a[i][j] == 1 {
                        c2[j] = c2[j].saturating_add(cnt[i]);
                        w2[j] += wt[i];
                    }
                }
            }
            for j in 0..k {
                w2[j] *= f[j];
            }
            cnt = c2;
            wt = w2;
            out.push((sat(cnt.iter().fold(0u128, |s, &c| s.saturating_add(c))), wt.iter().sum()));
        }
        Ok(out)
    }
}

fn sat(v: u128) -> u64 {
    u64::try_from(v).unwrap_or(u64::MAX)
}

impl GradedSource for SymbolicCone {
    fn cocycle_count(&self) -> usize {
        1 + self.weights.len()
    }

    fn eta(&self, _cocycle: usize) -> f64 {
        0.0
    }

    fn max_increment(&self, cocycle: usize) -> f64 {
        if cocycle == LEVEL {
            1.0
        } else {
            self.weights[cocycle - 1].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        }
    }

    fn complete_through(&self, cocycle: usize) -> f64 {
        if cocycle == LEVEL {
            self.max_depth as f64 + 1.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn annulus_sums_raw(&self, cocycle: usize, psi: &Potential, ns: &[f64], width: f64) -> Result<Vec<(u64, f64)>> {
        if cocycle != LEVEL {
            return input("symbolic cones support annuli of the level cocycle only");
        }
        let top = ns.iter().cloned().fold(0.0, f64::max).floor().clamp(0.0, self.max_depth as f64) as u32;
        let levels = self.level_sums(psi, top)?;
        Ok(ns
            .iter()
            .map(|&n| {
                let mut c = 0u64;
                let mut s = 0.0;
                for (d, &(lc, lw)) in levels.iter().enumerate() {
                    let d = d as f64;
                    if n - width < d && d <= n {
                        c = c.saturating_add(lc);
                        s += lw;
                    }
                }
                (c, s)
            })
            .collect())
    }

    fn ball_sum_raw(&self, cocycle: usize, psi: &Potential, budget: f64) -> Result<f64> {
        if cocycle != LEVEL {
            return input("symbolic cones support the level cocycle only");
        }
        let top = budget.floor().clamp(0.0, self.max_depth as f64) as u32;
        Ok(self.level_sums(psi, top)?.iter().map(|&(_, w)| w).sum())
    }
}
