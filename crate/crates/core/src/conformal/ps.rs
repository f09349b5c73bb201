//! Patterson-Sullivan approximants and their limits on boundary cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{Atom, AtomicMeasure, Location, Provenance};
use super::rn::BranchPair;
use crate::error::{input, Error, Result};
use crate::graph::{GradedCone, Payload};
use crate::growth::Potential;

fn location_of(p: &Payload) -> Location {
    match p {
        Payload::Point(z) => Location::Point(*z),
        Payload::Word(w) => Location::Word(w.clone()),
    }
}

fn address_word(cone: &GradedCone, node: usize) -> Result<Vec<u8>> {
    cone.address(node)
        .into_iter()
        .map(|l| u8::try_from(l).map_err(|_| Error::Input(format!("branch label {l} does not fit a cell word"))))
        .collect()
}

/// Atoms at every node with weight `(1 - e^{beta - s}) e^{-s nu(g) + psi(g)}`.
/// `beta` is the growth estimate substituted for the true exponent and is
/// recorded on the measure.
pub fn ps_measure(cone: &GradedCone, cocycle: usize, s: f64, psi: &Potential, beta: f64) -> Result<AtomicMeasure> {
    cone.check_cocycle(cocycle)?;
    psi.check(cone.specs().len())?;
    if !(s > beta) {
        return input(format!("s = {s} must exceed the growth rate {beta}"));
    }
    let norm = 1.0 - (beta - s).exp();
    let tilted = psi.plus(cocycle, -s);
    let atoms: Vec<Atom> = cone
        .nodes()
        .par_iter()
        .map(|n| Atom {
            location: location_of(&n.payload),
            weight: norm * tilted.eval(&n.gradings).exp(),
        })
        .collect();
    Ok(AtomicMeasure::new(atoms, Provenance::PsLimit)?.with_beta(beta))
}

/// Probability measure on the nodes at `depth` with weights proportional
/// to `e^{-s nu(g)}`.
pub fn level_measure(cone: &GradedCone, cocycle: usize, s: f64, depth: u32) -> Result<AtomicMeasure> {
    cone.check_cocycle(cocycle)?;
    let nodes: Vec<usize> = cone.level(depth).collect();
    if nodes.is_empty() {
        return Err(Error::InsufficientDepth {
            what: format!("level measure at depth {depth}"),
            required: depth as f64,
            available: cone.max_depth() as f64,
        });
    }
    let atoms = nodes
        .iter()
        .map(|&i| Atom {
            location: location_of(&cone.nodes()[i].payload),
            weight: (-s * cone.grading(i, cocycle)).exp(),
        })
        .collect();
    let provenance = if s == 0.0 {
        Provenance::BrolinLyubich
    } else {
        Provenance::PsLimit
    };
    AtomicMeasure::new(atoms, provenance)?.normalized()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMeasure {
    pub cell_depth: u32,
    /// Cone node of each cell.
    pub cells: Vec<usize>,
    /// Branch-label address of each cell.
    pub addresses: Vec<Vec<u8>>,
    pub s_values: Vec<f64>,
    pub beta: f64,
    /// Normalized cell masses, one row per `s`.
    pub masses: Vec<Vec<f64>>,
    /// Fraction of the total mu_s mass on nodes at depth `<= cell_depth`.
    pub shallow_fraction: Vec<f64>,
    /// Total variation between consecutive rows of `masses`.
    pub cauchy: Vec<f64>,
    pub final_masses: Vec<f64>,
    /// Whether `final_masses` is the linear extrapolation to `s = beta`
    /// (otherwise it is the last row).
    pub extrapolated: bool,
}

impl BoundaryMeasure {
    /// Final masses summed into the cells at a shallower `depth`, keyed by
    /// address.
    pub fn coarsen(&self, depth: u32) -> Result<Vec<(Vec<u8>, f64)>> {
        if depth > self.cell_depth {
            return input(format!("cannot refine cells of depth {} to depth {depth}", self.cell_depth));
        }
        let mut out: Vec<(Vec<u8>, f64)> = Vec::new();
        for (a, &m) in self.addresses.iter().zip(&self.final_masses) {
            let key = &a[..depth as usize];
            match out.last_mut() {
                Some((k, v)) if k.as_slice() == key => *v += m,
                _ => out.push((key.to_vec(), m)),
            }
        }
        Ok(out)
    }

    /// Final masses as cylinder atoms.
    pub fn to_atomic(&self) -> Result<AtomicMeasure> {
        let atoms = self
            .addresses
            .iter()
            .zip(&self.final_masses)
            .map(|(a, &m)| Atom {
                location: Location::Word(a.clone()),
                weight: m,
            })
            .collect();
        Ok(AtomicMeasure::new(atoms, Provenance::PsLimit)?.with_beta(self.beta))
    }

    /// Cells at every depth `0..=cell_depth` with their final masses, and the
    /// parent-to-child pairs with the grading increment of each edge.
    pub fn cell_hierarchy(&self, cone: &GradedCone, cocycle: usize) -> Result<(AtomicMeasure, Vec<BranchPair>)> {
        cone.check_cocycle(cocycle)?;
        let mut atoms = Vec::new();
        let mut node_of = Vec::new();
        for d in 0..=self.cell_depth {
            for (addr, m) in self.coarsen(d)? {
                let node = node_at(cone, &addr)?;
                atoms.push(Atom {
                    location: Location::Word(addr),
                    weight: m,
                });
                node_of.push(node);
            }
        }
        let index: std::collections::HashMap<usize, usize> = node_of.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut pairs = Vec::new();
        for (target, &node) in node_of.iter().enumerate() {
            if let Some(p) = cone.nodes()[node].parent {
                pairs.push(BranchPair {
                    source: index[&p],
                    target,
                    increment: cone.grading(node, cocycle) - cone.grading(p, cocycle),
                });
            }
        }
        Ok((AtomicMeasure::new(atoms, Provenance::PsLimit)?.with_beta(self.beta), pairs))
    }
}

/// Node reached from the root by following branch labels.
pub fn node_at(cone: &GradedCone, address: &[u8]) -> Result<usize> {
    let mut v = cone.root();
    for &l in address {
        v = cone
            .children(v)
            .find(|&c| cone.nodes()[c].label == l as u32)
            .ok_or_else(|| Error::Input(format!("no node at address {address:?}")))?;
    }
    Ok(v)
}

/// Limits of mu_s on the cells at `cell_depth`: each cell collects the mass
/// of its strict descendants, for every `s` in the decreasing sequence.
pub fn boundary_measure(
    cone: &GradedCone,
    cocycle: usize,
    psi: &Potential,
    s_values: &[f64],
    cell_depth: u32,
    beta: f64,
) -> Result<BoundaryMeasure> {
    cone.check_cocycle(cocycle)?;
    psi.check(cone.specs().len())?;
    if s_values.is_empty() {
        return input("empty s sequence");
    }
    if s_values.windows(2).any(|w| !(w[1] < w[0])) {
        return input("s sequence must be strictly decreasing");
    }
    if let Some(&s) = s_values.iter().find(|&&s| !(s > beta)) {
        return input(format!("s = {s} must exceed the growth rate {beta}"));
    }
    if cell_depth >= cone.max_depth() {
        return Err(Error::InsufficientDepth {
            what: format!("boundary cells at depth {cell_depth}"),
            required: cell_depth as f64 + 1.0,
            available: cone.max_depth() as f64,
        });
    }
    let cells: Vec<usize> = cone.level(cell_depth).collect();
    let mut cell_of = vec![usize::MAX; cone.len()];
    for (k, &c) in cells.iter().enumerate() {
        cell_of[c] = k;
    }
    // breadth-first order: parents precede children
    for i in 0..cone.len() {
        if cone.nodes()[i].depth > cell_depth {
            cell_of[i] = cell_of[cone.nodes()[i].parent.expect("non-root")];
        }
    }
    let mut masses = Vec::new();
    let mut shallow_fraction = Vec::new();
    for &s in s_values {
        let tilted = psi.plus(cocycle, -s);
        let k = cells.len();
        let (deep, shallow) = cone
            .nodes()
            .par_chunks(4096)
            .enumerate()
            .map(|(ci, chunk)| {
                let mut deep = vec![0.0; k];
                let mut shallow = 0.0;
                for (j, n) in chunk.iter().enumerate() {
                    let w = tilted.eval(&n.gradings).exp();
                    if n.depth > cell_depth {
                        deep[cell_of[ci * 4096 + j]] += w;
                    } else {
                        shallow += w;
                    }
                }
                (deep, shallow)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((vec![0.0; k], 0.0), |(mut a, sa), (b, sb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, sa + sb)
            });
        let total: f64 = deep.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate(format!("no mass below depth {cell_depth} at s = {s}")));
        }
        masses.push(deep.iter().map(|m| m / total).collect::<Vec<f64>>());
        shallow_fraction.push(shallow / (shallow + total));
    }
    let cauchy = masses
        .windows(2)
        .map(|w| 0.5 * w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .collect();
    let last = masses.last().expect("non-empty").clone();
    let (final_masses, extrapolated) = if masses.len() >= 2 {
        let n = masses.len();
        let (s1, s2) = (s_values[n - 2], s_values[n - 1]);
        let t = (beta - s2) / (s2 - s1);
        let ext: Vec<f64> = masses[n - 1]
            .iter()
            .zip(&masses[n - 2])
            .map(|(m2, m1)| m2 + (m2 - m1) * t)
            .collect();
        if ext.iter().all(|&m| m >= 0.0) {
            let sum: f64 = ext.iter().sum();
            (ext.iter().map(|m| m / sum).collect(), true)
        } else {
            (last, false)
        }
    } else {
        (last, false)
    };
    let addresses = cells.iter().map(|&c| address_word(cone, c)).collect::<Result<_>>()?;
    Ok(BoundaryMeasure {
        cell_depth,
        cells,
        addresses,
        s_values: s_values.to_vec(),
        beta,
        masses,
        shallow_fraction,
        cauchy,
        final_masses,
        extrapolated,
    })
}
