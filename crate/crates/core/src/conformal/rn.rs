//! Radon-Nikodym ratios of a measure along branch maps between cells.

use serde::{Deserialize, Serialize};

use super::measure::AtomicMeasure;
use crate::error::{input, Result};

/// A branch sending the cell of atom `source` onto the cell of atom
/// `target`; `increment` is the grading of the branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPair {
    pub source: usize,
    pub target: usize,
    pub increment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub source: usize,
    pub target: usize,
    pub ratio: f64,
    pub expected: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadonNikodymReport {
    /// Largest `|ratio / expected - 1|`.
    pub max_relative_deviation: f64,
    /// Largest `max(ratio / expected, expected / ratio)`.
    pub max_factor: f64,
    pub rows: Vec<RatioRow>,
    /// Pairs skipped because the source cell has zero mass.
    pub excluded: Vec<usize>,
}

/// Compares `mu(target) / mu(source)` with `e^{-beta * increment}`.
pub fn radon_nikodym_check(measure: &AtomicMeasure, pairs: &[BranchPair], beta: f64) -> Result<RadonNikodymReport> {
    let n = measure.len();
    let mut targets = std::collections::HashSet::new();
    for (k, p) in pairs.iter().enumerate() {
        if p.source >= n || p.target >= n {
            return input(format!("pair {k} refers to an atom outside the measure"));
        }
        if !p.increment.is_finite() {
            return input(format!("pair {k} has increment {}", p.increment));
        }
        if !targets.insert((p.source, p.target)) {
            return input(format!("pair {k} repeats a source/target pair"));
        }
    }
    let w = measure.weights();
    let mut rows = Vec::with_capacity(pairs.len());
    let mut excluded = Vec::new();
    let mut max_dev = 0.0f64;
    let mut max_factor = 1.0f64;
    for (k, p) in pairs.iter().enumerate() {
        if w[p.source] == 0.0 {
            excluded.push(k);
            continue;
        }
        let ratio = w[p.target] / w[p.source];
        let expected = (-beta * p.increment).exp();
        let q = ratio / expected;
        let deviation = (q - 1.0).abs();
        let factor = if q > 0.0 { q.max(1.0 / q) } else { f64::INFINITY };
        max_dev = max_dev.max(deviation);
        max_factor = max_factor.max(factor);
        rows.push(RatioRow {
            source: p.source,
            target: p.target,
            ratio,
            expected,
            deviation,
        });
    }
    Ok(RadonNikodymReport {
        max_relative_deviation: max_dev,
        max_factor,
        rows,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::measure::{Atom, Location, Provenance};

    fn measure(ws: &[f64]) -> AtomicMeasure {
        AtomicMeasure::new(
            ws.iter()
                .enumerate()
                .map(|(i, &w)| Atom {
                    location: Location::Word(vec![i as u8]),
                    weight: w,
                })
                .collect(),
            Provenance::External,
        )
        .unwrap()
    }

    #[test]
    fn uniform_halving_is_exact() {
        let m = measure(&[1.0, 0.5, 0.5]);
        let pairs = [
            BranchPair {
                source: 0,
                target: 1,
                increment: 1.0,
            },
            BranchPair {
                source: 0,
                target: 2,
                increment: 1.0,
            },
        ];
        let r = radon_nikodym_check(&m, &pairs, 2f64.ln()).unwrap();
        assert!(r.max_relative_deviation <= 1e-15);
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn zero_source_is_excluded() {
        let m = measure(&[0.0, 0.5]);
        let pairs = [BranchPair {
            source: 0,
            target: 1,
            increment: 1.0,
        }];
        let r = radon_nikodym_check(&m, &pairs, 1.0).unwrap();
        assert_eq!(r.excluded, vec![0]);
        assert!(r.rows.is_empty());
    }

    #[test]
    fn factor_reports_both_directions() {
        let m = measure(&[1.0, 0.25]);
        let pairs = [BranchPair {
            source: 0,
            target: 1,
            increment: 2f64.ln(),
        }];
        let r = radon_nikodym_check(&m, &pairs, 1.0).unwrap();
        assert!((r.max_factor - 2.0).abs() < 1e-12);
        assert!(radon_nikodym_check(&m, &[BranchPair { source: 0, target: 7, increment: 1.0 }], 1.0).is_err());
    }
}
