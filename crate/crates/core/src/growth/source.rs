//! Annulus sums over graded cones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::graph::GradedCone;

/// A potential `psi(g) = sum_i c_i * nu_i(g)`, a linear combination of
/// registered gradings. The empty combination is the zero potential.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    terms: Vec<(usize, f64)>,
}

impl Potential {
    pub fn zero() -> Self {
        Potential::default()
    }

    /// `psi = coefficient * nu_cocycle`.
    pub fn scaled(cocycle: usize, coefficient: f64) -> Self {
        Potential {
            terms: vec![(cocycle, coefficient)],
        }
    }

    /// `psi = nu_cocycle`.
    pub fn grading(cocycle: usize) -> Self {
        Self::scaled(cocycle, 1.0)
    }

    /// `self + coefficient * nu_cocycle`.
    pub fn plus(&self, cocycle: usize, coefficient: f64) -> Self {
        let mut terms = self.terms.clone();
        match terms.iter_mut().find(|(c, _)| *c == cocycle) {
            Some(t) => t.1 += coefficient,
            None => terms.push((cocycle, coefficient)),
        }
        Potential { terms }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    #[inline]
    pub fn eval(&self, gradings: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * gradings[i]).sum()
    }

    pub(crate) fn check(&self, cocycles: usize) -> Result<()> {
        for &(i, c) in &self.terms {
            if i >= cocycles {
                return input(format!("potential refers to unregistered cocycle {i}"));
            }
            if !c.is_finite() {
                return input(format!("potential coefficient {c} is not finite"));
            }
        }
        Ok(())
    }
}

/// Something whose nodes can be summed over grading annuli.
///
/// Implemented by explicit cones and by the state-aggregated symbolic cone.
pub trait GradedSource: Sync {
    fn cocycle_count(&self) -> usize;

    fn eta(&self, cocycle: usize) -> f64;

    fn max_increment(&self, cocycle: usize) -> f64;

    /// Every node with value `<= v` on `cocycle` is accounted for iff `v` is
    /// strictly below this.
    fn complete_through(&self, cocycle: usize) -> f64;

    /// For each `n` in `ns` (ascending): the node count and `sum e^psi` over
    /// nodes with `n - width < nu <= n`. No completeness checks.
    fn annulus_sums_raw(&self, cocycle: usize, psi: &Potential, ns: &[f64], width: f64) -> Result<Vec<(u64, f64)>>;

    /// `sum e^psi` over all nodes with `nu <= budget`. No completeness checks.
    fn ball_sum_raw(&self, cocycle: usize, psi: &Potential, budget: f64) -> Result<f64>;
}

/// Fixed chunking keeps reductions identical for every thread count.
const CHUNK: usize = 4096;

impl GradedSource for GradedCone {
    fn cocycle_count(&self) -> usize {
        self.specs().len()
    }

    fn eta(&self, cocycle: usize) -> f64 {
        self.specs()[cocycle].eta
    }

    fn max_increment(&self, cocycle: usize) -> f64 {
        GradedCone::max_increment(self, cocycle)
    }

    fn complete_through(&self, cocycle: usize) -> f64 {
        GradedCone::complete_through(self, cocycle)
    }

    fn annulus_sums_raw(&self, cocycle: usize, psi: &Potential, ns: &[f64], width: f64) -> Result<Vec<(u64, f64)>> {
        self.check_cocycle(cocycle)?;
        psi.check(self.cocycle_count())?;
        if ns.windows(2).any(|w| w[0] > w[1]) {
            return input("annulus grid must be ascending");
        }
        let k = ns.len();
        let partials: Vec<(Vec<u64>, Vec<f64>)> = self
            .nodes()
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut count = vec![0u64; k];
                let mut sum = vec![0.0f64; k];
                for node in chunk {
                    let v = node.gradings[cocycle];
                    // annuli (n - width, n] containing v: n >= v and n < v + width
                    let first = ns.partition_point(|&n| n < v);
                    let mut weight = None;
                    for j in first..k {
                        if ns[j] - width >= v {
                            break;
                        }
                        let w = *weight.get_or_insert_with(|| psi.eval(&node.gradings).exp());
                        count[j] += 1;
                        sum[j] += w;
                    }
                }
                (count, sum)
            })
            .collect();
        let mut count = vec![0u64; k];
        let mut sum = vec![0.0f64; k];
        for (c, s) in partials {
            for j in 0..k {
                count[j] += c[j];
                sum[j] += s[j];
            }
        }
        Ok(count.into_iter().zip(sum).collect())
    }

    fn ball_sum_raw(&self, cocycle: usize, psi: &Potential, budget: f64) -> Result<f64> {
        self.check_cocycle(cocycle)?;
        psi.check(self.cocycle_count())?;
        let partials: Vec<f64> = self
            .nodes()
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .filter(|n| n.gradings[cocycle] <= budget)
                    .map(|n| psi.eval(&n.gradings).exp())
                    .sum()
            })
            .collect();
        Ok(partials.into_iter().sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::binary_cone;

    #[test]
    fn potential_algebra() {
        let p = Potential::zero().plus(0, -0.3).plus(1, 2.0).plus(0, 0.3);
        assert_eq!(p.eval(&[5.0, 1.0]), 2.0);
        assert!(Potential::zero().is_zero());
        assert!(Potential::scaled(4, 1.0).check(2).is_err());
    }

    #[test]
    fn raw_sums_on_binary_cone() {
        let c = binary_cone(6);
        let ns: Vec<f64> = (0..=6).map(f64::from).collect();
        let s = c.annulus_sums_raw(0, &Potential::zero(), &ns, 1.0).unwrap();
        for (n, (count, u)) in s.iter().enumerate() {
            assert_eq!(*count, 1 << n);
            assert_eq!(*u, (1u64 << n) as f64);
        }
        // width 2 annuli hold two levels
        let s = c.annulus_sums_raw(0, &Potential::zero(), &[3.0], 2.0).unwrap();
        assert_eq!(s[0].0, 4 + 8);
        let b = c.ball_sum_raw(0, &Potential::zero(), 3.0).unwrap();
        assert_eq!(b, 15.0);
    }
}
