//! Cylinder measures of a subshift: the conformal measure of the level
//! cocycle, the two-sided Parry measure and its product reconstruction.

use std::collections::HashMap;

use super::system::SftSystem;
use crate::conformal::{Atom, AtomicMeasure, BranchPair, Location, Provenance};
use crate::error::{input, Error, Result};

/// `mu([w]) = lambda^{-(n-1)} m_{w_{n-1}} / sum m` for the right Perron
/// vector `m`.
pub fn conformal_cylinder_measure(sft: &SftSystem, word: &[u8]) -> Result<f64> {
    if word.is_empty() {
        return input("cylinders need a non-empty word");
    }
    sft.check_admissible(word)?;
    let p = sft.perron();
    let total: f64 = p.right.iter().sum();
    let last = *word.last().expect("non-empty") as usize;
    Ok(p.lambda.powi(-(word.len() as i32 - 1)) * p.right[last] / total)
}

/// `mu([w]) = u_{w_0} lambda^{-(n-1)} m_{w_{n-1}}` with `u . m = 1`. The
/// measure is shift-invariant, so `position` does not enter the value.
pub fn parry_two_sided(sft: &SftSystem, word: &[u8], _position: i64) -> Result<f64> {
    if word.is_empty() {
        return input("cylinders need a non-empty word");
    }
    sft.check_admissible(word)?;
    let p = sft.perron();
    let first = word[0] as usize;
    let last = *word.last().expect("non-empty") as usize;
    Ok(p.left[first] * p.lambda.powi(-(word.len() as i32 - 1)) * p.right[last])
}

/// Product of the forward conformal measure and the conformal measure of
/// the transpose subshift, with the seam normalization.
#[derive(Clone, Debug)]
pub struct ProductBowen {
    forward: SftSystem,
    backward: SftSystem,
    /// `w(s) = mu+([s]) mu-([s]) / sum_t mu+([t]) mu-([t])`.
    seam_weight: Vec<f64>,
}

impl ProductBowen {
    pub fn new(sft: &SftSystem) -> Result<Self> {
        let backward = sft.transpose()?;
        let k = sft.alphabet();
        let mut seam_weight = Vec::with_capacity(k);
        for s in 0..k as u8 {
            seam_weight.push(conformal_cylinder_measure(sft, &[s])? * conformal_cylinder_measure(&backward, &[s])?);
        }
        let z: f64 = seam_weight.iter().sum();
        seam_weight.iter_mut().for_each(|w| *w /= z);
        Ok(ProductBowen {
            forward: sft.clone(),
            backward,
            seam_weight,
        })
    }

    pub fn seam_weight(&self, symbol: u8) -> f64 {
        self.seam_weight[symbol as usize]
    }

    /// Mass of the rectangle whose coordinates `-(a-1)..=0` are `past` and
    /// `0..b` are `future`; both words contain the seam symbol at 0.
    pub fn measure(&self, past: &[u8], future: &[u8]) -> Result<f64> {
        let (Some(&ps), Some(&fs)) = (past.last(), future.first()) else {
            return input("rectangles need non-empty past and future words");
        };
        if ps != fs {
            return Err(Error::OutsideChart { left: ps, right: fs });
        }
        self.forward.check_admissible(past)?;
        self.forward.check_admissible(future)?;
        let reversed: Vec<u8> = past.iter().rev().cloned().collect();
        let plus = conformal_cylinder_measure(&self.forward, future)? / conformal_cylinder_measure(&self.forward, &[fs])?;
        let minus =
            conformal_cylinder_measure(&self.backward, &reversed)? / conformal_cylinder_measure(&self.backward, &[fs])?;
        Ok(plus * minus * self.seam_weight(fs))
    }
}

pub fn product_bowen(sft: &SftSystem, past: &[u8], future: &[u8]) -> Result<f64> {
    ProductBowen::new(sft)?.measure(past, future)
}

/// Conformal cylinder measure on all admissible words of lengths
/// `1..=max_len`, as atoms keyed by word.
pub fn conformal_measure_atoms(sft: &SftSystem, max_len: usize) -> Result<AtomicMeasure> {
    let mut atoms = Vec::new();
    for n in 1..=max_len {
        for w in sft.words(n) {
            let weight = conformal_cylinder_measure(sft, &w)?;
            atoms.push(Atom {
                location: Location::Word(w),
                weight,
            });
        }
    }
    Ok(AtomicMeasure::new(atoms, Provenance::ParryConformal)?.with_beta(sft.lambda().ln()))
}

/// Prepend-symbol branches `[w] -> [aw]` between word atoms of `measure`,
/// each with level increment 1.
pub fn prepend_pairs(sft: &SftSystem, measure: &AtomicMeasure) -> Vec<BranchPair> {
    let index: HashMap<&[u8], usize> = measure
        .atoms()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.location.word().map(|w| (w, i)))
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in measure.atoms().iter().enumerate() {
        let Some(w) = a.location.word() else { continue };
        if w.is_empty() {
            continue;
        }
        for s in 0..sft.alphabet() as u8 {
            if !sft.allows(s, w[0]) {
                continue;
            }
            let mut aw = Vec::with_capacity(w.len() + 1);
            aw.push(s);
            aw.extend_from_slice(w);
            if let Some(&j) = index.get(aw.as_slice()) {
                pairs.push(BranchPair {
                    source: i,
                    target: j,
                    increment: 1.0,
                });
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::radon_nikodym_check;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn golden_mean_depth_one() {
        let g = SftSystem::golden_mean();
        assert_relative_eq!(conformal_cylinder_measure(&g, &[0]).unwrap(), 1.0 / PHI, epsilon = 1e-13);
        assert_relative_eq!(conformal_cylinder_measure(&g, &[1]).unwrap(), 1.0 / (PHI * PHI), epsilon = 1e-13);
        assert!(conformal_cylinder_measure(&g, &[1, 1]).is_err());
        assert!(conformal_cylinder_measure(&g, &[]).is_err());
    }

    #[test]
    fn full_shift_is_uniform() {
        let f = SftSystem::full_shift(2).unwrap();
        for w in f.words(5) {
            assert_relative_eq!(conformal_cylinder_measure(&f, &w).unwrap(), 1.0 / 32.0, epsilon = 1e-15);
            assert_relative_eq!(parry_two_sided(&f, &w, 3).unwrap(), 1.0 / 32.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn golden_mean_parry_from_closed_form() {
        // m = (phi, 1) / (phi + 1), u = (phi, 1) scaled so u . m = 1
        let g = SftSystem::golden_mean();
        let m0 = PHI / (PHI + 1.0);
        let u0 = PHI * (PHI + 1.0) / (PHI * PHI + 1.0);
        assert_relative_eq!(parry_two_sided(&g, &[0], 0).unwrap(), u0 * m0, epsilon = 1e-13);
        assert_eq!(parry_two_sided(&g, &[0, 1, 0], 0).unwrap(), parry_two_sided(&g, &[0, 1, 0], 7).unwrap());
    }

    #[test]
    fn conformal_measure_is_additive_and_conformal() {
        let sft = SftSystem::new(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        let lambda = sft.lambda();
        for n in 1..=8 {
            let total: f64 = sft.words(n).iter().map(|w| conformal_cylinder_measure(&sft, w).unwrap()).sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-12);
            for w in sft.words(n) {
                let ext: f64 = (0..3u8)
                    .filter(|&b| sft.allows(*w.last().unwrap(), b))
                    .map(|b| {
                        let mut wb = w.clone();
                        wb.push(b);
                        conformal_cylinder_measure(&sft, &wb).unwrap()
                    })
                    .sum();
                assert_relative_eq!(ext, conformal_cylinder_measure(&sft, &w).unwrap(), max_relative = 1e-12);
            }
        }
        let m = conformal_measure_atoms(&sft, 6).unwrap();
        let pairs = prepend_pairs(&sft, &m);
        assert!(!pairs.is_empty());
        let r = radon_nikodym_check(&m, &pairs, lambda.ln()).unwrap();
        assert!(r.max_relative_deviation < 1e-12);
    }

    #[test]
    fn product_matches_parry_on_full_shift() {
        let f = SftSystem::full_shift(2).unwrap();
        let pb = ProductBowen::new(&f).unwrap();
        assert_relative_eq!(pb.measure(&[0, 1, 1], &[1, 0]).unwrap(), 2f64.powi(-4), epsilon = 1e-15);
        assert!(matches!(pb.measure(&[0], &[1]), Err(Error::OutsideChart { .. })));
    }

    #[test]
    fn seam_weight_is_parry_weight() {
        let g = SftSystem::golden_mean();
        let pb = ProductBowen::new(&g).unwrap();
        for s in 0..2u8 {
            assert_relative_eq!(pb.seam_weight(s), parry_two_sided(&g, &[s], 0).unwrap(), epsilon = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn parry_additive_both_sides(len in 1usize..7, pick in 0usize..1000) {
            let g = SftSystem::golden_mean();
            let words = g.words(len);
            let w = &words[pick % words.len()];
            let p = parry_two_sided(&g, w, 0).unwrap();
            let right: f64 = (0..2u8).filter(|&b| g.allows(*w.last().unwrap(), b)).map(|b| {
                let mut v = w.clone();
                v.push(b);
                parry_two_sided(&g, &v, 0).unwrap()
            }).sum();
            let left: f64 = (0..2u8).filter(|&a| g.allows(a, w[0])).map(|a| {
                let mut v = vec![a];
                v.extend_from_slice(w);
                parry_two_sided(&g, &v, -1).unwrap()
            }).sum();
            prop_assert!((right - p).abs() <= 1e-13 && (left - p).abs() <= 1e-13);
        }
    }
}
