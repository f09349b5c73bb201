//! Ball-mass scaling of measures in the plane.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::AtomicMeasure;
use crate::error::{input, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsOptions {
    pub centers: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub seed: u64,
    /// A radius is usable once every center's ball holds at least this many
    /// atoms.
    pub min_atoms: usize,
}

impl Default for AhlforsOptions {
    fn default() -> Self {
        AhlforsOptions {
            centers: 200,
            r_min: 1e-3,
            r_max: 1e-1,
            radii: 21,
            seed: 0xa41f,
            min_atoms: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSample {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsReport {
    /// Pooled slope of `ln mu(B(x, r))` against `ln r`, one intercept per center.
    pub slope: f64,
    /// Root-mean-square residual of the pooled fit.
    pub residual: f64,
    pub center_slope_min: f64,
    pub center_slope_max: f64,
    pub center_slope_std: f64,
    /// Smallest radius used after discarding radii with too few atoms.
    pub radius_floor: f64,
    /// Set when fewer than two radii were usable; the fit then uses all radii.
    pub degenerate: bool,
    pub samples: Vec<BallSample>,
}

/// Uniform bucket index with cell side `h`.
struct Grid {
    h: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(points: &[Complex64], h: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, z) in points.iter().enumerate() {
            buckets.entry(Self::key(h, *z)).or_default().push(i);
        }
        Grid { h, buckets }
    }

    fn key(h: f64, z: Complex64) -> (i64, i64) {
        ((z.re / h).floor() as i64, (z.im / h).floor() as i64)
    }

    /// Atoms within distance `h` of `z`, with their distances.
    fn near(&self, points: &[Complex64], z: Complex64) -> Vec<(f64, usize)> {
        let (kx, ky) = Self::key(self.h, z);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(b) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &i in b {
                        let d = (points[i] - z).norm();
                        if d <= self.h {
                            out.push((d, i));
                        }
                    }
                }
            }
        }
        out
    }
}

fn slope_of(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits `ln mu(B(x, r)) ~ slope * ln r` over centers drawn from the measure.
pub fn ahlfors_regularity(measure: &AtomicMeasure, opts: &AhlforsOptions) -> Result<AhlforsReport> {
    if !(opts.r_min > 0.0) || !(opts.r_max >= 100.0 * opts.r_min) {
        return input("radii must be positive and span at least two decades");
    }
    if opts.radii < 3 || opts.centers == 0 {
        return input("need at least 3 radii and one center");
    }
    let points: Vec<Complex64> = measure
        .atoms()
        .iter()
        .map(|a| a.location.point())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Input("ball masses need atoms with complex locations".into()))?;
    let weights = measure.weights();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::Degenerate(format!("cannot sample centers: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let centers: Vec<usize> = (0..opts.centers).map(|_| dist.sample(&mut rng)).collect();
    let ratio = (opts.r_max / opts.r_min).ln() / (opts.radii - 1) as f64;
    let radii: Vec<f64> = (0..opts.radii).map(|j| opts.r_min * (ratio * j as f64).exp()).collect();
    let grid = Grid::new(&points, opts.r_max);
    // per center: (mass, atom count) at each radius
    let table: Vec<Vec<(f64, usize)>> = centers
        .par_iter()
        .map(|&c| {
            let mut near = grid.near(&points, points[c]);
            near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut out = Vec::with_capacity(radii.len());
            let mut k = 0;
            let mut mass = 0.0;
            for &r in &radii {
                while k < near.len() && near[k].0 <= r {
                    mass += weights[near[k].1];
                    k += 1;
                }
                out.push((mass, k));
            }
            out
        })
        .collect();
    let first_usable = (0..radii.len()).find(|&j| table.iter().all(|row| row[j].1 >= opts.min_atoms));
    let (start, degenerate) = match first_usable {
        Some(j) if radii.len() - j >= 2 => (j, false),
        _ => (0, true),
    };
    let xs: Vec<f64> = radii[start..].iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut per_center = Vec::with_capacity(centers.len());
    let mut ys_all = Vec::with_capacity(centers.len());
    for row in &table {
        let ys: Vec<f64> = row[start..].iter().map(|&(m, _)| m.ln()).collect();
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        for (x, y) in xs.iter().zip(&ys) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        per_center.push(slope_of(&xs, &ys));
        ys_all.push((ys, my));
    }
    let slope = sxy / sxx;
    let mut ss = 0.0;
    let mut count = 0usize;
    for (ys, my) in &ys_all {
        for (x, y) in xs.iter().zip(ys) {
            let r = y - my - slope * (x - mx);
            ss += r * r;
            count += 1;
        }
    }
    let mean_c = per_center.iter().sum::<f64>() / per_center.len() as f64;
    let std = (per_center.iter().map(|s| (s - mean_c) * (s - mean_c)).sum::<f64>() / per_center.len() as f64).sqrt();
    let samples = centers
        .iter()
        .zip(&table)
        .flat_map(|(&c, row)| {
            let z = points[c];
            radii.iter().zip(row).map(move |(&r, &(m, _))| BallSample {
                center_re: z.re,
                center_im: z.im,
                radius: r,
                mass: m,
            })
        })
        .collect();
    Ok(AhlforsReport {
        slope,
        residual: (ss / count as f64).sqrt(),
        center_slope_min: per_center.iter().cloned().fold(f64::INFINITY, f64::min),
        center_slope_max: per_center.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        center_slope_std: std,
        radius_floor: radii[start],
        degenerate,
        samples,
    })
}

/// Dimension `beta / alpha` of the boundary in the visual metric of
/// parameter `alpha`.
pub fn hausdorff_dimension_relation(beta: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return input(format!("metric parameter must be positive, got {alpha}"));
    }
    Ok(beta / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::measure::{Atom, Location, Provenance};
    use approx::assert_relative_eq;

    fn circle(n: usize) -> AtomicMeasure {
        AtomicMeasure::new(
            (0..n)
                .map(|k| Atom {
                    location: Location::Point(Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)),
                    weight: 1.0 / n as f64,
                })
                .collect(),
            Provenance::External,
        )
        .unwrap()
    }

    #[test]
    fn circle_measure_has_slope_one() {
        let r = ahlfors_regularity(&circle(1 << 16), &AhlforsOptions::default()).unwrap();
        assert!((r.slope - 1.0).abs() < 0.02, "{r:?}");
        assert!(!r.degenerate);
        assert_eq!(r.samples.len(), 200 * 21);
    }

    #[test]
    fn single_atom_is_degenerate() {
        let m = AtomicMeasure::new(
            vec![Atom {
                location: Location::Point(Complex64::new(0.3, 0.1)),
                weight: 1.0,
            }],
            Provenance::External,
        )
        .unwrap();
        let r = ahlfors_regularity(&m, &AhlforsOptions::default()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.slope, 0.0);
    }

    #[test]
    fn sparse_small_radii_raise_the_floor() {
        let r = ahlfors_regularity(&circle(2048), &AhlforsOptions::default()).unwrap();
        assert!(r.radius_floor > 1e-3 && !r.degenerate);
        assert!((r.slope - 1.0).abs() < 0.1);
    }

    #[test]
    fn dimension_relation() {
        assert_eq!(hausdorff_dimension_relation(2f64.ln(), 2f64.ln()).unwrap(), 1.0);
        assert_relative_eq!(
            hausdorff_dimension_relation(0.481_211_825_059_603_4, 2f64.ln()).unwrap(),
            0.694_241_913_630_617_3,
            epsilon = 1e-12
        );
        assert!(hausdorff_dimension_relation(1.0, 0.0).is_err());
    }

    #[test]
    fn radii_must_span_two_decades() {
        let o = AhlforsOptions {
            r_max: 5e-2,
            ..AhlforsOptions::default()
        };
        assert!(ahlfors_regularity(&circle(64), &o).is_err());
    }
}
