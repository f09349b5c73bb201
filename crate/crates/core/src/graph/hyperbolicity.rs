//! Four-point hyperbolicity and Busemann increments on cones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cone::GradedCone;
use super::logscale::DistanceTable;
use crate::error::{input, Result};

/// Up to this many points every quadruple is examined.
pub const EXHAUSTIVE_LIMIT: usize = 200;
pub const DEFAULT_DELTA_SEED: u64 = 0x5eed_de17a;
pub const DEFAULT_DELTA_SAMPLES: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub exhaustive: bool,
    /// Number of quadruples examined.
    pub quadruples: u64,
    /// Sampling seed; `None` for exhaustive runs.
    pub seed: Option<u64>,
}

#[inline]
fn four_point(d: &DistanceTable, x: usize, y: usize, z: usize, w: usize) -> f64 {
    let s1 = d.get(x, y) + d.get(z, w);
    let s2 = d.get(x, z) + d.get(y, w);
    let s3 = d.get(x, w) + d.get(y, z);
    // largest minus second largest
    let (hi, mid) = if s1 >= s2 {
        if s2 >= s3 {
            (s1, s2)
        } else if s1 >= s3 {
            (s1, s3)
        } else {
            (s3, s1)
        }
    } else if s1 >= s3 {
        (s2, s1)
    } else if s2 >= s3 {
        (s2, s3)
    } else {
        (s3, s2)
    };
    0.5 * (hi - mid)
}

pub fn estimate_delta_hyperbolicity(d: &DistanceTable) -> Result<DeltaEstimate> {
    estimate_delta_hyperbolicity_with(d, DEFAULT_DELTA_SEED, DEFAULT_DELTA_SAMPLES)
}

/// Gromov four-point constant: the max over quadruples of half the gap between
/// the two largest of the three pair sums.
pub fn estimate_delta_hyperbolicity_with(d: &DistanceTable, seed: u64, samples: usize) -> Result<DeltaEstimate> {
    let n = d.len();
    if n < 4 {
        return input(format!("four-point condition needs at least 4 points, got {n}"));
    }
    if n <= EXHAUSTIVE_LIMIT {
        let mut delta = 0.0f64;
        let mut count = 0u64;
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    for w in z + 1..n {
                        delta = delta.max(four_point(d, x, y, z, w));
                        count += 1;
                    }
                }
            }
        }
        return Ok(DeltaEstimate {
            delta,
            exhaustive: true,
            quadruples: count,
            seed: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta = 0.0f64;
    for _ in 0..samples {
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        let z = rng.random_range(0..n);
        let w = rng.random_range(0..n);
        delta = delta.max(four_point(d, x, y, z, w));
    }
    Ok(DeltaEstimate {
        delta,
        exhaustive: false,
        quadruples: samples as u64,
        seed: Some(seed),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusemannIncrement {
    pub value: f64,
    /// Any horizon at or beyond this depth gives the same value.
    pub stabilization_depth: u32,
}

/// `|v1 - v_h| - |v2 - v_h|` in the unit-edge tree metric, where `v_h` is the
/// node of the ray (root to `ray_end`) at depth `horizon`.
pub fn busemann_increment(
    cone: &GradedCone,
    ray_end: usize,
    v1: usize,
    v2: usize,
    horizon: u32,
) -> Result<BusemannIncrement> {
    cone.check_node(ray_end)?;
    cone.check_node(v1)?;
    cone.check_node(v2)?;
    let ray_depth = cone.nodes()[ray_end].depth;
    if horizon > ray_depth {
        return input(format!("horizon {horizon} not reachable: ray ends at depth {ray_depth}"));
    }
    let vh = cone.ancestor_at(ray_end, horizon).expect("horizon within ray");
    let value = cone.tree_distance(v1, vh) as f64 - cone.tree_distance(v2, vh) as f64;
    let branch = |v: usize| cone.nodes()[cone.common_ancestor(v, ray_end)].depth;
    Ok(BusemannIncrement {
        value,
        stabilization_depth: branch(v1).max(branch(v2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::logscale::{logscale_from_cone, metric_from_logscale};
    use crate::testkit::binary_cone;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect()
    }

    /// Independent oracle: the three sums sorted explicitly.
    fn oracle(d: &DistanceTable) -> f64 {
        let n = d.len();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        let mut s = [
                            d.get(x, y) + d.get(z, w),
                            d.get(x, z) + d.get(y, w),
                            d.get(x, w) + d.get(y, z),
                        ];
                        s.sort_by(f64::total_cmp);
                        best = best.max((s[2] - s[1]) / 2.0);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn six_cycle_has_delta_one() {
        let d = DistanceTable::from_graph(&cycle(6)).unwrap();
        assert_eq!(oracle(&d), 1.0);
        let e = estimate_delta_hyperbolicity(&d).unwrap();
        assert_eq!(e.delta, 1.0);
        assert!(e.exhaustive);
        assert_eq!(e.quadruples, 15);
    }

    #[test]
    fn tree_metric_is_zero_hyperbolic() {
        let c = binary_cone(4);
        let leaves: Vec<_> = c.level(4).collect();
        let t = logscale_from_cone(&c, 0, &leaves).unwrap();
        let m = metric_from_logscale(&t, 0.8).unwrap();
        assert_eq!(estimate_delta_hyperbolicity(&m.distances).unwrap().delta, 0.0);
        // path graph too
        let path: Vec<Vec<usize>> = (0..7usize)
            .map(|i| [i.checked_sub(1), (i < 6).then_some(i + 1)].into_iter().flatten().collect())
            .collect();
        let d = DistanceTable::from_graph(&path).unwrap();
        assert_eq!(estimate_delta_hyperbolicity(&d).unwrap().delta, 0.0);
    }

    #[test]
    fn three_points_rejected() {
        let d = DistanceTable::from_graph(&cycle(3)).unwrap();
        assert!(estimate_delta_hyperbolicity(&d).is_err());
    }

    #[test]
    fn sampling_above_limit_reports_seed() {
        let d = DistanceTable::from_graph(&cycle(210)).unwrap();
        let e = estimate_delta_hyperbolicity_with(&d, 7, 20_000).unwrap();
        assert!(!e.exhaustive);
        assert_eq!(e.seed, Some(7));
        assert_eq!(e.quadruples, 20_000);
        assert!(e.delta > 0.0 && e.delta <= 105.0);
        assert_eq!(e, estimate_delta_hyperbolicity_with(&d, 7, 20_000).unwrap());
    }

    #[test]
    fn busemann_on_ray() {
        let c = binary_cone(6);
        let ray = c.level(6).next().unwrap();
        let v3 = c.ancestor_at(ray, 3).unwrap();
        let v5 = c.ancestor_at(ray, 5).unwrap();
        let b = busemann_increment(&c, ray, v3, v5, 6).unwrap();
        assert_eq!(b.value, 2.0);
        assert_eq!(b.stabilization_depth, 5);
        assert_eq!(busemann_increment(&c, ray, v3, v3, 4).unwrap().value, 0.0);
        assert!(busemann_increment(&c, v3, v3, v5, 4).is_err());
    }

    /// BFS distance over the undirected tree as an independent oracle.
    fn bfs_distance(c: &GradedCone, a: usize, b: usize) -> u32 {
        let n = c.len();
        let mut dist = vec![u32::MAX; n];
        let mut q = std::collections::VecDeque::from([a]);
        dist[a] = 0;
        while let Some(u) = q.pop_front() {
            let mut nb: Vec<usize> = c.children(u).collect();
            nb.extend(c.nodes()[u].parent);
            for v in nb {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        dist[b]
    }

    #[test]
    fn busemann_off_ray_matches_bfs() {
        let c = binary_cone(7);
        let ray = c.level(7).next().unwrap(); // address 0000000
        let v1 = c.level(4).find(|&i| c.address(i) == [0, 1, 1, 0]).unwrap();
        let v2 = c.level(4).find(|&i| c.address(i) == [0, 0, 1, 1]).unwrap();
        for h in 3..=7 {
            let vh = c.ancestor_at(ray, h).unwrap();
            let expect = bfs_distance(&c, v1, vh) as f64 - bfs_distance(&c, v2, vh) as f64;
            let got = busemann_increment(&c, ray, v1, v2, h).unwrap();
            assert_eq!(got.value, expect, "horizon {h}");
            assert_eq!(got.stabilization_depth, 2);
        }
    }

    proptest! {
        #[test]
        fn busemann_additive_along_ray(d1 in 0u32..7, d2 in 0u32..7, d3 in 0u32..7, h in 0u32..=7) {
            let c = binary_cone(7);
            let ray = c.level(7).nth(37).unwrap();
            let v = |d| c.ancestor_at(ray, d).unwrap();
            let b = |a, b| busemann_increment(&c, ray, v(a), v(b), h).unwrap().value;
            prop_assert_eq!(b(d1, d3), b(d1, d2) + b(d2, d3));
        }

        #[test]
        fn gromov_product_is_ultrametric(a in 0usize..63, b in 0usize..63, x in 0usize..63) {
            let c = binary_cone(5);
            let g = |p, q| crate::graph::gromov_product(&c, 0, p, q).unwrap();
            prop_assert!(g(a, x) >= g(a, b).min(g(b, x)));
        }
    }
}
