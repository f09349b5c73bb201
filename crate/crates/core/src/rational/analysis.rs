//! Measures, distortion, dimension and dual cocycles of a certified map.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cone::{build_preimage_cone, level_cone, DERIVATIVE, LEVEL};
use super::map::RationalMap;
use super::system::RationalMapSystem;
use crate::conformal::{critical_exponent_graded, Atom, AtomicMeasure, BranchPair, CriticalExponent, Location, Provenance};
use crate::error::{input, Error, Result};
use crate::graph::{Budget, GradedCone};
use crate::growth::Potential;

/// Uniform measure `d^{-n}` on the depth-`n` preimages of the seed.
pub fn brolin_lyubich(system: &RationalMapSystem, n: u32) -> Result<AtomicMeasure> {
    let cone = level_cone(system, n)?;
    let w = (system.degree() as f64).powi(-(n as i32));
    let atoms = cone
        .level(n)
        .map(|i| Atom {
            location: Location::Point(cone.nodes()[i].payload.point().expect("point payload")),
            weight: w,
        })
        .collect();
    AtomicMeasure::new(atoms, Provenance::BrolinLyubich)
}

/// Uniform weights `d^{-depth}` on every node through depth `n`, with the
/// parent-to-child pairs and their level increments.
pub fn brolin_lyubich_hierarchy(system: &RationalMapSystem, n: u32) -> Result<(AtomicMeasure, Vec<BranchPair>)> {
    let cone = level_cone(system, n)?;
    let d = system.degree() as f64;
    let atoms = cone
        .nodes()
        .iter()
        .map(|node| Atom {
            location: Location::Point(node.payload.point().expect("point payload")),
            weight: d.powi(-(node.depth as i32)),
        })
        .collect();
    let pairs = (1..cone.len())
        .map(|i| BranchPair {
            source: cone.nodes()[i].parent.expect("non-root"),
            target: i,
            increment: 1.0,
        })
        .collect();
    Ok((AtomicMeasure::new(atoms, Provenance::BrolinLyubich)?, pairs))
}

/// `f_* mu`: atoms moved by `f`, merging images closer than `merge`.
pub fn pushforward(map: &RationalMap, measure: &AtomicMeasure, merge: f64) -> Result<AtomicMeasure> {
    if !(merge > 0.0) {
        return input("merge radius must be positive");
    }
    let images: Vec<Complex64> = measure
        .atoms()
        .iter()
        .map(|a| {
            let z = a
                .location
                .point()
                .ok_or_else(|| Error::Input("pushforward needs point atoms".into()))?;
            map.evaluate(z)
        })
        .collect::<Result<_>>()?;
    let key = |z: Complex64| ((z.re / merge).floor() as i64, (z.im / merge).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut atoms: Vec<Atom> = Vec::new();
    for (z, a) in images.iter().zip(measure.atoms()) {
        let (kx, ky) = key(*z);
        let mut hit = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(b) = buckets.get(&(kx + dx, ky + dy)) {
                    for &j in b {
                        if (atoms[j].location.point().expect("point") - z).norm() <= merge {
                            hit = Some(j);
                            break 'search;
                        }
                    }
                }
            }
        }
        match hit {
            Some(j) => atoms[j].weight += a.weight,
            None => {
                buckets.entry((kx, ky)).or_default().push(atoms.len());
                atoms.push(Atom {
                    location: Location::Point(*z),
                    weight: a.weight,
                });
            }
        }
    }
    AtomicMeasure::new(atoms, measure.provenance())
}

/// Evenly spaced sample of at most `count` nodes at `depth`.
pub fn sample_level(cone: &GradedCone, depth: u32, count: usize) -> Vec<usize> {
    let level: Vec<usize> = cone.level(depth).collect();
    if level.len() <= count || count == 0 {
        return level;
    }
    (0..count).map(|k| level[k * level.len() / count]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub epsilon: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// `max(max_ratio, 1 / min_ratio)`.
    pub constant: f64,
    pub pairs: usize,
    /// Pairs dropped because the continuation was ambiguous.
    pub skipped: usize,
}

const DIRECTIONS: usize = 4;

/// Nearest root of `f(z) = w` to `target`, or `None` when the two nearest
/// are indistinguishable.
fn continue_branch(map: &RationalMap, w: Complex64, target: Complex64, tol: f64) -> Result<Option<Complex64>> {
    let pre = map.preimages(w, tol)?;
    let mut d: Vec<(f64, Complex64)> = pre.roots.iter().map(|&r| ((r - target).norm(), r)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    if d.len() > 1 && d[1].0 - d[0].0 <= 1e3 * tol * (1.0 + d[1].0) {
        return Ok(None);
    }
    Ok(Some(d[0].1))
}

/// Compares `|B(x) - B(y)|` with `e^{-nu_1(node)} |x - y|` for the inverse
/// branch chain `B` from the seed to each node, with `x` the seed and `y`
/// at distance `epsilon` in a few fixed directions.
pub fn distortion_check(
    system: &RationalMapSystem,
    cone: &GradedCone,
    nodes: &[usize],
    epsilon: f64,
) -> Result<DistortionReport> {
    if !(epsilon > 0.0) {
        return input("pair offset must be positive");
    }
    let map = system.map();
    let tol = system.root_tol();
    let x0 = system.seed();
    let results: Vec<Result<Vec<Option<f64>>>> = nodes
        .par_iter()
        .map(|&node| {
            let path = cone.path(node);
            let points: Vec<Complex64> = path
                .iter()
                .map(|&i| cone.nodes()[i].payload.point().expect("point payload"))
                .collect();
            let scale = (-cone.grading(node, DERIVATIVE)).exp();
            let mut out = Vec::with_capacity(DIRECTIONS);
            for k in 0..DIRECTIONS {
                let y0 = x0 + Complex64::from_polar(epsilon, std::f64::consts::TAU * (k as f64 + 0.125) / DIRECTIONS as f64);
                let mut y = y0;
                let mut ok = true;
                for &target in &points[1..] {
                    match continue_branch(map, y, target, tol)? {
                        Some(r) => y = r,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                let bx = *points.last().expect("non-empty path");
                out.push(ok.then(|| (bx - y).norm() / (scale * (x0 - y0).norm())));
            }
            Ok(out)
        })
        .collect();
    let mut max_ratio: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    let mut pairs = 0;
    let mut skipped = 0;
    for r in results {
        for v in r? {
            match v {
                Some(ratio) => {
                    pairs += 1;
                    max_ratio = max_ratio.max(ratio);
                    min_ratio = min_ratio.min(ratio);
                }
                None => skipped += 1,
            }
        }
    }
    if pairs == 0 {
        return Err(Error::Degenerate("every pair had an ambiguous continuation".into()));
    }
    Ok(DistortionReport {
        epsilon,
        max_ratio,
        min_ratio,
        constant: max_ratio.max(1.0 / min_ratio),
        pairs,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRatio {
    pub node: usize,
    pub depth: u32,
    /// `mu(B(A)) / mu(A)`.
    pub ratio: f64,
    /// `e^{-delta * nu_1(node)}`.
    pub expected: f64,
    pub factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRatioReport {
    pub delta: f64,
    pub radius: f64,
    pub atom_depth: u32,
    /// Level atoms in the ball around the seed.
    pub atoms_in_ball: usize,
    /// Fewest atoms behind any image cell (those at the deepest branch depth).
    pub min_image_atoms: usize,
    /// Sources whose descendants did not match the branch points one to one.
    pub ambiguous: usize,
    pub max_factor: f64,
    pub max_relative_deviation: f64,
    pub rows: Vec<BranchRatio>,
}

/// Radon-Nikodym ratios of the level atomic measure `e^{-delta nu_1}` on
/// the deepest level of `cone`, along inverse branches: for every node `g`
/// of depth `1..=max_branch_depth`, `mu(B_g(A)) / mu(A)` against
/// `e^{-delta nu_1(g)}`, with `A` the ball of `radius` around the seed and
/// `B_g` the branch of `f^{-k}` taking the seed to `g`.
///
/// The atoms in `B_g(A)` are the deepest-level descendants of the atoms of
/// depth `n - k` lying in `A`, each matched to its nearest depth-`k` node.
pub fn branch_derivative_ratios(
    system: &RationalMapSystem,
    cone: &GradedCone,
    delta: f64,
    radius: f64,
    max_branch_depth: u32,
) -> Result<BranchRatioReport> {
    if !(radius > 0.0) || !delta.is_finite() {
        return input("radius must be positive and the exponent finite");
    }
    let n = cone.max_depth();
    if max_branch_depth == 0 || max_branch_depth >= n {
        return input(format!("branch depth must lie in 1..{n}"));
    }
    let x0 = system.seed();
    let point = |i: usize| cone.nodes()[i].payload.point().expect("point payload");
    let weight = |i: usize| (-delta * cone.grading(i, DERIVATIVE)).exp();
    let in_ball = |i: usize| (point(i) - x0).norm() < radius;

    let ball: Vec<usize> = cone.level(n).filter(|&i| in_ball(i)).collect();
    let mass: f64 = ball.iter().map(|&i| weight(i)).sum();
    if ball.is_empty() {
        return Err(Error::Degenerate(format!("no depth-{n} atoms within {radius} of the seed")));
    }

    let per_depth: Vec<Result<(Vec<BranchRatio>, usize, usize)>> = (1..=max_branch_depth)
        .into_par_iter()
        .map(|k| {
            let branches: Vec<usize> = cone.level(k).collect();
            let targets: Vec<Complex64> = branches.iter().map(|&g| point(g)).collect();
            let sources: Vec<usize> = cone.level(n - k).filter(|&i| in_ball(i)).collect();
            let mut image = vec![0.0; branches.len()];
            let mut ambiguous = 0;
            let mut hit = vec![false; branches.len()];
            for &u in &sources {
                let mut frontier = vec![u];
                for _ in 0..k {
                    frontier = frontier.iter().flat_map(|&p| cone.children(p)).collect();
                }
                hit.iter_mut().for_each(|h| *h = false);
                let mut clash = false;
                for &v in &frontier {
                    let z = point(v);
                    let j = (0..targets.len())
                        .min_by(|&a, &b| (targets[a] - z).norm().total_cmp(&(targets[b] - z).norm()))
                        .expect("non-empty level");
                    clash |= std::mem::replace(&mut hit[j], true);
                    image[j] += weight(v);
                }
                if clash || frontier.len() != branches.len() {
                    ambiguous += 1;
                }
            }
            let rows = branches
                .iter()
                .zip(&image)
                .map(|(&g, &m)| {
                    let ratio = m / mass;
                    let expected = (-delta * cone.grading(g, DERIVATIVE)).exp();
                    let q = ratio / expected;
                    BranchRatio {
                        node: g,
                        depth: k,
                        ratio,
                        expected,
                        factor: if q > 0.0 { q.max(1.0 / q) } else { f64::INFINITY },
                    }
                })
                .collect();
            Ok((rows, sources.len(), ambiguous))
        })
        .collect();

    let mut rows = Vec::new();
    let mut ambiguous = 0;
    let mut min_image_atoms = usize::MAX;
    for r in per_depth {
        let (r, s, a) = r?;
        rows.extend(r);
        min_image_atoms = min_image_atoms.min(s);
        ambiguous += a;
    }
    let max_factor = rows.iter().map(|r| r.factor).fold(1.0, f64::max);
    let max_relative_deviation = rows.iter().map(|r| (r.ratio / r.expected - 1.0).abs()).fold(0.0, f64::max);
    Ok(BranchRatioReport {
        delta,
        radius,
        atom_depth: n,
        atoms_in_ball: ball.len(),
        min_image_atoms,
        ambiguous,
        max_factor,
        max_relative_deviation,
        rows,
    })
}

/// Critical exponent of `sum |(f^n)'(z)|^{-s}` over the preimage tree
/// grown to `budget`. Pressure is measured in level annuli.
pub fn julia_dimension(system: &RationalMapSystem, budget: Budget, tol: f64) -> Result<CriticalExponent> {
    if !(tol > 0.0) {
        return input("tolerance must be positive");
    }
    // sums of edge increments can overshoot an exact budget by rounding
    let slack = Budget {
        limit: budget.limit + 1e-9 * (1.0 + budget.limit),
        ..budget
    };
    let cone = build_preimage_cone(system, slack)?;
    critical_exponent_graded(&cone, DERIVATIVE, LEVEL, &Potential::zero(), tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCocycle {
    pub value: f64,
    pub tail_bound: f64,
    /// Largest one-step ratio `|z_{k+1} - w_{k+1}| / |z_k - w_k|`.
    pub contraction: f64,
    pub depth: usize,
    pub shadowing_radius: f64,
}

/// Separations below this are treated as rounding noise.
const DISTANCE_FLOOR: f64 = 1e-12;

/// `z_0 = z`, then `z_k` the first (label 0) preimage of `z_{k-1}`.
/// Also returns a quarter of the smallest sibling separation.
pub fn backward_orbit(system: &RationalMapSystem, z: Complex64, depth: usize) -> Result<(Vec<Complex64>, f64)> {
    let mut orbit = vec![z];
    let mut radius = f64::INFINITY;
    for _ in 0..depth {
        let pre = system.map().preimages(*orbit.last().expect("non-empty"), system.root_tol())?;
        for i in 0..pre.roots.len() {
            for j in i + 1..pre.roots.len() {
                radius = radius.min(0.25 * (pre.roots[i] - pre.roots[j]).norm());
            }
        }
        orbit.push(pre.roots[0]);
    }
    Ok((orbit, radius))
}

/// `w_0 = w`, then `w_k` the preimage of `w_{k-1}` nearest to `backbone[k]`.
pub fn shadow_orbit(system: &RationalMapSystem, backbone: &[Complex64], w: Complex64) -> Result<Vec<Complex64>> {
    let mut orbit = vec![w];
    for (k, &target) in backbone.iter().enumerate().skip(1) {
        let prev = *orbit.last().expect("non-empty");
        match continue_branch(system.map(), prev, target, system.root_tol())? {
            Some(r) => orbit.push(r),
            None => {
                return Err(Error::Shadowing {
                    step: k,
                    reason: "two preimages are equally close to the reference orbit".into(),
                })
            }
        }
    }
    Ok(orbit)
}

/// Sum of `ln|f'(z_k)| - ln|f'(w_k)|` along two orbits of equal length,
/// with a geometric tail bound from the measured contraction.
pub fn dual_cocycle_from_orbits(
    system: &RationalMapSystem,
    zs: &[Complex64],
    ws: &[Complex64],
    shadowing_radius: f64,
) -> Result<DualCocycle> {
    if zs.len() != ws.len() || zs.is_empty() {
        return input("orbits must be non-empty and of equal length");
    }
    let depth = zs.len() - 1;
    let map = system.map();
    let mut value = 0.0;
    let mut lipschitz: f64 = 0.0;
    let mut contraction: f64 = 0.0;
    for k in 0..depth {
        let term = map.derivative(zs[k])?.norm().ln() - map.derivative(ws[k])?.norm().ln();
        value += term;
        let dist = (zs[k] - ws[k]).norm();
        if dist > DISTANCE_FLOOR {
            lipschitz = lipschitz.max(term.abs() / dist);
            let next = (zs[k + 1] - ws[k + 1]).norm();
            if next > DISTANCE_FLOOR {
                contraction = contraction.max(next / dist);
            }
        }
    }
    if contraction >= 1.0 {
        return Err(Error::Shadowing {
            step: depth,
            reason: format!("orbits do not contract (ratio {contraction})"),
        });
    }
    let last = (zs[depth] - ws[depth]).norm().max(DISTANCE_FLOOR);
    let rounding = depth as f64 * 8.0 * f64::EPSILON;
    let tail_bound = if value == 0.0 && lipschitz == 0.0 {
        0.0
    } else {
        lipschitz.max(1.0) * last / (1.0 - contraction.max(0.5)) + rounding
    };
    Ok(DualCocycle {
        value,
        tail_bound,
        contraction,
        depth,
        shadowing_radius,
    })
}

/// Dual cocycle between nearby points: `w` shadows the label-0 backward
/// orbit of `z` for `depth` steps.
pub fn dual_cocycle(system: &RationalMapSystem, z: Complex64, w: Complex64, depth: usize) -> Result<DualCocycle> {
    let (zs, radius) = backward_orbit(system, z, depth)?;
    if (z - w).norm() >= radius {
        return Err(Error::Shadowing {
            step: 0,
            reason: format!("|z - w| = {:e} is not below the shadowing radius {radius:e}", (z - w).norm()),
        });
    }
    let ws = shadow_orbit(system, &zs, w)?;
    dual_cocycle_from_orbits(system, &zs, &ws, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::radon_nikodym_check;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_ratios_on_the_circle() {
        let s = RationalMapSystem::quadratic(0.0).unwrap();
        let cone = level_cone(&s, 12).unwrap();
        let r = branch_derivative_ratios(&s, &cone, 1.0, 0.3, 4).unwrap();
        assert_eq!(r.rows.len(), 2 + 4 + 8 + 16);
        assert_eq!(r.ambiguous, 0);
        for row in &r.rows {
            assert!((row.expected - 0.5f64.powi(row.depth as i32)).abs() < 1e-12);
        }
        assert!(r.max_factor < 1.05, "{}", r.max_factor);
        assert!(branch_derivative_ratios(&s, &cone, 1.0, 0.3, 12).is_err());
        assert!(branch_derivative_ratios(&s, &cone, 1.0, 0.0, 2).is_err());
    }

    #[test]
    fn branch_ratios_detect_a_wrong_exponent() {
        let s = RationalMapSystem::quadratic(0.0).unwrap();
        let cone = level_cone(&s, 12).unwrap();
        let r = branch_derivative_ratios(&s, &cone, 1.5, 0.3, 4).unwrap();
        assert!(r.max_factor > 1.5, "{}", r.max_factor);
    }

    #[test]
    fn brolin_lyubich_on_the_circle() {
        let s = RationalMapSystem::quadratic(0.0).unwrap();
        let m = brolin_lyubich(&s, 3).unwrap();
        assert_eq!(m.len(), 8);
        assert_eq!(m.total_mass(), 1.0);
        for a in m.atoms() {
            assert_eq!(a.weight, 0.125);
            let z = a.location.point().unwrap();
            assert!((z.powi(8) - c(1.0, 0.0)).norm() < 1e-13);
        }
        let m0 = brolin_lyubich(&s, 0).unwrap();
        assert_eq!(m0.len(), 1);
        assert_eq!(m0.atoms()[0].weight, 1.0);
    }

    #[test]
    fn pushforward_is_balanced() {
        let s = RationalMapSystem::quadratic(-1.0).unwrap();
        let fine = brolin_lyubich(&s, 6).unwrap();
        let coarse = brolin_lyubich(&s, 5).unwrap();
        let pushed = pushforward(s.map(), &fine, 1e-9).unwrap();
        assert_eq!(pushed.len(), coarse.len());
        for a in coarse.atoms() {
            let z = a.location.point().unwrap();
            let hit = pushed.atoms().iter().find(|b| (b.location.point().unwrap() - z).norm() < 1e-9).unwrap();
            assert_eq!(hit.weight, a.weight);
        }
        let (h, pairs) = brolin_lyubich_hierarchy(&s, 5).unwrap();
        let r = radon_nikodym_check(&h, &pairs, 2f64.ln()).unwrap();
        assert!(r.max_relative_deviation <= 1e-12);
    }

    #[test]
    fn distortion_on_the_circle() {
        let s = RationalMapSystem::quadratic(0.0).unwrap();
        let cone = level_cone(&s, 10).unwrap();
        let root = distortion_check(&s, &cone, &[0], 1e-4).unwrap();
        assert_eq!((root.max_ratio, root.min_ratio), (1.0, 1.0));
        let deep = sample_level(&cone, 10, 32);
        let tight = distortion_check(&s, &cone, &deep, 1e-4).unwrap();
        let loose = distortion_check(&s, &cone, &deep, 1e-2).unwrap();
        assert!(tight.constant <= 1.01, "{tight:?}");
        assert!(tight.constant <= loose.constant);
    }

    #[test]
    fn distortion_against_chain_rule() {
        let s = RationalMapSystem::quadratic(0.2).unwrap();
        let cone = level_cone(&s, 10).unwrap();
        let nodes = sample_level(&cone, 10, 16);
        let r = distortion_check(&s, &cone, &nodes, 1e-4).unwrap();
        assert!(r.constant.is_finite() && r.constant < 1.05, "{r:?}");
        for &n in &nodes {
            let mut z = cone.nodes()[n].payload.point().unwrap();
            let mut d = c(1.0, 0.0);
            for _ in 0..10 {
                d *= s.map().derivative(z).unwrap();
                z = s.map().evaluate(z).unwrap();
            }
            assert!((cone.grading(n, DERIVATIVE) - d.norm().ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_of_the_circle() {
        let s = RationalMapSystem::quadratic(0.0).unwrap();
        let b = Budget {
            cocycle: DERIVATIVE,
            limit: 12.0 * 2f64.ln(),
        };
        let e = julia_dimension(&s, b, 1e-6).unwrap();
        assert!((e.s - 1.0).abs() < 1e-5, "{e:?}");
        assert!(julia_dimension(&s, b, 0.0).is_err());
    }

    #[test]
    fn dimension_slightly_above_one() {
        let s = RationalMapSystem::quadratic(0.05).unwrap();
        let at = |d: f64| {
            julia_dimension(&s, Budget { cocycle: LEVEL, limit: d }, 1e-6).unwrap().s
        };
        let (a, b) = (at(12.0), at(14.0));
        assert!(a > 1.0 && a < 1.1 && (a - b).abs() < 0.02, "{a} {b}");
    }

    #[test]
    fn dual_cocycle_examples() {
        let sq = RationalMapSystem::quadratic(0.0).unwrap();
        let z = c(0.6, 0.8);
        assert_eq!(dual_cocycle(&sq, z, z, 20).unwrap().value, 0.0);
        let w = Complex64::from_polar(1.0, z.arg() + 1e-3);
        for depth in [5, 20, 40] {
            assert!(dual_cocycle(&sq, z, w, depth).unwrap().value.abs() < 1e-13);
        }
    }

    #[test]
    fn dual_cocycle_converges_on_the_basilica() {
        let s = RationalMapSystem::quadratic(-1.0).unwrap();
        let z = s.julia_sample()[100];
        let near = s
            .julia_sample()
            .iter()
            .filter(|p| (*p - z).norm() > 0.0)
            .min_by(|a, b| (*a - z).norm().total_cmp(&(*b - z).norm()))
            .copied()
            .unwrap();
        let w = z + (near - z) * (1e-3 / (near - z).norm());
        let d40 = dual_cocycle(&s, z, w, 40).unwrap();
        let d80 = dual_cocycle(&s, z, w, 80).unwrap();
        assert!(d40.tail_bound < 1e-8, "{d40:?}");
        assert!((d40.value - d80.value).abs() <= d40.tail_bound + d80.tail_bound, "{d40:?} {d80:?}");
    }

    #[test]
    fn dual_cocycle_is_additive() {
        let s = RationalMapSystem::quadratic(0.2).unwrap();
        let z = s.julia_sample()[7];
        let (zs, r) = backward_orbit(&s, z, 30).unwrap();
        let w = z + c(2e-4, 1e-4);
        let v = z + c(-1e-4, 3e-4);
        let ws = shadow_orbit(&s, &zs, w).unwrap();
        let vs = shadow_orbit(&s, &zs, v).unwrap();
        let zw = dual_cocycle_from_orbits(&s, &zs, &ws, r).unwrap();
        let wv = dual_cocycle_from_orbits(&s, &ws, &vs, r).unwrap();
        let zv = dual_cocycle_from_orbits(&s, &zs, &vs, r).unwrap();
        let gap = (zw.value + wv.value - zv.value).abs();
        assert!(gap <= zw.tail_bound + wv.tail_bound + zv.tail_bound, "{gap}");
    }

    #[test]
    fn far_points_are_rejected() {
        let s = RationalMapSystem::quadratic(-1.0).unwrap();
        assert!(matches!(
            dual_cocycle(&s, c(1.6, 0.0), c(-1.6, 0.0), 10),
            Err(Error::Shadowing { step: 0, .. })
        ));
    }
}
