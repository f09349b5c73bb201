//! Projection of two-sided potentials to cohomologous potentials that depend
//! only on future coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::points::TwoSidedPoint;
use super::system::SftSystem;
use crate::error::{input, Error, Result};

/// Symbol lookup relative to an origin; `None` outside the known window.
pub type Coordinates<'a> = dyn Fn(i64) -> Option<u8> + 'a;

/// A potential on two-sided sequences evaluated through a finite window.
pub trait TwoSidedPotential: Sync {
    /// Inclusive range of coordinates the value reads.
    fn window(&self) -> (i64, i64);
    fn eval(&self, x: &Coordinates) -> Result<f64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `x_position == symbol`
    Symbol { position: i64, symbol: u8 },
    /// `x_a == x_b`
    Equal { a: i64, b: i64 },
}

/// Sum of coefficient times indicator terms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowPotential {
    pub terms: Vec<(f64, Condition)>,
}

impl WindowPotential {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbol(mut self, coefficient: f64, position: i64, symbol: u8) -> Self {
        self.terms.push((coefficient, Condition::Symbol { position, symbol }));
        self
    }

    pub fn equal(mut self, coefficient: f64, a: i64, b: i64) -> Self {
        self.terms.push((coefficient, Condition::Equal { a, b }));
        self
    }
}

fn need(x: &Coordinates, i: i64) -> Result<u8> {
    x(i).ok_or_else(|| Error::Input(format!("coordinate {i} outside the known window")))
}

impl TwoSidedPotential for WindowPotential {
    fn window(&self) -> (i64, i64) {
        let mut lo = 0;
        let mut hi = 0;
        for (_, c) in &self.terms {
            let (a, b) = match *c {
                Condition::Symbol { position, .. } => (position, position),
                Condition::Equal { a, b } => (a.min(b), a.max(b)),
            };
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    fn eval(&self, x: &Coordinates) -> Result<f64> {
        let mut v = 0.0;
        for (coef, c) in &self.terms {
            let hit = match *c {
                Condition::Symbol { position, symbol } => need(x, position)? == symbol,
                Condition::Equal { a, b } => need(x, a)? == need(x, b)?,
            };
            if hit {
                v += coef;
            }
        }
        Ok(v)
    }
}

/// Declared variation bound: points agreeing on `[-n, n]` have values
/// within `constant * theta^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderData {
    pub constant: f64,
    pub theta: f64,
}

impl HolderData {
    pub fn variation(&self, n: usize) -> f64 {
        self.constant * self.theta.powi(n as i32)
    }

    /// `C theta^depth / (1 - theta)`.
    pub fn tail(&self, depth: usize) -> f64 {
        self.variation(depth) / (1.0 - self.theta)
    }
}

/// Shortest, then lexicographically smallest, cycle `s c_1 ... c_{p-1}`
/// returning to `s`.
pub fn reference_cycle(sft: &SftSystem, s: u8) -> Vec<u8> {
    let k = sft.alphabet() as u8;
    let mut layer: Vec<Vec<u8>> = vec![vec![s]];
    for _ in 0..=sft.alphabet() {
        let mut closing: Vec<&Vec<u8>> = layer.iter().filter(|w| sft.allows(*w.last().unwrap(), s)).collect();
        if !closing.is_empty() {
            closing.sort();
            return closing[0].clone();
        }
        let mut next = Vec::new();
        for w in &layer {
            let last = *w.last().unwrap();
            for b in 0..k {
                if sft.allows(last, b) && !w.contains(&b) {
                    let mut v = w.clone();
                    v.push(b);
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    unreachable!("irreducible subshifts have a cycle through every symbol")
}

/// Primitive periodic words of exact period `p`, one per orbit (the least
/// rotation).
pub fn periodic_orbits(sft: &SftSystem, p: usize) -> Vec<Vec<u8>> {
    sft.words(p)
        .into_iter()
        .filter(|w| sft.allows(w[p - 1], w[0]))
        .filter(|w| (1..p).all(|r| {
            let rot: Vec<u8> = w[r..].iter().chain(&w[..r]).cloned().collect();
            rot > *w
        }))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub depth: usize,
    pub tolerance: f64,
    /// Window radii probed by the variation spot check.
    pub check_radius: usize,
    pub check_pairs: usize,
    pub seed: u64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            depth: 40,
            tolerance: 1e-8,
            check_radius: 8,
            check_pairs: 32,
            seed: 0x5eed,
        }
    }
}

pub struct ProjectedCocycle<'a, P: TwoSidedPotential + ?Sized> {
    sft: &'a SftSystem,
    psi: &'a P,
    holder: HolderData,
    depth: usize,
    /// Reference past per symbol: one period, read right to left from `-1`.
    reference: Vec<Vec<u8>>,
}

/// Builds the transfer function and future potential after checking the
/// depth against the declared decay and spot-checking the decay itself.
pub fn project_cocycle<'a, P: TwoSidedPotential + ?Sized>(
    sft: &'a SftSystem,
    psi: &'a P,
    holder: HolderData,
    opts: &ProjectionOptions,
) -> Result<ProjectedCocycle<'a, P>> {
    if !(holder.theta > 0.0 && holder.theta < 1.0) || !(holder.constant >= 0.0) {
        return input(format!("decay ratio must lie in (0, 1), got {}", holder.theta));
    }
    let tail = holder.tail(opts.depth);
    if !(tail < opts.tolerance) {
        return Err(Error::InsufficientDepth {
            what: format!("projection depth {} for decay ratio {}", opts.depth, holder.theta),
            required: opts.tolerance,
            available: tail,
        });
    }
    let reference = (0..sft.alphabet() as u8).map(|s| reference_cycle(sft, s)).collect();
    let proj = ProjectedCocycle {
        sft,
        psi,
        holder,
        depth: opts.depth,
        reference,
    };
    proj.spot_check(opts)?;
    Ok(proj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub word: Vec<u8>,
    pub birkhoff_psi: f64,
    pub birkhoff_psi_plus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LivsicReport {
    pub max_period: usize,
    pub orbits: Vec<OrbitRow>,
    pub max_difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FutureCertificate {
    pub pairs: usize,
    pub max_difference: f64,
    pub bound: f64,
    pub passed: bool,
}

impl<'a, P: TwoSidedPotential + ?Sized> ProjectedCocycle<'a, P> {
    pub fn tail_bound(&self) -> f64 {
        self.holder.tail(self.depth)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn reference_cycle(&self, s: u8) -> &[u8] {
        &self.reference[s as usize]
    }

    fn reference_at(&self, s: u8, i: i64) -> u8 {
        // the cycle s c_1 .. c_{p-1} sits at -p .. -1, then repeats leftward
        let c = &self.reference[s as usize];
        let p = c.len() as i64;
        c[i.rem_euclid(p) as usize]
    }

    /// `phi(sigma^k x)`.
    pub fn phi_at(&self, x: &TwoSidedPoint, k: i64) -> Result<f64> {
        let seam = x.at(k).ok_or_else(|| Error::Input(format!("coordinate {k} outside the known window")))?;
        let mut sum = 0.0;
        for n in 0..=self.depth as i64 {
            let orig = |i: i64| x.at(k + n + i);
            let star = |i: i64| {
                let j = n + i;
                if j >= 0 {
                    x.at(k + j)
                } else {
                    Some(self.reference_at(seam, j))
                }
            };
            sum += self.psi.eval(&orig)? - self.psi.eval(&star)?;
        }
        Ok(sum)
    }

    pub fn phi(&self, x: &TwoSidedPoint) -> Result<f64> {
        self.phi_at(x, 0)
    }

    pub fn psi_at(&self, x: &TwoSidedPoint, k: i64) -> Result<f64> {
        self.psi.eval(&|i| x.at(k + i))
    }

    /// `psi_plus(sigma^k x) = psi - phi + phi o sigma` at `sigma^k x`.
    pub fn psi_plus_at(&self, x: &TwoSidedPoint, k: i64) -> Result<f64> {
        Ok(self.psi_at(x, k)? - self.phi_at(x, k)? + self.phi_at(x, k + 1)?)
    }

    pub fn psi_plus(&self, x: &TwoSidedPoint) -> Result<f64> {
        self.psi_plus_at(x, 0)
    }

    /// Future coordinates a point needs for `psi_plus` at shifts `0..shifts`.
    pub fn future_len(&self, shifts: usize) -> usize {
        let (_, hi) = self.psi.window();
        shifts + self.depth + hi.max(0) as usize + 2
    }

    pub fn past_len(&self) -> usize {
        let (lo, _) = self.psi.window();
        (-lo).max(0) as usize + 1
    }

    fn random_successor(&self, rng: &mut ChaCha8Rng, a: u8) -> u8 {
        let next: Vec<u8> = (0..self.sft.alphabet() as u8).filter(|&b| self.sft.allows(a, b)).collect();
        next[rng.random_range(0..next.len())]
    }

    fn random_predecessor(&self, rng: &mut ChaCha8Rng, b: u8) -> u8 {
        let prev: Vec<u8> = (0..self.sft.alphabet() as u8).filter(|&a| self.sft.allows(a, b)).collect();
        prev[rng.random_range(0..prev.len())]
    }

    /// Random admissible past of length `len` joining into `seam`.
    fn random_past(&self, rng: &mut ChaCha8Rng, seam: u8, len: usize) -> Vec<u8> {
        let mut past = Vec::with_capacity(len);
        let mut cur = seam;
        for _ in 0..len {
            cur = self.random_predecessor(rng, cur);
            past.push(cur);
        }
        past.reverse();
        past
    }

    fn random_future(&self, rng: &mut ChaCha8Rng, start: u8, len: usize) -> Vec<u8> {
        let mut f = vec![start];
        while f.len() < len {
            let b = self.random_successor(rng, *f.last().unwrap());
            f.push(b);
        }
        f
    }

    /// Pairs agreeing on `[-n, n]` must have values within `C theta^n`.
    fn spot_check(&self, opts: &ProjectionOptions) -> Result<()> {
        let (lo, hi) = self.psi.window();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let k = self.sft.alphabet() as u8;
        for n in 0..=opts.check_radius {
            let reach_past = (n as i64).max(-lo) as usize + 1;
            let reach_future = (n as i64).max(hi) as usize + 1;
            for _ in 0..opts.check_pairs {
                let seam = rng.random_range(0..k);
                let past = self.random_past(&mut rng, seam, reach_past);
                let future = self.random_future(&mut rng, seam, reach_future);
                let x = TwoSidedPoint::new(self.sft, past.clone(), future.clone())?;
                // keep [-n, n], resample outside
                let mut past2 = past[past.len() - n..].to_vec();
                let first = past2.first().copied().unwrap_or(seam);
                let mut outer = self.random_past(&mut rng, first, reach_past - n);
                outer.append(&mut past2);
                let keep = (n + 1).min(future.len());
                let future2 = {
                    let mut f = future[..keep].to_vec();
                    let tail = self.random_future(&mut rng, *f.last().unwrap(), reach_future - keep + 1);
                    f.extend_from_slice(&tail[1..]);
                    f
                };
                let y = TwoSidedPoint::new(self.sft, outer, future2)?;
                let observed = (self.psi.eval(&|i| x.at(i))? - self.psi.eval(&|i| y.at(i))?).abs();
                let bound = self.holder.variation(n);
                if observed > bound + 1e-12 {
                    return Err(Error::HolderViolation {
                        lo: -(n as i64),
                        hi: n as i64,
                        observed,
                        bound,
                    });
                }
            }
        }
        Ok(())
    }

    /// Periodic point of `word` with enough coordinates for one period.
    pub fn periodic_point(&self, word: &[u8]) -> Result<TwoSidedPoint> {
        let p = word.len();
        let past_len = self.past_len().div_ceil(p) * p;
        let past: Vec<u8> = (0..past_len).map(|i| word[i % p]).collect();
        let future: Vec<u8> = (0..self.future_len(p)).map(|i| word[i % p]).collect();
        TwoSidedPoint::new(self.sft, past, future)
    }

    /// Birkhoff sums of `psi` and `psi_plus` over every periodic orbit of
    /// period at most `max_period`.
    pub fn livsic_check(&self, max_period: usize) -> Result<LivsicReport> {
        let mut orbits = Vec::new();
        let mut max_difference: f64 = 0.0;
        for p in 1..=max_period {
            for word in periodic_orbits(self.sft, p) {
                let x = self.periodic_point(&word)?;
                let mut a = 0.0;
                let mut b = 0.0;
                for j in 0..p as i64 {
                    a += self.psi_at(&x, j)?;
                    b += self.psi_plus_at(&x, j)?;
                }
                max_difference = max_difference.max((a - b).abs());
                orbits.push(OrbitRow {
                    word,
                    birkhoff_psi: a,
                    birkhoff_psi_plus: b,
                });
            }
        }
        Ok(LivsicReport {
            max_period,
            orbits,
            max_difference,
        })
    }

    /// `psi_plus` on random pairs sharing a future window of length
    /// `depth + window` with independent pasts.
    pub fn future_certificate(&self, pairs: usize, seed: u64) -> Result<FutureCertificate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.sft.alphabet() as u8;
        let mut max_difference: f64 = 0.0;
        for _ in 0..pairs {
            let seam = rng.random_range(0..k);
            let future = self.random_future(&mut rng, seam, self.future_len(1));
            let len = self.past_len() + 4;
            let x = TwoSidedPoint::new(self.sft, self.random_past(&mut rng, seam, len), future.clone())?;
            let y = TwoSidedPoint::new(self.sft, self.random_past(&mut rng, seam, len), future)?;
            max_difference = max_difference.max((self.psi_plus(&x)? - self.psi_plus(&y)?).abs());
        }
        let bound = 2.0 * self.tail_bound();
        Ok(FutureCertificate {
            pairs,
            max_difference,
            bound,
            passed: max_difference <= bound,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn holder() -> HolderData {
        HolderData {
            constant: 4.0,
            theta: 0.5,
        }
    }

    #[test]
    fn reference_cycles() {
        let g = SftSystem::golden_mean();
        assert_eq!(reference_cycle(&g, 0), vec![0]);
        assert_eq!(reference_cycle(&g, 1), vec![1, 0]);
        let c = SftSystem::new(vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        assert_eq!(reference_cycle(&c, 1), vec![1, 2, 0]);
    }

    #[test]
    fn orbit_counts_match_necklaces() {
        // primitive binary necklaces: 2, 1, 2, 3, 6, 9
        let f = SftSystem::full_shift(2).unwrap();
        let counts: Vec<usize> = (1..=6).map(|p| periodic_orbits(&f, p).len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9]);
    }

    #[test]
    fn future_potential_is_unchanged() {
        let f = SftSystem::full_shift(2).unwrap();
        let psi = WindowPotential::new().symbol(1.5, 0, 1).equal(-0.25, 1, 3);
        let proj = project_cocycle(&f, &psi, holder(), &ProjectionOptions::default()).unwrap();
        let x = TwoSidedPoint::new(&f, vec![1, 0, 1], vec![1, 0, 1, 1, 0, 0, 1].repeat(8)).unwrap();
        assert_eq!(proj.phi(&x).unwrap(), 0.0);
        assert_eq!(proj.psi_plus(&x).unwrap(), psi.eval(&|i| x.at(i)).unwrap());
    }

    #[test]
    fn past_coordinate_projects_and_telescopes() {
        let f = SftSystem::full_shift(2).unwrap();
        let psi = WindowPotential::new().symbol(1.0, -1, 1);
        let proj = project_cocycle(&f, &psi, holder(), &ProjectionOptions::default()).unwrap();
        let report = proj.livsic_check(6).unwrap();
        assert_eq!(report.orbits.len(), 23);
        assert!(report.max_difference <= 1e-12, "{report:?}");
        let cert = proj.future_certificate(100, 3).unwrap();
        assert!(cert.passed && cert.max_difference <= 1e-12, "{cert:?}");
    }

    #[test]
    fn depth_too_small_is_rejected() {
        let f = SftSystem::full_shift(2).unwrap();
        let psi = WindowPotential::new().symbol(1.0, -1, 1);
        let opts = ProjectionOptions {
            depth: 5,
            ..ProjectionOptions::default()
        };
        assert!(matches!(
            project_cocycle(&f, &psi, holder(), &opts),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn understated_variation_is_caught() {
        let f = SftSystem::full_shift(2).unwrap();
        let psi = WindowPotential::new().symbol(1.0, -5, 1);
        let tight = HolderData {
            constant: 0.5,
            theta: 0.5,
        };
        match project_cocycle(&f, &psi, tight, &ProjectionOptions::default()) {
            Err(Error::HolderViolation { lo, hi, .. }) => assert!(lo >= -4 && hi <= 4),
            other => panic!("expected a violation, got {:?}", other.err()),
        }
    }

    proptest! {
        #[test]
        fn livsic_golden_mean(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
            let g = SftSystem::golden_mean();
            let psi = WindowPotential::new().symbol(c1, -1, 1).equal(c2, -2, 0);
            let h = HolderData { constant: 2.0 * (c1.abs() + c2.abs()) + 1.0, theta: 0.5 };
            let proj = project_cocycle(&g, &psi, h, &ProjectionOptions::default()).unwrap();
            prop_assert!(proj.livsic_check(6).unwrap().max_difference <= 1e-10);
        }
    }
}
