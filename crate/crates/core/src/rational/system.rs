//! A rational map together with a seed point and a heuristic
//! hyperbolicity certificate.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::RationalMap;
use crate::error::{input, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    /// Forward iterations applied to each critical point.
    pub iterations: usize,
    /// Return distance that counts as having found a cycle.
    pub attraction_tol: f64,
    pub max_period: usize,
    /// Required separation between critical orbits and the Julia sample.
    pub min_distance: f64,
    /// Upper bound on the size of the Julia sample.
    pub julia_points: usize,
}

impl Default for CertificateParams {
    fn default() -> Self {
        CertificateParams {
            iterations: 500,
            attraction_tol: 1e-8,
            max_period: 64,
            min_distance: 1e-3,
            julia_points: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OrbitOutcome {
    Escaped { step: usize },
    Attracted { period: usize, multiplier: f64 },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalOrbit {
    pub point: Complex64,
    pub outcome: OrbitOutcome,
    /// Distance from the orbit to the Julia sample.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub params: CertificateParams,
    pub critical_orbits: Vec<CriticalOrbit>,
    pub julia_sample: usize,
    pub min_distance: f64,
    /// Start of the inverse iteration behind the Julia sample.
    pub sample_origin: Complex64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RationalMapSystem {
    map: RationalMap,
    seed: Complex64,
    root_tol: f64,
    certificate: CertificateReport,
    julia: Vec<Complex64>,
}

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

impl RationalMapSystem {
    /// Certifies the map; without a seed, the repelling fixed point of
    /// largest multiplier is used. The Julia sample grows from that fixed
    /// point, or from the seed when no finite fixed point repels.
    pub fn new(map: RationalMap, seed: Option<Complex64>, params: CertificateParams, root_tol: f64) -> Result<Self> {
        if !(root_tol > 0.0 && root_tol < 1e-3) {
            return input(format!("root tolerance must lie in (0, 1e-3), got {root_tol}"));
        }
        if params.iterations == 0 || params.max_period == 0 || params.julia_points < 2 {
            return input("certificate needs positive iteration, period and sample budgets");
        }
        let fixed = match (repelling_fixed_point(&map, root_tol), seed) {
            (Ok(z), _) => z,
            (Err(_), Some(z)) => z,
            (Err(e), None) => return Err(e),
        };
        let julia = inverse_iteration(&map, fixed, params.julia_points, root_tol)?;
        let certificate = certify(&map, &params, &julia, fixed, root_tol)?;
        Ok(RationalMapSystem {
            map,
            seed: seed.unwrap_or(fixed),
            root_tol,
            certificate,
            julia,
        })
    }

    pub fn with_defaults(map: RationalMap, seed: Option<Complex64>) -> Result<Self> {
        Self::new(map, seed, CertificateParams::default(), DEFAULT_ROOT_TOL)
    }

    /// `z^2 + c` with default certificate settings.
    pub fn quadratic(c: f64) -> Result<Self> {
        Self::with_defaults(RationalMap::quadratic(Complex64::new(c, 0.0)), None)
    }

    pub fn map(&self) -> &RationalMap {
        &self.map
    }

    pub fn seed(&self) -> Complex64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: Complex64) -> Self {
        self.seed = seed;
        self
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    pub fn degree(&self) -> usize {
        self.map.degree()
    }

    pub fn certificate(&self) -> &CertificateReport {
        &self.certificate
    }

    pub fn julia_sample(&self) -> &[Complex64] {
        &self.julia
    }

    pub fn require_certificate(&self) -> Result<()> {
        if self.certificate.passed {
            Ok(())
        } else {
            Err(Error::Degenerate(format!(
                "hyperbolicity certificate failed: {}",
                self.certificate.failures.join("; ")
            )))
        }
    }
}

fn repelling_fixed_point(map: &RationalMap, tol: f64) -> Result<Complex64> {
    let mut best: Option<(f64, Complex64)> = None;
    for z in map.fixed_points(tol)? {
        let m = map.derivative(z)?.norm();
        if m > 1.0 && best.is_none_or(|(b, _)| m > b) {
            best = Some((m, z));
        }
    }
    best.map(|(_, z)| z)
        .ok_or_else(|| Error::Degenerate("no repelling finite fixed point to seed inverse iteration".into()))
}

/// Deepest complete level of the preimage tree of `start` with at most
/// `limit` points.
fn inverse_iteration(map: &RationalMap, start: Complex64, limit: usize, tol: f64) -> Result<Vec<Complex64>> {
    let mut level = vec![start];
    while level.len() * map.degree() <= limit {
        let next: Result<Vec<Vec<Complex64>>> = level.par_iter().map(|&w| Ok(map.preimages(w, tol)?.roots)).collect();
        level = next?.into_iter().flatten().collect();
    }
    Ok(level)
}

fn escape_radius(map: &RationalMap) -> f64 {
    2.0 * map.chart_scale().max(1.0)
}

fn classify(map: &RationalMap, c: Complex64, params: &CertificateParams) -> Result<(OrbitOutcome, Vec<Complex64>)> {
    let radius = escape_radius(map);
    let mut orbit = vec![c];
    let mut z = c;
    for step in 1..=params.iterations {
        z = map.evaluate(z)?;
        if map.is_polynomial() && z.norm() > radius {
            return Ok((OrbitOutcome::Escaped { step }, orbit));
        }
        orbit.push(z);
    }
    let start = z;
    let mut w = z;
    let mut multiplier = Complex64::new(1.0, 0.0);
    for period in 1..=params.max_period {
        multiplier *= map.derivative(w)?;
        w = map.evaluate(w)?;
        if (w - start).norm() <= params.attraction_tol * (1.0 + start.norm()) {
            let m = multiplier.norm();
            let outcome = if m < 1.0 {
                OrbitOutcome::Attracted { period, multiplier: m }
            } else {
                OrbitOutcome::Undetermined
            };
            return Ok((outcome, orbit));
        }
    }
    Ok((OrbitOutcome::Undetermined, orbit))
}

fn certify(
    map: &RationalMap,
    params: &CertificateParams,
    julia: &[Complex64],
    fixed: Complex64,
    tol: f64,
) -> Result<CertificateReport> {
    let mut failures = Vec::new();
    let mut critical_orbits = Vec::new();
    for c in map.critical_points(tol)? {
        let (outcome, orbit) = classify(map, c, params)?;
        let distance = orbit
            .par_iter()
            .map(|z| julia.iter().map(|j| (z - j).norm()).fold(f64::INFINITY, f64::min))
            .reduce(|| f64::INFINITY, f64::min);
        if outcome == OrbitOutcome::Undetermined {
            failures.push(format!("critical point {c} is not attracted within {} steps", params.iterations));
        }
        if distance < params.min_distance {
            failures.push(format!(
                "orbit of critical point {c} comes within {distance:e} of the Julia sample"
            ));
        }
        critical_orbits.push(CriticalOrbit {
            point: c,
            outcome,
            distance,
        });
    }
    let min_distance = critical_orbits.iter().map(|o| o.distance).fold(f64::INFINITY, f64::min);
    Ok(CertificateReport {
        passed: failures.is_empty(),
        params: *params,
        critical_orbits,
        julia_sample: julia.len(),
        min_distance,
        sample_origin: fixed,
        failures,
    })
}
