//! Entropy and pressure estimates with sub/super-multiplicativity brackets.

use serde::{Deserialize, Serialize};

use super::source::{GradedSource, Potential};
use crate::error::{input, Error, Result};
use crate::graph::GradedCone;
use crate::sft::{SftSystem, SymbolicCone, LEVEL};

/// Fewest annuli (`n = 1..=n_max`) an estimate is allowed to use.
pub const MIN_ANNULI: u32 = 6;

/// Added to both bracket endpoints to absorb rounding in `ln u(n)`.
const BRACKET_PAD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusEntry {
    pub n: u32,
    pub count: u64,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSeries {
    pub delta_width: f64,
    pub entries: Vec<AnnulusEntry>,
}

impl AnnulusSeries {
    pub fn u(&self, n: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.n == n).map(|e| e.u)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub beta_hat: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    /// `max(c_lower, c_upper)`.
    pub c2_hat: f64,
    /// Smallest `c >= 1` with `u(a) u(b) <= c u(a+b)` on the measured range,
    /// plus its extrapolated tail.
    pub c_lower: f64,
    /// Smallest `c >= 1` with `u(a+b) <= c u(a) u(b)` on the measured range,
    /// plus its extrapolated tail.
    pub c_upper: f64,
    pub n_min: u32,
    pub n_max: u32,
    /// First `n` of the least-squares window (which ends at `n_max`).
    pub fit_start: u32,
    pub delta_width: f64,
    /// False when the slope fell outside the multiplicativity bracket and the
    /// bracket was widened to contain it.
    pub consistent: bool,
}

impl GrowthEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.bracket_low + self.bracket_high)
    }

    pub fn width(&self) -> f64 {
        self.bracket_high - self.bracket_low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.bracket_low <= x && x <= self.bracket_high
    }

    pub fn overlaps(&self, other: &GrowthEstimate) -> bool {
        self.bracket_low <= other.bracket_high && other.bracket_low <= self.bracket_high
    }
}

/// Default annulus width: largest edge increment plus the cocycle's eta.
pub fn default_width<S: GradedSource + ?Sized>(src: &S, cocycle: usize) -> f64 {
    src.max_increment(cocycle) + src.eta(cocycle)
}

/// Largest integer strictly below the completeness level of `cocycle`.
pub fn usable_n_max<S: GradedSource + ?Sized>(src: &S, cocycle: usize) -> Option<u32> {
    let c = src.complete_through(cocycle);
    if !(c > 0.0) {
        return None;
    }
    let n = c.ceil() - 1.0;
    Some(n.min(u32::MAX as f64) as u32)
}

fn check_cocycle<S: GradedSource + ?Sized>(src: &S, cocycle: usize) -> Result<()> {
    if cocycle >= src.cocycle_count() {
        return input(format!("cocycle {cocycle} is not registered"));
    }
    Ok(())
}

fn check_request<S: GradedSource + ?Sized>(src: &S, cocycle: usize, n: f64, width: f64, what: &str) -> Result<()> {
    check_cocycle(src, cocycle)?;
    let max_inc = src.max_increment(cocycle);
    if !(width >= max_inc) {
        return input(format!("annulus width {width} is below the largest edge increment {max_inc}"));
    }
    let available = src.complete_through(cocycle);
    if !(n < available) {
        return Err(Error::InsufficientDepth {
            what: what.to_string(),
            required: n,
            available,
        });
    }
    Ok(())
}

/// Nodes `g` with `n - width < nu(g) <= n`.
pub fn annulus(cone: &GradedCone, cocycle: usize, n: f64, width: f64) -> Result<Vec<usize>> {
    check_request(cone, cocycle, n, width, "annulus")?;
    Ok((0..cone.len())
        .filter(|&i| {
            let v = cone.grading(i, cocycle);
            n - width < v && v <= n
        })
        .collect())
}

/// `sum e^psi` over the annulus at `n`.
pub fn partition_sum<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    n: f64,
    width: f64,
) -> Result<f64> {
    check_request(src, cocycle, n, width, "partition sum")?;
    Ok(src.annulus_sums_raw(cocycle, psi, &[n], width)?[0].1)
}

/// Annuli at `n = 0..=n_max`. `width` defaults to [`default_width`].
pub fn annulus_series<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    n_max: u32,
    width: Option<f64>,
) -> Result<AnnulusSeries> {
    check_cocycle(src, cocycle)?;
    let width = width.unwrap_or_else(|| default_width(src, cocycle));
    check_request(src, cocycle, n_max as f64, width, "annulus series")?;
    let ns: Vec<f64> = (0..=n_max).map(f64::from).collect();
    let sums = src.annulus_sums_raw(cocycle, psi, &ns, width)?;
    Ok(AnnulusSeries {
        delta_width: width,
        entries: sums
            .into_iter()
            .enumerate()
            .map(|(n, (count, u))| AnnulusEntry {
                n: n as u32,
                count,
                u,
            })
            .collect(),
    })
}

/// One-sided multiplicativity constants over all `a, b >= 1`, `a + b <= n`.
fn multiplicativity_through(u: &[f64], n: usize) -> (f64, f64) {
    let mut lower = 1.0f64;
    let mut upper = 1.0f64;
    for a in 1..n {
        for b in a..=n - a {
            let r = u[a] * u[b] / u[a + b];
            let r = if r.is_finite() { r } else { (u[a].ln() + u[b].ln() - u[a + b].ln()).exp() };
            lower = lower.max(r);
            upper = upper.max(1.0 / r);
        }
    }
    (lower, upper)
}

/// One-sided multiplicativity constants over all `a, b >= 1`,
/// `a + b <= n_max`, in log form. Ratios of long words keep creeping
/// towards their supremum, so each constant is raised once more by its
/// growth between `n_max / 2` and `n_max`.
fn multiplicativity(u: &[f64]) -> (f64, f64) {
    let n_max = u.len() - 1;
    let (lo, up) = multiplicativity_through(u, n_max);
    let (lo_half, up_half) = multiplicativity_through(u, n_max.div_ceil(2));
    let (lo, up, lo_half, up_half) = (lo.ln(), up.ln(), lo_half.ln(), up_half.ln());
    (lo + (lo - lo_half).max(0.0), up + (up - up_half).max(0.0))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope and bracket from an annulus series starting at `n = 0`.
pub fn estimate_from_series(series: &AnnulusSeries) -> Result<GrowthEstimate> {
    let n_max = series.entries.len().saturating_sub(1) as u32;
    if n_max < MIN_ANNULI {
        return input(format!("need at least {MIN_ANNULI} annuli beyond the root, got {n_max}"));
    }
    if series.entries.iter().enumerate().any(|(i, e)| e.n != i as u32) {
        return input("annulus series must list n = 0, 1, 2, ... in order");
    }
    if let Some(e) = series.entries.iter().find(|e| !(e.u > 0.0) || !e.u.is_finite()) {
        return Err(Error::Degenerate(format!("annulus sum at n = {} is {}", e.n, e.u)));
    }
    let u: Vec<f64> = series.entries.iter().map(|e| e.u).collect();
    let ln_u: Vec<f64> = u.iter().map(|x| x.ln()).collect();
    let (lc, uc) = multiplicativity(&u);
    let (c_lower, c_upper) = (lc.exp(), uc.exp());
    let mut low = f64::NEG_INFINITY;
    let mut high = f64::INFINITY;
    for n in 1..=n_max as usize {
        let nf = n as f64;
        low = low.max((ln_u[n] - lc) / nf);
        high = high.min((ln_u[n] + uc) / nf);
    }
    low -= BRACKET_PAD;
    high += BRACKET_PAD;
    let fit_start = n_max.div_ceil(2);
    let xs: Vec<f64> = (fit_start..=n_max).map(f64::from).collect();
    let ys: Vec<f64> = (fit_start..=n_max).map(|n| ln_u[n as usize]).collect();
    let beta_hat = least_squares_slope(&xs, &ys);
    let consistent = low <= beta_hat && beta_hat <= high && low <= high;
    if !consistent {
        low = low.min(beta_hat).min(high);
        high = high.max(beta_hat).max(low);
    }
    Ok(GrowthEstimate {
        beta_hat,
        bracket_low: low,
        bracket_high: high,
        c2_hat: c_lower.max(c_upper),
        c_lower,
        c_upper,
        n_min: 1,
        n_max,
        fit_start,
        delta_width: series.delta_width,
        consistent,
    })
}

/// Series and estimate for the pressure of `psi` relative to `cocycle`.
/// `n_max` defaults to the deepest complete annulus.
pub fn growth_fit<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    n_max: Option<u32>,
    width: Option<f64>,
) -> Result<(AnnulusSeries, GrowthEstimate)> {
    check_cocycle(src, cocycle)?;
    let n_max = match n_max {
        Some(n) => n,
        None => usable_n_max(src, cocycle).ok_or_else(|| Error::InsufficientDepth {
            what: "growth estimate".into(),
            required: MIN_ANNULI as f64,
            available: src.complete_through(cocycle),
        })?,
    };
    if n_max < MIN_ANNULI {
        return Err(Error::InsufficientDepth {
            what: format!("growth estimate (at least {MIN_ANNULI} annuli)"),
            required: MIN_ANNULI as f64,
            available: src.complete_through(cocycle),
        });
    }
    let series = annulus_series(src, cocycle, psi, n_max, width)?;
    let est = estimate_from_series(&series)?;
    Ok((series, est))
}

pub fn entropy_estimate<S: GradedSource + ?Sized>(src: &S, cocycle: usize, n_max: Option<u32>) -> Result<GrowthEstimate> {
    Ok(growth_fit(src, cocycle, &Potential::zero(), n_max, None)?.1)
}

pub fn pressure_estimate<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    n_max: Option<u32>,
) -> Result<GrowthEstimate> {
    Ok(growth_fit(src, cocycle, psi, n_max, None)?.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub k1_hat: f64,
    pub k2_hat: f64,
    pub pass: bool,
}

/// `k1 = min u(n) e^{-beta n}`, `k2 = max u(n) e^{-beta n}` over the series.
pub fn check_growth_sandwich(series: &AnnulusSeries, estimate: &GrowthEstimate) -> SandwichReport {
    let mut k1 = f64::INFINITY;
    let mut k2 = 0.0f64;
    for e in &series.entries {
        let k = e.u * (-estimate.beta_hat * e.n as f64).exp();
        k1 = k1.min(k);
        k2 = k2.max(k);
    }
    let ok = |k: f64| k.is_finite() && k > 0.0;
    SandwichReport {
        k1_hat: k1,
        k2_hat: k2,
        pass: !series.entries.is_empty() && ok(k1) && ok(k2),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplicativity {
    pub c2_hat: f64,
    pub c_lower: f64,
    pub c_upper: f64,
}

/// Smallest `c >= 1` with `u(a) u(b) / c <= u(a+b) <= c u(a) u(b)` over
/// `pairs`, at the default width.
pub fn check_submultiplicativity<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    pairs: &[(u32, u32)],
) -> Result<Multiplicativity> {
    check_cocycle(src, cocycle)?;
    let width = default_width(src, cocycle);
    let mut ns: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b, a + b]).collect();
    ns.sort_unstable();
    ns.dedup();
    if let Some(&top) = ns.last() {
        check_request(src, cocycle, top as f64, width, "multiplicativity check")?;
    }
    let grid: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let sums = src.annulus_sums_raw(cocycle, psi, &grid, width)?;
    let u = |n: u32| sums[ns.binary_search(&n).unwrap()].1;
    let mut lower = 1.0f64;
    let mut upper = 1.0f64;
    for &(a, b) in pairs {
        let (ua, ub, uab) = (u(a), u(b), u(a + b));
        lower = lower.max(ua * ub / uab);
        upper = upper.max(uab / (ua * ub));
    }
    let fix = |c: f64| if c.is_nan() { f64::INFINITY } else { c };
    let (lower, upper) = (fix(lower), fix(upper));
    Ok(Multiplicativity {
        c2_hat: lower.max(upper),
        c_lower: lower,
        c_upper: upper,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualEntropy {
    pub forward: GrowthEstimate,
    pub transpose: GrowthEstimate,
    pub overlap: bool,
}

/// Level-cocycle entropy of the word cones of `A` and `A^T`.
pub fn dual_entropy_check(sft: &SftSystem, n_max: u32) -> Result<DualEntropy> {
    let forward = entropy_estimate(&SymbolicCone::new(sft.clone(), n_max), LEVEL, Some(n_max))?;
    let transpose = entropy_estimate(&SymbolicCone::new(sft.transpose()?, n_max), LEVEL, Some(n_max))?;
    let overlap = forward.overlaps(&transpose);
    Ok(DualEntropy {
        forward,
        transpose,
        overlap,
    })
}
