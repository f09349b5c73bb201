//! Truncated Poincaré series and the critical exponent.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::growth::{check_growth_sandwich, growth_fit, pressure_estimate, usable_n_max, GradedSource, Potential};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareEvaluation {
    pub s: f64,
    pub partial_sum: f64,
    /// Grading level through which nodes were summed.
    pub truncation: f64,
    pub tail_bound: f64,
    pub converged: bool,
}

/// `sum e^{psi(g) - s nu(g)}` over nodes with `nu(g) <= budget`.
///
/// The tail bound sums the growth sandwich over annuli of width `D` beyond
/// the budget: `k2 e^{bD} e^{(b - s) budget} / (1 - e^{(b - s) D})`, where
/// `b` is the upper end of the pressure bracket of `psi` and `k2` the
/// measured sandwich constant. It is `+inf` when `s <= b`.
pub fn poincare_partial<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    s: f64,
    budget: f64,
    tolerance: f64,
) -> Result<PoincareEvaluation> {
    if !s.is_finite() {
        return input("exponent s must be finite");
    }
    if cocycle >= src.cocycle_count() {
        return input(format!("cocycle {cocycle} is not registered"));
    }
    let available = src.complete_through(cocycle);
    if !(budget < available) {
        return Err(Error::InsufficientDepth {
            what: "Poincaré partial sum".into(),
            required: budget,
            available,
        });
    }
    let tilted = psi.plus(cocycle, -s);
    let partial_sum = src.ball_sum_raw(cocycle, &tilted, budget)?;
    let (series, est) = growth_fit(src, cocycle, psi, None, None)?;
    let k2 = check_growth_sandwich(&series, &est).k2_hat;
    let b = est.bracket_high;
    let width = series.delta_width;
    let tail_bound = if s > b {
        k2 * (b * width).exp() * ((b - s) * budget).exp() / (1.0 - ((b - s) * width).exp())
    } else {
        f64::INFINITY
    };
    Ok(PoincareEvaluation {
        s,
        partial_sum,
        truncation: budget,
        tail_bound,
        converged: tail_bound < tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub s: f64,
    pub low: f64,
    pub high: f64,
    /// Pressure slope of `psi - s nu` at the returned `s`.
    pub residual_slope: f64,
    /// Average rate at which the slope falls per unit of `s`.
    pub slope_scale: f64,
    pub n_max: u32,
    pub evaluations: usize,
}

const MAX_EXPONENT: f64 = 1.0e4;

/// Root of `s -> pressure(psi - s nu)` by bisection on the sign of the
/// fitted slope, stopping once the bracket is narrower than `tol`.
pub fn critical_exponent<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    psi: &Potential,
    tol: f64,
) -> Result<CriticalExponent> {
    critical_exponent_graded(src, cocycle, cocycle, psi, tol)
}

/// As [`critical_exponent`], with the pressure measured in annuli of the
/// grading `annuli` instead of `cocycle`. Any grading comparable to
/// `cocycle` gives the same sign of pressure, so the root is unchanged;
/// level annuli avoid the aliasing of non-integer increments.
pub fn critical_exponent_graded<S: GradedSource + ?Sized>(
    src: &S,
    cocycle: usize,
    annuli: usize,
    psi: &Potential,
    tol: f64,
) -> Result<CriticalExponent> {
    if !(tol > 0.0) {
        return input("tolerance must be positive");
    }
    for c in [cocycle, annuli] {
        if c >= src.cocycle_count() {
            return input(format!("cocycle {c} is not registered"));
        }
    }
    let n_max = usable_n_max(src, annuli).unwrap_or(0);
    let mut evaluations = 0usize;
    let mut slope = |s: f64| -> Result<f64> {
        evaluations += 1;
        Ok(pressure_estimate(src, annuli, &psi.plus(cocycle, -s), Some(n_max))?.beta_hat)
    };
    let precision = |what: &str| {
        Error::Precision(format!(
            "{what}; the pressure slope cannot be resolved with {n_max} annuli, grow the cone to at least {} on this cocycle",
            2 * n_max.max(3)
        ))
    };
    let f0 = slope(0.0)?;
    let (mut lo, mut f_lo, mut hi, mut f_hi);
    if f0 > 0.0 {
        (lo, f_lo) = (0.0, f0);
        hi = 1.0;
        f_hi = slope(hi)?;
        while !(f_hi < 0.0) {
            if hi >= MAX_EXPONENT {
                return Err(precision("no exponent with negative pressure found"));
            }
            (lo, f_lo) = (hi, f_hi);
            hi *= 2.0;
            f_hi = slope(hi)?;
        }
    } else {
        (hi, f_hi) = (0.0, f0);
        lo = -1.0;
        f_lo = slope(lo)?;
        while !(f_lo > 0.0) {
            if lo <= -MAX_EXPONENT {
                return Err(precision("no exponent with positive pressure found"));
            }
            (hi, f_hi) = (lo, f_lo);
            lo *= 2.0;
            f_lo = slope(lo)?;
        }
    }
    let slope_scale = (f_lo - f_hi) / (hi - lo);
    if !(slope_scale > 1e-12) {
        return Err(precision("pressure is flat in s"));
    }
    while hi - lo >= tol {
        let mid = 0.5 * (lo + hi);
        let f = slope(mid)?;
        if f > 0.0 {
            lo = mid;
        } else if f < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let residual_slope = slope(s)?;
    Ok(CriticalExponent {
        s,
        low: lo,
        high: hi,
        residual_slope,
        slope_scale,
        n_max,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::{SftSystem, SymbolicCone, LEVEL};
    use crate::testkit::binary_cone;
    use approx::assert_relative_eq;

    #[test]
    fn geometric_series_at_log_four() {
        let c = SymbolicCone::new(SftSystem::full_shift(2).unwrap(), 40);
        let s = 4f64.ln();
        // sum_{n <= b} 2^n 4^{-n} = 2 - 2^{-b}
        for b in [5.0, 10.0, 20.0] {
            let p = poincare_partial(&c, LEVEL, &Potential::zero(), s, b, 1e-3).unwrap();
            assert_relative_eq!(p.partial_sum, 2.0 - 2f64.powf(-b), epsilon = 1e-12);
            let discarded = 2f64.powf(-b);
            assert!(p.tail_bound >= discarded, "{p:?}");
        }
        assert!(poincare_partial(&c, LEVEL, &Potential::zero(), s, 20.0, 1e-3).unwrap().converged);
        assert!(!poincare_partial(&c, LEVEL, &Potential::zero(), s, 5.0, 1e-3).unwrap().converged);
    }

    #[test]
    fn divergent_at_entropy() {
        let c = binary_cone(12);
        let p = poincare_partial(&c, 0, &Potential::zero(), 2f64.ln(), 10.0, 1.0).unwrap();
        assert!(p.tail_bound.is_infinite() && !p.converged);
        assert!(poincare_partial(&c, 0, &Potential::zero(), 1.0, 13.0, 1.0).is_err());
    }

    #[test]
    fn critical_exponent_of_binary_tree() {
        let c = binary_cone(16);
        let e = critical_exponent(&c, 0, &Potential::zero(), 1e-9).unwrap();
        assert!((e.s - 2f64.ln()).abs() < 1e-8, "{e:?}");
        assert!(e.residual_slope.abs() <= 1e-8 * e.slope_scale.max(1.0));
    }

    #[test]
    fn critical_exponent_of_golden_mean() {
        let c = SymbolicCone::new(SftSystem::golden_mean(), 40);
        let e = critical_exponent(&c, LEVEL, &Potential::zero(), 1e-7).unwrap();
        assert!((e.s - 0.481_211_825_059_603_4).abs() < 1e-5, "{e:?}");
    }

    #[test]
    fn monotone_consistency() {
        let c = SymbolicCone::new(SftSystem::full_shift(2).unwrap(), 80);
        let s_star = critical_exponent(&c, LEVEL, &Potential::zero(), 1e-8).unwrap().s;
        let conv = poincare_partial(&c, LEVEL, &Potential::zero(), s_star + 0.1, 79.0, 1e-2).unwrap();
        assert!(conv.converged);
        // below the exponent, partial sums over doubling budgets keep growing
        let sums: Vec<f64> = [5.0, 10.0, 20.0]
            .iter()
            .map(|&b| poincare_partial(&c, LEVEL, &Potential::zero(), s_star - 0.1, b, 1.0).unwrap().partial_sum)
            .collect();
        assert!(sums[2] - sums[1] > sums[1] - sums[0]);
    }

    #[test]
    fn bad_tolerance() {
        assert!(critical_exponent(&binary_cone(8), 0, &Potential::zero(), 0.0).is_err());
    }
}
