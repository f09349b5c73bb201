//! Rational maps `p / q`: evaluation in two charts and inverse images.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{input, Error, Result};

/// `|q|` below this in both charts is treated as a pole.
const POLE_FLOOR: f64 = 1e-280;
const ROOT_ITERATIONS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Polynomial,
    den: Polynomial,
    /// Size beyond which the reciprocal chart is used.
    scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimages {
    /// Sorted by angle around their centroid.
    pub roots: Vec<Complex64>,
    /// Set for roots within the multiplicity radius of another root.
    pub multiple: Vec<bool>,
    /// Largest `|f(z) - w|` over the roots.
    pub max_residual: f64,
}

impl Preimages {
    pub fn any_multiple(&self) -> bool {
        self.multiple.iter().any(|&m| m)
    }
}

impl RationalMap {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return input("denominator is identically zero");
        }
        if num.degree().max(den.degree()) < 2 {
            return input("rational maps need degree at least 2");
        }
        let scale = num.cauchy_bound().max(if den.degree() > 0 { den.cauchy_bound() } else { 1.0 });
        let map = RationalMap { num, den, scale };
        map.check_coprime()?;
        Ok(map)
    }

    pub fn polynomial(coeffs: &[Complex64]) -> Result<Self> {
        Self::new(Polynomial::new(coeffs.to_vec()), Polynomial::from_real(&[1.0]))
    }

    /// `z^2 + c`.
    pub fn quadratic(c: Complex64) -> Self {
        Self::polynomial(&[c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).expect("degree 2")
    }

    fn check_coprime(&self) -> Result<()> {
        if self.den.degree() == 0 || self.num.degree() == 0 {
            return Ok(());
        }
        let (roots, _) = self.den.roots(1e-12, ROOT_ITERATIONS)?;
        for r in roots {
            if self.num.eval(r).norm() <= 1e-9 * self.num.magnitude(r).max(1.0) {
                return input(format!("numerator and denominator share the root {r}"));
            }
        }
        Ok(())
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    pub fn chart_scale(&self) -> f64 {
        self.scale
    }

    /// `(f(z), f'(z))`.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if z.norm() > 2.0 * self.scale {
            if let Some(v) = self.eval_reciprocal(z) {
                return Ok(v);
            }
        }
        if let Some(v) = self.eval_affine(z) {
            return Ok(v);
        }
        self.eval_reciprocal(z).ok_or_else(|| Error::Evaluation {
            re: z.re,
            im: z.im,
            reason: "denominator vanishes in both charts".into(),
        })
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_derivative(z)?.0)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_derivative(z)?.1)
    }

    fn eval_affine(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        let (p, dp) = self.num.eval_with_derivative(z);
        let (q, dq) = self.den.eval_with_derivative(z);
        if q.norm() < POLE_FLOOR {
            return None;
        }
        let v = p / q;
        let d = (dp * q - p * dq) / (q * q);
        (v.is_finite() && d.is_finite()).then_some((v, d))
    }

    /// With `t = 1/z`, `f(z) = z^m P(t) / Q(t)` where `P`, `Q` are the
    /// reversed polynomials and `m = deg p - deg q`.
    fn eval_reciprocal(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        let t = z.inv();
        let (pp, dpp) = self.num.reversed().eval_with_derivative(t);
        let (qq, dqq) = self.den.reversed().eval_with_derivative(t);
        if qq.norm() < POLE_FLOOR {
            return None;
        }
        let g = pp / qq;
        let dg = (dpp * qq - pp * dqq) / (qq * qq);
        let m = self.num.degree() as i32 - self.den.degree() as i32;
        let v = z.powi(m) * g;
        // d/dz [z^m g(1/z)] = m z^{m-1} g - z^{m-2} g'
        let d = z.powi(m - 1) * g * m as f64 - z.powi(m - 2) * dg;
        (v.is_finite() && d.is_finite()).then_some((v, d))
    }

    /// Solutions of `f(z) = w`, sorted by angle around their centroid.
    pub fn preimages(&self, w: Complex64, tol: f64) -> Result<Preimages> {
        let eq = self.num.sub_scaled(w, &self.den);
        if eq.degree() < self.degree() {
            return Err(Error::Evaluation {
                re: w.re,
                im: w.im,
                reason: "value has fewer finite preimages than the degree (exceptional in this chart)".into(),
            });
        }
        let (mut roots, _) = eq.roots(tol, ROOT_ITERATIONS)?;
        let centroid = roots.iter().sum::<Complex64>() / roots.len() as f64;
        roots.sort_by(|a, b| {
            (a - centroid)
                .arg()
                .total_cmp(&(b - centroid).arg())
                .then(a.re.total_cmp(&b.re))
                .then(a.im.total_cmp(&b.im))
        });
        let radius = 100.0 * tol;
        let multiple: Vec<bool> = (0..roots.len())
            .map(|i| (0..roots.len()).any(|j| j != i && (roots[i] - roots[j]).norm() < radius * (1.0 + roots[i].norm())))
            .collect();
        let mut max_residual: f64 = 0.0;
        for &r in &roots {
            max_residual = max_residual.max((self.evaluate(r)? - w).norm());
        }
        Ok(Preimages {
            roots,
            multiple,
            max_residual,
        })
    }

    /// Finite critical points: roots of `p'q - pq'`.
    pub fn critical_points(&self, tol: f64) -> Result<Vec<Complex64>> {
        let w = self
            .num
            .derivative()
            .mul(&self.den)
            .sub_scaled(Complex64::new(1.0, 0.0), &self.num.mul(&self.den.derivative()));
        Ok(w.roots(tol, ROOT_ITERATIONS)?.0)
    }

    /// Finite fixed points: roots of `p - z q`.
    pub fn fixed_points(&self, tol: f64) -> Result<Vec<Complex64>> {
        let zq = self.den.mul(&Polynomial::from_real(&[0.0, 1.0]));
        let eq = self.num.sub_scaled(Complex64::new(1.0, 0.0), &zq);
        Ok(eq.roots(tol, ROOT_ITERATIONS)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn newton_map() -> RationalMap {
        // Newton map of z^2 + 1
        RationalMap::new(Polynomial::from_real(&[-1.0, 0.0, 1.0]), Polynomial::from_real(&[0.0, 2.0])).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let sq = RationalMap::quadratic(c(0.0, 0.0));
        assert_eq!(sq.eval_with_derivative(c(1.0, 1.0)).unwrap(), (c(0.0, 2.0), c(2.0, 2.0)));
        let m1 = RationalMap::quadratic(c(-1.0, 0.0));
        assert_eq!(m1.eval_with_derivative(c(0.0, 0.0)).unwrap(), (c(-1.0, 0.0), c(0.0, 0.0)));
        let n = newton_map();
        let (v, d) = n.eval_with_derivative(c(0.0, 1.0)).unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-15 && d.norm() < 1e-15);
    }

    #[test]
    fn reciprocal_chart_agrees() {
        let n = newton_map();
        let z = c(30.0, -40.0);
        let (va, da) = n.eval_affine(z).unwrap();
        let (vr, dr) = n.eval_reciprocal(z).unwrap();
        assert!((va - vr).norm() < 1e-12 * va.norm() && (da - dr).norm() < 1e-12);
        assert!(n.evaluate(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn preimage_examples() {
        let sq = RationalMap::quadratic(c(0.0, 0.0));
        let p = sq.preimages(c(1.0, 0.0), 1e-12).unwrap();
        assert_eq!(p.roots.len(), 2);
        assert!((p.roots[0] - c(1.0, 0.0)).norm() < 1e-14 && (p.roots[1] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(!p.any_multiple());
        assert!(sq.preimages(c(0.0, 0.0), 1e-12).unwrap().any_multiple());
        let m1 = RationalMap::quadratic(c(-1.0, 0.0));
        let p = m1.preimages(c(0.0, 0.0), 1e-12).unwrap();
        assert!(p.max_residual <= 1e-12);
        let mut re: Vec<f64> = p.roots.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 1.0).abs() < 1e-14 && (re[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn value_at_infinity_is_exceptional() {
        let n = newton_map();
        let m = RationalMap::new(Polynomial::from_real(&[1.0, 0.0, 2.0]), Polynomial::from_real(&[3.0, 0.0, 1.0])).unwrap();
        assert!(m.preimages(c(2.0, 0.0), 1e-12).is_err());
        assert_eq!(n.preimages(c(0.5, 0.0), 1e-12).unwrap().roots.len(), 2);
    }

    #[test]
    fn critical_and_fixed_points() {
        let n = newton_map();
        let mut cp: Vec<f64> = n.critical_points(1e-12).unwrap().iter().map(|z| z.im).collect();
        cp.sort_by(f64::total_cmp);
        assert!((cp[0] + 1.0).abs() < 1e-12 && (cp[1] - 1.0).abs() < 1e-12);
        let fp = RationalMap::quadratic(c(-1.0, 0.0)).fixed_points(1e-12).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(fp.iter().any(|z| (z - c(phi, 0.0)).norm() < 1e-13));
    }

    #[test]
    fn common_factor_rejected() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let q = Polynomial::from_real(&[-1.0, 1.0]);
        assert!(RationalMap::new(p, q).is_err());
        assert!(RationalMap::new(Polynomial::from_real(&[1.0, 1.0]), Polynomial::from_real(&[0.0])).is_err());
    }
}
