//! Dense complex polynomials and simultaneous root finding.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

/// Relative size below which a leading coefficient counts as cancelled.
const TRIM: f64 = 1e-14;

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    fn trim(&mut self) {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.norm() <= TRIM * scale) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Complex64::new(0.0, 0.0));
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("never empty")
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |a_k| |z|^k`, the scale of rounding errors in `eval`.
    pub fn magnitude(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(vec![Complex64::new(0.0, 0.0)]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `self - w * other`.
    pub fn sub_scaled(&self, w: Complex64, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(zero) - w * other.coeffs.get(k).copied().unwrap_or(zero))
                .collect(),
        )
    }

    /// Coefficients of `t^n p(1/t)` for `n = degree`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Polynomial { coeffs: c }
    }

    /// Bound `1 + max |a_k / a_d|` on the moduli of the roots.
    pub fn cauchy_bound(&self) -> f64 {
        let lead = self.leading().norm();
        1.0 + self.coeffs[..self.degree()].iter().map(|c| c.norm() / lead).fold(0.0, f64::max)
    }

    /// All roots by Aberth–Ehrlich iteration followed by Newton polishing.
    /// Returns the roots and the largest backward error `|p(z)| / sum |a_k||z|^k`.
    pub fn roots(&self, tol: f64, max_iter: usize) -> Result<(Vec<Complex64>, f64)> {
        let d = self.degree();
        if d == 0 {
            return Ok((vec![], 0.0));
        }
        let lead = self.leading();
        if d == 1 {
            let z = -self.coeffs[0] / lead;
            return Ok((vec![z], self.backward_error(z)));
        }
        let dp = self.derivative();
        let r = self.root_radius();
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / d as f64 + 0.4))
            .collect();
        let mut iterations = 0;
        loop {
            iterations += 1;
            let mut max_step: f64 = 0.0;
            for i in 0..d {
                let zi = z[i];
                let p = self.eval(zi);
                if p.norm() <= f64::EPSILON * self.magnitude(zi) {
                    continue;
                }
                let ratio = p / dp.eval(zi);
                let mut repulsion = Complex64::new(0.0, 0.0);
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        repulsion += (zi - zj).inv();
                    }
                }
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[i] = zi - step;
                    max_step = max_step.max(step.norm() / (1.0 + zi.norm()));
                }
            }
            if max_step <= 1e-3 * tol {
                break;
            }
            if iterations >= max_iter {
                let worst = z.iter().map(|&zi| self.backward_error(zi)).fold(0.0, f64::max);
                if worst <= 1e3 * f64::EPSILON {
                    break;
                }
                return Err(Error::RootFinding {
                    iterations,
                    max_residual: worst,
                });
            }
        }
        for zi in &mut z {
            for _ in 0..3 {
                let (p, d1) = self.eval_with_derivative(*zi);
                if p.norm() <= f64::EPSILON * self.magnitude(*zi) || d1.norm() == 0.0 {
                    break;
                }
                let step = p / d1;
                if !step.is_finite() || step.norm() > tol * (1.0 + zi.norm()) {
                    break;
                }
                *zi -= step;
            }
        }
        let worst = z.iter().map(|&zi| self.backward_error(zi)).fold(0.0, f64::max);
        Ok((z, worst))
    }

    fn backward_error(&self, z: Complex64) -> f64 {
        let m = self.magnitude(z);
        if m == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / m
        }
    }

    /// Starting radius: geometric mean of the root moduli, kept inside the
    /// Cauchy bound.
    fn root_radius(&self) -> f64 {
        let d = self.degree() as f64;
        let c0 = self.coeffs[0].norm();
        let mean = if c0 > 0.0 {
            (c0 / self.leading().norm()).powf(1.0 / d)
        } else {
            1.0
        };
        mean.clamp(1e-3, self.cauchy_bound())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_and_derivative() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let (v, d) = p.eval_with_derivative(c(0.0, 0.0));
        assert_eq!((v, d), (c(-1.0, 0.0), c(0.0, 0.0)));
        let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        assert_eq!(sq.eval_with_derivative(c(1.0, 1.0)), (c(0.0, 2.0), c(2.0, 2.0)));
        assert_eq!(sq.derivative(), Polynomial::from_real(&[0.0, 2.0]));
    }

    #[test]
    fn trimming_cancelled_leading_terms() {
        let p = Polynomial::from_real(&[1.0, 2.0, 3.0]).sub_scaled(c(3.0, 0.0), &Polynomial::from_real(&[0.0, 0.0, 1.0]));
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn roots_of_unity() {
        let p = Polynomial::from_real(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let (mut z, err) = p.roots(1e-12, 500).unwrap();
        assert!(err < 1e-15);
        z.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        for (k, zk) in z.iter().enumerate() {
            let want = Complex64::from_polar(1.0, std::f64::consts::TAU * (k as f64 - 3.0) / 8.0);
            assert!((zk - want).norm() < 1e-13, "{zk} vs {want}");
        }
    }

    #[test]
    fn double_root_converges() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let (z, _) = p.roots(1e-12, 500).unwrap();
        assert!(z.iter().all(|&r| r.norm() < 1e-8 && p.eval(r).norm() < 1e-20), "{z:?}");
    }

    proptest! {
        #[test]
        fn roots_reproduce_the_polynomial(re in proptest::collection::vec(-2.0f64..2.0, 3..7), im in proptest::collection::vec(-2.0f64..2.0, 3..7)) {
            let n = re.len().min(im.len());
            let roots: Vec<Complex64> = (0..n).map(|k| c(re[k], im[k])).collect();
            let mut p = Polynomial::from_real(&[1.0]);
            for &r in &roots {
                p = p.mul(&Polynomial::new(vec![-r, c(1.0, 0.0)]));
            }
            let (found, err) = p.roots(1e-12, 1000).unwrap();
            prop_assert!(err < 1e-12);
            prop_assert_eq!(found.len(), n);
            // product of roots matches the constant term
            let prod: Complex64 = found.iter().product();
            let want = p.coeffs()[0] * if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!((prod - want).norm(), 0.0, epsilon = 1e-6 * (1.0 + want.norm()));
        }
    }
}
