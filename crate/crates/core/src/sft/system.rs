//! Subshifts of finite type and their Perron-Frobenius data.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-14;
const MAX_POWER_ITERATIONS: usize = 200_000;

/// Dominant eigen-data of an irreducible 0/1 matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronData {
    pub lambda: f64,
    /// Right eigenvector, positive, summing to 1.
    pub right: Vec<f64>,
    /// Left eigenvector, positive, normalized so that `left . right = 1`.
    pub left: Vec<f64>,
    /// Certified residual `max(|Am - lm|_inf / |m|_inf, |uA - lu|_inf / |u|_inf)`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SftSystem {
    matrix: Vec<Vec<u8>>,
    aperiodic: bool,
    perron: PerronData,
}

fn validate(a: &[Vec<u8>]) -> Result<usize> {
    let k = a.len();
    if k < 2 {
        return input(format!("alphabet must have at least 2 symbols, got {k}"));
    }
    if k > u8::MAX as usize {
        return input(format!("alphabet of {k} symbols is too large"));
    }
    for (i, row) in a.iter().enumerate() {
        if row.len() != k {
            return input(format!("row {i} has length {}, expected {k}", row.len()));
        }
        if let Some(v) = row.iter().find(|&&v| v > 1) {
            return input(format!("row {i} has entry {v}; transition matrices are 0/1"));
        }
    }
    Ok(k)
}

/// Strongly connected components, each sorted, listed by smallest member.
pub fn strongly_connected_components(a: &[Vec<u8>]) -> Vec<Vec<usize>> {
    let k = a.len();
    let reach = |from: usize| {
        let mut seen = vec![false; k];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for v in 0..k {
                if a[u][v] == 1 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    let r: Vec<Vec<bool>> = (0..k).map(reach).collect();
    let mut assigned = vec![false; k];
    let mut out = Vec::new();
    for i in 0..k {
        if assigned[i] {
            continue;
        }
        let comp: Vec<usize> = (0..k).filter(|&j| r[i][j] && r[j][i]).collect();
        let comp = if comp.is_empty() { vec![i] } else { comp };
        for &j in &comp {
            assigned[j] = true;
        }
        out.push(comp);
    }
    out
}

fn is_primitive(a: &[Vec<u8>]) -> bool {
    // Wielandt: an irreducible k x k matrix is primitive iff A^((k-1)^2+1) > 0.
    let k = a.len();
    let mut p: Vec<Vec<bool>> = a.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect();
    for _ in 1..(k - 1) * (k - 1) + 1 {
        let mut q = vec![vec![false; k]; k];
        for i in 0..k {
            for l in 0..k {
                if p[i][l] {
                    for j in 0..k {
                        if a[l][j] == 1 {
                            q[i][j] = true;
                        }
                    }
                }
            }
        }
        p = q;
    }
    p.iter().all(|r| r.iter().all(|&b| b))
}

/// Power iteration on `A + I` (same eigenvectors, primitive whenever `A` is
/// irreducible) from the all-ones vector; `transpose` iterates on `A^T`.
fn dominant(a: &[Vec<u8>], transpose: bool, tol: f64) -> Result<(f64, Vec<f64>, f64)> {
    let k = a.len();
    let entry = |i: usize, j: usize| if transpose { a[j][i] } else { a[i][j] } as f64;
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| (0..k).map(|j| entry(i, j) * v[j]).sum::<f64>())
            .collect()
    };
    let mut v = vec![1.0 / k as f64; k];
    let mut lambda = 0.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let av = apply(&v);
        let mut w: Vec<f64> = av.iter().zip(&v).map(|(x, y)| x + y).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        lambda = s - 1.0;
        if diff < tol * 0.1 {
            break;
        }
    }
    // Rayleigh-type estimate from the final vector
    let av = apply(&v);
    let sum_v: f64 = v.iter().sum();
    lambda = if sum_v > 0.0 { av.iter().sum::<f64>() / sum_v } else { lambda };
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    let residual = av
        .iter()
        .zip(&v)
        .map(|(x, y)| (x - lambda * y).abs())
        .fold(0.0, f64::max)
        / vmax;
    Ok((lambda, v, residual))
}

/// Perron eigenvalue with right/left eigenvectors, certified to `tol`.
pub fn pf_data(a: &[Vec<u8>], tol: f64) -> Result<PerronData> {
    validate(a)?;
    if !(tol > 0.0) {
        return input("eigen tolerance must be positive");
    }
    let comps = strongly_connected_components(a);
    if comps.len() != 1 {
        return Err(Error::Reducible { components: comps });
    }
    let (lambda, right, r1) = dominant(a, false, tol)?;
    let (lambda_t, mut left, r2) = dominant(a, true, tol)?;
    let residual = r1.max(r2);
    let scale = lambda.max(1.0);
    if residual > tol * scale * 100.0 || (lambda - lambda_t).abs() > tol * scale * 100.0 {
        return Err(Error::Eigen(format!(
            "power iteration not certified: residual {residual:e}, lambda {lambda} vs transpose {lambda_t}"
        )));
    }
    let dot: f64 = left.iter().zip(&right).map(|(u, m)| u * m).sum();
    left.iter_mut().for_each(|u| *u /= dot);
    if right.iter().chain(&left).any(|&x| !(x > 0.0)) {
        return Err(Error::Eigen("Perron vector is not strictly positive".into()));
    }
    Ok(PerronData {
        lambda,
        right,
        left,
        residual,
    })
}

impl SftSystem {
    pub fn new(matrix: Vec<Vec<u8>>) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_EIGEN_TOL)
    }

    pub fn with_tolerance(matrix: Vec<Vec<u8>>, tol: f64) -> Result<Self> {
        let perron = pf_data(&matrix, tol)?;
        let aperiodic = is_primitive(&matrix);
        Ok(SftSystem {
            matrix,
            aperiodic,
            perron,
        })
    }

    /// Full shift on `k` symbols.
    pub fn full_shift(k: usize) -> Result<Self> {
        Self::new(vec![vec![1; k]; k])
    }

    /// Words without two consecutive 1s.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![1, 1], vec![1, 0]]).expect("golden mean matrix is irreducible")
    }

    pub fn alphabet(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<u8>] {
        &self.matrix
    }

    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.matrix[a as usize][b as usize] == 1
    }

    pub fn is_irreducible(&self) -> bool {
        true
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    pub fn perron(&self) -> &PerronData {
        &self.perron
    }

    pub fn lambda(&self) -> f64 {
        self.perron.lambda
    }

    pub fn transpose(&self) -> Result<SftSystem> {
        let k = self.alphabet();
        let t = (0..k).map(|i| (0..k).map(|j| self.matrix[j][i]).collect()).collect();
        Self::new(t)
    }

    pub fn is_admissible(&self, word: &[u8]) -> bool {
        word.iter().all(|&s| (s as usize) < self.alphabet()) && word.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn check_admissible(&self, word: &[u8]) -> Result<()> {
        if self.is_admissible(word) {
            Ok(())
        } else {
            Err(Error::Inadmissible(word.to_vec()))
        }
    }

    /// All admissible words of length `n`, lexicographic.
    pub fn words(&self, n: usize) -> Vec<Vec<u8>> {
        let mut out: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &out {
                for b in 0..self.alphabet() as u8 {
                    if w.last().is_none_or(|&a| self.allows(a, b)) {
                        let mut v = w.clone();
                        v.push(b);
                        next.push(v);
                    }
                }
            }
            out = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn full_two_shift() {
        let s = SftSystem::full_shift(2).unwrap();
        assert_relative_eq!(s.lambda(), 2.0, epsilon = 1e-13);
        assert_relative_eq!(s.perron().right[0], 0.5, epsilon = 1e-13);
        assert_relative_eq!(s.perron().right[1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn golden_mean_perron() {
        // characteristic polynomial x^2 = x + 1
        let s = SftSystem::golden_mean();
        let l = s.lambda();
        assert_relative_eq!(l * l, l + 1.0, epsilon = 1e-12);
        assert_relative_eq!(l, PHI, epsilon = 1e-13);
        let m = &s.perron().right;
        assert_relative_eq!(m[0] / m[1], PHI, epsilon = 1e-12);
        let u = &s.perron().left;
        let dot: f64 = u.iter().zip(m).map(|(a, b)| a * b).sum();
        assert_relative_eq!(dot, 1.0, epsilon = 1e-14);
        assert!(s.is_aperiodic());
    }

    #[test]
    fn reducible_lists_components() {
        match pf_data(&[vec![1, 0], vec![0, 1]], 1e-12) {
            Err(Error::Reducible { components }) => assert_eq!(components, vec![vec![0], vec![1]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn periodic_irreducible_converges() {
        let s = SftSystem::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_relative_eq!(s.lambda(), 1.0, epsilon = 1e-13);
        assert!(!s.is_aperiodic());
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(SftSystem::new(vec![vec![1, 1], vec![1]]).is_err());
        assert!(SftSystem::new(vec![vec![1, 2], vec![1, 1]]).is_err());
        assert!(SftSystem::new(vec![vec![1]]).is_err());
    }

    #[test]
    fn three_state_cycle_matrix() {
        // [[1,1,0],[0,1,1],[1,0,0]]: char poly x^3 - 2x^2 + x - 1
        let s = SftSystem::new(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        let l = s.lambda();
        assert_relative_eq!(l * l * l - 2.0 * l * l + l - 1.0, 0.0, epsilon = 1e-12);
        let t = s.transpose().unwrap();
        assert_relative_eq!(t.lambda(), l, epsilon = 1e-13);
    }

    #[test]
    fn word_enumeration_is_fibonacci() {
        let s = SftSystem::golden_mean();
        let counts: Vec<usize> = (1..=8).map(|n| s.words(n).len()).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13, 21, 34, 55]);
    }
}
