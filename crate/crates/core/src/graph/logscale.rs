//! Log-scales, Gromov products on cones, and metrics synthesized from a log-scale.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::cone::GradedCone;
use crate::error::{input, Error, Result};

/// Symmetric table of log-scale values with `+inf` on the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScaleTable {
    ids: Vec<String>,
    values: Vec<f64>,
    delta: f64,
}

/// Symmetric table of distances with zero diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    ids: Vec<String>,
    values: Vec<f64>,
}

/// Output of [`metric_from_logscale`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedMetric {
    pub distances: DistanceTable,
    pub alpha: f64,
    /// `c^{-1} e^{-alpha l} <= d <= e^{-alpha l}` holds for every pair.
    pub sandwich_constant: f64,
}

/// Gromov product of `a` and `b` on a tree cone: the grading at their deepest
/// common ancestor, `+inf` when `a == b`.
pub fn gromov_product(cone: &GradedCone, cocycle: usize, a: usize, b: usize) -> Result<f64> {
    cone.check_cocycle(cocycle)?;
    cone.check_node(a)?;
    cone.check_node(b)?;
    if a == b {
        return Ok(f64::INFINITY);
    }
    let c = cone.common_ancestor(a, b);
    Ok(cone.grading(c, cocycle))
}

fn check_square(n: usize, values: &[f64]) -> Result<()> {
    if values.len() != n * n {
        return input(format!("table body has {} entries, expected {}", values.len(), n * n));
    }
    Ok(())
}

/// Worst-case defect of `l(x,z) >= min(l(x,y), l(y,z)) - delta`, floored at 0.
pub fn triple_defect(n: usize, values: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let lxy = values[x * n + y];
            for z in 0..n {
                let m = lxy.min(values[y * n + z]);
                let d = m - values[x * n + z];
                if d > worst {
                    worst = d;
                }
            }
        }
    }
    worst
}

impl LogScaleTable {
    /// Validates symmetry and the diagonal rule, and measures `delta`.
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if n < 2 {
            return input("a log-scale table needs at least 2 points");
        }
        check_square(n, &values)?;
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if v.is_nan() {
                    return input(format!("NaN at ({i}, {j})"));
                }
                if v != values[j * n + i] {
                    return input(format!("table is not symmetric at ({i}, {j})"));
                }
                if (i == j) != (v == f64::INFINITY) {
                    return input(format!("+inf must appear exactly on the diagonal; offending entry ({i}, {j})"));
                }
            }
        }
        let delta = triple_defect(n, &values);
        Ok(LogScaleTable { ids, values, delta })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_table_csv(w, &self.ids, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (ids, values) = read_table_csv(r)?;
        Self::new(ids, values)
    }
}

impl DistanceTable {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        check_square(n, &values)?;
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return input(format!("diagonal entry {i} is not zero"));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return input(format!("distance ({i}, {j}) = {v} is not a finite non-negative number"));
                }
                if v != values[j * n + i] {
                    return input(format!("table is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(DistanceTable { ids, values })
    }

    /// Shortest-path distances of an unweighted graph given by adjacency lists.
    pub fn from_graph(adjacency: &[Vec<usize>]) -> Result<Self> {
        let n = adjacency.len();
        let mut values = vec![0.0; n * n];
        for s in 0..n {
            let mut dist = vec![usize::MAX; n];
            let mut queue = std::collections::VecDeque::from([s]);
            dist[s] = 0;
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[u] {
                    if v >= n {
                        return input(format!("edge to unknown vertex {v}"));
                    }
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for t in 0..n {
                if dist[t] == usize::MAX {
                    return input(format!("graph is disconnected: {t} unreachable from {s}"));
                }
                values[s * n + t] = dist[t] as f64;
            }
        }
        Self::new((0..n).map(|i| i.to_string()).collect(), values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest violation of the triangle inequality (0 for a metric).
    pub fn max_triangle_violation(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    worst = worst.max(self.get(x, z) - self.get(x, y) - self.get(y, z));
                }
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_table_csv(w, &self.ids, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (ids, values) = read_table_csv(r)?;
        Self::new(ids, values)
    }
}

/// Log-scale on a set of cone nodes given by pairwise Gromov products.
pub fn logscale_from_cone(cone: &GradedCone, cocycle: usize, leaves: &[usize]) -> Result<LogScaleTable> {
    if leaves.len() < 2 {
        return input("need at least 2 leaves");
    }
    let mut seen = std::collections::HashSet::new();
    for &l in leaves {
        cone.check_node(l)?;
        if !seen.insert(l) {
            return input(format!("leaf {l} appears more than once"));
        }
    }
    let n = leaves.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = gromov_product(cone, cocycle, leaves[i], leaves[j])?;
        }
    }
    LogScaleTable::new(leaves.iter().map(|l| l.to_string()).collect(), values)
}

/// Largest exponent accepted by [`metric_from_logscale`] for a given `delta`.
pub fn max_admissible_alpha(delta: f64) -> f64 {
    if delta <= 0.0 {
        f64::INFINITY
    } else {
        std::f64::consts::LN_2 / (4.0 * delta)
    }
}

/// Chain-infimum metric `d(x,y) = inf sum e^{-alpha l(z_i, z_{i+1})}`.
///
/// Chains are summed left to right starting at the row point, so `d(i, j)`
/// for `i < j` is the Dijkstra distance from `i`; the lower triangle mirrors it.
pub fn metric_from_logscale(table: &LogScaleTable, alpha: f64) -> Result<SynthesizedMetric> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return input(format!("alpha must be positive and finite, got {alpha}"));
    }
    let amax = max_admissible_alpha(table.delta);
    if alpha > amax {
        return input(format!(
            "alpha = {alpha} too large for delta = {}: need e^(alpha*delta) <= 2^(1/4), i.e. alpha <= {amax}",
            table.delta
        ));
    }
    let n = table.len();
    let w = |i: usize, j: usize| (-alpha * table.get(i, j)).exp();
    let mut values = vec![0.0; n * n];
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            for v in 0..n {
                if !done[v] && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            done[u] = true;
            for v in 0..n {
                if !done[v] {
                    let cand = dist[u] + w(u, v);
                    if cand < dist[v] {
                        dist[v] = cand;
                    }
                }
            }
        }
        for t in s + 1..n {
            values[s * n + t] = dist[t];
            values[t * n + s] = dist[t];
        }
    }
    let mut c = 1.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                c = c.max(w(i, j) / values[i * n + j]);
            }
        }
    }
    Ok(SynthesizedMetric {
        distances: DistanceTable::new(table.ids.clone(), values)?,
        alpha,
        sandwich_constant: c,
    })
}

fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        crate::export::format_sig(v)
    }
}

fn write_table_csv<W: Write>(w: W, ids: &[String], values: &[f64]) -> Result<()> {
    let n = ids.len();
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(ids)?;
    for i in 0..n {
        wr.write_record(values[i * n..(i + 1) * n].iter().map(|&v| fmt_value(v)))?;
    }
    wr.flush()?;
    Ok(())
}

fn read_table_csv<R: Read>(r: R) -> Result<(Vec<String>, Vec<f64>)> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rd.records();
    let ids: Vec<String> = match records.next() {
        Some(h) => h?.iter().map(str::to_string).collect(),
        None => return input("empty table file"),
    };
    let mut values = Vec::with_capacity(ids.len() * ids.len());
    for rec in records {
        let rec = rec?;
        if rec.len() != ids.len() {
            return input(format!("row has {} fields, header has {}", rec.len(), ids.len()));
        }
        for field in rec.iter() {
            let v = match field.trim() {
                "inf" => f64::INFINITY,
                s => s
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("bad number '{s}': {e}")))?,
            };
            values.push(v);
        }
    }
    Ok((ids, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::{binary_cone, golden_word_cone};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gromov_product_on_binary_tree() {
        let c = binary_cone(5);
        // 0000 0 and 0001 1 split below depth 3
        let a = c.level(5).find(|&i| c.address(i) == [0, 0, 0, 0, 0]).unwrap();
        let b = c.level(5).find(|&i| c.address(i) == [0, 0, 0, 1, 1]).unwrap();
        assert_eq!(gromov_product(&c, 0, a, b).unwrap(), 3.0);
        assert_eq!(gromov_product(&c, 0, a, a).unwrap(), f64::INFINITY);
        assert!(gromov_product(&c, 0, a, 10_000).is_err());
        assert!(gromov_product(&c, 3, a, b).is_err());
    }

    #[test]
    fn binary_depth_two_logscale() {
        let c = binary_cone(2);
        let leaves: Vec<_> = c.level(2).collect();
        let t = logscale_from_cone(&c, 0, &leaves).unwrap();
        assert_eq!(t.delta(), 0.0);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(t.get(i, j) == 0.0 || t.get(i, j) == 1.0);
                }
            }
        }
    }

    #[test]
    fn repeated_or_too_few_leaves_rejected() {
        let c = binary_cone(2);
        assert!(logscale_from_cone(&c, 0, &[3, 3]).is_err());
        assert!(logscale_from_cone(&c, 0, &[3]).is_err());
    }

    #[test]
    fn golden_mean_length_five_is_ultrametric() {
        let c = golden_word_cone(5);
        let leaves: Vec<_> = c.level(5).collect();
        assert_eq!(leaves.len(), 13);
        let t = logscale_from_cone(&c, 0, &leaves).unwrap();
        // exhaustive triple check
        let n = t.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    assert!(t.get(x, z) >= t.get(x, y).min(t.get(y, z)));
                }
            }
        }
        assert_eq!(t.delta(), 0.0);
    }

    #[test]
    fn ultrametric_metric_is_exact() {
        let c = binary_cone(4);
        let leaves: Vec<_> = c.level(4).collect();
        let t = logscale_from_cone(&c, 0, &leaves).unwrap();
        for alpha in [0.1, 0.7, 2.5] {
            let m = metric_from_logscale(&t, alpha).unwrap();
            assert_eq!(m.sandwich_constant, 1.0);
            for i in 0..t.len() {
                for j in 0..t.len() {
                    assert_eq!(m.distances.get(i, j), (-alpha * t.get(i, j)).exp());
                }
            }
        }
    }

    #[test]
    fn two_points() {
        let t = LogScaleTable::new(vec!["a".into(), "b".into()], vec![f64::INFINITY, 1.5, 1.5, f64::INFINITY]).unwrap();
        let m = metric_from_logscale(&t, 0.4).unwrap();
        assert_eq!(m.distances.get(0, 1), (-0.4f64 * 1.5).exp());
    }

    #[test]
    fn alpha_too_large_rejected_with_bound() {
        let ids = vec!["a".into(), "b".into(), "c".into()];
        let inf = f64::INFINITY;
        // l(a,c) = 0 < min(l(a,b), l(b,c)) = 1 -> delta = 1
        let t = LogScaleTable::new(ids, vec![inf, 1.0, 0.0, 1.0, inf, 1.0, 0.0, 1.0, inf]).unwrap();
        assert_eq!(t.delta(), 1.0);
        let err = metric_from_logscale(&t, 1.0).unwrap_err().to_string();
        assert!(err.contains(&format!("{}", max_admissible_alpha(1.0))), "{err}");
        assert!(metric_from_logscale(&t, 0.17).is_ok());
    }

    #[test]
    fn malformed_tables_rejected() {
        let inf = f64::INFINITY;
        assert!(LogScaleTable::new(vec!["a".into(), "b".into()], vec![inf, 1.0, 2.0, inf]).is_err());
        assert!(LogScaleTable::new(vec!["a".into(), "b".into()], vec![inf, inf, inf, inf]).is_err());
        assert!(LogScaleTable::new(vec!["a".into(), "b".into()], vec![0.0, 1.0, 1.0, inf]).is_err());
    }

    #[test]
    fn csv_layout() {
        let c = binary_cone(2);
        let leaves: Vec<_> = c.level(2).collect();
        let t = logscale_from_cone(&c, 0, &leaves).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "3,4,5,6");
        assert!(lines.next().unwrap().starts_with("inf,"));
        assert_eq!(LogScaleTable::read_csv(&buf[..]).unwrap(), t);
    }

    /// Random log-scale with entries drawn from a few levels; ids are indices.
    pub(crate) fn random_logscale(n: usize, seed: u64) -> LogScaleTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = rng.random_range(0.0..3.0);
                v[i * n + j] = x;
                v[j * n + i] = x;
            }
        }
        LogScaleTable::new((0..n).map(|i| i.to_string()).collect(), v).unwrap()
    }

    /// Minimum over simple chains, each summed left to right from `s`.
    fn brute_chain(t: &LogScaleTable, alpha: f64, s: usize, e: usize) -> f64 {
        fn go(t: &LogScaleTable, alpha: f64, cur: usize, e: usize, acc: f64, used: &mut Vec<bool>, best: &mut f64) {
            let n = t.len();
            for v in 0..n {
                if used[v] {
                    continue;
                }
                let s = acc + (-alpha * t.get(cur, v)).exp();
                if v == e {
                    if s < *best {
                        *best = s;
                    }
                } else {
                    used[v] = true;
                    go(t, alpha, v, e, s, used, best);
                    used[v] = false;
                }
            }
        }
        let mut used = vec![false; t.len()];
        used[s] = true;
        let mut best = f64::INFINITY;
        go(t, alpha, s, e, 0.0, &mut used, &mut best);
        best
    }

    #[test]
    fn chain_infimum_matches_enumeration() {
        // delta of a random table is whatever it is; pick alpha within the admissible range
        for seed in 0..5 {
            let t = random_logscale(8, seed);
            let alpha = 0.3f64.min(max_admissible_alpha(t.delta()));
            let m = metric_from_logscale(&t, alpha).unwrap();
            for i in 0..8 {
                for j in i + 1..8 {
                    assert_eq!(m.distances.get(i, j), brute_chain(&t, alpha, i, j), "seed {seed} ({i},{j})");
                }
            }
            assert!(m.distances.max_triangle_violation() <= 1e-15);
        }
    }
}
