//! Instance data model: metric validation, generation, serialization, and
//! tour objective evaluation.
//!
//! All types are immutable after construction and safe to share across
//! threads. Instances are stored as dense symmetric matrices; distances and
//! penalties are plain `f64` with comparisons at relative tolerance `1e-9`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Relative tolerance used when comparing stored distances.
pub const REL_TOL: f64 = 1e-9;

/// A validated prize-collecting TSP instance: a finite metric with a depot
/// (root) vertex and nonnegative penalties. The root penalty is normalized
/// to zero at validation since the root is always visited.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricInstance {
    n: usize,
    root: usize,
    dist: Vec<Vec<f64>>,
    penalties: Vec<f64>,
}

impl MetricInstance {
    /// Validates raw data against the metric axioms and builds an instance.
    ///
    /// Rejects dimension mismatches, asymmetry, negative entries, a nonzero
    /// diagonal, triangle violations beyond `1e-9 * max_entry`, and negative
    /// penalties. The root penalty is forced to zero.
    pub fn validate(
        n: usize,
        root: usize,
        dist: Vec<Vec<f64>>,
        mut penalties: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance(
                "vertex count must be at least 1".into(),
            ));
        }
        if root >= n {
            return Err(Error::InvalidInstance(format!(
                "root {root} out of range for n={n}"
            )));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "distance matrix is not {n}x{n}"
            )));
        }
        if penalties.len() != n {
            return Err(Error::InvalidInstance(format!(
                "expected {n} penalties, got {}",
                penalties.len()
            )));
        }
        let mut max_entry: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = dist[i][j];
                if !d.is_finite() {
                    return Err(Error::InvalidInstance(format!(
                        "non-finite distance at ({i},{j})"
                    )));
                }
                if d < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "negative distance {d} at ({i},{j})"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "nonzero diagonal entry {d} at ({i},{i})"
                    )));
                }
                let back = dist[j][i];
                if (d - back).abs() > REL_TOL * d.abs().max(back.abs()) {
                    return Err(Error::InvalidInstance(format!(
                        "asymmetric entries at ({i},{j}): {d} vs {back}"
                    )));
                }
                max_entry = max_entry.max(d);
            }
        }
        let eps_tri = REL_TOL * max_entry;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][j] + dist[j][k] < dist[i][k] - eps_tri {
                        return Err(Error::InvalidInstance(format!(
                            "triangle inequality violated on ({i},{j},{k}): \
                             {} + {} < {}",
                            dist[i][j], dist[j][k], dist[i][k]
                        )));
                    }
                }
            }
        }
        for (v, p) in penalties.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "penalty {p} at vertex {v} must be a nonnegative real"
                )));
            }
        }
        penalties[root] = 0.0;
        Ok(MetricInstance {
            n,
            root,
            dist,
            penalties,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn penalties(&self) -> &[f64] {
        &self.penalties
    }

    pub fn penalty(&self, v: usize) -> f64 {
        self.penalties[v]
    }

    pub fn total_penalty(&self) -> f64 {
        self.penalties.iter().sum()
    }

    /// Recomputes `cost(walk) + penalties(unvisited)` for a closed walk given
    /// as a vertex sequence starting at the root.
    pub fn objective(&self, vertices: &[usize]) -> Result<f64> {
        self.check_tour_sequence(vertices)?;
        let cost = self.walk_cost(vertices);
        let mut visited = vec![false; self.n];
        for &v in vertices {
            visited[v] = true;
        }
        let skipped: f64 = (0..self.n)
            .filter(|&v| !visited[v])
            .map(|v| self.penalties[v])
            .sum();
        Ok(cost + skipped)
    }

    /// Cost of the closed walk `v0 -> v1 -> ... -> v0`. A single vertex costs
    /// 0 and a pair costs twice the connecting distance; both fall out of the
    /// closing sum without special cases.
    pub fn walk_cost(&self, vertices: &[usize]) -> f64 {
        let mut cost = 0.0;
        for w in vertices.windows(2) {
            cost += self.dist[w[0]][w[1]];
        }
        if let (Some(&first), Some(&last)) = (vertices.first(), vertices.last()) {
            cost += self.dist[last][first];
        }
        cost
    }

    fn check_tour_sequence(&self, vertices: &[usize]) -> Result<()> {
        if vertices.is_empty() {
            return Err(Error::InvalidTour("empty vertex sequence".into()));
        }
        if vertices[0] != self.root {
            return Err(Error::InvalidTour(format!(
                "tour must start at root {}, got {}",
                self.root, vertices[0]
            )));
        }
        let mut seen = vec![false; self.n];
        for &v in vertices {
            if v >= self.n {
                return Err(Error::InvalidTour(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::InvalidTour(format!("vertex {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(())
    }

    /// Serializes to the instance JSON format. Numbers are emitted in
    /// 6-decimal fixed notation so that serialize -> parse round-trips
    /// byte-identically on generated instances.
    pub fn to_json(&self) -> String {
        let fmt_row = |row: &[f64]| {
            row.iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"n\": {},\n", self.n));
        out.push_str(&format!("  \"root\": {},\n", self.root));
        out.push_str("  \"metric\": [\n");
        for (i, row) in self.dist.iter().enumerate() {
            let sep = if i + 1 < self.n { "," } else { "" };
            out.push_str(&format!("    [{}]{}\n", fmt_row(row), sep));
        }
        out.push_str("  ],\n");
        out.push_str(&format!(
            "  \"penalties\": [{}]\n",
            fmt_row(&self.penalties)
        ));
        out.push('}');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        RawInstance::from_json(text)?.into_instance()
    }
}

/// Unvalidated instance data as read from disk. Kept separate so callers can
/// opt into [`metric_closure`] repair before validation.
#[derive(Debug, Clone, Deserialize)]
pub struct RawInstance {
    pub n: usize,
    pub root: usize,
    pub metric: Vec<Vec<f64>>,
    pub penalties: Vec<f64>,
}

impl RawInstance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_instance(self) -> Result<MetricInstance> {
        MetricInstance::validate(self.n, self.root, self.metric, self.penalties)
    }
}

/// All-pairs shortest-path closure of a symmetric nonnegative matrix.
/// The output satisfies the triangle inequality and entries never increase.
/// Identity on matrices that are already metric.
pub fn metric_closure(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = matrix.len();
    let mut d: Vec<Vec<f64>> = matrix.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// An ordered closed walk through a vertex subset containing the root,
/// together with its cost and objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    vertices: Vec<usize>,
    cost: f64,
    objective: f64,
}

impl Tour {
    /// Builds a tour from a vertex sequence, recomputing cost and objective.
    /// The sequence must start at the root and contain no repeats.
    pub fn new(inst: &MetricInstance, vertices: Vec<usize>) -> Result<Self> {
        let objective = inst.objective(&vertices)?;
        let cost = inst.walk_cost(&vertices);
        Ok(Tour {
            vertices,
            cost,
            objective,
        })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn visits(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }
}

fn quantize6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Generates a random Euclidean instance: `n` points uniform in the unit
/// square, distances rounded to 6 decimals, penalties uniform in
/// `[0, penalty_scale]` (also rounded), root 0. Deterministic in `seed`.
pub fn gen_euclidean(n: usize, seed: u64, penalty_scale: f64) -> MetricInstance {
    assert!(n >= 1, "need at least one vertex");
    assert!(
        penalty_scale >= 0.0 && penalty_scale.is_finite(),
        "penalty scale must be a nonnegative real"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();

    // Work in integer micro-units: rounding true Euclidean distances can
    // break near-degenerate triangles by up to 1.5e-6, so close the matrix
    // in exact integer arithmetic. On non-degenerate inputs this is the
    // identity and the entries stay plain rounded distances.
    let mut micro = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            let d = (dx * dx + dy * dy).sqrt();
            let m = (d * 1e6).round() as i64;
            micro[i][j] = m;
            micro[j][i] = m;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = micro[i][k] + micro[k][j];
                if via < micro[i][j] {
                    micro[i][j] = via;
                }
            }
        }
    }
    let dist: Vec<Vec<f64>> = micro
        .iter()
        .map(|row| row.iter().map(|&m| m as f64 / 1e6).collect())
        .collect();

    let mut penalties: Vec<f64> = (0..n)
        .map(|_| quantize6(rng.gen::<f64>() * penalty_scale))
        .collect();
    penalties[0] = 0.0;

    MetricInstance::validate(n, 0, dist, penalties)
        .expect("generated instance is metric by construction")
}
