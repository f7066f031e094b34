//! The LP relaxation, solved to optimality by cutting planes with a
//! max-flow separation oracle.
//!
//! Variables are one `x_e in [0,1]` per edge of the complete graph on the
//! vertex set plus one `y_v in [0,1]` per vertex with `y_root` fixed at 1.
//! The initial row set carries the degree equalities `x(delta(v)) = 2 y_v`
//! (`v != root`) and the singleton cuts; the exponential cut family
//! `x(delta(S)) >= 2 y_v` (`root not in S`, `v in S`) is separated exactly
//! by min root-v cuts under capacities `x`. The loop alternates a full
//! simplex solve with separation until no cut is violated; the simplex
//! optimality certificate for the final row set plus an empty separation
//! round together certify the LP optimum.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::instance::MetricInstance;
use crate::maxflow::max_flow;
use crate::simplex::{LpProblem, RowKind};

/// Default cap on separation rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 500;
/// Vertices with `y` at or below this threshold are not separated.
pub const Y_EPS: f64 = 1e-7;
/// A cut must be short of its requirement by more than this to count as
/// violated; the final solution satisfies every cut within the same slack.
pub const CUT_TOL: f64 = 1e-6;

pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Packed upper-triangle index of edge `{i, j}`, `i != j`.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// An optimal fractional solution of the relaxation, with its objective
/// split into the edge-cost part and the penalty part.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub n: usize,
    pub root: usize,
    /// Edge values, packed upper-triangle (see [`edge_index`]).
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Penalty vector the relaxation was solved with.
    pub penalties: Vec<f64>,
    pub cost_part: f64,
    pub penalty_part: f64,
    pub value: f64,
    pub rounds: usize,
    pub cuts_added: usize,
}

impl FractionalSolution {
    pub fn x_edge(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.x[edge_index(self.n, i, j)]
        }
    }
}

/// A violated constraint found by separation: `x(delta(subset))` falls short
/// of `2 y_witness` by `violation`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutConstraint {
    /// Vertices of `S`, sorted; never contains the root.
    pub subset: Vec<usize>,
    pub witness: usize,
    pub violation: f64,
}

impl CutConstraint {
    pub fn mask(&self) -> u64 {
        self.subset.iter().fold(0u64, |m, &v| m | (1u64 << v))
    }
}

/// Result of a relaxation solve, keeping the final restricted LP around for
/// dumps and cross-checking.
#[derive(Debug, Clone)]
pub struct RelaxationResult {
    pub solution: FractionalSolution,
    pub problem: LpProblem,
    pub var_names: Vec<String>,
}

/// Builds the restricted LP for a given set of `(cut mask, witness)` rows.
/// Exposed so the final row set can be re-solved or dumped externally.
pub fn build_relaxation_lp(
    inst: &MetricInstance,
    penalties: &[f64],
    cuts: &[(u64, usize)],
) -> (LpProblem, Vec<String>) {
    let n = inst.n();
    let root = inst.root();
    let ne = edge_count(n);
    let mut lp = LpProblem::new();
    let mut names = Vec::with_capacity(ne + n);
    for i in 0..n {
        for j in (i + 1)..n {
            lp.add_var(0.0, 1.0, inst.dist(i, j));
            names.push(format!("x_{i}_{j}"));
        }
    }
    let y_base = ne;
    for v in 0..n {
        let (lo, hi) = if v == root { (1.0, 1.0) } else { (0.0, 1.0) };
        lp.add_var(lo, hi, -penalties[v]);
        names.push(format!("y_{v}"));
    }
    lp.set_constant(penalties.iter().sum());

    for v in 0..n {
        if v == root {
            continue;
        }
        let mut coeffs: Vec<(usize, f64)> = (0..n)
            .filter(|&u| u != v)
            .map(|u| (edge_index(n, u, v), 1.0))
            .collect();
        coeffs.push((y_base + v, -2.0));
        lp.add_row(RowKind::Eq, coeffs.clone(), 0.0);
        lp.add_row(RowKind::Ge, coeffs, 0.0);
    }
    for &(mask, witness) in cuts {
        let mut coeffs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if ((mask >> i) & 1) != ((mask >> j) & 1) {
                    coeffs.push((edge_index(n, i, j), 1.0));
                }
            }
        }
        coeffs.push((y_base + witness, -2.0));
        lp.add_row(RowKind::Ge, coeffs, 0.0);
    }
    (lp, names)
}

pub fn solve_relaxation(inst: &MetricInstance, penalties: &[f64]) -> Result<FractionalSolution> {
    solve_relaxation_rounds(inst, penalties, DEFAULT_MAX_ROUNDS).map(|r| r.solution)
}

pub fn solve_relaxation_rounds(
    inst: &MetricInstance,
    penalties: &[f64],
    max_rounds: usize,
) -> Result<RelaxationResult> {
    let n = inst.n();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "the relaxation needs n >= 3 (got {n}); solve tiny instances by enumeration"
        )));
    }
    if penalties.len() != n {
        return Err(Error::InvalidArgument(
            "penalty vector length mismatch".into(),
        ));
    }
    let ne = edge_count(n);
    let mut cuts: Vec<(u64, usize)> = Vec::new();
    let mut seen: HashSet<(u64, usize)> = HashSet::new();
    let mut last_state: Option<(f64, f64)> = None;

    for round in 1..=max_rounds {
        let (lp, var_names) = build_relaxation_lp(inst, penalties, &cuts);
        let raw = lp.solve().map_err(Error::from)?;
        let x = raw.values[..ne].to_vec();
        let y = raw.values[ne..ne + n].to_vec();
        let violated = separate(inst, &x, &y);
        if violated.is_empty() {
            let cost_part: f64 = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .map(|(i, j)| inst.dist(i, j) * x[edge_index(n, i, j)])
                .sum();
            let penalty_part: f64 = (0..n).map(|v| penalties[v] * (1.0 - y[v])).sum();
            let solution = FractionalSolution {
                n,
                root: inst.root(),
                x,
                y,
                penalties: penalties.to_vec(),
                cost_part,
                penalty_part,
                value: cost_part + penalty_part,
                rounds: round,
                cuts_added: cuts.len(),
            };
            return Ok(RelaxationResult {
                solution,
                problem: lp,
                var_names,
            });
        }
        last_state = Some((raw.objective, violated[0].violation));
        let mut inserted = false;
        for cut in &violated {
            if seen.insert((cut.mask(), cut.witness)) {
                cuts.push((cut.mask(), cut.witness));
                inserted = true;
            }
        }
        // A violated cut whose row is already present means the solver and
        // the separator disagree beyond their tolerances; bail out rather
        // than spin.
        if !inserted {
            let (value, violation) = last_state.unwrap();
            return Err(Error::SeparationCap {
                rounds: round,
                value,
                violation,
            });
        }
    }
    let (value, violation) = last_state.unwrap_or((f64::NAN, f64::NAN));
    Err(Error::SeparationCap {
        rounds: max_rounds,
        value,
        violation,
    })
}

/// Exact separation: for every vertex with meaningful `y`, compute the min
/// root-v cut under capacities `x` and report it if short of `2 y_v`.
/// Returns the most violated cuts first, at most one per witness; an empty
/// list certifies that no constraint of the family is violated.
pub fn separate(inst: &MetricInstance, x: &[f64], y: &[f64]) -> Vec<CutConstraint> {
    let n = inst.n();
    let root = inst.root();
    let mut caps = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = x[edge_index(n, i, j)].max(0.0);
            caps[i][j] = v;
            caps[j][i] = v;
        }
    }
    let mut cuts = Vec::new();
    for w in 0..n {
        if w == root || y[w] <= Y_EPS {
            continue;
        }
        let flow = max_flow(&caps, root, w);
        if flow.value < 2.0 * y[w] - CUT_TOL {
            // The sink-side set is the smallest certifying subset.
            let subset: Vec<usize> = (0..n).filter(|&u| flow.sink_side[u]).collect();
            cuts.push(CutConstraint {
                subset,
                witness: w,
                violation: 2.0 * y[w] - flow.value,
            });
        }
    }
    cuts.sort_by(|a, b| {
        b.violation
            .partial_cmp(&a.violation)
            .unwrap()
            .then(a.witness.cmp(&b.witness))
    });
    cuts
}

#[derive(Debug, Clone, Copy)]
pub struct ClassCheck {
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
}

fn class(worst: f64, tol: f64) -> ClassCheck {
    ClassCheck {
        worst,
        tol,
        pass: worst <= tol,
    }
}

/// Itemized feasibility diagnostics for a fractional solution.
#[derive(Debug, Clone, Copy)]
pub struct FeasibilityReport {
    pub bounds: ClassCheck,
    pub root_equality: ClassCheck,
    pub degrees: ClassCheck,
    pub cuts: ClassCheck,
    pub decomposition: ClassCheck,
}

impl FeasibilityReport {
    pub fn pass(&self) -> bool {
        self.bounds.pass
            && self.root_equality.pass
            && self.degrees.pass
            && self.cuts.pass
            && self.decomposition.pass
    }
}

/// Re-checks every invariant class of a solution, reporting the worst
/// violation magnitude per class.
pub fn check_feasible(inst: &MetricInstance, sol: &FractionalSolution) -> FeasibilityReport {
    let n = inst.n();
    let root = inst.root();

    let mut worst_bounds: f64 = 0.0;
    for &v in sol.x.iter().chain(sol.y.iter()) {
        worst_bounds = worst_bounds.max(-v).max(v - 1.0);
    }
    let worst_root = (sol.y[root] - 1.0).abs();

    let mut worst_degree: f64 = 0.0;
    for v in 0..n {
        if v == root {
            continue;
        }
        let deg: f64 = (0..n).filter(|&u| u != v).map(|u| sol.x_edge(u, v)).sum();
        worst_degree = worst_degree.max((deg - 2.0 * sol.y[v]).abs());
    }

    let mut worst_cut: f64 = 0.0;
    let mut caps = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sol.x_edge(i, j).max(0.0);
            caps[i][j] = v;
            caps[j][i] = v;
        }
    }
    for w in 0..n {
        if w == root || sol.y[w] <= Y_EPS {
            continue;
        }
        let flow = max_flow(&caps, root, w);
        worst_cut = worst_cut.max(2.0 * sol.y[w] - flow.value);
    }

    let cost_part: f64 = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| inst.dist(i, j) * sol.x_edge(i, j))
        .sum();
    let penalty_part: f64 = (0..n).map(|v| sol.penalties[v] * (1.0 - sol.y[v])).sum();
    let scale = 1.0 + sol.value.abs();
    let worst_decomp = (sol.value - (sol.cost_part + sol.penalty_part))
        .abs()
        .max((cost_part - sol.cost_part).abs())
        .max((penalty_part - sol.penalty_part).abs());

    FeasibilityReport {
        bounds: class(worst_bounds, 1e-7),
        root_equality: class(worst_root, 1e-7),
        degrees: class(worst_degree, 1e-6),
        cuts: class(worst_cut, CUT_TOL),
        decomposition: class(worst_decomp, 1e-9 * scale),
    }
}
