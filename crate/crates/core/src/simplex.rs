//! Dense bounded-variable simplex solver.
//!
//! A self-contained two-phase primal simplex on a dense tableau, sized for
//! desk-scale LPs (hundreds of variables and rows). The contract: given
//! explicit rows, return a primal-optimal, primal-feasible point within
//! `1e-7` feasibility tolerance. After the tableau converges, basic values
//! and reduced costs are recomputed from the original data through an LU
//! factorization of the basis, so the returned point and its optimality
//! certificate do not inherit pivot drift.

use crate::error::Error;

/// Feasibility tolerance of returned solutions (bounds and row residuals).
pub const FEAS_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const BLAND_AFTER: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Minimization problem over bounded variables with equality and `>=` rows.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    constant: f64,
    rows: Vec<LpRow>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("iteration limit exceeded")]
    IterationLimit,
    #[error("numerical failure: {0}")]
    Numerics(String),
}

impl From<LpError> for Error {
    fn from(e: LpError) -> Self {
        Error::Solver(e.to_string())
    }
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        assert!(lower.is_finite(), "variables need a finite lower bound");
        assert!(lower <= upper, "empty variable domain");
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.push(cost);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, kind: RowKind, coeffs: Vec<(usize, f64)>, rhs: f64) {
        for &(v, _) in &coeffs {
            assert!(v < self.cost.len(), "row references unknown variable");
        }
        self.rows.push(LpRow { kind, coeffs, rhs });
    }

    pub fn set_constant(&mut self, constant: f64) {
        self.constant = constant;
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn objective_coeff(&self, var: usize) -> f64 {
        self.cost[var]
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Simplex::build(self)?.run()
    }

    /// Plain-text dump of the full problem for external cross-checking.
    ///
    /// Format (`lp dump v1`): one `var` line per variable with bounds and
    /// objective coefficient, one `row` line per constraint listing
    /// `coef*name` terms, plus the objective constant.
    pub fn dump(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.num_vars());
        let mut out = String::from("# lp dump v1 (minimize)\n");
        out.push_str(&format!("constant {}\n", self.constant));
        for v in 0..self.num_vars() {
            out.push_str(&format!(
                "var {} lower {} upper {} cost {}\n",
                names[v], self.lower[v], self.upper[v], self.cost[v]
            ));
        }
        for row in &self.rows {
            let op = match row.kind {
                RowKind::Eq => "eq",
                RowKind::Ge => "ge",
            };
            let terms: Vec<String> = row
                .coeffs
                .iter()
                .map(|&(v, c)| format!("{}*{}", c, names[v]))
                .collect();
            out.push_str(&format!("row {} rhs {} : {}\n", op, row.rhs, terms.join(" + ")));
        }
        out
    }
}

struct Simplex {
    m: usize,
    cols: usize,
    nstruct: usize,
    art_start: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    tab: Vec<Vec<f64>>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    at_upper: Vec<bool>,
    z: Vec<f64>,
    constant: f64,
}

impl Simplex {
    fn build(p: &LpProblem) -> Result<Self, LpError> {
        let nstruct = p.num_vars();
        let m = p.rows.len();
        let nge = p.rows.iter().filter(|r| r.kind == RowKind::Ge).count();
        let art_start = nstruct + nge;
        let cols = art_start + m;

        let mut lower = p.lower.clone();
        let mut upper = p.upper.clone();
        let mut cost = p.cost.clone();
        lower.resize(cols, 0.0);
        upper.resize(cols, f64::INFINITY);
        cost.resize(cols, 0.0);

        let mut a = vec![vec![0.0; cols]; m];
        let mut b = vec![0.0; m];
        let mut surplus = nstruct;
        for (i, row) in p.rows.iter().enumerate() {
            for &(v, c) in &row.coeffs {
                a[i][v] += c;
            }
            if row.kind == RowKind::Ge {
                a[i][surplus] = -1.0;
                surplus += 1;
            }
            b[i] = row.rhs;
        }

        // Structural and surplus variables start nonbasic at their lower
        // bound; one artificial per row absorbs the residual.
        let mut z = vec![0.0; cols];
        z[..art_start].copy_from_slice(&lower[..art_start]);
        let mut basis = Vec::with_capacity(m);
        let mut in_basis = vec![false; cols];
        let mut tab = vec![vec![0.0; cols]; m];
        for i in 0..m {
            let mut resid = b[i];
            for j in 0..art_start {
                if z[j] != 0.0 {
                    resid -= a[i][j] * z[j];
                }
            }
            let art = art_start + i;
            let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
            a[i][art] = sign;
            z[art] = resid.abs();
            basis.push(art);
            in_basis[art] = true;
            for j in 0..cols {
                tab[i][j] = a[i][j] * sign;
            }
        }

        Ok(Simplex {
            m,
            cols,
            nstruct,
            art_start,
            a,
            b,
            lower,
            upper,
            cost,
            tab,
            basis,
            in_basis,
            at_upper: vec![false; cols],
            z,
            constant: p.constant,
        })
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        // Phase 1: drive the artificials to zero.
        let mut phase1 = vec![0.0; self.cols];
        for c in self.art_start..self.cols {
            phase1[c] = 1.0;
        }
        self.optimize(&phase1)?;
        let infeas: f64 = (self.art_start..self.cols).map(|c| self.z[c]).sum();
        if infeas > FEAS_TOL {
            return Err(LpError::Infeasible);
        }
        self.retire_artificials();

        // Phase 2 with restarts: if the post-hoc certificate computed from
        // the original data rejects the tableau's optimum, rebuild the
        // tableau from the current basis and continue pivoting.
        let cost = self.cost.clone();
        for _ in 0..3 {
            self.optimize(&cost)?;
            if self.refine_and_certify(&cost)? {
                let objective = self.constant
                    + (0..self.nstruct).map(|j| self.cost[j] * self.z[j]).sum::<f64>();
                return Ok(LpSolution {
                    values: self.z[..self.nstruct].to_vec(),
                    objective,
                });
            }
            self.rebuild_tableau()?;
        }
        Err(LpError::Numerics("could not certify optimality".into()))
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<(), LpError> {
        let cap = 50_000 + 200 * (self.m + self.cols);
        for iter in 0..cap {
            let bland = iter >= BLAND_AFTER;
            let Some((enter, from_upper)) = self.choose_entering(cost, bland) else {
                return Ok(());
            };
            self.step(enter, from_upper, bland)?;
        }
        Err(LpError::IterationLimit)
    }

    fn choose_entering(&self, cost: &[f64], bland: bool) -> Option<(usize, bool)> {
        let cb: Vec<f64> = self.basis.iter().map(|&v| cost[v]).collect();
        let mut best: Option<(usize, f64, bool)> = None;
        for j in 0..self.cols {
            if self.in_basis[j] || self.lower[j] == self.upper[j] {
                continue;
            }
            let mut d = cost[j];
            for i in 0..self.m {
                let t = self.tab[i][j];
                if t != 0.0 {
                    d -= cb[i] * t;
                }
            }
            let from_upper = self.at_upper[j];
            let eligible = if from_upper { d > COST_TOL } else { d < -COST_TOL };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, from_upper));
            }
            if best.is_none_or(|(_, s, _)| d.abs() > s) {
                best = Some((j, d.abs(), from_upper));
            }
        }
        best.map(|(j, _, fu)| (j, fu))
    }

    fn step(&mut self, enter: usize, from_upper: bool, bland: bool) -> Result<(), LpError> {
        let dir: f64 = if from_upper { -1.0 } else { 1.0 };
        let mut t_best = self.upper[enter] - self.lower[enter];
        let mut leaving: Option<usize> = None;
        let mut hits_upper = false;
        for i in 0..self.m {
            let w = self.tab[i][enter];
            if w.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * w;
            let bi = self.basis[i];
            let (room, toward_upper) = if rate < 0.0 {
                ((self.z[bi] - self.lower[bi]).max(0.0), false)
            } else if self.upper[bi].is_finite() {
                ((self.upper[bi] - self.z[bi]).max(0.0), true)
            } else {
                continue;
            };
            let ratio = room / rate.abs();
            let replace = if ratio < t_best - RATIO_TIE {
                true
            } else if ratio <= t_best + RATIO_TIE {
                match leaving {
                    // Tie-break: Bland keeps the smallest variable index
                    // (anti-cycling); otherwise prefer the larger pivot.
                    Some(cur) => {
                        if bland {
                            self.basis[i] < self.basis[cur]
                        } else {
                            w.abs() > self.tab[cur][enter].abs()
                        }
                    }
                    None => true,
                }
            } else {
                false
            };
            if replace {
                t_best = t_best.min(ratio);
                leaving = Some(i);
                hits_upper = toward_upper;
            }
        }

        if !t_best.is_finite() {
            return Err(LpError::Unbounded);
        }

        match leaving {
            None => {
                // Bound flip: the entering variable crosses to its other
                // bound without a basis change.
                for i in 0..self.m {
                    let w = self.tab[i][enter];
                    if w != 0.0 {
                        let bi = self.basis[i];
                        self.z[bi] -= dir * t_best * w;
                    }
                }
                self.z[enter] = if from_upper {
                    self.lower[enter]
                } else {
                    self.upper[enter]
                };
                self.at_upper[enter] = !from_upper;
            }
            Some(r) => {
                for i in 0..self.m {
                    let w = self.tab[i][enter];
                    if w != 0.0 {
                        let bi = self.basis[i];
                        self.z[bi] -= dir * t_best * w;
                    }
                }
                let start = if from_upper {
                    self.upper[enter]
                } else {
                    self.lower[enter]
                };
                self.z[enter] = start + dir * t_best;
                let leave_var = self.basis[r];
                self.z[leave_var] = if hits_upper {
                    self.upper[leave_var]
                } else {
                    self.lower[leave_var]
                };
                self.pivot(r, enter);
                self.in_basis[leave_var] = false;
                self.at_upper[leave_var] = hits_upper;
                self.in_basis[enter] = true;
                self.at_upper[enter] = false;
            }
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let piv = self.tab[r][enter];
        let inv = 1.0 / piv;
        for j in 0..self.cols {
            self.tab[r][j] *= inv;
        }
        self.tab[r][enter] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i][enter];
            if f == 0.0 {
                continue;
            }
            let (head, tail) = self.tab.split_at_mut(r.max(i));
            let (row_i, row_r) = if i < r {
                (&mut head[i], &tail[0])
            } else {
                (&mut tail[0], &head[r])
            };
            for j in 0..self.cols {
                row_i[j] -= f * row_r[j];
            }
            row_i[enter] = 0.0;
        }
        self.basis[r] = enter;
    }

    /// Pins artificial columns to zero after phase 1 and pivots basic
    /// artificials out where a nonzero replacement column exists. A row
    /// whose artificial cannot leave is linearly dependent; its artificial
    /// stays basic, pinned at zero.
    fn retire_artificials(&mut self) {
        for c in self.art_start..self.cols {
            self.lower[c] = 0.0;
            self.upper[c] = 0.0;
            if !self.in_basis[c] {
                self.z[c] = 0.0;
            }
        }
        for r in 0..self.m {
            let bv = self.basis[r];
            if bv < self.art_start {
                continue;
            }
            let mut best: Option<usize> = None;
            for j in 0..self.art_start {
                if self.in_basis[j] {
                    continue;
                }
                let w = self.tab[r][j].abs();
                if w > 1e-7 && best.is_none_or(|bj: usize| self.tab[r][bj].abs() < w) {
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                // Degenerate exchange: the point itself does not move.
                self.z[bv] = 0.0;
                self.pivot(r, j);
                self.in_basis[bv] = false;
                self.at_upper[bv] = false;
                self.in_basis[j] = true;
                self.at_upper[j] = false;
            }
        }
    }

    /// Recomputes basic values from the original rows through the basis LU
    /// and re-checks feasibility and reduced-cost signs independently of the
    /// tableau. Returns false when the tableau's optimum fails the check.
    fn refine_and_certify(&mut self, cost: &[f64]) -> Result<bool, LpError> {
        for j in 0..self.cols {
            if !self.in_basis[j] {
                self.z[j] = if self.at_upper[j] && self.upper[j].is_finite() {
                    self.upper[j]
                } else {
                    self.lower[j]
                };
            }
        }
        if self.m > 0 {
            let mut rhs = self.b.clone();
            for j in 0..self.cols {
                if !self.in_basis[j] && self.z[j] != 0.0 {
                    for i in 0..self.m {
                        rhs[i] -= self.a[i][j] * self.z[j];
                    }
                }
            }
            let bmat: Vec<Vec<f64>> = (0..self.m)
                .map(|i| self.basis.iter().map(|&v| self.a[i][v]).collect())
                .collect();
            let lu = Lu::factor(bmat)?;
            let xb = lu.solve(&rhs);
            for (i, &bv) in self.basis.iter().enumerate() {
                self.z[bv] = xb[i];
            }
            for j in 0..self.cols {
                if self.z[j] < self.lower[j] - FEAS_TOL || self.z[j] > self.upper[j] + FEAS_TOL {
                    return Ok(false);
                }
            }
            let cb: Vec<f64> = self.basis.iter().map(|&v| cost[v]).collect();
            let w = lu.solve_transposed(&cb);
            let dual_tol =
                FEAS_TOL * (1.0 + cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs())));
            for j in 0..self.cols {
                if self.in_basis[j] || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut d = cost[j];
                for i in 0..self.m {
                    d -= w[i] * self.a[i][j];
                }
                let ok = if self.at_upper[j] { d <= dual_tol } else { d >= -dual_tol };
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Rebuilds `tab = B^{-1} A` from the original rows and current basis.
    fn rebuild_tableau(&mut self) -> Result<(), LpError> {
        if self.m == 0 {
            return Ok(());
        }
        let bmat: Vec<Vec<f64>> = (0..self.m)
            .map(|i| self.basis.iter().map(|&v| self.a[i][v]).collect())
            .collect();
        let lu = Lu::factor(bmat)?;
        let mut col = vec![0.0; self.m];
        for j in 0..self.cols {
            for i in 0..self.m {
                col[i] = self.a[i][j];
            }
            let solved = lu.solve(&col);
            for i in 0..self.m {
                self.tab[i][j] = solved[i];
            }
        }
        Ok(())
    }
}

/// LU factorization with partial pivoting of a square dense matrix.
struct Lu {
    mat: Vec<Vec<f64>>,
    perm: Vec<usize>,
    n: usize,
}

impl Lu {
    fn factor(mut mat: Vec<Vec<f64>>) -> Result<Self, LpError> {
        let n = mat.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut best = k;
            for i in (k + 1)..n {
                if mat[i][k].abs() > mat[best][k].abs() {
                    best = i;
                }
            }
            if mat[best][k].abs() < 1e-12 {
                return Err(LpError::Numerics("singular basis matrix".into()));
            }
            mat.swap(k, best);
            perm.swap(k, best);
            let piv = mat[k][k];
            for i in (k + 1)..n {
                let f = mat[i][k] / piv;
                mat[i][k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        mat[i][j] -= f * mat[k][j];
                    }
                }
            }
        }
        Ok(Lu { mat, perm, n })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = (0..n).map(|i| rhs[self.perm[i]]).collect();
        for i in 1..n {
            for j in 0..i {
                let f = self.mat[i][j];
                if f != 0.0 {
                    x[i] -= f * x[j];
                }
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let f = self.mat[i][j];
                if f != 0.0 {
                    x[i] -= f * x[j];
                }
            }
            x[i] /= self.mat[i][i];
        }
        x
    }

    /// Solves `B^T w = c` using the same factors.
    fn solve_transposed(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        // U^T v = c (forward), then L^T s = v (backward), then undo the
        // row permutation.
        let mut v = vec![0.0; n];
        for k in 0..n {
            let mut acc = c[k];
            for j in 0..k {
                acc -= self.mat[j][k] * v[j];
            }
            v[k] = acc / self.mat[k][k];
        }
        let mut s = v;
        for k in (0..n).rev() {
            for j in (k + 1)..n {
                let f = self.mat[j][k];
                if f != 0.0 {
                    s[k] -= f * s[j];
                }
            }
        }
        let mut w = vec![0.0; n];
        for i in 0..n {
            w[self.perm[i]] = s[i];
        }
        w
    }
}
