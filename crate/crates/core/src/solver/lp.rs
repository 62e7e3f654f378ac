//! Dense revised simplex for `min cᵀw  s.t.  A w = b, w ≥ 0`.
//!
//! The entering column is the most negative reduced cost. After a run of
//! degenerate pivots pricing switches to Bland's rule (lowest eligible index
//! enters), so degenerate problems cannot cycle; ratio ties always go to the
//! lowest basic index. The basis inverse is kept explicitly and refactorized
//! every `REFACTOR_EVERY` pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-12;
const FEASIBILITY_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;
const MAX_PIVOTS: usize = 200_000;
/// Consecutive degenerate pivots before Dantzig pricing falls back to Bland's rule.
const DEGENERATE_SWITCH: usize = 20;

/// Entering-column rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rule {
    /// Lowest eligible index.
    Bland,
    /// Most negative reduced cost, switching to Bland's rule on degenerate stalls.
    #[default]
    Dantzig,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    rule: Rule,
    rhs: Vec<f64>,
    costs: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: f64,
    /// Primal value of every column, in insertion order.
    pub values: Vec<f64>,
    /// Indices of the basic columns; `None` marks an artificial left on a redundant row.
    pub basis: Vec<Option<usize>>,
    /// Row prices y with reduced costs c_j − yᵀA_j ≥ 0 at optimality.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(rhs: Vec<f64>) -> Self {
        LinearProgram {
            rule: Rule::default(),
            rhs,
            costs: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = rule;
        self
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Appends a column and returns its index.
    pub fn push(&mut self, cost: f64, column: Vec<f64>) -> usize {
        assert_eq!(column.len(), self.rows(), "column length must match row count");
        self.costs.push(cost);
        self.columns.push(column);
        self.columns.len() - 1
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Simplex::new(self).run()
    }
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    rule: Rule,
    /// Row sign flips that make the right-hand side nonnegative.
    sign: Vec<f64>,
    rhs: Vec<f64>,
    /// Column index per row; indices ≥ n are artificials.
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let rows = lp.rows();
        let sign: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = lp.rhs.iter().zip(&sign).map(|(b, s)| b * s).collect();
        let n = lp.len();
        let mut binv = vec![vec![0.0; rows]; rows];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Simplex {
            lp,
            rule: lp.rule,
            sign,
            xb: rhs.clone(),
            rhs,
            basis: (n..n + rows).collect(),
            binv,
            pivots: 0,
            since_refactor: 0,
        }
    }

    fn n(&self) -> usize {
        self.lp.len()
    }

    fn rows(&self) -> usize {
        self.rhs.len()
    }

    /// Entry `row` of the (sign-adjusted) column `j`, artificials included.
    fn entry(&self, j: usize, row: usize) -> f64 {
        if j < self.n() {
            self.lp.columns[j][row] * self.sign[row]
        } else if j - self.n() == row {
            1.0
        } else {
            0.0
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows()).map(|r| self.entry(j, r)).collect()
    }

    /// B⁻¹ A_j
    fn direction(&self, j: usize) -> Vec<f64> {
        let a = self.column(j);
        self.binv
            .iter()
            .map(|row| row.iter().zip(&a).map(|(x, y)| x * y).sum())
            .collect()
    }

    fn prices(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let rows = self.rows();
        let mut y = vec![0.0; rows];
        for (i, &bj) in self.basis.iter().enumerate() {
            let c = cost(bj);
            if c != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[i]) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn pivot(&mut self, leave_row: usize, enter: usize, d: &[f64]) {
        let rows = self.rows();
        let p = d[leave_row];
        let theta = self.xb[leave_row] / p;
        for i in 0..rows {
            if i != leave_row {
                self.xb[i] -= theta * d[i];
                if self.xb[i] < 0.0 && self.xb[i] > -FEASIBILITY_TOL {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[leave_row] = theta;
        let pivot_row: Vec<f64> = self.binv[leave_row].iter().map(|v| v / p).collect();
        for i in 0..rows {
            if i != leave_row && d[i] != 0.0 {
                let f = d[i];
                for (v, pr) in self.binv[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        self.binv[leave_row] = pivot_row;
        self.basis[leave_row] = enter;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    /// Recomputes B⁻¹ and x_B from scratch by Gauss–Jordan elimination.
    fn refactor(&mut self) {
        let rows = self.rows();
        let mut a: Vec<Vec<f64>> = (0..rows)
            .map(|r| self.basis.iter().map(|&j| self.entry(j, r)).collect())
            .collect();
        let mut inv: Vec<Vec<f64>> = (0..rows)
            .map(|r| (0..rows).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect();
        for col in 0..rows {
            let piv = (col..rows)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            if a[piv][col].abs() < 1e-14 {
                // Numerically singular; keep the product-form inverse.
                return;
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col];
            for v in a[col].iter_mut() {
                *v /= p;
            }
            for v in inv[col].iter_mut() {
                *v /= p;
            }
            for r in 0..rows {
                if r != col && a[r][col] != 0.0 {
                    let f = a[r][col];
                    for c in 0..rows {
                        a[r][c] -= f * a[col][c];
                        inv[r][c] -= f * inv[col][c];
                    }
                }
            }
        }
        // inv is B⁻¹ with rows indexed like the basis positions.
        self.binv = inv;
        self.xb = self
            .binv
            .iter()
            .map(|row| {
                let v: f64 = row.iter().zip(&self.rhs).map(|(x, y)| x * y).sum();
                if v < 0.0 && v > -FEASIBILITY_TOL {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        self.since_refactor = 0;
    }

    /// Runs simplex iterations with the given costs over eligible columns.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, eligible: &dyn Fn(usize) -> bool) -> Result<()> {
        let total = self.n() + self.rows();
        let mut in_basis = vec![false; total];
        for &b in &self.basis {
            in_basis[b] = true;
        }
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::BudgetExceeded(format!("simplex exceeded {MAX_PIVOTS} pivots")));
            }
            let y = self.prices(cost);
            let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let threshold = -REDUCED_COST_TOL * scale;
            let reduced = |j: usize| -> f64 {
                let col_dot: f64 = (0..self.rows()).map(|r| y[r] * self.entry(j, r)).sum();
                cost(j) - col_dot
            };
            let candidates = (0..total).filter(|&j| !in_basis[j] && eligible(j));
            let enter = match self.rule {
                Rule::Bland => candidates.into_iter().find(|&j| reduced(j) < threshold),
                Rule::Dantzig if degenerate_run >= DEGENERATE_SWITCH => {
                    candidates.into_iter().find(|&j| reduced(j) < threshold)
                }
                Rule::Dantzig => candidates
                    .map(|j| (j, reduced(j)))
                    .filter(|&(_, rc)| rc < threshold)
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(j, _)| j),
            };
            let Some(enter) = enter else {
                return Ok(());
            };
            let d = self.direction(enter);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &di) in d.iter().enumerate() {
                if di > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / di;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((leave_row, _)) = leave else {
                return Err(Error::Unbounded);
            };
            if self.xb[leave_row] <= FEASIBILITY_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            in_basis[self.basis[leave_row]] = false;
            in_basis[enter] = true;
            self.pivot(leave_row, enter, &d);
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        let n = self.n();
        let rows = self.rows();
        if rows == 0 {
            return Err(Error::Empty("linear program rows"));
        }

        // Phase I: minimize the sum of artificials.
        self.optimize(&|j| if j >= n { 1.0 } else { 0.0 }, &|_| true)?;
        self.refactor();
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&b, _)| b >= n)
            .map(|(_, &v)| v)
            .sum();
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Err(Error::Infeasible(format!(
                "constraints cannot be met (residual {infeasibility:e})"
            )));
        }

        // Drive zero-valued artificials out of the basis where possible.
        for row in 0..rows {
            if self.basis[row] < n {
                continue;
            }
            let in_basis: Vec<usize> = self.basis.clone();
            let candidate = (0..n).filter(|j| !in_basis.contains(j)).find(|&j| {
                let d = self.direction(j);
                d[row].abs() > 1e-9
            });
            if let Some(j) = candidate {
                let d = self.direction(j);
                self.xb[row] = 0.0;
                self.pivot(row, j, &d);
            }
        }

        // Phase II over the real columns.
        let costs = &self.lp.costs;
        self.optimize(&|j| if j < n { costs[j] } else { 0.0 }, &|j| j < n)?;
        self.refactor();

        let mut values = vec![0.0; n];
        for (&b, &v) in self.basis.iter().zip(&self.xb) {
            if b < n {
                values[b] = v.max(0.0);
            }
        }
        let objective = values.iter().zip(costs).map(|(v, c)| v * c).sum();
        let y = self.prices(&|j| if j < n { costs[j] } else { 0.0 });
        let duals = y.iter().zip(&self.sign).map(|(v, s)| v * s).collect();
        Ok(LpSolution {
            objective,
            values,
            basis: self.basis.iter().map(|&b| (b < n).then_some(b)).collect(),
            duals,
            pivots: self.pivots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_transport_problem() {
        // min x0 + 2x1 + 3x2  s.t. x0 + x1 + x2 = 1, x1 + 2x2 = 1
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push(1.0, vec![1.0, 0.0]);
        lp.push(2.0, vec![1.0, 1.0]);
        lp.push(3.0, vec![1.0, 2.0]);
        let s = lp.solve().unwrap();
        // Optimal: x0 = 1/2, x2 = 1/2 (cost 2) vs x1 = 1 (cost 2): tie; value 2.
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-12);
        let y = &s.duals;
        for (j, c) in [1.0, 2.0, 3.0].iter().enumerate() {
            let col = &lp.columns[j];
            assert!(c - (y[0] * col[0] + y[1] * col[1]) > -1e-12);
        }
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(1.0, vec![-1.0]);
        assert!(matches!(lp.solve(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push(0.0, vec![1.0]);
        lp.push(-1.0, vec![1.0]);
        lp.push(-1.0, vec![-1.0]);
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // Row 2 duplicates row 1 with a sign flip.
        let mut lp = LinearProgram::new(vec![2.0, -2.0]);
        lp.push(3.0, vec![1.0, -1.0]);
        lp.push(1.0, vec![2.0, -2.0]);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.values[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example for the largest-coefficient rule.
        let mut lp = LinearProgram::new(vec![0.0, 0.0, 1.0]);
        let cols = [
            (-0.75, [0.25, 0.5, 0.0]),
            (150.0, [-60.0, -90.0, 0.0]),
            (-0.02, [-0.04, -0.02, 1.0]),
            (6.0, [9.0, 3.0, 0.0]),
        ];
        for (c, a) in cols {
            lp.push(c, a.to_vec());
        }
        for r in 0..3 {
            let mut e = vec![0.0; 3];
            e[r] = 1.0;
            lp.push(0.0, e);
        }
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, -0.05, epsilon = 1e-9);
    }
}
