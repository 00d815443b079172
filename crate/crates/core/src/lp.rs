//! Dense two-phase simplex for the small linear programs used throughout the
//! crate (gauges, separability, polyhedral hull distances, functional search).
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c^T x
//! subject to  a_i^T x  (<= | >= | =)  b_i
//!             x_j >= 0   unless x_j is declared free
//! ```
//!
//! Pivoting uses Dantzig's rule and falls back to Bland's rule after a run of
//! degenerate pivots, which rules out cycling.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `objective.len()` nonnegative variables.
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            free: vec![false; n],
            rows: Vec::new(),
        }
    }

    /// A pure feasibility problem over `n` variables.
    pub fn feasibility(n: usize) -> Self {
        Self::minimize(vec![0.0; n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.free[var] = true;
        self
    }

    pub fn set_free_range(&mut self, vars: std::ops::Range<usize>) -> &mut Self {
        for v in vars {
            self.free[v] = true;
        }
        self
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    /// Sparse helper: `pairs` lists `(var, coeff)`.
    pub fn add_sparse(
        &mut self,
        pairs: &[(usize, f64)],
        relation: Relation,
        rhs: f64,
    ) -> &mut Self {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(v, c) in pairs {
            coeffs[v] += c;
        }
        self.add(coeffs, relation, rhs)
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Column of each original variable: `(positive part, negative part if free)`.
    var_cols: Vec<(usize, Option<usize>)>,
    ncols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.num_vars());
        let mut kinds = Vec::new();
        for &free in &lp.free {
            let pos = kinds.len();
            kinds.push(ColKind::Structural);
            let neg = if free {
                kinds.push(ColKind::Structural);
                Some(pos + 1)
            } else {
                None
            };
            var_cols.push((pos, neg));
        }
        let n_struct = kinds.len();

        // Normalize rows to nonnegative right-hand sides.
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| {
                let mut dense = vec![0.0; n_struct];
                for (v, &c) in r.coeffs.iter().enumerate() {
                    let (p, n) = var_cols[v];
                    dense[p] += c;
                    if let Some(n) = n {
                        dense[n] -= c;
                    }
                }
                if r.rhs < 0.0 {
                    let rel = match r.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (dense.into_iter().map(|c| -c).collect(), rel, -r.rhs)
                } else {
                    (dense, r.relation, r.rhs)
                }
            })
            .collect();

        let n_slack = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Eq)
            .count();
        let n_art = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Le)
            .count();
        let ncols = n_struct + n_slack + n_art;
        kinds.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
        kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut next_slack = n_struct;
        let mut next_art = n_struct + n_slack;
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![0.0; ncols + 1];
            row[..n_struct].copy_from_slice(&coeffs);
            row[ncols] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }

        Tableau {
            rows,
            basis,
            kinds,
            var_cols,
            ncols,
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpOutcome {
        let scale = self
            .rows
            .iter()
            .map(|r| r[self.ncols].abs())
            .fold(1.0_f64, f64::max);

        // Phase 1: minimize the sum of artificials.
        let phase1: Vec<f64> = self
            .kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        if self.kinds.contains(&ColKind::Artificial) {
            if !self.optimize(&phase1, true) {
                // Phase 1 is bounded below by zero; this is unreachable in exact arithmetic.
                return LpOutcome::Infeasible;
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.rows)
                .filter(|(b, _)| self.kinds[**b] == ColKind::Artificial)
                .map(|(_, r)| r[self.ncols])
                .sum();
            if infeas > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            self.evict_artificials();
        }

        // Phase 2.
        let mut cost = vec![0.0; self.ncols];
        for (v, &c) in lp.objective.iter().enumerate() {
            let (p, n) = self.var_cols[v];
            cost[p] += c;
            if let Some(n) = n {
                cost[n] -= c;
            }
        }
        if !self.optimize(&cost, false) {
            return LpOutcome::Unbounded;
        }

        let mut col_val = vec![0.0; self.ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            col_val[b] = self.rows[r][self.ncols];
        }
        let x: Vec<f64> = self
            .var_cols
            .iter()
            .map(|&(p, n)| col_val[p] - n.map_or(0.0, |n| col_val[n]))
            .collect();
        let objective = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
        LpOutcome::Optimal(LpSolution { x, objective })
    }

    /// Returns false when the objective is unbounded below.
    fn optimize(&mut self, cost: &[f64], allow_artificial: bool) -> bool {
        let m = self.rows.len();
        let mut degenerate_run = 0usize;
        let max_iters = 50_000 + 200 * (m + self.ncols);
        for _ in 0..max_iters {
            let reduced = self.reduced_costs(cost);
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let mut entering = None;
            let mut best = -COST_EPS;
            for (j, &rc) in reduced.iter().enumerate() {
                if !allow_artificial && self.kinds[j] == ColKind::Artificial {
                    continue;
                }
                if self.basis.contains(&j) {
                    continue;
                }
                if bland {
                    if rc < -COST_EPS {
                        entering = Some(j);
                        break;
                    }
                } else if rc < best {
                    best = rc;
                    entering = Some(j);
                }
            }
            let Some(col) = entering else {
                return true;
            };

            // Ratio test, ties broken by smallest basic index.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.rows[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.rows[r][self.ncols] / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return false;
            };
            if ratio.abs() < 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
        }
        // Iteration cap: treat the current vertex as final.
        true
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut reduced = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (rc, a) in reduced.iter_mut().zip(&self.rows[r][..self.ncols]) {
                    *rc -= cb * a;
                }
            }
        }
        reduced
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = other[col];
            if f != 0.0 {
                for (o, pv) in other.iter_mut().zip(&pivot_row) {
                    *o -= f * pv;
                }
                other[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// After phase 1, pivot zero-valued artificials out of the basis or drop
    /// their (redundant) rows.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.kinds[self.basis[r]] != ColKind::Artificial {
                r += 1;
                continue;
            }
            let candidate = (0..self.ncols).find(|&j| {
                self.kinds[j] != ColKind::Artificial
                    && !self.basis.contains(&j)
                    && self.rows[r][j].abs() > 1e-9
            });
            match candidate {
                Some(j) => {
                    self.pivot(r, j);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::minimize(vec![-3.0, -5.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0)
            .add(vec![0.0, 2.0], Relation::Le, 12.0)
            .add(vec![3.0, 2.0], Relation::Le, 18.0);
        let sol = lp.solve().optimal().unwrap();
        assert!(approx(sol.objective, -36.0));
        assert!(approx(sol.x[0], 2.0) && approx(sol.x[1], 6.0));
    }

    #[test]
    fn equality_and_free_variables() {
        // min |x| style: x free, x = -3, minimize t with t >= x, t >= -x
        let mut lp = LinearProgram::minimize(vec![0.0, 1.0]);
        lp.set_free(0);
        lp.add(vec![1.0, 0.0], Relation::Eq, -3.0)
            .add(vec![-1.0, 1.0], Relation::Ge, 0.0)
            .add(vec![1.0, 1.0], Relation::Ge, 0.0);
        let sol = lp.solve().optimal().unwrap();
        assert!(approx(sol.x[0], -3.0));
        assert!(approx(sol.objective, 3.0));
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::feasibility(1);
        lp.add(vec![1.0], Relation::Ge, 2.0)
            .add(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::minimize(vec![-1.0, 0.0]);
        lp.add(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 2.0)
            .add(vec![2.0, 2.0], Relation::Eq, 4.0);
        let sol = lp.solve().optimal().unwrap();
        assert!(approx(sol.objective, 2.0));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example: cycles under naive Dantzig without anti-cycling.
        let mut lp = LinearProgram::minimize(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .add(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .add(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = lp.solve().optimal().unwrap();
        assert!(approx(sol.objective, -0.05));
    }
}
