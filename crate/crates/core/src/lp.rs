//! Dense two-phase primal simplex for small equality-form programs.
//!
//! Solves `min cᵀx  s.t.  Ax = b, x ≥ 0`. Pivoting follows Bland's rule
//! (lowest-index entering column, lowest-index leaving basic variable on ratio
//! ties), so the optimal basis is a deterministic function of the input. The
//! artificial columns of phase one are kept in the tableau; at termination they
//! hold `B⁻¹`, from which the dual solution `yᵀ = c_Bᵀ B⁻¹` is read off.

use crate::error::{MssError, Result};

pub const LP_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per equality row, for the rows as given.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_structural: usize,
    iterations: usize,
}

impl Tableau {
    fn rhs_col(&self) -> usize {
        self.rows[0].len() - 1
    }

    fn reduced_cost(&self, costs: &[f64], col: usize) -> f64 {
        let mut r = costs[col];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            r -= costs[b] * row[col];
        }
        r
    }

    fn pivot(&mut self, prow: usize, pcol: usize) {
        let p = self.rows[prow][pcol];
        self.rows[prow].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[prow].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == prow {
                continue;
            }
            let f = row[pcol];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                row[pcol] = 0.0;
            }
        }
        self.basis[prow] = pcol;
        self.iterations += 1;
    }

    /// Runs simplex iterations over columns `< allowed`; returns Ok(()) at optimality.
    fn optimise(&mut self, costs: &[f64], allowed: usize) -> Result<()> {
        let rhs = self.rhs_col();
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(MssError::LpIterationLimit(MAX_ITERATIONS));
            }
            let entering = (0..allowed)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(costs, j) < -LP_TOL);
            let Some(col) = entering else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a <= LP_TOL {
                    continue;
                }
                let ratio = row[rhs] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((prow, _)) = leave else { return Err(MssError::LpUnbounded) };
            self.pivot(prow, col);
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution> {
        let m = self.constraints.len();
        let n = self.objective.len();
        if self.rhs.len() != m {
            return Err(MssError::DimensionMismatch { expected: m, actual: self.rhs.len() });
        }
        if let Some(bad) = self.constraints.iter().find(|r| r.len() != n) {
            return Err(MssError::DimensionMismatch { expected: n, actual: bad.len() });
        }

        // Rows with negative rhs are negated so the artificial basis starts feasible.
        let signs: Vec<f64> = self.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let width = n + m + 1;
        let rows = (0..m)
            .map(|i| {
                let mut row = vec![0.0; width];
                row[..n].iter_mut().zip(&self.constraints[i]).for_each(|(d, a)| *d = signs[i] * a);
                row[n + i] = 1.0;
                row[width - 1] = signs[i] * self.rhs[i];
                row
            })
            .collect();
        let mut t = Tableau { rows, basis: (n..n + m).collect(), n_structural: n, iterations: 0 };

        let mut phase1 = vec![0.0; n + m];
        phase1[n..].iter_mut().for_each(|c| *c = 1.0);
        t.optimise(&phase1, n)?;
        let rhs = t.rhs_col();
        let infeasibility: f64 = t.rows.iter().zip(&t.basis).filter(|(_, &b)| b >= n).map(|(r, _)| r[rhs]).sum();
        let scale = 1.0 + self.rhs.iter().map(|b| b.abs()).fold(0.0, f64::max);
        if infeasibility > LP_TOL * scale {
            return Err(MssError::LpInfeasible);
        }

        // Drive zero-level artificials out of the basis where a structural pivot exists.
        for i in 0..m {
            if t.basis[i] >= n {
                if let Some(j) = (0..n).find(|&j| !t.basis.contains(&j) && t.rows[i][j].abs() > LP_TOL) {
                    t.pivot(i, j);
                }
            }
        }

        let mut phase2 = self.objective.clone();
        phase2.extend(std::iter::repeat_n(0.0, m));
        t.optimise(&phase2, t.n_structural)?;

        let mut x = vec![0.0; n];
        for (row, &b) in t.rows.iter().zip(&t.basis) {
            if b < n {
                x[b] = row[rhs].max(0.0);
            }
        }
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        let duals = (0..m)
            .map(|k| {
                let y: f64 = t.rows.iter().zip(&t.basis).map(|(row, &b)| phase2[b] * row[n + k]).sum();
                signs[k] * y
            })
            .collect();
        Ok(LpSolution { x, objective, duals, iterations: t.iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: Vec<f64>, constraints: Vec<Vec<f64>>, rhs: Vec<f64>) -> LinearProgram {
        LinearProgram { objective, constraints, rhs }
    }

    #[test]
    fn textbook_problem_with_slacks() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  (2, 6), value 36.
        let p = lp(
            vec![-3.0, -5.0, 0.0, 0.0, 0.0],
            vec![
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0, 1.0, 0.0],
                vec![3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            vec![4.0, 12.0, 18.0],
        );
        let s = p.solve().unwrap();
        assert!((s.objective + 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        // Shadow prices of the three resources are 0, 3/2, 1 (negated for a min problem).
        let expected = [0.0, -1.5, -1.0];
        s.duals.iter().zip(expected).for_each(|(d, e)| assert!((d - e).abs() < 1e-12));
        let dual_value: f64 = s.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
        assert!((dual_value - s.objective).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows_and_dual_sign() {
        // min x + y s.t. -x - y = -2  →  value 2, dual -1 on the row as given.
        let s = lp(vec![1.0, 1.0], vec![vec![-1.0, -1.0]], vec![-2.0]).solve().unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!((s.duals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = lp(vec![1.0], vec![vec![1.0], vec![1.0]], vec![1.0, 2.0]);
        assert!(matches!(infeasible.solve(), Err(MssError::LpInfeasible)));
        let unbounded = lp(vec![-1.0, 0.0], vec![vec![1.0, -1.0]], vec![0.0]);
        assert!(matches!(unbounded.solve(), Err(MssError::LpUnbounded)));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let s = lp(vec![1.0, 2.0], vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, 2.0]).solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example; Bland's rule must terminate at value -1/20.
        let p = lp(
            vec![-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0],
            vec![
                vec![0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                vec![0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            vec![0.0, 0.0, 1.0],
        );
        let s = p.solve().unwrap();
        assert!((s.objective + 0.05).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        assert!(lp(vec![1.0, 1.0], vec![vec![1.0]], vec![1.0]).solve().is_err());
        assert!(lp(vec![1.0], vec![vec![1.0]], vec![]).solve().is_err());
    }
}
