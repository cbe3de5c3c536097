//! Exact feasibility for `A z = b, z ≥ 0`.
//!
//! Phase-1 simplex on `min Σ artificials` over a dense rational tableau, with
//! Bland's least-index rule for both entering and leaving variables. When the
//! artificial optimum is positive, the optimal phase-1 duals give a Farkas
//! certificate `u` with `uᵀA ≥ 0` and `uᵀb < 0`.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    matrix: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

impl LpProblem {
    pub fn new(matrix: Vec<Vec<Rational>>, rhs: Vec<Rational>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::ShapeMismatch("constraint matrix has no rows".into()));
        }
        if matrix.len() != rhs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} constraint rows but {} right-hand sides",
                matrix.len(),
                rhs.len()
            )));
        }
        let cols = matrix[0].len();
        if cols == 0 {
            return Err(Error::ShapeMismatch("constraint matrix has no columns".into()));
        }
        if let Some(k) = matrix.iter().position(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch(format!(
                "row {k} has {} entries, expected {cols}",
                matrix[k].len()
            )));
        }
        Ok(LpProblem { matrix, rhs })
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    /// `A·z`.
    pub fn apply(&self, z: &[Rational]) -> Vec<Rational> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(z).fold(Rational::zero(), |acc, (a, x)| acc + a * x))
            .collect()
    }

    /// `uᵀA`.
    pub fn apply_transpose(&self, u: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.cols()];
        for (row, ui) in self.matrix.iter().zip(u) {
            if ui.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o += a * ui;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    /// `z ≥ 0` with `A z = b`.
    Feasible(Vec<Rational>),
    /// `u` with `uᵀA ≥ 0` and `uᵀb < 0`.
    Infeasible(Vec<Rational>),
}

/// Re-checks an outcome against the problem from scratch.
pub fn verify_outcome(p: &LpProblem, outcome: &LpOutcome) -> Result<bool> {
    match outcome {
        LpOutcome::Feasible(z) => {
            if z.len() != p.cols() {
                return Err(Error::ShapeMismatch(format!(
                    "point has {} entries, problem has {} variables",
                    z.len(),
                    p.cols()
                )));
            }
            Ok(z.iter().all(|x| !x.is_negative()) && p.apply(z) == p.rhs)
        }
        LpOutcome::Infeasible(u) => {
            if u.len() != p.rows() {
                return Err(Error::ShapeMismatch(format!(
                    "certificate has {} entries, problem has {} rows",
                    u.len(),
                    p.rows()
                )));
            }
            let dual_rhs = u.iter().zip(&p.rhs).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
            Ok(dual_rhs.is_negative() && p.apply_transpose(u).iter().all(|x| !x.is_negative()))
        }
    }
}

struct Tableau {
    /// `m` constraint rows followed by the reduced-cost row; last column is the rhs.
    cells: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.cells[row][col].recip();
        for v in self.cells[row].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.cells[row]);
        let support: Vec<usize> = (0..self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (r, cells) in self.cells.iter_mut().enumerate() {
            if r == row || cells[col].is_zero() {
                continue;
            }
            let factor = cells[col].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                cells[j] -= delta;
            }
        }
        self.cells[row] = pivot_row;
        self.basis[row] = col;
    }
}

/// Solves the feasibility problem exactly; the returned outcome always passes
/// [`verify_outcome`].
pub fn solve_feasibility(p: &LpProblem) -> LpOutcome {
    let m = p.rows();
    let n = p.cols();
    let width = n + m + 1;
    let rhs_col = n + m;

    // Flip rows so that b ≥ 0, then append one artificial per row.
    let signs: Vec<bool> = p.rhs.iter().map(|b| b.is_negative()).collect();
    let mut cells = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![Rational::zero(); width];
        for (cell, a) in row.iter_mut().zip(&p.matrix[i]) {
            *cell = if signs[i] { -a } else { a.clone() };
        }
        row[n + i] = Rational::one();
        row[rhs_col] = p.rhs[i].abs();
        cells.push(row);
    }
    // Reduced costs for c = (0, 1): r_j = -Σ_i row_i[j] on original columns.
    let mut objective = vec![Rational::zero(); width];
    for row in &cells {
        for j in 0..n {
            objective[j] -= &row[j];
        }
        objective[rhs_col] -= &row[rhs_col];
    }
    cells.push(objective);

    let mut tab = Tableau {
        cells,
        basis: (n..n + m).collect(),
        width,
    };

    loop {
        let entering = (0..n + m).find(|&j| tab.cells[m][j].is_negative());
        let Some(col) = entering else { break };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            let a = &tab.cells[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = &tab.cells[i][rhs_col] / a;
            leave = match leave {
                None => Some((i, ratio)),
                Some((best, best_ratio)) => {
                    if ratio < best_ratio || (ratio == best_ratio && tab.basis[i] < tab.basis[best]) {
                        Some((i, ratio))
                    } else {
                        Some((best, best_ratio))
                    }
                }
            };
        }
        // Phase 1 is bounded below by zero, so a negative reduced cost always has a blocking row.
        let (row, _) = leave.expect("phase-1 objective is bounded");
        tab.pivot(row, col);
    }

    let optimum = -&tab.cells[m][rhs_col];
    if optimum.is_zero() {
        let mut z = vec![Rational::zero(); n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                z[b] = tab.cells[i][rhs_col].clone();
            }
        }
        LpOutcome::Feasible(z)
    } else {
        // Dual y_i = c_{a_i} − r_{a_i} = 1 − r_{n+i}; undo the row flips and negate.
        let u = (0..m)
            .map(|i| {
                let y = Rational::one() - &tab.cells[m][n + i];
                if signs[i] {
                    y
                } else {
                    -y
                }
            })
            .collect();
        LpOutcome::Infeasible(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn problem(rows: &[&[i64]], rhs: &[i64]) -> LpProblem {
        LpProblem::new(
            rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
            rhs.iter().map(|&v| int(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_variable() {
        let p = problem(&[&[1]], &[1]);
        assert_eq!(solve_feasibility(&p), LpOutcome::Feasible(vec![int(1)]));
        let p = problem(&[&[1]], &[-1]);
        let out = solve_feasibility(&p);
        assert_eq!(out, LpOutcome::Infeasible(vec![int(1)]));
        assert!(verify_outcome(&p, &out).unwrap());
    }

    #[test]
    fn two_by_two() {
        let p = problem(&[&[1, 1], &[1, -1]], &[2, 0]);
        assert_eq!(solve_feasibility(&p), LpOutcome::Feasible(vec![int(1), int(1)]));
    }

    #[test]
    fn redundant_rows() {
        let p = problem(&[&[1, 1, 0], &[1, 1, 0], &[2, 2, 0], &[0, 1, 1]], &[1, 1, 2, 1]);
        let out = solve_feasibility(&p);
        assert!(matches!(out, LpOutcome::Feasible(_)));
        assert!(verify_outcome(&p, &out).unwrap());
    }

    #[test]
    fn inconsistent_rows() {
        let p = problem(&[&[1, 1], &[1, 1]], &[1, 2]);
        let out = solve_feasibility(&p);
        assert!(matches!(out, LpOutcome::Infeasible(_)));
        assert!(verify_outcome(&p, &out).unwrap());
    }

    #[test]
    fn verifier_rejects_bad_outcomes() {
        let p = problem(&[&[1, 1]], &[1]);
        assert!(verify_outcome(&p, &LpOutcome::Feasible(vec![ratio(1, 2), ratio(1, 2)])).unwrap());
        assert!(!verify_outcome(&p, &LpOutcome::Feasible(vec![int(2), int(-1)])).unwrap());
        let p = problem(&[&[1]], &[0]);
        assert!(!verify_outcome(&p, &LpOutcome::Infeasible(vec![int(1)])).unwrap());
        assert!(verify_outcome(&p, &LpOutcome::Feasible(vec![int(0), int(0)])).is_err());
        assert!(verify_outcome(&p, &LpOutcome::Infeasible(vec![])).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(LpProblem::new(vec![], vec![]).is_err());
        assert!(LpProblem::new(vec![vec![int(1)]], vec![int(1), int(2)]).is_err());
        assert!(LpProblem::new(vec![vec![int(1)], vec![int(1), int(2)]], vec![int(1), int(2)]).is_err());
        assert!(LpProblem::new(vec![vec![]], vec![int(1)]).is_err());
    }
}
