//! Exact linear systems over the rationals.
//!
//! Elimination is fraction-free (Bareiss) over integers after clearing each
//! equation's denominators; the pivot is the first row with a nonzero entry
//! in the current column, so runs are reproducible. Back substitution
//! recovers a particular solution (free variables at zero) and a basis of
//! the null space.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rat;

use super::SolverError;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquation {
    /// One coefficient per unknown.
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
    /// Provenance tag: which constraint edge or rule produced the equation.
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub unknowns: Vec<String>,
    pub equations: Vec<LinearEquation>,
}

impl LinearSystem {
    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }
}

/// Result of the exact rank computation.
#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub num_unknowns: usize,
    /// Dimension of the affine solution space (the gauge directions).
    pub solution_dim: usize,
    /// One solution, with every free variable set to zero.
    pub particular: Vec<Rat>,
    /// Basis of the homogeneous solution space, one vector per free variable.
    pub nullspace: Vec<Vec<Rat>>,
}

impl RankReport {
    pub fn unique(&self) -> bool {
        self.solution_dim == 0
    }
}

/// Exact rank analysis; errors with [`SolverError::Inconsistent`] when the
/// system has no solution.
pub fn uniqueness_analysis(sys: &LinearSystem) -> Result<RankReport, SolverError> {
    let n = sys.num_unknowns();
    for eq in &sys.equations {
        if eq.coeffs.len() != n {
            return Err(SolverError::MalformedSystem(format!(
                "equation {:?} has {} coefficients for {} unknowns",
                eq.label,
                eq.coeffs.len(),
                n
            )));
        }
    }

    // clear denominators row by row
    let mut rows: Vec<Vec<BigInt>> = sys
        .equations
        .iter()
        .map(|eq| {
            let mut lcm = eq.rhs.denom().clone();
            for c in &eq.coeffs {
                lcm = lcm.lcm(c.denom());
            }
            let scale = Rat::from_integer(lcm);
            let mut row: Vec<BigInt> = eq
                .coeffs
                .iter()
                .map(|c| (c * &scale).to_integer())
                .collect();
            row.push((&eq.rhs * &scale).to_integer());
            row
        })
        .collect();

    let m = rows.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    let mut prev_pivot = BigInt::one();
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(pivot_row) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let pivot = rows[rank][col].clone();
        for r in (rank + 1)..m {
            let factor = rows[r][col].clone();
            for j in col..=n {
                let numer = &rows[r][j] * &pivot - &factor * &rows[rank][j];
                debug_assert!((&numer % &prev_pivot).is_zero(), "Bareiss division not exact");
                rows[r][j] = numer / &prev_pivot;
            }
            rows[r][col] = BigInt::zero();
        }
        prev_pivot = pivot;
        pivot_cols.push(col);
        rank += 1;
    }

    // every sub-rank row is zero in all coefficient columns
    for row in rows.iter().skip(rank) {
        if !row[n].is_zero() {
            return Err(SolverError::Inconsistent);
        }
    }

    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();

    let back_substitute = |free_assignment: &dyn Fn(usize) -> Rat, homogeneous: bool| {
        let mut x = vec![Rat::zero(); n];
        for &f in &free_cols {
            x[f] = free_assignment(f);
        }
        for r in (0..rank).rev() {
            let col = pivot_cols[r];
            let mut acc = if homogeneous {
                Rat::zero()
            } else {
                Rat::from_integer(rows[r][n].clone())
            };
            for j in (col + 1)..n {
                if !rows[r][j].is_zero() {
                    acc -= Rat::from_integer(rows[r][j].clone()) * &x[j];
                }
            }
            x[col] = acc / Rat::from_integer(rows[r][col].clone());
        }
        x
    };

    let particular = back_substitute(&|_| Rat::zero(), false);
    let nullspace: Vec<Vec<Rat>> = free_cols
        .iter()
        .map(|&f| back_substitute(&|c| if c == f { Rat::one() } else { Rat::zero() }, true))
        .collect();

    Ok(RankReport {
        rank,
        num_unknowns: n,
        solution_dim: n - rank,
        particular,
        nullspace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn eq(coeffs: Vec<Rat>, rhs: Rat, label: &str) -> LinearEquation {
        LinearEquation {
            coeffs,
            rhs,
            label: label.into(),
        }
    }

    #[test]
    fn two_by_two_unique() {
        // w0 − w1 = 0, w0 + w1 = 1
        let sys = LinearSystem {
            unknowns: vec!["w0".into(), "w1".into()],
            equations: vec![
                eq(vec![rat_int(1), rat_int(-1)], rat_int(0), "transposition"),
                eq(vec![rat_int(1), rat_int(1)], rat_int(1), "normalization"),
            ],
        };
        let report = uniqueness_analysis(&sys).unwrap();
        assert_eq!(report.rank, 2);
        assert!(report.unique());
        assert_eq!(report.particular, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn group_sum_system_has_one_gauge_direction() {
        // w0 + w1 = 2/3, w2 = 1/3 over three unknowns
        let sys = LinearSystem {
            unknowns: vec!["w0".into(), "w1".into(), "w2".into()],
            equations: vec![
                eq(vec![rat_int(1), rat_int(1), rat_int(0)], rat(2, 3), "group 1"),
                eq(vec![rat_int(0), rat_int(0), rat_int(1)], rat(1, 3), "group 2"),
            ],
        };
        let report = uniqueness_analysis(&sys).unwrap();
        assert_eq!(report.rank, 2);
        assert_eq!(report.solution_dim, 1);
        assert_eq!(report.particular, vec![rat(2, 3), rat_int(0), rat(1, 3)]);
        assert_eq!(report.nullspace, vec![vec![rat_int(-1), rat_int(1), rat_int(0)]]);
    }

    #[test]
    fn empty_system_is_fully_free() {
        let sys = LinearSystem {
            unknowns: vec!["w0".into(), "w1".into()],
            equations: vec![],
        };
        let report = uniqueness_analysis(&sys).unwrap();
        assert_eq!(report.rank, 0);
        assert_eq!(report.solution_dim, 2);
        assert_eq!(report.nullspace.len(), 2);
    }

    #[test]
    fn inconsistent_system_detected() {
        let sys = LinearSystem {
            unknowns: vec!["w0".into()],
            equations: vec![
                eq(vec![rat_int(1)], rat_int(0), "a"),
                eq(vec![rat_int(1)], rat_int(1), "b"),
            ],
        };
        assert!(matches!(
            uniqueness_analysis(&sys),
            Err(SolverError::Inconsistent)
        ));
    }

    #[test]
    fn fractional_coefficients_are_cleared_exactly() {
        // (1/2)x + (1/3)y = 5/6 ; x − y = 0  ⇒ x = y = 1
        let sys = LinearSystem {
            unknowns: vec!["x".into(), "y".into()],
            equations: vec![
                eq(vec![rat(1, 2), rat(1, 3)], rat(5, 6), "a"),
                eq(vec![rat_int(1), rat_int(-1)], rat_int(0), "b"),
            ],
        };
        let report = uniqueness_analysis(&sys).unwrap();
        assert_eq!(report.particular, vec![rat_int(1), rat_int(1)]);
    }

    #[test]
    fn redundant_equations_do_not_raise_rank() {
        let sys = LinearSystem {
            unknowns: vec!["x".into(), "y".into()],
            equations: vec![
                eq(vec![rat_int(1), rat_int(1)], rat_int(1), "a"),
                eq(vec![rat_int(2), rat_int(2)], rat_int(2), "a scaled"),
            ],
        };
        let report = uniqueness_analysis(&sys).unwrap();
        assert_eq!(report.rank, 1);
        assert_eq!(report.solution_dim, 1);
    }
}
