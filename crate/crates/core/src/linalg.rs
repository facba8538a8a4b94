//! Gaussian elimination over any [`Scalar`], dense and sparse.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use num_traits::{One, Signed, Zero};

use crate::num::{Rat, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is singular (no pivot in column {column})")]
    Singular { column: usize },
    #[error("dimension mismatch: {rows}x{cols} system with rhs of length {rhs}")]
    Dimension { rows: usize, cols: usize, rhs: usize },
}

/// Sparse square matrix stored by rows.
pub type SparseRows<S> = Vec<BTreeMap<usize, S>>;

/// Solve `a x = b` for a dense square `a`.
pub fn solve<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>) -> Result<Vec<S>, LinalgError> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(LinalgError::Dimension {
            rows: n,
            cols: a.first().map_or(0, Vec::len),
            rhs: b.len(),
        });
    }
    let rows = a
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .filter(|(_, v)| !v.is_negligible())
                .collect()
        })
        .collect();
    solve_sparse(rows, b)
}

/// Solve `a x = b` for a sparse square `a`.
///
/// Columns are eliminated in order. The pivot row is the shortest candidate
/// row; floats restrict candidates to entries within a factor 10 of the
/// largest magnitude in the column (threshold pivoting).
pub fn solve_sparse<S: Scalar>(
    mut rows: SparseRows<S>,
    mut b: Vec<S>,
) -> Result<Vec<S>, LinalgError> {
    let n = rows.len();
    if b.len() != n || rows.iter().any(|r| r.keys().any(|&j| j >= n)) {
        return Err(LinalgError::Dimension {
            rows: n,
            cols: n,
            rhs: b.len(),
        });
    }
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for &j in row.keys() {
            col_rows[j].insert(i);
        }
    }
    let mut pivot_of = vec![usize::MAX; n];

    for col in 0..n {
        let candidates: Vec<usize> = col_rows[col].iter().copied().collect();
        if candidates.iter().all(|&r| rows[r][&col].is_negligible()) {
            return Err(LinalgError::Singular { column: col });
        }
        let best_score = candidates
            .iter()
            .map(|&r| rows[r][&col].pivot_score())
            .fold(0.0, f64::max);
        let threshold = if S::EXACT { 0.0 } else { 0.1 * best_score };
        let p = candidates
            .iter()
            .copied()
            .filter(|&r| !rows[r][&col].is_negligible() && rows[r][&col].pivot_score() >= threshold)
            .min_by(|&r1, &r2| {
                rows[r1].len().cmp(&rows[r2].len()).then_with(|| {
                    rows[r2][&col]
                        .pivot_score()
                        .partial_cmp(&rows[r1][&col].pivot_score())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            })
            .ok_or(LinalgError::Singular { column: col })?;
        pivot_of[col] = p;

        let mut pivot_row = std::mem::take(&mut rows[p]);
        for &j in pivot_row.keys() {
            col_rows[j].remove(&p);
        }
        let inv = S::one().div_ref(&pivot_row[&col]);
        for v in pivot_row.values_mut() {
            *v = v.mul_ref(&inv);
        }
        b[p] = b[p].mul_ref(&inv);

        for &r in &candidates {
            if r == p {
                continue;
            }
            let factor = rows[r].remove(&col).expect("column index out of sync");
            col_rows[col].remove(&r);
            for (&j, v) in pivot_row.iter() {
                if j == col {
                    continue;
                }
                let delta = factor.mul_ref(v);
                let entry = rows[r].entry(j).or_insert_with(S::zero);
                *entry = entry.sub_ref(&delta);
                if entry.is_negligible() {
                    rows[r].remove(&j);
                    col_rows[j].remove(&r);
                } else {
                    col_rows[j].insert(r);
                }
            }
            let shift = factor.mul_ref(&b[p]);
            b[r] = b[r].sub_ref(&shift);
        }
        rows[p] = pivot_row;
    }

    let mut x = vec![S::zero(); n];
    for col in (0..n).rev() {
        let p = pivot_of[col];
        let mut acc = b[p].clone();
        for (&j, v) in rows[p].range(col + 1..) {
            acc = acc.sub_ref(&v.mul_ref(&x[j]));
        }
        x[col] = acc;
    }
    Ok(x)
}

/// Maximum absolute entry of `a x - b`.
pub fn residual<S: Scalar>(a: &[Vec<S>], x: &[S], b: &[S]) -> S {
    let mut worst = S::zero();
    for (row, rhs) in a.iter().zip(b) {
        let mut acc = S::zero();
        for (aij, xj) in row.iter().zip(x) {
            if !aij.is_negligible() {
                acc = acc.add_ref(&aij.mul_ref(xj));
            }
        }
        let err = Scalar::abs(&acc.sub_ref(rhs));
        if err > worst {
            worst = err;
        }
    }
    worst
}

/// Maximum absolute entry of `a x - b` for a sparse `a`.
pub fn residual_sparse<S: Scalar>(a: &SparseRows<S>, x: &[S], b: &[S]) -> S {
    let mut worst = S::zero();
    for (row, rhs) in a.iter().zip(b) {
        let mut acc = S::zero();
        for (&j, v) in row {
            acc = acc.add_ref(&v.mul_ref(&x[j]));
        }
        let err = Scalar::abs(&acc.sub_ref(rhs));
        if err > worst {
            worst = err;
        }
    }
    worst
}

/// A nonnegative solution of `a x = b` (exact), found by phase-I simplex
/// with Bland's rule, or `None` when the system has no such solution.
pub fn nonnegative_solution(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    // Tableau columns: original variables, then one artificial per row, then rhs.
    let width = cols + rows + 1;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(rows + 1);
    for (i, row) in a.iter().enumerate() {
        let flip = b[i].is_negative();
        let mut line = vec![Rat::zero(); width];
        for (j, v) in row.iter().enumerate() {
            line[j] = if flip { -v.clone() } else { v.clone() };
        }
        line[cols + i] = Rat::one();
        line[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(line);
    }
    // Objective row: minimize the sum of artificials, expressed in the
    // nonbasic variables (reduced costs).
    let mut obj = vec![Rat::zero(); width];
    for line in &t {
        for j in 0..cols {
            obj[j] -= &line[j];
        }
        obj[width - 1] -= &line[width - 1];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    loop {
        let obj = &t[rows];
        let Some(enter) = (0..cols + rows).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pivot, _)) = leave else {
            // Unbounded direction cannot occur for a phase-I objective
            // bounded below by zero.
            break;
        };
        let inv = Rat::one() / &t[pivot][enter];
        for v in t[pivot].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = t[pivot].clone();
        for (i, line) in t.iter_mut().enumerate() {
            if i == pivot || line[enter].is_zero() {
                continue;
            }
            let factor = line[enter].clone();
            for (v, p) in line.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        basis[pivot] = enter;
    }

    if !t[rows][width - 1].is_zero() {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (i, &var) in basis.iter().enumerate() {
        if var < cols {
            x[var] = t[i][width - 1].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, ratio, Rat};
    use proptest::prelude::*;

    #[test]
    fn stored_zero_is_not_a_pivot() {
        // Row 0 keeps an explicit zero on the diagonal.
        let rows: SparseRows<Rat> = vec![
            BTreeMap::from([(0, rat(0)), (1, rat(1))]),
            BTreeMap::from([(0, rat(1))]),
        ];
        let x = solve_sparse(rows, vec![rat(2), rat(3)]).unwrap();
        assert_eq!(x, vec![rat(3), rat(2)]);
        let singular: SparseRows<Rat> = vec![BTreeMap::from([(0, rat(0))]), BTreeMap::from([(1, rat(1))])];
        assert!(matches!(
            solve_sparse(singular, vec![rat(1), rat(1)]),
            Err(LinalgError::Singular { column: 0 })
        ));
    }

    #[test]
    fn solves_small_rational_system() {
        // 2x + y = 3, x + 3y = 5  ->  x = 4/5, y = 7/5
        let a = vec![vec![rat(2), rat(1)], vec![rat(1), rat(3)]];
        let b = vec![rat(3), rat(5)];
        let x = solve(a.clone(), b.clone()).unwrap();
        assert_eq!(x, vec![ratio(4, 5), ratio(7, 5)]);
        assert_eq!(residual(&a, &x, &b), rat(0));
    }

    #[test]
    fn needs_row_swap() {
        let a = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
        let x = solve(a, vec![rat(7), rat(9)]).unwrap();
        assert_eq!(x, vec![rat(9), rat(7)]);
    }

    #[test]
    fn detects_singular() {
        let a = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        let err = solve::<Rat>(a, vec![rat(1), rat(2)]).unwrap_err();
        assert_eq!(err, LinalgError::Singular { column: 1 });
    }

    #[test]
    fn float_solve_matches() {
        let a = vec![vec![1e-12, 1.0], vec![1.0, 1.0]];
        let x = solve(a.clone(), vec![1.0, 2.0]).unwrap();
        assert!(residual(&a, &x, &[1.0, 2.0]) < 1e-12);
    }

    #[test]
    fn tridiagonal_sparse() {
        let n = 50;
        let mut rows: SparseRows<Rat> = vec![BTreeMap::new(); n];
        for (i, row) in rows.iter_mut().enumerate() {
            row.insert(i, rat(3));
            if i > 0 {
                row.insert(i - 1, rat(-1));
            }
            if i + 1 < n {
                row.insert(i + 1, rat(-1));
            }
        }
        let b: Vec<Rat> = (0..n as i64).map(rat).collect();
        let x = solve_sparse(rows.clone(), b.clone()).unwrap();
        assert_eq!(residual_sparse(&rows, &x, &b), rat(0));
    }

    fn det(m: &[Vec<i64>]) -> i64 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * det(&minor)
            })
            .sum()
    }

    #[test]
    fn nonnegative_solution_basic() {
        // x + y = 2, x - y = 0 -> (1, 1)
        let a = vec![vec![rat(1), rat(1)], vec![rat(1), rat(-1)]];
        let x = nonnegative_solution(&a, &[rat(2), rat(0)]).unwrap();
        assert_eq!(x, vec![rat(1), rat(1)]);
        // x - y = 1, y - x = 1 has no solution at all.
        let a = vec![vec![rat(1), rat(-1)], vec![rat(-1), rat(1)]];
        assert!(nonnegative_solution(&a, &[rat(1), rat(1)]).is_none());
        // x + y = -1 has no nonnegative solution.
        assert!(nonnegative_solution(&[vec![rat(1), rat(1)]], &[rat(-1)]).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn nonnegative_solution_is_valid(
            entries in prop::collection::vec(-3i64..=3, 12),
            rhs in prop::collection::vec(-3i64..=3, 3),
        ) {
            let a: Vec<Vec<Rat>> = entries.chunks(4).map(|c| c.iter().map(|&v| rat(v)).collect()).collect();
            let b: Vec<Rat> = rhs.iter().map(|&v| rat(v)).collect();
            if let Some(x) = nonnegative_solution(&a, &b) {
                prop_assert!(x.iter().all(|v| !v.is_negative()));
                prop_assert_eq!(residual(&a, &x, &b), rat(0));
            } else {
                // No solution with entries in {0, 1/2, 1, 3/2} either.
                let grid: Vec<Rat> = (0..=3).map(|k| ratio(k, 2)).collect();
                for i0 in &grid { for i1 in &grid { for i2 in &grid { for i3 in &grid {
                    let x = vec![i0.clone(), i1.clone(), i2.clone(), i3.clone()];
                    prop_assert!(residual(&a, &x, &b) != rat(0));
                }}}}
            }
        }

        #[test]
        fn random_rational_systems(
            entries in prop::collection::vec(-5i64..=5, 16),
            rhs in prop::collection::vec(-5i64..=5, 4),
        ) {
            let ints: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let a: Vec<Vec<Rat>> = ints.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect();
            let b: Vec<Rat> = rhs.iter().map(|&v| rat(v)).collect();
            match solve(a.clone(), b.clone()) {
                Ok(x) => prop_assert_eq!(residual(&a, &x, &b), rat(0)),
                Err(LinalgError::Singular { .. }) => prop_assert_eq!(det(&ints), 0),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
