//! Exact rational linear algebra on small dense matrices.
//!
//! Sizes stay tiny (rank at most four for root-system data, a few hundred
//! rows for intertwiner stages), so there is no pivoting heuristic beyond
//! correctness: first nonzero pivot, exact arithmetic throughout.

use num_traits::{One, Zero};

use crate::error::{EngineError, Result};
use crate::rat::Q;

pub type QMat = Vec<Vec<Q>>;
pub type QVec = Vec<Q>;

pub fn qvec_zero(n: usize) -> QVec {
    vec![Q::zero(); n]
}

pub fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> QVec {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .fold(Q::zero(), |acc, t| acc + t)
        })
        .collect()
}

pub fn imat_vec_i64(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn imat_vec_q(m: &[Vec<i64>], v: &[Q]) -> QVec {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .map(|(a, b)| Q::from_integer((*a).into()) * b)
                .fold(Q::zero(), |acc, t| acc + t)
        })
        .collect()
}

pub fn imat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let p = b[0].len();
    let mut out = vec![vec![0i64; p]; n];
    for i in 0..n {
        for (l, &ail) in a[i].iter().enumerate() {
            if ail == 0 {
                continue;
            }
            for j in 0..p {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn imat_identity(n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .fold(Q::zero(), |acc, t| acc + t)
}

/// Exact inverse of a square rational matrix; errors on singularity.
pub fn invert(m: &[Vec<Q>]) -> Result<QMat> {
    let n = m.len();
    let mut aug: Vec<QVec> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or_else(|| EngineError::Internal("singular matrix".into()))?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for x in aug[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..2 * n {
                    let delta = &f * &aug[col][c];
                    aug[r][c] = &aug[r][c] - delta;
                }
            }
        }
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Solve the (possibly overdetermined) exact system `a * x = rhs` for every
/// right-hand side simultaneously.  Requires full column rank and exact
/// consistency of every system; anything else is an error for the caller to
/// classify.
pub fn solve_exact(a: &[Vec<Q>], rhs: &[QVec]) -> Result<Vec<QVec>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let nrhs = rhs.len();
    for r in rhs {
        if r.len() != rows {
            return Err(EngineError::Internal("rhs length mismatch".into()));
        }
    }
    // Augmented working copy: coefficients then all right-hand sides.
    let mut work: Vec<QVec> = (0..rows)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|r| r[i].clone()));
            row
        })
        .collect();

    let width = cols + nrhs;
    let mut pivot_rows: Vec<usize> = Vec::with_capacity(cols);
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !work[r][col].is_zero()) else {
            continue;
        };
        work.swap(rank, pr);
        let p = work[rank][col].clone();
        for x in work[rank][col..].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..rows {
            if r != rank && !work[r][col].is_zero() {
                let f = work[r][col].clone();
                for c in col..width {
                    let delta = &f * &work[rank][c];
                    work[r][c] = &work[r][c] - delta;
                }
            }
        }
        pivot_rows.push(col);
        rank += 1;
    }
    if rank < cols {
        return Err(EngineError::Internal(format!(
            "rank deficient system: rank {rank} < {cols} unknowns"
        )));
    }
    // Rows beyond the rank must have vanished entirely or the system is
    // inconsistent.
    for row in work.iter().skip(rank) {
        if row[cols..].iter().any(|x| !x.is_zero()) {
            return Err(EngineError::Internal(
                "inconsistent overdetermined system".into(),
            ));
        }
    }
    let mut solutions = Vec::with_capacity(nrhs);
    for j in 0..nrhs {
        let mut x = qvec_zero(cols);
        for (r, &col) in pivot_rows.iter().enumerate() {
            x[col] = work[r][cols + j].clone();
        }
        solutions.push(x);
    }
    Ok(solutions)
}

/// Exact feasibility of `{ t >= 0 : columns * t = target }` via a phase-one
/// simplex with Bland's rule (termination is guaranteed, no tolerances).
pub fn nonneg_combination_exists(columns: &[QVec], target: &[Q]) -> bool {
    let m = target.len();
    let n = columns.len();
    for c in columns {
        assert_eq!(c.len(), m, "column dimension mismatch");
    }
    // Tableau rows: [original columns | artificial identity | b], b >= 0.
    let mut tab: Vec<QVec> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = target[i] < Q::zero();
        let mut row: QVec = Vec::with_capacity(n + m + 1);
        for col in columns {
            row.push(if flip { -col[i].clone() } else { col[i].clone() });
        }
        for j in 0..m {
            row.push(if i == j { Q::one() } else { Q::zero() });
        }
        row.push(if flip {
            -target[i].clone()
        } else {
            target[i].clone()
        });
        tab.push(row);
    }
    let total = n + m;
    let mut basis: Vec<usize> = (n..total).collect();

    loop {
        // Reduced cost of column j for the phase-one objective (sum of
        // artificials): c_j - sum over rows with artificial basic variable.
        let mut entering = None;
        for j in 0..total {
            if basis.contains(&j) {
                continue;
            }
            let cj = if j >= n { Q::one() } else { Q::zero() };
            let mut zj = Q::zero();
            for (i, &bi) in basis.iter().enumerate() {
                if bi >= n {
                    zj += tab[i][j].clone();
                }
            }
            if cj - zj < Q::zero() {
                entering = Some(j);
                break; // Bland: smallest index
            }
        }
        let Some(e) = entering else { break };
        // Ratio test; Bland tie-break on smallest basic variable index.
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if tab[i][e] > Q::zero() {
                let ratio = &tab[i][total] / &tab[i][e];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && basis[i] < basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((li, _)) = leave else {
            // Unbounded phase-one objective cannot happen (bounded below by 0),
            // but bail out safely.
            return false;
        };
        // Pivot on (li, e).
        let p = tab[li][e].clone();
        for x in tab[li].iter_mut() {
            *x = &*x / &p;
        }
        for i in 0..m {
            if i != li && !tab[i][e].is_zero() {
                let f = tab[i][e].clone();
                for c in 0..=total {
                    let delta = &f * &tab[li][c];
                    tab[i][c] = &tab[i][c] - delta;
                }
            }
        }
        basis[li] = e;
    }

    let mut objective = Q::zero();
    for (i, &bi) in basis.iter().enumerate() {
        if bi >= n {
            objective += tab[i][total].clone();
        }
    }
    objective.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{qi, qr};

    #[test]
    fn inverse_2x2() {
        let m = vec![vec![qi(2), qi(-1)], vec![qi(-1), qi(2)]];
        let inv = invert(&m).unwrap();
        assert_eq!(inv[0], vec![qr(2, 3), qr(1, 3)]);
        assert_eq!(inv[1], vec![qr(1, 3), qr(2, 3)]);
    }

    #[test]
    fn overdetermined_consistent_solve() {
        // x = 2, y = -1 seen through three consistent equations.
        let a = vec![
            vec![qi(1), qi(0)],
            vec![qi(0), qi(1)],
            vec![qi(1), qi(1)],
        ];
        let sol = solve_exact(&a, &[vec![qi(2), qi(-1), qi(1)]]).unwrap();
        assert_eq!(sol[0], vec![qi(2), qi(-1)]);
        assert!(solve_exact(&a, &[vec![qi(2), qi(-1), qi(5)]]).is_err());
    }

    #[test]
    fn rank_deficiency_detected() {
        let a = vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]];
        assert!(solve_exact(&a, &[vec![qi(1), qi(2)]]).is_err());
    }

    #[test]
    fn simplex_feasibility() {
        // target on the segment between (0,1) and (2,0), plus convexity row.
        let cols = vec![
            vec![qi(0), qi(1), qi(1)],
            vec![qi(2), qi(0), qi(1)],
        ];
        assert!(nonneg_combination_exists(&cols, &[qi(1), qr(1, 2), qi(1)]));
        assert!(!nonneg_combination_exists(&cols, &[qi(2), qi(1), qi(1)]));
        // outside the segment but in the cone: fails the convexity row.
        assert!(!nonneg_combination_exists(&cols, &[qi(4), qi(0), qi(1)]));
    }
}
