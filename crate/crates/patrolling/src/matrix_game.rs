//! Zero-sum matrix game solver: dense simplex on the packing transform of
//! the minimax linear program. f64 arithmetic with a small tolerance; the
//! duality gap is checked by the caller against explicit best responses.

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

/// Solution of a zero-sum game where the row player maximizes.
#[derive(Debug, Clone)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
}

/// Solve max_p min_q p^T A q over mixed strategies.
pub fn solve_matrix_game(payoff: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let m = payoff.len();
    if m == 0 || payoff[0].is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = payoff[0].len();
    if payoff.iter().any(|r| r.len() != n) {
        return Err(Error::EmptyMatrix);
    }
    let min_entry = payoff
        .iter()
        .flatten()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min_entry;
    // Shifted game A' = A + shift > 0. Column player's packing LP:
    //   max 1.z  s.t.  A' z <= 1, z >= 0;   value' = 1 / sum(z).
    // The dual variables on the rows give the row player's mix.
    let mut tab = vec![vec![0.0; n + m + 1]; m + 1];
    for (i, row) in payoff.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            tab[i][j] = a + shift;
        }
        tab[i][n + i] = 1.0;
        tab[i][n + m] = 1.0;
    }
    for j in 0..n {
        tab[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Bland's rule keeps this loop finite.
    loop {
        let Some(pivot_col) = (0..n + m).find(|&j| tab[m][j] < -EPS) else {
            break;
        };
        let mut pivot_row = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if tab[i][pivot_col] > EPS {
                let ratio = tab[i][n + m] / tab[i][pivot_col];
                if ratio < best - EPS
                    || (ratio < best + EPS
                        && pivot_row.map_or(true, |r: usize| basis[i] < basis[r]))
                {
                    best = ratio;
                    pivot_row = Some(i);
                }
            }
        }
        let Some(pr) = pivot_row else {
            return Err(Error::LpFailure("unbounded packing program".into()));
        };
        let pv = tab[pr][pivot_col];
        for v in tab[pr].iter_mut() {
            *v /= pv;
        }
        for i in 0..=m {
            if i != pr && tab[i][pivot_col].abs() > 1e-15 {
                let f = tab[i][pivot_col];
                for j in 0..=n + m {
                    tab[i][j] -= f * tab[pr][j];
                }
            }
        }
        basis[pr] = pivot_col;
    }
    let objective = tab[m][n + m];
    if objective <= EPS {
        return Err(Error::LpFailure("degenerate packing optimum".into()));
    }
    let value_shifted = 1.0 / objective;
    let mut z = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            z[b] = tab[i][n + m];
        }
    }
    let col_mix: Vec<f64> = z.iter().map(|v| v * value_shifted).collect();
    // Dual solution appears in the objective row under the slack columns.
    let row_mix: Vec<f64> = (0..m)
        .map(|i| tab[m][n + i] * value_shifted)
        .collect();
    Ok(MatrixGameSolution {
        value: value_shifted - shift,
        row_mix,
        col_mix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn matching_pennies() {
        let sol = solve_matrix_game(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert_close(sol.value, 0.0);
        assert_close(sol.row_mix[0], 0.5);
        assert_close(sol.col_mix[0], 0.5);
    }

    #[test]
    fn trivial_and_identity() {
        let sol = solve_matrix_game(&[vec![0.375]]).unwrap();
        assert_close(sol.value, 0.375);
        assert_close(sol.row_mix[0], 1.0);

        let sol = solve_matrix_game(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_close(sol.value, 0.5);
        assert_close(sol.row_mix[0], 0.5);
        assert_close(sol.col_mix[1], 0.5);
    }

    #[test]
    fn dominated_rows_and_rectangular() {
        // Row 0 dominates; column player picks its smallest entry.
        let sol = solve_matrix_game(&[vec![0.6, 0.9, 0.7], vec![0.1, 0.2, 0.05]]).unwrap();
        assert_close(sol.value, 0.6);
        assert_close(sol.row_mix[0], 1.0);
        assert_close(sol.col_mix[0], 1.0);
    }

    #[test]
    fn mix_verified_by_best_responses() {
        let a = vec![vec![0.3, 0.8, 0.1], vec![0.7, 0.2, 0.9], vec![0.5, 0.5, 0.4]];
        let sol = solve_matrix_game(&a).unwrap();
        // Row mix guarantees >= value against every column...
        for j in 0..3 {
            let got: f64 = (0..3).map(|i| sol.row_mix[i] * a[i][j]).sum();
            assert!(got >= sol.value - 1e-7);
        }
        // ...and the column mix caps every row at <= value.
        for (i, row) in a.iter().enumerate() {
            let got: f64 = (0..3).map(|j| sol.col_mix[j] * row[j]).sum();
            assert!(got <= sol.value + 1e-7, "row {i}");
        }
        let sp: f64 = sol.row_mix.iter().sum();
        let sq: f64 = sol.col_mix.iter().sum();
        assert_close(sp, 1.0);
        assert_close(sq, 1.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(solve_matrix_game(&[]).is_err());
        assert!(solve_matrix_game(&[vec![]]).is_err());
    }
}
