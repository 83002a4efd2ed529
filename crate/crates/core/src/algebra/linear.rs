use num_traits::{One, Zero};

use super::rational::Rational;

/// Outcome of reducing an augmented linear system `M x = rhs` over Q.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    /// One entry per unknown; `None` when the value depends on a free unknown.
    pub values: Vec<Option<Rational>>,
    /// Unknowns without a pivot, in increasing order.
    pub free: Vec<usize>,
    pub consistent: bool,
}

impl LinearSolution {
    pub fn is_unique(&self) -> bool {
        self.consistent && self.free.is_empty()
    }

    /// Particular solution with every free unknown set to zero.
    pub fn particular(&self) -> Vec<Rational> {
        self.values
            .iter()
            .map(|v| v.clone().unwrap_or_else(Rational::zero))
            .collect()
    }
}

/// Gauss-Jordan elimination on rows of length `ncols + 1` (last entry is the
/// right-hand side). Columns are pivoted from the last one down, so when a
/// choice exists the lowest-indexed unknowns are the ones left free.
pub fn solve_linear(mut rows: Vec<Vec<Rational>>, ncols: usize) -> LinearSolution {
    let mut pivot_row_of = vec![None; ncols];
    let mut next = 0;
    for col in (0..ncols).rev() {
        let Some(found) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let inv = rows[next][col].recip();
        if !inv.is_one() {
            for x in rows[next].iter_mut() {
                *x *= &inv;
            }
        }
        let pivot = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == next || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(pivot.iter()) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        pivot_row_of[col] = Some(next);
        next += 1;
    }
    let consistent = rows[next..].iter().all(|row| row[ncols].is_zero());
    let free: Vec<bool> = pivot_row_of.iter().map(Option::is_none).collect();
    let free_list = (0..ncols).filter(|&c| free[c]).collect();
    let values = pivot_row_of
        .iter()
        .map(|slot| {
            slot.and_then(|r| {
                let row = &rows[r];
                let depends_on_free = (0..ncols).any(|c| free[c] && !row[c].is_zero());
                (!depends_on_free).then(|| row[ncols].clone())
            })
        })
        .collect();
    LinearSolution {
        values,
        free: free_list,
        consistent,
    }
}
