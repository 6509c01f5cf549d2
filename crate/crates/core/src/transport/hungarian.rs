//! Square assignment oracle on the column-duplicated cost matrix.

use crate::error::{Error, Result};
use crate::model::{plan_cost, AssignmentPlan, CostMatrix};

use super::TransportSolution;

/// N × (K·n_k) matrix where columns `j*n_k .. (j+1)*n_k` all copy depot `j`'s
/// column, turning capacity-n_k depots into n_k unit-capacity slots each.
#[derive(Clone, Debug, PartialEq)]
pub struct DuplicatedCostMatrix {
    values: Vec<f64>,
    n: usize,
    k: usize,
    n_k: usize,
}

impl DuplicatedCostMatrix {
    pub fn new(costs: &CostMatrix, n_k: usize) -> Result<Self> {
        let n = costs.n();
        let k = costs.k();
        if n_k == 0 || n != k * n_k {
            return Err(Error::Contract(format!(
                "duplication needs N == K*n_k (square matrix); got N={n}, K={k}, n_k={n_k}"
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..k {
                let c = costs.get(i, j);
                values.extend(std::iter::repeat_n(c, n_k));
            }
        }
        Ok(DuplicatedCostMatrix { values, n, k, n_k })
    }

    /// Side length (N == K·n_k).
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    pub fn depot_of_column(&self, col: usize) -> usize {
        col / self.n_k
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// Solve the N×N assignment problem `min Σ cost(i, col[i])`, returning the
/// column of each row. Shortest augmenting path with row/column potentials,
/// O(N^3).
pub fn solve_assignment(n: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    // 1-based internals: row 0 / column 0 are the virtual root
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Duplicate each depot column n_k times, solve the square assignment, then
/// collapse slots back to depots.
pub fn hungarian_oracle(costs: &CostMatrix, n_k: usize) -> Result<TransportSolution> {
    let dup = DuplicatedCostMatrix::new(costs, n_k)?;
    let cols = solve_assignment(dup.size(), |i, c| dup.get(i, c));
    let assigned = cols.iter().map(|&c| dup.depot_of_column(c)).collect();
    let plan = AssignmentPlan::new(assigned, costs.k(), n_k)?;
    let objective = plan_cost(&plan, costs)?;
    Ok(TransportSolution { plan, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostExponent;

    fn matrix(rows: &[&[f64]]) -> CostMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        CostMatrix::from_rows(&rows, CostExponent::Linear).unwrap()
    }

    #[test]
    fn duplication_single_column() {
        let m = matrix(&[&[3.0], &[7.0]]);
        let dup = DuplicatedCostMatrix::new(&m, 2).unwrap();
        assert_eq!(dup.rows(), vec![vec![3.0, 3.0], vec![7.0, 7.0]]);
        let sol = hungarian_oracle(&m, 2).unwrap();
        assert_eq!(sol.plan.assigned(), &[0, 0]);
        assert_eq!(sol.objective, 10.0);
    }

    #[test]
    fn diagonal_dominant() {
        let m = matrix(&[&[0.0, 10.0], &[10.0, 0.0]]);
        let sol = hungarian_oracle(&m, 1).unwrap();
        assert_eq!(sol.plan.assigned(), &[0, 1]);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn block_identity_layout() {
        let m = matrix(&[
            &[1.0, 2.0, 3.0],
            &[4.0, 5.0, 6.0],
            &[7.0, 8.0, 9.0],
            &[1.0, 1.0, 1.0],
            &[0.0, 2.0, 0.0],
            &[3.0, 3.0, 9.0],
        ]);
        let dup = DuplicatedCostMatrix::new(&m, 2).unwrap();
        for i in 0..6 {
            for c in 0..6 {
                assert_eq!(dup.get(i, c), m.get(i, c / 2));
                assert_eq!(dup.depot_of_column(c), c / 2);
            }
        }
    }

    #[test]
    fn non_square_rejected() {
        let m = matrix(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        assert!(matches!(hungarian_oracle(&m, 1), Err(Error::Contract(_))));
        assert!(matches!(hungarian_oracle(&m, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn plain_assignment_against_permutations() {
        let c = [[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]];
        let cols = solve_assignment(3, |i, j| c[i][j]);
        let got: f64 = cols.iter().enumerate().map(|(i, &j)| c[i][j]).sum();
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let best = perms
            .iter()
            .map(|p| (0..3).map(|i| c[i][p[i]]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(got, best);
    }
}
