//! Minimum-cost assignment and the travel-distance sort of robot ids into
//! formation slots.

use crate::error::{Error, Result};
use crate::se2::{FormationState, Vec2};
use crate::team::{SortedIds, TeamConfig};
use nalgebra::DMatrix;

pub type CostMatrix = DMatrix<f64>;

/// Relative slack under which two assignment objectives count as tied.
const TIE_TOL: f64 = 1e-12;

/// Shortest augmenting path Hungarian method with row/column potentials.
/// Returns `assign[row] = col` and the objective.
fn solve_lap(c: &CostMatrix) -> (Vec<usize>, f64) {
    let n = c.nrows();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based arrays, column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = c[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum();
    (assign, total)
}

fn submatrix(c: &CostMatrix, rows: &[usize], cols: &[usize]) -> CostMatrix {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| c[(rows[a], cols[b])])
}

/// Optimal assignment `assign[row] = col` minimizing `sum c[row, assign[row]]`.
/// Among optimal assignments the lexicographically smallest is returned.
pub fn hungarian(c: &CostMatrix) -> Result<Vec<usize>> {
    if c.nrows() != c.ncols() {
        return Err(Error::NotSquare {
            rows: c.nrows(),
            cols: c.ncols(),
        });
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("cost matrix entries must be finite".into()));
    }
    let n = c.nrows();
    let (_, best) = solve_lap(c);
    let tol = TIE_TOL * (1.0 + best.abs());

    let mut assign = Vec::with_capacity(n);
    let mut fixed_cost = 0.0;
    let mut free_cols: Vec<usize> = (0..n).collect();
    for row in 0..n {
        let rest_rows: Vec<usize> = (row + 1..n).collect();
        let mut chosen = None;
        for (k, &col) in free_cols.iter().enumerate() {
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(k);
            let (_, rest) = solve_lap(&submatrix(c, &rest_rows, &rest_cols));
            if fixed_cost + c[(row, col)] + rest <= best + tol {
                chosen = Some(k);
                break;
            }
        }
        // the optimum is always reachable from some free column
        let k = chosen.unwrap_or(0);
        let col = free_cols.remove(k);
        fixed_cost += c[(row, col)];
        assign.push(col);
    }
    Ok(assign)
}

pub fn assignment_cost(c: &CostMatrix, assign: &[usize]) -> f64 {
    assign.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum()
}

/// Approximate slot targets relative to Robot 1: slot `i` (2..=N) sits at
/// `sum_{k < i} d_avg * n^(k)` with `d_avg = (2/N) * sum r_n`.
pub fn approximate_targets(team: &TeamConfig, directions: &[Vec2]) -> Vec<Vec2> {
    let n = team.num_robots();
    let d_avg = 2.0 / n as f64 * team.radii().iter().sum::<f64>();
    let mut acc = Vec2::zeros();
    directions
        .iter()
        .map(|d| {
            acc += d * d_avg;
            acc
        })
        .collect()
}

/// Travel cost matrix: entry `(slot, robot)` is the squared distance from
/// robot `robot + 2` to the target of slot `slot + 2`.
pub fn travel_cost_matrix(x: &FormationState, targets: &[Vec2]) -> CostMatrix {
    DMatrix::from_fn(targets.len(), x.poses.len(), |i, j| (targets[i] - x.poses[j].trans).norm_squared())
}

/// Orders robot ids so that the fleet travels the least total squared
/// distance into the target formation. Robot 1 always keeps slot 1.
pub fn sort_robot_ids(x: &FormationState, team: &TeamConfig, directions: &[Vec2]) -> Result<SortedIds> {
    let n = team.num_robots();
    if directions.len() + 1 != n || x.num_robots() != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: directions.len(),
        });
    }
    let targets = approximate_targets(team, directions);
    let c = travel_cost_matrix(x, &targets);
    let assign = hungarian(&c)?;
    let mut order = Vec::with_capacity(n);
    order.push(1);
    order.extend(assign.iter().map(|&j| j + 2));
    SortedIds::new(order, team)
}
