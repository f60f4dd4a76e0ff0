//! Exact balanced transportation between two uniform distributions.
//!
//! Masses are scaled to integers (each of `m` rows supplies `n`, each of `n`
//! columns demands `m`), so flows stay integral through every pivot and the
//! optimal vertex is found without floating-point drift in the constraints.
//! The solver is the transportation simplex with u-v potentials and Bland's
//! rule for both entering and leaving cells.

use std::collections::VecDeque;

use serde::Serialize;

use super::SimilarityError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// `flows[i][j]`, summing to `1/rows` across each row and `1/cols` down each column.
    pub flows: Vec<Vec<f64>>,
    pub cost: f64,
}

const MAX_PIVOTS: usize = 100_000;

/// Minimises `Σ T_ij C_ij` over couplings of the uniform distributions on rows and columns.
pub fn solve_transport(cost: &[Vec<f64>]) -> Result<TransportPlan, SimilarityError> {
    let m = cost.len();
    let n = cost.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(SimilarityError::EmptySequence);
    }
    if cost.iter().any(|r| r.len() != n) {
        return Err(SimilarityError::Analysis("ragged cost matrix".into()));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(SimilarityError::Analysis("non-finite ground cost".into()));
    }

    let mut flow = vec![vec![0u64; n]; m];
    let mut basic = vec![vec![false; n]; m];
    northwest_corner(m, n, &mut flow, &mut basic);

    let scale = cost.iter().flatten().fold(1.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * scale;

    let mut pivots = 0;
    loop {
        let (u, v) = potentials(cost, &basic);
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !basic[i][j] && cost[i][j] - u[i] - v[j] < -tol);
        let Some((ei, ej)) = entering else { break };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(SimilarityError::NoConvergence(MAX_PIVOTS));
        }

        let path = tree_path(m, n, &basic, ei, ej);
        // Cells alternate −, +, −, … starting from the row of the entering cell.
        let (li, lj) = path
            .iter()
            .step_by(2)
            .copied()
            .min_by(|&(ai, aj), &(bi, bj)| {
                flow[ai][aj]
                    .cmp(&flow[bi][bj])
                    .then((ai * n + aj).cmp(&(bi * n + bj)))
            })
            .expect("cycle has a decreasing cell");
        let theta = flow[li][lj];
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[i][j] -= theta;
            } else {
                flow[i][j] += theta;
            }
        }
        flow[ei][ej] += theta;
        basic[li][lj] = false;
        basic[ei][ej] = true;
    }

    let total = (m * n) as f64;
    let flows: Vec<Vec<f64>> = flow
        .iter()
        .map(|row| row.iter().map(|&f| f as f64 / total).collect())
        .collect();
    let mut terms: Vec<f64> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| flow[i][j] > 0)
        .map(|(i, j)| flow[i][j] as f64 * cost[i][j])
        .collect();
    terms.sort_by(f64::total_cmp);
    let cost = terms.iter().sum::<f64>() / total;
    Ok(TransportPlan {
        rows: m,
        cols: n,
        flows,
        cost,
    })
}

fn northwest_corner(m: usize, n: usize, flow: &mut [Vec<u64>], basic: &mut [Vec<bool>]) {
    let mut supply = vec![n as u64; m];
    let mut demand = vec![m as u64; n];
    let (mut i, mut j) = (0, 0);
    loop {
        let f = supply[i].min(demand[j]);
        flow[i][j] = f;
        basic[i][j] = true;
        supply[i] -= f;
        demand[j] -= f;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if supply[i] == 0 && i < m - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
}

/// Solves `u_i + v_j = c_ij` over the basic cells with `u_0 = 0`.
fn potentials(cost: &[Vec<f64>], basic: &[Vec<bool>]) -> (Vec<f64>, Vec<f64>) {
    let m = cost.len();
    let n = cost[0].len();
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            for j in 0..n {
                if basic[k][j] && v[j].is_nan() {
                    v[j] = cost[k][j] - u[k];
                    queue.push_back((false, j));
                }
            }
        } else {
            for i in 0..m {
                if basic[i][k] && u[i].is_nan() {
                    u[i] = cost[i][k] - v[k];
                    queue.push_back((true, i));
                }
            }
        }
    }
    (u, v)
}

/// Basic cells on the tree path from row `ei` to column `ej`, in walk order.
fn tree_path(m: usize, n: usize, basic: &[Vec<bool>], ei: usize, ej: usize) -> Vec<(usize, usize)> {
    // Nodes: rows 0..m, columns m..m+n.
    let mut parent = vec![usize::MAX; m + n];
    parent[ei] = ei;
    let mut queue = VecDeque::from([ei]);
    let target = m + ej;
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        let neighbours: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            let j = node - m;
            (0..m).filter(|&i| basic[i][j]).collect()
        };
        for next in neighbours {
            if parent[next] == usize::MAX {
                parent[next] = node;
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = target;
    while node != ei {
        let prev = parent[node];
        let cell = if node < m { (node, prev - m) } else { (prev, node - m) };
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}
