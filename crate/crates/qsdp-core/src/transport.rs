//! Exact classical transportation LP at desk scale, used as the acceptance
//! oracle for coupling problems with diagonal data:
//!
//!   minimize Σ c_ij γ_ij  over γ ≥ 0 with row sums p and column sums q.
//!
//! For n ≤ 4 the optimum is found by exhaustive basic-solution enumeration
//! (every vertex of the transportation polytope is a basic solution of the
//! 2n−1 independent equality constraints). For n = 5, 6 a transportation
//! simplex with Bland's rule takes over; both routes are cross-checked in the
//! tests. Larger n is out of scope.

use alloc::vec::Vec;

use crate::error::Error;

const FEAS_TOL: f64 = 1e-9;

/// Exact optimum of the transportation problem. `cost` is row-major n×n,
/// `p` and `q` are probability vectors.
pub fn classical_ot_oracle(cost: &[f64], p: &[f64], q: &[f64]) -> Result<f64, Error> {
    let n = p.len();
    if n == 0 || q.len() != n || cost.len() != n * n {
        return Err(Error::InvalidInput(alloc::format!(
            "transportation data shapes disagree: |p| = {}, |q| = {}, |cost| = {}",
            p.len(),
            q.len(),
            cost.len()
        )));
    }
    if n > 6 {
        return Err(Error::OracleTooLarge { n });
    }
    for (name, v) in [("p", p), ("q", q)] {
        let sum: f64 = v.iter().sum();
        if v.iter().any(|&x| x < -1e-12) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(alloc::format!(
                "{name} must be a probability vector (sum {sum})"
            )));
        }
    }
    if n == 1 {
        return Ok(cost[0]);
    }
    if n <= 4 {
        exhaustive_vertex_search(cost, p, q, n)
    } else {
        transportation_simplex(cost, p, q, n)
    }
}

/// Enumerates all (2n−1)-subsets of cells, solves the equality system on each
/// and keeps the cheapest nonnegative basic solution.
fn exhaustive_vertex_search(cost: &[f64], p: &[f64], q: &[f64], n: usize) -> Result<f64, Error> {
    let rows = 2 * n - 1;
    let cells = n * n;
    // constraint matrix: n row-sum rows then n−1 column-sum rows
    let coeff = |r: usize, cell: usize| -> f64 {
        let (i, j) = (cell / n, cell % n);
        if r < n {
            if i == r {
                1.0
            } else {
                0.0
            }
        } else if j == r - n {
            1.0
        } else {
            0.0
        }
    };
    let mut rhs = Vec::with_capacity(rows);
    rhs.extend_from_slice(p);
    rhs.extend_from_slice(&q[..n - 1]);

    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..rows).collect();
    loop {
        // assemble and solve the square system on this cell subset
        let mut m = alloc::vec![0.0f64; rows * rows];
        for (k, &cell) in subset.iter().enumerate() {
            for r in 0..rows {
                m[r * rows + k] = coeff(r, cell);
            }
        }
        if let Some(x) = solve_dense(&mut m, &rhs, rows) {
            if x.iter().all(|&v| v >= -FEAS_TOL) {
                let value: f64 = subset
                    .iter()
                    .zip(&x)
                    .map(|(&cell, &v)| cost[cell] * v.max(0.0))
                    .sum();
                if value < best {
                    best = value;
                }
            }
        }
        // next combination in lexicographic order
        let mut k = rows;
        loop {
            if k == 0 {
                return if best.is_finite() {
                    Ok(best)
                } else {
                    Err(Error::InvalidInput(
                        "no feasible basic solution found".into(),
                    ))
                };
            }
            k -= 1;
            if subset[k] != cells - rows + k {
                subset[k] += 1;
                for t in (k + 1)..rows {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_dense(m: &mut [f64], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut b = rhs.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &c| {
            m[a * n + col]
                .abs()
                .partial_cmp(&m[c * n + col].abs())
                .unwrap()
        })?;
        if m[piv * n + col].abs() < 1e-12 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for row in (col + 1)..n {
            let f = m[row * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    Some(x)
}

/// Transportation simplex with northwest-corner start and Bland's
/// anti-cycling rule.
fn transportation_simplex(cost: &[f64], p: &[f64], q: &[f64], n: usize) -> Result<f64, Error> {
    // northwest corner: exactly 2n−1 basic cells, degenerate zeros allowed
    let mut flow = alloc::vec![0.0f64; n * n];
    let mut basic = alloc::vec![false; n * n];
    {
        let mut remain_p = p.to_vec();
        let mut remain_q = q.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let f = remain_p[i].min(remain_q[j]);
            flow[i * n + j] = f;
            basic[i * n + j] = true;
            remain_p[i] -= f;
            remain_q[j] -= f;
            if i == n - 1 && j == n - 1 {
                break;
            }
            if remain_p[i] <= remain_q[j] && i < n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    for _pivot in 0..100_000 {
        // duals from the spanning tree: u_i + v_j = c_ij on basic cells
        let mut u = alloc::vec![f64::NAN; n];
        let mut v = alloc::vec![f64::NAN; n];
        u[0] = 0.0;
        let mut settled = 1;
        while settled < 2 * n {
            let mut progressed = false;
            for i in 0..n {
                for j in 0..n {
                    if !basic[i * n + j] {
                        continue;
                    }
                    if u[i].is_finite() && v[j].is_nan() {
                        v[j] = cost[i * n + j] - u[i];
                        settled += 1;
                        progressed = true;
                    } else if v[j].is_finite() && u[i].is_nan() {
                        u[i] = cost[i * n + j] - v[j];
                        settled += 1;
                        progressed = true;
                    }
                }
            }
            if !progressed {
                return Err(Error::InvalidInput(
                    "transportation basis lost tree structure".into(),
                ));
            }
        }

        // Bland: first cell with negative reduced cost
        let mut entering = None;
        'scan: for i in 0..n {
            for j in 0..n {
                if !basic[i * n + j] && cost[i * n + j] - u[i] - v[j] < -1e-12 {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let (ei, ej) = match entering {
            Some(c) => c,
            None => {
                let value = flow.iter().zip(cost).map(|(&f, &c)| f.max(0.0) * c).sum();
                return Ok(value);
            }
        };

        // unique cycle: path from row ei to column ej through basic cells
        let path = tree_path(&basic, n, ei, ej).ok_or_else(|| {
            Error::InvalidInput("no augmenting cycle in transportation basis".into())
        })?;
        // path alternates cells starting/ending adjacent to the entering cell;
        // odd positions lose flow
        let mut theta = f64::INFINITY;
        let mut leaving = None;
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = flow[i * n + j];
                if f < theta {
                    theta = f;
                    leaving = Some((i, j));
                }
            }
        }
        let (li, lj) = leaving.expect("cycle has a losing cell");
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[i * n + j] -= theta;
            } else {
                flow[i * n + j] += theta;
            }
        }
        flow[ei * n + ej] += theta;
        basic[ei * n + ej] = true;
        basic[li * n + lj] = false;
        flow[li * n + lj] = 0.0;
    }
    Err(Error::InvalidInput(
        "transportation simplex exceeded the pivot budget".into(),
    ))
}

/// Alternating path of basic cells from row `ri` to column `cj`: returns the
/// cells in traversal order, starting with one in row `ri` and ending with
/// one in column `cj`.
fn tree_path(basic: &[bool], n: usize, ri: usize, cj: usize) -> Option<Vec<(usize, usize)>> {
    // nodes: rows 0..n, cols n..2n; edges are basic cells
    let start = ri;
    let goal = n + cj;
    let mut prev_edge = alloc::vec![usize::MAX; 2 * n];
    let mut visited = alloc::vec![false; 2 * n];
    let mut queue = alloc::collections::VecDeque::new();
    visited[start] = true;
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        if node < n {
            let i = node;
            for j in 0..n {
                if basic[i * n + j] && !visited[n + j] {
                    visited[n + j] = true;
                    prev_edge[n + j] = i * n + j;
                    queue.push_back(n + j);
                }
            }
        } else {
            let j = node - n;
            for i in 0..n {
                if basic[i * n + j] && !visited[i] {
                    visited[i] = true;
                    prev_edge[i] = i * n + j;
                    queue.push_back(i);
                }
            }
        }
    }
    if !visited[goal] {
        return None;
    }
    let mut cells = Vec::new();
    let mut node = goal;
    while node != start {
        let cell = prev_edge[node];
        let (i, j) = (cell / n, cell % n);
        cells.push((i, j));
        node = if node >= n { i } else { n + j };
    }
    cells.reverse();
    Some(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    #[test]
    fn trivial_cases() {
        let p = [0.5, 0.5];
        let cost = [0.0, 1.0, 1.0, 0.0];
        let v = classical_ot_oracle(&cost, &p, &p).unwrap();
        assert!(v.abs() < 1e-12);

        let v = classical_ot_oracle(&cost, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        // zero diagonal cost with equal marginals
        let cost = [0.0, 3.0, 2.0, 0.0];
        let p = [0.25, 0.75];
        let v = classical_ot_oracle(&cost, &p, &p).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn size_limit() {
        let n = 7;
        let cost = vec![0.0; n * n];
        let p = vec![1.0 / n as f64; n];
        assert!(matches!(
            classical_ot_oracle(&cost, &p, &p),
            Err(Error::OracleTooLarge { n: 7 })
        ));
    }

    #[test]
    fn simplex_agrees_with_exhaustive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for trial in 0..60 {
            let n = 3 + trial % 2;
            let cost: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sp: f64 = p.iter().sum();
            let sq: f64 = q.iter().sum();
            p.iter_mut().for_each(|x| *x /= sp);
            q.iter_mut().for_each(|x| *x /= sq);

            let a = exhaustive_vertex_search(&cost, &p, &q, n).unwrap();
            let b = transportation_simplex(&cost, &p, &q, n).unwrap();
            assert!((a - b).abs() < 1e-9, "n={n}: exhaustive {a} vs simplex {b}");
        }
    }

    #[test]
    fn five_point_simplex_with_degenerate_marginal() {
        let n = 5;
        let mut cost = vec![1.0; n * n];
        for i in 0..n {
            cost[i * n + i] = 0.0;
        }
        let p = [0.2, 0.2, 0.2, 0.2, 0.2];
        let v = classical_ot_oracle(&cost, &p, &p).unwrap();
        assert!(v.abs() < 1e-12);

        // concentrated source forces transport
        let p = [1.0, 0.0, 0.0, 0.0, 0.0];
        let q = [0.0, 0.0, 0.0, 0.0, 1.0];
        let mut cost = vec![0.0; n * n];
        cost[4] = 2.5;
        let v = classical_ot_oracle(&cost, &p, &q).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
    }
}
