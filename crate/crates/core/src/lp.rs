//! Dense linear programming for the small multiplier-feasibility problems.
//!
//! Problems have a handful of variables but can carry thousands of
//! inequality rows (one per grid node and control direction), so the solver
//! runs a two-phase tableau simplex on a working subset of rows and adds the
//! most violated remaining row until none is violated.

use crate::linalg::dot;

const PIVOT_EPS: f64 = 1e-11;

/// `a . y <= b`
#[derive(Debug, Clone)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { point: Vec<f64>, value: f64 },
    Infeasible,
}

/// Maximize `objective . y` subject to `rows` and `|y_i| <= bound`.
///
/// `slack` is added to every right-hand side; it absorbs rounding in rows that
/// are tight by construction.
pub fn maximize(objective: &[f64], rows: &[Row], bound: f64, slack: f64) -> LpOutcome {
    let n = objective.len();
    let mut working: Vec<usize> = Vec::new();
    let max_rounds = rows.len() + 1;
    for _ in 0..max_rounds {
        let sub: Vec<Row> = working.iter().map(|&i| rows[i].clone()).collect();
        let outcome = solve_tableau(objective, &sub, bound, slack);
        let LpOutcome::Optimal { point, .. } = &outcome else {
            return LpOutcome::Infeasible;
        };
        let worst = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !working.contains(i))
            .map(|(i, r)| {
                let scale = 1.0 + r.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (i, (dot(&r.a, point) - r.b - slack) / scale)
            })
            .filter(|(_, viol)| *viol > 1e-12)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((i, _)) => working.push(i),
            None => return outcome,
        }
    }
    debug_assert!(n == objective.len());
    solve_tableau(objective, rows, bound, slack)
}

/// Two-phase simplex with Bland's rule on the full row set.
pub fn solve_tableau(objective: &[f64], rows: &[Row], bound: f64, slack: f64) -> LpOutcome {
    let n = objective.len();
    // y = z - bound with 0 <= z <= 2 bound.
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows.len() + n);
    for r in rows {
        let shift: f64 = r.a.iter().sum::<f64>() * bound;
        cons.push((r.a.clone(), r.b + slack + shift));
    }
    for i in 0..n {
        let mut a = vec![0.0; n];
        a[i] = 1.0;
        cons.push((a, 2.0 * bound));
    }
    let m = cons.len();
    let n_art = cons.iter().filter(|(_, b)| *b < 0.0).count();
    let width = n + m + n_art + 1;
    let rhs_col = width - 1;
    let mut t = vec![vec![0.0; width]; m];
    let mut basis = vec![0usize; m];
    let mut art = n + m;
    for (i, (a, b)) in cons.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[j];
        }
        t[i][n + i] = sign;
        t[i][rhs_col] = sign * b;
        if *b < 0.0 {
            t[i][art] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut cost = vec![0.0; width - 1];
        for c in cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        run_simplex(&mut t, &mut basis, &cost, width - 1);
        let infeas: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= n + m)
            .map(|(i, _)| t[i][rhs_col])
            .sum();
        if infeas > 1e-9 {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis.
        let mut i = 0;
        while i < t.len() {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| t[i][j].abs() > PIVOT_EPS) {
                    pivot(&mut t, &mut basis, i, j);
                    i += 1;
                } else {
                    t.remove(i);
                    basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2: minimize -objective over structural + slack columns.
    let mut cost = vec![0.0; width - 1];
    for j in 0..n {
        cost[j] = -objective[j];
    }
    run_simplex(&mut t, &mut basis, &cost, n + m);

    let mut z = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            z[b] = t[i][rhs_col];
        }
    }
    let point: Vec<f64> = z.iter().map(|zi| zi - bound).collect();
    let value = dot(objective, &point);
    LpOutcome::Optimal { point, value }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    basis[row] = col;
}

/// Minimizes `cost . x` over the first `allowed` columns, Bland's rule.
fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) {
    let rhs_col = t.first().map(|r| r.len() - 1).unwrap_or(0);
    for _ in 0..50_000 {
        // reduced costs
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut rc = cost[j];
            for (i, &b) in basis.iter().enumerate() {
                rc -= cost[b] * t[i][j];
            }
            rc < -1e-10
        });
        let Some(col) = entering else { return };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            let a = t[i][col];
            if a > PIVOT_EPS {
                let ratio = t[i][rhs_col] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        // Bounded by construction; an unbounded column would mean a bug.
        let Some((row, _)) = leave else { return };
        pivot(t, basis, row, col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(a: &[f64], b: f64) -> Row {
        Row { a: a.to_vec(), b }
    }

    #[test]
    fn simple_triangle() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let rows = vec![row(&[1.0, 2.0], 4.0), row(&[3.0, 1.0], 6.0)];
        let LpOutcome::Optimal { point, value } = maximize(&[1.0, 1.0], &rows, 100.0, 0.0) else {
            panic!("infeasible")
        };
        assert!((value - 2.8).abs() < 1e-9, "{value}");
        assert!((point[0] - 1.6).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        let rows = vec![row(&[1.0], -2.0), row(&[-1.0], -2.0)];
        assert_eq!(maximize(&[0.0], &rows, 10.0, 0.0), LpOutcome::Infeasible);
    }

    #[test]
    fn box_bound_is_active() {
        let LpOutcome::Optimal { point, .. } = maximize(&[1.0, -1.0], &[], 1.0, 0.0) else {
            panic!()
        };
        assert_eq!(point, vec![1.0, -1.0]);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x >= 1 (i.e. -x <= -1), max -x => x = 1
        let rows = vec![row(&[-1.0, 0.0], -1.0), row(&[0.0, -1.0], -0.5)];
        let LpOutcome::Optimal { point, .. } = maximize(&[-1.0, -1.0], &rows, 5.0, 0.0) else {
            panic!()
        };
        assert!((point[0] - 1.0).abs() < 1e-9 && (point[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn row_generation_agrees_with_full_tableau() {
        let mut rows = Vec::new();
        for k in 0..200 {
            let th = k as f64 * std::f64::consts::PI * 2.0 / 200.0;
            rows.push(row(&[th.cos(), th.sin()], 1.0));
        }
        let a = maximize(&[0.3, 0.7], &rows, 10.0, 0.0);
        let b = solve_tableau(&[0.3, 0.7], &rows, 10.0, 0.0);
        match (a, b) {
            (LpOutcome::Optimal { value: va, .. }, LpOutcome::Optimal { value: vb, .. }) => {
                assert!((va - vb).abs() < 1e-9)
            }
            _ => panic!(),
        }
    }
}
