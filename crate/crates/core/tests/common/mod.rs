//! Reference oracles shared by the integration suites. None of this calls the
//! simplex or search code.

#![allow(dead_code)]

use rand::Rng;
use rescue_mkp::model::Instance;
use rescue_mkp::simplex::{LpProblem, LpStatus, Relation, Sense};

pub fn t1() -> Instance {
    Instance::new("T1", vec![10, 6, 4], vec![vec![5, 4, 3]], vec![8]).unwrap()
}

/// Solves the square system `m x = rhs` by Gaussian elimination.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn feasible(p: &LpProblem, x: &[f64], tol: f64) -> bool {
    let n = p.n();
    if (0..n).any(|j| x[j] < p.lower[j] - tol || x[j] > p.upper[j] + tol) {
        return false;
    }
    p.rows.iter().all(|row| {
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let t = tol * (1.0 + row.rhs.abs());
        match row.relation {
            Relation::Le => lhs <= row.rhs + t,
            Relation::Ge => lhs >= row.rhs - t,
            Relation::Eq => (lhs - row.rhs).abs() <= t,
        }
    })
}

/// Best objective over all basic solutions of a bounded LP, or `None` when
/// no vertex is feasible.
pub fn vertex_optimum(p: &LpProblem) -> Option<f64> {
    let n = p.n();
    // Candidate active constraints: each row as an equality, each finite bound.
    let mut cands: Vec<(Vec<f64>, f64)> =
        p.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cands.push((e.clone(), p.lower[j]));
        assert!(p.upper[j].is_finite(), "oracle needs a bounded box");
        cands.push((e, p.upper[j]));
    }
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    fn rec(
        start: usize,
        pick: &mut Vec<usize>,
        n: usize,
        cands: &[(Vec<f64>, f64)],
        p: &LpProblem,
        best: &mut Option<f64>,
    ) {
        if pick.len() == n {
            let m = pick.iter().map(|&i| cands[i].0.clone()).collect();
            let rhs = pick.iter().map(|&i| cands[i].1).collect();
            if let Some(x) = solve_square(m, rhs) {
                if feasible(p, &x, 1e-9) {
                    let v: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                    let better = match (*best, p.sense) {
                        (None, _) => true,
                        (Some(b), Sense::Maximize) => v > b,
                        (Some(b), Sense::Minimize) => v < b,
                    };
                    if better {
                        *best = Some(v);
                    }
                }
            }
            return;
        }
        for i in start..cands.len() {
            pick.push(i);
            rec(i + 1, pick, n, cands, p, best);
            pick.pop();
        }
    }
    rec(0, &mut pick, n, &cands, p, &mut best);
    best
}

/// Fractional knapsack over `[0, 1]^n` with one nonnegative row.
pub fn fractional_greedy(profits: &[f64], weights: &[f64], cap: f64) -> f64 {
    let mut items: Vec<usize> = (0..profits.len()).filter(|&j| profits[j] > 0.0).collect();
    items.sort_by(|&a, &b| {
        let ra = if weights[a] == 0.0 {
            f64::INFINITY
        } else {
            profits[a] / weights[a]
        };
        let rb = if weights[b] == 0.0 {
            f64::INFINITY
        } else {
            profits[b] / weights[b]
        };
        rb.total_cmp(&ra)
    });
    let mut room = cap;
    let mut value = 0.0;
    for j in items {
        if weights[j] <= room {
            room -= weights[j];
            value += profits[j];
        } else {
            value += profits[j] * room / weights[j];
            break;
        }
    }
    value
}

/// Random small LP over a box, mostly `<=` rows with occasional `=`/`>=`.
pub fn random_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=3);
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let obj = (0..n).map(|_| rng.gen_range(-10..=10) as f64).collect();
    let mut p = LpProblem::unit_box(sense, obj);
    for j in 0..n {
        p.lower[j] = rng.gen_range(-2..=1) as f64;
        p.upper[j] = p.lower[j] + rng.gen_range(0..=3) as f64;
    }
    for _ in 0..m {
        let coeffs = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let rel = match rng.gen_range(0..10) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        p = p.with_row(coeffs, rel, rng.gen_range(-5..=10) as f64);
    }
    p
}

/// Independent dual bound from the reported duals, with sign validity.
///
/// Returns `(dual_bound, signs_ok)`.
pub fn dual_bound(p: &LpProblem, duals: &[f64]) -> (f64, bool) {
    let n = p.n();
    let max = p.sense == Sense::Maximize;
    let tol = 1e-7;
    let mut signs_ok = true;
    let mut bound = 0.0;
    for (row, &y) in p.rows.iter().zip(duals) {
        bound += y * row.rhs;
        // For a maximisation, `<=` rows need y >= 0 and `>=` rows y <= 0.
        let ok = match (row.relation, max) {
            (Relation::Eq, _) => true,
            (Relation::Le, true) | (Relation::Ge, false) => y >= -tol,
            (Relation::Ge, true) | (Relation::Le, false) => y <= tol,
        };
        signs_ok &= ok;
    }
    for j in 0..n {
        let d = p.objective[j]
            - p.rows
                .iter()
                .zip(duals)
                .map(|(r, y)| r.coeffs[j] * y)
                .sum::<f64>();
        let (a, b) = (d * p.lower[j], d * p.upper[j]);
        bound += if max { a.max(b) } else { a.min(b) };
    }
    (bound, signs_ok)
}

pub fn status_name(s: LpStatus) -> &'static str {
    match s {
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
    }
}
