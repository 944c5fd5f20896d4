//! Dense two-phase simplex, used as an independent transport oracle.

const EPS: f64 = 1e-11;

/// Minimizes `cᵀx` subject to `Ax = b`, `x ≥ 0` (with `b ≥ 0`). Returns the
/// optimal value, or `None` if infeasible.
pub fn simplex_min(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let m = a.len();
    let n = c.len();
    // tableau columns: n originals, m artificials, rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..n].copy_from_slice(&a[i]);
            row[n + i] = 1.0;
            row[width - 1] = b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase one: minimize the sum of artificials
    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    run(&mut t, &mut basis, &phase1, n + m);
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= n)
        .map(|(i, _)| t[i][width - 1])
        .sum();
    if infeas > 1e-8 {
        return None;
    }
    // pivot remaining artificials out where a real column allows it
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut cost = vec![0.0; n + m];
    cost[..n].copy_from_slice(c);
    run(&mut t, &mut basis, &cost, n);
    Some(
        basis
            .iter()
            .enumerate()
            .map(|(i, &j)| if j < n { c[j] * t[i][width - 1] } else { 0.0 })
            .sum(),
    )
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    t[row].iter_mut().for_each(|v| *v /= p);
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row && r[col].abs() > 0.0 {
            let f = r[col];
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    basis[row] = col;
}

/// Bland's rule simplex over the first `allowed` columns.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) {
    let width = t[0].len();
    loop {
        let reduced = |j: usize, t: &[Vec<f64>]| -> f64 {
            cost[j]
                - basis
                    .iter()
                    .enumerate()
                    .map(|(i, &bj)| cost[bj] * t[i][j])
                    .sum::<f64>()
        };
        let Some(enter) = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j, t) < -EPS)
        else {
            return;
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > EPS {
                let ratio = row[width - 1] / row[enter];
                match leave {
                    Some((li, lr))
                        if ratio > lr + EPS || (ratio >= lr - EPS && basis[i] >= basis[li]) => {}
                    _ => leave = Some((i, ratio)),
                }
            }
        }
        let Some((row, _)) = leave else {
            panic!("unbounded transport problem");
        };
        pivot(t, basis, row, enter);
    }
}

/// Optimal transport cost between two equal-mass histograms.
pub fn transport_lp(p: &[f64], q: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (ns, nd) = (p.len(), q.len());
    let mut a = Vec::with_capacity(ns + nd);
    for i in 0..ns {
        let mut row = vec![0.0; ns * nd];
        row[i * nd..(i + 1) * nd].iter_mut().for_each(|v| *v = 1.0);
        a.push(row);
    }
    for j in 0..nd {
        let mut row = vec![0.0; ns * nd];
        for i in 0..ns {
            row[i * nd + j] = 1.0;
        }
        a.push(row);
    }
    let b: Vec<f64> = p.iter().chain(q).copied().collect();
    let c: Vec<f64> = cost.iter().flatten().copied().collect();
    simplex_min(&a, &b, &c).expect("balanced transport is feasible")
}
