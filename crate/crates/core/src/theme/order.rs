//! Left-to-right ordering of the five theme colors.
//!
//! Every one of the 120 orders is scored by how well slot gaps agree with
//! the spatial distances between clusters:
//! `Σ_{i<j} (|slot(i) - slot(j)| / 4 - D_ij / max D)²`.

use crate::color::THEME_SIZE;

pub type Order = [usize; THEME_SIZE];

/// All permutations of `0..5` in lexicographic order.
pub fn permutations() -> Vec<Order> {
    let mut out = Vec::with_capacity(120);
    let mut p: Order = [0, 1, 2, 3, 4];
    loop {
        out.push(p);
        // next lexicographic permutation
        let Some(i) = (0..THEME_SIZE - 1).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..THEME_SIZE)
            .rev()
            .find(|&j| p[j] > p[i])
            .expect("pivot exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Disagreement between an order and normalized spatial distances.
pub fn order_cost(order: &Order, distances: &[[f64; THEME_SIZE]; THEME_SIZE]) -> f64 {
    let max = distances.iter().flatten().copied().fold(0.0f64, f64::max);
    let mut slot = [0usize; THEME_SIZE];
    for (s, &c) in order.iter().enumerate() {
        slot[c] = s;
    }
    let mut cost = 0.0;
    for i in 0..THEME_SIZE {
        for j in i + 1..THEME_SIZE {
            let gap = slot[i].abs_diff(slot[j]) as f64 / (THEME_SIZE - 1) as f64;
            let d = if max > 0.0 {
                distances[i][j] / max
            } else {
                0.0
            };
            cost += (gap - d).powi(2);
        }
    }
    cost
}

/// Best order for a distance matrix; `order[slot]` is a cluster index.
/// Ties go to the lexicographically smallest order.
pub fn order_by_distances(distances: &[[f64; THEME_SIZE]; THEME_SIZE]) -> Order {
    let mut best = [0, 1, 2, 3, 4];
    let mut best_cost = f64::INFINITY;
    for p in permutations() {
        let c = order_cost(&p, distances);
        if c < best_cost - 1e-12 {
            best_cost = c;
            best = p;
        }
    }
    best
}

/// Distance matrix between cluster mean positions.
pub fn mean_position_distances(
    positions: &[[f64; 2]; THEME_SIZE],
) -> [[f64; THEME_SIZE]; THEME_SIZE] {
    let mut d = [[0.0; THEME_SIZE]; THEME_SIZE];
    for i in 0..THEME_SIZE {
        for j in 0..THEME_SIZE {
            d[i][j] = (positions[i][0] - positions[j][0]).hypot(positions[i][1] - positions[j][1]);
        }
    }
    d
}

/// Average distance over all pixel pairs drawn from two clusters. Quadratic in
/// cluster size; meant for small inputs.
pub fn average_pairwise_distances(members: &[Vec<[f64; 2]>]) -> [[f64; THEME_SIZE]; THEME_SIZE] {
    assert_eq!(members.len(), THEME_SIZE);
    let mut d = [[0.0; THEME_SIZE]; THEME_SIZE];
    for i in 0..THEME_SIZE {
        for j in i + 1..THEME_SIZE {
            let (a, b) = (&members[i], &members[j]);
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let mut acc = 0.0;
            for p in a {
                for q in b {
                    acc += (p[0] - q[0]).hypot(p[1] - q[1]);
                }
            }
            let v = acc / (a.len() * b.len()) as f64;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Orders clusters by their mean pixel positions.
pub fn order_theme(positions: &[[f64; 2]; THEME_SIZE]) -> Order {
    order_by_distances(&mean_position_distances(positions))
}
