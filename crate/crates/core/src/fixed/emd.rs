//! Earth mover's distance between color histograms.
//!
//! The transport problem is solved exactly by successive shortest augmenting
//! paths on the residual bipartite graph. Shortest paths use Bellman-Ford
//! because backward residual arcs carry negative costs.

use crate::color::lab_distance;
use crate::error::FixedPartError;

use super::histogram::ColorHistogram;

const MASS_EPS: f64 = 1e-13;

/// EMD with Euclidean Lab ground distance between bin centers.
pub fn emd(h1: &ColorHistogram, h2: &ColorHistogram) -> Result<f64, FixedPartError> {
    if !h1.same_layout(h2) {
        return Err(FixedPartError::LayoutMismatch);
    }
    // With a metric ground distance, mass shared by a bin never needs to move.
    let mut supply = Vec::new();
    let mut demand = Vec::new();
    for (i, (&p, &q)) in h1.bins.iter().zip(&h2.bins).enumerate() {
        let common = p.min(q);
        if p - common > MASS_EPS {
            supply.push((i, p - common));
        }
        if q - common > MASS_EPS {
            demand.push((i, q - common));
        }
    }
    if supply.is_empty() || demand.is_empty() {
        return Ok(0.0);
    }
    let cost: Vec<Vec<f64>> = supply
        .iter()
        .map(|&(i, _)| {
            demand
                .iter()
                .map(|&(j, _)| lab_distance(&h1.bin_centers[i], &h1.bin_centers[j]))
                .collect()
        })
        .collect();
    let s: Vec<f64> = supply.iter().map(|&(_, m)| m).collect();
    let d: Vec<f64> = demand.iter().map(|&(_, m)| m).collect();
    Ok(transport_cost(&s, &d, &cost))
}

/// Minimum cost of moving `supply` onto `demand` under `cost[i][j]`.
///
/// Moves `min(Σ supply, Σ demand)` units of mass. Costs must be finite.
pub fn transport_cost(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let plan = transport_plan(supply, demand, cost);
    plan.iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, f)| f * cost[i][j]))
        .sum()
}

/// Optimal flow matrix for [`transport_cost`].
pub fn transport_plan(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ns = supply.len();
    let nd = demand.len();
    assert_eq!(cost.len(), ns, "cost rows must match supply");
    assert!(
        cost.iter().all(|r| r.len() == nd),
        "cost columns must match demand"
    );

    let mut flow = vec![vec![0.0; nd]; ns];
    let mut rem_s: Vec<f64> = supply.to_vec();
    let mut rem_d: Vec<f64> = demand.to_vec();
    let total = supply.iter().sum::<f64>().min(demand.iter().sum::<f64>());
    let mut moved = 0.0;

    let mut dist_s = vec![f64::INFINITY; ns];
    let mut dist_d = vec![f64::INFINITY; nd];
    let mut pred_s: Vec<Option<usize>> = vec![None; ns];
    let mut pred_d: Vec<usize> = vec![0; nd];

    let max_augment = 4 * (ns + nd) * (ns + nd) + 16;
    for _ in 0..max_augment {
        if total - moved <= MASS_EPS * (ns + nd) as f64 {
            break;
        }
        for i in 0..ns {
            dist_s[i] = if rem_s[i] > MASS_EPS {
                0.0
            } else {
                f64::INFINITY
            };
            pred_s[i] = None;
        }
        dist_d.iter_mut().for_each(|d| *d = f64::INFINITY);

        for _ in 0..(ns + nd + 1) {
            let mut changed = false;
            for i in 0..ns {
                if !dist_s[i].is_finite() {
                    continue;
                }
                for j in 0..nd {
                    let cand = dist_s[i] + cost[i][j];
                    if cand < dist_d[j] - 1e-12 {
                        dist_d[j] = cand;
                        pred_d[j] = i;
                        changed = true;
                    }
                }
            }
            for j in 0..nd {
                if !dist_d[j].is_finite() {
                    continue;
                }
                for i in 0..ns {
                    if flow[i][j] > MASS_EPS {
                        let cand = dist_d[j] - cost[i][j];
                        if cand < dist_s[i] - 1e-12 {
                            dist_s[i] = cand;
                            pred_s[i] = Some(j);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let Some(end) = (0..nd)
            .filter(|&j| rem_d[j] > MASS_EPS && dist_d[j].is_finite())
            .min_by(|&a, &b| dist_d[a].total_cmp(&dist_d[b]))
        else {
            break;
        };

        // Walk back to the originating supply node, collecting the bottleneck.
        let mut bottleneck = rem_d[end];
        let mut j = end;
        let mut steps = 0;
        let start = loop {
            let i = pred_d[j];
            steps += 1;
            if steps > ns + nd {
                // predecessor cycle: numerically degenerate residual graph
                return flow;
            }
            match pred_s[i] {
                None => break i,
                Some(prev_j) => {
                    bottleneck = bottleneck.min(flow[i][prev_j]);
                    j = prev_j;
                }
            }
        };
        bottleneck = bottleneck.min(rem_s[start]);
        if bottleneck <= 0.0 {
            break;
        }

        let mut j = end;
        loop {
            let i = pred_d[j];
            flow[i][j] += bottleneck;
            match pred_s[i] {
                None => break,
                Some(prev_j) => {
                    flow[i][prev_j] -= bottleneck;
                    if flow[i][prev_j] < MASS_EPS {
                        flow[i][prev_j] = 0.0;
                    }
                    j = prev_j;
                }
            }
        }
        rem_s[start] -= bottleneck;
        rem_d[end] -= bottleneck;
        moved += bottleneck;
    }
    flow
}
