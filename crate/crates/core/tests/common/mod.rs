//! Shared helpers for integration tests: random instances, an independent
//! LP oracle for transportation problems and color-difference test data.
#![allow(dead_code)]

mod de2000_pairs;

#[allow(unused_imports)]
pub use de2000_pairs::DE2000_PAIRS;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use pcdm_core::naming::{ColorDescriptor, GroundDistanceMatrix};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_descriptor<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> ColorDescriptor {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| if rng.random::<f64>() < zero_prob { 0.0 } else { rng.random::<f64>() })
            .collect();
        if w.iter().any(|v| *v > 0.0) {
            return ColorDescriptor::normalized(w).unwrap();
        }
    }
}

pub fn random_ground<R: Rng>(rng: &mut R, n: usize) -> GroundDistanceMatrix {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.random();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    GroundDistanceMatrix::new(n, d).unwrap()
}

/// Minimum transport cost from a generic LP solver over all `m × n` flows.
pub fn lp_transport_cost(supply: &[f64], demand: &[f64], cost: &[f64]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = cost
        .iter()
        .map(|&c| problem.add_var(c, (0.0, f64::INFINITY)))
        .collect();
    for i in 0..m {
        let row: Vec<_> = (0..n).map(|j| (vars[i * n + j], 1.0)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, supply[i]);
    }
    // The last column constraint is implied by the others.
    for j in 0..n - 1 {
        let col: Vec<_> = (0..m).map(|i| (vars[i * n + j], 1.0)).collect();
        problem.add_constraint(&col, ComparisonOp::Eq, demand[j]);
    }
    problem.solve().expect("transport LP is feasible").objective()
}

/// A feasible flow built as a random convex mix of two greedy vertex flows
/// obtained under random row/column orderings.
pub fn random_feasible_flow<R: Rng>(rng: &mut R, supply: &[f64], demand: &[f64]) -> Vec<f64> {
    let a = greedy_flow(rng, supply, demand);
    let b = greedy_flow(rng, supply, demand);
    let t: f64 = rng.random();
    a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect()
}

fn greedy_flow<R: Rng>(rng: &mut R, supply: &[f64], demand: &[f64]) -> Vec<f64> {
    let (m, n) = (supply.len(), demand.len());
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut flow = vec![0.0; m * n];
    let (mut ri, mut ci) = (0, 0);
    while ri < m && ci < n {
        let (i, j) = (rows[ri], cols[ci]);
        let x = s[i].min(d[j]);
        flow[i * n + j] += x;
        s[i] -= x;
        d[j] -= x;
        if s[i] <= d[j] {
            ri += 1;
        } else {
            ci += 1;
        }
    }
    flow
}
