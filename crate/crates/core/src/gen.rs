//! Deterministic instance generators for tests and benchmarks.

use crate::graph::{GraphError, WeightedGraph};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    RandomGeneral { n: usize },
    RandomBipartite { n_left: usize, n_right: usize },
    /// Path of n vertices with alternating near-maximal weights; traps
    /// greedy-style choices.
    WorstPath { n: usize },
    /// Unit-weight odd cycle of length 2k+1 (the integrality-gap instance;
    /// its maximum matching weight is k).
    UnitOddCycle { k: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Builds an instance; identical arguments always yield identical graphs.
/// Weights are uniform on [1, n_weight] for the random kinds.
pub fn generate(kind: GenKind, m: usize, n_weight: i64, seed: u64) -> Result<WeightedGraph, GenError> {
    if n_weight < 1 {
        return Err(GenError::Infeasible("max weight must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GenKind::RandomGeneral { n } => {
            let cap = n.saturating_mul(n.saturating_sub(1)) / 2;
            if m > cap {
                return Err(GenError::Infeasible(format!("m = {m} > n(n-1)/2 = {cap}")));
            }
            let mut seen = std::collections::HashSet::new();
            let mut edges = Vec::with_capacity(m);
            while edges.len() < m {
                let u = rng.random_range(0..n);
                let v = rng.random_range(0..n);
                if u == v {
                    continue;
                }
                let key = (u.min(v), u.max(v));
                if seen.insert(key) {
                    edges.push((key.0, key.1, rng.random_range(1..=n_weight)));
                }
            }
            Ok(WeightedGraph::new(&edges, n, None)?)
        }
        GenKind::RandomBipartite { n_left, n_right } => {
            let cap = n_left.saturating_mul(n_right);
            if m > cap {
                return Err(GenError::Infeasible(format!("m = {m} > nl*nr = {cap}")));
            }
            let mut seen = std::collections::HashSet::new();
            let mut edges = Vec::with_capacity(m);
            while edges.len() < m {
                let l = rng.random_range(0..n_left);
                let r = n_left + rng.random_range(0..n_right);
                if seen.insert((l, r)) {
                    edges.push((l, r, rng.random_range(1..=n_weight)));
                }
            }
            Ok(WeightedGraph::new(&edges, n_left + n_right, Some(n_left))?)
        }
        GenKind::WorstPath { n } => {
            if n < 2 {
                return Err(GenError::Infeasible("worst-path needs n >= 2".into()));
            }
            let lo = (n_weight - 1).max(1);
            let edges: Vec<_> = (0..n - 1)
                .map(|j| (j, j + 1, if j % 2 == 0 { lo } else { n_weight }))
                .collect();
            Ok(WeightedGraph::new(&edges, n, None)?)
        }
        GenKind::UnitOddCycle { k } => {
            if k < 1 {
                return Err(GenError::Infeasible("odd cycle needs k >= 1".into()));
            }
            let n = 2 * k + 1;
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
            Ok(WeightedGraph::new(&edges, n, None)?)
        }
    }
}

/// Generates a random bipartite instance guaranteed to contain a perfect
/// matching: a hidden random permutation plus m extra random edges.
pub fn generate_with_perfect_matching(
    side: usize,
    extra: usize,
    n_weight: i64,
    seed: u64,
) -> Result<WeightedGraph, GenError> {
    if side == 0 {
        return Err(GenError::Infeasible("side must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..side).collect();
    perm.shuffle(&mut rng);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for (l, &r) in perm.iter().enumerate() {
        seen.insert((l, side + r));
        edges.push((l, side + r, rng.random_range(1..=n_weight)));
    }
    let cap = side * side;
    let want = (side + extra).min(cap);
    while edges.len() < want {
        let l = rng.random_range(0..side);
        let r = side + rng.random_range(0..side);
        if seen.insert((l, r)) {
            edges.push((l, r, rng.random_range(1..=n_weight)));
        }
    }
    Ok(WeightedGraph::new(&edges, 2 * side, Some(side))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_odd_cycle_shape() {
        let g = generate(GenKind::UnitOddCycle { k: 3 }, 0, 1, 0).unwrap();
        assert_eq!(g.n(), 7);
        assert_eq!(g.m(), 7);
        assert!(g.edges().iter().all(|e| e.w == 1));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = generate(GenKind::RandomBipartite { n_left: 4, n_right: 4 }, 8, 100, 42).unwrap();
        let b = generate(GenKind::RandomBipartite { n_left: 4, n_right: 4 }, 8, 100, 42).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn infeasible_m() {
        assert!(matches!(
            generate(GenKind::RandomGeneral { n: 4 }, 7, 10, 0),
            Err(GenError::Infeasible(_))
        ));
    }

    #[test]
    fn perfect_matching_instances_are_feasible() {
        for seed in 0..10 {
            let g = generate_with_perfect_matching(6, 10, 50, seed).unwrap();
            assert!(crate::oracle::brute_force_mwpm(&g).is_ok());
        }
    }
}
