//! Independent oracles the solvers are validated against: exponential
//! enumeration, a cubic Hungarian solver for bipartite graphs, and the
//! greedy 1/2-approximation.

use crate::graph::{Matching, WeightedGraph};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for this oracle ({0})")]
    TooLarge(String),
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("bipartition sides differ ({0} vs {1})")]
    UnequalSides(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    BruteForce,
    CubicHungarian,
    Greedy,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub weight: i64,
    pub matching: Matching,
    pub method: OracleMethod,
}

const BRUTE_FORCE_MAX_EDGES: usize = 26;
const PERM_MAX_SIDE: usize = 10;

/// Exact maximum weight matching by branching on every edge, with an
/// optimistic suffix-sum bound to prune hopeless branches.
pub fn brute_force_mwm(g: &WeightedGraph) -> Result<OracleResult, OracleError> {
    if g.m() > BRUTE_FORCE_MAX_EDGES {
        return Err(OracleError::TooLarge(format!(
            "{} edges exceeds brute-force limit {}",
            g.m(),
            BRUTE_FORCE_MAX_EDGES
        )));
    }
    let mut edges: Vec<usize> = (0..g.m()).collect();
    edges.sort_by_key(|&e| std::cmp::Reverse(g.edge(e).w));
    let mut suffix = vec![0i64; edges.len() + 1];
    for i in (0..edges.len()).rev() {
        suffix[i] = suffix[i + 1] + g.edge(edges[i]).w;
    }
    struct Search<'a> {
        g: &'a WeightedGraph,
        edges: &'a [usize],
        suffix: &'a [i64],
        used: Vec<bool>,
        chosen: Vec<usize>,
        best: i64,
        best_set: Vec<usize>,
    }
    impl Search<'_> {
        fn go(&mut self, idx: usize, cur: i64) {
            if cur > self.best {
                self.best = cur;
                self.best_set = self.chosen.clone();
            }
            if idx == self.edges.len() || cur + self.suffix[idx] <= self.best {
                return;
            }
            let e = self.edges[idx];
            let edge = self.g.edge(e);
            if !self.used[edge.u] && !self.used[edge.v] {
                self.used[edge.u] = true;
                self.used[edge.v] = true;
                self.chosen.push(e);
                self.go(idx + 1, cur + edge.w);
                self.chosen.pop();
                self.used[edge.u] = false;
                self.used[edge.v] = false;
            }
            self.go(idx + 1, cur);
        }
    }
    let mut s = Search {
        g,
        edges: &edges,
        suffix: &suffix,
        used: vec![false; g.n()],
        chosen: Vec::new(),
        best: 0,
        best_set: Vec::new(),
    };
    s.go(0, 0);
    let mut mate_edge = vec![None; g.n()];
    for &e in &s.best_set {
        mate_edge[g.edge(e).u] = Some(e);
        mate_edge[g.edge(e).v] = Some(e);
    }
    Ok(OracleResult {
        weight: s.best,
        matching: Matching::from_mate_edges(g, &mate_edge),
        method: OracleMethod::BruteForce,
    })
}

/// Exact maximum weight perfect matching on an equal-sided bipartite graph
/// by enumerating permutations, branch-and-bound style.
pub fn brute_force_mwpm(g: &WeightedGraph) -> Result<OracleResult, OracleError> {
    let n_left = g.n_left().ok_or(OracleError::NotBipartite)?;
    let n_right = g.n() - n_left;
    if n_left != n_right {
        return Err(OracleError::UnequalSides(n_left, n_right));
    }
    if n_left > PERM_MAX_SIDE {
        return Err(OracleError::TooLarge(format!(
            "side {} exceeds permutation limit {}",
            n_left, PERM_MAX_SIDE
        )));
    }
    // weight matrix, None where no edge exists
    let mut w = vec![vec![None; n_right]; n_left];
    for e in 0..g.m() {
        let edge = g.edge(e);
        let (l, r) = if g.is_left(edge.u) { (edge.u, edge.v) } else { (edge.v, edge.u) };
        w[l][r - n_left] = Some((edge.w, e));
    }
    let mut best: Option<i64> = None;
    let mut best_perm = vec![usize::MAX; n_left];
    let mut perm = vec![usize::MAX; n_left];
    let mut used = vec![false; n_right];
    fn go(
        l: usize,
        cur: i64,
        w: &[Vec<Option<(i64, usize)>>],
        used: &mut [bool],
        perm: &mut [usize],
        best: &mut Option<i64>,
        best_perm: &mut [usize],
    ) {
        let n = w.len();
        if l == n {
            if best.is_none() || cur > best.unwrap() {
                *best = Some(cur);
                best_perm.copy_from_slice(perm);
            }
            return;
        }
        for r in 0..n {
            if used[r] {
                continue;
            }
            if let Some((wt, _)) = w[l][r] {
                used[r] = true;
                perm[l] = r;
                go(l + 1, cur + wt, w, used, perm, best, best_perm);
                used[r] = false;
            }
        }
    }
    go(0, 0, &w, &mut used, &mut perm, &mut best, &mut best_perm);
    let weight = best.ok_or(OracleError::NoPerfectMatching)?;
    let mut mate_edge = vec![None; g.n()];
    for l in 0..n_left {
        let (_, e) = w[l][best_perm[l]].unwrap();
        mate_edge[g.edge(e).u] = Some(e);
        mate_edge[g.edge(e).v] = Some(e);
    }
    Ok(OracleResult {
        weight,
        matching: Matching::from_mate_edges(g, &mate_edge),
        method: OracleMethod::BruteForce,
    })
}

/// Exact maximum weight matching on a bipartite graph via n successive
/// shortest-path augmentations over the reduced-cost graph (the classic
/// O(n^3) Hungarian scheme on a zero-padded square matrix; zero-weight
/// padding cells let vertices go unmatched, so the assignment optimum is
/// the maximum weight matching).
pub fn cubic_hungarian(g: &WeightedGraph) -> Result<OracleResult, OracleError> {
    let n_left = g.n_left().ok_or(OracleError::NotBipartite)?;
    let n_right = g.n() - n_left;
    let dim = n_left.max(n_right).max(1);
    // value[i][j] >= 0; pad with zeros. Convert to costs for minimization.
    let mut value = vec![vec![0i64; dim]; dim];
    let mut edge_of = vec![vec![None; dim]; dim];
    for e in 0..g.m() {
        let edge = g.edge(e);
        let (l, r) = if g.is_left(edge.u) { (edge.u, edge.v) } else { (edge.v, edge.u) };
        let (i, j) = (l, r - n_left);
        if edge.w > value[i][j] {
            value[i][j] = edge.w;
            edge_of[i][j] = Some(e);
        }
    }
    let max_v = value.iter().flatten().copied().max().unwrap_or(0);
    let cost = |i: usize, j: usize| max_v - value[i][j];

    // shortest augmenting path assignment with potentials (1-indexed rows)
    const INF: i64 = i64::MAX / 4;
    let n = dim;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j (0 = none)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
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
    let mut mate_edge = vec![None; g.n()];
    let mut weight = 0i64;
    for j in 1..=n {
        let i = p[j];
        if i == 0 {
            continue;
        }
        if let Some(e) = edge_of[i - 1][j - 1] {
            weight += g.edge(e).w;
            mate_edge[g.edge(e).u] = Some(e);
            mate_edge[g.edge(e).v] = Some(e);
        }
    }
    Ok(OracleResult {
        weight,
        matching: Matching::from_mate_edges(g, &mate_edge),
        method: OracleMethod::CubicHungarian,
    })
}

/// Greedy heaviest-edge-first matching; guarantees at least half the
/// optimum weight.
pub fn greedy_half(g: &WeightedGraph) -> OracleResult {
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by_key(|&e| (std::cmp::Reverse(g.edge(e).w), e));
    let mut mate_edge: Vec<Option<usize>> = vec![None; g.n()];
    let mut weight = 0i64;
    for e in order {
        let edge = g.edge(e);
        if mate_edge[edge.u].is_none() && mate_edge[edge.v].is_none() {
            mate_edge[edge.u] = Some(e);
            mate_edge[edge.v] = Some(e);
            weight += edge.w;
        }
    }
    OracleResult {
        weight,
        matching: Matching::from_mate_edges(g, &mate_edge),
        method: OracleMethod::Greedy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenKind};

    fn path(weights: &[i64]) -> WeightedGraph {
        let edges: Vec<_> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| (i, i + 1, w))
            .collect();
        WeightedGraph::new(&edges, weights.len() + 1, None).unwrap()
    }

    #[test]
    fn brute_empty() {
        let g = WeightedGraph::new(&[], 3, None).unwrap();
        assert_eq!(brute_force_mwm(&g).unwrap().weight, 0);
    }

    #[test]
    fn brute_path_131() {
        // middle edge beats the two ends
        let r = brute_force_mwm(&path(&[1, 3, 1])).unwrap();
        assert_eq!(r.weight, 3);
        r.matching.validate(&path(&[1, 3, 1])).unwrap();
    }

    #[test]
    fn brute_unit_odd_cycle() {
        // unit-weight cycle of length 2k+1 has maximum matching weight k
        for k in 1..=3usize {
            let g = generate(GenKind::UnitOddCycle { k }, 0, 1, 0).unwrap();
            assert_eq!(brute_force_mwm(&g).unwrap().weight, k as i64);
        }
    }

    #[test]
    fn brute_path_454() {
        assert_eq!(brute_force_mwm(&path(&[4, 5, 4])).unwrap().weight, 8);
    }

    #[test]
    fn mwpm_single_edge() {
        let g = WeightedGraph::new(&[(0, 1, 9)], 2, Some(1)).unwrap();
        assert_eq!(brute_force_mwpm(&g).unwrap().weight, 9);
    }

    #[test]
    fn mwpm_two_by_two() {
        // weights (l1r1)=3 (l1r2)=1 (l2r1)=2 (l2r2)=4: perfect optimum 3+4=7
        let g = WeightedGraph::new(&[(0, 2, 3), (0, 3, 1), (1, 2, 2), (1, 3, 4)], 4, Some(2))
            .unwrap();
        assert_eq!(brute_force_mwpm(&g).unwrap().weight, 7);
    }

    #[test]
    fn mwpm_infeasible() {
        // both permutations blocked
        let g = WeightedGraph::new(&[(0, 2, 3), (1, 2, 2)], 4, Some(2)).unwrap();
        assert!(matches!(brute_force_mwpm(&g), Err(OracleError::NoPerfectMatching)));
    }

    #[test]
    fn hungarian_single_edge() {
        let g = WeightedGraph::new(&[(0, 1, 5)], 2, Some(1)).unwrap();
        let r = cubic_hungarian(&g).unwrap();
        assert_eq!(r.weight, 5);
        r.matching.validate(&g).unwrap();
    }

    #[test]
    fn hungarian_diag_matrix() {
        // diag(9,9,9) with off-diagonal 1: optimum takes the diagonal
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                edges.push((i, 3 + j, if i == j { 9 } else { 1 }));
            }
        }
        let g = WeightedGraph::new(&edges, 6, Some(3)).unwrap();
        assert_eq!(cubic_hungarian(&g).unwrap().weight, 27);
        assert_eq!(brute_force_mwm(&g).unwrap().weight, 27);
    }

    #[test]
    fn hungarian_mwm_not_perfect() {
        // r1 can only be used once; optimum leaves l2 free
        let g = WeightedGraph::new(&[(0, 2, 10), (1, 2, 1)], 4, Some(2)).unwrap();
        assert_eq!(cubic_hungarian(&g).unwrap().weight, 10);
    }

    #[test]
    fn hungarian_matches_brute_force_random() {
        // 100 random bipartite instances, n <= 8 per side
        for seed in 0..100u64 {
            let nl = 1 + (seed as usize * 7) % 4;
            let nr = 1 + (seed as usize * 5) % 4;
            let m = 1 + (seed as usize) % (nl * nr);
            let g = generate(
                GenKind::RandomBipartite { n_left: nl, n_right: nr },
                m,
                20,
                seed,
            )
            .unwrap();
            let bf = brute_force_mwm(&g).unwrap();
            let hu = cubic_hungarian(&g).unwrap();
            assert_eq!(bf.weight, hu.weight, "seed {seed}");
            hu.matching.validate(&g).unwrap();
        }
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_half(&path(&[1, 3, 1])).weight, 3);
        // greedy takes the 3 and blocks both 2s; optimum is 4
        assert_eq!(greedy_half(&path(&[2, 3, 2])).weight, 3);
        assert_eq!(brute_force_mwm(&path(&[2, 3, 2])).unwrap().weight, 4);
        let g = WeightedGraph::new(&[(0, 1, 5)], 2, None).unwrap();
        assert_eq!(greedy_half(&g).weight, 5);
    }

    #[test]
    fn greedy_half_guarantee_random() {
        for seed in 0..60u64 {
            let n = 4 + (seed as usize) % 7;
            let m = (n * (n - 1) / 2).min(3 + (seed as usize) % 12);
            let g = generate(GenKind::RandomGeneral { n }, m, 30, seed).unwrap();
            let opt = brute_force_mwm(&g).unwrap().weight;
            let gr = greedy_half(&g).weight;
            assert!(2 * gr >= opt, "seed {seed}: greedy {gr} vs opt {opt}");
        }
    }
}
