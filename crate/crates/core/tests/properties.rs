//! Cross-cutting properties: the real-weight reduction is sound against
//! brute force, truncation behaves on the whole grid, and the instance
//! format round-trips.

use matchscale_core::gen::{generate, GenKind};
use matchscale_core::graph::{normalize_real_weights, WeightedGraph};
use matchscale_core::io::{emit_instance, parse_instance};
use matchscale_core::oracle::brute_force_mwm;
use matchscale_core::scale::truncated_weight;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Brute-force maximum weight matching over real weights, by enumerating
/// edge subsets (the instances stay tiny).
fn brute_real(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    fn go(idx: usize, used: &mut Vec<bool>, edges: &[(usize, usize, f64)], cur: f64) -> f64 {
        if idx == edges.len() {
            return cur;
        }
        let mut best = go(idx + 1, used, edges, cur);
        let (u, v, w) = edges[idx];
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            best = best.max(go(idx + 1, used, edges, cur + w));
            used[u] = false;
            used[v] = false;
        }
        best
    }
    go(0, &mut vec![false; n], edges, 0.0)
}

#[test]
fn normalization_preserves_approximation() {
    // any (1 - eps/2)-approximation of the scaled integer instance is a
    // (1 - eps)-approximation of the original; with the exact optimum of the
    // integer instance the rescaled weight must clear (1 - eps) times the
    // real optimum
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let n = 2 + (trial % 9);
        let m_max = n * (n - 1) / 2;
        let m = 1 + (trial * 7) % m_max.min(12);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::new();
        while edges.len() < m {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v && seen.insert((u.min(v), u.max(v))) {
                edges.push((u.min(v), u.max(v), rng.random_range(0.01..100.0f64)));
            }
        }
        let eps = [0.5, 0.3, 0.1][trial % 3];
        let real_opt = brute_real(n, &edges);
        let (g, gamma) = normalize_real_weights(&edges, n, eps).unwrap();
        let int_opt = brute_force_mwm(&g).unwrap().weight;
        let rescaled = gamma * int_opt as f64;
        assert!(
            rescaled >= (1.0 - eps) * real_opt - 1e-9,
            "trial {trial}: {rescaled} < (1 - {eps}) * {real_opt}"
        );
        assert!(rescaled <= real_opt + 1e-9);
    }
}

proptest! {
    #[test]
    fn truncation_monotone_idempotent_two_valued(w in 1i64..100_000, k in 0u32..12) {
        let d = 1i64 << k;
        let t = truncated_weight(w, d);
        prop_assert!(t <= w && w - t < d);
        prop_assert_eq!(truncated_weight(t, d), t);
        prop_assert!(truncated_weight(w + 1, d) >= t);
        if k > 0 {
            let finer = truncated_weight(w, d / 2);
            prop_assert!(finer == t || finer == t + d / 2);
        }
    }

    #[test]
    fn parse_emit_identity(seed in 0u64..500, n in 2usize..12, bip in proptest::bool::ANY) {
        let kind = if bip {
            GenKind::RandomBipartite { n_left: n / 2 + 1, n_right: n / 2 + 1 }
        } else {
            GenKind::RandomGeneral { n }
        };
        let cap = if bip { (n / 2 + 1) * (n / 2 + 1) } else { n * (n - 1) / 2 };
        let g = generate(kind, cap.min(1 + seed as usize % 9), 1000, seed).unwrap();
        let g2 = parse_instance(&emit_instance(&g)).unwrap();
        prop_assert_eq!(g.edges(), g2.edges());
        prop_assert_eq!(g.n(), g2.n());
        prop_assert_eq!(g.n_left(), g2.n_left());
    }
}

#[test]
fn fixed_point_closure_under_solvers() {
    // every dual produced by a checked run is on the granularity grid; the
    // checkers would reject otherwise, so a checked run passing is the test
    use matchscale_core::approx::{self, ApproxConfig, ApproxMode};
    use matchscale_core::exact::{self, ExactConfig};
    for seed in 0..20u64 {
        let g = generate(GenKind::RandomGeneral { n: 10 }, 16, 37, seed).unwrap();
        for mode in [ApproxMode::LogN, ApproxMode::Linear] {
            approx::run(
                &g,
                0.2,
                ApproxConfig { mode: Some(mode), check_invariants: true, trace: None },
            )
            .unwrap();
        }
        let bg = generate(
            GenKind::RandomBipartite { n_left: 6, n_right: 6 },
            14,
            37,
            seed,
        )
        .unwrap();
        exact::run_exact_mwm(&bg, ExactConfig { check_invariants: true, trace: None }).unwrap();
    }
}

#[test]
fn bipartite_instances_reject_cross_edges() {
    assert!(WeightedGraph::new(&[(0, 1, 3)], 4, Some(2)).is_err());
}
