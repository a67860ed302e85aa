//! Acceptance suite. One test per criterion; each prints a single
//! `criterion N: PASS/FAIL` line. The shared corpora run once (with the
//! invariant checkers enabled) and are consumed by several criteria.
//!
//! 1. approximation guarantee across both approximate modes
//! 2. exact bipartite weights equal the independent oracles
//! 3. zero invariant-checker violations over the full corpora
//! 4. round-count bounds per scale and phase
//! 5. wall-time scaling trends of the two approximate modes
//! 6. no under-weight edge ever becomes eligible before the last scale
//! 7. matching weight at every scale end is within 2 n delta_i of optimal
//! 8. the oracles agree with each other

use matchscale_core::approx::{self, ApproxConfig, ApproxMode};
use matchscale_core::exact::{self, ExactConfig};
use matchscale_core::gen::{generate, generate_with_perfect_matching, GenKind};
use matchscale_core::graph::WeightedGraph;
use matchscale_core::oracle;
use matchscale_core::scale::{make_scale_params, SolveMode};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

// serialize the criteria so the timing test is not distorted
static GATE: Mutex<()> = Mutex::new(());

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

struct ApproxRun {
    instance: usize,
    eps: f64,
    mode: ApproxMode,
    weight: i64,
    optimum: i64,
    dual_adjustments: Vec<u64>,
    eps_prime_log2: u32,
    levels: u32,
}

struct ExactRun {
    instance: usize,
    n: usize,
    weight: i64,
    oracle_weight: i64,
    phase2_rounds: Vec<u64>,
    phase3_augmentations: u64,
    phase3_rounds: u64,
    /// (scale, w(M) at scale end, delta_i raw, unit_log2)
    scale_ends: Vec<(u32, i64, i64, u32)>,
}

struct Corpus {
    approx_runs: Vec<ApproxRun>,
    approx_failures: Vec<String>,
    exact_runs: Vec<ExactRun>,
    exact_failures: Vec<String>,
    mwpm_checked: usize,
    invariant_violations: Vec<String>,
    floor_violations: Vec<String>,
    greedy_failures: Vec<String>,
}

const GENERAL_INSTANCES: usize = 500;
const BIPARTITE_INSTANCES: usize = 300;
const PERFECT_INSTANCES: usize = 100;
const EPS_LIST: [f64; 4] = [0.5, 0.2, 0.1, 0.05];

fn general_instance(seed: u64) -> WeightedGraph {
    let n = 4 + (seed as usize * 13) % 11; // 4..=14
    let cap = n * (n - 1) / 2;
    let m = (1 + (seed as usize * 7) % 24).min(cap); // <= 24
    generate(GenKind::RandomGeneral { n }, m, 64, seed).unwrap()
}

fn bipartite_instance(seed: u64) -> WeightedGraph {
    let nl = 1 + (seed as usize * 11) % 50;
    let nr = 1 + (seed as usize * 17) % 50;
    let m = 1 + (seed as usize * 23) % (nl * nr).min(600);
    generate(GenKind::RandomBipartite { n_left: nl, n_right: nr }, m, 1_000_000, seed).unwrap()
}

fn classify_invariant(msg: &str, seed: u64, what: &str, corpus: &mut Corpus) {
    let line = format!("{what} seed {seed}: {msg}");
    if msg.contains("weight-in-scale floor") {
        corpus.floor_violations.push(line);
    } else {
        corpus.invariant_violations.push(line);
    }
}

fn build_corpus() -> Corpus {
    let mut corpus = Corpus {
        approx_runs: Vec::new(),
        approx_failures: Vec::new(),
        exact_runs: Vec::new(),
        exact_failures: Vec::new(),
        mwpm_checked: 0,
        invariant_violations: Vec::new(),
        floor_violations: Vec::new(),
        greedy_failures: Vec::new(),
    };
    // criterion 1/3/4/6/8 corpus: small general graphs with a brute-force
    // optimum, both modes, all eps, checkers on
    for seed in 0..GENERAL_INSTANCES as u64 {
        let g = general_instance(seed);
        let optimum = oracle::brute_force_mwm(&g).unwrap().weight;
        let greedy = oracle::greedy_half(&g).weight;
        if 2 * greedy < optimum {
            corpus
                .greedy_failures
                .push(format!("seed {seed}: greedy {greedy} vs optimum {optimum}"));
        }
        for &eps in &EPS_LIST {
            for mode in [ApproxMode::LogN, ApproxMode::Linear] {
                let config =
                    ApproxConfig { mode: Some(mode), check_invariants: true, trace: None };
                match approx::run(&g, eps, config) {
                    Ok(out) => {
                        out.matching.validate(&g).unwrap();
                        if (out.matching.weight as f64) < (1.0 - eps) * optimum as f64 {
                            corpus.approx_failures.push(format!(
                                "seed {seed} mode {mode:?} eps {eps}: {} < (1-eps)*{optimum}",
                                out.matching.weight
                            ));
                        }
                        let params =
                            make_scale_params(g.weight_max(), eps, SolveMode::Approx, g.n())
                                .unwrap();
                        corpus.approx_runs.push(ApproxRun {
                            instance: seed as usize,
                            eps,
                            mode,
                            weight: out.matching.weight,
                            optimum,
                            dual_adjustments: out.stats.dual_adjustments,
                            eps_prime_log2: params.eps_prime_log2,
                            levels: params.levels,
                        });
                    }
                    Err(approx::ApproxError::Invariant(msg)) => {
                        classify_invariant(&msg, seed, &format!("approx {mode:?} eps {eps}"), &mut corpus)
                    }
                    Err(e) => corpus.approx_failures.push(format!("seed {seed}: {e}")),
                }
            }
        }
    }
    // criterion 2/3/4/7 corpus: bipartite instances against the Hungarian
    // oracle, checkers on
    for seed in 0..BIPARTITE_INSTANCES as u64 {
        let g = bipartite_instance(seed);
        let oracle_weight = oracle::cubic_hungarian(&g).unwrap().weight;
        let config = ExactConfig { check_invariants: true, trace: None };
        match exact::run_exact_mwm(&g, config) {
            Ok(out) => {
                out.matching.validate(&g).unwrap();
                if out.matching.weight != oracle_weight {
                    corpus.exact_failures.push(format!(
                        "seed {seed}: exact {} != hungarian {oracle_weight}",
                        out.matching.weight
                    ));
                }
                let params =
                    make_scale_params(g.weight_max(), 0.0, SolveMode::ExactMwm, g.n()).unwrap();
                let scale_ends = out
                    .stats
                    .scale_end_weights
                    .iter()
                    .map(|&(i, w)| (i, w, params.delta_raw(i), params.unit_log2))
                    .collect();
                corpus.exact_runs.push(ExactRun {
                    instance: seed as usize,
                    n: g.n(),
                    weight: out.matching.weight,
                    oracle_weight,
                    phase2_rounds: out.stats.phase2_rounds,
                    phase3_augmentations: out.stats.phase3_augmentations,
                    phase3_rounds: out.stats.phase3_rounds,
                    scale_ends,
                });
            }
            Err(exact::ExactError::Invariant(msg)) => {
                classify_invariant(&msg, seed, "exact", &mut corpus)
            }
            Err(e) => corpus.exact_failures.push(format!("seed {seed}: {e}")),
        }
    }
    // perfect-matching instances against the permutation oracle
    for seed in 0..PERFECT_INSTANCES as u64 {
        let side = 2 + (seed as usize * 7) % 9; // <= 10 for the oracle
        let g = generate_with_perfect_matching(side, 2 * side, 1000, seed).unwrap();
        let oracle_weight = oracle::brute_force_mwpm(&g).unwrap().weight;
        let config = ExactConfig { check_invariants: true, trace: None };
        match exact::run_exact_mwpm(&g, config) {
            Ok(out) => {
                corpus.mwpm_checked += 1;
                if out.matching.weight != oracle_weight {
                    corpus.exact_failures.push(format!(
                        "mwpm seed {seed}: {} != oracle {oracle_weight}",
                        out.matching.weight
                    ));
                }
                if out.matching.size != side {
                    corpus
                        .exact_failures
                        .push(format!("mwpm seed {seed}: matching not perfect"));
                }
            }
            Err(exact::ExactError::Invariant(msg)) => {
                classify_invariant(&msg, seed, "mwpm", &mut corpus)
            }
            Err(e) => corpus.exact_failures.push(format!("mwpm seed {seed}: {e}")),
        }
    }
    corpus
}

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(build_corpus)
}

fn report(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("criterion {criterion}: PASS");
    } else {
        println!(
            "criterion {criterion}: FAIL ({} violations, first: {})",
            failures.len(),
            failures[0]
        );
    }
    assert!(failures.is_empty(), "criterion {criterion} failed: {}", failures[0]);
}

#[test]
fn criterion1_approximation_guarantee() {
    let _g = gate();
    let t0 = Instant::now();
    let c = corpus();
    let runs = c.approx_runs.len() + c.approx_failures.len();
    assert!(
        runs >= GENERAL_INSTANCES * EPS_LIST.len() * 2 - c.invariant_violations.len(),
        "corpus too small"
    );
    println!(
        "criterion 1: {} approximate runs over {GENERAL_INSTANCES} instances in {:.1}s",
        runs,
        t0.elapsed().as_secs_f64()
    );
    report("1 (approximation guarantee)", &c.approx_failures);
}

#[test]
fn criterion2_exact_bipartite_correctness() {
    let _g = gate();
    let c = corpus();
    assert!(c.exact_runs.len() + c.exact_failures.len() >= BIPARTITE_INSTANCES);
    assert!(c.mwpm_checked + c.exact_failures.len() >= PERFECT_INSTANCES);
    report("2 (exact bipartite correctness)", &c.exact_failures);
}

#[test]
fn criterion3_invariant_suite() {
    let _g = gate();
    let c = corpus();
    report("3 (invariant suite)", &c.invariant_violations);
}

#[test]
fn criterion4_round_count_bounds() {
    let _g = gate();
    let c = corpus();
    let mut failures = Vec::new();
    // approximate solver: exactly eps'^-1/2 dual adjustments per scale i < L
    // and fewer than eps'^-1 at scale L
    for run in &c.approx_runs {
        let half_inv = 1u64 << (run.eps_prime_log2 - 1);
        let l = run.levels as usize;
        for (i, &count) in run.dual_adjustments.iter().enumerate() {
            if i < l && count != half_inv {
                failures.push(format!(
                    "approx instance {} eps {}: scale {i} ran {count} adjustments, expected {half_inv}",
                    run.instance, run.eps
                ));
            }
            if i == l && count >= 2 * half_inv {
                failures.push(format!(
                    "approx instance {} eps {}: last scale ran {count} >= {}",
                    run.instance,
                    run.eps,
                    2 * half_inv
                ));
            }
        }
    }
    let approx_fail_count = failures.len();
    // exact solver: Phase II rounds <= 4 sqrt(2n) per scale, Phase III
    // augmentations <= sqrt(n) and rounds <= 2 sqrt(2n)
    for run in &c.exact_runs {
        let n = run.n as f64;
        let p2 = 4.0 * (2.0 * n).sqrt();
        for (i, &r) in run.phase2_rounds.iter().enumerate() {
            if r as f64 > p2 {
                failures.push(format!(
                    "exact instance {}: scale {i} ran {r} rounds > 4 sqrt(2n)",
                    run.instance
                ));
            }
        }
        if run.phase3_augmentations as f64 > n.sqrt() + 1e-9 {
            failures.push(format!(
                "exact instance {}: {} phase III augmentations > sqrt(n)",
                run.instance, run.phase3_augmentations
            ));
        }
        if run.phase3_rounds as f64 > 2.0 * (2.0 * n).sqrt() {
            failures.push(format!(
                "exact instance {}: {} phase III rounds > 2 sqrt(2n)",
                run.instance, run.phase3_rounds
            ));
        }
    }
    if approx_fail_count > 0 {
        println!(
            "criterion 4 note: the approximate clause fails by one adjustment per middle scale; \
             the initialization y = N/2 - delta_0/2 plus the end-of-scale increment delta_(i+1) \
             (both required to keep relaxed complementary slackness) force eps'^-1/2 + 1 \
             adjustments at scales 1..L-1 and exactly eps'^-1 at scale L"
        );
    }
    report("4 (round-count bounds)", &failures);
}

#[test]
fn criterion5_scaling_trends() {
    let _g = gate();
    // linear mode: doubling m (with n = m/4) at fixed eps may grow the
    // median wall time by at most 2.5x per doubling
    let eps = 0.1;
    let reps = 5;
    let sizes = [100_000usize, 200_000, 400_000];
    let graphs: Vec<WeightedGraph> = sizes
        .iter()
        .map(|&m| generate(GenKind::RandomGeneral { n: m / 4 }, m, 1 << 16, 42).unwrap())
        .collect();
    let mut times = vec![Vec::new(); sizes.len()];
    for _ in 0..reps {
        for (i, g) in graphs.iter().enumerate() {
            let t0 = Instant::now();
            let out = approx::run(
                g,
                eps,
                ApproxConfig { mode: Some(ApproxMode::Linear), ..Default::default() },
            )
            .unwrap();
            times[i].push(t0.elapsed().as_secs_f64());
            assert!(out.matching.weight > 0);
        }
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let med: Vec<f64> = times.iter_mut().map(median).collect();
    let mut failures = Vec::new();
    for i in 1..med.len() {
        let factor = med[i] / med[i - 1];
        println!(
            "criterion 5: linear mode m = {} median {:.3}s (factor {:.2})",
            sizes[i], med[i], factor
        );
        if factor > 2.5 {
            failures.push(format!(
                "linear-mode doubling factor {factor:.2} > 2.5 at m = {}",
                sizes[i]
            ));
        }
    }
    // log-N mode: time grows at most proportionally to log N across
    // N = 2^8, 2^16, 2^24 at fixed m
    let m = 100_000usize;
    let n = m / 4;
    let ngraphs: Vec<WeightedGraph> = [8u32, 16, 24]
        .iter()
        .map(|&b| generate(GenKind::RandomGeneral { n }, m, 1i64 << b, 7).unwrap())
        .collect();
    let mut ntimes = vec![Vec::new(); ngraphs.len()];
    for _ in 0..reps {
        for (i, g) in ngraphs.iter().enumerate() {
            let t0 = Instant::now();
            approx::run(
                g,
                eps,
                ApproxConfig { mode: Some(ApproxMode::LogN), ..Default::default() },
            )
            .unwrap();
            ntimes[i].push(t0.elapsed().as_secs_f64());
        }
    }
    let nmed: Vec<f64> = ntimes.iter_mut().map(median).collect();
    for i in 1..nmed.len() {
        let factor = nmed[i] / nmed[i - 1];
        println!(
            "criterion 5: logN mode N = 2^{} median {:.3}s (factor {:.2})",
            8 * (i + 1),
            nmed[i],
            factor
        );
        if factor > 2.5 {
            failures.push(format!("logN-mode factor {factor:.2} > 2.5 step {i}"));
        }
    }
    report("5 (scaling trends)", &failures);
}

#[test]
fn criterion6_weight_in_scale_floor() {
    let _g = gate();
    let c = corpus();
    report("6 (eligible-edge weight floor)", &c.floor_violations);
}

#[test]
fn criterion7_scale_end_quality() {
    let _g = gate();
    let c = corpus();
    let mut failures = Vec::new();
    for run in &c.exact_runs {
        for &(i, w, delta_raw, unit_log2) in &run.scale_ends {
            // w(M) >= w(M*) - 2 n delta_i, compared in raw units
            let lhs = (run.oracle_weight - w) << unit_log2;
            let rhs = 2 * run.n as i64 * delta_raw;
            if lhs > rhs {
                failures.push(format!(
                    "instance {}: scale {i} ended {} below optimum, allowed 2n delta_i = {} raw",
                    run.instance,
                    run.oracle_weight - w,
                    rhs
                ));
            }
        }
        if run.weight != run.oracle_weight {
            failures.push(format!("instance {}: final weight off", run.instance));
        }
    }
    report("7 (scale-end quality)", &failures);
}

#[test]
fn criterion8_oracle_cross_validation() {
    let _g = gate();
    let c = corpus();
    let mut failures = c.greedy_failures.clone();
    for seed in 1000..1200u64 {
        let nl = 1 + (seed as usize) % 8;
        let nr = 1 + (seed as usize * 3) % 8;
        let m = (1 + (seed as usize * 5) % (nl * nr)).min(14);
        let g = generate(GenKind::RandomBipartite { n_left: nl, n_right: nr }, m, 50, seed)
            .unwrap();
        let bf = oracle::brute_force_mwm(&g).unwrap().weight;
        let hu = oracle::cubic_hungarian(&g).unwrap().weight;
        if bf != hu {
            failures.push(format!("seed {seed}: brute {bf} != hungarian {hu}"));
        }
    }
    report("8 (oracle cross-validation)", &failures);
}
