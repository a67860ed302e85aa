//! Benchmark matrix: generators x sizes x eps, each solver timed and
//! cross-checked against an oracle where one is feasible. Rows come out as
//! tab-separated values. Instances are sharded across worker threads; each
//! worker owns its solver state outright.

use crate::approx::{self, ApproxConfig, ApproxMode};
use crate::exact::{self, ExactConfig};
use crate::gen::{generate, generate_with_perfect_matching, GenKind};
use crate::graph::WeightedGraph;
use crate::oracle;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub instance: String,
    pub solver: String,
    pub eps: Option<f64>,
    pub n: usize,
    pub m: usize,
    pub n_weight: i64,
    pub time_ms: f64,
    pub weight: i64,
    pub oracle_weight: Option<i64>,
    pub rounds: u64,
}

impl BenchRecord {
    pub fn tsv_header() -> &'static str {
        "instance\tsolver\teps\tn\tm\tN\ttime_ms\tweight\toracle_weight\tratio\trounds"
    }

    pub fn ratio(&self) -> Option<f64> {
        self.oracle_weight.map(|o| {
            if o == 0 {
                1.0
            } else {
                self.weight as f64 / o as f64
            }
        })
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}\t{}\t{}",
            self.instance,
            self.solver,
            self.eps.map_or("-".into(), |e| format!("{e}")),
            self.n,
            self.m,
            self.n_weight,
            self.time_ms,
            self.weight,
            self.oracle_weight.map_or("-".into(), |o| format!("{o}")),
            self.ratio().map_or("-".into(), |r| format!("{r:.6}")),
            self.rounds
        )
    }
}

struct Job {
    instance: String,
    graph: WeightedGraph,
    bipartite: bool,
    perfect_ok: bool,
}

fn build_jobs(seed: u64) -> Vec<Job> {
    let mut jobs = Vec::new();
    let sizes = [(12usize, 20usize), (120, 480), (1200, 4800)];
    for (idx, &(n, m)) in sizes.iter().enumerate() {
        let s = seed.wrapping_add(idx as u64);
        let g = generate(GenKind::RandomGeneral { n }, m, 1 << 16, s).unwrap();
        jobs.push(Job {
            instance: format!("random-general-n{n}-m{m}-s{s}"),
            graph: g,
            bipartite: false,
            perfect_ok: false,
        });
        let side = n / 2;
        let g = generate(
            GenKind::RandomBipartite { n_left: side, n_right: side },
            m.min(side * side),
            1 << 16,
            s,
        )
        .unwrap();
        jobs.push(Job {
            instance: format!("random-bipartite-n{n}-m{}-s{s}", m.min(side * side)),
            graph: g,
            bipartite: true,
            perfect_ok: false,
        });
        let g = generate_with_perfect_matching(side, m.min(side * side), 1 << 16, s).unwrap();
        jobs.push(Job {
            instance: format!("perfect-bipartite-n{n}-s{s}"),
            graph: g,
            bipartite: true,
            perfect_ok: true,
        });
        let g = generate(GenKind::WorstPath { n }, 0, 1 << 16, s).unwrap();
        jobs.push(Job {
            instance: format!("worst-path-n{n}"),
            graph: g,
            bipartite: false,
            perfect_ok: false,
        });
    }
    for k in [3usize, 50, 500] {
        let g = generate(GenKind::UnitOddCycle { k }, 0, 1, 0).unwrap();
        jobs.push(Job {
            instance: format!("unit-odd-cycle-k{k}"),
            graph: g,
            bipartite: false,
            perfect_ok: false,
        });
    }
    jobs
}

fn run_job(job: &Job, eps_list: &[f64]) -> Vec<BenchRecord> {
    let g = &job.graph;
    let oracle_weight = if g.is_bipartite() {
        Some(oracle::cubic_hungarian(g).unwrap().weight)
    } else if g.m() <= 24 {
        Some(oracle::brute_force_mwm(g).unwrap().weight)
    } else {
        None
    };
    let base = |solver: &str, eps: Option<f64>| BenchRecord {
        instance: job.instance.clone(),
        solver: solver.into(),
        eps,
        n: g.n(),
        m: g.m(),
        n_weight: g.weight_max(),
        time_ms: 0.0,
        weight: 0,
        oracle_weight,
        rounds: 0,
    };
    let mut rows = Vec::new();
    for &eps in eps_list {
        for (mode, name) in [(ApproxMode::LogN, "approx-logn"), (ApproxMode::Linear, "approx-linear")]
        {
            let t0 = Instant::now();
            let out = approx::run(g, eps, ApproxConfig { mode: Some(mode), ..Default::default() })
                .expect("approx solver failed");
            let mut row = base(name, Some(eps));
            row.time_ms = t0.elapsed().as_secs_f64() * 1e3;
            row.weight = out.matching.weight;
            row.rounds = out.stats.dual_adjustments.iter().sum();
            if let Some(o) = oracle_weight {
                assert!(
                    row.weight as f64 >= (1.0 - eps) * o as f64,
                    "{}: {name} eps {eps} missed the guarantee",
                    job.instance
                );
            }
            rows.push(row);
        }
    }
    if job.bipartite {
        let t0 = Instant::now();
        let out = exact::run_exact_mwm(g, ExactConfig::default()).expect("exact solver failed");
        let mut row = base("exact", None);
        row.time_ms = t0.elapsed().as_secs_f64() * 1e3;
        row.weight = out.matching.weight;
        row.rounds = out.stats.phase1_iterations
            + out.stats.phase2_rounds.iter().sum::<u64>()
            + out.stats.phase3_rounds;
        if let Some(o) = oracle_weight {
            assert_eq!(row.weight, o, "{}: exact disagrees with the oracle", job.instance);
        }
        rows.push(row);
        if job.perfect_ok {
            let t0 = Instant::now();
            let out =
                exact::run_exact_mwpm(g, ExactConfig::default()).expect("mwpm solver failed");
            let mut row = base("mwpm", None);
            row.time_ms = t0.elapsed().as_secs_f64() * 1e3;
            row.weight = out.matching.weight;
            row.rounds = out.stats.phase2_rounds.iter().sum::<u64>() + out.stats.phase3_rounds;
            rows.push(row);
        }
    }
    rows
}

/// Runs the whole matrix, sharding instances over `threads` workers.
pub fn run_bench(seed: u64, threads: usize) -> Vec<BenchRecord> {
    let jobs = build_jobs(seed);
    let eps_list = [0.5, 0.2, 0.1];
    let threads = threads.max(1);
    let mut results: Vec<(usize, Vec<BenchRecord>)> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let jobs = &jobs;
            let eps_list = &eps_list;
            handles.push(scope.spawn(move || {
                let mut out = Vec::new();
                let mut i = t;
                while i < jobs.len() {
                    out.push((i, run_job(&jobs[i], eps_list)));
                    i += threads;
                }
                out
            }));
        }
        for h in handles {
            results.extend(h.join().expect("bench worker panicked"));
        }
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().flat_map(|(_, rows)| rows).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_matrix_obeys_guarantees() {
        // a reduced matrix: every row's ratio respects its solver's bound
        let jobs = build_jobs(11);
        let rows = run_job(&jobs[0], &[0.2]);
        for row in &rows {
            if let Some(r) = row.ratio() {
                assert!(r <= 1.0 + 1e-9);
                match row.eps {
                    Some(eps) => assert!(r >= 1.0 - eps - 1e-9),
                    None => assert!((r - 1.0).abs() < 1e-9),
                }
            }
        }
    }
}
