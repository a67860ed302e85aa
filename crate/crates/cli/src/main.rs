//! Command-line front end: solve DIMACS-style instances with the
//! approximate or exact solvers, query the oracles, generate instances,
//! and run the benchmark matrix.
//!
//! Exit codes: 0 success, 1 internal error, 2 parse/usage error,
//! 3 invariant violation, 4 no perfect matching.

use clap::{Arg, ArgAction, Command};
use matchscale_core::approx::{self, ApproxConfig, ApproxMode};
use matchscale_core::bench;
use matchscale_core::exact::{self, ExactConfig, ExactError};
use matchscale_core::gen::{generate, GenKind};
use matchscale_core::graph::{Matching, WeightedGraph};
use matchscale_core::io::{emit_instance, emit_result, parse_instance};
use matchscale_core::oracle;
use std::io::Read;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_NO_PERFECT: u8 = 4;

fn cli() -> Command {
    let instance_arg = Arg::new("instance")
        .help("instance file (defaults to stdin)")
        .value_name("FILE");
    let check = Arg::new("check-invariants")
        .long("check-invariants")
        .action(ArgAction::SetTrue)
        .global(true)
        .help("run the dual-invariant checkers after every solver step");
    let trace = Arg::new("trace")
        .long("trace")
        .action(ArgAction::SetTrue)
        .global(true)
        .help("print per-round progress to stderr");
    let seed = Arg::new("seed")
        .long("seed")
        .value_name("U64")
        .global(true)
        .help("seed for generators and bench (default: MATCHSCALE_SEED or 1)");
    Command::new("matchscale")
        .about("Scaling algorithms for approximate and exact maximum weight matching")
        .subcommand_required(true)
        .arg(check)
        .arg(trace)
        .arg(seed)
        .subcommand(
            Command::new("approx")
                .about("(1-eps)-approximate maximum weight matching on a general graph")
                .arg(
                    Arg::new("eps")
                        .long("eps")
                        .required(true)
                        .value_name("R")
                        .help("relative error, strictly between 0 and 1"),
                )
                .arg(
                    Arg::new("mode")
                        .long("mode")
                        .value_name("logn|linear")
                        .default_value("logn"),
                )
                .arg(instance_arg.clone()),
        )
        .subcommand(
            Command::new("exact")
                .about("exact maximum weight matching on a bipartite instance")
                .arg(instance_arg.clone()),
        )
        .subcommand(
            Command::new("mwpm")
                .about("exact maximum weight perfect matching on a bipartite instance")
                .arg(instance_arg.clone()),
        )
        .subcommand(
            Command::new("oracle")
                .about("reference solvers: exhaustive, Hungarian, greedy")
                .arg(
                    Arg::new("method")
                        .long("method")
                        .value_name("brute|hungarian|greedy")
                        .default_value("brute"),
                )
                .arg(instance_arg),
        )
        .subcommand(
            Command::new("gen")
                .about("emit a generated instance")
                .arg(
                    Arg::new("kind")
                        .long("kind")
                        .required(true)
                        .value_name("random-general|random-bipartite|worst-path|unit-odd-cycle"),
                )
                .arg(Arg::new("n").short('n').value_name("N").help("vertex count"))
                .arg(Arg::new("nl").long("nl").value_name("N").help("left side size"))
                .arg(Arg::new("nr").long("nr").value_name("N").help("right side size"))
                .arg(Arg::new("m").short('m').value_name("M").help("edge count"))
                .arg(Arg::new("k").short('k').value_name("K").help("odd cycle parameter"))
                .arg(
                    Arg::new("max-weight")
                        .short('N')
                        .long("max-weight")
                        .value_name("W")
                        .default_value("100"),
                ),
        )
        .subcommand(
            Command::new("bench")
                .about("run the benchmark matrix and print TSV rows")
                .arg(
                    Arg::new("threads")
                        .long("threads")
                        .value_name("T")
                        .default_value("4"),
                ),
        )
}

fn read_instance(path: Option<&String>) -> Result<WeightedGraph, ExitCode> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| {
            eprintln!("error: cannot read {p}: {e}");
            ExitCode::from(EXIT_USAGE)
        })?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map_err(|e| {
                eprintln!("error: cannot read stdin: {e}");
                ExitCode::from(EXIT_USAGE)
            })?;
            buf
        }
    };
    parse_instance(&text).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_USAGE)
    })
}

fn parse_num<T: std::str::FromStr>(m: &clap::ArgMatches, key: &str) -> Result<Option<T>, ExitCode> {
    match m.get_one::<String>(key) {
        None => Ok(None),
        Some(s) => s.parse::<T>().map(Some).map_err(|_| {
            eprintln!("error: bad value for --{key}: `{s}`");
            ExitCode::from(EXIT_USAGE)
        }),
    }
}

fn print_result(matching: &Matching) {
    print!("{}", emit_result(matching));
}

fn seed_from(matches: &clap::ArgMatches) -> Result<u64, ExitCode> {
    if let Some(s) = parse_num::<u64>(matches, "seed")? {
        return Ok(s);
    }
    match std::env::var("MATCHSCALE_SEED") {
        Ok(v) => v.parse().map_err(|_| {
            eprintln!("error: bad MATCHSCALE_SEED `{v}`");
            ExitCode::from(EXIT_USAGE)
        }),
        Err(_) => Ok(1),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let check = matches.get_flag("check-invariants");
    let tracing = matches.get_flag("trace");
    let seed = match seed_from(&matches) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match matches.subcommand() {
        Some(("approx", sub)) => {
            let eps = match parse_num::<f64>(sub, "eps") {
                Ok(Some(e)) => e,
                _ => {
                    eprintln!("error: --eps must be a real number");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            if !(eps > 0.0 && eps < 1.0) {
                eprintln!("error: --eps must lie strictly between 0 and 1");
                return ExitCode::from(EXIT_USAGE);
            }
            let mode = match sub.get_one::<String>("mode").map(|s| s.as_str()) {
                Some("logn") | Some("logN") => ApproxMode::LogN,
                Some("linear") => ApproxMode::Linear,
                other => {
                    eprintln!("error: unknown mode {other:?}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            let g = match read_instance(sub.get_one::<String>("instance")) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let mut trace_fn = |scale: u32, iter: u64, size: usize, free_y: i64| {
                eprintln!("scale {scale} iter {iter}: |M| = {size}, free y raw = {free_y}");
            };
            let config = ApproxConfig {
                mode: Some(mode),
                check_invariants: check,
                trace: if tracing { Some(&mut trace_fn) } else { None },
            };
            match approx::run(&g, eps, config) {
                Ok(out) => {
                    print_result(&out.matching);
                    ExitCode::SUCCESS
                }
                Err(approx::ApproxError::Invariant(msg)) => {
                    eprintln!("invariant violation: {msg}");
                    ExitCode::from(EXIT_INVARIANT)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
        Some((cmd @ ("exact" | "mwpm"), sub)) => {
            let g = match read_instance(sub.get_one::<String>("instance")) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let mut trace_fn = |phase: u8, scale: u32, f: i64, w: i64| {
                eprintln!("phase {phase} scale {scale}: f(M) = {f}, w(M) = {w}");
            };
            let config = ExactConfig {
                check_invariants: check,
                trace: if tracing { Some(&mut trace_fn) } else { None },
            };
            let result = if cmd == "exact" {
                exact::run_exact_mwm(&g, config)
            } else {
                exact::run_exact_mwpm(&g, config)
            };
            match result {
                Ok(out) => {
                    print_result(&out.matching);
                    ExitCode::SUCCESS
                }
                Err(ExactError::NoPerfectMatching) => {
                    eprintln!("error: no perfect matching");
                    ExitCode::from(EXIT_NO_PERFECT)
                }
                Err(ExactError::Invariant(msg)) => {
                    eprintln!("invariant violation: {msg}");
                    ExitCode::from(EXIT_INVARIANT)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
        Some(("oracle", sub)) => {
            let g = match read_instance(sub.get_one::<String>("instance")) {
                Ok(g) => g,
                Err(code) => return code,
            };
            let result = match sub.get_one::<String>("method").map(|s| s.as_str()) {
                Some("brute") => oracle::brute_force_mwm(&g),
                Some("hungarian") => oracle::cubic_hungarian(&g),
                Some("greedy") => Ok(oracle::greedy_half(&g)),
                other => {
                    eprintln!("error: unknown method {other:?}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            match result {
                Ok(out) => {
                    print_result(&out.matching);
                    ExitCode::SUCCESS
                }
                Err(oracle::OracleError::NoPerfectMatching) => {
                    eprintln!("error: no perfect matching");
                    ExitCode::from(EXIT_NO_PERFECT)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
        Some(("gen", sub)) => {
            let n = match parse_num::<usize>(sub, "n") {
                Ok(v) => v,
                Err(c) => return c,
            };
            let m = match parse_num::<usize>(sub, "m") {
                Ok(v) => v.unwrap_or(0),
                Err(c) => return c,
            };
            let k = match parse_num::<usize>(sub, "k") {
                Ok(v) => v,
                Err(c) => return c,
            };
            let nl = match parse_num::<usize>(sub, "nl") {
                Ok(v) => v,
                Err(c) => return c,
            };
            let nr = match parse_num::<usize>(sub, "nr") {
                Ok(v) => v,
                Err(c) => return c,
            };
            let n_weight = match parse_num::<i64>(sub, "max-weight") {
                Ok(v) => v.unwrap_or(100),
                Err(c) => return c,
            };
            let kind = match sub.get_one::<String>("kind").map(|s| s.as_str()) {
                Some("random-general") => match n {
                    Some(n) => GenKind::RandomGeneral { n },
                    None => {
                        eprintln!("error: random-general needs -n");
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                Some("random-bipartite") => match (nl, nr) {
                    (Some(nl), Some(nr)) => GenKind::RandomBipartite { n_left: nl, n_right: nr },
                    _ => {
                        eprintln!("error: random-bipartite needs --nl and --nr");
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                Some("worst-path") => match n {
                    Some(n) => GenKind::WorstPath { n },
                    None => {
                        eprintln!("error: worst-path needs -n");
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                Some("unit-odd-cycle") => match k {
                    Some(k) => GenKind::UnitOddCycle { k },
                    None => {
                        eprintln!("error: unit-odd-cycle needs -k");
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                other => {
                    eprintln!("error: unknown kind {other:?}");
                    return ExitCode::from(EXIT_USAGE);
                }
            };
            match generate(kind, m, n_weight, seed) {
                Ok(g) => {
                    print!("{}", emit_instance(&g));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
        Some(("bench", sub)) => {
            let threads = match parse_num::<usize>(sub, "threads") {
                Ok(v) => v.unwrap_or(4),
                Err(c) => return c,
            };
            println!("{}", bench::BenchRecord::tsv_header());
            for row in bench::run_bench(seed, threads) {
                println!("{}", row.to_tsv());
            }
            ExitCode::SUCCESS
        }
        _ => ExitCode::from(EXIT_USAGE),
    }
}
