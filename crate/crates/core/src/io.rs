//! DIMACS-style instance files and the fixed result format.
//!
//! Instances: comment lines start with `c`; one problem line
//! `p edge <n> <m>` or `p bipartite <nL> <nR> <m>`; then `e <u> <v> <w>`
//! per edge with 1-indexed vertices and integer w >= 1.
//!
//! Results: `s <weight>` then one `m <u> <v>` line per matched edge with
//! u < v, sorted — byte-exact for golden tests.

use crate::graph::{GraphError, Matching, WeightedGraph};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {0}: syntax error: {1}")]
    Syntax(usize, String),
    #[error("edge count mismatch: header says {header}, found {found}")]
    CountMismatch { header: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn parse_instance(text: &str) -> Result<WeightedGraph, ParseError> {
    let mut header: Option<(usize, Option<usize>, usize)> = None; // (n, n_left, m)
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("p") => {
                if header.is_some() {
                    return Err(ParseError::Syntax(lineno, "duplicate problem line".into()));
                }
                let kind = it
                    .next()
                    .ok_or_else(|| ParseError::Syntax(lineno, "missing problem kind".into()))?;
                let nums: Vec<usize> = it
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| ParseError::Syntax(lineno, format!("bad number `{t}`")))
                    })
                    .collect::<Result<_, _>>()?;
                header = Some(match (kind, nums.as_slice()) {
                    ("edge", [n, m]) => (*n, None, *m),
                    ("bipartite", [nl, nr, m]) => (nl + nr, Some(*nl), *m),
                    _ => {
                        return Err(ParseError::Syntax(
                            lineno,
                            format!("bad problem line `{line}`"),
                        ))
                    }
                });
            }
            Some("e") => {
                if header.is_none() {
                    return Err(ParseError::Syntax(
                        lineno,
                        "edge before problem line".into(),
                    ));
                }
                let mut next_num = |what: &str| -> Result<i64, ParseError> {
                    it.next()
                        .ok_or_else(|| ParseError::Syntax(lineno, format!("missing {what}")))?
                        .parse::<i64>()
                        .map_err(|_| ParseError::Syntax(lineno, format!("bad {what}")))
                };
                let u = next_num("endpoint")?;
                let v = next_num("endpoint")?;
                let w = next_num("weight")?;
                if u < 1 || v < 1 {
                    return Err(ParseError::Syntax(lineno, "vertices are 1-indexed".into()));
                }
                edges.push((u as usize - 1, v as usize - 1, w));
            }
            Some(other) => {
                return Err(ParseError::Syntax(
                    lineno,
                    format!("unknown record `{other}`"),
                ))
            }
            None => unreachable!(),
        }
    }
    let (n, n_left, m) =
        header.ok_or_else(|| ParseError::Syntax(0, "missing problem line".into()))?;
    if edges.len() != m {
        return Err(ParseError::CountMismatch { header: m, found: edges.len() });
    }
    Ok(WeightedGraph::new(&edges, n, n_left)?)
}

pub fn emit_instance(g: &WeightedGraph) -> String {
    let mut out = String::new();
    match g.n_left() {
        Some(nl) => {
            let _ = writeln!(out, "p bipartite {} {} {}", nl, g.n() - nl, g.m());
        }
        None => {
            let _ = writeln!(out, "p edge {} {}", g.n(), g.m());
        }
    }
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {}", e.u + 1, e.v + 1, e.w);
    }
    out
}

pub fn emit_result(matching: &Matching) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "s {}", matching.weight);
    for (u, v) in matching.pairs() {
        let _ = writeln!(out, "m {} {}", u + 1, v + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_edge() {
        let g = parse_instance("p edge 2 1\ne 1 2 5\n").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 1);
        assert_eq!(g.edge(0).w, 5);
    }

    #[test]
    fn parse_bipartite() {
        let g = parse_instance("c comment\np bipartite 1 1 1\ne 1 2 7\n").unwrap();
        assert!(g.is_bipartite());
        assert_eq!(g.n_left(), Some(1));
    }

    #[test]
    fn edge_before_header() {
        assert!(matches!(
            parse_instance("e 1 2 5\n"),
            Err(ParseError::Syntax(1, _))
        ));
    }

    #[test]
    fn count_mismatch() {
        assert!(matches!(
            parse_instance("p edge 2 2\ne 1 2 5\n"),
            Err(ParseError::CountMismatch { header: 2, found: 1 })
        ));
    }

    #[test]
    fn emit_empty_matching() {
        assert_eq!(emit_result(&Matching::empty(3)), "s 0\n");
    }

    #[test]
    fn emit_single_edge() {
        let g = parse_instance("p edge 2 1\ne 1 2 5\n").unwrap();
        let mut m = Matching::empty(2);
        m.mate[0] = Some(1);
        m.mate[1] = Some(0);
        m.size = 1;
        m.weight = 5;
        let _ = &g;
        assert_eq!(emit_result(&m), "s 5\nm 1 2\n");
    }

    #[test]
    fn emit_sorted_pairs() {
        let mut m = Matching::empty(4);
        m.mate[3] = Some(2);
        m.mate[2] = Some(3);
        m.mate[1] = Some(0);
        m.mate[0] = Some(1);
        m.size = 2;
        m.weight = 0;
        assert_eq!(emit_result(&m), "s 0\nm 1 2\nm 3 4\n");
    }

    #[test]
    fn roundtrip_generator_output() {
        use crate::gen::{generate, GenKind};
        for seed in 0..20u64 {
            let g =
                generate(GenKind::RandomGeneral { n: 8 }, 10, 50, seed).unwrap();
            let g2 = parse_instance(&emit_instance(&g)).unwrap();
            assert_eq!(g.edges(), g2.edges());
            assert_eq!(g.n(), g2.n());
        }
    }
}
