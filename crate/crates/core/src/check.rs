//! Runtime invariant checkers. Each returns the full list of violated
//! clauses; solvers run them between steps when invariant checking is on.

use crate::approx::{ApproxMode, ApproxState};
use crate::exact::ExactState;
use crate::graph::Edge;

#[derive(Debug, Clone)]
pub struct Violation {
    pub clause: String,
    pub detail: String,
}

fn push(out: &mut Vec<Violation>, clause: &str, detail: String) {
    out.push(Violation { clause: clause.into(), detail });
}

/// Relaxed complementary slackness for the approximate solver.
///
/// `skip_active_blossoms` elides the root-dual-positivity clause, which is
/// transiently false between blossom shrinking (new roots start at z = 0)
/// and the dual adjustment that lifts them.
pub fn check_property2(st: &ApproxState<'_>, skip_active_blossoms: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    let g = st.g;
    let delta = st.delta_raw();
    let half = delta / 2;

    // (1) granularity: y nonnegative multiples of delta_i/2, z of delta_i
    for v in 0..g.n() {
        let y = st.y(v);
        if y < 0 || y % half != 0 {
            push(&mut out, "granularity", format!("y({v}) = {y} raw not a multiple of {half}"));
        }
    }
    for b in st.forest.nontrivial_nodes() {
        let z = st.forest.z_raw(b);
        if z < 0 || z % delta != 0 {
            push(&mut out, "granularity", format!("z({b}) = {z} raw not a multiple of {delta}"));
        }
    }

    // (2) active blossoms: every root blossom keeps positive dual
    if !skip_active_blossoms {
        for b in st.forest.nontrivial_roots() {
            if st.forest.z_raw(b) <= 0 {
                push(&mut out, "active blossoms", format!("root blossom {b} has z = 0"));
            }
        }
    }

    // (3) near domination on live edges
    for e in 0..g.m() {
        let Edge { u, v, .. } = g.edge(e);
        if st.discarded[e] || st.is_dead(u) || st.is_dead(v) {
            continue;
        }
        let yz = st.yz_full(e);
        let wi = st.truncated(e);
        if yz < wi - delta {
            push(
                &mut out,
                "near domination",
                format!("edge {e}: yz = {yz} < w_i - delta_i = {}", wi - delta),
            );
        }
    }

    // (4) near tightness on matched and blossom edges
    for e in 0..g.m() {
        if !st.in_tight_set(e) {
            continue;
        }
        let Some(j) = st.edge_type[e] else {
            push(&mut out, "near tightness", format!("edge {e} in M or a cycle but untyped"));
            continue;
        };
        let yz = st.yz_full(e);
        let wi = st.truncated(e);
        let in_window =
            st.mode == ApproxMode::LogN || st.edge_scale[e] + st.params.gamma() >= st.scale;
        let bound = if in_window {
            wi + 2 * (st.params.delta_raw(j) - delta)
        } else {
            wi + 3 * st.params.delta_raw(st.edge_scale[e])
        };
        if yz > bound {
            push(
                &mut out,
                "near tightness",
                format!("type-{j} edge {e}: yz = {yz} > bound {bound}"),
            );
        }
    }

    // (5) free vertex duals: equal, and no larger than any matched dual
    let mut min_matched = i64::MAX;
    for v in 0..g.n() {
        if st.mate_edge[v].is_some() {
            min_matched = min_matched.min(st.y(v));
        } else if st.y(v) != st.free_y_raw {
            push(
                &mut out,
                "free vertex duals",
                format!("free vertex {v} has y = {} != {}", st.y(v), st.free_y_raw),
            );
        }
    }
    let any_free = (0..g.n()).any(|v| st.mate_edge[v].is_none());
    if any_free && min_matched < st.free_y_raw {
        push(
            &mut out,
            "free vertex duals",
            format!("matched dual {min_matched} below free dual {}", st.free_y_raw),
        );
    }
    out
}

/// Shared domination/tightness core of the bipartite checkers.
fn check_exact_core(st: &ExactState<'_>, scale_end: bool, out: &mut Vec<Violation>) {
    let delta = st.params.delta_raw(st.scale);
    for e in 0..st.g.m() {
        let ye = st.y_edge(e);
        let wi = st.truncated(e);
        if ye < wi {
            push(out, "domination", format!("edge {e}: y(e) = {ye} < w_i(e) = {wi}"));
        }
        if st.is_matched(e) {
            let units = if st.scale == 0 || scale_end { 1 } else { 3 };
            if ye > wi + units * delta {
                push(
                    out,
                    "near tightness",
                    format!("matched edge {e}: y(e) = {ye} > w_i + {units} delta"),
                );
            }
        }
    }
}

/// Invariants of the exact bipartite maximum weight matching solver.
/// `scale_end` applies the stricter end-of-scale tightness bound.
pub fn check_property3(st: &ExactState<'_>, scale_end: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    let delta = st.params.delta_raw(st.scale);
    for v in 0..st.g.n() {
        let y = st.y_raw[v];
        if y < 0 || y % delta != 0 {
            push(
                &mut out,
                "granularity",
                format!("y({v}) = {y} raw not a nonnegative multiple of {delta}"),
            );
        }
    }
    check_exact_core(st, scale_end, &mut out);
    if st.in_phase1 {
        // scale 0: right free duals are zero; left free duals are equal and
        // minimal among left vertices
        let mut left_free: Option<i64> = None;
        let mut left_min = i64::MAX;
        for v in 0..st.g.n() {
            let y = st.y_raw[v];
            if v < st.n_left {
                left_min = left_min.min(y);
                if st.mate_edge[v].is_none() {
                    match left_free {
                        None => left_free = Some(y),
                        Some(prev) if prev != y => push(
                            &mut out,
                            "free vertex duals",
                            format!("left free duals differ: {prev} vs {y}"),
                        ),
                        _ => {}
                    }
                }
            } else if st.mate_edge[v].is_none() && y != 0 {
                push(&mut out, "free vertex duals", format!("right free y({v}) = {y}"));
            }
        }
        if let Some(f) = left_free {
            if f > left_min {
                push(
                    &mut out,
                    "free vertex duals",
                    format!("left free dual {f} not minimal (min {left_min})"),
                );
            }
        }
    } else {
        for v in 0..st.g.n() {
            if st.mate_edge[v].is_none() && st.y_raw[v] != 0 {
                push(
                    &mut out,
                    "free vertex duals",
                    format!("free vertex {v} has y = {}", st.y_raw[v]),
                );
            }
        }
    }
    out
}

/// Invariants of the perfect-matching variant: duals may be negative and
/// there are no free vertices at all.
pub fn check_property4(st: &ExactState<'_>, scale_end: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    let delta = st.params.delta_raw(st.scale);
    for v in 0..st.g.n() {
        if st.y_raw[v] % delta != 0 {
            push(
                &mut out,
                "granularity",
                format!("y({v}) = {} raw not a multiple of {delta}", st.y_raw[v]),
            );
        }
        if st.mate_edge[v].is_none() {
            push(&mut out, "perfect matching", format!("vertex {v} is unmatched"));
        }
    }
    check_exact_core(st, scale_end, &mut out);
    out
}
