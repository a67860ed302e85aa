//! Exact maximum weight matching and maximum weight perfect matching on
//! bipartite graphs, in three phases over log N scales.
//!
//! Phase I drives free-vertex duals to zero at scale 0 with Hungarian-style
//! rounds. Each Phase II scale halves the granularity and erases the
//! matched edges violating near-tightness by 2 or 3 delta_i: first all
//! augmenting cycles and maximal augmenting paths of the eligibility window
//! G[1,3] are flipped away, then chain/antichain dual adjustments (picked
//! by a longest-badness-path computation) remove the remaining badness in
//! O(sqrt n) rounds. Phase III erases the last delta_L of slack with
//! weight-increasing augmentations and the same chain/antichain machinery
//! on G[0,1]. The perfect-matching variant starts from any perfect matching
//! and runs the same scale loop with cycles only and unconstrained duals.

use crate::graph::{Edge, EdgeId, GraphError, Matching, VertexId, WeightedGraph};
use crate::scale::{make_scale_params, ScaleParams, SolveMode};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("perfect matching requires equal sides ({0} vs {1})")]
    UnequalSides(usize, usize),
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

/// Trace record per dual-adjustment round: phase (1, 2 or 3), scale,
/// total badness f(M), and the current matching weight.
pub type ExactTraceFn<'a> = dyn FnMut(u8, u32, i64, i64) + 'a;

#[derive(Default)]
pub struct ExactConfig<'a> {
    pub check_invariants: bool,
    pub trace: Option<&'a mut ExactTraceFn<'a>>,
}

#[derive(Debug, Clone, Default)]
pub struct ExactStats {
    pub phase1_iterations: u64,
    /// Chain/antichain rounds per scale (index = scale).
    pub phase2_rounds: Vec<u64>,
    pub phase3_augmentations: u64,
    pub phase3_rounds: u64,
    /// Matching weight at the end of every Phase II scale.
    pub scale_end_weights: Vec<(u32, i64)>,
}

#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub matching: Matching,
    pub stats: ExactStats,
}

enum ChainOrAntichain {
    /// An alternating path starting and ending with bad matched edges.
    Chain { vertices: Vec<VertexId>, edges: Vec<EdgeId> },
    Antichain(Vec<EdgeId>),
}

pub struct ExactState<'g> {
    pub(crate) g: &'g WeightedGraph,
    pub(crate) params: ScaleParams,
    pub(crate) scale: u32,
    pub(crate) perfect: bool,
    pub(crate) y_raw: Vec<i64>,
    pub(crate) mate_edge: Vec<Option<EdgeId>>,
    pub(crate) n_left: usize,
    /// Scale-0 Phase I is still running (free left duals may be positive).
    pub(crate) in_phase1: bool,
    check: bool,
    stats: ExactStats,
}

impl<'g> ExactState<'g> {
    fn new(g: &'g WeightedGraph, perfect: bool, check: bool) -> Result<Self, ExactError> {
        let n_left = g.n_left().ok_or(ExactError::NotBipartite)?;
        if perfect && 2 * n_left != g.n() {
            return Err(ExactError::UnequalSides(n_left, g.n() - n_left));
        }
        let mode = if perfect { SolveMode::ExactMwpm } else { SolveMode::ExactMwm };
        let params = make_scale_params(g.weight_max(), 0.0, mode, g.n().max(1))?;
        Ok(ExactState {
            g,
            params,
            scale: 0,
            perfect,
            y_raw: vec![0; g.n()],
            mate_edge: vec![None; g.n()],
            n_left,
            in_phase1: true,
            check,
            stats: ExactStats::default(),
        })
    }

    fn is_left(&self, v: VertexId) -> bool {
        v < self.n_left
    }

    pub(crate) fn is_matched(&self, e: EdgeId) -> bool {
        self.mate_edge[self.g.edge(e).u] == Some(e)
    }

    fn delta(&self) -> i64 {
        self.params.delta_raw(self.scale)
    }

    pub(crate) fn y_edge(&self, e: EdgeId) -> i64 {
        let Edge { u, v, .. } = self.g.edge(e);
        self.y_raw[u] + self.y_raw[v]
    }

    pub(crate) fn truncated(&self, e: EdgeId) -> i64 {
        self.params.truncated_raw(self.g.edge(e).w, self.scale)
    }

    /// (y(e) - w_i(e)) / delta_i; exact by granularity.
    fn slack_units(&self, e: EdgeId) -> i64 {
        let s = self.y_edge(e) - self.truncated(e);
        debug_assert_eq!(s % self.delta(), 0, "slack off the dual grid");
        s / self.delta()
    }

    /// Membership in the eligibility window G[a,b] at the current scale.
    fn in_window(&self, e: EdgeId, a: i64, b: i64) -> bool {
        let s = self.slack_units(e);
        if self.is_matched(e) {
            a <= s && s <= b
        } else {
            s == 0
        }
    }

    fn matching_weight(&self) -> i64 {
        (0..self.g.m())
            .filter(|&e| self.is_matched(e))
            .map(|e| self.g.edge(e).w)
            .sum()
    }

    /// Truncated matching weight at the current scale. Chain adjustments
    /// keep this monotone; at the last scale it equals the true weight.
    fn truncated_matching_weight(&self) -> i64 {
        (0..self.g.m())
            .filter(|&e| self.is_matched(e))
            .map(|e| self.truncated(e))
            .sum()
    }

    /// Flips the matching along a set of edges forming vertex-disjoint
    /// alternating paths/cycles.
    fn flip_edges(&mut self, edges: &[EdgeId]) {
        let flags: Vec<bool> = edges.iter().map(|&e| self.is_matched(e)).collect();
        for (k, &e) in edges.iter().enumerate() {
            if flags[k] {
                let Edge { u, v, .. } = self.g.edge(e);
                self.mate_edge[u] = None;
                self.mate_edge[v] = None;
            }
        }
        for (k, &e) in edges.iter().enumerate() {
            if !flags[k] {
                let Edge { u, v, .. } = self.g.edge(e);
                self.mate_edge[u] = Some(e);
                self.mate_edge[v] = Some(e);
            }
        }
    }

    /// Forward out-edges of the directed window graph: unmatched edges run
    /// left to right, matched edges right to left.
    fn for_out_edges(&self, v: VertexId, a: i64, b: i64, mut f: impl FnMut(EdgeId, VertexId)) {
        if self.is_left(v) {
            for &e in self.g.adjacent(v) {
                if !self.is_matched(e) && self.in_window(e, a, b) {
                    f(e, self.g.edge(e).other(v));
                }
            }
        } else if let Some(e) = self.mate_edge[v] {
            if self.in_window(e, a, b) {
                f(e, self.g.edge(e).other(v));
            }
        }
    }

    /// Out-edges of the transposed window graph.
    fn for_out_edges_rev(&self, v: VertexId, a: i64, b: i64, mut f: impl FnMut(EdgeId, VertexId)) {
        if !self.is_left(v) {
            for &e in self.g.adjacent(v) {
                if !self.is_matched(e) && self.in_window(e, a, b) {
                    f(e, self.g.edge(e).other(v));
                }
            }
        } else if let Some(e) = self.mate_edge[v] {
            if self.in_window(e, a, b) {
                f(e, self.g.edge(e).other(v));
            }
        }
    }

    /// Multi-source reachability in the directed window (forward or
    /// transposed), with optional parent tracking.
    fn reach(
        &self,
        sources: &[VertexId],
        a: i64,
        b: i64,
        forward: bool,
        parent: Option<&mut Vec<Option<EdgeId>>>,
    ) -> Vec<bool> {
        let mut seen = vec![false; self.g.n()];
        let mut parents = parent;
        let mut queue: Vec<VertexId> = Vec::new();
        for &s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push(s);
            }
        }
        let mut qi = 0;
        while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            let mut visit = |e: EdgeId, w: VertexId| {
                if !seen[w] {
                    seen[w] = true;
                    if let Some(p) = parents.as_deref_mut() {
                        p[w] = Some(e);
                    }
                    queue.push(w);
                }
            };
            if forward {
                self.for_out_edges(v, a, b, &mut visit);
            } else {
                self.for_out_edges_rev(v, a, b, &mut visit);
            }
        }
        seen
    }

    /// Maximal set of vertex-disjoint augmenting paths between free
    /// vertices in the window, flipped as they are found. Visited marks
    /// persist across roots, so every edge is scanned O(1) times per call.
    /// Returns the number of augmentations.
    fn augment_free_paths(&mut self, a: i64, b: i64) -> u64 {
        let mut visited = vec![false; self.g.n()];
        let mut parent: Vec<Option<EdgeId>> = vec![None; self.g.n()];
        let mut count = 0;
        for root in 0..self.n_left {
            if self.mate_edge[root].is_some() || visited[root] {
                continue;
            }
            visited[root] = true;
            let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
            'dfs: while let Some(&mut (v, ref mut cur)) = stack.last_mut() {
                let mut advanced = false;
                if self.is_left(v) {
                    let adj = self.g.adjacent(v);
                    while *cur < adj.len() {
                        let e = adj[*cur];
                        *cur += 1;
                        if self.is_matched(e) || !self.in_window(e, a, b) {
                            continue;
                        }
                        let r = self.g.edge(e).other(v);
                        if visited[r] {
                            continue;
                        }
                        visited[r] = true;
                        parent[r] = Some(e);
                        if self.mate_edge[r].is_none() {
                            // free right vertex: flip the traced path
                            let mut edges = Vec::new();
                            let mut cur_v = r;
                            while let Some(pe) = parent[cur_v] {
                                edges.push(pe);
                                cur_v = self.g.edge(pe).other(cur_v);
                                if cur_v == root {
                                    break;
                                }
                            }
                            self.flip_edges(&edges);
                            count += 1;
                            break 'dfs;
                        }
                        stack.push((r, 0));
                        advanced = true;
                        break;
                    }
                } else if *cur == 0 {
                    *cur = 1;
                    let me = self.mate_edge[v].expect("odd vertex must be matched");
                    if self.in_window(me, a, b) {
                        let l = self.g.edge(me).other(v);
                        if !visited[l] {
                            visited[l] = true;
                            parent[l] = Some(me);
                            stack.push((l, 0));
                            advanced = true;
                        }
                    }
                }
                if !advanced {
                    stack.pop();
                }
            }
        }
        count
    }

    /// One Hungarian-style dual adjustment from the left free vertices over
    /// the window: reachable left vertices drop by step, reachable right
    /// vertices rise.
    fn adjust_from_left_free(&mut self, a: i64, b: i64, step: i64) {
        let free: Vec<VertexId> = (0..self.n_left)
            .filter(|&v| self.mate_edge[v].is_none())
            .collect();
        let seen = self.reach(&free, a, b, true, None);
        for v in 0..self.g.n() {
            if seen[v] {
                if self.is_left(v) {
                    self.y_raw[v] -= step;
                } else {
                    self.y_raw[v] += step;
                }
                debug_assert!(self.y_raw[v] >= 0, "dual went negative at {v}");
            }
        }
    }

    fn emit_trace(
        &self,
        trace: &mut Option<&mut ExactTraceFn<'_>>,
        phase: u8,
        f_total: i64,
    ) {
        if let Some(cb) = trace.as_mut() {
            cb(phase, self.scale, f_total, self.matching_weight());
        }
    }

    // ----- Phase I -----

    fn phase1(&mut self, trace: &mut Option<&mut ExactTraceFn<'_>>) -> Result<(), ExactError> {
        let delta0 = self.params.delta0_raw;
        let n_raw = self.params.weight_raw(self.params.n_weight);
        let start = delta0 * (n_raw / delta0);
        for v in 0..self.n_left {
            self.y_raw[v] = start;
        }
        let bound = 2.0 * (self.g.n().max(1) as f64).sqrt();
        let mut free_left_y = start;
        loop {
            self.augment_free_paths(1, 1);
            self.check_now(false)?;
            if (0..self.n_left).all(|v| self.mate_edge[v].is_some()) {
                break;
            }
            if free_left_y == 0 {
                break;
            }
            self.adjust_from_left_free(1, 1, delta0);
            free_left_y -= delta0;
            self.stats.phase1_iterations += 1;
            self.check_now(false)?;
            self.emit_trace(trace, 1, 0);
            if free_left_y == 0 {
                break;
            }
        }
        debug_assert!(
            (self.stats.phase1_iterations as f64) < bound,
            "phase I ran {} rounds, bound {bound}",
            self.stats.phase1_iterations
        );
        self.in_phase1 = false;
        Ok(())
    }

    // ----- Phase II augmentation -----

    /// Maximal set of vertex-disjoint augmenting cycles in the window,
    /// found by a stack DFS where a back edge closes a cycle.
    fn cycle_search(&self, a: i64, b: i64) -> Vec<Vec<EdgeId>> {
        let n = self.g.n();
        let mut marked = vec![false; n];
        let mut on_stack = vec![false; n];
        let mut pos = vec![usize::MAX; n];
        let mut cycles = Vec::new();
        // stack entries: (vertex, adjacency cursor, edge that reached it)
        let mut stack: Vec<(VertexId, usize, Option<EdgeId>)> = Vec::new();
        for u0 in 0..n {
            if marked[u0] {
                continue;
            }
            debug_assert!(stack.is_empty());
            stack.push((u0, 0, None));
            on_stack[u0] = true;
            pos[u0] = 0;
            while let Some(&mut (u, ref mut cur, _)) = stack.last_mut() {
                // next unmarked out-neighbor of u
                let mut next: Option<(EdgeId, VertexId)> = None;
                if self.is_left(u) {
                    let adj = self.g.adjacent(u);
                    while *cur < adj.len() {
                        let e = adj[*cur];
                        *cur += 1;
                        if !self.is_matched(e) && self.in_window(e, a, b) {
                            let v = self.g.edge(e).other(u);
                            if !marked[v] {
                                next = Some((e, v));
                                break;
                            }
                        }
                    }
                } else if *cur == 0 {
                    *cur = 1;
                    if let Some(me) = self.mate_edge[u] {
                        if self.in_window(me, a, b) {
                            let v = self.g.edge(me).other(u);
                            if !marked[v] {
                                next = Some((me, v));
                            }
                        }
                    }
                }
                match next {
                    None => {
                        marked[u] = true;
                        on_stack[u] = false;
                        pos[u] = usize::MAX;
                        stack.pop();
                    }
                    Some((e, v)) => {
                        if on_stack[v] {
                            // the back edge closes an augmenting cycle
                            let at = pos[v];
                            let mut cyc: Vec<EdgeId> =
                                stack[at + 1..].iter().map(|t| t.2.unwrap()).collect();
                            cyc.push(e);
                            for &(w, _, _) in &stack[at..] {
                                marked[w] = true;
                                on_stack[w] = false;
                                pos[w] = usize::MAX;
                            }
                            stack.truncate(at);
                            cycles.push(cyc);
                        } else {
                            pos[v] = stack.len();
                            on_stack[v] = true;
                            stack.push((v, 0, Some(e)));
                        }
                    }
                }
            }
        }
        cycles
    }

    /// Topological positions of the (acyclic) directed window; panics if a
    /// cycle survived, which would mean cycle_search failed.
    fn topo_positions(&self, a: i64, b: i64) -> Vec<usize> {
        let n = self.g.n();
        let mut indeg = vec![0usize; n];
        for v in 0..n {
            self.for_out_edges(v, a, b, |_, w| indeg[w] += 1);
        }
        let mut queue: Vec<VertexId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = vec![usize::MAX; n];
        let mut next = 0usize;
        let mut qi = 0;
        while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            order[v] = next;
            next += 1;
            self.for_out_edges(v, a, b, |_, w| {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            });
        }
        assert_eq!(next, n, "window graph is cyclic after cycle elimination");
        order
    }

    fn starting_vertex(&self, v: VertexId) -> bool {
        self.y_raw[v] == 0
            && (self.is_left(v) == self.mate_edge[v].is_none())
    }

    fn ending_vertex(&self, v: VertexId) -> bool {
        self.y_raw[v] == 0
            && (self.is_left(v) == self.mate_edge[v].is_some())
    }

    /// Maximal set of maximal augmenting paths in the (acyclic) window,
    /// scanning starting vertices in topological order and committing a
    /// path only once its endpoint has no continuation left.
    fn path_search(&self, a: i64, b: i64) -> Vec<Vec<EdgeId>> {
        let order = self.topo_positions(a, b);
        let n = self.g.n();
        let mut starts: Vec<VertexId> = (0..n).filter(|&v| self.starting_vertex(v)).collect();
        starts.sort_by_key(|&v| order[v]);
        let mut marked = vec![false; n];
        let mut paths = Vec::new();
        for &a0 in &starts {
            if marked[a0] {
                continue;
            }
            let mut stack: Vec<(VertexId, usize, Option<EdgeId>)> = vec![(a0, 0, None)];
            while let Some(&mut (u, ref mut cur, _)) = stack.last_mut() {
                let mut next: Option<(EdgeId, VertexId)> = None;
                if self.is_left(u) {
                    let adj = self.g.adjacent(u);
                    while *cur < adj.len() {
                        let e = adj[*cur];
                        *cur += 1;
                        if !self.is_matched(e) && self.in_window(e, a, b) {
                            let v = self.g.edge(e).other(u);
                            if !marked[v] {
                                next = Some((e, v));
                                break;
                            }
                        }
                    }
                } else if *cur == 0 {
                    *cur = 1;
                    if let Some(me) = self.mate_edge[u] {
                        if self.in_window(me, a, b) {
                            let v = self.g.edge(me).other(u);
                            if !marked[v] {
                                next = Some((me, v));
                            }
                        }
                    }
                }
                match next {
                    None => {
                        if stack.len() > 1 && self.ending_vertex(u) {
                            // the whole stack is a maximal augmenting path
                            let edges: Vec<EdgeId> =
                                stack[1..].iter().map(|t| t.2.unwrap()).collect();
                            for &(w, _, _) in &stack {
                                marked[w] = true;
                            }
                            stack.clear();
                            paths.push(edges);
                        } else {
                            marked[u] = true;
                            stack.pop();
                        }
                    }
                    Some((e, v)) => stack.push((v, 0, Some(e))),
                }
            }
        }
        paths
    }

    /// Total badness and the bad matched edges of the current phase.
    fn badness(&self, phase3: bool) -> (i64, Vec<EdgeId>) {
        let mut total = 0;
        let mut bad = Vec::new();
        for e in 0..self.g.m() {
            if !self.is_matched(e) {
                continue;
            }
            let s = self.slack_units(e);
            let f = if phase3 { s } else { (s - 1).max(0) };
            debug_assert!((0..=if phase3 { 1 } else { 2 }).contains(&f), "badness out of range");
            if f > 0 {
                total += f;
                bad.push(e);
            }
        }
        (total, bad)
    }

    fn edge_f(&self, e: EdgeId, phase3: bool) -> i64 {
        if !self.is_matched(e) {
            return 0;
        }
        let s = self.slack_units(e);
        if phase3 {
            s
        } else {
            (s - 1).max(0)
        }
    }

    // ----- chain / antichain selection -----

    /// Dilworth step: either a chain of badness at least ceil(t) (as a
    /// minimal alternating path starting and ending with bad edges), or a
    /// large antichain of bad edges at a common badness distance.
    ///
    /// Phase II works on the acyclic window [1,3] directly; Phase III first
    /// contracts the strongly connected components of the tight window
    /// [0,0] inside [0,1].
    fn find_chain_or_antichain(&self, t: f64, phase3: bool) -> ChainOrAntichain {
        let (wa, wb) = if phase3 { (0, 1) } else { (1, 3) };
        let n = self.g.n();
        // component ids: identity for Phase II, tight SCCs for Phase III
        let comp: Vec<usize> = if phase3 {
            self.tight_scc_ids()
        } else {
            (0..n).collect()
        };
        let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
        // component DAG edges with badness lengths
        let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); ncomp];
        let mut indeg = vec![0usize; ncomp];
        for v in 0..n {
            self.for_out_edges(v, wa, wb, |e, w| {
                if comp[v] != comp[w] {
                    adj[comp[v]].push((comp[w], e));
                    indeg[comp[w]] += 1;
                }
            });
        }
        let mut queue: Vec<usize> = (0..ncomp).filter(|&c| indeg[c] == 0).collect();
        let mut dist = vec![0i64; ncomp];
        let mut parent: Vec<Option<EdgeId>> = vec![None; ncomp];
        let mut qi = 0;
        let mut seen = 0;
        while qi < queue.len() {
            let c = queue[qi];
            qi += 1;
            seen += 1;
            for &(d, e) in &adj[c] {
                // longest badness path into d; first in-edge seeds a parent
                let nd = dist[c] + self.edge_f(e, phase3);
                if parent[d].is_none() || nd > dist[d] {
                    dist[d] = nd;
                    parent[d] = Some(e);
                }
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    queue.push(d);
                }
            }
        }
        assert_eq!(seen, ncomp, "component graph is cyclic");
        let t_ceil = t.ceil().max(1.0) as i64;
        let best = (0..ncomp).max_by_key(|&c| dist[c]).unwrap_or(0);
        if ncomp > 0 && dist[best] >= t_ceil {
            return self.build_chain(best, &parent, &comp, phase3, wa, wb);
        }
        // antichain: bucket bad edges by the badness distance of their left
        // endpoint; take the largest bucket, ties toward smaller distance
        let mut buckets: std::collections::BTreeMap<i64, Vec<EdgeId>> =
            std::collections::BTreeMap::new();
        for e in 0..self.g.m() {
            if self.edge_f(e, phase3) > 0 {
                let Edge { u, v, .. } = self.g.edge(e);
                let l = if self.is_left(u) { u } else { v };
                buckets.entry(dist[comp[l]]).or_default().push(e);
            }
        }
        let antichain = buckets
            .into_iter()
            .max_by_key(|(k, v)| (v.len(), std::cmp::Reverse(*k)))
            .map(|(_, v)| v)
            .unwrap_or_default();
        ChainOrAntichain::Antichain(antichain)
    }

    /// SCC ids of the tight subgraph G[0,0] (Kosaraju over window edges).
    fn tight_scc_ids(&self) -> Vec<usize> {
        let n = self.g.n();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        // first pass: finish order over forward tight edges
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut stack: Vec<(VertexId, usize)> = vec![(s, 0)];
            seen[s] = true;
            while let Some(&mut (v, ref mut cur)) = stack.last_mut() {
                let mut nexts: Vec<VertexId> = Vec::new();
                self.for_out_edges(v, 0, 0, |_, w| nexts.push(w));
                if *cur < nexts.len() {
                    let w = nexts[*cur];
                    *cur += 1;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(v);
                    stack.pop();
                }
            }
        }
        // second pass: reverse edges in reverse finish order
        let mut comp = vec![usize::MAX; n];
        let mut next_id = 0;
        for &s in order.iter().rev() {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next_id;
            while let Some(v) = stack.pop() {
                self.for_out_edges_rev(v, 0, 0, |_, w| {
                    if comp[w] == usize::MAX {
                        comp[w] = next_id;
                        stack.push(w);
                    }
                });
            }
            next_id += 1;
        }
        comp
    }

    /// Reconstructs the chain path from component parents, expands it
    /// through tight components, and trims it to start and end with bad
    /// edges.
    fn build_chain(
        &self,
        end_comp: usize,
        parent: &[Option<EdgeId>],
        comp: &[usize],
        phase3: bool,
        wa: i64,
        wb: i64,
    ) -> ChainOrAntichain {
        // component-level edge path, root first
        let mut comp_edges: Vec<EdgeId> = Vec::new();
        let mut c = end_comp;
        while let Some(e) = parent[c] {
            comp_edges.push(e);
            c = comp[self.edge_tail(e)];
        }
        comp_edges.reverse();
        // trim to the first/last bad edge
        let first = comp_edges.iter().position(|&e| self.edge_f(e, phase3) > 0).unwrap();
        let last = comp_edges.iter().rposition(|&e| self.edge_f(e, phase3) > 0).unwrap();
        let trimmed = &comp_edges[first..=last];
        // expand through tight components
        let mut vertices: Vec<VertexId> = Vec::new();
        let mut edges: Vec<EdgeId> = Vec::new();
        let start = self.edge_tail(trimmed[0]);
        vertices.push(start);
        for (k, &e) in trimmed.iter().enumerate() {
            let from = *vertices.last().unwrap();
            let tail = self.edge_tail(e);
            if tail != from {
                // connect inside the tight component
                debug_assert!(phase3 && comp[tail] == comp[from]);
                let (vs, es) = self.tight_path_within(from, tail, comp);
                vertices.extend(vs.into_iter().skip(1));
                edges.extend(es);
            }
            edges.push(e);
            vertices.push(self.edge_head(e));
            let _ = (k, wa, wb);
        }
        ChainOrAntichain::Chain { vertices, edges }
    }

    /// Directed head of an edge (left for matched, right for unmatched).
    fn edge_head(&self, e: EdgeId) -> VertexId {
        let Edge { u, v, .. } = self.g.edge(e);
        let (l, r) = if self.is_left(u) { (u, v) } else { (v, u) };
        if self.is_matched(e) {
            l
        } else {
            r
        }
    }

    fn edge_tail(&self, e: EdgeId) -> VertexId {
        let Edge { u, v, .. } = self.g.edge(e);
        u + v - self.edge_head(e)
    }

    /// Directed tight path between two vertices of one tight component.
    fn tight_path_within(
        &self,
        from: VertexId,
        to: VertexId,
        comp: &[usize],
    ) -> (Vec<VertexId>, Vec<EdgeId>) {
        let cid = comp[from];
        let mut parent: Vec<Option<EdgeId>> = vec![None; self.g.n()];
        let mut seen = vec![false; self.g.n()];
        seen[from] = true;
        let mut queue = vec![from];
        let mut qi = 0;
        while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            if v == to {
                break;
            }
            self.for_out_edges(v, 0, 0, |e, w| {
                if comp[w] == cid && !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    queue.push(w);
                }
            });
        }
        assert!(seen[to], "tight component not strongly connected");
        let mut vs = vec![to];
        let mut es = Vec::new();
        let mut cur = to;
        while cur != from {
            let e = parent[cur].unwrap();
            es.push(e);
            cur = self.g.edge(e).other(cur);
            vs.push(cur);
        }
        vs.reverse();
        es.reverse();
        (vs, es)
    }

    // ----- dual adjustments -----

    /// Antichain dual adjustment: pick the larger single-side set of
    /// adjustable endpoints, then shift duals along its reachability cone.
    fn antichain_adjust(&mut self, bad: &[EdgeId], phase3: bool) {
        let (wa, wb) = if phase3 { (0, 1) } else { (1, 3) };
        let x: Vec<VertexId> = if self.perfect {
            // negative duals are allowed: every vertex is adjustable
            bad.iter()
                .map(|&e| {
                    let Edge { u, v, .. } = self.g.edge(e);
                    if self.is_left(u) {
                        u
                    } else {
                        v
                    }
                })
                .collect()
        } else {
            // non-adjustable vertices lie on odd alternating paths from a
            // free vertex or from a matched vertex with a zero-dual mate
            let starts: Vec<VertexId> = (0..self.g.n())
                .filter(|&v| self.starting_vertex(v))
                .collect();
            let ends: Vec<VertexId> = (0..self.g.n())
                .filter(|&v| self.ending_vertex(v))
                .collect();
            let from_a = self.reach(&starts, wa, wb, true, None);
            let to_b = self.reach(&ends, wa, wb, false, None);
            let adjustable = |v: VertexId| {
                if self.is_left(v) {
                    !to_b[v]
                } else {
                    !from_a[v]
                }
            };
            let mut xl = Vec::new();
            let mut xr = Vec::new();
            for &e in bad {
                let Edge { u, v, .. } = self.g.edge(e);
                let (l, r) = if self.is_left(u) { (u, v) } else { (v, u) };
                if adjustable(l) {
                    xl.push(l);
                }
                if adjustable(r) {
                    xr.push(r);
                }
            }
            debug_assert!(
                xl.len() + xr.len() >= bad.len(),
                "some bad edge has no adjustable endpoint"
            );
            if xr.len() >= xl.len() {
                xr
            } else {
                xl
            }
        };
        if x.is_empty() {
            return;
        }
        let left_side = self.is_left(x[0]);
        debug_assert!(x.iter().all(|&v| self.is_left(v) == left_side));
        let seen = self.reach(&x, wa, wb, left_side, None);
        let delta = self.delta();
        for v in 0..self.g.n() {
            if seen[v] {
                if self.is_left(v) == left_side {
                    self.y_raw[v] -= delta; // even side
                } else {
                    self.y_raw[v] += delta; // odd side
                }
                if !self.perfect {
                    debug_assert!(self.y_raw[v] >= 0);
                }
            }
        }
    }

    /// Chain dual adjustment: flip the chain path, then restore the two
    /// freed endpoints with Hungarian searches over G[0,3].
    fn chain_adjust(&mut self, vertices: &[VertexId], edges: &[EdgeId]) -> Result<(), ExactError> {
        debug_assert!(self.is_matched(edges[0]) && self.is_matched(*edges.last().unwrap()));
        let w_before = self.truncated_matching_weight();
        let u = vertices[0];
        let v = *vertices.last().unwrap();
        debug_assert!(!self.is_left(u) && self.is_left(v));
        self.flip_edges(edges);
        debug_assert!(self.mate_edge[u].is_none() && self.mate_edge[v].is_none());
        let cap = 3 * self.g.n() as i64;
        if self.perfect {
            // force the search to rejoin the two endpoints
            let (du, path) = self.search(u, None, Some(v));
            debug_assert!(du <= cap);
            self.flip_edges(&path);
        } else {
            let (du, path_u, zu) = self.search_mwm(u, Some(v));
            if zu == v {
                self.flip_edges(&path_u);
            } else {
                let (dv, path_v, zv) = self.search_mwm(v, Some(u));
                debug_assert!(du + dv <= cap, "searches exceeded the 3n delta bound");
                if zv == u {
                    self.flip_edges(&path_v);
                } else {
                    // provably vertex-disjoint and still tight: flip both
                    if self.check {
                        for &e in path_u.iter().chain(path_v.iter()) {
                            if !self.is_matched(e) && self.slack_units(e) != 0 {
                                return Err(ExactError::Invariant(
                                    "search path lost tightness".into(),
                                ));
                            }
                        }
                    }
                    self.flip_edges(&path_u);
                    self.flip_edges(&path_v);
                }
            }
        }
        let w_after = self.truncated_matching_weight();
        if w_after < w_before {
            return Err(ExactError::Invariant(format!(
                "chain adjustment decreased the truncated weight: {w_before} -> {w_after}"
            )));
        }
        Ok(())
    }

    /// Hungarian search from a freed vertex x over G[0,3]: Dijkstra with
    /// Dial buckets on reduced costs, dual updates by max(0, Delta - d),
    /// and the resulting tight augmenting path from x.
    ///
    /// Returns (Delta in delta_i units, path edges, endpoint). Prefers the
    /// other freed endpoint on ties so a joint u-v path is taken whenever
    /// one exists.
    fn search_mwm(
        &mut self,
        x: VertexId,
        prefer: Option<VertexId>,
    ) -> (i64, Vec<EdgeId>, VertexId) {
        let (dist, parent, settled) = self.search_dijkstra(x);
        let y_units = |v: VertexId| self.y_raw[v] / self.delta();
        let mut z_min = x;
        let mut best = y_units(x); // h(x) = y(x)
        for &z in &settled {
            let d = dist[z] as i64;
            let h = if self.is_left(z) == self.is_left(x) {
                d + y_units(z)
            } else if self.mate_edge[z].is_none() {
                d
            } else {
                continue;
            };
            let better = h < best
                || (h == best
                    && (Some(z) == prefer && Some(z_min) != prefer
                        || Some(z_min) != prefer && z < z_min));
            if better {
                best = h;
                z_min = z;
            }
        }
        let delta_units = best;
        self.apply_search_adjustment(&dist, &settled, x, delta_units);
        let path = self.trace_search_path(x, z_min, &parent);
        (delta_units, path, z_min)
    }

    /// Perfect-matching variant: the target is forced and h-values are not
    /// needed (duals may go negative).
    fn search(
        &mut self,
        x: VertexId,
        _prefer: Option<VertexId>,
        force: Option<VertexId>,
    ) -> (i64, Vec<EdgeId>) {
        let (dist, parent, settled) = self.search_dijkstra(x);
        let target = force.expect("perfect search needs a target");
        assert!(dist[target] != u32::MAX, "forced search target unreachable");
        let delta_units = dist[target] as i64;
        self.apply_search_adjustment(&dist, &settled, x, delta_units);
        let path = self.trace_search_path(x, target, &parent);
        (delta_units, path)
    }

    /// Dial-bucket Dijkstra over the oriented graph (or its transpose for a
    /// right-side source) with reduced costs: 0 on matched edges,
    /// slack/delta on unmatched ones. Distances beyond 3n are unreachable.
    fn search_dijkstra(&self, x: VertexId) -> (Vec<u32>, Vec<Option<EdgeId>>, Vec<VertexId>) {
        let n = self.g.n();
        let cap = 3 * n as i64;
        let forward = self.is_left(x);
        let mut dist = vec![u32::MAX; n];
        let mut parent: Vec<Option<EdgeId>> = vec![None; n];
        let mut settled_list = Vec::new();
        let mut settled = vec![false; n];
        let mut buckets: Vec<Vec<VertexId>> = vec![Vec::new(); cap as usize + 1];
        dist[x] = 0;
        buckets[0].push(x);
        for d in 0..=cap as usize {
            let mut bi = 0;
            while bi < buckets[d].len() {
                let v = buckets[d][bi];
                bi += 1;
                if settled[v] || dist[v] as usize != d {
                    continue;
                }
                settled[v] = true;
                settled_list.push(v);
                let relax = |e: EdgeId,
                             w: VertexId,
                             dist: &mut Vec<u32>,
                             parent: &mut Vec<Option<EdgeId>>,
                             buckets: &mut Vec<Vec<VertexId>>| {
                    let cost = if self.is_matched(e) { 0 } else { self.slack_units(e) };
                    debug_assert!(cost >= 0, "domination violated in search");
                    let nd = d as i64 + cost;
                    if nd <= cap && (dist[w] == u32::MAX || (nd as u32) < dist[w]) {
                        dist[w] = nd as u32;
                        parent[w] = Some(e);
                        buckets[nd as usize].push(w);
                    }
                };
                if forward {
                    if self.is_left(v) {
                        for &e in self.g.adjacent(v) {
                            if !self.is_matched(e) {
                                relax(e, self.g.edge(e).other(v), &mut dist, &mut parent, &mut buckets);
                            }
                        }
                    } else if let Some(me) = self.mate_edge[v] {
                        relax(me, self.g.edge(me).other(v), &mut dist, &mut parent, &mut buckets);
                    }
                } else {
                    if !self.is_left(v) {
                        for &e in self.g.adjacent(v) {
                            if !self.is_matched(e) {
                                relax(e, self.g.edge(e).other(v), &mut dist, &mut parent, &mut buckets);
                            }
                        }
                    } else if let Some(me) = self.mate_edge[v] {
                        relax(me, self.g.edge(me).other(v), &mut dist, &mut parent, &mut buckets);
                    }
                }
            }
        }
        (dist, parent, settled_list)
    }

    fn apply_search_adjustment(
        &mut self,
        dist: &[u32],
        settled: &[VertexId],
        x: VertexId,
        delta_units: i64,
    ) {
        let delta = self.delta();
        let same_side = self.is_left(x);
        for &z in settled {
            let slack = delta_units - dist[z] as i64;
            if slack > 0 {
                if self.is_left(z) == same_side {
                    self.y_raw[z] -= slack * delta;
                    if !self.perfect {
                        debug_assert!(self.y_raw[z] >= 0, "search drove y({z}) negative");
                    }
                } else {
                    self.y_raw[z] += slack * delta;
                }
            }
        }
    }

    fn trace_search_path(
        &self,
        x: VertexId,
        z: VertexId,
        parent: &[Option<EdgeId>],
    ) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        let mut cur = z;
        while cur != x {
            let e = parent[cur].expect("search path broken");
            edges.push(e);
            cur = self.g.edge(e).other(cur);
        }
        edges.reverse();
        edges
    }

    // ----- Phase II scale -----

    fn phase2_scale(
        &mut self,
        i: u32,
        trace: &mut Option<&mut ExactTraceFn<'_>>,
    ) -> Result<(), ExactError> {
        self.scale = i;
        let delta = self.delta();
        for v in 0..self.n_left {
            self.y_raw[v] += delta;
        }
        if !self.perfect {
            // one Phase-I-style iteration on G[1,3] restores zero free duals
            // (clause 4 is knowingly off by delta_i until it completes)
            self.augment_free_paths(1, 3);
            self.adjust_from_left_free(1, 3, delta);
            if self.check {
                for v in 0..self.g.n() {
                    if self.mate_edge[v].is_none() && self.y_raw[v] != 0 {
                        return Err(ExactError::Invariant(format!(
                            "free vertex {v} kept dual {} entering scale {i}",
                            self.y_raw[v]
                        )));
                    }
                }
            }
        }
        self.check_now(false)?;
        let bound = 4.0 * (2.0 * self.g.n() as f64).sqrt() + 1.0;
        loop {
            for cyc in self.cycle_search(1, 3) {
                self.flip_edges(&cyc);
            }
            self.check_now(false)?;
            if !self.perfect {
                for p in self.path_search(1, 3) {
                    self.flip_edges(&p);
                }
                self.check_now(false)?;
            }
            let (b, _bad) = self.badness(false);
            self.emit_trace(trace, 2, b);
            if b == 0 {
                break;
            }
            self.stats.phase2_rounds[i as usize] += 1;
            debug_assert!(
                (self.stats.phase2_rounds[i as usize] as f64) <= bound,
                "phase II rounds exceeded 4 sqrt(2n)"
            );
            let t = if self.perfect {
                (b as f64 / 2.0).sqrt()
            } else {
                (b as f64).sqrt() / 2.0
            };
            match self.find_chain_or_antichain(t, false) {
                ChainOrAntichain::Chain { vertices, edges } => {
                    self.chain_adjust(&vertices, &edges)?;
                }
                ChainOrAntichain::Antichain(edges) => {
                    debug_assert!(!edges.is_empty());
                    self.antichain_adjust(&edges, false);
                }
            }
            self.check_now(false)?;
        }
        self.check_now(true)?;
        let w = self.matching_weight();
        self.stats.scale_end_weights.push((i, w));
        Ok(())
    }

    // ----- Phase III -----

    /// Finds one eligible augmentation in G[0,1] that strictly increases
    /// the weight: a cycle through a non-tight matched edge (both endpoints
    /// in one SCC), or a path through one between zero-dual endpoints.
    fn phase3_augmentation(&mut self) -> bool {
        let (_, bad) = self.badness(true);
        if bad.is_empty() {
            return false;
        }
        let comp = {
            // SCCs of the directed window [0,1]
            let n = self.g.n();
            let mut order = Vec::with_capacity(n);
            let mut seen = vec![false; n];
            for s in 0..n {
                if seen[s] {
                    continue;
                }
                let mut stack: Vec<(VertexId, usize)> = vec![(s, 0)];
                seen[s] = true;
                while let Some(&mut (v, ref mut cur)) = stack.last_mut() {
                    let mut nexts: Vec<VertexId> = Vec::new();
                    self.for_out_edges(v, 0, 1, |_, w| nexts.push(w));
                    if *cur < nexts.len() {
                        let w = nexts[*cur];
                        *cur += 1;
                        if !seen[w] {
                            seen[w] = true;
                            stack.push((w, 0));
                        }
                    } else {
                        order.push(v);
                        stack.pop();
                    }
                }
            }
            let mut comp = vec![usize::MAX; n];
            let mut next_id = 0;
            for &s in order.iter().rev() {
                if comp[s] != usize::MAX {
                    continue;
                }
                let mut stack = vec![s];
                comp[s] = next_id;
                while let Some(v) = stack.pop() {
                    self.for_out_edges_rev(v, 0, 1, |_, w| {
                        if comp[w] == usize::MAX {
                            comp[w] = next_id;
                            stack.push(w);
                        }
                    });
                }
                next_id += 1;
            }
            comp
        };
        for &e in &bad {
            let Edge { u, v, .. } = self.g.edge(e);
            if comp[u] == comp[v] {
                // augmenting cycle through e: close l -> r inside the SCC
                let head = self.edge_head(e); // left endpoint
                let tail = self.edge_tail(e); // right endpoint
                let (_, mut es) = self.window_path_within(head, tail, &comp);
                es.push(e);
                let w_before = self.matching_weight();
                self.flip_edges(&es);
                let w_after = self.matching_weight();
                assert!(w_after > w_before, "phase III cycle did not gain weight");
                self.stats.phase3_augmentations += 1;
                return true;
            }
        }
        if self.perfect {
            return false; // cycles only
        }
        // path case: A-to-r and l-to-B reachability through a bad edge
        let starts: Vec<VertexId> =
            (0..self.g.n()).filter(|&v| self.starting_vertex(v)).collect();
        let ends: Vec<VertexId> = (0..self.g.n()).filter(|&v| self.ending_vertex(v)).collect();
        let mut par_a: Vec<Option<EdgeId>> = vec![None; self.g.n()];
        let from_a = self.reach(&starts, 0, 1, true, Some(&mut par_a));
        let mut par_b: Vec<Option<EdgeId>> = vec![None; self.g.n()];
        let to_b = self.reach(&ends, 0, 1, false, Some(&mut par_b));
        for &e in &bad {
            let head = self.edge_head(e);
            let tail = self.edge_tail(e);
            if from_a[tail] && to_b[head] {
                let mut edges = Vec::new();
                // prefix: from some starting vertex down to tail
                let mut cur = tail;
                while let Some(pe) = par_a[cur] {
                    edges.push(pe);
                    cur = self.g.edge(pe).other(cur);
                }
                edges.reverse();
                edges.push(e);
                // suffix: from head out to some ending vertex
                let mut cur = head;
                while let Some(pe) = par_b[cur] {
                    edges.push(pe);
                    cur = self.g.edge(pe).other(cur);
                }
                let w_before = self.matching_weight();
                self.flip_edges(&edges);
                let w_after = self.matching_weight();
                assert!(w_after > w_before, "phase III path did not gain weight");
                self.stats.phase3_augmentations += 1;
                return true;
            }
        }
        false
    }

    /// Directed [0,1]-window path between two vertices of one component.
    fn window_path_within(
        &self,
        from: VertexId,
        to: VertexId,
        comp: &[usize],
    ) -> (Vec<VertexId>, Vec<EdgeId>) {
        let cid = comp[from];
        let mut parent: Vec<Option<EdgeId>> = vec![None; self.g.n()];
        let mut seen = vec![false; self.g.n()];
        seen[from] = true;
        let mut queue = vec![from];
        let mut qi = 0;
        while qi < queue.len() {
            let v = queue[qi];
            qi += 1;
            self.for_out_edges(v, 0, 1, |e, w| {
                if comp[w] == cid && !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    queue.push(w);
                }
            });
        }
        assert!(seen[to], "component path missing");
        let mut vs = vec![to];
        let mut es = Vec::new();
        let mut cur = to;
        while cur != from {
            let e = parent[cur].unwrap();
            es.push(e);
            cur = self.g.edge(e).other(cur);
            vs.push(cur);
        }
        vs.reverse();
        es.reverse();
        (vs, es)
    }

    fn phase3(&mut self, trace: &mut Option<&mut ExactTraceFn<'_>>) -> Result<(), ExactError> {
        self.scale = self.params.levels;
        let n = self.g.n().max(1);
        let aug_bound = (n as f64).sqrt() + 1e-9;
        let round_bound = 2.0 * (2.0 * n as f64).sqrt() + 1.0;
        loop {
            while self.phase3_augmentation() {
                self.check_now(false)?;
                debug_assert!(
                    (self.stats.phase3_augmentations as f64) <= aug_bound,
                    "phase III exceeded sqrt(n) augmentations"
                );
            }
            let (b, bad) = self.badness(true);
            self.emit_trace(trace, 3, b);
            if b == 0 {
                break;
            }
            self.stats.phase3_rounds += 1;
            debug_assert!(
                (self.stats.phase3_rounds as f64) <= round_bound,
                "phase III rounds exceeded 2 sqrt(2n)"
            );
            let t = (b as f64 / 2.0).sqrt();
            match self.find_chain_or_antichain(t, true) {
                ChainOrAntichain::Chain { vertices, edges } => {
                    self.chain_adjust(&vertices, &edges)?;
                }
                ChainOrAntichain::Antichain(edges) => {
                    debug_assert!(!edges.is_empty());
                    self.antichain_adjust(&edges, true);
                }
            }
            self.check_now(false)?;
            let _ = bad;
        }
        Ok(())
    }

    // ----- perfect matching start -----

    /// Hopcroft-Karp: phases of BFS leveling plus a maximal set of disjoint
    /// shortest augmenting paths, until the matching is perfect.
    fn find_perfect_matching(&mut self) -> Result<(), ExactError> {
        let side = self.n_left;
        const INF: u32 = u32::MAX;
        loop {
            // BFS levels on left vertices
            let mut level = vec![INF; side];
            let mut queue: Vec<VertexId> = Vec::new();
            for l in 0..side {
                if self.mate_edge[l].is_none() {
                    level[l] = 0;
                    queue.push(l);
                }
            }
            let mut qi = 0;
            let mut found = false;
            while qi < queue.len() {
                let l = queue[qi];
                qi += 1;
                for &e in self.g.adjacent(l) {
                    if self.is_matched(e) {
                        continue;
                    }
                    let r = self.g.edge(e).other(l);
                    match self.mate_edge[r] {
                        None => found = true,
                        Some(me) => {
                            let l2 = self.g.edge(me).other(r);
                            if level[l2] == INF {
                                level[l2] = level[l] + 1;
                                queue.push(l2);
                            }
                        }
                    }
                }
            }
            if !found {
                break;
            }
            for l in 0..side {
                if self.mate_edge[l].is_none() {
                    self.hk_try(l, &mut level);
                }
            }
        }
        if (0..side).any(|v| self.mate_edge[v].is_none()) {
            return Err(ExactError::NoPerfectMatching);
        }
        Ok(())
    }

    fn hk_try(&mut self, l: VertexId, level: &mut [u32]) -> bool {
        let g = self.g;
        for &e in g.adjacent(l) {
            if self.is_matched(e) {
                continue;
            }
            let r = g.edge(e).other(l);
            let ok = match self.mate_edge[r] {
                None => true,
                Some(me) => {
                    let l2 = g.edge(me).other(r);
                    level[l2] == level[l] + 1 && self.hk_try(l2, level)
                }
            };
            if ok {
                self.mate_edge[r] = Some(e);
                self.mate_edge[l] = Some(e);
                level[l] = u32::MAX;
                return true;
            }
        }
        level[l] = u32::MAX;
        false
    }

    // ----- invariant checking -----

    fn check_now(&self, scale_end: bool) -> Result<(), ExactError> {
        if !self.check {
            return Ok(());
        }
        let violations = if self.perfect {
            crate::check::check_property4(self, scale_end)
        } else {
            crate::check::check_property3(self, scale_end)
        };
        match violations.first() {
            Some(v) => Err(ExactError::Invariant(format!("{}: {}", v.clause, v.detail))),
            None => Ok(()),
        }
    }

    fn finish(self) -> ExactOutcome {
        let matching = Matching::from_mate_edges(self.g, &self.mate_edge);
        ExactOutcome { matching, stats: self.stats }
    }
}

/// Exact maximum weight matching on a bipartite graph.
pub fn run_exact_mwm(g: &WeightedGraph, config: ExactConfig<'_>) -> Result<ExactOutcome, ExactError> {
    let mut st = ExactState::new(g, false, config.check_invariants)?;
    st.stats.phase2_rounds = vec![0; st.params.levels as usize + 1];
    let mut trace = config.trace;
    st.phase1(&mut trace)?;
    for i in 1..=st.params.levels {
        st.phase2_scale(i, &mut trace)?;
    }
    st.phase3(&mut trace)?;
    Ok(st.finish())
}

/// Exact maximum weight perfect matching on an equal-sided bipartite graph.
pub fn run_exact_mwpm(
    g: &WeightedGraph,
    config: ExactConfig<'_>,
) -> Result<ExactOutcome, ExactError> {
    let mut st = ExactState::new(g, true, config.check_invariants)?;
    st.stats.phase2_rounds = vec![0; st.params.levels as usize + 1];
    let mut trace = config.trace;
    st.find_perfect_matching()?;
    let delta0 = st.params.delta0_raw;
    for v in 0..st.n_left {
        st.y_raw[v] = delta0;
    }
    st.in_phase1 = false;
    st.check_now(true)?;
    for i in 1..=st.params.levels {
        st.phase2_scale(i, &mut trace)?;
    }
    st.phase3(&mut trace)?;
    Ok(st.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, generate_with_perfect_matching, GenKind};
    use crate::oracle::{brute_force_mwpm, cubic_hungarian};

    fn cfg() -> ExactConfig<'static> {
        ExactConfig { check_invariants: true, trace: None }
    }

    #[test]
    fn single_edge_mwm() {
        let g = WeightedGraph::new(&[(0, 1, 5)], 2, Some(1)).unwrap();
        let out = run_exact_mwm(&g, cfg()).unwrap();
        assert_eq!(out.matching.weight, 5);
        out.matching.validate(&g).unwrap();
    }

    #[test]
    fn two_by_two_mwm() {
        let g = WeightedGraph::new(&[(0, 2, 3), (0, 3, 1), (1, 2, 2), (1, 3, 4)], 4, Some(2))
            .unwrap();
        let out = run_exact_mwm(&g, cfg()).unwrap();
        assert_eq!(out.matching.weight, 7);
    }

    #[test]
    fn mwm_not_perfect() {
        let g = WeightedGraph::new(&[(0, 2, 10), (1, 2, 1)], 4, Some(2)).unwrap();
        let out = run_exact_mwm(&g, cfg()).unwrap();
        assert_eq!(out.matching.weight, 10);
        assert_eq!(out.matching.size, 1);
    }

    #[test]
    fn not_bipartite_rejected() {
        let g = WeightedGraph::new(&[(0, 1, 5)], 2, None).unwrap();
        assert!(matches!(run_exact_mwm(&g, cfg()), Err(ExactError::NotBipartite)));
    }

    #[test]
    fn empty_graph() {
        let g = WeightedGraph::new(&[], 4, Some(2)).unwrap();
        let out = run_exact_mwm(&g, cfg()).unwrap();
        assert_eq!(out.matching.weight, 0);
    }

    #[test]
    fn random_mwm_matches_hungarian() {
        for seed in 0..120u64 {
            let nl = 1 + (seed as usize) % 7;
            let nr = 1 + (seed as usize * 3) % 7;
            let m = 1 + (seed as usize * 5) % (nl * nr);
            let g = generate(
                GenKind::RandomBipartite { n_left: nl, n_right: nr },
                m,
                100,
                seed,
            )
            .unwrap();
            let exact = run_exact_mwm(&g, cfg()).unwrap();
            let oracle = cubic_hungarian(&g).unwrap();
            assert_eq!(exact.matching.weight, oracle.weight, "seed {seed}");
            exact.matching.validate(&g).unwrap();
        }
    }

    #[test]
    fn mwpm_two_by_two() {
        let g = WeightedGraph::new(&[(0, 2, 3), (0, 3, 1), (1, 2, 2), (1, 3, 4)], 4, Some(2))
            .unwrap();
        let out = run_exact_mwpm(&g, cfg()).unwrap();
        assert_eq!(out.matching.weight, 7);
        assert_eq!(out.matching.size, 2);
    }

    #[test]
    fn mwpm_forced_unique() {
        let g = WeightedGraph::new(&[(0, 2, 10), (1, 3, 1)], 4, Some(2)).unwrap();
        let out = run_exact_mwpm(&g, cfg()).unwrap();
        assert_eq!(out.matching.weight, 11);
    }

    #[test]
    fn mwpm_infeasible() {
        let g = WeightedGraph::new(&[(0, 2, 3), (1, 2, 2)], 4, Some(2)).unwrap();
        assert!(matches!(run_exact_mwpm(&g, cfg()), Err(ExactError::NoPerfectMatching)));
    }

    #[test]
    fn mwpm_unequal_sides() {
        let g = WeightedGraph::new(&[(0, 3, 1)], 5, Some(3)).unwrap();
        assert!(matches!(run_exact_mwpm(&g, cfg()), Err(ExactError::UnequalSides(3, 2))));
    }

    /// The Dial-bucket Dijkstra inside Search agrees with a plain
    /// binary-heap Dijkstra over the same reduced costs.
    #[test]
    fn dial_buckets_match_naive_dijkstra() {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        for seed in 0..40u64 {
            let side = 3 + (seed as usize) % 5;
            let g = generate_with_perfect_matching(side, side, 20, seed).unwrap();
            let mut st = ExactState::new(&g, false, false).unwrap();
            st.scale = st.params.levels;
            let delta = st.delta();
            // feasible duals: y(left) = max incident weight, rounded up to
            // the grid; a simple greedy matching on tight-ish edges
            for l in 0..side {
                let top = g.adjacent(l).iter().map(|&e| g.edge(e).w).max().unwrap_or(0);
                let raw = st.params.weight_raw(top);
                st.y_raw[l] = ((raw + delta - 1) / delta) * delta;
            }
            for e in 0..g.m() {
                let Edge { u, v, .. } = g.edge(e);
                if st.mate_edge[u].is_none()
                    && st.mate_edge[v].is_none()
                    && st.slack_units(e) <= 1
                {
                    st.mate_edge[u] = Some(e);
                    st.mate_edge[v] = Some(e);
                }
            }
            for x in 0..g.n() {
                let (dist, _, _) = st.search_dijkstra(x);
                // naive Dijkstra over the same orientation
                let cap = 3 * g.n() as i64;
                let mut nd = vec![i64::MAX; g.n()];
                nd[x] = 0;
                let mut heap = BinaryHeap::new();
                heap.push(Reverse((0i64, x)));
                while let Some(Reverse((d, v))) = heap.pop() {
                    if d > nd[v] {
                        continue;
                    }
                    let mut relax = |e: EdgeId, w: VertexId| {
                        let c = if st.is_matched(e) { 0 } else { st.slack_units(e) };
                        if d + c < nd[w] {
                            nd[w] = d + c;
                            heap.push(Reverse((d + c, w)));
                        }
                    };
                    if st.is_left(x) {
                        if st.is_left(v) {
                            for &e in g.adjacent(v) {
                                if !st.is_matched(e) {
                                    relax(e, g.edge(e).other(v));
                                }
                            }
                        } else if let Some(me) = st.mate_edge[v] {
                            relax(me, g.edge(me).other(v));
                        }
                    } else if !st.is_left(v) {
                        for &e in g.adjacent(v) {
                            if !st.is_matched(e) {
                                relax(e, g.edge(e).other(v));
                            }
                        }
                    } else if let Some(me) = st.mate_edge[v] {
                        relax(me, g.edge(me).other(v));
                    }
                }
                for v in 0..g.n() {
                    let bucket = if dist[v] == u32::MAX { None } else { Some(dist[v] as i64) };
                    let naive = if nd[v] == i64::MAX || nd[v] > cap { None } else { Some(nd[v]) };
                    assert_eq!(bucket, naive, "seed {seed} x {x} v {v}");
                }
            }
        }
    }

    #[test]
    fn random_mwpm_matches_brute_force() {
        for seed in 0..60u64 {
            let side = 2 + (seed as usize) % 5;
            let g = generate_with_perfect_matching(side, side * 2, 60, seed).unwrap();
            let exact = run_exact_mwpm(&g, cfg()).unwrap();
            let oracle = brute_force_mwpm(&g).unwrap();
            assert_eq!(exact.matching.weight, oracle.weight, "seed {seed}");
            assert_eq!(exact.matching.size, side);
            exact.matching.validate(&g).unwrap();
        }
    }
}
