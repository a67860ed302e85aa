//! (1-eps)-approximate maximum weight matching on general graphs.
//!
//! The solver runs log N scales. Within each scale it alternates a search
//! for a maximal set of eligible augmenting paths (contracting blossoms as
//! they are met), a sweep that shrinks any remaining blossoms reachable
//! from free vertices, a dual adjustment of +-delta_i/2 driven by the
//! even/odd reachability labels, and dissolution of root blossoms whose
//! dual reaches zero. The linear-time variant additionally confines every
//! edge to the scales [scale(e), scale(e) + gamma + 2], commits matched
//! edges whose window closed, and discards unmatched leftovers.

use crate::blossom::{BlossomForest, NodeId};
use crate::check::{self, Violation};
use crate::graph::{Edge, EdgeId, GraphError, Matching, VertexId, WeightedGraph};
use crate::scale::{make_scale_params, msb, ScaleParams, SolveMode};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMode {
    LogN,
    Linear,
}

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

/// Per-iteration trace record: scale, iteration within the scale, current
/// matching size, and the common free-vertex dual in raw fixed-point units.
pub type ApproxTraceFn<'a> = dyn FnMut(u32, u64, usize, i64) + 'a;

#[derive(Default)]
pub struct ApproxConfig<'a> {
    pub mode: Option<ApproxMode>,
    pub check_invariants: bool,
    pub trace: Option<&'a mut ApproxTraceFn<'a>>,
}

#[derive(Debug, Clone, Default)]
pub struct ApproxStats {
    /// Dual adjustment steps executed per scale.
    pub dual_adjustments: Vec<u64>,
    pub augmentations: u64,
    pub blossoms_formed: u64,
    pub committed_edges: u64,
    pub discarded_edges: u64,
}

#[derive(Debug, Clone)]
pub struct ApproxOutcome {
    pub matching: Matching,
    pub stats: ApproxStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    None,
    Even,
    Odd,
}

/// Per-scale adjacency entry with the other endpoint and the truncated
/// weight inlined, so an eligibility probe touches one sequential record
/// plus the other endpoint's hot data.
#[derive(Debug, Clone, Copy, Default)]
struct AdjEntry {
    edge: u32,
    other: u32,
    trunc_raw: i64,
}

/// Hot per-vertex record: the dual, the root blossom, liveness, and (for
/// vertices that are their own root) the search label share one cache line,
/// so the inner search pays one random read per vertex it probes.
#[derive(Debug, Clone, Copy)]
struct VertexHot {
    y_raw: i64,
    root: u32,
    dead: bool,
    label: Label,
}

/// Full solver state; exposed crate-wide so the invariant checker can
/// inspect it between steps.
pub struct ApproxState<'g> {
    pub(crate) g: &'g WeightedGraph,
    pub(crate) params: ScaleParams,
    pub(crate) mode: ApproxMode,
    pub(crate) scale: u32,
    vert: Vec<VertexHot>,
    pub(crate) mate_edge: Vec<Option<EdgeId>>,
    pub(crate) forest: BlossomForest,
    /// Entry scale while the edge stays in M or in some blossom cycle.
    pub(crate) edge_type: Vec<Option<u32>>,
    /// Number of alive blossom cycles containing the edge.
    pub(crate) in_cycles: Vec<u32>,
    pub(crate) edge_scale: Vec<u32>,
    pub(crate) committed: Vec<bool>,
    pub(crate) discarded: Vec<bool>,
    /// Common y-value of free vertices, tracked as a scalar so the scale
    /// loop is well defined even when no free vertex remains.
    pub(crate) free_y_raw: i64,
    // search workspace, reused across iterations
    label_nt: Vec<Label>,
    parent: Vec<Option<(EdgeId, NodeId)>>,
    labeled: Vec<NodeId>,
    // per-scale adjacency in compressed form, heaviest first per vertex
    adj_off: Vec<u32>,
    adj_ent: Vec<AdjEntry>,
    /// Vertices still free; only ever shrinks (matched vertices never free
    /// up again under path augmentation).
    free_list: Vec<VertexId>,
    matched_pairs: usize,
    stats: ApproxStats,
}

/// scale(e): the scale at which weight w first clears the eligibility
/// threshold mu_i = N/2^(i+1) + delta_i (mu_L = 0, mu_{-1} = infinity).
/// Computed from the most significant bit of w plus at most two threshold
/// comparisons.
pub fn scale_of_edge(params: &ScaleParams, w: i64) -> u32 {
    debug_assert!(w >= 1 && w <= params.n_pow2);
    let levels = params.levels as i64;
    let k = msb(w) as i64;
    let w_raw = params.weight_raw(w);
    let n_raw = params.weight_raw(params.n_pow2);
    let above = |i: i64| -> bool {
        // w >= mu_i
        if i < 0 {
            false
        } else if i >= levels {
            true
        } else {
            w_raw >= (n_raw >> (i + 1)) + params.delta_raw(i as u32)
        }
    };
    let mut i = (levels - 1 - k).max(0);
    let mut bumps = 0;
    while !above(i) {
        i += 1;
        bumps += 1;
        debug_assert!(bumps <= 2, "scale search left the two-candidate window");
    }
    debug_assert!(i == 0 || !above(i - 1));
    i as u32
}

impl<'g> ApproxState<'g> {
    fn new(g: &'g WeightedGraph, eps: f64, mode: ApproxMode) -> Result<Self, GraphError> {
        let params = make_scale_params(g.weight_max(), eps, SolveMode::Approx, g.n())?;
        let m = g.m();
        let init_y = params.weight_raw(params.n_pow2) / 2 - params.delta0_raw / 2;
        let edge_scale = (0..m)
            .map(|e| scale_of_edge(&params, g.edge(e).w))
            .collect();
        Ok(ApproxState {
            g,
            params,
            mode,
            scale: 0,
            vert: (0..g.n())
                .map(|v| VertexHot {
                    y_raw: init_y,
                    root: v as u32,
                    dead: false,
                    label: Label::None,
                })
                .collect(),
            mate_edge: vec![None; g.n()],
            forest: BlossomForest::new(g.n()),
            edge_type: vec![None; m],
            in_cycles: vec![0; m],
            edge_scale,
            committed: vec![false; m],
            discarded: vec![false; m],
            free_y_raw: init_y,
            label_nt: Vec::new(),
            parent: Vec::new(),
            labeled: Vec::new(),
            adj_off: vec![0; g.n() + 1],
            adj_ent: Vec::new(),
            free_list: (0..g.n()).collect(),
            matched_pairs: 0,
            stats: ApproxStats::default(),
        })
    }

    pub(crate) fn delta_raw(&self) -> i64 {
        self.params.delta_raw(self.scale)
    }

    pub(crate) fn y(&self, v: VertexId) -> i64 {
        self.vert[v].y_raw
    }

    pub(crate) fn is_dead(&self, v: VertexId) -> bool {
        self.vert[v].dead
    }

    fn label_of(&self, node: NodeId) -> Label {
        if node < self.g.n() {
            self.vert[node].label
        } else {
            self.label_nt[node - self.g.n()]
        }
    }

    fn set_label(&mut self, node: NodeId, l: Label) {
        if node < self.g.n() {
            self.vert[node].label = l;
        } else {
            let idx = node - self.g.n();
            if idx >= self.label_nt.len() {
                self.label_nt.resize(idx + 1, Label::None);
            }
            self.label_nt[idx] = l;
        }
    }

    fn refresh_roots(&mut self, node: NodeId) {
        for i in 0..self.forest.vertices(node).len() {
            let v = self.forest.vertices(node)[i];
            self.vert[v].root = node as u32;
        }
    }

    pub(crate) fn is_matched(&self, e: EdgeId) -> bool {
        self.mate_edge[self.g.edge(e).u] == Some(e)
    }

    /// True while the edge belongs to M or to some blossom cycle.
    pub(crate) fn in_tight_set(&self, e: EdgeId) -> bool {
        self.is_matched(e) || self.in_cycles[e] > 0
    }

    /// yz across root blossoms (no common blossom, so just y(u) + y(v)).
    fn yz_cross(&self, e: EdgeId) -> i64 {
        let Edge { u, v, .. } = self.g.edge(e);
        self.vert[u].y_raw + self.vert[v].y_raw
    }

    pub(crate) fn yz_full(&self, e: EdgeId) -> i64 {
        let Edge { u, v, .. } = self.g.edge(e);
        self.vert[u].y_raw + self.vert[v].y_raw + self.forest.z_sum_common(u, v)
    }

    pub(crate) fn truncated(&self, e: EdgeId) -> i64 {
        self.params.truncated_raw(self.g.edge(e).w, self.scale)
    }

    /// Definition 1/3 (iii): matched, cross-root. The linear variant also
    /// requires the edge's scale window to still be open.
    fn eligible_matched(&self, e: EdgeId) -> bool {
        if self.mode == ApproxMode::Linear && self.edge_scale[e] + self.params.gamma() < self.scale
        {
            return false;
        }
        let slack = self.yz_cross(e) - self.truncated(e);
        slack >= 0 && slack % self.delta_raw() == 0
    }

    /// Lemma 7(1): at scales before the last, an eligible edge must weigh at
    /// least N/2^(i+1) + delta_i.
    fn check_weight_floor(&self, e: EdgeId, violations: &mut Vec<Violation>) {
        if self.scale >= self.params.levels {
            return;
        }
        let floor =
            (self.params.weight_raw(self.params.n_pow2) >> (self.scale + 1)) + self.delta_raw();
        if self.params.weight_raw(self.g.edge(e).w) < floor {
            violations.push(Violation {
                clause: "weight-in-scale floor".into(),
                detail: format!(
                    "edge {e} (w = {}) eligible at scale {} below N/2^(i+1) + delta_i",
                    self.g.edge(e).w,
                    self.scale
                ),
            });
        }
    }

    /// Rebuilds the per-scale compressed adjacency (everything in log-N
    /// mode; the open scale windows in linear mode), heaviest first per
    /// vertex so probes can stop at the first hopelessly light edge.
    fn rebuild_active_adjacency(&mut self) {
        let n = self.g.n();
        let gamma = self.params.gamma();
        let live = |st: &Self, e: EdgeId| -> bool {
            if st.discarded[e] {
                return false;
            }
            if st.mode == ApproxMode::Linear {
                let s = st.edge_scale[e];
                if st.scale < s || st.scale > s + gamma + 2 {
                    return false;
                }
            }
            let Edge { u, v, .. } = st.g.edge(e);
            !st.vert[u].dead && !st.vert[v].dead
        };
        let mut counts = vec![0u32; n + 1];
        for e in 0..self.g.m() {
            if live(self, e) {
                let Edge { u, v, .. } = self.g.edge(e);
                counts[u] += 1;
                counts[v] += 1;
            }
        }
        let mut off = vec![0u32; n + 1];
        for v in 0..n {
            off[v + 1] = off[v] + counts[v];
        }
        let total = off[n] as usize;
        let mut cursor = off.clone();
        let mut entries = vec![AdjEntry::default(); total];
        for e in 0..self.g.m() {
            if live(self, e) {
                let Edge { u, v, .. } = self.g.edge(e);
                let trunc_raw = self.truncated(e);
                entries[cursor[u] as usize] =
                    AdjEntry { edge: e as u32, other: v as u32, trunc_raw };
                cursor[u] += 1;
                entries[cursor[v] as usize] =
                    AdjEntry { edge: e as u32, other: u as u32, trunc_raw };
                cursor[v] += 1;
            }
        }
        for v in 0..n {
            entries[off[v] as usize..off[v + 1] as usize]
                .sort_unstable_by_key(|entry| std::cmp::Reverse(entry.trunc_raw));
        }
        self.adj_off = off;
        self.adj_ent = entries;
    }

    fn stamp_entry(&mut self, e: EdgeId) {
        if self.edge_type[e].is_none() {
            self.edge_type[e] = Some(self.scale);
        }
    }

    fn unstamp_if_out(&mut self, e: EdgeId) {
        if !self.in_tight_set(e) {
            self.edge_type[e] = None;
        }
    }

    /// Flips the matching along an expanded augmenting path and updates
    /// blossom bases and type stamps.
    fn augment_along(&mut self, path: &crate::blossom::ExpandedPath) {
        debug_assert_eq!(path.edges.len() % 2, 1);
        for (k, &e) in path.edges.iter().enumerate() {
            if k % 2 == 1 {
                debug_assert!(self.is_matched(e));
                let Edge { u, v, .. } = self.g.edge(e);
                self.mate_edge[u] = None;
                self.mate_edge[v] = None;
            }
        }
        for (k, &e) in path.edges.iter().enumerate() {
            if k % 2 == 0 {
                let Edge { u, v, .. } = self.g.edge(e);
                self.mate_edge[u] = Some(e);
                self.mate_edge[v] = Some(e);
                self.stamp_entry(e);
            }
        }
        for (k, &e) in path.edges.iter().enumerate() {
            if k % 2 == 1 {
                self.unstamp_if_out(e);
            }
        }
        self.forest.commit_bases(path);
        self.matched_pairs += 1;
        self.stats.augmentations += 1;
    }

    /// Contracted tree path from a labeled root up to its tree root:
    /// returns (nodes root..=x, edges between them).
    fn path_to_tree_root(&self, x: NodeId) -> (Vec<NodeId>, Vec<EdgeId>) {
        let mut nodes = vec![x];
        let mut edges = Vec::new();
        let mut cur = x;
        while let Some((e, pn)) = self.parent[cur] {
            let p = self.forest.root_of_node(pn);
            edges.push(e);
            nodes.push(p);
            cur = p;
        }
        nodes.reverse();
        edges.reverse();
        (nodes, edges)
    }

    fn ensure_parent_capacity(&mut self) {
        let want = self.forest.node_count();
        if self.parent.len() < want {
            self.parent.resize(want, None);
        }
    }

    /// One Augmentation + Blossom Shrinking pass: grows alternating trees
    /// from every free root, augmenting along each eligible augmenting path
    /// found and contracting every blossom met, to a fixed point. Leaves the
    /// even/odd labels in place for the dual adjustment. Returns collected
    /// eligibility-floor violations when checking is enabled.
    fn search_and_shrink(&mut self, checking: bool) -> Vec<Violation> {
        let mut violations = Vec::new();
        for node in std::mem::take(&mut self.labeled) {
            self.set_label(node, Label::None);
            self.parent[node] = None;
        }
        self.ensure_parent_capacity();
        let delta = self.delta_raw();

        let mut frozen: Vec<NodeId> = Vec::new();
        for fi in 0..self.free_list.len() {
            let root_base = self.free_list[fi];
            if self.mate_edge[root_base].is_some() {
                continue; // matched by an earlier augmentation this pass
            }
            let root = self.vert[root_base].root as NodeId;
            if self.forest.base(root) != root_base {
                continue; // only the base of a free root starts a tree
            }
            self.ensure_parent_capacity();
            if self.label_of(root) != Label::None {
                continue;
            }
            let mut stack: Vec<NodeId> = vec![root];
            self.set_label(root, Label::Even);
            let mut tree_nodes: Vec<NodeId> = vec![root];
            let mut augmented = false;
            'tree: while let Some(x) = stack.pop() {
                let n = self.g.n();
                // a trivial node is its own root exactly while unabsorbed
                if x < n {
                    let h = self.vert[x];
                    if h.root as usize != x || h.label != Label::Even {
                        continue;
                    }
                } else if !self.forest.is_root(x) || self.label_of(x) != Label::Even {
                    continue; // absorbed into a blossom meanwhile
                }
                let member_count = if x < n { 1 } else { self.forest.vertices(x).len() };
                let mut mi = 0;
                while mi < member_count {
                    let v = if x < n { x } else { self.forest.vertices(x)[mi] };
                    mi += 1;
                    let hv = self.vert[v];
                    if hv.dead {
                        continue;
                    }
                    let y_v = hv.y_raw;
                    let mate_v = self.mate_edge[v];
                    // every dual is at least the free-vertex dual, so edges
                    // below this floor cannot be eligible
                    let floor = y_v + self.free_y_raw + delta;
                    let (mut ei, adj_end) =
                        (self.adj_off[v] as usize, self.adj_off[v + 1] as usize);
                    while ei < adj_end {
                        let entry = self.adj_ent[ei];
                        ei += 1;
                        if entry.trunc_raw < floor {
                            break;
                        }
                        let hot = self.vert[entry.other as usize];
                        // unmatched and exactly at the eligibility floor
                        if y_v + hot.y_raw != entry.trunc_raw - delta
                            || mate_v == Some(entry.edge as usize)
                            || hot.dead
                        {
                            continue;
                        }
                        let e = entry.edge as usize;
                        let other = entry.other as usize;
                        let r2 = hot.root as NodeId;
                        if r2 == x {
                            continue; // spurious intra-blossom edge
                        }
                        if checking {
                            self.check_weight_floor(e, &mut violations);
                        }
                        let l2 = if r2 == other { hot.label } else { self.label_of(r2) };
                        match l2 {
                            Label::Odd => {}
                            Label::Even => {
                                // both endpoints evenly reachable: a blossom
                                self.contract_cycle(x, r2, e, &mut stack, &mut tree_nodes);
                                continue 'tree;
                            }
                            Label::None => {
                                let b2 = self.forest.base(r2);
                                if self.mate_edge[b2].is_none() {
                                    // augmenting path from the tree root to r2
                                    let (mut nodes, mut edges) = self.path_to_tree_root(x);
                                    edges.push(e);
                                    nodes.push(r2);
                                    let expanded = self.forest.expand_path(
                                        self.g,
                                        &self.mate_edge,
                                        &nodes,
                                        &edges,
                                    );
                                    self.augment_along(&expanded);
                                    for &node in &tree_nodes {
                                        self.set_label(node, Label::None);
                                        self.parent[node] = None;
                                    }
                                    augmented = true;
                                    break 'tree;
                                }
                                self.set_label(r2, Label::Odd);
                                self.parent[r2] = Some((e, x));
                                tree_nodes.push(r2);
                                let me = self.mate_edge[b2].unwrap();
                                if self.eligible_matched(me) {
                                    if checking {
                                        self.check_weight_floor(me, &mut violations);
                                    }
                                    let mv = self.g.edge(me).other(b2);
                                    let r3 = self.vert[mv].root as NodeId;
                                    debug_assert_ne!(r3, r2);
                                    if self.label_of(r3) == Label::None {
                                        self.set_label(r3, Label::Even);
                                        self.parent[r3] = Some((me, r2));
                                        tree_nodes.push(r3);
                                        stack.push(r3);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if !augmented {
                frozen.append(&mut tree_nodes);
            }
        }
        self.labeled = frozen;
        violations
    }

    /// Contracts the odd cycle closed by eligible edge `e` between the
    /// even-labeled roots `x` and `y` of one tree.
    fn contract_cycle(
        &mut self,
        x: NodeId,
        y: NodeId,
        e: EdgeId,
        stack: &mut Vec<NodeId>,
        tree_nodes: &mut Vec<NodeId>,
    ) {
        let (nodes_x, edges_x) = self.path_to_tree_root(x);
        let (nodes_y, edges_y) = self.path_to_tree_root(y);
        // deepest shared node on the two root paths
        let mut lca_depth = 0;
        while lca_depth + 1 < nodes_x.len()
            && lca_depth + 1 < nodes_y.len()
            && nodes_x[lca_depth + 1] == nodes_y[lca_depth + 1]
        {
            lca_depth += 1;
        }
        debug_assert_eq!(nodes_x[lca_depth], nodes_y[lca_depth]);
        let lca = nodes_x[lca_depth];
        // children: lca, down the x branch to x, across the trigger edge to
        // y, then up the y branch; cycle edge j joins children j and j+1
        // (mod len), so edges run x-branch parent edges, the trigger, then
        // the y branch parent edges in reverse
        let mut children = vec![lca];
        children.extend_from_slice(&nodes_x[lca_depth + 1..]);
        children.extend(nodes_y[lca_depth + 1..].iter().rev().copied());
        let mut cycle: Vec<EdgeId> = edges_x[lca_depth..].to_vec();
        cycle.push(e);
        cycle.extend(edges_y[lca_depth..].iter().rev().copied());
        let lca_parent = self.parent[lca];
        for &ce in &cycle {
            self.stamp_entry(ce);
            self.in_cycles[ce] += 1;
        }
        let id = self
            .forest
            .contract(self.g, &self.mate_edge, children, cycle)
            .expect("search produced an invalid blossom cycle");
        self.refresh_roots(id);
        self.ensure_parent_capacity();
        self.set_label(id, Label::Even);
        self.parent[id] = lca_parent;
        tree_nodes.push(id);
        stack.push(id);
        self.stats.blossoms_formed += 1;
    }

    /// y -= delta/2 on even roots' vertices, += on odd roots' vertices;
    /// z += delta on nontrivial even roots, -= on odd ones.
    fn dual_adjustment(&mut self) {
        let half = self.delta_raw() / 2;
        debug_assert!(half >= 1);
        let n = self.g.n();
        let mut i = 0;
        while i < self.labeled.len() {
            let node = self.labeled[i];
            i += 1;
            if node < n {
                // trivial: its own root exactly while unabsorbed
                let h = self.vert[node];
                if h.root as usize != node {
                    continue;
                }
                match h.label {
                    Label::Even => self.vert[node].y_raw -= half,
                    Label::Odd => self.vert[node].y_raw += half,
                    Label::None => {}
                }
                continue;
            }
            if !self.forest.is_root(node) {
                continue;
            }
            let sign: i64 = match self.label_of(node) {
                Label::Even => -1,
                Label::Odd => 1,
                Label::None => continue,
            };
            for k in 0..self.forest.vertices(node).len() {
                let v = self.forest.vertices(node)[k];
                self.vert[v].y_raw += sign * half;
            }
            self.forest.add_z_raw(node, -sign * 2 * half);
            debug_assert!(self.forest.z_raw(node) >= 0);
        }
        self.free_y_raw -= half;
    }

    /// Dissolve zero-dual root blossoms until none remain.
    fn dissolve_zero_roots(&mut self) {
        loop {
            let zeros: Vec<NodeId> = self
                .forest
                .nontrivial_roots()
                .into_iter()
                .filter(|&b| self.forest.z_raw(b) == 0)
                .collect();
            if zeros.is_empty() {
                return;
            }
            for b in zeros {
                let cycle: Vec<EdgeId> = self.forest.cycle_edges(b).to_vec();
                let children = self.forest.dissolve_root(b).expect("dissolving a zero root");
                for c in children {
                    self.refresh_roots(c);
                }
                for e in cycle {
                    self.in_cycles[e] -= 1;
                    self.unstamp_if_out(e);
                }
            }
        }
    }

    /// Reachable vertices share the free duals' parity as multiples of
    /// delta_i/2.
    fn check_parity(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let delta = self.delta_raw();
        for &node in &self.labeled {
            if !self.forest.is_root(node) || self.label_of(node) == Label::None {
                continue;
            }
            for &v in self.forest.vertices(node) {
                if (self.vert[v].y_raw - self.free_y_raw).rem_euclid(delta) != 0 {
                    out.push(Violation {
                        clause: "reachable parity".into(),
                        detail: format!("vertex {v} parity differs from free duals"),
                    });
                }
            }
        }
        out
    }

    fn run_checks(&self, skip_active_blossoms: bool) -> Result<(), ApproxError> {
        let violations = check::check_property2(self, skip_active_blossoms);
        if let Some(v) = violations.first() {
            return Err(ApproxError::Invariant(format!("{}: {}", v.clause, v.detail)));
        }
        if let Err(msg) = self.forest.validate(self.g, &self.mate_edge) {
            return Err(ApproxError::Invariant(format!("blossom structure: {msg}")));
        }
        Ok(())
    }

    /// End-of-scale bookkeeping for the linear variant: commit matched edges
    /// whose eligibility window just closed (their endpoints leave the
    /// graph), then discard unmatched edges past their participation window.
    fn close_scale_windows(&mut self) {
        let gamma = self.params.gamma();
        let i = self.scale;
        for e in 0..self.g.m() {
            if self.committed[e] || self.discarded[e] {
                continue;
            }
            let s = self.edge_scale[e];
            if s + gamma <= i && self.is_matched(e) {
                self.committed[e] = true;
                self.stats.committed_edges += 1;
                let Edge { u, v, .. } = self.g.edge(e);
                self.vert[u].dead = true;
                self.vert[v].dead = true;
                for x in [u, v] {
                    for k in 0..self.g.adjacent(x).len() {
                        let e2 = self.g.adjacent(x)[k];
                        if e2 != e && !self.is_matched(e2) && !self.discarded[e2] {
                            self.discarded[e2] = true;
                            self.stats.discarded_edges += 1;
                        }
                    }
                }
            }
        }
        for e in 0..self.g.m() {
            if self.committed[e] || self.discarded[e] {
                continue;
            }
            if self.edge_scale[e] + gamma + 2 <= i && !self.is_matched(e) {
                self.discarded[e] = true;
                self.stats.discarded_edges += 1;
            }
        }
    }

    fn run_scale(
        &mut self,
        check_invariants: bool,
        trace: &mut Option<&mut ApproxTraceFn<'_>>,
    ) -> Result<(), ApproxError> {
        let i = self.scale;
        self.rebuild_active_adjacency();
        let half = self.delta_raw() / 2;
        let target = if i < self.params.levels {
            (self.params.weight_raw(self.params.n_pow2) >> (i + 2)) - half
        } else {
            0
        };
        let mut iteration = 0u64;
        while self.free_y_raw > target {
            {
                let mate_edge = &self.mate_edge;
                let vert = &self.vert;
                self.free_list.retain(|&v| mate_edge[v].is_none() && !vert[v].dead);
            }
            if !self.free_list.is_empty() {
                let floor_violations = self.search_and_shrink(check_invariants);
                if check_invariants {
                    if let Some(v) = floor_violations.first() {
                        return Err(ApproxError::Invariant(format!(
                            "{}: {}",
                            v.clause, v.detail
                        )));
                    }
                    self.run_checks(true)?; // after augmentation + shrinking
                    let parity = self.check_parity();
                    if let Some(v) = parity.first() {
                        return Err(ApproxError::Invariant(format!(
                            "{}: {}",
                            v.clause, v.detail
                        )));
                    }
                }
                self.dual_adjustment();
                self.dissolve_zero_roots();
            } else {
                // no free vertex: searches and adjustments are vacuous, only
                // the scalar free-vertex dual advances
                self.free_y_raw -= half;
            }
            if check_invariants {
                self.run_checks(false)?; // after dual adjustment + dissolution
            }
            iteration += 1;
            self.stats.dual_adjustments[i as usize] += 1;
            if let Some(cb) = trace.as_mut() {
                cb(i, iteration, self.matched_pairs, self.free_y_raw);
            }
        }
        debug_assert_eq!(self.free_y_raw, target);
        if i < self.params.levels {
            let next_delta = self.params.delta_raw(i + 1);
            for v in 0..self.g.n() {
                self.vert[v].y_raw += next_delta;
            }
            self.free_y_raw += next_delta;
        }
        if self.mode == ApproxMode::Linear {
            self.close_scale_windows();
        }
        Ok(())
    }

    fn finish(self) -> ApproxOutcome {
        let matching = Matching::from_mate_edges(self.g, &self.mate_edge);
        ApproxOutcome { matching, stats: self.stats }
    }
}

/// Runs the scaling algorithm and returns a (1-eps)-approximate maximum
/// weight matching.
pub fn run(
    g: &WeightedGraph,
    eps: f64,
    config: ApproxConfig<'_>,
) -> Result<ApproxOutcome, ApproxError> {
    let mode = config.mode.unwrap_or(ApproxMode::LogN);
    let mut st = ApproxState::new(g, eps, mode)?;
    st.stats.dual_adjustments = vec![0; st.params.levels as usize + 1];
    let mut trace = config.trace;
    for i in 0..=st.params.levels {
        st.scale = i;
        st.run_scale(config.check_invariants, &mut trace)?;
    }
    Ok(st.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenKind};
    use crate::oracle::brute_force_mwm;

    fn cfg(mode: ApproxMode) -> ApproxConfig<'static> {
        ApproxConfig { mode: Some(mode), check_invariants: true, trace: None }
    }

    fn solve(g: &WeightedGraph, eps: f64, mode: ApproxMode) -> ApproxOutcome {
        let out = run(g, eps, cfg(mode)).expect("solver failed");
        out.matching.validate(g).expect("invalid matching");
        out
    }

    #[test]
    fn scale_of_edge_examples() {
        // N = 64 with eps' forced to 1/4: mu_0 = 48, mu_1 = 24, mu_2 = 12
        let base = make_scale_params(64, 0.9, SolveMode::Approx, 8).unwrap();
        let params =
            ScaleParams { eps_prime_log2: 2, unit_log2: 3, delta0_raw: 128, ..base };
        assert_eq!(scale_of_edge(&params, 30), 1);
        assert_eq!(scale_of_edge(&params, 50), 0);
        assert_eq!(scale_of_edge(&params, 64), 0);
        assert_eq!(scale_of_edge(&params, 48), 0);
        assert_eq!(scale_of_edge(&params, 47), 1);
        // w = 1 lands at the last scale
        assert_eq!(scale_of_edge(&params, 1), params.levels);
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(&[(0, 1, 7)], 2, None).unwrap();
        for mode in [ApproxMode::LogN, ApproxMode::Linear] {
            let out = solve(&g, 0.2, mode);
            assert_eq!(out.matching.weight, 7);
        }
    }

    #[test]
    fn triangle_uniform() {
        let g = WeightedGraph::new(&[(0, 1, 3), (1, 2, 3), (0, 2, 3)], 3, None).unwrap();
        for mode in [ApproxMode::LogN, ApproxMode::Linear] {
            assert_eq!(solve(&g, 0.1, mode).matching.weight, 3);
        }
    }

    #[test]
    fn path_454_forced_optimal() {
        // feasible weights are 0, 4, 5, 8; only 8 clears (1 - 0.1) * 8
        let g = WeightedGraph::new(&[(0, 1, 4), (1, 2, 5), (2, 3, 4)], 4, None).unwrap();
        for mode in [ApproxMode::LogN, ApproxMode::Linear] {
            assert_eq!(solve(&g, 0.1, mode).matching.weight, 8);
        }
    }

    #[test]
    fn empty_graph_runs_all_scales() {
        let g = WeightedGraph::new(&[], 3, None).unwrap();
        let out = solve(&g, 0.3, ApproxMode::LogN);
        assert_eq!(out.matching.weight, 0);
        assert!(out.stats.dual_adjustments.iter().sum::<u64>() > 0);
    }

    #[test]
    fn odd_cycles_need_blossoms() {
        // two unit odd cycles joined by a heavy edge exercise contraction
        let mut edges = Vec::new();
        for i in 0..5usize {
            edges.push((i, (i + 1) % 5, 8));
        }
        for i in 0..5usize {
            edges.push((5 + i, 5 + (i + 1) % 5, 8));
        }
        edges.push((0, 5, 16));
        let g = WeightedGraph::new(&edges, 10, None).unwrap();
        let opt = brute_force_mwm(&g).unwrap().weight;
        for mode in [ApproxMode::LogN, ApproxMode::Linear] {
            let out = solve(&g, 0.1, mode);
            assert!(out.matching.weight as f64 >= 0.9 * opt as f64);
        }
    }

    #[test]
    fn random_small_instances_meet_guarantee() {
        for seed in 0..80u64 {
            let n = 6 + (seed as usize) % 8;
            let m = (n * (n - 1) / 2).min(4 + (seed as usize) % 18);
            let g = generate(GenKind::RandomGeneral { n }, m, 48, seed).unwrap();
            let opt = brute_force_mwm(&g).unwrap().weight;
            for (mode, eps) in [
                (ApproxMode::LogN, 0.3),
                (ApproxMode::Linear, 0.3),
                (ApproxMode::LogN, 0.1),
                (ApproxMode::Linear, 0.1),
            ] {
                let out = solve(&g, eps, mode);
                assert!(
                    out.matching.weight as f64 >= (1.0 - eps) * opt as f64,
                    "seed {seed} mode {mode:?} eps {eps}: {} vs opt {opt}",
                    out.matching.weight
                );
            }
        }
    }

    #[test]
    fn dual_adjustment_counts_deterministic() {
        // the scale loop's schedule: eps'^-1/2 steps at scale 0, one more in
        // each middle scale, eps'^-1 at the last
        let g = generate(GenKind::RandomGeneral { n: 9 }, 14, 60, 7).unwrap();
        let out = solve(&g, 0.4, ApproxMode::LogN);
        let params =
            make_scale_params(g.weight_max(), 0.4, SolveMode::Approx, g.n()).unwrap();
        let half_inv = 1u64 << (params.eps_prime_log2 - 1);
        let l = params.levels as usize;
        assert_eq!(out.stats.dual_adjustments[0], half_inv);
        for i in 1..l {
            assert_eq!(out.stats.dual_adjustments[i], half_inv + 1, "scale {i}");
        }
        assert_eq!(out.stats.dual_adjustments[l], 2 * half_inv);
    }
}
