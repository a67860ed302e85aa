//! The laminar family of active blossoms, the contracted view it induces,
//! and expansion of contracted alternating paths back to concrete paths.
//!
//! Node ids 0..n are the trivial vertex blossoms; contraction allocates
//! fresh ids above n. Cycle edge j of a nontrivial blossom joins children
//! j and j+1 (mod len) and is matched exactly when j is odd, so the first
//! child holds the base.

use crate::graph::{Edge, EdgeId, VertexId, WeightedGraph};
use crate::scale::ScaleParams;
use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlossomError {
    #[error("cycle length {0} is not odd and >= 3")]
    EvenCycle(usize),
    #[error("cycle does not alternate properly: {0}")]
    NotAlternating(String),
    #[error("node {0} is not a root")]
    NotRoot(NodeId),
    #[error("node {0} has nonzero z")]
    NonzeroZ(NodeId),
}

#[derive(Debug, Clone)]
struct Node {
    parent: Option<NodeId>,
    base: VertexId,
    z_raw: i64,
    /// Ordered children; empty for trivial blossoms.
    children: Vec<NodeId>,
    /// cycle[j] joins children[j] and children[j + 1 mod len].
    cycle: Vec<EdgeId>,
    /// All underlying vertices.
    vertices: Vec<VertexId>,
    alive: bool,
}

#[derive(Debug, Clone)]
pub struct BlossomForest {
    n: usize,
    nodes: Vec<Node>,
    root_of_vertex: Vec<NodeId>,
}

/// A contracted path expanded to a concrete alternating path, together with
/// the base each traversed blossom must move to once the matching flips.
#[derive(Debug, Clone)]
pub struct ExpandedPath {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub base_updates: Vec<(NodeId, VertexId)>,
}

impl BlossomForest {
    pub fn new(n: usize) -> Self {
        let nodes = (0..n)
            .map(|v| Node {
                parent: None,
                base: v,
                z_raw: 0,
                children: Vec::new(),
                cycle: Vec::new(),
                vertices: vec![v],
                alive: true,
            })
            .collect();
        BlossomForest { n, nodes, root_of_vertex: (0..n).collect() }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_trivial(&self, id: NodeId) -> bool {
        id < self.n
    }

    pub fn is_alive(&self, id: NodeId) -> bool {
        self.nodes[id].alive
    }

    pub fn is_root(&self, id: NodeId) -> bool {
        self.nodes[id].alive && self.nodes[id].parent.is_none()
    }

    pub fn root_of(&self, v: VertexId) -> NodeId {
        self.root_of_vertex[v]
    }

    /// Topmost alive ancestor of an arbitrary node.
    pub fn root_of_node(&self, mut id: NodeId) -> NodeId {
        while let Some(p) = self.nodes[id].parent {
            id = p;
        }
        id
    }

    pub fn base(&self, id: NodeId) -> VertexId {
        self.nodes[id].base
    }

    pub fn z_raw(&self, id: NodeId) -> i64 {
        self.nodes[id].z_raw
    }

    pub fn add_z_raw(&mut self, id: NodeId, delta: i64) {
        self.nodes[id].z_raw += delta;
    }

    pub fn vertices(&self, id: NodeId) -> &[VertexId] {
        &self.nodes[id].vertices
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn cycle_edges(&self, id: NodeId) -> &[EdgeId] {
        &self.nodes[id].cycle
    }

    /// Alive nontrivial node ids, smallest first.
    pub fn nontrivial_nodes(&self) -> Vec<NodeId> {
        (self.n..self.nodes.len()).filter(|&id| self.nodes[id].alive).collect()
    }

    /// Alive nontrivial roots.
    pub fn nontrivial_roots(&self) -> Vec<NodeId> {
        (self.n..self.nodes.len()).filter(|&id| self.is_root(id)).collect()
    }

    /// True when vertex v lies inside node id.
    pub fn contains(&self, id: NodeId, v: VertexId) -> bool {
        let mut cur = v;
        loop {
            if cur == id {
                return true;
            }
            match self.nodes[cur].parent {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Sum of z over alive blossoms containing both endpoints of (u, v).
    pub fn z_sum_common(&self, u: VertexId, v: VertexId) -> i64 {
        if self.root_of_vertex[u] != self.root_of_vertex[v] {
            return 0;
        }
        // climb from u, counting ancestors that also contain v
        let mut sum = 0;
        let mut cur = u;
        loop {
            match self.nodes[cur].parent {
                Some(p) => {
                    cur = p;
                    if self.contains_from_leaf(v, cur) {
                        sum += self.nodes[cur].z_raw;
                    }
                }
                None => return sum,
            }
        }
    }

    fn contains_from_leaf(&self, leaf: VertexId, id: NodeId) -> bool {
        let mut cur = leaf;
        loop {
            if cur == id {
                return true;
            }
            match self.nodes[cur].parent {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Contracts an odd alternating cycle of current roots into a fresh root
    /// blossom with z = 0. `cycle[j]` must join `children[j]` and
    /// `children[j + 1 mod len]` and be matched exactly when j is odd.
    pub fn contract(
        &mut self,
        g: &WeightedGraph,
        mate_edge: &[Option<EdgeId>],
        children: Vec<NodeId>,
        cycle: Vec<EdgeId>,
    ) -> Result<NodeId, BlossomError> {
        let len = children.len();
        if len < 3 || len % 2 == 0 {
            return Err(BlossomError::EvenCycle(len));
        }
        if cycle.len() != len {
            return Err(BlossomError::NotAlternating(format!(
                "{} edges for {} children",
                cycle.len(),
                len
            )));
        }
        for (j, &e) in cycle.iter().enumerate() {
            let matched = Self::edge_matched(g, mate_edge, e);
            if matched != (j % 2 == 1) {
                return Err(BlossomError::NotAlternating(format!(
                    "cycle edge {j} matched = {matched}"
                )));
            }
            let a = children[j];
            let b = children[(j + 1) % len];
            let Edge { u, v, .. } = g.edge(e);
            let fits = (self.contains(a, u) && self.contains(b, v))
                || (self.contains(a, v) && self.contains(b, u));
            if !fits {
                return Err(BlossomError::NotAlternating(format!(
                    "cycle edge {j} does not join children {a} and {b}"
                )));
            }
        }
        for &c in &children {
            if !self.is_root(c) {
                return Err(BlossomError::NotRoot(c));
            }
        }
        let id = self.nodes.len();
        let mut vertices = Vec::new();
        for &c in &children {
            vertices.extend_from_slice(&self.nodes[c].vertices);
        }
        let base = self.nodes[children[0]].base;
        for &c in &children {
            self.nodes[c].parent = Some(id);
        }
        for &v in &vertices {
            self.root_of_vertex[v] = id;
        }
        self.nodes.push(Node {
            parent: None,
            base,
            z_raw: 0,
            children,
            cycle,
            vertices,
            alive: true,
        });
        Ok(id)
    }

    fn edge_matched(g: &WeightedGraph, mate_edge: &[Option<EdgeId>], e: EdgeId) -> bool {
        mate_edge[g.edge(e).u] == Some(e)
    }

    /// Removes a zero-dual root blossom; its children become roots again.
    pub fn dissolve_root(&mut self, id: NodeId) -> Result<Vec<NodeId>, BlossomError> {
        if !self.is_root(id) || self.is_trivial(id) {
            return Err(BlossomError::NotRoot(id));
        }
        if self.nodes[id].z_raw != 0 {
            return Err(BlossomError::NonzeroZ(id));
        }
        let children = self.nodes[id].children.clone();
        for &c in &children {
            self.nodes[c].parent = None;
            for i in 0..self.nodes[c].vertices.len() {
                let v = self.nodes[c].vertices[i];
                self.root_of_vertex[v] = c;
            }
        }
        self.nodes[id].alive = false;
        Ok(children)
    }

    /// Child of `id` whose vertex set contains `v`, plus its index.
    fn child_containing(&self, id: NodeId, v: VertexId) -> (usize, NodeId) {
        let mut cur = v;
        loop {
            let p = self.nodes[cur].parent.expect("vertex not inside node");
            if p == id {
                let idx = self.nodes[id]
                    .children
                    .iter()
                    .position(|&c| c == cur)
                    .expect("child list inconsistent");
                return (idx, cur);
            }
            cur = p;
        }
    }

    fn attachment(&self, g: &WeightedGraph, node: NodeId, e: EdgeId) -> VertexId {
        let Edge { u, v, .. } = g.edge(e);
        if self.contains(node, u) {
            u
        } else {
            debug_assert!(self.contains(node, v));
            v
        }
    }

    /// Even-length alternating path from base(b) to y inside blossom b.
    /// The path's last edge (if any) is matched at y, so an unmatched edge
    /// may continue from y outside. Records the new base each traversed
    /// blossom takes once the matching flips along the path.
    fn inside_path(
        &self,
        g: &WeightedGraph,
        b: NodeId,
        y: VertexId,
        pairs: &mut Vec<(NodeId, VertexId)>,
    ) -> (Vec<VertexId>, Vec<EdgeId>) {
        if self.is_trivial(b) {
            debug_assert_eq!(b, y);
            return (vec![y], Vec::new());
        }
        pairs.push((b, y));
        let (t, child_t) = self.child_containing(b, y);
        if t == 0 {
            return self.inside_path(g, child_t, y, pairs);
        }
        let len = self.nodes[b].children.len();
        // walk from child t around to child 0 using an even number of cycle
        // edges; the first walk edge is the matched one adjacent to child t
        let (steps, edge_at): (Vec<usize>, Box<dyn Fn(usize) -> usize>) = if t % 2 == 1 {
            // ascend t, t+1, ..., len-1, 0 via cycle[t], ..., cycle[len-1]
            let seq: Vec<usize> = (t..len).map(|j| (j + 1) % len).collect();
            (seq, Box::new(move |k| t + k))
        } else {
            // descend t, t-1, ..., 0 via cycle[t-1], ..., cycle[0]
            let seq: Vec<usize> = (0..t).rev().collect();
            (seq, Box::new(move |k| t - 1 - k))
        };
        // build from the y side toward the base, then reverse
        let mut rev_v: Vec<VertexId> = Vec::new();
        let mut rev_e: Vec<EdgeId> = Vec::new();
        let (seg_v, seg_e) = self.inside_path(g, child_t, y, pairs);
        rev_v.extend(seg_v.into_iter().rev());
        rev_e.extend(seg_e.into_iter().rev());
        for (k, &next_child_idx) in steps.iter().enumerate() {
            let e = self.nodes[b].cycle[edge_at(k)];
            let next = self.nodes[b].children[next_child_idx];
            rev_e.push(e);
            let att = self.attachment(g, next, e);
            let matched_edge = edge_at(k) % 2 == 1;
            if k + 1 < steps.len() {
                let e_next = self.nodes[b].cycle[edge_at(k + 1)];
                if matched_edge {
                    // entered at base(next); leave via the unmatched e_next
                    let out_att = self.attachment(g, next, e_next);
                    let (sv, se) = self.inside_path(g, next, out_att, pairs);
                    debug_assert_eq!(*sv.first().unwrap(), att);
                    rev_v.extend(sv.into_iter());
                    rev_e.extend(se.into_iter());
                } else {
                    // entered via unmatched at att; leave at base(next)
                    let (sv, se) = self.inside_path(g, next, att, pairs);
                    rev_v.extend(sv.into_iter().rev());
                    rev_e.extend(se.into_iter().rev());
                }
            } else {
                // next is child 0, entered via an unmatched edge at att
                debug_assert_eq!(next_child_idx, 0);
                debug_assert!(!matched_edge);
                let (sv, se) = self.inside_path(g, next, att, pairs);
                rev_v.extend(sv.into_iter().rev());
                rev_e.extend(se.into_iter().rev());
            }
        }
        rev_v.reverse();
        rev_e.reverse();
        debug_assert_eq!(rev_v.len(), rev_e.len() + 1);
        debug_assert_eq!(rev_e.len() % 2, 0);
        debug_assert_eq!(*rev_v.first().unwrap(), self.nodes[b].base);
        debug_assert_eq!(*rev_v.last().unwrap(), y);
        (rev_v, rev_e)
    }

    /// Expands an augmenting path of the contracted graph. `nodes` are the
    /// current roots along the path; `edges[i]` joins nodes i and i+1 and
    /// the path alternates starting and ending with unmatched edges (both
    /// end roots are free). Matched status is read from `mate_edge`.
    pub fn expand_path(
        &self,
        g: &WeightedGraph,
        mate_edge: &[Option<EdgeId>],
        nodes: &[NodeId],
        edges: &[EdgeId],
    ) -> ExpandedPath {
        assert_eq!(nodes.len(), edges.len() + 1);
        let mut pairs = Vec::new();
        let mut out_v: Vec<VertexId> = Vec::new();
        let mut out_e: Vec<EdgeId> = Vec::new();
        for (i, &node) in nodes.iter().enumerate() {
            if i > 0 {
                out_e.push(edges[i - 1]);
            }
            let before = if i > 0 { Some(edges[i - 1]) } else { None };
            let after = if i < edges.len() { Some(edges[i]) } else { None };
            let seg = match (before, after) {
                (None, Some(e_out)) => {
                    debug_assert!(!Self::edge_matched(g, mate_edge, e_out));
                    let y = self.attachment(g, node, e_out);
                    self.inside_path(g, node, y, &mut pairs)
                }
                (Some(e_in), Some(e_out)) => {
                    if Self::edge_matched(g, mate_edge, e_in) {
                        let y = self.attachment(g, node, e_out);
                        self.inside_path(g, node, y, &mut pairs)
                    } else {
                        let y = self.attachment(g, node, e_in);
                        let (mut sv, mut se) = self.inside_path(g, node, y, &mut pairs);
                        sv.reverse();
                        se.reverse();
                        (sv, se)
                    }
                }
                (Some(e_in), None) => {
                    debug_assert!(!Self::edge_matched(g, mate_edge, e_in));
                    let y = self.attachment(g, node, e_in);
                    let (mut sv, mut se) = self.inside_path(g, node, y, &mut pairs);
                    sv.reverse();
                    se.reverse();
                    (sv, se)
                }
                (None, None) => (vec![self.nodes[node].base], Vec::new()),
            };
            out_v.extend(seg.0);
            out_e.extend(seg.1);
        }
        debug_assert_eq!(out_v.len(), out_e.len() + 1);
        ExpandedPath { vertices: out_v, edges: out_e, base_updates: pairs }
    }

    /// Expands an even alternating cycle of the contracted graph:
    /// `edges[i]` joins nodes i and (i+1) mod len.
    pub fn expand_cycle(
        &self,
        g: &WeightedGraph,
        mate_edge: &[Option<EdgeId>],
        nodes: &[NodeId],
        edges: &[EdgeId],
    ) -> ExpandedPath {
        assert_eq!(nodes.len(), edges.len());
        let len = nodes.len();
        let mut pairs = Vec::new();
        let mut out_v: Vec<VertexId> = Vec::new();
        let mut out_e: Vec<EdgeId> = Vec::new();
        for (i, &node) in nodes.iter().enumerate() {
            let e_in = edges[(i + len - 1) % len];
            let e_out = edges[i];
            let seg = if Self::edge_matched(g, mate_edge, e_in) {
                let y = self.attachment(g, node, e_out);
                self.inside_path(g, node, y, &mut pairs)
            } else {
                debug_assert!(Self::edge_matched(g, mate_edge, e_out));
                let y = self.attachment(g, node, e_in);
                let (mut sv, mut se) = self.inside_path(g, node, y, &mut pairs);
                sv.reverse();
                se.reverse();
                (sv, se)
            };
            out_v.extend(seg.0);
            out_e.extend(seg.1);
            out_e.push(e_out);
        }
        ExpandedPath { vertices: out_v, edges: out_e, base_updates: pairs }
    }

    /// Applies recorded base moves after the matching has been flipped along
    /// an expanded path: rotates each traversed blossom's cycle so its first
    /// child holds the new base.
    pub fn commit_bases(&mut self, path: &ExpandedPath) {
        for &(node, new_base) in &path.base_updates {
            if self.is_trivial(node) {
                continue;
            }
            let (t, _) = self.child_containing(node, new_base);
            if t > 0 {
                self.nodes[node].children.rotate_left(t);
                self.nodes[node].cycle.rotate_left(t);
            }
            self.nodes[node].base = new_base;
        }
    }

    /// Checks every structural invariant of every alive blossom.
    pub fn validate(
        &self,
        g: &WeightedGraph,
        mate_edge: &[Option<EdgeId>],
    ) -> Result<(), String> {
        for id in self.n..self.nodes.len() {
            let node = &self.nodes[id];
            if !node.alive {
                continue;
            }
            let len = node.children.len();
            if len < 3 || len % 2 == 0 {
                return Err(format!("node {id}: even or tiny cycle ({len})"));
            }
            if node.z_raw < 0 {
                return Err(format!("node {id}: negative z"));
            }
            for (j, &e) in node.cycle.iter().enumerate() {
                let matched = Self::edge_matched(g, mate_edge, e);
                if matched != (j % 2 == 1) {
                    return Err(format!("node {id}: cycle edge {j} matched = {matched}"));
                }
                let a = node.children[j];
                let b = node.children[(j + 1) % len];
                let Edge { u, v, .. } = g.edge(e);
                let fits = (self.contains(a, u) && self.contains(b, v))
                    || (self.contains(a, v) && self.contains(b, u));
                if !fits {
                    return Err(format!("node {id}: cycle edge {j} misplaced"));
                }
            }
            if node.base != self.nodes[node.children[0]].base {
                return Err(format!("node {id}: base not in first child"));
            }
            // the base is the unique vertex whose mate lies outside
            for &v in &node.vertices {
                let inside_mate = mate_edge[v]
                    .map(|e| self.contains_from_leaf(g.edge(e).other(v), id))
                    .unwrap_or(false);
                if v == node.base {
                    if inside_mate {
                        return Err(format!("node {id}: base {v} matched inside"));
                    }
                } else if !inside_mate {
                    return Err(format!("node {id}: non-base {v} not matched inside"));
                }
            }
        }
        // root_of cache agrees with parent structure
        for v in 0..self.n {
            if self.root_of_vertex[v] != self.root_of_node(v) {
                return Err(format!("stale root cache at vertex {v}"));
            }
        }
        Ok(())
    }

    /// Nested parenthesized dump of all nontrivial root blossoms, one per
    /// line, for golden-file tests.
    pub fn dump(&self, params: &ScaleParams) -> String {
        let mut out = String::new();
        for id in self.nontrivial_roots() {
            self.dump_node(id, params, &mut out);
            out.push('\n');
        }
        out
    }

    fn dump_node(&self, id: NodeId, params: &ScaleParams, out: &mut String) {
        if self.is_trivial(id) {
            out.push_str(&format!("v{id}"));
            return;
        }
        let node = &self.nodes[id];
        out.push_str(&format!(
            "(base=v{} z={}",
            node.base,
            params.fmt_raw(node.z_raw)
        ));
        for &c in &node.children {
            out.push(' ');
            self.dump_node(c, params, out);
        }
        out.push(')');
    }
}
