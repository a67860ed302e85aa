//! Integer-weighted undirected graphs in adjacency-array form, input
//! validation, and the reduction from real weights to small integers.

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub w: i64,
}

impl Edge {
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            debug_assert_eq!(x, self.v);
            self.u
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("non-positive weight {w} on edge ({u}, {v})")]
    NonPositiveWeight { u: VertexId, v: VertexId, w: i64 },
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(VertexId, usize),
    #[error("edge ({0}, {1}) does not cross the declared bipartition")]
    NonBipartiteEdge(VertexId, VertexId),
    #[error("eps must lie strictly between 0 and 1, got {0}")]
    EpsOutOfRange(f64),
    #[error("weight range overflows the fixed-point representation")]
    Overflow,
}

/// Immutable validated graph. When a bipartition is present the left side is
/// the prefix `0..n_left` and every edge crosses it.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<EdgeId>>,
    n_left: Option<usize>,
    weight_max: i64,
}

impl WeightedGraph {
    /// Validates a raw edge list. Parallel edges keep only the
    /// maximum-weight copy; a non-positive weight or a self loop is an error.
    /// `n_left = Some(k)` declares vertices `0..k` as the left side and
    /// requires every edge to cross the bipartition.
    pub fn new(
        raw_edges: &[(VertexId, VertexId, i64)],
        n: usize,
        n_left: Option<usize>,
    ) -> Result<Self, GraphError> {
        if let Some(k) = n_left {
            if k > n {
                return Err(GraphError::VertexOutOfRange(k, n));
            }
        }
        let mut best: std::collections::HashMap<(VertexId, VertexId), i64> =
            std::collections::HashMap::new();
        let mut order: Vec<(VertexId, VertexId)> = Vec::new();
        for &(u, v, w) in raw_edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w <= 0 {
                return Err(GraphError::NonPositiveWeight { u, v, w });
            }
            if let Some(k) = n_left {
                if (u < k) == (v < k) {
                    return Err(GraphError::NonBipartiteEdge(u, v));
                }
            }
            let key = (u.min(v), u.max(v));
            match best.entry(key) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(w);
                    order.push(key);
                }
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    if w > *e.get() {
                        e.insert(w);
                    }
                }
            }
        }
        let mut edges = Vec::with_capacity(order.len());
        let mut adj = vec![Vec::new(); n];
        let mut weight_max = 0i64;
        for key in order {
            let w = best[&key];
            let id = edges.len();
            edges.push(Edge { u: key.0, v: key.1, w });
            adj[key.0].push(id);
            adj[key.1].push(id);
            weight_max = weight_max.max(w);
        }
        Ok(WeightedGraph { n, edges, adj, n_left, weight_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Largest edge weight N, or 1 for an edgeless graph.
    pub fn weight_max(&self) -> i64 {
        self.weight_max.max(1)
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacent(&self, v: VertexId) -> &[EdgeId] {
        &self.adj[v]
    }

    pub fn is_bipartite(&self) -> bool {
        self.n_left.is_some()
    }

    pub fn n_left(&self) -> Option<usize> {
        self.n_left
    }

    /// True when `v` is on the declared left side.
    pub fn is_left(&self, v: VertexId) -> bool {
        match self.n_left {
            Some(k) => v < k,
            None => false,
        }
    }

    /// Edge id joining `u` and `v`, if present.
    pub fn find_edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adj[u]
            .iter()
            .copied()
            .find(|&e| self.edges[e].other(u) == v)
    }
}

/// Scales real weights down to integers so an approximate solver can run on
/// them: gamma = (eps/2) * w_max / n and each integer weight is
/// floor(w / gamma). Any (1 - eps/2)-approximation of the integer instance
/// is a (1 - eps)-approximation of the original. Edges whose scaled weight
/// reaches zero cannot appear in an optimum and are dropped.
pub fn normalize_real_weights(
    raw_edges: &[(VertexId, VertexId, f64)],
    n: usize,
    eps: f64,
) -> Result<(WeightedGraph, f64), GraphError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(GraphError::EpsOutOfRange(eps));
    }
    let w_max = raw_edges
        .iter()
        .map(|&(_, _, w)| w)
        .fold(0.0f64, f64::max);
    if !(w_max > 0.0) {
        // no positive edge: nothing to scale, empty integer graph
        let g = WeightedGraph::new(&[], n, None)?;
        return Ok((g, 1.0));
    }
    let gamma = (eps / 2.0) * w_max / n as f64;
    let mut int_edges = Vec::with_capacity(raw_edges.len());
    for &(u, v, w) in raw_edges {
        if w <= 0.0 {
            continue; // a non-positive edge never helps a maximum weight matching
        }
        let scaled = (w / gamma).floor() as i64;
        if scaled >= 1 {
            int_edges.push((u, v, scaled));
        }
    }
    let g = WeightedGraph::new(&int_edges, n, None)?;
    Ok((g, gamma))
}

/// A matching as a mate map plus its derived weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub mate: Vec<Option<VertexId>>,
    pub size: usize,
    pub weight: i64,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching { mate: vec![None; n], size: 0, weight: 0 }
    }

    /// Builds a matching from per-vertex matched edge ids.
    pub fn from_mate_edges(g: &WeightedGraph, mate_edge: &[Option<EdgeId>]) -> Self {
        let mut mate = vec![None; g.n()];
        let mut size = 0;
        let mut weight = 0;
        for v in 0..g.n() {
            if let Some(e) = mate_edge[v] {
                let other = g.edge(e).other(v);
                mate[v] = Some(other);
                if v < other {
                    size += 1;
                    weight += g.edge(e).w;
                }
            }
        }
        Matching { mate, size, weight }
    }

    /// Matched pairs with u < v, sorted.
    pub fn pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.size);
        for (u, m) in self.mate.iter().enumerate() {
            if let Some(v) = *m {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Recomputes symmetry, edge membership and the weight from scratch.
    pub fn validate(&self, g: &WeightedGraph) -> Result<(), String> {
        if self.mate.len() != g.n() {
            return Err("mate map length mismatch".into());
        }
        let mut weight = 0i64;
        let mut size = 0usize;
        for u in 0..g.n() {
            if let Some(v) = self.mate[u] {
                if self.mate[v] != Some(u) {
                    return Err(format!("mate map not symmetric at ({u}, {v})"));
                }
                if u < v {
                    match g.find_edge(u, v) {
                        Some(e) => weight += g.edge(e).w,
                        None => return Err(format!("matched pair ({u}, {v}) is not an edge")),
                    }
                    size += 1;
                }
            }
        }
        if weight != self.weight {
            return Err(format!("weight {} != recomputed {}", self.weight, weight));
        }
        if size != self.size {
            return Err(format!("size {} != recomputed {}", self.size, size));
        }
        Ok(())
    }
}
