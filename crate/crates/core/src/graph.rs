//! Finite symmetric directed-edge graphs and their topological invariants.
//!
//! A graph here is a dense-indexed vertex set plus a dense-indexed set of
//! directed edges closed under the opposite involution, with no loops, no
//! multi-edges, and connected by construction. Directed edges come in
//! opposite pairs `2k` / `2k+1`, one pair per undirected input edge, so
//! `opp` is branch-free and all iteration orders follow the input order.

use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirEdgeId(pub usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop edge at vertex {0:?}")]
    LoopEdge(String),
    #[error("duplicate undirected edge {0:?} -- {1:?}")]
    DuplicateEdge(String, String),
    #[error("graph is not connected")]
    Disconnected,
    #[error("empty edge list")]
    EmptyInput,
}

#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<String>,
    /// Directed edges as (initial, terminal); indices 2k and 2k+1 are opposite.
    edges: Vec<(VertexId, VertexId)>,
    out_edges: Vec<Vec<DirEdgeId>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list of label pairs.
    ///
    /// Both orientations of every input edge are created; labels are interned
    /// to dense ids in first-appearance order. Loops, duplicate undirected
    /// edges, an empty list, and disconnected input are all hard errors.
    pub fn build<S: AsRef<str>>(undirected: &[(S, S)]) -> Result<Self, GraphError> {
        if undirected.is_empty() {
            return Err(GraphError::EmptyInput);
        }
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |s: &str, labels: &mut Vec<String>| -> usize {
            if let Some(&i) = index.get(s) {
                return i;
            }
            let i = labels.len();
            labels.push(s.to_string());
            index.insert(s.to_string(), i);
            i
        };
        let mut edges = Vec::with_capacity(undirected.len() * 2);
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        for (a, b) in undirected {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(GraphError::LoopEdge(a.to_string()));
            }
            let u = intern(a, &mut labels);
            let v = intern(b, &mut labels);
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(a.to_string(), b.to_string()));
            }
            edges.push((VertexId(u), VertexId(v)));
            edges.push((VertexId(v), VertexId(u)));
        }
        let mut out_edges = vec![Vec::new(); labels.len()];
        for (i, (u, _)) in edges.iter().enumerate() {
            out_edges[u.0].push(DirEdgeId(i));
        }
        let g = Graph {
            labels,
            edges,
            out_edges,
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_dir_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_und_edges(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn iota(&self, e: DirEdgeId) -> VertexId {
        self.edges[e.0].0
    }

    pub fn tau(&self, e: DirEdgeId) -> VertexId {
        self.edges[e.0].1
    }

    pub fn opp(&self, e: DirEdgeId) -> DirEdgeId {
        DirEdgeId(e.0 ^ 1)
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0]
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label).map(VertexId)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.out_edges[v.0].len()
    }

    /// `q_x`, one less than the degree.
    pub fn qx(&self, v: VertexId) -> usize {
        self.degree(v) - 1
    }

    pub fn out_edges(&self, v: VertexId) -> &[DirEdgeId] {
        &self.out_edges[v.0]
    }

    pub fn dir_edges(&self) -> impl Iterator<Item = DirEdgeId> {
        (0..self.edges.len()).map(DirEdgeId)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.labels.len()).map(VertexId)
    }

    /// Undirected edge list as label pairs, one line per pair, input order.
    pub fn undirected_label_pairs(&self) -> Vec<(String, String)> {
        (0..self.num_und_edges())
            .map(|k| {
                let (u, v) = self.edges[2 * k];
                (self.labels[u.0].clone(), self.labels[v.0].clone())
            })
            .collect()
    }

    /// Non-backtracking continuations of `e`: edges `e'` with
    /// `iota(e') = tau(e)` and `e' != opp(e)`.
    pub fn continuations(&self, e: DirEdgeId) -> impl Iterator<Item = DirEdgeId> + '_ {
        let back = self.opp(e);
        self.out_edges[self.tau(e).0]
            .iter()
            .copied()
            .filter(move |&c| c != back)
    }

    fn is_connected(&self) -> bool {
        if self.labels.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.labels.len()];
        let mut queue = VecDeque::from([VertexId(0)]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &e in self.out_edges(v) {
                let w = self.tau(e);
                if !seen[w.0] {
                    seen[w.0] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.labels.len()
    }

    /// `|E| - |X| + 1` with undirected edge count.
    pub fn cyclomatic_number(&self) -> usize {
        self.num_und_edges() + 1 - self.num_vertices()
    }

    /// BFS 2-coloring; `None` when an odd cycle exists.
    pub fn is_bipartite(&self) -> Option<Vec<u8>> {
        let mut color = vec![u8::MAX; self.num_vertices()];
        color[0] = 0;
        let mut queue = VecDeque::from([VertexId(0)]);
        while let Some(v) = queue.pop_front() {
            for &e in self.out_edges(v) {
                let w = self.tau(e);
                if color[w.0] == u8::MAX {
                    color[w.0] = 1 - color[v.0];
                    queue.push_back(w);
                } else if color[w.0] == color[v.0] {
                    return None;
                }
            }
        }
        Some(color)
    }

    /// Number of degree-one vertices.
    pub fn count_leaves(&self) -> usize {
        self.vertices().filter(|&v| self.degree(v) == 1).count()
    }

    /// True when some directed edge has no non-backtracking continuation
    /// surviving the greatest fixed point of forward-extendability.
    pub fn has_dead_ends(&self) -> bool {
        let alive = self.alive_directed_set();
        !alive.iter().all(|&a| a)
    }

    /// Greatest fixed point of "has an alive continuation", per directed edge.
    fn alive_directed_set(&self) -> Vec<bool> {
        let mut alive = vec![true; self.num_dir_edges()];
        loop {
            let mut changed = false;
            for e in self.dir_edges() {
                if alive[e.0] && !self.continuations(e).any(|c| alive[c.0]) {
                    alive[e.0] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        alive
    }

    /// Iteratively peels directed edges with no non-backtracking
    /// continuation. An undirected edge survives only when both of its
    /// directions extend to an infinite chain; the result is the maximal
    /// dead-end-free subgraph (empty for trees).
    pub fn prune_dead_ends(&self) -> PruneResult {
        let alive = self.alive_directed_set();
        let mut kept_pairs = Vec::new();
        let mut removed_dir = Vec::new();
        for k in 0..self.num_und_edges() {
            let fwd = DirEdgeId(2 * k);
            let bwd = DirEdgeId(2 * k + 1);
            if alive[fwd.0] && alive[bwd.0] {
                kept_pairs.push(k);
            } else {
                removed_dir.push(fwd);
                removed_dir.push(bwd);
            }
        }
        let mut kept_vertex = vec![false; self.num_vertices()];
        for &k in &kept_pairs {
            let (u, v) = self.edges[2 * k];
            kept_vertex[u.0] = true;
            kept_vertex[v.0] = true;
        }
        let removed_vertices: Vec<VertexId> =
            self.vertices().filter(|v| !kept_vertex[v.0]).collect();
        let pruned = if kept_pairs.is_empty() {
            None
        } else {
            let pairs: Vec<(String, String)> = kept_pairs
                .iter()
                .map(|&k| {
                    let (u, v) = self.edges[2 * k];
                    (self.labels[u.0].clone(), self.labels[v.0].clone())
                })
                .collect();
            // Leaf peeling never disconnects a connected graph, so this
            // rebuild only fails if that assumption breaks.
            Some(Graph::build(&pairs).expect("pruned subgraph must stay connected"))
        };
        PruneResult {
            pruned,
            removed_dir_edges: removed_dir,
            removed_vertices,
        }
    }

    /// BFS spanning tree rooted at `root`. Tree edges point away from the
    /// root and are listed in discovery order, so terminal-vertex depths are
    /// nondecreasing; non-tree edges keep the orientation of their first
    /// appearance in the input, in input order.
    pub fn spanning_tree(&self, root: VertexId) -> SpanningTree {
        let n = self.num_vertices();
        let mut depths = vec![usize::MAX; n];
        let mut tree_dir_edges = Vec::with_capacity(n - 1);
        let mut in_tree_pair = vec![false; self.num_und_edges()];
        depths[root.0] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &e in self.out_edges(v) {
                let w = self.tau(e);
                if depths[w.0] == usize::MAX {
                    depths[w.0] = depths[v.0] + 1;
                    tree_dir_edges.push(e);
                    in_tree_pair[e.0 / 2] = true;
                    queue.push_back(w);
                }
            }
        }
        let non_tree_dir_edges: Vec<DirEdgeId> = (0..self.num_und_edges())
            .filter(|&k| !in_tree_pair[k])
            .map(|k| DirEdgeId(2 * k))
            .collect();
        SpanningTree {
            root,
            tree_dir_edges,
            non_tree_dir_edges,
            depths,
        }
    }
}

/// Outcome of dead-end peeling. `pruned` is `None` when nothing survives
/// (trees peel away completely); removed ids refer to the original graph.
#[derive(Debug, Clone)]
pub struct PruneResult {
    pub pruned: Option<Graph>,
    pub removed_dir_edges: Vec<DirEdgeId>,
    pub removed_vertices: Vec<VertexId>,
}

impl PruneResult {
    pub fn is_empty(&self) -> bool {
        self.pruned.is_none()
    }
}

/// BFS spanning tree with the numbering used by the echelon constructions:
/// tree edges ordered by terminal-vertex depth, then non-tree edges in input
/// order.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub root: VertexId,
    pub tree_dir_edges: Vec<DirEdgeId>,
    pub non_tree_dir_edges: Vec<DirEdgeId>,
    /// Distance from the root, indexed by vertex.
    pub depths: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn triangle_builds() {
        let g = Graph::build(&[("a", "b"), ("b", "c"), ("c", "a")]).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_dir_edges(), 6);
        for e in g.dir_edges() {
            assert_eq!(g.opp(g.opp(e)), e);
            assert_eq!(g.iota(g.opp(e)), g.tau(e));
            assert_ne!(g.iota(e), g.tau(e));
        }
    }

    #[test]
    fn loop_edge_rejected() {
        assert_eq!(
            Graph::build(&[("a", "a")]).unwrap_err(),
            GraphError::LoopEdge("a".into())
        );
    }

    #[test]
    fn duplicates_and_disconnected_rejected() {
        assert!(matches!(
            Graph::build(&[("a", "b"), ("b", "a")]).unwrap_err(),
            GraphError::DuplicateEdge(_, _)
        ));
        assert_eq!(
            Graph::build(&[("a", "b"), ("c", "d")]).unwrap_err(),
            GraphError::Disconnected
        );
        let empty: [(&str, &str); 0] = [];
        assert_eq!(Graph::build(&empty).unwrap_err(), GraphError::EmptyInput);
    }

    #[test]
    fn k4_shape() {
        let g = corpus::complete(4);
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_dir_edges(), 12);
        assert!(g.vertices().all(|v| g.degree(v) == 3));
        assert_eq!(g.cyclomatic_number(), 3);
    }

    #[test]
    fn cyclomatic_examples() {
        assert_eq!(corpus::cycle(5).cyclomatic_number(), 1);
        assert_eq!(corpus::path(4).cyclomatic_number(), 0);
    }

    #[test]
    fn bipartite_examples() {
        assert!(corpus::cycle(4).is_bipartite().is_some());
        assert!(corpus::cycle(5).is_bipartite().is_none());
        let coloring = corpus::complete_bipartite(3, 3).is_bipartite().unwrap();
        let g = corpus::complete_bipartite(3, 3);
        for e in g.dir_edges() {
            assert_ne!(coloring[g.iota(e).0], coloring[g.tau(e).0]);
        }
    }

    #[test]
    fn leaf_counts() {
        assert_eq!(corpus::path(3).count_leaves(), 2);
        assert_eq!(corpus::star(3).count_leaves(), 3);
        assert_eq!(corpus::cycle(3).count_leaves(), 0);
    }

    #[test]
    fn prune_pendant_off_triangle() {
        let g = corpus::cycle_with_pendant(3);
        let r = g.prune_dead_ends();
        let pruned = r.pruned.unwrap();
        assert_eq!(pruned.num_vertices(), 3);
        assert_eq!(pruned.num_und_edges(), 3);
        assert_eq!(r.removed_vertices.len(), 1);
        assert_eq!(r.removed_dir_edges.len(), 2);
        assert!(!pruned.has_dead_ends());
    }

    #[test]
    fn prune_path_to_empty() {
        let r = corpus::path(4).prune_dead_ends();
        assert!(r.is_empty());
        assert_eq!(r.removed_dir_edges.len(), 6);
        assert_eq!(r.removed_vertices.len(), 4);
    }

    #[test]
    fn prune_k4_is_identity() {
        let g = corpus::complete(4);
        let r = g.prune_dead_ends();
        assert!(r.removed_dir_edges.is_empty());
        assert!(r.removed_vertices.is_empty());
        assert_eq!(r.pruned.unwrap().num_dir_edges(), 12);
    }

    #[test]
    fn prune_is_idempotent() {
        for g in [corpus::cycle_with_pendant(4), corpus::dumbbell()] {
            let once = g.prune_dead_ends().pruned.unwrap();
            let twice = once.prune_dead_ends();
            assert!(twice.removed_dir_edges.is_empty());
            assert_eq!(twice.pruned.unwrap().num_dir_edges(), once.num_dir_edges());
        }
    }

    #[test]
    fn pruned_graph_is_forward_extendable() {
        let g = corpus::cycle_with_pendant(5)
            .prune_dead_ends()
            .pruned
            .unwrap();
        for e in g.dir_edges() {
            assert!(g.continuations(e).next().is_some());
        }
    }

    #[test]
    fn spanning_tree_counts_and_depths() {
        let c4 = corpus::cycle(4);
        let t = c4.spanning_tree(VertexId(0));
        assert_eq!(t.tree_dir_edges.len(), 3);
        assert_eq!(t.non_tree_dir_edges.len(), 1);

        let k4 = corpus::complete(4);
        let t = k4.spanning_tree(VertexId(0));
        assert_eq!(t.tree_dir_edges.len(), 3);
        assert_eq!(t.non_tree_dir_edges.len(), 3);
        assert_eq!(t.non_tree_dir_edges.len(), k4.cyclomatic_number());

        let mut prev = 0;
        for &e in &t.tree_dir_edges {
            let d = t.depths[k4.tau(e).0];
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn single_edge_graph_spanning_tree() {
        let g = Graph::build(&[("a", "b")]).unwrap();
        let t = g.spanning_tree(VertexId(0));
        assert_eq!(t.tree_dir_edges.len(), 1);
        assert!(t.non_tree_dir_edges.is_empty());
        assert!(g.prune_dead_ends().is_empty());
    }
}
