//! Radius-R truncations of the universal covering tree.
//!
//! Ball vertices are the non-backtracking walks from a base vertex, depth at
//! most R; since the base graph has no loops or multi-edges these walks are
//! automatically reduced. The boundary at infinity is truncated to *frontier
//! classes*, one per depth-R vertex, and a finitely additive measure is a
//! rational value per class. Both Poisson kernels are locally constant at
//! that resolution, so every transform below is exact.
//!
//! Transforms are evaluated by finite additivity instead of summing kernels
//! class by class: subtree masses propagate once from the frontier, outward
//! edge values are `z^{d(o, iota)}` times the mass ahead of the edge, and
//! inward values split off the complement of a subtree. This is a pure
//! repartition of the defining sums (no eigenfunction theory involved) and
//! costs O(vertices) per measure; the literal per-class sums serve as the
//! independent oracle in the test suite.

use crate::graph::{DirEdgeId, Graph, VertexId};
use crate::scalar::Scalar;
use crate::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type BallVertexId = usize;
/// Ball edges: `2k` points from the parent to child vertex `k + 1`
/// (*outward*), `2k + 1` is its opposite (*inward*).
pub type BallEdgeId = usize;
pub type FrontierId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("base graph still has dead ends; prune first")]
    NotPruned,
    #[error("ball radius must be at least 2")]
    RadiusTooSmall,
    #[error("spectral parameter z = 0 is not allowed here")]
    ZeroParameter,
    #[error("vertex too deep for an exact horocycle bracket")]
    TooDeep,
    #[error("outward data does not satisfy the eigen-equations")]
    InconsistentInput,
    #[error("walk is not a closed walk at the base vertex")]
    NotClosed,
    #[error("walk has an immediate backtrack")]
    NotReduced,
    #[error("no frontier class is computable at this radius")]
    DomainTooSmall,
}

/// Projection data tying a ball to the base graph it covers.
#[derive(Debug, Clone)]
pub struct Projection {
    pub base: Graph,
    pub base_vertex: VertexId,
    project_v: Vec<VertexId>,
    /// Base directed edge of the outward ball edge into each non-root vertex.
    project_out: Vec<Option<DirEdgeId>>,
}

#[derive(Debug, Clone)]
pub struct TreeBall {
    radius: usize,
    parent: Vec<Option<BallVertexId>>,
    depth: Vec<usize>,
    children: Vec<Vec<BallVertexId>>,
    /// Step label from the parent: base `DirEdgeId` for covering balls,
    /// child slot for abstract regular trees.
    step: Vec<usize>,
    frontier: Vec<BallVertexId>,
    frontier_of: Vec<Option<FrontierId>>,
    projection: Option<Projection>,
}

impl TreeBall {
    /// Builds the radius-R ball of the universal cover of `g` around `base`.
    pub fn build(g: &Graph, base: VertexId, radius: usize) -> Result<Self, CoverError> {
        if g.has_dead_ends() {
            return Err(CoverError::NotPruned);
        }
        if radius < 2 {
            return Err(CoverError::RadiusTooSmall);
        }
        let mut ball = TreeBall {
            radius,
            parent: vec![None],
            depth: vec![0],
            children: vec![Vec::new()],
            step: vec![usize::MAX],
            frontier: Vec::new(),
            frontier_of: vec![None],
            projection: Some(Projection {
                base: g.clone(),
                base_vertex: base,
                project_v: vec![base],
                project_out: vec![None],
            }),
        };
        // Vertices are created in BFS order, so parents precede children.
        let mut v = 0;
        while v < ball.parent.len() {
            if ball.depth[v] < radius {
                let proj = ball.projection.as_ref().unwrap();
                let here = proj.project_v[v];
                let back = proj.project_out[v].map(|e| g.opp(e));
                let steps: Vec<DirEdgeId> = g
                    .out_edges(here)
                    .iter()
                    .copied()
                    .filter(|e| Some(*e) != back)
                    .collect();
                for e in steps {
                    let w = ball.parent.len();
                    ball.parent.push(Some(v));
                    ball.depth.push(ball.depth[v] + 1);
                    ball.children.push(Vec::new());
                    ball.step.push(e.0);
                    ball.frontier_of.push(None);
                    ball.children[v].push(w);
                    let proj = ball.projection.as_mut().unwrap();
                    proj.project_v.push(g.tau(e));
                    proj.project_out.push(Some(e));
                }
            }
            v += 1;
        }
        ball.collect_frontier();
        Ok(ball)
    }

    /// Builds the radius-R ball of the (q+1)-regular tree with no base graph.
    pub fn regular(q: usize, radius: usize) -> Result<Self, CoverError> {
        if q < 1 {
            return Err(CoverError::NotPruned);
        }
        if radius < 2 {
            return Err(CoverError::RadiusTooSmall);
        }
        let mut ball = TreeBall {
            radius,
            parent: vec![None],
            depth: vec![0],
            children: vec![Vec::new()],
            step: vec![usize::MAX],
            frontier: Vec::new(),
            frontier_of: vec![None],
            projection: None,
        };
        let mut v = 0;
        while v < ball.parent.len() {
            if ball.depth[v] < radius {
                let fan = if v == 0 { q + 1 } else { q };
                for slot in 0..fan {
                    let w = ball.parent.len();
                    ball.parent.push(Some(v));
                    ball.depth.push(ball.depth[v] + 1);
                    ball.children.push(Vec::new());
                    ball.step.push(slot);
                    ball.frontier_of.push(None);
                    ball.children[v].push(w);
                }
            }
            v += 1;
        }
        ball.collect_frontier();
        Ok(ball)
    }

    fn collect_frontier(&mut self) {
        for v in 0..self.parent.len() {
            if self.depth[v] == self.radius {
                self.frontier_of[v] = Some(self.frontier.len());
                self.frontier.push(v);
            }
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn num_edges(&self) -> usize {
        2 * (self.parent.len() - 1)
    }

    pub fn depth(&self, v: BallVertexId) -> usize {
        self.depth[v]
    }

    pub fn parent(&self, v: BallVertexId) -> Option<BallVertexId> {
        self.parent[v]
    }

    pub fn children(&self, v: BallVertexId) -> &[BallVertexId] {
        &self.children[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = BallVertexId> {
        0..self.parent.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = BallEdgeId> {
        0..self.num_edges()
    }

    pub fn projection(&self) -> Option<&Projection> {
        self.projection.as_ref()
    }

    pub fn outward_edge(&self, child: BallVertexId) -> BallEdgeId {
        2 * (child - 1)
    }

    pub fn inward_edge(&self, child: BallVertexId) -> BallEdgeId {
        2 * (child - 1) + 1
    }

    pub fn is_outward(&self, e: BallEdgeId) -> bool {
        e.is_multiple_of(2)
    }

    /// The deeper endpoint of the undirected edge under `e`.
    pub fn edge_child(&self, e: BallEdgeId) -> BallVertexId {
        e / 2 + 1
    }

    pub fn edge_iota(&self, e: BallEdgeId) -> BallVertexId {
        let c = self.edge_child(e);
        if self.is_outward(e) {
            self.parent[c].unwrap()
        } else {
            c
        }
    }

    pub fn edge_tau(&self, e: BallEdgeId) -> BallVertexId {
        let c = self.edge_child(e);
        if self.is_outward(e) {
            c
        } else {
            self.parent[c].unwrap()
        }
    }

    pub fn edge_opp(&self, e: BallEdgeId) -> BallEdgeId {
        e ^ 1
    }

    /// Depth of the deeper endpoint.
    pub fn edge_depth(&self, e: BallEdgeId) -> usize {
        self.depth[self.edge_child(e)]
    }

    /// Edges leaving `v`: outward to each child, inward to the parent.
    pub fn edges_at(&self, v: BallVertexId) -> Vec<BallEdgeId> {
        let mut out: Vec<BallEdgeId> = self.children[v]
            .iter()
            .map(|&c| self.outward_edge(c))
            .collect();
        if v != 0 {
            out.push(self.inward_edge(v));
        }
        out
    }

    /// Non-backtracking continuations of `e`, or `None` when they leave the
    /// ball (outward edges whose head sits on the frontier).
    pub fn continuations(&self, e: BallEdgeId) -> Option<Vec<BallEdgeId>> {
        let head = self.edge_tau(e);
        if self.depth[head] == self.radius {
            return None;
        }
        let back = self.edge_opp(e);
        Some(
            self.edges_at(head)
                .into_iter()
                .filter(|&c| c != back)
                .collect(),
        )
    }

    /// Base directed edge under a ball edge (covering balls only).
    pub fn project_edge(&self, e: BallEdgeId) -> DirEdgeId {
        let proj = self.projection.as_ref().expect("ball has no base graph");
        let base_out = proj.project_out[self.edge_child(e)].unwrap();
        if self.is_outward(e) {
            base_out
        } else {
            proj.base.opp(base_out)
        }
    }

    pub fn project_vertex(&self, v: BallVertexId) -> VertexId {
        let proj = self.projection.as_ref().expect("ball has no base graph");
        proj.project_v[v]
    }

    pub fn num_frontier_classes(&self) -> usize {
        self.frontier.len()
    }

    pub fn frontier_vertices(&self) -> &[BallVertexId] {
        &self.frontier
    }

    pub fn frontier_vertex(&self, class: FrontierId) -> BallVertexId {
        self.frontier[class]
    }

    pub fn frontier_class_of(&self, v: BallVertexId) -> Option<FrontierId> {
        self.frontier_of[v]
    }

    /// Steps from the root to `v`, as step labels.
    pub fn walk_of(&self, v: BallVertexId) -> Vec<usize> {
        let mut steps = Vec::with_capacity(self.depth[v]);
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            steps.push(self.step[cur]);
            cur = p;
        }
        steps.reverse();
        steps
    }

    /// Vertex reached by following step labels from the root.
    pub fn vertex_of_walk(&self, steps: &[usize]) -> Option<BallVertexId> {
        let mut cur = 0;
        for &s in steps {
            cur = *self.children[cur].iter().find(|&&c| self.step[c] == s)?;
        }
        Some(cur)
    }

    pub fn is_ancestor_or_self(&self, anc: BallVertexId, v: BallVertexId) -> bool {
        let mut cur = v;
        loop {
            if cur == anc {
                return true;
            }
            match self.parent[cur] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    pub fn lca(&self, mut a: BallVertexId, mut b: BallVertexId) -> BallVertexId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }
}

/// Finitely additive measure at truncation depth: one value per frontier
/// class; any boundary set visible at this depth is a disjoint union of
/// classes and gets the sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMeasure<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> BoundaryMeasure<T> {
    pub fn from_values(ball: &TreeBall, values: Vec<T>) -> Self {
        assert_eq!(values.len(), ball.num_frontier_classes());
        BoundaryMeasure { values }
    }

    /// Unit mass on one frontier class.
    pub fn delta(ball: &TreeBall, class: FrontierId) -> Self {
        let mut values = vec![T::zero(); ball.num_frontier_classes()];
        values[class] = T::one();
        BoundaryMeasure { values }
    }

    pub fn total(&self) -> T {
        let mut acc = T::zero();
        for v in &self.values {
            acc = acc + v.clone();
        }
        acc
    }

    /// Mass of the boundary set ahead of `e` (`Omega` minus the opposite
    /// subtree for inward edges).
    pub fn mass_ahead(&self, ball: &TreeBall, e: BallEdgeId) -> T {
        let below = self.subtree_masses(ball);
        let c = ball.edge_child(e);
        if ball.is_outward(e) {
            below[c].clone()
        } else {
            below[0].clone() - below[c].clone()
        }
    }

    /// Mass at or below each ball vertex, one bottom-up pass.
    pub fn subtree_masses(&self, ball: &TreeBall) -> Vec<T> {
        let n = ball.num_vertices();
        let mut below = vec![T::zero(); n];
        for (class, &v) in ball.frontier.iter().enumerate() {
            below[v] = self.values[class].clone();
        }
        for v in (1..n).rev() {
            let p = ball.parent[v].unwrap();
            below[p] = below[p].clone() + below[v].clone();
        }
        below
    }
}

/// Seeded small-rational measure for randomized exact checks.
pub fn random_measure(ball: &TreeBall, seed: u64) -> BoundaryMeasure<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..ball.num_frontier_classes())
        .map(|_| {
            let p: i64 = rng.gen_range(-9..=9);
            let q: i64 = rng.gen_range(1..=9);
            Rational::new(p.into(), q.into())
        })
        .collect();
    BoundaryMeasure { values }
}

/// Horocycle bracket of a ball vertex against a frontier class:
/// `2 d(o, y) - d(o, x)` with `y` the merge point of the two rays toward the
/// class. Exact for `depth(x) <= R - 1`; deeper vertices would need the tree
/// beyond the truncation.
pub fn horocycle_bracket(
    ball: &TreeBall,
    x: BallVertexId,
    class: FrontierId,
) -> Result<i64, CoverError> {
    if ball.depth(x) + 1 > ball.radius() {
        return Err(CoverError::TooDeep);
    }
    let f = ball.frontier_vertex(class);
    let y = ball.lca(x, f);
    Ok(2 * ball.depth(y) as i64 - ball.depth(x) as i64)
}

fn z_powers<T: Scalar>(z: &T, up_to: usize) -> (Vec<T>, Vec<T>) {
    let mut pos = Vec::with_capacity(up_to + 1);
    let mut neg = Vec::with_capacity(up_to + 1);
    let inv = T::one() / z.clone();
    pos.push(T::one());
    neg.push(T::one());
    for i in 1..=up_to {
        pos.push(pos[i - 1].clone() * z.clone());
        neg.push(neg[i - 1].clone() * inv.clone());
    }
    (pos, neg)
}

/// Both Poisson transforms of a measure, exact on the whole ball:
/// edge values indexed by ball edge, vertex values indexed by ball vertex.
pub fn poisson_pair<T: Scalar>(
    ball: &TreeBall,
    mu: &BoundaryMeasure<T>,
    z: &T,
) -> Result<(Vec<T>, Vec<T>), CoverError> {
    if z.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    let (pow, _) = z_powers(z, ball.radius());
    let below = mu.subtree_masses(ball);
    let inv = T::one() / z.clone();
    let n = ball.num_vertices();
    let mut edge = vec![T::zero(); ball.num_edges()];
    let mut vertex = vec![T::zero(); n];
    // Outward: the kernel is constantly z^{depth(iota)} on the subtree ahead.
    for v in 1..n {
        edge[ball.outward_edge(v)] = pow[ball.depth(v) - 1].clone() * below[v].clone();
    }
    // All classes meet the root with bracket zero.
    vertex[0] = below[0].clone();
    // Splitting off the subtree ahead of (p -> v) lowers every remaining
    // bracket against v by one relative to p.
    for v in 1..n {
        let p = ball.parent(v).unwrap();
        let f_out = edge[ball.outward_edge(v)].clone();
        let f_in = (vertex[p].clone() - f_out.clone()) * inv.clone();
        edge[ball.inward_edge(v)] = f_in.clone();
        vertex[v] = z.clone() * f_out + f_in;
    }
    Ok((edge, vertex))
}

/// Vertex Poisson transform `x -> sum_w z^{<x, w>} mu(w)`.
pub fn vertex_poisson<T: Scalar>(
    ball: &TreeBall,
    mu: &BoundaryMeasure<T>,
    z: &T,
) -> Result<Vec<T>, CoverError> {
    poisson_pair(ball, mu, z).map(|(_, v)| v)
}

/// Edge Poisson transform `e -> sum_{w ahead of e} z^{<iota e, w>} mu(w)`.
pub fn edge_poisson<T: Scalar>(
    ball: &TreeBall,
    mu: &BoundaryMeasure<T>,
    z: &T,
) -> Result<Vec<T>, CoverError> {
    poisson_pair(ball, mu, z).map(|(e, _)| e)
}

/// Reads a measure back off edge values at the frontier:
/// `mu(class) = z^{-(R-1)} f(e)` for the outward edge into each frontier
/// vertex. Inverse of `edge_poisson` followed by restriction.
pub fn boundary_value<T: Scalar>(
    ball: &TreeBall,
    f: &[T],
    z: &T,
) -> Result<BoundaryMeasure<T>, CoverError> {
    if z.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    assert_eq!(f.len(), ball.num_edges());
    let (_, neg) = z_powers(z, ball.radius());
    let scale = neg[ball.radius() - 1].clone();
    let values = ball
        .frontier
        .iter()
        .map(|&v| scale.clone() * f[ball.outward_edge(v)].clone())
        .collect();
    Ok(BoundaryMeasure { values })
}

/// `f(e) -> z^{-d(o, iota e)} f(e)` on outward values (indexed by edge/2).
pub fn phi_rescale<T: Scalar>(ball: &TreeBall, f: &[T], z: &T) -> Result<Vec<T>, CoverError> {
    if z.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    assert_eq!(f.len(), ball.num_vertices() - 1);
    let (_, neg) = z_powers(z, ball.radius());
    Ok((1..ball.num_vertices())
        .map(|v| neg[ball.depth(v) - 1].clone() * f[v - 1].clone())
        .collect())
}

/// Inverse rescaling `f(e) -> z^{d(o, iota e)} f(e)` on outward values.
pub fn psi_rescale<T: Scalar>(ball: &TreeBall, f: &[T], z: &T) -> Result<Vec<T>, CoverError> {
    if z.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    assert_eq!(f.len(), ball.num_vertices() - 1);
    let (pow, _) = z_powers(z, ball.radius());
    Ok((1..ball.num_vertices())
        .map(|v| pow[ball.depth(v) - 1].clone() * f[v - 1].clone())
        .collect())
}

/// Outward entries of a full ball edge vector, indexed by `edge / 2`.
pub fn outward_part<T: Clone>(ball: &TreeBall, f: &[T]) -> Vec<T> {
    assert_eq!(f.len(), ball.num_edges());
    (1..ball.num_vertices())
        .map(|v| f[2 * (v - 1)].clone())
        .collect()
}

/// Extends outward eigen-data to the inward edges.
///
/// The pair relations propagate a unique inward value per edge once the
/// outward data is consistent; the closed form only divides by powers of z,
/// so `z = 1` and `z = -1` are fine. Input is outward-indexed (`edge / 2`),
/// output a full ball edge vector satisfying the eigen-equation everywhere
/// the edge Laplacian is defined in the ball.
pub fn extend_eigenfunction<T: Scalar>(
    ball: &TreeBall,
    outward: &[T],
    z: &T,
) -> Result<Vec<T>, CoverError> {
    if z.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    let n = ball.num_vertices();
    assert_eq!(outward.len(), n - 1);
    let value = |v: BallVertexId| outward[v - 1].clone();
    for v in 1..n {
        if ball.depth(v) == ball.radius() {
            continue;
        }
        let mut sum = T::zero();
        for &c in ball.children(v) {
            sum = sum + value(c);
        }
        if z.clone() * value(v) != sum {
            return Err(CoverError::InconsistentInput);
        }
    }
    let (pow, neg) = z_powers(z, ball.radius());
    let mut root_sum = T::zero();
    for &c in ball.children(0) {
        root_sum = root_sum + value(c);
    }
    let z2m1 = z.clone() * z.clone() - T::one();
    let mut f = vec![T::zero(); ball.num_edges()];
    for v in 1..n {
        f[ball.outward_edge(v)] = value(v);
        let depth = ball.depth(v);
        // Walk the ancestor chain a_2 = parent(v), ..., up to depth one.
        let mut acc = T::zero();
        let mut a = ball.parent(v).unwrap();
        let mut k = 2usize;
        while a != 0 {
            acc = acc + pow[depth - k].clone() * value(a);
            a = ball.parent(a).unwrap();
            k += 1;
        }
        let numer = z2m1.clone() * acc - pow[depth - 1].clone() * value(v) + root_sum.clone();
        f[ball.inward_edge(v)] = numer * neg[depth].clone();
    }
    Ok(f)
}

/// Pullback of a base edge function to the ball.
pub fn lift_edge_function<T: Scalar>(g: &Graph, ball: &TreeBall, f: &[T]) -> Vec<T> {
    assert_eq!(f.len(), g.num_dir_edges());
    ball.edges()
        .map(|e| f[ball.project_edge(e).0].clone())
        .collect()
}

/// Sum of `f` over the edges leaving each vertex, one pass over the edges.
fn star_sums<T: Scalar>(ball: &TreeBall, f: &[T]) -> Vec<T> {
    let mut sums = vec![T::zero(); ball.num_vertices()];
    for e in ball.edges() {
        let x = ball.edge_iota(e);
        sums[x] = sums[x].clone() + f[e].clone();
    }
    sums
}

/// Pointwise edge Laplacian on the ball; `None` where continuations leave
/// it. Computed as the star sum at the head minus the backtrack term.
pub fn apply_edge_laplacian<T: Scalar>(ball: &TreeBall, f: &[T]) -> Vec<Option<T>> {
    assert_eq!(f.len(), ball.num_edges());
    let sums = star_sums(ball, f);
    ball.edges()
        .map(|e| {
            let head = ball.edge_tau(e);
            if ball.depth(head) == ball.radius() {
                None
            } else {
                Some(sums[head].clone() - f[ball.edge_opp(e)].clone())
            }
        })
        .collect()
}

/// Pointwise opposite-edge involution on the ball.
pub fn apply_xi<T: Scalar>(ball: &TreeBall, f: &[T]) -> Vec<T> {
    assert_eq!(f.len(), ball.num_edges());
    ball.edges().map(|e| f[ball.edge_opp(e)].clone()).collect()
}

/// Pointwise source sum on the ball; `None` at frontier sources, where part
/// of the star lies outside the ball.
pub fn apply_sigma<T: Scalar>(ball: &TreeBall, f: &[T]) -> Vec<Option<T>> {
    assert_eq!(f.len(), ball.num_edges());
    let sums = star_sums(ball, f);
    ball.edges()
        .map(|e| {
            let x = ball.edge_iota(e);
            if ball.depth(x) == ball.radius() {
                None
            } else {
                Some(sums[x].clone())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::graph::VertexId;
    use crate::scalar::int_pow;
    use num::Zero;

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    fn k4_ball(r: usize) -> TreeBall {
        TreeBall::build(&corpus::complete(4), VertexId(0), r).unwrap()
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(k4_ball(3).num_vertices(), 22); // 1 + 3 + 6 + 12
        let line = TreeBall::build(&corpus::cycle(3), VertexId(0), 4).unwrap();
        assert_eq!(line.num_vertices(), 9);
        assert!(line
            .vertices()
            .all(|v| line.children(v).len() <= 1 || v == 0));
        let c4 = TreeBall::build(&corpus::cycle(4), VertexId(0), 2).unwrap();
        assert_eq!(c4.num_vertices(), 5);
        assert_eq!(TreeBall::regular(2, 3).unwrap().num_vertices(), 22);
    }

    #[test]
    fn ball_rejects_bad_input() {
        assert_eq!(
            TreeBall::build(&corpus::path(4), VertexId(0), 4).unwrap_err(),
            CoverError::NotPruned
        );
        assert_eq!(
            TreeBall::build(&corpus::cycle(3), VertexId(0), 1).unwrap_err(),
            CoverError::RadiusTooSmall
        );
    }

    #[test]
    fn ball_is_a_tree_with_local_isomorphism() {
        let ball = k4_ball(4);
        assert_eq!(ball.num_edges(), 2 * (ball.num_vertices() - 1));
        let g = corpus::complete(4);
        for v in ball.vertices() {
            if ball.depth(v) >= ball.radius() {
                continue;
            }
            // neighbors project bijectively onto base neighbors
            let mut images: Vec<VertexId> = ball
                .edges_at(v)
                .into_iter()
                .map(|e| ball.project_vertex(ball.edge_tau(e)))
                .collect();
            images.sort();
            images.dedup();
            assert_eq!(images.len(), g.degree(ball.project_vertex(v)));
        }
    }

    #[test]
    fn bracket_examples() {
        let ball = k4_ball(3);
        let x1 = ball.children(0)[0];
        for class in 0..ball.num_frontier_classes() {
            assert_eq!(horocycle_bracket(&ball, 0, class).unwrap(), 0);
            let expected = if ball.is_ancestor_or_self(x1, ball.frontier_vertex(class)) {
                1
            } else {
                -1
            };
            assert_eq!(horocycle_bracket(&ball, x1, class).unwrap(), expected);
        }
        let deep = ball.frontier_vertex(0);
        assert_eq!(
            horocycle_bracket(&ball, deep, 0).unwrap_err(),
            CoverError::TooDeep
        );
    }

    #[test]
    fn measure_additivity_and_outward_closed_form() {
        let ball = k4_ball(4);
        let mu = random_measure(&ball, 17);
        let total = mu.total();
        let z = rat(3, 5);
        let f = edge_poisson(&ball, &mu, &z).unwrap();
        for e in ball.edges() {
            // opposite boundary sets partition the whole boundary
            assert_eq!(
                mu.mass_ahead(&ball, e) + mu.mass_ahead(&ball, ball.edge_opp(e)),
                total
            );
            // outward values are z^{d(o, iota e)} times the mass ahead
            if ball.is_outward(e) {
                let d = ball.depth(ball.edge_iota(e)) as i64;
                assert_eq!(f[e], int_pow(&z, d) * mu.mass_ahead(&ball, e));
            }
        }
    }

    #[test]
    fn regular_ball_agrees_with_the_cover_of_a_regular_graph() {
        let from_graph = k4_ball(5);
        let abstract_ball = TreeBall::regular(2, 5).unwrap();
        assert_eq!(from_graph.num_vertices(), abstract_ball.num_vertices());
        assert_eq!(
            from_graph.num_frontier_classes(),
            abstract_ball.num_frontier_classes()
        );
        for v in from_graph.vertices() {
            assert_eq!(from_graph.depth(v), abstract_ball.depth(v));
            assert_eq!(
                from_graph.children(v).len(),
                abstract_ball.children(v).len()
            );
        }
    }

    /// Literal kernel sum over frontier classes; the transforms must match.
    fn naive_vertex_poisson(
        ball: &TreeBall,
        mu: &BoundaryMeasure<Rational>,
        z: &Rational,
        x: BallVertexId,
    ) -> Rational {
        (0..ball.num_frontier_classes())
            .map(|w| {
                let f = ball.frontier_vertex(w);
                let y = ball.lca(x, f);
                let bracket = 2 * ball.depth(y) as i64 - ball.depth(x) as i64;
                int_pow(z, bracket) * mu.values[w].clone()
            })
            .sum()
    }

    fn naive_edge_poisson(
        ball: &TreeBall,
        mu: &BoundaryMeasure<Rational>,
        z: &Rational,
        e: BallEdgeId,
    ) -> Rational {
        let x = ball.edge_iota(e);
        let child = ball.edge_child(e);
        (0..ball.num_frontier_classes())
            .filter(|&w| {
                let ahead = ball.is_ancestor_or_self(child, ball.frontier_vertex(w));
                if ball.is_outward(e) {
                    ahead
                } else {
                    !ahead
                }
            })
            .map(|w| {
                let f = ball.frontier_vertex(w);
                let y = ball.lca(x, f);
                let bracket = 2 * ball.depth(y) as i64 - ball.depth(x) as i64;
                int_pow(z, bracket) * mu.values[w].clone()
            })
            .sum()
    }

    #[test]
    fn transforms_match_the_kernel_sums() {
        for (ball, seed) in [
            (k4_ball(4), 1u64),
            (
                TreeBall::build(&corpus::cycle(3), VertexId(0), 6).unwrap(),
                2,
            ),
            (
                TreeBall::build(&corpus::theta_subdivided(), VertexId(0), 4).unwrap(),
                3,
            ),
        ] {
            let mu = random_measure(&ball, seed);
            for z in [rat(3, 5), rat(-2, 1), rat(1, 1), rat(-1, 1)] {
                let (edge, vertex) = poisson_pair(&ball, &mu, &z).unwrap();
                for x in ball.vertices() {
                    assert_eq!(vertex[x], naive_vertex_poisson(&ball, &mu, &z, x));
                }
                for e in ball.edges() {
                    assert_eq!(edge[e], naive_edge_poisson(&ball, &mu, &z, e));
                }
            }
        }
    }

    #[test]
    fn delta_values_at_the_base() {
        let ball = k4_ball(4);
        let z = rat(3, 5);
        for class in [0, ball.num_frontier_classes() - 1] {
            let mu = BoundaryMeasure::delta(&ball, class);
            assert_eq!(mu.total(), rat(1, 1));
            let vertex = vertex_poisson(&ball, &mu, &z).unwrap();
            assert_eq!(vertex[0], rat(1, 1));
        }
        // along the ray: bracket one, value z
        let class = 0;
        let mu = BoundaryMeasure::delta(&ball, class);
        let vertex = vertex_poisson(&ball, &mu, &z).unwrap();
        let mut v = ball.frontier_vertex(class);
        while ball.depth(v) > 1 {
            v = ball.parent(v).unwrap();
        }
        assert_eq!(vertex[v], z);
    }

    #[test]
    fn uniform_measure_at_z_one_is_constant() {
        let ball = k4_ball(4);
        let m = ball.num_frontier_classes();
        let mu = BoundaryMeasure::from_values(
            &ball,
            vec![Rational::new(1.into(), (m as i64).into()); m],
        );
        let vertex = vertex_poisson(&ball, &mu, &rat(1, 1)).unwrap();
        assert!(vertex.iter().all(|v| *v == rat(1, 1)));
    }

    #[test]
    fn poisson_images_are_eigenfunctions() {
        let ball = k4_ball(5);
        for (seed, z) in [(5u64, rat(3, 5)), (6, rat(-2, 1)), (7, rat(1, 1))] {
            let mu = random_measure(&ball, seed);
            let f = edge_poisson(&ball, &mu, &z).unwrap();
            let image = apply_edge_laplacian(&ball, &f);
            let mut checked = 0;
            for e in ball.edges() {
                if let Some(v) = &image[e] {
                    assert_eq!(*v, z.clone() * f[e].clone());
                    checked += 1;
                }
            }
            assert!(checked > 0);
        }
    }

    #[test]
    fn boundary_value_round_trip() {
        let ball = k4_ball(5);
        let z = rat(3, 5);
        let mu = random_measure(&ball, 11);
        let f = edge_poisson(&ball, &mu, &z).unwrap();
        assert_eq!(boundary_value(&ball, &f, &z).unwrap(), mu);
        // z = 1 reads frontier values off directly
        let f1 = edge_poisson(&ball, &mu, &rat(1, 1)).unwrap();
        let back = boundary_value(&ball, &f1, &rat(1, 1)).unwrap();
        for &v in ball.frontier_vertices() {
            assert_eq!(
                back.values[ball.frontier_class_of(v).unwrap()],
                f1[ball.outward_edge(v)]
            );
        }
        assert_eq!(back, mu);
    }

    #[test]
    fn rescalings_are_mutually_inverse_and_commute_with_the_transform() {
        let ball = k4_ball(4);
        let z = rat(-2, 1);
        let mu = random_measure(&ball, 21);
        let f = outward_part(&ball, &edge_poisson(&ball, &mu, &z).unwrap());
        let phi = phi_rescale(&ball, &f, &z).unwrap();
        assert_eq!(psi_rescale(&ball, &phi, &z).unwrap(), f);
        let f1 = outward_part(&ball, &edge_poisson(&ball, &mu, &rat(1, 1)).unwrap());
        assert_eq!(phi, f1);
    }

    #[test]
    fn extension_recovers_the_transform() {
        let ball = k4_ball(4);
        for z in [rat(3, 5), rat(1, 1), rat(-1, 1)] {
            let mu = random_measure(&ball, 31);
            let full = edge_poisson(&ball, &mu, &z).unwrap();
            let extended = extend_eigenfunction(&ball, &outward_part(&ball, &full), &z).unwrap();
            assert_eq!(extended, full);
        }
    }

    #[test]
    fn extension_at_z_one_lands_in_the_pair_space() {
        let ball = k4_ball(4);
        let mu = random_measure(&ball, 41);
        let full = edge_poisson(&ball, &mu, &rat(1, 1)).unwrap();
        let c = mu.total();
        for e in ball.edges() {
            assert_eq!(full[e].clone() + full[ball.edge_opp(e)].clone(), c);
        }
        for v in ball.vertices() {
            if ball.depth(v) < ball.radius() {
                let sum: Rational = ball.edges_at(v).into_iter().map(|e| full[e].clone()).sum();
                assert_eq!(sum, c);
            }
        }
    }

    #[test]
    fn extension_rejects_inconsistent_input_and_passes_zero() {
        let ball = k4_ball(3);
        let n = ball.num_vertices() - 1;
        let zeros = vec![rat(0, 1); n];
        let f = extend_eigenfunction(&ball, &zeros, &rat(3, 5)).unwrap();
        assert!(f.iter().all(|x| x.is_zero()));
        let mut bad = zeros;
        bad[0] = rat(1, 1);
        assert_eq!(
            extend_eigenfunction(&ball, &bad, &rat(3, 5)).unwrap_err(),
            CoverError::InconsistentInput
        );
    }

    #[test]
    fn lift_commutes_with_the_edge_laplacian() {
        let g = corpus::complete(4);
        let ball = k4_ball(4);
        // an arbitrary base edge function, not an eigenfunction
        let f: Vec<Rational> = (0..g.num_dir_edges())
            .map(|i| rat(i as i64 - 3, 2))
            .collect();
        let lifted = lift_edge_function(&g, &ball, &f);
        let d = crate::spectral::edge_laplacian::<Rational>(&g).matrix;
        let df = d.matvec(&f).unwrap();
        let lifted_df = lift_edge_function(&g, &ball, &df);
        let image = apply_edge_laplacian(&ball, &lifted);
        let mut checked = 0;
        for e in ball.edges() {
            if let Some(v) = &image[e] {
                assert_eq!(*v, lifted_df[e]);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn lifted_eigenfunctions_stay_eigenfunctions() {
        let g = corpus::complete(4);
        let ball = k4_ball(5);
        let z = rat(1, 1);
        for f in crate::spectral::edge_eigenspace(&g, &z) {
            let lifted = lift_edge_function(&g, &ball, &f);
            let image = apply_edge_laplacian(&ball, &lifted);
            for e in ball.edges() {
                if let Some(v) = &image[e] {
                    assert_eq!(*v, z.clone() * lifted[e].clone());
                }
            }
            // and the boundary measure reproduces the lift on inner edges
            let mu = boundary_value(&ball, &lifted, &z).unwrap();
            let back = edge_poisson(&ball, &mu, &z).unwrap();
            assert_eq!(back, lifted);
        }
    }

    #[test]
    fn constant_lift_on_the_line_cover() {
        let g = corpus::cycle(3);
        let ball = TreeBall::build(&g, VertexId(0), 5).unwrap();
        let ones = vec![rat(1, 1); 6];
        let lifted = lift_edge_function(&g, &ball, &ones);
        assert!(lifted.iter().all(|x| *x == rat(1, 1)));
    }
}
