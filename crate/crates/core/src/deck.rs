//! Deck transformations of covering balls and the horocycle calculus.
//!
//! A deck transformation is encoded by a reduced closed walk at the base
//! vertex; it acts on ball vertices by prepend-and-reduce and is a partial
//! map, defined where the image stays inside the truncation. Every check in
//! this module counts the instances it could actually evaluate, so a vacuous
//! pass is visible to the caller.

use crate::cover::{
    horocycle_bracket, BallVertexId, BoundaryMeasure, CoverError, FrontierId, TreeBall,
};
use crate::graph::{DirEdgeId, Graph};
use crate::scalar::{int_pow, Scalar};

/// Cover automorphism given by a reduced closed walk at the base vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeckTransform {
    loop_edges: Vec<DirEdgeId>,
}

/// Cancels adjacent opposite pairs until none remain.
fn reduce_walk(g: &Graph, walk: impl IntoIterator<Item = DirEdgeId>) -> Vec<DirEdgeId> {
    let mut stack: Vec<DirEdgeId> = Vec::new();
    for e in walk {
        if stack.last() == Some(&g.opp(e)) {
            stack.pop();
        } else {
            stack.push(e);
        }
    }
    stack
}

impl DeckTransform {
    /// Validates the loop: concatenated, closed at `base`, no immediate
    /// backtrack. The empty loop is the identity.
    pub fn new(
        g: &Graph,
        base: crate::graph::VertexId,
        loop_edges: Vec<DirEdgeId>,
    ) -> Result<Self, CoverError> {
        if let Some(&first) = loop_edges.first() {
            if g.iota(first) != base || g.tau(*loop_edges.last().unwrap()) != base {
                return Err(CoverError::NotClosed);
            }
            for w in loop_edges.windows(2) {
                if g.tau(w[0]) != g.iota(w[1]) {
                    return Err(CoverError::NotClosed);
                }
                if w[1] == g.opp(w[0]) {
                    return Err(CoverError::NotReduced);
                }
            }
        }
        Ok(DeckTransform { loop_edges })
    }

    pub fn inverse(&self, g: &Graph) -> DeckTransform {
        DeckTransform {
            loop_edges: self.loop_edges.iter().rev().map(|&e| g.opp(e)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.loop_edges.is_empty()
    }

    fn base_graph<'a>(&self, ball: &'a TreeBall) -> &'a Graph {
        &ball
            .projection()
            .expect("deck transforms need a covering ball")
            .base
    }

    fn image_walk(&self, ball: &TreeBall, v: BallVertexId) -> Vec<DirEdgeId> {
        let g = self.base_graph(ball);
        let walk = ball.walk_of(v).into_iter().map(DirEdgeId);
        reduce_walk(g, self.loop_edges.iter().copied().chain(walk))
    }

    /// Partial action on ball vertices; `None` when the image leaves the ball.
    pub fn apply_vertex(&self, ball: &TreeBall, v: BallVertexId) -> Option<BallVertexId> {
        let walk = self.image_walk(ball, v);
        if walk.len() > ball.radius() {
            return None;
        }
        let steps: Vec<usize> = walk.iter().map(|e| e.0).collect();
        Some(ball.vertex_of_walk(&steps).expect("walk stays in the ball"))
    }

    /// Image of the base vertex, as a ball vertex.
    pub fn translate_base(&self, ball: &TreeBall) -> Option<BallVertexId> {
        self.apply_vertex(ball, 0)
    }

    /// Induced partial action on frontier classes: the image class is the
    /// depth-R prefix of the translated walk, known only when that walk still
    /// reaches depth R.
    pub fn apply_class(&self, ball: &TreeBall, class: FrontierId) -> Option<FrontierId> {
        let walk = self.image_walk(ball, ball.frontier_vertex(class));
        if walk.len() < ball.radius() {
            return None;
        }
        let steps: Vec<usize> = walk[..ball.radius()].iter().map(|e| e.0).collect();
        let v = ball
            .vertex_of_walk(&steps)
            .expect("prefix stays in the ball");
        ball.frontier_class_of(v)
    }
}

/// One verified identity family: how many instances were computable and
/// whether every one of them held exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckedIdentity {
    pub checked: usize,
    pub holds: bool,
}

/// `<gx, gw> = <x, w> + <go, gw>` over all computable (x, class) pairs.
pub fn horocycle_identity_check(
    ball: &TreeBall,
    dt: &DeckTransform,
) -> Result<CheckedIdentity, CoverError> {
    let Some(go) = dt.translate_base(ball) else {
        return Err(CoverError::DomainTooSmall);
    };
    if ball.depth(go) + 1 > ball.radius() {
        return Err(CoverError::DomainTooSmall);
    }
    let mut checked = 0;
    let mut holds = true;
    let images: Vec<Option<FrontierId>> = (0..ball.num_frontier_classes())
        .map(|w| dt.apply_class(ball, w))
        .collect();
    for x in ball.vertices() {
        if ball.depth(x) + 1 > ball.radius() {
            continue;
        }
        let Some(gx) = dt.apply_vertex(ball, x) else {
            continue;
        };
        if ball.depth(gx) + 1 > ball.radius() {
            continue;
        }
        for (w, gw) in images.iter().enumerate() {
            let Some(gw) = gw else { continue };
            let lhs = horocycle_bracket(ball, gx, *gw)?;
            let rhs = horocycle_bracket(ball, x, w)? + horocycle_bracket(ball, go, *gw)?;
            checked += 1;
            holds &= lhs == rhs;
        }
    }
    if checked == 0 {
        return Err(CoverError::DomainTooSmall);
    }
    Ok(CheckedIdentity { checked, holds })
}

/// `<go, gw> = -<g^{-1}o, w>` over all computable classes.
pub fn second_horocycle_check(
    ball: &TreeBall,
    dt: &DeckTransform,
) -> Result<CheckedIdentity, CoverError> {
    let g = dt.base_graph(ball).clone();
    let inv = dt.inverse(&g);
    let (Some(go), Some(gio)) = (dt.translate_base(ball), inv.translate_base(ball)) else {
        return Err(CoverError::DomainTooSmall);
    };
    if ball.depth(go) + 1 > ball.radius() || ball.depth(gio) + 1 > ball.radius() {
        return Err(CoverError::DomainTooSmall);
    }
    let mut checked = 0;
    let mut holds = true;
    for w in 0..ball.num_frontier_classes() {
        let Some(gw) = dt.apply_class(ball, w) else {
            continue;
        };
        let lhs = horocycle_bracket(ball, go, gw)?;
        let rhs = -horocycle_bracket(ball, gio, w)?;
        checked += 1;
        holds &= lhs == rhs;
    }
    if checked == 0 {
        return Err(CoverError::DomainTooSmall);
    }
    Ok(CheckedIdentity { checked, holds })
}

/// Invariance of a boundary measure under the twisted action
/// `mu(C) = z^{-<go, w_C>} mu(g^{-1} C)`, verified on every frontier class
/// whose preimage is measurable at this truncation.
///
/// `mu` here is the boundary value of the lift of a base edge eigenfunction,
/// i.e. `mu(class below e) = z^{-d(o, iota e)} lift(f)(e)` read at depth R.
pub fn gamma_invariance_check<T: Scalar>(
    g: &Graph,
    ball: &TreeBall,
    f: &[T],
    dt: &DeckTransform,
    z: &T,
) -> Result<CheckedIdentity, CoverError> {
    if z.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    assert_eq!(f.len(), g.num_dir_edges());
    let Some(go) = dt.translate_base(ball) else {
        return Err(CoverError::DomainTooSmall);
    };
    if ball.depth(go) + 1 > ball.radius() {
        return Err(CoverError::DomainTooSmall);
    }
    let inv = dt.inverse(g);
    // Boundary values of the lifted function, read at the frontier.
    let scale = int_pow(z, -((ball.radius() - 1) as i64));
    let values: Vec<T> = (0..ball.num_frontier_classes())
        .map(|w| {
            let v = ball.frontier_vertex(w);
            scale.clone() * f[ball.project_edge(ball.outward_edge(v)).0].clone()
        })
        .collect();
    let mu = BoundaryMeasure::from_values(ball, values);
    let below = mu.subtree_masses(ball);

    let mut checked = 0;
    let mut holds = true;
    for w in 0..ball.num_frontier_classes() {
        let u = ball.frontier_vertex(w);
        let pre = inv.image_walk(ball, u);
        if pre.len() > ball.radius() {
            continue;
        }
        // depth(go) < R forces at least one letter to survive
        let steps: Vec<usize> = pre.iter().map(|e| e.0).collect();
        let v = ball
            .vertex_of_walk(&steps)
            .expect("preimage walk stays in the ball");
        let bracket = horocycle_bracket(ball, go, w)?;
        let lhs = mu.values[w].clone();
        let rhs = int_pow(z, -bracket) * below[v].clone();
        checked += 1;
        holds &= lhs == rhs;
    }
    if checked == 0 {
        return Err(CoverError::DomainTooSmall);
    }
    Ok(CheckedIdentity { checked, holds })
}

/// Closed non-backtracking walks at `base` up to the given length, found by
/// depth-first search in input-edge order. Cyclically unreduced returns are
/// allowed; the prepend action reduces them.
pub fn closed_walks(
    g: &Graph,
    base: crate::graph::VertexId,
    max_len: usize,
) -> Vec<Vec<DirEdgeId>> {
    let mut out = Vec::new();
    let mut walk: Vec<DirEdgeId> = Vec::new();
    fn go(
        g: &Graph,
        base: crate::graph::VertexId,
        walk: &mut Vec<DirEdgeId>,
        max_len: usize,
        out: &mut Vec<Vec<DirEdgeId>>,
    ) {
        if walk.len() == max_len {
            return;
        }
        let here = walk.last().map_or(base, |&e| g.tau(e));
        for &e in g.out_edges(here) {
            if let Some(&last) = walk.last() {
                if e == g.opp(last) {
                    continue;
                }
            }
            walk.push(e);
            if g.tau(e) == base && walk.len() >= 3 {
                out.push(walk.clone());
            }
            go(g, base, walk, max_len, out);
            walk.pop();
        }
    }
    go(g, base, &mut walk, max_len, &mut out);
    out
}
