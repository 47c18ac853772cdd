//! Operators on edge functions, their exact eigenspaces, and the reports
//! pitting computed dimensions against what the graph topology predicts.
//!
//! Conventions: matrices act on functions by `(Mf)(e) = sum_e' M[e,e'] f(e')`,
//! edge indices follow `Graph` edge order, and predictions are computed from
//! the cyclomatic number, 2-colorability and leaf count alone, never from the
//! spectra they are checked against.

use crate::graph::{DirEdgeId, Graph, VertexId};
use crate::linalg::{normalize_leading, span_rank, Matrix};
use crate::scalar::{format_rational, Scalar};
use crate::Rational;
use num::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("spectral parameter z = 0 is not allowed here")]
    ZeroParameter,
    #[error("spectral parameter with z^2 in {{0, 1}} is not allowed here")]
    ExceptionalParameter,
    #[error("graph still has dead ends; prune first")]
    NotPruned,
}

/// Which operator a matrix realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    EdgeLaplacian,
    Transition,
    Transfer,
    Sigma,
    Xi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOperator<T> {
    pub kind: OperatorKind,
    pub matrix: Matrix<T>,
}

/// The two exceptional spectral parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExceptionalZ {
    One,
    MinusOne,
}

impl ExceptionalZ {
    pub fn value<T: Scalar>(self) -> T {
        match self {
            ExceptionalZ::One => T::one(),
            ExceptionalZ::MinusOne => T::zero() - T::one(),
        }
    }
}

/// Edge Laplacian: row `e` has a one at every non-backtracking continuation
/// of `e`. Row sums are `q_{tau(e)}`.
pub fn edge_laplacian<T: Scalar>(g: &Graph) -> EdgeOperator<T> {
    let n = g.num_dir_edges();
    let mut m = Matrix::zeros(n, n);
    for e in g.dir_edges() {
        for c in g.continuations(e) {
            m.set(e.0, c.0, T::one());
        }
    }
    EdgeOperator {
        kind: OperatorKind::EdgeLaplacian,
        matrix: m,
    }
}

/// Non-backtracking transition matrix: `(e, e') = 1` iff `tau(e) = iota(e')`
/// and `tau(e') != iota(e)`.
pub fn transition_matrix<T: Scalar>(g: &Graph) -> EdgeOperator<T> {
    let n = g.num_dir_edges();
    let mut m = Matrix::zeros(n, n);
    for e in g.dir_edges() {
        for &c in g.out_edges(g.tau(e)) {
            if g.tau(c) != g.iota(e) {
                m.set(e.0, c.0, T::one());
            }
        }
    }
    EdgeOperator {
        kind: OperatorKind::Transition,
        matrix: m,
    }
}

/// Transfer matrix: the transpose of the transition matrix.
pub fn transfer_matrix<T: Scalar>(g: &Graph) -> EdgeOperator<T> {
    EdgeOperator {
        kind: OperatorKind::Transfer,
        matrix: transition_matrix::<T>(g).matrix.transpose(),
    }
}

/// Source sum: `(e, e') = 1` iff `iota(e') = iota(e)` (including `e` itself).
pub fn sigma_matrix<T: Scalar>(g: &Graph) -> EdgeOperator<T> {
    let n = g.num_dir_edges();
    let mut m = Matrix::zeros(n, n);
    for e in g.dir_edges() {
        for &c in g.out_edges(g.iota(e)) {
            m.set(e.0, c.0, T::one());
        }
    }
    EdgeOperator {
        kind: OperatorKind::Sigma,
        matrix: m,
    }
}

/// Opposite-edge involution as a permutation matrix.
pub fn xi_matrix<T: Scalar>(g: &Graph) -> EdgeOperator<T> {
    let n = g.num_dir_edges();
    let mut m = Matrix::zeros(n, n);
    for e in g.dir_edges() {
        m.set(e.0, g.opp(e).0, T::one());
    }
    EdgeOperator {
        kind: OperatorKind::Xi,
        matrix: m,
    }
}

/// Row-stochastic vertex Laplacian: `(x, y) = 1/(q_x + 1)` for neighbors.
pub fn vertex_laplacian<T: Scalar>(g: &Graph) -> Matrix<T> {
    let n = g.num_vertices();
    let mut m = Matrix::zeros(n, n);
    for x in g.vertices() {
        let w = T::one() / T::from_usize_exact(g.degree(x));
        for &e in g.out_edges(x) {
            m.set(x.0, g.tau(e).0, w.clone());
        }
    }
    m
}

/// `chi(z)(x) = (z + q_x z^{-1}) / (q_x + 1)`.
pub fn chi<T: Scalar>(z: &T, qx: usize) -> Result<T, SpectralError> {
    if z.is_zero() {
        return Err(SpectralError::ZeroParameter);
    }
    let q = T::from_usize_exact(qx);
    Ok((z.clone() + q / z.clone()) / T::from_usize_exact(qx + 1))
}

/// Exact basis of the `z`-eigenspace of the edge Laplacian (`z = 0` allowed).
pub fn edge_eigenspace<T: Scalar>(g: &Graph, z: &T) -> Vec<Vec<T>> {
    let n = g.num_dir_edges();
    let shifted = edge_laplacian::<T>(g)
        .matrix
        .sub(&Matrix::identity(n).scale(z))
        .expect("square");
    shifted.nullspace()
}

/// Exact basis of the transfer-side eigenspace `ker(A^T - z)`.
pub fn transfer_eigenspace<T: Scalar>(g: &Graph, z: &T) -> Vec<Vec<T>> {
    let n = g.num_dir_edges();
    let shifted = transfer_matrix::<T>(g)
        .matrix
        .sub(&Matrix::identity(n).scale(z))
        .expect("square");
    shifted.nullspace()
}

/// Exact basis of the equalizer `{phi : Delta phi = chi(z) phi}`.
pub fn vertex_equalizer_space<T: Scalar>(g: &Graph, z: &T) -> Result<Vec<Vec<T>>, SpectralError> {
    if z.is_zero() {
        return Err(SpectralError::ZeroParameter);
    }
    let mut m = vertex_laplacian::<T>(g);
    for x in g.vertices() {
        let c = chi(z, g.qx(x))?;
        m.add_to(x.0, x.0, T::zero() - c);
    }
    Ok(m.nullspace())
}

/// Sums an edge function over the edges leaving each vertex.
pub fn vertex_sum<T: Scalar>(g: &Graph, f: &[T]) -> Vec<T> {
    assert_eq!(f.len(), g.num_dir_edges());
    let mut out = vec![T::zero(); g.num_vertices()];
    for e in g.dir_edges() {
        let x = g.iota(e).0;
        out[x] = out[x].clone() + f[e.0].clone();
    }
    out
}

/// Lifts a vertex equalizer function to an edge eigenfunction via
/// `f(e) = (z phi(tau e) - phi(iota e)) / (z^2 - 1)`.
pub fn vertex_to_edge<T: Scalar>(g: &Graph, phi: &[T], z: &T) -> Result<Vec<T>, SpectralError> {
    let z2 = z.clone() * z.clone();
    if z2.is_zero() || z2 == T::one() {
        return Err(SpectralError::ExceptionalParameter);
    }
    assert_eq!(phi.len(), g.num_vertices());
    let denom = z2 - T::one();
    Ok(g.dir_edges()
        .map(|e| (z.clone() * phi[g.tau(e).0].clone() - phi[g.iota(e).0].clone()) / denom.clone())
        .collect())
}

fn assert_eigenvector<T: Scalar>(g: &Graph, f: &[T], z: &T) {
    let image = edge_laplacian::<T>(g).matrix.matvec(f).expect("square");
    for (a, b) in image.iter().zip(f.iter()) {
        assert!(
            *a == z.clone() * b.clone(),
            "constructed vector is not an exact eigenvector"
        );
    }
}

/// Explicit eigenbasis at `z = 1` or `z = -1` from a BFS spanning tree.
///
/// Free variables sit on the non-tree edges (input order); tree-edge values
/// are back-solved from the vertex-sum relations, deepest terminal first, so
/// the constraint matrix is in row echelon form. For the one remaining
/// relation at the root: it is implied for `z = 1` and for `z = -1` on
/// 2-colorable graphs, and cuts the free space down by one otherwise.
/// A graph with cyclomatic number one is a single cycle once pruned; there
/// the basis is written down directly on the two directed cycles.
pub fn spanning_tree_basis<T: Scalar>(
    g: &Graph,
    z: ExceptionalZ,
) -> Result<Vec<Vec<T>>, SpectralError> {
    if g.has_dead_ends() {
        return Err(SpectralError::NotPruned);
    }
    let zv: T = z.value();
    if g.cyclomatic_number() == 1 {
        let mut basis = cycle_basis(g, z);
        for v in &mut basis {
            normalize_leading(v);
            assert_eigenvector(g, v, &zv);
        }
        return Ok(basis);
    }

    let st = g.spanning_tree(VertexId(0));
    let c = g.cyclomatic_number();
    let und = g.num_und_edges();
    // Chosen orientation per undirected edge, and its free/tree role.
    let mut orientation: Vec<DirEdgeId> = (0..und).map(|k| DirEdgeId(2 * k)).collect();
    let mut tree_edge_of_vertex: Vec<Option<DirEdgeId>> = vec![None; g.num_vertices()];
    for &e in &st.tree_dir_edges {
        orientation[e.0 / 2] = e;
        tree_edge_of_vertex[g.tau(e).0] = Some(e);
    }
    // Opposite-direction sign: f(opp of chosen) = s * f(chosen).
    let s: T = match z {
        ExceptionalZ::One => T::zero() - T::one(),
        ExceptionalZ::MinusOne => T::one(),
    };

    // Each undirected edge value as a linear combination of the free vars.
    let mut combos: Vec<Option<Vec<T>>> = vec![None; und];
    for (j, &e) in st.non_tree_dir_edges.iter().enumerate() {
        let mut unit = vec![T::zero(); c];
        unit[j] = T::one();
        combos[e.0 / 2] = Some(unit);
    }
    let mut order: Vec<VertexId> = g.vertices().filter(|v| *v != st.root).collect();
    order.sort_by_key(|v| std::cmp::Reverse(st.depths[v.0]));
    for x in order {
        let e_x = tree_edge_of_vertex[x.0].expect("non-root vertex has a tree edge");
        let mut acc = vec![T::zero(); c];
        for &out in g.out_edges(x) {
            if out == g.opp(e_x) {
                continue;
            }
            let k = out.0 / 2;
            let combo = combos[k].as_ref().expect("deeper edges already solved");
            let sign = if orientation[k] == out {
                T::one()
            } else {
                s.clone()
            };
            for (a, b) in acc.iter_mut().zip(combo.iter()) {
                *a = a.clone() + sign.clone() * b.clone();
            }
        }
        // Vertex-sum relation: s * v + acc = 0, so v = -s * acc (s^2 = 1).
        let neg_s = T::zero() - s.clone();
        combos[e_x.0 / 2] = Some(acc.into_iter().map(|a| neg_s.clone() * a).collect());
    }

    // Remaining relation at the root, as a functional on the free variables.
    let mut root_rel = vec![T::zero(); c];
    for &out in g.out_edges(st.root) {
        let k = out.0 / 2;
        let combo = combos[k].as_ref().unwrap();
        let sign = if orientation[k] == out {
            T::one()
        } else {
            s.clone()
        };
        for (a, b) in root_rel.iter_mut().zip(combo.iter()) {
            *a = a.clone() + sign.clone() * b.clone();
        }
    }
    let bipartite = g.is_bipartite().is_some();
    let assignments: Vec<Vec<T>> = if root_rel.iter().all(|x| x.is_zero()) {
        assert!(
            z == ExceptionalZ::One || bipartite,
            "root relation should only vanish when implied"
        );
        (0..c)
            .map(|j| {
                let mut u = vec![T::zero(); c];
                u[j] = T::one();
                u
            })
            .collect()
    } else {
        assert!(
            z == ExceptionalZ::MinusOne && !bipartite,
            "unexpected independent root relation"
        );
        let pivot = root_rel.iter().position(|x| !x.is_zero()).unwrap();
        let pv = root_rel[pivot].clone();
        (0..c)
            .filter(|&j| j != pivot)
            .map(|j| {
                let mut u = vec![T::zero(); c];
                u[j] = T::one();
                u[pivot] = T::zero() - root_rel[j].clone() / pv.clone();
                u
            })
            .collect()
    };

    let mut basis = Vec::with_capacity(assignments.len());
    for a in assignments {
        let mut f = vec![T::zero(); g.num_dir_edges()];
        for k in 0..und {
            let combo = combos[k].as_ref().unwrap();
            let mut val = T::zero();
            for (cv, av) in combo.iter().zip(a.iter()) {
                val = val + cv.clone() * av.clone();
            }
            let chosen = orientation[k];
            f[chosen.0] = val.clone();
            f[g.opp(chosen).0] = s.clone() * val;
        }
        normalize_leading(&mut f);
        assert_eigenvector(g, &f, &zv);
        basis.push(f);
    }
    Ok(basis)
}

/// Basis on a single cycle: indicators of the two directed cycles at `z = 1`,
/// their alternating versions at `z = -1` on even cycles, nothing on odd.
fn cycle_basis<T: Scalar>(g: &Graph, z: ExceptionalZ) -> Vec<Vec<T>> {
    let mut forward = vec![DirEdgeId(0)];
    loop {
        let last = *forward.last().unwrap();
        let next = g
            .continuations(last)
            .next()
            .expect("cycle edges continue uniquely");
        if next == forward[0] {
            break;
        }
        forward.push(next);
    }
    let n = forward.len();
    let dir_edges = g.num_dir_edges();
    let odd = n % 2 == 1;
    let mut out = Vec::new();
    match z {
        ExceptionalZ::One => {
            let mut f = vec![T::zero(); dir_edges];
            let mut b = vec![T::zero(); dir_edges];
            for &e in &forward {
                f[e.0] = T::one();
                b[g.opp(e).0] = T::one();
            }
            out.push(f);
            out.push(b);
        }
        ExceptionalZ::MinusOne => {
            if odd {
                return out;
            }
            let mut f = vec![T::zero(); dir_edges];
            let mut b = vec![T::zero(); dir_edges];
            for (i, &e) in forward.iter().enumerate() {
                let sign = if i % 2 == 0 {
                    T::one()
                } else {
                    T::zero() - T::one()
                };
                f[e.0] = sign.clone();
                b[g.opp(e).0] = sign;
            }
            out.push(f);
            out.push(b);
        }
    }
    out
}

/// Dimension of the span of vertex sums over the `z`-eigenspace.
pub fn poisson_image_dim<T: Scalar>(g: &Graph, z: ExceptionalZ) -> Result<usize, SpectralError> {
    if g.has_dead_ends() {
        return Err(SpectralError::NotPruned);
    }
    let basis = edge_eigenspace::<T>(g, &z.value());
    let sums: Vec<Vec<T>> = basis.iter().map(|f| vertex_sum(g, f)).collect();
    Ok(span_rank(&sums))
}

/// Predicted eigenspace dimension at `z = 1` from the cyclomatic number.
pub fn predicted_dim_z1(c: usize) -> usize {
    if c == 1 {
        2
    } else {
        c
    }
}

/// Predicted eigenspace dimension at `z = -1`.
pub fn predicted_dim_zminus1(c: usize, bipartite: bool) -> usize {
    match (c, bipartite) {
        (1, true) => 2,
        (1, false) => 0,
        (_, true) => c,
        (_, false) => c - 1,
    }
}

/// Predicted dimension of the image of the vertex transform at `z = 1`.
pub fn predicted_image_dim_z1(c: usize) -> usize {
    usize::from(c == 1)
}

/// Predicted dimension of the image of the vertex transform at `z = -1`.
pub fn predicted_image_dim_zminus1(c: usize, bipartite: bool) -> usize {
    usize::from(c == 1 && bipartite)
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub und_edges: usize,
    pub cyclomatic: usize,
    pub bipartite: bool,
    pub leaves: usize,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        GraphSummary {
            vertices: g.num_vertices(),
            und_edges: g.num_und_edges(),
            cyclomatic: g.cyclomatic_number(),
            bipartite: g.is_bipartite().is_some(),
            leaves: g.count_leaves(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub claim: String,
    pub computed: usize,
    pub predicted: usize,
    pub pass: bool,
}

fn check(claim: &str, computed: usize, predicted: usize) -> TheoremCheck {
    TheoremCheck {
        claim: claim.to_string(),
        computed,
        predicted,
        pass: computed == predicted,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub summary: GraphSummary,
    pub checks: Vec<TheoremCheck>,
    pub all_pass: bool,
}

/// Runs every topology-vs-spectrum comparison on one graph.
///
/// Checks at `z != 0` run on the pruned graph (dropping to the full graph
/// only when pruning empties it, where all dimensions are provably zero);
/// the `z = 0` leaf count runs on the graph as given.
pub fn verify_topology_theorems(g: &Graph) -> SpectralReport {
    let summary = GraphSummary::of(g);
    let prune = g.prune_dead_ends();
    let core = prune.pruned.as_ref().unwrap_or(g);
    let c = core.cyclomatic_number();
    let bipartite = core.is_bipartite().is_some();
    let one = Rational::from_integer(1.into());
    let minus_one = -one.clone();
    let zero = Rational::from_integer(0.into());

    let dim1 = edge_eigenspace::<Rational>(core, &one).len();
    let dim_minus1 = edge_eigenspace::<Rational>(core, &minus_one).len();
    let dim0 = edge_eigenspace::<Rational>(g, &zero).len();
    let (img1, img_minus1) = if prune.is_empty() {
        (0, 0)
    } else {
        (
            poisson_image_dim::<Rational>(core, ExceptionalZ::One).expect("pruned"),
            poisson_image_dim::<Rational>(core, ExceptionalZ::MinusOne).expect("pruned"),
        )
    };

    let checks = vec![
        check("dim_E1_edge", dim1, predicted_dim_z1(c)),
        check(
            "dim_Eminus1_edge",
            dim_minus1,
            predicted_dim_zminus1(c, bipartite),
        ),
        check("dim_E0_edge_leaves", dim0, summary.leaves),
        check("image_dim_z1", img1, predicted_image_dim_z1(c)),
        check(
            "image_dim_zminus1",
            img_minus1,
            predicted_image_dim_zminus1(c, bipartite),
        ),
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    SpectralReport {
        summary,
        checks,
        all_pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QccRow {
    pub z: String,
    pub dim_vertex: usize,
    pub dim_edge: usize,
    pub dim_transfer: usize,
    pub exceptional: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct QccReport {
    pub rows: Vec<QccRow>,
    pub all_pass: bool,
}

/// Per-parameter dimension triples
/// `(dim E_chi(z)(Delta), dim E_z(Delta^e), dim E_z(A^T))`.
///
/// All three must agree away from `z = 1, -1`; at the exceptional parameters
/// only the edge and transfer sides must agree, and the vertex side is
/// reported so the discrepancy is visible.
pub fn qcc_report(g: &Graph, zs: &[Rational]) -> Result<QccReport, SpectralError> {
    if zs.iter().any(|z| z.is_zero()) {
        return Err(SpectralError::ZeroParameter);
    }
    let prune = g.prune_dead_ends();
    let core = prune.pruned.as_ref().unwrap_or(g);
    let one = Rational::from_integer(1.into());
    let mut rows = Vec::new();
    for z in zs {
        let dim_vertex = vertex_equalizer_space::<Rational>(core, z)?.len();
        let dim_edge = edge_eigenspace::<Rational>(core, z).len();
        let dim_transfer = transfer_eigenspace::<Rational>(core, z).len();
        let exceptional = z == &one || z == &-one.clone();
        let pass = if exceptional {
            dim_edge == dim_transfer
        } else {
            dim_vertex == dim_edge && dim_edge == dim_transfer
        };
        rows.push(QccRow {
            z: format_rational(z),
            dim_vertex,
            dim_edge,
            dim_transfer,
            exceptional,
            pass,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(QccReport { rows, all_pass })
}
