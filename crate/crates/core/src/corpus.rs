//! Deterministic graph generators for the CLI and the verification corpus.

use crate::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("bad generator parameters: {0}")]
    BadParams(String),
}

fn v(i: usize) -> String {
    format!("v{i}")
}

fn build(pairs: Vec<(String, String)>) -> Graph {
    Graph::build(&pairs).expect("generator produced an invalid graph")
}

/// Cycle C_n, n >= 3.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs n >= 3");
    build((0..n).map(|i| (v(i), v((i + 1) % n))).collect())
}

/// Path P_n on n vertices, n >= 2.
pub fn path(n: usize) -> Graph {
    assert!(n >= 2, "path needs n >= 2");
    build((0..n - 1).map(|i| (v(i), v(i + 1))).collect())
}

/// Complete graph K_n, n >= 3.
pub fn complete(n: usize) -> Graph {
    assert!(n >= 3, "complete needs n >= 3");
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((v(i), v(j)));
        }
    }
    build(pairs)
}

/// Complete bipartite K_{m,n}.
pub fn complete_bipartite(m: usize, n: usize) -> Graph {
    assert!(m >= 1 && n >= 1 && m + n >= 3, "bad bipartite sizes");
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in 0..n {
            pairs.push((format!("a{i}"), format!("b{j}")));
        }
    }
    build(pairs)
}

/// Star K_{1,k}: one center, k leaves.
pub fn star(k: usize) -> Graph {
    assert!(k >= 2, "star needs k >= 2");
    build((0..k).map(|i| ("c".to_string(), format!("l{i}"))).collect())
}

/// The Petersen graph: outer 5-cycle, inner pentagram, five spokes.
pub fn petersen() -> Graph {
    let mut pairs = Vec::new();
    for i in 0..5 {
        pairs.push((format!("o{i}"), format!("o{}", (i + 1) % 5)));
    }
    for i in 0..5 {
        pairs.push((format!("i{i}"), format!("i{}", (i + 2) % 5)));
    }
    for i in 0..5 {
        pairs.push((format!("o{i}"), format!("i{i}")));
    }
    build(pairs)
}

/// Two degree-3 vertices joined by three internally disjoint length-2 paths.
pub fn theta_subdivided() -> Graph {
    build(vec![
        ("u".into(), "m0".into()),
        ("m0".into(), "w".into()),
        ("u".into(), "m1".into()),
        ("m1".into(), "w".into()),
        ("u".into(), "m2".into()),
        ("m2".into(), "w".into()),
    ])
}

/// Two triangles joined by a length-2 path through a middle vertex.
pub fn dumbbell() -> Graph {
    build(vec![
        ("a0".into(), "a1".into()),
        ("a1".into(), "a2".into()),
        ("a2".into(), "a0".into()),
        ("b0".into(), "b1".into()),
        ("b1".into(), "b2".into()),
        ("b2".into(), "b0".into()),
        ("a0".into(), "m".into()),
        ("m".into(), "b0".into()),
    ])
}

/// Cycle C_n with one pendant vertex attached to its first vertex.
pub fn cycle_with_pendant(n: usize) -> Graph {
    let mut pairs: Vec<(String, String)> = (0..n).map(|i| (v(i), v((i + 1) % n))).collect();
    pairs.push((v(0), "p".to_string()));
    build(pairs)
}

/// Seeded random connected simple graph on `n` vertices and `m` undirected
/// edges. Candidates with loops or multi-edges cannot arise (edges are drawn
/// from distinct unordered pairs); disconnected draws are rejected and the
/// generator retries deterministically from the same RNG stream.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Result<Graph, GenError> {
    if n < 2 {
        return Err(GenError::BadParams("random graph needs n >= 2".into()));
    }
    let max_edges = n * (n - 1) / 2;
    if m < n - 1 || m > max_edges {
        return Err(GenError::BadParams(format!(
            "edge count {m} outside [{}, {max_edges}] for n = {n}",
            n - 1
        )));
    }
    let mut all_pairs = Vec::with_capacity(max_edges);
    for i in 0..n {
        for j in (i + 1)..n {
            all_pairs.push((i, j));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        // Partial Fisher-Yates: the first m entries are a uniform m-subset.
        let mut pairs = all_pairs.clone();
        for i in 0..m {
            let j = rng.gen_range(i..pairs.len());
            pairs.swap(i, j);
        }
        let chosen: Vec<(String, String)> = pairs[..m].iter().map(|&(i, j)| (v(i), v(j))).collect();
        if let Ok(g) = Graph::build(&chosen) {
            return Ok(g);
        }
    }
    Err(GenError::BadParams(
        "could not draw a connected graph; raise m".into(),
    ))
}

/// Seeded random graph whose dead ends have been peeled away. Draws until the
/// pruned core is nonempty, advancing deterministically from `seed`.
pub fn random_pruned_graph(n: usize, m: usize, seed: u64) -> Result<Graph, GenError> {
    for attempt in 0..100 {
        let g = random_graph(n, m, seed.wrapping_add(attempt * 0x9e37_79b9))?;
        if let Some(core) = g.prune_dead_ends().pruned {
            return Ok(core);
        }
    }
    Err(GenError::BadParams(
        "pruned core kept coming up empty; raise m".into(),
    ))
}

/// The graphs every topology theorem is checked on.
pub fn theorem_corpus() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = Vec::new();
    for n in 3..=8 {
        out.push((format!("C{n}"), cycle(n)));
    }
    out.push(("K4".into(), complete(4)));
    out.push(("K5".into(), complete(5)));
    out.push(("K33".into(), complete_bipartite(3, 3)));
    out.push(("petersen".into(), petersen()));
    out.push(("theta".into(), theta_subdivided()));
    out.push(("dumbbell".into(), dumbbell()));
    for seed in 1..=10u64 {
        let g = random_pruned_graph(8, 12, seed).expect("seeded corpus graph");
        out.push((format!("random-8-12-s{seed}"), g));
    }
    out
}
