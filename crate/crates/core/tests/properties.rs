//! Property tests over random exact inputs.

use edge_spectra::corpus;
use edge_spectra::linalg::Matrix;
use edge_spectra::spectral::edge_eigenspace;
use edge_spectra::Rational;
use num::Zero;
use proptest::prelude::*;

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

fn arb_matrix() -> impl Strategy<Value = Matrix<Rational>> {
    (1usize..6, 1usize..6)
        .prop_flat_map(|(r, c)| {
            (
                Just((r, c)),
                proptest::collection::vec((-6i64..=6, 1i64..=4), r * c),
            )
        })
        .prop_map(|((_r, c), entries)| {
            let rows = entries
                .chunks(c)
                .map(|row| row.iter().map(|&(p, q)| rat(p, q)).collect())
                .collect();
            Matrix::from_rows(rows)
        })
}

proptest! {
    #[test]
    fn nullspace_vectors_lie_in_the_kernel(m in arb_matrix()) {
        let ns = m.nullspace();
        prop_assert_eq!(ns.len(), m.cols() - m.rref().rank);
        for v in ns {
            let image = m.matvec(&v).unwrap();
            prop_assert!(image.iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn rank_is_transpose_invariant(m in arb_matrix()) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn rref_is_reproducible(m in arb_matrix()) {
        prop_assert_eq!(m.rref(), m.rref());
    }

    #[test]
    fn rref_is_idempotent(m in arb_matrix()) {
        let r = m.rref();
        let again = r.reduced.rref();
        prop_assert_eq!(&again.reduced, &r.reduced);
        prop_assert_eq!(again.rank, r.rank);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The concatenated-pair relation characterizes eigenfunctions: both
    /// sums around any middle vertex agree for every basis vector.
    #[test]
    fn eigenspace_pair_identity(seed in 1u64..50) {
        let g = corpus::random_pruned_graph(7, 10, seed).unwrap();
        for z in [rat(1, 1), rat(-1, 1), rat(2, 1)] {
            for f in edge_eigenspace(&g, &z) {
                for e1 in g.dir_edges() {
                    let total: Rational = g
                        .out_edges(g.tau(e1))
                        .iter()
                        .map(|&e| f[e.0].clone())
                        .sum();
                    prop_assert_eq!(
                        z.clone() * f[e1.0].clone() + f[g.opp(e1).0].clone(),
                        total.clone()
                    );
                    for e2 in g.continuations(e1) {
                        prop_assert_eq!(
                            z.clone() * f[g.opp(e2).0].clone() + f[e2.0].clone(),
                            total.clone()
                        );
                    }
                }
            }
        }
    }

    /// Any spanning tree leaves exactly the cyclomatic number of edges out.
    #[test]
    fn spanning_tree_complements_count_cycles(seed in 1u64..50) {
        let g = corpus::random_graph(8, 12, seed).unwrap();
        for root in g.vertices() {
            let t = g.spanning_tree(root);
            prop_assert_eq!(t.non_tree_dir_edges.len(), g.cyclomatic_number());
            prop_assert_eq!(t.tree_dir_edges.len(), g.num_vertices() - 1);
        }
    }
}
