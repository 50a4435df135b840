use std::sync::Arc;

use ckbench::dilate::{colored_full_ck_dilation_with, full_ck_dilation, COLORED_NODE_BUDGET};
use ckbench::family::{build_cycle_exact, build_fock, build_rho_infty, direct_sum, restrict, OperatorFamily};
use ckbench::graph::{enumerate_backward_basis, enumerate_paths, enumerate_paths_from, select_tails, ColorId, Graph};
use ckbench::io::{read_family, write_family};
use ckbench::linalg::{adjoint, hermitian_eigenvalues, identity, op_norm};
use ckbench::staralg::{fock_action_word, normal_form};
use ckbench::suite::{
    cycle_graph, random_colored_family, random_composable_word, random_graph, random_planted, random_word,
    shift_and_unitary_family,
};
use ckbench::verify::{check_relations, defect_matrix, singular_vertices, Classification};
use ckbench::wold::{max_full_ck_subspace, wold_decompose};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_graph(seed: u64) -> Graph {
    let mut r = rng(seed);
    random_graph(&mut r, 4, 6)
}

fn bits(fam: &OperatorFamily) -> Vec<u64> {
    fam.projections()
        .iter()
        .chain(fam.edge_operators())
        .chain(std::iter::once(fam.interior()))
        .flat_map(|m| m.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn paths_from_a_vertex_are_the_filtered_basis(seed in any::<u64>(), n in 0usize..4) {
        let g = small_graph(seed);
        let all = enumerate_paths(&g, n).unwrap();
        for v in g.vertices() {
            let from = enumerate_paths_from(&g, v, n).unwrap();
            let filtered: Vec<_> = all.paths().iter().filter(|p| p.source() == v).cloned().collect();
            prop_assert_eq!(from.paths(), &filtered[..]);
        }
        let again = enumerate_paths(&g, n).unwrap();
        prop_assert_eq!(all.paths(), again.paths());
    }

    #[test]
    fn composition_needs_matching_ends(seed in any::<u64>()) {
        let g = small_graph(seed);
        let basis = enumerate_paths(&g, 2).unwrap();
        for a in basis.paths() {
            for b in basis.paths() {
                match a.compose(b) {
                    Some(c) => {
                        prop_assert_eq!(a.source(), b.range());
                        prop_assert_eq!(c.len(), a.len() + b.len());
                        prop_assert_eq!(c.source(), b.source());
                        prop_assert_eq!(c.range(), a.range());
                    }
                    None => prop_assert_ne!(a.source(), b.range()),
                }
            }
        }
    }

    #[test]
    fn backward_reduction_is_idempotent(seed in any::<u64>(), n in 1usize..4) {
        let g = small_graph(seed);
        let tails = select_tails(&g);
        let b = enumerate_backward_basis(&g, &tails, n).unwrap();
        for s in b.symbols() {
            let once = b.reduce(&g, s);
            prop_assert_eq!(&once, s);
            prop_assert_eq!(b.reduce(&g, &once), once.clone());
        }
    }

    #[test]
    fn fock_is_tck_with_every_receiver_singular(seed in any::<u64>(), n in 1usize..5) {
        let g = small_graph(seed);
        let fam = build_fock(&g, n).unwrap();
        let rep = check_relations(&fam);
        prop_assert!(rep.classification >= Classification::Tck);
        prop_assert!(rep.max_isometry_residual() <= 1e-12);
        prop_assert!(rep.min_tck_slack() >= -1e-12);
        let singular: Vec<_> = singular_vertices(&fam).into_iter().map(|s| s.vertex).collect();
        let receivers: Vec<_> = g.receivers().iter().map(|v| g.vertex_name(*v).to_string()).collect();
        prop_assert_eq!(singular, receivers);
    }

    #[test]
    fn rho_has_no_singular_vertices(seed in any::<u64>(), n in 1usize..4) {
        let g = small_graph(seed);
        let fam = build_rho_infty(&g, &select_tails(&g), n).unwrap();
        prop_assert!(singular_vertices(&fam).is_empty());
        prop_assert!(check_relations(&fam).classification >= Classification::Ck);
    }

    #[test]
    fn defects_are_positive_when_tck_holds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_planted(&mut r, 3, 4, 3, 2, 60);
        let fam = &p.family;
        prop_assume!(check_relations(fam).classification != Classification::Invalid);
        for v in fam.graph().receivers() {
            let d = defect_matrix(fam, None, v);
            let low = hermitian_eigenvalues(&d).into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(low >= -1e-9, "eigenvalue {low}");
        }
    }

    #[test]
    fn direct_sum_class_is_the_minimum(k in 1usize..4, n in 1usize..4, seed in any::<u64>()) {
        let g = cycle_graph(k);
        let fock = build_fock(&g, n).unwrap();
        let exact = build_cycle_exact(&g).unwrap();
        let rho = build_rho_infty(&g, &select_tails(&g), n).unwrap();
        let pool = [fock, exact, rho];
        let mut r = rng(seed);
        let picks: Vec<&OperatorFamily> = (0..3).map(|_| &pool[rand::Rng::random_range(&mut r, 0..3)]).collect();
        let expected = picks.iter().map(|f| check_relations(f).classification).min().unwrap();
        prop_assert_eq!(check_relations(&direct_sum(&picks).unwrap()).classification, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_form_acts_like_the_word(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = Arc::new(random_graph(&mut r, 5, 8));
        let word = if seed % 2 == 0 { random_word(&mut r, &g, 8) } else { random_composable_word(&mut r, &g, 8) };
        let nf = normal_form(&g, &word).unwrap();
        for m in nf.terms().keys() {
            prop_assert_eq!(m.mu().source(), m.nu().source());
        }
        for lambda in enumerate_paths(&g, 4).unwrap().paths() {
            let direct = fock_action_word(&g, &word, lambda);
            let reduced = nf.fock_action(lambda);
            match direct {
                None => prop_assert!(reduced.values().all(|c| c.norm() <= 1e-12), "{:?}", reduced),
                Some(p) => {
                    prop_assert_eq!(reduced.len(), 1);
                    let c = reduced.get(&p).copied().unwrap_or_default();
                    prop_assert!((c - 1.0).norm() <= 1e-12);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn family_files_round_trip_bit_exactly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_planted(&mut r, 3, 4, 3, 2, 40);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.json");
        write_family(&path, &p.family, None).unwrap();
        let back = read_family(&path).unwrap();
        prop_assert_eq!(bits(&back), bits(&p.family));
        let again = dir.path().join("g.json");
        write_family(&again, &back, None).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn wold_recovers_planted_multiplicities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_planted(&mut r, 3, 4, 3, 2, 60);
        let w = wold_decompose(&p.family).unwrap();
        prop_assert_eq!(&w.multiplicities, &p.alphas);
        let exact_dim = p.exact.as_ref().map_or(0, OperatorFamily::dim);
        prop_assert_eq!(w.complement.ncols(), exact_dim);
    }

    #[test]
    fn dilation_keeps_residuals_and_is_full_ck(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let p = random_planted(&mut r, 3, 4, 3, 2, 40);
        let before = check_relations(&p.family);
        let (dil, cert) = full_ck_dilation(&p.family, n).unwrap();
        let after = check_relations(&dil);
        prop_assert_eq!(after.classification, Classification::FullCk);
        prop_assert!(after.max_isometry_residual() <= before.max_isometry_residual() + 1e-10);
        prop_assert!(cert.compression_error <= 1e-10);
        prop_assert!(cert.embedding_defect <= 1e-10);
    }

    #[test]
    fn dilating_full_ck_changes_nothing(k in 1usize..5, seed in any::<u64>()) {
        let g = cycle_graph(k);
        let mut r = rng(seed);
        let u = ckbench::linalg::random_unitary(k, &mut r);
        let fam = build_cycle_exact(&g).unwrap().conjugate(&u).unwrap();
        let (dil, cert) = full_ck_dilation(&fam, 3).unwrap();
        prop_assert_eq!(dil.dim(), fam.dim());
        let j = &cert.embedding;
        prop_assert!(op_norm(&(adjoint(j) * j - identity(k))) <= 1e-10);
        for (a, b) in fam.edge_operators().iter().zip(dil.edge_operators()) {
            prop_assert!(op_norm(&(adjoint(j) * b * j - a)) <= 1e-10);
        }
    }

    #[test]
    fn colored_certificate_does_not_depend_on_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let fam = if seed % 2 == 0 {
            random_colored_family(&mut r, 3, 4, 2)
        } else {
            shift_and_unitary_family(&mut r, 3).unwrap()
        };
        let order: Vec<ColorId> = fam.graph().colors().collect();
        let reversed: Vec<ColorId> = order.iter().rev().copied().collect();
        for o in [order, reversed] {
            let (dil, cert) = colored_full_ck_dilation_with(&fam, 3, &o, COLORED_NODE_BUDGET).unwrap();
            prop_assert!(cert.complete);
            prop_assert!(cert.compression_error <= 1e-10);
            prop_assert!(cert.max_defect <= 1e-10);
            prop_assert!(check_relations(&dil).classification >= Classification::Tck);
        }
    }

    #[test]
    fn max_full_ck_subspace_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let fam = if seed % 2 == 0 {
            random_colored_family(&mut r, 3, 4, 2)
        } else {
            shift_and_unitary_family(&mut r, 3).unwrap()
        };
        let m = max_full_ck_subspace(&fam).unwrap();
        prop_assert!(m.reducing_defect <= 1e-9);
        prop_assume!(m.subspace.ncols() > 0);
        let inner = restrict(&fam, &m.subspace).unwrap();
        let again = max_full_ck_subspace(&inner).unwrap();
        prop_assert_eq!(again.subspace.ncols(), inner.dim());
    }
}
