//! Seeded random inputs: graphs, planted Wold families, colored families and
//! generator words.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::family::{build_exact_block, build_pi_v, direct_sum, OperatorFamily};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::linalg::{coordinate_projection, random_unitary, select_columns, zeros, CMat};
use crate::staralg::Gen;

/// Vertices `v0..`, edges `e0..`, endpoints uniform (loops and parallel edges allowed).
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_vertices: usize, max_edges: usize) -> Graph {
    let nv = rng.random_range(1..=max_vertices.max(1));
    let ne = rng.random_range(1..=max_edges.max(1));
    let names: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String, String)> = (0..ne)
        .map(|i| {
            (
                format!("e{i}"),
                names[rng.random_range(0..nv)].clone(),
                names[rng.random_range(0..nv)].clone(),
            )
        })
        .collect();
    let vs: Vec<&str> = names.iter().map(String::as_str).collect();
    let es: Vec<(&str, &str, &str)> = edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    Graph::new(&vs, &es).expect("generated ids are consistent")
}

/// Like [`random_graph`] with each edge colored `a` or `b`.
pub fn random_colored_graph<R: Rng + ?Sized>(rng: &mut R, max_vertices: usize, max_edges: usize) -> Graph {
    let g = random_graph(rng, max_vertices, max_edges);
    let (vertices, mut specs) = g.to_specs();
    for s in &mut specs {
        s.color = if rng.random_bool(0.5) { "a" } else { "b" }.to_string();
    }
    Graph::from_specs(vertices, specs).expect("recoloring keeps ids")
}

/// A single directed cycle `c0 → c1 → … → c0` of length `k`.
pub fn cycle_graph(k: usize) -> Graph {
    let names: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
    let edges: Vec<(String, String, String)> = (0..k)
        .map(|i| (format!("f{i}"), names[i].clone(), names[(i + 1) % k].clone()))
        .collect();
    let vs: Vec<&str> = names.iter().map(String::as_str).collect();
    let es: Vec<(&str, &str, &str)> = edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    Graph::new(&vs, &es).expect("cycle ids are consistent")
}

/// Nonempty vertex sets accepted by `build_exact_block`, by brute force over subsets.
pub fn exact_supports(g: &Graph) -> Vec<Vec<VertexId>> {
    let n = g.vertex_count();
    if n > 16 {
        return Vec::new();
    }
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(VertexId).collect::<Vec<_>>())
        .filter(|s| crate::family::is_exact_support(g, s))
        .collect()
}

/// Number of paths of length at most `n` starting at `v`, saturating.
pub fn paths_from(g: &Graph, v: VertexId, n: usize) -> usize {
    let mut layer = vec![0usize; g.vertex_count()];
    layer[v.0] = 1;
    let mut total = 1usize;
    for _ in 0..n {
        let mut next = vec![0usize; g.vertex_count()];
        for e in g.edge_ids() {
            next[g.rng(e).0] = next[g.rng(e).0].saturating_add(layer[g.src(e).0]);
        }
        total = next.iter().fold(total, |acc, &x| acc.saturating_add(x));
        layer = next;
    }
    total
}

/// `U (⊕_v π_v^{(α_v)} ⊕ E) U*` with the planted data kept for comparison.
#[derive(Clone, Debug)]
pub struct Planted {
    pub family: OperatorFamily,
    /// `α_v` for every received vertex, ascending.
    pub alphas: Vec<(VertexId, usize)>,
    /// The exact full-CK summand before conjugation, if one was planted.
    pub exact: Option<OperatorFamily>,
    /// Orthonormal columns of `U` spanning the conjugated exact summand.
    pub exact_columns: CMat,
    pub unitary: CMat,
    pub depth: usize,
}

/// One planted family on `g` at depth `n`, or `TooLarge` past `max_dim`.
pub fn planted_family<R: Rng + ?Sized>(
    rng: &mut R,
    g: &Graph,
    n: usize,
    max_alpha: usize,
    max_dim: usize,
) -> Result<Planted> {
    let mut summands = Vec::new();
    let mut alphas = Vec::new();
    let mut budget = 0usize;
    for v in g.receivers() {
        let a = rng.random_range(0..=max_alpha);
        alphas.push((v, a));
        budget = budget.saturating_add(a.saturating_mul(paths_from(g, v, n)));
    }
    if budget > max_dim {
        return Err(Error::TooLarge(format!("planted dimension at least {budget} exceeds {max_dim}")));
    }
    for &(v, a) in &alphas {
        if a > 0 {
            let pv = build_pi_v(g, v, n)?;
            summands.extend(std::iter::repeat_n(pv, a));
        }
    }
    let supports = exact_supports(g);
    let exact = match supports.choose(rng) {
        Some(s) if rng.random_bool(0.7) => {
            let m = rng.random_range(1..=2);
            Some(build_exact_block(g, s, m, Some(&mut *rng))?)
        }
        _ => None,
    };
    let planted_dim: usize = summands.iter().map(OperatorFamily::dim).sum();
    let exact_dim = exact.as_ref().map_or(0, OperatorFamily::dim);
    let total = planted_dim + exact_dim;
    if total == 0 {
        return Err(Error::Empty("nothing planted".into()));
    }
    if total > max_dim {
        return Err(Error::TooLarge(format!("planted dimension {total} exceeds {max_dim}")));
    }
    if let Some(e) = &exact {
        summands.push(e.clone());
    }
    let refs: Vec<&OperatorFamily> = summands.iter().collect();
    let sum = direct_sum(&refs)?.without_labels();
    let u = random_unitary(total, rng);
    let family = sum.conjugate(&u)?;
    let exact_columns = select_columns(&u, &(planted_dim..total).collect::<Vec<_>>());
    Ok(Planted {
        family,
        alphas,
        exact,
        exact_columns,
        unitary: u,
        depth: n,
    })
}

/// Samples graphs until a planted family fits under `max_dim`.
pub fn random_planted<R: Rng + ?Sized>(
    rng: &mut R,
    max_vertices: usize,
    max_edges: usize,
    n: usize,
    max_alpha: usize,
    max_dim: usize,
) -> Planted {
    loop {
        let g = random_graph(rng, max_vertices, max_edges);
        if let Ok(p) = planted_family(rng, &g, n, max_alpha, max_dim) {
            return p;
        }
    }
}

/// Colored family with shared coordinate projections: `P_v` has rank `d_v`,
/// every vertex receives at most one edge per color, and `S_e` is a random
/// isometry of the `s(e)` block into the `r(e)` block. Ranks are raised along
/// edges until `d_{s(e)} ≤ d_{r(e)}`, so the relations hold exactly with
/// defect `d_{r(e)} − d_{s(e)}`.
pub fn random_colored_family<R: Rng + ?Sized>(
    rng: &mut R,
    max_vertices: usize,
    max_edges: usize,
    max_rank: usize,
) -> OperatorFamily {
    let g = loop {
        let g = random_colored_graph(rng, max_vertices, max_edges);
        let ok = g.vertices().all(|v| g.colors().all(|c| g.in_edges_of_color(v, c).count() <= 1));
        if ok && g.color_count() == 2 {
            break g;
        }
    };
    let mut d: Vec<usize> = g.vertices().map(|_| rng.random_range(1..=max_rank.max(1))).collect();
    loop {
        let mut changed = false;
        for e in g.edge_ids() {
            let (s, r) = (g.src(e).0, g.rng(e).0);
            if d[r] < d[s] {
                d[r] = d[s];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let offsets: Vec<usize> = d.iter().scan(0, |acc, &x| {
        let o = *acc;
        *acc += x;
        Some(o)
    }).collect();
    let total: usize = d.iter().sum();
    let p = g
        .vertices()
        .map(|v| coordinate_projection(total, offsets[v.0]..offsets[v.0] + d[v.0]))
        .collect();
    let s = g
        .edge_ids()
        .map(|e| {
            let (sv, rv) = (g.src(e).0, g.rng(e).0);
            let u = random_unitary(d[rv], rng);
            let iso = select_columns(&u, &(0..d[sv]).collect::<Vec<_>>());
            let mut m = zeros(total, total);
            m.view_mut((offsets[rv], offsets[sv]), (d[rv], d[sv])).copy_from(&iso);
            m
        })
        .collect();
    let interior = crate::linalg::identity(total);
    OperatorFamily::new(Arc::new(g), p, s, interior).expect("shapes agree")
}

/// Two loops `a`, `b` at one vertex: color `a` is the truncated shift
/// `Fock(loop, n)` conjugated by a random unitary, color `b` a random unitary.
pub fn shift_and_unitary_family<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<OperatorFamily> {
    let g = Graph::colored(&["v"], &[("a", "v", "v", "a"), ("b", "v", "v", "b")])?;
    let shift = crate::family::build_fock(&Graph::new(&["v"], &[("a", "v", "v")])?, n)?;
    let d = shift.dim();
    let u = random_unitary(d, rng);
    let fam = OperatorFamily::new(
        Arc::new(g),
        vec![crate::linalg::identity(d)],
        vec![shift.s(EdgeId(0)).clone(), random_unitary(d, rng)],
        shift.interior().clone(),
    )?;
    fam.conjugate(&u)
}

/// Uniform word over `p_v`, `s_e`, `s_e*` with length in `1..=max_len`.
pub fn random_word<R: Rng + ?Sized>(rng: &mut R, g: &Graph, max_len: usize) -> Vec<Gen> {
    let len = rng.random_range(1..=max_len.max(1));
    let nv = g.vertex_count();
    let ne = g.edge_count();
    (0..len)
        .map(|_| {
            let k = rng.random_range(0..nv + 2 * ne);
            if k < nv {
                Gen::P(VertexId(k))
            } else if k < nv + ne {
                Gen::S(EdgeId(k - nv))
            } else {
                Gen::SStar(EdgeId(k - nv - ne))
            }
        })
        .collect()
}

/// Word that is nonzero on the Fock space more often: each next generator is
/// chosen among those composable with the current range.
pub fn random_composable_word<R: Rng + ?Sized>(rng: &mut R, g: &Graph, max_len: usize) -> Vec<Gen> {
    let len = rng.random_range(1..=max_len.max(1));
    let mut v = VertexId(rng.random_range(0..g.vertex_count()));
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let mut options = vec![Gen::P(v)];
        options.extend(g.out_edges(v).iter().map(|&e| Gen::S(e)));
        options.extend(g.in_edges(v).iter().map(|&e| Gen::SStar(e)));
        let x = *options.choose(rng).expect("p(v) is always available");
        v = match x {
            Gen::P(w) => w,
            Gen::S(e) => g.rng(e),
            Gen::SStar(e) => g.src(e),
        };
        out.push(x);
    }
    // the word is written right to left: the last chosen letter acts last
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{check_relations, check_tck, Classification};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_deterministic() {
        let a = random_graph(&mut ChaCha8Rng::seed_from_u64(5), 6, 10);
        let b = random_graph(&mut ChaCha8Rng::seed_from_u64(5), 6, 10);
        assert_eq!(a, b);
    }

    #[test]
    fn planted_families_are_tck() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let p = random_planted(&mut rng, 4, 6, 3, 2, 120);
            assert_ne!(check_tck(&p.family).classification, Classification::Invalid);
        }
    }

    #[test]
    fn colored_families_satisfy_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let f = random_colored_family(&mut rng, 4, 6, 3);
            let r = check_relations(&f);
            assert_ne!(r.classification, Classification::Invalid, "{r:?}");
        }
    }

    #[test]
    fn exact_supports_of_a_cycle() {
        let g = cycle_graph(3);
        assert_eq!(exact_supports(&g), vec![vec![VertexId(0), VertexId(1), VertexId(2)]]);
    }

    #[test]
    fn composable_words_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(&mut rng, 4, 6);
        for _ in 0..20 {
            let w = random_composable_word(&mut rng, &g, 6);
            let fock = crate::family::build_fock(&g, 8).unwrap();
            let _ = crate::staralg::evaluate_word(&w, &fock).unwrap();
        }
    }
}
