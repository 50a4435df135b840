//! Wold decomposition: splits a TCK family into copies of `π_v` generated by
//! wandering vectors, plus a full-CK complement.

use std::collections::BTreeSet;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::{build_pi_v, compress, direct_sum, reducing_defect, OperatorFamily};
use crate::graph::{Graph, Path, VertexId};
use crate::linalg::{
    adjoint, block_diag, extend_orthonormal, hermitian_eigh, identity, op_norm,
    orthogonal_complement, orthonormality_defect, vectors_to_matrix, zeros, CMat,
};
use crate::verify::{check_tck, defect_matrix, defect_range, defect_threshold, Classification};

/// Generated vectors below this norm count as annihilated by the boundary.
const VANISH: f64 = 0.5;

/// One summand `H_{v,i}`: the vectors `T_λ ζ_v^{(i)}` for the reachable `λ`.
#[derive(Clone, Debug)]
pub struct WoldBlock {
    pub vertex: VertexId,
    pub copy: usize,
    pub wanderer: DVector<Complex64>,
    /// Labels in path-basis order; column `j` of `vectors` is `T_{paths[j]} ζ`.
    pub paths: Vec<Path>,
    pub vectors: CMat,
    /// `max ‖A V − V π_v(A)‖` against `π_v` at the block's depth, when the
    /// labels form a complete truncated `s⁻¹(v)`.
    pub intertwining_defect: Option<f64>,
}

impl WoldBlock {
    pub fn subspace(&self) -> &CMat {
        &self.vectors
    }

    /// `U_{v,i} : T_λ ζ ↦ ξ_λ`, as a `k × D` matrix.
    pub fn intertwiner(&self) -> CMat {
        adjoint(&self.vectors)
    }

    pub fn depth(&self) -> usize {
        self.paths.iter().map(Path::len).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WoldDiagnostics {
    /// `max |⟨T_λζ, T_μζ'⟩ − δ|` over all generated vectors.
    pub orthogonality: f64,
    /// `max ‖(I − Π_H) S_e* Π_H‖` over blocks.
    pub coinvariance: f64,
    /// `max ‖(I − Π_H) A Π_H‖` over blocks and all generators.
    pub reducing: f64,
    pub intertwining: f64,
    /// Largest norm of a generated vector discarded as annihilated.
    pub leakage: f64,
    /// Largest interior defect left in the complement family.
    pub complement_defect: f64,
}

#[derive(Clone, Debug)]
pub struct WoldDecomposition {
    /// `α_v` for every received vertex, ascending by vertex.
    pub multiplicities: Vec<(VertexId, usize)>,
    pub blocks: Vec<WoldBlock>,
    /// Orthonormal columns spanning `K = (⊕ H_{v,i})⊥`.
    pub complement: CMat,
    pub complement_family: OperatorFamily,
    pub diagnostics: WoldDiagnostics,
    pub dimension: usize,
}

impl WoldDecomposition {
    pub fn multiplicity(&self, v: VertexId) -> usize {
        self.multiplicities
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, a)| *a)
            .unwrap_or(0)
    }

    pub fn blocks_at(&self, v: VertexId) -> impl Iterator<Item = &WoldBlock> {
        self.blocks.iter().filter(move |b| b.vertex == v)
    }
}

fn require_single_color(fam: &OperatorFamily) -> Result<()> {
    if fam.graph().color_count() > 1 {
        return Err(Error::Invalid(
            "Wold decomposition needs a single-colored family; take a color view first".into(),
        ));
    }
    Ok(())
}

fn require_tck(fam: &OperatorFamily) -> Result<()> {
    let report = check_tck(fam);
    if report.classification == Classification::Invalid {
        return Err(Error::NotTck(format!(
            "isometry residual {:.3e}, TCK slack {:.3e}, projection residual {:.3e}",
            report.max_isometry_residual(),
            report.min_tck_slack(),
            report.projection_residual
        )));
    }
    Ok(())
}

/// Orthonormal wandering vectors at `v`: eigenvectors of the interior defect
/// with eigenvalue 1. Eigenvalues strictly between the rank threshold and 1
/// are rejected.
pub fn wandering_vectors(fam: &OperatorFamily, v: VertexId) -> Result<Vec<DVector<Complex64>>> {
    let dm = defect_matrix(fam, None, v);
    let (vals, vecs) = hermitian_eigh(&dm);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let thr = defect_threshold(fam, top);
    let one_tol = fam.tol().sqrt().max(1e-6);
    let mut out = Vec::new();
    for (i, &x) in vals.iter().enumerate() {
        if (x - 1.0).abs() <= one_tol {
            out.push(vecs.column(i).into_owned());
        } else if x > thr {
            return Err(Error::AmbiguousRank {
                vertex: fam.graph().vertex_name(v).to_string(),
                eigenvalue: x,
            });
        }
    }
    Ok(out)
}

/// `T_λ ζ` for every path `λ` from `v` until the family annihilates it.
/// Returns labels, vectors and the largest discarded norm.
fn generate(
    fam: &OperatorFamily,
    v: VertexId,
    zeta: &DVector<Complex64>,
) -> Result<(Vec<Path>, Vec<DVector<Complex64>>, f64)> {
    let g = fam.graph();
    let mut items: Vec<(Path, DVector<Complex64>)> = vec![(Path::vertex(v), zeta.clone())];
    let mut frontier = 0;
    let mut leakage: f64 = 0.0;
    while frontier < items.len() {
        let (lambda, x) = items[frontier].clone();
        frontier += 1;
        for &e in g.out_edges(lambda.range()) {
            let y = fam.s(e) * &x;
            let n = y.norm();
            if n < VANISH {
                leakage = leakage.max(n);
                continue;
            }
            items.push((lambda.prepend(g, e).expect("out edge chains"), y));
            if items.len() > fam.dim() {
                return Err(Error::InconsistentDecomposition(format!(
                    "more generated vectors than the dimension {} at `{}`",
                    fam.dim(),
                    g.vertex_name(v)
                )));
            }
        }
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let (paths, vecs) = items.into_iter().unzip();
    Ok((paths, vecs, leakage))
}

fn is_full_truncation(g: &Graph, v: VertexId, paths: &[Path]) -> Option<usize> {
    let depth = paths.iter().map(Path::len).max().unwrap_or(0);
    let want = crate::graph::enumerate_paths_from(g, v, depth).ok()?;
    (want.paths() == paths).then_some(depth)
}

/// Largest `‖(A W − W B) Π_B‖` over `P_v`, `S_e`, `S_e*`: how far the
/// isometry `W` is from intertwining family `b` into family `a`.
pub fn intertwining_defect(a: &OperatorFamily, b: &OperatorFamily, w: &CMat) -> Result<f64> {
    if *a.graph() != *b.graph() {
        return Err(Error::GraphMismatch);
    }
    if w.nrows() != a.dim() || w.ncols() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "intertwiner".into(),
            expected: a.dim(),
            found: w.nrows(),
        });
    }
    let pi = b.interior();
    let worst = a
        .generators()
        .into_iter()
        .zip(b.generators())
        .map(|((_, x), (_, y))| op_norm(&((x * w - w * y) * pi)))
        .fold(0.0, f64::max);
    Ok(worst)
}

pub fn wold_decompose(fam: &OperatorFamily) -> Result<WoldDecomposition> {
    require_single_color(fam)?;
    require_tck(fam)?;
    let g = fam.graph();
    let d = fam.dim();
    let mut multiplicities = Vec::new();
    let mut blocks = Vec::new();
    let mut diag = WoldDiagnostics::default();
    for v in g.receivers() {
        let zetas = wandering_vectors(fam, v)?;
        multiplicities.push((v, zetas.len()));
        for (copy, zeta) in zetas.into_iter().enumerate() {
            let (paths, vecs, leak) = generate(fam, v, &zeta)?;
            diag.leakage = diag.leakage.max(leak);
            let vectors = vectors_to_matrix(d, &vecs);
            let intertwining_defect = match is_full_truncation(g, v, &paths) {
                Some(depth) if depth >= 1 => {
                    let pv = build_pi_v(g, v, depth)?;
                    Some(intertwining_defect(fam, &pv, &vectors)?)
                }
                _ => None,
            };
            if let Some(x) = intertwining_defect {
                diag.intertwining = diag.intertwining.max(x);
            }
            blocks.push(WoldBlock {
                vertex: v,
                copy,
                wanderer: zeta,
                paths,
                vectors,
                intertwining_defect,
            });
        }
    }
    let all: Vec<&CMat> = blocks.iter().map(|b| &b.vectors).collect();
    let generated = if all.is_empty() {
        zeros(d, 0)
    } else {
        crate::linalg::hstack(d, &all)
    };
    diag.orthogonality = orthonormality_defect(&generated);
    for b in &blocks {
        let ph = &b.vectors * adjoint(&b.vectors);
        let comp = identity(d) - &ph;
        for e in g.edge_ids() {
            diag.coinvariance = diag
                .coinvariance
                .max(op_norm(&(&comp * adjoint(fam.s(e)) * &b.vectors)));
        }
        diag.reducing = diag.reducing.max(reducing_defect(fam, &b.vectors).1);
    }
    let complement = orthogonal_complement(d, &generated);
    let complement_family = compress(fam, &complement);
    diag.complement_defect = crate::verify::check_full_ck(&complement_family).max_defect();
    Ok(WoldDecomposition {
        multiplicities,
        blocks,
        complement,
        complement_family,
        diagnostics: diag,
        dimension: d,
    })
}

/// Result of [`reconstruct`]: the model family and the isometry from it onto
/// the decomposed space.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub family: OperatorFamily,
    pub isometry: CMat,
}

/// `⊕_v π_v(N)^{(α_v)} ⊕ (complement)`, with the isometry that maps each
/// `ξ_λ` of the `i`-th copy of `π_v` to `T_λ ζ_v^{(i)}` and the complement
/// identically onto `K`.
pub fn reconstruct(w: &WoldDecomposition, g: &Graph, n: usize) -> Result<Reconstruction> {
    if n < 1 {
        return Err(Error::InvalidDepth("depth must be at least 1".into()));
    }
    if *w.complement_family.graph() != *g {
        return Err(Error::GraphMismatch);
    }
    let mut summands = Vec::new();
    let mut columns: Vec<&CMat> = Vec::new();
    for &(v, alpha) in &w.multiplicities {
        let found = w.blocks_at(v).count();
        if found != alpha {
            return Err(Error::InconsistentDecomposition(format!(
                "multiplicity {alpha} at `{}` but {found} wandering vectors",
                g.vertex_name(v)
            )));
        }
        if alpha == 0 {
            continue;
        }
        let pv = build_pi_v(g, v, n)?;
        let want = crate::graph::enumerate_paths_from(g, v, n)?;
        for b in w.blocks_at(v) {
            if b.paths.as_slice() != want.paths() {
                return Err(Error::InconsistentDecomposition(format!(
                    "block at `{}` has depth {} but reconstruction asked for depth {n}",
                    g.vertex_name(v),
                    b.depth()
                )));
            }
            columns.push(&b.vectors);
            summands.push(pv.clone());
        }
    }
    let total: usize = summands.iter().map(OperatorFamily::dim).sum::<usize>() + w.complement.ncols();
    if total != w.dimension {
        return Err(Error::InconsistentDecomposition(format!(
            "summands have total dimension {total}, decomposed space has {}",
            w.dimension
        )));
    }
    summands.push(w.complement_family.clone());
    columns.push(&w.complement);
    let refs: Vec<&OperatorFamily> = summands.iter().collect();
    let family = direct_sum(&refs)?;
    let isometry = crate::linalg::hstack(w.dimension, &columns);
    Ok(Reconstruction { family, isometry })
}

/// The complement subspace of the Wold decomposition and the family on it.
pub fn full_ck_part(fam: &OperatorFamily) -> Result<(CMat, OperatorFamily)> {
    let w = wold_decompose(fam)?;
    Ok((w.complement, w.complement_family))
}

/// Largest common reducing subspace on which every color is full CK.
#[derive(Clone, Debug)]
pub struct MaxFullCk {
    pub subspace: CMat,
    pub family: OperatorFamily,
    pub iterations: usize,
    /// `max ‖(I − QQ*) A Q‖` over all generators of all colors.
    pub reducing_defect: f64,
}

/// Removes the smallest reducing subspace containing every color's interior
/// defect range and repeats on what is left until no defect remains.
pub fn max_full_ck_subspace(fam: &OperatorFamily) -> Result<MaxFullCk> {
    let g = fam.graph().clone();
    for c in g.colors() {
        let report = check_tck(&fam.color_view(c));
        if report.classification == Classification::Invalid {
            return Err(Error::NotTck(format!("color `{}`", g.color_name(c))));
        }
    }
    let d = fam.dim();
    let mut q = identity(d);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let current = compress(fam, &q);
        let k = current.dim();
        let mut hull: Vec<DVector<Complex64>> = Vec::new();
        let seed_tol = 0.5;
        for c in g.colors() {
            for v in g.receivers_of_color(c) {
                let range = defect_range(&current, Some(c), v);
                extend_orthonormal(&mut hull, &range, seed_tol);
            }
        }
        if hull.is_empty() {
            let reducing_defect = reducing_defect(fam, &q).1;
            return Ok(MaxFullCk {
                subspace: q,
                family: current,
                iterations,
                reducing_defect,
            });
        }
        let gens: Vec<CMat> = current.generators().into_iter().map(|(_, a)| a).collect();
        let mut next = 0;
        while next < hull.len() {
            let x = hull[next].clone();
            next += 1;
            let images: Vec<DVector<Complex64>> = gens.iter().map(|a| a * &x).collect();
            let m = vectors_to_matrix(k, &images);
            extend_orthonormal(&mut hull, &m, 1e-6);
            if hull.len() >= k {
                break;
            }
        }
        let h = vectors_to_matrix(k, &hull);
        let keep = orthogonal_complement(k, &h);
        q = &q * keep;
        if q.ncols() == 0 {
            return Ok(MaxFullCk {
                family: compress(fam, &q),
                subspace: q,
                iterations,
                reducing_defect: 0.0,
            });
        }
    }
}

/// Rank of the interior projection.
pub fn interior_rank(fam: &OperatorFamily) -> usize {
    let (vals, _) = hermitian_eigh(fam.interior());
    vals.iter().filter(|&&x| x > 0.5).count()
}

/// Vertices where the decomposition found wandering vectors.
pub fn singular_set(w: &WoldDecomposition) -> BTreeSet<VertexId> {
    w.multiplicities
        .iter()
        .filter(|(_, a)| *a > 0)
        .map(|(v, _)| *v)
        .collect()
}

/// Block-diagonal matrix of all intertwiners stacked in block order.
pub fn stacked_intertwiner(w: &WoldDecomposition) -> CMat {
    let parts: Vec<CMat> = w.blocks.iter().map(WoldBlock::intertwiner).collect();
    let refs: Vec<&CMat> = parts.iter().collect();
    block_diag(&refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_cycle_exact, build_fock, build_rho_infty};
    use crate::graph::{select_tails, EdgeId};
    use crate::linalg::{random_unitary, select_columns};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn loop_graph() -> Graph {
        Graph::new(&["v"], &[("e", "v", "v")]).unwrap()
    }

    fn two_cycle() -> Graph {
        Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "u")]).unwrap()
    }

    #[test]
    fn fock_loop_has_one_wanderer() {
        let g = loop_graph();
        let f = build_fock(&g, 4).unwrap();
        let w = wold_decompose(&f).unwrap();
        assert_eq!(w.multiplicities, vec![(VertexId(0), 1)]);
        assert_eq!(w.complement.ncols(), 0);
        // oracle: the vacuum is the only defect direction
        assert!((w.blocks[0].wanderer[0].norm() - 1.0).abs() < 1e-12);
        assert!(w.diagnostics.orthogonality < 1e-12);
        let r = reconstruct(&w, &g, 4).unwrap();
        assert!(intertwining_defect(&f, &r.family, &r.isometry).unwrap() < 1e-9);
    }

    #[test]
    fn cycle_exact_has_no_wanderers() {
        let f = build_cycle_exact(&two_cycle()).unwrap();
        let w = wold_decompose(&f).unwrap();
        assert!(w.multiplicities.iter().all(|(_, a)| *a == 0));
        assert_eq!(w.complement.ncols(), 2);
        let r = reconstruct(&w, &two_cycle(), 3).unwrap();
        assert!(intertwining_defect(&f, &r.family, &r.isometry).unwrap() < 1e-12);
    }

    #[test]
    fn pi_v_plus_cycle_recovers_cycle_block() {
        let g = loop_graph();
        let pv = build_pi_v(&g, VertexId(0), 4).unwrap();
        let cyc = build_cycle_exact(&g).unwrap();
        let sum = direct_sum(&[&pv, &cyc]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(sum.dim(), &mut rng);
        let mixed = sum.conjugate(&u).unwrap();
        let w = wold_decompose(&mixed).unwrap();
        assert_eq!(w.multiplicity(VertexId(0)), 1);
        assert_eq!(w.complement.ncols(), 1);
        let planted = select_columns(&u, &[5]);
        let x = adjoint(&w.complement) * &planted;
        assert!(intertwining_defect(&w.complement_family, &cyc, &x).unwrap() < 1e-9);
    }

    #[test]
    fn forged_multiplicity_is_rejected() {
        let g = loop_graph();
        let mut w = wold_decompose(&build_fock(&g, 4).unwrap()).unwrap();
        w.multiplicities[0].1 += 1;
        assert!(matches!(reconstruct(&w, &g, 4), Err(Error::InconsistentDecomposition(_))));
        let w = wold_decompose(&build_fock(&g, 4).unwrap()).unwrap();
        assert!(matches!(reconstruct(&w, &g, 3), Err(Error::InconsistentDecomposition(_))));
    }

    #[test]
    fn full_ck_part_of_rho_is_everything() {
        let g = two_cycle();
        let f = build_rho_infty(&g, &select_tails(&g), 3).unwrap();
        let (k, _) = full_ck_part(&f).unwrap();
        assert_eq!(k.ncols(), f.dim());
    }

    #[test]
    fn invalid_family_is_rejected() {
        let f = build_fock(&loop_graph(), 3)
            .unwrap()
            .scale_edge(EdgeId(0), Complex64::new(1.1, 0.0));
        assert!(matches!(wold_decompose(&f), Err(Error::NotTck(_))));
    }

    #[test]
    fn colored_max_subspace_drops_shift_block() {
        // two loops at one vertex: color a exact on both blocks, color b a
        // shift on the first block and a unitary on the second
        let g = Graph::colored(&["v"], &[("a", "v", "v", "a"), ("b", "v", "v", "b")]).unwrap();
        let n = 4;
        let d = n + 2;
        let mut sa = zeros(d, d);
        for i in 0..d {
            sa[(i, i)] = crate::linalg::ONE;
        }
        let mut sb = zeros(d, d);
        for i in 0..n {
            sb[(i + 1, i)] = crate::linalg::ONE;
        }
        sb[(n + 1, n + 1)] = crate::linalg::ONE;
        let interior = crate::linalg::coordinate_projection(d, (0..n).chain([n + 1]));
        let f = OperatorFamily::new(std::sync::Arc::new(g), vec![identity(d)], vec![sa, sb], interior).unwrap();
        let m = max_full_ck_subspace(&f).unwrap();
        assert_eq!(m.subspace.ncols(), 1);
        assert!((m.subspace[(n + 1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(m.reducing_defect < 1e-12);
    }
}
