//! Dilations of TCK families: the one-step corner construction at a singular
//! vertex, the full-CK dilation through the Wold decomposition and backward
//! paths, and a joint dilation for colored families.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{
    build_fock, compress, direct_sum, rho_on_basis, OperatorFamily,
};
use crate::graph::{enumerate_backward_basis, select_tails, ColorId, EdgeId, Graph, Path, VertexId};
use crate::linalg::{
    adjoint, block_diag, coordinate_projection, hermitian_eigh, identity, op_norm,
    orthonormality_defect, random_unitary, select_columns, vectors_to_matrix, zeros, CMat, ONE,
};
use crate::verify::{check_full_ck, check_tck, Classification};
use crate::wold::{wandering_vectors, wold_decompose};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectEntry {
    pub color: String,
    pub vertex: String,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct DilationCertificate {
    /// Isometry from the original space into the dilated one.
    pub embedding: CMat,
    pub embedding_defect: f64,
    /// `max ‖J* E(Q,T) J − E(P,S)‖` over the checked monomials.
    pub compression_error: f64,
    pub max_degree: usize,
    pub monomials_checked: usize,
    /// Interior full-CK defect of the dilated family per color and received vertex.
    pub defects: Vec<DefectEntry>,
    pub max_defect: f64,
    pub depth: usize,
    pub tolerance: f64,
    /// Every interior defect is within tolerance.
    pub complete: bool,
}

/// Compares `J* E J` with `E` for `E = p_v` and `E = s_λ`, `1 ≤ |λ| ≤ max_degree`
/// (paths may mix colors), and records the dilated family's defects.
pub fn compression_certificate(
    original: &OperatorFamily,
    dilated: &OperatorFamily,
    embedding: &CMat,
    max_degree: usize,
) -> Result<DilationCertificate> {
    if *original.graph() != *dilated.graph() {
        return Err(Error::GraphMismatch);
    }
    if embedding.nrows() != dilated.dim() || embedding.ncols() != original.dim() {
        return Err(Error::DimensionMismatch {
            what: "embedding".into(),
            expected: dilated.dim(),
            found: embedding.nrows(),
        });
    }
    let embedding_defect = orthonormality_defect(embedding);
    if embedding_defect > 1e-10 {
        return Err(Error::NotOrthonormal(embedding_defect));
    }
    let g = original.graph();
    let ja = adjoint(embedding);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    // (path, T_λ J, S_λ) grown one edge at a time
    let mut layer: Vec<(Path, CMat, CMat)> = Vec::new();
    for v in g.vertices() {
        let tj = dilated.p(v) * embedding;
        let s = original.p(v).clone();
        worst = worst.max(op_norm(&(&ja * &tj - &s)));
        checked += 1;
        layer.push((Path::vertex(v), tj, s));
    }
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for (p, tj, s) in &layer {
            for &e in g.out_edges(p.range()) {
                let tj2 = dilated.s(e) * tj;
                let s2 = original.s(e) * s;
                worst = worst.max(op_norm(&(&ja * &tj2 - &s2)));
                checked += 1;
                next.push((p.prepend(g, e).expect("out edge"), tj2, s2));
            }
        }
        layer = next;
    }
    let report = check_full_ck(dilated);
    let mut defects = Vec::new();
    for c in &report.colors {
        for v in c.vertices.iter().filter(|v| v.received) {
            defects.push(DefectEntry {
                color: c.color.clone(),
                vertex: v.vertex.clone(),
                norm: v.defect_norm,
            });
        }
    }
    let max_defect = defects.iter().map(|d| d.norm).fold(0.0, f64::max);
    Ok(DilationCertificate {
        embedding: embedding.clone(),
        embedding_defect,
        compression_error: worst,
        max_degree,
        monomials_checked: checked,
        complete: max_defect <= dilated.tol(),
        defects,
        max_defect,
        depth: 0,
        tolerance: dilated.tol(),
    })
}

/// `m` orthogonal copies of `fam`.
pub fn inflate(fam: &OperatorFamily, m: usize) -> Result<OperatorFamily> {
    let copies: Vec<&OperatorFamily> = std::iter::repeat_n(fam, m).collect();
    direct_sum(&copies)
}

fn require_single_color(fam: &OperatorFamily) -> Result<()> {
    if fam.graph().color_count() > 1 {
        return Err(Error::Invalid(
            "this construction needs a single-colored family; use the colored dilation".into(),
        ));
    }
    Ok(())
}

fn require_tck(fam: &OperatorFamily) -> Result<()> {
    if check_tck(fam).classification == Classification::Invalid {
        return Err(Error::NotTck("relation residuals exceed tolerance".into()));
    }
    Ok(())
}

/// Fock basis positions with range `w`, in basis order.
fn fock_positions(fock: &OperatorFamily, w: VertexId) -> Vec<usize> {
    let p = fock.p(w);
    (0..fock.dim()).filter(|&i| p[(i, i)].re > 0.5).collect()
}

/// Defect directions the corners at `v` consume: one per Fock path with range
/// `s(e)`, summed over the edges into `v`.
pub fn corner_demand(g: &Graph, v: VertexId, n: usize) -> Result<usize> {
    let fock = build_fock(g, n)?;
    Ok(g.in_edges(v)
        .iter()
        .map(|&e| fock_positions(&fock, g.src(e)).len())
        .sum())
}

/// Smallest inflation `m` with `m · rank(defect at v) ≥` [`corner_demand`].
pub fn required_inflation(fam: &OperatorFamily, v: VertexId, n: usize) -> Result<usize> {
    let alpha = wandering_vectors(fam, v)?.len();
    if alpha == 0 {
        return Err(Error::NotSingular(fam.graph().vertex_name(v).to_string()));
    }
    Ok(corner_demand(fam.graph(), v, n)?.div_ceil(alpha).max(1))
}

/// Upper-triangular dilation on `H^{(m)} ⊕ H_G(n)`:
/// `ρ(s_e) = [[π(s_e), W_e], [0, 0]]` for `r(e) = v`, block diagonal with the
/// Fock family otherwise. `W_e` sends the Fock paths ending at `s(e)` onto
/// consecutive defect directions at `v`, edges taken in ascending order.
pub fn one_step_dilation(
    fam: &OperatorFamily,
    v: VertexId,
    m: usize,
    n: usize,
) -> Result<(OperatorFamily, DilationCertificate)> {
    if n < 1 {
        return Err(Error::InvalidDepth("depth must be at least 1".into()));
    }
    require_single_color(fam)?;
    require_tck(fam)?;
    let g = fam.graph();
    if g.in_edges(v).is_empty() {
        return Err(Error::NotSingular(g.vertex_name(v).to_string()));
    }
    let zetas = wandering_vectors(fam, v)?;
    if zetas.is_empty() {
        return Err(Error::NotSingular(g.vertex_name(v).to_string()));
    }
    let fock = build_fock(g, n)?;
    let demand = corner_demand(g, v, n)?;
    let available = m * zetas.len();
    if demand > available {
        return Err(Error::InsufficientInflation {
            needed: demand,
            available,
        });
    }
    let big = inflate(fam, m.max(1))?;
    let d = fam.dim();
    let db = big.dim();
    let f = fock.dim();
    let total = db + f;
    // defect directions of the inflation, ordered by (copy, j)
    let mut directions = Vec::with_capacity(available);
    for copy in 0..m {
        for z in &zetas {
            let mut x = DVector::<Complex64>::zeros(db);
            x.rows_mut(copy * d, d).copy_from(z);
            directions.push(x);
        }
    }
    let mut next = 0;
    let mut s_ops = Vec::with_capacity(g.edge_count());
    for e in g.edge_ids() {
        let mut s = block_diag(&[big.s(e), fock.s(e)]);
        if g.rng(e) == v {
            s.view_mut((db, db), (f, f)).fill(Complex64::default());
            for j in fock_positions(&fock, g.src(e)) {
                s.view_mut((0, db + j), (db, 1)).copy_from(&directions[next]);
                next += 1;
            }
        }
        s_ops.push(s);
    }
    let p_ops = g.vertices().map(|w| block_diag(&[big.p(w), fock.p(w)])).collect();
    let interior = block_diag(&[big.interior(), fock.interior()]);
    let out = OperatorFamily::new(fam.graph_arc().clone(), p_ops, s_ops, interior)?.with_tol(fam.tol());
    let embedding = select_columns(&identity(total), &(0..db).collect::<Vec<_>>());
    let mut cert = compression_certificate(&big, &out, &embedding, n.saturating_sub(1).max(1))?;
    cert.depth = n;
    Ok((out, cert))
}

/// Off-diagonal corner norms `‖(I − Π_H) ρ(s_e) Π_H‖` and
/// `‖Π_H ρ(s_e) (I − Π_H)‖` per edge, for the range `H` of `embedding`.
pub fn corner_norms(dilated: &OperatorFamily, embedding: &CMat) -> Vec<(EdgeId, f64, f64)> {
    let ph = embedding * adjoint(embedding);
    let comp = identity(dilated.dim()) - &ph;
    dilated
        .graph()
        .edge_ids()
        .map(|e| {
            let s = dilated.s(e);
            (e, op_norm(&(&comp * s * &ph)), op_norm(&(&ph * s * &comp)))
        })
        .collect()
}

/// Full-CK dilation: Wold decomposition, keep the full-CK complement, and
/// place every `π_v` summand inside the backward-path component at `v` at
/// depth `max(n, block depth)`. Monomials up to degree `max(1, n/2)` are
/// certified.
pub fn full_ck_dilation(fam: &OperatorFamily, n: usize) -> Result<(OperatorFamily, DilationCertificate)> {
    if n < 1 {
        return Err(Error::InvalidDepth("depth must be at least 1".into()));
    }
    require_single_color(fam)?;
    let w = wold_decompose(fam)?;
    let g = fam.graph();
    let tails = select_tails(g);
    let d = fam.dim();
    let mut summands: Vec<OperatorFamily> = Vec::new();
    // (rows of the dilated space, original vectors) per summand
    let mut pieces: Vec<(CMat, CMat)> = Vec::new();
    for b in &w.blocks {
        let depth = n.max(b.depth());
        let basis = enumerate_backward_basis(g, &tails, depth)?;
        let comp = basis.component(b.vertex);
        let rho = rho_on_basis(g, &basis)?;
        let q = select_columns(&identity(basis.len()), &comp);
        let gamma = compress(&rho, &q);
        // symbol (λ, v, 0) sits at position `k` inside the component
        let mut place = zeros(comp.len(), b.paths.len());
        for (j, lambda) in b.paths.iter().enumerate() {
            let sym = crate::graph::BackwardSymbol {
                lambda: lambda.clone(),
                vertex: b.vertex,
                index: 0,
            };
            let pos = basis.index_of(&sym).expect("i = 0 symbols are reduced");
            let k = comp.iter().position(|&c| c == pos).expect("symbol owned by v");
            place[(k, j)] = ONE;
        }
        pieces.push((place, b.vectors.clone()));
        summands.push(gamma.with_tol(fam.tol()));
    }
    summands.push(w.complement_family.clone());
    pieces.push((identity(w.complement.ncols()), w.complement.clone()));
    let refs: Vec<&OperatorFamily> = summands.iter().collect();
    let dilated = direct_sum(&refs)?.with_tol(fam.tol());
    let mut embedding = zeros(dilated.dim(), d);
    let mut row = 0;
    for (place, vectors) in &pieces {
        let block = place * adjoint(vectors);
        embedding
            .view_mut((row, 0), (place.nrows(), d))
            .copy_from(&block);
        row += place.nrows();
    }
    let mut cert = compression_certificate(fam, &dilated, &embedding, (n / 2).max(1))?;
    cert.depth = n;
    Ok((dilated, cert))
}

/// Nodes added by the colored construction.
#[derive(Clone, Debug)]
struct Node {
    vertex: VertexId,
    depth: usize,
    covered: BTreeSet<ColorId>,
    out_done: BTreeSet<EdgeId>,
}

/// Edge target of a new node: another new node or a vector of the original space.
enum Target {
    Node(usize),
    Original(DVector<Complex64>),
}

fn smallest_in_edge(g: &Graph, v: VertexId, c: ColorId) -> EdgeId {
    g.in_edges_of_color(v, c).next().expect("received vertex")
}

/// Grows the tree of new nodes to depth `l`; `None` if it passes `budget`.
#[allow(clippy::type_complexity)]
fn grow(
    g: &Graph,
    seeds: &[(ColorId, VertexId, DVector<Complex64>)],
    order: &[ColorId],
    l: usize,
    budget: usize,
) -> Option<(Vec<Node>, Vec<(EdgeId, usize, Target)>)> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut maps: Vec<(EdgeId, usize, Target)> = Vec::new();
    let mut queue = VecDeque::new();
    for (c, v, zeta) in seeds {
        let t = smallest_in_edge(g, *v, *c);
        nodes.push(Node {
            vertex: g.src(t),
            depth: 1,
            covered: BTreeSet::new(),
            out_done: [t].into_iter().collect(),
        });
        maps.push((t, nodes.len() - 1, Target::Original(zeta.clone())));
        queue.push_back(nodes.len() - 1);
    }
    while let Some(k) = queue.pop_front() {
        if nodes.len() > budget {
            return None;
        }
        let node = nodes[k].clone();
        if node.depth >= l {
            continue;
        }
        for &e in g.out_edges(node.vertex) {
            if node.out_done.contains(&e) {
                continue;
            }
            nodes.push(Node {
                vertex: g.rng(e),
                depth: node.depth + 1,
                covered: [g.color(e)].into_iter().collect(),
                out_done: BTreeSet::new(),
            });
            let child = nodes.len() - 1;
            maps.push((e, k, Target::Node(child)));
            nodes[k].out_done.insert(e);
            queue.push_back(child);
        }
        for &c in order {
            if node.covered.contains(&c) || g.in_edges_of_color(node.vertex, c).next().is_none() {
                continue;
            }
            let t = smallest_in_edge(g, node.vertex, c);
            nodes.push(Node {
                vertex: g.src(t),
                depth: node.depth + 1,
                covered: BTreeSet::new(),
                out_done: [t].into_iter().collect(),
            });
            let parent = nodes.len() - 1;
            maps.push((t, parent, Target::Node(k)));
            nodes[k].covered.insert(c);
            queue.push_back(parent);
        }
    }
    (nodes.len() <= budget).then_some((nodes, maps))
}

/// Cap on new basis vectors in the colored construction.
pub const COLORED_NODE_BUDGET: usize = 1500;

/// Joint full-CK dilation of a colored family. Every interior defect
/// direction `ζ` of color `c` at `v` receives a new preimage under the
/// smallest `c`-edge into `v`; new vectors then get images under all their
/// out-edges and preimages for every color that must cover them, out to tree
/// depth `depth` (reduced if the node budget is exceeded). New vectors below
/// the final depth are interior. The original space stays invariant under
/// every edge operator, so compressions of path monomials are exact.
pub fn colored_full_ck_dilation(
    fam: &OperatorFamily,
    depth: usize,
) -> Result<(OperatorFamily, DilationCertificate)> {
    let order: Vec<ColorId> = fam.graph().colors().collect();
    colored_full_ck_dilation_with(fam, depth, &order, COLORED_NODE_BUDGET)
}

/// `order` lists every color once; it fixes the order in which defects are
/// seeded and missing preimages are added.
pub fn colored_full_ck_dilation_with(
    fam: &OperatorFamily,
    depth: usize,
    order: &[ColorId],
    budget: usize,
) -> Result<(OperatorFamily, DilationCertificate)> {
    if depth < 1 {
        return Err(Error::InvalidDepth("depth must be at least 1".into()));
    }
    let g = fam.graph().clone();
    let mut sorted = order.to_vec();
    sorted.sort();
    if sorted != g.colors().collect::<Vec<_>>() {
        return Err(Error::Invalid("color order must list every color exactly once".into()));
    }
    let mut seeds = Vec::new();
    for &c in order {
        let view = fam.color_view(c);
        if check_tck(&view).classification == Classification::Invalid {
            return Err(Error::NotTck(format!("color `{}`", g.color_name(c))));
        }
        for v in g.receivers_of_color(c) {
            for z in wandering_vectors(&view, v)? {
                seeds.push((c, v, z));
            }
        }
    }
    let mut reached = depth;
    let (nodes, maps) = loop {
        if let Some(t) = grow(&g, &seeds, order, reached, budget) {
            break t;
        }
        if reached == 1 {
            return Err(Error::TooLarge(format!(
                "colored dilation needs more than {budget} new vectors even at depth 1"
            )));
        }
        reached -= 1;
    };
    let d = fam.dim();
    let total = d + nodes.len();
    let mut s_ops: Vec<CMat> = g
        .edge_ids()
        .map(|e| {
            let mut s = zeros(total, total);
            s.view_mut((0, 0), (d, d)).copy_from(fam.s(e));
            s
        })
        .collect();
    for (e, from, to) in &maps {
        let col = d + from;
        match to {
            Target::Node(k) => s_ops[e.0][(d + k, col)] = ONE,
            Target::Original(z) => s_ops[e.0].view_mut((0, col), (d, 1)).copy_from(z),
        }
    }
    let p_ops = g
        .vertices()
        .map(|v| {
            let mut p = coordinate_projection(
                total,
                nodes.iter().enumerate().filter(|(_, n)| n.vertex == v).map(|(k, _)| d + k),
            );
            p.view_mut((0, 0), (d, d)).copy_from(fam.p(v));
            p
        })
        .collect();
    let mut interior = coordinate_projection(
        total,
        nodes.iter().enumerate().filter(|(_, n)| n.depth < reached).map(|(k, _)| d + k),
    );
    interior.view_mut((0, 0), (d, d)).copy_from(fam.interior());
    let dilated = OperatorFamily::new(Arc::new(g.clone()), p_ops, s_ops, interior)?.with_tol(fam.tol());
    let embedding = select_columns(&identity(total), &(0..d).collect::<Vec<_>>());
    let mut cert = compression_certificate(fam, &dilated, &embedding, (depth / 2).max(1))?;
    cert.depth = reached;
    Ok((dilated, cert))
}

/// Random TCK dilation `[[π(s_e), X_e], [0, Z_e]]` on `H^{(m)} ⊕ H_G(n)`.
/// `X_e = sin θ · Σ_j λ_j δ_j w_j*` runs over the eigenpairs `(λ_j, δ_j)` of the
/// interior defect at `r(e)` (largest first, all copies) so no threshold
/// decides whether a corner appears. The Fock column paired with `δ_j` is kept
/// with weight `sqrt(1 − (sin θ · λ_j)²)`, so each column of `[X_e; Z_e]` stays
/// a unit vector. A random unitary
/// then mixes the added block. Returns the family and the embedding of `H^{(m)}`.
pub fn random_tck_dilation<R: Rng + ?Sized>(
    fam: &OperatorFamily,
    n: usize,
    rng: &mut R,
) -> Result<(OperatorFamily, CMat)> {
    if n < 1 {
        return Err(Error::InvalidDepth("depth must be at least 1".into()));
    }
    require_single_color(fam)?;
    let g = fam.graph();
    let fock = build_fock(g, n)?;
    let d = fam.dim();
    let f = fock.dim();
    let mut m = 1;
    let mut spectra = Vec::new();
    for v in g.receivers() {
        let dm = crate::verify::defect_matrix(fam, None, v);
        let (vals, vecs) = hermitian_eigh(&dm);
        let big = vals.iter().filter(|&&x| x > 0.5).count().max(1);
        let demand = corner_demand(g, v, n)?;
        m = m.max(demand.div_ceil(big)).max(demand.div_ceil(d.max(1)));
        spectra.push((v, vals, vecs));
    }
    let inflated = inflate(fam, m)?;
    let db = inflated.dim();
    let total = db + f;
    let theta: f64 = rng.random_range(0.3..std::f64::consts::FRAC_PI_2);
    let sin = theta.sin();
    let mut s_ops: Vec<CMat> = g.edge_ids().map(|e| block_diag(&[inflated.s(e), fock.s(e)])).collect();
    for (v, vals, vecs) in &spectra {
        // directions ordered: eigen index major, copy minor, so large
        // eigenvalues are used first across copies
        let mut dirs: Vec<(f64, DVector<Complex64>)> = Vec::new();
        for (j, &lam) in vals.iter().enumerate() {
            for copy in 0..m {
                let mut x = DVector::<Complex64>::zeros(db);
                x.rows_mut(copy * d, d).copy_from(&vecs.column(j));
                dirs.push((lam.clamp(0.0, 1.0), x));
            }
        }
        dirs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut next = 0;
        for &e in g.in_edges(*v) {
            for j in fock_positions(&fock, g.src(e)) {
                let (lam, x) = &dirs[next];
                next += 1;
                let a = sin * lam;
                let col = x * Complex64::new(a, 0.0);
                s_ops[e.0].view_mut((0, db + j), (db, 1)).copy_from(&col);
                let b = Complex64::new((1.0 - a * a).sqrt(), 0.0);
                let mut z = s_ops[e.0].view_mut((db, db + j), (f, 1));
                z *= b;
            }
        }
    }
    let p_ops: Vec<CMat> = g.vertices().map(|w| block_diag(&[inflated.p(w), fock.p(w)])).collect();
    let interior = block_diag(&[inflated.interior(), fock.interior()]);
    let u = block_diag(&[&identity(db), &random_unitary(f, rng)]);
    let out = OperatorFamily::new(fam.graph_arc().clone(), p_ops, s_ops, interior)?
        .with_tol(fam.tol())
        .conjugate(&u)?;
    let embedding = select_columns(&identity(total), &(0..db).collect::<Vec<_>>());
    Ok((out, embedding))
}

/// Stacks orthonormal columns into a matrix; helper for callers building
/// embeddings by hand.
pub fn embedding_from_columns(rows: usize, cols: &[DVector<Complex64>]) -> CMat {
    vectors_to_matrix(rows, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_cycle_exact, build_fock, build_pi_v};
    use crate::verify::check_relations;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn loop_graph() -> Graph {
        Graph::new(&["v"], &[("e", "v", "v")]).unwrap()
    }

    fn two_cycle() -> Graph {
        Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "u")]).unwrap()
    }

    #[test]
    fn one_step_on_pi_v_loop() {
        let g = loop_graph();
        let v = VertexId(0);
        let n = 3;
        let pv = build_pi_v(&g, v, n).unwrap();
        let m = required_inflation(&pv, v, n).unwrap();
        // n + 1 Fock paths end at v, one defect direction per copy
        assert_eq!(m, n + 1);
        assert!(matches!(
            one_step_dilation(&pv, v, m - 1, n),
            Err(Error::InsufficientInflation { .. })
        ));
        let (rho, cert) = one_step_dilation(&pv, v, m, n).unwrap();
        let report = check_relations(&rho);
        assert_ne!(report.classification, Classification::Invalid);
        assert!(cert.compression_error <= 1e-10);
        // bookkeeping: m·α − Σ rank W_e + interior Fock rank at v
        let fock_interior_at_v = n;
        let rank = report.vertex("0", "v").unwrap().defect_rank;
        assert_eq!(rank, m - (n + 1) + fock_interior_at_v);
        let corners = corner_norms(&rho, &cert.embedding);
        assert!(corners.iter().any(|&(_, _, up)| up >= 0.5));
        assert!(corners.iter().all(|&(_, low, _)| low <= 1e-12));
    }

    #[test]
    fn one_step_rejects_full_ck() {
        let f = build_cycle_exact(&loop_graph()).unwrap();
        assert!(matches!(
            one_step_dilation(&f, VertexId(0), 3, 2),
            Err(Error::NotSingular(_))
        ));
        let pv = build_pi_v(&loop_graph(), VertexId(0), 2).unwrap();
        assert!(matches!(one_step_dilation(&pv, VertexId(0), 3, 0), Err(Error::InvalidDepth(_))));
    }

    #[test]
    fn full_ck_dilation_of_fock_loop() {
        let g = loop_graph();
        let f = build_fock(&g, 6).unwrap();
        let (dil, cert) = full_ck_dilation(&f, 6).unwrap();
        assert_eq!(check_full_ck(&dil).classification, Classification::FullCk);
        assert!(cert.compression_error <= 1e-9);
        assert!(cert.complete);
        assert_eq!(cert.max_degree, 3);
    }

    #[test]
    fn full_ck_dilation_is_identity_on_full_ck() {
        let f = build_cycle_exact(&two_cycle()).unwrap();
        let (dil, cert) = full_ck_dilation(&f, 4).unwrap();
        assert_eq!(dil.dim(), f.dim());
        assert!(op_norm(&(&cert.embedding - identity(2))) < 1e-12);
        assert_eq!(cert.compression_error, 0.0);
    }

    #[test]
    fn pi_v_two_cycle_defect_is_cleared() {
        let g = two_cycle();
        let u = g.vertex_id("u").unwrap();
        let f = build_pi_v(&g, u, 4).unwrap();
        assert_eq!(check_full_ck(&f).singular.len(), 1);
        let (dil, cert) = full_ck_dilation(&f, 4).unwrap();
        assert!(check_full_ck(&dil).singular.is_empty());
        // embedded vacuum is now in the range of T_f
        let vac = cert.embedding.column(0).into_owned();
        let tf = dil.s(g.edge_id("f").unwrap());
        let range = tf * adjoint(tf);
        assert!(((&range * &vac) - &vac).norm() < 1e-12);
    }

    #[test]
    fn corrupted_dilation_is_caught() {
        let g = loop_graph();
        let f = build_fock(&g, 4).unwrap();
        let (dil, cert) = full_ck_dilation(&f, 4).unwrap();
        let bad = dil.perturb_edge(EdgeId(0), 1, 0, Complex64::new(1e-3, 0.0));
        // pick an entry inside the embedded block so the error is visible
        let i = (0..dil.dim()).find(|&i| cert.embedding[(i, 1)].norm() > 0.5).unwrap();
        let j = (0..dil.dim()).find(|&j| cert.embedding[(j, 0)].norm() > 0.5).unwrap();
        let bad2 = dil.perturb_edge(EdgeId(0), i, j, Complex64::new(1e-3, 0.0));
        let c = compression_certificate(&f, &bad2, &cert.embedding, 2).unwrap();
        assert!(c.compression_error >= 1e-4);
        let _ = bad;
    }

    #[test]
    fn colored_dilation_clears_shift_color() {
        let g = Graph::colored(&["v"], &[("a", "v", "v", "a"), ("b", "v", "v", "b")]).unwrap();
        let n = 4;
        let shift = build_fock(&Graph::new(&["v"], &[("a", "v", "v")]).unwrap(), n).unwrap();
        let d = shift.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fam = OperatorFamily::new(
            Arc::new(g.clone()),
            vec![identity(d)],
            vec![shift.s(EdgeId(0)).clone(), random_unitary(d, &mut rng)],
            shift.interior().clone(),
        )
        .unwrap();
        let (dil, cert) = colored_full_ck_dilation(&fam, n).unwrap();
        assert!(cert.complete, "{:?}", cert.defects);
        assert!(cert.compression_error <= 1e-9);
        for c in g.colors() {
            let r = check_full_ck(&dil.color_view(c));
            assert_eq!(r.classification, Classification::FullCk);
        }
    }

    #[test]
    fn random_dilation_of_full_ck_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = build_cycle_exact(&two_cycle()).unwrap();
        let (dil, j) = random_tck_dilation(&f, 3, &mut rng).unwrap();
        assert_ne!(check_tck(&dil).classification, Classification::Invalid);
        for (_, low, up) in corner_norms(&dil, &j) {
            assert!(low <= 1e-12 && up <= 1e-12);
        }
        let pv = build_pi_v(&two_cycle(), VertexId(0), 3).unwrap();
        let (dil, j) = random_tck_dilation(&pv, 3, &mut rng).unwrap();
        assert_ne!(check_tck(&dil).classification, Classification::Invalid);
        assert!(corner_norms(&dil, &j).iter().any(|&(_, _, up)| up > 0.25));
    }
}
