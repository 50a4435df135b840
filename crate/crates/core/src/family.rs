//! Concrete operator families `{P_v}, {S_e}` on `C^D`, with an interior
//! projection marking where relations are asserted, and the builders for the
//! Fock, `π_v`, backward-path and exact cycle representations.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{
    enumerate_backward_basis, enumerate_paths, BackwardBasis, ColorId, EdgeId, Graph, Path,
    PathBasis, TailSelection, VertexId,
};
use crate::linalg::{
    self, adjoint, block_diag, coordinate_projection, from_triplets, identity, op_norm,
    orthonormality_defect, round_to_projection, zeros, CMat, ONE,
};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Columns handed to `restrict` must be orthonormal to this accuracy.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct OperatorFamily {
    graph: Arc<Graph>,
    dim: usize,
    p: Vec<CMat>,
    s: Vec<CMat>,
    interior: CMat,
    tol: f64,
    labels: Option<Vec<String>>,
}

impl OperatorFamily {
    /// `p` is indexed by vertex id, `s` by edge id.
    pub fn new(graph: Arc<Graph>, p: Vec<CMat>, s: Vec<CMat>, interior: CMat) -> Result<Self> {
        let dim = interior.nrows();
        let check = |what: String, m: &CMat| -> Result<()> {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: dim,
                    found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
                });
            }
            Ok(())
        };
        check("interior".into(), &interior)?;
        if p.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch {
                what: "vertex projection count".into(),
                expected: graph.vertex_count(),
                found: p.len(),
            });
        }
        if s.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                what: "edge operator count".into(),
                expected: graph.edge_count(),
                found: s.len(),
            });
        }
        for (v, m) in graph.vertices().zip(&p) {
            check(format!("P[{}]", graph.vertex_name(v)), m)?;
        }
        for (e, m) in graph.edge_ids().zip(&s) {
            check(format!("S[{}]", graph.edge_name(e)), m)?;
        }
        Ok(OperatorFamily {
            graph,
            dim,
            p,
            s,
            interior,
            tol: DEFAULT_TOL,
            labels: None,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "labels".into(),
                expected: self.dim,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self, v: VertexId) -> &CMat {
        &self.p[v.0]
    }

    pub fn s(&self, e: EdgeId) -> &CMat {
        &self.s[e.0]
    }

    pub fn projections(&self) -> &[CMat] {
        &self.p
    }

    pub fn edge_operators(&self) -> &[CMat] {
        &self.s
    }

    pub fn interior(&self) -> &CMat {
        &self.interior
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `S_λ = S_{e_n} ⋯ S_{e_1}`; `P_v` for a vertex.
    pub fn path_operator(&self, path: &Path) -> CMat {
        let mut out = self.p[path.source().0].clone();
        for &e in path.steps() {
            out = &self.s[e.0] * out;
        }
        out
    }

    /// Every generator with a name: `P[v]`, `S[e]`, `S*[e]`.
    pub fn generators(&self) -> Vec<(String, CMat)> {
        let g = &self.graph;
        let mut out = Vec::with_capacity(self.p.len() + 2 * self.s.len());
        for v in g.vertices() {
            out.push((format!("P[{}]", g.vertex_name(v)), self.p[v.0].clone()));
        }
        for e in g.edge_ids() {
            out.push((format!("S[{}]", g.edge_name(e)), self.s[e.0].clone()));
            out.push((format!("S*[{}]", g.edge_name(e)), adjoint(&self.s[e.0])));
        }
        out
    }

    /// The single-colored family `(P, S|_{c⁻¹(color)})`.
    pub fn color_view(&self, c: ColorId) -> OperatorFamily {
        let sub = self.graph.color_subgraph(c);
        let s = self
            .graph
            .edge_ids()
            .filter(|&e| self.graph.color(e) == c)
            .map(|e| self.s[e.0].clone())
            .collect();
        OperatorFamily {
            graph: Arc::new(sub),
            dim: self.dim,
            p: self.p.clone(),
            s,
            interior: self.interior.clone(),
            tol: self.tol,
            labels: self.labels.clone(),
        }
    }

    /// Replaces the underlying graph by an equal-shaped one (same vertex and
    /// edge count), e.g. a recolored copy.
    pub fn with_graph(&self, graph: Arc<Graph>) -> Result<OperatorFamily> {
        let mut out = OperatorFamily::new(graph, self.p.clone(), self.s.clone(), self.interior.clone())?;
        out.tol = self.tol;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// `U A U*` applied to every operator, including the interior.
    pub fn conjugate(&self, u: &CMat) -> Result<OperatorFamily> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "conjugating unitary".into(),
                expected: self.dim,
                found: u.nrows(),
            });
        }
        let ua = adjoint(u);
        let conj = |m: &CMat| u * m * &ua;
        Ok(OperatorFamily {
            graph: self.graph.clone(),
            dim: self.dim,
            p: self.p.iter().map(conj).collect(),
            s: self.s.iter().map(conj).collect(),
            interior: conj(&self.interior),
            tol: self.tol,
            labels: None,
        })
    }

    /// Multiplies a single edge operator by `factor`; used to build invalid
    /// families in tests and examples.
    pub fn scale_edge(&self, e: EdgeId, factor: Complex64) -> OperatorFamily {
        let mut out = self.clone();
        out.s[e.0] *= factor;
        out
    }

    /// Overwrites one entry of one edge operator.
    pub fn perturb_edge(&self, e: EdgeId, row: usize, col: usize, delta: Complex64) -> OperatorFamily {
        let mut out = self.clone();
        out.s[e.0][(row, col)] += delta;
        out
    }
}

/// Largest dimension the dense builders accept.
pub const MAX_DENSE_DIM: usize = 4096;

fn check_dense(d: usize) -> Result<()> {
    if d > MAX_DENSE_DIM {
        return Err(Error::TooLarge(format!(
            "dimension {d} exceeds the dense limit {MAX_DENSE_DIM}; lower the depth"
        )));
    }
    Ok(())
}

fn check_depth(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidDepth("depth must be at least 1".into()));
    }
    Ok(())
}

fn fock_on(g: &Graph, basis: &[Path], index: impl Fn(&Path) -> Option<usize>, n: usize) -> Result<OperatorFamily> {
    let d = basis.len();
    check_dense(d)?;
    let p = g
        .vertices()
        .map(|v| {
            coordinate_projection(
                d,
                basis.iter().enumerate().filter(|(_, l)| l.range() == v).map(|(i, _)| i),
            )
        })
        .collect();
    let s = g
        .edge_ids()
        .map(|e| {
            let mut entries = Vec::new();
            for (j, lambda) in basis.iter().enumerate() {
                if lambda.len() < n {
                    if let Some(next) = lambda.prepend(g, e) {
                        if let Some(i) = index(&next) {
                            entries.push((i, j, ONE));
                        }
                    }
                }
            }
            from_triplets(d, d, &entries)
        })
        .collect();
    let interior = coordinate_projection(
        d,
        basis.iter().enumerate().filter(|(_, l)| l.len() < n).map(|(i, _)| i),
    );
    let labels = basis.iter().map(|l| l.display(g).to_string()).collect();
    OperatorFamily::new(Arc::new(g.clone()), p, s, interior)?.with_labels(labels)
}

/// Left-regular family on `ℓ²(E•)` truncated at path length `n`.
pub fn build_fock(g: &Graph, n: usize) -> Result<OperatorFamily> {
    check_depth(n)?;
    let basis = enumerate_paths(g, n)?;
    fock_on(g, basis.paths(), |p| basis.index_of(p), n)
}

/// `π_v`: the Fock family restricted to `ℓ²(s⁻¹(v))`.
pub fn build_pi_v(g: &Graph, v: VertexId, n: usize) -> Result<OperatorFamily> {
    check_depth(n)?;
    if v.0 >= g.vertex_count() {
        return Err(Error::UnknownVertex(format!("#{}", v.0)));
    }
    let basis = pi_v_basis(g, v, n)?;
    let index: std::collections::HashMap<Path, usize> =
        basis.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    fock_on(g, &basis, |p| index.get(p).copied(), n)
}

/// Basis of truncated `ℓ²(s⁻¹(v))` in path-basis order.
pub fn pi_v_basis(g: &Graph, v: VertexId, n: usize) -> Result<Vec<Path>> {
    Ok(crate::graph::enumerate_paths_from(g, v, n)?.paths().to_vec())
}

pub fn build_pi_v_named(g: &Graph, v: &str, n: usize) -> Result<OperatorFamily> {
    build_pi_v(g, g.vertex_id(v)?, n)
}

/// The backward-path family `(Q, T)` on reduced symbols `λ μ_{v,i}⁻¹`.
pub fn build_rho_infty(g: &Graph, t: &TailSelection, n: usize) -> Result<OperatorFamily> {
    check_depth(n)?;
    let basis = enumerate_backward_basis(g, t, n)?;
    rho_on_basis(g, &basis)
}

/// [`build_rho_infty`] on an already enumerated basis.
pub fn rho_on_basis(g: &Graph, basis: &BackwardBasis) -> Result<OperatorFamily> {
    let d = basis.len();
    check_dense(d)?;
    let syms = basis.symbols();
    let p = g
        .vertices()
        .map(|v| {
            coordinate_projection(
                d,
                syms.iter().enumerate().filter(|(_, s)| s.lambda.range() == v).map(|(i, _)| i),
            )
        })
        .collect();
    let s = g
        .edge_ids()
        .map(|e| {
            let entries: Vec<_> = syms
                .iter()
                .enumerate()
                .filter_map(|(j, sym)| basis.apply_edge(g, e, sym).map(|i| (i, j, ONE)))
                .collect();
            from_triplets(d, d, &entries)
        })
        .collect();
    let interior = coordinate_projection(
        d,
        syms.iter().enumerate().filter(|(_, s)| basis.is_interior(s)).map(|(i, _)| i),
    );
    let labels = syms.iter().map(|s| basis.label(g, s)).collect();
    OperatorFamily::new(Arc::new(g.clone()), p, s, interior)?.with_labels(labels)
}

/// Exact rank-one family on a vertex-disjoint union of cycles.
pub fn build_cycle_exact(g: &Graph) -> Result<OperatorFamily> {
    for v in g.vertices() {
        let (i, o) = (g.in_edges(v).len(), g.out_edges(v).len());
        if i != 1 || o != 1 {
            return Err(Error::NotCycleUnion(format!(
                "vertex `{}` has in-degree {i} and out-degree {o}",
                g.vertex_name(v)
            )));
        }
    }
    let d = g.vertex_count();
    let p = g.vertices().map(|v| coordinate_projection(d, [v.0])).collect();
    let s = g
        .edge_ids()
        .map(|e| from_triplets(d, d, &[(g.rng(e).0, g.src(e).0, ONE)]))
        .collect();
    let labels = g.vertex_names().to_vec();
    OperatorFamily::new(Arc::new(g.clone()), p, s, identity(d))?.with_labels(labels)
}

/// Vertex sets that carry an exact full-CK family with every `P_v` of equal
/// rank: forward-closed, and each member either receives nothing in `g` or
/// receives exactly one edge from inside the set.
pub fn is_exact_support(g: &Graph, support: &[VertexId]) -> bool {
    let inside = |v: VertexId| support.contains(&v);
    support.iter().all(|&v| {
        let closed = g.out_edges(v).iter().all(|&e| inside(g.rng(e)));
        let ins = g.in_edges(v);
        let from_inside = ins.iter().filter(|&&e| inside(g.src(e))).count();
        closed && (ins.is_empty() || from_inside == 1)
    })
}

/// Exact full-CK family: `P_v = I_m` on `support`, random `m × m` unitaries on
/// the edges inside it, zero elsewhere. With `rng = None` every edge unitary is
/// the identity.
pub fn build_exact_block<R: Rng + ?Sized>(
    g: &Graph,
    support: &[VertexId],
    m: usize,
    mut rng: Option<&mut R>,
) -> Result<OperatorFamily> {
    if !is_exact_support(g, support) {
        return Err(Error::Invalid(
            "support must be forward-closed with one internal incoming edge per receiving vertex".into(),
        ));
    }
    let mut order: Vec<VertexId> = support.to_vec();
    order.sort();
    order.dedup();
    let d = order.len() * m;
    let offset = |v: VertexId| order.iter().position(|&w| w == v).map(|k| k * m);
    let p = g
        .vertices()
        .map(|v| match offset(v) {
            Some(o) => coordinate_projection(d, o..o + m),
            None => zeros(d, d),
        })
        .collect();
    let s = g
        .edge_ids()
        .map(|e| match (offset(g.src(e)), offset(g.rng(e))) {
            (Some(so), Some(ro)) => {
                let u = match rng.as_deref_mut() {
                    Some(r) => linalg::random_unitary(m, r),
                    None => identity(m),
                };
                let mut out = zeros(d, d);
                out.view_mut((ro, so), (m, m)).copy_from(&u);
                out
            }
            _ => zeros(d, d),
        })
        .collect();
    let labels = order
        .iter()
        .flat_map(|&v| (0..m).map(move |k| format!("{}#{k}", g.vertex_name(v))))
        .collect();
    OperatorFamily::new(Arc::new(g.clone()), p, s, identity(d))?.with_labels(labels)
}

/// Diagonal gauge unitary on a backward basis.
#[derive(Clone, Debug)]
pub struct GaugeUnitary {
    z: Complex64,
    degrees: Vec<i64>,
}

impl GaugeUnitary {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn matrix(&self) -> CMat {
        let d = self.degrees.len();
        let entries: Vec<_> = self
            .degrees
            .iter()
            .enumerate()
            .map(|(i, &k)| (i, i, self.z.powi(k as i32)))
            .collect();
        from_triplets(d, d, &entries)
    }

    /// `U a U*`, entrywise as `z^{d_j - d_k} a_{jk}`; zero exponents leave
    /// entries untouched.
    pub fn conjugate(&self, a: &CMat) -> CMat {
        let mut out = a.clone();
        for j in 0..out.nrows() {
            for k in 0..out.ncols() {
                let diff = self.degrees[j] - self.degrees[k];
                if diff != 0 {
                    out[(j, k)] *= self.z.powi(diff as i32);
                }
            }
        }
        out
    }
}

/// `U_z ξ_{λμ⁻¹} = z^{|λ| - |μ|} ξ_{λμ⁻¹}`, so that `U_z T_e U_z* = z T_e`.
pub fn gauge_unitary(b: &BackwardBasis, z: Complex64) -> Result<GaugeUnitary> {
    let dev = z.norm() - 1.0;
    if dev.abs() > 1e-12 {
        return Err(Error::NotUnimodular(dev));
    }
    Ok(GaugeUnitary {
        z,
        degrees: b.symbols().iter().map(|s| s.degree()).collect(),
    })
}

pub fn direct_sum(fams: &[&OperatorFamily]) -> Result<OperatorFamily> {
    let first = fams
        .first()
        .ok_or_else(|| Error::Empty("direct sum of no families".into()))?;
    if fams.iter().any(|f| *f.graph != *first.graph) {
        return Err(Error::GraphMismatch);
    }
    check_dense(fams.iter().map(|f| f.dim).sum())?;
    let g = &first.graph;
    let p = g
        .vertices()
        .map(|v| block_diag(&fams.iter().map(|f| &f.p[v.0]).collect::<Vec<_>>()))
        .collect();
    let s = g
        .edge_ids()
        .map(|e| block_diag(&fams.iter().map(|f| &f.s[e.0]).collect::<Vec<_>>()))
        .collect();
    let interior = block_diag(&fams.iter().map(|f| &f.interior).collect::<Vec<_>>());
    let mut out = OperatorFamily::new(g.clone(), p, s, interior)?;
    out.tol = fams.iter().map(|f| f.tol).fold(0.0, f64::max);
    if fams.iter().all(|f| f.labels.is_some()) {
        let labels = fams
            .iter()
            .enumerate()
            .flat_map(|(k, f)| {
                f.labels
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(move |l| if fams.len() > 1 { format!("[{k}] {l}") } else { l.clone() })
            })
            .collect();
        out.labels = Some(labels);
    }
    Ok(out)
}

/// Largest `‖(I − QQ*) A Q‖` over all generators, with the offending name.
pub fn reducing_defect(fam: &OperatorFamily, q: &CMat) -> (String, f64) {
    let proj = q * adjoint(q);
    let comp = identity(fam.dim) - proj;
    let mut worst = (String::new(), 0.0);
    for (name, a) in fam.generators() {
        let d = op_norm(&(&comp * (&a * q)));
        if d > worst.1 {
            worst = (name, d);
        }
    }
    worst
}

/// Compression of `fam` to the span of the orthonormal columns of `q`, which
/// must reduce every generator.
pub fn restrict(fam: &OperatorFamily, q: &CMat) -> Result<OperatorFamily> {
    if q.nrows() != fam.dim {
        return Err(Error::DimensionMismatch {
            what: "subspace rows".into(),
            expected: fam.dim,
            found: q.nrows(),
        });
    }
    let defect = orthonormality_defect(q);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    let (operator, worst) = reducing_defect(fam, q);
    if worst > fam.tol {
        return Err(Error::NotReducing {
            operator,
            defect: worst,
        });
    }
    Ok(compress(fam, q))
}

/// `Q* A Q` for every operator, without checks. The new interior is the
/// compressed interior rounded to a projection.
pub fn compress(fam: &OperatorFamily, q: &CMat) -> OperatorFamily {
    let qa = adjoint(q);
    let c = |m: &CMat| &qa * m * q;
    let labels = fam.labels.as_ref().and_then(|ls| {
        linalg::as_coordinate_projection(&(q * &qa)).map(|keep| keep.iter().map(|&i| ls[i].clone()).collect())
    });
    OperatorFamily {
        graph: fam.graph.clone(),
        dim: q.ncols(),
        p: fam.p.iter().map(c).collect(),
        s: fam.s.iter().map(c).collect(),
        interior: round_to_projection(&c(&fam.interior)),
        tol: fam.tol,
        labels,
    }
}

/// Convenience: the `PathBasis` that indexes `build_fock(g, n)`.
pub fn fock_basis(g: &Graph, n: usize) -> Result<PathBasis> {
    check_depth(n)?;
    enumerate_paths(g, n)
}
