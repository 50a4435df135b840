//! Relation checks, defects at received vertices, and the commutant probe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::OperatorFamily;
use crate::graph::{ColorId, VertexId};
use crate::linalg::{
    adjoint, hermitian_eigenvalues, hermitian_eigh, hermitian_norm, identity, op_norm,
    orthogonal_complement, rank_threshold, select_columns, vectors_to_matrix, zeros, CMat,
};

/// Ordered so that `min` over summands gives the class of a direct sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "INVALID")]
    Invalid,
    #[serde(rename = "TCK")]
    Tck,
    #[serde(rename = "CK")]
    Ck,
    #[serde(rename = "FULL_CK")]
    FullCk,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Invalid => "INVALID",
            Classification::Tck => "TCK",
            Classification::Ck => "CK",
            Classification::FullCk => "FULL_CK",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeResidual {
    pub edge: String,
    /// `‖Π(S_e*S_e − P_{s(e)})Π‖`
    pub isometry: f64,
    /// `‖(S_e − P_{r(e)} S_e P_{s(e)})Π‖`
    pub support: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDefect {
    pub vertex: String,
    pub received: bool,
    /// Smallest eigenvalue of `Π(P_v − Σ S_eS_e*)Π`; negative means (TCK) fails.
    pub tck_slack: f64,
    pub defect_norm: f64,
    pub defect_rank: usize,
    /// Largest defect eigenvalues, descending (at most eight).
    pub spectrum: Vec<f64>,
    /// Some eigenvalue lies within a factor ten of the rank threshold.
    pub borderline: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorReport {
    pub color: String,
    pub edges: Vec<EdgeResidual>,
    pub vertices: Vec<VertexDefect>,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularVertex {
    pub color: String,
    pub vertex: String,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub dimension: usize,
    /// `max ‖P_v² − P_v‖, ‖P_v − P_v*‖`
    pub projection_residual: f64,
    /// `max_{v≠w} ‖P_v P_w‖`
    pub orthogonality_residual: f64,
    /// Largest eigenvalue of `Σ P_v − I` (positive means `Σ P_v ≰ I`).
    pub sum_excess: f64,
    /// `max ‖[Π, P_v]‖`
    pub interior_commutator: f64,
    pub colors: Vec<ColorReport>,
    pub classification: Classification,
    pub singular: Vec<SingularVertex>,
    pub borderline: bool,
    pub tolerance: f64,
}

impl RelationReport {
    pub fn max_isometry_residual(&self) -> f64 {
        self.colors
            .iter()
            .flat_map(|c| c.edges.iter().map(|e| e.isometry))
            .fold(0.0, f64::max)
    }

    pub fn max_defect(&self) -> f64 {
        self.colors
            .iter()
            .flat_map(|c| c.vertices.iter().filter(|v| v.received).map(|v| v.defect_norm))
            .fold(0.0, f64::max)
    }

    pub fn min_tck_slack(&self) -> f64 {
        self.colors
            .iter()
            .flat_map(|c| c.vertices.iter().map(|v| v.tck_slack))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn color(&self, name: &str) -> Option<&ColorReport> {
        self.colors.iter().find(|c| c.color == name)
    }

    pub fn vertex(&self, color: &str, vertex: &str) -> Option<&VertexDefect> {
        self.color(color)?.vertices.iter().find(|v| v.vertex == vertex)
    }
}

/// `Π(P_v − Σ_{r(e)=v, c(e)=color} S_eS_e*)Π`.
pub fn defect_matrix(fam: &OperatorFamily, color: Option<ColorId>, v: VertexId) -> CMat {
    let g = fam.graph();
    let mut d = fam.p(v).clone();
    for &e in g.in_edges(v) {
        if color.is_none_or(|c| g.color(e) == c) {
            let s = fam.s(e);
            d -= s * adjoint(s);
        }
    }
    let pi = fam.interior();
    let out = pi * d * pi;
    (&out + adjoint(&out)).unscale(2.0)
}

/// Rank cut-off used for defect and wandering-space decisions.
pub fn defect_threshold(fam: &OperatorFamily, sigma_max: f64) -> f64 {
    rank_threshold(fam.dim(), sigma_max).max(fam.tol())
}

/// Full relation report for every color of the family.
pub fn check_relations(fam: &OperatorFamily) -> RelationReport {
    let g = fam.graph();
    let d = fam.dim();
    let tol = fam.tol();
    let mut projection_residual: f64 = 0.0;
    let mut orthogonality_residual: f64 = 0.0;
    let mut interior_commutator: f64 = 0.0;
    let mut sum = zeros(d, d);
    let pi = fam.interior();
    for v in g.vertices() {
        let p = fam.p(v);
        projection_residual = projection_residual
            .max(op_norm(&(p * p - p)))
            .max(op_norm(&(p - adjoint(p))));
        interior_commutator = interior_commutator.max(op_norm(&(pi * p - p * pi)));
        for w in g.vertices().filter(|&w| w > v) {
            orthogonality_residual = orthogonality_residual.max(op_norm(&(p * fam.p(w))));
        }
        sum += p;
    }
    let sum_excess = hermitian_eigenvalues(&(sum - identity(d)))
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    let globally_valid = projection_residual <= tol
        && orthogonality_residual <= tol
        && sum_excess <= tol
        && interior_commutator <= tol;

    let range_projections: Vec<CMat> = g.edge_ids().map(|e| fam.s(e) * adjoint(fam.s(e))).collect();
    let mut colors = Vec::new();
    let mut singular = Vec::new();
    let mut borderline = false;
    for c in g.colors() {
        let cname = g.color_name(c).to_string();
        let mut valid = globally_valid;
        let mut full = true;
        let mut edges = Vec::new();
        for e in g.edge_ids().filter(|&e| g.color(e) == c) {
            let s = fam.s(e);
            let ps = fam.p(g.src(e));
            let pr = fam.p(g.rng(e));
            let iso = hermitian_norm(&(pi * (adjoint(s) * s - ps) * pi));
            let support = op_norm(&((s - pr * s * ps) * pi));
            valid &= iso <= tol && support <= tol;
            edges.push(EdgeResidual {
                edge: g.edge_name(e).to_string(),
                isometry: iso,
                support,
            });
        }
        let mut vertices = Vec::new();
        for v in g.vertices() {
            let mut dm = fam.p(v).clone();
            let incoming: Vec<_> = g.in_edges_of_color(v, c).collect();
            for &e in &incoming {
                dm -= &range_projections[e.0];
            }
            let dm = pi * dm * pi;
            let dm = (&dm + adjoint(&dm)).unscale(2.0);
            let mut eig = hermitian_eigenvalues(&dm);
            let slack = eig.first().copied().unwrap_or(0.0);
            eig.reverse();
            let top = eig.first().copied().unwrap_or(0.0).max(0.0);
            let thr = defect_threshold(fam, top);
            let rank = eig.iter().filter(|&&x| x > thr).count();
            let near = eig.iter().any(|&x| x > thr / 10.0 && x <= thr * 10.0);
            let received = !incoming.is_empty();
            valid &= slack >= -tol;
            if received {
                full &= top <= tol;
                borderline |= near;
                if rank > 0 {
                    singular.push(SingularVertex {
                        color: cname.clone(),
                        vertex: g.vertex_name(v).to_string(),
                        rank,
                    });
                }
            }
            vertices.push(VertexDefect {
                vertex: g.vertex_name(v).to_string(),
                received,
                tck_slack: slack,
                defect_norm: if received { top } else { 0.0 },
                defect_rank: if received { rank } else { 0 },
                spectrum: if received { eig.iter().take(8).copied().collect() } else { Vec::new() },
                borderline: received && near,
            });
        }
        let classification = match (valid, full) {
            (false, _) => Classification::Invalid,
            (true, false) => Classification::Tck,
            (true, true) => Classification::FullCk,
        };
        colors.push(ColorReport {
            color: cname,
            edges,
            vertices,
            classification,
        });
    }
    let classification = colors
        .iter()
        .map(|c| c.classification)
        .min()
        .unwrap_or(Classification::FullCk);
    RelationReport {
        dimension: d,
        projection_residual,
        orthogonality_residual,
        sum_excess,
        interior_commutator,
        colors,
        classification,
        singular,
        borderline,
        tolerance: tol,
    }
}

/// (I) and (TCK) checks; the report also carries the full-CK defects.
pub fn check_tck(fam: &OperatorFamily) -> RelationReport {
    check_relations(fam)
}

/// Same report as [`check_tck`]; `FULL_CK` iff every received defect vanishes
/// on the interior.
pub fn check_full_ck(fam: &OperatorFamily) -> RelationReport {
    check_relations(fam)
}

/// Received vertices (per color) with a nonzero interior defect.
pub fn singular_vertices(fam: &OperatorFamily) -> Vec<SingularVertex> {
    check_relations(fam).singular
}

pub const COMMUTANT_DIM_GUARD: usize = 512;
const COMMUTANT_ENTRY_GUARD: usize = 60_000_000;

pub fn commutant_dimension(fam: &OperatorFamily) -> Result<usize> {
    commutant_dimension_with_guard(fam, COMMUTANT_DIM_GUARD)
}

/// Dimension of `{X : XA = AX}` for `A` over all `P_v, S_e, S_e*`, ignoring
/// the interior. Unknowns are restricted to the blocks cut out by the
/// `P_v` and `I − Σ P_v`, which every commuting `X` preserves.
pub fn commutant_dimension_with_guard(fam: &OperatorFamily, max_dim: usize) -> Result<usize> {
    let d = fam.dim();
    if d > max_dim {
        return Err(Error::GuardExceeded(format!(
            "commutant probe limited to dimension {max_dim}, family has {d}"
        )));
    }
    if d == 0 {
        return Ok(0);
    }
    let g = fam.graph();
    let mut columns = Vec::new();
    let mut blocks: Vec<std::ops::Range<usize>> = Vec::new();
    for v in g.vertices() {
        let (vals, vecs) = hermitian_eigh(fam.p(v));
        let keep: Vec<usize> = (0..d).filter(|&i| vals[i] > 0.5).collect();
        if keep.is_empty() {
            continue;
        }
        let start = columns.len();
        for &k in &keep {
            columns.push(vecs.column(k).into_owned());
        }
        blocks.push(start..columns.len());
    }
    let used = vectors_to_matrix(d, &columns);
    let rest = orthogonal_complement(d, &used);
    if rest.ncols() > 0 {
        let start = columns.len();
        for k in 0..rest.ncols() {
            columns.push(rest.column(k).into_owned());
        }
        blocks.push(start..columns.len());
    }
    let w = vectors_to_matrix(d, &columns);
    let wa = adjoint(&w);
    let mut block_of = vec![0usize; d];
    let mut offset = Vec::new();
    let mut unknowns = 0;
    for (b, r) in blocks.iter().enumerate() {
        for i in r.clone() {
            block_of[i] = b;
        }
        offset.push(unknowns);
        unknowns += r.len() * r.len();
    }
    // unknown index of X_{ij} inside its block (i, j in the same block)
    let var = |i: usize, j: usize| -> usize {
        let b = block_of[i];
        let r = &blocks[b];
        offset[b] + (i - r.start) * r.len() + (j - r.start)
    };
    let gens: Vec<CMat> = fam.generators().into_iter().map(|(_, a)| &wa * a * &w).collect();
    let rows = gens.len() * d * d;
    if rows.saturating_mul(unknowns) > COMMUTANT_ENTRY_GUARD {
        return Err(Error::GuardExceeded(format!(
            "commutant system with {rows} equations and {unknowns} unknowns is too large"
        )));
    }
    let mut gram = zeros(unknowns, unknowns);
    let mut row: Vec<(usize, num_complex::Complex64)> = Vec::new();
    for a in &gens {
        for i in 0..d {
            for j in 0..d {
                row.clear();
                // (AX − XA)_{ij} = Σ_{k ∈ blk(j)} A_ik X_kj − Σ_{k ∈ blk(i)} X_ik A_kj
                for k in blocks[block_of[j]].clone() {
                    let c = a[(i, k)];
                    if c.norm_sqr() > 0.0 {
                        row.push((var(k, j), c));
                    }
                }
                for k in blocks[block_of[i]].clone() {
                    let c = a[(k, j)];
                    if c.norm_sqr() > 0.0 {
                        row.push((var(i, k), -c));
                    }
                }
                for &(p, cp) in &row {
                    for &(q, cq) in &row {
                        gram[(p, q)] += cp.conj() * cq;
                    }
                }
            }
        }
    }
    let eig = hermitian_eigenvalues(&gram);
    let scale = eig.last().copied().unwrap_or(0.0).max(1.0);
    let cut = fam.tol().max(rank_threshold(unknowns, scale));
    Ok(eig.iter().filter(|&&x| x <= cut).count())
}

/// Orthonormal basis of the numerical range of the interior defect at `v`.
pub fn defect_range(fam: &OperatorFamily, color: Option<ColorId>, v: VertexId) -> CMat {
    let dm = defect_matrix(fam, color, v);
    let (vals, vecs) = hermitian_eigh(&dm);
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    let thr = defect_threshold(fam, top);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > thr).collect();
    select_columns(&vecs, &keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_cycle_exact, build_fock, build_pi_v, build_rho_infty, direct_sum};
    use crate::graph::{select_tails, EdgeId, Graph};
    use num_complex::Complex64;

    fn loop_graph() -> Graph {
        Graph::new(&["v"], &[("e", "v", "v")]).unwrap()
    }

    fn two_cycle() -> Graph {
        Graph::new(&["u", "v"], &[("e", "u", "v"), ("f", "v", "u")]).unwrap()
    }

    #[test]
    fn fock_loop_is_tck() {
        let r = check_tck(&build_fock(&loop_graph(), 4).unwrap());
        assert_eq!(r.classification, Classification::Tck);
        assert!(r.max_isometry_residual() <= 1e-12);
        assert_eq!(r.singular.len(), 1);
        assert_eq!(r.singular[0].rank, 1);
    }

    #[test]
    fn cycle_exact_is_full_ck_exactly() {
        let r = check_full_ck(&build_cycle_exact(&two_cycle()).unwrap());
        assert_eq!(r.classification, Classification::FullCk);
        assert_eq!(r.max_isometry_residual(), 0.0);
        assert_eq!(r.max_defect(), 0.0);
        assert!(r.singular.is_empty());
    }

    #[test]
    fn scaled_edge_is_invalid() {
        let f = build_fock(&loop_graph(), 4)
            .unwrap()
            .scale_edge(EdgeId(0), Complex64::new(1.1, 0.0));
        let r = check_tck(&f);
        assert_eq!(r.classification, Classification::Invalid);
        // 1.1² − 1 on the interior block
        assert!((r.max_isometry_residual() - 0.21).abs() < 1e-12);
    }

    #[test]
    fn rho_is_full_ck_and_pi_v_singular() {
        for g in [loop_graph(), two_cycle()] {
            let t = select_tails(&g);
            for n in 1..5 {
                let r = check_full_ck(&build_rho_infty(&g, &t, n).unwrap());
                assert_eq!(r.classification, Classification::FullCk, "depth {n}");
            }
        }
        let g = loop_graph();
        let s = singular_vertices(&build_pi_v(&g, VertexId(0), 5).unwrap());
        assert_eq!(s, vec![SingularVertex { color: "0".into(), vertex: "v".into(), rank: 1 }]);
        let edgeless = Graph::new(&["a"], &[]).unwrap();
        let r = check_full_ck(&build_fock(&edgeless, 2).unwrap());
        assert_eq!(r.classification, Classification::FullCk);
    }

    #[test]
    fn classification_is_min_over_direct_sums() {
        let g = loop_graph();
        let a = build_cycle_exact(&g).unwrap();
        let b = build_fock(&g, 3).unwrap();
        let both = direct_sum(&[&a, &b]).unwrap();
        assert_eq!(check_tck(&both).classification, Classification::Tck);
        let aa = direct_sum(&[&a, &a]).unwrap();
        assert_eq!(check_tck(&aa).classification, Classification::FullCk);
    }

    #[test]
    fn commutant_dimensions() {
        let c2 = build_cycle_exact(&two_cycle()).unwrap();
        assert_eq!(commutant_dimension(&c2).unwrap(), 1);
        let twice = direct_sum(&[&c2, &c2]).unwrap();
        assert_eq!(commutant_dimension(&twice).unwrap(), 4);
        let one = build_fock(&Graph::new(&["a"], &[]).unwrap(), 1).unwrap();
        assert_eq!(commutant_dimension(&one).unwrap(), 1);
        assert!(matches!(
            commutant_dimension_with_guard(&c2, 1),
            Err(Error::GuardExceeded(_))
        ));
    }
}
