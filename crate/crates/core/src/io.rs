//! JSON documents for graphs, families, reports, Wold decompositions and
//! dilation certificates. Floats are written in shortest round-trip form, so a
//! family written and read back is bit-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dilate::{DefectEntry, DilationCertificate};
use crate::error::{Error, Result};
use crate::family::{OperatorFamily, DEFAULT_TOL};
use crate::graph::{EdgeSpec, Graph, DEFAULT_COLOR};
use crate::linalg::{as_coordinate_projection, identity, zeros, CMat};
use crate::verify::RelationReport;
use crate::wold::{WoldDecomposition, WoldDiagnostics};

pub const TOOL: &str = "ckbench";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Matrices with more entries than this are refused on read and write.
pub const MAX_ENTRIES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub tolerance: f64,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(tolerance: f64, depth: Option<usize>, seed: Option<u64>) -> Self {
        Meta {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            tolerance,
            depth,
            seed,
        }
    }
}

fn default_color() -> String {
    DEFAULT_COLOR.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub src: String,
    pub dst: String,
    #[serde(default = "default_color")]
    pub color: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

impl GraphDoc {
    pub fn from_graph(g: &Graph) -> Self {
        let (vertices, specs) = g.to_specs();
        GraphDoc {
            vertices,
            edges: specs
                .into_iter()
                .map(|s| EdgeDoc {
                    id: s.id,
                    src: s.src,
                    dst: s.dst,
                    color: s.color,
                })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        let specs = self
            .edges
            .iter()
            .map(|e| EdgeSpec::colored(&e.id, &e.src, &e.dst, &e.color))
            .collect();
        Graph::from_specs(self.vertices.clone(), specs)
    }
}

/// Row-major: one list of `[re, im]` pairs per row.
pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

fn guard(rows: usize, cols: usize, what: &str) -> Result<()> {
    if rows.saturating_mul(cols) > MAX_ENTRIES {
        return Err(Error::TooLarge(format!(
            "{what} has {rows}x{cols} entries, above the {MAX_ENTRIES}-entry limit for text documents; \
             lower the depth or split the graph"
        )));
    }
    Ok(())
}

pub fn matrix_to_doc(m: &CMat) -> Result<MatrixDoc> {
    guard(m.nrows(), m.ncols(), "matrix")?;
    let mut out = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        let mut row = Vec::with_capacity(m.ncols());
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Invalid(format!("non-finite entry at ({i}, {j})")));
            }
            row.push([z.re, z.im]);
        }
        out.push(row);
    }
    Ok(out)
}

/// `cols` is needed for matrices with no rows.
pub fn matrix_from_doc(doc: &MatrixDoc, cols: usize, what: &str) -> Result<CMat> {
    guard(doc.len(), cols, what)?;
    let mut m = zeros(doc.len(), cols);
    for (i, row) in doc.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::DimensionMismatch {
                what: format!("{what} row {i}"),
                expected: cols,
                found: row.len(),
            });
        }
        for (j, [re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(*re, *im);
        }
    }
    Ok(m)
}

fn square_from_doc(doc: &MatrixDoc, dim: usize, what: &str) -> Result<CMat> {
    if doc.len() != dim {
        return Err(Error::DimensionMismatch {
            what: what.to_string(),
            expected: dim,
            found: doc.len(),
        });
    }
    matrix_from_doc(doc, dim, what)
}

/// Inline graph or a path relative to the document's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Inline(GraphDoc),
    File(String),
}

/// `"all"`, a list of interior basis indices, or a full matrix for interiors
/// that are not coordinate projections (after a change of basis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InteriorDoc {
    Keyword(String),
    Indices(Vec<usize>),
    Matrix { matrix: MatrixDoc },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    pub graph: GraphRef,
    pub dimension: usize,
    pub interior: InteriorDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(rename = "P")]
    pub p: BTreeMap<String, MatrixDoc>,
    #[serde(rename = "S")]
    pub s: BTreeMap<String, MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl FamilyDoc {
    pub fn from_family(fam: &OperatorFamily, meta: Option<Meta>) -> Result<Self> {
        let d = fam.dim();
        guard(d, d, "family")?;
        let g = fam.graph();
        let interior = if *fam.interior() == identity(d) {
            InteriorDoc::Keyword("all".into())
        } else if let Some(idx) = as_coordinate_projection(fam.interior()) {
            InteriorDoc::Indices(idx)
        } else {
            InteriorDoc::Matrix {
                matrix: matrix_to_doc(fam.interior())?,
            }
        };
        let mut p = BTreeMap::new();
        for v in g.vertices() {
            p.insert(g.vertex_name(v).to_string(), matrix_to_doc(fam.p(v))?);
        }
        let mut s = BTreeMap::new();
        for e in g.edge_ids() {
            s.insert(g.edge_name(e).to_string(), matrix_to_doc(fam.s(e))?);
        }
        Ok(FamilyDoc {
            meta,
            graph: GraphRef::Inline(GraphDoc::from_graph(g)),
            dimension: d,
            interior,
            tolerance: Some(fam.tol()),
            p,
            s,
            labels: fam.labels().map(<[String]>::to_vec),
        })
    }

    /// `base` resolves a graph given by file name.
    pub fn to_family(&self, base: Option<&FsPath>) -> Result<OperatorFamily> {
        let g = match &self.graph {
            GraphRef::Inline(doc) => doc.to_graph()?,
            GraphRef::File(name) => {
                let path = base.map_or_else(|| PathBuf::from(name), |b| b.join(name));
                read_graph(&path)?
            }
        };
        let d = self.dimension;
        guard(d, d, "family")?;
        let interior = match &self.interior {
            InteriorDoc::Keyword(k) if k == "all" => identity(d),
            InteriorDoc::Keyword(k) => {
                return Err(Error::Invalid(format!("interior must be \"all\", indices or a matrix, got `{k}`")))
            }
            InteriorDoc::Indices(idx) => {
                if let Some(&bad) = idx.iter().find(|&&i| i >= d) {
                    return Err(Error::Invalid(format!("interior index {bad} out of range for dimension {d}")));
                }
                crate::linalg::coordinate_projection(d, idx.iter().copied())
            }
            InteriorDoc::Matrix { matrix } => square_from_doc(matrix, d, "interior")?,
        };
        for name in self.p.keys() {
            g.vertex_id(name)?;
        }
        for name in self.s.keys() {
            g.edge_id(name)?;
        }
        let mut p = Vec::with_capacity(g.vertex_count());
        for v in g.vertices() {
            let name = g.vertex_name(v);
            let m = self
                .p
                .get(name)
                .ok_or_else(|| Error::Invalid(format!("missing projection for vertex `{name}`")))?;
            p.push(square_from_doc(m, d, &format!("P[{name}]"))?);
        }
        let mut s = Vec::with_capacity(g.edge_count());
        for e in g.edge_ids() {
            let name = g.edge_name(e);
            let m = self
                .s
                .get(name)
                .ok_or_else(|| Error::Invalid(format!("missing operator for edge `{name}`")))?;
            s.push(square_from_doc(m, d, &format!("S[{name}]"))?);
        }
        let tol = self.tolerance.unwrap_or(DEFAULT_TOL);
        let mut fam = OperatorFamily::new(Arc::new(g), p, s, interior)?.with_tol(tol);
        if let Some(l) = &self.labels {
            fam = fam.with_labels(l.clone())?;
        }
        Ok(fam)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub meta: Meta,
    pub report: RelationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityDoc {
    pub vertex: String,
    pub alpha: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub vertex: String,
    pub copy: usize,
    pub wanderer: Vec<[f64; 2]>,
    /// Written order, `""` for a vertex path.
    pub paths: Vec<String>,
    /// Column `j` is the vector labelled by `paths[j]`.
    pub vectors: MatrixDoc,
    pub intertwining_defect: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub orthogonality: f64,
    pub coinvariance: f64,
    pub reducing: f64,
    pub intertwining: f64,
    pub leakage: f64,
    pub complement_defect: f64,
}

impl From<&WoldDiagnostics> for DiagnosticsDoc {
    fn from(d: &WoldDiagnostics) -> Self {
        DiagnosticsDoc {
            orthogonality: d.orthogonality,
            coinvariance: d.coinvariance,
            reducing: d.reducing,
            intertwining: d.intertwining,
            leakage: d.leakage,
            complement_defect: d.complement_defect,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WoldDoc {
    pub meta: Meta,
    pub dimension: usize,
    pub multiplicities: Vec<MultiplicityDoc>,
    pub blocks: Vec<BlockDoc>,
    pub complement: MatrixDoc,
    pub diagnostics: DiagnosticsDoc,
}

impl WoldDoc {
    pub fn from_decomposition(w: &WoldDecomposition, g: &Graph, meta: Meta) -> Result<Self> {
        let mut blocks = Vec::with_capacity(w.blocks.len());
        for b in &w.blocks {
            blocks.push(BlockDoc {
                vertex: g.vertex_name(b.vertex).to_string(),
                copy: b.copy,
                wanderer: b.wanderer.iter().map(|z| [z.re, z.im]).collect(),
                paths: b.paths.iter().map(|p| p.display(g).to_string()).collect(),
                vectors: matrix_to_doc(&b.vectors)?,
                intertwining_defect: b.intertwining_defect,
            });
        }
        Ok(WoldDoc {
            meta,
            dimension: w.dimension,
            multiplicities: w
                .multiplicities
                .iter()
                .map(|(v, a)| MultiplicityDoc {
                    vertex: g.vertex_name(*v).to_string(),
                    alpha: *a,
                })
                .collect(),
            blocks,
            complement: matrix_to_doc(&w.complement)?,
            diagnostics: (&w.diagnostics).into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub meta: Meta,
    pub embedding_rows: usize,
    pub embedding_cols: usize,
    pub embedding: MatrixDoc,
    pub embedding_defect: f64,
    pub compression_error: f64,
    pub max_degree: usize,
    pub monomials_checked: usize,
    pub defects: Vec<DefectEntry>,
    pub max_defect: f64,
    pub depth: usize,
    pub tolerance: f64,
    pub complete: bool,
}

impl CertificateDoc {
    pub fn from_certificate(c: &DilationCertificate, meta: Meta) -> Result<Self> {
        Ok(CertificateDoc {
            meta,
            embedding_rows: c.embedding.nrows(),
            embedding_cols: c.embedding.ncols(),
            embedding: matrix_to_doc(&c.embedding)?,
            embedding_defect: c.embedding_defect,
            compression_error: c.compression_error,
            max_degree: c.max_degree,
            monomials_checked: c.monomials_checked,
            defects: c.defects.clone(),
            max_defect: c.max_defect,
            depth: c.depth,
            tolerance: c.tolerance,
            complete: c.complete,
        })
    }

    pub fn embedding(&self) -> Result<CMat> {
        if self.embedding.len() != self.embedding_rows {
            return Err(Error::DimensionMismatch {
                what: "embedding rows".into(),
                expected: self.embedding_rows,
                found: self.embedding.len(),
            });
        }
        matrix_from_doc(&self.embedding, self.embedding_cols, "embedding")
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &FsPath) -> Result<T> {
    let text = fs::read_to_string(path)?;
    from_json(&text)
}

pub fn read_graph(path: &FsPath) -> Result<Graph> {
    read_json::<GraphDoc>(path)?.to_graph()
}

pub fn write_graph(path: &FsPath, g: &Graph) -> Result<()> {
    write_json(path, &GraphDoc::from_graph(g))
}

pub fn read_family(path: &FsPath) -> Result<OperatorFamily> {
    let doc: FamilyDoc = read_json(path)?;
    doc.to_family(path.parent())
}

pub fn write_family(path: &FsPath, fam: &OperatorFamily, meta: Option<Meta>) -> Result<()> {
    write_json(path, &FamilyDoc::from_family(fam, meta)?)
}
