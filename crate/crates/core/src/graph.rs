//! Finite colored directed graphs, their paths, and the enumerated bases the
//! representation builders are indexed by.
//!
//! Paths follow the right-to-left convention: a path `λ = e_n ⋯ e_1` starts
//! at `s(e_1)` and ends at `r(e_n)`, with `r(e_i) = s(e_{i+1})`. Internally
//! the edges are stored in traversal order (`e_1` first); `Display` output uses
//! the written order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Hard cap on enumerated basis sizes; dense matrices beyond this are not
/// realistic on a desk.
pub const MAX_BASIS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColorId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: VertexId,
    pub rng: VertexId,
    pub color: ColorId,
}

/// Edge as written in a graph document: ids are strings, color optional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub color: String,
}

impl EdgeSpec {
    pub fn new(id: &str, src: &str, dst: &str) -> Self {
        Self::colored(id, src, dst, DEFAULT_COLOR)
    }

    pub fn colored(id: &str, src: &str, dst: &str, color: &str) -> Self {
        EdgeSpec {
            id: id.to_string(),
            src: src.to_string(),
            dst: dst.to_string(),
            color: color.to_string(),
        }
    }
}

pub const DEFAULT_COLOR: &str = "0";

/// A finite directed multigraph with an edge coloring. Edge and vertex ids
/// order by declaration; colors order by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    colors: Vec<String>,
    vertex_index: BTreeMap<String, VertexId>,
    edge_index: BTreeMap<String, EdgeId>,
    in_edges: Vec<Vec<EdgeId>>,
    out_edges: Vec<Vec<EdgeId>>,
}

impl Graph {
    pub fn from_specs(vertices: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let mut vertex_index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.clone(), VertexId(i)).is_some() {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        let colors: Vec<String> = {
            let set: BTreeSet<&str> = edges.iter().map(|e| e.color.as_str()).collect();
            if set.is_empty() {
                vec![DEFAULT_COLOR.to_string()]
            } else {
                set.into_iter().map(str::to_string).collect()
            }
        };
        let mut edge_index = BTreeMap::new();
        let mut out = Vec::with_capacity(edges.len());
        let mut in_edges = vec![Vec::new(); vertices.len()];
        let mut out_edges = vec![Vec::new(); vertices.len()];
        for (i, spec) in edges.into_iter().enumerate() {
            if edge_index.insert(spec.id.clone(), EdgeId(i)).is_some() {
                return Err(Error::DuplicateEdge(spec.id));
            }
            let lookup = |name: &str| {
                vertex_index.get(name).copied().ok_or_else(|| Error::DanglingEdge {
                    edge: spec.id.clone(),
                    vertex: name.to_string(),
                })
            };
            let src = lookup(&spec.src)?;
            let rng = lookup(&spec.dst)?;
            let color = ColorId(colors.iter().position(|c| *c == spec.color).unwrap());
            in_edges[rng.0].push(EdgeId(i));
            out_edges[src.0].push(EdgeId(i));
            out.push(Edge {
                id: spec.id,
                src,
                rng,
                color,
            });
        }
        Ok(Graph {
            vertices,
            edges: out,
            colors,
            vertex_index,
            edge_index,
            in_edges,
            out_edges,
        })
    }

    /// Single-colored graph from `(id, src, dst)` triples.
    pub fn new(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<Self> {
        Self::from_specs(
            vertices.iter().map(|v| v.to_string()).collect(),
            edges.iter().map(|(id, s, d)| EdgeSpec::new(id, s, d)).collect(),
        )
    }

    /// Colored graph from `(id, src, dst, color)` quadruples.
    pub fn colored(vertices: &[&str], edges: &[(&str, &str, &str, &str)]) -> Result<Self> {
        Self::from_specs(
            vertices.iter().map(|v| v.to_string()).collect(),
            edges
                .iter()
                .map(|(id, s, d, c)| EdgeSpec::colored(id, s, d, c))
                .collect(),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].id
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(name.to_string()))
    }

    pub fn src(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].src
    }

    pub fn rng(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].rng
    }

    pub fn color(&self, e: EdgeId) -> ColorId {
        self.edges[e.0].color
    }

    pub fn colors(&self) -> impl Iterator<Item = ColorId> + '_ {
        (0..self.colors.len()).map(ColorId)
    }

    pub fn color_count(&self) -> usize {
        self.colors.len()
    }

    pub fn color_name(&self, c: ColorId) -> &str {
        &self.colors[c.0]
    }

    pub fn color_id(&self, name: &str) -> Result<ColorId> {
        self.colors
            .iter()
            .position(|c| c == name)
            .map(ColorId)
            .ok_or_else(|| Error::Invalid(format!("unknown color `{name}`")))
    }

    /// Edges with range `v`, ascending by id.
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v.0]
    }

    /// Edges with source `v`, ascending by id.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v.0]
    }

    pub fn in_edges_of_color(&self, v: VertexId, c: ColorId) -> impl Iterator<Item = EdgeId> + '_ {
        self.in_edges[v.0]
            .iter()
            .copied()
            .filter(move |&e| self.color(e) == c)
    }

    /// Vertices receiving at least one edge.
    pub fn receivers(&self) -> BTreeSet<VertexId> {
        self.edges.iter().map(|e| e.rng).collect()
    }

    /// Vertices receiving at least one edge of color `c`.
    pub fn receivers_of_color(&self, c: ColorId) -> BTreeSet<VertexId> {
        self.edges
            .iter()
            .filter(|e| e.color == c)
            .map(|e| e.rng)
            .collect()
    }

    /// The graph `(V, c⁻¹(color))` as a single-colored graph. Edge ids keep
    /// their names; edge numbering is compacted.
    pub fn color_subgraph(&self, c: ColorId) -> Graph {
        let edges = self
            .edges
            .iter()
            .filter(|e| e.color == c)
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                src: self.vertices[e.src.0].clone(),
                dst: self.vertices[e.rng.0].clone(),
                color: self.colors[c.0].clone(),
            })
            .collect();
        Graph::from_specs(self.vertices.clone(), edges).expect("subgraph of a valid graph")
    }

    /// Same vertices and edges with every edge recolored to `color`.
    pub fn uncolored(&self) -> Graph {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                src: self.vertices[e.src.0].clone(),
                dst: self.vertices[e.rng.0].clone(),
                color: DEFAULT_COLOR.to_string(),
            })
            .collect();
        Graph::from_specs(self.vertices.clone(), edges).expect("recoloring a valid graph")
    }

    pub fn to_specs(&self) -> (Vec<String>, Vec<EdgeSpec>) {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                src: self.vertices[e.src.0].clone(),
                dst: self.vertices[e.rng.0].clone(),
                color: self.colors[e.color.0].clone(),
            })
            .collect();
        (self.vertices.clone(), edges)
    }
}

/// `V_r = { v : r⁻¹(v) ≠ ∅ }`.
pub fn receivers(g: &Graph) -> BTreeSet<VertexId> {
    g.receivers()
}

/// A finite path. Length-0 paths are vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    steps: Vec<EdgeId>,
    source: VertexId,
    range: VertexId,
}

impl Path {
    pub fn vertex(v: VertexId) -> Self {
        Path {
            steps: Vec::new(),
            source: v,
            range: v,
        }
    }

    pub fn edge(g: &Graph, e: EdgeId) -> Self {
        Path {
            steps: vec![e],
            source: g.src(e),
            range: g.rng(e),
        }
    }

    /// Path from edges in traversal order (`e_1` first).
    pub fn from_steps(g: &Graph, steps: Vec<EdgeId>) -> Result<Self> {
        let first = *steps
            .first()
            .ok_or_else(|| Error::InvalidPath("empty edge list; use Path::vertex".into()))?;
        for w in steps.windows(2) {
            if g.rng(w[0]) != g.src(w[1]) {
                return Err(Error::InvalidPath(format!(
                    "r({}) = {} but s({}) = {}",
                    g.edge_name(w[0]),
                    g.vertex_name(g.rng(w[0])),
                    g.edge_name(w[1]),
                    g.vertex_name(g.src(w[1]))
                )));
            }
        }
        let last = *steps.last().unwrap();
        Ok(Path {
            source: g.src(first),
            range: g.rng(last),
            steps,
        })
    }

    /// Path from edge names in written order, `"e_n ... e_1"`.
    pub fn parse_written(g: &Graph, written: &[&str]) -> Result<Self> {
        let mut steps = written
            .iter()
            .map(|n| g.edge_id(n))
            .collect::<Result<Vec<_>>>()?;
        steps.reverse();
        Self::from_steps(g, steps)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_vertex(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn range(&self) -> VertexId {
        self.range
    }

    /// Edges in traversal order, `e_1` first.
    pub fn steps(&self) -> &[EdgeId] {
        &self.steps
    }

    /// The source-end edge `e_1`.
    pub fn first_step(&self) -> Option<EdgeId> {
        self.steps.first().copied()
    }

    /// The range-end edge `e_n`.
    pub fn last_step(&self) -> Option<EdgeId> {
        self.steps.last().copied()
    }

    /// `eλ`, defined when `s(e) = r(λ)`.
    pub fn prepend(&self, g: &Graph, e: EdgeId) -> Option<Path> {
        if g.src(e) != self.range {
            return None;
        }
        let mut steps = self.steps.clone();
        steps.push(e);
        Some(Path {
            steps,
            source: self.source,
            range: g.rng(e),
        })
    }

    /// `λ · λ'` (λ after λ'), defined when `s(λ) = r(λ')`.
    pub fn compose(&self, inner: &Path) -> Option<Path> {
        if self.source != inner.range {
            return None;
        }
        let mut steps = inner.steps.clone();
        steps.extend_from_slice(&self.steps);
        Some(Path {
            steps,
            source: inner.source,
            range: self.range,
        })
    }

    /// Removes `e_1`; the result starts at `r(e_1)`.
    pub fn drop_first(&self, g: &Graph) -> Option<Path> {
        let first = self.first_step()?;
        let steps = self.steps[1..].to_vec();
        let source = g.rng(first);
        Some(Path {
            steps,
            source,
            range: self.range,
        })
    }

    /// If `self = outer · rest`, returns `rest`... i.e. strips a prefix at the
    /// range end. Used when cancelling `s_ν* s_α`.
    pub fn strip_range_prefix(&self, outer: &Path) -> Option<Path> {
        if outer.range != self.range || outer.len() > self.len() {
            return None;
        }
        let k = self.len() - outer.len();
        if self.steps[k..] != outer.steps[..] {
            return None;
        }
        if outer.is_vertex() {
            return Some(self.clone());
        }
        let rest_range = outer.source;
        Some(Path {
            steps: self.steps[..k].to_vec(),
            source: self.source,
            range: rest_range,
        })
    }

    pub fn display<'a>(&'a self, g: &'a Graph) -> PathDisplay<'a> {
        PathDisplay { path: self, graph: g }
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.steps
            .len()
            .cmp(&other.steps.len())
            .then_with(|| self.steps.cmp(&other.steps))
            .then_with(|| self.source.cmp(&other.source))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    graph: &'a Graph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_vertex() {
            return write!(f, "{}", self.graph.vertex_name(self.path.source));
        }
        let names: Vec<&str> = self
            .path
            .steps
            .iter()
            .rev()
            .map(|&e| self.graph.edge_name(e))
            .collect();
        write!(f, "{}", names.join(" "))
    }
}

/// All paths of length at most `depth`, ordered by length and then
/// lexicographically on the traversal edge sequence.
#[derive(Clone, Debug)]
pub struct PathBasis {
    depth: usize,
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
}

impl PathBasis {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Paths with `s(λ) = v`, in basis order: the basis of `ℓ²(s⁻¹(v))`.
    pub fn from_source(&self, v: VertexId) -> Vec<Path> {
        self.paths.iter().filter(|p| p.source() == v).cloned().collect()
    }
}

pub fn enumerate_paths(g: &Graph, depth: usize) -> Result<PathBasis> {
    enumerate_paths_where(g, depth, |_| true)
}

/// Paths of length at most `depth` starting at `v`.
pub fn enumerate_paths_from(g: &Graph, v: VertexId, depth: usize) -> Result<PathBasis> {
    enumerate_paths_where(g, depth, |w| w == v)
}

fn enumerate_paths_where(
    g: &Graph,
    depth: usize,
    keep_source: impl Fn(VertexId) -> bool,
) -> Result<PathBasis> {
    let mut layer: Vec<Path> = g.vertices().filter(|&v| keep_source(v)).map(Path::vertex).collect();
    let mut paths = layer.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in &layer {
            for &e in g.out_edges(p.range()) {
                next.push(p.prepend(g, e).expect("out edge chains"));
            }
        }
        next.sort();
        if paths.len() + next.len() > MAX_BASIS {
            return Err(Error::TooLarge(format!(
                "more than {MAX_BASIS} paths up to depth {depth}"
            )));
        }
        paths.extend(next.iter().cloned());
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    paths.sort();
    let index = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    Ok(PathBasis { depth, paths, index })
}

/// A backward tail `μ_v = e_{v,1} e_{v,2} ⋯` with `r(e_{v,1}) = v`, listed from
/// the range end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    /// `v` receives no edges.
    Empty,
    /// Ends at a vertex that receives no edges.
    Finite(Vec<EdgeId>),
    /// `prefix` followed by `cycle` repeated forever.
    Periodic { prefix: Vec<EdgeId>, cycle: Vec<EdgeId> },
}

impl Tail {
    /// `None` for infinite tails.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            Tail::Empty => Some(0),
            Tail::Finite(es) => Some(es.len()),
            Tail::Periodic { .. } => None,
        }
    }

    /// `e_{v,i}` for `i ≥ 1`.
    pub fn edge_at(&self, i: usize) -> Option<EdgeId> {
        if i == 0 {
            return None;
        }
        match self {
            Tail::Empty => None,
            Tail::Finite(es) => es.get(i - 1).copied(),
            Tail::Periodic { prefix, cycle } => {
                if i <= prefix.len() {
                    Some(prefix[i - 1])
                } else {
                    let k = (i - 1 - prefix.len()) % cycle.len();
                    Some(cycle[k])
                }
            }
        }
    }

    /// Largest meaningful truncation index not exceeding `depth`.
    pub fn max_index(&self, depth: usize) -> usize {
        match self.len() {
            Some(l) => l.min(depth),
            None => depth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailSelection {
    tails: Vec<Tail>,
}

impl TailSelection {
    /// Validates a hand-chosen selection against `g`.
    pub fn new(g: &Graph, tails: Vec<Tail>) -> Result<Self> {
        let sel = TailSelection { tails };
        sel.check(g)?;
        Ok(sel)
    }

    pub fn tail(&self, v: VertexId) -> &Tail {
        &self.tails[v.0]
    }

    pub fn len(&self) -> usize {
        self.tails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tails.is_empty()
    }

    /// `s(μ_{v,i})`; `v` itself when `i = 0`.
    pub fn truncation_source(&self, g: &Graph, v: VertexId, i: usize) -> VertexId {
        let i = self.tails[v.0].max_index(i);
        match self.tails[v.0].edge_at(i) {
            Some(e) => g.src(e),
            None => v,
        }
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.tails.len() != g.vertex_count() {
            return Err(Error::InconsistentTails(format!(
                "{} tails for {} vertices",
                self.tails.len(),
                g.vertex_count()
            )));
        }
        for v in g.vertices() {
            let name = g.vertex_name(v);
            let chain = |edges: &[EdgeId], start: VertexId| -> Result<VertexId> {
                let mut at = start;
                for &e in edges {
                    if e.0 >= g.edge_count() || g.rng(e) != at {
                        return Err(Error::InconsistentTails(format!(
                            "tail of `{name}` does not chain backward"
                        )));
                    }
                    at = g.src(e);
                }
                Ok(at)
            };
            match &self.tails[v.0] {
                Tail::Empty => {
                    if !g.in_edges(v).is_empty() {
                        return Err(Error::InconsistentTails(format!(
                            "`{name}` receives edges but has an empty tail"
                        )));
                    }
                }
                Tail::Finite(es) => {
                    let end = chain(es, v)?;
                    if !g.in_edges(end).is_empty() {
                        return Err(Error::InconsistentTails(format!(
                            "finite tail of `{name}` ends at `{}`, which is not a source",
                            g.vertex_name(end)
                        )));
                    }
                }
                Tail::Periodic { prefix, cycle } => {
                    if cycle.is_empty() {
                        return Err(Error::InconsistentTails(format!(
                            "periodic tail of `{name}` has an empty cycle"
                        )));
                    }
                    let start = chain(prefix, v)?;
                    let end = chain(cycle, start)?;
                    if end != start {
                        return Err(Error::InconsistentTails(format!(
                            "cycle in tail of `{name}` does not close"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Deterministic tails: at each backward step take the smallest incoming edge,
/// stopping at a source or closing the first repeated vertex into a cycle.
pub fn select_tails(g: &Graph) -> TailSelection {
    let tails = g
        .vertices()
        .map(|v| {
            let mut seen: HashMap<VertexId, usize> = HashMap::new();
            let mut edges = Vec::new();
            let mut at = v;
            loop {
                if let Some(&pos) = seen.get(&at) {
                    let cycle = edges.split_off(pos);
                    break Tail::Periodic {
                        prefix: edges,
                        cycle,
                    };
                }
                seen.insert(at, edges.len());
                match g.in_edges(at).first() {
                    None if edges.is_empty() => break Tail::Empty,
                    None => break Tail::Finite(edges),
                    Some(&e) => {
                        edges.push(e);
                        at = g.src(e);
                    }
                }
            }
        })
        .collect();
    TailSelection { tails }
}

/// The symbol `λ μ_{v,i}⁻¹`, with `s(λ) = s(μ_{v,i})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BackwardSymbol {
    pub lambda: Path,
    pub vertex: VertexId,
    pub index: usize,
}

impl BackwardSymbol {
    /// `|λ| - |μ_{v,i}|`; the gauge action scales by `z` to this power.
    pub fn degree(&self) -> i64 {
        self.lambda.len() as i64 - self.index as i64
    }
}

impl Ord for BackwardSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertex
            .cmp(&other.vertex)
            .then(self.index.cmp(&other.index))
            .then_with(|| self.lambda.cmp(&other.lambda))
    }
}

impl PartialOrd for BackwardSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reduced symbols `λ μ_{v,i}⁻¹` with `|λ| ≤ N` and `i ≤ N`. A symbol is reduced
/// when `λ` does not start with `e_{v,i}`; otherwise `λ' e_{v,i} μ_{v,i}⁻¹`
/// collapses to `λ' μ_{v,i-1}⁻¹`.
#[derive(Clone, Debug)]
pub struct BackwardBasis {
    depth: usize,
    tails: TailSelection,
    symbols: Vec<BackwardSymbol>,
    index: HashMap<BackwardSymbol, usize>,
}

impl BackwardBasis {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tails(&self) -> &TailSelection {
        &self.tails
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[BackwardSymbol] {
        &self.symbols
    }

    pub fn index_of(&self, s: &BackwardSymbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Canonical representative under `λ e_{v,i} μ_{v,i}⁻¹ ~ λ μ_{v,i-1}⁻¹`.
    /// Indices past a finite tail's length are clamped first.
    pub fn reduce(&self, g: &Graph, s: &BackwardSymbol) -> BackwardSymbol {
        reduce_symbol(g, &self.tails, s)
    }

    /// `r(λ)`.
    pub fn range(&self, s: &BackwardSymbol) -> VertexId {
        s.lambda.range()
    }

    /// `T_e ξ_{λμ⁻¹} = ξ_{eλμ⁻¹}` when `r(λ) = s(e)` and the reduced result is
    /// in the basis.
    pub fn apply_edge(&self, g: &Graph, e: EdgeId, s: &BackwardSymbol) -> Option<usize> {
        let lambda = s.lambda.prepend(g, e)?;
        let t = reduce_symbol(
            g,
            &self.tails,
            &BackwardSymbol {
                lambda,
                vertex: s.vertex,
                index: s.index,
            },
        );
        if t.lambda.len() > self.depth {
            return None;
        }
        self.index_of(&t)
    }

    /// Interior symbols: `|λ| < N`, and not the bottom vertex symbol
    /// `μ_{v,N}⁻¹` of a tail that continues past `N`.
    pub fn is_interior(&self, s: &BackwardSymbol) -> bool {
        if s.lambda.len() >= self.depth {
            return false;
        }
        let continues = match self.tails.tail(s.vertex).len() {
            Some(l) => l > s.index,
            None => true,
        };
        !(s.lambda.is_vertex() && s.index == self.depth && continues)
    }

    /// Basis positions of the symbols owned by tail vertex `v`.
    pub fn component(&self, v: VertexId) -> Vec<usize> {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| s.vertex == v)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn label(&self, g: &Graph, s: &BackwardSymbol) -> String {
        let tail = self.tails.tail(s.vertex);
        let mu: Vec<&str> = (1..=s.index)
            .filter_map(|i| tail.edge_at(i))
            .map(|e| g.edge_name(e))
            .collect();
        if mu.is_empty() {
            format!("{}", s.lambda.display(g))
        } else {
            format!("{} ({})^-1", s.lambda.display(g), mu.join(" "))
        }
    }
}

fn reduce_symbol(g: &Graph, tails: &TailSelection, s: &BackwardSymbol) -> BackwardSymbol {
    let tail = tails.tail(s.vertex);
    let mut index = tail.max_index(s.index);
    let mut lambda = s.lambda.clone();
    while index > 0 {
        match (lambda.first_step(), tail.edge_at(index)) {
            (Some(a), Some(b)) if a == b => {
                lambda = lambda.drop_first(g).expect("nonempty");
                index -= 1;
            }
            _ => break,
        }
    }
    BackwardSymbol {
        lambda,
        vertex: s.vertex,
        index,
    }
}

pub fn enumerate_backward_basis(g: &Graph, tails: &TailSelection, depth: usize) -> Result<BackwardBasis> {
    tails.check(g)?;
    let paths = enumerate_paths(g, depth)?;
    let mut symbols = Vec::new();
    for v in g.vertices() {
        let tail = tails.tail(v);
        for i in 0..=tail.max_index(depth) {
            let start = tails.truncation_source(g, v, i);
            let cancel = tail.edge_at(i);
            for lambda in paths.paths().iter().filter(|p| p.source() == start) {
                let reduced = match (lambda.first_step(), cancel) {
                    (Some(a), Some(b)) => a != b,
                    _ => true,
                };
                if reduced {
                    symbols.push(BackwardSymbol {
                        lambda: lambda.clone(),
                        vertex: v,
                        index: i,
                    });
                }
            }
            if symbols.len() > MAX_BASIS {
                return Err(Error::TooLarge(format!(
                    "more than {MAX_BASIS} backward symbols at depth {depth}"
                )));
            }
        }
    }
    symbols.sort();
    let index = symbols.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(BackwardBasis {
        depth,
        tails: tails.clone(),
        symbols,
        index,
    })
}
